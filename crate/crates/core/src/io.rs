//! File formats and the small text grammars used on the command line.
//!
//! A state file is JSON:
//!
//! ```json
//! {"format": 1, "dim_a": 2, "dim_b": 2, "matrix": [[[0.5, 0.0], ...], ...]}
//! ```
//!
//! with `matrix` row-major in the A-major composite index and each entry a
//! `[re, im]` pair.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{BipartiteState, CMatrix};

pub const STATE_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub format: u32,
    pub dim_a: usize,
    pub dim_b: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl StateFile {
    pub fn from_state(state: &BipartiteState) -> Self {
        let m = state.matrix();
        StateFile {
            format: STATE_FORMAT,
            dim_a: state.dim_a(),
            dim_b: state.dim_b(),
            matrix: (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| [m[(i, j)].re, m[(i, j)].im])
                        .collect()
                })
                .collect(),
        }
    }

    /// Checks the shape and every state invariant.
    pub fn into_state(self) -> Result<BipartiteState> {
        if self.format != STATE_FORMAT {
            return Err(Error::Parse(format!(
                "unsupported state format {}, expected {STATE_FORMAT}",
                self.format
            )));
        }
        let d = self
            .dim_a
            .checked_mul(self.dim_b)
            .filter(|&d| d > 0)
            .ok_or_else(|| {
                Error::Dimension(format!("bad dimensions ({}, {})", self.dim_a, self.dim_b))
            })?;
        if self.matrix.len() != d {
            return Err(Error::Dimension(format!(
                "matrix has {} rows, expected {d}",
                self.matrix.len()
            )));
        }
        if let Some((i, row)) = self.matrix.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(Error::Dimension(format!(
                "row {i} has {} entries, expected {d}",
                row.len()
            )));
        }
        let m = CMatrix::from_fn(d, d, |i, j| {
            let [re, im] = self.matrix[i][j];
            Complex64::new(re, im)
        });
        BipartiteState::new(self.dim_a, self.dim_b, m)
    }
}

/// Parses a state file's JSON text.
pub fn parse_state(text: &str) -> Result<BipartiteState> {
    let file: StateFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("state file: {e}")))?;
    file.into_state()
}

pub fn state_to_json(state: &BipartiteState) -> String {
    serde_json::to_string(&StateFile::from_state(state)).expect("state files serialize")
}

fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
}

fn parse_f64(token: &str) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| Error::Parse(format!("{token:?} is not a number")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("{token:?} is not finite")));
    }
    Ok(v)
}

/// Comma- or space-separated finite reals, at least one.
pub fn parse_moment_list(text: &str) -> Result<Vec<f64>> {
    let values = tokens(text).map(parse_f64).collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::Parse("empty moment list".into()));
    }
    Ok(values)
}

/// Zero-based sites as a list of indices and inclusive ranges, e.g. `0-4` or
/// `0,2,5-7`. Returned sorted, without duplicates.
pub fn parse_cut(text: &str) -> Result<Vec<usize>> {
    let site = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("{t:?} is not a site index")))
    };
    let mut out = Vec::new();
    for token in tokens(text) {
        match token.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (site(a)?, site(b)?);
                if a > b {
                    return Err(Error::Parse(format!("descending range {token:?}")));
                }
                if b - a > 1 << 16 {
                    return Err(Error::Parse(format!("range {token:?} is too long")));
                }
                out.extend(a..=b);
            }
            None => out.push(site(token)?),
        }
    }
    if out.is_empty() {
        return Err(Error::Parse("empty cut".into()));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Either `start:stop:count` (inclusive, evenly spaced) or a list of values.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if let Some((start, rest)) = text.split_once(':') {
        let (stop, count) = rest
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("grid {text:?} is not start:stop:count")))?;
        let (start, stop) = (parse_f64(start.trim())?, parse_f64(stop.trim())?);
        if !(stop - start).is_finite() {
            return Err(Error::Parse(format!(
                "grid span {start} to {stop} overflows"
            )));
        }
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("{count:?} is not a point count")))?;
        return match count {
            0 => Err(Error::Parse("a grid needs at least one point".into())),
            1 => Ok(vec![start]),
            n if n > 1_000_000 => Err(Error::Parse(format!("{n} grid points is too many"))),
            n => Ok((0..n)
                .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
                .collect()),
        };
    }
    parse_moment_list(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{bell_state, sample_hs};

    #[test]
    fn state_roundtrip() {
        let rho = sample_hs(2, 3, 4).unwrap();
        let back = parse_state(&state_to_json(&rho)).unwrap();
        assert_eq!(back.matrix(), rho.matrix());
        assert_eq!((back.dim_a(), back.dim_b()), (2, 3));
    }

    #[test]
    fn rejected_files_name_the_problem() {
        let bell = StateFile::from_state(&bell_state());
        let mut wrong = bell.clone();
        wrong.format = 2;
        assert!(matches!(wrong.into_state(), Err(Error::Parse(_))));
        let mut short = bell.clone();
        short.matrix.pop();
        assert!(matches!(short.into_state(), Err(Error::Dimension(_))));
        let mut trace = bell.clone();
        trace.matrix[0][0] = [0.7, 0.0];
        let err = trace.into_state().unwrap_err().to_string();
        assert!(err.contains("trace"), "{err}");
        let mut herm = bell;
        herm.matrix[0][3] = [0.5, 0.1];
        assert!(matches!(herm.into_state(), Err(Error::NotHermitian { .. })));
        assert!(parse_state("{").is_err());
        assert!(parse_state(r#"{"format":1,"dim_a":2,"dim_b":2,"matrix":[],"x":1}"#).is_err());
    }

    #[test]
    fn lists_cuts_and_grids() {
        assert_eq!(
            parse_moment_list("1, 1,1 1 2").unwrap(),
            vec![1.0, 1.0, 1.0, 1.0, 2.0]
        );
        assert!(parse_moment_list("1,x").is_err());
        assert!(parse_moment_list("1,inf").is_err());
        assert!(parse_moment_list(" , ").is_err());
        assert_eq!(parse_cut("0-4").unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(parse_cut("5,0,2-3,2").unwrap(), vec![0, 2, 3, 5]);
        assert!(parse_cut("3-1").is_err());
        assert!(parse_cut("a").is_err());
        assert_eq!(
            parse_grid("0:1:5").unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(parse_grid("2:9:1").unwrap(), vec![2.0]);
        assert_eq!(parse_grid("0.5, 2").unwrap(), vec![0.5, 2.0]);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("-1e308:1e308:3").is_err());
    }
}
