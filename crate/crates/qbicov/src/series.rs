//! Series data for the B/C/D families: dimension, rank, sign vector
//! `eps_a`, half-integer vector `rho_a`, primed indices, and the derived
//! middle index for the odd orthogonal series.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Series {
    B,
    C,
    D,
}

impl Series {
    pub fn as_str(&self) -> &'static str {
        match self {
            Series::B => "B",
            Series::C => "C",
            Series::D => "D",
        }
    }

    pub fn parse(s: &str) -> Option<Series> {
        match s {
            "B" | "b" => Some(Series::B),
            "C" | "c" => Some(Series::C),
            "D" | "d" => Some(Series::D),
            _ => None,
        }
    }

    /// The orthogonal series of the right parity for dimension `n`.
    pub fn orthogonal(n: usize) -> Series {
        if n % 2 == 1 {
            Series::B
        } else {
            Series::D
        }
    }
}

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("bad dimension {dim} for series {series}: {reason}")]
    BadDimension {
        series: &'static str,
        dim: usize,
        reason: &'static str,
    },
}

/// Fundamental-representation data of one series at a fixed dimension.
#[derive(Debug, Clone)]
pub struct SeriesSpec {
    pub series: Series,
    /// Dimension N of the fundamental representation.
    pub dim: usize,
    /// Rank n: N = 2n+1 for B, N = 2n for C and D.
    pub rank: usize,
    /// Middle index (N+1)/2, odd orthogonal series only.
    pub n2: Option<u16>,
    /// +1 for B and D, -1 for C.
    pub eps: i64,
    /// Sign vector eps_a (1-based index a).
    eps_a: Vec<i64>,
    /// Doubled weights 2*rho_a so half-integers stay integral (1-based).
    rho2: Vec<i32>,
}

impl SeriesSpec {
    pub fn build(series: Series, dim: usize) -> Result<SeriesSpec, SeriesError> {
        let bad = |reason| SeriesError::BadDimension {
            series: series.as_str(),
            dim,
            reason,
        };
        let (rank, n2, eps) = match series {
            Series::B => {
                if dim < 3 {
                    return Err(bad("need N >= 3"));
                }
                if dim % 2 == 0 {
                    return Err(bad("need odd N = 2n+1"));
                }
                (dim / 2, Some(((dim + 1) / 2) as u16), 1)
            }
            Series::C => {
                if dim < 2 {
                    return Err(bad("need N >= 2"));
                }
                if dim % 2 == 1 {
                    return Err(bad("need even N = 2n"));
                }
                (dim / 2, None, -1)
            }
            Series::D => {
                if dim < 2 {
                    return Err(bad("need N >= 2"));
                }
                if dim % 2 == 1 {
                    return Err(bad("need even N = 2n"));
                }
                (dim / 2, None, 1)
            }
        };
        let n = rank;
        let mut rho2 = vec![0i32; dim + 1];
        for a in 1..=dim {
            let v = match series {
                // (N/2-1, ..., 1/2, 0, -1/2, ..., -N/2+1)
                Series::B => {
                    if a <= n {
                        dim as i32 - 2 * a as i32
                    } else if a == n + 1 {
                        0
                    } else {
                        -(dim as i32 - 2 * (dim + 1 - a) as i32)
                    }
                }
                // (N/2, ..., 1, -1, ..., -N/2)
                Series::C => {
                    if a <= n {
                        dim as i32 - 2 * a as i32 + 2
                    } else {
                        -(dim as i32 - 2 * (dim + 1 - a) as i32 + 2)
                    }
                }
                // (N/2-1, ..., 1, 0, 0, -1, ..., -N/2+1)
                Series::D => {
                    if a <= n {
                        dim as i32 - 2 * a as i32
                    } else {
                        -(dim as i32 - 2 * (dim + 1 - a) as i32)
                    }
                }
            };
            rho2[a] = v;
        }
        let mut eps_a = vec![0i64; dim + 1];
        for a in 1..=dim {
            eps_a[a] = match series {
                Series::B | Series::D => 1,
                Series::C => {
                    if a <= n {
                        1
                    } else {
                        -1
                    }
                }
            };
        }
        Ok(SeriesSpec {
            series,
            dim,
            rank,
            n2,
            eps,
            eps_a,
            rho2,
        })
    }

    /// Primed index a' = N + 1 - a.
    pub fn prime(&self, a: u16) -> u16 {
        (self.dim as u16) + 1 - a
    }

    pub fn eps_a(&self, a: u16) -> i64 {
        self.eps_a[a as usize]
    }

    /// Doubled weight 2*rho_a.
    pub fn rho2(&self, a: u16) -> i32 {
        self.rho2[a as usize]
    }

    pub fn is_middle(&self, a: u16) -> bool {
        self.n2 == Some(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b3_vectors() {
        let s = SeriesSpec::build(Series::B, 3).unwrap();
        assert_eq!(s.n2, Some(2));
        assert_eq!((s.rho2(1), s.rho2(2), s.rho2(3)), (1, 0, -1)); // rho = 1/2, 0, -1/2
        assert_eq!((s.eps_a(1), s.eps_a(2), s.eps_a(3)), (1, 1, 1));
    }

    #[test]
    fn c4_vectors() {
        let s = SeriesSpec::build(Series::C, 4).unwrap();
        assert_eq!(
            (s.rho2(1), s.rho2(2), s.rho2(3), s.rho2(4)),
            (4, 2, -2, -4) // rho = 2, 1, -1, -2
        );
        assert_eq!(
            (s.eps_a(1), s.eps_a(2), s.eps_a(3), s.eps_a(4)),
            (1, 1, -1, -1)
        );
        assert_eq!(s.eps, -1);
    }

    #[test]
    fn d4_vectors() {
        let s = SeriesSpec::build(Series::D, 4).unwrap();
        assert_eq!(
            (s.rho2(1), s.rho2(2), s.rho2(3), s.rho2(4)),
            (2, 0, 0, -2) // rho = 1, 0, 0, -1
        );
    }

    #[test]
    fn prime_reverses_weights_and_signs() {
        for (series, dim) in [(Series::B, 5), (Series::C, 6), (Series::D, 6)] {
            let s = SeriesSpec::build(series, dim).unwrap();
            for a in 1..=dim as u16 {
                assert_eq!(s.rho2(s.prime(a)), -s.rho2(a));
                assert_eq!(s.eps_a(a) * s.eps_a(s.prime(a)), s.eps);
            }
        }
    }

    #[test]
    fn parity_is_enforced() {
        assert!(SeriesSpec::build(Series::B, 4).is_err());
        assert!(SeriesSpec::build(Series::C, 5).is_err());
        assert!(SeriesSpec::build(Series::D, 3).is_err());
    }
}
