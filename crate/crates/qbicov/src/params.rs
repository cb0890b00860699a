//! Multiparametric parameter sets: the variable ring and the full table of
//! deformation parameters `q_AB` derived from the independent ones.
//!
//! The independent parameters are the `q_ab` with `a < b <= floor(N/2)`;
//! everything else is a Laurent monomial in those and `r = s^2`:
//! `q_aa = r`, `q_ba = r^2/q_ab`, `q_ab = r^2/q_ab' = r^2/q_a'b = q_a'b'`,
//! and `q_aa' = r`. For the odd orthogonal series the middle column is
//! pinned to `q_(a,n2) = r` (consistent with `q_aa' = r`).

use crate::scalar::{Rat, Scalar, VarSet, Vars};
use crate::series::{Series, SeriesError, SeriesSpec};
use num_traits::One;

/// How the table reads its parameters; used to realize the inverted and
/// transposed parameter sets of the R-matrix symmetry checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Standard,
    /// Every q and r replaced by its inverse.
    Inverted,
    /// p_ab = q_ba.
    Transposed,
}

#[derive(Debug, Clone)]
pub struct ParamSet {
    pub spec: SeriesSpec,
    pub vars: Vars,
    /// Index of the variable for the independent pair (a, b), a < b.
    q_var: Vec<Vec<Option<usize>>>,
    /// `r = 1` exactly (twist-only deformation).
    pub classical_r: bool,
    mode: Mode,
}

impl ParamSet {
    /// Standard parameter set with variables `s, q12, q13, ...`.
    pub fn standard(series: Series, dim: usize) -> Result<ParamSet, SeriesError> {
        let spec = SeriesSpec::build(series, dim)?;
        let mut names = vec!["s".to_string()];
        let mut q_var = vec![vec![None; dim + 1]; dim + 1];
        let half = dim / 2;
        for a in 1..=half {
            for b in (a + 1)..=half {
                q_var[a][b] = Some(names.len());
                names.push(format!("q{a}{b}"));
            }
        }
        Ok(ParamSet {
            spec,
            vars: VarSet::new(names),
            q_var,
            classical_r: false,
            mode: Mode::Standard,
        })
    }

    /// Parameter set over a caller-supplied variable set. `assign(a, b)`
    /// names the variable for each independent pair `a < b <= floor(N/2)`.
    pub fn with_vars<F: Fn(usize, usize) -> String>(
        series: Series,
        dim: usize,
        vars: Vars,
        assign: F,
    ) -> Result<ParamSet, SeriesError> {
        let spec = SeriesSpec::build(series, dim)?;
        let mut q_var = vec![vec![None; dim + 1]; dim + 1];
        let half = dim / 2;
        for a in 1..=half {
            for b in (a + 1)..=half {
                let name = assign(a, b);
                let idx = vars
                    .index_of(&name)
                    .unwrap_or_else(|| panic!("variable `{name}` missing from the variable set"));
                q_var[a][b] = Some(idx);
            }
        }
        Ok(ParamSet {
            spec,
            vars,
            q_var,
            classical_r: false,
            mode: Mode::Standard,
        })
    }

    /// The same parameters with `r` pinned to 1 (minimal deformation).
    pub fn at_r_one(&self) -> ParamSet {
        let mut p = self.clone();
        p.classical_r = true;
        p
    }

    pub fn inverted(&self) -> ParamSet {
        let mut p = self.clone();
        p.mode = match self.mode {
            Mode::Standard => Mode::Inverted,
            Mode::Inverted => Mode::Standard,
            Mode::Transposed => panic!("mode composition not needed"),
        };
        p
    }

    pub fn transposed(&self) -> ParamSet {
        let mut p = self.clone();
        assert_eq!(self.mode, Mode::Standard);
        p.mode = Mode::Transposed;
        p
    }

    pub fn dim(&self) -> u16 {
        self.spec.dim as u16
    }

    /// Number of independent `q` variables.
    pub fn q_count(&self) -> usize {
        self.q_var
            .iter()
            .flatten()
            .filter(|v| v.is_some())
            .count()
    }

    fn sign(&self) -> i32 {
        match self.mode {
            Mode::Inverted => -1,
            _ => 1,
        }
    }

    /// Laurent monomial `s^se * prod q_i^qe_i`, with `s` suppressed at r=1.
    fn mono(&self, se: i32, qe: &[(usize, i32)]) -> Scalar {
        let mut exps = vec![0i32; self.vars.len()];
        if !self.classical_r {
            if let Some(si) = self.vars.index_of("s") {
                exps[si] = se;
            }
        }
        for &(i, e) in qe {
            exps[i] += e;
        }
        Scalar::monomial(&self.vars, Rat::one(), &exps)
    }

    /// r as a Scalar (s^2, or 1 at the classical point).
    pub fn r(&self) -> Scalar {
        self.mono(2 * self.sign(), &[])
    }

    /// Integer power of r.
    pub fn r_pow(&self, k: i32) -> Scalar {
        self.mono(2 * k * self.sign(), &[])
    }

    /// r^(k2/2): half-integer powers are monomials in s.
    pub fn r_half_pow(&self, k2: i32) -> Scalar {
        self.mono(k2 * self.sign(), &[])
    }

    /// lambda = r - 1/r; identically zero at r = 1.
    pub fn lambda(&self) -> Scalar {
        self.r().sub(&self.r_pow(-1))
    }

    pub fn zero(&self) -> Scalar {
        Scalar::zero(&self.vars)
    }

    pub fn one(&self) -> Scalar {
        Scalar::one(&self.vars)
    }

    pub fn int(&self, k: i64) -> Scalar {
        Scalar::from_int(&self.vars, k)
    }

    /// The full parameter `q_AB` as a Laurent monomial.
    pub fn q(&self, a: u16, b: u16) -> Scalar {
        if self.mode == Mode::Transposed {
            let mut p = self.clone();
            p.mode = Mode::Standard;
            return p.q(b, a);
        }
        let (se, qe) = self.q_exponents(a, b);
        let sg = self.sign();
        let qlist: Vec<(usize, i32)> = qe.into_iter().map(|(i, e)| (i, e * sg)).collect();
        self.mono(se * sg, &qlist)
    }

    /// Exponents (s-exponent, optional q-variable exponent) of `q_AB` in
    /// standard mode.
    fn q_exponents(&self, a: u16, b: u16) -> (i32, Option<(usize, i32)>) {
        let spec = &self.spec;
        assert!(a >= 1 && a <= self.dim() && b >= 1 && b <= self.dim());
        // q_aa = q_aa' = r, and the middle column of the odd series is r.
        if a == b || b == spec.prime(a) || spec.is_middle(a) || spec.is_middle(b) {
            return (2, None);
        }
        let ap = spec.prime(a);
        let bp = spec.prime(b);
        let a0 = a.min(ap);
        let b0 = b.min(bp);
        if a0 < b0 {
            let idx = self.q_var[a0 as usize][b0 as usize]
                .expect("independent parameter present");
            // Each primed index flips q -> r^2/q.
            let toggles = usize::from(a > ap) + usize::from(b > bp);
            if toggles % 2 == 0 {
                (0, Some((idx, 1)))
            } else {
                (4, Some((idx, -1)))
            }
        } else {
            // q_AB = r^2 / q_BA
            let (se, qe) = self.q_exponents(b, a);
            (4 - se, qe.map(|(i, e)| (i, -e)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_relations_hold() {
        for (series, dim) in [(Series::B, 5), (Series::C, 6), (Series::D, 6)] {
            let p = ParamSet::standard(series, dim).unwrap();
            let m = dim as u16;
            let r2 = p.r_pow(2);
            for a in 1..=m {
                assert_eq!(p.q(a, a), p.r(), "q_aa = r");
                assert_eq!(p.q(a, p.spec.prime(a)), p.r(), "q_aa' = r");
                for b in 1..=m {
                    let qab = p.q(a, b);
                    assert_eq!(p.q(b, a).mul(&qab), r2, "q_ba q_ab = r^2");
                    assert_eq!(
                        p.q(a, p.spec.prime(b)).mul(&qab),
                        r2,
                        "q_ab' q_ab = r^2"
                    );
                    assert_eq!(
                        p.q(p.spec.prime(a), b).mul(&qab),
                        r2,
                        "q_a'b q_ab = r^2"
                    );
                    assert_eq!(
                        p.q(p.spec.prime(a), p.spec.prime(b)),
                        qab,
                        "q_a'b' = q_ab"
                    );
                }
            }
        }
    }

    #[test]
    fn b_series_is_uniparametric_at_dim_3() {
        let p = ParamSet::standard(Series::B, 3).unwrap();
        assert_eq!(p.q_count(), 0);
        for a in 1..=3u16 {
            for b in 1..=3u16 {
                assert_eq!(p.q(a, b), p.r());
            }
        }
    }

    #[test]
    fn independent_counts() {
        assert_eq!(ParamSet::standard(Series::D, 6).unwrap().q_count(), 3);
        assert_eq!(ParamSet::standard(Series::C, 4).unwrap().q_count(), 1);
        assert_eq!(ParamSet::standard(Series::B, 5).unwrap().q_count(), 1);
    }

    #[test]
    fn inverted_parameters_invert_monomials() {
        let p = ParamSet::standard(Series::D, 4).unwrap();
        let pi = p.inverted();
        for a in 1..=4u16 {
            for b in 1..=4u16 {
                assert!(p.q(a, b).mul(&pi.q(a, b)).is_one());
            }
        }
        assert!(p.r().mul(&pi.r()).is_one());
    }

    #[test]
    fn classical_point_q_relations() {
        let p = ParamSet::standard(Series::D, 6).unwrap().at_r_one();
        let one = p.one();
        for a in 1..=6u16 {
            assert_eq!(p.q(a, a), one);
            for b in 1..=6u16 {
                assert!(p.q(a, b).mul(&p.q(b, a)).is_one());
            }
        }
    }
}
