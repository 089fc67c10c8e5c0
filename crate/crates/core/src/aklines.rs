//! Twistor lines for the `A_k` surfaces `xy = ∏(z − aᵢu)` and a residual
//! checker for the rewritten `D_k` equation.
//!
//! A line is fixed by `z(u) = cu² + au − c̄`. Each factor `z − aᵢu` is a
//! quadratic with positive discriminant `(a − aᵢ)² + 4|c|²`, so its two
//! roots split canonically into `αᵢ` (the `+√Δᵢ` branch) and `βᵢ`; then
//! `x = A∏(u − αᵢ)` and `y = (c^{k+1}/A)∏(u − βᵢ)`.
//!
//! Only `A/|A|` is a genuine coordinate; `|A|` is a gauge and any nonzero
//! value is accepted. Reality of the line is not imposed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polycore::ComplexPoly;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AkError {
    #[error("expected {expected} levels for k={k}, got {got}")]
    LevelCount { k: usize, expected: usize, got: usize },
    #[error("levels {0} and {1} coincide")]
    RepeatedLevel(usize, usize),
    #[error("parameter {0} must be nonzero")]
    ZeroParameter(&'static str),
    #[error("discriminant for level {index} is {value}, not positive")]
    NonPositiveDiscriminant { index: usize, value: f64 },
    #[error("non-finite parameter")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AkParams {
    pub k: usize,
    pub a: f64,
    pub c: Complex64,
    /// Leading coefficient `A` of `x(u)`.
    pub amp: Complex64,
    /// The `k + 1` distinct real levels `aᵢ`.
    pub levels: Vec<f64>,
}

impl AkParams {
    pub fn validate(&self) -> Result<(), AkError> {
        if self.levels.len() != self.k + 1 {
            return Err(AkError::LevelCount {
                k: self.k,
                expected: self.k + 1,
                got: self.levels.len(),
            });
        }
        let finite = self.a.is_finite()
            && self.c.is_finite()
            && self.amp.is_finite()
            && self.levels.iter().all(|v| v.is_finite());
        if !finite {
            return Err(AkError::NonFinite);
        }
        if self.c.norm() == 0.0 {
            return Err(AkError::ZeroParameter("c"));
        }
        if self.amp.norm() == 0.0 {
            return Err(AkError::ZeroParameter("A"));
        }
        for i in 0..self.levels.len() {
            for j in i + 1..self.levels.len() {
                if self.levels[i] == self.levels[j] {
                    return Err(AkError::RepeatedLevel(i, j));
                }
            }
        }
        Ok(())
    }

    /// `z(u) = cu² + au − c̄`.
    pub fn z(&self) -> ComplexPoly {
        ComplexPoly::new(vec![-self.c.conj(), Complex64::new(self.a, 0.0), self.c])
    }

    /// `Δᵢ = (a − aᵢ)² + 4|c|²`.
    pub fn discriminants(&self) -> Vec<f64> {
        self.levels
            .iter()
            .map(|&ai| (self.a - ai).powi(2) + 4.0 * self.c.norm_sqr())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwistorLineAk {
    pub z: ComplexPoly,
    pub x: ComplexPoly,
    pub y: ComplexPoly,
    pub alphas: Vec<Complex64>,
    pub betas: Vec<Complex64>,
}

/// Roots of `z − aᵢu`, split by the sign of the positive real `√Δᵢ`.
pub fn split_roots(params: &AkParams) -> Result<(Vec<Complex64>, Vec<Complex64>), AkError> {
    params.validate()?;
    let two_c = params.c * 2.0;
    let mut alphas = Vec::with_capacity(params.levels.len());
    let mut betas = Vec::with_capacity(params.levels.len());
    for (index, (&ai, disc)) in params.levels.iter().zip(params.discriminants()).enumerate() {
        if disc <= 0.0 || disc.is_nan() {
            return Err(AkError::NonPositiveDiscriminant { index, value: disc });
        }
        let b = params.a - ai;
        let s = disc.sqrt();
        alphas.push(Complex64::new(-b + s, 0.0) / two_c);
        betas.push(Complex64::new(-b - s, 0.0) / two_c);
    }
    Ok((alphas, betas))
}

pub fn build_line(params: &AkParams) -> Result<TwistorLineAk, AkError> {
    let (alphas, betas) = split_roots(params)?;
    let b = params.c.powu(params.k as u32 + 1) / params.amp;
    Ok(TwistorLineAk {
        z: params.z(),
        x: ComplexPoly::from_roots(params.amp, &alphas),
        y: ComplexPoly::from_roots(b, &betas),
        alphas,
        betas,
    })
}

/// `∏ (z − aᵢu)`.
pub fn level_product(z: &ComplexPoly, levels: &[f64]) -> ComplexPoly {
    levels.iter().fold(ComplexPoly::from_real(&[1.0]), |acc, &ai| {
        let factor = z - &ComplexPoly::monomial(Complex64::new(ai, 0.0), 1);
        &acc * &factor
    })
}

/// `max|coeff(xy − ∏(z − aᵢu))| / max|coeff(∏(z − aᵢu))|`.
pub fn residual_ak(line: &TwistorLineAk, levels: &[f64]) -> f64 {
    let rhs = level_product(&line.z, levels);
    let lhs = &line.x * &line.y;
    let scale = rhs.max_coeff_norm();
    let diff = lhs.max_coeff_diff(&rhs);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Residual of `z x² − (z y + uᵏ∏aᵢ)² + ∏(z + aᵢ²u²)` for externally supplied
/// candidates, relative to the largest coefficient among the three terms.
/// Returns 0 when all three terms vanish.
pub fn residual_dk(x: &ComplexPoly, y: &ComplexPoly, z: &ComplexPoly, levels: &[f64]) -> f64 {
    let k = levels.len();
    let prod_a: f64 = levels.iter().product();
    let t1 = &(z * x) * x;
    let inner = &(z * y) + &ComplexPoly::monomial(Complex64::new(prod_a, 0.0), k);
    let t2 = &inner * &inner;
    let t3 = levels.iter().fold(ComplexPoly::from_real(&[1.0]), |acc, &ai| {
        &acc * &(z + &ComplexPoly::monomial(Complex64::new(ai * ai, 0.0), 2))
    });
    let total = &(&t1 - &t2) + &t3;
    let scale = [&t1, &t2, &t3]
        .iter()
        .map(|t| t.max_coeff_norm())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        0.0
    } else {
        total.max_coeff_norm() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(k: usize, a: f64, cc: Complex64, amp: Complex64, levels: &[f64]) -> AkParams {
        AkParams {
            k,
            a,
            c: cc,
            amp,
            levels: levels.to_vec(),
        }
    }

    #[test]
    fn split_roots_examples() {
        let s5 = 5f64.sqrt();
        let (al, be) = split_roots(&params(0, 0.0, c(1.0, 0.0), c(1.0, 0.0), &[1.0])).unwrap();
        assert!((al[0] - c((1.0 + s5) / 2.0, 0.0)).norm() < 1e-15);
        assert!((be[0] - c((1.0 - s5) / 2.0, 0.0)).norm() < 1e-15);

        let (al, be) = split_roots(&params(0, 0.0, c(1.0, 0.0), c(1.0, 0.0), &[0.0])).unwrap();
        assert_eq!((al[0], be[0]), (c(1.0, 0.0), c(-1.0, 0.0)));

        let (al, be) = split_roots(&params(0, 0.0, c(0.0, 1.0), c(1.0, 0.0), &[0.0])).unwrap();
        assert!((al[0] - c(0.0, -1.0)).norm() < 1e-15);
        assert!((be[0] - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn factor_identity_holds() {
        let p = params(2, 0.3, c(0.7, -0.4), c(1.0, 0.0), &[-1.0, 0.2, 1.5]);
        let (al, be) = split_roots(&p).unwrap();
        for (i, &ai) in p.levels.iter().enumerate() {
            let lhs = ComplexPoly::from_roots(p.c, &[al[i], be[i]]);
            let rhs = &p.z() - &ComplexPoly::monomial(c(ai, 0.0), 1);
            assert!(lhs.max_coeff_diff(&rhs) < 1e-14);
        }
    }

    #[test]
    fn k0_line_is_exact() {
        let line = build_line(&params(0, 0.0, c(1.0, 0.0), c(1.0, 0.0), &[0.0])).unwrap();
        assert_eq!(line.x, ComplexPoly::from_real(&[-1.0, 1.0]));
        assert_eq!(line.y, ComplexPoly::from_real(&[1.0, 1.0]));
        assert_eq!(line.z, ComplexPoly::from_real(&[-1.0, 0.0, 1.0]));
        assert_eq!(residual_ak(&line, &[0.0]), 0.0);
    }

    #[test]
    fn k1_line_uses_plus_branch_roots() {
        let line = build_line(&params(1, 0.0, c(1.0, 0.0), c(1.0, 0.0), &[1.0, -1.0])).unwrap();
        let s5 = 5f64.sqrt();
        // u² − u − 1 and u² + u − 1
        let expect_x = ComplexPoly::from_roots(
            c(1.0, 0.0),
            &[c((1.0 + s5) / 2.0, 0.0), c((-1.0 + s5) / 2.0, 0.0)],
        );
        assert!(line.x.max_coeff_diff(&expect_x) < 1e-15);
        assert!(residual_ak(&line, &[1.0, -1.0]) < 1e-15);
    }

    #[test]
    fn amplitude_is_a_gauge() {
        let base = params(2, 0.1, c(0.5, 0.5), c(1.0, 0.0), &[-1.0, 0.0, 2.0]);
        let mut scaled = base.clone();
        let lambda = c(2.0, -3.0);
        scaled.amp = base.amp * lambda;
        let l0 = build_line(&base).unwrap();
        let l1 = build_line(&scaled).unwrap();
        assert!(l1.x.max_coeff_diff(&l0.x.scale(lambda)) < 1e-14);
        assert!(l1.y.max_coeff_diff(&l0.y.scale(lambda.inv())) < 1e-14);
        assert!((&l1.x * &l1.y).max_coeff_diff(&(&l0.x * &l0.y)) < 1e-13);
    }

    #[test]
    fn perturbed_line_is_rejected() {
        let p = params(3, -0.2, c(0.8, 0.3), c(0.5, 0.5), &[-1.2, -0.1, 0.7, 1.9]);
        let mut line = build_line(&p).unwrap();
        line.x = &line.x + &ComplexPoly::from_real(&[1.0]);
        assert!(residual_ak(&line, &p.levels) > 1e-3);
    }

    #[test]
    fn invalid_parameters() {
        let bad = params(1, 0.0, c(1.0, 0.0), c(1.0, 0.0), &[0.5, 0.5]);
        assert_eq!(split_roots(&bad).unwrap_err(), AkError::RepeatedLevel(0, 1));
        let bad = params(1, 0.0, c(0.0, 0.0), c(1.0, 0.0), &[0.5, 1.5]);
        assert_eq!(split_roots(&bad).unwrap_err(), AkError::ZeroParameter("c"));
        let bad = params(2, 0.0, c(1.0, 0.0), c(1.0, 0.0), &[0.5, 1.5]);
        assert!(matches!(split_roots(&bad), Err(AkError::LevelCount { .. })));
    }

    #[test]
    fn dk_checker_examples() {
        let zero = ComplexPoly::zero();
        let z = ComplexPoly::from_real(&[1.0, -0.5, 0.3, 0.2, 1.0]);
        let r = residual_dk(&zero, &zero, &z, &[0.0; 4]);
        assert!((r - 1.0).abs() < 1e-15);
        assert_eq!(residual_dk(&ComplexPoly::from_real(&[3.0, 1.0]), &zero, &zero, &[0.0; 4]), 0.0);
    }

    #[test]
    fn dk_checker_accepts_a_constructed_identity() {
        // k = 1, a₁ = 0, z = 1: the identity reduces to x² − y² + 1 = 0
        let z = ComplexPoly::from_real(&[1.0]);
        let x = ComplexPoly::zero();
        let y = ComplexPoly::from_real(&[1.0]);
        assert_eq!(residual_dk(&x, &y, &z, &[0.0]), 0.0);
    }
}
