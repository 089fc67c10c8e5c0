//! Dense univariate polynomials over `Complex64` and certified root finding.
//!
//! Coefficients are stored in ascending degree. Roots come from the
//! eigenvalues of the companion matrix, polished by simultaneous Aberth
//! iterations, and are then certified by a scaled residual test.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default certification tolerance for scaled root residuals.
pub const DEFAULT_CERT_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("operation is undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("polynomial has degree {degree}, need at least {required}")]
    DegreeTooLow { degree: usize, required: usize },
    #[error("eigenvalue iteration did not converge within {iterations} sweeps")]
    NonConvergence { iterations: usize },
    #[error("root clustering at tol={tol:e} and 2·tol disagree; tighten the solve")]
    AmbiguousClustering { tol: f64 },
}

/// Polynomial `c[0] + c[1] u + ... + c[n] u^n`.
///
/// The zero polynomial has no coefficients. Construction strips trailing
/// coefficients that are exactly zero; nothing else is ever trimmed unless
/// [`ComplexPoly::trimmed`] is called.
#[derive(Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct ComplexPoly {
    coeffs: Vec<Complex64>,
}

impl From<Vec<Complex64>> for ComplexPoly {
    fn from(coeffs: Vec<Complex64>) -> Self {
        ComplexPoly::new(coeffs)
    }
}

impl From<ComplexPoly> for Vec<Complex64> {
    fn from(p: ComplexPoly) -> Self {
        p.coeffs
    }
}

impl fmt::Debug for ComplexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexPoly{:?}", self.coeffs)
    }
}

impl ComplexPoly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        ComplexPoly { coeffs }
    }

    pub fn zero() -> Self {
        ComplexPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        ComplexPoly::new(vec![c])
    }

    /// The identity polynomial `u`.
    pub fn x() -> Self {
        ComplexPoly::monomial(Complex64::new(1.0, 0.0), 1)
    }

    pub fn monomial(c: Complex64, degree: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); degree + 1];
        coeffs[degree] = c;
        ComplexPoly::new(coeffs)
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        ComplexPoly::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// `leading · ∏ (u − r)`.
    pub fn from_roots(leading: Complex64, roots: &[Complex64]) -> Self {
        let mut coeffs = vec![leading];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r;
            }
            coeffs = next;
        }
        ComplexPoly::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `u^i`, zero beyond the degree.
    pub fn coeff(&self, i: usize) -> Complex64 {
        self.coeffs.get(i).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<Complex64> {
        self.coeffs.last().copied()
    }

    pub fn eval(&self, u: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * u + c)
    }

    /// `Σ |c_i| |u|^i`, the natural scale for the error in `eval(u)`.
    pub fn eval_scale(&self, u: Complex64) -> f64 {
        let r = u.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Self {
        ComplexPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexPoly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(ComplexPoly::constant(Complex64::new(1.0, 0.0)), |acc, _| {
            &acc * self
        })
    }

    /// Largest coefficient modulus; 0 for the zero polynomial.
    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops leading coefficients with modulus at most `threshold`.
    pub fn trimmed(&self, threshold: f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.norm() <= threshold) {
            coeffs.pop();
        }
        ComplexPoly { coeffs }
    }

    /// Coefficient order reversed: `u^n p(1/u)`.
    pub fn reversed(&self) -> Self {
        ComplexPoly::new(self.coeffs.iter().rev().copied().collect())
    }

    /// Largest coefficient-wise modulus of `self − other`.
    pub fn max_coeff_diff(&self, other: &ComplexPoly) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|i| (self.coeff(i) - other.coeff(i)).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &ComplexPoly {
    type Output = ComplexPoly;
    fn add(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &ComplexPoly {
    type Output = ComplexPoly;
    fn sub(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &ComplexPoly {
    type Output = ComplexPoly;
    fn mul(self, rhs: &ComplexPoly) -> ComplexPoly {
        if self.is_zero() || rhs.is_zero() {
            return ComplexPoly::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ComplexPoly::new(out)
    }
}

impl Neg for &ComplexPoly {
    type Output = ComplexPoly;
    fn neg(self) -> ComplexPoly {
        ComplexPoly::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for ComplexPoly {
            type Output = ComplexPoly;
            fn $m(self, rhs: ComplexPoly) -> ComplexPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

pub fn poly_arith(a: &ComplexPoly, b: &ComplexPoly, op: ArithOp) -> ComplexPoly {
    match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Bound on the scaled residual `|p(r)| / Σ|c_i||r|^i` of every root.
    pub cert_tol: f64,
    pub max_schur_iter: usize,
    pub max_polish_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            cert_tol: DEFAULT_CERT_TOL,
            max_schur_iter: 10_000,
            max_polish_iter: 60,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    /// Per-root `|p(r)| / Σ|c_i||r|^i`.
    pub residuals: Vec<f64>,
    /// Max coefficient deviation of `leading·∏(u − r)` from `p`, relative to
    /// the largest coefficient of `p`.
    pub reconstruction_error: f64,
    pub certified: bool,
}

impl RootSet {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

pub fn roots(p: &ComplexPoly) -> Result<RootSet, PolyError> {
    roots_with(p, &RootOptions::default())
}

pub fn roots_with(p: &ComplexPoly, opts: &RootOptions) -> Result<RootSet, PolyError> {
    let n = p.degree().ok_or(PolyError::ZeroPolynomial)?;
    if n == 0 {
        return Err(PolyError::DegreeTooLow {
            degree: 0,
            required: 1,
        });
    }
    let mut rs = match companion_eigenvalues(p, opts.max_schur_iter) {
        Ok(rs) => rs,
        Err(err) => shifted_eigenvalues(p, opts.max_schur_iter).ok_or(err)?,
    };
    aberth_polish(p, &mut rs, opts.max_polish_iter);
    recenter_clusters(p, &mut rs);
    Ok(certify(p, rs, opts.cert_tol))
}

/// Multiple roots split into a ring of radius ~ε^{1/m} whose centroid can
/// still drift. For each tight cluster of size m, Newton on p^{(m−1)} (which
/// has a simple root there) locates the center, and the cluster is shifted
/// onto it without changing its spread.
const CLUSTER_REL: f64 = 1e-5;

fn recenter_clusters(p: &ComplexPoly, roots: &mut [Complex64]) {
    let groups = partition_scaled(roots, CLUSTER_REL);
    for group in groups.into_iter().filter(|g| g.len() >= 2) {
        let m = group.len();
        let mean = group.iter().map(|&i| roots[i]).sum::<Complex64>() / m as f64;
        let mut d = p.clone();
        for _ in 0..m - 1 {
            d = d.derivative();
        }
        let dd = d.derivative();
        let mut center = mean;
        for _ in 0..30 {
            let step = d.eval(center) / dd.eval(center);
            if !step.is_finite() {
                break;
            }
            center -= step;
            if step.norm() <= 4.0 * f64::EPSILON * center.norm().max(1.0) {
                break;
            }
        }
        if !center.is_finite() || (center - mean).norm() > CLUSTER_REL * mean.norm().max(1.0) {
            continue;
        }
        let before: Vec<Complex64> = roots.to_vec();
        for &i in &group {
            roots[i] += center - mean;
        }
        let lead = p.leading().unwrap_or_default();
        let err = |rs: &[Complex64]| p.max_coeff_diff(&ComplexPoly::from_roots(lead, rs));
        if err(roots) > err(&before) {
            roots.copy_from_slice(&before);
        }
    }
}

fn partition_scaled(roots: &[Complex64], rel: f64) -> Vec<Vec<usize>> {
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    partition(roots, rel * scale)
}

fn certify(p: &ComplexPoly, roots: Vec<Complex64>, tol: f64) -> RootSet {
    let residuals: Vec<f64> = roots.iter().map(|&r| scaled_residual(p, r)).collect();
    let lead = p.leading().unwrap_or_default();
    let rebuilt = ComplexPoly::from_roots(lead, &roots);
    let reconstruction_error = p.max_coeff_diff(&rebuilt) / p.max_coeff_norm();
    let certified = residuals.iter().all(|&r| r <= tol) && reconstruction_error <= tol;
    RootSet {
        roots,
        residuals,
        reconstruction_error,
        certified,
    }
}

fn scaled_residual(p: &ComplexPoly, r: Complex64) -> f64 {
    let s = p.eval_scale(r);
    if s == 0.0 {
        0.0
    } else {
        p.eval(r).norm() / s
    }
}

fn companion_eigenvalues(p: &ComplexPoly, max_iter: usize) -> Result<Vec<Complex64>, PolyError> {
    let n = p.degree().unwrap_or(0);
    let c = p.coeffs();
    let lead = c[n];
    if n == 1 {
        return Ok(vec![-c[0] / lead]);
    }
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    let schur = m
        .try_schur(f64::EPSILON, max_iter)
        .ok_or(PolyError::NonConvergence { iterations: max_iter })?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// `p(x + σ)` by repeated synthetic division.
fn taylor_shift(p: &ComplexPoly, sigma: Complex64) -> ComplexPoly {
    let mut c = p.coeffs().to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let next = c[j + 1];
            c[j] += sigma * next;
        }
    }
    ComplexPoly::new(c)
}

/// The QR sweep can cycle when all roots share a modulus, as for
/// `u⁴ + au² + b`. Translating the roots off-centre breaks the symmetry.
fn shifted_eigenvalues(p: &ComplexPoly, max_iter: usize) -> Option<Vec<Complex64>> {
    let lead = p.leading()?;
    let bound = 1.0
        + p.coeffs()
            .iter()
            .map(|c| (c / lead).norm())
            .fold(0.0, f64::max);
    [0.137, 0.291, 0.413].iter().find_map(|&f| {
        let sigma = Complex64::from_polar(f * bound, 0.7 + 10.0 * f);
        companion_eigenvalues(&taylor_shift(p, sigma), max_iter)
            .ok()
            .map(|rs| rs.into_iter().map(|r| r + sigma).collect())
    })
}

/// Simultaneous Aberth–Ehrlich refinement. Keeps the best iterate by total
/// scaled residual, so a stalled cluster never ends worse than it started.
fn aberth_polish(p: &ComplexPoly, roots: &mut [Complex64], max_iter: usize) {
    let dp = p.derivative();
    let total = |rs: &[Complex64]| rs.iter().map(|&r| scaled_residual(p, r)).sum::<f64>();
    let mut best = roots.to_vec();
    let mut best_res = total(roots);
    for _ in 0..max_iter {
        let mut max_step = 0.0f64;
        for k in 0..roots.len() {
            let z = roots[k];
            let pz = p.eval(z);
            if pz.norm() == 0.0 {
                continue;
            }
            let ratio = pz / dp.eval(z);
            let repulsion: Complex64 = roots
                .iter()
                .enumerate()
                .filter(|&(j, &w)| j != k && w != z)
                .map(|(_, &w)| (z - w).inv())
                .sum();
            let denom = Complex64::new(1.0, 0.0) - ratio * repulsion;
            let step = ratio / denom;
            if step.is_finite() {
                roots[k] = z - step;
                max_step = max_step.max(step.norm() / z.norm().max(1.0));
            }
        }
        let res = total(roots);
        if res < best_res {
            best_res = res;
            best.copy_from_slice(roots);
        }
        if max_step < 4.0 * f64::EPSILON {
            break;
        }
    }
    roots.copy_from_slice(&best);
}

/// Sylvester-determinant resultant, normalized so that
/// `resultant(u − a, u − b) = a − b`.
pub fn resultant(p: &ComplexPoly, q: &ComplexPoly) -> Complex64 {
    let (Some(m), Some(n)) = (p.degree(), q.degree()) else {
        return Complex64::new(0.0, 0.0);
    };
    if m == 0 {
        return p.coeff(0).powu(n as u32);
    }
    if n == 0 {
        return q.coeff(0).powu(m as u32);
    }
    let size = m + n;
    let mut s = DMatrix::<Complex64>::zeros(size, size);
    // Rows 0..n carry p shifted, rows n..n+m carry q shifted; descending powers.
    for row in 0..n {
        for k in 0..=m {
            s[(row, row + k)] = p.coeff(m - k);
        }
    }
    for row in 0..m {
        for k in 0..=n {
            s[(n + row, row + k)] = q.coeff(n - k);
        }
    }
    s.determinant()
}

/// `(−1)^{n(n−1)/2} · resultant(p, p′) / leading(p)`, so that the quadratic
/// `u² + bu + c` has discriminant `b² − 4c`.
pub fn discriminant(p: &ComplexPoly) -> Result<Complex64, PolyError> {
    let n = p.degree().ok_or(PolyError::ZeroPolynomial)?;
    if n < 1 {
        return Err(PolyError::DegreeTooLow {
            degree: n,
            required: 1,
        });
    }
    let sign = if (n * (n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let lead = p.leading().unwrap_or_default();
    Ok(resultant(p, &p.derivative()) * sign / lead)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootCluster {
    pub center: Complex64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Clusters {
    /// Centroids of two-element clusters.
    pub double: Vec<Complex64>,
    pub simple: Vec<Complex64>,
    /// Clusters of three or more roots.
    pub higher: Vec<RootCluster>,
}

/// Groups the roots of `p` into clusters of nearby values.
pub fn double_root_clusters(p: &ComplexPoly, tol: f64) -> Result<Clusters, PolyError> {
    let n = p.degree().ok_or(PolyError::ZeroPolynomial)?;
    if n < 2 {
        return Err(PolyError::DegreeTooLow {
            degree: n,
            required: 2,
        });
    }
    let rs = roots(p)?;
    cluster_roots(&rs.roots, tol)
}

/// Clustering of an already computed root multiset. Fails with
/// `AmbiguousClustering` when the partitions at `tol` and `2·tol` differ.
pub fn cluster_roots(roots: &[Complex64], tol: f64) -> Result<Clusters, PolyError> {
    let fine = partition(roots, tol);
    if fine != partition(roots, 2.0 * tol) {
        return Err(PolyError::AmbiguousClustering { tol });
    }
    let mut out = Clusters::default();
    for group in fine {
        let center = group.iter().map(|&i| roots[i]).sum::<Complex64>() / group.len() as f64;
        match group.len() {
            1 => out.simple.push(center),
            2 => out.double.push(center),
            m => out.higher.push(RootCluster {
                center,
                multiplicity: m,
            }),
        }
    }
    Ok(out)
}

/// Single-linkage components, each sorted, listed by smallest member.
fn partition(roots: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (roots[i] - roots[j]).norm() <= tol {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                label[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut label, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn equal_modulus_roots_are_found() {
        let p = ComplexPoly::from_real(&[1.0, 0.0, -1.5, 0.0, 0.8]);
        let rs = roots(&p).unwrap();
        assert!(rs.certified);
        let shifted = taylor_shift(&p, c(0.3, -0.2));
        assert!((shifted.eval(c(0.1, 0.4)) - p.eval(c(0.4, 0.2))).norm() < 1e-14);
    }

    #[test]
    fn arithmetic_examples() {
        let a = ComplexPoly::from_real(&[-1.0, 1.0]);
        let b = ComplexPoly::from_real(&[1.0, 1.0]);
        assert_eq!(poly_arith(&a, &b, ArithOp::Mul), ComplexPoly::from_real(&[-1.0, 0.0, 1.0]));
        assert_eq!(poly_arith(&a, &ComplexPoly::zero(), ArithOp::Add), a);
        let p = ComplexPoly::from_real(&[1.0, 0.0, 1.0]);
        let q = ComplexPoly::from_real(&[-1.0, 0.0, 1.0]);
        assert_eq!(&p * &q, ComplexPoly::from_real(&[-1.0, 0.0, 0.0, 0.0, 1.0]));
        assert_eq!((&p * &q).degree(), Some(4));
    }

    #[test]
    fn construction_trims_only_exact_zeros() {
        let p = ComplexPoly::from_real(&[1.0, 2.0, 1e-300]);
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.trimmed(1e-12).degree(), Some(1));
        assert!(ComplexPoly::from_real(&[0.0, 0.0]).is_zero());
        assert_eq!(&p - &p, ComplexPoly::zero());
    }

    #[test]
    fn roots_of_symmetric_quadratic() {
        let rs = roots(&ComplexPoly::from_real(&[-1.0, 0.0, 1.0])).unwrap();
        let r = sorted_re(rs.roots.clone());
        assert!((r[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((r[1] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(rs.certified);
    }

    #[test]
    fn roots_of_golden_quadratic_match_quadratic_formula() {
        // oracle: (1 ± √5)/2
        let s5 = 5f64.sqrt();
        let expect = [(1.0 - s5) / 2.0, (1.0 + s5) / 2.0];
        let rs = roots(&ComplexPoly::from_real(&[-1.0, -1.0, 1.0])).unwrap();
        let r = sorted_re(rs.roots);
        assert!((r[0].re - expect[0]).abs() < 1e-14 && r[0].im.abs() < 1e-14);
        assert!((r[1].re - expect[1]).abs() < 1e-14 && r[1].im.abs() < 1e-14);
        assert!((expect[1] - 1.6180339887).abs() < 1e-10);
    }

    #[test]
    fn roots_with_double_root() {
        let p = ComplexPoly::from_roots(c(1.0, 0.0), &[c(2.0, 0.0), c(2.0, 0.0), c(-3.0, 0.0)]);
        let rs = roots(&p).unwrap();
        assert!(rs.certified, "{rs:?}");
        let r = sorted_re(rs.roots);
        assert!((r[0] - c(-3.0, 0.0)).norm() < 1e-12);
        assert!((r[1] - c(2.0, 0.0)).norm() < 1e-7);
        assert!((r[2] - c(2.0, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn roots_reject_constants() {
        assert_eq!(roots(&ComplexPoly::zero()).unwrap_err(), PolyError::ZeroPolynomial);
        assert!(matches!(
            roots(&ComplexPoly::constant(c(2.0, 0.0))),
            Err(PolyError::DegreeTooLow { .. })
        ));
    }

    #[test]
    fn discriminant_and_resultant_examples() {
        let d = discriminant(&ComplexPoly::from_real(&[2.0, 3.0, 1.0])).unwrap();
        assert!((d - c(1.0, 0.0)).norm() < 1e-12);
        let d = discriminant(&ComplexPoly::from_real(&[1.0, -2.0, 1.0])).unwrap();
        assert!(d.norm() < 1e-14);
        // oracle: leading(p)^deg q · ∏ q(roots of p)·(−1)^{mn} = 2 − 5
        let r = resultant(&ComplexPoly::from_real(&[-2.0, 1.0]), &ComplexPoly::from_real(&[-5.0, 1.0]));
        assert!((r - c(-3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn discriminant_of_cubic_matches_product_formula() {
        let rs = [c(1.0, 0.5), c(-2.0, 0.0), c(0.3, -1.0)];
        let p = ComplexPoly::from_roots(c(2.0, 0.0), &rs);
        let mut prod = c(1.0, 0.0);
        for i in 0..3 {
            for j in i + 1..3 {
                prod *= (rs[i] - rs[j]).powu(2);
            }
        }
        // lead^{2n−2} ∏_{i<j} (r_i − r_j)^2
        let expect = prod * 2f64.powi(4);
        let d = discriminant(&p).unwrap();
        assert!((d - expect).norm() < 1e-11 * expect.norm(), "{d} vs {expect}");
    }

    #[test]
    fn clustering_examples() {
        let p = ComplexPoly::from_roots(c(1.0, 0.0), &[c(1.0, 0.0), c(1.0, 0.0), c(4.0, 0.0)]);
        let cl = double_root_clusters(&p, 1e-6).unwrap();
        assert_eq!(cl.double.len(), 1);
        assert!((cl.double[0] - c(1.0, 0.0)).norm() < 1e-9);
        assert_eq!(cl.simple.len(), 1);
        assert!((cl.simple[0] - c(4.0, 0.0)).norm() < 1e-12);

        let cl = double_root_clusters(&ComplexPoly::from_real(&[-1.0, 0.0, 1.0]), 1e-8).unwrap();
        assert!(cl.double.is_empty());
        assert_eq!(cl.simple.len(), 2);
    }

    #[test]
    fn clustering_reports_triples_and_ambiguity() {
        let rs = [c(0.0, 0.0), c(1e-9, 0.0), c(0.0, 1e-9), c(5.0, 0.0)];
        let cl = cluster_roots(&rs, 1e-8).unwrap();
        assert_eq!(cl.higher.len(), 1);
        assert_eq!(cl.higher[0].multiplicity, 3);
        let rs = [c(0.0, 0.0), c(1.5e-8, 0.0)];
        assert_eq!(
            cluster_roots(&rs, 1e-8).unwrap_err(),
            PolyError::AmbiguousClustering { tol: 1e-8 }
        );
    }
}
