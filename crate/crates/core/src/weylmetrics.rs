//! Numerical curvature of the Eguchi–Hanson metric and of the hyperbolic
//! quotient, the moment map identity, the Weyl form, and a residual checker
//! for the `SU(∞)` Toda equation.
//!
//! Metrics are given in coordinates. The left-invariant forms on `S³` are
//! realized in Euler angles `(θ, φ, ψ)`:
//!
//! ```text
//! σ₁ =  cosψ dθ + sinψ sinθ dφ
//! σ₂ = −sinψ dθ + cosψ sinθ dφ
//! σ₃ =  dψ + cosθ dφ
//! ```
//!
//! Christoffel symbols come from central differences of the metric, and the
//! Riemann tensor from central differences of those, so the raw error is
//! `O(h²)`; pairing `h` with `h/2` removes the leading term.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("{what}={value} is outside the domain")]
    DomainError { what: &'static str, value: f64 },
    #[error("grid axis {axis} has {len} points, need at least 5")]
    GridTooSmall { axis: char, len: usize },
    #[error("grid holds {got} values, expected {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("metric is singular at the evaluation point")]
    Singular,
}

/// A Riemannian metric in coordinates.
pub trait CoframeMetric: Sync {
    fn dim(&self) -> usize;
    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>, MetricError>;
}

/// Rows `σ₁, σ₂, σ₃` in the basis `(dθ, dφ, dψ)`.
pub fn euler_forms(theta: f64, psi: f64) -> [[f64; 3]; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = psi.sin_cos();
    [[cp, sp * st, 0.0], [-sp, cp * st, 0.0], [0.0, ct, 1.0]]
}

/// `a dr² + b(σ₁² + σ₂²) + c σ₃²` in the coordinates `(r, θ, φ, ψ)`.
fn coframe_to_coordinates(a: f64, b: f64, c: f64, theta: f64, psi: f64) -> DMatrix<f64> {
    let s = euler_forms(theta, psi);
    let weights = [b, b, c];
    let mut g = DMatrix::zeros(4, 4);
    g[(0, 0)] = a;
    for i in 0..3 {
        for j in 0..3 {
            g[(i + 1, j + 1)] = (0..3).map(|k| weights[k] * s[k][i] * s[k][j]).sum();
        }
    }
    g
}

/// Coefficients of `dr²`, `σ₁² + σ₂²` and `σ₃²` in the Eguchi–Hanson metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EhCoframe {
    pub dr: f64,
    pub sigma12: f64,
    pub sigma3: f64,
}

/// Defined for `r ≥ 1`; at `r = 1` the `dr²` coefficient is infinite and the
/// `σ₃²` one vanishes.
pub fn eh_coframe(r: f64) -> Result<EhCoframe, MetricError> {
    if !(r >= 1.0) {
        return Err(MetricError::DomainError { what: "r", value: r });
    }
    let f = 1.0 - r.powi(-4);
    Ok(EhCoframe {
        dr: 1.0 / f,
        sigma12: r * r / 4.0,
        sigma3: r * r / 4.0 * f,
    })
}

/// Eguchi–Hanson metric in `(r, θ, φ, ψ)`.
pub fn eh_metric(r: f64, theta: f64, _phi: f64, psi: f64) -> Result<DMatrix<f64>, MetricError> {
    if !(r > 1.0) {
        return Err(MetricError::DomainError { what: "r", value: r });
    }
    let c = eh_coframe(r)?;
    Ok(coframe_to_coordinates(c.dr, c.sigma12, c.sigma3, theta, psi))
}

/// The cone `dr² + (r²/4)(σ₁² + σ₂² + σ₃²)` that Eguchi–Hanson approaches.
pub fn flat_cone_metric(r: f64, theta: f64, psi: f64) -> DMatrix<f64> {
    let b = r * r / 4.0;
    coframe_to_coordinates(1.0, b, b, theta, psi)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EguchiHanson;

impl CoframeMetric for EguchiHanson {
    fn dim(&self) -> usize {
        4
    }
    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>, MetricError> {
        eh_metric(x[0], x[1], x[2], x[3])
    }
}

/// `(σ₁² + σ₂² + σ₃²)/4` on `(θ, φ, ψ)`, the unit three-sphere.
#[derive(Debug, Clone, Copy, Default)]
pub struct RoundSphere;

impl CoframeMetric for RoundSphere {
    fn dim(&self) -> usize {
        3
    }
    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>, MetricError> {
        let g = coframe_to_coordinates(0.0, 0.25, 0.25, x[0], x[2]);
        Ok(g.view((1, 1), (3, 3)).into_owned())
    }
}

/// Euclidean space in spherical coordinates `(R, θ, φ)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlatSpherical;

impl CoframeMetric for FlatSpherical {
    fn dim(&self) -> usize {
        3
    }
    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>, MetricError> {
        let (r, st) = (x[0], x[1].sin());
        Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            1.0,
            r * r,
            r * r * st * st,
        ])))
    }
}

/// `ρ²/(1−ρ⁴)² (dρ² + ρ²(σ₁² + σ₂²)/4)` on `(ρ, θ, φ)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HyperbolicModel;

impl CoframeMetric for HyperbolicModel {
    fn dim(&self) -> usize {
        3
    }
    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>, MetricError> {
        let rho = x[0];
        if !(rho > 0.0 && rho < 1.0) {
            return Err(MetricError::DomainError { what: "rho", value: rho });
        }
        let conf = rho * rho / (1.0 - rho.powi(4)).powi(2);
        let st = x[1].sin();
        let b = conf * rho * rho / 4.0;
        Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            conf,
            b,
            b * st * st,
        ])))
    }
}

fn shifted(x: &[f64], i: usize, d: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[i] += d;
    y
}

/// `Γᵏᵢⱼ` stored as `gamma[k][(i, j)]`.
pub fn christoffel(m: &dyn CoframeMetric, x: &[f64], h: f64) -> Result<Vec<DMatrix<f64>>, MetricError> {
    let n = m.dim();
    let g = m.metric(x)?;
    let ginv = g.try_inverse().ok_or(MetricError::Singular)?;
    let mut dg = Vec::with_capacity(n);
    for l in 0..n {
        let plus = m.metric(&shifted(x, l, h))?;
        let minus = m.metric(&shifted(x, l, -h))?;
        dg.push((plus - minus) / (2.0 * h));
    }
    let mut gamma = vec![DMatrix::zeros(n, n); n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                gamma[k][(i, j)] = 0.5
                    * (0..n)
                        .map(|l| ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]))
                        .sum::<f64>();
            }
        }
    }
    Ok(gamma)
}

/// `Rᵃ_bcd` with `R(∂c, ∂d)∂b = Rᵃ_bcd ∂a`, flattened as `[a][b][c][d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Riemann {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Riemann {
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.n;
        self.data[((a * n + b) * n + c) * n + d]
    }

    fn combine(&self, other: &Riemann, s: f64, t: f64) -> Riemann {
        Riemann {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| s * a + t * b).collect(),
        }
    }

    pub fn ricci(&self) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |b, d| (0..n).map(|a| self.get(a, b, a, d)).sum())
    }

    /// Sectional curvature of the plane spanned by `∂i, ∂j`.
    pub fn sectional(&self, g: &DMatrix<f64>, i: usize, j: usize) -> f64 {
        let n = self.n;
        let lowered: f64 = (0..n).map(|e| g[(i, e)] * self.get(e, j, i, j)).sum();
        lowered / (g[(i, i)] * g[(j, j)] - g[(i, j)].powi(2))
    }
}

/// Raw second-order Riemann tensor at step `h`.
pub fn riemann_raw(m: &dyn CoframeMetric, x: &[f64], h: f64) -> Result<Riemann, MetricError> {
    let n = m.dim();
    let gamma = christoffel(m, x, h)?;
    let mut dgamma = Vec::with_capacity(n);
    for c in 0..n {
        let plus = christoffel(m, &shifted(x, c, h), h)?;
        let minus = christoffel(m, &shifted(x, c, -h), h)?;
        let d: Vec<DMatrix<f64>> = plus.iter().zip(&minus).map(|(p, q)| (p - q) / (2.0 * h)).collect();
        dgamma.push(d);
    }
    let mut data = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = dgamma[c][a][(d, b)] - dgamma[d][a][(c, b)];
                    for e in 0..n {
                        v += gamma[a][(c, e)] * gamma[e][(d, b)] - gamma[a][(d, e)] * gamma[e][(c, b)];
                    }
                    data[((a * n + b) * n + c) * n + d] = v;
                }
            }
        }
    }
    Ok(Riemann { n, data })
}

/// Riemann tensor extrapolated from steps `h` and `h/2`.
pub fn riemann(m: &dyn CoframeMetric, x: &[f64], h: f64) -> Result<Riemann, MetricError> {
    let coarse = riemann_raw(m, x, h)?;
    let fine = riemann_raw(m, x, h / 2.0)?;
    Ok(fine.combine(&coarse, 4.0 / 3.0, -1.0 / 3.0))
}

/// Ricci tensor extrapolated from steps `h` and `h/2`.
pub fn ricci_numeric(m: &dyn CoframeMetric, x: &[f64], h: f64) -> Result<DMatrix<f64>, MetricError> {
    Ok(riemann(m, x, h)?.ricci())
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Least-squares slope of `log max|Ric|` against `log h` for the raw
/// (unextrapolated) tensor.
pub fn convergence_slope(m: &dyn CoframeMetric, x: &[f64], steps: &[f64]) -> Result<f64, MetricError> {
    let mut pts = Vec::with_capacity(steps.len());
    for &h in steps {
        let ric = riemann_raw(m, x, h)?.ricci();
        pts.push((h.ln(), max_abs(&ric).ln()));
    }
    Ok(slope(&pts))
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicReport {
    /// `[sample][plane]` for the planes `ρθ`, `ρφ`, `θφ`.
    pub curvatures: Vec<[f64; 3]>,
    pub mean: f64,
    pub max_deviation: f64,
    /// Largest `|2r² − ρ² − ρ⁻²|` over the paired radii.
    pub radius_relation: f64,
}

/// Radius of the Eguchi–Hanson shell that corresponds to `ρ`.
pub fn paired_radius(rho: f64) -> f64 {
    ((rho * rho + rho.powi(-2)) / 2.0).sqrt()
}

pub fn hyperbolic_check(samples: &[f64], theta: f64, h: f64) -> Result<HyperbolicReport, MetricError> {
    let m = HyperbolicModel;
    let mut curvatures = Vec::with_capacity(samples.len());
    let mut radius_relation = 0.0f64;
    for &rho in samples {
        if !(rho > 2.0 * h && rho < 1.0 - 2.0 * h) {
            return Err(MetricError::DomainError { what: "rho", value: rho });
        }
        let x = [rho, theta, 0.4];
        let riem = riemann(&m, &x, h)?;
        let g = m.metric(&x)?;
        curvatures.push([riem.sectional(&g, 0, 1), riem.sectional(&g, 0, 2), riem.sectional(&g, 1, 2)]);
        let r = paired_radius(rho);
        radius_relation = radius_relation.max((2.0 * r * r - rho * rho - rho.powi(-2)).abs());
    }
    let all: Vec<f64> = curvatures.iter().flatten().copied().collect();
    let mean = all.iter().sum::<f64>() / all.len().max(1) as f64;
    let max_deviation = all.iter().fold(0.0f64, |m, k| m.max((k - mean).abs()));
    Ok(HyperbolicReport {
        curvatures,
        mean,
        max_deviation,
        radius_relation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    /// Largest `|(r²/4)(1−r⁻⁴) − (t−t⁻¹)/4|` relative to the value, `t = r²`.
    pub max_relative: f64,
    /// `κ` fitted in `(X, X) = κ(t − t⁻¹)` by least squares.
    pub kappa: f64,
}

pub fn moment_check(radii: &[f64]) -> Result<MomentReport, MetricError> {
    let (mut num, mut den, mut worst) = (0.0, 0.0, 0.0f64);
    for &r in radii {
        let xx = eh_coframe(r)?.sigma3;
        let t = r * r;
        let closed = (t - 1.0 / t) / 4.0;
        if closed != 0.0 {
            worst = worst.max((xx - closed).abs() / closed.abs());
        }
        let basis = t - 1.0 / t;
        num += xx * basis;
        den += basis * basis;
    }
    Ok(MomentReport {
        max_relative: worst,
        kappa: num / den,
    })
}

/// `ω = −2t/(t² − 1) dt`.
pub fn weyl_form(t: f64) -> Result<f64, MetricError> {
    if !(t >= 1.0 + 1e-6) {
        return Err(MetricError::DomainError { what: "t", value: t });
    }
    Ok(-2.0 * t / (t * t - 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylFormReport {
    /// Largest component of `dω` by central differences around the samples.
    pub max_curl: f64,
    /// Largest `|ω − (−d log(t² − 1))|` with the derivative by differences.
    pub max_exactness: f64,
}

pub fn weyl_form_check(samples: &[f64], h: f64) -> Result<WeylFormReport, MetricError> {
    // ω on (x, y, t) has only a dt part, depending on t alone.
    let omega = |_: f64, _: f64, t: f64| -> Result<[f64; 3], MetricError> { Ok([0.0, 0.0, weyl_form(t)?]) };
    let (mut curl, mut exact) = (0.0f64, 0.0f64);
    for &t in samples {
        let (x, y) = (0.3, -0.2);
        let d = |f: &dyn Fn(f64) -> Result<[f64; 3], MetricError>, k: usize| -> Result<f64, MetricError> {
            Ok((f(h)?[k] - f(-h)?[k]) / (2.0 * h))
        };
        let dx = |k| d(&|s| omega(x + s, y, t), k);
        let dy = |k| d(&|s| omega(x, y + s, t), k);
        let dt = |k| d(&|s| omega(x, y, t + s), k);
        curl = curl
            .max((dx(2)? - dt(0)?).abs())
            .max((dy(2)? - dt(1)?).abs())
            .max((dx(1)? - dy(0)?).abs());
        let potential = |s: f64| -((t + s).powi(2) - 1.0).ln();
        let fd = (potential(h) - potential(-h)) / (2.0 * h);
        exact = exact.max((fd - weyl_form(t)?).abs());
    }
    Ok(WeylFormReport {
        max_curl: curl,
        max_exactness: exact,
    })
}

/// `∫ ω` from `a` to `b` by composite Gauss–Legendre.
pub fn weyl_form_integral(a: f64, b: f64) -> Result<f64, MetricError> {
    const X: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.236_926_885_056_189_1,
        0.478_628_670_499_366_5,
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
    ];
    let pieces = 64;
    let h = (b - a) / pieces as f64;
    let mut total = 0.0;
    for k in 0..pieces {
        let mid = a + (k as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(W) {
            total += w * h / 2.0 * weyl_form(mid + x * h / 2.0)?;
        }
    }
    Ok(total)
}

/// Samples of `u` on a regular `(x, y, t)` grid, `t` varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub shape: [usize; 3],
    pub spacing: [f64; 3],
    #[serde(default)]
    pub origin: [f64; 3],
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn sample(shape: [usize; 3], spacing: [f64; 3], origin: [f64; 3], f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(shape[0] * shape[1] * shape[2]);
        for i in 0..shape[0] {
            for j in 0..shape[1] {
                for k in 0..shape[2] {
                    values.push(f(
                        origin[0] + i as f64 * spacing[0],
                        origin[1] + j as f64 * spacing[1],
                        origin[2] + k as f64 * spacing[2],
                    ));
                }
            }
        }
        GridFunction {
            shape,
            spacing,
            origin,
            values,
        }
    }

    fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(i * self.shape[1] + j) * self.shape[2] + k]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TodaReport {
    pub max_residual: f64,
    pub location: [usize; 3],
}

/// `u_xx + u_yy + (eᵘ)_tt` by central differences at interior points.
pub fn toda_residual(u: &GridFunction) -> Result<TodaReport, MetricError> {
    for (axis, &len) in ['x', 'y', 't'].iter().zip(&u.shape) {
        if len < 5 {
            return Err(MetricError::GridTooSmall { axis: *axis, len });
        }
    }
    let expected = u.shape.iter().product();
    if u.values.len() != expected {
        return Err(MetricError::ShapeMismatch {
            expected,
            got: u.values.len(),
        });
    }
    let [hx, hy, ht] = u.spacing;
    let mut best = TodaReport {
        max_residual: 0.0,
        location: [1, 1, 1],
    };
    for i in 1..u.shape[0] - 1 {
        for j in 1..u.shape[1] - 1 {
            for k in 1..u.shape[2] - 1 {
                let c = u.at(i, j, k);
                let uxx = (u.at(i + 1, j, k) - 2.0 * c + u.at(i - 1, j, k)) / (hx * hx);
                let uyy = (u.at(i, j + 1, k) - 2.0 * c + u.at(i, j - 1, k)) / (hy * hy);
                let ett = (u.at(i, j, k + 1).exp() - 2.0 * c.exp() + u.at(i, j, k - 1).exp()) / (ht * ht);
                let r = (uxx + uyy + ett).abs();
                if r > best.max_residual {
                    best = TodaReport {
                        max_residual: r,
                        location: [i, j, k],
                    };
                }
            }
        }
    }
    Ok(best)
}
