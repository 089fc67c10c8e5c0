//! Periods and the Abel–Jacobi map of `w² = z(u)` for a quartic `z` with
//! distinct roots, and the principality test used for the `D₄` constraint.
//!
//! Periods are trapezoid sums over Bernstein ellipses around pairs of roots.
//! The Abel map integrates `du/w` along polylines from a fixed basepoint,
//! carrying the sign of `w` by continuity; when a path arrives on the wrong
//! sheet the relation `AJ(P) + AJ(ιP) = AJ(ιP₀)` converts the result.
//! The two points over `u = ∞` are reached in the chart `v = 1/u`, where
//! `du/w = −dv/√z̃(v)` with `z̃(v) = v⁴z(1/v)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polycore::{roots, ComplexPoly, PolyError};

type C64 = Complex64;

const GL_ORDER: usize = 20;
/// Piece length as a fraction of the distance to the nearest root.
const PIECE_FRACTION: f64 = 0.2;
const MAX_PIECES: usize = 200_000;
const MAX_TRAPEZOID: usize = 1 << 16;
/// Relative distance under which two roots of `z` count as one. A double
/// root computed in double precision splits by about `√ε`, well above `1e−8`.
const ROOT_SEPARATION: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DellipticError {
    #[error("z must be a quartic, got degree {degree:?}")]
    NotQuartic { degree: Option<usize> },
    #[error("roots {i} and {j} of z are {distance:e} apart")]
    RootCollision { i: usize, j: usize, distance: f64 },
    #[error("quadrature for {what} did not settle (last change {change:e})")]
    QuadratureNonConvergence { what: &'static str, change: f64 },
    #[error("integration path meets a branch point near u={u}")]
    PathThroughBranchPoint { u: C64 },
    #[error("point ({u}, {w}) is not on the curve (scaled residual {residual:e})")]
    NotOnCurve { u: C64, w: C64, residual: f64 },
    #[error("divisor has {zeros} zeros but {poles} poles")]
    DivisorDegree { zeros: usize, poles: usize },
    #[error("parameter a[{0}] must be nonzero")]
    ZeroParameter(usize),
    #[error("selector index {0} is out of range")]
    BadSelector(usize),
    #[error("coefficient index {0} is out of range")]
    BadCoefficient(usize),
    #[error("Newton did not converge after {iterations} iterations (distance {distance:e})")]
    Divergence { iterations: usize, distance: f64 },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A point of the curve. `Infinity { sheet }` is the point over `u = ∞`
/// where `w/u² → sheet·√c₄` with the principal square root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurvePoint {
    Affine { u: C64, w: C64 },
    Infinity { sheet: i8 },
}

impl CurvePoint {
    pub fn affine(u: C64, w: C64) -> Self {
        CurvePoint::Affine { u, w }
    }

    /// Image under `(u, w) ↦ (u, −w)`.
    pub fn involution(self) -> Self {
        match self {
            CurvePoint::Affine { u, w } => CurvePoint::Affine { u, w: -w },
            CurvePoint::Infinity { sheet } => CurvePoint::Infinity { sheet: -sheet },
        }
    }
}

/// A lattice `Zω₁ + Zω₂` held in reduced form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub b1: C64,
    pub b2: C64,
    pub covering_radius: f64,
}

impl Lattice {
    pub fn new(w1: C64, w2: C64) -> Self {
        let (mut b1, mut b2) = (w1, w2);
        loop {
            if b2.norm_sqr() < b1.norm_sqr() {
                std::mem::swap(&mut b1, &mut b2);
            }
            let mu = ((b2 * b1.conj()).re / b1.norm_sqr()).round();
            if mu == 0.0 {
                break;
            }
            b2 -= b1 * mu;
        }
        if (b2 * b1.conj()).re < 0.0 {
            b2 = -b2;
        }
        // 0, b1, b2 is now a non-obtuse Delaunay triangle.
        let (a, b, c) = (b1.norm(), b2.norm(), (b1 - b2).norm());
        let area = 0.5 * (b1.conj() * b2).im.abs();
        Lattice {
            b1,
            b2,
            covering_radius: a * b * c / (4.0 * area),
        }
    }

    /// Nearest lattice point to `x`.
    pub fn nearest(&self, x: C64) -> C64 {
        let det = self.b1.re * self.b2.im - self.b1.im * self.b2.re;
        let s = (x.re * self.b2.im - x.im * self.b2.re) / det;
        let t = (self.b1.re * x.im - self.b1.im * x.re) / det;
        let (s0, t0) = (s.round(), t.round());
        let mut best = (f64::INFINITY, C64::new(0.0, 0.0));
        for ds in -1..=1 {
            for dt in -1..=1 {
                let p = self.b1 * (s0 + ds as f64) + self.b2 * (t0 + dt as f64);
                let d = (x - p).norm();
                if d < best.0 {
                    best = (d, p);
                }
            }
        }
        best.1
    }

    pub fn distance(&self, x: C64) -> f64 {
        (x - self.nearest(x)).norm()
    }

    /// Integer coordinates of `x` in the basis `(w1, w2)`, unrounded.
    pub fn coordinates(w1: C64, w2: C64, x: C64) -> (f64, f64) {
        let det = w1.re * w2.im - w1.im * w2.re;
        (
            (x.re * w2.im - x.im * w2.re) / det,
            (w1.re * x.im - w1.im * x.re) / det,
        )
    }

    pub fn covolume(&self) -> f64 {
        (self.b1.conj() * self.b2).im.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticCurveData {
    pub z: ComplexPoly,
    pub roots: Vec<C64>,
    /// Loop integrals of `du/w`, oriented so that `Im(ω₂/ω₁) > 0`.
    pub periods: [C64; 2],
    pub lattice: Lattice,
    pub basepoint: (C64, C64),
    /// `AJ(P) + AJ(ιP)`, the same for every point.
    pub involution_sum: C64,
}

fn gl_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for k in 1..n {
            let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
            jac[(k, k - 1)] = b;
            jac[(k - 1, k)] = b;
        }
        let eig = SymmetricEigen::new(jac);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.into_iter().unzip()
    })
}

fn root_scale(rs: &[C64]) -> f64 {
    rs.iter().map(|e| e.norm()).fold(1.0, f64::max)
}

fn nearest_root_distance(x: C64, rs: &[C64]) -> f64 {
    rs.iter().map(|e| (x - e).norm()).fold(f64::INFINITY, f64::min)
}

/// `w(b)` continued from a nearby point where `w = w_a`.
fn continue_sqrt(z: &ComplexPoly, w_a: C64, b: C64) -> C64 {
    let za = w_a * w_a;
    if za.norm() == 0.0 {
        return z.eval(b).sqrt();
    }
    w_a * (z.eval(b) / za).sqrt()
}

/// `∫ du/w` along the segment `a → b`, continuing `w` from `w_a`. Returns the
/// integral and `w(b)`. `fineness` halves every piece once per unit.
fn segment(
    z: &ComplexPoly,
    rs: &[C64],
    a: C64,
    b: C64,
    w_a: C64,
    fineness: u32,
) -> Result<(C64, C64), DellipticError> {
    let (nodes, weights) = gl_rule();
    let len = (b - a).norm();
    if len == 0.0 {
        return Ok((C64::new(0.0, 0.0), w_a));
    }
    let dir = (b - a) / len;
    let scale = root_scale(rs);
    let frac = PIECE_FRACTION / (1u32 << fineness) as f64;
    let (mut pos, mut x, mut w) = (0.0, a, w_a);
    let mut total = C64::new(0.0, 0.0);
    let mut pieces = 0;
    while pos < len {
        let d = nearest_root_distance(x, rs);
        if d <= 1e-10 * scale {
            return Err(DellipticError::PathThroughBranchPoint { u: x });
        }
        let step = (frac * d).min(len - pos);
        let y = if pos + step >= len { b } else { x + dir * step };
        let half = (y - x) / 2.0;
        let mid = (x + y) / 2.0;
        let za = w * w;
        for (t, wt) in nodes.iter().zip(weights) {
            let u = mid + half * *t;
            let wu = w * (z.eval(u) / za).sqrt();
            total += half * *wt / wu;
        }
        w = continue_sqrt(z, w, y);
        x = y;
        pos += step;
        pieces += 1;
        if pieces > MAX_PIECES {
            return Err(DellipticError::PathThroughBranchPoint { u: x });
        }
    }
    Ok((total, w))
}

fn polyline(
    z: &ComplexPoly,
    rs: &[C64],
    pts: &[C64],
    w0: C64,
    fineness: u32,
) -> Result<(C64, C64), DellipticError> {
    let mut w = w0;
    let mut total = C64::new(0.0, 0.0);
    for pair in pts.windows(2) {
        let (i, wn) = segment(z, rs, pair[0], pair[1], w, fineness)?;
        total += i;
        w = wn;
    }
    Ok((total, w))
}

/// Integrates along `pts` at two refinements and insists they agree.
fn certified_polyline(
    z: &ComplexPoly,
    rs: &[C64],
    pts: &[C64],
    w0: C64,
) -> Result<(C64, C64), DellipticError> {
    let (coarse, w_end) = polyline(z, rs, pts, w0, 0)?;
    let (fine, _) = polyline(z, rs, pts, w0, 1)?;
    let change = (coarse - fine).norm() / fine.norm().max(1e-300);
    if change > 1e-11 && (coarse - fine).norm() > 1e-13 {
        return Err(DellipticError::QuadratureNonConvergence {
            what: "path integral",
            change,
        });
    }
    Ok((fine, w_end))
}

/// Straight route from `a` to `b` bent around every root it passes closer
/// than `clearance`.
fn route(a: C64, b: C64, rs: &[C64], clearance: f64) -> Vec<C64> {
    fn go(a: C64, b: C64, rs: &[C64], clearance: f64, depth: u32, out: &mut Vec<C64>) {
        let ab = b - a;
        let len2 = ab.norm_sqr();
        let mut worst: Option<(f64, C64, C64)> = None;
        if len2 > 0.0 && depth < 8 {
            for &e in rs {
                let t = ((e - a) * ab.conj()).re / len2;
                if t <= 0.0 || t >= 1.0 {
                    continue;
                }
                let foot = a + ab * t;
                let d = (foot - e).norm();
                if d < clearance && worst.is_none_or(|w| d < w.0) {
                    worst = Some((d, e, foot));
                }
            }
        }
        match worst {
            Some((d, e, foot)) => {
                let normal = if d > 1e-14 * clearance {
                    (foot - e) / d
                } else {
                    ab * C64::new(0.0, 1.0) / ab.norm()
                };
                let via = e + normal * (2.0 * clearance);
                go(a, via, rs, clearance, depth + 1, out);
                go(via, b, rs, clearance, depth + 1, out);
            }
            None => out.push(b),
        }
    }
    let mut out = vec![a];
    go(a, b, rs, clearance, 0, &mut out);
    out
}

fn min_separation(rs: &[C64]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..rs.len() {
        for j in i + 1..rs.len() {
            m = m.min((rs[i] - rs[j]).norm());
        }
    }
    m
}

/// Bernstein ellipse parameter of the point `e` with respect to the segment
/// with midpoint `m` and half-vector `h`.
fn ellipse_level(e: C64, m: C64, h: C64) -> f64 {
    let t = (e - m) / h;
    let s = (t * t - 1.0).sqrt();
    (t + s).norm().max((t - s).norm())
}

/// `∮ du/w` over an ellipse around the segment `[a, b]` that keeps the other
/// roots outside.
fn loop_period(z: &ComplexPoly, rs: &[C64], a: C64, b: C64) -> Result<C64, DellipticError> {
    let m = (a + b) / 2.0;
    let h = (b - a) / 2.0;
    let others = rs
        .iter()
        .filter(|&&e| (e - a).norm() > 0.0 && (e - b).norm() > 0.0)
        .map(|&e| ellipse_level(e, m, h))
        .fold(f64::INFINITY, f64::min);
    let rho = if others.is_finite() { others.sqrt() } else { 2.0 };
    let eval = |n: usize| -> C64 {
        let mut total = C64::new(0.0, 0.0);
        let mut w = C64::new(0.0, 0.0);
        for k in 0..n {
            let th = 2.0 * PI * k as f64 / n as f64;
            let e = C64::from_polar(rho, th);
            let u = m + h * (e + 1.0 / e) / 2.0;
            let du = h * C64::new(0.0, 1.0) * (e - 1.0 / e) / 2.0;
            w = if k == 0 { z.eval(u).sqrt() } else { continue_sqrt(z, w, u) };
            total += du / w;
        }
        total * (2.0 * PI / n as f64)
    };
    // Consecutive nodes must stay well inside the disc free of roots.
    let circumference = 2.0 * PI * h.norm() * (rho + 1.0 / rho) / 2.0 * 1.5;
    let closest = rs
        .iter()
        .map(|&e| {
            (0..256)
                .map(|k| {
                    let ee = C64::from_polar(rho, 2.0 * PI * k as f64 / 256.0);
                    (m + h * (ee + 1.0 / ee) / 2.0 - e).norm()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min);
    let mut n = 64usize;
    while n < MAX_TRAPEZOID && circumference / n as f64 > 0.1 * closest {
        n *= 2;
    }
    let mut prev = eval(n);
    let mut change = f64::INFINITY;
    while n < MAX_TRAPEZOID {
        n *= 2;
        let next = eval(n);
        change = (next - prev).norm() / next.norm();
        prev = next;
        if change <= 1e-13 {
            return Ok(prev);
        }
    }
    if change <= 1e-9 {
        Ok(prev)
    } else {
        Err(DellipticError::QuadratureNonConvergence {
            what: "period",
            change,
        })
    }
}

fn quartic_roots(z: &ComplexPoly) -> Result<Vec<C64>, DellipticError> {
    if z.degree() != Some(4) {
        return Err(DellipticError::NotQuartic { degree: z.degree() });
    }
    let rs = roots(z)?.roots;
    let scale = root_scale(&rs);
    for i in 0..4 {
        for j in i + 1..4 {
            let d = (rs[i] - rs[j]).norm();
            if d <= ROOT_SEPARATION * scale {
                return Err(DellipticError::RootCollision { i, j, distance: d });
            }
        }
    }
    Ok(rs)
}

/// Pairing of four roots with the least total length.
fn cut_pairing(rs: &[C64]) -> [usize; 4] {
    let options = [[0, 1, 2, 3], [0, 2, 1, 3], [0, 3, 1, 2]];
    *options
        .iter()
        .min_by(|x, y| {
            let len = |p: &[usize; 4]| (rs[p[0]] - rs[p[1]]).norm() + (rs[p[2]] - rs[p[3]]).norm();
            len(x).total_cmp(&len(y))
        })
        .unwrap()
}

fn periods_of(z: &ComplexPoly, rs: &[C64]) -> Result<[C64; 2], DellipticError> {
    let [a, b, c, d] = cut_pairing(rs);
    let w1 = loop_period(z, rs, rs[a], rs[b])?;
    // The second loop takes one end of each cut; pick the best separated.
    let cross = [(a, c), (a, d), (b, c), (b, d)];
    let &(i, j) = cross
        .iter()
        .max_by(|x, y| {
            let lvl = |p: &(usize, usize)| {
                let (m, h) = ((rs[p.0] + rs[p.1]) / 2.0, (rs[p.1] - rs[p.0]) / 2.0);
                rs.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != p.0 && *k != p.1)
                    .map(|(_, &e)| ellipse_level(e, m, h))
                    .fold(f64::INFINITY, f64::min)
            };
            lvl(x).total_cmp(&lvl(y))
        })
        .unwrap();
    let mut w2 = loop_period(z, rs, rs[i], rs[j])?;
    if (w2 / w1).im < 0.0 {
        w2 = -w2;
    }
    Ok([w1, w2])
}

/// The two periods of `du/w`, with `Im(ω₂/ω₁) > 0`.
pub fn periods(z: &ComplexPoly) -> Result<[C64; 2], DellipticError> {
    let rs = quartic_roots(z)?;
    periods_of(z, &rs)
}

impl EllipticCurveData {
    pub fn new(z: ComplexPoly) -> Result<Self, DellipticError> {
        let rs = quartic_roots(&z)?;
        let periods = periods_of(&z, &rs)?;
        let lattice = Lattice::new(periods[0], periods[1]);
        let center = rs.iter().sum::<C64>() / 4.0;
        let spread = rs.iter().map(|e| (e - center).norm()).fold(0.0, f64::max);
        let u0 = (0..12)
            .map(|k| center + C64::from_polar(0.5 * spread, 0.3 + 2.0 * PI * k as f64 / 12.0))
            .max_by(|x, y| nearest_root_distance(*x, &rs).total_cmp(&nearest_root_distance(*y, &rs)))
            .unwrap();
        let w0 = z.eval(u0).sqrt();
        let mut curve = EllipticCurveData {
            z,
            roots: rs,
            periods,
            lattice,
            basepoint: (u0, w0),
            involution_sum: C64::new(0.0, 0.0),
        };
        curve.involution_sum = curve.loop_to_other_sheet()?;
        Ok(curve)
    }

    fn clearance(&self) -> f64 {
        0.25 * min_separation(&self.roots)
    }

    /// `∫` from the basepoint to its image under the involution, going once
    /// round the first root.
    fn loop_to_other_sheet(&self) -> Result<C64, DellipticError> {
        let (u0, w0) = self.basepoint;
        let e = self.roots[0];
        let rho = self.clearance().min(0.5 * (u0 - e).norm());
        let start = e + (u0 - e) / (u0 - e).norm() * rho;
        let mut pts = route(u0, start, &self.roots, self.clearance());
        let phase = (start - e).arg();
        for k in 1..=32 {
            pts.push(e + C64::from_polar(rho, phase + 2.0 * PI * k as f64 / 32.0));
        }
        *pts.last_mut().unwrap() = start;
        let back = route(start, u0, &self.roots, self.clearance());
        pts.extend_from_slice(&back[1..]);
        let (value, w_end) = certified_polyline(&self.z, &self.roots, &pts, w0)?;
        if (w_end + w0).norm() > 1e-6 * w0.norm() {
            return Err(DellipticError::QuadratureNonConvergence {
                what: "sheet change",
                change: (w_end + w0).norm() / w0.norm(),
            });
        }
        Ok(value)
    }

    pub fn scaled_on_curve_residual(&self, u: C64, w: C64) -> f64 {
        (w * w - self.z.eval(u)).norm() / (w.norm_sqr() + self.z.eval_scale(u)).max(f64::MIN_POSITIVE)
    }

    pub fn check_point(&self, p: CurvePoint) -> Result<(), DellipticError> {
        if let CurvePoint::Affine { u, w } = p {
            let residual = self.scaled_on_curve_residual(u, w);
            if residual > 1e-10 {
                return Err(DellipticError::NotOnCurve { u, w, residual });
            }
        }
        Ok(())
    }

    /// Reduces a raw Abel sum for a point reached on sheet `w_end` while the
    /// target has `w_target`.
    fn settle(&self, raw: C64, w_end: C64, w_target: C64) -> C64 {
        if (w_end - w_target).norm() <= (w_end + w_target).norm() {
            raw
        } else {
            self.involution_sum - raw
        }
    }

    fn affine_via(&self, u: C64, w: C64, via: Option<C64>) -> Result<C64, DellipticError> {
        let (u0, w0) = self.basepoint;
        let cl = self.clearance();
        let mut pts = match via {
            Some(v) => {
                let mut p = route(u0, v, &self.roots, cl);
                p.extend_from_slice(&route(v, u, &self.roots, cl)[1..]);
                p
            }
            None => route(u0, u, &self.roots, cl),
        };
        pts.dedup();
        let (raw, w_end) = certified_polyline(&self.z, &self.roots, &pts, w0)?;
        Ok(self.settle(raw, w_end, w))
    }

    fn infinity_via(&self, sheet: i8, dir: C64) -> Result<C64, DellipticError> {
        let (u0, w0) = self.basepoint;
        let radius = 2.0 * root_scale(&self.roots).max(u0.norm()) + 1.0;
        let far = dir * radius;
        let pts = route(u0, far, &self.roots, self.clearance());
        let (raw_u, w_far) = certified_polyline(&self.z, &self.roots, &pts, w0)?;
        let zt = self.z.reversed();
        let inv_roots: Vec<C64> = self
            .roots
            .iter()
            .filter(|e| e.norm() > 0.0)
            .map(|e| 1.0 / e)
            .collect();
        let v_far = 1.0 / far;
        let wt_far = w_far * v_far * v_far;
        let (raw_v, wt_end) =
            certified_polyline(&zt, &inv_roots, &[v_far, C64::new(0.0, 0.0)], wt_far)?;
        let target = self.z.leading().unwrap_or_default().sqrt() * sheet as f64;
        Ok(self.settle(raw_u - raw_v, wt_end, target))
    }
}

/// Abel map value with its path-independence check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbelValue {
    pub value: C64,
    /// Distance from the difference of two path evaluations to `Λ`, over the
    /// covering radius.
    pub path_gap: f64,
}

/// `∫` from the basepoint to `p` of `du/w`, defined modulo the period lattice.
pub fn abel_map(curve: &EllipticCurveData, p: CurvePoint) -> Result<AbelValue, DellipticError> {
    curve.check_point(p)?;
    let lat = &curve.lattice;
    let (first, second) = match p {
        CurvePoint::Affine { u, w } => {
            let (u0, w0) = curve.basepoint;
            if u == u0 && w == w0 {
                return Ok(AbelValue {
                    value: C64::new(0.0, 0.0),
                    path_gap: 0.0,
                });
            }
            let d = u - u0;
            let off = if d.norm() > 1e-3 {
                d * C64::new(0.0, 0.75)
            } else {
                C64::new(0.0, 0.5 * curve.lattice.covering_radius.min(1.0))
            };
            let mut via = (u + u0) / 2.0 + off;
            if nearest_root_distance(via, &curve.roots) < curve.clearance() {
                via = (u + u0) / 2.0 - off;
            }
            (curve.affine_via(u, w, None)?, curve.affine_via(u, w, Some(via))?)
        }
        CurvePoint::Infinity { sheet } => {
            let u0 = curve.basepoint.0;
            let dir = if u0.norm() > 0.0 { u0 / u0.norm() } else { C64::new(1.0, 0.0) };
            (
                curve.infinity_via(sheet, dir)?,
                curve.infinity_via(sheet, dir * C64::new(0.0, 1.0))?,
            )
        }
    };
    Ok(AbelValue {
        value: first,
        path_gap: lat.distance(first - second) / lat.covering_radius,
    })
}

/// Continues `w` along a polyline of `u` values. Every step must be short
/// compared with the distance to the roots.
pub fn transport(z: &ComplexPoly, path: &[C64], w0: C64) -> C64 {
    let mut w = w0;
    for pair in path.windows(2) {
        w = continue_sqrt(z, w, pair[1]);
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbelResidual {
    pub value: C64,
    /// Distance from `value` to `Λ` divided by the covering radius.
    pub lattice_distance: f64,
    pub raw_distance: f64,
    pub covering_radius: f64,
}

pub fn lattice_residual(curve: &EllipticCurveData, value: C64) -> AbelResidual {
    let raw = curve.lattice.distance(value);
    AbelResidual {
        value,
        lattice_distance: raw / curve.lattice.covering_radius,
        raw_distance: raw,
        covering_radius: curve.lattice.covering_radius,
    }
}

/// `Σ AJ(zeros) − Σ AJ(poles)` and its distance to the period lattice.
pub fn principality_residual(
    curve: &EllipticCurveData,
    zeros: &[CurvePoint],
    poles: &[CurvePoint],
) -> Result<AbelResidual, DellipticError> {
    if zeros.len() != poles.len() {
        return Err(DellipticError::DivisorDegree {
            zeros: zeros.len(),
            poles: poles.len(),
        });
    }
    let mut value = C64::new(0.0, 0.0);
    for &p in zeros {
        value += abel_map(curve, p)?.value;
    }
    for &p in poles {
        value -= abel_map(curve, p)?.value;
    }
    Ok(lattice_residual(curve, value))
}

/// The points of `w = ±i·a_j·u` on the curve, for each `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct D4Candidates {
    /// Roots of `z(u) + a_j²u²`, sorted by real then imaginary part.
    pub roots: Vec<[C64; 4]>,
    pub zeros: Vec<[CurvePoint; 4]>,
    pub poles: Vec<[CurvePoint; 4]>,
}

pub fn d4_candidates(z: &ComplexPoly, a: &[f64; 4], signs: &[i8; 4]) -> Result<D4Candidates, DellipticError> {
    let mut out = D4Candidates {
        roots: Vec::new(),
        zeros: Vec::new(),
        poles: Vec::new(),
    };
    for j in 0..4 {
        if a[j] == 0.0 {
            return Err(DellipticError::ZeroParameter(j));
        }
        let locus = z + &ComplexPoly::monomial(C64::new(a[j] * a[j], 0.0), 2);
        if locus.degree() != Some(4) {
            return Err(DellipticError::NotQuartic { degree: locus.degree() });
        }
        let mut rs = roots(&locus)?.roots;
        rs.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        let slope = C64::new(0.0, signs[j].signum() as f64 * a[j]);
        let rs: [C64; 4] = [rs[0], rs[1], rs[2], rs[3]];
        out.zeros.push(rs.map(|u| CurvePoint::affine(u, slope * u)));
        out.poles.push(rs.map(|u| CurvePoint::affine(u, -slope * u)));
        out.roots.push(rs);
    }
    Ok(out)
}

/// How one root per `j` is chosen for the zeros and for the poles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    Indices { zeros: [usize; 4], poles: [usize; 4] },
    /// The root closest to each given `u`.
    Nearest { zeros: [C64; 4], poles: [C64; 4] },
    /// Every assignment is scored and the best one kept.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct D4Divisor {
    pub zero_index: [usize; 4],
    pub pole_index: [usize; 4],
    pub zeros: Vec<CurvePoint>,
    pub poles: Vec<CurvePoint>,
}

fn nearest_index(rs: &[C64; 4], target: C64) -> usize {
    (0..4)
        .min_by(|&i, &k| (rs[i] - target).norm().total_cmp(&(rs[k] - target).norm()))
        .unwrap()
}

fn pick(c: &D4Candidates, zi: [usize; 4], pi: [usize; 4]) -> D4Divisor {
    D4Divisor {
        zero_index: zi,
        pole_index: pi,
        zeros: (0..4).map(|j| c.zeros[j][zi[j]]).collect(),
        poles: (0..4).map(|j| c.poles[j][pi[j]]).collect(),
    }
}

/// Scores all `4⁴ × 4⁴` assignments; ties keep the first in index order.
pub fn d4_exhaustive(
    curve: &EllipticCurveData,
    c: &D4Candidates,
) -> Result<(D4Divisor, AbelResidual), DellipticError> {
    let mut zaj = [[C64::new(0.0, 0.0); 4]; 4];
    let mut paj = [[C64::new(0.0, 0.0); 4]; 4];
    for j in 0..4 {
        for k in 0..4 {
            zaj[j][k] = abel_map(curve, c.zeros[j][k])?.value;
            paj[j][k] = abel_map(curve, c.poles[j][k])?.value;
        }
    }
    let assignments = |aj: &[[C64; 4]; 4]| -> Vec<([usize; 4], C64)> {
        (0..256)
            .map(|m| {
                let idx = [m & 3, (m >> 2) & 3, (m >> 4) & 3, (m >> 6) & 3];
                (idx, (0..4).map(|j| aj[j][idx[j]]).sum())
            })
            .collect()
    };
    let zs = assignments(&zaj);
    let ps = assignments(&paj);
    let mut best = (f64::INFINITY, [0; 4], [0; 4], C64::new(0.0, 0.0));
    for (zi, zv) in &zs {
        for (pi, pv) in &ps {
            let v = zv - pv;
            let d = curve.lattice.distance(v);
            if d < best.0 {
                best = (d, *zi, *pi, v);
            }
        }
    }
    Ok((pick(c, best.1, best.2), lattice_residual(curve, best.3)))
}

/// Selects the divisor `Σ pⱼ − qⱼ` on `w = ±i·a_j·u`.
pub fn d4_divisor_points(
    curve: &EllipticCurveData,
    a: &[f64; 4],
    signs: &[i8; 4],
    selector: Selector,
) -> Result<D4Divisor, DellipticError> {
    let c = d4_candidates(&curve.z, a, signs)?;
    match selector {
        Selector::Indices { zeros, poles } => {
            if let Some(&bad) = zeros.iter().chain(&poles).find(|&&i| i > 3) {
                return Err(DellipticError::BadSelector(bad));
            }
            Ok(pick(&c, zeros, poles))
        }
        Selector::Nearest { zeros, poles } => {
            let zi = std::array::from_fn(|j| nearest_index(&c.roots[j], zeros[j]));
            let pi = std::array::from_fn(|j| nearest_index(&c.roots[j], poles[j]));
            Ok(pick(&c, zi, pi))
        }
        Selector::Exhaustive => Ok(d4_exhaustive(curve, &c)?.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintOptions {
    /// Target normalized lattice distance.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative step for the central difference.
    pub fd_step: f64,
}

impl Default for ConstraintOptions {
    fn default() -> Self {
        ConstraintOptions {
            tol: 1e-8,
            max_iter: 30,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSolution {
    pub z: ComplexPoly,
    pub divisor: D4Divisor,
    pub residual: AbelResidual,
    pub iterations: usize,
}

fn with_coeff(z: &ComplexPoly, idx: usize, v: C64) -> ComplexPoly {
    let mut c = z.coeffs().to_vec();
    c.resize(5, C64::new(0.0, 0.0));
    c[idx] = v;
    ComplexPoly::new(c)
}

/// Divisor at `z` following `track`, with the residual offset to the nearest
/// lattice point.
fn offset_at(
    z: &ComplexPoly,
    a: &[f64; 4],
    signs: &[i8; 4],
    track: Selector,
) -> Result<(C64, D4Divisor, AbelResidual), DellipticError> {
    let curve = EllipticCurveData::new(z.clone())?;
    let div = d4_divisor_points(&curve, a, signs, track)?;
    let res = principality_residual(&curve, &div.zeros, &div.poles)?;
    Ok((res.value - curve.lattice.nearest(res.value), div, res))
}

fn follow(div: &D4Divisor) -> Selector {
    let u = |p: &CurvePoint| match p {
        CurvePoint::Affine { u, .. } => *u,
        CurvePoint::Infinity { .. } => C64::new(0.0, 0.0),
    };
    Selector::Nearest {
        zeros: std::array::from_fn(|j| u(&div.zeros[j])),
        poles: std::array::from_fn(|j| u(&div.poles[j])),
    }
}

/// Adjusts the coefficient `z[idx]` until the selected divisor is principal.
/// The selector fixes the divisor at the seed; afterwards each point follows
/// its nearest successor.
pub fn constraint_solve(
    z_seed: &ComplexPoly,
    idx: usize,
    a: &[f64; 4],
    signs: &[i8; 4],
    selector: Selector,
    opts: &ConstraintOptions,
) -> Result<ConstraintSolution, DellipticError> {
    if idx > 4 {
        return Err(DellipticError::BadCoefficient(idx));
    }
    let seed_curve = EllipticCurveData::new(z_seed.clone())?;
    let start = d4_divisor_points(&seed_curve, a, signs, selector)?;
    let mut z = z_seed.clone();
    let (mut f, mut div, mut res) = offset_at(&z, a, signs, follow(&start))?;
    for it in 0..=opts.max_iter {
        if res.lattice_distance <= opts.tol {
            return Ok(ConstraintSolution {
                z,
                divisor: div,
                residual: res,
                iterations: it,
            });
        }
        if it == opts.max_iter {
            break;
        }
        let c = z.coeff(idx);
        let h = opts.fd_step * c.norm().max(1.0);
        let track = follow(&div);
        let (fp, _, _) = offset_at(&with_coeff(&z, idx, c + h), a, signs, track)?;
        let (fm, _, _) = offset_at(&with_coeff(&z, idx, c - h), a, signs, track)?;
        let df = (fp - fm) / (2.0 * h);
        if df.norm() == 0.0 || !df.re.is_finite() {
            break;
        }
        let mut step = f / df;
        let cap = 0.5 * c.norm().max(1.0);
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        let mut lambda = 1.0;
        let mut moved = false;
        for _ in 0..12 {
            let trial = with_coeff(&z, idx, c - step * lambda);
            if let Ok((ft, dt, rt)) = offset_at(&trial, a, signs, track) {
                if ft.norm() < f.norm() {
                    (z, f, div, res) = (trial, ft, dt, rt);
                    moved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Err(DellipticError::Divergence {
        iterations: opts.max_iter,
        distance: res.lattice_distance,
    })
}

/// Arithmetic–geometric mean, taking at each step the square root closer to
/// the arithmetic mean.
pub fn agm(a: C64, b: C64) -> C64 {
    let (mut a, mut b) = (a, b);
    for _ in 0..100 {
        let an = (a + b) / 2.0;
        let mut bn = (a * b).sqrt();
        if (an - bn).norm() > (an + bn).norm() {
            bn = -bn;
        }
        a = an;
        b = bn;
        if (a - b).norm() <= 1e-16 * a.norm() {
            break;
        }
    }
    a
}

/// Complete elliptic integral of the first kind, `K(k)` for `0 ≤ k < 1`.
pub fn ellip_k(k: f64) -> f64 {
    PI / (2.0 * agm(C64::new(1.0, 0.0), C64::new((1.0 - k * k).sqrt(), 0.0)).re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn lemniscatic() -> ComplexPoly {
        ComplexPoly::from_real(&[1.0, 0.0, 0.0, 0.0, -1.0])
    }

    #[test]
    fn gauss_legendre_rule_is_exact_on_polynomials() {
        let (x, w) = gl_rule();
        let sum: f64 = x.iter().zip(w).map(|(x, w)| w * x.powi(38)).sum();
        assert!((sum - 2.0 / 39.0).abs() < 1e-14);
    }

    #[test]
    fn agm_matches_known_values() {
        assert!((ellip_k(0.0) - PI / 2.0).abs() < 1e-15);
        assert!((ellip_k(std::f64::consts::FRAC_1_SQRT_2) - 1.854_074_677_301_372).abs() < 1e-14);
    }

    #[test]
    fn lattice_reduction_and_covering_radius() {
        let lat = Lattice::new(c(1.0, 0.0), c(3.0, 1.0));
        assert!((lat.covolume() - 1.0).abs() < 1e-14);
        assert!((lat.covering_radius - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        assert!(lat.distance(c(7.0, -4.0)) < 1e-12);
        assert!((lat.distance(c(0.5, 0.5)) - lat.covering_radius).abs() < 1e-12);
    }

    #[test]
    fn lemniscatic_lattice_is_square() {
        let curve = EllipticCurveData::new(lemniscatic()).unwrap();
        let k0 = ellip_k(std::f64::consts::FRAC_1_SQRT_2) / std::f64::consts::SQRT_2;
        let lat = curve.lattice;
        assert!((lat.b1.norm() - 2.0 * std::f64::consts::SQRT_2 * k0).abs() < 1e-10);
        assert!((lat.b2.norm() - lat.b1.norm()).abs() < 1e-10);
        assert!(lat.distance(c(4.0 * k0, 0.0)) < 1e-10);
        assert!(lat.distance(c(2.0 * k0, 0.0)) > 1.0);
    }

    #[test]
    fn scaling_z_scales_periods() {
        let z = ComplexPoly::from_roots(c(1.0, 0.0), &[c(1.0, 0.1), c(-1.2, 0.3), c(0.2, 1.4), c(0.1, -1.0)]);
        let lam = c(1.7, -0.6);
        let base = EllipticCurveData::new(z.clone()).unwrap().lattice;
        let scaled = EllipticCurveData::new(z.scale(lam * lam)).unwrap().lattice;
        for v in [scaled.b1, scaled.b2] {
            assert!(base.distance(v * lam) < 1e-10);
        }
        assert!((scaled.covolume() * lam.norm_sqr() - base.covolume()).abs() < 1e-10 * base.covolume());
    }

    #[test]
    fn basepoint_maps_to_zero_and_involution_negates() {
        let curve = EllipticCurveData::new(lemniscatic()).unwrap();
        let (u0, w0) = curve.basepoint;
        assert_eq!(abel_map(&curve, CurvePoint::affine(u0, w0)).unwrap().value, c(0.0, 0.0));
        let u = c(0.3, 0.2);
        let p = CurvePoint::affine(u, curve.z.eval(u).sqrt());
        let a = abel_map(&curve, p).unwrap();
        let b = abel_map(&curve, p.involution()).unwrap();
        assert!(a.path_gap < 1e-8 && b.path_gap < 1e-8);
        let lat = curve.lattice;
        assert!(lat.distance(a.value + b.value - curve.involution_sum) / lat.covering_radius < 1e-8);
    }

    #[test]
    fn going_round_one_root_flips_w() {
        let z = lemniscatic();
        let path: Vec<C64> = (0..=400)
            .map(|k| c(1.0, 0.0) + C64::from_polar(0.3, 2.0 * PI * k as f64 / 400.0))
            .collect();
        let w0 = z.eval(path[0]).sqrt();
        assert!((transport(&z, &path, w0) + w0).norm() < 1e-9 * w0.norm());
        let two: Vec<C64> = (0..=400).map(|k| C64::from_polar(0.3, 2.0 * PI * k as f64 / 400.0) + 1.0).collect();
        let twice: Vec<C64> = two.iter().chain(two.iter().skip(1)).copied().collect();
        assert!((transport(&z, &twice, w0) - w0).norm() < 1e-9 * w0.norm());
    }

    #[test]
    fn empty_divisor_is_principal() {
        let curve = EllipticCurveData::new(lemniscatic()).unwrap();
        let u = c(0.4, -0.3);
        let p = CurvePoint::affine(u, curve.z.eval(u).sqrt());
        let r = principality_residual(&curve, &[p], &[p]).unwrap();
        assert_eq!(r.lattice_distance, 0.0);
        assert!(matches!(
            principality_residual(&curve, &[p], &[]),
            Err(DellipticError::DivisorDegree { zeros: 1, poles: 0 })
        ));
    }

    #[test]
    fn d4_candidates_solve_the_quadratic_in_u_squared() {
        let z = ComplexPoly::from_real(&[-1.0, 0.0, 0.0, 0.0, 1.0]);
        let cand = d4_candidates(&z, &[1.0; 4], &[1; 4]).unwrap();
        let s5 = 5f64.sqrt();
        for u in cand.roots[0] {
            let u2 = u * u;
            let ok = (u2 - (s5 - 1.0) / 2.0).norm() < 1e-12 || (u2 + (s5 + 1.0) / 2.0).norm() < 1e-12;
            assert!(ok, "{u}");
        }
        let curve = EllipticCurveData::new(z).unwrap();
        for p in cand.zeros.iter().chain(&cand.poles).flatten() {
            curve.check_point(*p).unwrap();
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            EllipticCurveData::new(ComplexPoly::from_real(&[1.0, 0.0, 1.0])),
            Err(DellipticError::NotQuartic { .. })
        ));
        let double = ComplexPoly::from_roots(c(1.0, 0.0), &[c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        assert!(matches!(
            EllipticCurveData::new(double),
            Err(DellipticError::RootCollision { .. })
        ));
        let curve = EllipticCurveData::new(lemniscatic()).unwrap();
        assert!(matches!(
            abel_map(&curve, CurvePoint::affine(c(0.5, 0.0), c(3.0, 0.0))),
            Err(DellipticError::NotOnCurve { .. })
        ));
        assert!(matches!(
            d4_candidates(&lemniscatic(), &[1.0, 0.0, 1.0, 1.0], &[1; 4]),
            Err(DellipticError::ZeroParameter(1))
        ));
    }
}
