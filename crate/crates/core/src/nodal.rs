//! Nodal curves `w² + p(x)w + q(x) = 0` in the hyperelliptic model of the
//! `A(2ℓ−1)` class, with `deg p = ℓ` and `q = c∏(x − aᵢ)` of degree `2ℓ`.
//!
//! The curve has a node over each double zero of `r = p² − 4q`. Imposing
//! `ℓ − 1` of them on the `ℓ + 2` coefficients of `p` and `c` leaves a
//! three dimensional family. The solver works on the unknown vector
//!
//! ```text
//! z = (p₀, …, p_ℓ, c, s₁, …, s_{ℓ−1})
//! ```
//!
//! with constraints `r(sⱼ) = r′(sⱼ) = 0`, and pins three of the `p`/`c`
//! coordinates so that the remaining system is square.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::picard::{verify_theorem, CurveConfig, PicardError};
use crate::polycore::{cluster_roots, roots, ComplexPoly, PolyError};

type C64 = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NodalError {
    #[error("ℓ={ell} is out of range (need ℓ ≥ {min})")]
    InvalidEll { ell: usize, min: usize },
    #[error("expected {expected} branch points, got {got}")]
    BranchCount { expected: usize, got: usize },
    #[error("branch points {0} and {1} coincide")]
    RepeatedBranch(usize, usize),
    #[error("expected {expected} node locations, got {got}")]
    NodeCount { expected: usize, got: usize },
    #[error("coefficient c must be nonzero")]
    ZeroLeading,
    #[error("p must have {expected} coefficients, got {got}")]
    PolyLength { expected: usize, got: usize },
    #[error("gauge pin {0} is not a p or c coordinate")]
    BadPin(usize),
    #[error("Newton iteration stalled after {iterations} steps at residual {residual:e}")]
    Divergence { iterations: usize, residual: f64 },
    #[error("constraint Jacobian has rank {rank}, need {required}")]
    RankDeficient { rank: usize, required: usize },
    #[error("found {found} double roots of p²−4q, expected {expected}")]
    Uncertified { found: usize, expected: usize },
    #[error("branch-point continuation failed in every attempt")]
    ContinuationFailed,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Picard(#[from] PicardError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalCandidate {
    pub ell: usize,
    pub branch: Vec<C64>,
    pub c: C64,
    /// Coefficients `p₀..p_ℓ` in ascending order, always `ℓ + 1` long.
    pub p: Vec<C64>,
    pub s: Vec<C64>,
}

impl NodalCandidate {
    pub fn new(branch: Vec<C64>, c: C64, p: Vec<C64>, s: Vec<C64>) -> Result<Self, NodalError> {
        if branch.len() < 2 || branch.len() % 2 == 1 {
            return Err(NodalError::BranchCount {
                expected: 2 * (branch.len() / 2).max(1),
                got: branch.len(),
            });
        }
        let ell = branch.len() / 2;
        let cand = NodalCandidate {
            ell,
            branch,
            c,
            p,
            s,
        };
        cand.validate()?;
        Ok(cand)
    }

    pub fn validate(&self) -> Result<(), NodalError> {
        let ell = self.ell;
        if ell < 1 {
            return Err(NodalError::InvalidEll { ell, min: 1 });
        }
        if self.branch.len() != 2 * ell {
            return Err(NodalError::BranchCount {
                expected: 2 * ell,
                got: self.branch.len(),
            });
        }
        if self.p.len() != ell + 1 {
            return Err(NodalError::PolyLength {
                expected: ell + 1,
                got: self.p.len(),
            });
        }
        if self.s.len() != ell - 1 {
            return Err(NodalError::NodeCount {
                expected: ell - 1,
                got: self.s.len(),
            });
        }
        if self.c == C64::new(0.0, 0.0) {
            return Err(NodalError::ZeroLeading);
        }
        distinct(&self.branch)
    }

    pub fn p_poly(&self) -> ComplexPoly {
        ComplexPoly::new(self.p.clone())
    }

    pub fn q_poly(&self) -> ComplexPoly {
        ComplexPoly::from_roots(self.c, &self.branch)
    }

    /// `r = p² − 4q`.
    pub fn discriminant_poly(&self) -> ComplexPoly {
        let p = self.p_poly();
        &(&p * &p) - &self.q_poly().scale(C64::new(4.0, 0.0))
    }

    pub fn unknowns(&self) -> Vec<C64> {
        let mut z = self.p.clone();
        z.push(self.c);
        z.extend_from_slice(&self.s);
        z
    }

    fn set_unknowns(&mut self, z: &[C64]) {
        let ell = self.ell;
        self.p.copy_from_slice(&z[..=ell]);
        self.c = z[ell + 1];
        self.s.copy_from_slice(&z[ell + 2..]);
    }

    pub fn unknown_count(&self) -> usize {
        2 * self.ell + 1
    }
}

fn distinct(points: &[C64]) -> Result<(), NodalError> {
    let scale = points.iter().map(|a| a.norm()).fold(1.0, f64::max);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if (points[i] - points[j]).norm() <= 1e-12 * scale {
                return Err(NodalError::RepeatedBranch(i, j));
            }
        }
    }
    Ok(())
}

/// `(r(s₁), r′(s₁), …, r(s_{ℓ−1}), r′(s_{ℓ−1}))`; empty for `ℓ = 1`.
pub fn constraint_system(cand: &NodalCandidate) -> Vec<C64> {
    let r = cand.discriminant_poly();
    let dr = r.derivative();
    cand.s.iter().flat_map(|&s| [r.eval(s), dr.eval(s)]).collect()
}

/// Largest constraint value, each divided by the magnitude of the terms that
/// produced it, so that the figure is insensitive to the overall size of `p`
/// and `q`.
pub fn scaled_residual(cand: &NodalCandidate) -> f64 {
    let p = cand.p_poly();
    let q = cand.q_poly();
    let (dp, dq) = (p.derivative(), q.derivative());
    let mut worst = 0.0f64;
    for &s in &cand.s {
        let (ps, dps) = (p.eval(s), dp.eval(s));
        let (qs, dqs) = (q.eval(s), dq.eval(s));
        let (pa, dpa) = (p.eval_scale(s), dp.eval_scale(s));
        let (qa, dqa) = (q.eval_scale(s), dq.eval_scale(s));
        let r = ps * ps - qs * 4.0;
        let dr = ps * dps * 2.0 - dqs * 4.0;
        let sr = (pa * pa + 4.0 * qa).max(f64::MIN_POSITIVE);
        let sdr = (2.0 * pa * dpa + 4.0 * dqa).max(f64::MIN_POSITIVE);
        worst = worst.max(r.norm() / sr).max(dr.norm() / sdr);
    }
    worst
}

/// Jacobian of [`constraint_system`] with respect to all `2ℓ + 1` unknowns.
pub fn jacobian(cand: &NodalCandidate) -> DMatrix<C64> {
    let ell = cand.ell;
    let n = cand.unknown_count();
    let rows = 2 * (ell - 1);
    let mut jac = DMatrix::zeros(rows, n);
    let p = cand.p_poly();
    let dp = p.derivative();
    let monic = ComplexPoly::from_roots(C64::new(1.0, 0.0), &cand.branch);
    let dmonic = monic.derivative();
    let r = cand.discriminant_poly();
    let (dr, ddr) = (r.derivative(), r.derivative().derivative());
    for (j, &s) in cand.s.iter().enumerate() {
        let (ps, dps) = (p.eval(s), dp.eval(s));
        let mut pow = C64::new(1.0, 0.0);
        let mut prev = C64::new(0.0, 0.0);
        for m in 0..=ell {
            jac[(2 * j, m)] = ps * pow * 2.0;
            jac[(2 * j + 1, m)] = (dps * pow + ps * prev * m as f64) * 2.0;
            prev = pow;
            pow *= s;
        }
        jac[(2 * j, ell + 1)] = monic.eval(s) * -4.0;
        jac[(2 * j + 1, ell + 1)] = dmonic.eval(s) * -4.0;
        jac[(2 * j, ell + 2 + j)] = dr.eval(s);
        jac[(2 * j + 1, ell + 2 + j)] = ddr.eval(s);
    }
    jac
}

/// Which three coordinates of `z` are held fixed during a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Gauge {
    /// Pick the pins that leave the best conditioned square system at the
    /// starting point.
    #[default]
    Auto,
    Pinned([usize; 3]),
}

impl Gauge {
    /// Index of `c` in the unknown vector.
    pub fn c_index(ell: usize) -> usize {
        ell + 1
    }
}

fn free_columns(n: usize, pins: &[usize; 3]) -> Vec<usize> {
    (0..n).filter(|i| !pins.contains(i)).collect()
}

/// Ratio of extreme singular values; 1 for an empty system.
fn conditioning(jac: &DMatrix<C64>) -> f64 {
    if jac.nrows() == 0 {
        return 1.0;
    }
    let sv = jac.clone().svd(false, false).singular_values;
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

fn auto_pins(cand: &NodalCandidate) -> [usize; 3] {
    let ell = cand.ell;
    let jac = jacobian(cand);
    let n = cand.unknown_count();
    let mut best = ([0, ell, ell + 1], -1.0);
    for a in 0..ell + 2 {
        for b in a + 1..ell + 2 {
            for c in b + 1..ell + 2 {
                let pins = [a, b, c];
                let cols = free_columns(n, &pins);
                let score = conditioning(&jac.select_columns(&cols));
                if score > best.1 {
                    best = (pins, score);
                }
            }
        }
    }
    best.0
}

fn resolve_pins(cand: &NodalCandidate, gauge: Gauge) -> Result<[usize; 3], NodalError> {
    match gauge {
        Gauge::Auto => Ok(auto_pins(cand)),
        Gauge::Pinned(pins) => {
            for &i in &pins {
                if i > cand.ell + 1 {
                    return Err(NodalError::BadPin(i));
                }
            }
            if pins[0] == pins[1] || pins[1] == pins[2] || pins[0] == pins[2] {
                return Err(NodalError::BadPin(pins[1]));
            }
            Ok(pins)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodalOptions {
    /// Target for [`scaled_residual`].
    pub tol: f64,
    pub max_iter: usize,
    /// Singular values below `kernel_rel · σ_max` count as kernel.
    pub kernel_rel: f64,
    /// Smallest clustering radius for double roots, relative to the root
    /// magnitude; ill-conditioned pairs get a radius from their predicted split.
    pub cluster_tol: f64,
}

impl Default for NodalOptions {
    fn default() -> Self {
        NodalOptions {
            tol: 1e-10,
            max_iter: 60,
            kernel_rel: 1e-7,
            cluster_tol: 1e-6,
        }
    }
}

/// Extra full steps taken once the tolerance is met. The residual is an
/// evaluation of `r` near a double zero, so a residual of `ε` only places the
/// zero to about `√ε`; polishing to rounding level keeps the pair of roots of
/// `r` tight enough to cluster.
const POLISH_STEPS: usize = 4;
/// Clustering radius in units of the predicted double-root split.
const SPLIT_FACTOR: f64 = 64.0;

/// Damped Newton on the free coordinates. Returns the final residual and
/// iteration count.
fn correct(
    cand: &mut NodalCandidate,
    pins: &[usize; 3],
    tol: f64,
    max_iter: usize,
) -> Result<(f64, usize), NodalError> {
    let n = cand.unknown_count();
    let cols = free_columns(n, pins);
    let mut res = scaled_residual(cand);
    let mut polished = 0;
    for it in 0..max_iter + POLISH_STEPS {
        if res <= tol {
            if polished == POLISH_STEPS || res <= 1e2 * f64::EPSILON {
                return Ok((res, it));
            }
            polished += 1;
        } else if it >= max_iter {
            break;
        }
        let f = DVector::from_vec(constraint_system(cand));
        let jf = jacobian(cand).select_columns(&cols);
        let rhs = -&f;
        let step = match jf.clone().lu().solve(&rhs) {
            Some(x) if x.iter().all(|v| v.re.is_finite() && v.im.is_finite()) => x,
            _ => jf
                .svd(true, true)
                .solve(&rhs, 1e-14)
                .map_err(|_| NodalError::Divergence {
                    iterations: it,
                    residual: res,
                })?,
        };
        let z0 = cand.unknowns();
        let norm0 = f.norm();
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let mut z = z0.clone();
            for (k, &col) in cols.iter().enumerate() {
                z[col] += step[k] * lambda;
            }
            cand.set_unknowns(&z);
            let trial = DVector::from_vec(constraint_system(cand)).norm();
            if trial.is_finite() && trial < norm0 {
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        let next = scaled_residual(cand);
        if !accepted || (res <= tol && next >= res) {
            cand.set_unknowns(&z0);
            if res <= tol {
                return Ok((res, it));
            }
            return Err(NodalError::Divergence {
                iterations: it,
                residual: res,
            });
        }
        res = next;
    }
    if res <= tol {
        Ok((res, max_iter))
    } else {
        Err(NodalError::Divergence {
            iterations: max_iter,
            residual: res,
        })
    }
}

/// Singular value structure of the full constraint Jacobian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelInfo {
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub tangent_dim: usize,
    /// Smallest kept singular value over the largest discarded one. Directions
    /// that are structurally zero (the matrix is wide) are measured against
    /// `σ_max · ε · n`.
    pub gap: f64,
}

pub fn kernel_info(cand: &NodalCandidate, kernel_rel: f64) -> KernelInfo {
    let jac = jacobian(cand);
    let n = cand.unknown_count();
    if jac.nrows() == 0 {
        return KernelInfo {
            singular_values: Vec::new(),
            rank: 0,
            tangent_dim: n,
            gap: f64::INFINITY,
        };
    }
    let mut sv: Vec<f64> = jac.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let max = sv[0];
    let rank = sv.iter().filter(|&&v| v > kernel_rel * max).count();
    let floor = max * f64::EPSILON * n as f64;
    let discarded = sv.get(rank).copied().unwrap_or(0.0).max(floor);
    let gap = if rank == 0 { 0.0 } else { sv[rank - 1] / discarded };
    KernelInfo {
        singular_values: sv,
        rank,
        tangent_dim: n - rank,
        gap,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalSolution {
    pub candidate: NodalCandidate,
    pub residual: f64,
    pub iterations: usize,
    pub pins: [usize; 3],
    /// Double roots of `p² − 4q` found by clustering.
    pub doubles: Vec<C64>,
    pub simple: Vec<C64>,
    pub node_count: usize,
    pub kernel: KernelInfo,
    pub tangent_dim: usize,
}

/// Solves from `seed`, keeping the three gauge coordinates at their seed
/// values, then certifies the nodes and measures the tangent dimension.
pub fn newton_solve(
    seed: &NodalCandidate,
    gauge: Gauge,
    opts: &NodalOptions,
) -> Result<NodalSolution, NodalError> {
    seed.validate()?;
    let pins = resolve_pins(seed, gauge)?;
    let mut cand = seed.clone();
    let (residual, iterations) = correct(&mut cand, &pins, opts.tol, opts.max_iter)?;
    certify(cand, pins, residual, iterations, opts)
}

/// Largest expected separation of the computed roots at the double roots `s`:
/// near `s`, `r ≈ r''(s)(x − s)²/2`, so an evaluation error `ε·Σ|cₖ||s|ᵏ`
/// splits the pair by `2√(2ε·Σ|cₖ||s|ᵏ / |r''(s)|)`.
fn double_root_split(r: &ComplexPoly, s: &[C64]) -> f64 {
    let r2 = r.derivative().derivative();
    s.iter()
        .map(|&x| 2.0 * (2.0 * f64::EPSILON * r.eval_scale(x) / r2.eval(x).norm()).sqrt())
        .fold(0.0, f64::max)
}

fn certify(
    cand: NodalCandidate,
    pins: [usize; 3],
    residual: f64,
    iterations: usize,
    opts: &NodalOptions,
) -> Result<NodalSolution, NodalError> {
    let ell = cand.ell;
    let kernel = kernel_info(&cand, opts.kernel_rel);
    let required = 2 * (ell - 1);
    if kernel.rank < required {
        return Err(NodalError::RankDeficient {
            rank: kernel.rank,
            required,
        });
    }
    let r = cand.discriminant_poly();
    let rs = roots(&r)?;
    let scale = rs.roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let radius = (opts.cluster_tol * scale).max(SPLIT_FACTOR * double_root_split(&r, &cand.s));
    let clusters = cluster_roots(&rs.roots, radius)?;
    let node_count = clusters.double.len();
    if node_count != ell - 1 || !clusters.higher.is_empty() {
        return Err(NodalError::Uncertified {
            found: node_count,
            expected: ell - 1,
        });
    }
    Ok(NodalSolution {
        tangent_dim: kernel.tangent_dim,
        candidate: cand,
        residual,
        iterations,
        pins,
        doubles: clusters.double,
        simple: clusters.simple,
        node_count,
        kernel,
    })
}

/// Checks `F = w² + pw + q`, `∂F/∂x` and `∂F/∂w` at `(sⱼ, −p(sⱼ)/2)` for each
/// certified double root. Returns the largest scaled value.
pub fn node_check(sol: &NodalSolution) -> f64 {
    let p = sol.candidate.p_poly();
    let q = sol.candidate.q_poly();
    let (dp, dq) = (p.derivative(), q.derivative());
    let mut worst = 0.0f64;
    for &s in &sol.doubles {
        let w = -p.eval(s) / 2.0;
        let f = w * w + p.eval(s) * w + q.eval(s);
        let fx = dp.eval(s) * w + dq.eval(s);
        let fw = w * 2.0 + p.eval(s);
        let wa = w.norm();
        let sf = (wa * wa + p.eval_scale(s) * wa + q.eval_scale(s)).max(f64::MIN_POSITIVE);
        let sx = (dp.eval_scale(s) * wa + dq.eval_scale(s)).max(f64::MIN_POSITIVE);
        let sw = (2.0 * wa + p.eval_scale(s)).max(f64::MIN_POSITIVE);
        worst = worst.max(f.norm() / sf).max(fx.norm() / sx).max(fw.norm() / sw);
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenusReport {
    pub arith: i64,
    pub geom: i64,
    pub pass: bool,
}

/// Arithmetic genus from the intersection numbers of `Q` on `A(2ℓ−1)`, less
/// one for every node.
pub fn genus_report(sol: &NodalSolution) -> Result<GenusReport, NodalError> {
    let config = CurveConfig::a_series(sol.candidate.ell as u32)?;
    let arith = verify_theorem(&config)?.genus_arith;
    let geom = arith - sol.node_count as i64;
    Ok(GenusReport {
        arith,
        geom,
        pass: geom == 0,
    })
}

/// Builds a solved instance backwards: fixes `r = lead·∏(x − sⱼ)²·(x − t₁)(x − t₂)`
/// and `p`, then reads off `q = (p² − r)/4`, its roots as branch points and its
/// leading coefficient as `c`.
pub fn reverse_construct(
    p: &[C64],
    doubles: &[C64],
    extra: [C64; 2],
    lead: C64,
) -> Result<NodalCandidate, NodalError> {
    let ell = p.len().saturating_sub(1);
    if ell < 1 {
        return Err(NodalError::InvalidEll { ell, min: 1 });
    }
    if doubles.len() != ell - 1 {
        return Err(NodalError::NodeCount {
            expected: ell - 1,
            got: doubles.len(),
        });
    }
    let mut rroots: Vec<C64> = doubles.iter().flat_map(|&s| [s, s]).collect();
    rroots.extend_from_slice(&extra);
    let r = ComplexPoly::from_roots(lead, &rroots);
    let pp = ComplexPoly::new(p.to_vec());
    let q = (&(&pp * &pp) - &r).scale(C64::new(0.25, 0.0));
    if q.degree() != Some(2 * ell) {
        return Err(NodalError::ZeroLeading);
    }
    let c = q.leading().unwrap_or_default();
    let branch = roots(&q)?.roots;
    NodalCandidate::new(branch, c, p.to_vec(), doubles.to_vec())
}

/// Deterministic start instance for continuation, spread over the disc that
/// holds `target`. `attempt` rotates and rescales the construction.
fn start_instance(target: &[C64], attempt: usize) -> Result<NodalCandidate, NodalError> {
    let ell = target.len() / 2;
    let m = target.iter().sum::<C64>() / target.len() as f64;
    let rho = target.iter().map(|a| (a - m).norm()).fold(0.0, f64::max).max(1e-3);
    let turn = |k: f64| C64::from_polar(1.0, 2.399_963_229_728_653 * k + 0.7 * attempt as f64);
    let radius = 0.35 + 0.1 * attempt as f64;
    let doubles: Vec<C64> = (0..ell - 1)
        .map(|j| m + turn(j as f64) * rho * radius * (1.0 + 0.2 * j as f64))
        .collect();
    let extra = [m + turn(5.0) * rho * 0.8, m - turn(7.0) * rho * 0.6];
    let mut p: Vec<C64> = (0..=ell)
        .map(|i| turn(11.0 + i as f64) * rho.powi((ell - i) as i32) * 0.5)
        .collect();
    p[ell] = C64::new(1.0, 0.0);
    reverse_construct(&p, &doubles, extra, C64::new(-3.0 - attempt as f64, 0.5))
}

/// Pairs each start point with a target point, greedily by distance.
fn match_points(from: &[C64], to: &[C64]) -> Vec<C64> {
    let mut used = vec![false; to.len()];
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, a) in from.iter().enumerate() {
        for (j, b) in to.iter().enumerate() {
            pairs.push(((a - b).norm(), i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out = vec![C64::new(0.0, 0.0); from.len()];
    let mut done = vec![false; from.len()];
    for (_, i, j) in pairs {
        if !done[i] && !used[j] {
            out[i] = to[j];
            done[i] = true;
            used[j] = true;
        }
    }
    out
}

fn track(
    start: NodalCandidate,
    target: &[C64],
    opts: &NodalOptions,
) -> Result<NodalCandidate, NodalError> {
    let from = start.branch.clone();
    let to = match_points(&from, target);
    let mut cand = start;
    let mut pins = auto_pins(&cand);
    let (mut t, mut h) = (0.0f64, 0.05f64);
    let mut prev: Option<(f64, Vec<C64>)> = None;
    while t < 1.0 {
        if h < 1e-7 {
            return Err(NodalError::ContinuationFailed);
        }
        let tn = (t + h).min(1.0);
        let z0 = cand.unknowns();
        let mut trial = cand.clone();
        trial.branch = from
            .iter()
            .zip(&to)
            .map(|(a, b)| a * (1.0 - tn) + b * tn)
            .collect();
        if let Some((tp, zp)) = &prev {
            let k = (tn - t) / (t - tp);
            let z: Vec<C64> = z0.iter().zip(zp).map(|(a, b)| a + (a - b) * k).collect();
            trial.set_unknowns(&z);
        }
        let ok = match correct(&mut trial, &pins, opts.tol * 1e2, 8) {
            Ok(_) => {
                let zn = trial.unknowns();
                let jump = zn.iter().zip(&z0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                let size = z0.iter().map(|v| v.norm()).fold(1.0, f64::max);
                jump <= 0.25 * size && kernel_info(&trial, opts.kernel_rel).rank == 2 * (cand.ell - 1)
            }
            Err(_) => false,
        };
        if ok {
            prev = Some((t, z0));
            t = tn;
            cand = trial;
            h = (h * 1.5).min(0.1);
        } else {
            h *= 0.5;
            prev = None;
            pins = auto_pins(&cand);
        }
    }
    cand.branch = target.to_vec();
    Ok(cand)
}

/// Finds a nodal curve with the given branch points by continuation from a
/// reverse-constructed instance, then polishes and certifies it.
pub fn solve_for_branch(branch: &[C64], opts: &NodalOptions) -> Result<NodalSolution, NodalError> {
    if branch.len() < 2 || branch.len() % 2 == 1 {
        return Err(NodalError::BranchCount {
            expected: 2 * (branch.len() / 2).max(1),
            got: branch.len(),
        });
    }
    distinct(branch)?;
    let ell = branch.len() / 2;
    if ell == 1 {
        let seed = NodalCandidate::new(
            branch.to_vec(),
            C64::new(1.0, 0.0),
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            Vec::new(),
        )?;
        return newton_solve(&seed, Gauge::Auto, opts);
    }
    for attempt in 0..8 {
        let Ok(start) = start_instance(branch, attempt) else {
            continue;
        };
        let Ok(end) = track(start, branch, opts) else {
            continue;
        };
        if let Ok(sol) = newton_solve(&end, Gauge::Auto, opts) {
            return Ok(sol);
        }
    }
    Err(NodalError::ContinuationFailed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicted_split_covers_computed_roots() {
        let one = C64::new(1.0, 0.0);
        let s = C64::new(0.3, 0.2);
        let others = [C64::new(0.35, 0.2), C64::new(-1.0, 0.5), C64::new(0.2, -0.9)];
        let r = ComplexPoly::from_roots(one, &[s, s, others[0], others[1], others[2]]);
        let split = double_root_split(&r, &[s]);
        let rs = roots(&r).unwrap().roots;
        let mut d: Vec<f64> = rs.iter().map(|x| (x - s).norm()).collect();
        d.sort_by(f64::total_cmp);
        assert!(d[0] + d[1] <= SPLIT_FACTOR * split, "{} vs {split:e}", d[0] + d[1]);
        assert!(d[2] > 2.0 * SPLIT_FACTOR * split);
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn reals(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| c(x, 0.0)).collect()
    }

    fn symmetric_l2(p0: f64, s: f64) -> NodalCandidate {
        NodalCandidate::new(
            reals(&[1.0, -1.0, 2.0, -2.0]),
            c(1.0, 0.0),
            reals(&[p0, 0.0, 1.0]),
            vec![c(s, 0.0)],
        )
        .unwrap()
    }

    #[test]
    fn symmetric_point_is_an_exact_solution() {
        // p = x² + 4, q = (x² − 1)(x² − 4) gives r = x²(28 − 3x²).
        let cand = symmetric_l2(4.0, 0.0);
        assert!(constraint_system(&cand).iter().all(|v| v.norm() == 0.0));
        let r = cand.discriminant_poly();
        assert_eq!(r, ComplexPoly::from_real(&[0.0, 0.0, 28.0, 0.0, -3.0]));
    }

    #[test]
    fn simple_root_fails_the_derivative_constraint() {
        let s = (28.0f64 / 3.0).sqrt();
        let f = constraint_system(&symmetric_l2(4.0, s));
        assert!(f[0].norm() < 1e-10);
        assert!(f[1].norm() > 1.0);
    }

    #[test]
    fn ell_one_is_empty_and_three_dimensional() {
        let cand = NodalCandidate::new(reals(&[1.0, -1.0]), c(1.0, 0.0), reals(&[0.3, 1.0]), vec![]).unwrap();
        assert!(constraint_system(&cand).is_empty());
        let sol = newton_solve(&cand, Gauge::Auto, &NodalOptions::default()).unwrap();
        assert_eq!(sol.node_count, 0);
        assert_eq!(sol.tangent_dim, 3);
        let g = genus_report(&sol).unwrap();
        assert_eq!((g.arith, g.geom), (0, 0));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let cand = NodalCandidate::new(
            vec![c(1.0, 0.2), c(-1.0, 0.1), c(0.3, 1.5), c(-0.2, -1.1), c(2.0, -0.4), c(-1.7, 0.9)],
            c(0.8, 0.3),
            vec![c(0.4, 0.1), c(-0.2, 0.5), c(0.7, -0.3), c(1.1, 0.2)],
            vec![c(0.3, 0.3), c(-0.5, 0.2)],
        )
        .unwrap();
        let jac = jacobian(&cand);
        let z = cand.unknowns();
        let h = 1e-6;
        for k in 0..z.len() {
            let mut plus = cand.clone();
            let mut minus = cand.clone();
            let (mut zp, mut zm) = (z.clone(), z.clone());
            zp[k] += h;
            zm[k] -= h;
            plus.set_unknowns(&zp);
            minus.set_unknowns(&zm);
            let fp = constraint_system(&plus);
            let fm = constraint_system(&minus);
            for row in 0..fp.len() {
                let fd = (fp[row] - fm[row]) / (2.0 * h);
                assert!((fd - jac[(row, k)]).norm() < 1e-6 * (1.0 + fd.norm()), "row {row} col {k}");
            }
        }
    }

    #[test]
    fn even_seed_converges_for_ell_two() {
        let seed = symmetric_l2(3.0, 0.2);
        let sol = newton_solve(&seed, Gauge::Auto, &NodalOptions::default()).unwrap();
        assert!(sol.residual <= 1e-10);
        assert_eq!(sol.node_count, 1);
        assert_eq!(sol.tangent_dim, 3);
        assert!(sol.kernel.gap >= 1e3);
        assert!(node_check(&sol) <= 1e-8);
        let g = genus_report(&sol).unwrap();
        assert_eq!((g.arith, g.geom), (1, 0));
    }

    #[test]
    fn pinned_gauge_is_respected() {
        let seed = symmetric_l2(3.0, 0.2);
        let pins = [1, 2, 3];
        let sol = newton_solve(&seed, Gauge::Pinned(pins), &NodalOptions::default()).unwrap();
        assert_eq!(sol.pins, pins);
        assert_eq!(sol.candidate.p[1], seed.p[1]);
        assert_eq!(sol.candidate.p[2], seed.p[2]);
        assert_eq!(sol.candidate.c, seed.c);
        assert!(matches!(
            newton_solve(&seed, Gauge::Pinned([0, 1, 5]), &NodalOptions::default()),
            Err(NodalError::BadPin(5))
        ));
    }

    #[test]
    fn reverse_construction_is_already_solved() {
        let cand = reverse_construct(
            &[c(0.2, 0.1), c(-0.3, 0.4), c(0.1, 0.0), c(1.0, 0.0)],
            &[c(0.5, 0.2), c(-0.4, -0.6)],
            [c(1.3, 0.1), c(-1.2, 0.7)],
            c(-3.0, 0.5),
        )
        .unwrap();
        assert_eq!(cand.ell, 3);
        assert!(scaled_residual(&cand) < 1e-12);
    }

    #[test]
    fn invalid_candidates_are_rejected() {
        assert!(matches!(
            NodalCandidate::new(reals(&[1.0, 1.0]), c(1.0, 0.0), reals(&[0.0, 1.0]), vec![]),
            Err(NodalError::RepeatedBranch(0, 1))
        ));
        assert!(matches!(
            NodalCandidate::new(reals(&[1.0, 2.0]), c(0.0, 0.0), reals(&[0.0, 1.0]), vec![]),
            Err(NodalError::ZeroLeading)
        ));
        assert!(matches!(
            NodalCandidate::new(reals(&[1.0, 2.0, 3.0]), c(1.0, 0.0), reals(&[0.0, 1.0]), vec![]),
            Err(NodalError::BranchCount { .. })
        ));
    }

    #[test]
    fn continuation_reaches_a_hexagon() {
        let branch: Vec<C64> = (0..6)
            .map(|j| C64::from_polar(1.0 + 0.1 * j as f64, std::f64::consts::PI * j as f64 / 3.0))
            .collect();
        let sol = solve_for_branch(&branch, &NodalOptions::default()).unwrap();
        assert_eq!(sol.node_count, 2);
        assert_eq!(sol.tangent_dim, 3);
        assert!(sol.residual <= 1e-10);
        assert_eq!(sol.candidate.branch, branch);
    }
}
