//! The check groups of `verify-all`.

use ale_core::aklines::{build_line, residual_ak};
use ale_core::delliptic::{ellip_k, principality_residual, CurvePoint, EllipticCurveData, Lattice};
use ale_core::nodal::{genus_report, newton_solve, node_check, Gauge, NodalOptions, NodalSolution};
use ale_core::picard::{blowup_model, standard_types, verify_theorem, ConfigType, CurveConfig, QClass};
use ale_core::polycore::ComplexPoly;
use ale_core::weylmetrics::{
    convergence_slope, hyperbolic_check, max_abs, moment_check, ricci_numeric, toda_residual, weyl_form_check,
    weyl_form_integral, EguchiHanson, GridFunction,
};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{Module, RunConfig};
use crate::fixtures::{self, streams};
use crate::report::Check;

/// All selected groups; groups and their inner sweeps run concurrently but
/// the result order is fixed.
pub fn verify_all(cfg: &RunConfig) -> Vec<Check> {
    cfg.modules()
        .par_iter()
        .map(|&m| run_module(cfg, m))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

pub fn run_module(cfg: &RunConfig, m: Module) -> Vec<Check> {
    match m {
        Module::Picard => picard_checks(cfg),
        Module::Aklines => aklines_checks(cfg),
        Module::Nodal => nodal_checks(cfg),
        Module::Delliptic => delliptic_checks(cfg),
        Module::Weylmetrics => MetricCheck::ALL
            .par_iter()
            .map(|&c| metric_checks(cfg, c, None))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect(),
    }
}

#[derive(Debug, Serialize, PartialEq)]
struct TheoremExpectation {
    #[serde(rename = "Q")]
    q: QClass,
    #[serde(rename = "Q2")]
    q2: i64,
    #[serde(rename = "KQ")]
    kq: i64,
    delta: i64,
    family_dim: i64,
    genus_arith: i64,
}

/// One row per type comparing `Q` and its pairings with the closed forms.
pub fn theorem_check(kind: ConfigType) -> Check {
    let name = format!("theorem/{kind}");
    let report = match CurveConfig::new(kind).and_then(|c| verify_theorem(&c)) {
        Ok(r) => r,
        Err(e) => return Check::failed(Module::Picard, name, e),
    };
    let table = fixtures::expected_q(kind);
    let gamma = kind.gamma_order() as i64;
    let expected = TheoremExpectation {
        q: QClass {
            basis: table.iter().map(|(n, _)| n.to_string()).collect(),
            coeffs: table.iter().map(|(_, c)| *c).collect(),
        },
        q2: gamma,
        kq: -4,
        delta: gamma / 2 - 1,
        family_dim: 3,
        genus_arith: gamma / 2 - 1,
    };
    let measured = TheoremExpectation {
        q: report.q.clone(),
        q2: report.q2,
        kq: report.kq,
        delta: report.delta,
        family_dim: report.family_dim,
        genus_arith: report.genus_arith,
    };
    let mut check = Check::exact(Module::Picard, name, &measured, &expected);
    check.pass &= report.pass;
    check
}

#[derive(Debug, Serialize, PartialEq)]
struct BlowupFacts {
    self_intersections: [i64; 4],
    anticanonical_is_2c_e_f_g: bool,
    gram_matches_configuration: bool,
}

/// Self-intersections of `C, E, F, G` and `−K = 2C + E + F + G` in the
/// explicit blow-up model.
pub fn blowup_check(k: u32) -> Check {
    let name = format!("blowup/D{k}");
    let kind = ConfigType::D { k };
    let facts = (|| {
        let model = blowup_model(kind)?;
        let cfg = CurveConfig::new(kind)?;
        let mut si = [0i64; 4];
        for (slot, curve) in si.iter_mut().zip(["C", "E", "F", "G"]) {
            *slot = i64::try_from(model.pair(curve, curve)?).unwrap_or(i64::MIN);
        }
        let minus_k = model.lattice.canonical_class().neg();
        Ok::<_, ale_core::picard::PicardError>(BlowupFacts {
            self_intersections: si,
            anticanonical_is_2c_e_f_g: model.combine(&cfg.class(&[2, 1, 1, 1]))? == minus_k,
            gram_matches_configuration: model.restricted_gram(&cfg.names())? == cfg.gram(),
        })
    })();
    match facts {
        Ok(f) => {
            let expected = BlowupFacts {
                self_intersections: [-1, -(k as i64 - 2), -2, -2],
                anticanonical_is_2c_e_f_g: true,
                gram_matches_configuration: true,
            };
            Check::exact(Module::Picard, name, &f, &expected)
        }
        Err(e) => Check::failed(Module::Picard, name, e),
    }
}

fn picard_checks(cfg: &RunConfig) -> Vec<Check> {
    let p = &cfg.picard;
    let mut out: Vec<Check> = standard_types(p.ell_max, p.k_max).into_iter().map(theorem_check).collect();
    out.extend((4..=p.blowup_k_max).map(blowup_check));
    out
}

fn aklines_checks(cfg: &RunConfig) -> Vec<Check> {
    let a = &cfg.aklines;
    let tol = cfg.tol(a.tol);
    (0..=a.k_max)
        .into_par_iter()
        .map(|k| {
            let name = format!("residual/k={k}");
            let mut rng = fixtures::stream(cfg.seed, streams::AKLINES + k as u64);
            let mut worst = (0.0f64, 0usize);
            for draw in 0..a.draws {
                let p = fixtures::random_ak_params(&mut rng, k);
                let r = match build_line(&p) {
                    Ok(line) => residual_ak(&line, &p.levels),
                    Err(e) => return Check::failed(Module::Aklines, name, format!("draw {draw}: {e}")),
                };
                // NaN counts as the worst possible draw.
                if !(r <= worst.0) {
                    worst = (r, draw);
                }
            }
            Check::at_most(Module::Aklines, name, worst.0, tol).with_detail(&json!({
                "draws": a.draws,
                "worst_draw": worst.1,
            }))
        })
        .collect()
}

/// Residual, node count, kernel dimension, gap and genus of one solution.
pub fn solution_checks(prefix: &str, sol: &NodalSolution, tol: f64, min_gap: f64) -> Vec<Check> {
    let ell = sol.candidate.ell;
    let m = Module::Nodal;
    let mut out = vec![
        Check::at_most(m, format!("{prefix}/residual"), sol.residual, tol)
            .with_detail(&json!({"iterations": sol.iterations, "pins": sol.pins})),
        Check::exact(m, format!("{prefix}/node_count"), &sol.node_count, &(ell - 1)),
        Check::exact(m, format!("{prefix}/tangent_dim"), &sol.tangent_dim, &3usize),
        Check::at_least(m, format!("{prefix}/kernel_gap"), sol.kernel.gap, min_gap)
            .with_detail(&json!({"rank": sol.kernel.rank, "singular_values": sol.kernel.singular_values})),
    ];
    out.push(match genus_report(sol) {
        Ok(g) => Check::exact(m, format!("{prefix}/genus"), &(g.arith, g.geom), &(ell as i64 - 1, 0i64)),
        Err(e) => Check::failed(m, format!("{prefix}/genus"), e),
    });
    let node = node_check(sol);
    out.push(Check::at_most(m, format!("{prefix}/node_values"), node, 1e-8));
    out
}

type NodalJob = Box<dyn Fn() -> Result<NodalSolution, String> + Send + Sync>;

fn nodal_checks(cfg: &RunConfig) -> Vec<Check> {
    let n = &cfg.nodal;
    let tol = cfg.tol(n.tol);
    let opts = NodalOptions {
        tol: tol.max(1e-14),
        ..NodalOptions::default()
    };
    let seeded: Vec<usize> = match n.ell {
        Some(l) => vec![l],
        None => vec![2, 3],
    };
    let oracle_ells: Vec<usize> = match n.ell {
        Some(l) => vec![l],
        None => (2..=n.oracle_ell_max).collect(),
    };
    let mut jobs: Vec<(String, NodalJob)> = Vec::new();
    for &ell in &seeded {
        match fixtures::documented_seed(ell) {
            Some(seed) => jobs.push((
                format!("seeded/l={ell}"),
                Box::new(move || newton_solve(&seed, Gauge::Auto, &opts).map_err(|e| e.to_string())),
            )),
            None => {
                let branch = fixtures::polygon_branch(ell);
                jobs.push((
                    format!("polygon/l={ell}"),
                    Box::new(move || {
                        ale_core::nodal::solve_for_branch(&branch, &opts).map_err(|e| e.to_string())
                    }),
                ))
            }
        }
    }
    let mut rng = fixtures::stream(cfg.seed, streams::NODAL);
    for &ell in &oracle_ells {
        for i in 0..n.oracles_per_ell {
            let (_, seed) = fixtures::oracle_instance(&mut rng, ell);
            jobs.push((
                format!("oracle/l={ell}/{i}"),
                Box::new(move || newton_solve(&seed, Gauge::Auto, &opts).map_err(|e| e.to_string())),
            ));
        }
    }
    jobs.par_iter()
        .map(|(name, job)| match job() {
            Ok(sol) => solution_checks(name, &sol, tol, n.min_gap),
            Err(e) => vec![Check::failed(Module::Nodal, name.clone(), e)],
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Smallest positive real lattice vector among small combinations.
pub fn smallest_real_period(lat: &Lattice) -> f64 {
    let mut best = f64::INFINITY;
    for m in -6i32..=6 {
        for n in -6i32..=6 {
            let v = lat.b1 * m as f64 + lat.b2 * n as f64;
            if v.re > 1e-9 && v.im.abs() < 1e-9 * v.re {
                best = best.min(v.re);
            }
        }
    }
    best
}

fn delliptic_checks(cfg: &RunConfig) -> Vec<Check> {
    let d = &cfg.delliptic;
    let tol = cfg.tol(d.tol);
    let m = Module::Delliptic;
    let mut out = Vec::new();

    let oracle = 2.0 * fixtures::lemniscate_quarter();
    let z = ComplexPoly::from_real(&[1.0, 0.0, 0.0, 0.0, -1.0]);
    out.push(match EllipticCurveData::new(z) {
        Ok(curve) => {
            let half = smallest_real_period(&curve.lattice) / 2.0;
            Check::at_most(m, "lemniscate/half_period", (half - oracle).abs(), tol)
                .with_detail(&json!({"half_period": half, "oracle": oracle}))
        }
        Err(e) => Check::failed(m, "lemniscate/half_period", e),
    });

    let mut rng = fixtures::stream(cfg.seed, streams::LEGENDRE);
    let moduli: Vec<f64> = (0..d.moduli).map(|_| rng.gen_range(0.05..0.95)).collect();
    let legendre: Vec<Check> = moduli
        .par_iter()
        .enumerate()
        .map(|(i, &k)| {
            let name = format!("legendre/{i}");
            let z = ComplexPoly::from_real(&[1.0, 0.0, -(1.0 + k * k), 0.0, k * k]);
            match EllipticCurveData::new(z) {
                Ok(curve) => {
                    let lat = &curve.lattice;
                    let (kk, kp) = (ellip_k(k), ellip_k((1.0 - k * k).sqrt()));
                    let d1 = lat.distance(Complex64::new(4.0 * kk, 0.0)) / lat.covering_radius;
                    let d2 = lat.distance(Complex64::new(0.0, 2.0 * kp)) / lat.covering_radius;
                    let cov = (lat.covolume() - 8.0 * kk * kp).abs() / (8.0 * kk * kp);
                    Check::at_most(m, name, d1.max(d2).max(cov), tol).with_detail(&json!({
                        "modulus": k,
                        "real_period_distance": d1,
                        "imaginary_period_distance": d2,
                        "covolume_relative": cov,
                    }))
                }
                Err(e) => Check::failed(m, name, e),
            }
        })
        .collect();
    out.extend(legendre);

    let mut rng = fixtures::stream(cfg.seed, streams::DIVISORS);
    for i in 0..d.divisors {
        let z = fixtures::random_quartic(&mut rng);
        let u0 = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let name = format!("principal/u_minus_u0/{i}");
        let res = EllipticCurveData::new(z).and_then(|curve| {
            let w0 = curve.z.eval(u0).sqrt();
            principality_residual(
                &curve,
                &[CurvePoint::affine(u0, w0), CurvePoint::affine(u0, -w0)],
                &[CurvePoint::Infinity { sheet: 1 }, CurvePoint::Infinity { sheet: -1 }],
            )
        });
        out.push(match res {
            Ok(r) => Check::at_most(m, name, r.lattice_distance, tol),
            Err(e) => Check::failed(m, name, e),
        });
    }

    let z = ComplexPoly::from_real(&[1.0, 0.0, -2.5, 0.0, 0.8]);
    out.push(
        match EllipticCurveData::new(z).and_then(|c| principality_residual(&c, &[], &[])) {
            Ok(r) => Check::exact(m, "principal/trivial", &r.lattice_distance, &0.0),
            Err(e) => Check::failed(m, "principal/trivial", e),
        },
    );
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricCheck {
    EhRicci,
    Moment,
    Hyperbolic,
    WeylForm,
    Toda,
}

impl MetricCheck {
    pub const ALL: [MetricCheck; 5] = [
        MetricCheck::EhRicci,
        MetricCheck::Moment,
        MetricCheck::Hyperbolic,
        MetricCheck::WeylForm,
        MetricCheck::Toda,
    ];
}

/// One metric fixture; `grid` replaces the Toda fixture.
pub fn metric_checks(cfg: &RunConfig, which: MetricCheck, grid: Option<&GridFunction>) -> Vec<Check> {
    let w = &cfg.weylmetrics;
    let m = Module::Weylmetrics;
    let h = w.h.get();
    match which {
        MetricCheck::EhRicci => fixtures::EH_POINTS
            .par_iter()
            .enumerate()
            .flat_map_iter(|(i, x)| {
                let ric = ricci_numeric(&EguchiHanson, x, h).map(|r| max_abs(&r));
                let slope = convergence_slope(&EguchiHanson, x, &fixtures::EH_STEPS);
                let a = match ric {
                    Ok(v) => Check::at_most(m, format!("eh_ricci/{i}"), v, cfg.tol(w.ricci_tol))
                        .with_detail(&json!({"point": x, "h": h})),
                    Err(e) => Check::failed(m, format!("eh_ricci/{i}"), e),
                };
                let b = match slope {
                    Ok(v) => Check::at_least(m, format!("eh_order/{i}"), v, w.min_slope)
                        .with_detail(&json!({"steps": fixtures::EH_STEPS})),
                    Err(e) => Check::failed(m, format!("eh_order/{i}"), e),
                };
                [a, b]
            })
            .collect(),
        MetricCheck::Moment => {
            let mut rng = fixtures::stream(cfg.seed, streams::MOMENT);
            let radii = fixtures::moment_radii(&mut rng, w.moment_samples);
            match moment_check(&radii) {
                Ok(r) => vec![
                    Check::at_most(m, "moment/sigma3_relative", r.max_relative, cfg.tol(w.moment_tol))
                        .with_detail(&json!({"samples": radii.len()})),
                    Check::at_most(m, "moment/kappa", (r.kappa - 0.25).abs(), cfg.tol(w.kappa_tol))
                        .with_detail(&json!({"kappa": r.kappa})),
                ],
                Err(e) => vec![Check::failed(m, "moment", e)],
            }
        }
        MetricCheck::Hyperbolic => {
            match hyperbolic_check(&fixtures::hyperbolic_samples(), fixtures::HYPERBOLIC_THETA, h) {
                Ok(r) => vec![
                    Check::at_most(m, "hyperbolic/spread", r.max_deviation, cfg.tol(w.hyperbolic_tol))
                        .with_detail(&json!({"mean": r.mean, "curvatures": r.curvatures})),
                    Check::at_most(m, "hyperbolic/radius_relation", r.radius_relation, cfg.tol(w.weyl_tol)),
                ],
                Err(e) => vec![Check::failed(m, "hyperbolic", e)],
            }
        }
        MetricCheck::WeylForm => {
            let target = -(8.0f64 / 3.0).ln();
            let integral = match weyl_form_integral(2.0, 3.0) {
                Ok(v) => Check::at_most(m, "weyl_form/integral", (v - target).abs(), cfg.tol(w.weyl_tol))
                    .with_detail(&json!({"integral": v, "closed_form": target})),
                Err(e) => Check::failed(m, "weyl_form/integral", e),
            };
            let samples = [1.5, 2.0, 3.0, 5.0];
            let closed = match weyl_form_check(&samples, h) {
                Ok(r) => Check::at_most(m, "weyl_form/curl", r.max_curl, cfg.tol(w.weyl_tol))
                    .with_detail(&json!({"exactness": r.max_exactness})),
                Err(e) => Check::failed(m, "weyl_form/curl", e),
            };
            vec![integral, closed]
        }
        MetricCheck::Toda => {
            let fixture = fixtures::toda_fixture();
            let u = grid.unwrap_or(&fixture);
            match toda_residual(u) {
                Ok(r) => vec![Check::at_most(m, "toda/residual", r.max_residual, cfg.tol(w.toda_tol))
                    .with_detail(&json!({"location": r.location, "shape": u.shape}))],
                Err(e) => vec![Check::failed(m, "toda/residual", e)],
            }
        }
    }
}
