use std::f64::consts::PI;

use ale_core::delliptic::{
    abel_map, agm, constraint_solve, d4_candidates, d4_divisor_points, d4_exhaustive, ellip_k,
    principality_residual, ConstraintOptions, CurvePoint, DellipticError, EllipticCurveData, Lattice,
    Selector,
};
use ale_core::polycore::{roots, ComplexPoly};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C64 = Complex64;

/// `∫₀¹ du/√(1−u⁴)` after `u = 1 − t²`, which removes the endpoint singularity.
fn lemniscate_quarter() -> f64 {
    let n = 400;
    let h = 1.0 / n as f64;
    let f = |t: f64| {
        let u = 1.0 - t * t;
        2.0 / ((2.0 - t * t) * (1.0 + u * u)).sqrt()
    };
    // Composite Simpson on a smooth integrand.
    let mut s = f(0.0) + f(1.0);
    for k in 1..n {
        s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn smallest_real_period(lat: &Lattice) -> f64 {
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

fn in_lattice(lat: &Lattice, v: C64) -> bool {
    lat.distance(v) / lat.covering_radius <= 1e-8
}

fn random_quartic(rng: &mut ChaCha8Rng) -> (ComplexPoly, Vec<C64>, C64) {
    loop {
        let rs: Vec<C64> = (0..4)
            .map(|_| C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
            .collect();
        let sep = (0..4)
            .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
            .map(|(i, j)| (rs[i] - rs[j]).norm())
            .fold(f64::INFINITY, f64::min);
        if sep > 0.5 {
            let lead = C64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
            return (ComplexPoly::from_roots(lead, &rs), rs, lead);
        }
    }
}

fn point_on(curve: &EllipticCurveData, u: C64, sheet: f64) -> CurvePoint {
    CurvePoint::affine(u, curve.z.eval(u).sqrt() * sheet)
}

#[test]
fn lemniscatic_real_period_matches_quadrature() {
    let oracle = 2.0 * lemniscate_quarter();
    assert!((oracle - 2.622_057_554_292_119_8).abs() < 1e-10);
    let z = ComplexPoly::from_real(&[1.0, 0.0, 0.0, 0.0, -1.0]);
    let curve = EllipticCurveData::new(z).unwrap();
    let real = smallest_real_period(&curve.lattice);
    assert!((real / 2.0 - oracle).abs() < 1e-8, "{real}");
}

#[test]
fn legendre_periods_match_agm() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let k: f64 = rng.gen_range(0.05..0.95);
        let z = ComplexPoly::from_real(&[1.0, 0.0, -(1.0 + k * k), 0.0, k * k]);
        let lat = EllipticCurveData::new(z).unwrap().lattice;
        let kk = ellip_k(k);
        let kp = ellip_k((1.0 - k * k).sqrt());
        assert!(in_lattice(&lat, C64::new(4.0 * kk, 0.0)), "k={k}");
        assert!(in_lattice(&lat, C64::new(0.0, 2.0 * kp)), "k={k}");
        assert!((lat.covolume() - 8.0 * kk * kp).abs() < 1e-8 * lat.covolume());
    }
}

/// Loop around `e₁, e₂` equals `2πi / (√c₄ · M(√((e₁−e₃)(e₂−e₄)), √((e₁−e₄)(e₂−e₃))))`
/// up to sign.
#[test]
fn random_quartic_periods_match_complex_agm() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let (z, e, lead) = random_quartic(&mut rng);
        let lat = EllipticCurveData::new(z).unwrap().lattice;
        let oracle = |a: C64, b: C64, c: C64, d: C64| {
            let m = agm(((a - c) * (b - d)).sqrt(), ((a - d) * (b - c)).sqrt());
            C64::new(0.0, 2.0 * PI) / (lead.sqrt() * m)
        };
        let o1 = oracle(e[0], e[1], e[2], e[3]);
        let o2 = oracle(e[1], e[2], e[0], e[3]);
        let o3 = oracle(e[0], e[2], e[1], e[3]);
        for o in [o1, o2, o3] {
            assert!(in_lattice(&lat, o), "{o} not in lattice {lat:?}");
        }
        let cov = [(o1, o2), (o1, o3), (o2, o3)]
            .iter()
            .map(|(a, b)| (a.conj() * b).im.abs())
            .filter(|v| *v > 1e-6)
            .fold(f64::INFINITY, f64::min);
        assert!((cov - lat.covolume()).abs() < 1e-8 * cov);
    }
}

#[test]
fn divisor_of_u_minus_constant_is_principal() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let (z, _, _) = random_quartic(&mut rng);
        let curve = EllipticCurveData::new(z).unwrap();
        let u0 = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let zeros = [point_on(&curve, u0, 1.0), point_on(&curve, u0, -1.0)];
        let poles = [CurvePoint::Infinity { sheet: 1 }, CurvePoint::Infinity { sheet: -1 }];
        let r = principality_residual(&curve, &zeros, &poles).unwrap();
        assert!(r.lattice_distance <= 1e-8, "{:e}", r.lattice_distance);
    }
}

#[test]
fn divisor_of_w_minus_a_line_is_principal() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..5 {
        let (z, _, _) = random_quartic(&mut rng);
        let curve = EllipticCurveData::new(z.clone()).unwrap();
        let beta = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let gamma = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let line = ComplexPoly::new(vec![gamma, beta]);
        let us = roots(&(&z - &(&line * &line))).unwrap().roots;
        let zeros: Vec<CurvePoint> = us.iter().map(|&u| CurvePoint::affine(u, line.eval(u))).collect();
        let poles = [1, 1, -1, -1].map(|sheet| CurvePoint::Infinity { sheet });
        let r = principality_residual(&curve, &zeros, &poles).unwrap();
        assert!(r.lattice_distance <= 1e-8, "{:e}", r.lattice_distance);
        // Sums of principal divisors stay principal.
        let u0 = us[0] + 0.37;
        let mut z2 = zeros.clone();
        z2.extend([point_on(&curve, u0, 1.0), point_on(&curve, u0, -1.0)]);
        let mut p2 = poles.to_vec();
        p2.extend([CurvePoint::Infinity { sheet: 1 }, CurvePoint::Infinity { sheet: -1 }]);
        assert!(principality_residual(&curve, &z2, &p2).unwrap().lattice_distance <= 1e-8);
    }
}

#[test]
fn involution_sum_is_constant_along_the_curve() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (z, _, _) = random_quartic(&mut rng);
    let curve = EllipticCurveData::new(z).unwrap();
    let lat = curve.lattice;
    for _ in 0..10 {
        let u = C64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let p = point_on(&curve, u, 1.0);
        let a = abel_map(&curve, p).unwrap();
        let b = abel_map(&curve, p.involution()).unwrap();
        assert!(a.path_gap <= 1e-8 && b.path_gap <= 1e-8);
        let c = a.value + b.value - curve.involution_sum;
        assert!(lat.distance(c) / lat.covering_radius <= 1e-8);
    }
    let inf = abel_map(&curve, CurvePoint::Infinity { sheet: 1 }).unwrap().value
        + abel_map(&curve, CurvePoint::Infinity { sheet: -1 }).unwrap().value;
    assert!(lat.distance(inf - curve.involution_sum) / lat.covering_radius <= 1e-8);
}

#[test]
fn random_divisors_are_not_principal() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (z, _, _) = random_quartic(&mut rng);
    let curve = EllipticCurveData::new(z).unwrap();
    let trials = 200;
    let mut far = 0;
    for _ in 0..trials {
        let mut pts = || -> Vec<CurvePoint> {
            (0..4)
                .map(|_| {
                    let u = C64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
                    point_on(&curve, u, if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
                })
                .collect()
        };
        let (zs, ps) = (pts(), pts());
        if principality_residual(&curve, &zs, &ps).unwrap().lattice_distance > 0.05 {
            far += 1;
        }
    }
    assert!(far as f64 >= 0.95 * trials as f64, "{far}/{trials}");
}

#[test]
fn paired_symmetric_configuration_cancels() {
    let z = ComplexPoly::from_real(&[1.0, 0.0, -2.5, 0.0, 0.8]);
    let curve = EllipticCurveData::new(z.clone()).unwrap();
    let a = [1.0, -1.0, 2.0, -2.0];
    let sel = Selector::Indices {
        zeros: [0, 3, 1, 2],
        poles: [3, 0, 2, 1],
    };
    let div = d4_divisor_points(&curve, &a, &[1; 4], sel).unwrap();
    let r = principality_residual(&curve, &div.zeros, &div.poles).unwrap();
    assert!(r.lattice_distance <= 1e-8);
    let (_, best) = d4_exhaustive(&curve, &d4_candidates(&z, &a, &[1; 4]).unwrap()).unwrap();
    assert!(best.lattice_distance <= r.lattice_distance);
}

fn generic_instance() -> (ComplexPoly, [f64; 4], [i8; 4], Selector) {
    let rs = [C64::new(1.0, 0.2), C64::new(-1.1, 0.4), C64::new(0.3, 1.3), C64::new(-0.2, -1.2)];
    let z = ComplexPoly::from_roots(C64::new(0.7, 0.4), &rs);
    let a = [0.5, 1.0, 1.5, 2.0];
    let signs = [1, 1, -1, 1];
    let curve = EllipticCurveData::new(z.clone()).unwrap();
    let (div, _) = d4_exhaustive(&curve, &d4_candidates(&z, &a, &signs).unwrap()).unwrap();
    let sel = Selector::Indices {
        zeros: div.zero_index,
        poles: div.pole_index,
    };
    (z, a, signs, sel)
}

#[test]
fn constraint_solve_restores_a_perturbed_instance() {
    let (z, a, signs, sel) = generic_instance();
    let opts = ConstraintOptions::default();
    let solved = constraint_solve(&z, 1, &a, &signs, sel, &opts).unwrap();
    assert!(solved.residual.lattice_distance <= 1e-8);

    let again = constraint_solve(&solved.z, 1, &a, &signs, sel, &opts).unwrap();
    assert_eq!(again.iterations, 0);
    assert_eq!(again.z, solved.z);

    let mut c = solved.z.coeffs().to_vec();
    c[1] += 1e-4;
    let perturbed = ComplexPoly::new(c);
    let back = constraint_solve(&perturbed, 1, &a, &signs, sel, &opts).unwrap();
    assert!(back.iterations <= 20);
    assert!(back.residual.lattice_distance <= 1e-8);
    assert!((back.z.coeff(1) - solved.z.coeff(1)).norm() < 1e-6);
}

#[test]
fn constraint_solve_reports_failure() {
    let (z, a, signs, _) = generic_instance();
    let sel = Selector::Indices {
        zeros: [0, 1, 2, 3],
        poles: [1, 2, 3, 0],
    };
    let opts = ConstraintOptions {
        max_iter: 2,
        ..ConstraintOptions::default()
    };
    match constraint_solve(&z, 0, &a, &signs, sel, &opts) {
        Err(DellipticError::Divergence { distance, .. }) => assert!(distance > 1e-8),
        other => panic!("expected divergence, got {other:?}"),
    }
}
