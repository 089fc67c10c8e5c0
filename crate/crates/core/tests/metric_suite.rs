use ale_core::weylmetrics::{
    convergence_slope, eh_coframe, hyperbolic_check, max_abs, moment_check, ricci_numeric, toda_residual,
    EguchiHanson, GridFunction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EH_POINTS: [[f64; 4]; 5] = [
    [1.5, 1.0, 0.3, 0.7],
    [2.0, 0.6, 1.1, 2.0],
    [3.0, 2.0, -0.4, 0.1],
    [1.2, 1.4, 2.5, -1.0],
    [5.0, 0.9, 0.0, 3.0],
];

#[test]
fn eh_ricci_vanishes_at_second_order() {
    for x in EH_POINTS {
        let ric = ricci_numeric(&EguchiHanson, &x, 1e-3).unwrap();
        assert!(max_abs(&ric) <= 1e-6, "{x:?}: {:e}", max_abs(&ric));
        let slope = convergence_slope(&EguchiHanson, &x, &[1e-2, 5e-3, 2e-3, 1e-3]).unwrap();
        assert!(slope >= 1.9, "{x:?}: slope {slope}");
    }
}

#[test]
fn moment_norm_is_the_sigma3_coefficient() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let radii: Vec<f64> = (0..50).map(|_| rng.gen_range(1.0f64..10.0).max(1.0 + 1e-9)).collect();
    for &r in &radii {
        let t = r * r;
        let c = eh_coframe(r).unwrap().sigma3;
        assert!((c - (t - 1.0 / t) / 4.0).abs() <= 4.0 * f64::EPSILON * c.abs());
    }
    let rep = moment_check(&radii).unwrap();
    assert!((rep.kappa - 0.25).abs() < 1e-14);
}

#[test]
fn hyperbolic_model_has_constant_curvature() {
    let samples: Vec<f64> = (0..10).map(|k| 0.15 + 0.07 * k as f64).collect();
    let rep = hyperbolic_check(&samples, 1.1, 1e-3).unwrap();
    assert!(rep.max_deviation <= 1e-5, "{:e}", rep.max_deviation);
    assert!(rep.mean < 0.0);
    assert!(rep.radius_relation < 1e-12);
    let coarse = hyperbolic_check(&samples, 1.1, 4e-3).unwrap();
    assert!(rep.max_deviation < coarse.max_deviation);
}

#[test]
fn toda_checker_is_linear_in_second_differences() {
    let shape = [7, 7, 7];
    let h = [0.1, 0.2, 0.1];
    let one = GridFunction::sample(shape, h, [0.0; 3], |x, _, _| 0.5 * x * x);
    let two = GridFunction::sample(shape, h, [0.0; 3], |x, _, _| x * x);
    let a = toda_residual(&one).unwrap().max_residual;
    let b = toda_residual(&two).unwrap().max_residual;
    assert!((a - 1.0).abs() < 1e-10 && (b - 2.0).abs() < 1e-10);
}
