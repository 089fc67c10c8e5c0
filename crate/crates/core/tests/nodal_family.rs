use ale_core::nodal::{
    genus_report, kernel_info, newton_solve, node_check, reverse_construct, scaled_residual,
    solve_for_branch, Gauge, NodalCandidate, NodalOptions,
};
use ale_core::polycore::{discriminant, ComplexPoly};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    Complex64::from_polar(rng.gen_range(0.2..r), rng.gen_range(0.0..std::f64::consts::TAU))
}

fn oracle(rng: &mut ChaCha8Rng, ell: usize) -> NodalCandidate {
    loop {
        let mut p: Vec<Complex64> = (0..ell).map(|_| unit(rng, 1.0)).collect();
        p.push(Complex64::new(1.0, 0.0));
        let doubles: Vec<Complex64> = (0..ell - 1)
            .map(|j| Complex64::from_polar(0.4 + 0.3 * j as f64, rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        let extra = [unit(rng, 1.5), unit(rng, 1.5)];
        if let Ok(c) = reverse_construct(&p, &doubles, extra, Complex64::new(-3.0, 0.4)) {
            return c;
        }
    }
}

#[test]
fn oracle_instances_certify_for_ell_two_to_five() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let opts = NodalOptions::default();
    for ell in 2..=5 {
        for _ in 0..5 {
            let exact = oracle(&mut rng, ell);
            assert!(scaled_residual(&exact) <= 1e-10);
            let mut seed = exact.clone();
            for v in seed.p.iter_mut().take(ell) {
                *v += unit(&mut rng, 1.0) * 1e-3;
            }
            for v in seed.s.iter_mut() {
                *v += unit(&mut rng, 1.0) * 1e-3;
            }
            let sol = newton_solve(&seed, Gauge::Auto, &opts).unwrap_or_else(|e| panic!("ℓ={ell}: {e}"));
            assert!(sol.residual <= 1e-10, "ℓ={ell}: {:e}", sol.residual);
            assert_eq!(sol.node_count, ell - 1);
            assert_eq!(sol.kernel.rank, 2 * (ell - 1));
            assert_eq!(sol.tangent_dim, 3);
            assert!(sol.kernel.gap >= 1e3);
            assert!(node_check(&sol) <= 1e-8);
            let g = genus_report(&sol).unwrap();
            assert_eq!((g.arith, g.geom), (ell as i64 - 1, 0));
        }
    }
}

#[test]
fn ell_two_solution_has_vanishing_discriminant() {
    let seed = NodalCandidate::new(
        vec![1.0, -1.0, 2.0, -2.0].into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
        Complex64::new(1.0, 0.0),
        vec![Complex64::new(3.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        vec![Complex64::new(0.2, 0.0)],
    )
    .unwrap();
    let sol = newton_solve(&seed, Gauge::Auto, &NodalOptions::default()).unwrap();
    let r = sol.candidate.discriminant_poly();
    let d = discriminant(&r).unwrap();
    let scale = r.max_coeff_norm().powi(2 * 4 - 2);
    assert!(d.norm() / scale <= 1e-8, "{:e}", d.norm() / scale);
}

#[test]
fn small_branch_moves_give_small_solution_moves() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let opts = NodalOptions::default();
    for ell in 2..=4 {
        let base = newton_solve(&oracle(&mut rng, ell), Gauge::Auto, &opts).unwrap();
        let mut moved = base.candidate.clone();
        for a in moved.branch.iter_mut() {
            *a += unit(&mut rng, 1.0) * 1e-6;
        }
        let sol = newton_solve(&moved, Gauge::Pinned(base.pins), &opts).unwrap_or_else(|e| panic!("ℓ={ell}: {e}"));
        let shift = sol
            .candidate
            .unknowns()
            .iter()
            .zip(base.candidate.unknowns())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(shift < 1e-4, "ℓ={ell}: shift {shift:e}");
    }
}

#[test]
fn continuation_solves_ell_four() {
    let branch: Vec<Complex64> = (0..8)
        .map(|j| Complex64::from_polar(1.0 + 0.07 * j as f64, std::f64::consts::PI * j as f64 / 4.0 + 0.1))
        .collect();
    let sol = solve_for_branch(&branch, &NodalOptions::default()).unwrap();
    assert_eq!(sol.node_count, 3);
    assert_eq!(kernel_info(&sol.candidate, 1e-7).tangent_dim, 3);
    let g = genus_report(&sol).unwrap();
    assert_eq!((g.arith, g.geom), (3, 0));
    let q = ComplexPoly::from_roots(sol.candidate.c, &branch);
    assert_eq!(q, sol.candidate.q_poly());
}
