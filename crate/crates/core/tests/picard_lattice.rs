use ale_core::picard::{
    blowup_model, pairings, solve_q, standard_types, verify_theorem, ConfigType, CurveConfig,
};
use num_bigint::BigInt;

#[test]
fn blowup_gram_matches_configuration_for_d4_to_d12() {
    for k in 4..=12 {
        let kind = ConfigType::D { k };
        let cfg = CurveConfig::new(kind).unwrap();
        let model = blowup_model(kind).unwrap();
        assert_eq!(model.restricted_gram(&cfg.names()).unwrap(), cfg.gram(), "D{k}");
    }
}

#[test]
fn anticanonical_identity_in_every_model() {
    for k in 4..=12 {
        let m = blowup_model(ConfigType::D { k }).unwrap();
        let cfg = CurveConfig::d_series(k).unwrap();
        let sum = m.combine(&cfg.class(&[2, 1, 1, 1])).unwrap();
        assert_eq!(sum, m.lattice.canonical_class().neg(), "D{k}");
    }
    for ell in 1..=6 {
        let m = blowup_model(ConfigType::A { ell }).unwrap();
        let cfg = CurveConfig::a_series(ell).unwrap();
        assert_eq!(m.restricted_gram(&cfg.names()).unwrap(), cfg.gram(), "A{}", 2 * ell - 1);
        let sum = m.combine(&cfg.class(&[2, 1, 1])).unwrap();
        assert_eq!(sum, m.lattice.canonical_class().neg(), "A{}", 2 * ell - 1);
    }
}

/// Q² and K·Q computed inside the blow-up lattice use the lattice canonical
/// class directly, with no appeal to adjunction.
#[test]
fn q_pairings_agree_with_blowup_lattice() {
    let kinds = (1..=6)
        .map(|ell| ConfigType::A { ell })
        .chain((4..=10).map(|k| ConfigType::D { k }));
    for kind in kinds {
        let cfg = CurveConfig::new(kind).unwrap();
        let model = blowup_model(kind).unwrap();
        let q = solve_q(&cfg).unwrap();
        let q_model = model.combine(&q).unwrap();
        let via_config = pairings(&cfg, &q).unwrap();
        assert_eq!(model.lattice.pair(&q_model, &q_model), via_config.self_, "{kind}");
        let k = model.lattice.canonical_class();
        assert_eq!(model.lattice.pair(&k, &q_model), via_config.canonical, "{kind}");
        assert_eq!(via_config.self_, BigInt::from(cfg.gamma_order));
    }
}

#[test]
fn q_is_isolated_under_unit_perturbations() {
    for kind in standard_types(6, 10) {
        let cfg = CurveConfig::new(kind).unwrap();
        let q = solve_q(&cfg).unwrap();
        let gram = cfg.gram();
        let hub = cfg.index_of("C").unwrap();
        let constraints_hold = |coeffs: &[BigInt]| {
            (0..coeffs.len()).all(|j| {
                let dot: BigInt = coeffs.iter().enumerate().map(|(i, c)| c * &gram[i][j]).sum();
                dot == BigInt::from(if j == hub { 2 } else { 0 })
            })
        };
        assert!(constraints_hold(&q.coeffs));
        for i in 0..q.coeffs.len() {
            for delta in [-1, 1] {
                let mut c = q.coeffs.clone();
                c[i] += delta;
                assert!(!constraints_hold(&c), "{kind}: coefficient {i} moved by {delta}");
            }
        }
    }
}

#[test]
fn theorem_holds_for_every_supported_type() {
    for kind in standard_types(6, 10) {
        let r = verify_theorem(&CurveConfig::new(kind).unwrap()).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.family_dim, 3);
        assert_eq!(r.genus_arith, r.delta);
    }
}
