use resilient_cluster::generator::generate;
use resilient_cluster::lp::certify;
use resilient_cluster::mstdp::solve_outlier_clustering;
use resilient_cluster::{
    Error, Formulation, GeneratorConfig, GeneratorMode, Instance, Objective, Rational, Scalar,
    VerdictKind,
};

fn to_float(inst: &Instance<Rational>) -> Instance<f64> {
    inst.convert(|q| q.to_f64())
}

#[test]
fn float_and_exact_certificates_agree_on_planted_instances() {
    let cases = [
        (GeneratorMode::Symmetric, Formulation::Kc, 0),
        (GeneratorMode::Asymmetric, Formulation::AsymKc, 0),
        (GeneratorMode::Outlier, Formulation::Kco, 2),
    ];
    for (mode, form, z) in cases {
        for seed in 0..10 {
            let n = if z > 0 { 10 } else { 9 };
            let cfg = GeneratorConfig::new(n, 3, z, mode, seed);
            let (exact, planted) = generate::<Rational>(&cfg).unwrap();
            let a = certify(&exact, form).unwrap();
            let b = certify(&to_float(&exact), form).unwrap();
            assert_eq!(a.kind, VerdictKind::Optimal, "{mode:?} seed {seed}");
            assert_eq!(b.kind, VerdictKind::Optimal, "{mode:?} seed {seed}");
            assert!((a.lp_radius.to_f64() - b.lp_radius).abs() < 1e-9);
            let (ca, cb) = (a.clustering.unwrap(), b.clustering.unwrap());
            assert!(ca.same_partition(&cb));
            assert!(ca.same_partition(&planted), "{mode:?} seed {seed}");
        }
    }
}

#[test]
fn float_and_exact_dp_agree() {
    for seed in 0..10 {
        let cfg = GeneratorConfig::new(11, 2, 3, GeneratorMode::Outlier, seed);
        let (exact, planted) = generate::<Rational>(&cfg).unwrap();
        for obj in [Objective::KMedian, Objective::KMeans] {
            let a = solve_outlier_clustering(&exact, obj).unwrap();
            let b = solve_outlier_clustering(&to_float(&exact), obj).unwrap();
            assert!(a.same_partition(&b), "seed {seed} {obj}");
            assert!(a.same_partition(&planted), "seed {seed} {obj}");
        }
    }
}

#[test]
fn symmetric_formulation_refuses_asymmetric_input() {
    let cfg = GeneratorConfig::new(8, 2, 0, GeneratorMode::Asymmetric, 3);
    let (inst, _) = generate::<Rational>(&cfg).unwrap();
    assert_eq!(
        certify(&inst, Formulation::Kc).unwrap_err(),
        Error::AsymmetricUnsupported
    );
}

#[test]
fn non_resilient_mode_has_tied_optima() {
    let cfg = GeneratorConfig::new(8, 3, 0, GeneratorMode::NonResilient, 0);
    let (inst, _) = generate::<Rational>(&cfg).unwrap();
    let oracle = resilient_cluster::oracle::brute_force(&inst, Objective::KCenter).unwrap();
    assert!(!oracle.unique);
}
