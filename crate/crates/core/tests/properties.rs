use proptest::prelude::*;
use resilient_cluster::approx::{gonzalez, hochbaum_shmoys};
use resilient_cluster::generator::{generate, verify_planted};
use resilient_cluster::lp::{build_threshold_graph, certify, solve_lp};
use resilient_cluster::mstdp::{binarize, build_mst, solve_btp};
use resilient_cluster::oracle::brute_force;
use resilient_cluster::perturb::apply_perturbation;
use resilient_cluster::{
    cost, distance_to_set, validate_metric, voronoi, Clustering, Formulation, GeneratorConfig,
    GeneratorMode, Instance, Objective, PerturbationMode, PerturbationSpec, Rational, Scalar,
    VerdictKind,
};

/// Shortest-path closure of random integer weights in `1..=9`.
fn metric(n: usize, symmetric: bool, weights: &[i64], k: usize, z: usize) -> Instance<Rational> {
    let mut d = vec![vec![0i64; n]; n];
    for u in 0..n {
        for v in 0..n {
            if u != v {
                let (a, b) = if symmetric {
                    (u.min(v), u.max(v))
                } else {
                    (u, v)
                };
                d[u][v] = weights[a * n + b];
            }
        }
    }
    for m in 0..n {
        for u in 0..n {
            for v in 0..n {
                d[u][v] = d[u][v].min(d[u][m] + d[m][v]);
            }
        }
    }
    Instance::from_fn(n, symmetric, k, z, |u, v| Rational::from_i64(d[u][v])).unwrap()
}

prop_compose! {
    fn instance(max_n: usize, symmetric: bool)
        (n in 3..=max_n)
        (weights in prop::collection::vec(1i64..=9, n * n), k in 1..n, z in 0..n, n in Just(n))
        -> Instance<Rational>
    {
        let z = z.min(n - k);
        metric(n, symmetric, &weights, k, z)
    }
}

fn no_outliers(inst: Instance<Rational>) -> Instance<Rational> {
    let k = inst.k();
    inst.with_params(k, 0).unwrap()
}

fn two() -> Rational {
    Rational::from_i64(2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn voronoi_assigns_each_point_its_nearest_center(
        inst in instance(8, false),
        picks in prop::collection::btree_set(0usize..8, 1..4),
    ) {
        let centers: Vec<usize> = picks.into_iter().filter(|&c| c < inst.n()).collect();
        prop_assume!(!centers.is_empty());
        let clus = voronoi(&inst, &centers, &[]).unwrap();
        for u in 0..inst.n() {
            let c = clus.center_of(u).unwrap();
            prop_assert_eq!(inst.d(c, u), &distance_to_set(&inst, &centers, u));
        }
    }

    #[test]
    fn voronoi_beats_any_assignment_to_the_same_centers(
        inst in instance(7, true),
        choice in prop::collection::vec(0usize..3, 7),
    ) {
        let centers: Vec<usize> = (0..inst.k().min(3)).collect();
        let assignment = (0..inst.n())
            .map(|u| Some(centers.iter().position(|&c| c == u).unwrap_or(choice[u] % centers.len())))
            .collect();
        let other = Clustering::new(assignment, centers.clone()).unwrap();
        let best = voronoi(&inst, &centers, &[]).unwrap();
        for obj in [Objective::KCenter, Objective::KMedian, Objective::KMeans] {
            prop_assert!(cost(&inst, &best, obj).unwrap() <= cost(&inst, &other, obj).unwrap());
        }
    }

    #[test]
    fn adding_a_center_never_raises_the_radius(inst in instance(8, false), extra in 0usize..8) {
        let extra = extra % inst.n();
        let base: Vec<usize> = vec![0];
        let mut more = base.clone();
        if !more.contains(&extra) {
            more.push(extra);
        }
        let before = cost(&inst, &voronoi(&inst, &base, &[]).unwrap(), Objective::KCenter).unwrap();
        let after = cost(&inst, &voronoi(&inst, &more, &[]).unwrap(), Objective::KCenter).unwrap();
        prop_assert!(after <= before);
    }

    #[test]
    fn perturbation_is_a_metric_within_factor_two(
        inst in instance(7, true),
        directed in any::<bool>(),
        edges in prop::collection::vec((0usize..7, 0usize..7), 1..6),
        slack in 0i64..10,
    ) {
        let inst = if directed { metric_like_asymmetric(&inst) } else { inst };
        let n = inst.n();
        let edges: Vec<(usize, usize)> = edges.into_iter().filter(|&(u, v)| u < n && v < n && u != v).collect();
        let floor = edges.iter().map(|&(u, v)| inst.d(u, v).clone() / two()).fold(Rational::from_i64(0), Scalar::max_of);
        let mode = if inst.is_symmetric() { PerturbationMode::Undirected } else { PerturbationMode::Directed };
        let spec = PerturbationSpec { edges, cap: floor + Rational::from_i64(slack), mode };
        let pert = apply_perturbation(&inst, &spec).unwrap();
        prop_assert!(validate_metric(&pert).is_empty());
        for u in 0..n {
            for v in 0..n {
                prop_assert!(pert.d(u, v) <= inst.d(u, v));
                prop_assert!(inst.d(u, v) <= &(pert.d(u, v).clone() * two()));
            }
        }
    }

    #[test]
    fn perturbation_rejects_edges_shrunk_below_half(inst in instance(6, true)) {
        let (u, v) = (0, 1);
        let cap = inst.d(u, v).clone() / Rational::from_i64(3);
        let spec = PerturbationSpec { edges: vec![(u, v)], cap, mode: PerturbationMode::Undirected };
        prop_assert!(!spec.is_valid_for(&inst));
        prop_assert!(apply_perturbation(&inst, &spec).is_err());
    }

    #[test]
    fn threshold_graph_grows_with_radius(inst in instance(8, false), a in 0usize..40, b in 0usize..40) {
        let radii = inst.distinct_distances();
        let (lo, hi) = (a.min(b) % radii.len(), a.max(b) % radii.len());
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        let small = build_threshold_graph(&inst, &radii[lo]);
        let large = build_threshold_graph(&inst, &radii[hi]);
        prop_assert!(small.edge_count() <= large.edge_count());
        for v in 0..inst.n() {
            prop_assert!(small.in_nbr[v].contains(&v));
            prop_assert!(small.in_nbr[v].iter().all(|u| large.in_nbr[v].contains(u)));
        }
    }

    #[test]
    fn lp_feasibility_is_monotone_in_radius(inst in instance(6, true)) {
        let inst = no_outliers(inst);
        let feasible: Vec<bool> = inst
            .distinct_distances()
            .iter()
            .map(|r| solve_lp(&inst, r, Formulation::Kc).unwrap().feasible)
            .collect();
        prop_assert!(feasible.windows(2).all(|w| !w[0] || w[1]));
        prop_assert!(*feasible.last().unwrap());
    }

    #[test]
    fn certify_never_overclaims(inst in instance(7, true)) {
        let inst = no_outliers(inst);
        let verdict = certify(&inst, Formulation::Kc).unwrap();
        let oracle = brute_force(&inst, Objective::KCenter).unwrap();
        prop_assert!(verdict.lp_radius <= oracle.cost);
        match verdict.kind {
            VerdictKind::Optimal => {
                let clus = verdict.clustering.unwrap();
                prop_assert_eq!(cost(&inst, &clus, Objective::KCenter).unwrap(), oracle.cost);
            }
            VerdictKind::Not2pr => prop_assert!(verdict.lp_radius < oracle.cost),
        }
    }

    #[test]
    fn kco_certify_never_overclaims(inst in instance(7, true)) {
        prop_assume!(inst.z() > 0);
        let verdict = certify(&inst, Formulation::Kco).unwrap();
        let oracle = brute_force(&inst, Objective::KCenter).unwrap();
        prop_assert!(verdict.lp_radius <= oracle.cost);
        if let Some(clus) = verdict.clustering {
            prop_assert!(clus.outlier_count() <= inst.z());
            prop_assert_eq!(cost(&inst, &clus, Objective::KCenter).unwrap(), oracle.cost);
        }
    }

    #[test]
    fn dp_reports_the_cost_of_what_it_reconstructs(inst in instance(7, true), obj_ix in 0usize..3) {
        let obj = [Objective::KMedian, Objective::KMeans, Objective::KCenter][obj_ix];
        let tree = binarize(&build_mst(&inst).unwrap(), inst.n());
        let sol = solve_btp(&inst, &tree, obj).unwrap();
        prop_assert!(sol.clustering.k() <= inst.k());
        prop_assert!(sol.clustering.outlier_count() <= inst.z());
        prop_assert_eq!(cost(&inst, &sol.clustering, obj).unwrap(), sol.cost.clone());
        prop_assert!(brute_force(&inst, obj).unwrap().cost <= sol.cost);
    }

    #[test]
    fn oracle_cost_is_monotone_in_k_and_z(inst in instance(7, true), obj_ix in 0usize..3) {
        let obj = [Objective::KMedian, Objective::KMeans, Objective::KCenter][obj_ix];
        let (n, k, z) = (inst.n(), inst.k(), inst.z());
        let base = brute_force(&inst, obj).unwrap().cost;
        if k + z < n {
            let more_z = brute_force(&inst.with_params(k, z + 1).unwrap(), obj).unwrap().cost;
            let more_k = brute_force(&inst.with_params(k + 1, z).unwrap(), obj).unwrap().cost;
            prop_assert!(more_z <= base.clone());
            prop_assert!(more_k <= base);
        }
    }

    #[test]
    fn approximations_stay_within_twice_optimal(inst in instance(8, true)) {
        let inst = no_outliers(inst);
        let opt = brute_force(&inst, Objective::KCenter).unwrap().cost;
        let bound = opt * two();
        prop_assert!(gonzalez(&inst).unwrap().radius <= bound);
        prop_assert!(hochbaum_shmoys(&inst).unwrap().radius <= bound);
        prop_assert_eq!(gonzalez(&inst).unwrap().centers.len(), inst.k());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generator_is_deterministic_and_planted_lemmas_hold(
        seed in any::<u64>(),
        mode_ix in 0usize..3,
        k in 2usize..4,
        extra in 0usize..5,
        z in 1usize..4,
    ) {
        let mode = [GeneratorMode::Symmetric, GeneratorMode::Asymmetric, GeneratorMode::Outlier][mode_ix];
        let (n, z) = match mode {
            GeneratorMode::Outlier => (2 * k + z + extra, z),
            _ => (k + 2 + extra, 0),
        };
        let cfg = GeneratorConfig::new(n, k, z, mode, seed);
        let (a, planted) = generate::<Rational>(&cfg).unwrap();
        let (b, again) = generate::<Rational>(&cfg).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&planted, &again);
        prop_assert!(validate_metric(&a).is_empty());
        prop_assert_eq!(planted.outlier_count(), z);
        let violations = verify_planted(&a, &planted, Objective::KCenter);
        prop_assert!(violations.is_empty(), "{:?}", violations);
    }
}

/// Turns a symmetric metric into an asymmetric one by stretching distances
/// out of point 0, then re-closing.
fn metric_like_asymmetric(inst: &Instance<Rational>) -> Instance<Rational> {
    let n = inst.n();
    let mut d = inst.matrix();
    for v in 1..n {
        d[0][v] = d[0][v].clone() * two();
    }
    for m in 0..n {
        for u in 0..n {
            for v in 0..n {
                let via = d[u][m].clone() + d[m][v].clone();
                if via < d[u][v] {
                    d[u][v] = via;
                }
            }
        }
    }
    inst.with_distances(d, false).unwrap()
}
