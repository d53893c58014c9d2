//! Structured 2-perturbations and a falsifier built on them.
//!
//! A [`PerturbationSpec`] shortens a set of special edges to
//! `min(d(u, v), cap)` and takes shortest paths over the result. When every
//! special edge keeps at least half its length, the new metric `d'`
//! satisfies `d / 2 <= d' <= d`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{cost, Clustering, Instance, Objective};
use crate::oracle::{brute_force, OracleResult};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationMode {
    Directed,
    Undirected,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationSpec<S> {
    /// Special edges; read as unordered pairs in undirected mode.
    pub edges: Vec<(usize, usize)>,
    pub cap: S,
    pub mode: PerturbationMode,
}

impl<S: Scalar> PerturbationSpec<S> {
    /// The identity perturbation for an instance.
    pub fn identity<T: Scalar>(inst: &Instance<T>) -> Self {
        Self {
            edges: Vec::new(),
            cap: S::zero(),
            mode: mode_for(inst),
        }
    }

    /// Whether every special edge keeps at least half its length.
    pub fn is_valid_for(&self, inst: &Instance<S>) -> bool {
        self.edges
            .iter()
            .all(|&(u, v)| u < inst.n() && v < inst.n() && edge_ok(inst.d(u, v), &self.cap))
    }
}

fn mode_for<T: Scalar>(inst: &Instance<T>) -> PerturbationMode {
    if inst.is_symmetric() {
        PerturbationMode::Undirected
    } else {
        PerturbationMode::Directed
    }
}

fn edge_ok<S: Scalar>(d: &S, cap: &S) -> bool {
    let two = S::from_i64(2);
    let shortened = d.clone().min_of(cap.clone());
    d.approx_le(&(two * shortened))
}

/// Shortest-path metric over `d` with the special edges capped.
pub fn apply_perturbation<S: Scalar>(
    inst: &Instance<S>,
    spec: &PerturbationSpec<S>,
) -> Result<Instance<S>> {
    if spec.mode != mode_for(inst) {
        return Err(Error::InvalidPerturbation(format!(
            "{:?} perturbation on a {} instance",
            spec.mode,
            if inst.is_symmetric() {
                "symmetric"
            } else {
                "asymmetric"
            }
        )));
    }
    let n = inst.n();
    let mut d = inst.matrix();
    for &(u, v) in &spec.edges {
        if u >= n || v >= n {
            return Err(Error::InvalidPerturbation(format!(
                "edge ({u}, {v}) out of range"
            )));
        }
        if !edge_ok(inst.d(u, v), &spec.cap) {
            return Err(Error::InvalidPerturbation(format!(
                "cap {} is below half of d({u}, {v}) = {}",
                spec.cap,
                inst.d(u, v)
            )));
        }
        let capped = inst.d(u, v).clone().min_of(spec.cap.clone());
        d[u][v] = capped.clone();
        if spec.mode == PerturbationMode::Undirected {
            d[v][u] = capped;
        }
    }
    for w in 0..n {
        for u in 0..n {
            if u == w {
                continue;
            }
            let duw = d[u][w].clone();
            for v in 0..n {
                let via = duw.clone() + d[w][v].clone();
                if via < d[u][v] {
                    d[u][v] = via;
                }
            }
        }
    }
    inst.with_distances(d, inst.is_symmetric())
}

/// Whether `clus` keeps its k-center cost under `pert` and is still optimal
/// there. Intended for small instances; runs the brute-force oracle.
pub fn radius_preserving_check<S: Scalar>(
    inst: &Instance<S>,
    pert: &Instance<S>,
    clus: &Clustering,
) -> bool {
    let (Ok(before), Ok(after)) = (
        cost(inst, clus, Objective::KCenter),
        cost(pert, clus, Objective::KCenter),
    ) else {
        return false;
    };
    if !before.approx_eq(&after) {
        return false;
    }
    match brute_force(pert, Objective::KCenter) {
        Ok(res) => res.cost.approx_eq(&after),
        Err(_) => false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FalsifierVerdict {
    /// No searched perturbation changed the optimum. This is not a proof
    /// of resilience.
    ResilientUnrefuted,
    NotResilient,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FalsifierReport<S> {
    pub verdict: FalsifierVerdict,
    /// The perturbation and an optimal clustering of the perturbed instance
    /// that differs from the original optimum.
    pub witness: Option<(PerturbationSpec<S>, Clustering)>,
    /// Number of perturbations solved.
    pub tried: usize,
}

/// Searches perturbations shaped like the ones in the separation arguments
/// for one that changes the optimum:
///
/// * all edges from a point `q` into an optimal cluster it does not belong to,
/// * edges from a point to its `2 * cap` ball (and to the outliers in it),
/// * single edges from a center to a point outside its cluster.
///
/// An optimum that is not unique to begin with is reported immediately,
/// with the identity perturbation.
pub fn falsify_resilience<S: Scalar>(
    inst: &Instance<S>,
    obj: Objective,
    budget: usize,
) -> Result<FalsifierReport<S>> {
    let original = brute_force(inst, obj)?;
    if !original.unique {
        return Ok(FalsifierReport {
            verdict: FalsifierVerdict::NotResilient,
            witness: Some((
                PerturbationSpec::identity(inst),
                original.runner_up.clone().expect("tie"),
            )),
            tried: 0,
        });
    }
    let mut specs = candidate_specs(inst, &original, obj);
    specs.truncate(budget);
    let tried = specs.len();
    let found = specs
        .into_par_iter()
        .map(
            |spec| -> Result<Option<(PerturbationSpec<S>, Clustering)>> {
                let pert = apply_perturbation(inst, &spec)?;
                let res = brute_force(&pert, obj)?;
                Ok(changed_optimum(&original.best, res).map(|c| (spec, c)))
            },
        )
        .find_map_first(|r| match r {
            Ok(Some(w)) => Some(Ok(w)),
            Ok(None) => None,
            Err(e) => Some(Err(e)),
        })
        .transpose()?;
    Ok(match found {
        Some(w) => FalsifierReport {
            verdict: FalsifierVerdict::NotResilient,
            witness: Some(w),
            tried,
        },
        None => FalsifierReport {
            verdict: FalsifierVerdict::ResilientUnrefuted,
            witness: None,
            tried,
        },
    })
}

/// A clustering of the perturbed instance that is optimal there and differs
/// from `original`, if the perturbed optimum moved or became ambiguous.
fn changed_optimum<S: Scalar>(original: &Clustering, res: OracleResult<S>) -> Option<Clustering> {
    if !res.best.same_partition(original) {
        Some(res.best)
    } else {
        res.runner_up
    }
}

fn candidate_specs<S: Scalar>(
    inst: &Instance<S>,
    original: &OracleResult<S>,
    obj: Objective,
) -> Vec<PerturbationSpec<S>> {
    let n = inst.n();
    let mode = mode_for(inst);
    let best = &original.best;
    let radius = kcenter_cost(inst, best);
    let clusters = best.clusters();
    let outliers = best.outliers();
    let mut specs = Vec::new();
    let mut push = |edges: Vec<(usize, usize)>, cap: S| {
        let spec = PerturbationSpec { edges, cap, mode };
        let effective = spec
            .edges
            .iter()
            .any(|&(u, v)| spec.cap.definitely_lt(inst.d(u, v)));
        if effective && spec.is_valid_for(inst) && !specs.contains(&spec) {
            specs.push(spec);
        }
    };
    let valid = |u: usize, v: usize, cap: &S| u != v && edge_ok(inst.d(u, v), cap);

    for (i, members) in clusters.iter().enumerate() {
        for q in 0..n {
            if best.cluster_of(q) == Some(i) {
                continue;
            }
            let edges: Vec<_> = members
                .iter()
                .map(|&v| (q, v))
                .filter(|&(u, v)| valid(u, v, &radius))
                .collect();
            push(edges, radius.clone());
        }
    }
    let two_r = S::from_i64(2) * radius.clone();
    for p in 0..n {
        let ball: Vec<_> = (0..n)
            .filter(|&v| inst.d(p, v).approx_le(&two_r))
            .map(|v| (p, v))
            .filter(|&(u, v)| valid(u, v, &radius))
            .collect();
        let to_outliers: Vec<_> = ball
            .iter()
            .copied()
            .filter(|&(_, v)| outliers.contains(&v))
            .collect();
        push(ball, radius.clone());
        push(to_outliers, radius.clone());
    }
    for (i, &c) in best.centers().iter().enumerate() {
        for q in 0..n {
            if best.cluster_of(q) == Some(i) {
                continue;
            }
            let mut caps = vec![radius.clone()];
            if !obj.is_max() {
                if let Some(own) = best.center_of(q) {
                    caps.push(inst.d(own, q).clone());
                }
                caps.push(inst.d(q, c).clone() / S::from_i64(2));
            }
            for cap in caps {
                if valid(c, q, &cap) {
                    push(vec![(c, q)], cap);
                }
            }
        }
    }
    specs
}

fn kcenter_cost<S: Scalar>(inst: &Instance<S>, clus: &Clustering) -> S {
    cost(inst, clus, Objective::KCenter).expect("clustering matches instance")
}
