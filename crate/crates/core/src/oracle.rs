//! Exhaustive search over center sets and outlier sets.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::{Clustering, Instance, Objective};
use crate::scalar::Scalar;

/// Default limit on the number of (centers, outliers) candidates.
pub const DEFAULT_WORK_CAP: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult<S> {
    /// Lexicographically first optimal solution.
    pub best: Clustering,
    pub cost: S,
    /// No other partition or outlier set reaches the optimum.
    pub unique: bool,
    /// An optimal solution inducing a different partition, when one exists.
    pub runner_up: Option<Clustering>,
}

/// Number of candidates `C(n, k) * sum_{t <= z} C(n - k, t)`.
pub fn candidate_count(n: usize, k: usize, z: usize) -> u128 {
    let outlier_sets: u128 = (0..=z.min(n - k)).map(|t| binomial(n - k, t)).sum();
    binomial(n, k).saturating_mul(outlier_sets)
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Exact optimum under `obj`, with the default work cap.
pub fn brute_force<S: Scalar>(inst: &Instance<S>, obj: Objective) -> Result<OracleResult<S>> {
    brute_force_with_cap(inst, obj, DEFAULT_WORK_CAP)
}

pub fn brute_force_with_cap<S: Scalar>(
    inst: &Instance<S>,
    obj: Objective,
    cap: u128,
) -> Result<OracleResult<S>> {
    let (n, k, z) = (inst.n(), inst.k(), inst.z());
    let work = candidate_count(n, k, z);
    if work > cap {
        return Err(Error::InstanceTooLarge { work, cap });
    }
    let terms: Vec<S> = (0..n * n).map(|i| obj.term(inst.d(i / n, i % n))).collect();
    let center_sets: Vec<Vec<usize>> = Combinations::new(n, k).collect();
    let local: Vec<Local<S>> = center_sets
        .par_iter()
        .map(|centers| scan_centers(n, z, obj, &terms, centers))
        .collect();
    let merged = local
        .into_iter()
        .reduce(merge)
        .expect("at least one center set");
    let unique = merged.alt.is_none();
    Ok(OracleResult {
        best: merged.best,
        cost: merged.cost,
        unique,
        runner_up: merged.alt,
    })
}

/// True when some `k - 1` centers reach k-center cost at most
/// `result.cost`, which rules out a unique optimum. Always false for `k = 1`.
pub fn brute_force_kminus1_check<S: Scalar>(
    inst: &Instance<S>,
    result: &OracleResult<S>,
) -> Result<bool> {
    if inst.k() == 1 {
        return Ok(false);
    }
    let smaller = inst.with_params(inst.k() - 1, inst.z())?;
    let best = brute_force(&smaller, Objective::KCenter)?;
    Ok(best.cost.approx_le(&result.cost))
}

struct Local<S> {
    cost: S,
    best: Clustering,
    key: Vec<Option<usize>>,
    alt: Option<Clustering>,
}

fn merge<S: Scalar>(a: Local<S>, b: Local<S>) -> Local<S> {
    if b.cost.definitely_lt(&a.cost) {
        return b;
    }
    if a.cost.definitely_lt(&b.cost) {
        return a;
    }
    let alt = a.alt.or(if b.key != a.key { Some(b.best) } else { b.alt });
    Local { alt, ..a }
}

/// Best outlier choice for a fixed center set, plus an equally good
/// alternative partition if one is found.
fn scan_centers<S: Scalar>(
    n: usize,
    z: usize,
    obj: Objective,
    terms: &[S],
    centers: &[usize],
) -> Local<S> {
    let mut is_center = vec![false; n];
    for &c in centers {
        is_center[c] = true;
    }
    // Nearest center per point, and a second center tied with it.
    let mut nearest = vec![0usize; n];
    let mut tied: Vec<Option<usize>> = vec![None; n];
    let mut near_term: Vec<S> = vec![S::zero(); n];
    for u in 0..n {
        if is_center[u] {
            nearest[u] = centers.iter().position(|&c| c == u).expect("center");
            continue;
        }
        let mut best = 0;
        for i in 1..centers.len() {
            let t = &terms[centers[i] * n + u];
            let b = &terms[centers[best] * n + u];
            if t.definitely_lt(b) {
                best = i;
                tied[u] = None;
            } else if t.approx_eq(b) && tied[u].is_none() {
                tied[u] = Some(i);
            }
        }
        nearest[u] = best;
        near_term[u] = terms[centers[best] * n + u].clone();
    }
    let others: Vec<usize> = (0..n).filter(|&u| !is_center[u]).collect();

    let mut best: Option<(S, Vec<usize>)> = None;
    let mut best_alt: Option<Vec<usize>> = None;
    for size in 0..=z.min(others.len()) {
        for pick in Combinations::new(others.len(), size) {
            let outliers: Vec<usize> = pick.iter().map(|&i| others[i]).collect();
            let mut out = vec![false; n];
            for &o in &outliers {
                out[o] = true;
            }
            let value = others
                .iter()
                .filter(|&&u| !out[u])
                .fold(S::zero(), |acc, &u| obj.combine(acc, near_term[u].clone()));
            match &best {
                Some((b, _)) if !value.definitely_lt(b) => {
                    if value.approx_eq(b) && best_alt.is_none() {
                        best_alt = Some(outliers);
                    }
                }
                _ => {
                    best = Some((value, outliers));
                    best_alt = None;
                }
            }
        }
    }
    let (cost, outliers) = best.expect("the empty outlier set is always a candidate");
    let build = |outliers: &[usize], moved: Option<usize>| {
        let mut assignment: Vec<Option<usize>> = nearest.iter().map(|&i| Some(i)).collect();
        for &o in outliers {
            assignment[o] = None;
        }
        if let Some(u) = moved {
            assignment[u] = tied[u];
        }
        Clustering::new(assignment, centers.to_vec()).expect("centers assigned to themselves")
    };
    let best = build(&outliers, None);
    let alt = best_alt.map(|o| build(&o, None)).or_else(|| {
        // A Voronoi tie on a kept point is another optimal partition.
        let mut out = vec![false; n];
        for &o in &outliers {
            out[o] = true;
        }
        (0..n)
            .find(|&u| !out[u] && tied[u].is_some())
            .map(|u| build(&outliers, Some(u)))
    });
    let key = best.partition_key();
    Local {
        cost,
        best,
        key,
        alt,
    }
}

/// Lexicographic `k`-subsets of `0..n`.
pub(crate) struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            current: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}
