//! Covering relaxations over threshold graphs and the certifier built on them.
//!
//! Three formulations share the variables `y_u` (open `u`) and `x_uv`
//! (`u` serves `v`), with `x_uv` defined only when `d(u, v) <= R`:
//!
//! | formulation | constraints |
//! |-------------|-------------|
//! | `Kc`, `AsymKc` | `sum y <= k`, `x_uv <= y_u`, `sum_u x_uv >= 1` for every `v` |
//! | `Kco` | `sum y <= k`, `x_uv <= y_u`, `sum_u x_uv <= 1`, `sum_uv x_uv >= n - z` |
//!
//! The smallest feasible radius `R*` lower-bounds the optimal radius. If an
//! integral solution exists at `R*` it is optimal; otherwise the instance is
//! not 2-perturbation resilient.

mod graph;
pub mod simplex;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use graph::{build_threshold_graph, ThresholdGraph};
pub use simplex::{FarkasCertificate, Feasibility};

use crate::error::{Error, Result};
use crate::instance::{distance_to_set, voronoi, Clustering, Instance};
use crate::oracle::{binomial, Combinations};
use crate::scalar::Scalar;
use simplex::{find_feasible, Constraint, LinearSystem, Sense};

/// Float values within this distance of 0 or 1 count as integral.
pub const INTEGRALITY_TOLERANCE: f64 = 1e-7;

/// Limit on the center subsets tried when recovering an integral solution,
/// first within the fractional support and then among all points.
const SEARCH_CAP: u128 = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formulation {
    #[serde(rename = "kc")]
    Kc,
    #[serde(rename = "asym-kc")]
    AsymKc,
    #[serde(rename = "kco")]
    Kco,
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formulation::Kc => "kc",
            Formulation::AsymKc => "asym-kc",
            Formulation::Kco => "kco",
        })
    }
}

impl FromStr for Formulation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "kc" => Ok(Formulation::Kc),
            "asym-kc" | "asymkc" | "asym_kc" => Ok(Formulation::AsymKc),
            "kco" => Ok(Formulation::Kco),
            _ => Err(format!(
                "unknown formulation '{s}' (expected kc, asym-kc or kco)"
            )),
        }
    }
}

/// Result of one feasibility probe.
#[derive(Clone, Debug, PartialEq)]
pub struct LpOutcome<S> {
    pub feasible: bool,
    /// Dense `x[u][v]`, zero off the threshold graph. Present iff feasible.
    pub x: Option<Vec<Vec<S>>>,
    pub y: Option<Vec<S>>,
    pub integral: bool,
    pub radius: S,
    pub formulation: Formulation,
    /// Farkas multipliers proving infeasibility, one per constraint row.
    pub certificate: Option<FarkasCertificate<S>>,
}

impl<S: Scalar> LpOutcome<S> {
    /// Points with `y_u > 0`.
    pub fn support(&self) -> Vec<usize> {
        self.y
            .as_ref()
            .map(|y| {
                (0..y.len())
                    .filter(|&u| !y[u].approx_le(&S::zero()))
                    .collect()
            })
            .unwrap_or_default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictKind {
    Optimal,
    #[serde(rename = "NOT_2PR")]
    Not2pr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifierVerdict<S> {
    pub kind: VerdictKind,
    /// Optimal clustering, present iff `kind` is `Optimal`.
    pub clustering: Option<Clustering>,
    pub lp_radius: S,
    /// The non-recoverable outcome at `lp_radius`, present iff `Not2pr`.
    pub fractional_witness: Option<LpOutcome<S>>,
    /// Infeasibility proof at the next smaller candidate radius.
    pub lower_certificate: Option<FarkasCertificate<S>>,
}

fn is_integral<S: Scalar>(v: &S) -> bool {
    if S::EXACT {
        v.near_zero() || *v == S::one()
    } else {
        let f = v.to_f64();
        f.abs() <= INTEGRALITY_TOLERANCE || (f - 1.0).abs() <= INTEGRALITY_TOLERANCE
    }
}

/// The constraint system of a formulation at radius `R`, together with the
/// `(u, v)` pair behind every `x` variable. Variables `0..n` are `y`.
pub(crate) fn build_system<S: Scalar>(
    graph: &ThresholdGraph<S>,
    formulation: Formulation,
    k: usize,
    z: usize,
) -> (LinearSystem<S>, Vec<(usize, usize)>) {
    let n = graph.n();
    let mut pairs = Vec::new();
    for v in 0..n {
        for &u in &graph.in_nbr[v] {
            pairs.push((u, v));
        }
    }
    let one = S::one;
    let mut rows = Vec::with_capacity(pairs.len() + n + 2);
    rows.push(Constraint {
        coeffs: (0..n).map(|u| (u, one())).collect(),
        sense: Sense::Le,
        rhs: S::from_i64(k as i64),
    });
    for (i, &(u, _)) in pairs.iter().enumerate() {
        rows.push(Constraint {
            coeffs: vec![(n + i, one()), (u, -one())],
            sense: Sense::Le,
            rhs: S::zero(),
        });
    }
    let mut by_point: Vec<Vec<(usize, S)>> = vec![Vec::new(); n];
    for (i, &(_, v)) in pairs.iter().enumerate() {
        by_point[v].push((n + i, one()));
    }
    match formulation {
        Formulation::Kc | Formulation::AsymKc => {
            for coeffs in by_point {
                rows.push(Constraint {
                    coeffs,
                    sense: Sense::Ge,
                    rhs: one(),
                });
            }
        }
        Formulation::Kco => {
            for coeffs in by_point {
                rows.push(Constraint {
                    coeffs,
                    sense: Sense::Le,
                    rhs: one(),
                });
            }
            rows.push(Constraint {
                coeffs: (0..pairs.len()).map(|i| (n + i, one())).collect(),
                sense: Sense::Ge,
                rhs: S::from_i64(n as i64 - z as i64),
            });
        }
    }
    (
        LinearSystem {
            num_vars: n + pairs.len(),
            constraints: rows,
        },
        pairs,
    )
}

/// Solves the relaxation at radius `R` with the instance's `k` and `z`
/// (`z` is ignored by `Kc` and `AsymKc`).
pub fn solve_lp<S: Scalar>(
    inst: &Instance<S>,
    radius: &S,
    formulation: Formulation,
) -> Result<LpOutcome<S>> {
    solve_lp_with(inst, radius, formulation, inst.k(), inst.z())
}

/// [`solve_lp`] with explicit `k` and `z`, which need not satisfy the
/// instance bounds.
pub fn solve_lp_with<S: Scalar>(
    inst: &Instance<S>,
    radius: &S,
    formulation: Formulation,
    k: usize,
    z: usize,
) -> Result<LpOutcome<S>> {
    if formulation == Formulation::Kc && !inst.is_symmetric() {
        return Err(Error::AsymmetricUnsupported);
    }
    let z = if formulation == Formulation::Kco {
        z.min(inst.n())
    } else {
        0
    };
    let graph = build_threshold_graph(inst, radius);
    let (system, pairs) = build_system(&graph, formulation, k, z);
    let n = inst.n();
    Ok(match find_feasible(&system)? {
        Feasibility::Feasible(sol) => {
            let y = sol[..n].to_vec();
            let mut x = vec![vec![S::zero(); n]; n];
            for (i, &(u, v)) in pairs.iter().enumerate() {
                x[u][v] = sol[n + i].clone();
            }
            let integral = sol.iter().all(is_integral);
            LpOutcome {
                feasible: true,
                x: Some(x),
                y: Some(y),
                integral,
                radius: radius.clone(),
                formulation,
                certificate: None,
            }
        }
        Feasibility::Infeasible(cert) => LpOutcome {
            feasible: false,
            x: None,
            y: None,
            integral: false,
            radius: radius.clone(),
            formulation,
            certificate: Some(cert),
        },
    })
}

struct RadiusSearch<S> {
    outcome: LpOutcome<S>,
    below: Option<LpOutcome<S>>,
}

fn search_radius<S: Scalar>(
    inst: &Instance<S>,
    formulation: Formulation,
) -> Result<RadiusSearch<S>> {
    let candidates = inst.distinct_distances();
    let mut hi = candidates.len() - 1;
    let top = solve_lp(inst, &candidates[hi], formulation)?;
    if !top.feasible {
        return Err(Error::Infeasible {
            k: inst.k(),
            z: inst.z(),
        });
    }
    let mut best = top;
    let mut below: Option<(usize, LpOutcome<S>)> = None;
    let mut lo = 0usize;
    // Invariant: candidates[hi] is feasible, everything below lo is not.
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let probe = solve_lp(inst, &candidates[mid], formulation)?;
        if probe.feasible {
            hi = mid;
            best = probe;
        } else {
            lo = mid + 1;
            below = Some((mid, probe));
        }
    }
    let below = match below {
        Some((i, probe)) if i + 1 == hi => Some(probe),
        _ if hi > 0 => Some(solve_lp(inst, &candidates[hi - 1], formulation)?),
        _ => None,
    };
    Ok(RadiusSearch {
        outcome: best,
        below,
    })
}

/// Smallest candidate radius (a distinct matrix entry) at which the
/// relaxation is feasible, with the outcome there.
pub fn min_feasible_radius<S: Scalar>(
    inst: &Instance<S>,
    formulation: Formulation,
) -> Result<(S, LpOutcome<S>)> {
    let search = search_radius(inst, formulation)?;
    Ok((search.outcome.radius.clone(), search.outcome))
}

/// Finds `R*` and either an integral solution there, which is optimal, or
/// reports that the instance is not 2-perturbation resilient.
pub fn certify<S: Scalar>(
    inst: &Instance<S>,
    formulation: Formulation,
) -> Result<CertifierVerdict<S>> {
    let search = search_radius(inst, formulation)?;
    let lower_certificate = search.below.and_then(|b| b.certificate);
    let lp_radius = search.outcome.radius.clone();
    Ok(match extract_integral(inst, &search.outcome) {
        Some(clustering) => CertifierVerdict {
            kind: VerdictKind::Optimal,
            clustering: Some(clustering),
            lp_radius,
            fractional_witness: None,
            lower_certificate,
        },
        None => CertifierVerdict {
            kind: VerdictKind::Not2pr,
            clustering: None,
            lp_radius,
            fractional_witness: Some(search.outcome),
            lower_certificate,
        },
    })
}

/// Recovers a clustering of k-center cost at most `outcome.radius`:
/// rounding an integral `y`, then one center per component of the threshold
/// graph, then center subsets of the fractional support, then (when there
/// are few enough) all center subsets. On small instances a `None` therefore
/// means no integral solution exists at this radius.
pub fn extract_integral<S: Scalar>(
    inst: &Instance<S>,
    outcome: &LpOutcome<S>,
) -> Option<Clustering> {
    if !outcome.feasible {
        return None;
    }
    let radius = &outcome.radius;
    let form = outcome.formulation;
    let k = inst.k();
    if outcome.integral {
        let y = outcome.y.as_ref()?;
        let open: Vec<usize> = (0..inst.n()).filter(|&u| !is_zero_like(&y[u])).collect();
        if let Some(c) = covering_clustering(inst, &open, radius, form) {
            return Some(c);
        }
    }
    if let Some(c) = component_centers(inst, radius, form)
        .and_then(|centers| covering_clustering(inst, &centers, radius, form))
    {
        return Some(c);
    }
    let support = outcome.support();
    let size = k.min(support.len());
    if size > 0 && binomial(support.len(), size) <= SEARCH_CAP {
        let found = Combinations::new(support.len(), size).find_map(|pick| {
            let centers: Vec<usize> = pick.iter().map(|&i| support[i]).collect();
            covering_clustering(inst, &centers, radius, form)
        });
        if found.is_some() {
            return found;
        }
    }
    if binomial(inst.n(), k) <= SEARCH_CAP {
        return Combinations::new(inst.n(), k)
            .find_map(|centers| covering_clustering(inst, &centers, radius, form));
    }
    None
}

fn is_zero_like<S: Scalar>(v: &S) -> bool {
    if S::EXACT {
        v.near_zero()
    } else {
        v.to_f64().abs() <= INTEGRALITY_TOLERANCE
    }
}

/// One center per weakly connected component of `G_R`, choosing in each
/// component the point reaching the most members. For `Kco` only the `k`
/// components with the largest reach are kept.
fn component_centers<S: Scalar>(
    inst: &Instance<S>,
    radius: &S,
    form: Formulation,
) -> Option<Vec<usize>> {
    let graph = build_threshold_graph(inst, radius);
    let comps = graph.components();
    let mut picks: Vec<(usize, usize)> = comps
        .iter()
        .map(|members| {
            members
                .iter()
                .map(|&c| {
                    (
                        members
                            .iter()
                            .filter(|&&v| inst.d(c, v).approx_le(radius))
                            .count(),
                        c,
                    )
                })
                .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
                .expect("components are non-empty")
        })
        .collect();
    if form == Formulation::Kco {
        picks.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        picks.truncate(inst.k());
    } else if picks.len() > inst.k() {
        return None;
    }
    let mut centers: Vec<usize> = picks.into_iter().map(|(_, c)| c).collect();
    centers.sort_unstable();
    Some(centers)
}

/// The Voronoi clustering of `centers`, padded to `k` centers, if every point
/// (all but `z` for `Kco`) lies within `radius` of some center.
fn covering_clustering<S: Scalar>(
    inst: &Instance<S>,
    centers: &[usize],
    radius: &S,
    form: Formulation,
) -> Option<Clustering> {
    let n = inst.n();
    if centers.is_empty() || centers.len() > inst.k() {
        return None;
    }
    let uncovered: Vec<usize> = (0..n)
        .filter(|&v| !distance_to_set(inst, centers, v).approx_le(radius))
        .collect();
    let budget = if form == Formulation::Kco {
        inst.z()
    } else {
        0
    };
    if uncovered.len() > budget {
        return None;
    }
    let mut centers = centers.to_vec();
    while centers.len() < inst.k() {
        let next = (0..n)
            .filter(|&u| !centers.contains(&u) && !uncovered.contains(&u))
            .max_by(|&a, &b| {
                distance_to_set(inst, &centers, a)
                    .total_cmp(&distance_to_set(inst, &centers, b))
                    .then(b.cmp(&a))
            })?;
        centers.push(next);
    }
    centers.sort_unstable();
    voronoi(inst, &centers, &uncovered).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{cost, Objective};
    use crate::scalar::Rational;

    fn pair(k: usize) -> Instance<Rational> {
        Instance::from_fn(2, true, k, 0, |u, v| Rational::from_i64((u != v) as i64)).unwrap()
    }

    fn line() -> Instance<Rational> {
        let xs = [0i64, 1, 10, 11];
        Instance::from_fn(4, true, 2, 0, |u, v| {
            Rational::from_i64((xs[u] - xs[v]).abs())
        })
        .unwrap()
    }

    #[test]
    fn two_points_one_center() {
        let out = solve_lp(&pair(1), &Rational::from_i64(1), Formulation::Kc).unwrap();
        assert!(out.feasible && out.integral);
        let y = out.y.unwrap();
        assert_eq!(y.iter().filter(|v| **v == Rational::from_i64(1)).count(), 1);
    }

    #[test]
    fn two_points_half_radius_is_infeasible() {
        let inst = pair(1);
        let out = solve_lp(&inst, &Rational::new(1.into(), 2.into()), Formulation::Kc).unwrap();
        assert!(!out.feasible);
        let graph = build_threshold_graph(&inst, &out.radius);
        let (system, _) = build_system(&graph, Formulation::Kc, 1, 0);
        assert!(out.certificate.unwrap().verify(&system));
    }

    #[test]
    fn kco_with_everything_outlier() {
        let inst = pair(1);
        let out = solve_lp_with(&inst, &Rational::from_i64(0), Formulation::Kco, 1, 2).unwrap();
        assert!(out.feasible);
        assert!(out
            .x
            .unwrap()
            .iter()
            .flatten()
            .all(|v| *v == Rational::from_i64(0)));
    }

    #[test]
    fn all_points_open_gives_zero_radius() {
        let (r, out) = min_feasible_radius(&pair(2), Formulation::Kc).unwrap();
        assert_eq!(r, Rational::from_i64(0));
        assert!(out.integral);
    }

    #[test]
    fn line_certifies_at_unit_radius() {
        let inst = line();
        let (r, _) = min_feasible_radius(&inst, Formulation::Kc).unwrap();
        assert_eq!(r, Rational::from_i64(1));
        let verdict = certify(&inst, Formulation::Kc).unwrap();
        assert_eq!(verdict.kind, VerdictKind::Optimal);
        let clus = verdict.clustering.unwrap();
        assert_eq!(
            clus.partition_key(),
            vec![Some(0), Some(0), Some(1), Some(1)]
        );
        assert_eq!(
            cost(&inst, &clus, Objective::KCenter).unwrap(),
            Rational::from_i64(1)
        );
        assert!(verdict.lower_certificate.is_some());
    }

    #[test]
    fn single_center_radius() {
        let xs = [0i64, 3, 4, 9];
        let inst = Instance::from_fn(4, true, 1, 0, |u, v| {
            Rational::from_i64((xs[u] - xs[v]).abs())
        })
        .unwrap();
        let verdict = certify(&inst, Formulation::Kc).unwrap();
        assert_eq!(verdict.kind, VerdictKind::Optimal);
        assert_eq!(verdict.lp_radius, Rational::from_i64(5));
    }

    #[test]
    fn components_recover_line() {
        let inst = line();
        let out = solve_lp(&inst, &Rational::from_i64(1), Formulation::Kc).unwrap();
        let fake = LpOutcome {
            integral: false,
            ..out
        };
        let clus = extract_integral(&inst, &fake).unwrap();
        assert_eq!(clus.clusters(), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn kc_rejects_asymmetric_input() {
        let d = [[0, 1], [3, 0]];
        let inst = Instance::from_fn(2, false, 1, 0, |u, v| d[u][v] as f64).unwrap();
        assert_eq!(
            solve_lp(&inst, &1.0, Formulation::Kc),
            Err(Error::AsymmetricUnsupported)
        );
        assert!(solve_lp(&inst, &1.0, Formulation::AsymKc).unwrap().feasible);
    }

    #[test]
    fn formulation_names_round_trip() {
        for f in [Formulation::Kc, Formulation::AsymKc, Formulation::Kco] {
            assert_eq!(f.to_string().parse::<Formulation>().unwrap(), f);
        }
    }
}
