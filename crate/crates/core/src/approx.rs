//! Classical 2-approximations for symmetric k-center without outliers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{distance_to_set, voronoi, Clustering, Instance};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ApproxAlgorithm {
    Gonzalez,
    HochbaumShmoys,
}

impl fmt::Display for ApproxAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ApproxAlgorithm::Gonzalez => "gonzalez",
            ApproxAlgorithm::HochbaumShmoys => "hs",
        })
    }
}

impl FromStr for ApproxAlgorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "gonzalez" => Ok(ApproxAlgorithm::Gonzalez),
            "hs" | "hochbaum-shmoys" | "hochbaum_shmoys" => Ok(ApproxAlgorithm::HochbaumShmoys),
            _ => Err(format!("unknown algorithm '{s}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxResult<S> {
    pub centers: Vec<usize>,
    pub radius: S,
    pub algorithm: ApproxAlgorithm,
}

fn check<S: Scalar>(inst: &Instance<S>) -> Result<()> {
    if !inst.is_symmetric() {
        return Err(Error::AsymmetricUnsupported);
    }
    if inst.z() > 0 {
        return Err(Error::OutliersUnsupported);
    }
    Ok(())
}

fn radius_of<S: Scalar>(inst: &Instance<S>, centers: &[usize]) -> S {
    (0..inst.n())
        .map(|u| distance_to_set(inst, centers, u))
        .fold(S::zero(), S::max_of)
}

/// Farthest-point traversal from point 0. Ties pick the lowest index.
pub fn gonzalez<S: Scalar>(inst: &Instance<S>) -> Result<ApproxResult<S>> {
    check(inst)?;
    let n = inst.n();
    let mut centers = vec![0];
    let mut near: Vec<S> = inst.row(0).to_vec();
    while centers.len() < inst.k() {
        let mut far = (0..n).find(|u| !centers.contains(u)).expect("k <= n");
        for u in 0..n {
            if !centers.contains(&u) && near[far].definitely_lt(&near[u]) {
                far = u;
            }
        }
        centers.push(far);
        for u in 0..n {
            if inst.d(far, u) < &near[u] {
                near[u] = inst.d(far, u).clone();
            }
        }
    }
    let radius = near.into_iter().fold(S::zero(), S::max_of);
    Ok(ApproxResult {
        centers,
        radius,
        algorithm: ApproxAlgorithm::Gonzalez,
    })
}

/// Greedy centers at guess `R`: repeatedly open the lowest uncovered point
/// and discard its `2R` ball.
fn greedy_at<S: Scalar>(inst: &Instance<S>, r: &S) -> Vec<usize> {
    let two_r = S::from_i64(2) * r.clone();
    let mut covered = vec![false; inst.n()];
    let mut centers = Vec::new();
    for u in 0..inst.n() {
        if covered[u] {
            continue;
        }
        centers.push(u);
        for v in 0..inst.n() {
            if inst.d(u, v).approx_le(&two_r) {
                covered[v] = true;
            }
        }
    }
    centers
}

/// Binary search over the distinct distances for the smallest guess at which
/// the greedy opens at most `k` centers; pads to `k` centers by farthest
/// point.
pub fn hochbaum_shmoys<S: Scalar>(inst: &Instance<S>) -> Result<ApproxResult<S>> {
    check(inst)?;
    let candidates = inst.distinct_distances();
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if greedy_at(inst, &candidates[mid]).len() <= inst.k() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let mut centers = greedy_at(inst, &candidates[hi]);
    while centers.len() < inst.k() {
        let far = (0..inst.n())
            .filter(|u| !centers.contains(u))
            .max_by(|&a, &b| {
                distance_to_set(inst, &centers, a)
                    .total_cmp(&distance_to_set(inst, &centers, b))
                    .then(b.cmp(&a))
            })
            .expect("k <= n");
        centers.push(far);
    }
    let radius = radius_of(inst, &centers);
    Ok(ApproxResult {
        centers,
        radius,
        algorithm: ApproxAlgorithm::HochbaumShmoys,
    })
}

/// Voronoi partition of the centers returned by `algorithm`.
pub fn recover_via_2approx<S: Scalar>(
    inst: &Instance<S>,
    algorithm: ApproxAlgorithm,
) -> Result<Clustering> {
    let res = match algorithm {
        ApproxAlgorithm::Gonzalez => gonzalez(inst)?,
        ApproxAlgorithm::HochbaumShmoys => hochbaum_shmoys(inst)?,
    };
    voronoi(inst, &res.centers, &[])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Instance<f64> {
        let xs = [0.0, 1.0, 10.0, 11.0];
        Instance::from_fn(4, true, 2, 0, |u, v| f64::abs(xs[u] - xs[v])).unwrap()
    }

    #[test]
    fn gonzalez_on_line_picks_endpoints() {
        let res = gonzalez(&line()).unwrap();
        assert_eq!(res.centers, vec![0, 3]);
        assert_eq!(res.radius, 1.0);
    }

    #[test]
    fn all_points_open_means_zero_radius() {
        let inst = line().with_params(4, 0).unwrap();
        assert_eq!(gonzalez(&inst).unwrap().radius, 0.0);
        assert_eq!(hochbaum_shmoys(&inst).unwrap().radius, 0.0);
        let clus = recover_via_2approx(&inst, ApproxAlgorithm::Gonzalez).unwrap();
        assert_eq!(clus.cluster_sizes(), vec![1; 4]);
    }

    #[test]
    fn uniform_metric_radius_one() {
        let inst = Instance::from_fn(5, true, 2, 0, |u, v| (u != v) as i64 as f64).unwrap();
        assert_eq!(gonzalez(&inst).unwrap().radius, 1.0);
    }

    #[test]
    fn hochbaum_shmoys_within_factor_two() {
        let res = hochbaum_shmoys(&line()).unwrap();
        assert!(res.radius <= 2.0);
        assert_eq!(res.centers.len(), 2);
    }

    #[test]
    fn rejects_asymmetric_and_outliers() {
        let d = [[0.0, 1.0], [3.0, 0.0]];
        let asym = Instance::from_fn(2, false, 1, 0, |u, v| d[u][v]).unwrap();
        assert_eq!(gonzalez(&asym), Err(Error::AsymmetricUnsupported));
        let out = line().with_params(2, 1).unwrap();
        assert_eq!(hochbaum_shmoys(&out), Err(Error::OutliersUnsupported));
    }
}
