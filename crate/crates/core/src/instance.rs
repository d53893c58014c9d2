//! Instances, clusterings, objectives and the operations every solver shares:
//! metric validation, cost evaluation and Voronoi assignment.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A clustering instance: `n` points identified by `0..n`, a dense distance
/// matrix, the number of clusters `k` and the outlier budget `z`.
///
/// Distances are read from row to column, so `d(u, v)` is the distance from
/// `u` to `v`. For asymmetric instances the clustering cost always uses the
/// center-to-point direction.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance<S> {
    n: usize,
    dist: Vec<S>,
    symmetric: bool,
    k: usize,
    z: usize,
}

impl<S: Scalar> Instance<S> {
    /// Builds an instance from a square matrix. Checks the shape and the
    /// parameter bounds `1 <= k`, `z < n`, `k + z <= n`; metric axioms are
    /// checked separately by [`validate_metric`].
    pub fn new(dist: Vec<Vec<S>>, symmetric: bool, k: usize, z: usize) -> Result<Self> {
        let n = dist.len();
        if let Some((row, r)) = dist.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::InvalidInstance(format!(
                "row {row} has {} entries, expected {n}",
                r.len()
            )));
        }
        Self::from_flat(n, dist.into_iter().flatten().collect(), symmetric, k, z)
    }

    /// Builds an instance by evaluating `f(u, v)` for every ordered pair.
    pub fn from_fn(
        n: usize,
        symmetric: bool,
        k: usize,
        z: usize,
        f: impl Fn(usize, usize) -> S,
    ) -> Result<Self> {
        let dist = (0..n * n).map(|i| f(i / n, i % n)).collect();
        Self::from_flat(n, dist, symmetric, k, z)
    }

    fn from_flat(n: usize, dist: Vec<S>, symmetric: bool, k: usize, z: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInstance("instance has no points".into()));
        }
        check_params(n, k, z)?;
        Ok(Self {
            n,
            dist,
            symmetric,
            k,
            z,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn z(&self) -> usize {
        self.z
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Distance from `u` to `v`.
    #[inline]
    pub fn d(&self, u: usize, v: usize) -> &S {
        &self.dist[u * self.n + v]
    }

    pub fn row(&self, u: usize) -> &[S] {
        &self.dist[u * self.n..(u + 1) * self.n]
    }

    pub fn matrix(&self) -> Vec<Vec<S>> {
        self.dist.chunks(self.n).map(<[S]>::to_vec).collect()
    }

    /// Same distances with different `k` and `z`.
    pub fn with_params(&self, k: usize, z: usize) -> Result<Self> {
        check_params(self.n, k, z)?;
        Ok(Self {
            k,
            z,
            ..self.clone()
        })
    }

    /// Same parameters with a replacement distance matrix of equal size.
    pub fn with_distances(&self, dist: Vec<Vec<S>>, symmetric: bool) -> Result<Self> {
        if dist.len() != self.n {
            return Err(Error::InvalidInstance(
                "distance matrix size changed".into(),
            ));
        }
        Self::new(dist, symmetric, self.k, self.z)
    }

    /// Converts every distance into another number type.
    pub fn convert<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Instance<T> {
        Instance {
            n: self.n,
            dist: self.dist.iter().map(f).collect(),
            symmetric: self.symmetric,
            k: self.k,
            z: self.z,
        }
    }

    /// Sorted distinct values of the matrix, `0` included. These are the
    /// only radii at which a threshold graph can change.
    pub fn distinct_distances(&self) -> Vec<S> {
        let mut values = self.dist.clone();
        values.push(S::zero());
        values.sort_by(Scalar::total_cmp);
        values.dedup_by(|a, b| a.approx_eq(b));
        values
    }

    /// Largest entry of the matrix.
    pub fn max_distance(&self) -> S {
        self.dist.iter().cloned().fold(S::zero(), S::max_of)
    }
}

fn check_params(n: usize, k: usize, z: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidInstance("k must be positive".into()));
    }
    if k > n {
        return Err(Error::InvalidInstance(format!("k = {k} exceeds n = {n}")));
    }
    if z >= n {
        return Err(Error::InvalidInstance(format!(
            "z = {z} must be below n = {n}"
        )));
    }
    if k + z > n {
        return Err(Error::InvalidInstance(format!(
            "k + z = {} exceeds n = {n}",
            k + z
        )));
    }
    Ok(())
}

/// A broken metric axiom.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Violation {
    /// `d(u, v)` is NaN or infinite.
    NonFinite(usize, usize),
    /// `d(u, u) != 0`.
    SelfDistance(usize),
    /// `d(u, v) <= 0` for distinct points.
    NonPositive(usize, usize),
    /// The instance is flagged symmetric but `d(u, v) != d(v, u)`.
    Symmetry(usize, usize),
    /// `(u, w, v)` with `d(u, v) > d(u, w) + d(w, v)`.
    Triangle(usize, usize, usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite(u, v) => write!(f, "d({u},{v}) is not finite"),
            Violation::SelfDistance(u) => write!(f, "d({u},{u}) is not zero"),
            Violation::NonPositive(u, v) => write!(f, "d({u},{v}) is not positive"),
            Violation::Symmetry(u, v) => write!(f, "d({u},{v}) != d({v},{u})"),
            Violation::Triangle(u, w, v) => write!(f, "d({u},{v}) > d({u},{w}) + d({w},{v})"),
        }
    }
}

/// Lists every violated metric axiom; empty iff the matrix is a valid
/// (possibly asymmetric) metric consistent with the symmetry flag. For
/// symmetric instances each unordered pair is reported once.
pub fn validate_metric<S: Scalar>(inst: &Instance<S>) -> Vec<Violation> {
    let n = inst.n();
    let mut out = Vec::new();
    for u in 0..n {
        for v in 0..n {
            let d = inst.d(u, v);
            if !d.is_finite() {
                out.push(Violation::NonFinite(u, v));
            } else if u == v && !d.near_zero() {
                out.push(Violation::SelfDistance(u));
            } else if u != v && !S::zero().definitely_lt(d) {
                out.push(Violation::NonPositive(u, v));
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    if inst.is_symmetric() {
        for u in 0..n {
            for v in u + 1..n {
                if !inst.d(u, v).approx_eq(inst.d(v, u)) {
                    out.push(Violation::Symmetry(u, v));
                }
            }
        }
    }
    for u in 0..n {
        for v in 0..n {
            if u == v || (inst.is_symmetric() && v < u) {
                continue;
            }
            for w in 0..n {
                if w == u || w == v {
                    continue;
                }
                let via = inst.d(u, w).clone() + inst.d(w, v).clone();
                if !inst.d(u, v).approx_le(&via) {
                    out.push(Violation::Triangle(u, w, v));
                }
            }
        }
    }
    out
}

/// A partition of the non-outlier points into `k` clusters with designated
/// centers. `assignment[u]` is the cluster index of `u`, or `None` when `u`
/// is an outlier; `centers[i]` lies in cluster `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawClustering", into = "RawClustering")]
pub struct Clustering {
    assignment: Vec<Option<usize>>,
    centers: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawClustering {
    assignment: Vec<Option<usize>>,
    centers: Vec<usize>,
}

impl TryFrom<RawClustering> for Clustering {
    type Error = Error;

    fn try_from(raw: RawClustering) -> Result<Self> {
        Clustering::new(raw.assignment, raw.centers)
    }
}

impl From<Clustering> for RawClustering {
    fn from(c: Clustering) -> Self {
        RawClustering {
            assignment: c.assignment,
            centers: c.centers,
        }
    }
}

impl Clustering {
    /// Checks that centers are distinct, each center sits in its own cluster
    /// and every assigned index refers to an existing cluster.
    pub fn new(assignment: Vec<Option<usize>>, centers: Vec<usize>) -> Result<Self> {
        let k = centers.len();
        if k == 0 {
            return Err(Error::EmptyCenters);
        }
        let mut seen = HashSet::new();
        for (i, &c) in centers.iter().enumerate() {
            if c >= assignment.len() {
                return Err(Error::ClusteringInvalid(format!("center {c} out of range")));
            }
            if !seen.insert(c) {
                return Err(Error::ClusteringInvalid(format!("center {c} repeated")));
            }
            if assignment[c] != Some(i) {
                return Err(Error::ClusteringInvalid(format!(
                    "center {c} is not assigned to its own cluster {i}"
                )));
            }
        }
        if let Some(u) = assignment
            .iter()
            .position(|a| matches!(a, Some(i) if *i >= k))
        {
            return Err(Error::ClusteringInvalid(format!(
                "point {u} references a missing center"
            )));
        }
        Ok(Self {
            assignment,
            centers,
        })
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &[usize] {
        &self.centers
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.assignment
    }

    pub fn cluster_of(&self, u: usize) -> Option<usize> {
        self.assignment[u]
    }

    pub fn center_of(&self, u: usize) -> Option<usize> {
        self.assignment[u].map(|i| self.centers[i])
    }

    pub fn is_outlier(&self, u: usize) -> bool {
        self.assignment[u].is_none()
    }

    pub fn outliers(&self) -> Vec<usize> {
        (0..self.n()).filter(|&u| self.is_outlier(u)).collect()
    }

    pub fn outlier_count(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_none()).count()
    }

    /// Members of each cluster in index order.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k()];
        for (u, a) in self.assignment.iter().enumerate() {
            if let Some(i) = a {
                out[*i].push(u);
            }
        }
        out
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.clusters().iter().map(Vec::len).collect()
    }

    /// Labels renumbered by first appearance. Two clusterings have the same
    /// key iff they induce the same partition and outlier set, whatever
    /// their centers or cluster order.
    pub fn partition_key(&self) -> Vec<Option<usize>> {
        canonical_labels(&self.assignment)
    }

    pub fn same_partition(&self, other: &Clustering) -> bool {
        self.n() == other.n() && self.partition_key() == other.partition_key()
    }

    /// Checks size and outlier budget against an instance.
    pub fn check_against<S: Scalar>(&self, inst: &Instance<S>) -> Result<()> {
        if self.n() != inst.n() {
            return Err(Error::ClusteringInvalid(format!(
                "clustering covers {} points, instance has {}",
                self.n(),
                inst.n()
            )));
        }
        if self.outlier_count() > inst.z() {
            return Err(Error::ClusteringInvalid(format!(
                "{} outliers exceed budget z = {}",
                self.outlier_count(),
                inst.z()
            )));
        }
        Ok(())
    }
}

/// Relabels cluster indices by order of first appearance.
pub(crate) fn canonical_labels(labels: &[Option<usize>]) -> Vec<Option<usize>> {
    let mut map: Vec<(usize, usize)> = Vec::new();
    labels
        .iter()
        .map(|l| {
            l.map(|c| match map.iter().find(|(from, _)| *from == c) {
                Some(&(_, to)) => to,
                None => {
                    map.push((c, map.len()));
                    map.len() - 1
                }
            })
        })
        .collect()
}

/// Clustering objective. `KMedian`, `KMeans` and `LpNorm(p)` sum the
/// per-point terms `d`, `d^2` and `d^p`; `KCenter` takes their maximum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Objective {
    KCenter,
    KMedian,
    KMeans,
    LpNorm(f64),
}

impl Objective {
    /// Contribution of a point at distance `d` from its center.
    pub fn term<S: Scalar>(&self, d: &S) -> S {
        match self {
            Objective::KCenter | Objective::KMedian => d.clone(),
            Objective::KMeans => d.clone() * d.clone(),
            Objective::LpNorm(p) if *p == 1.0 => d.clone(),
            Objective::LpNorm(p) => d.pow(*p),
        }
    }

    /// Aggregates two partial costs.
    pub fn combine<S: Scalar>(&self, a: S, b: S) -> S {
        match self {
            Objective::KCenter => a.max_of(b),
            _ => a + b,
        }
    }

    pub fn is_max(&self) -> bool {
        matches!(self, Objective::KCenter)
    }

    /// Aggregate of the given distances.
    pub fn aggregate<'a, S: Scalar>(&self, dists: impl IntoIterator<Item = &'a S>) -> S {
        dists
            .into_iter()
            .fold(S::zero(), |acc, d| self.combine(acc, self.term(d)))
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::KCenter => f.write_str("kcenter"),
            Objective::KMedian => f.write_str("kmedian"),
            Objective::KMeans => f.write_str("kmeans"),
            Objective::LpNorm(p) => write!(f, "lp:{p}"),
        }
    }
}

impl From<Objective> for String {
    fn from(obj: Objective) -> String {
        obj.to_string()
    }
}

impl TryFrom<String> for Objective {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "kcenter" | "k-center" => Ok(Objective::KCenter),
            "kmedian" | "k-median" => Ok(Objective::KMedian),
            "kmeans" | "k-means" => Ok(Objective::KMeans),
            other => {
                let p = other
                    .strip_prefix("lp:")
                    .ok_or_else(|| format!("unknown objective '{s}'"))?;
                let p = if let Some((a, b)) = p.split_once('/') {
                    let a: f64 = a.parse().map_err(|_| format!("bad exponent '{p}'"))?;
                    let b: f64 = b.parse().map_err(|_| format!("bad exponent '{p}'"))?;
                    a / b
                } else {
                    p.parse().map_err(|_| format!("bad exponent '{p}'"))?
                };
                if !(p > 0.0 && p.is_finite()) {
                    return Err(format!("exponent must be positive, got {p}"));
                }
                Ok(Objective::LpNorm(p))
            }
        }
    }
}

/// Cost of a clustering under an objective, measuring each non-outlier point
/// from its assigned center.
pub fn cost<S: Scalar>(inst: &Instance<S>, clus: &Clustering, obj: Objective) -> Result<S> {
    if clus.n() != inst.n() {
        return Err(Error::ClusteringInvalid(format!(
            "clustering covers {} points, instance has {}",
            clus.n(),
            inst.n()
        )));
    }
    Ok((0..inst.n())
        .filter_map(|u| clus.center_of(u).map(|c| inst.d(c, u)))
        .fold(S::zero(), |acc, d| obj.combine(acc, obj.term(d))))
}

/// Assigns every non-outlier point to its nearest center, measured from the
/// center. Ties go to the center listed first.
pub fn voronoi<S: Scalar>(
    inst: &Instance<S>,
    centers: &[usize],
    outliers: &[usize],
) -> Result<Clustering> {
    if centers.is_empty() {
        return Err(Error::EmptyCenters);
    }
    let n = inst.n();
    let mut assignment: Vec<Option<usize>> = vec![None; n];
    let mut is_outlier = vec![false; n];
    for &o in outliers {
        if o >= n {
            return Err(Error::ClusteringInvalid(format!(
                "outlier {o} out of range"
            )));
        }
        is_outlier[o] = true;
    }
    for (i, &c) in centers.iter().enumerate() {
        if c >= n {
            return Err(Error::ClusteringInvalid(format!("center {c} out of range")));
        }
        if is_outlier[c] {
            return Err(Error::ClusteringInvalid(format!(
                "center {c} is also an outlier"
            )));
        }
        assignment[c] = Some(i);
    }
    for u in 0..n {
        if is_outlier[u] || assignment[u].is_some() {
            continue;
        }
        assignment[u] = Some(nearest_center(inst, centers, u));
    }
    Clustering::new(assignment, centers.to_vec())
}

/// Index into `centers` of the center closest to `u`, lowest index on ties.
pub fn nearest_center<S: Scalar>(inst: &Instance<S>, centers: &[usize], u: usize) -> usize {
    let mut best = 0;
    for i in 1..centers.len() {
        if inst
            .d(centers[i], u)
            .definitely_lt(inst.d(centers[best], u))
        {
            best = i;
        }
    }
    best
}

/// `min_c d(c, u)` over the given centers.
pub fn distance_to_set<S: Scalar>(inst: &Instance<S>, centers: &[usize], u: usize) -> S {
    centers
        .iter()
        .map(|&c| inst.d(c, u).clone())
        .reduce(S::min_of)
        .expect("non-empty center set")
}

/// Best k-center radius of a fixed partition: each cluster picks its own
/// best center. Outliers are ignored.
pub fn partition_radius<S: Scalar>(inst: &Instance<S>, clus: &Clustering) -> S {
    clus.clusters()
        .iter()
        .map(|members| {
            members
                .iter()
                .map(|&c| {
                    members
                        .iter()
                        .map(|&u| inst.d(c, u).clone())
                        .fold(S::zero(), S::max_of)
                })
                .reduce(S::min_of)
                .unwrap_or_else(S::zero)
        })
        .fold(S::zero(), S::max_of)
}
