//! Planted instances with known optimal clusterings.
//!
//! Each cluster is a star: its center is joined to every member by an edge
//! of length in `[r/4, r]`, and one member of the largest cluster sits at
//! exactly `r`. Clusters and outliers get distinct anchor cells on a grid.
//! A bridge point of each group is joined to every other bridge with length
//! `sigma * r * manhattan(cell_a, cell_b)`. Distances are the shortest-path
//! closure, so the result is a metric where points of different groups are
//! at least `sigma * r` apart.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{cost, Clustering, Instance, Objective};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorMode {
    Symmetric,
    Asymmetric,
    Outlier,
    NonResilient,
}

impl fmt::Display for GeneratorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratorMode::Symmetric => "symmetric",
            GeneratorMode::Asymmetric => "asymmetric",
            GeneratorMode::Outlier => "outlier",
            GeneratorMode::NonResilient => "non_resilient",
        })
    }
}

impl FromStr for GeneratorMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "symmetric" => Ok(GeneratorMode::Symmetric),
            "asymmetric" => Ok(GeneratorMode::Asymmetric),
            "outlier" => Ok(GeneratorMode::Outlier),
            "non_resilient" | "nonresilient" => Ok(GeneratorMode::NonResilient),
            _ => Err(format!("unknown mode '{s}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    pub k: usize,
    /// Planted outliers; only `Outlier` and `NonResilient` modes accept `z > 0`.
    pub z: usize,
    pub sigma: f64,
    pub radius: f64,
    pub seed: u64,
    pub mode: GeneratorMode,
    /// Reject `sigma <= 2` in resilient modes. Turned off for sweeps below
    /// the threshold.
    pub strict: bool,
}

impl GeneratorConfig {
    pub fn new(n: usize, k: usize, z: usize, mode: GeneratorMode, seed: u64) -> Self {
        Self {
            n,
            k,
            z,
            sigma: 4.0,
            radius: 1.0,
            seed,
            mode,
            strict: true,
        }
    }

    pub fn with_sigma(self, sigma: f64) -> Self {
        Self { sigma, ..self }
    }

    pub fn with_radius(self, radius: f64) -> Self {
        Self { radius, ..self }
    }

    pub fn lenient(self) -> Self {
        Self {
            strict: false,
            ..self
        }
    }

    fn check(&self) -> Result<()> {
        let infeasible = |m: String| Err(Error::ConfigInfeasible(m));
        if self.k == 0 || self.n == 0 {
            return infeasible("n and k must be positive".into());
        }
        if self.k + self.z > self.n {
            return infeasible(format!(
                "k + z = {} exceeds n = {}",
                self.k + self.z,
                self.n
            ));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return infeasible(format!("radius must be positive, got {}", self.radius));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return infeasible(format!("sigma must be positive, got {}", self.sigma));
        }
        match self.mode {
            GeneratorMode::NonResilient => return Ok(()),
            GeneratorMode::Outlier => {
                if self.n - self.z < 2 * self.k {
                    return infeasible(format!(
                        "outlier mode needs at least two points per cluster ({} clusters, {} inliers)",
                        self.k,
                        self.n - self.z
                    ));
                }
            }
            GeneratorMode::Symmetric | GeneratorMode::Asymmetric => {
                if self.z > 0 {
                    return infeasible(format!(
                        "{} mode plants no outliers; use outlier mode",
                        self.mode
                    ));
                }
            }
        }
        if self.strict && self.sigma <= 2.0 {
            return infeasible(format!("separation sigma = {} must exceed 2", self.sigma));
        }
        Ok(())
    }
}

/// Generates an instance and its planted clustering. The output depends
/// only on the configuration; `sigma` scales bridge lengths without
/// changing anything else that is drawn.
pub fn generate<S: Scalar>(cfg: &GeneratorConfig) -> Result<(Instance<S>, Clustering)> {
    cfg.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let r = S::from_f64(cfg.radius).ok_or_else(|| Error::ConfigInfeasible("radius".into()))?;
    let sigma = S::from_f64(cfg.sigma).ok_or_else(|| Error::ConfigInfeasible("sigma".into()))?;
    let (n, k, z) = (cfg.n, cfg.k, cfg.z);

    // Random relabelling so that clusters are not contiguous.
    let mut label: Vec<usize> = (0..n).collect();
    label.shuffle(&mut rng);

    if cfg.mode == GeneratorMode::NonResilient {
        let inst = Instance::from_fn(
            n,
            true,
            k,
            z,
            |u, v| if u == v { S::zero() } else { r.clone() },
        )
        .map_err(|e| Error::ConfigInfeasible(e.to_string()))?;
        let centers: Vec<usize> = label[..k].to_vec();
        // label[k..k + z] stay outliers.
        let mut assignment: Vec<Option<usize>> = vec![None; n];
        for (i, &u) in label[k + z..].iter().enumerate() {
            assignment[u] = Some(i % k);
        }
        for (i, &c) in centers.iter().enumerate() {
            assignment[c] = Some(i);
        }
        return Ok((inst, Clustering::new(assignment, centers)?));
    }

    let min_size = if cfg.mode == GeneratorMode::Outlier {
        2
    } else {
        1
    };
    let inliers = n - z;
    let mut sizes = vec![min_size; k];
    for _ in 0..inliers - min_size * k {
        sizes[rng.gen_range(0..k)] += 1;
    }

    // Group membership over internal ids 0..n: clusters first, then outliers.
    let mut groups: Vec<Vec<usize>> = Vec::with_capacity(k + z);
    let mut next = 0;
    for &s in &sizes {
        groups.push((next..next + s).collect());
        next += s;
    }
    for _ in 0..z {
        groups.push(vec![next]);
        next += 1;
    }

    let inf: Option<S> = None;
    let mut w: Vec<Vec<Option<S>>> = vec![vec![inf; n]; n];
    for (u, row) in w.iter_mut().enumerate() {
        row[u] = Some(S::zero());
    }
    let sixty_four = S::from_i64(64);
    let largest = (0..k)
        .max_by_key(|&i| (sizes[i], std::cmp::Reverse(i)))
        .expect("k >= 1");
    let mut bridges = Vec::with_capacity(k + z);
    for (g, members) in groups.iter().enumerate() {
        let center = members[0];
        let mut lightest = (S::zero(), center);
        for (m, &p) in members.iter().enumerate().skip(1) {
            let steps = if g == largest && m == 1 {
                48
            } else {
                rng.gen_range(0..=48)
            };
            let out = r.clone() * S::from_i64(16 + steps) / sixty_four.clone();
            let back = if cfg.mode == GeneratorMode::Asymmetric {
                r.clone() * S::from_i64(16 + rng.gen_range(0..=112)) / sixty_four.clone()
            } else {
                out.clone()
            };
            if m == 1 || out < lightest.0 {
                lightest = (out.clone(), p);
            }
            w[center][p] = Some(out);
            w[p][center] = Some(back);
        }
        bridges.push(lightest.1);
    }

    // Distinct grid cells for every group.
    let side = (((k + z) as f64).sqrt().ceil() as usize).max(1) + 1;
    let mut cells: Vec<(i64, i64)> = (0..side * side)
        .map(|c| ((c / side) as i64, (c % side) as i64))
        .collect();
    cells.shuffle(&mut rng);
    for a in 0..groups.len() {
        for b in a + 1..groups.len() {
            let (ca, cb) = (cells[a], cells[b]);
            let manhattan = (ca.0 - cb.0).abs() + (ca.1 - cb.1).abs();
            let len = sigma.clone() * r.clone() * S::from_i64(manhattan);
            let (p, q) = (bridges[a], bridges[b]);
            w[p][q] = Some(len.clone());
            w[q][p] = Some(len);
        }
    }

    for m in 0..n {
        for u in 0..n {
            let Some(um) = w[u][m].clone() else { continue };
            for v in 0..n {
                let Some(mv) = w[m][v].clone() else { continue };
                let via = um.clone() + mv;
                if w[u][v].as_ref().is_none_or(|cur| via < *cur) {
                    w[u][v] = Some(via);
                }
            }
        }
    }

    let symmetric = cfg.mode != GeneratorMode::Asymmetric;
    // `label` maps output ids to internal ids; invert it for the clustering.
    let mut output_of = vec![0; n];
    for (out, &internal) in label.iter().enumerate() {
        output_of[internal] = out;
    }
    let inst = Instance::from_fn(n, symmetric, k, z, |u, v| {
        w[label[u]][label[v]].clone().expect("groups are connected")
    })?;
    let mut assignment: Vec<Option<usize>> = vec![None; n];
    for (i, members) in groups.iter().take(k).enumerate() {
        for &p in members {
            assignment[output_of[p]] = Some(i);
        }
    }
    let centers = groups.iter().take(k).map(|m| output_of[m[0]]).collect();
    Ok((inst, Clustering::new(assignment, centers)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma {
    /// Points in different clusters are more than `r*` apart.
    KcSep,
    /// `d(p, q) > d(p, w)` for `p, w` in one cluster and `q` outside it.
    KcSep1,
    /// `d(q, c_i) > r*` for `q` outside cluster `i`.
    AsymkcSep1,
    /// For core points `p in C_i`, `q in C_j` and `w in C_i` with
    /// `d(p, w) >= r*`: `d(q, w) > r*`.
    AsymkcSep2,
    /// A non-outlier is more than `r*` from everything outside its cluster.
    KcoSep,
    /// Each outlier's `2 r*` ball holds fewer outliers than the smallest
    /// cluster has points.
    KcoOutBall,
    /// `d(c_i, p) < d(p, q)` for `p in C_i` and `q` outside `C_i`.
    KmoSep,
    /// `2 d(p, c_i) < d(p, c_j)` for every other center `c_j`.
    KmoPCenter,
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lemma::KcSep => "kc-sep",
            Lemma::KcSep1 => "kc-sep-1",
            Lemma::AsymkcSep1 => "asymkc-sep-1",
            Lemma::AsymkcSep2 => "asymkc-sep-2",
            Lemma::KcoSep => "kco-sep",
            Lemma::KcoOutBall => "kco-out-ball",
            Lemma::KmoSep => "kmo-sep",
            Lemma::KmoPCenter => "kmo-p-center",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaViolation {
    pub lemma: Lemma,
    /// Witness points in the order the inequality names them.
    pub points: Vec<usize>,
}

impl fmt::Display for LemmaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated at {:?}", self.lemma, self.points)
    }
}

/// Lemma inequalities that apply to `planted`, checked literally with the
/// planted k-center radius as `r*`.
///
/// Symmetric instances get `KcSep` and `KcSep1`, asymmetric ones the two
/// `Asymkc` lemmas. Clusterings with outliers (or instances with `z > 0`)
/// add `KcoSep` and `KcoOutBall`. Sum objectives add `KmoSep` and
/// `KmoPCenter`.
pub fn verify_planted<S: Scalar>(
    inst: &Instance<S>,
    planted: &Clustering,
    obj: Objective,
) -> Vec<LemmaViolation> {
    let Ok(r) = cost(inst, planted, Objective::KCenter) else {
        return Vec::new();
    };
    let n = inst.n();
    let d = |u: usize, v: usize| inst.d(u, v);
    let cl = |u: usize| planted.cluster_of(u);
    let mut out = Vec::new();
    let mut flag = |lemma: Lemma, points: Vec<usize>| out.push(LemmaViolation { lemma, points });
    let members: Vec<usize> = (0..n).filter(|&u| cl(u).is_some()).collect();
    let apart = |p: usize, q: usize| cl(p) != cl(q);

    if inst.is_symmetric() {
        for &p in &members {
            for &q in &members {
                if p < q && apart(p, q) && !r.definitely_lt(d(p, q)) {
                    flag(Lemma::KcSep, vec![p, q]);
                }
            }
        }
        for &p in &members {
            for &w in &members {
                if w == p || apart(p, w) {
                    continue;
                }
                for &q in &members {
                    if apart(p, q) && !d(p, w).definitely_lt(d(p, q)) {
                        flag(Lemma::KcSep1, vec![p, q, w]);
                    }
                }
            }
        }
    } else {
        for (i, &c) in planted.centers().iter().enumerate() {
            for &q in &members {
                if cl(q) != Some(i) && !r.definitely_lt(d(q, c)) {
                    flag(Lemma::AsymkcSep1, vec![q, c]);
                }
            }
        }
        let core = |p: usize| planted.center_of(p).is_some_and(|c| d(p, c).approx_le(&r));
        for &p in members.iter().filter(|&&p| core(p)) {
            for &q in members.iter().filter(|&&q| core(q) && apart(p, q)) {
                for &w in &members {
                    if !apart(p, w) && r.approx_le(d(p, w)) && !r.definitely_lt(d(q, w)) {
                        flag(Lemma::AsymkcSep2, vec![p, q, w]);
                    }
                }
            }
        }
    }

    let outliers = planted.outliers();
    if inst.z() > 0 || !outliers.is_empty() {
        for &p in &members {
            for q in 0..n {
                if q != p && cl(q) != cl(p) && !r.definitely_lt(d(p, q)) {
                    flag(Lemma::KcoSep, vec![p, q]);
                }
            }
        }
        let smallest = planted.cluster_sizes().into_iter().min().unwrap_or(0);
        let two_r = S::from_i64(2) * r.clone();
        for &p in &outliers {
            let inside: Vec<usize> = outliers
                .iter()
                .copied()
                .filter(|&o| d(p, o).approx_le(&two_r))
                .collect();
            if inside.len() >= smallest {
                flag(
                    Lemma::KcoOutBall,
                    std::iter::once(p).chain(inside).collect(),
                );
            }
        }
    }

    if !obj.is_max() {
        for &p in &members {
            let c = planted.center_of(p).expect("member");
            for q in 0..n {
                if cl(q) != cl(p) && !d(c, p).definitely_lt(d(p, q)) {
                    flag(Lemma::KmoSep, vec![p, q]);
                }
            }
            for &cj in planted.centers() {
                if cj != c && !(S::from_i64(2) * d(p, c).clone()).definitely_lt(d(p, cj)) {
                    flag(Lemma::KmoPCenter, vec![p, c, cj]);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::validate_metric;
    use crate::scalar::Rational;

    #[test]
    fn same_seed_same_output() {
        let cfg = GeneratorConfig::new(12, 3, 0, GeneratorMode::Symmetric, 7);
        let a = generate::<Rational>(&cfg).unwrap();
        let b = generate::<Rational>(&cfg).unwrap();
        assert_eq!(a, b);
        let c = generate::<Rational>(&GeneratorConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn every_mode_yields_a_metric() {
        for mode in [
            GeneratorMode::Symmetric,
            GeneratorMode::Asymmetric,
            GeneratorMode::Outlier,
        ] {
            let z = if mode == GeneratorMode::Outlier { 2 } else { 0 };
            for seed in 0..10 {
                let cfg = GeneratorConfig::new(12, 3, z, mode, seed);
                let (inst, planted) = generate::<Rational>(&cfg).unwrap();
                assert!(validate_metric(&inst).is_empty(), "{mode} seed {seed}");
                assert_eq!(planted.outlier_count(), z);
                assert_eq!(
                    cost(&inst, &planted, Objective::KCenter).unwrap(),
                    Rational::from_i64(1)
                );
                assert!(verify_planted(&inst, &planted, Objective::KMedian).is_empty());
            }
        }
    }

    #[test]
    fn rejects_small_sigma_unless_lenient() {
        let cfg = GeneratorConfig::new(8, 2, 0, GeneratorMode::Symmetric, 1).with_sigma(1.5);
        assert!(matches!(
            generate::<f64>(&cfg),
            Err(Error::ConfigInfeasible(_))
        ));
        assert!(generate::<f64>(&cfg.lenient()).is_ok());
    }

    #[test]
    fn rejects_impossible_sizes() {
        let cfg = GeneratorConfig::new(5, 3, 1, GeneratorMode::Outlier, 1);
        assert!(matches!(
            generate::<f64>(&cfg),
            Err(Error::ConfigInfeasible(_))
        ));
        let cfg = GeneratorConfig::new(5, 3, 1, GeneratorMode::Symmetric, 1);
        assert!(matches!(
            generate::<f64>(&cfg),
            Err(Error::ConfigInfeasible(_))
        ));
    }

    #[test]
    fn uniform_partition_violates_separation() {
        let cfg = GeneratorConfig::new(4, 2, 0, GeneratorMode::NonResilient, 3);
        let (inst, planted) = generate::<Rational>(&cfg).unwrap();
        let v = verify_planted(&inst, &planted, Objective::KCenter);
        assert!(v.iter().any(|v| v.lemma == Lemma::KcSep));
    }
}
