//! The JSON report printed by `solve` and `certify`.

use resilient_cluster::{
    cost, format_rational, Clustering, FalsifierReport, FalsifierVerdict, Formulation, Instance,
    Objective, PerturbationMode, Rational, Scalar,
};
use serde::{Deserialize, Serialize};

/// A number as emitted: a decimal (or `p/q`) string in exact mode, a JSON
/// number otherwise.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Num {
    Exact(String),
    Float(f64),
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(de)? {
            serde_json::Value::String(s) => Ok(Num::Exact(s)),
            serde_json::Value::Number(n) => n
                .as_f64()
                .map(Num::Float)
                .ok_or_else(|| serde::de::Error::custom("number out of range")),
            other => Err(serde::de::Error::custom(format!(
                "expected a number, got {other}"
            ))),
        }
    }
}

pub trait Emit: Scalar {
    fn emit(&self) -> Num;
}

impl Emit for f64 {
    fn emit(&self) -> Num {
        Num::Float(*self)
    }
}

impl Emit for Rational {
    fn emit(&self) -> Num {
        Num::Exact(format_rational(self))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Proven optimal by an LP certificate or exhaustive search.
    #[serde(rename = "OPTIMAL")]
    Optimal,
    /// The instance cannot be 2-perturbation resilient.
    #[serde(rename = "NOT_2PR")]
    Not2pr,
    /// A solution from a method that carries no optimality proof on its own.
    #[serde(rename = "SOLVED")]
    Solved,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteringOut {
    pub assignment: Vec<Option<usize>>,
    pub centers: Vec<usize>,
    pub outliers: Vec<usize>,
}

impl From<&Clustering> for ClusteringOut {
    fn from(c: &Clustering) -> Self {
        ClusteringOut {
            assignment: c.assignment().to_vec(),
            centers: c.centers().to_vec(),
            outliers: c.outliers(),
        }
    }
}

impl ClusteringOut {
    pub fn to_clustering(&self) -> resilient_cluster::Result<Clustering> {
        Clustering::new(self.assignment.clone(), self.centers.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpWitness {
    pub radius: Num,
    pub y: Vec<Num>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationOut {
    pub edges: Vec<(usize, usize)>,
    pub cap: Num,
    pub mode: PerturbationMode,
    /// Optimal clustering of the perturbed instance.
    pub clustering: ClusteringOut,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FalsifierOut {
    pub verdict: FalsifierVerdict,
    pub tried: usize,
    pub witness: Option<PerturbationOut>,
}

impl<S: Emit> From<&FalsifierReport<S>> for FalsifierOut {
    fn from(r: &FalsifierReport<S>) -> Self {
        FalsifierOut {
            verdict: r.verdict,
            tried: r.tried,
            witness: r.witness.as_ref().map(|(spec, clus)| PerturbationOut {
                edges: spec.edges.clone(),
                cap: spec.cap.emit(),
                mode: spec.mode,
                clustering: clus.into(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub verdict: Verdict,
    pub method: String,
    pub objective: Objective,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formulation: Option<Formulation>,
    pub exact: bool,
    /// Cost of `clustering` under `objective`.
    pub cost: Option<Num>,
    /// k-center radius of `clustering`.
    pub radius: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lp_radius: Option<Num>,
    pub clustering: Option<ClusteringOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unique: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lp_witness: Option<LpWitness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub falsifier: Option<FalsifierOut>,
    /// Whether `clustering` induces the partition planted in the input file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matches_planted: Option<bool>,
    pub timing_ms: f64,
}

impl Report {
    /// A report whose cost and radius are computed from `clustering`, so
    /// the two always agree.
    pub fn new<S: Emit>(
        inst: &Instance<S>,
        verdict: Verdict,
        method: &str,
        objective: Objective,
        clustering: Option<&Clustering>,
    ) -> resilient_cluster::Result<Self> {
        let (cost_val, radius) = match clustering {
            Some(c) => (
                Some(cost(inst, c, objective)?.emit()),
                Some(cost(inst, c, Objective::KCenter)?.emit()),
            ),
            None => (None, None),
        };
        Ok(Report {
            verdict,
            method: method.to_string(),
            objective,
            formulation: None,
            exact: S::EXACT,
            cost: cost_val,
            radius,
            lp_radius: None,
            clustering: clustering.map(Into::into),
            unique: None,
            lp_witness: None,
            falsifier: None,
            matches_planted: None,
            timing_ms: 0.0,
        })
    }
}
