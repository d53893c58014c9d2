//! Exact clustering for perturbation-resilient instances.
//!
//! The crate solves k-center, asymmetric k-center and clustering with
//! outliers, and either proves a returned solution optimal or reports that
//! the instance cannot be 2-perturbation resilient:
//!
//! * [`lp`] builds covering relaxations over threshold graphs, searches the
//!   smallest feasible radius with an exact simplex and certifies the result.
//! * [`approx`] runs the classical 2-approximations and recovers the Voronoi
//!   partition they induce.
//! * [`mstdp`] solves outlier clustering by dynamic programming over a
//!   binarised minimum spanning tree.
//! * [`oracle`] and [`perturb`] provide brute-force ground truth and a
//!   falsifier that searches structured 2-perturbations.
//! * [`generator`] plants instances with known optimal clusterings.
//!
//! All algorithms are generic over [`Scalar`]; use [`Rational`] for exact
//! verdicts and `f64` for speed.

pub mod approx;
pub mod error;
pub mod generator;
pub mod instance;
pub mod lp;
pub mod mstdp;
pub mod oracle;
pub mod perturb;
pub mod scalar;

pub use error::{Error, Result};
pub use instance::{
    cost, distance_to_set, nearest_center, partition_radius, validate_metric, voronoi, Clustering,
    Instance, Objective, Violation,
};
pub use scalar::{format_rational, parse_rational, Rational, Scalar, FLOAT_TOLERANCE};

pub use approx::{ApproxAlgorithm, ApproxResult};
pub use generator::{GeneratorConfig, GeneratorMode, Lemma, LemmaViolation};
pub use lp::{CertifierVerdict, Formulation, LpOutcome, ThresholdGraph, VerdictKind};
pub use mstdp::BinaryTree;
pub use oracle::OracleResult;
pub use perturb::{FalsifierReport, FalsifierVerdict, PerturbationMode, PerturbationSpec};
