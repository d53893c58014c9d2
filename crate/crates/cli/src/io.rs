//! Instance files: parsing, number-mode selection and writing.

use std::fs;
use std::path::{Path, PathBuf};

use num::Signed;
use resilient_cluster::{
    format_rational, parse_rational, validate_metric, Clustering, Instance, Rational, Scalar,
};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointMetric {
    Euclidean,
    Manhattan,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawNumber {
    Number(serde_json::Number),
    Text(String),
}

impl RawNumber {
    fn text(&self) -> String {
        match self {
            RawNumber::Number(n) => n.to_string(),
            RawNumber::Text(s) => s.clone(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    n: Option<usize>,
    k: usize,
    #[serde(default)]
    z: usize,
    symmetric: Option<bool>,
    dist: Option<Vec<Vec<RawNumber>>>,
    points: Option<Vec<Vec<RawNumber>>>,
    metric: Option<PointMetric>,
    planted: Option<Clustering>,
}

/// Distances as read, before the number mode is chosen.
enum Matrix {
    Rational(Vec<Vec<Rational>>),
    Float(Vec<Vec<f64>>),
}

#[derive(Debug)]
pub enum Loaded {
    Exact(Instance<Rational>),
    Float(Instance<f64>),
}

/// How to pick between exact and floating-point arithmetic.
#[derive(Clone, Copy, Debug)]
pub struct NumberMode {
    pub force_exact: bool,
    pub exact_cap: usize,
}

#[derive(Debug)]
pub struct InstanceFile {
    pub instance: Loaded,
    pub planted: Option<Clustering>,
}

fn number(raw: &RawNumber, at: impl Fn() -> String) -> Result<Rational, CliError> {
    let text = raw.text();
    parse_rational(&text).ok_or_else(|| CliError::Invalid(format!("{}: bad number '{text}'", at())))
}

fn matrix_from_points(points: &[Vec<RawNumber>], metric: PointMetric) -> Result<Matrix, CliError> {
    let coords: Vec<Vec<Rational>> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            p.iter()
                .map(|c| number(c, || format!("points[{i}]")))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let dim = coords.first().map_or(0, Vec::len);
    if let Some(i) = coords.iter().position(|p| p.len() != dim) {
        return Err(CliError::Invalid(format!(
            "points[{i}] has {} coordinates, expected {dim}",
            coords[i].len()
        )));
    }
    let n = coords.len();
    let pairs = |f: &dyn Fn(&Rational, &Rational) -> Rational| -> Vec<Vec<Rational>> {
        (0..n)
            .map(|u| {
                (0..n)
                    .map(|v| {
                        coords[u]
                            .iter()
                            .zip(&coords[v])
                            .fold(Rational::zero(), |acc, (a, b)| acc + f(a, b))
                    })
                    .collect()
            })
            .collect()
    };
    Ok(match metric {
        PointMetric::Manhattan => Matrix::Rational(pairs(&|a, b| (a.clone() - b.clone()).abs())),
        PointMetric::Euclidean => {
            let squared = pairs(&|a, b| {
                let d = a.clone() - b.clone();
                d.clone() * d
            });
            Matrix::Float(
                squared
                    .iter()
                    .map(|row| row.iter().map(|s| s.to_f64().sqrt()).collect())
                    .collect(),
            )
        }
    })
}

fn build<S: Scalar>(
    dist: Vec<Vec<S>>,
    symmetric: Option<bool>,
    k: usize,
    z: usize,
) -> Result<Instance<S>, CliError> {
    let n = dist.len();
    let detected =
        (0..n).all(|u| (0..n).all(|v| dist[u].get(v) == dist.get(v).and_then(|r| r.get(u))));
    let inst = Instance::new(dist, symmetric.unwrap_or(detected), k, z)?;
    let violations = validate_metric(&inst);
    if !violations.is_empty() {
        let shown: Vec<String> = violations
            .iter()
            .take(5)
            .map(|v| format!("{v:?}"))
            .collect();
        return Err(CliError::Invalid(format!(
            "not a metric ({} violations): {}",
            violations.len(),
            shown.join(", ")
        )));
    }
    Ok(inst)
}

/// Parses an instance file. Rational input stays exact up to `exact_cap`
/// points (or always, when forced); Euclidean point clouds are floating
/// point unless exactness is forced.
pub fn parse_instance(text: &str, mode: NumberMode) -> Result<InstanceFile, CliError> {
    if text.trim().is_empty() {
        return Err(CliError::Invalid("empty instance file".into()));
    }
    let raw: RawFile = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let matrix = match (&raw.dist, &raw.points) {
        (Some(dist), None) => {
            if raw.metric.is_some() {
                return Err(CliError::Invalid(
                    "'metric' only applies to 'points'".into(),
                ));
            }
            let rows = dist
                .iter()
                .enumerate()
                .map(|(u, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(v, x)| number(x, || format!("dist[{u}][{v}]")))
                        .collect()
                })
                .collect::<Result<_, _>>()?;
            Matrix::Rational(rows)
        }
        (None, Some(points)) => {
            let metric = raw
                .metric
                .ok_or_else(|| CliError::Invalid("'points' needs a 'metric'".into()))?;
            matrix_from_points(points, metric)?
        }
        _ => {
            return Err(CliError::Invalid(
                "exactly one of 'dist' and 'points' is required".into(),
            ))
        }
    };
    let n = match &matrix {
        Matrix::Rational(m) => m.len(),
        Matrix::Float(m) => m.len(),
    };
    if let Some(declared) = raw.n {
        if declared != n {
            return Err(CliError::Invalid(format!(
                "n = {declared} but the matrix has {n} rows"
            )));
        }
    }
    let symmetric = match (&raw.points, raw.symmetric) {
        (Some(_), _) => Some(true),
        (None, s) => s,
    };
    let instance = match matrix {
        Matrix::Rational(m) if mode.force_exact || n <= mode.exact_cap => {
            Loaded::Exact(build(m, symmetric, raw.k, raw.z)?)
        }
        Matrix::Rational(m) => {
            let m = m
                .iter()
                .map(|r| r.iter().map(Scalar::to_f64).collect())
                .collect();
            Loaded::Float(build(m, symmetric, raw.k, raw.z)?)
        }
        Matrix::Float(m) if mode.force_exact => {
            let m = m
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|&x| Rational::from_f64(x).expect("finite"))
                        .collect()
                })
                .collect();
            Loaded::Exact(build(m, symmetric, raw.k, raw.z)?)
        }
        Matrix::Float(m) => Loaded::Float(build(m, symmetric, raw.k, raw.z)?),
    };
    if let Some(planted) = &raw.planted {
        if planted.n() != n {
            return Err(CliError::Invalid(format!(
                "planted clustering covers {} points, instance has {n}",
                planted.n()
            )));
        }
    }
    Ok(InstanceFile {
        instance,
        planted: raw.planted,
    })
}

pub fn read_instance(path: &Path, mode: NumberMode) -> Result<InstanceFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    parse_instance(&text, mode)
}

/// JSON files directly inside `dir`, sorted by name.
pub fn list_instances(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|e| CliError::Io(dir.to_path_buf(), e))?
            .path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Serialises an exact instance with distances as decimal strings, one
/// matrix row per line.
pub fn write_instance(inst: &Instance<Rational>, planted: Option<&Clustering>) -> String {
    let rows: Vec<String> = inst
        .matrix()
        .iter()
        .map(|row| {
            let cells: Vec<String> = row.iter().map(format_rational).collect();
            format!(
                "    {}",
                serde_json::to_string(&cells).expect("strings serialise")
            )
        })
        .collect();
    let mut out = format!(
        "{{\n  \"n\": {},\n  \"k\": {},\n  \"z\": {},\n  \"symmetric\": {},\n  \"dist\": [\n{}\n  ]",
        inst.n(),
        inst.k(),
        inst.z(),
        inst.is_symmetric(),
        rows.join(",\n")
    );
    if let Some(planted) = planted {
        out.push_str(&format!(
            ",\n  \"planted\": {}",
            serde_json::to_string(planted).expect("clustering serialises")
        ));
    }
    out.push_str("\n}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const AUTO: NumberMode = NumberMode {
        force_exact: false,
        exact_cap: 256,
    };

    #[test]
    fn reads_decimal_strings_and_numbers_exactly() {
        let text = r#"{"k": 1, "dist": [[0, "0.1"], [0.1, "0"]]}"#;
        let file = parse_instance(text, AUTO).unwrap();
        let Loaded::Exact(inst) = file.instance else {
            panic!("expected exact")
        };
        assert_eq!(inst.d(1, 0), &parse_rational("1/10").unwrap());
        assert!(inst.is_symmetric());
    }

    #[test]
    fn large_inputs_fall_back_to_floats() {
        let text = r#"{"k": 1, "dist": [[0, 1], [1, 0]]}"#;
        let small_cap = NumberMode {
            force_exact: false,
            exact_cap: 1,
        };
        assert!(matches!(
            parse_instance(text, small_cap).unwrap().instance,
            Loaded::Float(_)
        ));
        let forced = NumberMode {
            force_exact: true,
            exact_cap: 1,
        };
        assert!(matches!(
            parse_instance(text, forced).unwrap().instance,
            Loaded::Exact(_)
        ));
    }

    #[test]
    fn point_clouds() {
        let text = r#"{"k": 1, "metric": "manhattan", "points": [[0, 0], [1, 2], [3, 1]]}"#;
        let Loaded::Exact(inst) = parse_instance(text, AUTO).unwrap().instance else {
            panic!("manhattan stays exact")
        };
        assert_eq!(inst.d(1, 2), &Rational::from_i64(3));
        let text = r#"{"k": 1, "metric": "euclidean", "points": [[0, 0], [3, 4]]}"#;
        let Loaded::Float(inst) = parse_instance(text, AUTO).unwrap().instance else {
            panic!("euclidean is floating point")
        };
        assert_eq!(*inst.d(0, 1), 5.0);
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse_instance("{\"k\": 1,\n \"dist\": [[0, 1], [1 0]]}", AUTO).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn rejects_non_metrics_and_bad_shapes() {
        let bad = r#"{"k": 1, "dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}"#;
        assert!(parse_instance(bad, AUTO)
            .unwrap_err()
            .to_string()
            .contains("Triangle"));
        let ragged = r#"{"k": 1, "dist": [[0, 1], [1]]}"#;
        assert!(parse_instance(ragged, AUTO).is_err());
        let wrong_n = r#"{"n": 3, "k": 1, "dist": [[0, 1], [1, 0]]}"#;
        assert!(parse_instance(wrong_n, AUTO).is_err());
    }

    #[test]
    fn write_then_read_is_lossless() {
        let d = [[0, 3, 1], [3, 0, 2], [1, 2, 0]];
        let inst = Instance::from_fn(3, true, 1, 1, |u, v| {
            Rational::from_i64(d[u][v]) / Rational::from_i64(3)
        })
        .unwrap();
        let text = write_instance(&inst, None);
        let Loaded::Exact(back) = parse_instance(&text, AUTO).unwrap().instance else {
            panic!("exact")
        };
        assert_eq!(back, inst);
    }
}
