//! Fixed benchmark fixtures built from the planted-instance generator.

use resilient_cluster::generator::generate;
use resilient_cluster::{Clustering, GeneratorConfig, GeneratorMode, Instance, Rational, Scalar};

/// A planted instance in both number backends.
pub struct Fixture {
    pub name: String,
    pub exact: Instance<Rational>,
    pub float: Instance<f64>,
    pub planted: Clustering,
}

pub fn fixture(n: usize, k: usize, z: usize, mode: GeneratorMode) -> Fixture {
    let cfg = GeneratorConfig::new(n, k, z, mode, 42);
    let (exact, planted) = generate::<Rational>(&cfg).expect("fixture config is feasible");
    let float = exact.convert(Scalar::to_f64);
    Fixture {
        name: format!("{mode}/n{n}k{k}z{z}"),
        exact,
        float,
        planted,
    }
}

pub fn symmetric(n: usize, k: usize) -> Fixture {
    fixture(n, k, 0, GeneratorMode::Symmetric)
}

pub fn asymmetric(n: usize, k: usize) -> Fixture {
    fixture(n, k, 0, GeneratorMode::Asymmetric)
}

pub fn outlier(n: usize, k: usize, z: usize) -> Fixture {
    fixture(n, k, z, GeneratorMode::Outlier)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_deterministic() {
        let a = outlier(12, 2, 2);
        let b = outlier(12, 2, 2);
        assert_eq!(a.exact, b.exact);
        assert_eq!(a.planted, b.planted);
        assert_eq!(a.float.n(), 12);
    }
}
