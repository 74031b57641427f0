//! Quenched Gaussian coupling disorder and the realization-averaging harness.
//!
//! Realization `r` draws its couplings from the ChaCha8 substream
//! `(master_seed, DISORDER, r)`: one standard normal per edge, in the graph's
//! sorted edge order, via the ziggurat sampler of `rand_distr::StandardNormal`,
//! mapped to `mean + stddev * z`.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::couplings::CouplingMatrix;
use crate::error::{Error, Result};
use crate::lattice::LatticeGraph;
use crate::rng::{namespace, substream};
use crate::scalar::Scalar;

/// Realization count used for figure-scale averages.
pub const DEFAULT_REALIZATIONS: u64 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    /// Mean coupling `J̄`.
    pub mean: f64,
    /// Standard deviation `Δ` of the couplings.
    pub stddev: f64,
    pub master_seed: u64,
}

impl DisorderSpec {
    pub fn new(mean: f64, stddev: f64, master_seed: u64) -> Result<Self> {
        let spec = Self { mean, stddev, master_seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.stddev >= 0.0) || !self.stddev.is_finite() || !self.mean.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "disorder needs finite mean and stddev >= 0 (got {}, {})",
                self.mean, self.stddev
            )));
        }
        Ok(())
    }
}

impl Default for DisorderSpec {
    fn default() -> Self {
        Self { mean: 0.0, stddev: 1.0, master_seed: 0 }
    }
}

/// Draws realization `index` of the couplings on `graph`.
pub fn sample_couplings<T: Scalar>(
    graph: &LatticeGraph,
    spec: &DisorderSpec,
    index: u64,
) -> CouplingMatrix<T> {
    let mut rng = substream(spec.master_seed, namespace::DISORDER, index);
    let mut couplings = CouplingMatrix::zeros(graph.sites());
    for &(a, b) in graph.edges() {
        let z: f64 = StandardNormal.sample(&mut rng);
        couplings
            .set(a, b, T::lit(spec.mean + spec.stddev * z))
            .expect("graph edges are valid off-diagonal pairs");
    }
    couplings
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Average<T> {
    pub mean: T,
    pub standard_error: T,
    pub count: u64,
}

fn check_count(count: u64) -> Result<()> {
    if count < 2 {
        return Err(Error::InvalidArgument(format!(
            "disorder average needs at least 2 realizations, got {count}"
        )));
    }
    Ok(())
}

fn evaluate_all<V: Send>(
    count: u64,
    estimator: impl Fn(u64) -> Result<V> + Sync,
) -> Result<Vec<V>> {
    let values: Vec<Result<V>> = (0..count).into_par_iter().map(&estimator).collect();
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.map_err(|e| Error::Estimator { index: i as u64, source: Box::new(e) }))
        .collect()
}

fn mean_and_stderr<T: Scalar>(values: impl Iterator<Item = T> + Clone, count: usize) -> (T, T) {
    let n = T::from_usize_lossy(count);
    let mean = values.clone().fold(T::zero(), |a, v| a + v) / n;
    let ss = values.fold(T::zero(), |a, v| a + (v - mean) * (v - mean));
    let var = ss / (n - T::one());
    (mean, (var / n).sqrt())
}

/// Mean and standard error of already evaluated realizations, in slice order.
pub fn summarize<T: Scalar>(values: &[T]) -> Result<Average<T>> {
    check_count(values.len() as u64)?;
    let (mean, standard_error) = mean_and_stderr(values.iter().copied(), values.len());
    Ok(Average { mean, standard_error, count: values.len() as u64 })
}

/// Mean and standard error of `estimator` over realizations `0..count`.
///
/// Realizations may be evaluated concurrently; the reduction always runs in
/// index order, so the result does not depend on scheduling. The first failing
/// realization (lowest index) is reported.
pub fn disorder_average<T: Scalar>(
    estimator: impl Fn(u64) -> Result<T> + Sync,
    count: u64,
) -> Result<Average<T>> {
    check_count(count)?;
    let values = evaluate_all(count, estimator)?;
    let (mean, standard_error) = mean_and_stderr(values.iter().copied(), values.len());
    Ok(Average { mean, standard_error, count })
}

/// Element-wise [`disorder_average`] for estimators producing a fixed-length
/// series (e.g. one value per time point).
pub fn disorder_average_series<T: Scalar>(
    estimator: impl Fn(u64) -> Result<Vec<T>> + Sync,
    count: u64,
) -> Result<Vec<Average<T>>> {
    check_count(count)?;
    let values = evaluate_all(count, estimator)?;
    let len = values[0].len();
    if let Some(bad) = values.iter().position(|v| v.len() != len) {
        return Err(Error::Estimator {
            index: bad as u64,
            source: Box::new(Error::Dimension { expected: len, got: values[bad].len() }),
        });
    }
    Ok((0..len)
        .map(|k| {
            let (mean, standard_error) =
                mean_and_stderr(values.iter().map(|v| v[k]), values.len());
            Average { mean, standard_error, count }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, LatticeKind};

    #[test]
    fn degenerate_gaussian_is_the_mean() {
        let g = build_lattice(LatticeKind::Square2d, &[3, 4], true).unwrap();
        let spec = DisorderSpec::new(1.0, 0.0, 11).unwrap();
        let j = sample_couplings::<f64>(&g, &spec, 5);
        for (a, b, v) in j.pairs() {
            assert_eq!(v, if g.has_edge(a, b) { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn realizations_are_deterministic_and_distinct() {
        let g = build_lattice(LatticeKind::Chain1d, &[6], true).unwrap();
        let spec = DisorderSpec::new(0.0, 1.0, 3).unwrap();
        let a = sample_couplings::<f64>(&g, &spec, 9);
        assert_eq!(a, sample_couplings::<f64>(&g, &spec, 9));
        assert_ne!(a, sample_couplings::<f64>(&g, &spec, 10));
        let other = DisorderSpec { master_seed: 4, ..spec };
        assert_ne!(a, sample_couplings::<f64>(&g, &other, 9));
    }

    #[test]
    fn single_edge_moments() {
        let g = LatticeGraph::custom(2, vec![(0, 1)]).unwrap();
        let spec = DisorderSpec::new(0.0, 1.0, 2024).unwrap();
        let n = 100_000u64;
        let xs: Vec<f64> = (0..n).map(|r| sample_couplings::<f64>(&g, &spec, r).get(0, 1)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn rejects_negative_stddev() {
        assert!(DisorderSpec::new(0.0, -1.0, 0).is_err());
        assert!(DisorderSpec::new(f64::NAN, 1.0, 0).is_err());
    }

    #[test]
    fn constant_and_alternating_estimators() {
        let avg = disorder_average(|_| Ok(0.5f64), 100).unwrap();
        assert_eq!(avg.mean, 0.5);
        assert_eq!(avg.standard_error, 0.0);

        let avg = disorder_average(|i| Ok(if i % 2 == 0 { 1.0f64 } else { -1.0 }), 1000).unwrap();
        assert!(avg.mean.abs() < 1e-15);
        // sample sd sqrt(1000/999), divided by sqrt(1000)
        let expected = (1000.0f64 / 999.0).sqrt() / 1000f64.sqrt();
        assert!((avg.standard_error - expected).abs() < 1e-15);
        assert!((avg.standard_error - 0.0316).abs() < 1e-4);
    }

    #[test]
    fn estimator_errors_carry_the_index() {
        let err = disorder_average(
            |i| if i == 7 || i == 9 { Err(Error::InvalidArgument("boom".into())) } else { Ok(1.0f64) },
            20,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Estimator { index: 7, .. }));
        assert!(disorder_average(|_| Ok(1.0f64), 1).is_err());
    }

    #[test]
    fn concurrent_matches_sequential() {
        let g = build_lattice(LatticeKind::Square2d, &[4, 4], true).unwrap();
        let spec = DisorderSpec::new(0.3, 1.0, 77).unwrap();
        let est = |r: u64| Ok(sample_couplings::<f64>(&g, &spec, r).get(0, 1).sin());
        let par = disorder_average(est, 500).unwrap();
        let seq: Vec<f64> = (0..500).map(|r| est(r).unwrap()).collect();
        let mean = seq.iter().sum::<f64>() / 500.0;
        assert!((par.mean - mean).abs() < 1e-12);
        let series = disorder_average_series(|r| Ok(vec![est(r)?, 1.0]), 500).unwrap();
        assert_eq!(series[0].mean, par.mean);
        assert_eq!(series[1].standard_error, 0.0);
    }
}
