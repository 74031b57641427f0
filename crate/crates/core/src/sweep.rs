//! Disorder-averaged nearest-neighbor entanglement after a quench of the
//! Edwards-Anderson model, and its dependence on the lattice coordination.
//!
//! Each realization samples Gaussian couplings on a periodic lattice and
//! evaluates the log-negativity of every bonded pair on a uniform time grid.
//! The disorder distribution is the same on every bond of a periodic lattice,
//! so the bond average is an unbiased per-realization estimate of the single
//! pair quantity with much lower variance. Realizations are evaluated in
//! fixed-size chunks concurrently and reduced in index order.

use nalgebra::{Complex, DMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disorder::{sample_couplings, summarize, Average, DisorderSpec, DEFAULT_REALIZATIONS};
use crate::dynamics::{ClosedFormKernel, IsingModel, SubsetDensityMatrix};
use crate::entanglement::{log_negativity, min_partial_transpose_eigenvalue, Bipartition};
use crate::error::{Error, Result};
use crate::lattice::{build_lattice, LatticeGraph, LatticeKind};

const CHUNK: u64 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpinGlassConfig {
    pub lattice: LatticeKind,
    /// Lattice extents; the kind's default when absent.
    pub dims: Option<Vec<usize>>,
    pub periodic: bool,
    pub jbar: f64,
    pub delta: f64,
    pub seed: u64,
    pub realizations: u64,
    pub t_max: f64,
    /// Grid points over `[0, t_max]`, both ends included.
    pub points: usize,
    /// Uniform longitudinal field `h`.
    pub field: f64,
    /// Average over the first `max_bonds` edges only.
    pub max_bonds: Option<usize>,
    /// Check trace, Hermiticity and positivity of every computed pair state.
    pub validate_invariants: bool,
    /// Accumulate the realization-averaged state of the first bond.
    pub track_averaged_state: bool,
}

impl Default for SpinGlassConfig {
    fn default() -> Self {
        Self {
            lattice: LatticeKind::Square2d,
            dims: None,
            periodic: true,
            jbar: 0.0,
            delta: 1.0,
            seed: 0,
            realizations: DEFAULT_REALIZATIONS,
            t_max: 10.0,
            points: 401,
            field: 0.0,
            max_bonds: None,
            validate_invariants: false,
            track_averaged_state: true,
        }
    }
}

impl SpinGlassConfig {
    pub fn disorder(&self) -> Result<DisorderSpec> {
        DisorderSpec::new(self.jbar, self.delta, self.seed)
    }

    pub fn graph(&self) -> Result<LatticeGraph> {
        let dims = self.dims.clone().unwrap_or_else(|| self.lattice.default_dims());
        build_lattice(self.lattice, &dims, self.periodic)
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        if self.points < 2 || !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "time grid needs t_max > 0 and at least 2 points (got {} over {})",
                self.points, self.t_max
            )));
        }
        let dt = self.t_max / (self.points - 1) as f64;
        Ok((0..self.points).map(|k| k as f64 * dt).collect())
    }

    pub fn validate(&self) -> Result<()> {
        self.disorder()?;
        self.graph()?;
        self.times()?;
        if self.realizations < 2 {
            return Err(Error::InvalidArgument(format!(
                "realizations must be at least 2, got {}",
                self.realizations
            )));
        }
        if self.max_bonds == Some(0) {
            return Err(Error::InvalidArgument("max_bonds must be positive".into()));
        }
        if !self.field.is_finite() {
            return Err(Error::InvalidArgument("field must be finite".into()));
        }
        Ok(())
    }
}

/// Worst case over every pair state checked during a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantSummary {
    pub checked: u64,
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl InvariantSummary {
    fn empty() -> Self {
        Self { checked: 0, max_trace_error: 0.0, max_hermiticity_error: 0.0, min_eigenvalue: f64::INFINITY }
    }

    fn record(&mut self, rdm: &SubsetDensityMatrix<f64>) -> Result<()> {
        let r = rdm.check_invariants()?;
        self.checked += 1;
        self.max_trace_error = self.max_trace_error.max(r.trace_error);
        self.max_hermiticity_error = self.max_hermiticity_error.max(r.hermiticity_error);
        self.min_eigenvalue = self.min_eigenvalue.min(r.min_eigenvalue);
        Ok(())
    }

    fn merge(&mut self, other: &Self) {
        self.checked += other.checked;
        self.max_trace_error = self.max_trace_error.max(other.max_trace_error);
        self.max_hermiticity_error = self.max_hermiticity_error.max(other.max_hermiticity_error);
        self.min_eigenvalue = self.min_eigenvalue.min(other.min_eigenvalue);
    }

    pub fn holds(&self) -> bool {
        self.max_trace_error <= 1e-12 && self.max_hermiticity_error <= 1e-12 && self.min_eigenvalue >= -1e-10
    }
}

/// The realization-averaged state of one bond, per grid time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedPair {
    pub pair: (usize, usize),
    pub eln: Vec<f64>,
    pub min_pt_eigenvalue: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SpinGlassConfig,
    pub sites: usize,
    pub bonds_used: usize,
    pub exterior_neighbors: usize,
    pub times: Vec<f64>,
    /// Disorder-averaged, bond-averaged log-negativity.
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Over realizations of the time average across the final quarter of the grid.
    pub plateau: Average<f64>,
    /// Standard deviation of `mean` across the final quarter of the grid.
    pub final_quartile_sd: f64,
    pub averaged_pair: Option<AveragedPair>,
    pub invariants: Option<InvariantSummary>,
}

impl SweepResult {
    /// Indices of the final quarter of the grid (`t ≥ 3 t_max / 4`).
    pub fn final_quartile(&self) -> std::ops::Range<usize> {
        final_quartile(&self.times)
    }

    pub fn maxima(&self) -> Vec<(f64, f64)> {
        oscillation_maxima(&self.times, &self.mean, &self.stderr)
    }
}

fn final_quartile(times: &[f64]) -> std::ops::Range<usize> {
    let cut = 0.75 * times.last().copied().unwrap_or(0.0);
    let start = times.iter().position(|&t| t >= cut - 1e-12 * cut.abs()).unwrap_or(times.len());
    start..times.len()
}

struct Chunk {
    series: Vec<Vec<f64>>,
    state_sum: Option<Vec<DMatrix<Complex<f64>>>>,
    invariants: InvariantSummary,
}

fn run_chunk(
    config: &SpinGlassConfig,
    graph: &LatticeGraph,
    spec: &DisorderSpec,
    bonds: &[(usize, usize)],
    times: &[f64],
    range: std::ops::Range<u64>,
) -> Result<Chunk> {
    let mut chunk = Chunk {
        series: Vec::with_capacity((range.end - range.start) as usize),
        state_sum: config
            .track_averaged_state
            .then(|| vec![DMatrix::from_element(4, 4, Complex::new(0.0, 0.0)); times.len()]),
        invariants: InvariantSummary::empty(),
    };
    let inv_bonds = 1.0 / bonds.len() as f64;
    for index in range {
        let model = IsingModel::new(sample_couplings::<f64>(graph, spec, index), config.field);
        let mut run = || -> Result<Vec<f64>> {
            let kernels = bonds
                .iter()
                .map(|&(i, j)| Ok((ClosedFormKernel::new(&model, &[i, j])?, Bipartition::new(vec![i], vec![j])?)))
                .collect::<Result<Vec<_>>>()?;
            let mut series = Vec::with_capacity(times.len());
            for (k, &t) in times.iter().enumerate() {
                let mut acc = 0.0;
                for (b, (kernel, cut)) in kernels.iter().enumerate() {
                    let rdm = kernel.rdm(t)?;
                    if config.validate_invariants {
                        chunk.invariants.record(&rdm)?;
                    }
                    if b == 0 {
                        if let Some(sum) = chunk.state_sum.as_mut() {
                            sum[k] += rdm.entries();
                        }
                    }
                    acc += log_negativity(&rdm, cut)?;
                }
                series.push(acc * inv_bonds);
            }
            Ok(series)
        };
        let series = run().map_err(|e| Error::Estimator { index, source: Box::new(e) })?;
        chunk.series.push(series);
    }
    Ok(chunk)
}

/// Disorder-averaged nearest-neighbor log-negativity on a time grid.
pub fn run_spin_glass_sweep(config: &SpinGlassConfig) -> Result<SweepResult> {
    config.validate()?;
    let graph = config.graph()?;
    let spec = config.disorder()?;
    let times = config.times()?;
    let limit = config.max_bonds.unwrap_or(usize::MAX).min(graph.edges().len());
    let bonds = &graph.edges()[..limit];
    if bonds.is_empty() {
        return Err(Error::InvalidLattice("lattice has no bonds".into()));
    }
    let (i0, j0) = bonds[0];
    let exterior_neighbors = graph.exterior_neighbors(i0, j0)?.len();

    let n_chunks = config.realizations.div_ceil(CHUNK);
    let chunks = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let range = c * CHUNK..((c + 1) * CHUNK).min(config.realizations);
            run_chunk(config, &graph, &spec, bonds, &times, range)
        })
        .collect::<Vec<_>>();

    let mut series = Vec::with_capacity(config.realizations as usize);
    let mut state_sum: Option<Vec<DMatrix<Complex<f64>>>> = None;
    let mut invariants = InvariantSummary::empty();
    for chunk in chunks {
        let chunk = chunk?;
        series.extend(chunk.series);
        invariants.merge(&chunk.invariants);
        if let Some(s) = chunk.state_sum {
            match state_sum.as_mut() {
                None => state_sum = Some(s),
                Some(acc) => acc.iter_mut().zip(&s).for_each(|(a, b)| *a += b),
            }
        }
    }

    let mut mean = Vec::with_capacity(times.len());
    let mut stderr = Vec::with_capacity(times.len());
    let mut column = vec![0.0; series.len()];
    for k in 0..times.len() {
        column.iter_mut().zip(&series).for_each(|(c, s)| *c = s[k]);
        let avg = summarize(&column)?;
        mean.push(avg.mean);
        stderr.push(avg.standard_error);
    }

    let fq = final_quartile(&times);
    let per_realization: Vec<f64> = series
        .iter()
        .map(|s| s[fq.clone()].iter().sum::<f64>() / fq.len() as f64)
        .collect();
    let plateau = summarize(&per_realization)?;
    let tail = &mean[fq.clone()];
    let tail_mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let final_quartile_sd = if tail.len() > 1 {
        (tail.iter().map(|v| (v - tail_mean).powi(2)).sum::<f64>() / (tail.len() - 1) as f64).sqrt()
    } else {
        0.0
    };

    let averaged_pair = match state_sum {
        None => None,
        Some(sums) => {
            let scale = Complex::new(1.0 / config.realizations as f64, 0.0);
            let cut = Bipartition::new(vec![i0], vec![j0])?;
            let mut eln = Vec::with_capacity(times.len());
            let mut min_pt = Vec::with_capacity(times.len());
            for s in sums {
                let rdm = SubsetDensityMatrix::new(vec![i0, j0], s * scale)?;
                if config.validate_invariants {
                    invariants.record(&rdm)?;
                }
                eln.push(log_negativity(&rdm, &cut)?);
                min_pt.push(min_partial_transpose_eigenvalue(&rdm, &cut)?);
            }
            Some(AveragedPair { pair: (i0, j0), eln, min_pt_eigenvalue: min_pt })
        }
    };

    Ok(SweepResult {
        config: config.clone(),
        sites: graph.sites(),
        bonds_used: bonds.len(),
        exterior_neighbors,
        times,
        mean,
        stderr,
        plateau,
        final_quartile_sd,
        averaged_pair,
        invariants: config.validate_invariants.then_some(invariants),
    })
}

/// Local maxima of `mean` that stand out from the neighboring minima by more
/// than twice their standard error.
///
/// The prominence of a maximum is its height above the higher of the two
/// lowest points reached before the series climbs above it again on either
/// side (or hits the end of the grid).
pub fn oscillation_maxima(times: &[f64], mean: &[f64], stderr: &[f64]) -> Vec<(f64, f64)> {
    let n = mean.len();
    let mut out = Vec::new();
    for i in 1..n.saturating_sub(1) {
        if !(mean[i] > mean[i - 1] && mean[i] >= mean[i + 1]) {
            continue;
        }
        let mut left_min = mean[i];
        for j in (0..i).rev() {
            if mean[j] > mean[i] {
                break;
            }
            left_min = left_min.min(mean[j]);
        }
        let mut right_min = mean[i];
        for &v in &mean[i + 1..] {
            if v > mean[i] {
                break;
            }
            right_min = right_min.min(v);
        }
        let prominence = mean[i] - left_min.max(right_min);
        if prominence > 2.0 * stderr[i] {
            out.push((times[i], mean[i]));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeighborDecayConfig {
    pub kinds: Vec<LatticeKind>,
    pub jbar: f64,
    pub delta: f64,
    pub seed: u64,
    pub realizations: u64,
    pub t_max: f64,
    pub points: usize,
    pub max_bonds: Option<usize>,
}

impl Default for NeighborDecayConfig {
    fn default() -> Self {
        Self {
            kinds: vec![LatticeKind::Chain1d, LatticeKind::Honeycomb2d, LatticeKind::Square2d, LatticeKind::Cubic3d],
            jbar: 0.0,
            delta: 1.0,
            seed: 0,
            realizations: 500,
            t_max: 10.0,
            points: 101,
            max_bonds: None,
        }
    }
}

impl NeighborDecayConfig {
    fn sweep(&self, kind: LatticeKind) -> SpinGlassConfig {
        SpinGlassConfig {
            lattice: kind,
            dims: None,
            periodic: true,
            jbar: self.jbar,
            delta: self.delta,
            seed: self.seed,
            realizations: self.realizations,
            t_max: self.t_max,
            points: self.points,
            field: 0.0,
            max_bonds: self.max_bonds,
            validate_invariants: false,
            track_averaged_state: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub kind: LatticeKind,
    pub dims: Vec<usize>,
    pub exterior_neighbors: usize,
    pub plateau: Average<f64>,
    pub log_plateau: f64,
}

/// Least-squares line `y = intercept + slope x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidArgument("linear fit needs at least two (x, y) points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("linear fit needs distinct x values".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - (intercept + slope * a)).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(LinearFit { slope, intercept, r_squared, residuals })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub config: NeighborDecayConfig,
    pub rows: Vec<DecayRow>,
    /// Fit of `ln(plateau)` against the exterior-neighbor count.
    pub fit: LinearFit,
    pub strictly_decreasing: bool,
}

/// Plateau of the averaged pair entanglement for each lattice kind, ordered
/// by exterior-neighbor count, with an exponential-decay fit.
pub fn run_neighbor_decay(config: &NeighborDecayConfig) -> Result<DecayReport> {
    if config.kinds.len() < 2 {
        return Err(Error::InvalidArgument("neighbor decay needs at least two lattice kinds".into()));
    }
    let mut rows = Vec::with_capacity(config.kinds.len());
    for &kind in &config.kinds {
        let sweep = config.sweep(kind);
        let result = run_spin_glass_sweep(&sweep)?;
        if !(result.plateau.mean > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "plateau for {kind:?} is not positive; cannot take its logarithm"
            )));
        }
        rows.push(DecayRow {
            kind,
            dims: sweep.graph()?.dims().to_vec(),
            exterior_neighbors: result.exterior_neighbors,
            plateau: result.plateau,
            log_plateau: result.plateau.mean.ln(),
        });
    }
    rows.sort_by_key(|r| r.exterior_neighbors);
    let x: Vec<f64> = rows.iter().map(|r| r.exterior_neighbors as f64).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.log_plateau).collect();
    let fit = linear_fit(&x, &y)?;
    let strictly_decreasing = rows.windows(2).all(|w| w[1].plateau.mean < w[0].plateau.mean);
    Ok(DecayReport { config: config.clone(), rows, fit, strictly_decreasing })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(jbar: f64, delta: f64) -> SpinGlassConfig {
        SpinGlassConfig {
            dims: Some(vec![4, 4]),
            jbar,
            delta,
            realizations: 20,
            points: 41,
            t_max: 4.0,
            ..SpinGlassConfig::default()
        }
    }

    #[test]
    fn uniform_couplings_give_the_closed_form_curve() {
        // Δ = 0, J̄ = 1: every bond sees coupling 1 and six exterior neighbors
        // also coupled by 1, so ρ_{01} carries cos^6(2t) and E_LN has a closed form.
        let r = run_spin_glass_sweep(&small(1.0, 0.0)).unwrap();
        assert_eq!(r.exterior_neighbors, 6);
        for (k, &t) in r.times.iter().enumerate() {
            assert!(r.stderr[k].abs() < 1e-12);
            let model = IsingModel::new(crate::couplings::CouplingMatrix::from_pair_fn(8, |a, b| {
                // the pair (0,1) plus three outside spins on each end
                if (a == 0 && b == 1) || (a == 0 && (2..5).contains(&b)) || (a == 1 && (5..8).contains(&b)) {
                    1.0
                } else {
                    0.0
                }
            }), 0.0);
            let rdm = crate::dynamics::subset_rdm_statevector(&model, &[0, 1], t).unwrap();
            let oracle = log_negativity(&rdm, &Bipartition::new(vec![0], vec![1]).unwrap()).unwrap();
            assert!((r.mean[k] - oracle).abs() < 1e-10, "t = {t}: {} vs {oracle}", r.mean[k]);
        }
    }

    #[test]
    fn deterministic_and_nonnegative() {
        let cfg = small(0.0, 1.0);
        let a = run_spin_glass_sweep(&cfg).unwrap();
        let b = run_spin_glass_sweep(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mean[0], 0.0);
        assert!(a.mean.iter().all(|&v| v >= 0.0));
        assert_eq!(a.bonds_used, 32);
        let other = run_spin_glass_sweep(&SpinGlassConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a.mean, other.mean);
    }

    #[test]
    fn averaged_state_is_no_more_entangled_than_average() {
        let cfg = SpinGlassConfig { max_bonds: Some(1), validate_invariants: true, ..small(0.0, 1.0) };
        let r = run_spin_glass_sweep(&cfg).unwrap();
        let pair = r.averaged_pair.as_ref().unwrap();
        for k in 0..r.times.len() {
            assert!(pair.eln[k] <= r.mean[k] + 1e-12);
        }
        let inv = r.invariants.unwrap();
        assert!(inv.holds());
        assert_eq!(inv.checked, 20 * 41 + 41);
    }

    #[test]
    fn single_realization_field_invariance() {
        let base = run_spin_glass_sweep(&small(0.3, 1.0)).unwrap();
        let shifted = run_spin_glass_sweep(&SpinGlassConfig { field: 2.5, ..small(0.3, 1.0) }).unwrap();
        for (a, b) in base.mean.iter().zip(&shifted.mean) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        for cfg in [
            SpinGlassConfig { realizations: 1, ..small(0.0, 1.0) },
            SpinGlassConfig { points: 1, ..small(0.0, 1.0) },
            SpinGlassConfig { delta: -1.0, ..small(0.0, 1.0) },
            SpinGlassConfig { dims: Some(vec![1, 3]), ..small(0.0, 1.0) },
            SpinGlassConfig { max_bonds: Some(0), ..small(0.0, 1.0) },
        ] {
            assert!(run_spin_glass_sweep(&cfg).is_err());
        }
    }

    #[test]
    fn maxima_need_prominence() {
        let t: Vec<f64> = (0..9).map(f64::from).collect();
        let m = [0.0, 1.0, 0.5, 0.8, 0.6, 0.61, 0.6, 0.7, 0.7];
        let se = [0.05; 9];
        assert_eq!(oscillation_maxima(&t, &m, &se), vec![(1.0, 1.0), (3.0, 0.8)]);
    }

    #[test]
    fn fit_recovers_a_line() {
        let x = [2.0, 4.0, 6.0, 10.0];
        let y: Vec<f64> = x.iter().map(|v| 1.5 - 0.7 * v).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope + 0.7).abs() < 1e-12 && (f.intercept - 1.5).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = small(0.5, 2.0);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<SpinGlassConfig>(&text).unwrap(), cfg);
        assert!(serde_json::from_str::<SpinGlassConfig>(r#"{"jbar": 1, "bogus": 2}"#).is_err());
        let partial: SpinGlassConfig = serde_json::from_str(r#"{"jbar": 5}"#).unwrap();
        assert_eq!(partial.jbar, 5.0);
        assert_eq!(partial.realizations, DEFAULT_REALIZATIONS);
    }
}
