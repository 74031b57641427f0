//! Entanglement dynamics of the trapped-ion neural network.
//!
//! The ion chain supplies long-range couplings through its normal modes; the
//! network Hamiltonian `-(1/2) Σ_{i≠j} J_ij σ_i σ_j + B' Σ_i σ_i` is quenched
//! from `|+⟩^⊗N` and the log-negativity of a chosen pair is tracked in time.
//! Collapses and revivals of that series are located by a simple threshold
//! rule, see [`detect_revivals`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{adapt_nn_hamiltonian, subset_rdm_closed_form};
use crate::entanglement::{log_negativity, Bipartition};
use crate::error::{Error, Result};
use crate::ion_chain::{equilibrium_positions, mode_couplings, normal_modes, ModePolicy, TrapSpec};
use crate::couplings::CouplingMatrix;
use crate::scalar::Scalar;

pub const DEFAULT_COLLAPSE_THRESHOLD: f64 = 0.01;
pub const DEFAULT_REVIVAL_FRACTION: f64 = 0.5;
pub const DEFAULT_GRID_POINTS: usize = 400;
/// Span of the default grid in units of `1 / max|J_ij|`.
pub const DEFAULT_GRID_SPAN: f64 = 20.0;
/// Shortest below-threshold run that counts as a collapse.
pub const MIN_COLLAPSE_POINTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Detection<T> {
    /// `(t_start, t_end)` of each collapse, both grid points below threshold.
    pub collapses: Vec<(T, T)>,
    /// First time after each collapse at which the series recovers.
    pub revivals: Vec<T>,
}

/// Locates collapses and revivals in a sampled series.
///
/// A collapse is a maximal run of at least three consecutive points below
/// `collapse_threshold`. A run at the start of the series is the initial
/// build-up, not a collapse, unless the series never reaches the threshold at
/// all. After each collapse, the revival is the first later point whose value
/// reaches `revival_fraction` times the largest value seen before the collapse
/// began.
pub fn detect_revivals<T: Scalar>(
    times: &[T],
    series: &[T],
    collapse_threshold: T,
    revival_fraction: T,
) -> Result<Detection<T>> {
    if series.is_empty() || times.len() != series.len() {
        return Err(Error::InvalidArgument(format!(
            "need a nonempty series with one time per value ({} times, {} values)",
            times.len(),
            series.len()
        )));
    }
    if !(collapse_threshold > T::zero()) || !(revival_fraction > T::zero() && revival_fraction <= T::one()) {
        return Err(Error::InvalidArgument(
            "collapse threshold must be positive and revival fraction in (0, 1]".into(),
        ));
    }
    let below: Vec<bool> = series.iter().map(|&v| v < collapse_threshold).collect();
    let mut runs = Vec::new();
    let mut i = 0;
    while i < below.len() {
        if below[i] {
            let start = i;
            while i < below.len() && below[i] {
                i += 1;
            }
            runs.push((start, i - 1));
        } else {
            i += 1;
        }
    }
    let never_rises = below.iter().all(|&b| b);
    let mut out = Detection { collapses: Vec::new(), revivals: Vec::new() };
    for (start, end) in runs {
        if end + 1 - start < MIN_COLLAPSE_POINTS || (start == 0 && !never_rises) {
            continue;
        }
        out.collapses.push((times[start], times[end]));
        let peak = series[..start].iter().fold(T::zero(), |m, &v| m.max(v));
        let target = revival_fraction * peak;
        if let Some(r) = (end + 1..series.len()).find(|&r| series[r] >= target) {
            let t = times[r];
            if out.revivals.last() != Some(&t) {
                out.revivals.push(t);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct RevivalReport<T> {
    pub n_ions: usize,
    pub pair: (usize, usize),
    pub bprime: T,
    /// `1 / max|J_ij|`: multiply by this to turn dimensionless `J t` into time.
    pub time_scale: T,
    pub time_grid: Vec<T>,
    pub eln_series: Vec<T>,
    pub collapse_threshold: T,
    pub revival_fraction: T,
    pub collapses: Vec<(T, T)>,
    pub revivals: Vec<T>,
}

/// Ion-derived couplings `J_ij` for `trap` (force and mass taken from the trap).
pub fn ion_couplings<T: Scalar>(trap: &TrapSpec<T>, policy: ModePolicy) -> Result<CouplingMatrix<T>> {
    let positions = equilibrium_positions(trap)?;
    let spectrum = normal_modes(trap, &positions, policy)?;
    mode_couplings(&spectrum, trap.force, trap.mass)
}

/// `points` evenly spaced times over `[0, span / max|J|]`.
pub fn default_time_grid<T: Scalar>(couplings: &CouplingMatrix<T>, span: T, points: usize) -> Result<Vec<T>> {
    let jmax = couplings.max_abs();
    if !(jmax > T::zero()) || points < 2 {
        return Err(Error::InvalidArgument("time grid needs nonzero couplings and at least 2 points".into()));
    }
    let dt = span / jmax / T::from_usize_lossy(points - 1);
    Ok((0..points).map(|k| dt * T::from_usize_lossy(k)).collect())
}

/// Log-negativity of `pair` at each time of `grid` for given couplings.
pub fn eln_series<T: Scalar>(
    couplings: &CouplingMatrix<T>,
    pair: (usize, usize),
    bprime: T,
    grid: &[T],
) -> Result<Vec<T>> {
    let model = adapt_nn_hamiltonian(couplings, bprime);
    let subset = [pair.0, pair.1];
    let cut = Bipartition::first_vs_rest(&subset)?;
    grid.par_iter()
        .map(|&t| log_negativity(&subset_rdm_closed_form(&model, &subset, t)?, &cut))
        .collect()
}

/// Full pipeline: trap → couplings → pair series → collapse/revival detection.
///
/// Pass `None` for `grid` to use [`default_time_grid`] with its default span
/// and point count.
pub fn pair_entanglement_series<T: Scalar>(
    trap: &TrapSpec<T>,
    pair: (usize, usize),
    bprime: T,
    grid: Option<Vec<T>>,
    policy: ModePolicy,
) -> Result<RevivalReport<T>> {
    if pair.0 == pair.1 || pair.0 >= trap.n_ions || pair.1 >= trap.n_ions {
        return Err(Error::InvalidSubset(format!(
            "pair ({}, {}) is not two distinct ions of {}",
            pair.0, pair.1, trap.n_ions
        )));
    }
    let couplings = ion_couplings(trap, policy)?;
    let grid = match grid {
        Some(g) => g,
        None => default_time_grid(&couplings, T::lit(DEFAULT_GRID_SPAN), DEFAULT_GRID_POINTS)?,
    };
    let series = eln_series(&couplings, pair, bprime, &grid)?;
    let threshold = T::lit(DEFAULT_COLLAPSE_THRESHOLD);
    let fraction = T::lit(DEFAULT_REVIVAL_FRACTION);
    let detection = detect_revivals(&grid, &series, threshold, fraction)?;
    Ok(RevivalReport {
        n_ions: trap.n_ions,
        pair,
        bprime,
        time_scale: T::one() / couplings.max_abs(),
        time_grid: grid,
        eln_series: series,
        collapse_threshold: threshold,
        revival_fraction: fraction,
        collapses: detection.collapses,
        revivals: detection.revivals,
    })
}

/// End-pair reports for a range of chain lengths in the same trap shape.
pub fn ion_number_sweep<T: Scalar>(
    sizes: &[usize],
    amplitude: T,
    exponent: T,
    policy: ModePolicy,
) -> Result<Vec<RevivalReport<T>>> {
    sizes
        .iter()
        .map(|&n| {
            let trap = TrapSpec::new(n, amplitude, exponent)?;
            pair_entanglement_series(&trap, (0, n - 1), T::zero(), None, policy)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::subset_rdm_statevector;

    fn grid(n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|k| k as f64 * dt).collect()
    }

    #[test]
    fn monotone_series_has_no_events() {
        let t = grid(50, 0.1);
        let s: Vec<f64> = t.iter().map(|x| 0.02 + x).collect();
        let d = detect_revivals(&t, &s, 0.01, 0.5).unwrap();
        assert!(d.collapses.is_empty() && d.revivals.is_empty());
        // a rising start is build-up, not a collapse
        let s: Vec<f64> = t.iter().map(|x| x * x).collect();
        let d = detect_revivals(&t, &s, 0.01, 0.5).unwrap();
        assert!(d.collapses.is_empty());
    }

    #[test]
    fn zero_series_is_one_collapse() {
        let t = grid(20, 1.0);
        let d = detect_revivals(&t, &[0.0; 20], 0.01, 0.5).unwrap();
        assert_eq!(d.collapses, vec![(0.0, 19.0)]);
        assert!(d.revivals.is_empty());
    }

    #[test]
    fn abs_cos_collapses_at_its_zeros() {
        use std::f64::consts::PI;
        let dt = 1e-3;
        let t = grid(10_000, dt);
        let s: Vec<f64> = t.iter().map(|x| x.cos().abs()).collect();
        let d = detect_revivals(&t, &s, 0.01, 0.5).unwrap();
        // zeros at π/2 + kπ below 10
        let zeros: Vec<f64> = (0..3).map(|k| PI / 2.0 + k as f64 * PI).collect();
        assert_eq!(d.collapses.len(), zeros.len());
        assert_eq!(d.revivals.len(), zeros.len());
        for ((&(a, b), &r), &z) in d.collapses.iter().zip(&d.revivals).zip(&zeros) {
            assert!(a < z && z < b && b - a < 0.03);
            // |cos(z + x)| = |sin x| is back at 1/2 when x = π/6
            assert!((r - (z + PI / 6.0)).abs() < 2.0 * dt, "{r} vs {}", z + PI / 6.0);
            assert!(r > b);
        }
    }

    #[test]
    fn short_dips_are_ignored() {
        let t = grid(8, 1.0);
        let s = [0.0, 0.5, 0.005, 0.005, 0.5, 0.005, 0.005, 0.005];
        let d = detect_revivals(&t, &s, 0.01, 0.5).unwrap();
        assert_eq!(d.collapses, vec![(5.0, 7.0)]);
        assert!(d.revivals.is_empty());
    }

    #[test]
    fn bad_arguments() {
        assert!(detect_revivals::<f64>(&[], &[], 0.01, 0.5).is_err());
        assert!(detect_revivals(&[0.0], &[0.0], 0.0, 0.5).is_err());
        assert!(detect_revivals(&[0.0], &[0.0], 0.01, 1.5).is_err());
        let trap = TrapSpec::<f64>::harmonic(4);
        assert!(pair_entanglement_series(&trap, (1, 1), 0.0, None, ModePolicy::RequireMinimum).is_err());
        assert!(pair_entanglement_series(&trap, (0, 4), 0.0, None, ModePolicy::RequireMinimum).is_err());
    }

    #[test]
    fn starts_unentangled_and_ignores_bprime() {
        let trap = TrapSpec::<f64>::harmonic(5);
        let base = pair_entanglement_series(&trap, (0, 1), 0.0, None, ModePolicy::RequireMinimum).unwrap();
        assert_eq!(base.eln_series[0], 0.0);
        assert_eq!(base.time_grid.len(), DEFAULT_GRID_POINTS);
        for bp in [0.3, -2.0, 7.5] {
            let other = pair_entanglement_series(&trap, (0, 1), bp, None, ModePolicy::RequireMinimum).unwrap();
            for (a, b) in base.eln_series.iter().zip(&other.eln_series) {
                assert!((a - b).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn matches_statevector_for_small_chains() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let n = rng.random_range(2..=10usize);
            // p = 1 has a flat center-of-mass direction and is rejected as ill-conditioned
            let p = [0.5, 1.5, 2.0, 3.0][rng.random_range(0..4)];
            let trap = TrapSpec::new(n, rng.random_range(0.2..2.0), p).unwrap();
            let j = match ion_couplings(&trap, ModePolicy::AllowSaddle) {
                Ok(j) => j,
                // odd chains in cusp traps have no finite curvature at the center
                Err(Error::SingularCurvature(_)) => continue,
                Err(e) => panic!("{e}"),
            };
            let i = rng.random_range(0..n);
            let k = (i + rng.random_range(1..n)) % n;
            let t = rng.random_range(0.0..10.0) / j.max_abs();
            let model = adapt_nn_hamiltonian(&j, rng.random_range(-1.0..1.0));
            let a = subset_rdm_closed_form(&model, &[i, k], t).unwrap();
            let b = subset_rdm_statevector(&model, &[i, k], t).unwrap();
            assert!(a.max_abs_diff(&b) <= 1e-10);
        }
    }

    #[test]
    fn only_coupling_times_time_matters() {
        let trap = TrapSpec::<f64>::harmonic(5);
        let j = ion_couplings(&trap, ModePolicy::RequireMinimum).unwrap();
        let t = default_time_grid(&j, 20.0, 60).unwrap();
        let a = eln_series(&j, (1, 3), 0.0, &t).unwrap();
        // doubling F quadruples J; compensate with t/4
        let j4 = ion_couplings(&trap.with_force(2.0), ModePolicy::RequireMinimum).unwrap();
        let t4: Vec<f64> = t.iter().map(|x| x / 4.0).collect();
        let b = eln_series(&j4, (1, 3), 0.0, &t4).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn end_pair_of_six_ions_collapses_and_revives() {
        let report = pair_entanglement_series(&TrapSpec::<f64>::harmonic(6), (0, 5), 0.0, None, ModePolicy::RequireMinimum).unwrap();
        assert!(!report.collapses.is_empty());
        assert!(!report.revivals.is_empty());
        let sweep = ion_number_sweep(&[3, 4], 0.5, 2.0, ModePolicy::RequireMinimum).unwrap();
        assert_eq!(sweep.len(), 2);
        assert_eq!(sweep[1].pair, (0, 3));
    }
}
