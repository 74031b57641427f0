//! Hopfield/Little attractor networks over ±1 neurons.
//!
//! Energy convention: `E(S) = -(1/2) Σ_{i≠j} J_ij S_i S_j = -Σ_{i<j} J_ij S_i S_j`.
//!
//! Recall runs zero-temperature asynchronous dynamics: sweeps visit the
//! neurons in a seeded random permutation and set `S_i ← sign(h_i)` with
//! `h_i = Σ_j J_ij S_j`. A local field within the noise floor of
//! `Σ_j |J_ij|` is treated as zero: recall keeps the current spin and
//! [`stability_check`] counts the neuron as unstable. Only the signs of the
//! local fields matter, so couplings may be rescaled freely.

use std::collections::BTreeMap;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::couplings::CouplingMatrix;
use crate::error::{Error, Result};
use crate::rng::{child_seed, namespace, substream};
use crate::scalar::Scalar;

pub const DEFAULT_SWEEP_BUDGET: usize = 1000;

/// Configuration of `N` ±1 neurons.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct NetworkState(Vec<i8>);

impl TryFrom<Vec<i8>> for NetworkState {
    type Error = Error;

    fn try_from(spins: Vec<i8>) -> Result<Self> {
        Self::new(spins)
    }
}

impl From<NetworkState> for Vec<i8> {
    fn from(s: NetworkState) -> Self {
        s.0
    }
}

impl NetworkState {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument(format!("spin value {bad} is not ±1")));
        }
        Ok(Self(spins))
    }

    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        Self((0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect())
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Global spin flip `S → -S`.
    pub fn reversed(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    /// Number of differing neurons.
    pub fn hamming(&self, other: &Self) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    /// Compact `+`/`-` rendering.
    pub fn to_signs(&self) -> String {
        self.0.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
    }
}

/// `p` stored patterns over `N` neurons. Patterns are kept as given, so a
/// repeated pattern is weighted by its multiplicity in the Hebbian sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSet {
    n: usize,
    patterns: Vec<NetworkState>,
}

impl PatternSet {
    pub fn new(patterns: Vec<Vec<i8>>) -> Result<Self> {
        let n = patterns.first().map_or(0, Vec::len);
        let patterns = patterns
            .into_iter()
            .map(|p| {
                if p.len() != n {
                    return Err(Error::Dimension { expected: n, got: p.len() });
                }
                NetworkState::new(p)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, patterns })
    }

    /// `p` uniformly random patterns drawn from the `PATTERNS` substream.
    pub fn random(p: usize, n: usize, seed: u64) -> Self {
        let mut rng = substream(seed, namespace::PATTERNS, 0);
        Self { n, patterns: (0..p).map(|_| NetworkState::random(n, &mut rng)).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn pattern(&self, mu: usize) -> &[i8] {
        self.patterns[mu].spins()
    }

    pub fn states(&self) -> &[NetworkState] {
        &self.patterns
    }

    pub fn has_duplicates(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        !self.patterns.iter().all(|p| seen.insert(p))
    }
}

/// Hebbian rule `J_ij = (1/N) Σ_μ ξ_i^μ ξ_j^μ`, `i ≠ j`.
pub fn hebbian_couplings<T: Scalar>(patterns: &PatternSet) -> CouplingMatrix<T> {
    let n = patterns.n();
    let inv_n = T::one() / T::from_usize_lossy(n.max(1));
    CouplingMatrix::from_pair_fn(n, |i, j| {
        let overlap: i64 = patterns.states().iter().map(|p| (p.0[i] * p.0[j]) as i64).sum();
        T::lit(overlap as f64) * inv_n
    })
}

fn check_dims<T: Scalar>(couplings: &CouplingMatrix<T>, state: &NetworkState) -> Result<()> {
    if couplings.n() != state.len() {
        return Err(Error::Dimension { expected: couplings.n(), got: state.len() });
    }
    Ok(())
}

pub fn energy<T: Scalar>(couplings: &CouplingMatrix<T>, state: &NetworkState) -> Result<T> {
    check_dims(couplings, state)?;
    let s = state.spins();
    Ok(couplings
        .pairs()
        .fold(T::zero(), |e, (i, j, v)| e - v * T::lit((s[i] * s[j]) as f64)))
}

#[inline]
fn field_is_zero<T: Scalar>(couplings: &CouplingMatrix<T>, i: usize, field: T) -> bool {
    field.abs() <= T::noise_floor() * couplings.row_abs_sum(i)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Recall<T> {
    pub fixed_point: NetworkState,
    /// Sweeps performed, including the final sweep without flips.
    pub sweeps: usize,
    /// Energy at the start and after every accepted flip.
    pub trajectory_energies: Vec<T>,
}

pub fn recall<T: Scalar>(
    couplings: &CouplingMatrix<T>,
    start: &NetworkState,
    schedule_seed: u64,
) -> Result<Recall<T>> {
    recall_with_budget(couplings, start, schedule_seed, DEFAULT_SWEEP_BUDGET)
}

pub fn recall_with_budget<T: Scalar>(
    couplings: &CouplingMatrix<T>,
    start: &NetworkState,
    schedule_seed: u64,
    max_sweeps: usize,
) -> Result<Recall<T>> {
    check_dims(couplings, start)?;
    let n = start.len();
    let mut rng = substream(schedule_seed, namespace::RECALL, 0);
    let mut state = start.clone();
    let mut e = energy(couplings, &state)?;
    let mut energies = vec![e];
    let mut order: Vec<usize> = (0..n).collect();
    for sweep in 1..=max_sweeps {
        order.shuffle(&mut rng);
        let mut flipped = false;
        for &i in &order {
            let h = couplings.local_field(i, state.spins());
            if field_is_zero(couplings, i, h) {
                continue;
            }
            let si = T::lit(state.0[i] as f64);
            if si * h < T::zero() {
                state.flip(i);
                // ΔE = 2 S_i h_i with the pre-flip spin
                e += T::lit(2.0) * si * h;
                energies.push(e);
                flipped = true;
            }
        }
        if !flipped {
            return Ok(Recall { fixed_point: state, sweeps: sweep, trajectory_energies: energies });
        }
    }
    Err(Error::RecallBudget(max_sweeps))
}

/// Neurons whose local field does not strictly align with their spin.
pub fn unstable_sites<T: Scalar>(couplings: &CouplingMatrix<T>, pattern: &NetworkState) -> Result<Vec<usize>> {
    check_dims(couplings, pattern)?;
    Ok((0..pattern.len())
        .filter(|&i| {
            let h = couplings.local_field(i, pattern.spins());
            field_is_zero(couplings, i, h) || T::lit(pattern.0[i] as f64) * h <= T::zero()
        })
        .collect())
}

/// True iff no single spin flip lowers the energy (strict alignment everywhere).
pub fn stability_check<T: Scalar>(couplings: &CouplingMatrix<T>, pattern: &NetworkState) -> Result<bool> {
    Ok(unstable_sites(couplings, pattern)?.is_empty())
}

/// Fraction of `trials` in which recall from `pattern` with `flips` random
/// distinct spins flipped returns exactly `pattern`.
///
/// Trial `r` draws its flips from substream `(seed, BASIN, r)` and runs recall
/// with a schedule seed derived from `(seed, RECALL, r)`.
pub fn basin_estimate<T: Scalar>(
    couplings: &CouplingMatrix<T>,
    pattern: &NetworkState,
    flips: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    check_dims(couplings, pattern)?;
    if flips > pattern.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot flip {flips} of {} spins",
            pattern.len()
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("basin estimate needs at least one trial".into()));
    }
    let hits = (0..trials)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, namespace::BASIN, r as u64);
            let mut start = pattern.clone();
            for i in index::sample(&mut rng, pattern.len(), flips) {
                start.flip(i);
            }
            let out = recall(couplings, &start, child_seed(seed, namespace::RECALL, r as u64))?;
            Ok(usize::from(out.fixed_point == *pattern))
        })
        .collect::<Result<Vec<usize>>>()?;
    Ok(hits.iter().sum::<usize>() as f64 / trials as f64)
}

/// Recall from every single-spin-flip neighbor of `pattern`; true iff each
/// returns to the pattern.
pub fn recovers_from_every_single_flip<T: Scalar>(
    couplings: &CouplingMatrix<T>,
    pattern: &NetworkState,
    seed: u64,
) -> Result<bool> {
    for i in 0..pattern.len() {
        let mut start = pattern.clone();
        start.flip(i);
        if recall(couplings, &start, child_seed(seed, namespace::RECALL, i as u64))?.fixed_point != *pattern {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditOptions {
    pub basin_flips: Vec<usize>,
    pub basin_trials: usize,
    pub random_starts: usize,
    pub seed: u64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self { basin_flips: vec![1, 2, 3], basin_trials: 100, random_starts: 200, seed: 0 }
    }
}

/// Where recall from a state ends up, relative to the candidate list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "lowercase")]
pub enum Attractor {
    Candidate(usize),
    Reverse(usize),
    Spurious,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateReport {
    pub index: usize,
    pub pattern: String,
    pub stable: bool,
    pub unstable_sites: Vec<usize>,
    /// `(flips, recovery fraction)`.
    pub basin: Vec<(usize, f64)>,
    pub attractor: Attractor,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpuriousState {
    pub state: String,
    pub hits: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapacityReport {
    pub n: usize,
    pub candidates: Vec<CandidateReport>,
    /// Distinct stable states among the candidates and their reverses.
    pub stable_states: Vec<String>,
    pub stable_count: usize,
    pub spurious: Vec<SpuriousState>,
    pub options: AuditOptions,
}

impl CapacityReport {
    /// Human-readable summary table.
    pub fn table(&self) -> String {
        let mut out = String::from("idx  stable  attractor      basin(k)                pattern\n");
        for c in &self.candidates {
            let basin: Vec<String> = c.basin.iter().map(|(k, f)| format!("{k}:{f:.2}")).collect();
            let attr = match c.attractor {
                Attractor::Candidate(i) => format!("candidate {i}"),
                Attractor::Reverse(i) => format!("reverse {i}"),
                Attractor::Spurious => "spurious".to_string(),
            };
            out.push_str(&format!(
                "{:<4} {:<7} {:<14} {:<23} {}\n",
                c.index,
                c.stable,
                attr,
                basin.join(" "),
                c.pattern
            ));
        }
        out.push_str(&format!(
            "stable states (incl. reverses): {}\nspurious attractors: {}\n",
            self.stable_count,
            self.spurious.len()
        ));
        out
    }
}

fn classify(state: &NetworkState, candidates: &PatternSet) -> Attractor {
    let reversed = state.reversed();
    if let Some(i) = candidates.states().iter().position(|c| c == state) {
        Attractor::Candidate(i)
    } else if let Some(i) = candidates.states().iter().position(|c| *c == reversed) {
        Attractor::Reverse(i)
    } else {
        Attractor::Spurious
    }
}

/// Stability, basins and attractors of each candidate pattern, plus a tally of
/// spurious attractors reached from random starts.
pub fn capacity_audit<T: Scalar>(
    couplings: &CouplingMatrix<T>,
    candidates: &PatternSet,
    options: &AuditOptions,
) -> Result<CapacityReport> {
    let n = couplings.n();
    if !candidates.is_empty() && candidates.n() != n {
        return Err(Error::Dimension { expected: n, got: candidates.n() });
    }
    let mut reports = Vec::with_capacity(candidates.len());
    let mut stable = std::collections::BTreeSet::new();
    for (idx, pattern) in candidates.states().iter().enumerate() {
        let unstable = unstable_sites(couplings, pattern)?;
        let is_stable = unstable.is_empty();
        if is_stable {
            stable.insert(pattern.clone());
            stable.insert(pattern.reversed());
        }
        let pattern_seed = child_seed(options.seed, namespace::BASIN, idx as u64);
        let basin = options
            .basin_flips
            .iter()
            .filter(|&&k| k <= n)
            .map(|&k| {
                let seed = child_seed(pattern_seed, namespace::BASIN, k as u64);
                Ok((k, basin_estimate(couplings, pattern, k, options.basin_trials, seed)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let end = recall(couplings, pattern, pattern_seed)?.fixed_point;
        reports.push(CandidateReport {
            index: idx,
            pattern: pattern.to_signs(),
            stable: is_stable,
            unstable_sites: unstable,
            basin,
            attractor: classify(&end, candidates),
        });
    }

    let ends = (0..options.random_starts)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(options.seed, namespace::SPURIOUS, r as u64);
            let start = NetworkState::random(n, &mut rng);
            recall(couplings, &start, child_seed(options.seed, namespace::RECALL, r as u64))
                .map(|out| out.fixed_point)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut spurious: BTreeMap<NetworkState, usize> = BTreeMap::new();
    for end in ends {
        if classify(&end, candidates) == Attractor::Spurious {
            *spurious.entry(end).or_default() += 1;
        }
    }

    Ok(CapacityReport {
        n,
        candidates: reports,
        stable_count: stable.len(),
        stable_states: stable.iter().map(NetworkState::to_signs).collect(),
        spurious: spurious
            .into_iter()
            .map(|(s, hits)| SpuriousState { state: s.to_signs(), hits })
            .collect(),
        options: options.clone(),
    })
}
