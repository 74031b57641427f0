//! Exact quench dynamics of longitudinal Ising models from `|+⟩^⊗N`.
//!
//! Internal convention (ħ = 1):
//!
//! ```text
//! H = -Σ_{i<j} J_ij σ^z_i σ^z_j - h Σ_i σ^z_i
//! ```
//!
//! Basis ordering of a [`SubsetDensityMatrix`]: bit `k-1-u` of the row index
//! holds subset spin `u` (the first subset site is the most significant bit),
//! and a clear bit is spin `+1` (`|0⟩`, σ^z = +1).
//!
//! Because `H` is diagonal, the reduced state of a subset `S` has the closed form
//!
//! ```text
//! ρ_{a,a'} = 2^{-k} exp[i t (E_S(a) - E_S(a'))] Π_{m∉S} cos(t Σ_{u∈S} J_um (a_u - a'_u))
//! E_S(a)   = Σ_{u<v∈S} J_uv a_u a_v + h Σ_{u∈S} a_u
//! ```
//!
//! obtained by summing the phases `e^{-iE(s)t}` over the traced-out spins; the
//! spins outside `S` that couple to `S` each contribute one cosine. The
//! statevector route below evaluates the same quantity by brute force.

use nalgebra::{Complex, ComplexField, DMatrix};
use serde::{Deserialize, Serialize};

use crate::couplings::CouplingMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest subset handled by the closed form (4096 x 4096 matrices).
pub const MAX_SUBSET: usize = 12;
/// Largest system handled by the statevector oracle.
pub const MAX_STATEVECTOR_SPINS: usize = 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct IsingModel<T> {
    pub couplings: CouplingMatrix<T>,
    /// Uniform longitudinal field `h`.
    pub field: T,
}

impl<T: Scalar> IsingModel<T> {
    pub fn new(couplings: CouplingMatrix<T>, field: T) -> Self {
        Self { couplings, field }
    }

    pub fn n(&self) -> usize {
        self.couplings.n()
    }

    /// Classical energy of a ±1 configuration under the internal convention.
    pub fn energy(&self, spins: &[i8]) -> T {
        let n = self.n();
        let mut e = T::zero();
        for i in 0..n {
            let si = T::lit(spins[i] as f64);
            e -= self.field * si;
            for j in i + 1..n {
                e -= self.couplings.get(i, j) * si * T::lit(spins[j] as f64);
            }
        }
        e
    }
}

/// Maps `H = -(1/2) Σ_{i,j} J_ij σ_i σ_j + Σ_i B' σ_i` (sum over ordered pairs
/// `i ≠ j`) onto the internal convention.
///
/// Sign audit: the ordered double sum visits every unordered pair twice, so
/// `-(1/2) Σ_{i≠j}` equals `-Σ_{i<j}` and the couplings carry over unchanged.
/// The field term `+B' Σ σ_i` matches `-h Σ σ_i` for `h = -B'`.
pub fn adapt_nn_hamiltonian<T: Scalar>(couplings: &CouplingMatrix<T>, field_bprime: T) -> IsingModel<T> {
    IsingModel::new(couplings.clone(), -field_bprime)
}

#[inline]
pub(crate) fn spin_of(config: usize, pos: usize, width: usize) -> i32 {
    1 - 2 * ((config >> (width - 1 - pos)) & 1) as i32
}

pub(crate) fn validate_subset(n: usize, subset: &[usize]) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::InvalidSubset("subset is empty".into()));
    }
    if subset.len() > MAX_SUBSET {
        return Err(Error::InvalidSubset(format!(
            "{} spins exceed the {MAX_SUBSET}-spin matrix guard",
            subset.len()
        )));
    }
    for (p, &s) in subset.iter().enumerate() {
        if s >= n {
            return Err(Error::InvalidSubset(format!("site {s} out of range for {n} spins")));
        }
        if subset[..p].contains(&s) {
            return Err(Error::InvalidSubset(format!("site {s} appears twice")));
        }
    }
    Ok(())
}

/// Reduced density matrix of a spin subset. See the module docs for ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetDensityMatrix<T: Scalar> {
    subset: Vec<usize>,
    entries: DMatrix<Complex<T>>,
}

/// Deviations of a density matrix from its defining properties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl InvariantReport {
    /// Trace and Hermiticity within 1e-12, eigenvalues above -1e-10.
    pub fn holds(&self) -> bool {
        self.trace_error <= 1e-12 && self.hermiticity_error <= 1e-12 && self.min_eigenvalue >= -1e-10
    }
}

impl<T: Scalar> SubsetDensityMatrix<T> {
    pub fn new(subset: Vec<usize>, entries: DMatrix<Complex<T>>) -> Result<Self> {
        let dim = 1usize << subset.len();
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::Dimension { expected: dim, got: entries.nrows() });
        }
        Ok(Self { subset, entries })
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn k(&self) -> usize {
        self.subset.len()
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex<T>> {
        &self.entries
    }

    pub fn trace(&self) -> Complex<T> {
        self.entries.trace()
    }

    pub fn hermiticity_error(&self) -> T {
        let d = self.dim();
        let mut worst = T::zero();
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.entries[(r, c)] - self.entries[(c, r)].conj()).modulus());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        crate::entanglement::hermitian_eigenvalues(&self.entries)
    }

    pub fn check_invariants(&self) -> Result<InvariantReport> {
        let min = self.eigenvalues()?.into_iter().fold(T::max_value().unwrap(), |a, b| a.min(b));
        Ok(InvariantReport {
            trace_error: (self.trace() - Complex::new(T::one(), T::zero())).modulus().to_f64_lossy(),
            hermiticity_error: self.hermiticity_error().to_f64_lossy(),
            min_eigenvalue: min.to_f64_lossy(),
        })
    }

    /// Largest entrywise modulus of the difference between two matrices.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).modulus()))
    }
}

/// JSON export: `{k, subset, entries}` with row-major `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RdmDoc<T> {
    pub k: usize,
    pub subset: Vec<usize>,
    pub entries: Vec<[T; 2]>,
}

impl<T: Scalar> From<&SubsetDensityMatrix<T>> for RdmDoc<T> {
    fn from(rdm: &SubsetDensityMatrix<T>) -> Self {
        let d = rdm.dim();
        let entries = (0..d)
            .flat_map(|r| (0..d).map(move |c| (r, c)))
            .map(|(r, c)| {
                let z = rdm.entries[(r, c)];
                [z.re, z.im]
            })
            .collect();
        RdmDoc { k: rdm.k(), subset: rdm.subset.clone(), entries }
    }
}

impl<T: Scalar> TryFrom<RdmDoc<T>> for SubsetDensityMatrix<T> {
    type Error = Error;

    fn try_from(doc: RdmDoc<T>) -> Result<Self> {
        let d = 1usize << doc.k;
        if doc.subset.len() != doc.k || doc.entries.len() != d * d {
            return Err(Error::Dimension { expected: d * d, got: doc.entries.len() });
        }
        let m = DMatrix::from_fn(d, d, |r, c| {
            let [re, im] = doc.entries[r * d + c];
            Complex::new(re, im)
        });
        Self::new(doc.subset, m)
    }
}

#[inline]
fn unit_phase<T: Scalar>(angle: T) -> Complex<T> {
    let a = angle.wrap_phase();
    Complex::new(a.cos(), a.sin())
}

/// Time-independent part of the closed form for one subset, so that the
/// reduced state can be evaluated cheaply at many times.
#[derive(Debug, Clone)]
pub struct ClosedFormKernel<T> {
    subset: Vec<usize>,
    /// `E_S(a)` for every subset configuration.
    energies: Vec<T>,
    /// `Σ_u J_um d_u` for every outside spin `m` coupled to the subset, per
    /// difference vector `d ∈ {-2,0,2}^k` (base-3 code with digit `d/2 + 1`).
    frequencies: Vec<Vec<T>>,
    /// Difference code of each matrix entry, row-major.
    codes: Vec<usize>,
}

impl<T: Scalar> ClosedFormKernel<T> {
    pub fn new(model: &IsingModel<T>, subset: &[usize]) -> Result<Self> {
        let n = model.n();
        validate_subset(n, subset)?;
        let k = subset.len();
        let dim = 1usize << k;
        let j = &model.couplings;

        let energies = (0..dim)
            .map(|a| {
                let mut e = T::zero();
                for u in 0..k {
                    let su = T::lit(spin_of(a, u, k) as f64);
                    e += model.field * su;
                    for v in u + 1..k {
                        e += j.get(subset[u], subset[v]) * su * T::lit(spin_of(a, v, k) as f64);
                    }
                }
                e
            })
            .collect();

        let outside: Vec<Vec<T>> = (0..n)
            .filter(|m| !subset.contains(m))
            .map(|m| subset.iter().map(|&u| j.get(u, m)).collect::<Vec<T>>())
            .filter(|row| row.iter().any(|v| *v != T::zero()))
            .collect();

        let two = T::lit(2.0);
        let frequencies = (0..3usize.pow(k as u32))
            .map(|code| {
                let mut digits = vec![T::zero(); k];
                let mut c = code;
                for u in (0..k).rev() {
                    digits[u] = T::lit((c % 3) as f64 - 1.0) * two;
                    c /= 3;
                }
                outside
                    .iter()
                    .map(|row| row.iter().zip(&digits).fold(T::zero(), |s, (jm, d)| s + *jm * *d))
                    .filter(|w| *w != T::zero())
                    .collect()
            })
            .collect();

        let codes = (0..dim * dim)
            .map(|idx| {
                let (a, b) = (idx / dim, idx % dim);
                (0..k).fold(0usize, |code, u| {
                    code * 3 + ((spin_of(a, u, k) - spin_of(b, u, k)) / 2 + 1) as usize
                })
            })
            .collect();

        Ok(Self { subset: subset.to_vec(), energies, frequencies, codes })
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    /// Reduced state at time `t`.
    pub fn rdm(&self, t: T) -> Result<SubsetDensityMatrix<T>> {
        let k = self.subset.len();
        let dim = 1usize << k;
        let phases: Vec<Complex<T>> = self.energies.iter().map(|&e| unit_phase(t * e)).collect();
        let damping: Vec<T> = self
            .frequencies
            .iter()
            .map(|ws| ws.iter().fold(T::one(), |acc, &w| acc * (t * w).wrap_phase().cos()))
            .collect();
        let norm = T::lit(0.5).powi(k as i32);
        let entries = DMatrix::from_fn(dim, dim, |a, b| {
            if a == b {
                Complex::new(norm, T::zero())
            } else {
                phases[a] * phases[b].conj() * (damping[self.codes[a * dim + b]] * norm)
            }
        });
        SubsetDensityMatrix::new(self.subset.clone(), entries)
    }
}

/// Closed-form reduced density matrix of `subset` at time `t`.
///
/// Cost `O(3^k · k · M + 4^k)` where `M` is the number of outside spins
/// coupled to the subset. Use [`ClosedFormKernel`] to evaluate one subset at
/// many times.
pub fn subset_rdm_closed_form<T: Scalar>(
    model: &IsingModel<T>,
    subset: &[usize],
    t: T,
) -> Result<SubsetDensityMatrix<T>> {
    ClosedFormKernel::new(model, subset)?.rdm(t)
}

/// Brute-force reduced density matrix: evolves the full `2^N` statevector and
/// traces out everything except `subset`.
pub fn subset_rdm_statevector<T: Scalar>(
    model: &IsingModel<T>,
    subset: &[usize],
    t: T,
) -> Result<SubsetDensityMatrix<T>> {
    let n = model.n();
    if n > MAX_STATEVECTOR_SPINS {
        return Err(Error::Capacity { n, max: MAX_STATEVECTOR_SPINS });
    }
    validate_subset(n, subset)?;
    let k = subset.len();
    let rest: Vec<usize> = (0..n).filter(|s| !subset.contains(s)).collect();
    let amp = T::lit(0.5).powf(T::lit(n as f64 / 2.0));

    let mut psi = DMatrix::from_element(1 << k, 1 << rest.len(), Complex::new(T::zero(), T::zero()));
    let mut spins = vec![0i8; n];
    for s in 0..(1usize << n) {
        for (site, spin) in spins.iter_mut().enumerate() {
            *spin = spin_of(s, site, n) as i8;
        }
        let energy = model.energy(&spins);
        let row = subset.iter().fold(0usize, |acc, &site| (acc << 1) | ((s >> (n - 1 - site)) & 1));
        let col = rest.iter().fold(0usize, |acc, &site| (acc << 1) | ((s >> (n - 1 - site)) & 1));
        psi[(row, col)] = unit_phase(-energy * t) * amp;
    }
    let rho = &psi * psi.adjoint();
    SubsetDensityMatrix::new(subset.to_vec(), rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::{log_negativity, Bipartition};
    use crate::lattice::{build_lattice, LatticeKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_model(rng: &mut ChaCha8Rng, n: usize, density: f64) -> IsingModel<f64> {
        let j = CouplingMatrix::from_pair_fn(n, |_, _| {
            if rng.random::<f64>() < density {
                rng.random_range(-2.0..2.0)
            } else {
                0.0
            }
        });
        IsingModel::new(j, rng.random_range(-1.5..1.5))
    }

    fn pair_model(jv: f64, h: f64) -> IsingModel<f64> {
        IsingModel::new(CouplingMatrix::from_pair_fn(2, |_, _| jv), h)
    }

    #[test]
    fn time_zero_is_plus_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_model(&mut rng, 7, 0.6);
        let rho = subset_rdm_closed_form(&m, &[4, 1, 6], 0.0).unwrap();
        for z in rho.entries().iter() {
            assert!((z - Complex::new(0.125, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn closed_form_matches_statevector_on_random_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..40 {
            let m = random_model(&mut rng, 8, 0.7);
            let k = rng.random_range(2..=3);
            let mut subset: Vec<usize> = (0..8).collect();
            for i in 0..k {
                let s = rng.random_range(i..8);
                subset.swap(i, s);
            }
            subset.truncate(k);
            let t = rng.random_range(0.0..10.0);
            let a = subset_rdm_closed_form(&m, &subset, t).unwrap();
            let b = subset_rdm_statevector(&m, &subset, t).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-10, "subset {subset:?} t {t}");
        }
    }

    #[test]
    fn chain_of_three_against_oracle() {
        let g = build_lattice(LatticeKind::Chain1d, &[3], false).unwrap();
        let j = CouplingMatrix::from_pair_fn(3, |a, b| if g.has_edge(a, b) { 1.0 } else { 0.0 });
        let m = IsingModel::new(j, 0.0);
        let a = subset_rdm_closed_form(&m, &[0, 1], PI / 4.0).unwrap();
        let b = subset_rdm_statevector(&m, &[0, 1], PI / 4.0).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn isolated_pair_becomes_maximally_entangled() {
        let jv = 0.8;
        let m = pair_model(jv, 0.0);
        let rho = subset_rdm_closed_form(&m, &[0, 1], PI / (4.0 * jv)).unwrap();
        let mut ev = rho.eigenvalues().unwrap();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[3] - 1.0).abs() < 1e-12);
        assert!(ev[..3].iter().all(|v| v.abs() < 1e-12));
        let cut = Bipartition::new(vec![0], vec![1]).unwrap();
        assert!((log_negativity(&rho, &cut).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_spin_keeps_full_coherence() {
        let m = IsingModel::new(CouplingMatrix::zeros(1), 0.37);
        let rho = subset_rdm_statevector(&m, &[0], 2.9).unwrap();
        assert!((rho.entries()[(0, 1)].norm() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn zero_couplings_give_local_phases_only() {
        let m = IsingModel::new(CouplingMatrix::zeros(4), 0.0);
        let rho = subset_rdm_statevector(&m, &[0, 2], 3.3).unwrap();
        for z in rho.entries().iter() {
            assert!((z.re - 0.25).abs() < 1e-14 && z.im.abs() < 1e-14);
        }
        let cut = Bipartition::new(vec![0], vec![2]).unwrap();
        assert_eq!(log_negativity(&rho, &cut).unwrap(), 0.0);
    }

    #[test]
    fn subset_validation() {
        let m = pair_model(1.0, 0.0);
        assert!(subset_rdm_closed_form(&m, &[0, 0], 1.0).is_err());
        assert!(subset_rdm_closed_form(&m, &[2], 1.0).is_err());
        assert!(subset_rdm_closed_form(&m, &[], 1.0).is_err());
        let big = IsingModel::new(CouplingMatrix::<f64>::zeros(15), 0.0);
        assert!(matches!(subset_rdm_statevector(&big, &[0], 1.0), Err(Error::Capacity { .. })));
        let subset: Vec<usize> = (0..13).collect();
        assert!(subset_rdm_closed_form(&big, &subset, 1.0).is_err());
    }

    #[test]
    fn diagonal_is_time_independent_and_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_model(&mut rng, 9, 1.0);
        for &t in &[0.0, 0.3, 7.0, 1234.5] {
            let rho = subset_rdm_closed_form(&m, &[2, 5, 8], t).unwrap();
            for a in 0..8 {
                assert_eq!(rho.entries()[(a, a)], Complex::new(0.125, 0.0));
            }
            assert!(rho.check_invariants().unwrap().holds());
        }
    }

    #[test]
    fn pair_rdm_only_sees_neighborhood() {
        let g = build_lattice(LatticeKind::Square2d, &[4, 4], true).unwrap();
        let spec = crate::disorder::DisorderSpec::new(0.0, 1.0, 9).unwrap();
        let j = crate::disorder::sample_couplings::<f64>(&g, &spec, 0);
        let (p, q) = g.edges()[5];
        let ext = g.exterior_neighbors(p, q).unwrap();
        let mut far = j.clone();
        for (a, b, v) in j.pairs() {
            let touches = [p, q].contains(&a) || [p, q].contains(&b);
            if !touches && (ext.contains(&a) || ext.contains(&b) || v == 0.0) {
                far.set(a, b, v + 3.0).unwrap();
            }
        }
        let a = subset_rdm_closed_form(&IsingModel::new(j, 0.2), &[p, q], 2.5).unwrap();
        let b = subset_rdm_closed_form(&IsingModel::new(far, 0.2), &[p, q], 2.5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn field_acts_as_diagonal_local_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let base = random_model(&mut rng, 6, 0.8);
        let h = 0.9;
        let t = 1.7;
        let r0 = subset_rdm_closed_form(&IsingModel::new(base.couplings.clone(), 0.0), &[1, 3], t).unwrap();
        let rh = subset_rdm_closed_form(&IsingModel::new(base.couplings.clone(), h), &[1, 3], t).unwrap();
        // ρ_h = U ρ_0 U† with U = diag(e^{i t h Σ a_u})
        for a in 0..4 {
            for b in 0..4 {
                let sa = (spin_of(a, 0, 2) + spin_of(a, 1, 2)) as f64;
                let sb = (spin_of(b, 0, 2) + spin_of(b, 1, 2)) as f64;
                let u = Complex::from_polar(1.0, t * h * (sa - sb));
                assert!((rh.entries()[(a, b)] - u * r0.entries()[(a, b)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn adapter_convention() {
        let j = CouplingMatrix::from_pair_fn(2, |_, _| 0.3);
        let m = adapt_nn_hamiltonian(&j, 0.0);
        assert_eq!(m.couplings.get(0, 1), 0.3);
        assert_eq!(adapt_nn_hamiltonian(&j, 0.7).field, -0.7);

        // -(1/2) Σ_{i≠j} J_ij S_i S_j + B' Σ S_i equals the internal energy
        let j = CouplingMatrix::from_pair_fn(4, |a, b| (a as f64 - 1.3 * b as f64).sin());
        let spins = [1i8, -1, -1, 1];
        let bp = 0.45;
        let mut direct = 0.0;
        for a in 0..4 {
            direct += bp * spins[a] as f64;
            for b in 0..4 {
                if a != b {
                    direct -= 0.5 * j.get(a, b) * (spins[a] * spins[b]) as f64;
                }
            }
        }
        let internal = adapt_nn_hamiltonian(&j, bp).energy(&spins);
        assert!((direct - internal).abs() < 1e-14);
    }

    #[test]
    fn rdm_json_round_trip() {
        let m = pair_model(1.1, 0.2);
        let rho = subset_rdm_closed_form(&m, &[1, 0], 0.7).unwrap();
        let doc = RdmDoc::from(&rho);
        assert_eq!(doc.entries.len(), 16);
        let text = serde_json::to_string(&doc).unwrap();
        let back: RdmDoc<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(SubsetDensityMatrix::try_from(back).unwrap(), rho);
    }

    #[test]
    fn single_precision_agrees_loosely() {
        let j = CouplingMatrix::<f32>::from_pair_fn(5, |a, b| ((a * 7 + b) as f32 * 0.37).sin());
        let m = IsingModel::new(j, 0.3f32);
        let a = subset_rdm_closed_form(&m, &[0, 3], 2.0f32).unwrap();
        let b = subset_rdm_statevector(&m, &[0, 3], 2.0f32).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-4);
    }
}
