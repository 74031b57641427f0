//! Partial transposes and the logarithmic negativity `E_LN = log₂ ‖ρ^{T_B}‖₁`.

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dynamics::{subset_rdm_closed_form, IsingModel, SubsetDensityMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const EIGEN_MAX_SWEEPS: usize = 10_000;

/// Eigenvalues of a Hermitian matrix (only the lower triangle is read).
pub fn hermitian_eigenvalues<T: Scalar>(m: &DMatrix<Complex<T>>) -> Result<Vec<T>> {
    let n = m.nrows();
    SymmetricEigen::try_new(m.clone(), T::default_epsilon(), EIGEN_MAX_SWEEPS)
        .map(|e| e.eigenvalues.iter().copied().collect())
        .ok_or(Error::EigenNonConvergence(n))
}

/// Split of a subset into two nonempty disjoint parts; `right` is transposed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    left: Vec<usize>,
    right: Vec<usize>,
}

impl Bipartition {
    pub fn new(left: Vec<usize>, right: Vec<usize>) -> Result<Self> {
        if left.is_empty() || right.is_empty() {
            return Err(Error::InvalidBipartition("both parts must be nonempty".into()));
        }
        if let Some(s) = left.iter().find(|s| right.contains(s)) {
            return Err(Error::InvalidBipartition(format!("site {s} is on both sides")));
        }
        Ok(Self { left, right })
    }

    /// First site against the rest of the subset.
    pub fn first_vs_rest(subset: &[usize]) -> Result<Self> {
        match subset.split_first() {
            Some((head, tail)) => Self::new(vec![*head], tail.to_vec()),
            None => Err(Error::InvalidBipartition("empty subset".into())),
        }
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    /// Bit mask (in the RDM's basis) of the transposed factor.
    fn right_mask(&self, subset: &[usize]) -> Result<usize> {
        let k = subset.len();
        if self.left.len() + self.right.len() != k
            || !subset.iter().all(|s| self.left.contains(s) || self.right.contains(s))
        {
            return Err(Error::InvalidBipartition(format!(
                "{:?} | {:?} does not partition {:?}",
                self.left, self.right, subset
            )));
        }
        Ok(subset
            .iter()
            .enumerate()
            .filter(|(_, s)| self.right.contains(s))
            .fold(0usize, |mask, (pos, _)| mask | (1 << (k - 1 - pos))))
    }
}

/// `ρ^{T_B}`: transposes the indices of the `right` factor.
pub fn partial_transpose<T: Scalar>(
    rdm: &SubsetDensityMatrix<T>,
    cut: &Bipartition,
) -> Result<DMatrix<Complex<T>>> {
    let mask = cut.right_mask(rdm.subset())?;
    let rho = rdm.entries();
    let d = rdm.dim();
    Ok(DMatrix::from_fn(d, d, |a, b| {
        let a2 = (a & !mask) | (b & mask);
        let b2 = (b & !mask) | (a & mask);
        rho[(a2, b2)]
    }))
}

/// Eigenvalues of the partial transpose, ascending.
pub fn partial_transpose_spectrum<T: Scalar>(
    rdm: &SubsetDensityMatrix<T>,
    cut: &Bipartition,
) -> Result<Vec<T>> {
    let mut ev = hermitian_eigenvalues(&partial_transpose(rdm, cut)?)?;
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(ev)
}

pub fn min_partial_transpose_eigenvalue<T: Scalar>(
    rdm: &SubsetDensityMatrix<T>,
    cut: &Bipartition,
) -> Result<T> {
    Ok(partial_transpose_spectrum(rdm, cut)?[0])
}

/// Trace norm of `ρ^{T_B}` from its spectrum.
pub fn trace_norm_from_spectrum<T: Scalar>(spectrum: &[T]) -> Result<T> {
    let norm = spectrum.iter().fold(T::zero(), |a, v| a + v.abs());
    // ‖X‖₁ ≥ |tr X| = 1
    if norm < T::one() - T::lit(1e3) * T::noise_floor() {
        return Err(Error::EigenNonConvergence(spectrum.len()));
    }
    Ok(norm)
}

/// Log-negativity in bits; zero whenever the trace norm is within the noise
/// floor (1e-12 in double precision) of one.
pub fn log_negativity<T: Scalar>(rdm: &SubsetDensityMatrix<T>, cut: &Bipartition) -> Result<T> {
    let norm = trace_norm_from_spectrum(&partial_transpose_spectrum(rdm, cut)?)?;
    if norm < T::one() + T::noise_floor() {
        Ok(T::zero())
    } else {
        Ok(norm.log2())
    }
}

/// Entrywise mean of density matrices over the same subset.
pub fn mean_state<T: Scalar>(rdms: &[SubsetDensityMatrix<T>]) -> Result<SubsetDensityMatrix<T>> {
    let first = rdms
        .first()
        .ok_or_else(|| Error::InvalidArgument("cannot average zero states".into()))?;
    let mut sum = first.entries().clone();
    for r in &rdms[1..] {
        if r.subset() != first.subset() {
            return Err(Error::InvalidSubset("averaged states cover different subsets".into()));
        }
        sum += r.entries();
    }
    let inv = Complex::new(T::one() / T::from_usize_lossy(rdms.len()), T::zero());
    SubsetDensityMatrix::new(first.subset().to_vec(), sum * inv)
}

/// Realization-averaged reduced state `⟨ρ_S(t)⟩` over a stream of models.
pub fn averaged_state<T: Scalar>(
    models: impl IntoIterator<Item = IsingModel<T>>,
    subset: &[usize],
    t: T,
) -> Result<SubsetDensityMatrix<T>> {
    let rdms = models
        .into_iter()
        .map(|m| subset_rdm_closed_form(&m, subset, t))
        .collect::<Result<Vec<_>>>()?;
    mean_state(&rdms)
}
