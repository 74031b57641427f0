//! Linear ion chains in a power-law axial trap: equilibrium, normal modes and
//! the mode-mediated spin-spin couplings.
//!
//! Internal units set the Coulomb prefactor and the ion mass to one, so the
//! potential energy of the chain is
//!
//! ```text
//! U(x) = Σ_i A |x_i|^p + Σ_{i<j} 1 / (x_j - x_i)
//! ```
//!
//! For `p < 2` the trap curvature diverges at the origin. With an odd number
//! of ions the central ion sits exactly there: it is pinned at `x = 0`, its
//! trap force is taken as zero (the symmetric subgradient), and the Hessian is
//! reported as singular for it. For `p < 1` the trap is concave away from the
//! origin, so the curvature along a uniform translation is negative for every
//! configuration that avoids the origin: the mirror-symmetric stationary
//! point found from the symmetric starting guess is a minimum only within the
//! mirror-symmetric subspace. [`ModePolicy::AllowSaddle`] keeps such spectra
//! (with their unstable modes flagged) instead of rejecting them.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::couplings::CouplingMatrix;
use crate::error::{Error, Result};
use crate::hopfield::PatternSet;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct TrapSpec<T> {
    pub n_ions: usize,
    /// Trap strength `A` in `V(x) = A |x|^p`.
    pub amplitude: T,
    /// Trap exponent `p`.
    pub exponent: T,
    /// State-dependent force `F` driving the spin-spin coupling.
    pub force: T,
    pub mass: T,
}

impl<T: Scalar> TrapSpec<T> {
    pub fn new(n_ions: usize, amplitude: T, exponent: T) -> Result<Self> {
        let trap = Self { n_ions, amplitude, exponent, force: T::one(), mass: T::one() };
        trap.validate()?;
        Ok(trap)
    }

    /// Harmonic trap `x²/2` (unit center-of-mass frequency).
    pub fn harmonic(n_ions: usize) -> Self {
        Self { n_ions, amplitude: T::lit(0.5), exponent: T::lit(2.0), force: T::one(), mass: T::one() }
    }

    pub fn with_force(mut self, force: T) -> Self {
        self.force = force;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ions < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 ions, got {}", self.n_ions)));
        }
        let positive = |v: T| v > T::zero() && v.is_finite();
        if !positive(self.amplitude) || !positive(self.exponent) || !positive(self.mass) {
            return Err(Error::InvalidArgument(
                "trap amplitude, exponent and mass must be positive".into(),
            ));
        }
        if !self.force.is_finite() {
            return Err(Error::InvalidArgument("force must be finite".into()));
        }
        Ok(())
    }

    /// Index of the ion pinned at the origin, if any.
    pub fn pinned_ion(&self) -> Option<usize> {
        (self.n_ions % 2 == 1 && self.exponent < T::lit(2.0)).then_some(self.n_ions / 2)
    }
}

pub fn potential<T: Scalar>(trap: &TrapSpec<T>, x: &[T]) -> T {
    let mut u = T::zero();
    for (i, &xi) in x.iter().enumerate() {
        u += trap.amplitude * xi.abs().powf(trap.exponent);
        for &xj in &x[i + 1..] {
            u += T::one() / (xj - xi).abs();
        }
    }
    u
}

pub fn gradient<T: Scalar>(trap: &TrapSpec<T>, x: &[T]) -> Vec<T> {
    let (a, p) = (trap.amplitude, trap.exponent);
    let mut g: Vec<T> = x
        .iter()
        .map(|&xi| {
            if xi == T::zero() {
                T::zero()
            } else {
                a * p * xi.abs().powf(p - T::one()) * xi.signum()
            }
        })
        .collect();
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let d = x[j] - x[i];
            let f = T::one() / (d * d);
            g[i] += f;
            g[j] -= f;
        }
    }
    g
}

/// Hessian of `U`. Fails for an ion at the origin when `p < 2`.
pub fn hessian<T: Scalar>(trap: &TrapSpec<T>, x: &[T]) -> Result<DMatrix<T>> {
    hessian_except(trap, x, None)
}

/// Hessian with the trap curvature of ion `skip` left out.
fn hessian_except<T: Scalar>(trap: &TrapSpec<T>, x: &[T], skip: Option<usize>) -> Result<DMatrix<T>> {
    let n = x.len();
    let (a, p) = (trap.amplitude, trap.exponent);
    let two = T::lit(2.0);
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        if Some(i) != skip {
            if x[i] == T::zero() && p < two {
                return Err(Error::SingularCurvature(i));
            }
            k[(i, i)] = a * p * (p - T::one()) * x[i].abs().powf(p - two);
        }
        for j in 0..n {
            if i != j {
                let d = (x[j] - x[i]).abs();
                let c = two / (d * d * d);
                k[(i, j)] = -c;
                k[(i, i)] += c;
            }
        }
    }
    Ok(k)
}

fn max_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, x| a.max(x.abs()))
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions<T> {
    pub max_iterations: usize,
    /// Residual the iteration aims for.
    pub target: T,
    /// Residual at which a stalled iteration is still accepted.
    pub accept: T,
    /// Smallest allowed ion separation during a step.
    pub min_gap: T,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 100_000,
            target: T::solver_target(),
            accept: T::solver_accept(),
            min_gap: T::lit(1e-8),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium<T> {
    pub positions: Vec<T>,
    /// Gradient max-norm over the free ions.
    pub residual: T,
    pub iterations: usize,
    pub pinned: Option<usize>,
}

/// Evenly spaced chain rescaled to the best single length scale for `trap`.
fn scaled_guess<T: Scalar>(trap: &TrapSpec<T>, base: &[T]) -> Vec<T> {
    let a_sum = base.iter().fold(T::zero(), |s, u| s + u.abs().powf(trap.exponent));
    let mut b_sum = T::zero();
    for i in 0..base.len() {
        for j in i + 1..base.len() {
            b_sum += T::one() / (base[j] - base[i]).abs();
        }
    }
    // d/ds [A s^p a + b / s] = 0
    let s = (b_sum / (trap.exponent * trap.amplitude * a_sum)).powf(T::one() / (trap.exponent + T::one()));
    base.iter().map(|&u| u * s).collect()
}

/// Damped Newton iteration on ordered coordinates.
///
/// The step uses the Hessian with its eigenvalues replaced by their absolute
/// values (floored relative to the largest), which is the plain Newton step on
/// positive-definite Hessians and a descent direction otherwise. A
/// backtracking line search keeps the ions ordered and at least `min_gap`
/// apart, accepting sufficient decrease of `U` or of the gradient norm.
fn newton<T: Scalar>(
    trap: &TrapSpec<T>,
    mut x: Vec<T>,
    opts: &SolverOptions<T>,
) -> Result<Equilibrium<T>> {
    let n = x.len();
    let pinned = trap.pinned_ion();
    let free: Vec<usize> = (0..n).filter(|&i| Some(i) != pinned).collect();
    if let Some(c) = pinned {
        x[c] = T::zero();
    }
    let free_grad = |x: &[T]| -> Vec<T> {
        let g = gradient(trap, x);
        free.iter().map(|&i| g[i]).collect()
    };

    let mut g = free_grad(&x);
    let mut residual = max_norm(&g);
    let mut iterations = 0;
    while residual > opts.target && iterations < opts.max_iterations {
        iterations += 1;
        // the pinned ion is frozen; its (infinite) curvature never enters
        let k = hessian_except(trap, &x, pinned)?;
        let kf = DMatrix::from_fn(free.len(), free.len(), |r, c| k[(free[r], free[c])]);
        let eig = SymmetricEigen::new(kf);
        let scale = eig.eigenvalues.iter().fold(T::zero(), |a, v| a.max(v.abs()));
        let floor = scale * T::lit(1e-10) + T::lit(f64::MIN_POSITIVE);
        let gv = nalgebra::DVector::from_column_slice(&g);
        let coeffs = eig.eigenvectors.transpose() * &gv;
        let scaled = coeffs
            .iter()
            .zip(eig.eigenvalues.iter())
            .map(|(c, l)| -*c / l.abs().max(floor))
            .collect::<Vec<T>>();
        let dir = &eig.eigenvectors * nalgebra::DVector::from_vec(scaled);
        let slope = gv.dot(&dir);

        let u0 = potential(trap, &x);
        let mut step = T::one();
        let mut accepted = None;
        let mut collision = None;
        for _ in 0..80 {
            let mut trial = x.clone();
            for (r, &i) in free.iter().enumerate() {
                trial[i] += step * dir[r];
            }
            if let Some(i) = (0..n - 1).find(|&i| trial[i + 1] - trial[i] < opts.min_gap) {
                collision = Some(i);
                step *= T::lit(0.5);
                continue;
            }
            let gt = free_grad(&trial);
            let rt = max_norm(&gt);
            let armijo = potential(trap, &trial) <= u0 + T::lit(1e-4) * step * slope;
            if armijo || rt < residual {
                accepted = Some((trial, gt, rt));
                break;
            }
            step *= T::lit(0.5);
        }
        match accepted {
            Some((xt, gt, rt)) => {
                x = xt;
                g = gt;
                residual = rt;
            }
            None => {
                if let Some(i) = collision {
                    if residual > opts.accept {
                        return Err(Error::Collision(i, i + 1));
                    }
                }
                break;
            }
        }
    }
    if residual > opts.accept || !residual.is_finite() {
        return Err(Error::NonConvergence { iterations, residual: residual.to_f64_lossy() });
    }
    Ok(Equilibrium { positions: x, residual, iterations, pinned })
}

/// Stationary configuration of the chain, with diagnostics.
///
/// Starts from the harmonic-trap equilibrium rescaled to the target trap, so
/// the iteration preserves mirror symmetry.
pub fn solve_equilibrium<T: Scalar>(trap: &TrapSpec<T>, opts: &SolverOptions<T>) -> Result<Equilibrium<T>> {
    trap.validate()?;
    let n = trap.n_ions;
    let half = T::lit((n as f64 - 1.0) / 2.0);
    let uniform: Vec<T> = (0..n).map(|i| T::from_usize_lossy(i) - half).collect();
    let harmonic = TrapSpec::<T>::harmonic(n);
    let base = newton(&harmonic, scaled_guess(&harmonic, &uniform), opts)?.positions;
    newton(trap, scaled_guess(trap, &base), opts)
}

pub fn equilibrium_positions<T: Scalar>(trap: &TrapSpec<T>) -> Result<Vec<T>> {
    Ok(solve_equilibrium(trap, &SolverOptions::default())?.positions)
}

/// How [`normal_modes`] treats negative-curvature directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModePolicy {
    /// Negative Hessian eigenvalues are an error.
    #[default]
    RequireMinimum,
    /// Keep negative-curvature modes and flag them in the spectrum.
    AllowSaddle,
}

/// Normal modes of the chain: `K = m · M diag(ω²) Mᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct IonChainSpectrum<T: Scalar> {
    pub positions: Vec<T>,
    /// Orthogonal matrix whose column `n` is mode `n`.
    pub mode_matrix: DMatrix<T>,
    /// `ω_n²`, ascending; negative for unstable directions.
    pub squared_frequencies: Vec<T>,
    pub mass: T,
}

impl<T: Scalar> IonChainSpectrum<T> {
    pub fn n(&self) -> usize {
        self.positions.len()
    }

    /// `√|ω_n²|`; see [`Self::unstable_modes`] for the sign.
    pub fn frequencies(&self) -> Vec<T> {
        self.squared_frequencies.iter().map(|w| w.abs().sqrt()).collect()
    }

    pub fn unstable_modes(&self) -> Vec<usize> {
        (0..self.n()).filter(|&m| self.squared_frequencies[m] < T::zero()).collect()
    }

    pub fn is_minimum(&self) -> bool {
        self.unstable_modes().is_empty()
    }

    /// `max |MᵀM - 1|`.
    pub fn orthogonality_error(&self) -> T {
        let g = self.mode_matrix.transpose() * &self.mode_matrix - DMatrix::identity(self.n(), self.n());
        g.iter().fold(T::zero(), |a, v| a.max(v.abs()))
    }
}

/// Fixes the sign of each column so that its largest-magnitude component is
/// positive; among components tied with the maximum (relative 1e-9) the
/// lowest ion index decides.
fn fix_mode_signs<T: Scalar>(m: &mut DMatrix<T>) {
    for mut col in m.column_iter_mut() {
        let max = col.iter().fold(T::zero(), |a, v| a.max(v.abs()));
        let tie = max * (T::one() - T::lit(1e-9));
        if let Some(lead) = col.iter().copied().find(|v| v.abs() >= tie) {
            if lead < T::zero() {
                col.neg_mut();
            }
        }
    }
}

pub fn normal_modes<T: Scalar>(
    trap: &TrapSpec<T>,
    positions: &[T],
    policy: ModePolicy,
) -> Result<IonChainSpectrum<T>> {
    trap.validate()?;
    if positions.len() != trap.n_ions {
        return Err(Error::Dimension { expected: trap.n_ions, got: positions.len() });
    }
    let pinned = trap.pinned_ion();
    let g = gradient(trap, positions);
    let residual = max_norm(
        &g.iter().enumerate().filter(|(i, _)| Some(*i) != pinned).map(|(_, v)| *v).collect::<Vec<_>>(),
    );
    if residual > T::solver_accept() {
        return Err(Error::InvalidArgument(format!(
            "positions are not an equilibrium (gradient residual {:e})", residual.to_f64_lossy()
        )));
    }
    let k = hessian(trap, positions)?;
    let eig = SymmetricEigen::new(k);
    let n = positions.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let lowest = eig.eigenvalues[order[0]];
    if lowest <= T::zero() && policy == ModePolicy::RequireMinimum {
        return Err(Error::NotAMinimum(lowest.to_f64_lossy()));
    }
    let mut modes = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    fix_mode_signs(&mut modes);
    Ok(IonChainSpectrum {
        positions: positions.to_vec(),
        mode_matrix: modes,
        squared_frequencies: order.iter().map(|&i| eig.eigenvalues[i] / trap.mass).collect(),
        mass: trap.mass,
    })
}

/// Full mode sum `(F²/m) Σ_n M_in M_jn / ω_n²`, diagonal included.
pub fn mode_coupling_dense<T: Scalar>(spectrum: &IonChainSpectrum<T>, force: T, mass: T) -> Result<DMatrix<T>> {
    let n = spectrum.n();
    let floor = T::lit(1e-8);
    for (mode, &w2) in spectrum.squared_frequencies.iter().enumerate() {
        if w2.abs().sqrt() < floor {
            return Err(Error::IllConditionedMode { mode, value: w2.to_f64_lossy() });
        }
    }
    let pref = force * force / mass;
    let m = &spectrum.mode_matrix;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let s = (0..n).fold(T::zero(), |acc, k| acc + m[(i, k)] * m[(j, k)] / spectrum.squared_frequencies[k]);
        pref * s
    }))
}

/// Spin-spin couplings `J_ij = (F²/m) Σ_n M_in M_jn / ω_n²` for `i ≠ j`.
///
/// The diagonal self-term only shifts the energy of every Ising configuration
/// by the same constant and is dropped.
pub fn mode_couplings<T: Scalar>(spectrum: &IonChainSpectrum<T>, force: T, mass: T) -> Result<CouplingMatrix<T>> {
    let dense = mode_coupling_dense(spectrum, force, mass)?;
    // the mode sum is symmetric up to rounding; take the upper triangle
    Ok(CouplingMatrix::from_pair_fn(spectrum.n(), |i, j| dense[(i, j)]))
}

/// Sign pattern `ξ^n_i = sign(M_in)` of every mode, in mode order.
/// Components below 1e-10 in magnitude map to `+1`.
pub fn mode_patterns<T: Scalar>(spectrum: &IonChainSpectrum<T>) -> PatternSet {
    let n = spectrum.n();
    let tiny = T::lit(1e-10);
    let patterns = (0..n)
        .map(|mode| {
            (0..n)
                .map(|i| if spectrum.mode_matrix[(i, mode)] < -tiny { -1i8 } else { 1 })
                .collect()
        })
        .collect();
    PatternSet::new(patterns).expect("mode patterns are well formed")
}

/// Serialized spectrum as emitted by the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumDoc<T> {
    pub positions: Vec<T>,
    pub frequencies: Vec<T>,
    pub squared_frequencies: Vec<T>,
    pub unstable_modes: Vec<usize>,
    /// Rows are ions, columns are modes.
    pub mode_matrix: Vec<Vec<T>>,
    pub mass: T,
}

impl<T: Scalar> From<&IonChainSpectrum<T>> for SpectrumDoc<T> {
    fn from(s: &IonChainSpectrum<T>) -> Self {
        let n = s.n();
        SpectrumDoc {
            positions: s.positions.clone(),
            frequencies: s.frequencies(),
            squared_frequencies: s.squared_frequencies.clone(),
            unstable_modes: s.unstable_modes(),
            mode_matrix: (0..n).map(|i| (0..n).map(|k| s.mode_matrix[(i, k)]).collect()).collect(),
            mass: s.mass,
        }
    }
}

impl<T: Scalar> TryFrom<SpectrumDoc<T>> for IonChainSpectrum<T> {
    type Error = Error;

    fn try_from(doc: SpectrumDoc<T>) -> Result<Self> {
        let n = doc.positions.len();
        if doc.squared_frequencies.len() != n
            || doc.mode_matrix.len() != n
            || doc.mode_matrix.iter().any(|r| r.len() != n)
        {
            return Err(Error::Dimension { expected: n, got: doc.mode_matrix.len() });
        }
        Ok(IonChainSpectrum {
            positions: doc.positions,
            mode_matrix: DMatrix::from_fn(n, n, |i, k| doc.mode_matrix[i][k]),
            squared_frequencies: doc.squared_frequencies,
            mass: doc.mass,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum(trap: &TrapSpec<f64>, policy: ModePolicy) -> IonChainSpectrum<f64> {
        let x = equilibrium_positions(trap).unwrap();
        normal_modes(trap, &x, policy).unwrap()
    }

    #[test]
    fn two_ion_harmonic_equilibrium() {
        // U = d²/4 + 1/d  =>  d³ = 2
        let x = equilibrium_positions(&TrapSpec::<f64>::harmonic(2)).unwrap();
        let half = 2f64.powf(-2.0 / 3.0);
        assert!((x[0] + half).abs() < 1e-10 && (x[1] - half).abs() < 1e-10);
        assert!((half - 0.6300).abs() < 1e-4);
    }

    #[test]
    fn two_ion_harmonic_modes() {
        let s = spectrum(&TrapSpec::harmonic(2), ModePolicy::RequireMinimum);
        assert!((s.squared_frequencies[0] - 1.0).abs() < 1e-10);
        assert!((s.squared_frequencies[1] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn harmonic_com_and_breathing_ratio() {
        for n in 2..=10 {
            let s = spectrum(&TrapSpec::harmonic(n), ModePolicy::RequireMinimum);
            let w = s.frequencies();
            assert!((w[1] / w[0] - 3f64.sqrt()).abs() < 1e-8, "n = {n}");
            assert!(s.orthogonality_error() < 1e-10);
        }
    }

    #[test]
    fn equilibrium_is_mirror_symmetric_local_minimum() {
        for trap in [TrapSpec::<f64>::harmonic(7), TrapSpec::new(6, 1.3, 3.0).unwrap(), TrapSpec::new(8, 0.7, 1.5).unwrap()] {
            let x = equilibrium_positions(&trap).unwrap();
            let n = x.len();
            for i in 0..n {
                assert!((x[i] + x[n - 1 - i]).abs() <= 1e-10);
            }
            assert!(max_norm(&gradient(&trap, &x)) <= 1e-10);
            assert!(x.windows(2).all(|w| w[0] < w[1]));
            let u0 = potential(&trap, &x);
            for i in 0..n {
                for d in [1e-4, -1e-4] {
                    let mut y = x.clone();
                    y[i] += d;
                    assert!(potential(&trap, &y) > u0);
                }
            }
            let s = normal_modes(&trap, &x, ModePolicy::RequireMinimum).unwrap();
            assert!(s.squared_frequencies[0] > 0.0);
        }
    }

    #[test]
    fn mode_completeness_and_inverse_identity() {
        let trap = TrapSpec::new(6, 0.8, 2.5).unwrap().with_force(1.7);
        let x = equilibrium_positions(&trap).unwrap();
        let k = hessian(&trap, &x).unwrap();
        let s = normal_modes(&trap, &x, ModePolicy::RequireMinimum).unwrap();
        let sum: f64 = s.squared_frequencies.iter().sum::<f64>() * trap.mass;
        assert!((sum - k.trace()).abs() <= 1e-8 * k.trace());

        let full = mode_coupling_dense(&s, trap.force, trap.mass).unwrap();
        let oracle = k.try_inverse().unwrap() * (trap.force * trap.force);
        let scale = oracle.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!((full - &oracle).iter().all(|d| d.abs() <= 1e-8 * scale));

        let j = mode_couplings(&s, trap.force, trap.mass).unwrap();
        let j2 = mode_couplings(&s, 2.0 * trap.force, trap.mass).unwrap();
        for (a, b, v) in j.pairs() {
            assert!((j2.get(a, b) - 4.0 * v).abs() < 1e-12 * v.abs().max(1.0));
            assert!((j.get(a, b) - j.get(5 - a, 5 - b)).abs() < 1e-8);
        }
    }

    #[test]
    fn harmonic_mode_patterns() {
        let s = spectrum(&TrapSpec::harmonic(6), ModePolicy::RequireMinimum);
        let p = mode_patterns(&s);
        assert!(p.pattern(0).iter().all(|&v| v == 1));
        let breathing = p.pattern(1);
        for i in 0..6 {
            assert_eq!(breathing[i], -breathing[5 - i]);
        }
        // largest component positive, lowest index wins the mirror tie
        assert_eq!(breathing[0], 1);
    }

    #[test]
    fn single_soft_mode_dominates() {
        let mut s = spectrum(&TrapSpec::harmonic(5), ModePolicy::RequireMinimum);
        s.squared_frequencies[0] = 1e-6;
        let j = mode_coupling_dense(&s, 1.0, 1.0).unwrap();
        let v = s.mode_matrix.column(0);
        let rank1 = &v * v.transpose() * 1e6;
        assert!((j - &rank1).norm() / rank1.norm() < 1e-4);
        s.squared_frequencies[0] = 1e-18;
        assert!(matches!(mode_couplings(&s, 1.0, 1.0), Err(Error::IllConditionedMode { mode: 0, .. })));
    }

    #[test]
    fn concave_trap_is_a_symmetric_saddle() {
        let trap = TrapSpec::new(20, 1.0, 0.5).unwrap();
        let x = equilibrium_positions(&trap).unwrap();
        assert!(max_norm(&gradient(&trap, &x)) <= 1e-10);
        assert!(matches!(normal_modes(&trap, &x, ModePolicy::RequireMinimum), Err(Error::NotAMinimum(_))));
        let s = normal_modes(&trap, &x, ModePolicy::AllowSaddle).unwrap();
        assert_eq!(s.unstable_modes(), vec![0]);
        assert!(s.orthogonality_error() < 1e-10);
        // the unstable direction is a near-uniform translation
        assert!(mode_patterns(&s).pattern(0).iter().all(|&v| v == 1));
    }

    #[test]
    fn odd_chain_in_cusp_trap_pins_the_center() {
        let trap = TrapSpec::new(5, 1.0, 0.5).unwrap();
        let eq = solve_equilibrium(&trap, &SolverOptions::default()).unwrap();
        assert_eq!(eq.pinned, Some(2));
        assert_eq!(eq.positions[2], 0.0);
        assert!(matches!(normal_modes(&trap, &eq.positions, ModePolicy::AllowSaddle), Err(Error::SingularCurvature(2))));
    }

    #[test]
    fn rejects_bad_traps_and_positions() {
        assert!(TrapSpec::new(1, 1.0, 2.0).is_err());
        assert!(TrapSpec::new(3, -1.0, 2.0).is_err());
        assert!(TrapSpec::new(3, 1.0, 0.0).is_err());
        let trap = TrapSpec::harmonic(3);
        assert!(normal_modes(&trap, &[-1.0, 0.0, 1.0], ModePolicy::RequireMinimum).is_err());
        assert!(normal_modes(&trap, &[0.0, 1.0], ModePolicy::RequireMinimum).is_err());
    }

    #[test]
    fn budget_exhaustion_reports_residual() {
        let opts = SolverOptions { max_iterations: 0, ..SolverOptions::default() };
        let err = solve_equilibrium(&TrapSpec::<f64>::harmonic(4), &opts).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { iterations: 0, .. }));
    }

    #[test]
    fn spectrum_document_round_trip() {
        let s = spectrum(&TrapSpec::harmonic(3), ModePolicy::RequireMinimum);
        let doc = SpectrumDoc::from(&s);
        let text = serde_json::to_string(&doc).unwrap();
        let back = IonChainSpectrum::try_from(serde_json::from_str::<SpectrumDoc<f64>>(&text).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn single_precision_solver() {
        let x = equilibrium_positions(&TrapSpec::<f32>::harmonic(4)).unwrap();
        assert!((x[0] + x[3]).abs() < 1e-4);
    }
}
