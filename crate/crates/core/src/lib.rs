//! Disordered Ising spin glasses and trapped-ion Hopfield networks: exact
//! quench dynamics from `|+⟩^⊗N`, logarithmic negativity of reduced states,
//! quenched disorder averages, ion-chain normal modes and attractor recall.
//!
//! Numerical types are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the double-precision instantiation used by the experiment drivers.

pub mod couplings;
pub mod disorder;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod hopfield;
pub mod ion_chain;
pub mod lattice;
pub mod qnn;
pub mod rng;
pub mod scalar;
pub mod sweep;

pub use couplings::CouplingMatrix;
pub use disorder::{disorder_average, sample_couplings, DisorderSpec};
pub use dynamics::{adapt_nn_hamiltonian, subset_rdm_closed_form, subset_rdm_statevector, IsingModel, SubsetDensityMatrix};
pub use entanglement::{log_negativity, partial_transpose, Bipartition};
pub use error::{Error, Result};
pub use hopfield::{capacity_audit, hebbian_couplings, recall, NetworkState, PatternSet};
pub use ion_chain::{equilibrium_positions, mode_couplings, normal_modes, ModePolicy, TrapSpec};
pub use lattice::{build_lattice, LatticeGraph, LatticeKind};
pub use scalar::Scalar;
pub use sweep::{run_neighbor_decay, run_spin_glass_sweep, NeighborDecayConfig, SpinGlassConfig};

/// Working precision of the drivers.
pub type Real = f64;
pub type Couplings = CouplingMatrix<Real>;
pub type Model = IsingModel<Real>;
pub type DensityMatrix = SubsetDensityMatrix<Real>;
