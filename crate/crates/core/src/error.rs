use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("sites ({0}, {1}) are not joined by an edge")]
    NotAnEdge(usize, usize),

    #[error("invalid subset: {0}")]
    InvalidSubset(String),

    #[error("statevector needs 2^{n} amplitudes; at most {max} spins supported")]
    Capacity { n: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),

    #[error("Hermitian eigensolver did not converge on a {0}x{0} matrix")]
    EigenNonConvergence(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("estimator failed at realization {index}: {source}")]
    Estimator {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("equilibrium solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("ions {0} and {1} collided during minimization")]
    Collision(usize, usize),

    #[error("configuration is not a minimum: Hessian eigenvalue {0:e}")]
    NotAMinimum(f64),

    #[error("trap curvature is singular at ion {0} (sits at the cusp of the potential)")]
    SingularCurvature(usize),

    #[error("mode {mode} is ill-conditioned (omega^2 = {value:e})")]
    IllConditionedMode { mode: usize, value: f64 },

    #[error("recall did not reach a fixed point within {0} sweeps")]
    RecallBudget(usize),
}

impl Error {
    /// True for failures of an iterative numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::EigenNonConvergence(_)
            | Error::NonConvergence { .. }
            | Error::Collision(..)
            | Error::NotAMinimum(_)
            | Error::SingularCurvature(_)
            | Error::IllConditionedMode { .. }
            | Error::RecallBudget(_) => true,
            Error::Estimator { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
