use thiserror::Error;

use crate::mateq::RiccatiSolution;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hurwitz (spectral abscissa {abscissa:e})")]
    NotHurwitz { abscissa: f64 },

    #[error("Schur back-substitution hit a singular block (eigenvalue pairing λi + λj ≈ 0)")]
    SingularReduction,

    #[error("real Schur iteration failed to converge")]
    SchurFailed,

    #[error("no stabilizing Riccati solution: {0}")]
    NoStabilizingSolution(String),

    #[error("Riccati solution residual {residual:e} exceeds tolerance {tolerance:e}")]
    IllConditioned { residual: f64, tolerance: f64 },

    #[error("initial guess does not stabilize the pair (closed-loop abscissa {abscissa:e})")]
    NotStabilizingGuess { abscissa: f64 },

    #[error("Newton-Kleinman stopped after {} iterations with residual {:e}", .last.iterations, .last.residual_norm)]
    MaxIterations { last: Box<RiccatiSolution> },

    #[error("eigenvector matrix is numerically defective (condition {cond:e})")]
    NearDefective { cond: f64 },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("model has no structured decomposition A(x) = A0 + sum f_j(x) A_j")]
    MissingDecomposition,

    #[error("offline-online method requires a state-independent input matrix")]
    StateDependentInput,

    #[error("residual has the same sign at both bracket ends ({e_lo:e}, {e_hi:e})")]
    NoBracket { e_lo: f64, e_hi: f64 },

    #[error("root refinement exceeded {0} iterations")]
    MaxBisections(usize),

    #[error("trajectory is empty")]
    EmptyTrajectory,

    #[error("implicit operator I - dt*L is singular")]
    SingularImplicitOperator,

    #[error("state became non-finite or exceeded the divergence threshold")]
    NonFiniteState,

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Error {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }
}
