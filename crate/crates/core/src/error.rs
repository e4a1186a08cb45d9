use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("input has nonzero mean ({mean:e}); the operator is only invertible on zero-mean fields")]
    ZeroMeanViolation { mean: f64 },

    #[error("weight has zero mean (|mean| = {mean:e}); perturb it to m - 1/n before solving")]
    ZeroMeanWeight { mean: f64 },

    #[error("pencil has no positive eigenvalue")]
    NoPositiveEigenvalue,

    #[error("weight is nowhere positive; no positive solution exists")]
    NoPositiveSolution,

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular Jacobian in Newton step")]
    SingularJacobian,

    #[error("singular linear system")]
    SingularSystem,

    #[error("branch continuation stalled after lambda = {last_lambda}")]
    BranchStall { last_lambda: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
