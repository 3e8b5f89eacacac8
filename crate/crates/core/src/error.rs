use thiserror::Error;

/// Errors from state construction, channel application, and metric evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cutoff mismatch: {left} vs {right}")]
    CutoffMismatch { left: usize, right: usize },

    #[error("invalid Fock cutoff {0}: need d >= 2")]
    InvalidCutoff(usize),

    #[error("matrix is not Hermitian (max deviation {max_dev:.3e})")]
    NotHermitian { max_dev: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min:.3e})")]
    NegativeEigenvalue { min: f64 },

    #[error("truncation failure: trace deficit {deficit:.3e} exceeds {limit:.3e}")]
    Truncation { deficit: f64, limit: f64 },

    #[error("quadrature residual {residual:.3e} exceeds {limit:.3e}")]
    QuadratureResidual { residual: f64, limit: f64 },

    #[error("fidelity {0} outside [0, 1]: truncation or conditioning failure")]
    FidelityOutOfRange(f64),

    #[error("negative radicand in {name}: {value:.3e}")]
    NegativeRadicand { name: &'static str, value: f64 },

    #[error("dilation oracle dimension {required} exceeds limit {limit}")]
    DimensionLimit { required: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error(transparent)]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

pub type Result<T> = std::result::Result<T, Error>;
