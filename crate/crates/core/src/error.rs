use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} lies outside the domain of chart `{chart}`")]
    OutsideChartDomain { chart: String, point: Vec<f64> },

    #[error("metric is not positive definite at {point:?} (smallest eigenvalue {min_eigenvalue:e})")]
    MetricNotPositiveDefinite { point: Vec<f64>, min_eigenvalue: f64 },

    #[error("torsion violates A_ijk = -A_ikj (max defect {defect:e})")]
    TorsionNotSkew { defect: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("real-valuedness precondition failed: {0}")]
    RealValuednessPrecondition(String),

    #[error("dense backend is limited to {limit} unknowns, requested {requested}")]
    SizeOverflow { requested: usize, limit: usize },

    #[error("harmonic map flow did not converge after {iterations} iterations (tension norm {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("ambiguous kernel: singular value {sigma:e} within a factor 10 of threshold {threshold:e}")]
    AmbiguousKernel { sigma: f64, threshold: f64 },

    #[error("kernel vector residual {residual:e} exceeds tolerance {tolerance:e}")]
    KernelResidual { residual: f64, tolerance: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
