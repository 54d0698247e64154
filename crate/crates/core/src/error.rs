use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid end spec: {0}")]
    InvalidSpec(String),

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("{solver} did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("spectral interval estimate failed: {0}")]
    SpectralInterval(String),

    #[error("wave step violates stability bound: dt*sqrt(lambda_max) = {0:.3} > 2")]
    Cfl(f64),

    #[error("near-singular operator: {0}")]
    Singular(String),

    #[error("support violation: {0}")]
    Support(String),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    /// Process exit status: 2 for schema errors, 4 for the resource cap, 3 for
    /// solver and other runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::InvalidSpec(_) | LabError::Config(_) | LabError::Json(_) => 2,
            LabError::ResourceCap(_) => 4,
            _ => 3,
        }
    }
}
