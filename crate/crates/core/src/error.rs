use thiserror::Error;

/// Failures raised by the simulation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Evaluation point lies within `EPS_POLE` of a resonance.
    #[error("frequency {re:.6e}{im:+.6e}i is within {distance:.3e} of a resonance")]
    SingularFrequency { re: f64, im: f64, distance: f64 },

    /// A bilinear eigenvector norm vanished: the matrix is (nearly) defective.
    #[error("exceptional point: bilinear norm {norm:.3e} of eigenvector {index}")]
    ExceptionalPoint { index: usize, norm: f64 },

    #[error("two-excitation sector is empty for N = 1")]
    EmptySector,

    #[error("degenerate field: T undefined for N={n_atoms}")]
    DegenerateField { n_atoms: usize },

    #[error("quadrature did not converge: achieved error {achieved:.3e}, target {target:.3e}")]
    QuadratureNotConverged { achieved: f64, target: f64 },

    #[error("invalid mode mask: {0}")]
    InvalidMask(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("pulse duration did not converge up to t_max = {t_max:.3e}")]
    DurationNotConverged { t_max: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Numerical failures, as opposed to rejected input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNotConverged { .. } | Error::DurationNotConverged { .. } | Error::ExceptionalPoint { .. }
        )
    }
}
