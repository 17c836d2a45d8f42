//! Independent numerical references for the analytic pole expansions.

pub mod check;
pub mod numeric;
pub mod quadrature;

pub use numeric::{
    f_numeric, psi_incoherent_numeric, s_tilde_numeric, sigma_numeric, Estimate, FourierSettings, IncoherentTransform,
    QSource, STilde,
};
pub use check::{oracle_check, OracleReport};
