use num_complex::Complex64 as C64;

use super::numeric::{FourierSettings, IncoherentTransform};
use crate::error::Result;
use crate::pulse::{ModeMask, PulseModel};
use crate::single::SingleModel;
use crate::spectra::Spectra;

/// Analytic versus numerical incoherent amplitude at one time point.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub point: (f64, f64),
    pub analytic: C64,
    pub numeric: C64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub quadrature_err: f64,
}

impl OracleReport {
    /// Whether the quadrature error estimate covers the observed discrepancy.
    pub fn bounded(&self) -> bool {
        self.abs_err <= self.quadrature_err
    }
}

pub fn oracle_check(spectra: &Spectra, points: &[(f64, f64)], settings: FourierSettings) -> Result<Vec<OracleReport>> {
    let model = SingleModel::new(spectra.cfg());
    let pulse = PulseModel::new(spectra, &ModeMask::full(spectra))?;
    let transform = IncoherentTransform::new(&model, &spectra.double, settings)?;
    points
        .iter()
        .map(|&(t1, t2)| {
            let numeric = transform.psi(t1, t2)?;
            let analytic = pulse.incoherent(t1, t2);
            let abs_err = (numeric.value - analytic).norm();
            Ok(OracleReport {
                point: (t1, t2),
                analytic,
                numeric: numeric.value,
                abs_err,
                rel_err: abs_err / analytic.norm().max(f64::MIN_POSITIVE),
                quadrature_err: numeric.error,
            })
        })
        .collect()
}
