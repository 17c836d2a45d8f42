use crate::config::ArrayConfig;
use crate::double::{diagonalize_double_or_empty, DoubleExcitationSpectrum};
use crate::error::Result;
use crate::single::{diagonalize_single, SingleExcitationSpectrum};

/// Single- and double-excitation spectra of one configuration.
#[derive(Debug, Clone)]
pub struct Spectra {
    pub single: SingleExcitationSpectrum,
    pub double: DoubleExcitationSpectrum,
}

impl Spectra {
    pub fn compute(cfg: &ArrayConfig) -> Result<Self> {
        Ok(Self {
            single: diagonalize_single(cfg)?,
            double: diagonalize_double_or_empty(cfg)?,
        })
    }

    pub fn cfg(&self) -> &ArrayConfig {
        &self.single.cfg
    }
}
