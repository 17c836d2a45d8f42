use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest inter-atom phase accepted by the pulse pipeline.
pub const PHI_MIN: f64 = 1e-3;

/// A periodic array of two-level atoms coupled to a waveguide.
///
/// Energies are measured from the atomic resonance and in units of the
/// single-atom radiative rate into the guided mode, so `gamma_1d = 1` and
/// `omega_0 = 0` for every configuration built through [`ArrayConfig::new`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub n_atoms: usize,
    /// Phase gained by light between neighbouring atoms, `omega_0 d / c`.
    pub phase: f64,
    pub gamma_1d: f64,
    pub omega_0: f64,
}

impl ArrayConfig {
    /// Configuration usable for spectra (phase may be exactly zero).
    pub fn new(n_atoms: usize, phase: f64) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::InvalidConfig("N must be at least 1".into()));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidConfig(format!("phase {phase} is not finite")));
        }
        if phase != 0.0 && !(PHI_MIN..=PI - PHI_MIN).contains(&phase) {
            return Err(Error::InvalidConfig(format!(
                "phase {phase} outside [{PHI_MIN}, pi - {PHI_MIN}] and not 0"
            )));
        }
        Ok(Self {
            n_atoms,
            phase,
            gamma_1d: 1.0,
            omega_0: 0.0,
        })
    }

    /// Rejects `phase = 0`, where the dark states are exactly degenerate.
    pub fn require_pulse_range(&self) -> Result<()> {
        if self.phase == 0.0 {
            return Err(Error::InvalidConfig(format!(
                "phase 0 is only supported for spectra; pulse calculations need phase >= {PHI_MIN}"
            )));
        }
        Ok(())
    }

    /// Waveguide phase factor `exp(±i phase n)` of atom `n` (0-based coordinate).
    pub fn plane_wave(&self, n: usize, sign: Direction) -> C64 {
        C64::from_polar(1.0, sign.sign() * self.phase * n as f64)
    }

    pub fn plane_waves(&self, sign: Direction) -> Vec<C64> {
        (0..self.n_atoms).map(|n| self.plane_wave(n, sign)).collect()
    }

    pub fn n_pairs(&self) -> usize {
        self.n_atoms * (self.n_atoms - 1) / 2
    }
}

/// Propagation direction of the plane wave coupling to the array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Plus,
    Minus,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Plus => 1.0,
            Direction::Minus => -1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_configs() {
        assert!(ArrayConfig::new(0, 0.1).is_err());
        assert!(ArrayConfig::new(3, 1e-4).is_err());
        assert!(ArrayConfig::new(3, PI).is_err());
        assert!(ArrayConfig::new(3, f64::NAN).is_err());
        assert!(ArrayConfig::new(3, 0.0).is_ok());
        assert!(ArrayConfig::new(3, 0.0).unwrap().require_pulse_range().is_err());
        assert!(ArrayConfig::new(3, PI / 2.0).unwrap().require_pulse_range().is_ok());
    }
}
