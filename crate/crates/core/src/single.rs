//! Single-excitation sector: effective Hamiltonian, Green function, waveguide
//! couplings and transmission, together with their pole expansions.

use num_complex::Complex64 as C64;

use crate::config::{ArrayConfig, Direction};
use crate::error::{Error, Result};
use crate::linalg::{eig_symmetric, resolvent, CMatrix, CVector};

/// Minimal distance to a resonance for direct evaluation.
pub const EPS_POLE: f64 = 1e-8;

const I: C64 = C64::new(0.0, 1.0);

/// `H_mn = omega_0 delta_mn - i gamma exp(i phase |m - n|)`.
pub fn build_single_hamiltonian(cfg: &ArrayConfig) -> CMatrix {
    let n = cfg.n_atoms;
    CMatrix::from_fn(n, n, |m, k| {
        let dist = m.abs_diff(k) as f64;
        let diag = if m == k { cfg.omega_0 } else { 0.0 };
        C64::from(diag) - I * cfg.gamma_1d * C64::from_polar(1.0, cfg.phase * dist)
    })
}

/// Direct (resolvent-based) evaluation of the single-excitation response.
///
/// Holds the Hamiltonian and its eigenvalues so repeated evaluations only
/// pay for one linear solve.
#[derive(Debug, Clone)]
pub struct SingleModel {
    pub cfg: ArrayConfig,
    pub hamiltonian: CMatrix,
    poles: Vec<C64>,
}

impl SingleModel {
    pub fn new(cfg: &ArrayConfig) -> Self {
        let hamiltonian = build_single_hamiltonian(cfg);
        let poles = hamiltonian
            .clone()
            .schur()
            .eigenvalues()
            .map(|v| v.iter().copied().collect())
            .unwrap_or_default();
        Self {
            cfg: *cfg,
            hamiltonian,
            poles,
        }
    }

    fn check_regular(&self, omega: C64) -> Result<()> {
        let distance = self
            .poles
            .iter()
            .map(|p| (omega - p).norm())
            .fold(f64::INFINITY, f64::min);
        if distance < EPS_POLE * self.cfg.gamma_1d {
            return Err(Error::SingularFrequency {
                re: omega.re,
                im: omega.im,
                distance,
            });
        }
        Ok(())
    }

    /// Eigenvalues of the Hamiltonian, unsorted.
    pub fn poles(&self) -> &[C64] {
        &self.poles
    }

    pub fn green(&self, omega: C64) -> Result<CMatrix> {
        self.check_regular(omega)?;
        resolvent(&self.hamiltonian, omega).ok_or(Error::SingularFrequency {
            re: omega.re,
            im: omega.im,
            distance: 0.0,
        })
    }

    /// `s_m(omega) = sum_n G_mn(omega) exp(±i phase n)`.
    pub fn coupling(&self, direction: Direction, omega: C64) -> Result<CVector> {
        self.check_regular(omega)?;
        Ok(self.coupling_unchecked(direction, omega))
    }

    /// Linear solve without the resonance check; used by quadrature loops
    /// that only sample the real axis.
    pub fn coupling_unchecked(&self, direction: Direction, omega: C64) -> CVector {
        let n = self.cfg.n_atoms;
        let rhs = CVector::from_vec(self.cfg.plane_waves(direction));
        let lhs = CMatrix::identity(n, n) * omega - &self.hamiltonian;
        lhs.lu()
            .solve(&rhs)
            .unwrap_or_else(|| CVector::from_element(n, C64::new(f64::NAN, f64::NAN)))
    }

    pub fn transmission(&self, omega: C64) -> Result<C64> {
        let s = self.coupling(Direction::Plus, omega)?;
        let back: C64 = self
            .cfg
            .plane_waves(Direction::Minus)
            .iter()
            .zip(s.iter())
            .map(|(e, s)| e * s)
            .sum();
        Ok(C64::from(1.0) - I * self.cfg.gamma_1d * back)
    }

    pub fn reflection(&self, omega: C64) -> Result<C64> {
        let s = self.coupling(Direction::Plus, omega)?;
        let back: C64 = self
            .cfg
            .plane_waves(Direction::Plus)
            .iter()
            .zip(s.iter())
            .map(|(e, s)| e * s)
            .sum();
        Ok(-I * self.cfg.gamma_1d * back)
    }
}

/// `(omega I - H)^{-1}`.
pub fn green_function(cfg: &ArrayConfig, omega: C64) -> Result<CMatrix> {
    SingleModel::new(cfg).green(omega)
}

pub fn coupling_amplitude(cfg: &ArrayConfig, direction: Direction, omega: C64) -> Result<CVector> {
    SingleModel::new(cfg).coupling(direction, omega)
}

pub fn transmission(cfg: &ArrayConfig, omega: C64) -> Result<C64> {
    SingleModel::new(cfg).transmission(omega)
}

/// Reflection amplitude `r = -i gamma sum_mn G_mn exp(i phase (m + n))`.
pub fn reflection(cfg: &ArrayConfig, omega: C64) -> Result<C64> {
    SingleModel::new(cfg).reflection(omega)
}

/// Eigenfrequencies of the single-excitation sector and the residues of the
/// waveguide response at each of them.
///
/// With bilinearly normalized modes `v`, `G(omega) = sum_nu v v^T / (omega - omega_nu)`,
/// so that
///
/// * `s_j^±(omega) = sum_nu s_j^{±,nu} / (omega_nu - omega)`,
/// * `t(omega) = 1 + sum_nu t_nu / (omega - omega_nu)`.
#[derive(Debug, Clone)]
pub struct SingleExcitationSpectrum {
    pub cfg: ArrayConfig,
    /// Ordered by decay rate, fastest (superradiant) first.
    pub eigenvalues: Vec<C64>,
    /// Column `nu` is mode `nu`, with `sum_m (v_m)^2 = 1`.
    pub eigenvectors: CMatrix,
    /// `coupling_plus[nu][j] = s_j^{+,nu}`.
    pub coupling_plus: Vec<Vec<C64>>,
    pub coupling_minus: Vec<Vec<C64>>,
    pub transmission_residues: Vec<C64>,
}

pub fn diagonalize_single(cfg: &ArrayConfig) -> Result<SingleExcitationSpectrum> {
    let h = build_single_hamiltonian(cfg);
    let eig = eig_symmetric(&h)?;
    let n = cfg.n_atoms;
    let e_plus = cfg.plane_waves(Direction::Plus);
    let e_minus = cfg.plane_waves(Direction::Minus);

    let mut coupling_plus = Vec::with_capacity(n);
    let mut coupling_minus = Vec::with_capacity(n);
    let mut transmission_residues = Vec::with_capacity(n);
    for nu in 0..n {
        let v = eig.vectors.column(nu);
        let overlap_plus: C64 = v.iter().zip(&e_plus).map(|(a, b)| a * b).sum();
        let overlap_minus: C64 = v.iter().zip(&e_minus).map(|(a, b)| a * b).sum();
        coupling_plus.push(v.iter().map(|vj| -vj * overlap_plus).collect());
        coupling_minus.push(v.iter().map(|vj| -vj * overlap_minus).collect());
        transmission_residues.push(-I * cfg.gamma_1d * overlap_minus * overlap_plus);
    }
    Ok(SingleExcitationSpectrum {
        cfg: *cfg,
        eigenvalues: eig.values,
        eigenvectors: eig.vectors,
        coupling_plus,
        coupling_minus,
        transmission_residues,
    })
}

impl SingleExcitationSpectrum {
    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn residues(&self, direction: Direction) -> &[Vec<C64>] {
        match direction {
            Direction::Plus => &self.coupling_plus,
            Direction::Minus => &self.coupling_minus,
        }
    }

    /// Index of the mode with the largest decay rate.
    pub fn superradiant_index(&self) -> usize {
        (0..self.n_modes())
            .min_by(|&a, &b| self.eigenvalues[a].im.total_cmp(&self.eigenvalues[b].im))
            .unwrap_or(0)
    }

    /// Coupling amplitude rebuilt from its pole expansion.
    pub fn coupling_from_poles(&self, direction: Direction, omega: C64) -> Vec<C64> {
        let res = self.residues(direction);
        let n = self.cfg.n_atoms;
        let mut out = vec![C64::from(0.0); n];
        for (nu, w) in self.eigenvalues.iter().enumerate() {
            let denom = w - omega;
            for j in 0..n {
                out[j] += res[nu][j] / denom;
            }
        }
        out
    }

    /// Transmission rebuilt from its pole expansion (including the constant 1).
    pub fn transmission_from_poles(&self, omega: C64) -> C64 {
        C64::from(1.0)
            + self
                .eigenvalues
                .iter()
                .zip(&self.transmission_residues)
                .map(|(w, t)| t / (omega - w))
                .sum::<C64>()
    }
}
