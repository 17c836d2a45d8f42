//! Two-excitation sector in the hard-core pair basis, the two-photon
//! self-energy and its inverse.

use num_complex::Complex64 as C64;

use crate::config::ArrayConfig;
use crate::error::{Error, Result};
use crate::linalg::{eig_symmetric, CMatrix};
use crate::single::{build_single_hamiltonian, SingleExcitationSpectrum, EPS_POLE};

const I: C64 = C64::new(0.0, 1.0);

/// Ordered list of the pairs `(m, n)`, `m < n`, spanning the hard-core
/// two-excitation sector.
pub fn pair_basis(n_atoms: usize) -> Vec<(usize, usize)> {
    (0..n_atoms)
        .flat_map(|m| (m + 1..n_atoms).map(move |n| (m, n)))
        .collect()
}

/// Position of the unordered pair `{m, n}` in [`pair_basis`].
pub fn pair_index(n_atoms: usize, m: usize, n: usize) -> usize {
    let (a, b) = if m < n { (m, n) } else { (n, m) };
    debug_assert!(a != b && b < n_atoms);
    a * (2 * n_atoms - a - 1) / 2 + (b - a - 1)
}

/// Two-excitation Hamiltonian on normalized hard-core pair states
/// `|mn> = sigma_m^dag sigma_n^dag |0>`, `m < n`.
///
/// Doubly occupied sites are excluded from the basis, which is the exact
/// infinite-anharmonicity limit. The eigenvalues are `2 epsilon`.
pub fn build_pair_hamiltonian(cfg: &ArrayConfig) -> Result<CMatrix> {
    if cfg.n_atoms < 2 {
        return Err(Error::EmptySector);
    }
    let h = build_single_hamiltonian(cfg);
    let basis = pair_basis(cfg.n_atoms);
    let p = basis.len();
    Ok(CMatrix::from_fn(p, p, |row, col| {
        let (a, b) = basis[row];
        let (c, d) = basis[col];
        let mut z = C64::from(0.0);
        if b == d {
            z += h[(a, c)];
        }
        if a == c {
            z += h[(b, d)];
        }
        if b == c {
            z += h[(a, d)];
        }
        if a == d {
            z += h[(b, c)];
        }
        z
    }))
}

/// Eigenstates of the two-excitation sector.
///
/// Pair amplitudes are stored on `m < n`. The symmetric wavefunction on all
/// ordered pairs is `psi_full(m, n) = psi(m, n) / sqrt(2)` with zero diagonal,
/// so that `sum_{m n} psi_full(m, n)^2 = 1`.
#[derive(Debug, Clone)]
pub struct DoubleExcitationSpectrum {
    pub cfg: ArrayConfig,
    pub pair_basis: Vec<(usize, usize)>,
    /// Single-photon-scale energies `epsilon_k` (the pair eigenvalue is `2 epsilon_k`).
    pub eigenvalues: Vec<C64>,
    /// Column `k` is `psi^k` on the pair basis, `sum_{m<n} psi^2 = 1`.
    pub eigenvectors: CMatrix,
    /// `emission[k][m] = d_m^k = sum_n H_mn psi_full^k(m, n)`.
    ///
    /// This is the normalization for which the resonance expansion of `Q`
    /// inverts the self-energy exactly (Schur complement of the doubly
    /// occupied block of the free two-boson resolvent).
    pub emission: Vec<Vec<C64>>,
}

impl DoubleExcitationSpectrum {
    /// The (empty) two-excitation sector of a single atom.
    pub fn empty(cfg: &ArrayConfig) -> Self {
        Self {
            cfg: *cfg,
            pair_basis: vec![],
            eigenvalues: vec![],
            eigenvectors: CMatrix::zeros(0, 0),
            emission: vec![],
        }
    }

    pub fn n_states(&self) -> usize {
        self.eigenvalues.len()
    }
}

pub fn diagonalize_double(cfg: &ArrayConfig) -> Result<DoubleExcitationSpectrum> {
    let h2 = build_pair_hamiltonian(cfg)?;
    let eig = eig_symmetric(&h2)?;
    let h = build_single_hamiltonian(cfg);
    let n = cfg.n_atoms;
    let basis = pair_basis(n);
    let scale = std::f64::consts::FRAC_1_SQRT_2;

    let emission = (0..basis.len())
        .map(|k| {
            (0..n)
                .map(|m| {
                    (0..n)
                        .filter(|&j| j != m)
                        .map(|j| h[(m, j)] * eig.vectors[(pair_index(n, m, j), k)])
                        .sum::<C64>()
                        * scale
                })
                .collect()
        })
        .collect();

    Ok(DoubleExcitationSpectrum {
        cfg: *cfg,
        pair_basis: basis,
        eigenvalues: eig.values.iter().map(|z| z * 0.5).collect(),
        eigenvectors: eig.vectors,
        emission,
    })
}

/// Two-excitation spectrum, empty for a single atom.
pub fn diagonalize_double_or_empty(cfg: &ArrayConfig) -> Result<DoubleExcitationSpectrum> {
    if cfg.n_atoms < 2 {
        Ok(DoubleExcitationSpectrum::empty(cfg))
    } else {
        diagonalize_double(cfg)
    }
}

/// Self-energy `Sigma_mn(eps) = int dw/2pi G_mn(w) G_mn(2 eps - w)` from the
/// residue theorem:
/// `Sigma_mn = i sum_{nu mu} v_m^nu v_n^nu v_m^mu v_n^mu / (w_nu + w_mu - 2 eps)`.
pub fn sigma_matrix(spectrum: &SingleExcitationSpectrum, epsilon: C64) -> Result<CMatrix> {
    let n = spectrum.n_modes();
    let w = &spectrum.eigenvalues;
    let v = &spectrum.eigenvectors;
    let mut sigma = CMatrix::zeros(n, n);
    for nu in 0..n {
        for mu in 0..n {
            let denom = w[nu] + w[mu] - 2.0 * epsilon;
            if denom.norm() < EPS_POLE {
                return Err(Error::SingularFrequency {
                    re: epsilon.re,
                    im: epsilon.im,
                    distance: denom.norm(),
                });
            }
            let weight = I / denom;
            for a in 0..n {
                for b in a..n {
                    let z = weight * v[(a, nu)] * v[(b, nu)] * v[(a, mu)] * v[(b, mu)];
                    sigma[(a, b)] += z;
                }
            }
        }
    }
    for a in 0..n {
        for b in 0..a {
            sigma[(a, b)] = sigma[(b, a)];
        }
    }
    Ok(sigma)
}

/// Resonance expansion of the inverse self-energy,
/// `Q_mn = 2 (i eps - gamma) delta_mn + sum_k 2i d_m^k d_n^k / (eps_k - eps)`.
pub fn q_matrix(spectrum: &DoubleExcitationSpectrum, epsilon: C64) -> Result<CMatrix> {
    let n = spectrum.cfg.n_atoms;
    let gamma = spectrum.cfg.gamma_1d;
    let mut q = CMatrix::identity(n, n) * (2.0 * (I * epsilon - gamma));
    for (k, eps_k) in spectrum.eigenvalues.iter().enumerate() {
        let denom = eps_k - epsilon;
        if denom.norm() < EPS_POLE {
            return Err(Error::SingularFrequency {
                re: epsilon.re,
                im: epsilon.im,
                distance: denom.norm(),
            });
        }
        let d = &spectrum.emission[k];
        let weight = 2.0 * I / denom;
        for a in 0..n {
            for b in 0..n {
                q[(a, b)] += weight * d[a] * d[b];
            }
        }
    }
    Ok(q)
}
