//! Two-photon pulse scattering from a periodic array of two-level atoms
//! coupled to a waveguide.
//!
//! Units: the single-atom decay rate into the waveguide is 1 and energies
//! are measured from the atomic resonance. Times are in units of the
//! inverse decay rate.

pub mod config;
pub mod double;
pub mod error;
pub mod field;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod observables;
pub mod oracle;
pub mod pulse;
pub mod single;
pub mod spectra;

pub use config::{ArrayConfig, Direction, PHI_MIN};
pub use double::{
    build_pair_hamiltonian, diagonalize_double, pair_basis, q_matrix, sigma_matrix, DoubleExcitationSpectrum,
};
pub use error::{Error, Result};
pub use field::{extract_cut, wavefunction_grid, Cut, CutKind, CutSpec, GridSpec, TwoPhotonField};
pub use observables::{duration_sweep, pulse_duration, Duration, MaskKind, SweepResult, SweepRow};
pub use pulse::{
    coherent_smooth, incoherent_wavefunction, pair_coupling_u, pair_coupling_v, ModeMask, PulseModel,
    SeparableField,
};
pub use single::{
    build_single_hamiltonian, coupling_amplitude, diagonalize_single, green_function, reflection, transmission,
    SingleExcitationSpectrum, SingleModel,
};
pub use spectra::Spectra;
