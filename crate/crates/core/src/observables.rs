//! Transmitted-pulse duration and its parameter sweeps.

use serde::Serialize;

use crate::config::ArrayConfig;
use crate::error::{Error, Result};
use crate::pulse::{ModeMask, PulseModel, SeparableField};
use crate::spectra::Spectra;

/// Below this smooth-part norm the duration is undefined.
pub const NORM_FLOOR: f64 = 1e-12;
/// Relative change and tail fraction accepted by the window-doubling loop.
pub const DURATION_TOL: f64 = 1e-3;
pub const INITIAL_WINDOW: f64 = 20.0;
pub const MAX_WINDOW: f64 = 1e12;

/// Which eigenstates enter the field used for `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskKind {
    #[default]
    Full,
    SuperradiantOnly,
}

impl MaskKind {
    pub fn build(self, spectra: &Spectra) -> ModeMask {
        match self {
            MaskKind::Full => ModeMask::full(spectra),
            MaskKind::SuperradiantOnly => ModeMask::superradiant_only(spectra),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Duration {
    pub t: f64,
    pub inv_t: f64,
    /// Last window length examined by the doubling loop.
    pub t_max: f64,
    pub converged: bool,
    /// Larger of the norm and first-moment fractions outside the last window.
    pub tail_est: f64,
}

/// Mean detection time `T = int t1 |psi|^2 / int |psi|^2` of the smooth
/// transmitted field.
///
/// The moments are exact integrals of the exponential-polynomial form of
/// the field. Windowed moments over `[0, t_max]` are doubled from
/// [`INITIAL_WINDOW`] until `T` settles and the tail fraction is below
/// [`DURATION_TOL`]; the reported `T` is the untruncated value.
pub fn pulse_duration(cfg: &ArrayConfig) -> Result<Duration> {
    let spectra = Spectra::compute(cfg)?;
    pulse_duration_masked(&spectra, &ModeMask::full(&spectra))
}

pub fn pulse_duration_masked(spectra: &Spectra, mask: &ModeMask) -> Result<Duration> {
    let cfg = spectra.cfg();
    if cfg.n_atoms >= 2 {
        cfg.require_pulse_range()?;
    }
    let field = PulseModel::new(spectra, mask)?.separable().total();
    duration_of(&field, cfg.n_atoms)
}

pub fn duration_of(field: &SeparableField, n_atoms: usize) -> Result<Duration> {
    let (norm, first) = field.moments();
    if !(norm >= NORM_FLOOR) {
        return Err(Error::DegenerateField { n_atoms });
    }
    let t = first / norm;
    let mut window = INITIAL_WINDOW;
    let mut previous = f64::NAN;
    loop {
        let (norm_w, first_w) = field.moments_windowed(window);
        let t_w = first_w / norm_w;
        let tail_est = (1.0 - norm_w / norm).abs().max((1.0 - first_w / first).abs());
        let change = ((t_w - previous) / t_w).abs();
        let converged = change < DURATION_TOL && tail_est < DURATION_TOL;
        if converged || window >= MAX_WINDOW {
            return Ok(Duration {
                t,
                inv_t: 1.0 / t,
                t_max: window,
                converged,
                tail_est,
            });
        }
        previous = t_w;
        window *= 2.0;
    }
}

/// Trapezoidal estimate of `T` on `[0, t_max]^2` with `steps` intervals per axis.
pub fn duration_on_grid(field: &SeparableField, t_max: f64, steps: usize) -> f64 {
    let h = t_max / steps as f64;
    let weight = |k: usize| if k == 0 || k == steps { 0.5 } else { 1.0 };
    let (mut norm, mut first) = (0.0, 0.0);
    for i in 0..=steps {
        let t1 = i as f64 * h;
        for j in 0..=steps {
            let p = weight(i) * weight(j) * field.eval(t1, j as f64 * h).norm_sqr();
            norm += p;
            first += p * t1;
        }
    }
    first / norm
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub phi: f64,
    pub outcome: std::result::Result<Duration, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn failures(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.outcome.is_err())
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn phi_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(Error::InvalidGrid(format!("phi grid [{lo}, {hi}] with {n} points")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect())
}

fn sweep_row(n: usize, phi: f64, mask: MaskKind) -> SweepRow {
    let outcome = ArrayConfig::new(n, phi)
        .and_then(|cfg| {
            cfg.require_pulse_range()?;
            Spectra::compute(&cfg)
        })
        .and_then(|spectra| pulse_duration_masked(&spectra, &mask.build(&spectra)))
        .map_err(|e| e.to_string());
    SweepRow { n, phi, outcome }
}

/// `T` over the product of atom numbers and phases, ordered by `(N, phi)`.
///
/// Rows fail independently. With the `parallel` feature the rows run on
/// the current rayon pool; the ordering does not depend on it.
pub fn duration_sweep(n_list: &[usize], phis: &[f64], mask: MaskKind) -> SweepResult {
    let mut tasks: Vec<(usize, f64)> = n_list
        .iter()
        .flat_map(|&n| phis.iter().map(move |&phi| (n, phi)))
        .collect();
    tasks.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

    #[cfg(feature = "parallel")]
    let rows = {
        use rayon::prelude::*;
        tasks.par_iter().map(|&(n, phi)| sweep_row(n, phi, mask)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows = tasks.iter().map(|&(n, phi)| sweep_row(n, phi, mask)).collect();

    SweepResult { rows }
}
