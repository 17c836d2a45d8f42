//! Sampled two-photon amplitudes: rectangular grids and one-dimensional cuts.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::config::ArrayConfig;
use crate::error::{Error, Result};
use crate::pulse::{ForwardDelta, ModeMask, PulseModel, SeparableParts};

/// Largest grid step, in units of `1 / (N gamma)`, that still resolves the
/// superradiant time scale.
pub const COARSE_STEP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    /// `steps + 1` points `0, h, ..., t_max`.
    Uniform { t_max: f64, steps: usize },
    /// `0` followed by `steps` geometrically spaced points from `t_min` to `t_max`.
    Geometric { t_min: f64, t_max: f64, steps: usize },
}

impl GridSpec {
    pub fn times(&self) -> Result<Vec<f64>> {
        match *self {
            GridSpec::Uniform { t_max, steps } => {
                if steps == 0 || !(t_max > 0.0) || !t_max.is_finite() {
                    return Err(Error::InvalidGrid(format!("uniform grid t_max={t_max} steps={steps}")));
                }
                Ok((0..=steps).map(|k| t_max * k as f64 / steps as f64).collect())
            }
            GridSpec::Geometric { t_min, t_max, steps } => {
                if steps < 2 || !(t_min > 0.0) || !(t_max > t_min) || !t_max.is_finite() {
                    return Err(Error::InvalidGrid(format!(
                        "geometric grid t_min={t_min} t_max={t_max} steps={steps}"
                    )));
                }
                let ratio = (t_max / t_min).ln() / (steps - 1) as f64;
                let mut t = vec![0.0];
                t.extend((0..steps).map(|k| t_min * (ratio * k as f64).exp()));
                Ok(t)
            }
        }
    }
}

/// Coherent and incoherent amplitudes on a square time grid.
///
/// Values are stored row-major with `t1 = times[i]` along rows.
#[derive(Debug, Clone)]
pub struct TwoPhotonField {
    pub cfg: ArrayConfig,
    pub grid: GridSpec,
    pub mask: ModeMask,
    pub times: Vec<f64>,
    pub coherent: Vec<C64>,
    pub incoherent: Vec<C64>,
    pub forward_delta: ForwardDelta,
    pub warnings: Vec<String>,
}

impl TwoPhotonField {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn at(&self, i: usize, j: usize) -> (C64, C64) {
        let k = i * self.len() + j;
        (self.coherent[k], self.incoherent[k])
    }

    /// Values on `t1 = t2`.
    pub fn diagonal(&self) -> Vec<(f64, C64, C64)> {
        (0..self.len())
            .map(|i| {
                let (c, n) = self.at(i, i);
                (self.times[i], c, n)
            })
            .collect()
    }

    /// Values along `t2 = times[j]`.
    pub fn edge(&self, j: usize) -> Vec<(f64, C64, C64)> {
        (0..self.len())
            .map(|i| {
                let (c, n) = self.at(i, j);
                (self.times[i], c, n)
            })
            .collect()
    }
}

fn forward_delta(mask: &ModeMask) -> ForwardDelta {
    ForwardDelta {
        double_delta: 1.0,
        mixed: !mask.included_single.is_empty(),
    }
}

/// Samples the field of `model` on `grid`; each unordered pair is evaluated once.
pub fn wavefunction_grid(model: &PulseModel, grid: GridSpec) -> Result<TwoPhotonField> {
    let times = grid.times()?;
    let cfg = *model.spectra().cfg();
    let mut warnings = Vec::new();
    let limit = COARSE_STEP / (cfg.n_atoms as f64 * cfg.gamma_1d);
    let step = times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if step > limit {
        warnings.push(format!(
            "grid too coarse: step {step:.3e} exceeds {limit:.3e}; superradiant features unresolved"
        ));
    }
    let parts = model.separable();
    let n = times.len();
    let mut coherent = vec![C64::new(0.0, 0.0); n * n];
    let mut incoherent = vec![C64::new(0.0, 0.0); n * n];
    let rows: Vec<Vec<(C64, C64)>> = map_rows(n, |i| {
        (i..n)
            .map(|j| (parts.coherent.eval(times[i], times[j]), parts.incoherent.eval(times[i], times[j])))
            .collect()
    });
    for (i, row) in rows.into_iter().enumerate() {
        for (off, (c, m)) in row.into_iter().enumerate() {
            let j = i + off;
            coherent[i * n + j] = c;
            coherent[j * n + i] = c;
            incoherent[i * n + j] = m;
            incoherent[j * n + i] = m;
        }
    }
    Ok(TwoPhotonField {
        cfg,
        grid,
        mask: model.mask().clone(),
        times,
        coherent,
        incoherent,
        forward_delta: forward_delta(model.mask()),
        warnings,
    })
}

#[cfg(feature = "parallel")]
fn map_rows<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_rows<T, F: Fn(usize) -> T>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CutKind {
    /// `t1 = t2 = s`, `s` in `[0, extent]`.
    Diagonal,
    /// `t1 + t2 = value`, parametrized by `s = t1 - t2` in `[-value, value]`.
    Antidiagonal,
    /// `t2 = value`, `t1 = s` in `[0, extent]`.
    Edge,
}

impl std::str::FromStr for CutKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diagonal" => Ok(CutKind::Diagonal),
            "antidiagonal" => Ok(CutKind::Antidiagonal),
            "edge" => Ok(CutKind::Edge),
            other => Err(Error::InvalidConfig(format!("unknown cut kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutSpec {
    pub kind: CutKind,
    pub value: f64,
    pub extent: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutPoint {
    pub s: f64,
    pub t1: f64,
    pub t2: f64,
    pub coherent: C64,
    pub incoherent: C64,
}

#[derive(Debug, Clone)]
pub struct Cut {
    pub cfg: ArrayConfig,
    pub spec: CutSpec,
    pub mask: ModeMask,
    pub points: Vec<CutPoint>,
}

impl CutSpec {
    fn coordinates(&self) -> Result<Vec<(f64, f64, f64)>> {
        if self.steps == 0 || !self.value.is_finite() || !self.extent.is_finite() {
            return Err(Error::InvalidGrid(format!("cut {self:?}")));
        }
        let lin = |lo: f64, hi: f64| -> Vec<f64> {
            (0..=self.steps)
                .map(|k| lo + (hi - lo) * k as f64 / self.steps as f64)
                .collect()
        };
        Ok(match self.kind {
            CutKind::Diagonal => {
                if !(self.extent > 0.0) {
                    return Err(Error::InvalidGrid("diagonal cut needs a positive extent".into()));
                }
                lin(0.0, self.extent).into_iter().map(|s| (s, s, s)).collect()
            }
            CutKind::Antidiagonal => {
                if !(self.value > 0.0) {
                    return Err(Error::InvalidGrid("antidiagonal cut needs t1 + t2 > 0".into()));
                }
                lin(-self.value, self.value)
                    .into_iter()
                    .map(|s| (s, 0.5 * (self.value + s), 0.5 * (self.value - s)))
                    .collect()
            }
            CutKind::Edge => {
                if !(self.extent > 0.0) || self.value < 0.0 {
                    return Err(Error::InvalidGrid("edge cut needs t2 >= 0 and a positive extent".into()));
                }
                lin(0.0, self.extent).into_iter().map(|s| (s, s, self.value)).collect()
            }
        })
    }
}

pub fn extract_cut(model: &PulseModel, spec: CutSpec) -> Result<Cut> {
    let parts = model.separable();
    cut_from_parts(&parts, model, spec)
}

fn cut_from_parts(parts: &SeparableParts, model: &PulseModel, spec: CutSpec) -> Result<Cut> {
    let points = spec
        .coordinates()?
        .into_iter()
        .map(|(s, t1, t2)| CutPoint {
            s,
            t1,
            t2,
            coherent: parts.coherent.eval(t1, t2),
            incoherent: parts.incoherent.eval(t1, t2),
        })
        .collect();
    Ok(Cut {
        cfg: *model.spectra().cfg(),
        spec,
        mask: model.mask().clone(),
        points,
    })
}
