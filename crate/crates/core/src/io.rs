//! Text formats: JSON for spectra and oracle reports, CSV for fields, cuts
//! and sweeps. Floats are written with 17 significant digits.

use std::io::{self, Write};

use num_complex::Complex64 as C64;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::config::ArrayConfig;
use crate::field::{Cut, TwoPhotonField};
use crate::linalg::CMatrix;
use crate::observables::SweepResult;
use crate::oracle::OracleReport;
use crate::pulse::ModeMask;
use crate::spectra::Spectra;

/// Scientific notation with 17 significant digits; non-finite values as `NaN`, `inf`, `-inf`.
pub fn sci(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// JSON number in [`sci`] form (`null` when not finite).
#[derive(Debug, Clone, Copy)]
pub struct Sci(pub f64);

impl Serialize for Sci {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        RawValue::from_string(sci(self.0))
            .map_err(serde::ser::Error::custom)?
            .serialize(serializer)
    }
}

/// Complex number as a `[re, im]` pair.
#[derive(Debug, Clone, Copy)]
pub struct Cx(pub C64);

impl Serialize for Cx {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [Sci(self.0.re), Sci(self.0.im)].serialize(serializer)
    }
}

fn cx_vec(v: &[C64]) -> Vec<Cx> {
    v.iter().copied().map(Cx).collect()
}

fn columns(m: &CMatrix) -> Vec<Vec<Cx>> {
    m.column_iter().map(|c| c.iter().copied().map(Cx).collect()).collect()
}

#[derive(Serialize)]
pub struct ConfigJson {
    n_atoms: usize,
    phase: Sci,
    gamma_1d: Sci,
    omega_0: Sci,
}

impl From<&ArrayConfig> for ConfigJson {
    fn from(cfg: &ArrayConfig) -> Self {
        Self {
            n_atoms: cfg.n_atoms,
            phase: Sci(cfg.phase),
            gamma_1d: Sci(cfg.gamma_1d),
            omega_0: Sci(cfg.omega_0),
        }
    }
}

#[derive(Serialize)]
struct SingleJson {
    omega: Vec<Cx>,
    modes: Vec<Vec<Cx>>,
    s_plus: Vec<Vec<Cx>>,
    s_minus: Vec<Vec<Cx>>,
    t_res: Vec<Cx>,
    superradiant: usize,
}

#[derive(Serialize)]
struct DoubleJson {
    epsilon: Vec<Cx>,
    pair_basis: Vec<(usize, usize)>,
    psi: Vec<Vec<Cx>>,
    d: Vec<Vec<Cx>>,
}

#[derive(Serialize)]
struct SpectrumJson {
    config: ConfigJson,
    single: SingleJson,
    double: DoubleJson,
}

/// Both spectra; mode-indexed arrays are `[mode][atom]` (or `[state][pair]`).
pub fn spectrum_json(spectra: &Spectra) -> String {
    let s = &spectra.single;
    let d = &spectra.double;
    let doc = SpectrumJson {
        config: spectra.cfg().into(),
        single: SingleJson {
            omega: cx_vec(&s.eigenvalues),
            modes: columns(&s.eigenvectors),
            s_plus: s.coupling_plus.iter().map(|v| cx_vec(v)).collect(),
            s_minus: s.coupling_minus.iter().map(|v| cx_vec(v)).collect(),
            t_res: cx_vec(&s.transmission_residues),
            superradiant: s.superradiant_index(),
        },
        double: DoubleJson {
            epsilon: cx_vec(&d.eigenvalues),
            pair_basis: d.pair_basis.clone(),
            psi: columns(&d.eigenvectors),
            d: d.emission.iter().map(|v| cx_vec(v)).collect(),
        },
    };
    to_json(&doc)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable document");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct MaskJson<'a> {
    included_single: &'a [usize],
    included_double: &'a [usize],
}

impl<'a> From<&'a ModeMask> for MaskJson<'a> {
    fn from(m: &'a ModeMask) -> Self {
        Self {
            included_single: &m.included_single,
            included_double: &m.included_double,
        }
    }
}

#[derive(Serialize)]
struct GridJson {
    kind: &'static str,
    t_min: Option<Sci>,
    t_max: Sci,
    steps: usize,
}

#[derive(Serialize)]
struct FieldMeta<'a> {
    config: ConfigJson,
    mask: MaskJson<'a>,
    grid: GridJson,
    forward_delta: ForwardJson,
}

#[derive(Serialize)]
struct ForwardJson {
    double_delta: Sci,
    mixed: bool,
}

const FIELD_COLUMNS: &str = "re_coh,im_coh,re_incoh,im_incoh,abs_incoh,prob_incoh";

fn write_values<W: Write>(out: &mut W, coh: C64, inc: C64) -> io::Result<()> {
    write!(
        out,
        "{},{},{},{},{},{}",
        sci(coh.re),
        sci(coh.im),
        sci(inc.re),
        sci(inc.im),
        sci(inc.norm()),
        sci(inc.norm_sqr())
    )
}

/// Field CSV: a `# {json}` metadata line, a header, then one row per grid point.
pub fn write_field_csv<W: Write>(out: &mut W, field: &TwoPhotonField) -> io::Result<()> {
    use crate::field::GridSpec;
    let grid = match field.grid {
        GridSpec::Uniform { t_max, steps } => GridJson {
            kind: "uniform",
            t_min: None,
            t_max: Sci(t_max),
            steps,
        },
        GridSpec::Geometric { t_min, t_max, steps } => GridJson {
            kind: "geometric",
            t_min: Some(Sci(t_min)),
            t_max: Sci(t_max),
            steps,
        },
    };
    let meta = FieldMeta {
        config: (&field.cfg).into(),
        mask: (&field.mask).into(),
        grid,
        forward_delta: ForwardJson {
            double_delta: Sci(field.forward_delta.double_delta),
            mixed: field.forward_delta.mixed,
        },
    };
    writeln!(out, "# {}", serde_json::to_string(&meta).expect("serializable"))?;
    writeln!(out, "t1,t2,{FIELD_COLUMNS}")?;
    for (i, &t1) in field.times.iter().enumerate() {
        for (j, &t2) in field.times.iter().enumerate() {
            let (c, n) = field.at(i, j);
            write!(out, "{},{},", sci(t1), sci(t2))?;
            write_values(out, c, n)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CutMeta<'a> {
    config: ConfigJson,
    mask: MaskJson<'a>,
    kind: crate::field::CutKind,
    value: Sci,
    extent: Sci,
    steps: usize,
}

/// Cut CSV: metadata line, header, and one row per sample along the cut.
pub fn write_cut_csv<W: Write>(out: &mut W, cut: &Cut) -> io::Result<()> {
    let meta = CutMeta {
        config: (&cut.cfg).into(),
        mask: (&cut.mask).into(),
        kind: cut.spec.kind,
        value: Sci(cut.spec.value),
        extent: Sci(cut.spec.extent),
        steps: cut.spec.steps,
    };
    writeln!(out, "# {}", serde_json::to_string(&meta).expect("serializable"))?;
    writeln!(out, "s,t1,t2,{FIELD_COLUMNS}")?;
    for p in &cut.points {
        write!(out, "{},{},{},", sci(p.s), sci(p.t1), sci(p.t2))?;
        write_values(out, p.coherent, p.incoherent)?;
        writeln!(out)?;
    }
    Ok(())
}

pub const SWEEP_HEADER: &str = "N,phi,T,inv_T,t_max,converged,tail_est";

/// Sweep CSV; failed rows carry `NaN` values and `converged = false`.
pub fn write_sweep_csv<W: Write>(out: &mut W, sweep: &SweepResult) -> io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for row in &sweep.rows {
        match &row.outcome {
            Ok(d) => writeln!(
                out,
                "{},{},{},{},{},{},{}",
                row.n,
                sci(row.phi),
                sci(d.t),
                sci(d.inv_t),
                sci(d.t_max),
                d.converged,
                sci(d.tail_est)
            )?,
            Err(_) => writeln!(out, "{},{},NaN,NaN,NaN,false,NaN", row.n, sci(row.phi))?,
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct PointJson {
    t1: Sci,
    t2: Sci,
}

#[derive(Serialize)]
struct ReportJson {
    point: PointJson,
    analytic: Cx,
    numeric: Cx,
    abs_err: Sci,
    rel_err: Sci,
    quadrature_err: Sci,
}

#[derive(Serialize)]
struct OracleDoc {
    config: ConfigJson,
    reports: Vec<ReportJson>,
}

pub fn oracle_json(cfg: &ArrayConfig, reports: &[OracleReport]) -> String {
    let doc = OracleDoc {
        config: cfg.into(),
        reports: reports
            .iter()
            .map(|r| ReportJson {
                point: PointJson {
                    t1: Sci(r.point.0),
                    t2: Sci(r.point.1),
                },
                analytic: Cx(r.analytic),
                numeric: Cx(r.numeric),
                abs_err: Sci(r.abs_err),
                rel_err: Sci(r.rel_err),
                quadrature_err: Sci(r.quadrature_err),
            })
            .collect(),
    };
    to_json(&doc)
}
