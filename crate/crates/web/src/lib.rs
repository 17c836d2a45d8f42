//! Browser bindings for the interactive demo in `www/`.

use wasm_bindgen::prelude::*;
use wqed_core::io::spectrum_json;
use wqed_core::observables::phi_grid;
use wqed_core::{duration_sweep, wavefunction_grid, ArrayConfig, GridSpec, MaskKind, PulseModel, Spectra};

fn js(e: wqed_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn mask(bright_only: bool) -> MaskKind {
    if bright_only {
        MaskKind::SuperradiantOnly
    } else {
        MaskKind::Full
    }
}

/// Single- and double-excitation spectra as JSON.
#[wasm_bindgen]
pub fn spectrum(n: usize, phi: f64) -> Result<String, JsError> {
    let cfg = ArrayConfig::new(n, phi).map_err(js)?;
    Ok(spectrum_json(&Spectra::compute(&cfg).map_err(js)?))
}

/// `|psi|^2` of the incoherent field on a `(steps + 1)^2` grid over `[0, t_max]`, row-major.
#[wasm_bindgen]
pub fn pulse_map(n: usize, phi: f64, t_max: f64, steps: usize, bright_only: bool) -> Result<Vec<f64>, JsError> {
    let cfg = ArrayConfig::new(n, phi).map_err(js)?;
    let spectra = Spectra::compute(&cfg).map_err(js)?;
    let model = PulseModel::new(&spectra, &mask(bright_only).build(&spectra)).map_err(js)?;
    let field = wavefunction_grid(&model, GridSpec::Uniform { t_max, steps }).map_err(js)?;
    Ok(field.incoherent.iter().map(|z| z.norm_sqr()).collect())
}

/// `1/T` on `steps` phases in `[phi_min, phi_max]`; NaN where the duration is undefined.
#[wasm_bindgen]
pub fn inverse_duration(n: usize, phi_min: f64, phi_max: f64, steps: usize, bright_only: bool) -> Result<Vec<f64>, JsError> {
    let phis = phi_grid(phi_min, phi_max, steps).map_err(js)?;
    let sweep = duration_sweep(&[n], &phis, mask(bright_only));
    Ok(sweep
        .rows
        .iter()
        .map(|r| match &r.outcome {
            Ok(d) if d.converged => d.inv_t,
            _ => f64::NAN,
        })
        .collect())
}
