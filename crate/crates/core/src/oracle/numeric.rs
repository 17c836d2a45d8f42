//! Brute-force references built only from the Hamiltonian and linear
//! solves: frequency integrals by adaptive quadrature, time-domain
//! amplitudes by numerical inverse Fourier transforms.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::quadrature::{integrate_vec, pole_breakpoints, Tolerance, WG, WGK, XGK};
use crate::config::Direction;
use crate::double::{q_matrix, DoubleExcitationSpectrum};
use crate::error::{Error, Result};
use crate::linalg::{resolvent, CMatrix, CVector};
use crate::single::SingleModel;

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Where the inverse self-energy comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QSource {
    /// Pole expansion over double-excited states.
    #[default]
    Expansion,
    /// Matrix inverse of [`sigma_numeric`].
    Quadrature,
}

/// Value with an estimated absolute error.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

/// Real-line integral of `f` split into `[-window, window]` with the given
/// breakpoints and the two tails mapped by `omega = +-window / u`.
fn integrate_real_line<F>(mut f: F, dim: usize, breakpoints: &[f64], window: f64, tol: Tolerance) -> Result<Estimate<Vec<C64>>>
where
    F: FnMut(f64, &mut [C64]),
{
    let core = integrate_vec(&mut f, dim, breakpoints, tol)?;
    let mut buf = vec![ZERO; dim];
    let mut tails = |sign: f64| {
        integrate_vec(
            |u: f64, out: &mut [C64]| {
                if u <= 0.0 {
                    out.fill(ZERO);
                    return;
                }
                f(sign * window / u, &mut buf);
                let jac = window / (u * u);
                for (o, b) in out.iter_mut().zip(&buf) {
                    *o = b * jac;
                }
            },
            dim,
            &[0.0, 1e-3, 1e-2, 0.1, 0.5, 1.0],
            tol,
        )
    };
    let right = tails(1.0)?;
    let left = tails(-1.0)?;
    let value = (0..dim)
        .map(|k| (core.value[k] + right.value[k] + left.value[k]) / (2.0 * PI))
        .collect();
    Ok(Estimate {
        value,
        error: (core.error + right.error + left.error) / (2.0 * PI),
    })
}

fn window_for(model: &SingleModel) -> f64 {
    50.0 * model.cfg.n_atoms as f64 * model.cfg.gamma_1d
}

/// `Sigma_mn(eps) = int G_mn(w) G_mn(2 eps - w) dw / 2 pi` by quadrature.
///
/// The integral runs along `Im w = Im eps`, where both factors share the
/// same distance from the real axis. This continues the real-line
/// definition to `Im eps < 0` as long as the line still separates the
/// poles of the two factors, i.e. `Im eps > -Gamma_min`.
pub fn sigma_numeric(model: &SingleModel, epsilon: C64, tol: Tolerance) -> Result<Estimate<CMatrix>> {
    let n = model.cfg.n_atoms;
    let eta = epsilon.im;
    let gamma_min = model.poles().iter().map(|p| -p.im).fold(f64::INFINITY, f64::min);
    if eta <= -gamma_min {
        return Err(Error::InvalidConfig(format!(
            "Im eps = {eta} below the slowest single-mode rate {gamma_min}: no separating contour"
        )));
    }
    let shift = C64::new(0.0, eta);
    let window = window_for(model).max(4.0 * epsilon.re.abs());
    let mut poles: Vec<C64> = model.poles().iter().map(|p| p - shift).collect();
    poles.extend(model.poles().iter().map(|p| 2.0 * epsilon - p - shift));
    let pts = pole_breakpoints(&poles, window);
    let est = integrate_real_line(
        |x, out: &mut [C64]| {
            let w = C64::from(x) + shift;
            let a = resolvent(&model.hamiltonian, w);
            let b = resolvent(&model.hamiltonian, 2.0 * epsilon - w);
            match (a, b) {
                (Some(a), Some(b)) => {
                    let mut k = 0;
                    for m in 0..n {
                        for j in m..n {
                            out[k] = a[(m, j)] * b[(m, j)];
                            k += 1;
                        }
                    }
                }
                _ => out.fill(C64::new(f64::NAN, f64::NAN)),
            }
        },
        n * (n + 1) / 2,
        &pts,
        window,
        tol,
    )?;
    let mut sigma = CMatrix::zeros(n, n);
    let mut k = 0;
    for m in 0..n {
        for j in m..n {
            sigma[(m, j)] = est.value[k];
            sigma[(j, m)] = est.value[k];
            k += 1;
        }
    }
    Ok(Estimate {
        value: sigma,
        error: est.error,
    })
}

/// `f_j(E) = int s_j^+(w) s_j^+(E - w) dw / 2 pi` by quadrature.
pub fn f_numeric(model: &SingleModel, energy: C64, tol: Tolerance) -> Result<Estimate<Vec<C64>>> {
    let n = model.cfg.n_atoms;
    let window = window_for(model).max(2.0 * energy.re.abs());
    let mut poles: Vec<C64> = model.poles().to_vec();
    poles.extend(model.poles().iter().map(|p| energy - p));
    let pts = pole_breakpoints(&poles, window);
    integrate_real_line(
        |w, out: &mut [C64]| {
            let a = model.coupling_unchecked(Direction::Plus, C64::from(w));
            let b = model.coupling_unchecked(Direction::Plus, energy - w);
            for j in 0..n {
                out[j] = a[j] * b[j];
            }
        },
        n,
        &pts,
        window,
        tol,
    )
}

fn inverse_sigma(
    model: &SingleModel,
    double: &DoubleExcitationSpectrum,
    epsilon: C64,
    source: QSource,
    tol: Tolerance,
) -> Result<Estimate<CMatrix>> {
    match source {
        QSource::Expansion => Ok(Estimate {
            value: q_matrix(double, epsilon)?,
            error: 0.0,
        }),
        QSource::Quadrature => {
            let sigma = sigma_numeric(model, epsilon, tol)?;
            let q = sigma.value.clone().try_inverse().ok_or(Error::SingularFrequency {
                re: epsilon.re,
                im: epsilon.im,
                distance: 0.0,
            })?;
            // first-order propagation of the quadrature error
            let error = sigma.error * q.norm() * q.norm();
            Ok(Estimate { value: q, error })
        }
    }
}

/// `u_i(E) = sum_j [Sigma^{-1}(E/2)]_ij f_j(E)`.
fn u_numeric(
    model: &SingleModel,
    double: &DoubleExcitationSpectrum,
    energy: C64,
    source: QSource,
    tol: Tolerance,
) -> Result<Estimate<Vec<C64>>> {
    let q = inverse_sigma(model, double, 0.5 * energy, source, tol)?;
    let f = f_numeric(model, energy, tol)?;
    let fv = CVector::from_vec(f.value.clone());
    let u = &q.value * &fv;
    let error = q.value.norm() * f.error + q.error * fv.norm();
    Ok(Estimate {
        value: u.iter().copied().collect(),
        error,
    })
}

/// Frequency-integrated scattering amplitude for a delta-pulse input,
/// split into its coherent and incoherent parts.
#[derive(Debug, Clone, PartialEq)]
pub struct STilde {
    pub coherent: C64,
    pub incoherent: C64,
    pub error: f64,
}

/// `S(w1', w2') = 2 t t + 2 sum_ij s_i^- s_i^- Q_ij f_j(w1' + w2')`.
pub fn s_tilde_numeric(
    model: &SingleModel,
    double: &DoubleExcitationSpectrum,
    omega1: f64,
    omega2: f64,
    source: QSource,
    tol: Tolerance,
) -> Result<STilde> {
    let (w1, w2) = (C64::from(omega1), C64::from(omega2));
    let coherent = 2.0 * model.transmission(w1)? * model.transmission(w2)?;
    let u = u_numeric(model, double, w1 + w2, source, tol)?;
    let a = model.coupling(Direction::Minus, w1)?;
    let b = model.coupling(Direction::Minus, w2)?;
    let mut incoherent = ZERO;
    let mut weight = 0.0;
    for i in 0..a.len() {
        incoherent += 2.0 * a[i] * b[i] * u.value[i];
        weight += 2.0 * (a[i] * b[i]).norm();
    }
    Ok(STilde {
        coherent,
        incoherent,
        error: weight * u.error,
    })
}

/// Fixed composite Gauss-Kronrod rule with the embedded Gauss weights
/// kept for an error estimate.
#[derive(Debug, Clone, Default)]
struct PanelRule {
    nodes: Vec<f64>,
    kronrod: Vec<f64>,
    gauss: Vec<f64>,
}

impl PanelRule {
    fn new(breakpoints: &[f64], max_panel: f64) -> Self {
        let mut rule = Self::default();
        for w in breakpoints.windows(2) {
            let pieces = ((w[1] - w[0]) / max_panel).ceil().max(1.0) as usize;
            let h = (w[1] - w[0]) / pieces as f64;
            for p in 0..pieces {
                rule.push_panel(w[0] + p as f64 * h, w[0] + (p + 1) as f64 * h);
            }
        }
        rule
    }

    fn push_panel(&mut self, a: f64, b: f64) {
        let (c, half) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.push(c);
        self.kronrod.push(half * WGK[7]);
        self.gauss.push(half * WG[3]);
        for j in 0..7 {
            let g = if j % 2 == 1 { half * WG[j / 2] } else { 0.0 };
            for x in [c - half * XGK[j], c + half * XGK[j]] {
                self.nodes.push(x);
                self.kronrod.push(half * WGK[j]);
                self.gauss.push(g);
            }
        }
    }

    /// `(sum_K, sum_G)` of `values[k] exp(-i x_k t) / 2 pi`.
    fn fourier(&self, values: &[C64], t: f64) -> (C64, C64) {
        let mut k_sum = ZERO;
        let mut g_sum = ZERO;
        for (idx, &x) in self.nodes.iter().enumerate() {
            let term = values[idx] * C64::from_polar(1.0, -x * t);
            k_sum += term * self.kronrod[idx];
            g_sum += term * self.gauss[idx];
        }
        (k_sum / (2.0 * PI), g_sum / (2.0 * PI))
    }
}

/// Tunables for [`psi_incoherent_numeric`].
#[derive(Debug, Clone, Copy)]
pub struct FourierSettings {
    /// Truncation of the frequency meshes.
    pub window: f64,
    /// Largest panel on the frequency meshes.
    pub max_panel: f64,
    pub q_source: QSource,
    /// Tolerance of the inner frequency integrals.
    pub inner: Tolerance,
    /// Tolerance of the outer time integral.
    pub outer: Tolerance,
}

impl Default for FourierSettings {
    fn default() -> Self {
        Self {
            window: 300.0,
            max_panel: 1.5,
            q_source: QSource::Expansion,
            inner: Tolerance {
                abs: 1e-10,
                rel: 1e-9,
                max_intervals: 20_000,
            },
            outer: Tolerance {
                abs: 1e-9,
                rel: 1e-7,
                max_intervals: 2_000,
            },
        }
    }
}

/// Precomputed frequency data for time-domain evaluation of the
/// incoherent amplitude of one configuration.
///
/// With `F_i(t)` the transform of `s_i^-(w)` and `U_i(sigma)` the transform
/// of `u_i(E)`, the product structure of the amplitude in frequency space
/// becomes
/// `psi(t1, t2) = sum_i int_0^min(t1,t2) U_i(sigma) F_i(t1 - sigma) F_i(t2 - sigma) d sigma`,
/// where `U_i` carries a delta at `sigma = 0` from the constant limit of `u_i`.
#[derive(Debug, Clone)]
pub struct IncoherentTransform {
    settings: FourierSettings,
    n: usize,
    /// Mesh for `s^-` and its values minus the `e/(w+i) + b/(w+i)^2` reference.
    omega_rule: PanelRule,
    s_minus: Vec<Vec<C64>>,
    s_e: Vec<C64>,
    s_b: Vec<C64>,
    /// Mesh for `u(E) - u_inf - c/(E+2i) - c2/(E+2i)^2`.
    energy_rule: PanelRule,
    u_rest: Vec<Vec<C64>>,
    u_inf: Vec<C64>,
    u_c1: Vec<C64>,
    u_c2: Vec<C64>,
    /// Accumulated error of the frequency-domain inputs.
    input_error: f64,
}

impl IncoherentTransform {
    pub fn new(model: &SingleModel, double: &DoubleExcitationSpectrum, settings: FourierSettings) -> Result<Self> {
        let n = model.cfg.n_atoms;
        let w = settings.window;
        let minus = model.cfg.plane_waves(Direction::Minus);
        let plus = model.cfg.plane_waves(Direction::Plus);

        // s^-(w) ~ e/w + (H e)/w^2: subtract the matching reference poles at -i.
        let he = &model.hamiltonian * CVector::from_vec(minus.clone());
        let s_e = minus.clone();
        let s_b: Vec<C64> = (0..n).map(|i| he[i] + I * minus[i]).collect();
        let omega_rule = PanelRule::new(&pole_breakpoints(model.poles(), w), settings.max_panel);
        let s_minus_nodes: Vec<Vec<C64>> = omega_rule
            .nodes
            .iter()
            .map(|&x| {
                let s = model.coupling_unchecked(Direction::Minus, C64::from(x));
                let z = C64::new(x, 1.0);
                (0..n).map(|i| s[i] - s_e[i] / z - s_b[i] / (z * z)).collect()
            })
            .collect();
        let s_minus = transpose(&s_minus_nodes, n);

        // u(E) -> u_inf = exp(2 i phi x_i) from the 1/w asymptotics of G.
        let u_inf: Vec<C64> = plus.iter().map(|p| p * p).collect();
        let mut pair_poles = Vec::new();
        for a in model.poles() {
            for b in model.poles() {
                pair_poles.push(a + b);
            }
        }
        pair_poles.extend(double.eigenvalues.iter().map(|e| 2.0 * e));
        let energy_rule = PanelRule::new(&pole_breakpoints(&pair_poles, w), settings.max_panel);
        let mut input_error: f64 = 0.0;
        let mut sample = |e: f64| -> Result<Vec<C64>> {
            let u = u_numeric(model, double, C64::from(e), settings.q_source, settings.inner)?;
            input_error = input_error.max(u.error);
            Ok(u.value.iter().zip(&u_inf).map(|(a, b)| a - b).collect())
        };
        // fit c/(E+2i) + c2/(E+2i)^2 to the far ends of the mesh
        let (zp, zm) = (C64::new(w, 2.0), C64::new(-w, 2.0));
        let (wp, wm) = (sample(w)?, sample(-w)?);
        let det = 1.0 / (zp * zm * zm) - 1.0 / (zm * zp * zp);
        let mut u_c1 = vec![ZERO; n];
        let mut u_c2 = vec![ZERO; n];
        for i in 0..n {
            u_c1[i] = (wp[i] / (zm * zm) - wm[i] / (zp * zp)) / det;
            u_c2[i] = (wm[i] / zp - wp[i] / zm) / det;
        }
        let mut nodes_u = Vec::with_capacity(energy_rule.nodes.len());
        for &e in &energy_rule.nodes {
            let v = sample(e)?;
            let z = C64::new(e, 2.0);
            nodes_u.push((0..n).map(|i| v[i] - u_c1[i] / z - u_c2[i] / (z * z)).collect::<Vec<_>>());
        }
        let u_rest = transpose(&nodes_u, n);
        Ok(Self {
            settings,
            n,
            omega_rule,
            s_minus,
            s_e,
            s_b,
            energy_rule,
            u_rest,
            u_inf,
            u_c1,
            u_c2,
            input_error,
        })
    }

    /// `F_i(t)` with Kronrod and Gauss mesh sums.
    fn f_minus(&self, i: usize, t: f64) -> (C64, C64) {
        if t < 0.0 {
            return (ZERO, ZERO);
        }
        let reference = -I * self.s_e[i] * (-t).exp() - self.s_b[i] * t * (-t).exp();
        let (k, g) = self.omega_rule.fourier(&self.s_minus[i], t);
        (k + reference, g + reference)
    }

    /// Regular part of `U_i(sigma)`.
    fn u_hat(&self, i: usize, sigma: f64) -> (C64, C64) {
        let reference = -I * self.u_c1[i] * (-2.0 * sigma).exp() - self.u_c2[i] * sigma * (-2.0 * sigma).exp();
        let (k, g) = self.energy_rule.fourier(&self.u_rest[i], sigma);
        (k + reference, g + reference)
    }

    /// Incoherent amplitude at `(t1, t2)` with an absolute error estimate.
    pub fn psi(&self, t1: f64, t2: f64) -> Result<Estimate<C64>> {
        if t1 <= 0.0 || t2 <= 0.0 {
            return Ok(Estimate { value: ZERO, error: 0.0 });
        }
        let n = self.n;
        let t_min = t1.min(t2);
        let mut local = ZERO;
        let mut mesh_error = 0.0;
        for i in 0..n {
            let (a1, b1) = self.f_minus(i, t1);
            let (a2, b2) = self.f_minus(i, t2);
            local += self.u_inf[i] * a1 * a2;
            mesh_error += (self.u_inf[i] * (a1 * a2 - b1 * b2)).norm();
        }
        // components: [Kronrod-mesh value, Gauss-mesh value]
        let q = integrate_vec(
            |sigma, out: &mut [C64]| {
                out[0] = ZERO;
                out[1] = ZERO;
                for i in 0..n {
                    let (uk, ug) = self.u_hat(i, sigma);
                    let (ak, ag) = self.f_minus(i, t1 - sigma);
                    let (bk, bg) = self.f_minus(i, t2 - sigma);
                    out[0] += uk * ak * bk;
                    out[1] += ug * ag * bg;
                }
            },
            2,
            &[0.0, 0.5 * t_min, t_min],
            self.settings.outer,
        )?;
        let value = local + q.value[0];
        mesh_error += (q.value[0] - q.value[1]).norm();
        let tail = self.u_c2.iter().map(|c| c.norm()).fold(0.0, f64::max) / (self.settings.window * self.settings.window);
        Ok(Estimate {
            value,
            error: q.error + mesh_error + tail + self.input_error * t_min,
        })
    }
}

fn transpose(rows: &[Vec<C64>], n: usize) -> Vec<Vec<C64>> {
    (0..n).map(|i| rows.iter().map(|r| r[i]).collect()).collect()
}

/// Incoherent amplitude at each point by numerical inverse Fourier transform.
pub fn psi_incoherent_numeric(
    model: &SingleModel,
    double: &DoubleExcitationSpectrum,
    points: &[(f64, f64)],
    settings: FourierSettings,
) -> Result<Vec<Estimate<C64>>> {
    let transform = IncoherentTransform::new(model, double, settings)?;
    points.iter().map(|&(t1, t2)| transform.psi(t1, t2)).collect()
}
