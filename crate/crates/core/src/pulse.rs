//! Time-domain output wavefunction for a two-photon delta-pulse input.
//!
//! The transmitted amplitude splits into the coherent product
//! `y(t1) y(t2)` of single-photon responses and an incoherent remainder
//! built from the kernels in [`crate::kernels`]. Forward delta components
//! (from the constant asymptote `t(omega) -> 1`) are never sampled; they
//! are recorded symbolically in [`ForwardDelta`].

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::double::q_matrix;
use crate::error::{Error, Result};
use crate::kernels::{kernel_l, kernel_m, DELTA_CONF};
use crate::single::SingleExcitationSpectrum;
use crate::spectra::Spectra;

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Subset of single and double eigenstates kept in the mode sums.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModeMask {
    pub included_single: Vec<usize>,
    pub included_double: Vec<usize>,
}

impl ModeMask {
    pub fn new(spectra: &Spectra, mut single: Vec<usize>, mut double: Vec<usize>) -> Result<Self> {
        single.sort_unstable();
        single.dedup();
        double.sort_unstable();
        double.dedup();
        let (n, p) = (spectra.single.n_modes(), spectra.double.n_states());
        if let Some(&bad) = single.iter().find(|&&k| k >= n) {
            return Err(Error::InvalidMask(format!("single mode {bad} out of range 0..{n}")));
        }
        if let Some(&bad) = double.iter().find(|&&k| k >= p) {
            return Err(Error::InvalidMask(format!("double state {bad} out of range 0..{p}")));
        }
        Ok(Self {
            included_single: single,
            included_double: double,
        })
    }

    pub fn full(spectra: &Spectra) -> Self {
        Self {
            included_single: (0..spectra.single.n_modes()).collect(),
            included_double: (0..spectra.double.n_states()).collect(),
        }
    }

    /// Brightest single-excited mode plus every double-excited state.
    pub fn superradiant_only(spectra: &Spectra) -> Self {
        Self {
            included_single: vec![spectra.single.superradiant_index()],
            included_double: (0..spectra.double.n_states()).collect(),
        }
    }

    pub fn empty() -> Self {
        Self {
            included_single: vec![],
            included_double: vec![],
        }
    }
}

/// Smooth part of the single-photon transmitted response,
/// `y(t) = -i theta(t) sum_mu t_mu exp(-i w_mu t)`.
///
/// The sign follows from closing the inverse Fourier contour in the lower
/// half plane and agrees with direct numerical inversion of `t(omega) - 1`.
pub fn coherent_smooth(single: &SingleExcitationSpectrum, t: f64) -> C64 {
    coherent_smooth_masked(single, t, None)
}

fn coherent_smooth_masked(single: &SingleExcitationSpectrum, t: f64, modes: Option<&[usize]>) -> C64 {
    if t < 0.0 {
        return ZERO;
    }
    let term = |mu: usize| single.transmission_residues[mu] * (-I * single.eigenvalues[mu] * t).exp();
    let sum: C64 = match modes {
        Some(m) => m.iter().map(|&mu| term(mu)).sum(),
        None => (0..single.n_modes()).map(term).sum(),
    };
    -I * sum
}

/// `U_i^r = i s_i^{+,nu} s_i^{+,mu}` for the incoming pair `r = (nu, mu)`.
pub fn pair_coupling_u(single: &SingleExcitationSpectrum, i: usize, nu: usize, mu: usize) -> C64 {
    I * single.coupling_plus[nu][i] * single.coupling_plus[mu][i]
}

/// `V_i^{r k} = -d_i^k sum_j d_j^k s_j^{+,nu} s_j^{+,mu}`.
pub fn pair_coupling_v(spectra: &Spectra, i: usize, (nu, mu): (usize, usize), kappa: usize) -> C64 {
    let d = &spectra.double.emission[kappa];
    let s = &spectra.single.coupling_plus;
    let inner: C64 = (0..d.len()).map(|j| d[j] * s[nu][j] * s[mu][j]).sum();
    -d[i] * inner
}

/// `u_i(eps) = sum_j Q_ij(eps) f_j(2 eps)` with the residue form of
/// `f_j(E) = i sum_{nu mu} s_j^{+,nu} s_j^{+,mu} / (w_nu + w_mu - E)`.
pub fn u_direct(spectra: &Spectra, epsilon: C64) -> Result<Vec<C64>> {
    let q = q_matrix(&spectra.double, epsilon)?;
    let single = &spectra.single;
    let n = single.n_modes();
    let f: Vec<C64> = (0..n)
        .map(|j| {
            let mut acc = ZERO;
            for nu in 0..n {
                for mu in 0..n {
                    acc += single.coupling_plus[nu][j] * single.coupling_plus[mu][j]
                        / (single.eigenvalues[nu] + single.eigenvalues[mu] - 2.0 * epsilon);
                }
            }
            I * acc
        })
        .collect();
    Ok((0..n)
        .map(|i| (0..n).map(|j| q[(i, j)] * f[j]).sum())
        .collect())
}

/// `u_i(eps)` in the relabeled pole form
/// `sum_r (i eps - 1) U_i^r / (eps_r - eps) + sum_{r k} V_i^{rk} / ((eps_r - eps)(eps_k - eps))`.
pub fn u_relabeled(spectra: &Spectra, epsilon: C64) -> Vec<C64> {
    let single = &spectra.single;
    let n = single.n_modes();
    let w = &single.eigenvalues;
    (0..n)
        .map(|i| {
            let mut acc = ZERO;
            for nu in 0..n {
                for mu in 0..n {
                    let eps_r = 0.5 * (w[nu] + w[mu]);
                    acc += (I * epsilon - 1.0) * pair_coupling_u(single, i, nu, mu) / (eps_r - epsilon);
                    for (kappa, eps_k) in spectra.double.eigenvalues.iter().enumerate() {
                        acc += pair_coupling_v(spectra, i, (nu, mu), kappa)
                            / ((eps_r - epsilon) * (eps_k - epsilon));
                    }
                }
            }
            acc
        })
        .collect()
}

/// Mode-sum coefficients of the incoherent amplitude for one mask.
#[derive(Debug, Clone)]
pub struct PulseModel {
    spectra: Spectra,
    mask: ModeMask,
    /// `l_coef[(nu, mu, r)] = sum_i s_i^{-,nu} s_i^{-,mu} U_i^r`, indexed over the mask.
    l_coef: Vec<C64>,
    /// `out_d[(nu, mu, k)] = sum_i s_i^{-,nu} s_i^{-,mu} d_i^k`.
    out_d: Vec<C64>,
    /// `in_d[(r, k)] = sum_j d_j^k s_j^{+,nu'} s_j^{+,mu'}`.
    in_d: Vec<C64>,
}

impl PulseModel {
    pub fn new(spectra: &Spectra, mask: &ModeMask) -> Result<Self> {
        spectra.cfg().require_pulse_range().or_else(|e| {
            if spectra.cfg().n_atoms == 1 {
                Ok(())
            } else {
                Err(e)
            }
        })?;
        let mask = ModeMask::new(spectra, mask.included_single.clone(), mask.included_double.clone())?;
        let single = &spectra.single;
        let n_atoms = spectra.cfg().n_atoms;
        let ss = &mask.included_single;
        let dd = &mask.included_double;
        let (ns, nd) = (ss.len(), dd.len());
        let sm = &single.coupling_minus;
        let sp = &single.coupling_plus;

        let mut l_coef = vec![ZERO; ns * ns * ns * ns];
        let mut out_d = vec![ZERO; ns * ns * nd];
        let mut in_d = vec![ZERO; ns * ns * nd];
        for (a, &nu) in ss.iter().enumerate() {
            for (b, &mu) in ss.iter().enumerate() {
                let weight: Vec<C64> = (0..n_atoms).map(|i| sm[nu][i] * sm[mu][i]).collect();
                for (c, &nu2) in ss.iter().enumerate() {
                    for (e, &mu2) in ss.iter().enumerate() {
                        let idx = ((a * ns + b) * ns + c) * ns + e;
                        l_coef[idx] = (0..n_atoms)
                            .map(|i| weight[i] * pair_coupling_u(single, i, nu2, mu2))
                            .sum();
                    }
                }
                for (k, &kappa) in dd.iter().enumerate() {
                    let d = &spectra.double.emission[kappa];
                    out_d[(a * ns + b) * nd + k] = (0..n_atoms).map(|i| weight[i] * d[i]).sum();
                    in_d[(a * ns + b) * nd + k] = (0..n_atoms).map(|j| d[j] * sp[nu][j] * sp[mu][j]).sum();
                }
            }
        }
        Ok(Self {
            spectra: spectra.clone(),
            mask,
            l_coef,
            out_d,
            in_d,
        })
    }

    pub fn spectra(&self) -> &Spectra {
        &self.spectra
    }

    pub fn mask(&self) -> &ModeMask {
        &self.mask
    }

    /// Smooth coherent part `y(t1) y(t2)`, restricted to the masked single modes.
    pub fn coherent(&self, t1: f64, t2: f64) -> C64 {
        let modes = Some(self.mask.included_single.as_slice());
        coherent_smooth_masked(&self.spectra.single, t1, modes)
            * coherent_smooth_masked(&self.spectra.single, t2, modes)
    }

    /// Incoherent amplitude as an explicit sum of `L` and `M` kernels.
    pub fn incoherent(&self, t1: f64, t2: f64) -> C64 {
        if t1 < 0.0 || t2 < 0.0 {
            return ZERO;
        }
        let w = &self.spectra.single.eigenvalues;
        let eps2 = &self.spectra.double.eigenvalues;
        let ss = &self.mask.included_single;
        let dd = &self.mask.included_double;
        let (ns, nd) = (ss.len(), dd.len());
        let mut acc = ZERO;
        for (a, &nu) in ss.iter().enumerate() {
            for (b, &mu) in ss.iter().enumerate() {
                for (c, &nu2) in ss.iter().enumerate() {
                    for (e, &mu2) in ss.iter().enumerate() {
                        let eps_r = 0.5 * (w[nu2] + w[mu2]);
                        let idx = ((a * ns + b) * ns + c) * ns + e;
                        acc += self.l_coef[idx] * kernel_l(w[nu], w[mu], eps_r, t1, t2);
                        for (k, &kappa) in dd.iter().enumerate() {
                            let coef = -self.out_d[(a * ns + b) * nd + k] * self.in_d[(c * ns + e) * nd + k];
                            acc += coef * kernel_m(w[nu], w[mu], eps_r, eps2[kappa], t1, t2);
                        }
                    }
                }
            }
        }
        acc
    }

    /// Exponential-polynomial form of the coherent and incoherent parts.
    pub fn separable(&self) -> SeparableParts {
        let mut coherent = TermSet::default();
        let single = &self.spectra.single;
        let tr = &single.transmission_residues;
        for &mu in &self.mask.included_single {
            for &nu in &self.mask.included_single {
                coherent.add(mu, RateKey::pair(mu, nu), 0, -tr[mu] * tr[nu]);
            }
        }

        let mut incoherent = TermSet::default();
        let w = &single.eigenvalues;
        let eps2 = &self.spectra.double.eigenvalues;
        let ss = &self.mask.included_single;
        let dd = &self.mask.included_double;
        let (ns, nd) = (ss.len(), dd.len());
        for (a, &nu) in ss.iter().enumerate() {
            for (b, &mu) in ss.iter().enumerate() {
                let key0 = RateKey::pair(nu, mu);
                let out_sum = w[nu] + w[mu];
                for (c, &nu2) in ss.iter().enumerate() {
                    for (e, &mu2) in ss.iter().enumerate() {
                        let key_r = RateKey::pair(nu2, mu2);
                        let two_eps_r = pair_sum(w, nu2, mu2);
                        let eps_r = 0.5 * two_eps_r;
                        let delta_r = two_eps_r - out_sum;
                        let idx = ((a * ns + b) * ns + c) * ns + e;
                        let lc = self.l_coef[idx];
                        incoherent.add(nu, key0, 0, I * lc);
                        incoherent.add_j(-2.0 * I * (I * eps_r - 1.0) * lc, nu, key0, key_r, delta_r);
                        for (k, &kappa) in dd.iter().enumerate() {
                            let coef = -self.out_d[(a * ns + b) * nd + k] * self.in_d[(c * ns + e) * nd + k];
                            let delta_k = 2.0 * eps2[kappa] - out_sum;
                            incoherent.add_j_divided(
                                4.0 * I * coef,
                                nu,
                                key0,
                                (key_r, delta_r),
                                (RateKey::Double(kappa), delta_k),
                                RateKey::Mid(nu2.min(mu2), nu2.max(mu2), kappa),
                            );
                        }
                    }
                }
            }
        }
        let resolve = |set: TermSet| SeparableField::new(set.resolve(w, eps2));
        SeparableParts {
            coherent: resolve(coherent),
            incoherent: resolve(incoherent),
        }
    }
}

fn pair_sum(w: &[C64], a: usize, b: usize) -> C64 {
    w[a.min(b)] + w[a.max(b)]
}

/// Symbolic decay rate along `t2` (in sorted coordinates), so that equal
/// exponentials merge exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum RateKey {
    /// `w_a + w_b`, `a <= b`.
    Pair(usize, usize),
    /// `2 eps_k`.
    Double(usize),
    /// `(w_a + w_b) / 2 + eps_k`.
    Mid(usize, usize, usize),
}

impl RateKey {
    fn pair(a: usize, b: usize) -> Self {
        RateKey::Pair(a.min(b), a.max(b))
    }

    fn value(self, w: &[C64], eps2: &[C64]) -> C64 {
        match self {
            RateKey::Pair(a, b) => pair_sum(w, a, b),
            RateKey::Double(k) => 2.0 * eps2[k],
            RateKey::Mid(a, b, k) => 0.5 * pair_sum(w, a, b) + eps2[k],
        }
    }
}

#[derive(Debug, Default)]
struct TermSet {
    terms: BTreeMap<(usize, RateKey, u8), C64>,
}

impl TermSet {
    fn add(&mut self, s_mode: usize, key: RateKey, power: u8, coef: C64) {
        *self.terms.entry((s_mode, key, power)).or_insert(ZERO) += coef;
    }

    /// `coef * E0 * J(delta, t2)`; `key1` is the rate of `E0 exp(-i delta t2)`.
    fn add_j(&mut self, coef: C64, s_mode: usize, key0: RateKey, key1: RateKey, delta: C64) {
        if 0.5 * delta.norm() < DELTA_CONF {
            self.add(s_mode, key0, 1, coef);
            self.add(s_mode, key0, 2, coef * (-I * delta * 0.5));
        } else {
            let c = coef / (I * delta);
            self.add(s_mode, key0, 0, c);
            self.add(s_mode, key1, 0, -c);
        }
    }

    /// `coef * E0 * dJ/dDelta(delta, t2)`.
    fn add_j_prime(&mut self, coef: C64, s_mode: usize, key0: RateKey, key1: RateKey, delta: C64) {
        if 0.5 * delta.norm() < DELTA_CONF {
            self.add(s_mode, key0, 2, coef * (-I * 0.5));
            self.add(s_mode, key0, 3, coef * (-delta / 3.0));
        } else {
            self.add(s_mode, key1, 1, coef / delta);
            let c = coef * I / (delta * delta);
            self.add(s_mode, key0, 0, c);
            self.add(s_mode, key1, 0, -c);
        }
    }

    /// `coef * E0 * (J(d1) - J(d2)) / (d1 - d2)`.
    fn add_j_divided(
        &mut self,
        coef: C64,
        s_mode: usize,
        key0: RateKey,
        (key1, d1): (RateKey, C64),
        (key2, d2): (RateKey, C64),
        key_mid: RateKey,
    ) {
        if 0.5 * (d1 - d2).norm() < DELTA_CONF {
            self.add_j_prime(coef, s_mode, key0, key_mid, 0.5 * (d1 + d2));
        } else {
            let c = coef / (d1 - d2);
            self.add_j(c, s_mode, key0, key1, d1);
            self.add_j(-c, s_mode, key0, key2, d2);
        }
    }

    fn resolve(self, w: &[C64], eps2: &[C64]) -> Vec<Term> {
        let mut grouped: BTreeMap<(usize, RateKey), [C64; MAX_POWER + 1]> = BTreeMap::new();
        for ((s_mode, key, power), coef) in self.terms {
            grouped.entry((s_mode, key)).or_insert([ZERO; MAX_POWER + 1])[power as usize] += coef;
        }
        grouped
            .into_iter()
            .filter(|(_, c)| c.iter().any(|x| *x != ZERO))
            .map(|((s_mode, key), coefs)| Term {
                coefs,
                rate_gap: w[s_mode],
                rate_short: key.value(w, eps2),
            })
            .collect()
    }
}

/// Highest power of `t_short` produced by the kernels.
pub const MAX_POWER: usize = 3;

/// `P(t_short) * exp(-i rate_gap (t_long - t_short)) * exp(-i rate_short t_short)`
/// with `t_long = max(t1, t2)`, `t_short = min(t1, t2)` and
/// `P(x) = sum_k coefs[k] x^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coefs: [C64; MAX_POWER + 1],
    pub rate_gap: C64,
    pub rate_short: C64,
}

/// A symmetric two-time amplitude as a finite sum of [`Term`]s.
#[derive(Debug, Clone, Default)]
pub struct SeparableField {
    pub terms: Vec<Term>,
}

impl SeparableField {
    pub fn new(terms: Vec<Term>) -> Self {
        Self { terms }
    }

    pub fn combined(parts: &[&SeparableField]) -> Self {
        Self {
            terms: parts.iter().flat_map(|p| p.terms.iter().copied()).collect(),
        }
    }

    pub fn eval(&self, t1: f64, t2: f64) -> C64 {
        if t1 < 0.0 || t2 < 0.0 {
            return ZERO;
        }
        let (long, short) = if t1 >= t2 { (t1, t2) } else { (t2, t1) };
        let gap = long - short;
        self.terms
            .iter()
            .map(|t| {
                let poly = t.coefs.iter().rev().fold(ZERO, |acc, c| acc * short + c);
                poly * (-I * (t.rate_gap * gap + t.rate_short * short)).exp()
            })
            .sum()
    }

    /// Slowest decay rate of any exponential in the field.
    pub fn slowest_rate(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| (-t.rate_gap.im).min(-t.rate_short.im))
            .fold(f64::INFINITY, f64::min)
    }

    /// `(int |psi|^2, int t1 |psi|^2)` over the whole first quadrant.
    pub fn moments(&self) -> (f64, f64) {
        self.moments_with(None)
    }

    /// Moments restricted to `t_long - t_short <= window`, `t_short <= window`.
    pub fn moments_windowed(&self, window: f64) -> (f64, f64) {
        self.moments_with(Some(window))
    }

    fn moments_with(&self, window: Option<f64>) -> (f64, f64) {
        // Over the sorted region t_long >= t_short; the mirror image doubles
        // the norm and turns t1 into t_long + t_short.
        const NMAX: usize = 2 * MAX_POWER + 1;
        let mut norm = ZERO;
        let mut first = ZERO;
        let mut short = [ZERO; NMAX + 1];
        let mut gap = [ZERO; 2];
        for a in &self.terms {
            for b in &self.terms {
                let alpha = I * (a.rate_gap - b.rate_gap.conj());
                let beta = I * (a.rate_short - b.rate_short.conj());
                match window {
                    Some(w) => {
                        truncated_moments(alpha, w, &mut gap);
                        truncated_moments(beta, w, &mut short);
                    }
                    None => {
                        full_moments(alpha, &mut gap);
                        full_moments(beta, &mut short);
                    }
                }
                for (p, ca) in a.coefs.iter().enumerate() {
                    if *ca == ZERO {
                        continue;
                    }
                    for (q, cb) in b.coefs.iter().enumerate() {
                        let weight = ca * cb.conj();
                        let n = p + q;
                        norm += weight * gap[0] * short[n];
                        first += weight * (gap[1] * short[n] + 2.0 * gap[0] * short[n + 1]);
                    }
                }
            }
        }
        (2.0 * norm.re, first.re)
    }
}

/// `out[n] = int_0^inf t^n exp(-beta t) dt = n! / beta^{n+1}`.
fn full_moments(beta: C64, out: &mut [C64]) {
    let inv = 1.0 / beta;
    let mut acc = inv;
    for (n, slot) in out.iter_mut().enumerate() {
        if n > 0 {
            acc *= inv * n as f64;
        }
        *slot = acc;
    }
}

/// `out[n] = int_0^window t^n exp(-beta t) dt` for `Re beta >= 0`.
fn truncated_moments(beta: C64, window: f64, out: &mut [C64]) {
    let x = beta * window;
    if x.norm() < 2.0 {
        // window^{n+1} sum_k (-x)^k / (k! (n + k + 1))
        let mut scale = window;
        for (n, slot) in out.iter_mut().enumerate() {
            let mut term = C64::from(1.0);
            let mut acc = C64::from(1.0 / (n as f64 + 1.0));
            for k in 1..80 {
                term *= -x / k as f64;
                let add = term / (n + k + 1) as f64;
                acc += add;
                if add.norm() < 1e-17 * acc.norm() {
                    break;
                }
            }
            *slot = acc * scale;
            scale *= window;
        }
    } else {
        let decay = (-x).exp();
        let inv = 1.0 / beta;
        let mut full = inv;
        let mut term = C64::from(1.0);
        let mut partial = C64::from(1.0);
        for (n, slot) in out.iter_mut().enumerate() {
            if n > 0 {
                full *= inv * n as f64;
                term *= x / n as f64;
                partial += term;
            }
            *slot = full * (1.0 - decay * partial);
        }
    }
}

/// Coherent and incoherent parts of the smooth output amplitude.
#[derive(Debug, Clone)]
pub struct SeparableParts {
    pub coherent: SeparableField,
    pub incoherent: SeparableField,
}

impl SeparableParts {
    pub fn total(&self) -> SeparableField {
        SeparableField::combined(&[&self.coherent, &self.incoherent])
    }
}

/// Forward (undelayed) components excluded from the sampled field: the
/// constant asymptote of `t(omega)` contributes
/// `double_delta * delta(t1) delta(t2) + delta(t1) y(t2) + y(t1) delta(t2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForwardDelta {
    pub double_delta: f64,
    pub mixed: bool,
}

/// Incoherent amplitude at one point for the given spectra and mask.
pub fn incoherent_wavefunction(spectra: &Spectra, t1: f64, t2: f64, mask: &ModeMask) -> Result<C64> {
    Ok(PulseModel::new(spectra, mask)?.incoherent(t1, t2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ArrayConfig;

    fn spectra(n: usize, phi: f64) -> Spectra {
        Spectra::compute(&ArrayConfig::new(n, phi).unwrap()).unwrap()
    }

    #[test]
    fn single_atom_coherent_value() {
        let s = spectra(1, 0.0);
        let y = coherent_smooth(&s.single, 1.0);
        assert!((y + (-1.0f64).exp()).norm() < 1e-15);
        assert_eq!(coherent_smooth(&s.single, -0.5), ZERO);
    }

    #[test]
    fn single_atom_incoherent_cancels_coherent() {
        let s = spectra(1, 0.0);
        let model = PulseModel::new(&s, &ModeMask::full(&s)).unwrap();
        for &(t1, t2) in &[(0.3, 0.3), (1.2, 0.4), (0.1, 4.0)] {
            let inc = model.incoherent(t1, t2);
            assert!((inc + (-(t1 + t2) as f64).exp()).norm() < 1e-14);
            assert!((inc + model.coherent(t1, t2)).norm() < 1e-14);
        }
    }

    #[test]
    fn u_single_atom_and_permutation() {
        let s = spectra(1, 0.0);
        assert!((pair_coupling_u(&s.single, 0, 0, 0) - I).norm() < 1e-14);
        let s = spectra(3, 0.4);
        for i in 0..3 {
            assert!((pair_coupling_u(&s.single, i, 0, 2) - pair_coupling_u(&s.single, i, 2, 0)).norm() < 1e-15);
        }
    }

    #[test]
    fn u_forms_agree() {
        let s = spectra(2, 0.5);
        for eps in [C64::new(0.3, 0.2), C64::new(-1.1, 0.05), C64::new(2.0, -0.3)] {
            let a = u_direct(&s, eps).unwrap();
            let b = u_relabeled(&s, eps);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() < 1e-9 * (1.0 + x.norm()), "{x} {y}");
            }
        }
    }

    #[test]
    fn empty_mask_vanishes() {
        let s = spectra(3, 0.3);
        assert_eq!(incoherent_wavefunction(&s, 0.5, 0.7, &ModeMask::empty()).unwrap(), ZERO);
    }

    #[test]
    fn invalid_mask_rejected() {
        let s = spectra(3, 0.3);
        assert!(ModeMask::new(&s, vec![3], vec![]).is_err());
        assert!(ModeMask::new(&s, vec![0], vec![3]).is_err());
    }

    #[test]
    fn separable_matches_kernel_sum() {
        for &(n, phi) in &[(2, 0.5), (3, 0.1), (4, 1.2)] {
            let s = spectra(n, phi);
            for mask in [ModeMask::full(&s), ModeMask::superradiant_only(&s)] {
                let model = PulseModel::new(&s, &mask).unwrap();
                let parts = model.separable();
                for &(t1, t2) in &[(0.2, 0.9), (3.0, 1.0), (0.5, 0.5), (7.0, 0.05)] {
                    let direct = model.incoherent(t1, t2);
                    let sep = parts.incoherent.eval(t1, t2);
                    assert!((direct - sep).norm() < 1e-9 * (1.0 + direct.norm()), "{n} {t1} {t2} {direct} {sep}");
                    let coh = model.coherent(t1, t2);
                    assert!((coh - parts.coherent.eval(t1, t2)).norm() < 1e-12 * (1.0 + coh.norm()));
                }
            }
        }
    }

    #[test]
    fn bosonic_symmetry() {
        let s = spectra(3, 0.7);
        let model = PulseModel::new(&s, &ModeMask::full(&s)).unwrap();
        for &(t1, t2) in &[(0.2, 0.9), (3.0, 1.0)] {
            assert!((model.incoherent(t1, t2) - model.incoherent(t2, t1)).norm() < 1e-12);
        }
    }

    #[test]
    fn truncated_moment_limits() {
        let beta = C64::new(0.7, 2.0);
        let mut big = [ZERO; 5];
        let mut exact = [ZERO; 5];
        truncated_moments(beta, 200.0, &mut big);
        full_moments(beta, &mut exact);
        for n in 0..5 {
            assert!((big[n] - exact[n]).norm() < 1e-12);
        }
        let mut lo = [ZERO; 5];
        let mut hi = [ZERO; 5];
        truncated_moments(beta, 1.9999 / beta.norm(), &mut lo);
        truncated_moments(beta, 2.0001 / beta.norm(), &mut hi);
        for n in 0..5 {
            assert!((lo[n] - hi[n]).norm() < 1e-3 * hi[n].norm());
        }
    }

    #[test]
    fn windowed_moments_match_grid() {
        let s = spectra(3, 0.6);
        let model = PulseModel::new(&s, &ModeMask::full(&s)).unwrap();
        let field = model.separable().total();
        let window = 3.0;
        let (n0, n1) = field.moments_windowed(window);
        // midpoint rule over the same region in (gap, short) coordinates
        let steps = 600;
        let h = window / steps as f64;
        let (mut m0, mut m1) = (0.0, 0.0);
        for i in 0..steps {
            for j in 0..steps {
                let (gap, short) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                let p = field.eval(short + gap, short).norm_sqr();
                m0 += 2.0 * p;
                m1 += p * (gap + 2.0 * short);
            }
        }
        m0 *= h * h;
        m1 *= h * h;
        assert!((n0 - m0).abs() < 1e-4 * m0, "{n0} {m0}");
        assert!((n1 - m1).abs() < 1e-4 * m1, "{n1} {m1}");
        let (f0, f1) = field.moments();
        let (w0, w1) = field.moments_windowed(1500.0);
        assert!((f0 - w0).abs() < 1e-10 * f0 && (f1 - w1).abs() < 1e-10 * f1, "{f0} {w0} {f1} {w1} {}", field.slowest_rate());
    }
}
