//! Closed-form time-domain kernels of the incoherent two-photon amplitude.
//!
//! Both kernels are inverse Fourier transforms over the outgoing
//! frequencies `(w1, w2)` of a function of the pair energy
//! `eps = (w1 + w2) / 2` times the single-photon poles
//! `1 / ((w_nu - w1)(w_mu - w2))`. Writing `t_min = min(t1, t2)`,
//! `E0 = exp(-i w_nu t1 - i w_mu t2)` and `Delta = 2 eps_r - w_nu - w_mu`,
//! they reduce to the integral `J(Delta) = int_0^t_min exp(-i Delta tau) dtau`:
//!
//! * `L = E0 [i - 2i (i eps_r - 1) J(Delta_r)]`
//! * `M = 4 i E0 (J(Delta_r) - J(Delta_s)) / (Delta_r - Delta_s)`
//!
//! which coincide with the printed residue forms away from coincidences and
//! stay finite at them.

use num_complex::Complex64 as C64;

/// Separation (in units of the decay rate) below which the confluent branch
/// replaces the generic formula.
pub const DELTA_CONF: f64 = 1e-6;

const I: C64 = C64::new(0.0, 1.0);

/// `exp(base) * J(delta, t)`, evaluated without forming `exp(-i delta t)` alone.
pub(crate) fn scaled_j(base: C64, delta: C64, t: f64, threshold: f64) -> C64 {
    if 0.5 * delta.norm() < threshold {
        base.exp() * t * (C64::from(1.0) - I * delta * t * 0.5)
    } else {
        (base.exp() - (base - I * delta * t).exp()) / (I * delta)
    }
}

/// `exp(base) * dJ/dDelta (delta, t)`.
pub(crate) fn scaled_j_prime(base: C64, delta: C64, t: f64, threshold: f64) -> C64 {
    if 0.5 * delta.norm() < threshold {
        base.exp() * (-I * t * t * 0.5 - delta * t * t * t / 3.0)
    } else {
        let e0 = base.exp();
        let e1 = (base - I * delta * t).exp();
        (e1 * t * delta + I * (e0 - e1)) / (delta * delta)
    }
}

/// `exp(base) * (J(d1) - J(d2)) / (d1 - d2)`.
pub(crate) fn scaled_j_divided(base: C64, d1: C64, d2: C64, t: f64, threshold: f64) -> C64 {
    if 0.5 * (d1 - d2).norm() < threshold {
        scaled_j_prime(base, 0.5 * (d1 + d2), t, threshold)
    } else {
        (scaled_j(base, d1, t, threshold) - scaled_j(base, d2, t, threshold)) / (d1 - d2)
    }
}

/// Kernel `L_{nu mu r}(t1, t2)` for single-photon poles `w_nu`, `w_mu` and
/// the pair pole `eps_r`.
pub fn kernel_l(w_nu: C64, w_mu: C64, eps_r: C64, t1: f64, t2: f64) -> C64 {
    kernel_l_with_threshold(w_nu, w_mu, eps_r, t1, t2, DELTA_CONF)
}

#[doc(hidden)]
pub fn kernel_l_with_threshold(w_nu: C64, w_mu: C64, eps_r: C64, t1: f64, t2: f64, threshold: f64) -> C64 {
    if t1 < 0.0 || t2 < 0.0 {
        return C64::from(0.0);
    }
    let base = -I * (w_nu * t1 + w_mu * t2);
    let delta = 2.0 * eps_r - w_nu - w_mu;
    I * base.exp() - 2.0 * I * (I * eps_r - 1.0) * scaled_j(base, delta, t1.min(t2), threshold)
}

/// Kernel `M_{nu mu r s}(t1, t2)` for single-photon poles `w_nu`, `w_mu` and
/// the two pair poles `eps_r`, `eps_s`.
pub fn kernel_m(w_nu: C64, w_mu: C64, eps_r: C64, eps_s: C64, t1: f64, t2: f64) -> C64 {
    kernel_m_with_threshold(w_nu, w_mu, eps_r, eps_s, t1, t2, DELTA_CONF)
}

#[doc(hidden)]
pub fn kernel_m_with_threshold(
    w_nu: C64,
    w_mu: C64,
    eps_r: C64,
    eps_s: C64,
    t1: f64,
    t2: f64,
    threshold: f64,
) -> C64 {
    if t1 < 0.0 || t2 < 0.0 {
        return C64::from(0.0);
    }
    let base = -I * (w_nu * t1 + w_mu * t2);
    let sum = w_nu + w_mu;
    let dr = 2.0 * eps_r - sum;
    let ds = 2.0 * eps_s - sum;
    4.0 * I * scaled_j_divided(base, dr, ds, t1.min(t2), threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn theta(x: f64) -> f64 {
        if x > 0.0 {
            1.0
        } else if x < 0.0 {
            0.0
        } else {
            0.5
        }
    }

    /// Residue forms as printed, valid away from coincidences.
    fn printed_l(a: C64, b: C64, er: C64, t1: f64, t2: f64) -> C64 {
        let half = 0.5 * (a + b);
        let e12 = (-I * a * (t1 - t2) - 2.0 * I * er * t2).exp();
        let e21 = (-I * b * (t2 - t1) - 2.0 * I * er * t1).exp();
        let e0 = (-I * a * t1 - I * b * t2).exp();
        ((I * er - 1.0) * (theta(t1 - t2) * e12 + theta(t2 - t1) * e21) - (I * half - 1.0) * e0)
            / (er - half)
    }

    fn printed_m_half(a: C64, b: C64, er: C64, es: C64, t1: f64, t2: f64) -> C64 {
        let half = 0.5 * (a + b);
        let e_s = (-I * b * (t2 - t1) - 2.0 * I * es * t1).exp();
        let e_r = (-I * b * (t2 - t1) - 2.0 * I * er * t1).exp();
        let e0 = (-I * a * t1 - I * b * t2).exp();
        theta(t2 - t1) * ((er - half) * e_s - (es - half) * e_r - (er - es) * e0)
            / ((er - half) * (es - half) * (er - es))
    }

    fn printed_m(a: C64, b: C64, er: C64, es: C64, t1: f64, t2: f64) -> C64 {
        printed_m_half(a, b, er, es, t1, t2) + printed_m_half(b, a, er, es, t2, t1)
    }

    #[test]
    fn matches_printed_forms() {
        let (a, b) = (c(-0.3, -0.7), c(0.4, -0.1));
        let (er, es) = (c(0.2, -0.5), c(-0.6, -0.9));
        for &(t1, t2) in &[(0.8, 1.7), (2.1, 0.3), (1.0, 4.0)] {
            let l = kernel_l(a, b, er, t1, t2);
            assert!((l - printed_l(a, b, er, t1, t2)).norm() < 1e-12 * (1.0 + l.norm()));
            let m = kernel_m(a, b, er, es, t1, t2);
            assert!((m - printed_m(a, b, er, es, t1, t2)).norm() < 1e-12 * (1.0 + m.norm()));
        }
    }

    #[test]
    fn causality() {
        let (a, b, e) = (c(0.1, -1.0), c(-0.2, -0.5), c(0.0, -0.8));
        assert_eq!(kernel_l(a, b, e, -0.1, 1.0), C64::from(0.0));
        assert_eq!(kernel_m(a, b, e, e, 1.0, -0.1), C64::from(0.0));
    }

    #[test]
    fn single_atom_confluent_l() {
        let w = c(0.0, -1.0);
        let l = kernel_l(w, w, w, 1.0, 1.0);
        assert!((l - I * (-2.0f64).exp()).norm() < 1e-15);
    }

    #[test]
    fn m_swap_symmetry() {
        let (a, b) = (c(-0.3, -0.7), c(0.4, -0.1));
        let (er, es) = (c(0.2, -0.5), c(-0.6, -0.9));
        for &(t1, t2) in &[(0.8, 1.7), (2.1, 0.3)] {
            let lhs = kernel_m(a, b, er, es, t1, t2);
            let rhs = kernel_m(b, a, er, es, t2, t1);
            assert!((lhs - rhs).norm() < 1e-14);
        }
    }

    #[test]
    fn confluent_branches_are_continuous() {
        let (a, b) = (c(-0.3, -0.7), c(0.4, -0.1));
        let er = 0.5 * (a + b);
        let inside = kernel_m(a, b, er, er + c(3e-7, 0.0), 1.3, 0.9);
        let outside = kernel_m(a, b, er + c(2e-6, 0.0), er + c(4e-6, 1e-6), 1.3, 0.9);
        assert!((inside - outside).norm() < 1e-4 * inside.norm());
        let l_in = kernel_l(a, b, er + c(5e-7, 0.0), 1.3, 0.9);
        let l_out = kernel_l(a, b, er + c(2e-6, 0.0), 1.3, 0.9);
        assert!((l_in - l_out).norm() < 1e-5 * l_in.norm());
    }
}
