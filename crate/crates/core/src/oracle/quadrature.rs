//! Globally adaptive Gauss-Kronrod (7/15) quadrature for complex,
//! vector-valued integrands.

use std::collections::BinaryHeap;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub(crate) const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
pub(crate) const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
pub(crate) const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub value: Vec<C64>,
    /// Estimated absolute error (max over components).
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-10,
            rel: 1e-10,
            max_intervals: 20_000,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<C64>,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F>(f: &mut F, a: f64, b: f64, dim: usize) -> Panel
where
    F: FnMut(f64, &mut [C64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = vec![C64::from(0.0); dim];
    let mut gauss = vec![C64::from(0.0); dim];
    let mut buf = vec![C64::from(0.0); dim];
    let mut buf2 = vec![C64::from(0.0); dim];

    f(center, &mut buf);
    for k in 0..dim {
        kronrod[k] += buf[k] * WGK[7];
        gauss[k] += buf[k] * WG[3];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        f(center - dx, &mut buf);
        f(center + dx, &mut buf2);
        for k in 0..dim {
            let s = buf[k] + buf2[k];
            kronrod[k] += s * WGK[j];
            if j % 2 == 1 {
                gauss[k] += s * WG[j / 2];
            }
        }
    }
    let mut error: f64 = 0.0;
    for k in 0..dim {
        kronrod[k] *= half;
        gauss[k] *= half;
        error = error.max((kronrod[k] - gauss[k]).norm());
    }
    Panel {
        a,
        b,
        value: kronrod,
        error,
    }
}

/// Integrates a `dim`-component integrand over consecutive `breakpoints`.
///
/// Convergence is declared when the summed error estimate drops below
/// `max(tol.abs, tol.rel * |I|)`, where `|I|` is the largest component.
pub fn integrate_vec<F>(mut f: F, dim: usize, breakpoints: &[f64], tol: Tolerance) -> Result<Quadrature>
where
    F: FnMut(f64, &mut [C64]),
{
    assert!(breakpoints.len() >= 2);
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            heap.push(gk15(&mut f, w[0], w[1], dim));
            evaluations += 15;
        }
    }
    loop {
        let (value, error) = totals(&heap, dim);
        let scale = value.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let target = tol.abs.max(tol.rel * scale);
        if error <= target {
            return Ok(Quadrature {
                value,
                error,
                evaluations,
            });
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::QuadratureNotConverged {
                achieved: error,
                target,
            });
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::QuadratureNotConverged {
                achieved: error,
                target,
            });
        }
        heap.push(gk15(&mut f, worst.a, mid, dim));
        heap.push(gk15(&mut f, mid, worst.b, dim));
        evaluations += 30;
    }
}

fn totals(heap: &BinaryHeap<Panel>, dim: usize) -> (Vec<C64>, f64) {
    let mut value = vec![C64::from(0.0); dim];
    let mut error = 0.0;
    for p in heap.iter() {
        for k in 0..dim {
            value[k] += p.value[k];
        }
        error += p.error;
    }
    (value, error)
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F>(mut f: F, breakpoints: &[f64], tol: Tolerance) -> Result<(C64, f64)>
where
    F: FnMut(f64) -> C64,
{
    let q = integrate_vec(|x, out: &mut [C64]| out[0] = f(x), 1, breakpoints, tol)?;
    Ok((q.value[0], q.error))
}

/// Breakpoints on `[-window, window]` clustered around the real parts of
/// `poles`: each pole contributes panels geometrically graded from its width
/// `|Im p|` out to order one.
pub fn pole_breakpoints(poles: &[C64], window: f64) -> Vec<f64> {
    let mut pts = vec![-window, window, 0.0];
    for p in poles {
        if p.re.abs() >= window {
            continue;
        }
        pts.push(p.re);
        let width = p.im.abs().max(1e-12);
        let mut h = width;
        while h < 2.0 {
            pts.push(p.re - h);
            pts.push(p.re + h);
            h *= 4.0;
        }
    }
    let mut x = 1.0;
    while x < window {
        pts.push(x);
        pts.push(-x);
        x *= 2.0;
    }
    pts.retain(|x| x.abs() <= window);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_lorentzian() {
        // int dx / (x^2 + w^2) over R = pi / w; with a narrow width.
        let w: f64 = 1e-3;
        let pts = pole_breakpoints(&[C64::new(0.3, -w)], 1e4);
        let (v, err) = integrate(
            |x| C64::from(1.0 / ((x - 0.3).powi(2) + w * w)),
            &pts,
            Tolerance::default(),
        )
        .unwrap();
        let exact = ((1e4 - 0.3) / w).atan() / w + ((1e4 + 0.3) / w).atan() / w;
        assert!((v.re - exact).abs() < 1e-8 * exact, "{} {}", v.re, exact);
        assert!(err < 1e-6 * exact);
    }

    #[test]
    fn oscillatory_polynomial() {
        let (v, _) = integrate(|x| C64::new(0.0, -3.0 * x).exp(), &[0.0, 10.0], Tolerance::default()).unwrap();
        let exact = (C64::from(1.0) - C64::new(0.0, -30.0).exp()) / C64::new(0.0, 3.0);
        assert!((v - exact).norm() < 1e-12);
    }
}
