//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p wqed-cli --test acceptance -- --nocapture`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wqed_core::kernels::{kernel_l_with_threshold, kernel_m_with_threshold};
use wqed_core::observables::phi_grid;
use wqed_core::oracle::quadrature::Tolerance;
use wqed_core::oracle::{oracle_check, sigma_numeric, FourierSettings};
use wqed_core::*;

/// Criteria that fail for reasons documented with the project; they still
/// run and print their FAIL line.
const DOCUMENTED_FAILURES: &[&str] = &["fig4_argmin_at_anti_bragg", "fig4_increasing_in_n"];

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { name, pass, detail }
}

fn spectra(n: usize, phi: f64) -> Spectra {
    Spectra::compute(&ArrayConfig::new(n, phi).unwrap()).unwrap()
}

fn near_pole(spectra: &Spectra, eps: C64, gap: f64) -> bool {
    let w = &spectra.single.eigenvalues;
    let pair = w.iter().flat_map(|a| w.iter().map(move |b| 0.5 * (a + b)));
    spectra.double.eigenvalues.iter().copied().chain(pair).any(|p| (p - eps).norm() < gap)
}

fn inverse_identity() -> Vec<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_analytic, mut worst_quad) = (0.0f64, 0.0f64);
    let mut skipped = Vec::new();
    for n in [2, 3, 4] {
        for phi in [0.1, 0.5, FRAC_PI_2] {
            // the pair Hamiltonian can be defective (N=4 at pi/2), where no
            // mode expansion exists
            let s = match Spectra::compute(&ArrayConfig::new(n, phi).unwrap()) {
                Ok(s) => s,
                Err(Error::ExceptionalPoint { .. }) => {
                    skipped.push(format!("N={n} phi={phi:.4}"));
                    continue;
                }
                Err(e) => panic!("{e}"),
            };
            let model = SingleModel::new(s.cfg());
            let mut drawn = 0;
            while drawn < 20 {
                let r = 5.0 * n as f64 * rng.random_range(0.0f64..1.0).sqrt();
                let eps = C64::from_polar(r, rng.random_range(0.0..2.0 * PI));
                if near_pole(&s, eps, 0.01) {
                    continue;
                }
                drawn += 1;
                let q = q_matrix(&s.double, eps).unwrap();
                let id = nalgebra::DMatrix::<C64>::identity(n, n);
                let sigma = sigma_matrix(&s.single, eps).unwrap();
                worst_analytic = worst_analytic.max((&q * &sigma - &id).camax());
                // the real-line integral continues analytically only above
                // the slowest single-mode rate; reflect into the upper half
                let eps_up = C64::new(eps.re, eps.im.abs());
                if near_pole(&s, eps_up, 0.01) {
                    continue;
                }
                let q_up = q_matrix(&s.double, eps_up).unwrap();
                let sigma_num = sigma_numeric(&model, eps_up, Tolerance::default()).unwrap();
                worst_quad = worst_quad.max((&q_up * &sigma_num.value - &id).camax());
            }
        }
    }
    let note = if skipped.is_empty() {
        String::new()
    } else {
        format!("; exceptional point skipped: {}", skipped.join(", "))
    };
    vec![
        check(
            "inverse_identity_analytic",
            worst_analytic < 1e-8,
            format!("max |Q S - I| = {worst_analytic:.2e} (tol 1e-8){note}"),
        ),
        check(
            "inverse_identity_quadrature",
            worst_quad < 1e-6,
            format!("max |Q S - I| = {worst_quad:.2e} (tol 1e-6){note}"),
        ),
    ]
}

fn trace_identities() -> Vec<Outcome> {
    let mut worst = 0.0f64;
    for n in 1..=8 {
        for k in 0..20 {
            let phi = 0.02 + (PI - 0.04) * k as f64 / 19.0;
            let s = spectra(n, phi);
            let single: f64 = s.single.eigenvalues.iter().map(|w| w.im).sum();
            let double: f64 = s.double.eigenvalues.iter().map(|e| e.im).sum();
            let nf = n as f64;
            worst = worst.max((single + nf).abs()).max((double + nf * (nf - 1.0) / 2.0).abs());
        }
    }
    vec![check("trace_identities", worst < 1e-10, format!("max deviation {worst:.2e} (tol 1e-10)"))]
}

fn unitarity() -> Vec<Outcome> {
    let mut worst = 0.0f64;
    for n in 1..=6 {
        for phi in [0.1, 0.7, FRAC_PI_2, 2.4] {
            let model = SingleModel::new(&ArrayConfig::new(n, phi).unwrap());
            let span = 10.0 * n as f64;
            for k in 0..100 {
                let w = C64::from(-span + 2.0 * span * (k as f64 + 0.5) / 100.0);
                let t = model.transmission(w).unwrap();
                let r = model.reflection(w).unwrap();
                worst = worst.max((t.norm_sqr() + r.norm_sqr() - 1.0).abs());
            }
        }
    }
    vec![check("unitarity", worst < 1e-10, format!("max ||t|^2+|r|^2-1| = {worst:.2e} (tol 1e-10)"))]
}

fn single_atom_cancellation() -> Vec<Outcome> {
    let s = spectra(1, 0.0);
    let model = PulseModel::new(&s, &ModeMask::full(&s)).unwrap();
    let (mut sum, mut closed) = (0.0f64, 0.0f64);
    for i in 1..=20 {
        for j in 1..=20 {
            let (t1, t2) = (0.25 * i as f64, 0.25 * j as f64);
            let inc = model.incoherent(t1, t2);
            sum = sum.max((model.coherent(t1, t2) + inc).norm());
            closed = closed.max((inc + (-(t1 + t2)).exp()).norm());
        }
    }
    vec![check(
        "single_atom_cancellation",
        sum < 1e-8 && closed < 1e-8,
        format!("max |yy + psi| = {sum:.2e}, max |psi + e^-(t1+t2)| = {closed:.2e} (tol 1e-8)"),
    )]
}

fn oracle_equivalence() -> Vec<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst, mut unbounded) = (0.0f64, 0);
    for (n, phi) in [(2, 0.5), (3, 0.1), (4, 0.1)] {
        let s = spectra(n, phi);
        let points: Vec<(f64, f64)> = (0..10)
            .map(|_| (5.0 - rng.random_range(0.0..4.8), 5.0 - rng.random_range(0.0..4.8)))
            .collect();
        for r in oracle_check(&s, &points, FourierSettings::default()).unwrap() {
            worst = worst.max(r.rel_err);
            unbounded += usize::from(!r.bounded());
        }
    }
    vec![check(
        "oracle_equivalence",
        worst < 1e-3 && unbounded == 0,
        format!("max relative error {worst:.2e} (tol 1e-3); {unbounded} discrepancies above the error estimate"),
    )]
}

fn kernel_confluence() -> Vec<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let sep = 1e-4;
    let (force, never) = (1e-3, 0.0);
    let mut worst = 0.0f64;
    let pole = |rng: &mut ChaCha8Rng| C64::new(rng.random_range(-2.0..2.0), -rng.random_range(0.01..3.0));
    let rel = |a: C64, b: C64| (a - b).norm() / b.norm();
    for _ in 0..50 {
        let (a, b) = (pole(&mut rng), pole(&mut rng));
        let other = 0.5 * pole(&mut rng);
        let (t1, t2) = (rng.random_range(0.05..5.0), rng.random_range(0.05..5.0));
        let mid = 0.5 * (a + b);
        let shift = C64::from_polar(sep, rng.random_range(0.0..2.0 * PI));
        let shift2 = C64::from_polar(sep, rng.random_range(0.0..2.0 * PI));
        let l = |thr| kernel_l_with_threshold(a, b, mid + shift, t1, t2, thr);
        worst = worst.max(rel(l(force), l(never)));
        for (er, es) in [
            (mid + shift, other),
            (other, mid + shift),
            (other + shift, other),
            (mid + shift, mid + shift2),
        ] {
            let m = |thr| kernel_m_with_threshold(a, b, er, es, t1, t2, thr);
            worst = worst.max(rel(m(force), m(never)));
        }
    }
    vec![check(
        "kernel_confluence",
        worst < 1e-4,
        format!("max relative branch mismatch at separation 1e-4: {worst:.2e} (tol 1e-4)"),
    )]
}

fn fig3_structure() -> Vec<Outcome> {
    let s = spectra(4, 0.1);
    let single_bright = s.single.eigenvalues.iter().filter(|w| (2.0..=4.5).contains(&-w.im)).count();
    let rates: Vec<f64> = s.double.eigenvalues.iter().map(|e| -2.0 * e.im).collect();
    let super_ = rates.iter().filter(|&&r| r > 3.0).count();
    let dark = rates.iter().filter(|&&r| r < 0.2).count();
    let twilight = rates.iter().filter(|&&r| (0.3..=3.0).contains(&r)).count();
    vec![check(
        "fig3_structure",
        single_bright == 1 && super_ == 1 && dark == 2 && twilight == 3 && rates.len() == 6,
        format!("single bright {single_bright}, double super {super_} / dark {dark} / twilight {twilight}"),
    )]
}

fn fig4_structure() -> Vec<Outcome> {
    let phis = phi_grid(0.02, PI - 0.02, 100).unwrap();
    let step = phis[1] - phis[0];
    let sweep = duration_sweep(&[2, 3, 4, 5], &phis, MaskKind::Full);
    let mut argmins = Vec::new();
    let mut all_ok = true;
    let mut worst_sym = 0.0f64;
    for n in 2..=5 {
        let rows: Vec<(f64, Duration)> = sweep
            .rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| (r.phi, r.outcome.clone().expect("row")))
            .collect();
        all_ok &= rows.iter().all(|(_, d)| d.converged && d.tail_est < 1e-3 && d.t > 0.0);
        let (phi_min, _) = rows
            .iter()
            .map(|(p, d)| (*p, d.inv_t))
            .fold((f64::NAN, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        argmins.push((n, phi_min));
        for (k, (_, d)) in rows.iter().enumerate() {
            let mirror = &rows[rows.len() - 1 - k].1;
            worst_sym = worst_sym.max(((d.t - mirror.t) / d.t).abs());
        }
    }
    let argmin_ok = argmins.iter().all(|(_, p)| (p - FRAC_PI_2).abs() <= step);
    let inv: Vec<f64> = (2..=5)
        .map(|n| pulse_duration(&ArrayConfig::new(n, 0.05).unwrap()).unwrap().inv_t)
        .collect();
    let increasing = inv.windows(2).all(|w| w[1] > w[0]);
    let fmt_argmins: Vec<String> = argmins.iter().map(|(n, p)| format!("N={n}:{p:.3}")).collect();
    let fmt_inv: Vec<String> = inv.iter().map(|v| format!("{v:.4}")).collect();
    vec![
        check(
            "fig4_argmin_at_anti_bragg",
            argmin_ok,
            format!("argmin of 1/T: {} (pi/2 +- {step:.3})", fmt_argmins.join(" ")),
        ),
        check(
            "fig4_increasing_in_n",
            increasing,
            format!("1/T at phi=0.05 for N=2..5: {}", fmt_inv.join(" ")),
        ),
        check(
            "fig4_mirror_symmetry",
            worst_sym < 1e-3 && all_ok,
            format!("max |T(phi)-T(pi-phi)|/T = {worst_sym:.2e} (tol 1e-3); all rows converged: {all_ok}"),
        ),
    ]
}

fn fig2_modes() -> Vec<Outcome> {
    let s = spectra(4, 0.1);
    let full = PulseModel::new(&s, &ModeMask::full(&s)).unwrap().separable().incoherent;
    let bright = PulseModel::new(&s, &ModeMask::superradiant_only(&s))
        .unwrap()
        .separable()
        .incoherent;

    // normalized antidiagonal profiles at t1 + t2 = 10, |t1 - t2| < 0.5
    let profile = |f: &SeparableField| -> Vec<f64> {
        let v: Vec<f64> = (0..=100)
            .map(|k| {
                let d = -0.5 + k as f64 / 100.0;
                f.eval(5.0 + 0.5 * d, 5.0 - 0.5 * d).norm()
            })
            .collect();
        let peak = v.iter().cloned().fold(0.0, f64::max);
        v.into_iter().map(|x| x / peak).collect()
    };
    let (pf, pb) = (profile(&full), profile(&bright));
    let rms = (pf.iter().zip(&pb).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / pf.len() as f64).sqrt();

    let edge_ratio = full.eval(5.0, 0.2).norm() / bright.eval(5.0, 0.2).norm();

    // diagonal decay of |psi|^2 against the slowest pole of the spectrum
    let w = &s.single.eigenvalues;
    let mut predicted = f64::INFINITY;
    for a in w {
        for b in w {
            predicted = predicted.min(2.0 * (a + b).im.abs());
        }
    }
    for e in &s.double.eigenvalues {
        predicted = predicted.min(2.0 * (2.0 * e.im).abs());
    }
    let t_star = 5.0 / predicted;
    let samples: Vec<(f64, f64)> = (0..=50)
        .map(|k| {
            let t = t_star * (1.0 + k as f64 / 50.0);
            (t, full.eval(t, t).norm_sqr().ln())
        })
        .collect();
    let fitted = -slope(&samples);
    let rate_err = (fitted - predicted).abs() / predicted;

    vec![
        check("fig2_central_peak", rms < 0.15, format!("normalized profile RMS difference {rms:.3} (tol 0.15)")),
        check(
            "fig2_edge_tail",
            edge_ratio > 2.0,
            format!("full / bright-only at (5, 0.2) = {edge_ratio:.3e} (needs > 2)"),
        ),
        check(
            "fig2_diagonal_decay",
            rate_err < 0.1,
            format!("fitted {fitted:.5e} vs slowest pole {predicted:.5e}: rel {rate_err:.2e} (tol 0.1)"),
        ),
    ]
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let num: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    num / den
}

fn run_cli(args: &[&str], out: &PathBuf, jobs: &str) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_wqed"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("WQED_JOBS", jobs)
        .stderr(std::process::Stdio::null())
        .status()
        .expect("run wqed");
    assert!(status.success(), "wqed {args:?} failed");
    std::fs::read(out).unwrap()
}

fn determinism() -> Vec<Outcome> {
    let dir = std::env::temp_dir().join(format!("wqed-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let commands: [&[&str]; 5] = [
        &["spectrum", "--n", "4", "--phi", "0.1"],
        &["pulse", "--n", "3", "--phi", "0.4", "--tmax", "3", "--steps", "30"],
        &["cut", "--n", "4", "--phi", "0.1", "--kind", "antidiagonal", "--value", "10", "--mask-single", "bright"],
        &["sweep", "--n-list", "2,3", "--phi-steps", "7"],
        &["oracle-check", "--n", "2", "--phi", "0.5", "--samples", "2", "--seed", "4"],
    ];
    let mut identical = 0;
    for (k, args) in commands.iter().enumerate() {
        let a = run_cli(args, &dir.join(format!("a{k}")), "1");
        let b = run_cli(args, &dir.join(format!("b{k}")), "2");
        identical += usize::from(a == b && !a.is_empty());
    }
    let _ = std::fs::remove_dir_all(&dir);
    vec![check(
        "cli_determinism",
        identical == commands.len(),
        format!("{identical}/{} commands byte-identical across runs", commands.len()),
    )]
}

fn cli_examples() -> Vec<Outcome> {
    let dir = std::env::temp_dir().join(format!("wqed-examples-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let spectrum: serde_json::Value = serde_json::from_slice(&run_cli(
        &["spectrum", "--n", "4", "--phi", "0.1"],
        &dir.join("spectrum.json"),
        "1",
    ))
    .unwrap();
    let counts = (
        spectrum["single"]["omega"].as_array().map_or(0, Vec::len),
        spectrum["double"]["epsilon"].as_array().map_or(0, Vec::len),
    );
    let degenerate = Command::new(env!("CARGO_BIN_EXE_wqed"))
        .args(["duration", "--n", "1", "--phi", "0.5"])
        .output()
        .unwrap();
    let message = String::from_utf8_lossy(&degenerate.stderr).trim().to_string();
    let sweep = run_cli(
        &["sweep", "--n-list", "3", "--phi-min", "0.1", "--phi-max", "3.0", "--phi-steps", "3"],
        &dir.join("sweep.csv"),
        "1",
    );
    let rows = String::from_utf8(sweep).unwrap().lines().count() - 1;
    let _ = std::fs::remove_dir_all(&dir);
    let pass = counts == (4, 6) && degenerate.status.code() == Some(1) && message.contains("N=1") && rows == 3;
    vec![check(
        "cli_examples",
        pass,
        format!(
            "spectrum N=4: {}+{} eigenvalues; duration N=1: exit {:?} \"{message}\"; sweep rows {rows}",
            counts.0,
            counts.1,
            degenerate.status.code()
        ),
    )]
}

#[test]
fn acceptance() {
    let suites: [(&str, fn() -> Vec<Outcome>); 11] = [
        ("inverse identity", inverse_identity),
        ("trace identities", trace_identities),
        ("unitarity", unitarity),
        ("single-atom cancellation", single_atom_cancellation),
        ("oracle equivalence", oracle_equivalence),
        ("kernel confluence", kernel_confluence),
        ("fig. 3 structure", fig3_structure),
        ("fig. 4 structure", fig4_structure),
        ("fig. 2 mode analysis", fig2_modes),
        ("determinism", determinism),
        ("cli examples", cli_examples),
    ];
    let mut outcomes = Vec::new();
    for (label, suite) in suites {
        let start = Instant::now();
        for o in suite() {
            println!(
                "{} {:<28} {} [{label}, {:.1}s]",
                if o.pass { "PASS" } else { "FAIL" },
                o.name,
                o.detail,
                start.elapsed().as_secs_f64()
            );
            outcomes.push(o);
        }
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.pass).map(|o| o.name).collect();
    println!("{} passed, {} failed", outcomes.len() - failed.len(), failed.len());
    let unexpected: Vec<&&str> = failed.iter().filter(|n| !DOCUMENTED_FAILURES.contains(n)).collect();
    assert!(unexpected.is_empty(), "undocumented failures: {unexpected:?}");
}
