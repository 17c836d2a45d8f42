use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wqed_core::io::{oracle_json, spectrum_json, write_cut_csv, write_field_csv, write_sweep_csv};
use wqed_core::observables::{phi_grid, pulse_duration_masked, SweepRow};
use wqed_core::oracle::{oracle_check, FourierSettings, QSource};
use wqed_core::{
    duration_sweep, extract_cut, wavefunction_grid, ArrayConfig, CutKind, CutSpec, Error, GridSpec, MaskKind,
    ModeMask, PulseModel, Spectra, SweepResult,
};

/// Two-photon delta-pulse scattering from a waveguide-coupled atomic array.
///
/// Frequencies are in units of the single-atom waveguide decay rate and
/// times in its inverse. Mode indices are 0-based and follow the ordering of
/// the `spectrum` output (fastest decay first).
#[derive(Parser, Debug)]
#[command(name = "wqed", version)]
struct Cli {
    /// Worker threads for sweeps and grids (default: all logical cores).
    #[arg(long, global = true, env = "WQED_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct System {
    /// Number of atoms.
    #[arg(long)]
    n: usize,
    /// Phase acquired between neighbouring atoms.
    #[arg(long)]
    phi: f64,
}

#[derive(Args, Debug, Clone)]
struct MaskArgs {
    /// Single-excited modes kept: comma-separated indices, `bright` or `all`.
    #[arg(long, default_value = "all")]
    mask_single: String,
    /// Double-excited states kept: comma-separated indices, `none` or `all`.
    #[arg(long, default_value = "all")]
    mask_double: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single- and double-excitation spectra as JSON.
    Spectrum {
        #[command(flatten)]
        system: System,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coherent and incoherent amplitudes on a square time grid as CSV.
    Pulse {
        #[command(flatten)]
        system: System,
        /// Largest time on each axis.
        #[arg(long)]
        tmax: f64,
        /// Grid intervals per axis (points for a geometric grid).
        #[arg(long)]
        steps: usize,
        /// First nonzero time; switches to a geometric grid.
        #[arg(long)]
        tmin: Option<f64>,
        #[command(flatten)]
        mask: MaskArgs,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Amplitudes along a line in the (t1, t2) plane as CSV.
    Cut {
        #[command(flatten)]
        system: System,
        /// Line to sample.
        #[arg(long, value_enum)]
        kind: KindArg,
        /// `t1 + t2` for antidiagonal cuts, fixed `t2` for edge cuts; unused for the diagonal.
        #[arg(long, default_value_t = 0.0)]
        value: f64,
        /// Largest running time for diagonal and edge cuts.
        #[arg(long, default_value_t = 10.0)]
        extent: f64,
        /// Sampling intervals along the cut.
        #[arg(long, default_value_t = 400)]
        steps: usize,
        #[command(flatten)]
        mask: MaskArgs,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pulse duration T for one configuration, as a one-row sweep CSV.
    Duration {
        #[command(flatten)]
        system: System,
        /// Keep only the brightest single-excited mode.
        #[arg(long)]
        bright_only: bool,
    },
    /// Pulse duration over a grid of atom numbers and phases as CSV.
    Sweep {
        /// Comma-separated atom numbers.
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 0.02)]
        phi_min: f64,
        #[arg(long, default_value_t = 3.12)]
        phi_max: f64,
        /// Number of phase points, endpoints included.
        #[arg(long, default_value_t = 100)]
        phi_steps: usize,
        /// Keep only the brightest single-excited mode.
        #[arg(long)]
        bright_only: bool,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compares the analytic incoherent amplitude with a numerical Fourier inversion.
    OracleCheck {
        #[command(flatten)]
        system: System,
        /// Number of random points in (0.2, 5]^2.
        #[arg(long, default_value_t = 10)]
        samples: usize,
        /// Seed for the sample points.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Source of the inverse self-energy in the numerical path.
        #[arg(long, value_enum, default_value_t = QArg::Expansion)]
        q_source: QArg,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum KindArg {
    Diagonal,
    Antidiagonal,
    Edge,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum QArg {
    Expansion,
    Quadrature,
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_numerical() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 1,
            message: format!("i/o error: {e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("--jobs must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn spectra(system: System) -> Result<Spectra, Failure> {
    Ok(Spectra::compute(&ArrayConfig::new(system.n, system.phi)?)?)
}

fn parse_list(text: &str, what: &str) -> Result<Vec<usize>, Failure> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim().parse().map_err(|_| Failure {
                code: 1,
                message: format!("invalid mode mask: '{s}' in {what} is not an index"),
            })
        })
        .collect()
}

fn mask(spectra: &Spectra, args: &MaskArgs) -> Result<ModeMask, Failure> {
    let full = ModeMask::full(spectra);
    let single = match args.mask_single.as_str() {
        "all" => full.included_single,
        "bright" => vec![spectra.single.superradiant_index()],
        list => parse_list(list, "--mask-single")?,
    };
    let double = match args.mask_double.as_str() {
        "all" => full.included_double,
        "none" => vec![],
        list => parse_list(list, "--mask-double")?,
    };
    Ok(ModeMask::new(spectra, single, double)?)
}

fn pulse_model(system: System, args: &MaskArgs) -> Result<PulseModel, Failure> {
    let spectra = spectra(system)?;
    if system.n >= 2 {
        spectra.cfg().require_pulse_range()?;
    }
    let mask = mask(&spectra, args)?;
    Ok(PulseModel::new(&spectra, &mask)?)
}

fn mask_kind(bright_only: bool) -> MaskKind {
    if bright_only {
        MaskKind::SuperradiantOnly
    } else {
        MaskKind::Full
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Spectrum { system, out } => {
            let s = spectra(system)?;
            output(&out)?.write_all(spectrum_json(&s).as_bytes())?;
        }
        Command::Pulse {
            system,
            tmax,
            steps,
            tmin,
            mask,
            out,
        } => {
            let model = pulse_model(system, &mask)?;
            let grid = match tmin {
                Some(t_min) => GridSpec::Geometric { t_min, t_max: tmax, steps },
                None => GridSpec::Uniform { t_max: tmax, steps },
            };
            let field = wavefunction_grid(&model, grid)?;
            for w in &field.warnings {
                eprintln!("warning: {w}");
            }
            let mut sink = output(&out)?;
            write_field_csv(&mut sink, &field)?;
            sink.flush()?;
        }
        Command::Cut {
            system,
            kind,
            value,
            extent,
            steps,
            mask,
            out,
        } => {
            let model = pulse_model(system, &mask)?;
            let kind = match kind {
                KindArg::Diagonal => CutKind::Diagonal,
                KindArg::Antidiagonal => CutKind::Antidiagonal,
                KindArg::Edge => CutKind::Edge,
            };
            let cut = extract_cut(&model, CutSpec { kind, value, extent, steps })?;
            let mut sink = output(&out)?;
            write_cut_csv(&mut sink, &cut)?;
            sink.flush()?;
        }
        Command::Duration { system, bright_only } => {
            let s = spectra(system)?;
            let d = pulse_duration_masked(&s, &mask_kind(bright_only).build(&s))?;
            let sweep = SweepResult {
                rows: vec![SweepRow {
                    n: system.n,
                    phi: system.phi,
                    outcome: Ok(d),
                }],
            };
            let mut sink = output(&None)?;
            write_sweep_csv(&mut sink, &sweep)?;
            sink.flush()?;
            if !d.converged {
                return Err(Error::DurationNotConverged { t_max: d.t_max }.into());
            }
        }
        Command::Sweep {
            n_list,
            phi_min,
            phi_max,
            phi_steps,
            bright_only,
            out,
        } => {
            let phis = phi_grid(phi_min, phi_max, phi_steps)?;
            let sweep = duration_sweep(&n_list, &phis, mask_kind(bright_only));
            let mut sink = output(&out)?;
            write_sweep_csv(&mut sink, &sweep)?;
            sink.flush()?;
            return sweep_status(&sweep);
        }
        Command::OracleCheck {
            system,
            samples,
            seed,
            q_source,
            out,
        } => {
            let s = spectra(system)?;
            if system.n >= 2 {
                s.cfg().require_pulse_range()?;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let points: Vec<(f64, f64)> = (0..samples)
                .map(|_| (sample_time(&mut rng), sample_time(&mut rng)))
                .collect();
            let settings = FourierSettings {
                q_source: match q_source {
                    QArg::Expansion => QSource::Expansion,
                    QArg::Quadrature => QSource::Quadrature,
                },
                ..FourierSettings::default()
            };
            let reports = oracle_check(&s, &points, settings)?;
            output(&out)?.write_all(oracle_json(s.cfg(), &reports).as_bytes())?;
            let worst = reports.iter().map(|r| r.rel_err).fold(0.0, f64::max);
            eprintln!("max relative error {worst:.3e} over {} points", reports.len());
        }
    }
    Ok(())
}

/// Uniform on `(0.2, 5]`.
fn sample_time(rng: &mut ChaCha8Rng) -> f64 {
    5.0 - rng.random_range(0.0..4.8)
}

fn sweep_status(sweep: &SweepResult) -> Result<(), Failure> {
    let mut code = 0;
    for row in &sweep.rows {
        match &row.outcome {
            Err(message) => {
                eprintln!("N={} phi={}: {message}", row.n, row.phi);
                code = code.max(1);
            }
            Ok(d) if !d.converged => {
                eprintln!("N={} phi={}: not converged up to t_max={:.3e}", row.n, row.phi, d.t_max);
                code = 2;
            }
            Ok(_) => {}
        }
    }
    match code {
        0 => Ok(()),
        c => Err(Failure {
            code: c,
            message: format!("{} of {} sweep rows incomplete", count_incomplete(sweep), sweep.rows.len()),
        }),
    }
}

fn count_incomplete(sweep: &SweepResult) -> usize {
    sweep
        .rows
        .iter()
        .filter(|r| !matches!(&r.outcome, Ok(d) if d.converged))
        .count()
}
