mod args;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::{ArgMatches, CommandFactory, FromArgMatches};
use num_complex::Complex64;
use ptfloquet::drive::{load_samples, Shape};
use ptfloquet::export::{Cell, Table};
use ptfloquet::phase::{threshold_curve, GridRange};
use ptfloquet::{
    ballistic_velocity, effective_hopping, evolve, gaussian_excitation, minimum_frequency,
    phase_map, single_site_excitation, spectrum, threshold_amplitude, DriveWaveform, Error,
    EvolveOptions, LatticeConfig, PhaseOptions,
};

use args::{Cli, ClassifyArgs, Command, Format, Init, WaveformArgs};

const THREADS_ENV: &str = "PTFLOQUET_THREADS";

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) => 3,
        Error::ConstraintViolated(_) => 4,
        Error::Overflow { .. } | Error::Diverged { .. } => 5,
        Error::NoUnbrokenPhase { .. } => 6,
        Error::NotBracketed { .. } => 7,
        Error::InsufficientData { .. } | Error::ZeroNorm => 8,
        Error::Numeric(_) => 9,
        Error::Io(_) | Error::Parse { .. } => 10,
    }
}

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Err(e) = configure_threads() {
        eprintln!("ptfloquet: {e}");
        return ExitCode::from(exit_code(&e));
    }
    match run(&cli, &matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ptfloquet: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn configure_threads() -> ptfloquet::Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // only fails if a pool already exists, which cannot happen this early
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Every argument of the invoked subcommand, defaults included, so the file
/// alone reproduces the run.
fn run_metadata(cli: &Cli, matches: &ArgMatches) -> Vec<(String, String)> {
    let mut meta = vec![
        ("tool".to_string(), format!("ptfloquet {}", ptfloquet::VERSION)),
    ];
    if let Some((name, sub)) = matches.subcommand() {
        meta.push(("command".into(), name.into()));
        let command = Cli::command();
        let mut ids: Vec<String> = command
            .find_subcommand(name)
            .map(|c| c.get_arguments().map(|a| a.get_id().to_string()).collect())
            .unwrap_or_default();
        ids.sort_unstable();
        for id in ids.iter().map(String::as_str) {
            if matches!(id, "kappa" | "format" | "out" | "help") {
                continue;
            }
            if let Ok(Some(raw)) = sub.try_get_raw(id) {
                let values: Vec<String> = raw.map(|v| v.to_string_lossy().into_owned()).collect();
                meta.push((id.replace('_', "-"), values.join(" ")));
            }
        }
    }
    meta.push(("kappa".into(), cli.kappa.to_string()));
    meta
}

struct Output<'a> {
    cli: &'a Cli,
    meta: Vec<(String, String)>,
}

impl Output<'_> {
    fn to_stdout(&self) -> bool {
        self.cli.out == "-"
    }

    fn write(&self, mut table: Table, path: &str) -> ptfloquet::Result<()> {
        let mut meta = self.meta.clone();
        meta.append(&mut table.meta);
        table.meta = meta;
        if path == "-" {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            self.emit(&table, &mut lock)?;
            lock.flush()?;
        } else {
            let mut file = BufWriter::new(File::create(Path::new(path))?);
            self.emit(&table, &mut file)?;
            file.flush()?;
        }
        Ok(())
    }

    fn emit(&self, table: &Table, out: &mut dyn Write) -> io::Result<()> {
        match self.cli.format {
            Format::Csv => table.write_csv(out),
            Format::Json => table.write_json(out),
        }
    }

    /// The one-line summary goes to stdout, or to stderr when stdout already
    /// carries the data.
    fn summary(&self, line: &str) {
        if self.to_stdout() {
            eprintln!("{line}");
        } else {
            println!("{line}");
        }
    }
}

fn lattice(cli: &Cli) -> ptfloquet::Result<LatticeConfig> {
    LatticeConfig::new(cli.kappa)
}

fn waveform(a: &WaveformArgs) -> ptfloquet::Result<DriveWaveform> {
    let shape = match a.waveform.as_str() {
        "square" => Shape::Square,
        "sin" => Shape::Sinusoid,
        other => match other.strip_prefix("file:") {
            Some(path) if !path.is_empty() => Shape::Sampled(load_samples(path)?),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown waveform {other:?}; expected square, sin or file:<path>"
                )))
            }
        },
    };
    let theta = a.theta.unwrap_or_else(|| shape.default_theta());
    DriveWaveform::new(shape, Complex64::new(a.delta0_re, a.delta0_im), a.omega, theta)
}

fn phase_options(a: &ClassifyArgs, bisect_tol: Option<f64>) -> PhaseOptions {
    let mut opts = PhaseOptions { n_q: a.nq, tol: a.tol, refine: !a.no_refine, ..Default::default() };
    if let Some(b) = bisect_tol {
        opts.bisect_tol = b;
    }
    opts
}

fn run(cli: &Cli, matches: &ArgMatches) -> ptfloquet::Result<()> {
    let out = Output { cli, meta: run_metadata(cli, matches) };
    let cfg = lattice(cli)?;
    match &cli.command {
        Command::Spectrum(a) => {
            let w = waveform(&a.waveform)?;
            let spec = spectrum(&w, &cfg, a.nq)?;
            out.write(spec.to_table().with_meta("drive", w.describe()), &cli.out)?;
            out.summary(&format!(
                "spectrum: {} points, bandwidth {:.6}, max |E''| {:.3e}",
                spec.q.len(),
                spec.bandwidth(),
                spec.max_imag()
            ));
        }
        Command::PhaseDiagram(a) => {
            let opts = phase_options(&a.classify, None);
            let omega = GridRange::new(a.omega_min, a.omega_max, a.omega_steps)?;
            let delta = GridRange::new(a.delta_min, a.delta_max, a.delta_steps)?;
            let map = phase_map(omega, delta, &cfg, &opts)?;
            out.write(map.to_table(), &cli.out)?;
            for p in map.monotonicity_violations(5.0) {
                eprintln!(
                    "warning: unbroken point above a broken one at omega={} delta0={}",
                    p.omega, p.delta0
                );
            }
            let unbroken = map.points.iter().filter(|p| p.unbroken).count();
            out.summary(&format!("phase-diagram: {unbroken} of {} points unbroken", map.points.len()));
        }
        Command::Threshold(a) => {
            let opts = phase_options(&a.classify, Some(a.bisect_tol));
            if let [omega] = a.omega[..] {
                let th = threshold_amplitude(omega, &cfg, &opts)?;
                let mut table = Table::new(["omega", "delta0_th"]);
                table.push_row(vec![Cell::F(omega), Cell::F(th)]);
                out.write(table, &cli.out)?;
                out.summary(&format!("threshold: delta0_th({omega}) = {th:.6}"));
            } else {
                let curve = threshold_curve(&a.omega, &cfg, &opts)?;
                out.write(curve.to_table(), &cli.out)?;
                if !curve.is_monotone() {
                    eprintln!("warning: threshold is not monotone in omega over the scanned range");
                }
                let found = curve.points.iter().filter(|p| p.1.is_some()).count();
                out.summary(&format!("threshold: {found} of {} frequencies have an unbroken phase", curve.points.len()));
            }
        }
        Command::MinFrequency(a) => {
            let opts = phase_options(&a.classify, Some(a.bisect_tol));
            let wm = minimum_frequency(&cfg, a.omega_lo, a.omega_hi, a.omega_tol, &opts)?;
            let mut table = Table::new(["omega_m"]);
            table.push_row(vec![Cell::F(wm)]);
            out.write(table, &cli.out)?;
            out.summary(&format!("min-frequency: omega_m = {wm:.6}"));
        }
        Command::Evolve(a) => {
            let w = waveform(&a.waveform)?;
            let s0 = match a.init {
                Init::Single => single_site_excitation(a.sites)?,
                Init::Gaussian => gaussian_excitation(a.sites, a.width, a.momentum)?,
            };
            let opts = EvolveOptions {
                n_periods: a.periods,
                steps_per_period: a.steps_per_period,
                snapshot_every: a.snapshots_every,
                keep_fields: a.dump_field.is_some(),
            };
            let traj = evolve(&s0, &w, &cfg, &opts)?;
            let mut table = traj.observables_table().with_meta("drive", w.describe());
            if !traj.warnings().is_empty() {
                table = table.with_meta("warnings", traj.warnings().join("; "));
            }
            for warning in traj.warnings() {
                eprintln!("warning: {warning}");
            }
            out.write(table, &cli.out)?;
            if let (Some(path), Some(field)) = (&a.dump_field, traj.field_table()) {
                out.write(field.with_meta("drive", w.describe()), &path.to_string_lossy())?;
            }
            let last = traj.samples().last().expect("trajectory has its initial sample");
            let mut line = format!(
                "evolve: t = {:.6}, norm {:.9}, sigma {:.6}",
                last.t, last.observables.norm, last.observables.sigma
            );
            let window = traj.default_fit_window();
            match ballistic_velocity(&traj, window) {
                Ok(fit) => line.push_str(&format!(
                    ", V = {:.6} (fit over t in [{:.3}, {:.3}], R^2 {:.5})",
                    fit.slope, window.0, window.1, fit.r_squared
                )),
                Err(Error::InsufficientData { .. }) => line.push_str(", too few samples to fit V"),
                Err(e) => return Err(e),
            }
            out.summary(&line);
        }
        Command::Hopping(a) => {
            let w = waveform(&a.waveform)?;
            let h = effective_hopping(&w, &cfg)?;
            let mut table = Table::new(["kappa_eff_re", "kappa_eff_im", "ratio_abs"]).with_meta("drive", w.describe());
            table.push_row(vec![Cell::F(h.kappa_eff.re), Cell::F(h.kappa_eff.im), Cell::F(h.ratio.norm())]);
            out.write(table, &cli.out)?;
            let mut line = format!("hopping: kappa'/kappa = {:.9}", h.ratio.norm());
            if let Some(closed) = h.closed_form_ratio {
                line.push_str(&format!(" (closed form {:.9})", closed.norm()));
            }
            out.summary(&line);
        }
        Command::CheckDrive(a) => {
            let w = waveform(&a.waveform)?;
            let scale = 1f64.max(w.amplitude().norm() * w.period());
            let tol = a.tol.unwrap_or_else(|| w.default_tolerance());
            let mean = w.zero_mean_residual();
            let anti = w.antisymmetry_residual(a.samples.max(16));
            let ok = w.check_antisymmetry(a.samples, tol * scale)? && mean < tol * scale;
            let mut table = Table::new(["zero_mean_residual", "antisymmetry_residual", "tol", "ok"])
                .with_meta("drive", w.describe());
            table.push_row(vec![Cell::F(mean), Cell::F(anti), Cell::F(tol * scale), Cell::B(ok)]);
            out.write(table, &cli.out)?;
            out.summary(&format!(
                "check-drive: {} (mean residual {mean:.3e}, antisymmetry residual {anti:.3e})",
                if ok { "ok" } else { "violated" }
            ));
            if !ok {
                return Err(Error::ConstraintViolated(format!(
                    "drive fails the constraint checks at tolerance {:e}",
                    tol * scale
                )));
            }
        }
    }
    Ok(())
}
