use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use tcxy::{C64, Preset};
use tcxy_cli::config::{CustomState, Observable, OutputFormat, RunConfig, TimeScale};
use tcxy_cli::error::{CliError, CliResult};
use tcxy_cli::sweep::{self, Dataset, SweepAxis};
use tcxy_cli::{output, repro, verify};

#[derive(Parser)]
#[command(
    name = "tcxy",
    version,
    about = "Two XY-coupled qubits in a coherent field"
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one trajectory.
    Run(RunArgs),
    /// Compute one trajectory per value of a parameter.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// lambda1, lambda2, delta, nbar or preset.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
    },
    /// Compare the closed form with the eigendecomposition oracle on the audit grid.
    Verify {
        /// Write the per-point report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the dataset behind one figure (fig2 .. fig12).
    Repro {
        figure: String,
        /// Points per trajectory.
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = parse_format)]
        format: Option<OutputFormat>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with run settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Initial qubit state: psi_e, psi_b or psi_s.
    #[arg(long, value_parser = parse_preset)]
    preset: Option<Preset>,
    /// Custom amplitude of |e1 e2> as "re,im".
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    a: Option<C64>,
    /// Custom amplitude of |e1 g2>.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    b: Option<C64>,
    /// Custom amplitude of |g1 e2>.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    c: Option<C64>,
    /// Custom amplitude of |g1 g2>.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    d: Option<C64>,
    /// Mean photon number of the coherent field.
    #[arg(long)]
    nbar: Option<f64>,
    /// Qubit-field coupling.
    #[arg(long)]
    lambda1: Option<f64>,
    /// Qubit-qubit exchange coupling.
    #[arg(long)]
    lambda2: Option<f64>,
    /// Detuning between qubit and field frequencies.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// End of the dimensionless time grid.
    #[arg(long)]
    tau_max: Option<f64>,
    /// Points on the uniform time grid, including both ends.
    #[arg(long)]
    points: Option<usize>,
    /// tau = lambda1 t or lambda2 t (default lambda1, or lambda2 when lambda1 = 0).
    #[arg(long, value_parser = parse_time_scale)]
    time_scale: Option<TimeScale>,
    /// Comma-separated subset of inversion, concurrence, eof, norm, nexp.
    #[arg(long)]
    observables: Option<String>,
    /// Add the per-row deviation from the eigendecomposition oracle.
    #[arg(long)]
    oracle_check: bool,
    /// Drop the low-photon amplitudes outside the four-level manifolds.
    #[arg(long)]
    no_frozen_sector: bool,
    /// Output file (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json (default from the --out extension, else csv).
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: tcxy::Error| e.to_string())
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| {
        p.parse::<f64>()
            .map_err(|_| format!("`{s}` is not \"re,im\""))
    };
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(format!("`{s}` is not \"re,im\"")),
    }
}

fn parse_time_scale(s: &str) -> Result<TimeScale, String> {
    match s {
        "lambda1" => Ok(TimeScale::Lambda1),
        "lambda2" => Ok(TimeScale::Lambda2),
        _ => Err(format!("`{s}` is not lambda1 or lambda2")),
    }
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        _ => Err(format!("`{s}` is not csv or json")),
    }
}

impl RunArgs {
    /// File values first, then every flag that was given.
    fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_toml(&std::fs::read_to_string(path)?)?,
            None => RunConfig::default(),
        };
        if let Some(p) = self.preset {
            cfg = cfg.with_preset(p);
        }
        if [self.a, self.b, self.c, self.d].iter().any(Option::is_some) {
            if self.preset.is_some() {
                return Err(CliError::Config(
                    "--preset conflicts with --a/--b/--c/--d".into(),
                ));
            }
            let amp = |z: Option<C64>| z.map_or([0.0, 0.0], |z| [z.re, z.im]);
            cfg.state = Some(CustomState {
                a: amp(self.a),
                b: amp(self.b),
                c: amp(self.c),
                d: amp(self.d),
            });
            cfg.preset = None;
        }
        if let Some(v) = self.nbar {
            cfg.nbar = v;
        }
        if let Some(v) = self.lambda1 {
            cfg.params.lambda1 = v;
        }
        if let Some(v) = self.lambda2 {
            cfg.params.lambda2 = v;
        }
        if let Some(v) = self.delta {
            cfg.params.delta = v;
        }
        if let Some(v) = self.tau_max {
            cfg.time_grid.tau_max = v;
        }
        if let Some(v) = self.points {
            cfg.time_grid.points = v;
        }
        if let Some(v) = self.time_scale {
            cfg.time_scale = Some(v);
        }
        if let Some(list) = &self.observables {
            cfg.observables = list
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(Observable::parse)
                .collect::<CliResult<_>>()?;
        }
        if self.oracle_check {
            cfg.oracle_check = true;
        }
        if self.no_frozen_sector {
            cfg.frozen_sector = false;
        }
        if let Some(path) = &self.out {
            cfg.output.path = Some(path.clone());
        }
        cfg.output.format = self
            .format
            .unwrap_or_else(|| guess_format(cfg.output.path.as_ref(), cfg.output.format));
        Ok(cfg)
    }
}

fn guess_format(path: Option<&PathBuf>, fallback: OutputFormat) -> OutputFormat {
    match path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("json") => OutputFormat::Json,
        Some("csv") => OutputFormat::Csv,
        _ => fallback,
    }
}

fn emit(ds: &Dataset, path: Option<&PathBuf>, format: OutputFormat) -> CliResult<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            output::write(ds, format, &mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = BufWriter::new(std::io::stdout().lock());
            output::write(ds, format, &mut w)?;
            w.flush()?;
        }
    }
    let failures: Vec<_> = ds.failures().collect();
    for (key, err) in &failures {
        let key: Vec<String> = ds
            .key_names
            .iter()
            .zip(key.iter())
            .map(|(n, v)| format!("{n}={v}"))
            .collect();
        eprintln!("failed [{}]: {err}", key.join(", "));
    }
    match failures.first() {
        Some((_, err)) => Err(rewrap(err)),
        None => Ok(()),
    }
}

/// Carry a failure's exit class without cloning the source error.
fn rewrap(err: &CliError) -> CliError {
    match err.exit_code() {
        tcxy_cli::error::EXIT_CONFIG => CliError::Config(format!("a sweep value failed: {err}")),
        _ => CliError::Model(tcxy::Error::NumericalDegradation(format!(
            "a sweep value failed: {err}"
        ))),
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let ds = sweep::single(&cfg)?;
            emit(&ds, cfg.output.path.as_ref(), cfg.output.format)
        }
        Command::Sweep { run, axis, values } => {
            let cfg = run.resolve()?;
            let axis = SweepAxis::parse(&axis)?;
            let values = axis.parse_values(&values)?;
            let ds = sweep::run_sweep(&cfg, axis, &values)?;
            emit(&ds, cfg.output.path.as_ref(), cfg.output.format)
        }
        Command::Verify { out } => {
            let report = verify::run_verify(&verify::VerifyGrid::default())?;
            for line in report.summary() {
                println!("{line}");
            }
            if let Some(path) = out {
                let file = BufWriter::new(File::create(path)?);
                serde_json::to_writer_pretty(file, &report).map_err(std::io::Error::from)?;
            }
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::Verify("see summary above".into()))
            }
        }
        Command::Repro {
            figure,
            points,
            out,
            format,
        } => {
            let ds = repro::run_figure(&figure, points)?;
            let format = format.unwrap_or_else(|| guess_format(out.as_ref(), OutputFormat::Csv));
            emit(&ds, out.as_ref(), format)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = execute(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
