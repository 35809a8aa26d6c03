//! Batch front door: `run` executes a configured study end to end,
//! `simulate` generates synthetic data from the variance process, `indices`
//! computes sentiment proxies only, and `report` re-renders tables from the
//! JSON artifacts of an earlier run.
//!
//! Exit codes: 0 on success (including partial cell failures), 1 when every
//! fit cell failed, 2 on invalid configuration or arguments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sentivol_cli::{artifacts, config, pipeline, report_cmd};
use sentivol_core::egarch::EgarchParams;
use sentivol_core::io::write_series_table;
use sentivol_core::series::ObservationSeries;
use sentivol_core::simulate::{simulate, DsentPolicy, SimulationSpec};

use crate::config::OutputFormat;

#[derive(Parser)]
#[command(
    name = "sentivol",
    version,
    about = "Sentiment indices, volatility regressions, and EGARCH estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline described by a config file.
    Run(RunArgs),
    /// Generate a synthetic return/sentiment sample to CSV.
    Simulate(SimulateArgs),
    /// Compute the configured sentiment indices and stop.
    Indices(RunArgs),
    /// Re-render text tables from a run's JSON artifacts.
    Report(ReportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config's output formats (repeatable).
    #[arg(long = "format", value_enum)]
    formats: Vec<FormatArg>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Json,
    Text,
    Csv,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> OutputFormat {
        match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Text => OutputFormat::Text,
            FormatArg::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Observations to keep after burn-in.
    #[arg(long, default_value_t = 5000)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    #[arg(long, default_value_t = 0.05)]
    mu: f64,
    #[arg(long, default_value_t = -0.10)]
    omega: f64,
    #[arg(long, default_value_t = 0.15)]
    alpha: f64,
    #[arg(long, default_value_t = -0.06, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, default_value_t = 0.95)]
    gamma: f64,
    /// Sentiment-change coefficient in the variance equation.
    #[arg(long, default_value_t = 0.30, allow_hyphen_values = true)]
    delta: f64,
    /// Scale of the i.i.d. sentiment changes; 0 emits a zero column.
    #[arg(long, default_value_t = 0.2)]
    dsent_scale: f64,
        /// First kept observation's date.
    #[arg(long, default_value = "2000-01-01")]
    start_date: chrono::NaiveDate,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory holding a run's artifacts (the run's out_dir).
    #[arg(long, default_value = "out")]
    artifacts: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run_command(args, Mode::Full),
        Command::Indices(args) => run_command(args, Mode::IndicesOnly),
        Command::Simulate(args) => simulate_command(args),
        Command::Report(args) => report_command(args),
    }
}

enum Mode {
    Full,
    IndicesOnly,
}

fn run_command(args: RunArgs, mode: Mode) -> ExitCode {
    let mut loaded = match config::load(&args.config) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = args.seed {
        loaded.config.seed = seed;
    }
    if let Some(out) = args.out {
        loaded.config.out_dir = out;
    }
    if !args.formats.is_empty() {
        loaded.config.formats = Some(args.formats.iter().map(|f| (*f).into()).collect());
    }
    let base_dir = args
        .config
        .parent()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    if let Err(e) = loaded.config.validate(&base_dir) {
        eprintln!("{e}");
        return ExitCode::from(2);
    }

    let scope = match mode {
        Mode::Full => pipeline::Scope::Full,
        Mode::IndicesOnly => pipeline::Scope::Indices,
    };
    let output = pipeline::run_pipeline(&loaded.config, &base_dir, scope);
    let out_dir = base_dir.join(&loaded.config.out_dir);
    let mut writer = artifacts::Writer::new(&out_dir, loaded.config.formats());
    let write_result = match mode {
        Mode::Full => writer.write_run(&loaded, &output),
        Mode::IndicesOnly => writer.write_indices_only(&loaded, &output),
    };
    if let Err(e) = write_result {
        eprintln!("failed to write artifacts: {e}");
        return ExitCode::from(1);
    }

    for cell in &output.cells {
        match &cell.detail {
            Some(detail) => println!("{:<50} {}: {detail}", cell.cell, cell.status),
            None => println!("{:<50} {}", cell.cell, cell.status),
        }
    }
    println!(
        "{} cells ok, {} failed; artifacts in {}",
        output.successes(),
        output.failures(),
        out_dir.display()
    );
    let productive = match mode {
        Mode::Full => output.fit_successes(),
        Mode::IndicesOnly => output.proxy_successes(),
    };
    if productive == 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn simulate_command(args: SimulateArgs) -> ExitCode {
    let params = EgarchParams::new(
        args.mu,
        args.omega,
        args.alpha,
        args.beta,
        args.gamma,
        vec![args.delta],
    );
    let dsent = if args.dsent_scale == 0.0 {
        DsentPolicy::Zeros
    } else {
        DsentPolicy::IidNormal {
            scale: args.dsent_scale,
        }
    };
    let spec = SimulationSpec::new(params, args.n)
        .with_burn_in(args.burn_in)
        .with_dsent(dsent)
        .with_start_date(args.start_date);
    let sim = match simulate(&spec, args.seed) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("simulation failed: {e}");
            return ExitCode::from(2);
        }
    };

    // The sentiment column is the running sum of the changes, so downstream
    // differencing recovers exactly the simulated change series.
    let mut level = 0.0;
    let levels: Vec<f64> = sim
        .dsent
        .values()
        .iter()
        .map(|d| {
            level += d;
            level
        })
        .collect();
    let sentiment =
        ObservationSeries::new(sim.dsent.dates().to_vec(), levels, "sentiment level")
            .expect("same dates");

    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            if let Err(e) = std::fs::create_dir_all(parent) {
                eprintln!("cannot create {}: {e}", parent.display());
                return ExitCode::from(1);
            }
        }
    }
    let columns: [(&str, &ObservationSeries); 4] = [
        ("return_pct", &sim.returns),
        ("sentiment", &sentiment),
        ("dsent", &sim.dsent),
        ("sigma2", &sim.variance),
    ];
    if let Err(e) = write_series_table(&args.out, &columns) {
        eprintln!("cannot write {}: {e}", args.out.display());
        return ExitCode::from(1);
    }
    println!(
        "wrote {} observations (seed {}) to {}",
        args.n,
        args.seed,
        args.out.display()
    );
    ExitCode::SUCCESS
}

fn report_command(args: ReportArgs) -> ExitCode {
    match report_cmd::render(&args.artifacts) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
