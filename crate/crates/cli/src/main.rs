use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oll_cli::report::{canonical_json, steps_csv, trace_csv, write_output};
use oll_cli::{parse_config, CliError, JobConfig, OutputFormat, Overrides, ProbeGrid};

/// Orlicz-Lorentz norms and expansivity of composition operators on atomic spaces.
#[derive(Debug, Parser)]
#[command(name = "oll", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Luxemburg norm of the config's [function].
    Norm(Common),
    /// Decreasing rearrangement of the config's [function].
    Rearrange(Common),
    /// Classify the requested notions, criterion and oracle side by side.
    Classify(Common),
    /// Criterion values, growth ratios and orbit norms for every test set.
    Simulate(Common),
    /// Sample φ(2s)/φ(s) on a geometric grid.
    ProbeDelta2 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = ProbeGrid::default().s0)]
        s0: f64,
        #[arg(long, default_value_t = ProbeGrid::default().s_max)]
        s_max: f64,
        #[arg(long, default_value_t = ProbeGrid::default().samples)]
        samples: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// expansive, positive, uniform_positive or uniform; repeatable.
    #[arg(long = "notion")]
    notions: Vec<String>,
    #[arg(long)]
    horizon: Option<i64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    ratio_threshold: Option<f64>,
    #[arg(long)]
    window: Option<i64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Common {
    fn load(&self) -> Result<JobConfig, CliError> {
        let mut cfg = parse_config(&self.config)?;
        cfg.apply(&Overrides {
            notions: self.notions.clone(),
            horizon: self.horizon,
            epsilon: self.epsilon,
            ratio_threshold: self.ratio_threshold,
            window: self.window,
            seed: self.seed,
            format: self.format.map(|f| match f {
                Format::Json => OutputFormat::Json,
                Format::Csv => OutputFormat::Csv,
            }),
            output: self.output.clone(),
        })?;
        log::debug!("loaded {}", self.config.display());
        Ok(cfg)
    }
}

fn no_csv(command: &str) -> CliError {
    CliError::Usage(format!("--format csv is not available for {command}"))
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let common = match &cli.command {
        Command::Norm(c) | Command::Rearrange(c) | Command::Classify(c) | Command::Simulate(c) => c,
        Command::ProbeDelta2 { common, .. } => common,
    };
    let cfg = common.load()?;
    let csv = cfg.output.format == OutputFormat::Csv;
    let mut code = 0;
    let bytes = match &cli.command {
        Command::Norm(_) => {
            if csv {
                return Err(no_csv("norm"));
            }
            canonical_json(&oll_cli::run_norm(&cfg)?)?
        }
        Command::Rearrange(_) => {
            let report = oll_cli::run_rearrange(&cfg)?;
            if csv {
                steps_csv(&report.result.rearrangement)
            } else {
                canonical_json(&report)?
            }
        }
        Command::Classify(_) => {
            let report = oll_cli::run_job(&cfg)?;
            code = report.exit_code();
            for notion in oll_cli::job::undecided(&report) {
                log::warn!("{notion} left undecided");
            }
            if csv {
                let system = cfg.system()?;
                trace_csv(&oll_core::trace_rows(&system, &cfg.test_family()?)?)
            } else {
                canonical_json(&report)?
            }
        }
        Command::Simulate(_) => {
            let report = oll_cli::run_simulate(&cfg)?;
            if csv {
                trace_csv(&report.result.rows)
            } else {
                canonical_json(&report)?
            }
        }
        Command::ProbeDelta2 { s0, s_max, samples, .. } => {
            if csv {
                return Err(no_csv("probe-delta2"));
            }
            let grid = ProbeGrid { s0: *s0, s_max: *s_max, samples: *samples };
            canonical_json(&oll_cli::run_probe(&cfg, grid)?)?
        }
    };
    write_output(bytes.as_bytes(), cfg.output.path.as_deref().map(Path::new))?;
    Ok(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("OLL_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
