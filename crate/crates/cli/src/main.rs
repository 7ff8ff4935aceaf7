//! `walsh`: command-line front end to the walsh-spider toolkit.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Config;

/// Default directory for CSV output when `--output` is absent.
pub const OUTPUT_DIR_VAR: &str = "WALSH_OUTPUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error(transparent)]
    Library(#[from] walsh_spider::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("verification failed: {0}")]
    Failed(String),
}

impl CliError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    fn exit_code(&self) -> u8 {
        use walsh_spider::Error as E;
        match self {
            CliError::Invalid { .. }
            | CliError::Library(
                E::InvalidParameter { .. } | E::UnknownRay(_) | E::UnknownSuite(_),
            ) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "walsh",
    version,
    about = "Penalized Walsh spider simulation and checks"
)]
struct Cli {
    /// Plain-text `key=value` file; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// CSV destination; defaults to `$WALSH_OUTPUT_DIR/<command>.csv`, then stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Clone, Copy)]
enum Command {
    /// Simulate spider paths.
    Simulate,
    /// Evaluate a named formula on a grid of parameters.
    Formulas,
    /// Penalized estimates over a horizon grid next to the limit estimate.
    Penalize,
    /// Sample paths from the limit law of the resolved regime.
    LimitSample,
    /// Run a verification suite.
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Formulas => "formulas",
            Command::Penalize => "penalize",
            Command::LimitSample => "limit-sample",
            Command::Verify => "verify",
        }
    }
}

/// Lists are comma-separated, e.g. `--mu 0.3,0.7`.
#[derive(Debug, Args, Default)]
struct Flags {
    /// Ray names.
    #[arg(long, global = true, allow_hyphen_values = true)]
    rays: Option<String>,
    /// Ray weights, summing to one.
    #[arg(long, global = true, allow_hyphen_values = true)]
    mu: Option<String>,
    /// Per-ray drift coefficients.
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Local-time coefficient (a list for `formulas`).
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma: Option<String>,
    /// Horizon (a list for `formulas`).
    #[arg(long, global = true, allow_hyphen_values = true)]
    t: Option<String>,
    /// Horizons of `penalize`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    t_grid: Option<String>,
    /// Horizon of the functional in `penalize`, time argument of `M`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    s: Option<String>,
    #[arg(long, global = true)]
    steps: Option<String>,
    #[arg(long, global = true)]
    n_paths: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Suite name for `verify`.
    #[arg(long, global = true)]
    suite: Option<String>,
    /// Multiplier on suite path counts.
    #[arg(long, global = true)]
    scale: Option<String>,
    /// Starting radius for `simulate`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Starting ray for `simulate`.
    #[arg(long, global = true)]
    start_ray: Option<String>,
    /// Formula name: J, J_quadrature, L, I, K, R, Q, Q_asymptotic, M, return_prob.
    #[arg(long, global = true)]
    name: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    x: Option<String>,
    /// Ray index for ray-dependent formulas.
    #[arg(long, global = true)]
    k: Option<String>,
    /// Local time argument of `M`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    l: Option<String>,
    /// Functional for `penalize`, e.g. `on_ray:0` or `radius_above:0.5`.
    #[arg(long, global = true)]
    functional: Option<String>,
}

impl Flags {
    fn pairs(&self) -> [(&'static str, &Option<String>); 20] {
        [
            ("rays", &self.rays),
            ("mu", &self.mu),
            ("alpha", &self.alpha),
            ("gamma", &self.gamma),
            ("t", &self.t),
            ("t_grid", &self.t_grid),
            ("s", &self.s),
            ("steps", &self.steps),
            ("n_paths", &self.n_paths),
            ("seed", &self.seed),
            ("suite", &self.suite),
            ("scale", &self.scale),
            ("x0", &self.x0),
            ("start_ray", &self.start_ray),
            ("name", &self.name),
            ("beta", &self.beta),
            ("x", &self.x),
            ("k", &self.k),
            ("l", &self.l),
            ("functional", &self.functional),
        ]
    }
}

fn resolve(cli: &Cli) -> Result<Config, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    for (key, value) in cli.flags.pairs() {
        if let Some(v) = value {
            cfg.set(key, v.clone());
        }
    }
    Ok(cfg)
}

fn write_output(cli: &Cli, text: &str) -> Result<(), CliError> {
    let path = cli.output.clone().or_else(|| {
        std::env::var_os(OUTPUT_DIR_VAR)
            .map(|dir| PathBuf::from(dir).join(format!("{}.csv", cli.command.name())))
    });
    match path {
        Some(p) => std::fs::write(&p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::invalid("threads", "must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::invalid("threads", e.to_string()))?;
    }
    let mut cfg = resolve(cli)?;
    let out = match cli.command {
        Command::Simulate => commands::simulate(&mut cfg)?,
        Command::Formulas => commands::formulas(&mut cfg)?,
        Command::Penalize => commands::penalize(&mut cfg)?,
        Command::LimitSample => commands::limit_sample(&mut cfg)?,
        Command::Verify => commands::verify(&mut cfg)?,
    };
    eprintln!("{} {}", cli.command.name(), out.summary);
    write_output(cli, &out.csv)?;
    match out.failure {
        Some(f) => Err(CliError::Failed(f)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
