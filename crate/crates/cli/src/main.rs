use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

#[derive(Parser, Debug)]
#[command(name = "fibtrace", version, about = "Spectra, dimensions and expansion certificates for the Fibonacci trace map")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// JSON output path; a CSV table is written next to it. Stdout if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; also read from FIBTRACE_THREADS.
    #[arg(long, global = true, env = "FIBTRACE_THREADS")]
    threads: Option<usize>,
    /// Config override such as `spectrum.coupling=2.5`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Band cover σ_k ∪ σ_{k+1} of the Fibonacci Hamiltonian.
    Spectrum,
    /// Box-counting dimension of Cantor sets or spectrum covers.
    Dimension,
    /// Recurrence, model-map and trace-map expansion certificates.
    Certify,
    /// Mesh of the invariant surface, optionally with the period-two curve.
    Mesh,
    /// Word counts, periodic points and entropy of the symbolic coding.
    Subshift,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Dimension => "dimension",
            Command::Certify => "certify",
            Command::Mesh => "mesh",
            Command::Subshift => "subshift",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl From<fibtrace::Error> for CliError {
    fn from(e: fibtrace::Error) -> Self {
        match e {
            fibtrace::Error::Numeric(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = config::load(cli.config.as_deref(), &cli.set)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    }
    let out = match cli.command {
        Command::Spectrum => commands::spectrum(&cfg)?,
        Command::Dimension => commands::dimension(&cfg)?,
        Command::Certify => commands::certify(&cfg)?,
        Command::Mesh => commands::mesh(&cfg)?,
        Command::Subshift => commands::subshift(&cfg)?,
    };
    output::emit(cli.command.name(), &cfg, out, cli.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
