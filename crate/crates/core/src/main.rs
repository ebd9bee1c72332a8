use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use otoc_spectro::cli::run::{remediation, EXIT_CONFIG, EXIT_NUMERIC};
use otoc_spectro::cli::{exit_code, run_experiment, ExperimentConfig, OutputFormat};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Run a coincidence-signal experiment described by a config file.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Args {
    /// Experiment config (.toml, or a .json echo from a previous run).
    #[arg(long)]
    config: PathBuf,
    /// Output file; defaults to the config's output path, else standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; defaults to the config's output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads for the scan.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    let cfg = match ExperimentConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if args.verbose {
        eprintln!("running {} from {}", cfg.experiment.name(), args.config.display());
    }
    let out = match run_experiment(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(hint) = remediation(&e) {
                eprintln!("hint: {hint}");
            }
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    let format = match args.format {
        Some(Format::Csv) => OutputFormat::Csv,
        Some(Format::Json) => OutputFormat::Json,
        None => cfg.output.format,
    };
    let text = match format {
        OutputFormat::Csv => out.scan.to_csv(),
        OutputFormat::Json => match out.scan.to_json() {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_NUMERIC as u8);
            }
        },
    };
    let target = args.out.clone().or_else(|| {
        cfg.output.path.as_ref().map(|p| {
            if p.is_absolute() {
                p.clone()
            } else {
                args.config.parent().unwrap_or(std::path::Path::new(".")).join(p)
            }
        })
    });
    match &target {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: writing {}: {e}", path.display());
                return ExitCode::from(EXIT_CONFIG as u8);
            }
            if args.verbose {
                eprintln!("wrote {} rows to {}", out.scan.rows.len(), path.display());
            }
        }
        None => print!("{text}"),
    }
    // summary goes to stdout unless stdout carries the data itself
    for line in &out.summary {
        if target.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
    if out.check_failed {
        return ExitCode::from(EXIT_NUMERIC as u8);
    }
    ExitCode::SUCCESS
}
