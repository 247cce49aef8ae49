//! Command-line front end for the convergence study.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 I/O failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use magpoint::study::{
    diagnostics, diagnostics_csv, emit_figure_data, run_convergence_study, write_report,
    StudyConfig,
};
use magpoint::Error;

#[derive(Parser)]
#[command(name = "studycli", about = "Point-approximation eigenvalue study driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// JSON configuration file; omitted fields use built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the configuration file).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Comma-separated list of point counts, e.g. `20,40,80`.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    /// Spectral window as `lo,hi`; may be repeated.
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    window: Vec<(f64, f64)>,
    /// Accepted for interface stability; the computation has no random state.
    #[arg(long, default_value_t = false)]
    seedless: bool,
    /// Worker thread count (defaults to the number of logical CPUs).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full convergence study and write report.json plus CSVs.
    Study(CommonOpts),
    /// Run the study and print one window's figure data CSV to stdout.
    Figure {
        #[command(flatten)]
        common: CommonOpts,
        /// Index of the window to print.
        #[arg(long, default_value_t = 0)]
        window_index: usize,
    },
    /// Print the operator-norm diagnostic table at a probe energy.
    Diag {
        #[command(flatten)]
        common: CommonOpts,
        /// Probe energy inside one of the configured windows.
        #[arg(long, allow_hyphen_values = true)]
        z_probe: f64,
    },
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected `lo,hi`, got `{s}`"));
    }
    let lo: f64 = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi))
}

fn build_config(opts: &CommonOpts) -> Result<StudyConfig, Error> {
    let mut cfg = match &opts.config {
        Some(path) => StudyConfig::from_json_file(path)?,
        None => StudyConfig::default(),
    };
    if let Some(out) = &opts.output {
        cfg.output_dir = out.clone();
    }
    if let Some(n_list) = &opts.n_list {
        cfg.n_list = n_list.clone();
    }
    if !opts.window.is_empty() {
        cfg.windows = Some(opts.window.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn exit_code_for(err: &Error) -> ExitCode {
    match err {
        Error::InvalidConfig(_) => ExitCode::from(2),
        Error::Io { .. } => ExitCode::from(4),
        _ => ExitCode::from(3),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let common = match &cli.command {
        Command::Study(c) => c,
        Command::Figure { common, .. } => common,
        Command::Diag { common, .. } => common,
    };
    if let Some(threads) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    }
    let cfg = build_config(common)?;

    match cli.command {
        Command::Study(_) => {
            let report = run_convergence_study(&cfg)?;
            write_report(&report, &cfg.output_dir)?;
            for wr in &report.windows {
                for w in &wr.warnings {
                    eprintln!("warning: {w}");
                }
                for fit in &wr.fits {
                    println!(
                        "window [{}, {}] branch {}: z* = {:.9}, rate a = {:.3} over {} points",
                        wr.window.0, wr.window.1, fit.branch, fit.exact_z, fit.a, fit.points_used
                    );
                }
            }
            println!("wrote report to {}", cfg.output_dir.display());
        }
        Command::Figure { window_index, .. } => {
            let report = run_convergence_study(&cfg)?;
            print!("{}", emit_figure_data(&report, window_index)?);
        }
        Command::Diag { z_probe, .. } => {
            let rows = diagnostics(&cfg, z_probe)?;
            print!("{}", diagnostics_csv(&rows));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}
