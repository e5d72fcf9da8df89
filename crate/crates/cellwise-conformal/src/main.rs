//! Command-line front end: simulate synthetic datasets, run experiment
//! grids, apply a detector to a CSV, or re-render report figures.
//!
//! Exit codes: 0 on success, 1 for configuration errors, 2 for data or
//! runtime errors.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use cellwise_conformal::{
    detect, emit_report, fit_ddc_with_cutoff, fit_zscore, load_csv, run_experiment,
    simulate_dataset, write_dataset_csv, DetectorChoice, Error, ExperimentConfig, ResultsTable,
};

#[derive(Parser)]
#[command(
    name = "cellwise-conformal",
    version,
    about = "Conformal prediction intervals that survive cellwise outliers in test features"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset CSV from a config file
    Simulate {
        /// Flat key=value config file
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path (default: <outdir>/dataset.csv)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of rows (default: n_labeled from the config)
        #[arg(long)]
        n: Option<usize>,
        /// Seed override (default: seed from the config)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the full experiment grid and write results.csv, summary.csv,
    /// and coverage figures into the configured output directory
    Run {
        /// Flat key=value config file
        #[arg(long)]
        config: PathBuf,
    },
    /// Fit the configured detector to a CSV (last column = label, ignored)
    /// and print each row's flagged feature columns (0-based)
    Detect {
        /// Flat key=value config file (detector keys are used)
        #[arg(long)]
        config: PathBuf,
        /// CSV file to scan
        #[arg(long)]
        data: PathBuf,
    },
    /// Re-render coverage figures from an existing results.csv
    Report {
        /// results.csv produced by `run`
        #[arg(long)]
        results: PathBuf,
        /// Directory to write into
        #[arg(long)]
        outdir: PathBuf,
        /// Miscoverage level for the target line
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
    },
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate { config, out, n, seed } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let n = n.unwrap_or(cfg.n_labeled);
            let seed = seed.unwrap_or(cfg.seed);
            let data = simulate_dataset(&cfg, n, seed)?;
            let path = match out {
                Some(p) => p,
                None => {
                    std::fs::create_dir_all(&cfg.outdir)?;
                    cfg.outdir.join("dataset.csv")
                }
            };
            write_dataset_csv(&data, &path)?;
            println!("wrote {} rows to {}", data.len(), path.display());
            Ok(())
        }
        Command::Run { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let table = run_experiment(&cfg)?;
            let files = emit_report(&table, &cfg.outdir, cfg.alpha, Some(&cfg.echo()))?;
            for g in table.summaries() {
                println!(
                    "{} setting={} epsilon={}: coverage {:.3} (sd {:.3}), length {:.3}, inf {:.3}",
                    g.method,
                    g.setting,
                    g.epsilon,
                    g.mean_coverage,
                    g.sd_coverage,
                    g.mean_length,
                    g.mean_inf_frac
                );
            }
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Detect { config, data } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let ds = load_csv(&data)?;
            let det = match cfg.detector {
                DetectorChoice::Ddc { p, corr_cutoff } => {
                    fit_ddc_with_cutoff(&ds.features, p, corr_cutoff)?
                }
                DetectorChoice::ZScore { threshold } => fit_zscore(&ds.features, threshold)?,
            };
            use std::io::Write;
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            // stop quietly if the reader closes the pipe (e.g. `| head`)
            if writeln!(out, "row,flagged_feature_columns").is_err() {
                return Ok(());
            }
            for i in 0..ds.len() {
                let mask = detect(&det, ds.features.row(i))?.mask;
                let cells: Vec<String> = mask.iter().map(|j| j.to_string()).collect();
                if writeln!(out, "{i},{}", cells.join(" ")).is_err() {
                    break;
                }
            }
            Ok(())
        }
        Command::Report { results, outdir, alpha } => {
            if !(0.0 < alpha && alpha < 1.0) {
                return Err(Error::config("alpha must lie strictly between 0 and 1"));
            }
            let table = ResultsTable::from_csv_file(&results)?;
            let files = emit_report(&table, &outdir, alpha, None)?;
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
