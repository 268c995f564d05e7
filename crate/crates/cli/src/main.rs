use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use vascr_cli::{commands, config};
use vascr_core::nested::EngineMode;

#[derive(Parser)]
#[command(
    name = "vascr",
    version,
    about = "Solvency capital calculator for variable annuity portfolios",
    long_about = "Computes the 99.5% one-year value-at-risk of a synthetic variable annuity \
                  portfolio via nested simulation, either by full Monte Carlo revaluation or \
                  through a softmax-kernel network interpolating representative contracts."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML config file (see README for the schema)
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Built-in parameter set: desk (quick) or paper (full scale)
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Master seed override; every random stream derives from it
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the input, representative, training and validation portfolio
    /// CSVs plus the mortality table
    Generate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory
        #[arg(long, default_value = "out", value_name = "DIR")]
        out: PathBuf,
    },
    /// Value a portfolio CSV at time 0 (per-contract CSV + JSON summary)
    Value {
        /// Portfolio CSV to value
        portfolio: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value = "out", value_name = "DIR")]
        out: PathBuf,
    },
    /// Run the nested simulation and report the solvency capital requirement
    Scr {
        #[command(flatten)]
        config: ConfigArgs,
        /// Liability engine: mc (full Monte Carlo) or nn (network interpolation)
        #[arg(long, value_name = "MODE")]
        mode: Option<String>,
        #[arg(long, default_value = "out", value_name = "DIR")]
        out: PathBuf,
    },
    /// Compare two report JSONs: relative errors and wall-clock speed-up
    Compare {
        /// Report whose accuracy is being judged (typically the nn run)
        estimate: PathBuf,
        /// Reference report (typically the mc baseline)
        baseline: PathBuf,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { config, out } => {
            let cfg = resolve(&config, None)?;
            let written = commands::generate(&cfg, &out)?;
            for (name, rows) in written {
                if rows > 0 {
                    println!("{}: {} contracts", out.join(name).display(), rows);
                } else {
                    println!("{}", out.join(name).display());
                }
            }
        }
        Command::Value {
            portfolio,
            config,
            out,
        } => {
            let cfg = resolve(&config, None)?;
            let summary = commands::value(&cfg, &portfolio, &out)?;
            println!(
                "{} contracts, total mvl0 {:.2} (mean {:.2}) at {} paths",
                summary.n_contracts, summary.total_mvl0, summary.mean_mvl0, summary.paths
            );
            println!("wrote {}", out.join("liabilities.csv").display());
        }
        Command::Scr { config, mode, out } => {
            let mode = mode.map(|m| m.parse::<EngineMode>()).transpose()?;
            let cfg = resolve(&config, mode)?;
            let artifacts = commands::scr(&cfg, &out)?;
            let report = &artifacts.report;
            println!("mode: {:?}", report.mode);
            println!("scr:        {:.2}", report.scr);
            println!("mvl0:       {:.2}", report.mvl0);
            println!("mvl1_q995:  {:.2}", report.mvl1_q995);
            if let Some(ft) = &report.fine_tune {
                println!(
                    "fine-tune:  {}/{} knots succeeded, {} re-trains",
                    ft.successes, ft.knots, ft.retrains
                );
            }
            println!("wall clock: {:.2}s", report.timings.total);
            println!("wrote {}", out.join("report.json").display());
        }
        Command::Compare { estimate, baseline } => {
            let comparison = commands::compare(&estimate, &baseline)?;
            println!("{comparison}");
        }
    }
    Ok(())
}

fn resolve(args: &ConfigArgs, mode: Option<EngineMode>) -> Result<vascr_core::nested::PipelineConfig> {
    config::resolve(
        args.config.as_deref(),
        args.preset.as_deref(),
        args.seed,
        mode,
    )
}
