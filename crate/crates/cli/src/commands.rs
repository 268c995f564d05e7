//! The four subcommands: generate, value, scr, compare.

use std::fmt;
use std::io::BufReader;
use std::path::Path;

use anyhow::{Context, Result};
use vascr_core::interpolator::save_network;
use vascr_core::nested::{
    build_inputs, load_mortality, relative_error, run_nested, PipelineConfig, RunArtifacts,
    ScrReport,
};
use vascr_core::portfolio::{read_portfolio_csv, write_portfolio_csv};
use vascr_core::valuation::Valuator;
use vascr_core::{Contract, Scalar};

use crate::config::serialize_config;
use crate::output::write_atomic;

/// Writes the input, representative, training and validation portfolio CSVs
/// plus the mortality table and a config echo into `out`.
pub fn generate(cfg: &PipelineConfig, out: &Path) -> Result<Vec<(String, usize)>> {
    let inputs = build_inputs(cfg)?;
    let portfolios: [(&str, &[Contract]); 4] = [
        ("input_portfolio.csv", &inputs.input),
        ("representatives.csv", &inputs.representatives),
        ("training_portfolio.csv", &inputs.training),
        ("validation_portfolio.csv", &inputs.validation),
    ];
    let mut written = Vec::new();
    for (name, contracts) in portfolios {
        let mut buf = Vec::new();
        write_portfolio_csv(&mut buf, contracts)?;
        write_atomic(&out.join(name), &buf)?;
        written.push((name.to_string(), contracts.len()));
    }

    let mut buf = Vec::new();
    inputs.mortality.write_csv(&mut buf)?;
    write_atomic(&out.join("mortality.csv"), &buf)?;
    written.push(("mortality.csv".to_string(), 0));

    write_atomic(&out.join("config.toml"), serialize_config(cfg)?.as_bytes())?;
    Ok(written)
}

/// Per-contract time-0 liabilities of a portfolio CSV, written as
/// `liabilities.csv` plus a JSON summary.
#[derive(Debug, serde::Serialize)]
pub struct ValuationSummary {
    pub n_contracts: usize,
    pub total_mvl0: f64,
    pub mean_mvl0: f64,
    pub paths: usize,
    pub master_seed: u64,
}

pub fn value(cfg: &PipelineConfig, portfolio_path: &Path, out: &Path) -> Result<ValuationSummary> {
    let file = std::fs::File::open(portfolio_path)
        .with_context(|| format!("cannot open {}", portfolio_path.display()))?;
    let contracts: Vec<Contract> = read_portfolio_csv(
        BufReader::new(file),
        &portfolio_path.display().to_string(),
    )?;

    let mortality = load_mortality(cfg)?;
    let valuator = Valuator::new(cfg.market_model(), mortality, cfg.valuation_config());
    let estimates = valuator.value_each(&contracts, None)?;

    let mut csv = String::from("id,mvl0,std_error\n");
    for (c, e) in contracts.iter().zip(&estimates) {
        csv.push_str(&format!("{},{:.2},{:.2}\n", c.id, e.mean, e.std_error));
    }
    write_atomic(&out.join("liabilities.csv"), csv.as_bytes())?;

    let total: Scalar = estimates.iter().map(|e| e.mean).sum();
    let summary = ValuationSummary {
        n_contracts: contracts.len(),
        total_mvl0: total,
        mean_mvl0: total / contracts.len() as f64,
        paths: cfg.valuation.paths,
        master_seed: cfg.run.master_seed,
    };
    let json = serde_json::to_string_pretty(&summary)?;
    write_atomic(&out.join("valuation_summary.json"), json.as_bytes())?;
    Ok(summary)
}

/// Runs the full pipeline in the configured mode and persists the report,
/// and in network mode the trained parameters and the training trace.
pub fn scr(cfg: &PipelineConfig, out: &Path) -> Result<RunArtifacts> {
    let inputs = build_inputs(cfg)?;
    let artifacts = run_nested(&inputs, cfg.run.mode, cfg)?;

    let json = serde_json::to_string_pretty(&artifacts.report)?;
    write_atomic(&out.join("report.json"), json.as_bytes())?;

    if let Some((network, normalizer)) = &artifacts.network {
        let mut buf = Vec::new();
        save_network(&mut buf, network, *normalizer)?;
        write_atomic(&out.join("network.bin"), &buf)?;
    }
    if let Some(trace) = &artifacts.trace {
        let json = serde_json::to_string_pretty(trace)?;
        write_atomic(&out.join("training_trace.json"), json.as_bytes())?;
    }
    Ok(artifacts)
}

/// Relative errors of an estimated report against a baseline, plus the
/// wall-clock speed-up of the estimate over the baseline.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Comparison {
    pub scr_relative_error: f64,
    pub mvl0_relative_error: f64,
    pub mvl1_q995_relative_error: f64,
    pub speedup: f64,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scr relative error:       {:+.4}%", 100.0 * self.scr_relative_error)?;
        writeln!(f, "mvl0 relative error:      {:+.4}%", 100.0 * self.mvl0_relative_error)?;
        writeln!(f, "mvl1_q995 relative error: {:+.4}%", 100.0 * self.mvl1_q995_relative_error)?;
        write!(f, "speed-up (baseline/estimate wall clock): {:.2}x", self.speedup)
    }
}

pub fn read_report(path: &Path) -> Result<ScrReport> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read report {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("report {} does not match the schema", path.display()))
}

pub fn compare_reports(estimate: &ScrReport, baseline: &ScrReport) -> Result<Comparison> {
    Ok(Comparison {
        scr_relative_error: relative_error(estimate.scr, baseline.scr)?,
        mvl0_relative_error: relative_error(estimate.mvl0, baseline.mvl0)?,
        mvl1_q995_relative_error: relative_error(estimate.mvl1_q995, baseline.mvl1_q995)?,
        speedup: baseline.timings.total / estimate.timings.total,
    })
}

pub fn compare(estimate_path: &Path, baseline_path: &Path) -> Result<Comparison> {
    let estimate = read_report(estimate_path)?;
    let baseline = read_report(baseline_path)?;
    compare_reports(&estimate, &baseline)
}

#[cfg(test)]
mod tests {
    use super::*;
    use vascr_core::nested::{EngineMode, KnotPoint, StageTimings};

    fn report(scr: f64, mvl0: f64, q995: f64, total_seconds: f64) -> ScrReport {
        ScrReport {
            mode: EngineMode::Mc,
            scr,
            mvl0,
            mvl1_q995: q995,
            n_scenarios: 10,
            knots: vec![KnotPoint {
                c1: 1.0,
                mvl1: q995,
                delta: scr,
            }],
            fine_tune: None,
            config: PipelineConfig::desk(),
            timings: StageTimings {
                total: total_seconds,
                ..StageTimings::default()
            },
        }
    }

    #[test]
    fn identical_reports_compare_to_zero_errors_and_unit_speedup() {
        let r = report(100.0, 50.0, 160.0, 12.0);
        let c = compare_reports(&r, &r).unwrap();
        assert_eq!(c.scr_relative_error, 0.0);
        assert_eq!(c.mvl0_relative_error, 0.0);
        assert_eq!(c.mvl1_q995_relative_error, 0.0);
        assert_eq!(c.speedup, 1.0);
    }

    #[test]
    fn speedup_matches_the_reference_scale() {
        // A baseline of 49,334 seconds against an 8,370-second estimate is a
        // 5.89x speed-up.
        let baseline = report(100.0, 50.0, 160.0, 49_334.0);
        let estimate = report(103.02, 50.0, 160.0, 8_370.0);
        let c = compare_reports(&estimate, &baseline).unwrap();
        assert_eq!(format!("{:.2}", c.speedup), "5.89");
        assert!((c.scr_relative_error - 0.0302).abs() < 1e-12);
    }

    #[test]
    fn missing_fields_fail_the_schema() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{\"mode\":\"mc\",\"mvl0\":1.0}").unwrap();
        let err = read_report(&path).unwrap_err();
        assert!(format!("{err:#}").contains("schema"), "{err:#}");
    }
}
