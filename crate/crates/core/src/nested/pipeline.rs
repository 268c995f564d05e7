//! End-to-end solvency capital pipeline and its configuration.
//!
//! A [`PipelineConfig`] carries every tunable of a run and serializes as the
//! CLI's sectioned config file; unknown keys are rejected so typos fail fast.
//! All randomness derives from `run.master_seed` through labelled seeds
//! (`portfolio.input`, `portfolio.representatives`, `portfolio.training`,
//! `portfolio.validation`, `scenarios`, `valuation`, `training`), so partial
//! reruns stay consistent and two runs with the same master seed produce
//! identical reports up to wall-clock timings.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interpolator::{FeatureRanges, TrainingConfig, TrainingTrace};
use crate::portfolio::{
    generate_synthetic_portfolio, rebase_ids, sample_representatives, sample_validation,
    AttributeRanges, Gender, PortfolioSpec, Rider, SamplingGrid,
};
use crate::util::derive_seed;
use crate::valuation::{mortality::MortalityTable, MarketModel, ValuationConfig, Valuator};
use crate::{Contract, Mortality, Network, Portfolio, Scalar};

use super::engine::{KnotTuning, LiabilityEngine, McEngine, NeuralEngine};
use super::{
    build_sample_paths, generate_scenarios, interpolate_deltas, scr_quantile, DeltaDistribution,
    SamplePathSet, ScenarioSet,
};

/// Representative contracts get ids in their own range so valuation streams
/// and audit logs never collide with input portfolio ids.
pub const REPRESENTATIVE_ID_BASE: u64 = 1_000_000_000;
/// Training contracts likewise.
pub const TRAINING_ID_BASE: u64 = 2_000_000_000;

/// Which liability engine drives the knot evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineMode {
    /// Full nested Monte Carlo over the input portfolio.
    Mc,
    /// Softmax-network interpolation anchored on representative contracts.
    Nn,
}

impl std::str::FromStr for EngineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mc" => Ok(EngineMode::Mc),
            "nn" => Ok(EngineMode::Nn),
            other => Err(Error::Config(format!("unknown mode `{other}`, expected mc or nn"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Single source of all randomness in the run.
    pub master_seed: u64,
    pub mode: EngineMode,
    /// Outer one-year market scenarios.
    pub scenarios: usize,
    /// Equally spaced sample-path knots covering the scenario range.
    pub knots: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            master_seed: 0,
            mode: EngineMode::Nn,
            scenarios: 40_000,
            knots: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PortfolioSection {
    pub input_size: usize,
    pub representatives: usize,
    pub training: usize,
    pub validation: usize,
    pub ranges: RangesSection,
    pub representative_grid: GridSection,
    pub training_grid: GridSection,
}

impl Default for PortfolioSection {
    fn default() -> Self {
        PortfolioSection {
            input_size: 100_000,
            representatives: 300,
            training: 200,
            validation: 250,
            ranges: RangesSection::default(),
            representative_grid: GridSection::representative(),
            training_grid: GridSection::training(),
        }
    }
}

/// Attribute ranges of the random input portfolio. Riders and genders always
/// span the full product universe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RangesSection {
    pub age_min: u32,
    pub age_max: u32,
    pub maturity_min: u32,
    pub maturity_max: u32,
    pub account_value_min: f64,
    pub account_value_max: f64,
    pub guarantee_min: f64,
    pub guarantee_max: f64,
    pub withdrawal_rates: Vec<f64>,
}

impl Default for RangesSection {
    fn default() -> Self {
        RangesSection {
            age_min: 20,
            age_max: 60,
            maturity_min: 10,
            maturity_max: 25,
            account_value_min: 1e4,
            account_value_max: 5e5,
            guarantee_min: 0.5e4,
            guarantee_max: 6e5,
            withdrawal_rates: vec![0.04, 0.05, 0.06, 0.07, 0.08],
        }
    }
}

impl RangesSection {
    fn attribute_ranges(&self) -> AttributeRanges<Scalar> {
        AttributeRanges {
            riders: vec![Rider::Gmdb, Rider::GmdbGmwb],
            genders: vec![Gender::Male, Gender::Female],
            ages: (self.age_min, self.age_max),
            maturities: (self.maturity_min, self.maturity_max),
            account_value: (self.account_value_min, self.account_value_max),
            guarantee: (self.guarantee_min, self.guarantee_max),
            withdrawal_rates: self.withdrawal_rates.clone(),
        }
    }
}

/// Discrete attribute grid; riders and genders always span both categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub ages: Vec<u32>,
    pub account_values: Vec<f64>,
    pub guarantee_values: Vec<f64>,
    pub withdrawal_rates: Vec<f64>,
    pub maturities: Vec<u32>,
}

impl GridSection {
    fn representative() -> Self {
        GridSection {
            ages: vec![20, 30, 40, 50, 60],
            account_values: vec![1e4, 1e5, 2e5, 3e5, 4e5, 5e5],
            guarantee_values: vec![0.5e4, 1e5, 2e5, 3e5, 4e5, 5e5, 6e5],
            withdrawal_rates: vec![0.04, 0.08],
            maturities: vec![10, 15, 20, 25],
        }
    }

    fn training() -> Self {
        GridSection {
            ages: vec![23, 27, 33, 37, 43, 47, 53, 57],
            account_values: vec![0.2e5, 1.5e5, 2.5e5, 3.5e5, 4.5e5],
            guarantee_values: vec![0.5e5, 1.5e5, 2.5e5, 3.5e5, 4.5e5, 5.5e5],
            withdrawal_rates: vec![0.05, 0.06, 0.07],
            maturities: vec![12, 13, 17, 18, 22, 23],
        }
    }

    fn sampling_grid(&self) -> SamplingGrid<Scalar> {
        SamplingGrid {
            riders: vec![Rider::Gmdb, Rider::GmdbGmwb],
            genders: vec![Gender::Male, Gender::Female],
            ages: self.ages.clone(),
            account_values: self.account_values.clone(),
            guarantee_values: self.guarantee_values.clone(),
            withdrawal_rates: self.withdrawal_rates.clone(),
            maturities: self.maturities.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarketSection {
    pub risk_free_rate: f64,
    pub drift: f64,
    pub volatility: f64,
}

impl Default for MarketSection {
    fn default() -> Self {
        MarketSection {
            risk_free_rate: 0.03,
            drift: 0.03,
            volatility: 0.20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValuationSection {
    /// Inner Monte Carlo paths per contract valuation.
    pub paths: usize,
    pub common_random_numbers: bool,
    /// Optional `age,q_male,q_female` CSV; the built-in synthetic table is
    /// used when absent.
    pub mortality_csv: Option<String>,
}

impl Default for ValuationSection {
    fn default() -> Self {
        ValuationSection {
            paths: 10_000,
            common_random_numbers: true,
            mortality_csv: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSection {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub momentum_cap: f64,
    pub eval_interval: usize,
    pub smoothing_window: usize,
    pub trend_degree: usize,
    pub trend_window: usize,
    pub delta_initial: f64,
    pub delta_finetune: f64,
    pub finetune_max_iters: usize,
    pub max_iters: usize,
    pub drop_factor: f64,
    pub sample_with_replacement: bool,
    pub attempts: usize,
}

impl Default for TrainingSection {
    fn default() -> Self {
        TrainingSection {
            learning_rate: 20.0,
            batch_size: 20,
            momentum_cap: 0.99,
            eval_interval: 50,
            smoothing_window: 10,
            trend_degree: 6,
            trend_window: 4,
            delta_initial: 0.005,
            delta_finetune: 0.01,
            finetune_max_iters: 200,
            max_iters: 20_000,
            drop_factor: 10.0,
            sample_with_replacement: true,
            attempts: 3,
        }
    }
}

/// Every tunable of a run; the schema of the config file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub run: RunSection,
    pub portfolio: PortfolioSection,
    pub market: MarketSection,
    pub valuation: ValuationSection,
    pub training: TrainingSection,
}

impl PipelineConfig {
    /// Full-scale parameter set: 100,000 contracts, 300 representatives,
    /// 200 training, 250 validation, 10,000 inner paths, 40,000 scenarios,
    /// 100 knots.
    pub fn paper() -> Self {
        PipelineConfig::default()
    }

    /// Desk-scale parameter set for quick experiments: 1,000 contracts,
    /// 30 representatives, 50 training, 50 validation, 1,000 inner paths,
    /// 4,000 scenarios, 20 knots. The training-MSE drop shortcut is disabled
    /// at this scale: with 50 training contracts a tenfold drop happens long
    /// before the network generalizes, so the validation-trend detector alone
    /// decides when the search phase ends.
    pub fn desk() -> Self {
        let mut cfg = PipelineConfig::default();
        cfg.run.scenarios = 4_000;
        cfg.run.knots = 20;
        cfg.portfolio.input_size = 1_000;
        cfg.portfolio.representatives = 30;
        cfg.portfolio.training = 50;
        cfg.portfolio.validation = 50;
        cfg.valuation.paths = 1_000;
        cfg.training.drop_factor = 1e12;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.run.scenarios < 2 {
            return Err(Error::Config("run.scenarios must be at least 2".into()));
        }
        if self.run.knots < 2 {
            return Err(Error::Config("run.knots must be at least 2".into()));
        }
        let p = &self.portfolio;
        if p.input_size == 0 || p.representatives == 0 || p.training == 0 || p.validation == 0 {
            return Err(Error::Config("portfolio sizes must be at least 1".into()));
        }
        if p.validation > p.input_size {
            return Err(Error::Config(
                "portfolio.validation cannot exceed portfolio.input_size".into(),
            ));
        }
        if self.valuation.paths == 0 {
            return Err(Error::Config("valuation.paths must be at least 1".into()));
        }
        if !self.market.volatility.is_finite() || self.market.volatility < 0.0 {
            return Err(Error::Config("market.volatility must be non-negative".into()));
        }
        Ok(())
    }

    pub fn market_model(&self) -> MarketModel<Scalar> {
        MarketModel {
            rate: self.market.risk_free_rate,
            drift: self.market.drift,
            volatility: self.market.volatility,
        }
    }

    pub fn valuation_config(&self) -> ValuationConfig {
        ValuationConfig {
            n_paths: self.valuation.paths,
            rng_seed: derive_seed(self.run.master_seed, "valuation"),
            use_common_random_numbers: self.valuation.common_random_numbers,
        }
    }

    /// Liabilities are normalized by the guarantee-value range of the input
    /// portfolio during training.
    pub fn target_normalizer(&self) -> f64 {
        self.portfolio.ranges.guarantee_max - self.portfolio.ranges.guarantee_min
    }

    pub fn training_config(&self) -> TrainingConfig<Scalar> {
        let t = &self.training;
        TrainingConfig {
            learning_rate: t.learning_rate,
            batch_size: t.batch_size,
            mu_max: t.momentum_cap,
            mse_eval_interval: t.eval_interval,
            smoothing_window: t.smoothing_window,
            poly_degree: t.trend_degree,
            trend_window: t.trend_window,
            delta_initial: t.delta_initial,
            delta_finetune: t.delta_finetune,
            max_finetune_iters: t.finetune_max_iters,
            max_total_iters: t.max_iters,
            rng_seed: derive_seed(self.run.master_seed, "training"),
            target_normalizer: self.target_normalizer(),
            drop_factor: t.drop_factor,
            sample_with_replacement: t.sample_with_replacement,
            max_training_attempts: t.attempts,
        }
    }

    /// Feature scaling ranges implied by the portfolio ranges. Withdrawal
    /// benefit and rate floors are zero: death-benefit-only contracts carry
    /// neither.
    pub fn feature_ranges(&self) -> FeatureRanges<Scalar> {
        let r = &self.portfolio.ranges;
        let wr_max = r
            .withdrawal_rates
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        FeatureRanges {
            maturity: (r.maturity_min as f64, r.maturity_max as f64),
            age: (r.age_min as f64, r.age_max as f64),
            account_value: (r.account_value_min, r.account_value_max),
            death_benefit: (r.guarantee_min, r.guarantee_max),
            withdrawal_benefit: (0.0, r.guarantee_max),
            withdrawal_rate: (0.0, wr_max),
        }
    }
}

/// The four portfolios and the mortality table of a run.
#[derive(Debug, Clone)]
pub struct RunInputs {
    pub input: Portfolio,
    pub representatives: Portfolio,
    pub training: Portfolio,
    pub validation: Portfolio,
    pub mortality: Mortality,
}

/// Builds all run inputs from the configuration: the random input portfolio,
/// grid-sampled representative and training portfolios (with their own id
/// ranges) and the validation subset of the input portfolio.
pub fn build_inputs(config: &PipelineConfig) -> Result<RunInputs> {
    config.validate()?;
    let master = config.run.master_seed;
    let spec = PortfolioSpec {
        size: config.portfolio.input_size,
        ranges: config.portfolio.ranges.attribute_ranges(),
        rng_seed: derive_seed(master, "portfolio.input"),
    };
    let input = generate_synthetic_portfolio(&spec)?;

    let mut representatives = sample_representatives(
        &config.portfolio.representative_grid.sampling_grid(),
        config.portfolio.representatives,
        derive_seed(master, "portfolio.representatives"),
    )?;
    rebase_ids(&mut representatives, REPRESENTATIVE_ID_BASE);

    let mut training = sample_representatives(
        &config.portfolio.training_grid.sampling_grid(),
        config.portfolio.training,
        derive_seed(master, "portfolio.training"),
    )?;
    rebase_ids(&mut training, TRAINING_ID_BASE);

    let validation = sample_validation(
        &input,
        config.portfolio.validation,
        derive_seed(master, "portfolio.validation"),
    )?;

    let mortality = load_mortality(config)?;

    Ok(RunInputs {
        input,
        representatives,
        training,
        validation,
        mortality,
    })
}

/// The configured mortality table: a CSV when `valuation.mortality_csv` is
/// set, the built-in synthetic table otherwise.
pub fn load_mortality(config: &PipelineConfig) -> Result<Mortality> {
    match &config.valuation.mortality_csv {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(Error::Io)?;
            MortalityTable::read_csv(std::io::BufReader::new(file), path)
        }
        None => Ok(MortalityTable::synthetic()),
    }
}

/// Wall-clock seconds per pipeline stage.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageTimings {
    pub scenario_generation: f64,
    pub knot_construction: f64,
    pub mvl0: f64,
    pub knot_valuation: f64,
    pub interpolation: f64,
    pub quantile: f64,
    pub total: f64,
}

/// Exact valuation at one knot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnotPoint {
    pub c1: f64,
    pub mvl1: f64,
    pub delta: f64,
}

/// Fine-tuning statistics of a network-mode run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FineTuneSummary {
    pub knots: usize,
    pub successes: usize,
    pub retrains: usize,
    pub per_knot: Vec<KnotTuning>,
}

/// The result document of one run; serialized as the report JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScrReport {
    pub mode: EngineMode,
    /// The 99.5% one-year value-at-risk of the loss distribution.
    pub scr: f64,
    /// Time-0 portfolio liability.
    pub mvl0: f64,
    /// 99.5% quantile of the one-year portfolio liability, implied by the
    /// loss quantile.
    pub mvl1_q995: f64,
    pub n_scenarios: usize,
    pub knots: Vec<KnotPoint>,
    pub fine_tune: Option<FineTuneSummary>,
    /// Config echo; a report is reproducible from this plus the input files.
    pub config: PipelineConfig,
    pub timings: StageTimings,
}

/// Report plus the artifacts worth persisting separately.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub report: ScrReport,
    /// Trained time-0 parameters and the target normalizer (network mode).
    pub network: Option<(Network, f64)>,
    pub trace: Option<TrainingTrace<Scalar>>,
}

struct KnotEvaluation {
    paths: SamplePathSet<Scalar>,
    mvl0_seconds: f64,
    knot_seconds: f64,
}

fn evaluate_knots<E: LiabilityEngine<Scalar>>(
    engine: &mut E,
    knots: &[Scalar],
    portfolio: &[Contract],
    rate: Scalar,
) -> Result<KnotEvaluation> {
    let t0 = Instant::now();
    let mvl0 = engine.portfolio_mvl0(portfolio)?;
    let mvl0_seconds = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let mut mvl1 = Vec::with_capacity(knots.len());
    for &c1 in knots {
        mvl1.push(engine.portfolio_mvl1(portfolio, c1)?);
    }
    let knot_seconds = t1.elapsed().as_secs_f64();

    Ok(KnotEvaluation {
        paths: SamplePathSet::from_liabilities(knots.to_vec(), mvl0, mvl1, rate),
        mvl0_seconds,
        knot_seconds,
    })
}

/// Runs the full pipeline: scenarios, knots, per-knot liabilities through the
/// selected engine (ascending, so network mode can warm-start), loss
/// interpolation over all scenarios, and the quantile.
pub fn run_nested(
    inputs: &RunInputs,
    mode: EngineMode,
    config: &PipelineConfig,
) -> Result<RunArtifacts> {
    config.validate()?;
    let total_clock = Instant::now();
    let mut timings = StageTimings::default();
    let model = config.market_model();
    let master = config.run.master_seed;

    let clock = Instant::now();
    let scenarios: ScenarioSet<Scalar> =
        generate_scenarios(config.run.scenarios, &model, derive_seed(master, "scenarios"))?;
    timings.scenario_generation = clock.elapsed().as_secs_f64();

    // A zero-volatility market collapses every scenario onto one coefficient;
    // the loss distribution is then a point mass at the single knot.
    let clock = Instant::now();
    let knots = if scenarios.max() > scenarios.min() {
        build_sample_paths(&scenarios, config.run.knots)?
    } else {
        vec![scenarios.min()]
    };
    timings.knot_construction = clock.elapsed().as_secs_f64();

    let valuator = Valuator::new(model, inputs.mortality.clone(), config.valuation_config());
    let rate = config.market.risk_free_rate;

    let (evaluation, network, trace, fine_tune) = match mode {
        EngineMode::Mc => {
            let mut engine = McEngine::new(&valuator);
            let evaluation = evaluate_knots(&mut engine, &knots, &inputs.input, rate)?;
            (evaluation, None, None, None)
        }
        EngineMode::Nn => {
            let mut engine = NeuralEngine::new(
                &valuator,
                &inputs.representatives,
                &inputs.training,
                &inputs.validation,
                config.feature_ranges(),
                config.training_config(),
            );
            let evaluation = evaluate_knots(&mut engine, &knots, &inputs.input, rate)?;
            let tunings = engine.tunings().to_vec();
            let summary = FineTuneSummary {
                knots: tunings.len(),
                successes: tunings.iter().filter(|t| t.success).count(),
                retrains: tunings.iter().filter(|t| t.retrained).count(),
                per_knot: tunings,
            };
            let (params, trace) = engine
                .trained()
                .map(|(p, t)| (p.clone(), t.clone()))
                .expect("network trained during knot evaluation");
            (
                evaluation,
                Some((params, config.target_normalizer())),
                Some(trace),
                Some(summary),
            )
        }
    };
    timings.mvl0 = evaluation.mvl0_seconds;
    timings.knot_valuation = evaluation.knot_seconds;
    let paths = evaluation.paths;

    let clock = Instant::now();
    let distribution: DeltaDistribution<Scalar> = interpolate_deltas(&paths, &scenarios)?;
    timings.interpolation = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let scr = scr_quantile(&distribution)?;
    timings.quantile = clock.elapsed().as_secs_f64();
    timings.total = total_clock.elapsed().as_secs_f64();

    let mvl1_q995 = (scr + paths.mvl0) * (1.0 + rate);
    let knot_points = paths
        .knots
        .iter()
        .zip(paths.mvl1.iter().zip(&paths.deltas))
        .map(|(&c1, (&mvl1, &delta))| KnotPoint { c1, mvl1, delta })
        .collect();

    let report = ScrReport {
        mode,
        scr,
        mvl0: paths.mvl0,
        mvl1_q995,
        n_scenarios: scenarios.coefficients.len(),
        knots: knot_points,
        fine_tune,
        config: config.clone(),
        timings,
    };
    Ok(RunArtifacts {
        report,
        network,
        trace,
    })
}
