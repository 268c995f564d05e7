//! Outer nested-simulation machinery.
//!
//! One-year market realizations are log-normal growth coefficients
//! `C1 = exp((mu - sigma^2/2) + sigma Z)`. The one-year loss under the simple
//! money-market asset pool is
//!
//! ```text
//! delta = -MVL_0 + MVL_1(C1) / (1 + r)
//! ```
//!
//! Evaluating `MVL_1` for every scenario is the expensive part, so the
//! scenario range is covered by equally spaced knots, `delta` is computed
//! exactly at the knots by a liability engine (Monte Carlo or the trained
//! network) and interpolated piecewise-linearly for the full scenario set.
//! The solvency capital is the empirical 99.5% quantile: the 1-based order
//! statistic `floor(N * 0.995 + 0.5)` of the sorted losses.

pub mod engine;
pub mod pipeline;

pub use engine::{KnotTuning, LiabilityEngine, McEngine, NeuralEngine};
pub use pipeline::{
    build_inputs, load_mortality, run_nested, EngineMode, FineTuneSummary, KnotPoint,
    PipelineConfig, RunArtifacts, RunInputs, ScrReport, StageTimings,
};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::portfolio::VaContract;
use crate::valuation::MarketModel;

/// One-year market coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet<F> {
    pub coefficients: Vec<F>,
    pub rng_seed: u64,
}

impl<F: Real> ScenarioSet<F> {
    pub fn min(&self) -> F {
        self.coefficients.iter().copied().fold(F::infinity(), F::min)
    }

    pub fn max(&self) -> F {
        self.coefficients
            .iter()
            .copied()
            .fold(F::neg_infinity(), F::max)
    }
}

/// Draws `n` growth coefficients under the real-world measure:
/// `C1 = exp((drift - sigma^2/2) + sigma Z)` with independent standard
/// normals. Deterministic given the seed.
pub fn generate_scenarios<F: Real>(
    n: usize,
    model: &MarketModel<F>,
    seed: u64,
) -> Result<ScenarioSet<F>> {
    if n < 2 {
        return Err(Error::Config("scenario count must be at least 2".into()));
    }
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let drift = model.drift - model.volatility * model.volatility / F::of(2.0);
    let coefficients = (0..n)
        .map(|_| (drift + model.volatility * F::standard_normal(&mut rng)).exp())
        .collect();
    Ok(ScenarioSet {
        coefficients,
        rng_seed: seed,
    })
}

/// Knot coefficients with their exact losses and liabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePathSet<F> {
    /// Strictly increasing knot coefficients spanning the scenario range.
    pub knots: Vec<F>,
    /// One-year portfolio liability at each knot.
    pub mvl1: Vec<F>,
    /// Loss at each knot.
    pub deltas: Vec<F>,
    /// Time-0 portfolio liability, computed once.
    pub mvl0: F,
}

impl<F: Real> SamplePathSet<F> {
    /// Assembles losses from liabilities: `delta = -mvl0 + mvl1 / (1 + r)`.
    pub fn from_liabilities(knots: Vec<F>, mvl0: F, mvl1: Vec<F>, rate: F) -> Self {
        let discount = F::one() + rate;
        let deltas = mvl1.iter().map(|&v| -mvl0 + v / discount).collect();
        SamplePathSet {
            knots,
            mvl1,
            deltas,
            mvl0,
        }
    }
}

/// `n_knots` equally spaced points from the scenario minimum to the maximum,
/// both included. Rejects a degenerate (zero-width) scenario range.
pub fn build_sample_paths<F: Real>(scenarios: &ScenarioSet<F>, n_knots: usize) -> Result<Vec<F>> {
    if n_knots < 2 {
        return Err(Error::Config("need at least 2 knots".into()));
    }
    let (lo, hi) = (scenarios.min(), scenarios.max());
    if hi <= lo || !hi.is_finite() || !lo.is_finite() {
        return Err(Error::Config(
            "scenario range is degenerate; all coefficients are equal".into(),
        ));
    }
    let step = (hi - lo) / F::of((n_knots - 1) as f64);
    let mut knots: Vec<F> = (0..n_knots)
        .map(|i| lo + step * F::of(i as f64))
        .collect();
    // Pin the endpoints so interpolation covers the full range exactly.
    knots[0] = lo;
    knots[n_knots - 1] = hi;
    Ok(knots)
}

/// Evaluates the loss at every knot through the given liability engine:
/// `MVL_0` once, then `MVL_1` per knot in ascending order (the order matters
/// for engines that warm-start from the previous knot).
pub fn compute_delta_at_knots<F: Real, E: LiabilityEngine<F> + ?Sized>(
    knots: &[F],
    portfolio: &[VaContract<F>],
    engine: &mut E,
    rate: F,
) -> Result<SamplePathSet<F>> {
    let mvl0 = engine.portfolio_mvl0(portfolio)?;
    let mut mvl1 = Vec::with_capacity(knots.len());
    for &c1 in knots {
        mvl1.push(engine.portfolio_mvl1(portfolio, c1)?);
    }
    Ok(SamplePathSet::from_liabilities(
        knots.to_vec(),
        mvl0,
        mvl1,
        rate,
    ))
}

/// Empirical loss distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaDistribution<F> {
    /// Losses in scenario order.
    pub deltas: Vec<F>,
    /// The same losses sorted ascending.
    pub sorted: Vec<F>,
}

impl<F: Real> DeltaDistribution<F> {
    pub fn new(deltas: Vec<F>) -> Self {
        let mut sorted = deltas.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("loss values must be comparable"));
        DeltaDistribution { deltas, sorted }
    }
}

/// Linearly interpolates the knot losses at every scenario coefficient.
/// Exact at the knots; scenarios outside the knot range are a domain error
/// (impossible when the knots were built from the same scenario set).
pub fn interpolate_deltas<F: Real>(
    paths: &SamplePathSet<F>,
    scenarios: &ScenarioSet<F>,
) -> Result<DeltaDistribution<F>> {
    let knots = &paths.knots;
    let deltas = &paths.deltas;
    if knots.is_empty() || knots.len() != deltas.len() {
        return Err(Error::Config("knots and losses must align".into()));
    }
    let first = knots[0];
    let last = knots[knots.len() - 1];
    let values = scenarios
        .coefficients
        .iter()
        .map(|&c| {
            if c < first || c > last {
                return Err(Error::Domain(format!(
                    "scenario {c} outside the knot range [{first}, {last}]"
                )));
            }
            if knots.len() == 1 {
                return Ok(deltas[0]);
            }
            let j = match knots.partition_point(|&k| k <= c) {
                0 => 0,
                p => (p - 1).min(knots.len() - 2),
            };
            let (x0, x1) = (knots[j], knots[j + 1]);
            if c == x0 {
                return Ok(deltas[j]);
            }
            if c == x1 {
                return Ok(deltas[j + 1]);
            }
            let w = (c - x0) / (x1 - x0);
            Ok(deltas[j] + w * (deltas[j + 1] - deltas[j]))
        })
        .collect::<Result<Vec<F>>>()?;
    Ok(DeltaDistribution::new(values))
}

/// The 99.5% empirical quantile: 1-based order statistic
/// `floor(N * 0.995 + 0.5)` of the ascending losses.
pub fn scr_quantile<F: Real>(dist: &DeltaDistribution<F>) -> Result<F> {
    let n = dist.sorted.len();
    if n == 0 {
        return Err(Error::Domain("empty loss distribution".into()));
    }
    let index = (n as f64 * 0.995 + 0.5).floor() as usize;
    Ok(dist.sorted[index - 1])
}

/// Signed relative error `(estimate - reference) / |reference|`.
pub fn relative_error<F: Real>(estimate: F, reference: F) -> Result<F> {
    if reference == F::zero() {
        return Err(Error::Domain(
            "relative error needs a non-zero reference".into(),
        ));
    }
    Ok((estimate - reference) / reference.abs())
}
