//! Liability engines behind the knot evaluation.
//!
//! [`McEngine`] revalues the full portfolio by inner Monte Carlo at every
//! knot. [`NeuralEngine`] only Monte Carlo-values the representative,
//! training and validation portfolios, trains the softmax network on the
//! time-0 liabilities, and from knot to knot fine-tunes the previous
//! parameters against the new scenario's targets, falling back to a full
//! re-train when fine-tuning cannot reach the threshold. Knots must therefore
//! be visited in ascending coefficient order: adjacent markets have adjacent
//! optima, which is what makes the warm start work.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::interpolator::{
    estimate_portfolio_liability, fine_tune, train, FeatureRanges, NetworkParameters,
    TrainingConfig, TrainingData, TrainingTrace,
};
use crate::num::Real;
use crate::portfolio::VaContract;
use crate::valuation::Valuator;

/// Anything that can produce portfolio liabilities at time 0 and one year
/// ahead. Engines may carry state between calls (warm starts, audit logs).
pub trait LiabilityEngine<F: Real> {
    fn portfolio_mvl0(&mut self, portfolio: &[VaContract<F>]) -> Result<F>;
    fn portfolio_mvl1(&mut self, portfolio: &[VaContract<F>], c1: F) -> Result<F>;
}

/// Full training with the configured number of attempts: when a run ends
/// without meeting the distance criterion, a fresh network is trained on a
/// re-derived batch stream and the attempt with the smallest validation
/// distance wins. One attempt suffices when the criterion is reachable.
fn train_with_retries<F: Real>(
    data: &TrainingData<'_, F>,
    ranges: &FeatureRanges<F>,
    cfg: &TrainingConfig<F>,
) -> Result<(NetworkParameters<F>, TrainingTrace<F>)> {
    let attempts = cfg.max_training_attempts.max(1);
    let mut best: Option<(NetworkParameters<F>, TrainingTrace<F>)> = None;
    for attempt in 0..attempts {
        let mut attempt_cfg = cfg.clone();
        if attempt > 0 {
            attempt_cfg.rng_seed =
                crate::util::derive_seed(cfg.rng_seed, &format!("training.attempt.{attempt}"));
        }
        let (params, trace) = train(data, ranges, &attempt_cfg)?;
        let converged = trace.distance_converged;
        let better = best
            .as_ref()
            .is_none_or(|(_, t)| trace.final_distance < t.final_distance);
        if better {
            best = Some((params, trace));
        }
        if converged {
            break;
        }
    }
    Ok(best.expect("at least one attempt runs"))
}

/// Full nested Monte Carlo: every contract of the portfolio is revalued at
/// every knot.
pub struct McEngine<'a, F: Real> {
    valuator: &'a Valuator<F>,
}

impl<'a, F: Real> McEngine<'a, F> {
    pub fn new(valuator: &'a Valuator<F>) -> Self {
        McEngine { valuator }
    }
}

impl<F: Real> LiabilityEngine<F> for McEngine<'_, F> {
    fn portfolio_mvl0(&mut self, portfolio: &[VaContract<F>]) -> Result<F> {
        self.valuator.value_portfolio(portfolio, None)
    }

    fn portfolio_mvl1(&mut self, portfolio: &[VaContract<F>], c1: F) -> Result<F> {
        self.valuator.value_portfolio(portfolio, Some(c1))
    }
}

/// Fine-tuning record for one knot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnotTuning {
    pub c1: f64,
    pub success: bool,
    pub iterations: usize,
    /// Whether a full re-train was needed after a failed fine-tune.
    pub retrained: bool,
}

struct TrainedState<F> {
    /// Parameters trained on time-0 liabilities; the base of the warm-start
    /// chain and the estimator for `MVL_0`.
    time0_params: NetworkParameters<F>,
    time0_rep_values: Vec<F>,
    /// Parameters after the most recent knot.
    current_params: NetworkParameters<F>,
    trace: TrainingTrace<F>,
}

/// Softmax-network engine: inner Monte Carlo only on the small portfolios.
pub struct NeuralEngine<'a, F: Real> {
    valuator: &'a Valuator<F>,
    representatives: &'a [VaContract<F>],
    training: &'a [VaContract<F>],
    validation: &'a [VaContract<F>],
    ranges: FeatureRanges<F>,
    cfg: TrainingConfig<F>,
    state: Option<TrainedState<F>>,
    tunings: Vec<KnotTuning>,
}

impl<'a, F: Real> NeuralEngine<'a, F> {
    pub fn new(
        valuator: &'a Valuator<F>,
        representatives: &'a [VaContract<F>],
        training: &'a [VaContract<F>],
        validation: &'a [VaContract<F>],
        ranges: FeatureRanges<F>,
        cfg: TrainingConfig<F>,
    ) -> Self {
        NeuralEngine {
            valuator,
            representatives,
            training,
            validation,
            ranges,
            cfg,
            state: None,
            tunings: Vec::new(),
        }
    }

    /// Normalized targets of all three small portfolios under a scenario
    /// (`None` = time 0), via inner Monte Carlo.
    fn targets(&self, scenario: Option<F>) -> Result<(Vec<F>, Vec<F>, Vec<F>)> {
        let means = |contracts: &[VaContract<F>]| -> Result<Vec<F>> {
            Ok(self
                .valuator
                .value_each(contracts, scenario)?
                .iter()
                .map(|e| e.mean)
                .collect())
        };
        Ok((
            means(self.representatives)?,
            means(self.training)?,
            means(self.validation)?,
        ))
    }

    fn ensure_trained(&mut self) -> Result<()> {
        if self.state.is_some() {
            return Ok(());
        }
        let (rep_targets, training_targets, validation_targets) = self.targets(None)?;
        let data = TrainingData {
            representatives: self.representatives,
            rep_targets: &rep_targets,
            training: self.training,
            training_targets: &training_targets,
            validation: self.validation,
            validation_targets: &validation_targets,
        };
        let (params, trace) = train_with_retries(&data, &self.ranges, &self.cfg)?;
        let norm = self.cfg.target_normalizer;
        self.state = Some(TrainedState {
            time0_params: params.clone(),
            time0_rep_values: rep_targets.iter().map(|&y| y / norm).collect(),
            current_params: params,
            trace,
        });
        Ok(())
    }

    /// Fine-tune log, one entry per knot visited.
    pub fn tunings(&self) -> &[KnotTuning] {
        &self.tunings
    }

    /// Trained time-0 parameters and trace, once `portfolio_mvl0` or a knot
    /// evaluation has run.
    pub fn trained(&self) -> Option<(&NetworkParameters<F>, &TrainingTrace<F>)> {
        self.state
            .as_ref()
            .map(|s| (&s.time0_params, &s.trace))
    }
}

impl<F: Real> LiabilityEngine<F> for NeuralEngine<'_, F> {
    fn portfolio_mvl0(&mut self, portfolio: &[VaContract<F>]) -> Result<F> {
        self.ensure_trained()?;
        let state = self.state.as_ref().expect("trained above");
        estimate_portfolio_liability(
            &state.time0_params,
            portfolio,
            self.representatives,
            &state.time0_rep_values,
            &self.ranges,
            self.cfg.target_normalizer,
        )
    }

    fn portfolio_mvl1(&mut self, portfolio: &[VaContract<F>], c1: F) -> Result<F> {
        self.ensure_trained()?;
        let (rep_targets, training_targets, validation_targets) = self.targets(Some(c1))?;
        let data = TrainingData {
            representatives: self.representatives,
            rep_targets: &rep_targets,
            training: self.training,
            training_targets: &training_targets,
            validation: self.validation,
            validation_targets: &validation_targets,
        };

        let state = self.state.as_mut().expect("trained above");
        let mut params = state.current_params.clone();
        let outcome = fine_tune(&mut params, &data, &self.ranges, &self.cfg)?;
        let mut retrained = false;
        if !outcome.success {
            // The optimum moved too far for a short refinement; rebuild from
            // scratch on this scenario's targets and continue the chain from
            // the fresh network.
            let (fresh, _) = train(&data, &self.ranges, &self.cfg)?;
            params = fresh;
            retrained = true;
        }
        state.current_params = params;
        self.tunings.push(KnotTuning {
            c1: c1.to_f64_lossy(),
            success: outcome.success,
            iterations: outcome.iterations,
            retrained,
        });

        let norm = self.cfg.target_normalizer;
        let rep_values: Vec<F> = rep_targets.iter().map(|&y| y / norm).collect();
        estimate_portfolio_liability(
            &state.current_params,
            portfolio,
            self.representatives,
            &rep_values,
            &self.ranges,
            norm,
        )
    }
}
