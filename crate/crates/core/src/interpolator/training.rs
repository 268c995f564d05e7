//! Mini-batch training with Nesterov's accelerated gradient.
//!
//! The loop minimizes the batch MSE of the network on a small training
//! portfolio, with targets normalized by the guarantee-value range so the
//! gradient scale stays tame. Velocity and parameters update as
//!
//! ```text
//! v' = mu_t v - eps grad E(theta + mu_t v)
//! theta' = theta + v'
//! ```
//!
//! with the momentum coefficient ramping up on a fixed 50-iteration schedule,
//! capped at `mu_max`.
//!
//! Training and validation MSEs are recorded every `mse_eval_interval`
//! iterations and fed to the stopping detector. Once a stopping event fires,
//! a final phase keeps stepping until the network's mean validation estimate
//! is within `delta_initial` relative distance of the Monte Carlo mean, or
//! the iteration budget runs out. [`fine_tune`] reruns only that final phase
//! against a new market scenario's targets, which is how the pipeline reuses
//! a trained network across adjacent scenarios.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::portfolio::VaContract;

use super::features::{extract_features, FeatureMatrix, FeatureRanges};
use super::network::{forward, gradient_indexed, mse, NetworkParameters};
use super::stopping::{
    fitted_trend, latest_stopping_event, moving_average, MseRecord, StoppingConfig, StoppingEvent,
};

/// Iterations per momentum ramp step in the adaptive schedule.
const MOMENTUM_RAMP: usize = 50;

/// Momentum used by fine-tuning passes. Fine-tuning is the late stage of a
/// long run, so the schedule is mature rather than restarted at 0.5; the
/// value is capped below the search-phase ceiling because the velocity only
/// has a couple hundred iterations to stay controlled.
const FINE_TUNE_MOMENTUM: f64 = 0.9;

/// Training hyper-parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig<F> {
    pub learning_rate: F,
    pub batch_size: usize,
    /// Cap on the momentum coefficient.
    pub mu_max: F,
    /// Record MSEs every this many iterations.
    pub mse_eval_interval: usize,
    /// Moving-average window over recorded validation MSE.
    pub smoothing_window: usize,
    /// Degree of the trend polynomial.
    pub poly_degree: usize,
    /// Trend window of the stopping detector.
    pub trend_window: usize,
    /// Relative-distance threshold closing the initial training.
    pub delta_initial: F,
    /// Relative-distance threshold for scenario fine-tuning.
    pub delta_finetune: F,
    /// Iteration cap of one fine-tuning pass.
    pub max_finetune_iters: usize,
    /// Overall iteration cap of a full training run.
    pub max_total_iters: usize,
    /// Seed of the mini-batch selection stream.
    pub rng_seed: u64,
    /// Divisor applied to liabilities during training; the guarantee-value
    /// range of the product universe.
    pub target_normalizer: F,
    /// Training-MSE drop factor of the stopping detector.
    pub drop_factor: F,
    /// Mini-batches are drawn with replacement by default.
    pub sample_with_replacement: bool,
    /// When a full training run ends without meeting the distance criterion,
    /// the pipeline rebuilds a fresh network with a re-derived batch stream
    /// and keeps the best-anchored attempt, up to this many tries.
    pub max_training_attempts: usize,
}

impl<F: Real> TrainingConfig<F> {
    /// Reference settings: learning rate 20, batch 20, `mu_max` 0.99,
    /// evaluation every 50 iterations, smoothing window 10, degree-6 trend
    /// with window 4, closing thresholds 0.5% (initial) and 1% (fine-tune),
    /// 200 fine-tune iterations, batch seed 0.
    pub fn standard(target_normalizer: F) -> Self {
        TrainingConfig {
            learning_rate: F::of(20.0),
            batch_size: 20,
            mu_max: F::of(0.99),
            mse_eval_interval: 50,
            smoothing_window: 10,
            poly_degree: 6,
            trend_window: 4,
            delta_initial: F::of(0.005),
            delta_finetune: F::of(0.01),
            max_finetune_iters: 200,
            max_total_iters: 20_000,
            rng_seed: 0,
            target_normalizer,
            drop_factor: F::of(10.0),
            sample_with_replacement: true,
            max_training_attempts: 3,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate <= F::zero() {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.batch_size == 0 || self.mse_eval_interval == 0 {
            return Err(Error::Config(
                "batch size and evaluation interval must be at least 1".into(),
            ));
        }
        if !(self.mu_max >= F::zero() && self.mu_max <= F::one()) {
            return Err(Error::Config("mu_max must lie in [0, 1]".into()));
        }
        if self.smoothing_window == 0 || self.trend_window == 0 {
            return Err(Error::Config("detector windows must be at least 1".into()));
        }
        if !self.target_normalizer.is_finite() || self.target_normalizer <= F::zero() {
            return Err(Error::Config("target normalizer must be positive".into()));
        }
        Ok(())
    }

    fn stopping(&self) -> StoppingConfig<F> {
        StoppingConfig {
            smoothing_window: self.smoothing_window,
            poly_degree: self.poly_degree,
            trend_window: self.trend_window,
            drop_factor: self.drop_factor,
        }
    }
}

/// Adaptive momentum coefficient: `min(1 - 1/(2 (floor(t/50) + 1)), mu_max)`,
/// which is `1 - 2^(-1 - log2(floor(t/50) + 1))` written without the
/// logarithm. Starts at 0.5 and ramps toward the cap.
pub fn momentum_coeff<F: Real>(t: usize, mu_max: F) -> F {
    let step = t / MOMENTUM_RAMP + 1;
    (F::one() - F::of(0.5) / F::of(step as f64)).min(mu_max)
}

/// One Nesterov step: evaluates the supplied gradient at the look-ahead point
/// `theta + mu v`, folds it into the velocity and applies the velocity to the
/// parameters. Fails if the gradient is not finite.
pub fn nag_step<F: Real>(
    params: &mut NetworkParameters<F>,
    velocity: &mut NetworkParameters<F>,
    gradient_at: impl FnOnce(&NetworkParameters<F>) -> NetworkParameters<F>,
    learning_rate: F,
    momentum: F,
) -> Result<()> {
    let mut lookahead = params.clone();
    lookahead.scaled_add(momentum, velocity);
    let grad = gradient_at(&lookahead);
    if !grad.all_finite() {
        return Err(Error::Training("gradient is not finite".into()));
    }
    velocity.scale(momentum);
    velocity.scaled_add(-learning_rate, &grad);
    params.scaled_add(F::one(), velocity);
    Ok(())
}

/// Portfolios and Monte Carlo targets a training run works against. Targets
/// are raw currency; normalization happens inside.
#[derive(Debug, Clone, Copy)]
pub struct TrainingData<'a, F> {
    pub representatives: &'a [VaContract<F>],
    pub rep_targets: &'a [F],
    pub training: &'a [VaContract<F>],
    pub training_targets: &'a [F],
    pub validation: &'a [VaContract<F>],
    pub validation_targets: &'a [F],
}

impl<F: Real> TrainingData<'_, F> {
    fn validate(&self) -> Result<()> {
        if self.representatives.is_empty() || self.training.is_empty() || self.validation.is_empty()
        {
            return Err(Error::Config(
                "representative, training and validation portfolios must be non-empty".into(),
            ));
        }
        if self.rep_targets.len() != self.representatives.len()
            || self.training_targets.len() != self.training.len()
            || self.validation_targets.len() != self.validation.len()
        {
            return Err(Error::Config("target lengths do not match portfolios".into()));
        }
        Ok(())
    }
}

/// Everything recorded while training, kept at the normalized target scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace<F> {
    pub records: Vec<MseRecord<F>>,
    /// Moving average of the recorded validation MSE; same length as `records`.
    pub smoothed_validation: Vec<F>,
    /// Final polynomial trend values at the record indices.
    pub trend: Vec<F>,
    pub stopping_event: Option<StoppingEvent>,
    pub total_iterations: usize,
    /// Whether the closing relative-distance criterion was met.
    pub distance_converged: bool,
    /// Validation distance of the returned parameters.
    pub final_distance: F,
}

/// Outcome of one fine-tuning pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FineTuneOutcome {
    pub success: bool,
    pub iterations: usize,
}

struct Prepared<F> {
    rep_values: Vec<F>,
    train_features: Vec<FeatureMatrix<F>>,
    train_targets: Vec<F>,
    val_features: Vec<FeatureMatrix<F>>,
    val_targets: Vec<F>,
    val_target_sum: F,
}

fn prepare<F: Real>(
    data: &TrainingData<'_, F>,
    ranges: &FeatureRanges<F>,
    cfg: &TrainingConfig<F>,
) -> Result<Prepared<F>> {
    cfg.validate()?;
    data.validate()?;
    let norm = cfg.target_normalizer;
    let scale = |targets: &[F]| -> Vec<F> { targets.iter().map(|&y| y / norm).collect() };
    let features = |contracts: &[VaContract<F>]| -> Result<Vec<FeatureMatrix<F>>> {
        contracts
            .iter()
            .map(|z| extract_features(z, data.representatives, ranges))
            .collect()
    };
    let val_targets = scale(data.validation_targets);
    let val_target_sum = val_targets.iter().copied().sum();
    Ok(Prepared {
        rep_values: scale(data.rep_targets),
        train_features: features(data.training)?,
        train_targets: scale(data.training_targets),
        val_features: features(data.validation)?,
        val_targets,
        val_target_sum,
    })
}

/// Relative distance of the network's summed validation estimate from the
/// Monte Carlo sum. Equals the distance of the means. A zero reference with a
/// non-zero estimate counts as infinitely far.
fn validation_distance<F: Real>(params: &NetworkParameters<F>, prepared: &Prepared<F>) -> F {
    let estimate: F = prepared
        .val_features
        .iter()
        .map(|f| forward(params, f, &prepared.rep_values))
        .sum();
    let reference = prepared.val_target_sum;
    if reference == F::zero() {
        if estimate == F::zero() {
            F::zero()
        } else {
            F::infinity()
        }
    } else {
        ((estimate - reference) / reference).abs()
    }
}

fn draw_batch<F: Real>(
    rng: &mut ChaCha8Rng,
    pool: usize,
    cfg: &TrainingConfig<F>,
    scratch: &mut Vec<usize>,
) {
    scratch.clear();
    if cfg.sample_with_replacement {
        scratch.extend((0..cfg.batch_size).map(|_| rng.random_range(0..pool)));
    } else {
        let take = cfg.batch_size.min(pool);
        let mut indices: Vec<usize> = (0..pool).collect();
        for i in 0..take {
            let j = rng.random_range(i..pool);
            indices.swap(i, j);
        }
        scratch.extend_from_slice(&indices[..take]);
    }
}

/// Trains a zero-initialized network.
///
/// The search phase runs mini-batch NAG until the stopping detector fires;
/// the final phase keeps stepping until the validation estimate is within
/// `delta_initial` of the Monte Carlo reference, for at most
/// `max_finetune_iters` further iterations. When the threshold stays out of
/// reach, the parameters with the smallest validation distance seen in the
/// final phase are returned. Everything respects `max_total_iters` and is
/// deterministic given the config seed.
pub fn train<F: Real>(
    data: &TrainingData<'_, F>,
    ranges: &FeatureRanges<F>,
    cfg: &TrainingConfig<F>,
) -> Result<(NetworkParameters<F>, TrainingTrace<F>)> {
    let prepared = prepare(data, ranges, cfg)?;
    let mut params = NetworkParameters::zeros(data.representatives.len());
    let mut velocity = NetworkParameters::zeros(data.representatives.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let stopping_cfg = cfg.stopping();

    let mut records: Vec<MseRecord<F>> = Vec::new();
    let mut stopping: Option<StoppingEvent> = None;
    let mut batch = Vec::with_capacity(cfg.batch_size);
    let mut best_anchored: (F, Option<NetworkParameters<F>>) = (F::infinity(), None);
    let mut t = 0usize;
    loop {
        if t.is_multiple_of(cfg.mse_eval_interval) {
            records.push(MseRecord {
                iteration: t,
                training_mse: mse(
                    &params,
                    &prepared.train_features,
                    &prepared.train_targets,
                    &prepared.rep_values,
                ),
                validation_mse: mse(
                    &params,
                    &prepared.val_features,
                    &prepared.val_targets,
                    &prepared.rep_values,
                ),
            });
            if stopping.is_none() {
                stopping = latest_stopping_event(&records, &stopping_cfg);
            }
        }
        // Final phase: at most max_finetune_iters past the event, tracking
        // the closest anchored parameters in case the threshold is never hit.
        // The stopping event marks the generalization optimum; unbounded
        // anchor-chasing past it overfits the validation sum.
        if let Some(event) = stopping {
            let distance = validation_distance(&params, &prepared);
            if distance < best_anchored.0 {
                best_anchored = (distance, Some(params.clone()));
            }
            if distance <= cfg.delta_initial {
                break;
            }
            if t >= event.iteration + cfg.max_finetune_iters {
                break;
            }
        }
        if t >= cfg.max_total_iters {
            break;
        }
        draw_batch(&mut rng, prepared.train_features.len(), cfg, &mut batch);
        let mu = momentum_coeff(t, cfg.mu_max);
        nag_step(
            &mut params,
            &mut velocity,
            |p| {
                gradient_indexed(
                    p,
                    &prepared.train_features,
                    &prepared.train_targets,
                    &batch,
                    &prepared.rep_values,
                )
            },
            cfg.learning_rate,
            mu,
        )?;
        t += 1;
    }

    if let (best, Some(best_params)) = best_anchored {
        if best < validation_distance(&params, &prepared) {
            params = best_params;
        }
    }

    let raw_validation: Vec<F> = records.iter().map(|r| r.validation_mse).collect();
    let smoothed_validation = moving_average(&raw_validation, cfg.smoothing_window);
    let trend = fitted_trend(&smoothed_validation, cfg.poly_degree);
    let final_distance = validation_distance(&params, &prepared);
    let trace = TrainingTrace {
        records,
        smoothed_validation,
        trend,
        stopping_event: stopping,
        total_iterations: t,
        distance_converged: final_distance <= cfg.delta_initial,
        final_distance,
    };
    Ok((params, trace))
}

/// Reruns the final training phase against a new scenario's targets: at most
/// `max_finetune_iters` NAG steps until the validation estimate is within
/// `delta_finetune` of the Monte Carlo reference. Failure is a flagged
/// outcome, not an error; the caller falls back to a full re-train.
pub fn fine_tune<F: Real>(
    params: &mut NetworkParameters<F>,
    data: &TrainingData<'_, F>,
    ranges: &FeatureRanges<F>,
    cfg: &TrainingConfig<F>,
) -> Result<FineTuneOutcome> {
    if params.n_representatives() != data.representatives.len() {
        return Err(Error::Config(
            "parameter count does not match the representative portfolio".into(),
        ));
    }
    let prepared = prepare(data, ranges, cfg)?;
    let mut velocity = NetworkParameters::zeros(params.n_representatives());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut batch = Vec::with_capacity(cfg.batch_size);
    let mu = F::of(FINE_TUNE_MOMENTUM).min(cfg.mu_max);
    for it in 0..=cfg.max_finetune_iters {
        if validation_distance(params, &prepared) <= cfg.delta_finetune {
            return Ok(FineTuneOutcome {
                success: true,
                iterations: it,
            });
        }
        if it == cfg.max_finetune_iters {
            break;
        }
        draw_batch(&mut rng, prepared.train_features.len(), cfg, &mut batch);
        nag_step(
            params,
            &mut velocity,
            |p| {
                gradient_indexed(
                    p,
                    &prepared.train_features,
                    &prepared.train_targets,
                    &batch,
                    &prepared.rep_values,
                )
            },
            cfg.learning_rate,
            mu,
        )?;
    }
    Ok(FineTuneOutcome {
        success: false,
        iterations: cfg.max_finetune_iters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::portfolio::{sample_representatives, SamplingGrid};
    use crate::valuation::mortality::MortalityTable;
    use crate::valuation::{value_portfolio_each, MarketModel, ValuationConfig};

    #[test]
    fn momentum_schedule_matches_hand_computed_values() {
        assert_eq!(momentum_coeff(0, 0.99), 0.5);
        assert_eq!(momentum_coeff(49, 0.99), 0.5);
        assert_eq!(momentum_coeff(50, 0.99), 0.75);
        assert_eq!(momentum_coeff(99, 0.99), 0.75);
        assert_eq!(momentum_coeff(100, 0.99), 1.0 - 1.0 / 6.0);
        assert_eq!(momentum_coeff(1_000_000, 0.99), 0.99);
    }

    #[test]
    fn momentum_schedule_is_non_decreasing_and_capped() {
        let mut last = 0.0f64;
        for t in (0..20_000).step_by(7) {
            let mu = momentum_coeff(t, 0.95);
            assert!(mu >= last && mu <= 0.95);
            last = mu;
        }
    }

    #[test]
    fn zero_gradient_gives_a_pure_momentum_step() {
        let mut params = NetworkParameters::<f64>::zeros(2);
        *params.bias_mut(0) = 1.0;
        let mut velocity = NetworkParameters::zeros(2);
        *velocity.bias_mut(0) = 0.4;
        nag_step(&mut params, &mut velocity, |_| NetworkParameters::zeros(2), 0.1, 0.5).unwrap();
        assert_eq!(params.bias(0), 1.2);
        assert_eq!(velocity.bias(0), 0.2);
    }

    #[test]
    fn zero_velocity_zero_momentum_is_plain_gradient_descent() {
        let mut params = NetworkParameters::<f64>::zeros(1);
        *params.bias_mut(0) = 2.0;
        let mut velocity = NetworkParameters::zeros(1);
        nag_step(
            &mut params,
            &mut velocity,
            |p| {
                let mut g = NetworkParameters::zeros(1);
                *g.bias_mut(0) = p.bias(0);
                g
            },
            0.25,
            0.0,
        )
        .unwrap();
        assert_eq!(params.bias(0), 2.0 - 0.25 * 2.0);
    }

    #[test]
    fn two_steps_on_a_quadratic_match_a_scripted_oracle() {
        // E(b0, b1) = (b0^2 + 3 b1^2) / 2, gradient (b0, 3 b1), evaluated at
        // the look-ahead point. Hand-stepped with lr 0.1 and mu 0.5.
        let grad = |p: &NetworkParameters<f64>| {
            let mut g = NetworkParameters::zeros(2);
            *g.bias_mut(0) = p.bias(0);
            *g.bias_mut(1) = 3.0 * p.bias(1);
            g
        };
        let mut params = NetworkParameters::zeros(2);
        *params.bias_mut(0) = 1.0;
        *params.bias_mut(1) = 2.0;
        let mut velocity = NetworkParameters::zeros(2);

        nag_step(&mut params, &mut velocity, grad, 0.1, 0.5).unwrap();
        assert!((params.bias(0) - 0.9).abs() < 1e-15);
        assert!((params.bias(1) - 1.4).abs() < 1e-15);

        nag_step(&mut params, &mut velocity, grad, 0.1, 0.5).unwrap();
        assert!((params.bias(0) - 0.765).abs() < 1e-15);
        assert!((params.bias(1) - 0.77).abs() < 1e-15);
    }

    #[test]
    fn non_finite_gradient_is_a_training_error() {
        let mut params = NetworkParameters::<f64>::zeros(1);
        let mut velocity = NetworkParameters::zeros(1);
        let err = nag_step(
            &mut params,
            &mut velocity,
            |_| {
                let mut g = NetworkParameters::zeros(1);
                *g.bias_mut(0) = f64::INFINITY;
                g
            },
            0.1,
            0.5,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Training(_)));
    }

    /// Small but real training setup: representatives from the sampling grid,
    /// Monte Carlo targets, training portfolio equal to the representatives.
    fn tiny_setup() -> (Vec<crate::portfolio::VaContract<f64>>, Vec<f64>) {
        let reps = sample_representatives(&SamplingGrid::<f64>::representative(), 8, 3).unwrap();
        let table = MortalityTable::synthetic();
        let model = MarketModel::standard();
        let cfg = ValuationConfig::new(200, 5);
        let targets: Vec<f64> = value_portfolio_each(&reps, &model, &table, &cfg, None)
            .unwrap()
            .iter()
            .map(|e| e.mean)
            .collect();
        (reps, targets)
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let (reps, targets) = tiny_setup();
        let data = TrainingData {
            representatives: &reps,
            rep_targets: &targets,
            training: &reps,
            training_targets: &targets,
            validation: &reps,
            validation_targets: &targets,
        };
        let mut cfg = TrainingConfig::standard(5.95e5);
        cfg.max_total_iters = 800;
        let ranges = FeatureRanges::standard();
        let (a, trace_a) = train(&data, &ranges, &cfg).unwrap();
        let (b, trace_b) = train(&data, &ranges, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(trace_a.records, trace_b.records);
    }

    #[test]
    fn single_representative_network_is_exact_from_the_start() {
        let (reps, targets) = tiny_setup();
        let reps = &reps[..1];
        let targets = &targets[..1];
        let data = TrainingData {
            representatives: reps,
            rep_targets: targets,
            training: reps,
            training_targets: targets,
            validation: reps,
            validation_targets: targets,
        };
        let mut cfg = TrainingConfig::standard(5.95e5);
        cfg.max_total_iters = 100;
        let (params, trace) = train(&data, &FeatureRanges::standard(), &cfg).unwrap();
        assert!(trace.records[0].training_mse.abs() < 1e-20);
        assert!(trace.distance_converged);
        assert_eq!(params.n_representatives(), 1);
    }

    #[test]
    fn fine_tuning_an_already_converged_network_takes_no_iterations() {
        let (reps, targets) = tiny_setup();
        let data = TrainingData {
            representatives: &reps,
            rep_targets: &targets,
            training: &reps,
            training_targets: &targets,
            validation: &reps,
            validation_targets: &targets,
        };
        let mut cfg = TrainingConfig::standard(5.95e5);
        cfg.max_total_iters = 12_000;
        // Generous final-phase budget: exact targets make the distance
        // criterion reachable, it just takes a while on this tiny instance.
        cfg.max_finetune_iters = 12_000;
        let ranges = FeatureRanges::standard();
        let (mut params, trace) = train(&data, &ranges, &cfg).unwrap();
        assert!(trace.distance_converged);

        let outcome = fine_tune(&mut params, &data, &ranges, &cfg).unwrap();
        assert!(outcome.success);
        assert_eq!(outcome.iterations, 0);
    }

    #[test]
    fn infinite_threshold_makes_fine_tuning_vacuous() {
        let (reps, targets) = tiny_setup();
        let data = TrainingData {
            representatives: &reps,
            rep_targets: &targets,
            training: &reps,
            training_targets: &targets,
            validation: &reps,
            validation_targets: &targets,
        };
        let mut cfg = TrainingConfig::standard(5.95e5);
        cfg.delta_finetune = f64::INFINITY;
        let mut params = NetworkParameters::zeros(reps.len());
        let outcome = fine_tune(&mut params, &data, &FeatureRanges::standard(), &cfg).unwrap();
        assert!(outcome.success);
        assert_eq!(outcome.iterations, 0);
    }

    #[test]
    fn unreachable_threshold_flags_failure_without_erroring() {
        let (reps, mut targets) = tiny_setup();
        // Validation targets wildly inconsistent with the representatives.
        let val_targets: Vec<f64> = targets.iter().map(|_| 1e9).collect();
        targets.iter_mut().for_each(|t| *t *= 1.0);
        let data = TrainingData {
            representatives: &reps,
            rep_targets: &targets,
            training: &reps,
            training_targets: &targets,
            validation: &reps,
            validation_targets: &val_targets,
        };
        let mut cfg = TrainingConfig::standard(5.95e5);
        cfg.max_finetune_iters = 5;
        cfg.delta_finetune = 1e-12;
        let mut params = NetworkParameters::zeros(reps.len());
        let outcome = fine_tune(&mut params, &data, &FeatureRanges::standard(), &cfg).unwrap();
        assert!(!outcome.success);
        assert_eq!(outcome.iterations, 5);
    }
}
