//! Softmax-kernel liability interpolator.
//!
//! A small set of representative contracts is valued by inner Monte Carlo;
//! every other contract's liability is estimated as a softmax-weighted
//! average of those known values, with weights driven by per-attribute,
//! per-direction feature differences. See [`network`] for the model,
//! [`training`] for the calibration loop and [`stopping`] for the detector
//! that ends the search phase.

pub mod features;
pub mod network;
pub mod stopping;
pub mod training;

pub use features::{extract_features, FeatureMatrix, FeatureRanges, FeatureVector, FEATURE_COUNT};
pub use network::{
    estimate_portfolio_liability, forward, forward_with_outputs, gradient, load_network, mse,
    save_network, softmax, NetworkParameters,
};
pub use stopping::{
    detect_stopping_event, moving_average, MseRecord, StoppingConfig, StoppingEvent, StoppingKind,
};
pub use training::{
    fine_tune, momentum_coeff, nag_step, train, FineTuneOutcome, TrainingConfig, TrainingData,
    TrainingTrace,
};

use crate::error::{Error, Result};
use crate::num::Real;

/// Relative distance `|(a - b) / b|` between an estimate and a reference.
pub fn relative_distance<F: Real>(estimate: F, reference: F) -> Result<F> {
    if reference == F::zero() {
        return Err(Error::Domain(
            "relative distance needs a non-zero reference".into(),
        ));
    }
    Ok(((estimate - reference) / reference).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_distance_basics() {
        assert_eq!(relative_distance(5.0, 5.0).unwrap(), 0.0);
        assert!((relative_distance(1.005f64, 1.0).unwrap() - 0.005).abs() < 1e-12);
        assert_eq!(relative_distance(0.0, 1.0).unwrap(), 1.0);
        assert!(matches!(
            relative_distance(1.0, 0.0),
            Err(Error::Domain(_))
        ));
    }
}
