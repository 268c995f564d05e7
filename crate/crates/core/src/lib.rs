//! Solvency capital engine for variable annuity portfolios.
//!
//! The crate computes the 99.5% one-year value-at-risk of the loss
//! `delta = -MVL_0 + MVL_1 / (1 + r)` for a portfolio of guaranteed annuity
//! contracts, via nested simulation: outer one-year market scenarios, inner
//! Monte Carlo liability valuation. The expensive inner valuation of the full
//! portfolio can be replaced by a softmax-kernel network that interpolates
//! liabilities from a small set of representative contracts, trained with
//! Nesterov-accelerated mini-batch gradient descent and fine-tuned from one
//! market scenario to the next.
//!
//! Modules:
//! - [`portfolio`]: contract model, synthetic portfolio generation, grid sampling.
//! - [`valuation`]: Monte Carlo liability engine plus a deterministic oracle.
//! - [`interpolator`]: feature extraction, the softmax network, training and
//!   the stopping detector.
//! - [`nested`]: scenario generation, sample-path knots, delta interpolation,
//!   the quantile estimator and the end-to-end pipeline.
//!
//! Numeric kernels are generic over [`Real`] (`f32` or `f64`); the pipeline
//! and reports run at [`Scalar`].
//!
//! ```no_run
//! use vascr_core::nested::{build_inputs, run_nested, EngineMode, PipelineConfig};
//!
//! let config = PipelineConfig::desk();
//! let inputs = build_inputs(&config)?;
//! let run = run_nested(&inputs, EngineMode::Nn, &config)?;
//! println!("solvency capital: {:.2}", run.report.scr);
//! # Ok::<(), vascr_core::Error>(())
//! ```

pub mod error;
pub mod interpolator;
pub mod nested;
pub mod num;
pub mod portfolio;
pub mod util;
pub mod valuation;

pub use error::{Error, Result};
pub use num::Real;

/// Scalar type the pipeline, CLI and reports are instantiated at.
pub type Scalar = f64;

/// A contract at pipeline precision.
pub type Contract = portfolio::VaContract<Scalar>;

/// Portfolios exchanged between modules.
pub type Portfolio = Vec<Contract>;

/// Market model at pipeline precision.
pub type Market = valuation::MarketModel<Scalar>;

/// Mortality table at pipeline precision.
pub type Mortality = valuation::mortality::MortalityTable<Scalar>;

/// Network parameters at pipeline precision.
pub type Network = interpolator::NetworkParameters<Scalar>;
