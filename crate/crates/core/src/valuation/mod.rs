//! Monte Carlo liability valuation for guaranteed annuity contracts.
//!
//! Cash-flow conventions, shared by the path engine and the deterministic
//! oracle in [`oracle`]:
//!
//! - Annual grid `t = 1..=maturity`; all cash flows fall on anniversaries and
//!   discount at `exp(-r t)`.
//! - The account grows risk-neutrally: `AV_pre = AV * exp((r - sigma^2/2) + sigma Z)`.
//! - Withdrawal rider: the holder withdraws `rate * GW_0` per year until the
//!   cumulative amount reaches `GW_0`. The guarantee pays the shortfall
//!   `max(W_t - AV_pre, 0)` when the account cannot cover the withdrawal; the
//!   account and the death benefit base are reduced by the withdrawal,
//!   floored at zero.
//! - Death benefit: if death occurs in year `t` the payout is
//!   `max(GD_t - AV_t, 0)` at the end of that year, on post-withdrawal values.
//! - Mortality is deterministic decrement weighting, not sampled: death in
//!   year `t` has weight `S_{t-1} q_{x+t-1}`, the withdrawal shortfall at `t`
//!   is weighted by survival through year `t`.
//! - One-year valuation under a market coefficient `C1`: the liability is
//!   `q_x max(GD - C1 AV_0, 0) + p_x V(aged)` where the aged contract carries
//!   `age+1`, `maturity-1`, account `C1 * AV_0` and unchanged bases.
//!
//! Every contract owns an RNG stream keyed by `(seed, contract id)`, so the
//! same normal draws are reused across market coefficients (common random
//! numbers). That makes the one-year liability pathwise non-increasing in
//! `C1` and keeps portfolio estimates reproducible under parallel valuation.

pub mod mortality;
pub mod oracle;

use std::collections::HashSet;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::portfolio::{Rider, VaContract};
use crate::util::stream_seed;
use mortality::MortalityTable;

/// One-factor log-normal market.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketModel<F> {
    /// Risk-free rate per year; also the valuation drift and the discount rate.
    pub rate: F,
    /// Real-world drift of the account, used for outer scenario generation.
    pub drift: F,
    /// Volatility per square-root year.
    pub volatility: F,
}

impl<F: Real> MarketModel<F> {
    /// 3% rate and drift, 20% volatility.
    pub fn standard() -> Self {
        MarketModel {
            rate: F::of(0.03),
            drift: F::of(0.03),
            volatility: F::of(0.20),
        }
    }
}

/// Inner Monte Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValuationConfig {
    pub n_paths: usize,
    pub rng_seed: u64,
    /// Reuse each contract's draws across market scenarios. Keeps the delta
    /// curve smooth and monotone; turn off to decorrelate scenarios.
    pub use_common_random_numbers: bool,
}

impl ValuationConfig {
    pub fn new(n_paths: usize, rng_seed: u64) -> Self {
        ValuationConfig {
            n_paths,
            rng_seed,
            use_common_random_numbers: true,
        }
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiabilityEstimate<F> {
    pub mean: F,
    pub std_error: F,
}

/// Death and survival weights for years `1..=horizon`.
struct Decrements<F> {
    /// `death[t-1]`: probability death occurs in year `t`.
    death: Vec<F>,
    /// `survival[t-1]`: probability of surviving through year `t`.
    survival: Vec<F>,
}

fn decrements<F: Real>(
    table: &MortalityTable<F>,
    age: u32,
    gender: crate::portfolio::Gender,
    horizon: u32,
) -> Result<Decrements<F>> {
    let mut death = Vec::with_capacity(horizon as usize);
    let mut survival = Vec::with_capacity(horizon as usize);
    let mut alive = F::one();
    for t in 1..=horizon {
        let q = table.q(age + t - 1, gender)?;
        death.push(alive * q);
        alive *= F::one() - q;
        survival.push(alive);
    }
    Ok(Decrements { death, survival })
}

fn annual_withdrawal<F: Real>(contract: &VaContract<F>) -> F {
    match contract.rider {
        Rider::Gmdb => F::zero(),
        Rider::GmdbGmwb => contract.withdrawal_rate * contract.withdrawal_benefit_base,
    }
}

/// Simulates one account path: post-withdrawal values `AV_1..AV_maturity`
/// with `AV_{t} = max(AV_{t-1} exp((r - sigma^2/2) + sigma Z_t) - W_t, 0)`.
pub fn simulate_account_path<F: Real, R: Rng + ?Sized>(
    contract: &VaContract<F>,
    model: &MarketModel<F>,
    rng: &mut R,
) -> Vec<F> {
    let drift = model.rate - model.volatility * model.volatility / F::of(2.0);
    let w_annual = annual_withdrawal(contract);
    let mut gw_left = contract.withdrawal_benefit_base;
    let mut av = contract.account_value;
    let mut path = Vec::with_capacity(contract.maturity as usize);
    for _ in 0..contract.maturity {
        let z = F::standard_normal(rng);
        let grown = av * (drift + model.volatility * z).exp();
        let w = w_annual.min(gw_left);
        av = (grown - w).max(F::zero());
        gw_left -= w;
        path.push(av);
    }
    path
}

/// Discounted guarantee cash flows along one path.
fn path_present_value<F: Real, R: Rng + ?Sized>(
    contract: &VaContract<F>,
    model: &MarketModel<F>,
    dec: &Decrements<F>,
    discounts: &[F],
    rng: &mut R,
) -> F {
    let drift = model.rate - model.volatility * model.volatility / F::of(2.0);
    let w_annual = annual_withdrawal(contract);
    let mut av = contract.account_value;
    let mut gd = contract.death_benefit_base;
    let mut gw_left = contract.withdrawal_benefit_base;
    let mut pv = F::zero();
    for ((&died, &alive), &discount) in dec.death.iter().zip(&dec.survival).zip(discounts) {
        let z = F::standard_normal(rng);
        let grown = av * (drift + model.volatility * z).exp();
        let w = w_annual.min(gw_left);
        let shortfall = (w - grown).max(F::zero());
        av = (grown - w).max(F::zero());
        gw_left -= w;
        gd = (gd - w).max(F::zero());
        let death_benefit = (gd - av).max(F::zero());
        pv += (died * death_benefit + alive * shortfall) * discount;
    }
    pv
}

fn contract_rng(cfg: &ValuationConfig, contract_id: u64, scenario_tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(stream_seed(cfg.rng_seed, contract_id, scenario_tag))
}

fn value_contract_tagged<F: Real>(
    contract: &VaContract<F>,
    model: &MarketModel<F>,
    table: &MortalityTable<F>,
    cfg: &ValuationConfig,
    scenario_tag: u64,
) -> Result<LiabilityEstimate<F>> {
    if cfg.n_paths == 0 {
        return Err(Error::Config("n_paths must be at least 1".into()));
    }
    if contract.maturity == 0 {
        return Err(Error::Domain("contract maturity must be at least 1".into()));
    }
    let dec = decrements(table, contract.age, contract.gender, contract.maturity)?;
    let discounts: Vec<F> = (1..=contract.maturity)
        .map(|t| (-model.rate * F::of(t as f64)).exp())
        .collect();
    let mut rng = contract_rng(cfg, contract.id, scenario_tag);

    // Welford: exact mean for identical paths, stable variance otherwise.
    let mut mean = F::zero();
    let mut m2 = F::zero();
    for k in 1..=cfg.n_paths {
        let pv = path_present_value(contract, model, &dec, &discounts, &mut rng);
        let delta = pv - mean;
        mean += delta / F::of(k as f64);
        m2 += delta * (pv - mean);
    }
    let n = F::of(cfg.n_paths as f64);
    let std_error = if cfg.n_paths > 1 {
        (m2 / (n - F::one()) / n).sqrt()
    } else {
        F::zero()
    };
    Ok(LiabilityEstimate { mean, std_error })
}

/// Time-0 liability of one contract: Monte Carlo average of the discounted
/// guarantee cash flows.
pub fn value_contract<F: Real>(
    contract: &VaContract<F>,
    model: &MarketModel<F>,
    table: &MortalityTable<F>,
    cfg: &ValuationConfig,
) -> Result<LiabilityEstimate<F>> {
    value_contract_tagged(contract, model, table, cfg, 0)
}

/// Liability one year ahead, conditional on the market coefficient `c1`:
/// `q_x max(GD - c1 AV_0, 0) + p_x V(aged)`, valued in year-one money.
pub fn value_contract_at_one_year<F: Real>(
    contract: &VaContract<F>,
    c1: F,
    model: &MarketModel<F>,
    table: &MortalityTable<F>,
    cfg: &ValuationConfig,
) -> Result<LiabilityEstimate<F>> {
    if !c1.is_finite() || c1 <= F::zero() {
        return Err(Error::Domain("market coefficient must be positive".into()));
    }
    if contract.maturity < 2 {
        return Err(Error::Domain(
            "one-year valuation needs maturity of at least 2".into(),
        ));
    }
    let q = table.q(contract.age, contract.gender)?;
    let p = F::one() - q;
    let account_one_year = c1 * contract.account_value;
    let death_benefit = (contract.death_benefit_base - account_one_year).max(F::zero());

    let aged = VaContract {
        age: contract.age + 1,
        maturity: contract.maturity - 1,
        account_value: account_one_year,
        ..contract.clone()
    };
    let tag = if cfg.use_common_random_numbers {
        0
    } else {
        c1.to_f64_lossy().to_bits()
    };
    let continuation = value_contract_tagged(&aged, model, table, cfg, tag)?;
    Ok(LiabilityEstimate {
        mean: q * death_benefit + p * continuation.mean,
        std_error: p * continuation.std_error,
    })
}

/// Portfolio liability: the sum of per-contract liabilities, at time 0 when
/// `scenario` is absent, one year ahead under `C1 = scenario` otherwise.
/// Contracts are valued in parallel and summed in portfolio order.
pub fn value_portfolio<F: Real>(
    contracts: &[VaContract<F>],
    model: &MarketModel<F>,
    table: &MortalityTable<F>,
    cfg: &ValuationConfig,
    scenario: Option<F>,
) -> Result<F> {
    let estimates = value_portfolio_each(contracts, model, table, cfg, scenario)?;
    Ok(estimates.iter().map(|e| e.mean).sum())
}

/// Per-contract estimates in portfolio order.
pub fn value_portfolio_each<F: Real>(
    contracts: &[VaContract<F>],
    model: &MarketModel<F>,
    table: &MortalityTable<F>,
    cfg: &ValuationConfig,
    scenario: Option<F>,
) -> Result<Vec<LiabilityEstimate<F>>> {
    if contracts.is_empty() {
        return Err(Error::Config("portfolio must be non-empty".into()));
    }
    contracts
        .par_iter()
        .map(|c| match scenario {
            None => value_contract(c, model, table, cfg),
            Some(c1) => value_contract_at_one_year(c, c1, model, table, cfg),
        })
        .collect()
}

/// Valuation engine bound to a market model, mortality table and Monte Carlo
/// settings. Records the ids of every contract it values so a pipeline can
/// audit which contracts were touched by inner simulation.
pub struct Valuator<F: Real> {
    model: MarketModel<F>,
    table: MortalityTable<F>,
    cfg: ValuationConfig,
    valued_ids: Mutex<HashSet<u64>>,
}

impl<F: Real> Valuator<F> {
    pub fn new(model: MarketModel<F>, table: MortalityTable<F>, cfg: ValuationConfig) -> Self {
        Valuator {
            model,
            table,
            cfg,
            valued_ids: Mutex::new(HashSet::new()),
        }
    }

    pub fn model(&self) -> &MarketModel<F> {
        &self.model
    }

    pub fn table(&self) -> &MortalityTable<F> {
        &self.table
    }

    pub fn config(&self) -> &ValuationConfig {
        &self.cfg
    }

    fn record(&self, contracts: &[VaContract<F>]) {
        let mut ids = self.valued_ids.lock().expect("id log poisoned");
        ids.extend(contracts.iter().map(|c| c.id));
    }

    pub fn value_portfolio(&self, contracts: &[VaContract<F>], scenario: Option<F>) -> Result<F> {
        self.record(contracts);
        value_portfolio(contracts, &self.model, &self.table, &self.cfg, scenario)
    }

    pub fn value_each(
        &self,
        contracts: &[VaContract<F>],
        scenario: Option<F>,
    ) -> Result<Vec<LiabilityEstimate<F>>> {
        self.record(contracts);
        value_portfolio_each(contracts, &self.model, &self.table, &self.cfg, scenario)
    }

    /// Ids of every contract valued through this engine so far.
    pub fn valued_contract_ids(&self) -> HashSet<u64> {
        self.valued_ids.lock().expect("id log poisoned").clone()
    }
}
