//! Deterministic zero-volatility valuation, kept independent of the Monte
//! Carlo engine so the two can cross-check each other.

use crate::error::{Error, Result};
use crate::num::Real;
use crate::portfolio::{Rider, VaContract};
use crate::valuation::mortality::MortalityTable;
use crate::valuation::MarketModel;

/// Evaluates the guarantee cash flows exactly when `sigma = 0`: the account
/// grows at the risk-free rate, withdrawals and decrements are applied year
/// by year, and no sampling is involved. Written as a standalone recursion on
/// purpose; it shares no path code with the Monte Carlo engine.
pub fn closed_form_oracle<F: Real>(
    contract: &VaContract<F>,
    model: &MarketModel<F>,
    table: &MortalityTable<F>,
) -> Result<F> {
    if model.volatility != F::zero() {
        return Err(Error::Domain(
            "the closed-form oracle requires zero volatility".into(),
        ));
    }
    if contract.maturity == 0 {
        return Err(Error::Domain("contract maturity must be at least 1".into()));
    }

    let growth = model.rate.exp();
    let annual = match contract.rider {
        Rider::Gmdb => F::zero(),
        Rider::GmdbGmwb => contract.withdrawal_rate * contract.withdrawal_benefit_base,
    };

    let mut account = contract.account_value;
    let mut death_base = contract.death_benefit_base;
    let mut remaining = contract.withdrawal_benefit_base;
    let mut alive = F::one();
    let mut value = F::zero();
    for t in 1..=contract.maturity {
        let q = table.q(contract.age + t - 1, contract.gender)?;
        let grown = account * growth;
        let withdrawal = annual.min(remaining);
        let shortfall = (withdrawal - grown).max(F::zero());
        account = (grown - withdrawal).max(F::zero());
        remaining -= withdrawal;
        death_base = (death_base - withdrawal).max(F::zero());
        let death_benefit = (death_base - account).max(F::zero());

        let discount = (-model.rate * F::of(t as f64)).exp();
        let died_this_year = alive * q;
        alive *= F::one() - q;
        value += (died_this_year * death_benefit + alive * shortfall) * discount;
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::portfolio::Gender;
    use crate::valuation::{value_contract, ValuationConfig};
    use approx::assert_relative_eq;

    fn flat_market() -> MarketModel<f64> {
        MarketModel {
            rate: 0.03,
            drift: 0.03,
            volatility: 0.0,
        }
    }

    #[test]
    fn rejects_nonzero_volatility() {
        let c = VaContract {
            id: 0,
            rider: Rider::Gmdb,
            gender: Gender::Male,
            age: 30,
            account_value: 1e5,
            death_benefit_base: 2e5,
            withdrawal_benefit_base: 0.0,
            withdrawal_rate: 0.05,
            maturity: 10,
        };
        let mut model = flat_market();
        model.volatility = 0.2;
        assert!(matches!(
            closed_form_oracle(&c, &model, &MortalityTable::synthetic()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn death_benefit_below_the_growing_account_is_worthless() {
        let c = VaContract {
            id: 0,
            rider: Rider::Gmdb,
            gender: Gender::Female,
            age: 40,
            account_value: 3e5,
            death_benefit_base: 1e5,
            withdrawal_benefit_base: 0.0,
            withdrawal_rate: 0.04,
            maturity: 25,
        };
        let table = MortalityTable::synthetic();
        assert_eq!(closed_form_oracle(&c, &flat_market(), &table).unwrap(), 0.0);
    }

    #[test]
    fn empty_account_withdrawal_rider_pays_a_decremented_annuity() {
        // With AV_0 = 0 every withdrawal is pure shortfall: 25% of the base per
        // year for four years. The death benefit base melts by the same
        // amounts. Expected value written out by hand below.
        let base: f64 = 1e5;
        let c = VaContract {
            id: 0,
            rider: Rider::GmdbGmwb,
            gender: Gender::Male,
            age: 50,
            account_value: 0.0,
            death_benefit_base: base,
            withdrawal_benefit_base: base,
            withdrawal_rate: 0.25,
            maturity: 10,
        };
        let table = MortalityTable::synthetic();

        let mut expected = 0.0;
        let mut alive = 1.0;
        let mut death_base = base;
        let mut remaining = base;
        for t in 1..=10u32 {
            let q = table.q(50 + t - 1, Gender::Male).unwrap();
            let withdrawal = (0.25 * base).min(remaining);
            remaining -= withdrawal;
            death_base = (death_base - withdrawal).max(0.0);
            let died = alive * q;
            alive *= 1.0 - q;
            let discount = (-0.03 * t as f64).exp();
            expected += (alive * withdrawal + died * death_base) * discount;
        }
        let value = closed_form_oracle(&c, &flat_market(), &table).unwrap();
        assert_relative_eq!(value, expected, max_relative = 1e-12);
        assert!(value > 0.0);
    }

    #[test]
    fn agrees_with_the_monte_carlo_engine_at_zero_volatility() {
        let table = MortalityTable::synthetic();
        let spec = crate::portfolio::PortfolioSpec {
            size: 25,
            ranges: crate::portfolio::AttributeRanges::standard(),
            rng_seed: 33,
        };
        let cfg = ValuationConfig::new(64, 4);
        for c in crate::portfolio::generate_synthetic_portfolio(&spec).unwrap() {
            let oracle = closed_form_oracle(&c, &flat_market(), &table).unwrap();
            let mc = value_contract(&c, &flat_market(), &table, &cfg).unwrap().mean;
            if oracle == 0.0 {
                assert_eq!(mc, 0.0);
            } else {
                assert_relative_eq!(mc, oracle, max_relative = 1e-10);
            }
        }
    }
}
