//! Input features of the softmax network.
//!
//! For an input contract `z` and each representative contract `z_i` the
//! network sees 14 values: two categorical mismatch indicators (rider,
//! gender) and, per numeric attribute `t` in {maturity, age, account value,
//! death benefit base, withdrawal benefit base, withdrawal rate}, the scaled
//! one-sided differences
//!
//! ```text
//! f_plus  = max(t(z) - t(z_i), 0) / R_t
//! f_minus = max(t(z_i) - t(z), 0) / R_t
//! ```
//!
//! where `R_t` is the attribute's range over the product universe. Scaling
//! keeps every feature in `[0, 1]`, and at most one of each one-sided pair is
//! non-zero. One-sided differences let training pick a different bandwidth on
//! each side of a representative.

use crate::error::{Error, Result};
use crate::num::Real;
use crate::portfolio::VaContract;

/// Features per representative: 2 categorical + 6 upward + 6 downward.
pub const FEATURE_COUNT: usize = 14;

const NUMERIC_ATTRIBUTES: usize = 6;

/// Features of one input contract against one representative.
pub type FeatureVector<F> = [F; FEATURE_COUNT];

/// Features of one input contract against every representative.
pub type FeatureMatrix<F> = Vec<FeatureVector<F>>;

/// Value range of each numeric attribute, used to scale feature differences.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRanges<F> {
    pub maturity: (F, F),
    pub age: (F, F),
    pub account_value: (F, F),
    pub death_benefit: (F, F),
    pub withdrawal_benefit: (F, F),
    pub withdrawal_rate: (F, F),
}

impl<F: Real> FeatureRanges<F> {
    /// Ranges of the standard product universe. The withdrawal benefit and
    /// withdrawal rate floors are zero because death-benefit-only contracts
    /// carry no withdrawals (see [`extract_features`]).
    pub fn standard() -> Self {
        FeatureRanges {
            maturity: (F::of(10.0), F::of(25.0)),
            age: (F::of(20.0), F::of(60.0)),
            account_value: (F::of(1e4), F::of(5e5)),
            death_benefit: (F::of(0.5e4), F::of(6e5)),
            withdrawal_benefit: (F::zero(), F::of(6e5)),
            withdrawal_rate: (F::zero(), F::of(0.08)),
        }
    }

    fn widths(&self) -> Result<[F; NUMERIC_ATTRIBUTES]> {
        let pairs = [
            ("maturity", self.maturity),
            ("age", self.age),
            ("account_value", self.account_value),
            ("death_benefit", self.death_benefit),
            ("withdrawal_benefit", self.withdrawal_benefit),
            ("withdrawal_rate", self.withdrawal_rate),
        ];
        let mut widths = [F::zero(); NUMERIC_ATTRIBUTES];
        for (k, (name, (lo, hi))) in pairs.into_iter().enumerate() {
            let width = hi - lo;
            if !width.is_finite() || width <= F::zero() {
                return Err(Error::Config(format!(
                    "feature range for {name} must have positive width"
                )));
            }
            widths[k] = width;
        }
        Ok(widths)
    }
}

#[inline]
fn numeric_attributes<F: Real>(c: &VaContract<F>) -> [F; NUMERIC_ATTRIBUTES] {
    // The withdrawal rate enters as the effective rate: zero for contracts
    // without a withdrawal rider. A death-benefit-only contract keeps its
    // nominal rate in the data, but that attribute is economically dead and
    // treating it as live feature variation only injects noise between
    // contracts with identical liabilities.
    let effective_rate = match c.rider {
        crate::portfolio::Rider::Gmdb => F::zero(),
        crate::portfolio::Rider::GmdbGmwb => c.withdrawal_rate,
    };
    [
        F::of(c.maturity as f64),
        F::of(c.age as f64),
        c.account_value,
        c.death_benefit_base,
        c.withdrawal_benefit_base,
        effective_rate,
    ]
}

/// One feature vector per representative for the input contract `z`.
pub fn extract_features<F: Real>(
    z: &VaContract<F>,
    representatives: &[VaContract<F>],
    ranges: &FeatureRanges<F>,
) -> Result<FeatureMatrix<F>> {
    let widths = ranges.widths()?;
    let x = numeric_attributes(z);
    let mut matrix = Vec::with_capacity(representatives.len());
    for rep in representatives {
        let xi = numeric_attributes(rep);
        let mut f = [F::zero(); FEATURE_COUNT];
        f[0] = if z.rider == rep.rider { F::zero() } else { F::one() };
        f[1] = if z.gender == rep.gender { F::zero() } else { F::one() };
        for k in 0..NUMERIC_ATTRIBUTES {
            f[2 + k] = (x[k] - xi[k]).max(F::zero()) / widths[k];
            f[2 + NUMERIC_ATTRIBUTES + k] = (xi[k] - x[k]).max(F::zero()) / widths[k];
        }
        matrix.push(f);
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::portfolio::{Gender, Rider};

    fn contract(av: f64, gd: f64, gw: f64) -> VaContract<f64> {
        VaContract {
            id: 0,
            rider: Rider::GmdbGmwb,
            gender: Gender::Male,
            age: 40,
            account_value: av,
            death_benefit_base: gd,
            withdrawal_benefit_base: gw,
            withdrawal_rate: 0.06,
            maturity: 15,
        }
    }

    #[test]
    fn self_difference_is_all_zero() {
        let z = contract(2e5, 3e5, 3e5);
        let feats = extract_features(&z, std::slice::from_ref(&z), &FeatureRanges::standard()).unwrap();
        assert_eq!(feats[0], [0.0; FEATURE_COUNT]);
    }

    #[test]
    fn gender_mismatch_sets_only_the_categorical_feature() {
        let z = contract(2e5, 3e5, 3e5);
        let mut rep = z.clone();
        rep.gender = Gender::Female;
        let feats = extract_features(&z, &[rep], &FeatureRanges::standard()).unwrap();
        let mut expected = [0.0; FEATURE_COUNT];
        expected[1] = 1.0;
        assert_eq!(feats[0], expected);
    }

    #[test]
    fn range_endpoints_map_to_unit_features() {
        let mut z = contract(5e5, 6e5, 6e5);
        z.age = 60;
        z.maturity = 25;
        z.withdrawal_rate = 0.08;
        let mut rep = contract(1e4, 0.5e4, 0.0);
        rep.age = 20;
        rep.maturity = 10;
        rep.withdrawal_rate = 0.04;
        rep.rider = Rider::Gmdb;

        let feats = extract_features(&z, &[rep], &FeatureRanges::standard()).unwrap();
        let f = feats[0];
        assert_eq!(f[0], 1.0); // rider differs
        for k in 2..8 {
            match k {
                5 => assert!((f[5] - (6e5 - 0.5e4) / 5.95e5).abs() < 1e-15),
                _ => assert_eq!(f[k], 1.0, "upward feature {k}"),
            }
        }
        assert_eq!(&f[8..], &[0.0; 6]);
    }

    #[test]
    fn features_stay_in_unit_interval_with_complementary_slack() {
        let spec = crate::portfolio::PortfolioSpec {
            size: 200,
            ranges: crate::portfolio::AttributeRanges::standard(),
            rng_seed: 8,
        };
        let portfolio = crate::portfolio::generate_synthetic_portfolio(&spec).unwrap();
        let reps = &portfolio[..20];
        let ranges = FeatureRanges::standard();
        for z in &portfolio {
            for f in extract_features(z, reps, &ranges).unwrap() {
                for v in f {
                    assert!((0.0..=1.0).contains(&v), "feature {v} out of range");
                }
                for k in 0..6 {
                    assert_eq!(f[2 + k] * f[8 + k], 0.0, "one-sided pair {k} overlaps");
                }
            }
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(256))]
        #[test]
        fn features_lie_in_the_unit_box_with_complementary_slack(
            z in arbitrary_contract(),
            rep in arbitrary_contract(),
        ) {
            let feats = extract_features(&z, &[rep], &FeatureRanges::standard()).unwrap();
            for v in feats[0] {
                proptest::prop_assert!((0.0..=1.0).contains(&v), "feature {} out of range", v);
            }
            for k in 0..6 {
                proptest::prop_assert_eq!(feats[0][2 + k] * feats[0][8 + k], 0.0);
            }
        }
    }

    fn arbitrary_contract() -> impl proptest::strategy::Strategy<Value = VaContract<f64>> {
        use proptest::prelude::*;
        (
            any::<bool>(),
            any::<bool>(),
            20u32..=60,
            10u32..=25,
            1e4..5e5f64,
            0.5e4..6e5f64,
            prop::sample::select(vec![0.04, 0.05, 0.06, 0.07, 0.08]),
        )
            .prop_map(|(gmwb, male, age, maturity, av, guarantee, rate)| VaContract {
                id: 0,
                rider: if gmwb { Rider::GmdbGmwb } else { Rider::Gmdb },
                gender: if male { Gender::Male } else { Gender::Female },
                age,
                account_value: av,
                death_benefit_base: guarantee,
                withdrawal_benefit_base: if gmwb { guarantee } else { 0.0 },
                withdrawal_rate: rate,
                maturity,
            })
    }

    #[test]
    fn zero_width_range_is_a_configuration_error() {
        let z = contract(2e5, 3e5, 3e5);
        let mut ranges = FeatureRanges::standard();
        ranges.age = (40.0, 40.0);
        assert!(matches!(
            extract_features(&z, std::slice::from_ref(&z), &ranges),
            Err(Error::Config(_))
        ));
    }
}
