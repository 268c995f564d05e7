//! Variable annuity contract model and portfolio construction.
//!
//! Builds the synthetic input portfolio (attributes drawn uniformly at random
//! from the product universe) and the three small portfolios used by the
//! interpolator: representative and training contracts sampled without
//! replacement from discrete attribute grids, and validation contracts
//! sampled from the input portfolio itself.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::num::Real;

/// Guarantee rider combination carried by a contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rider {
    /// Death benefit only.
    Gmdb,
    /// Death benefit plus withdrawal benefit.
    GmdbGmwb,
}

impl Rider {
    pub fn as_str(self) -> &'static str {
        match self {
            Rider::Gmdb => "GMDB",
            Rider::GmdbGmwb => "GMDB_GMWB",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "GMDB" => Some(Rider::Gmdb),
            "GMDB_GMWB" => Some(Rider::GmdbGmwb),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "M",
            Gender::Female => "F",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "M" => Some(Gender::Male),
            "F" => Some(Gender::Female),
            _ => None,
        }
    }
}

/// One variable annuity policy.
///
/// `death_benefit_base` (GD) and `withdrawal_benefit_base` (GW) are the
/// guarantee bases. Contracts with a withdrawal rider carry equal bases;
/// death-benefit-only contracts carry `GW = 0` and keep their withdrawal
/// rate, which valuation ignores.
#[derive(Debug, Clone, PartialEq)]
pub struct VaContract<F> {
    pub id: u64,
    pub rider: Rider,
    pub gender: Gender,
    pub age: u32,
    pub account_value: F,
    pub death_benefit_base: F,
    pub withdrawal_benefit_base: F,
    pub withdrawal_rate: F,
    pub maturity: u32,
}

impl<F: Real> VaContract<F> {
    /// Structural validity: finite non-negative amounts, matching bases for
    /// withdrawal riders, zero withdrawal base otherwise.
    pub fn validate(&self) -> Result<()> {
        let amounts = [
            self.account_value,
            self.death_benefit_base,
            self.withdrawal_benefit_base,
            self.withdrawal_rate,
        ];
        if amounts.iter().any(|v| !v.is_finite() || *v < F::zero()) {
            return Err(Error::Config(format!(
                "contract {}: amounts must be finite and non-negative",
                self.id
            )));
        }
        if self.maturity == 0 {
            return Err(Error::Config(format!(
                "contract {}: maturity must be at least one year",
                self.id
            )));
        }
        match self.rider {
            Rider::GmdbGmwb if self.death_benefit_base != self.withdrawal_benefit_base => {
                Err(Error::Config(format!(
                    "contract {}: withdrawal rider requires equal guarantee bases",
                    self.id
                )))
            }
            Rider::Gmdb if self.withdrawal_benefit_base != F::zero() => Err(Error::Config(
                format!("contract {}: death-benefit-only contract must carry GW = 0", self.id),
            )),
            _ => Ok(()),
        }
    }
}

/// Attribute ranges for random portfolio generation.
///
/// Ages and maturities are integer sets (inclusive bounds), account and
/// guarantee values are continuous intervals, withdrawal rates a discrete
/// set. Riders and genders list the admissible categories.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeRanges<F> {
    pub riders: Vec<Rider>,
    pub genders: Vec<Gender>,
    pub ages: (u32, u32),
    pub maturities: (u32, u32),
    pub account_value: (F, F),
    pub guarantee: (F, F),
    pub withdrawal_rates: Vec<F>,
}

impl<F: Real> AttributeRanges<F> {
    /// The standard product universe: ages 20-60, maturities 10-25 years,
    /// account values 10k-500k, guarantee bases 5k-600k, withdrawal rates
    /// 4%-8% in 1% steps.
    pub fn standard() -> Self {
        AttributeRanges {
            riders: vec![Rider::Gmdb, Rider::GmdbGmwb],
            genders: vec![Gender::Male, Gender::Female],
            ages: (20, 60),
            maturities: (10, 25),
            account_value: (F::of(1e4), F::of(5e5)),
            guarantee: (F::of(0.5e4), F::of(6e5)),
            withdrawal_rates: vec![
                F::of(0.04),
                F::of(0.05),
                F::of(0.06),
                F::of(0.07),
                F::of(0.08),
            ],
        }
    }

    fn validate(&self) -> Result<()> {
        if self.riders.is_empty() || self.genders.is_empty() || self.withdrawal_rates.is_empty() {
            return Err(Error::Config("attribute ranges must be non-empty".into()));
        }
        if self.ages.0 > self.ages.1 || self.maturities.0 > self.maturities.1 {
            return Err(Error::Config("integer attribute bounds are inverted".into()));
        }
        if self.account_value.0 > self.account_value.1 || self.guarantee.0 > self.guarantee.1 {
            return Err(Error::Config("value interval bounds are inverted".into()));
        }
        if self.account_value.0 < F::zero() || self.guarantee.0 < F::zero() {
            return Err(Error::Config("value intervals must be non-negative".into()));
        }
        Ok(())
    }
}

/// Specification for the random input portfolio.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioSpec<F> {
    pub size: usize,
    pub ranges: AttributeRanges<F>,
    pub rng_seed: u64,
}

/// Discrete attribute grid from which representative and training contracts
/// are enumerated.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingGrid<F> {
    pub riders: Vec<Rider>,
    pub genders: Vec<Gender>,
    pub ages: Vec<u32>,
    pub account_values: Vec<F>,
    pub guarantee_values: Vec<F>,
    pub withdrawal_rates: Vec<F>,
    pub maturities: Vec<u32>,
}

impl<F: Real> SamplingGrid<F> {
    /// Grid the representative contracts are drawn from.
    pub fn representative() -> Self {
        SamplingGrid {
            riders: vec![Rider::Gmdb, Rider::GmdbGmwb],
            genders: vec![Gender::Male, Gender::Female],
            ages: vec![20, 30, 40, 50, 60],
            account_values: [1e4, 1e5, 2e5, 3e5, 4e5, 5e5].iter().map(|&v| F::of(v)).collect(),
            guarantee_values: [0.5e4, 1e5, 2e5, 3e5, 4e5, 5e5, 6e5]
                .iter()
                .map(|&v| F::of(v))
                .collect(),
            withdrawal_rates: vec![F::of(0.04), F::of(0.08)],
            maturities: vec![10, 15, 20, 25],
        }
    }

    /// Grid the training contracts are drawn from. Its attribute values are
    /// deliberately disjoint from the representative grid to avoid
    /// overfitting onto the anchors.
    pub fn training() -> Self {
        SamplingGrid {
            riders: vec![Rider::Gmdb, Rider::GmdbGmwb],
            genders: vec![Gender::Male, Gender::Female],
            ages: vec![23, 27, 33, 37, 43, 47, 53, 57],
            account_values: [0.2e5, 1.5e5, 2.5e5, 3.5e5, 4.5e5]
                .iter()
                .map(|&v| F::of(v))
                .collect(),
            guarantee_values: [0.5e5, 1.5e5, 2.5e5, 3.5e5, 4.5e5, 5.5e5]
                .iter()
                .map(|&v| F::of(v))
                .collect(),
            withdrawal_rates: vec![F::of(0.05), F::of(0.06), F::of(0.07)],
            maturities: vec![12, 13, 17, 18, 22, 23],
        }
    }

    fn validate(&self) -> Result<()> {
        let empty = self.riders.is_empty()
            || self.genders.is_empty()
            || self.ages.is_empty()
            || self.account_values.is_empty()
            || self.guarantee_values.is_empty()
            || self.withdrawal_rates.is_empty()
            || self.maturities.is_empty();
        if empty {
            return Err(Error::Config("sampling grid has an empty attribute list".into()));
        }
        Ok(())
    }
}

#[inline]
fn to_cents<F: Real>(x: F) -> F {
    (x * F::of(100.0)).round() / F::of(100.0)
}

/// Generates `spec.size` contracts with attributes drawn uniformly and
/// independently from `spec.ranges`. Currency amounts are rounded to cents so
/// in-memory values match the CSV interchange format exactly. Withdrawal
/// riders draw one guarantee base for both GD and GW; death-benefit-only
/// contracts carry GW = 0 and keep their drawn withdrawal rate unused.
pub fn generate_synthetic_portfolio<F: Real>(spec: &PortfolioSpec<F>) -> Result<Vec<VaContract<F>>> {
    if spec.size == 0 {
        return Err(Error::Config("portfolio size must be at least 1".into()));
    }
    spec.ranges.validate()?;

    let r = &spec.ranges;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut contracts = Vec::with_capacity(spec.size);
    for id in 0..spec.size as u64 {
        let rider = r.riders[rng.random_range(0..r.riders.len())];
        let gender = r.genders[rng.random_range(0..r.genders.len())];
        let age = rng.random_range(r.ages.0..=r.ages.1);
        let maturity = rng.random_range(r.maturities.0..=r.maturities.1);
        let account_value = to_cents(uniform_in(&mut rng, r.account_value));
        let guarantee = to_cents(uniform_in(&mut rng, r.guarantee));
        let withdrawal_rate = r.withdrawal_rates[rng.random_range(0..r.withdrawal_rates.len())];
        let (gd, gw) = match rider {
            Rider::Gmdb => (guarantee, F::zero()),
            Rider::GmdbGmwb => (guarantee, guarantee),
        };
        contracts.push(VaContract {
            id,
            rider,
            gender,
            age,
            account_value,
            death_benefit_base: gd,
            withdrawal_benefit_base: gw,
            withdrawal_rate,
            maturity,
        });
    }
    Ok(contracts)
}

#[inline]
fn uniform_in<F: Real>(rng: &mut ChaCha8Rng, (lo, hi): (F, F)) -> F {
    lo + (hi - lo) * F::unit_uniform(rng)
}

/// Enumerates every admissible contract in the grid: the cartesian product of
/// attribute values with withdrawal riders taking GD = GW from the single
/// guarantee list. Death-benefit-only rows ignore the withdrawal rate, so they
/// are assigned the smallest rate in the grid and the rows that differed only
/// in that column collapse; remaining exact duplicates are removed as well.
/// Ids are assigned in enumeration order.
pub fn enumerate_grid<F: Real>(grid: &SamplingGrid<F>) -> Result<Vec<VaContract<F>>> {
    grid.validate()?;
    let min_rate = grid
        .withdrawal_rates
        .iter()
        .copied()
        .fold(F::infinity(), F::min);

    let mut seen = HashSet::new();
    let mut contracts = Vec::new();
    for &rider in &grid.riders {
        let rates: &[F] = match rider {
            Rider::Gmdb => std::slice::from_ref(&min_rate),
            Rider::GmdbGmwb => &grid.withdrawal_rates,
        };
        for &gender in &grid.genders {
            for &age in &grid.ages {
                for &account_value in &grid.account_values {
                    for &guarantee in &grid.guarantee_values {
                        for &withdrawal_rate in rates {
                            for &maturity in &grid.maturities {
                                let (gd, gw) = match rider {
                                    Rider::Gmdb => (guarantee, F::zero()),
                                    Rider::GmdbGmwb => (guarantee, guarantee),
                                };
                                let key = (
                                    rider,
                                    gender,
                                    age,
                                    maturity,
                                    account_value.to_f64_lossy().to_bits(),
                                    gd.to_f64_lossy().to_bits(),
                                    gw.to_f64_lossy().to_bits(),
                                    withdrawal_rate.to_f64_lossy().to_bits(),
                                );
                                if !seen.insert(key) {
                                    continue;
                                }
                                contracts.push(VaContract {
                                    id: contracts.len() as u64,
                                    rider,
                                    gender,
                                    age,
                                    account_value,
                                    death_benefit_base: gd,
                                    withdrawal_benefit_base: gw,
                                    withdrawal_rate,
                                    maturity,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(contracts)
}

/// Samples `n` distinct contracts uniformly without replacement from the grid
/// enumeration. The output order is a uniform random permutation prefix.
pub fn sample_representatives<F: Real>(
    grid: &SamplingGrid<F>,
    n: usize,
    seed: u64,
) -> Result<Vec<VaContract<F>>> {
    let all = enumerate_grid(grid)?;
    sample_without_replacement(all, n, seed)
}

/// Samples `n` distinct contracts uniformly without replacement from an
/// existing portfolio, keeping their ids.
pub fn sample_validation<F: Real>(
    portfolio: &[VaContract<F>],
    n: usize,
    seed: u64,
) -> Result<Vec<VaContract<F>>> {
    sample_without_replacement(portfolio.to_vec(), n, seed)
}

fn sample_without_replacement<F: Real>(
    mut pool: Vec<VaContract<F>>,
    n: usize,
    seed: u64,
) -> Result<Vec<VaContract<F>>> {
    if n > pool.len() {
        return Err(Error::Config(format!(
            "cannot sample {n} contracts from a pool of {}",
            pool.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Fisher-Yates prefix: uniform ordered sample without replacement.
    for i in 0..n {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
    }
    pool.truncate(n);
    Ok(pool)
}

/// Reassigns contract ids to `base, base+1, ...` preserving order. The
/// pipeline gives representative and training contracts their own id ranges
/// so valuation streams never collide with input portfolio contracts.
pub fn rebase_ids<F>(contracts: &mut [VaContract<F>], base: u64) {
    for (i, c) in contracts.iter_mut().enumerate() {
        c.id = base + i as u64;
    }
}

pub const PORTFOLIO_CSV_HEADER: &str =
    "id,rider,gender,age,account_value,gd,gw,withdrawal_rate,maturity";

/// Writes the portfolio interchange CSV: one header row, one row per
/// contract, currency with two fraction digits.
pub fn write_portfolio_csv<F: Real, W: Write>(
    out: &mut W,
    contracts: &[VaContract<F>],
) -> Result<()> {
    writeln!(out, "{PORTFOLIO_CSV_HEADER}")?;
    for c in contracts {
        writeln!(
            out,
            "{},{},{},{},{:.2},{:.2},{:.2},{},{}",
            c.id,
            c.rider.as_str(),
            c.gender.as_str(),
            c.age,
            c.account_value,
            c.death_benefit_base,
            c.withdrawal_benefit_base,
            c.withdrawal_rate,
            c.maturity,
        )?;
    }
    Ok(())
}

/// Reads the portfolio interchange CSV. Reports the offending line number on
/// malformed rows; an empty file (no data rows) is an error.
pub fn read_portfolio_csv<F: Real, R: BufRead>(
    input: R,
    source_name: &str,
) -> Result<Vec<VaContract<F>>> {
    let parse_err = |line: usize, message: String| Error::Parse {
        source_name: source_name.to_string(),
        line,
        message,
    };

    let mut lines = input.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(parse_err(1, "missing header row".into())),
    };
    if header.trim_end() != PORTFOLIO_CSV_HEADER {
        return Err(parse_err(1, format!("unexpected header `{header}`")));
    }

    let mut contracts = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(parse_err(line_no, format!("expected 9 fields, got {}", fields.len())));
        }
        let contract = VaContract {
            id: parse_field(fields[0], "id", line_no, source_name)?,
            rider: Rider::parse(fields[1])
                .ok_or_else(|| parse_err(line_no, format!("unknown rider `{}`", fields[1])))?,
            gender: Gender::parse(fields[2])
                .ok_or_else(|| parse_err(line_no, format!("unknown gender `{}`", fields[2])))?,
            age: parse_field(fields[3], "age", line_no, source_name)?,
            account_value: parse_currency(fields[4], "account_value", line_no, source_name)?,
            death_benefit_base: parse_currency(fields[5], "gd", line_no, source_name)?,
            withdrawal_benefit_base: parse_currency(fields[6], "gw", line_no, source_name)?,
            withdrawal_rate: parse_currency(fields[7], "withdrawal_rate", line_no, source_name)?,
            maturity: parse_field(fields[8], "maturity", line_no, source_name)?,
        };
        contracts.push(contract);
    }
    if contracts.is_empty() {
        return Err(parse_err(1, "no contract rows".into()));
    }
    Ok(contracts)
}

fn parse_field<T: std::str::FromStr>(
    raw: &str,
    name: &str,
    line: usize,
    source_name: &str,
) -> Result<T> {
    raw.parse().map_err(|_| Error::Parse {
        source_name: source_name.to_string(),
        line,
        message: format!("invalid {name} `{raw}`"),
    })
}

fn parse_currency<F: Real>(raw: &str, name: &str, line: usize, source_name: &str) -> Result<F> {
    let v: f64 = parse_field(raw, name, line, source_name)?;
    Ok(F::of(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(size: usize, seed: u64) -> PortfolioSpec<f64> {
        PortfolioSpec {
            size,
            ranges: AttributeRanges::standard(),
            rng_seed: seed,
        }
    }

    #[test]
    fn generated_contracts_respect_ranges_and_invariants() {
        let portfolio = generate_synthetic_portfolio(&spec(2000, 11)).unwrap();
        assert_eq!(portfolio.len(), 2000);
        for c in &portfolio {
            c.validate().unwrap();
            assert!((20..=60).contains(&c.age));
            assert!((10..=25).contains(&c.maturity));
            assert!(c.account_value >= 1e4 && c.account_value <= 5e5);
            assert!(c.death_benefit_base >= 0.5e4 && c.death_benefit_base <= 6e5);
            match c.rider {
                Rider::Gmdb => assert_eq!(c.withdrawal_benefit_base, 0.0),
                Rider::GmdbGmwb => {
                    assert_eq!(c.death_benefit_base, c.withdrawal_benefit_base)
                }
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_synthetic_portfolio(&spec(500, 42)).unwrap();
        let b = generate_synthetic_portfolio(&spec(500, 42)).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic_portfolio(&spec(500, 43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_size_is_rejected() {
        assert!(matches!(
            generate_synthetic_portfolio(&spec(0, 1)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn degenerate_ranges_produce_identical_contracts() {
        let mut s = spec(50, 3);
        s.ranges.riders = vec![Rider::GmdbGmwb];
        s.ranges.genders = vec![Gender::Female];
        s.ranges.ages = (40, 40);
        s.ranges.maturities = (15, 15);
        s.ranges.account_value = (2e5, 2e5);
        s.ranges.guarantee = (3e5, 3e5);
        s.ranges.withdrawal_rates = vec![0.05];
        let portfolio = generate_synthetic_portfolio(&s).unwrap();
        let first = &portfolio[0];
        for c in &portfolio {
            assert_eq!((c.rider, c.gender, c.age, c.maturity), (first.rider, first.gender, first.age, first.maturity));
            assert_eq!(c.account_value, first.account_value);
            assert_eq!(c.death_benefit_base, first.death_benefit_base);
        }
    }

    /// Independent count: withdrawal riders take the full rate list, GMDB
    /// rows collapse onto a single rate.
    fn expected_grid_size(g: &SamplingGrid<f64>) -> usize {
        let base = g.genders.len() * g.ages.len() * g.account_values.len()
            * g.guarantee_values.len()
            * g.maturities.len();
        let mut total = 0;
        if g.riders.contains(&Rider::Gmdb) {
            total += base;
        }
        if g.riders.contains(&Rider::GmdbGmwb) {
            total += base * g.withdrawal_rates.len();
        }
        total
    }

    #[test]
    fn representative_grid_count_matches_enumeration_oracle() {
        let grid = SamplingGrid::<f64>::representative();
        let all = enumerate_grid(&grid).unwrap();
        assert_eq!(all.len(), expected_grid_size(&grid));
        assert_eq!(all.len(), 5040);
        for c in &all {
            c.validate().unwrap();
        }
    }

    #[test]
    fn training_grid_count_matches_enumeration_oracle() {
        let grid = SamplingGrid::<f64>::training();
        let all = enumerate_grid(&grid).unwrap();
        assert_eq!(all.len(), expected_grid_size(&grid));
        assert_eq!(all.len(), 11520);
    }

    #[test]
    fn single_valued_grid_enumerates_one_contract() {
        let grid = SamplingGrid {
            riders: vec![Rider::Gmdb],
            genders: vec![Gender::Male],
            ages: vec![30],
            account_values: vec![1e5],
            guarantee_values: vec![2e5],
            withdrawal_rates: vec![0.05],
            maturities: vec![10],
        };
        assert_eq!(enumerate_grid(&grid).unwrap().len(), 1);
    }

    #[test]
    fn training_grid_attribute_values_are_disjoint_from_representative() {
        let rep = SamplingGrid::<f64>::representative();
        let train = SamplingGrid::<f64>::training();
        assert!(train.ages.iter().all(|a| !rep.ages.contains(a)));
        assert!(train.maturities.iter().all(|m| !rep.maturities.contains(m)));
        assert!(train
            .account_values
            .iter()
            .all(|v| !rep.account_values.contains(v)));
        assert!(train
            .guarantee_values
            .iter()
            .all(|v| !rep.guarantee_values.contains(v)));
        assert!(train
            .withdrawal_rates
            .iter()
            .all(|v| !rep.withdrawal_rates.contains(v)));
    }

    #[test]
    fn representatives_are_distinct_members_of_the_grid() {
        let grid = SamplingGrid::<f64>::representative();
        let all = enumerate_grid(&grid).unwrap();
        let sample = sample_representatives(&grid, 300, 5).unwrap();
        assert_eq!(sample.len(), 300);
        let mut ids: Vec<u64> = sample.iter().map(|c| c.id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 300);
        for c in &sample {
            assert_eq!(&all[c.id as usize], c);
        }
    }

    #[test]
    fn sampling_the_full_grid_permutes_it() {
        let grid = SamplingGrid {
            riders: vec![Rider::Gmdb],
            genders: vec![Gender::Male, Gender::Female],
            ages: vec![30, 40],
            account_values: vec![1e5],
            guarantee_values: vec![2e5],
            withdrawal_rates: vec![0.05],
            maturities: vec![10, 20],
        };
        let all = enumerate_grid(&grid).unwrap();
        let sample = sample_representatives(&grid, all.len(), 9).unwrap();
        let mut sorted = sample.clone();
        sorted.sort_by_key(|c| c.id);
        assert_eq!(sorted, all);
        assert!(matches!(
            sample_representatives(&grid, all.len() + 1, 9),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let grid = SamplingGrid::<f64>::representative();
        assert_eq!(
            sample_representatives(&grid, 30, 7).unwrap(),
            sample_representatives(&grid, 30, 7).unwrap()
        );
        assert_ne!(
            sample_representatives(&grid, 30, 7).unwrap(),
            sample_representatives(&grid, 30, 8).unwrap()
        );
    }

    #[test]
    fn validation_sample_comes_from_the_portfolio() {
        let portfolio = generate_synthetic_portfolio(&spec(400, 2)).unwrap();
        let sample = sample_validation(&portfolio, 250, 3).unwrap();
        assert_eq!(sample.len(), 250);
        for c in &sample {
            assert_eq!(&portfolio[c.id as usize], c);
        }
        let full = sample_validation(&portfolio, 400, 3).unwrap();
        let mut sorted = full;
        sorted.sort_by_key(|c| c.id);
        assert_eq!(sorted, portfolio);
        assert!(sample_validation(&portfolio, 401, 3).is_err());
    }

    #[test]
    fn csv_round_trips() {
        let portfolio = generate_synthetic_portfolio(&spec(120, 17)).unwrap();
        let mut buf = Vec::new();
        write_portfolio_csv(&mut buf, &portfolio).unwrap();
        let back: Vec<VaContract<f64>> =
            read_portfolio_csv(buf.as_slice(), "mem").unwrap();
        assert_eq!(back, portfolio);
    }

    #[test]
    fn csv_parse_errors_carry_line_numbers() {
        let text = format!("{PORTFOLIO_CSV_HEADER}\n0,GMDB,M,30,1000.00,2000.00,0.00,0.04,10\n1,BAD,M,30,1,2,0,0.04,10\n");
        let err = read_portfolio_csv::<f64, _>(text.as_bytes(), "mem").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }

        let empty = format!("{PORTFOLIO_CSV_HEADER}\n");
        assert!(matches!(
            read_portfolio_csv::<f64, _>(empty.as_bytes(), "mem"),
            Err(Error::Parse { .. })
        ));
    }
}
