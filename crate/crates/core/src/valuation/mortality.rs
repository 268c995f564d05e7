//! Mortality table: one-year death probabilities per age and gender.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::portfolio::Gender;

/// Per-age, per-gender one-year death probabilities over a contiguous age
/// range.
#[derive(Debug, Clone, PartialEq)]
pub struct MortalityTable<F> {
    first_age: u32,
    q_male: Vec<F>,
    q_female: Vec<F>,
}

impl<F: Real> MortalityTable<F> {
    pub fn new(first_age: u32, q_male: Vec<F>, q_female: Vec<F>) -> Result<Self> {
        if q_male.is_empty() || q_male.len() != q_female.len() {
            return Err(Error::Config(
                "mortality table needs equal, non-empty male and female columns".into(),
            ));
        }
        for q in q_male.iter().chain(q_female.iter()) {
            if !(*q >= F::zero() && *q < F::one()) {
                return Err(Error::Config(
                    "death probabilities must satisfy 0 <= q < 1".into(),
                ));
            }
        }
        Ok(MortalityTable {
            first_age,
            q_male,
            q_female,
        })
    }

    /// Synthetic Gompertz-Makeham table covering ages 20 to 100:
    /// `q(x) = min(0.98, A + B * c^x)` with `A = 5e-4`, `c = 1.1` and
    /// `B = 3.5e-5` for males, `2.5e-5` for females. Stands in for published
    /// annuity mortality data, which is not shipped with the crate; any table
    /// in the same CSV format can be substituted through the configuration.
    pub fn synthetic() -> Self {
        const FIRST: u32 = 20;
        const LAST: u32 = 100;
        let q = |b: f64| -> Vec<F> {
            (FIRST..=LAST)
                .map(|x| F::of((5e-4 + b * 1.1f64.powi(x as i32)).min(0.98)))
                .collect()
        };
        MortalityTable {
            first_age: FIRST,
            q_male: q(3.5e-5),
            q_female: q(2.5e-5),
        }
    }

    pub fn first_age(&self) -> u32 {
        self.first_age
    }

    pub fn last_age(&self) -> u32 {
        self.first_age + self.q_male.len() as u32 - 1
    }

    /// One-year death probability for the given age and gender.
    pub fn q(&self, age: u32, gender: Gender) -> Result<F> {
        if age < self.first_age || age > self.last_age() {
            return Err(Error::Domain(format!(
                "age {age} outside mortality table range [{}, {}]",
                self.first_age,
                self.last_age()
            )));
        }
        let idx = (age - self.first_age) as usize;
        Ok(match gender {
            Gender::Male => self.q_male[idx],
            Gender::Female => self.q_female[idx],
        })
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "age,q_male,q_female")?;
        for (i, (qm, qf)) in self.q_male.iter().zip(&self.q_female).enumerate() {
            writeln!(out, "{},{},{}", self.first_age + i as u32, qm, qf)?;
        }
        Ok(())
    }

    /// Reads `age,q_male,q_female` rows; ages must be contiguous ascending.
    pub fn read_csv<R: BufRead>(input: R, source_name: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            source_name: source_name.to_string(),
            line,
            message,
        };

        let mut lines = input.lines().enumerate();
        match lines.next() {
            Some((_, line)) => {
                let header = line?;
                if header.trim_end() != "age,q_male,q_female" {
                    return Err(parse_err(1, format!("unexpected header `{header}`")));
                }
            }
            None => return Err(parse_err(1, "missing header row".into())),
        }

        let mut first_age = None;
        let mut q_male = Vec::new();
        let mut q_female = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(parse_err(line_no, format!("expected 3 fields, got {}", fields.len())));
            }
            let age: u32 = fields[0]
                .parse()
                .map_err(|_| parse_err(line_no, format!("invalid age `{}`", fields[0])))?;
            match first_age {
                None => first_age = Some(age),
                Some(first) => {
                    let expected = first + q_male.len() as u32;
                    if age != expected {
                        return Err(parse_err(
                            line_no,
                            format!("ages must be contiguous: expected {expected}, got {age}"),
                        ));
                    }
                }
            }
            let qm: f64 = fields[1]
                .parse()
                .map_err(|_| parse_err(line_no, format!("invalid q_male `{}`", fields[1])))?;
            let qf: f64 = fields[2]
                .parse()
                .map_err(|_| parse_err(line_no, format!("invalid q_female `{}`", fields[2])))?;
            q_male.push(F::of(qm));
            q_female.push(F::of(qf));
        }
        match first_age {
            Some(first) => MortalityTable::new(first, q_male, q_female),
            None => Err(parse_err(1, "no data rows".into())),
        }
    }
}
