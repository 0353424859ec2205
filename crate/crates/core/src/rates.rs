use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{Frac, Rational};

/// Growth rates `h_1 >= h_2 >= ... >= h_n > 0` with their cached sum `H`.
///
/// Bamboo `i` (1-based everywhere in the public API) grows by `rates()[i - 1]`
/// per round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateVector {
    rates: Vec<Rational>,
    total: Rational,
}

impl RateVector {
    /// Rejects empty, non-positive and unsorted input.
    pub fn new(rates: Vec<Rational>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::EmptyRates);
        }
        for (i, h) in rates.iter().enumerate() {
            if !h.is_positive() {
                return Err(Error::NonPositiveRate { index: i + 1 });
            }
            if i > 0 && h > &rates[i - 1] {
                return Err(Error::UnsortedRates { index: i + 1 });
            }
        }
        // One reduction over the common denominator; repeated `+` would
        // reduce at every step.
        let d = rates.iter().fold(BigInt::one(), |acc, h| acc.lcm(h.denom()));
        let num: BigInt = rates.iter().map(|h| h.numer() * (&d / h.denom())).sum();
        let total = Rational::new(num, d);
        Ok(RateVector { rates, total })
    }

    /// Sorts non-increasing first. Returns the rates and `order`, where
    /// `order[k]` is the input position (0-based) of sorted bamboo `k + 1`.
    pub fn from_unsorted(rates: Vec<Rational>) -> Result<(Self, Vec<usize>)> {
        let mut order: Vec<usize> = (0..rates.len()).collect();
        order.sort_by(|&a, &b| rates[b].cmp(&rates[a]));
        let sorted = order.iter().map(|&i| rates[i].clone()).collect();
        Ok((RateVector::new(sorted)?, order))
    }

    /// Convenience for tests and generators: `(num, den)` pairs.
    pub fn from_pairs(pairs: &[(i64, i64)]) -> Result<Self> {
        RateVector::new(pairs.iter().map(|&(n, d)| crate::rational::ratio(n, d)).collect())
    }

    /// `n` copies of `rate`.
    pub fn uniform(n: usize, rate: Rational) -> Result<Self> {
        RateVector::new(vec![rate; n])
    }

    pub fn rates(&self) -> &[Rational] {
        &self.rates
    }

    /// `H`, the exact sum of rates.
    pub fn total(&self) -> &Rational {
        &self.total
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// Rate of bamboo `i` (1-based).
    pub fn rate(&self, i: usize) -> &Rational {
        &self.rates[i - 1]
    }

    pub fn max(&self) -> &Rational {
        &self.rates[0]
    }

    pub fn min(&self) -> &Rational {
        &self.rates[self.rates.len() - 1]
    }

    pub fn is_normalized(&self) -> bool {
        self.total.is_one()
    }

    /// Divides every rate by `H`.
    pub fn normalized(&self) -> RateVector {
        self.scaled(&(Rational::one() / &self.total))
    }

    pub fn scaled(&self, c: &Rational) -> RateVector {
        assert!(c.is_positive(), "scale factor must be positive");
        RateVector {
            rates: self.rates.iter().map(|h| h * c).collect(),
            total: &self.total * c,
        }
    }

    /// Sub-instance on the given 1-based bamboos, which must be listed in
    /// non-increasing rate order (ascending index order suffices).
    pub fn subset(&self, members: &[usize]) -> Result<RateVector> {
        RateVector::new(members.iter().map(|&i| self.rate(i).clone()).collect())
    }

    /// Integer numerators over the least common denominator `d`, so that
    /// `rates()[i] == nums[i] / d`.
    pub fn common_denominator(&self) -> (Vec<BigInt>, BigInt) {
        let d = self
            .rates
            .iter()
            .fold(BigInt::one(), |acc, h| acc.lcm(h.denom()));
        let nums = self
            .rates
            .iter()
            .map(|h| h.numer() * (&d / h.denom()))
            .collect();
        (nums, d)
    }
}

/// JSON instance document: `{"rates": [...], "travel": [[...]], "start": 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub rates: Vec<Frac>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub travel: Option<Vec<Vec<Frac>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<usize>,
}

impl InstanceFile {
    pub fn from_rates(rates: &RateVector) -> Self {
        InstanceFile {
            rates: rates.rates().iter().cloned().map(Frac).collect(),
            travel: None,
            start: None,
        }
    }

    /// Discrete instance. Rates must already be sorted non-increasing.
    pub fn rate_vector(&self) -> Result<RateVector> {
        RateVector::new(self.rates.iter().map(|f| f.0.clone()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn validates_order_and_positivity() {
        assert_eq!(RateVector::new(vec![]), Err(Error::EmptyRates));
        assert_eq!(
            RateVector::from_pairs(&[(1, 4), (1, 2)]),
            Err(Error::UnsortedRates { index: 2 })
        );
        assert_eq!(
            RateVector::from_pairs(&[(1, 2), (0, 1)]),
            Err(Error::NonPositiveRate { index: 2 })
        );
        let r = RateVector::from_pairs(&[(7, 15), (1, 3), (1, 5)]).unwrap();
        assert_eq!(r.total(), &ratio(1, 1));
        assert_eq!(r.rate(2), &ratio(1, 3));
    }

    #[test]
    fn unsorted_input_is_sorted_with_permutation() {
        let (r, order) =
            RateVector::from_unsorted(vec![ratio(1, 4), ratio(1, 2), ratio(1, 4)]).unwrap();
        assert_eq!(r.rates(), &[ratio(1, 2), ratio(1, 4), ratio(1, 4)]);
        assert_eq!(order, vec![1, 0, 2]);
    }

    #[test]
    fn instance_file_accepts_mixed_number_forms() {
        let doc = r#"{"rates": ["7/15", 0.2, "1/3"]}"#;
        let file: InstanceFile = serde_json::from_str(doc).unwrap();
        assert!(file.rate_vector().is_err());
        let doc = r#"{"rates": ["7/15", "1/3", 0.2], "start": 1}"#;
        let file: InstanceFile = serde_json::from_str(doc).unwrap();
        assert_eq!(file.rate_vector().unwrap().total(), &ratio(1, 1));
    }
}
