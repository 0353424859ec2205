//! Seeded random instance generators.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rates::RateVector;
use crate::rational::{int, mul_u64, Rational};

/// `n` rates drawn as integers in `1..=max_weight`, normalized to `H = 1`.
pub fn random_rates<R: Rng>(rng: &mut R, n: usize, max_weight: u64) -> Result<RateVector> {
    if n == 0 {
        return Err(Error::EmptyRates);
    }
    let w: Vec<Rational> = (0..n).map(|_| int(rng.gen_range(1..=max_weight.max(1)))).collect();
    Ok(RateVector::from_unsorted(w)?.0.normalized())
}

/// Normalized instance whose largest rate is exactly `head`. The other
/// `n - 1` rates are random integers scaled to sum to `1 - head`; draws in
/// which one of them would exceed `head` are repeated.
pub fn planted<R: Rng>(rng: &mut R, n: usize, head: &Rational) -> Result<RateVector> {
    if head <= &Rational::zero() || head > &Rational::one() {
        return Err(Error::InvalidParameter("head must lie in (0, 1]".into()));
    }
    if n == 1 {
        return if head.is_one() {
            RateVector::new(vec![Rational::one()])
        } else {
            Err(Error::InvalidParameter("a single rate must be 1".into()))
        };
    }
    let rest = Rational::one() - head;
    if rest.is_zero() || int(n as u64 - 1) * head < rest {
        return Err(Error::InvalidParameter(format!("n = {n} cannot carry the planted head")));
    }
    for _ in 0..1000 {
        let mut w: Vec<u64> = (1..n).map(|_| rng.gen_range(1..=1000u64)).collect();
        w.sort_unstable_by(|a, b| b.cmp(a));
        let total: u64 = w.iter().sum();
        let scale = &rest / int(total);
        if &scale * int(w[0]) <= *head {
            let mut rates = vec![head.clone()];
            rates.extend(w.iter().map(|&x| mul_u64(&scale, x)));
            return RateVector::new(rates);
        }
    }
    Err(Error::InvalidParameter(format!("could not plant head in n = {n}")))
}

/// Smallest `n` for which [`planted`] reliably succeeds.
pub fn planted_min_n(head: &Rational) -> usize {
    let per = (Rational::one() - head) / head;
    crate::rational::ceil_int(&(int(2) * per))
        .to_usize()
        .unwrap_or(usize::MAX)
        .saturating_add(2)
}

/// Pinwheel frequencies with minimum `f1` and density at most
/// `1 - 3/sqrt(f1)`, filled greedily with random values in `f1..=4 f1`.
/// The greedy pass runs in `f64` with a small margin; the final density is
/// then checked exactly.
pub fn corollary_frequencies<R: Rng>(rng: &mut R, f1: u64, max_len: usize) -> Result<Vec<u64>> {
    if f1 < 10 {
        return Err(Error::InvalidParameter("f1 must be at least 10".into()));
    }
    let limit = 1.0 - 3.0 / (f1 as f64).sqrt() - 1e-9;
    let mut freqs = vec![f1];
    let mut d = 1.0 / f1 as f64;
    let mut misses = 0;
    while freqs.len() < max_len && misses < 50 {
        let f = rng.gen_range(f1..=4 * f1);
        if d + 1.0 / f as f64 <= limit {
            d += 1.0 / f as f64;
            freqs.push(f);
            misses = 0;
        } else {
            misses += 1;
        }
    }
    while !within_corollary(&freqs, f1) {
        freqs.pop();
        if freqs.is_empty() {
            return Err(Error::InvalidParameter("f1 too small".into()));
        }
    }
    freqs.sort_unstable();
    Ok(freqs)
}

/// Exact `density(freqs) <= 1 - 3/sqrt(f1)`, i.e. `1 - d >= 0` and
/// `f1 (1 - d)^2 >= 9`, over the common denominator of the distinct values.
pub fn within_corollary(freqs: &[u64], f1: u64) -> bool {
    let mut counts = std::collections::BTreeMap::new();
    for &f in freqs {
        *counts.entry(f).or_insert(0u64) += 1;
    }
    let mut l = BigUint::one();
    for &f in counts.keys() {
        l = l.lcm(&BigUint::from(f));
    }
    let used: BigUint = counts.iter().map(|(&f, &c)| &l / f * c).sum();
    if used > l {
        return false;
    }
    let slack = &l - used;
    &slack * &slack * f1 >= &l * &l * 9u32
}
