//! Perpetual schedule representations.
//!
//! Rounds are 1-indexed and bamboo indices are 1-based; index `0` inside a
//! list denotes an idle round (nothing is cut).

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::lcm_u64;

/// Default cap on the hyperperiod expanded by [`ResidueSchedule::validate`].
pub const DEFAULT_EXPANSION_CAP: u64 = 1 << 20;

/// Bamboo is cut at rounds `offset + k * period`, `k >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Residue {
    pub offset: u64,
    pub period: u64,
}

impl Residue {
    pub fn new(offset: u64, period: u64) -> Self {
        Residue { offset, period }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueSchedule {
    residues: Vec<Residue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListSchedule {
    pub preamble: Vec<usize>,
    pub period: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CyclicSchedule {
    Residue(ResidueSchedule),
    List(ListSchedule),
}

impl ResidueSchedule {
    /// `residues[i]` belongs to bamboo `i + 1`. Only the shape is checked
    /// here; see [`ResidueSchedule::validate`] for collisions.
    pub fn new(residues: Vec<Residue>) -> Result<Self> {
        if residues.is_empty() {
            return Err(Error::EmptySchedule);
        }
        for (i, r) in residues.iter().enumerate() {
            if r.offset == 0 || r.period == 0 {
                return Err(Error::InvalidResidue {
                    index: i + 1,
                    offset: r.offset,
                    period: r.period,
                });
            }
        }
        Ok(ResidueSchedule { residues })
    }

    pub fn from_pairs(pairs: &[(u64, u64)]) -> Result<Self> {
        ResidueSchedule::new(pairs.iter().map(|&(p, q)| Residue::new(p, q)).collect())
    }

    pub fn residues(&self) -> &[Residue] {
        &self.residues
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    /// Least common multiple of all periods, `None` on `u64` overflow.
    pub fn hyperperiod(&self) -> Option<u64> {
        self.residues
            .iter()
            .try_fold(1u64, |acc, r| lcm_u64(acc, r.period))
    }

    /// Checks that no two bamboos share a round.
    ///
    /// When the hyperperiod is at most `cap`, one hyperperiod is expanded
    /// and scanned. Otherwise the check falls back to the pairwise residue
    /// criterion: classes `p mod q` and `p' mod q'` intersect exactly when
    /// `p ≡ p' (mod gcd(q, q'))`, evaluated per pair of distinct periods.
    pub fn validate(&self, cap: u64) -> Result<()> {
        match self.hyperperiod() {
            Some(h) if h <= cap => self.validate_by_expansion(h),
            _ => self.validate_pairwise(),
        }
    }

    fn validate_by_expansion(&self, hyperperiod: u64) -> Result<()> {
        let mut owner = vec![0u32; hyperperiod as usize];
        for (i, r) in self.residues.iter().enumerate() {
            let mut pos = (r.offset - 1) % r.period;
            while pos < hyperperiod {
                let slot = &mut owner[pos as usize];
                if *slot != 0 {
                    let a = *slot as usize;
                    return Err(self.collision(a, i + 1));
                }
                *slot = (i + 1) as u32;
                pos += r.period;
            }
        }
        Ok(())
    }

    fn validate_pairwise(&self) -> Result<()> {
        let mut by_period: HashMap<u64, Vec<usize>> = HashMap::new();
        for (i, r) in self.residues.iter().enumerate() {
            by_period.entry(r.period).or_default().push(i);
        }
        let mut periods: Vec<u64> = by_period.keys().copied().collect();
        periods.sort_unstable();
        for &q in &periods {
            let mut seen: HashMap<u64, usize> = HashMap::new();
            for &i in &by_period[&q] {
                if let Some(&j) = seen.get(&(self.residues[i].offset % q)) {
                    return Err(self.collision(j + 1, i + 1));
                }
                seen.insert(self.residues[i].offset % q, i);
            }
        }
        for (a, &qa) in periods.iter().enumerate() {
            for &qb in &periods[a + 1..] {
                let d = qa.gcd(&qb);
                let (small, large) = if by_period[&qa].len() <= by_period[&qb].len() {
                    (&by_period[&qa], &by_period[&qb])
                } else {
                    (&by_period[&qb], &by_period[&qa])
                };
                let seen: HashMap<u64, usize> = small
                    .iter()
                    .map(|&i| (self.residues[i].offset % d, i))
                    .collect();
                for &i in large {
                    if let Some(&j) = seen.get(&(self.residues[i].offset % d)) {
                        return Err(self.collision(j + 1, i + 1));
                    }
                }
            }
        }
        Ok(())
    }

    /// Builds the collision error for bamboos `a` and `b` (1-based), naming
    /// their first common round.
    fn collision(&self, a: usize, b: usize) -> Error {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        let round = first_common_round(self.residues[a - 1], self.residues[b - 1])
            .and_then(|r| r.to_u64())
            .unwrap_or(u64::MAX);
        Error::Collision { a, b, round }
    }
}

/// Smallest round hit by both residue classes, via the Chinese remainder
/// theorem, or `None` when the classes are disjoint.
pub fn first_common_round(x: Residue, y: Residue) -> Option<BigInt> {
    let (p1, q1) = (BigInt::from(x.offset), BigInt::from(x.period));
    let (p2, q2) = (BigInt::from(y.offset), BigInt::from(y.period));
    let e = q1.extended_gcd(&q2);
    let g = e.gcd;
    let diff = &p2 - &p1;
    if !(&diff % &g).is_zero() {
        return None;
    }
    let lcm = &q1 / &g * &q2;
    // p1 + q1 * t with q1 * t ≡ diff (mod q2)
    let m = &q2 / &g;
    let t = ((&diff / &g) * &e.x).mod_floor(&m);
    let mut r = (&p1 + &q1 * t).mod_floor(&lcm);
    let start = p1.clone().max(p2.clone());
    while r < start {
        r += &lcm;
    }
    // r is congruent to both; step back to the first one >= both offsets.
    while &r - &lcm >= start {
        r -= &lcm;
    }
    Some(r)
}

impl ListSchedule {
    pub fn new(preamble: Vec<usize>, period: Vec<usize>) -> Self {
        ListSchedule { preamble, period }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.period.is_empty() {
            return Err(Error::EmptySchedule);
        }
        let mut present = vec![false; n + 1];
        for &i in self.preamble.iter().chain(&self.period) {
            if i > n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
        }
        for &i in &self.period {
            present[i] = true;
        }
        if let Some(missing) = (1..=n).find(|&i| !present[i]) {
            return Err(Error::MissingFromPeriod { index: missing });
        }
        Ok(())
    }

    /// Preamble followed by `copies` periods.
    pub fn expand(&self, copies: usize) -> Vec<usize> {
        let mut out = self.preamble.clone();
        for _ in 0..copies {
            out.extend_from_slice(&self.period);
        }
        out
    }
}

impl CyclicSchedule {
    pub fn bamboo_count_hint(&self) -> Option<usize> {
        match self {
            CyclicSchedule::Residue(r) => Some(r.len()),
            CyclicSchedule::List(_) => None,
        }
    }

    pub fn validate(&self, n: usize, cap: u64) -> Result<()> {
        match self {
            CyclicSchedule::Residue(r) => {
                if r.len() != n {
                    return Err(Error::LengthMismatch {
                        expected: n,
                        got: r.len(),
                    });
                }
                r.validate(cap)
            }
            CyclicSchedule::List(l) => l.validate(n),
        }
    }
}

/// Wire format: `{"residue": [[p, q], ...]}` or `{"preamble": [...], "period": [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScheduleFile {
    Residue { residue: Vec<(u64, u64)> },
    List {
        #[serde(default)]
        preamble: Vec<usize>,
        period: Vec<usize>,
    },
}

impl From<&CyclicSchedule> for ScheduleFile {
    fn from(s: &CyclicSchedule) -> Self {
        match s {
            CyclicSchedule::Residue(r) => ScheduleFile::Residue {
                residue: r.residues().iter().map(|r| (r.offset, r.period)).collect(),
            },
            CyclicSchedule::List(l) => ScheduleFile::List {
                preamble: l.preamble.clone(),
                period: l.period.clone(),
            },
        }
    }
}

impl TryFrom<ScheduleFile> for CyclicSchedule {
    type Error = Error;

    fn try_from(f: ScheduleFile) -> Result<Self> {
        Ok(match f {
            ScheduleFile::Residue { residue } => {
                CyclicSchedule::Residue(ResidueSchedule::from_pairs(&residue)?)
            }
            ScheduleFile::List { preamble, period } => {
                CyclicSchedule::List(ListSchedule::new(preamble, period))
            }
        })
    }
}
