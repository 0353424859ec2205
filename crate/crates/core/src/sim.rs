//! Exact discrete simulation and closed-form evaluation of cyclic schedules.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rates::RateVector;
use crate::rational::{Frac, Rational};
use crate::schedule::{CyclicSchedule, ListSchedule, ResidueSchedule, DEFAULT_EXPANSION_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    /// Number of rounds simulated.
    Rounds(u64),
    /// Continuous time simulated.
    Time(Frac),
    /// Closed-form supremum over the whole perpetual schedule.
    Unbounded,
}

/// Supremum heights of a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimulationReport {
    pub per_bamboo_max: Vec<Frac>,
    pub global_max: Frac,
    /// 1-based; lowest index among ties.
    pub argmax_bamboo: usize,
    /// Supremum over the periodic part only (no initial gaps).
    pub steady_state_max: Frac,
    pub horizon: Horizon,
}

impl SimulationReport {
    /// Builds a report from per-bamboo suprema; `steady` holds the matching
    /// steady-state suprema.
    pub fn from_heights(per_bamboo: Vec<Rational>, steady: Vec<Rational>, horizon: Horizon) -> Self {
        assert_eq!(per_bamboo.len(), steady.len());
        let mut argmax = 0;
        for (i, h) in per_bamboo.iter().enumerate() {
            if h > &per_bamboo[argmax] {
                argmax = i;
            }
        }
        let global_max = per_bamboo[argmax].clone();
        let steady_state_max = steady.iter().max().cloned().unwrap_or_else(Rational::zero);
        SimulationReport {
            per_bamboo_max: per_bamboo.into_iter().map(Frac).collect(),
            global_max: Frac(global_max),
            argmax_bamboo: argmax + 1,
            steady_state_max: Frac(steady_state_max),
            horizon,
        }
    }

    pub fn global_max(&self) -> &Rational {
        &self.global_max.0
    }

    pub fn steady_state_max(&self) -> &Rational {
        &self.steady_state_max.0
    }

    /// Supremum for bamboo `i` (1-based).
    pub fn bamboo_max(&self, i: usize) -> &Rational {
        &self.per_bamboo_max[i - 1].0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    /// Count the gap from the last cut to the horizon as a real gap.
    pub count_tail: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { count_tail: true }
    }
}

/// Largest gaps (in rounds) per bamboo for a finite cut sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapProfile {
    /// Largest gap including the initial gap from round 0.
    pub max_gap: Vec<u64>,
    /// Largest gap between two consecutive cuts (plus the tail, if counted).
    pub steady_gap: Vec<u64>,
    pub last_cut: Vec<u64>,
}

/// Computes gap profiles for a 1-based cut list (`0` = idle).
pub fn gap_profile(n: usize, schedule: &[usize], opts: SimOptions) -> Result<GapProfile> {
    let mut last = vec![0u64; n];
    let mut cut_once = vec![false; n];
    let mut max_gap = vec![0u64; n];
    let mut steady = vec![0u64; n];
    for (t, &i) in schedule.iter().enumerate() {
        let round = t as u64 + 1;
        if i == 0 {
            continue;
        }
        if i > n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        let k = i - 1;
        let gap = round - last[k];
        max_gap[k] = max_gap[k].max(gap);
        if cut_once[k] {
            steady[k] = steady[k].max(gap);
        }
        cut_once[k] = true;
        last[k] = round;
    }
    let horizon = schedule.len() as u64;
    for k in 0..n {
        let tail = horizon - last[k];
        if !cut_once[k] {
            // Never cut: the bamboo grows for the whole horizon either way.
            max_gap[k] = horizon;
            steady[k] = horizon;
        } else if opts.count_tail {
            max_gap[k] = max_gap[k].max(tail);
            steady[k] = steady[k].max(tail);
        }
    }
    Ok(GapProfile {
        max_gap,
        steady_gap: steady,
        last_cut: last,
    })
}

/// Simulates a finite cut sequence. Heights are `h_i` times the largest gap,
/// with the first gap measured from round 0.
pub fn simulate_discrete(
    rates: &RateVector,
    schedule: &[usize],
    opts: SimOptions,
) -> Result<SimulationReport> {
    if schedule.is_empty() {
        return Err(Error::EmptySchedule);
    }
    let profile = gap_profile(rates.len(), schedule, opts)?;
    let scale = |gaps: &[u64]| -> Vec<Rational> {
        gaps.iter()
            .zip(rates.rates())
            .map(|(&g, h)| crate::rational::mul_u64(h, g))
            .collect()
    };
    Ok(SimulationReport::from_heights(
        scale(&profile.max_gap),
        scale(&profile.steady_gap),
        Horizon::Rounds(schedule.len() as u64),
    ))
}

/// Exact supremum heights of a perpetual schedule without unbounded
/// simulation. Validates the schedule first.
pub fn evaluate_cyclic(rates: &RateVector, schedule: &CyclicSchedule) -> Result<SimulationReport> {
    evaluate_cyclic_with_cap(rates, schedule, DEFAULT_EXPANSION_CAP)
}

pub fn evaluate_cyclic_with_cap(
    rates: &RateVector,
    schedule: &CyclicSchedule,
    cap: u64,
) -> Result<SimulationReport> {
    schedule.validate(rates.len(), cap)?;
    let (max_gap, steady_gap) = match schedule {
        CyclicSchedule::Residue(r) => residue_gaps(r),
        CyclicSchedule::List(l) => list_gaps(rates.len(), l),
    };
    let scale = |gaps: &[u64]| -> Vec<Rational> {
        gaps.iter()
            .zip(rates.rates())
            .map(|(&g, h)| crate::rational::mul_u64(h, g))
            .collect()
    };
    Ok(SimulationReport::from_heights(
        scale(&max_gap),
        scale(&steady_gap),
        Horizon::Unbounded,
    ))
}

fn residue_gaps(s: &ResidueSchedule) -> (Vec<u64>, Vec<u64>) {
    s.residues()
        .iter()
        .map(|r| (r.offset.max(r.period), r.period))
        .unzip()
}

/// Gaps of `preamble ++ period^ω`: initial gap, preamble gaps, the step
/// into the period and the cyclic gaps of the period.
fn list_gaps(n: usize, l: &ListSchedule) -> (Vec<u64>, Vec<u64>) {
    let pre = l.preamble.len() as u64;
    let len = l.period.len() as u64;
    let mut max_gap = vec![0u64; n];
    let mut steady = vec![0u64; n];
    let mut last = vec![0u64; n];
    for (t, &i) in l.preamble.iter().chain(&l.period).enumerate() {
        if i == 0 {
            continue;
        }
        let pos = t as u64 + 1;
        max_gap[i - 1] = max_gap[i - 1].max(pos - last[i - 1]);
        last[i - 1] = pos;
    }
    let mut first_in_period = vec![0u64; n];
    let mut last_in_period = vec![0u64; n];
    for (t, &i) in l.period.iter().enumerate() {
        if i == 0 {
            continue;
        }
        let pos = pre + t as u64 + 1;
        if first_in_period[i - 1] == 0 {
            first_in_period[i - 1] = pos;
        } else {
            steady[i - 1] = steady[i - 1].max(pos - last_in_period[i - 1]);
        }
        last_in_period[i - 1] = pos;
    }
    for k in 0..n {
        let wrap = first_in_period[k] + len - last_in_period[k];
        steady[k] = steady[k].max(wrap);
        max_gap[k] = max_gap[k].max(wrap);
    }
    (max_gap, steady)
}

/// The trivial lower bound `OPT >= H`.
#[allow(non_snake_case)]
pub fn lower_bound_H(rates: &RateVector) -> Rational {
    rates.total().clone()
}

/// Number of days within which some height must exceed `h_prime < H`:
/// `floor(n * H' / (H - H')) + 1`. While all heights stay at most `H'`, the
/// total height rises by at least `H - H'` per day.
pub fn total_height_deadline(rates: &RateVector, h_prime: &Rational) -> Result<u64> {
    let h = rates.total();
    if h_prime >= h || h_prime < &Rational::zero() {
        return Err(Error::InvalidParameter(format!(
            "height cap must lie in [0, H), got {}",
            crate::rational::format(h_prime)
        )));
    }
    let n = Rational::from_integer(rates.len().into());
    let days = (n * h_prime / (h - h_prime)).floor().to_integer() + num_bigint::BigInt::one();
    u64::try_from(days).map_err(|_| Error::InvalidParameter("deadline overflows u64".into()))
}

/// First round (1-based) at which some bamboo, after growing and before the
/// cut, is taller than `cap`.
pub fn first_exceedance(rates: &RateVector, schedule: &[usize], cap: &Rational) -> Result<Option<u64>> {
    let n = rates.len();
    let mut age = vec![0u64; n];
    for (t, &cut) in schedule.iter().enumerate() {
        if cut > n {
            return Err(Error::IndexOutOfRange { index: cut, n });
        }
        for k in 0..n {
            age[k] += 1;
            if rates.rates()[k].clone() * Rational::from_integer(age[k].into()) > *cap {
                return Ok(Some(t as u64 + 1));
            }
        }
        if cut != 0 {
            age[cut - 1] = 0;
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::schedule::{ListSchedule, ResidueSchedule};

    fn rv(p: &[(i64, i64)]) -> RateVector {
        RateVector::from_pairs(p).unwrap()
    }

    #[test]
    fn simulate_worked_instances() {
        let r = rv(&[(1, 2), (1, 4), (1, 4)]);
        let sched = [1, 2, 1, 3, 1, 2, 1, 3];
        let rep = simulate_discrete(&r, &sched, SimOptions::default()).unwrap();
        assert_eq!(rep.global_max(), &int(1));

        let r = rv(&[(1, 1)]);
        let rep = simulate_discrete(&r, &[1, 1, 1], SimOptions::default()).unwrap();
        assert_eq!(rep.global_max(), &int(1));

        let r = rv(&[(7, 15), (1, 3), (1, 5)]);
        let sched = [1, 2, 1, 2, 1, 3, 1, 2, 1, 2, 1, 3];
        let rep = simulate_discrete(&r, &sched, SimOptions::default()).unwrap();
        assert_eq!(rep.global_max(), &ratio(4, 3));
        assert_eq!(rep.argmax_bamboo, 2);
    }

    #[test]
    fn tail_gap_counts_unless_excluded() {
        let r = rv(&[(1, 2), (1, 2)]);
        let sched = [1, 2, 1, 1, 1];
        let with = simulate_discrete(&r, &sched, SimOptions { count_tail: true }).unwrap();
        let without = simulate_discrete(&r, &sched, SimOptions { count_tail: false }).unwrap();
        assert_eq!(with.bamboo_max(2), &ratio(3, 2));
        assert_eq!(without.bamboo_max(2), &int(1));
        assert_eq!(without.steady_state_max(), &int(1));
    }

    #[test]
    fn idle_rounds_and_range_errors() {
        let r = rv(&[(1, 2)]);
        let rep = simulate_discrete(&r, &[0, 1, 0, 1], SimOptions::default()).unwrap();
        assert_eq!(rep.global_max(), &int(1));
        assert_eq!(
            simulate_discrete(&r, &[2], SimOptions::default()),
            Err(Error::IndexOutOfRange { index: 2, n: 1 })
        );
        assert_eq!(simulate_discrete(&r, &[], SimOptions::default()), Err(Error::EmptySchedule));
    }

    #[test]
    fn never_cut_bamboo_grows_for_whole_horizon() {
        let r = rv(&[(1, 2), (1, 8)]);
        let rep = simulate_discrete(&r, &[1; 10], SimOptions { count_tail: false }).unwrap();
        assert_eq!(rep.bamboo_max(2), &ratio(10, 8));
    }

    #[test]
    fn evaluate_residue_and_list_forms() {
        let r = rv(&[(1, 2), (1, 2)]);
        let s = CyclicSchedule::Residue(ResidueSchedule::from_pairs(&[(1, 2), (2, 2)]).unwrap());
        assert_eq!(evaluate_cyclic(&r, &s).unwrap().global_max(), &int(1));

        let r = rv(&[(7, 15), (1, 3), (1, 5)]);
        let s = CyclicSchedule::List(ListSchedule::new(vec![], vec![1, 2, 1, 2, 1, 3]));
        assert_eq!(evaluate_cyclic(&r, &s).unwrap().global_max(), &ratio(4, 3));

        // Late first cut dominates.
        let r = rv(&[(1, 2), (1, 4)]);
        let s = CyclicSchedule::Residue(ResidueSchedule::from_pairs(&[(2, 2), (5, 4)]).unwrap());
        let rep = evaluate_cyclic(&r, &s).unwrap();
        assert_eq!(rep.bamboo_max(2), &ratio(5, 4));
        assert_eq!(rep.steady_state_max(), &int(1));
    }

    #[test]
    fn evaluate_reports_collisions_and_missing_indices() {
        let r = rv(&[(1, 2), (1, 4), (1, 4)]);
        let s = CyclicSchedule::Residue(ResidueSchedule::from_pairs(&[(1, 2), (2, 4), (3, 4)]).unwrap());
        assert!(matches!(evaluate_cyclic(&r, &s), Err(Error::Collision { .. })));
        let s = CyclicSchedule::List(ListSchedule::new(vec![3], vec![1, 2]));
        assert_eq!(evaluate_cyclic(&r, &s), Err(Error::MissingFromPeriod { index: 3 }));
    }

    #[test]
    fn list_preamble_gaps_are_included() {
        let r = rv(&[(1, 2), (1, 4), (1, 4)]);
        let s = ListSchedule::new(vec![2, 3, 3], vec![1, 2, 1, 3]);
        let rep = evaluate_cyclic(&r, &CyclicSchedule::List(s.clone())).unwrap();
        // Bamboo 1 waits four rounds for its first cut.
        assert_eq!(rep.bamboo_max(1), &int(2));
        assert_eq!(rep.steady_state_max(), &int(1));
        let sim = simulate_discrete(&r, &s.expand(2), SimOptions { count_tail: false }).unwrap();
        assert_eq!(sim.per_bamboo_max, rep.per_bamboo_max);
    }

    #[test]
    fn lower_bound_is_total() {
        assert_eq!(lower_bound_H(&rv(&[(1, 2), (1, 4), (1, 4)])), int(1));
        assert_eq!(lower_bound_H(&rv(&[(7, 15), (1, 3), (1, 5)])), int(1));
        assert_eq!(lower_bound_H(&rv(&[(3, 4), (1, 4)])), int(1));
    }

    #[test]
    fn total_height_deadline_values() {
        let r = rv(&[(1, 2), (1, 4), (1, 4)]);
        // n H' / (H - H') = 3 * (3/4) / (1/4) = 9
        assert_eq!(total_height_deadline(&r, &ratio(3, 4)).unwrap(), 10);
        assert!(total_height_deadline(&r, &int(1)).is_err());
    }
}
