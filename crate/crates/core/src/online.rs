//! Greedy strategies and the instance families that defeat them.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rates::RateVector;
use crate::rational::{int, Rational};
use crate::sim::{simulate_discrete, SimOptions, SimulationReport};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OnlineRun {
    /// Cut per round, 1-based; `0` marks an idle round.
    pub schedule: Vec<usize>,
    pub report: SimulationReport,
}

/// Cuts the tallest bamboo each round. Ties go to the larger rate, then the
/// lower index; with sorted rates that is simply the lowest index.
pub fn reduce_max(rates: &RateVector, horizon: u64) -> OnlineRun {
    let (nums, _) = rates.common_denominator();
    let n = rates.len();
    let mut age = vec![0u64; n];
    let mut schedule = Vec::with_capacity(horizon as usize);
    for _ in 0..horizon {
        let mut best = 0;
        let mut best_h = BigInt::zero();
        for k in 0..n {
            age[k] += 1;
            let h = &nums[k] * age[k];
            if k == 0 || h > best_h {
                best = k;
                best_h = h;
            }
        }
        age[best] = 0;
        schedule.push(best + 1);
    }
    finish(rates, schedule)
}

/// Reduce-Fastest(x): among bamboos of height at least `x * H`, cut the
/// fastest-growing one; idle if there is none.
pub fn reduce_fastest(rates: &RateVector, x: &Rational, horizon: u64) -> Result<OnlineRun> {
    if !x.is_positive() {
        return Err(Error::InvalidParameter("x must be positive".into()));
    }
    Ok(reduce_fastest_with_threshold(rates, &(x * rates.total()), horizon))
}

/// Reduce-Fastest with an explicit height threshold instead of `x * H`.
pub fn reduce_fastest_with_threshold(rates: &RateVector, threshold: &Rational, horizon: u64) -> OnlineRun {
    let (nums, d) = rates.common_denominator();
    // height_k >= threshold  <=>  nums[k] * age * t.den >= t.num * d
    let lhs_scale: Vec<BigInt> = nums.iter().map(|x| x * threshold.denom()).collect();
    let rhs = threshold.numer() * &d;
    let n = rates.len();
    let mut age = vec![0u64; n];
    let mut schedule = Vec::with_capacity(horizon as usize);
    for _ in 0..horizon {
        let mut cut = None;
        for k in 0..n {
            age[k] += 1;
            if cut.is_none() && &lhs_scale[k] * age[k] >= rhs {
                cut = Some(k);
            }
        }
        match cut {
            Some(k) => {
                age[k] = 0;
                schedule.push(k + 1);
            }
            None => schedule.push(0),
        }
    }
    finish(rates, schedule)
}

fn finish(rates: &RateVector, schedule: Vec<usize>) -> OnlineRun {
    let report = if schedule.is_empty() {
        SimulationReport::from_heights(
            vec![Rational::zero(); rates.len()],
            vec![Rational::zero(); rates.len()],
            crate::sim::Horizon::Rounds(0),
        )
    } else {
        simulate_discrete(rates, &schedule, SimOptions::default()).expect("indices in range")
    };
    OnlineRun { schedule, report }
}

/// One row per round: the cut index and the tallest height just before it.
pub fn trace(rates: &RateVector, schedule: &[usize]) -> Vec<(u64, usize, Rational)> {
    let mut age = vec![0u64; rates.len()];
    let mut rows = Vec::with_capacity(schedule.len());
    for (t, &cut) in schedule.iter().enumerate() {
        let mut top = Rational::zero();
        for (k, h) in rates.rates().iter().enumerate() {
            age[k] += 1;
            let height = h * int(age[k]);
            if height > top {
                top = height;
            }
        }
        if cut != 0 {
            age[cut - 1] = 0;
        }
        rows.push((t as u64 + 1, cut, top));
    }
    rows
}

/// Bamboos that end the run above `4H` without any cut in its second half.
pub fn diverging(rates: &RateVector, schedule: &[usize]) -> Vec<usize> {
    let horizon = schedule.len();
    let mut last = vec![0usize; rates.len()];
    for (t, &cut) in schedule.iter().enumerate() {
        if cut != 0 {
            last[cut - 1] = t + 1;
        }
    }
    let limit = rates.total() * int(4);
    (0..rates.len())
        .filter(|&k| {
            let height = rates.rates()[k].clone() * int((horizon - last[k]) as u64);
            height > limit && last[k] <= horizon / 2
        })
        .map(|k| k + 1)
        .collect()
}

/// `h_1 = 3k / (7k+3)` followed by `7k+3` rates `1 / (2(7k+3))`. The sum is
/// below 1 and is kept as is.
pub fn gen_reduce_max_12_7_family(k: u64) -> Result<RateVector> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let i = 7 * k + 3;
    let mut rates = vec![Rational::new((3 * k).into(), i.into())];
    rates.extend(std::iter::repeat(Rational::new(1.into(), (2 * i).into())).take(i as usize));
    RateVector::new(rates)
}

/// Two-rate instances against Reduce-Fastest(x):
/// `(x, e)` for `x < 1`, `(x/2 - e, e)` for `1 <= x < 2`, `(1 - e, e)` for `x >= 2`.
pub fn gen_reduce_fastest_lb(x: &Rational, eps: &Rational) -> Result<RateVector> {
    let one = int(1);
    let two = int(2);
    let bad = |range: &str| {
        Err(Error::InvalidParameter(format!(
            "epsilon {} outside {range}",
            crate::rational::format(eps)
        )))
    };
    if !x.is_positive() {
        return Err(Error::InvalidParameter("x must be positive".into()));
    }
    if !eps.is_positive() {
        return bad("(0, ...)");
    }
    let pair = if x < &one {
        let upper = x.clone().min(&one - x);
        if eps >= &upper {
            return bad("(0, min(x, 1-x))");
        }
        [x.clone(), eps.clone()]
    } else if x < &two {
        if eps >= &(x / &two) {
            return bad("(0, x/2)");
        }
        [x / &two - eps, eps.clone()]
    } else {
        if eps >= &(&one / &two) {
            return bad("(0, 1/2)");
        }
        [&one - eps, eps.clone()]
    };
    let (rv, _) = RateVector::from_unsorted(pair.to_vec())?;
    Ok(rv)
}

/// Stage structure of Reduce-Max on the 12/7 family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageReport {
    /// Last round of stages 1, 2 and 3.
    pub stage_ends: [u64; 3],
    /// Group-2 bamboos never cut by the end of stage 3.
    pub uncut_after_stage3: usize,
    /// Cuts in the four rounds after stage 3.
    pub next_cuts: Vec<usize>,
    /// Height of `b_1` (after growth) in the fourth round after stage 3, i.e.
    /// once three further rounds have gone to group 2.
    pub b1_height_after: Rational,
    /// Largest height `b_1` reached up to that round.
    pub b1_max_until: Rational,
}

/// Reads stage boundaries off a Reduce-Max trace: stage `j` ends at the last
/// round whose tallest group-2 bamboo is at most `j * h_1`.
pub fn reduce_max_stages(rates: &RateVector, schedule: &[usize]) -> Result<StageReport> {
    let h1 = rates.rate(1).clone();
    let n = rates.len();
    if n < 2 {
        return Err(Error::InvalidParameter("need a second group".into()));
    }
    let mut age = vec![0u64; n];
    let mut cut_ever = vec![false; n];
    let mut ends = [0u64; 3];
    let mut passed = [false; 3];
    let mut stage3: Option<(u64, usize)> = None;
    let mut b1_max = Rational::zero();
    for (t, &cut) in schedule.iter().enumerate() {
        let round = t as u64 + 1;
        for a in age.iter_mut() {
            *a += 1;
        }
        let b1 = &h1 * int(age[0]);
        if b1 > b1_max {
            b1_max = b1.clone();
        }
        let top2 = (1..n)
            .map(|k| rates.rates()[k].clone() * int(age[k]))
            .max()
            .expect("n >= 2");
        for (j, end) in ends.iter_mut().enumerate() {
            let limit = &h1 * int(j as u64 + 1);
            if top2 > limit {
                passed[j] = true;
            } else if !passed[j] {
                *end = round;
            }
        }
        if stage3.is_none() && top2 > &h1 * int(3) {
            stage3 = Some((round - 1, (1..n).filter(|&k| !cut_ever[k]).count()));
        }
        if let Some((end3, uncut)) = stage3 {
            if round == end3 + 4 {
                let from = end3 as usize;
                return Ok(StageReport {
                    stage_ends: ends,
                    uncut_after_stage3: uncut,
                    next_cuts: schedule[from..from + 4].to_vec(),
                    b1_height_after: b1,
                    b1_max_until: b1_max,
                });
            }
        }
        if cut != 0 {
            age[cut - 1] = 0;
            cut_ever[cut - 1] = true;
        }
    }
    Err(Error::InvalidParameter("horizon ends before stage 3 + 4 rounds".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn reduce_max_on_three_bamboos() {
        let eps = ratio(1, 100);
        let r = RateVector::new(vec![ratio(3, 8) - &eps, ratio(1, 4), ratio(1, 4)]).unwrap();
        let run = reduce_max(&r, 100);
        assert_eq!(run.report.bamboo_max(1), &ratio(219, 200));
    }

    #[test]
    fn reduce_max_round_robin_on_equal_rates() {
        let r = RateVector::uniform(5, ratio(1, 7)).unwrap();
        let run = reduce_max(&r, 40);
        assert_eq!(&run.schedule[..10], &[1, 2, 3, 4, 5, 1, 2, 3, 4, 5]);
        assert_eq!(run.report.global_max(), &ratio(5, 7));
        let r = RateVector::from_pairs(&[(1, 2), (1, 2)]).unwrap();
        assert_eq!(reduce_max(&r, 10).report.global_max(), &int(1));
    }

    #[test]
    fn family_rates() {
        let r = gen_reduce_max_12_7_family(1).unwrap();
        assert_eq!(r.len(), 11);
        assert_eq!(r.rate(1), &ratio(3, 10));
        assert_eq!(r.rate(11), &ratio(1, 20));
        let r = gen_reduce_max_12_7_family(2).unwrap();
        assert_eq!((r.rate(1), r.rate(2), r.len()), (&ratio(6, 17), &ratio(1, 34), 18));
        for k in 1..6u64 {
            let r = gen_reduce_max_12_7_family(k).unwrap();
            let expected = Rational::new((3 * k).into(), (7 * k + 3).into()) + ratio(1, 2);
            assert_eq!(r.total(), &expected);
        }
    }

    #[test]
    fn reduce_max_family_k10() {
        let r = gen_reduce_max_12_7_family(10).unwrap();
        let run = reduce_max(&r, 4 * 60 + 10);
        assert_eq!(run.report.bamboo_max(1), &ratio(120, 73));
        let stages = reduce_max_stages(&r, &run.schedule).unwrap();
        assert_eq!(stages.stage_ends, [60, 120, 180]);
        assert!(stages.uncut_after_stage3 >= 3);
        assert_eq!(stages.next_cuts, vec![72, 73, 74, 1]);
        assert_eq!(stages.b1_height_after, ratio(120, 73));
    }

    #[test]
    fn reduce_fastest_regimes() {
        let r = gen_reduce_fastest_lb(&ratio(1, 2), &ratio(1, 8)).unwrap();
        assert_eq!(r.rates(), &[ratio(1, 2), ratio(1, 8)]);
        let run = reduce_fastest(&r, &ratio(1, 2), 200).unwrap();
        assert_eq!(diverging(&r, &run.schedule), vec![2]);

        let r = gen_reduce_fastest_lb(&ratio(3, 2), &ratio(1, 8)).unwrap();
        assert_eq!(r.rates(), &[ratio(5, 8), ratio(1, 8)]);
        let run = reduce_fastest_with_threshold(&r, &ratio(3, 2), 60);
        assert_eq!(run.report.bamboo_max(1), &ratio(15, 8));

        let r = gen_reduce_fastest_lb(&int(2), &ratio(1, 4)).unwrap();
        assert_eq!(r.rates(), &[ratio(3, 4), ratio(1, 4)]);
        assert!(gen_reduce_fastest_lb(&ratio(1, 2), &ratio(1, 2)).is_err());
        assert!(gen_reduce_fastest_lb(&ratio(3, 2), &ratio(3, 4)).is_err());
        assert!(gen_reduce_fastest_lb(&int(3), &ratio(1, 2)).is_err());
    }

    #[test]
    fn reduce_fastest_trace_for_half() {
        // x H = 3/8: bamboo 1 is tall from round 1 on, so bamboo 2 is cut
        // only right after bamboo 1 was.
        let r = RateVector::from_pairs(&[(1, 2), (1, 4)]).unwrap();
        let run = reduce_fastest(&r, &ratio(1, 2), 8).unwrap();
        assert_eq!(run.schedule, vec![1, 1, 1, 1, 1, 1, 1, 1]);
        assert_eq!(diverging(&r, &run.schedule), Vec::<usize>::new());
        let run = reduce_fastest(&r, &ratio(1, 2), 40).unwrap();
        assert_eq!(diverging(&r, &run.schedule), vec![2]);
    }

    #[test]
    fn reduce_fastest_never_cuts_short_bamboos() {
        let r = RateVector::from_pairs(&[(2, 5), (1, 5), (1, 5), (1, 10), (1, 10)]).unwrap();
        let x = ratio(3, 4);
        let run = reduce_fastest(&r, &x, 300).unwrap();
        let threshold = &x * r.total();
        let mut age = vec![0u64; r.len()];
        for &cut in &run.schedule {
            for a in age.iter_mut() {
                *a += 1;
            }
            if cut != 0 {
                assert!(r.rate(cut) * int(age[cut - 1]) >= threshold);
                age[cut - 1] = 0;
            }
        }
    }
}
