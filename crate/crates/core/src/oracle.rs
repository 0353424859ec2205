//! Exact optima for tiny instances by searching the configuration graph.
//!
//! A configuration is the vector of ages (rounds since the last cut) right
//! after a cut. Cutting `j` is allowed only if every bamboo, after growing
//! one more round, stays within its age limit. An infinite schedule exists
//! iff the initial all-zero configuration survives repeated removal of
//! configurations with no outgoing edge.

use std::collections::HashMap;
use std::collections::VecDeque;

use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::rates::RateVector;
use crate::rational::{floor_int, Rational};
use crate::schedule::{CyclicSchedule, ListSchedule};

pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

/// Reachable configuration graph after dead-end pruning.
struct Pruned {
    states: Vec<Box<[u32]>>,
    /// `edges[s]` lists `(cut, target)` in increasing cut order.
    edges: Vec<Vec<(usize, u32)>>,
    alive: Vec<bool>,
}

impl Pruned {
    fn initial_alive(&self) -> bool {
        self.alive[0]
    }

    /// Follows the lowest-index surviving edge from the initial state until a
    /// configuration repeats.
    fn witness(&self) -> ListSchedule {
        let mut seen: HashMap<u32, usize> = HashMap::new();
        let mut cuts = Vec::new();
        let mut s = 0u32;
        loop {
            if let Some(&pos) = seen.get(&s) {
                let period = cuts.split_off(pos);
                return ListSchedule::new(cuts, period);
            }
            seen.insert(s, cuts.len());
            let &(cut, next) = self.edges[s as usize]
                .iter()
                .find(|(_, t)| self.alive[*t as usize])
                .expect("surviving state has a surviving successor");
            cuts.push(cut);
            s = next;
        }
    }
}

/// Explores all configurations in which bamboo `i` never reaches an age
/// above `limits[i]`, then prunes dead ends.
fn explore(limits: &[u32], budget: usize) -> Result<Pruned> {
    let n = limits.len();
    let initial: Box<[u32]> = vec![0; n].into_boxed_slice();
    if limits.iter().any(|&l| l == 0) {
        return Ok(Pruned {
            states: vec![initial],
            edges: vec![Vec::new()],
            alive: vec![false],
        });
    }
    let mut index: HashMap<Box<[u32]>, u32> = HashMap::new();
    let mut states = vec![initial.clone()];
    let mut edges: Vec<Vec<(usize, u32)>> = Vec::new();
    index.insert(initial, 0);
    let mut next = 0usize;
    while next < states.len() {
        let ages = states[next].clone();
        let mut out = Vec::new();
        if ages.iter().zip(limits).all(|(&a, &l)| a < l) {
            for j in 0..n {
                let mut succ: Box<[u32]> = ages.iter().map(|a| a + 1).collect();
                succ[j] = 0;
                let id = match index.get(&succ) {
                    Some(&id) => id,
                    None => {
                        if states.len() >= budget {
                            return Err(Error::BudgetExceeded { budget });
                        }
                        let id = states.len() as u32;
                        index.insert(succ.clone(), id);
                        states.push(succ);
                        id
                    }
                };
                out.push((j + 1, id));
            }
        }
        edges.push(out);
        next += 1;
    }

    let mut out_degree: Vec<usize> = edges.iter().map(Vec::len).collect();
    let mut preds: Vec<Vec<u32>> = vec![Vec::new(); states.len()];
    for (s, out) in edges.iter().enumerate() {
        for &(_, t) in out {
            preds[t as usize].push(s as u32);
        }
    }
    let mut alive = vec![true; states.len()];
    let mut queue: VecDeque<usize> = (0..states.len()).filter(|&s| out_degree[s] == 0).collect();
    while let Some(s) = queue.pop_front() {
        if !alive[s] {
            continue;
        }
        alive[s] = false;
        for &p in &preds[s] {
            let p = p as usize;
            out_degree[p] -= 1;
            if out_degree[p] == 0 && alive[p] {
                queue.push_back(p);
            }
        }
    }
    Ok(Pruned {
        states,
        edges,
        alive,
    })
}

/// Largest age bamboo `i` may reach while staying `<= cap`.
fn age_limits(rates: &RateVector, cap: &Rational) -> Vec<u32> {
    rates
        .rates()
        .iter()
        .map(|h| {
            let l = floor_int(&(cap / h));
            if l.is_negative() {
                0
            } else {
                l.to_u32().unwrap_or(u32::MAX)
            }
        })
        .collect()
}

/// Whether some perpetual schedule keeps every height `<= cap`.
pub fn feasible_under_cap(rates: &RateVector, cap: &Rational, state_budget: usize) -> Result<bool> {
    Ok(explore(&age_limits(rates, cap), state_budget)?.initial_alive())
}

/// Like [`feasible_under_cap`], returning a witness schedule when feasible.
pub fn witness_under_cap(
    rates: &RateVector,
    cap: &Rational,
    state_budget: usize,
) -> Result<Option<ListSchedule>> {
    let g = explore(&age_limits(rates, cap), state_budget)?;
    Ok(g.initial_alive().then(|| g.witness()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Optimum {
    pub height: Rational,
    pub schedule: CyclicSchedule,
    /// Configurations explored by the final feasibility check.
    pub states: usize,
}

/// Sorted, deduplicated candidate heights `k * h_i >= H` with
/// `k <= ceil(2H / h_i) + 1`.
pub fn candidate_heights(rates: &RateVector) -> Vec<Rational> {
    let total = rates.total();
    let two_h = total * Rational::from_integer(2.into());
    let mut out = Vec::new();
    for h in rates.rates() {
        let kmax = crate::rational::ceil_int(&(&two_h / h)).to_u64().unwrap_or(u64::MAX) + 1;
        let kmin = crate::rational::ceil_int(&(total / h)).to_u64().unwrap_or(1).max(1);
        for k in kmin..=kmax {
            out.push(h * Rational::from_integer(k.into()));
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Exact `OPT` by binary search over [`candidate_heights`].
pub fn optimal_height(rates: &RateVector, state_budget: usize) -> Result<Optimum> {
    let candidates = candidate_heights(rates);
    let (mut lo, mut hi) = (0usize, candidates.len());
    // Invariant: candidates[..lo] infeasible, candidates[hi..] feasible.
    let mut best: Option<(ListSchedule, usize)> = None;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let g = explore(&age_limits(rates, &candidates[mid]), state_budget)?;
        if g.initial_alive() {
            best = Some((g.witness(), g.states.len()));
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    match (best, candidates.get(lo)) {
        (Some((schedule, states)), Some(height)) => Ok(Optimum {
            height: height.clone(),
            schedule: CyclicSchedule::List(schedule),
            states,
        }),
        _ => Err(Error::Internal("no candidate height is feasible".into())),
    }
}

/// Pinwheel feasibility: does some sequence contain `i` in every window of
/// `freqs[i]` consecutive slots?
pub fn pinwheel_feasible(freqs: &[u64], state_budget: usize) -> Result<bool> {
    Ok(pinwheel_witness(freqs, state_budget)?.is_some())
}

pub fn pinwheel_witness(freqs: &[u64], state_budget: usize) -> Result<Option<ListSchedule>> {
    if freqs.is_empty() {
        return Err(Error::EmptyRates);
    }
    if let Some(i) = freqs.iter().position(|&f| f == 0) {
        return Err(Error::NonPositiveRate { index: i + 1 });
    }
    let limits: Vec<u32> = freqs.iter().map(|&f| u32::try_from(f).unwrap_or(u32::MAX)).collect();
    let g = explore(&limits, state_budget)?;
    Ok(g.initial_alive().then(|| g.witness()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::sim::evaluate_cyclic;

    fn rv(p: &[(i64, i64)]) -> RateVector {
        RateVector::from_pairs(p).unwrap()
    }

    #[test]
    fn cap_feasibility_on_worked_instances() {
        let b = DEFAULT_STATE_BUDGET;
        assert!(feasible_under_cap(&rv(&[(1, 2), (1, 4), (1, 4)]), &int(1), b).unwrap());
        let r = rv(&[(7, 15), (1, 3), (1, 5)]);
        assert!(!feasible_under_cap(&r, &int(1), b).unwrap());
        assert!(feasible_under_cap(&r, &ratio(4, 3), b).unwrap());
    }

    #[test]
    fn optimal_heights_and_witnesses() {
        for (pairs, opt) in [
            (vec![(1, 2), (1, 4), (1, 4)], int(1)),
            (vec![(7, 15), (1, 3), (1, 5)], ratio(4, 3)),
            (vec![(3, 4), (1, 4)], ratio(3, 2)),
        ] {
            let r = rv(&pairs);
            let o = optimal_height(&r, DEFAULT_STATE_BUDGET).unwrap();
            assert_eq!(o.height, opt, "{pairs:?}");
            assert_eq!(evaluate_cyclic(&r, &o.schedule).unwrap().global_max(), &opt);
        }
    }

    #[test]
    fn pinwheel_examples() {
        let b = DEFAULT_STATE_BUDGET;
        assert!(pinwheel_feasible(&[2, 4, 4], b).unwrap());
        assert!(!pinwheel_feasible(&[2, 3, 100], b).unwrap());
        assert!(pinwheel_feasible(&[1], b).unwrap());
        assert!(!pinwheel_feasible(&[1, 5], b).unwrap());
        assert!(pinwheel_feasible(&[2, 3], b).unwrap());
    }

    #[test]
    fn budget_is_enforced() {
        let r = RateVector::uniform(6, ratio(1, 6)).unwrap();
        assert_eq!(
            feasible_under_cap(&r, &int(2), 10),
            Err(Error::BudgetExceeded { budget: 10 })
        );
    }

    #[test]
    fn cap_below_a_rate_is_infeasible() {
        assert!(!feasible_under_cap(&rv(&[(1, 2), (1, 2)]), &ratio(1, 4), 100).unwrap());
    }
}
