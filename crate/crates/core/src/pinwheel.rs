//! Pinwheel frequencies, powers-of-two schedules and the Main Algorithm.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rates::RateVector;
use crate::rational::{self, floor_log2, int, sqrt_upper, Frac, Rational};
use crate::schedule::{Residue, ResidueSchedule};

/// Bits of precision in the rational upper bound on `3 sqrt(h_1 / H)`.
pub const DELTA_BITS: u32 = 31;

/// `sum 1 / f_i`, exact.
pub fn density(freqs: &[u64]) -> Rational {
    let mut counts: HashMap<u64, u64> = HashMap::new();
    for &f in freqs {
        *counts.entry(f).or_default() += 1;
    }
    let mut keys: Vec<_> = counts.into_iter().collect();
    keys.sort_unstable();
    keys.into_iter()
        .fold(Rational::zero(), |acc, (f, c)| acc + Rational::new(c.into(), f.into()))
}

/// Assigns every power-of-two frequency a residue class by buddy splitting,
/// in increasing order of frequency. Output order follows the input.
pub fn schedule_powers_of_two(freqs: &[u64]) -> Result<ResidueSchedule> {
    if freqs.is_empty() {
        return Err(Error::EmptySchedule);
    }
    if let Some(&f) = freqs.iter().find(|f| !f.is_power_of_two()) {
        return Err(Error::NotPowerOfTwo(f));
    }
    let d = density(freqs);
    if d > Rational::one() {
        return Err(Error::DensityExceeded(rational::format(&d)));
    }
    let residues = allocate_dyadic(freqs);
    ResidueSchedule::new(residues)
}

/// Buddy allocation over residue classes. Caller guarantees powers of two
/// with density at most 1.
fn allocate_dyadic(freqs: &[u64]) -> Vec<Residue> {
    let mut order: Vec<usize> = (0..freqs.len()).collect();
    order.sort_by_key(|&i| freqs[i]);
    // Free classes `r mod m`; the most recently split one is on top.
    let mut free: Vec<(u64, u64)> = vec![(0, 1)];
    let mut out = vec![Residue::new(0, 0); freqs.len()];
    for i in order {
        let g = freqs[i];
        let (r, mut m) = free.pop().expect("density at most 1 leaves a free class");
        while m < g {
            free.push((r + m, 2 * m));
            m *= 2;
        }
        debug_assert_eq!(m, g);
        out[i] = Residue::new(r + 1, g);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerOfTwoSchedule {
    pub freqs: Vec<u64>,
    pub schedule: ResidueSchedule,
}

/// `f_i` = the largest power of two `<= 2H / h_i`; heights stay `<= 2H`.
pub fn two_approx(rates: &RateVector) -> Result<PowerOfTwoSchedule> {
    let two_h = rates.total() * int(2);
    let freqs = rates
        .rates()
        .iter()
        .map(|h| {
            let k = floor_log2(&(&two_h / h));
            u32::try_from(k)
                .ok()
                .and_then(|k| 1u64.checked_shl(k))
                .ok_or(Error::FrequencyOverflow)
        })
        .collect::<Result<Vec<u64>>>()?;
    let schedule = schedule_powers_of_two(&freqs)?;
    Ok(PowerOfTwoSchedule { freqs, schedule })
}

/// Frequencies `floor((1 + d) H / h_i)` with `d = 1/3 + h_1/H`; their
/// density is below 3/4. No schedule is built.
pub fn density_34_frequencies(rates: &RateVector) -> Result<Vec<u64>> {
    let h = rates.total();
    let delta = rational::ratio(1, 3) + rates.max() / h;
    let scale = (Rational::one() + delta) * h;
    let mut freqs = Vec::with_capacity(rates.len());
    for (i, r) in rates.rates().iter().enumerate() {
        let f = rational::floor_int(&(&scale / r));
        if f < BigInt::from(2) {
            return Err(Error::InvalidParameter(format!(
                "frequency of bamboo {} is below 2",
                i + 1
            )));
        }
        freqs.push(f.to_u64().ok_or(Error::FrequencyOverflow)?);
    }
    let d = density(&freqs);
    if d >= rational::ratio(3, 4) {
        return Err(Error::DensityExceeded(rational::format(&d)));
    }
    Ok(freqs)
}

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    /// An original bamboo (1-based).
    Leaf(usize),
    /// Two children of frequency `2f` merged into `f`.
    Pair([NodeId; 2]),
    /// `m` ordered children of frequency `m f` merged into `f`.
    Combine(Vec<NodeId>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeKind,
    /// Current frequency; leaves start at their grid frequency and may be
    /// lowered by push-downs.
    pub freq: u64,
}

/// Merge counters and the density checks run at every merge.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MergeStats {
    pub pairs: usize,
    pub combines: usize,
    pub pushes: usize,
    /// Merges whose exact density before and after agreed.
    pub density_checks: usize,
}

/// Grid-organised frequency multiset with its expansion forest. Entries
/// live in groups `(k, j)` of frequency `2^k (1 + j/C)`; power-of-two
/// entries are final roots.
#[derive(Debug, Clone)]
pub struct FrequencyMultiset {
    pub min: u32,
    pub q: u32,
    nodes: Vec<Node>,
    groups: BTreeMap<(u32, u64), Vec<NodeId>>,
    roots: Vec<NodeId>,
    pub stats: MergeStats,
}

impl FrequencyMultiset {
    /// Empty multiset over layers `>= min` with `C = 2^floor(min/2)`.
    pub fn new(min: u32) -> Self {
        FrequencyMultiset {
            min,
            q: min / 2,
            nodes: Vec::new(),
            groups: BTreeMap::new(),
            roots: Vec::new(),
            stats: MergeStats::default(),
        }
    }

    pub fn c(&self) -> u64 {
        1 << self.q
    }

    /// `2^k (1 + j/C)`, or `None` on overflow.
    pub fn grid_value(&self, k: u32, j: u64) -> Option<u64> {
        let base = 1u64.checked_shl(k)?;
        if base >> k != 1 {
            return None;
        }
        base.checked_add(j.checked_mul(base >> self.q)?)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    /// Adds bamboo `index` at grid point `(k, j)`.
    pub fn add_leaf(&mut self, index: usize, k: u32, j: u64) -> Result<NodeId> {
        if k < self.min || j >= self.c() {
            return Err(Error::Internal(format!("({k}, {j}) is off the grid")));
        }
        let freq = self.grid_value(k, j).ok_or(Error::FrequencyOverflow)?;
        let id = self.push_node(NodeKind::Leaf(index), freq);
        self.place(id, k, j);
        Ok(id)
    }

    fn push_node(&mut self, kind: NodeKind, freq: u64) -> NodeId {
        self.nodes.push(Node { kind, freq });
        self.nodes.len() - 1
    }

    fn place(&mut self, id: NodeId, k: u32, j: u64) {
        if j == 0 {
            self.roots.push(id);
        } else {
            self.groups.entry((k, j)).or_default().push(id);
        }
    }

    pub fn group_len(&self, k: u32, j: u64) -> usize {
        self.groups.get(&(k, j)).map_or(0, Vec::len)
    }

    /// Every frequency currently in the multiset (grouped and final).
    pub fn frequencies(&self) -> Vec<u64> {
        self.roots
            .iter()
            .chain(self.groups.values().flatten())
            .map(|&id| self.nodes[id].freq)
            .collect()
    }

    pub fn density(&self) -> Rational {
        density(&self.frequencies())
    }

    /// Observation 1: two entries of `(k, j)` become one entry of
    /// `(k - 1, j)`.
    pub fn observation1_merge(&mut self, k: u32, j: u64) -> Result<NodeId> {
        if k <= self.min {
            return Err(Error::InvalidParameter(format!(
                "pair result of layer {k} would leave the grid"
            )));
        }
        let found = self.group_len(k, j);
        if found < 2 {
            return Err(Error::InsufficientEntries { needed: 2, found });
        }
        let group = self.groups.get_mut(&(k, j)).expect("nonempty");
        let b = group.pop().expect("len >= 2");
        let a = group.pop().expect("len >= 2");
        if group.is_empty() {
            self.groups.remove(&(k, j));
        }
        let child = self.nodes[a].freq;
        let freq = self.grid_value(k - 1, j).ok_or(Error::FrequencyOverflow)?;
        // 1/(2F) + 1/(2F) == 1/F
        if child != 2 * freq || self.nodes[b].freq != child {
            return Err(Error::Internal(format!("pair of {child} does not give {freq}")));
        }
        self.stats.density_checks += 1;
        self.stats.pairs += 1;
        let id = self.push_node(NodeKind::Pair([a, b]), freq);
        self.place(id, k - 1, j);
        Ok(id)
    }

    /// Observation 2: `C + j` entries of `(min, j)` become one final entry
    /// of frequency `2^min / C`.
    pub fn observation2_merge(&mut self, j: u64) -> Result<NodeId> {
        let k = self.min;
        let m = (self.c() + j) as usize;
        let found = self.group_len(k, j);
        if j == 0 || found < m {
            return Err(Error::InsufficientEntries { needed: m, found });
        }
        let group = self.groups.get_mut(&(k, j)).expect("nonempty");
        let children = group.split_off(found - m);
        if group.is_empty() {
            self.groups.remove(&(k, j));
        }
        let child = self.nodes[children[0]].freq;
        let freq = 1u64 << (k - self.q);
        // m * 1/(m F) == 1/F
        if child != m as u64 * freq || children.iter().any(|&c| self.nodes[c].freq != child) {
            return Err(Error::Internal(format!("combine of {m} x {child} does not give {freq}")));
        }
        self.stats.density_checks += 1;
        self.stats.combines += 1;
        let id = self.push_node(NodeKind::Combine(children), freq);
        self.roots.push(id);
        Ok(id)
    }

    /// Moves `count` entries of `(k, j)` down to `(k, target)`, lowering their
    /// frequency. `target == 0` makes them final powers of two.
    fn push_down(&mut self, k: u32, j: u64, count: usize, target: u64) -> Result<()> {
        let group = self.groups.get_mut(&(k, j)).expect("nonempty");
        let moved = group.split_off(group.len() - count);
        if group.is_empty() {
            self.groups.remove(&(k, j));
        }
        let freq = self.grid_value(k, target).ok_or(Error::FrequencyOverflow)?;
        for id in moved {
            self.nodes[id].freq = freq;
            self.stats.pushes += 1;
            self.place(id, k, target);
        }
        Ok(())
    }

    /// Highest non-empty group of layer `k` strictly below group `j`.
    fn next_lower_group(&self, k: u32, j: u64) -> Option<u64> {
        self.groups
            .range((k, 1)..(k, j))
            .next_back()
            .map(|(&(_, g), _)| g)
    }

    /// Step 3: pair equal frequencies in every layer above `min`.
    pub fn pair_upper_layers(&mut self) -> Result<()> {
        let mut cursor = self.groups.keys().next_back().copied();
        while let Some((k, j)) = cursor {
            if k <= self.min {
                break;
            }
            while self.group_len(k, j) >= 2 {
                self.observation1_merge(k, j)?;
            }
            cursor = self.groups.range(..(k, j)).next_back().map(|(&key, _)| key);
        }
        Ok(())
    }

    /// Step 4: combine bundles of `C + j` in layer `min`.
    pub fn combine_bottom_layer(&mut self) -> Result<()> {
        let keys: Vec<u64> = self
            .groups
            .range((self.min, 0)..(self.min + 1, 0))
            .map(|(&(_, j), _)| j)
            .collect();
        for j in keys.into_iter().rev() {
            while self.group_len(self.min, j) as u64 >= self.c() + j {
                self.observation2_merge(j)?;
            }
        }
        Ok(())
    }

    /// Step 5: walk groups downward, merging where possible and pushing the
    /// rest to the next non-empty lower group of the same layer.
    pub fn push_down_all(&mut self) -> Result<()> {
        while let Some(&(k, j)) = self.groups.keys().next_back() {
            if k > self.min {
                while self.group_len(k, j) >= 2 {
                    self.observation1_merge(k, j)?;
                }
                if self.group_len(k, j) == 1 {
                    let target = self.next_lower_group(k, j).unwrap_or(0);
                    self.push_down(k, j, 1, target)?;
                }
            } else {
                let c = self.c();
                while self.group_len(k, j) as u64 >= c + j {
                    self.observation2_merge(j)?;
                }
                let r = self.group_len(k, j) as u64;
                if r > 0 {
                    // Walking down one group at a time, the first group able
                    // to absorb r entries is r - C.
                    let bundle = r.saturating_sub(c);
                    let target = self.next_lower_group(k, j).unwrap_or(0).max(bundle);
                    self.push_down(k, j, r as usize, target)?;
                }
            }
        }
        Ok(())
    }

    /// Residue class of every leaf, given root residues.
    pub fn expand(&self, root_residues: &[(NodeId, Residue)], n: usize) -> Result<Vec<Residue>> {
        let mut out: Vec<Option<Residue>> = vec![None; n];
        let mut stack: Vec<(NodeId, u64, u64)> =
            root_residues.iter().map(|&(id, r)| (id, r.offset, r.period)).collect();
        while let Some((id, p, q)) = stack.pop() {
            match &self.nodes[id].kind {
                NodeKind::Leaf(i) => out[i - 1] = Some(Residue::new(p, q)),
                NodeKind::Pair([a, b]) => {
                    let q2 = q.checked_mul(2).ok_or(Error::FrequencyOverflow)?;
                    stack.push((*a, p, q2));
                    stack.push((*b, p + q, q2));
                }
                NodeKind::Combine(children) => {
                    let m = children.len() as u64;
                    let qm = q.checked_mul(m).ok_or(Error::FrequencyOverflow)?;
                    for (t, &c) in children.iter().enumerate() {
                        stack.push((c, p + t as u64 * q, qm));
                    }
                }
            }
        }
        out.into_iter()
            .enumerate()
            .map(|(i, r)| r.ok_or(Error::Internal(format!("bamboo {} has no leaf", i + 1))))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MainDiagnostics {
    pub delta: Frac,
    pub c: u64,
    pub min: u32,
    pub max: u32,
    /// `2^min / C^2`, either 1 or 2.
    pub k_factor: u64,
    pub step2_density: Frac,
    pub step2_density_limit: Frac,
    pub merged_density: Frac,
    pub final_density: Frac,
    /// `(1 + delta) H`.
    pub bound: Frac,
    pub roots: usize,
    pub stats: MergeStats,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MainOutput {
    pub schedule: ResidueSchedule,
    /// Step-2 grid frequencies per bamboo.
    pub freqs: Vec<u64>,
    pub diagnostics: MainDiagnostics,
}

/// Rational `delta* >= 3 sqrt(h_1 / H)`, within a relative `2^-31`.
pub fn delta_star(rates: &RateVector) -> Rational {
    let ratio = rates.max() / rates.total();
    int(3) * sqrt_upper(&ratio, DELTA_BITS)
}

/// The Main Algorithm: a collision-free residue schedule with
/// `h_i q_i <= (1 + delta*) H` for every bamboo.
pub fn main_algorithm(rates: &RateVector) -> Result<MainOutput> {
    let h = rates.total();
    let delta = delta_star(rates);
    let scale = (Rational::one() + &delta) * h;
    let bound = scale.clone();
    let n = rates.len();

    if n == 1 {
        let schedule = ResidueSchedule::from_pairs(&[(1, 1)])?;
        let one = Frac(Rational::one());
        return Ok(MainOutput {
            schedule,
            freqs: vec![1],
            diagnostics: MainDiagnostics {
                delta: Frac(delta),
                c: 1,
                min: 0,
                max: 0,
                k_factor: 1,
                step2_density: one.clone(),
                step2_density_limit: one.clone(),
                merged_density: one.clone(),
                final_density: one,
                bound: Frac(bound),
                roots: 1,
                stats: MergeStats::default(),
            },
        });
    }

    // f''_i = N_i / D_i with N_i = A.num * h.den and D_i = A.den * h.num.
    let grid: Vec<(u32, BigInt, BigInt)> = rates
        .rates()
        .iter()
        .map(|r| {
            let num = scale.numer() * r.denom();
            let den = scale.denom() * r.numer();
            let k = rational::floor_log2_ratio(&num, &den);
            (k as u32, num, den)
        })
        .collect();
    let min = grid[0].0;
    let max = grid[n - 1].0;
    if min < 2 {
        return Err(Error::Internal(format!("layer min = {min} is below 2")));
    }
    let mut ms = FrequencyMultiset::new(min);
    let c = ms.c();
    let mut freqs = Vec::with_capacity(n);
    for (i, (k, num, den)) in grid.iter().enumerate() {
        // j = floor(f'' C / 2^k) - C
        let scaled: BigInt = (num << ms.q as usize) / (den << *k as usize);
        let j = scaled.to_u64().ok_or(Error::FrequencyOverflow)? - c;
        let id = ms.add_leaf(i + 1, *k, j)?;
        freqs.push(ms.nodes[id].freq);
    }

    let step2 = density(&freqs);
    let limit = (Rational::one() + Rational::new(1.into(), c.into())) / (Rational::one() + &delta);
    if step2 >= limit {
        return Err(Error::Internal(format!(
            "step-2 density {} not below {}",
            rational::format(&step2),
            rational::format(&limit)
        )));
    }

    ms.pair_upper_layers()?;
    ms.combine_bottom_layer()?;
    let merged = ms.density();
    if merged != step2 {
        return Err(Error::Internal("merges changed the density".into()));
    }
    ms.push_down_all()?;

    let root_freqs: Vec<u64> = ms.roots.iter().map(|&id| ms.nodes[id].freq).collect();
    let final_density = density(&root_freqs);
    if final_density > Rational::one() {
        return Err(Error::DensityExceeded(rational::format(&final_density)));
    }
    let root_res = allocate_dyadic(&root_freqs);
    let pairs: Vec<(NodeId, Residue)> = ms.roots.iter().copied().zip(root_res).collect();
    let residues = ms.expand(&pairs, n)?;
    let schedule = ResidueSchedule::new(residues)?;

    let diagnostics = MainDiagnostics {
        delta: Frac(delta),
        c,
        min,
        max,
        k_factor: (1u64 << min) / (c * c),
        step2_density: Frac(step2),
        step2_density_limit: Frac(limit),
        merged_density: Frac(merged),
        final_density: Frac(final_density),
        bound: Frac(bound),
        roots: ms.roots.len(),
        stats: ms.stats.clone(),
    };
    Ok(MainOutput {
        schedule,
        freqs,
        diagnostics,
    })
}

/// Pinwheel scheduling through the Main Algorithm on rates `1/f_i`.
/// Residues come back in input order; fails if any gap exceeds its frequency.
pub fn pinwheel_via_main(freqs: &[u64]) -> Result<ResidueSchedule> {
    if freqs.is_empty() {
        return Err(Error::EmptyRates);
    }
    if let Some(i) = freqs.iter().position(|&f| f == 0) {
        return Err(Error::NonPositiveRate { index: i + 1 });
    }
    let rates: Vec<Rational> = freqs.iter().map(|&f| Rational::one() / int(f)).collect();
    let (rv, order) = RateVector::from_unsorted(rates)?;
    let out = main_algorithm(&rv)?;
    let mut residues = vec![Residue::new(1, 1); freqs.len()];
    for (k, r) in out.schedule.residues().iter().enumerate() {
        let i = order[k];
        if r.offset.max(r.period) > freqs[i] {
            return Err(Error::DensityExceeded(format!(
                "bamboo {} gets gap {} above its frequency {}",
                i + 1,
                r.offset.max(r.period),
                freqs[i]
            )));
        }
        residues[i] = *r;
    }
    ResidueSchedule::new(residues)
}

/// Round-by-round cuts of a residue schedule, `0` on idle rounds, using a
/// heap keyed by the next cut round.
#[derive(Debug, Clone)]
pub struct CutStream {
    heap: BinaryHeap<Reverse<(u64, usize)>>,
    periods: Vec<u64>,
    round: u64,
}

pub fn next_cuts_stream(schedule: &ResidueSchedule) -> CutStream {
    let heap = schedule
        .residues()
        .iter()
        .enumerate()
        .map(|(i, r)| Reverse((r.offset, i + 1)))
        .collect();
    CutStream {
        heap,
        periods: schedule.residues().iter().map(|r| r.period).collect(),
        round: 0,
    }
}

impl Iterator for CutStream {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        self.round += 1;
        let &Reverse((t, i)) = self.heap.peek()?;
        if t != self.round {
            return Some(0);
        }
        self.heap.pop();
        self.heap.push(Reverse((t + self.periods[i - 1], i)));
        Some(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::schedule::{CyclicSchedule, DEFAULT_EXPANSION_CAP};
    use crate::sim::{evaluate_cyclic, simulate_discrete, SimOptions};

    fn rv(p: &[(i64, i64)]) -> RateVector {
        RateVector::from_pairs(p).unwrap()
    }

    #[test]
    fn density_values() {
        assert_eq!(density(&[2, 4, 4]), int(1));
        assert_eq!(density(&[2, 3, 100]), ratio(253, 300));
        assert_eq!(density(&[7]), ratio(1, 7));
    }

    #[test]
    fn powers_of_two_allocation() {
        let s = schedule_powers_of_two(&[2, 2]).unwrap();
        assert_eq!(s, ResidueSchedule::from_pairs(&[(1, 2), (2, 2)]).unwrap());
        let s = schedule_powers_of_two(&[2, 4, 4]).unwrap();
        assert_eq!(s, ResidueSchedule::from_pairs(&[(1, 2), (2, 4), (4, 4)]).unwrap());
        let s = schedule_powers_of_two(&[4, 4, 16, 16]).unwrap();
        assert!(s.validate(16).is_ok());
        assert_eq!(schedule_powers_of_two(&[2, 6]), Err(Error::NotPowerOfTwo(6)));
        assert!(matches!(schedule_powers_of_two(&[2, 2, 4]), Err(Error::DensityExceeded(_))));
    }

    #[test]
    fn two_approx_examples() {
        let r = rv(&[(1, 2), (1, 4), (1, 4)]);
        let t = two_approx(&r).unwrap();
        assert_eq!(t.freqs, vec![4, 8, 8]);
        let rep = evaluate_cyclic(&r, &CyclicSchedule::Residue(t.schedule)).unwrap();
        assert_eq!(rep.global_max(), &int(2));

        let r = rv(&[(7, 15), (1, 3), (1, 5)]);
        let t = two_approx(&r).unwrap();
        assert_eq!(t.freqs, vec![4, 4, 8]);
        let rep = evaluate_cyclic(&r, &CyclicSchedule::Residue(t.schedule)).unwrap();
        assert_eq!(rep.global_max(), &ratio(28, 15));

        assert_eq!(two_approx(&rv(&[(1, 1)])).unwrap().freqs, vec![2]);
    }

    #[test]
    fn density_34_examples() {
        assert_eq!(density_34_frequencies(&rv(&[(1, 2), (1, 4), (1, 4)])).unwrap(), vec![3, 7, 7]);
        let r = RateVector::uniform(4, ratio(1, 4)).unwrap();
        assert_eq!(density_34_frequencies(&r).unwrap(), vec![6; 4]);
    }

    #[test]
    fn observation_merges() {
        // min = 4, C = 4: group j = 3 of layer 5 holds 28.
        let mut ms = FrequencyMultiset::new(4);
        ms.add_leaf(1, 4, 3).unwrap();
        assert_eq!(ms.nodes()[0].freq, 28);
        assert_eq!(
            ms.observation1_merge(5, 3),
            Err(Error::InsufficientEntries { needed: 2, found: 0 })
        );
        let mut ms = FrequencyMultiset::new(4);
        for i in 1..=2 {
            ms.add_leaf(i, 5, 3).unwrap();
        }
        let before = ms.density();
        let id = ms.observation1_merge(5, 3).unwrap();
        assert_eq!(ms.nodes()[id].freq, 28);
        assert_eq!(ms.density(), before);

        let mut ms = FrequencyMultiset::new(4);
        for i in 1..=7 {
            ms.add_leaf(i, 4, 3).unwrap();
        }
        let before = ms.density();
        let id = ms.observation2_merge(3).unwrap();
        assert_eq!(ms.nodes()[id].freq, 4);
        assert_eq!(ms.density(), before);

        let mut ms = FrequencyMultiset::new(2);
        for i in 1..=3 {
            ms.add_leaf(i, 2, 1).unwrap();
        }
        let id = ms.observation2_merge(1).unwrap();
        assert_eq!(ms.nodes()[id].freq, 2);
    }

    #[test]
    fn main_algorithm_uniform_16() {
        let r = RateVector::uniform(16, ratio(1, 16)).unwrap();
        let out = main_algorithm(&r).unwrap();
        assert_eq!(out.diagnostics.delta.0, ratio(3, 4));
        assert_eq!((out.diagnostics.min, out.diagnostics.c), (4, 4));
        assert_eq!(out.freqs, vec![28; 16]);
        assert_eq!(out.diagnostics.final_density.0, ratio(5, 8));
        let mut periods: Vec<u64> = out.schedule.residues().iter().map(|r| r.period).collect();
        periods.sort();
        periods.dedup();
        assert_eq!(periods, vec![16, 28]);
        let sched = CyclicSchedule::Residue(out.schedule.clone());
        let rep = evaluate_cyclic(&r, &sched).unwrap();
        assert_eq!(rep.global_max(), &ratio(7, 4));
        let hyper = out.schedule.hyperperiod().unwrap() as usize;
        let prefix: Vec<usize> = next_cuts_stream(&out.schedule).take(3 * hyper).collect();
        let sim = simulate_discrete(&r, &prefix, SimOptions { count_tail: false }).unwrap();
        assert_eq!(sim.global_max(), &ratio(7, 4));
    }

    #[test]
    fn main_algorithm_two_halves() {
        let r = rv(&[(1, 2), (1, 2)]);
        let out = main_algorithm(&r).unwrap();
        assert_eq!((out.diagnostics.min, out.diagnostics.c), (2, 2));
        assert_eq!(out.freqs, vec![6, 6]);
        let rep = evaluate_cyclic(&r, &CyclicSchedule::Residue(out.schedule.clone())).unwrap();
        assert_eq!(rep.global_max(), &int(2));
        assert!(out.schedule.residues().iter().all(|r| r.period == 4));
    }

    #[test]
    fn main_algorithm_single_bamboo() {
        let out = main_algorithm(&rv(&[(2, 3)])).unwrap();
        assert_eq!(out.schedule, ResidueSchedule::from_pairs(&[(1, 1)]).unwrap());
    }

    #[test]
    fn main_algorithm_mixed_rates_respect_bound() {
        let r = rv(&[(1, 5), (1, 7), (1, 9), (1, 11), (1, 13), (1, 20), (1, 20), (1, 40)]);
        let out = main_algorithm(&r).unwrap();
        out.schedule.validate(DEFAULT_EXPANSION_CAP).unwrap();
        let rep = evaluate_cyclic(&r, &CyclicSchedule::Residue(out.schedule.clone())).unwrap();
        assert!(rep.global_max() <= &out.diagnostics.bound.0);
        for (res, f) in out.schedule.residues().iter().zip(&out.freqs) {
            assert!(res.period <= *f);
        }
    }

    #[test]
    fn cut_stream_examples() {
        let s = ResidueSchedule::from_pairs(&[(1, 2), (2, 2)]).unwrap();
        assert_eq!(next_cuts_stream(&s).take(4).collect::<Vec<_>>(), vec![1, 2, 1, 2]);
        let s = ResidueSchedule::from_pairs(&[(1, 2), (2, 4), (4, 4)]).unwrap();
        assert_eq!(
            next_cuts_stream(&s).take(8).collect::<Vec<_>>(),
            vec![1, 2, 1, 3, 1, 2, 1, 3]
        );
        let s = ResidueSchedule::from_pairs(&[(2, 4)]).unwrap();
        assert_eq!(next_cuts_stream(&s).take(6).collect::<Vec<_>>(), vec![0, 1, 0, 0, 0, 1]);
    }
}
