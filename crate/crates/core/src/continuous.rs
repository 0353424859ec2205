//! Continuous trimming: a robot walks a metric, cutting each point it passes.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pinwheel::{next_cuts_stream, two_approx};
use crate::rates::{InstanceFile, RateVector};
use crate::rational::{self, floor_log2, int, pow2, ratio, Frac, Rational};
use crate::sim::{Horizon, SimulationReport};

/// Points are numbered `1..=n` like the bamboos standing on them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricInstance {
    rates: RateVector,
    travel: Vec<Vec<Rational>>,
    start: usize,
    pub labels: Option<Vec<String>>,
}

impl MetricInstance {
    /// Validates the metric and normalizes the rates to `H = 1`.
    pub fn new(rates: RateVector, travel: Vec<Vec<Rational>>, start: usize) -> Result<Self> {
        let n = rates.len();
        if travel.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: travel.len(),
            });
        }
        if start == 0 || start > n {
            return Err(Error::IndexOutOfRange { index: start, n });
        }
        validate_metric(&travel)?;
        Ok(MetricInstance {
            rates: rates.normalized(),
            travel,
            start,
            labels: None,
        })
    }

    pub fn from_file(file: &InstanceFile) -> Result<Self> {
        let travel = file
            .travel
            .as_ref()
            .ok_or_else(|| Error::InvalidMetric("missing travel matrix".into()))?
            .iter()
            .map(|row| row.iter().map(|f| f.0.clone()).collect())
            .collect();
        MetricInstance::new(file.rate_vector()?, travel, file.start.unwrap_or(1))
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            rates: self.rates.rates().iter().cloned().map(Frac).collect(),
            travel: Some(
                self.travel
                    .iter()
                    .map(|row| row.iter().cloned().map(Frac).collect())
                    .collect(),
            ),
            start: Some(self.start),
        }
    }

    pub fn n(&self) -> usize {
        self.rates.len()
    }

    pub fn rates(&self) -> &RateVector {
        &self.rates
    }

    pub fn rate(&self, i: usize) -> &Rational {
        self.rates.rate(i)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    /// Travel time between points `i` and `j` (1-based).
    pub fn travel(&self, i: usize, j: usize) -> &Rational {
        &self.travel[i - 1][j - 1]
    }

    pub fn diameter(&self) -> Rational {
        self.travel
            .iter()
            .flat_map(|row| row.iter())
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Every travel time multiplied by `c`.
    pub fn scaled_travel(&self, c: &Rational) -> MetricInstance {
        MetricInstance {
            travel: self
                .travel
                .iter()
                .map(|row| row.iter().map(|t| t * c).collect())
                .collect(),
            ..self.clone()
        }
    }
}

fn validate_metric(travel: &[Vec<Rational>]) -> Result<()> {
    let n = travel.len();
    for (i, row) in travel.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidMetric(format!("row {} has {} entries, expected {n}", i + 1, row.len())));
        }
        for (j, t) in row.iter().enumerate() {
            if i == j && !t.is_zero() {
                return Err(Error::InvalidMetric(format!("t[{0}][{0}] is not zero", i + 1)));
            }
            if i != j && t <= &Rational::zero() {
                return Err(Error::InvalidMetric(format!("t[{}][{}] is not positive", i + 1, j + 1)));
            }
            if t != &travel[j][i] {
                return Err(Error::InvalidMetric(format!("t[{}][{}] is not symmetric", i + 1, j + 1)));
            }
        }
    }
    let violation = match scaled_u64(travel) {
        Some(m) => {
            let n = m.len();
            let mut found = None;
            'outer: for j in 0..n {
                for i in 0..n {
                    let a = m[i][j];
                    for k in 0..n {
                        if m[i][k] > a + m[j][k] {
                            found = Some((i, j, k));
                            break 'outer;
                        }
                    }
                }
            }
            found
        }
        None => {
            let mut found = None;
            'outer2: for j in 0..n {
                for i in 0..n {
                    for k in 0..n {
                        if travel[i][k] > &travel[i][j] + &travel[j][k] {
                            found = Some((i, j, k));
                            break 'outer2;
                        }
                    }
                }
            }
            found
        }
    };
    match violation {
        Some((i, j, k)) => Err(Error::InvalidMetric(format!(
            "triangle inequality fails: t[{0}][{2}] > t[{0}][{1}] + t[{1}][{2}]",
            i + 1,
            j + 1,
            k + 1
        ))),
        None => Ok(()),
    }
}

/// The matrix over a common denominator, if every numerator fits in 62 bits.
fn scaled_u64(travel: &[Vec<Rational>]) -> Option<Vec<Vec<u64>>> {
    let mut den = BigInt::one();
    for t in travel.iter().flatten() {
        den = den.lcm(t.denom());
    }
    let limit = BigInt::from(1u64 << 62);
    travel
        .iter()
        .map(|row| {
            row.iter()
                .map(|t| {
                    let v = t.numer() * (&den / t.denom());
                    if v < limit {
                        v.to_u64()
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Visit {
    pub point: usize,
    pub time: Frac,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Walk {
    /// Starts with the start point at time 0.
    pub visits: Vec<Visit>,
    /// End of the observed window; heights are measured up to here.
    pub horizon: Frac,
}

/// Exact per-point suprema of a walk over `[0, horizon]`. With `strict`,
/// every leg must take exactly its travel time rather than at least it.
pub fn simulate_walk(inst: &MetricInstance, walk: &Walk, strict: bool) -> Result<SimulationReport> {
    let n = inst.n();
    let first = walk.visits.first().ok_or(Error::EmptySchedule)?;
    if first.point != inst.start() || !first.time.0.is_zero() {
        return Err(Error::InvalidParameter("walk must start at the start point at time 0".into()));
    }
    for (step, pair) in walk.visits.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        if b.point == 0 || b.point > n {
            return Err(Error::IndexOutOfRange { index: b.point, n });
        }
        let dt = &b.time.0 - &a.time.0;
        if dt < Rational::zero() {
            return Err(Error::NonMonotoneTime { step: step + 1 });
        }
        let need = inst.travel(a.point, b.point);
        if &dt < need {
            return Err(Error::TravelTooShort { step: step + 1 });
        }
        if strict && &dt != need {
            return Err(Error::StrictTravelViolation { step: step + 1 });
        }
    }
    let horizon = &walk.horizon.0;
    let mut last: Vec<Option<Rational>> = vec![None; n];
    let mut worst = vec![Rational::zero(); n];
    let mut steady = vec![Rational::zero(); n];
    for v in walk.visits.iter().filter(|v| &v.time.0 <= horizon) {
        let i = v.point - 1;
        let gap = match &last[i] {
            Some(t) => {
                let g = &v.time.0 - t;
                if g > steady[i] {
                    steady[i] = g.clone();
                }
                g
            }
            None => v.time.0.clone(),
        };
        if gap > worst[i] {
            worst[i] = gap;
        }
        last[i] = Some(v.time.0.clone());
    }
    let per: Vec<Rational> = (0..n)
        .map(|i| {
            let tail = horizon - last[i].as_ref().unwrap_or(&Rational::zero());
            let g = if tail > worst[i] { tail } else { worst[i].clone() };
            g * inst.rate(i + 1)
        })
        .collect();
    let steady: Vec<Rational> = steady.iter().enumerate().map(|(i, g)| g * inst.rate(i + 1)).collect();
    Ok(SimulationReport::from_heights(per, steady, Horizon::Time(Frac(horizon.clone()))))
}

/// Prim's algorithm on `points` (1-based). Ties go to the lower
/// `(weight, endpoint)` pair. Returns the tree edges and total weight.
pub fn mst(inst: &MetricInstance, points: &[usize]) -> (Vec<(usize, usize)>, Rational) {
    let k = points.len();
    let mut edges = Vec::with_capacity(k.saturating_sub(1));
    let mut total = Rational::zero();
    if k <= 1 {
        return (edges, total);
    }
    let mut in_tree = vec![false; k];
    let mut best: Vec<Option<(Rational, usize)>> = vec![None; k];
    in_tree[0] = true;
    for j in 1..k {
        best[j] = Some((inst.travel(points[0], points[j]).clone(), 0));
    }
    for _ in 1..k {
        let mut pick: Option<usize> = None;
        for j in 0..k {
            if in_tree[j] {
                continue;
            }
            let better = match (pick, &best[j]) {
                (None, Some(_)) => true,
                (Some(p), Some((w, from))) => {
                    let (pw, pfrom) = best[p].as_ref().expect("candidate has a key");
                    (w, points[*from].min(points[j]), points[*from].max(points[j]))
                        < (pw, points[*pfrom].min(points[p]), points[*pfrom].max(points[p]))
                }
                _ => false,
            };
            if better {
                pick = Some(j);
            }
        }
        let j = pick.expect("graph is complete");
        let (w, from) = best[j].take().expect("picked vertex has a key");
        in_tree[j] = true;
        edges.push((points[from], points[j]));
        total += &w;
        for x in 0..k {
            if in_tree[x] {
                continue;
            }
            let d = inst.travel(points[j], points[x]);
            let replace = match &best[x] {
                Some((bw, _)) => d < bw,
                None => true,
            };
            if replace {
                best[x] = Some((d.clone(), j));
            }
        }
    }
    (edges, total)
}

/// Closed Euler traversal of a spanning tree, rooted at `root`, children
/// visited in increasing index order. Returns the vertex sequence without
/// the closing return to `root`.
pub fn euler_tour(edges: &[(usize, usize)], root: usize) -> Vec<usize> {
    if edges.is_empty() {
        return vec![root];
    }
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    for v in adj.values_mut() {
        v.sort_unstable();
    }
    let mut tour = vec![root];
    // (vertex, parent, next child position)
    let mut stack: Vec<(usize, usize, usize)> = vec![(root, 0, 0)];
    while let Some(top) = stack.last_mut() {
        let (v, parent, pos) = *top;
        let children = &adj[&v];
        if let Some(&c) = children[pos..].iter().find(|&&c| c != parent) {
            top.2 = children.iter().position(|&x| x == c).expect("child is adjacent") + 1;
            tour.push(c);
            stack.push((c, v, 0));
        } else {
            stack.pop();
            if let Some(&(p, _, _)) = stack.last() {
                tour.push(p);
            }
        }
    }
    tour.pop();
    tour
}

/// One class of points with its tour and the robot's resume position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassTour {
    /// Class number; 0 marks the low-rate set handled one point at a time.
    pub class: u32,
    pub members: Vec<usize>,
    pub tour: Vec<usize>,
    /// `legs[p]` is the travel from `tour[p]` to `tour[p + 1]` (cyclically).
    pub legs: Vec<Frac>,
    pub mst: Frac,
    pub cursor: usize,
}

impl ClassTour {
    fn build(inst: &MetricInstance, class: u32, members: Vec<usize>) -> Self {
        let (edges, weight) = mst(inst, &members);
        let tour = euler_tour(&edges, members[0]);
        let legs = (0..tour.len())
            .map(|p| Frac(inst.travel(tour[p], tour[(p + 1) % tour.len()]).clone()))
            .collect();
        let s = inst.start();
        let cursor = (0..tour.len())
            .min_by(|&a, &b| inst.travel(s, tour[a]).cmp(inst.travel(s, tour[b])).then(a.cmp(&b)))
            .expect("nonempty tour");
        ClassTour {
            class,
            members,
            tour,
            legs,
            mst: Frac(weight),
            cursor,
        }
    }

    pub fn tour_length(&self) -> Rational {
        self.legs.iter().fold(Rational::zero(), |acc, l| acc + &l.0)
    }
}

/// State of the multi-tree walks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TourState {
    pub classes: Vec<ClassTour>,
    pub v0: Vec<usize>,
    pub j: usize,
}

struct Walker<'a> {
    inst: &'a MetricInstance,
    visits: Vec<Visit>,
    at: usize,
    time: Rational,
    horizon: Option<Rational>,
    done: bool,
}

impl<'a> Walker<'a> {
    fn new(inst: &'a MetricInstance, horizon: Option<Rational>) -> Self {
        Walker {
            inst,
            visits: vec![Visit {
                point: inst.start(),
                time: Frac(Rational::zero()),
            }],
            at: inst.start(),
            time: Rational::zero(),
            horizon,
            done: false,
        }
    }

    fn go(&mut self, p: usize) {
        if self.done || p == self.at {
            return;
        }
        let t = &self.time + self.inst.travel(self.at, p);
        if let Some(h) = &self.horizon {
            if &t > h {
                self.done = true;
                return;
            }
        }
        self.time = t;
        self.at = p;
        self.visits.push(Visit {
            point: p,
            time: Frac(self.time.clone()),
        });
    }

    fn finish(self) -> Walk {
        let horizon = self.horizon.unwrap_or(self.time);
        Walk {
            visits: self.visits,
            horizon: Frac(horizon),
        }
    }
}

/// One class entry: walk to the cursor, then along the tour until at least
/// `d` has been covered, stopping on a tour vertex.
fn enter_class(w: &mut Walker<'_>, c: &mut ClassTour, d: &Rational) {
    w.go(c.tour[c.cursor]);
    if c.members.len() < 2 {
        return;
    }
    let mut covered = Rational::zero();
    while &covered < d && !w.done {
        covered += &c.legs[c.cursor].0;
        c.cursor = (c.cursor + 1) % c.tour.len();
        w.go(c.tour[c.cursor]);
    }
}

fn outer_iteration(w: &mut Walker<'_>, state: &mut TourState, d: &Rational) {
    for c in state.classes.iter_mut() {
        enter_class(w, c, d);
    }
    if !state.v0.is_empty() {
        w.go(state.v0[state.j]);
        state.j = (state.j + 1) % state.v0.len();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Algorithm {
    /// One tree over all points.
    One,
    /// Trees per factor-2 rate class.
    Two,
    /// Trees for the top `ceil(2 log2 n)` classes, the rest visited singly.
    Three,
}

impl Algorithm {
    pub fn from_number(k: u8) -> Result<Self> {
        match k {
            1 => Ok(Algorithm::One),
            2 => Ok(Algorithm::Two),
            3 => Ok(Algorithm::Three),
            _ => Err(Error::InvalidParameter(format!("unknown algorithm {k}"))),
        }
    }
}

/// `ceil(log2 r)` for positive `r`.
fn ceil_log2(r: &Rational) -> i64 {
    let f = floor_log2(r);
    if &pow2(f) == r {
        f
    } else {
        f + 1
    }
}

/// Classes, the tree-class count `s`, and the per-point bound each run certifies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Plan {
    pub algorithm: Algorithm,
    pub s: u32,
    pub diameter: Frac,
    pub state: TourState,
    /// Indexed by point; the height bound proved for that point.
    pub bounds: Vec<Frac>,
}

fn class_max_rate(inst: &MetricInstance, members: &[usize]) -> Rational {
    members.iter().map(|&i| inst.rate(i).clone()).max().unwrap_or_else(Rational::zero)
}

pub fn plan(inst: &MetricInstance, algorithm: Algorithm) -> Plan {
    let n = inst.n();
    let d = inst.diameter();
    let mut bounds = vec![Frac(Rational::zero()); n];
    let (s, classes, v0) = match algorithm {
        Algorithm::One => {
            let all: Vec<usize> = (1..=n).collect();
            let mut c = ClassTour::build(inst, 1, all);
            // Start the tour where the robot stands.
            c.cursor = c.tour.iter().position(|&v| v == inst.start()).expect("start is on the tour");
            let b = int(2) * &c.mst.0 * inst.rates().max();
            bounds.iter_mut().for_each(|x| *x = Frac(b.clone()));
            (1, vec![c], Vec::new())
        }
        Algorithm::Two => {
            let hmin = inst.rates().min().clone();
            let s = (floor_log2(&(inst.rates().max() / &hmin)) + 1) as u32;
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); s as usize + 1];
            for i in 1..=n {
                let c = floor_log2(&(inst.rate(i) / &hmin)) + 1;
                groups[c as usize].push(i);
            }
            let classes = build_classes(inst, groups);
            for c in &classes {
                let b = int(3 * s) * (&d + int(2) * &c.mst.0) * class_max_rate(inst, &c.members);
                for &m in &c.members {
                    bounds[m - 1] = Frac(b.clone());
                }
            }
            (s, classes, Vec::new())
        }
        Algorithm::Three => {
            let s = algorithm3_s(n);
            let n2 = int(n as u64 * n as u64);
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); s as usize + 1];
            let mut v0 = Vec::new();
            for i in 1..=n {
                let x = inst.rate(i) * &n2;
                if x <= Rational::one() {
                    v0.push(i);
                } else {
                    groups[ceil_log2(&x) as usize].push(i);
                }
            }
            let classes = build_classes(inst, groups);
            for c in &classes {
                let b = int(3 * s + 1) * (&d + int(2) * &c.mst.0) * class_max_rate(inst, &c.members);
                for &m in &c.members {
                    bounds[m - 1] = Frac(b.clone());
                }
            }
            if !v0.is_empty() {
                let b = (int(3 * s) * &d + &d) * int(v0.len() as u64) * class_max_rate(inst, &v0);
                for &m in &v0 {
                    bounds[m - 1] = Frac(b.clone());
                }
            }
            (s, classes, v0)
        }
    };
    Plan {
        algorithm,
        s,
        diameter: Frac(d),
        state: TourState { classes, v0, j: 0 },
        bounds,
    }
}

/// Classes ordered by class number; the numbering runs from low rates up.
fn build_classes(inst: &MetricInstance, groups: Vec<Vec<usize>>) -> Vec<ClassTour> {
    groups
        .into_iter()
        .enumerate()
        .filter(|(_, g)| !g.is_empty())
        .map(|(i, g)| ClassTour::build(inst, i as u32, g))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuousRun {
    pub plan: Plan,
    pub walk: Walk,
    pub report: SimulationReport,
}

impl ContinuousRun {
    /// Points whose realized height exceeds their certified bound.
    pub fn violations(&self) -> Vec<usize> {
        self.report
            .per_bamboo_max
            .iter()
            .zip(&self.plan.bounds)
            .enumerate()
            .filter(|(_, (h, b))| h.0 > b.0)
            .map(|(i, _)| i + 1)
            .collect()
    }
}

/// Runs `algorithm` until `horizon_time` and measures the walk.
pub fn run(inst: &MetricInstance, algorithm: Algorithm, horizon_time: &Rational) -> Result<ContinuousRun> {
    if horizon_time <= &Rational::zero() {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    let mut p = plan(inst, algorithm);
    let mut w = Walker::new(inst, Some(horizon_time.clone()));
    drive(&mut w, &mut p, None);
    let walk = w.finish();
    let report = simulate_walk(inst, &walk, true)?;
    Ok(ContinuousRun { plan: p, walk, report })
}

pub fn algorithm1(inst: &MetricInstance, horizon_time: &Rational) -> Result<ContinuousRun> {
    run(inst, Algorithm::One, horizon_time)
}

pub fn algorithm2(inst: &MetricInstance, horizon_time: &Rational) -> Result<ContinuousRun> {
    run(inst, Algorithm::Two, horizon_time)
}

pub fn algorithm3(inst: &MetricInstance, horizon_time: &Rational) -> Result<ContinuousRun> {
    run(inst, Algorithm::Three, horizon_time)
}

type StateKey = (usize, Vec<usize>, usize);

fn state_key(w: &Walker<'_>, st: &TourState) -> StateKey {
    (w.at, st.classes.iter().map(|c| c.cursor).collect(), st.j)
}

/// Runs outer iterations until the horizon is hit or, with `cycle`
/// tracking, until a state repeats. Returns `(visits, time)` at the first
/// occurrence of the repeated state.
fn drive(
    w: &mut Walker<'_>,
    p: &mut Plan,
    mut cycle: Option<(&mut HashMap<StateKey, (usize, Rational)>, usize)>,
) -> Option<(usize, Rational)> {
    let d = p.diameter.0.clone();
    let mut iterations = 0usize;
    while !w.done {
        if let Some((seen, limit)) = cycle.as_mut() {
            let key = state_key(w, &p.state);
            if let Some(first) = seen.get(&key) {
                return Some(first.clone());
            }
            if iterations >= *limit {
                return None;
            }
            seen.insert(key, (w.visits.len(), w.time.clone()));
        }
        match p.algorithm {
            Algorithm::One => {
                let c = &mut p.state.classes[0];
                for _ in 0..c.tour.len() {
                    c.cursor = (c.cursor + 1) % c.tour.len();
                    w.go(c.tour[c.cursor]);
                }
                if c.tour.len() == 1 {
                    // A single point: nothing to walk.
                    return None;
                }
            }
            _ => outer_iteration(w, &mut p.state, &d),
        }
        iterations += 1;
    }
    None
}

/// A walk split into a transient part and a cycle repeated forever.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodicWalk {
    pub preamble: Vec<Visit>,
    pub cycle: Vec<Visit>,
    pub cycle_time: Frac,
}

impl PeriodicWalk {
    /// Prefix covering the preamble and `copies` cycles.
    pub fn unroll(&self, copies: usize) -> Walk {
        let mut visits = self.preamble.clone();
        let mut shift = Rational::zero();
        for _ in 0..copies {
            visits.extend(self.cycle.iter().map(|v| Visit {
                point: v.point,
                time: Frac(&v.time.0 + &shift),
            }));
            shift += &self.cycle_time.0;
        }
        let horizon = visits.last().map(|v| v.time.0.clone()).unwrap_or_else(Rational::zero);
        Walk {
            visits,
            horizon: Frac(horizon),
        }
    }

    /// Exact suprema over the infinite walk.
    pub fn report(&self, inst: &MetricInstance) -> Result<SimulationReport> {
        let mut seen = vec![false; inst.n()];
        for v in &self.cycle {
            seen[v.point - 1] = true;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::MissingFromPeriod { index: i + 1 });
        }
        // Every gap starting before the second copy ends within it.
        let walk = self.unroll(2);
        let mut r = simulate_walk(inst, &walk, true)?;
        r.horizon = Horizon::Unbounded;
        Ok(r)
    }
}

/// Runs `algorithm` until its state repeats, within `max_iterations` outer
/// iterations. The walk from the first occurrence of the state onward is
/// periodic.
pub fn periodic_walk(
    inst: &MetricInstance,
    algorithm: Algorithm,
    max_iterations: usize,
) -> Result<Option<(Plan, PeriodicWalk)>> {
    let mut p = plan(inst, algorithm);
    if inst.n() == 1 {
        return Ok(None);
    }
    let mut w = Walker::new(inst, None);
    let mut seen = HashMap::new();
    let Some((at, t0)) = drive(&mut w, &mut p, Some((&mut seen, max_iterations))) else {
        return Ok(None);
    };
    let periodic = PeriodicWalk {
        preamble: w.visits[..at].to_vec(),
        cycle: w.visits[at..].to_vec(),
        cycle_time: Frac(&w.time - &t0),
    };
    Ok(Some((p, periodic)))
}

/// `D * h_max`.
pub fn lower_bound_diameter(inst: &MetricInstance) -> Rational {
    inst.diameter() * inst.rates().max()
}

/// `max_k h_k * MST({i : h_i >= h_k})` over distinct rates, with the
/// maximizing set.
pub fn lower_bound_mst(inst: &MetricInstance) -> (Rational, Vec<usize>) {
    let n = inst.n();
    let mut best = (Rational::zero(), vec![1]);
    let mut p = 1;
    while p <= n {
        let h = inst.rate(p).clone();
        while p < n && inst.rate(p + 1) == &h {
            p += 1;
        }
        let set: Vec<usize> = (1..=p).collect();
        let v = &h * mst(inst, &set).1;
        if v > best.0 {
            best = (v, set);
        }
        p += 1;
    }
    best
}

/// `max h_min(V') * MST(V')` over every nonempty subset; `n <= 20`.
pub fn lower_bound_mst_exhaustive(inst: &MetricInstance) -> Result<(Rational, Vec<usize>)> {
    let n = inst.n();
    if n > 20 {
        return Err(Error::InvalidParameter("exhaustive bound needs n <= 20".into()));
    }
    let mut best = (Rational::zero(), vec![1]);
    for mask in 1u32..(1 << n) {
        let set: Vec<usize> = (1..=n).filter(|i| mask >> (i - 1) & 1 == 1).collect();
        let hmin = inst.rate(*set.last().expect("nonempty")).clone();
        let v = hmin * mst(inst, &set).1;
        if v > best.0 {
            best = (v, set);
        }
    }
    Ok(best)
}

/// Builds an instance from points listed in arbitrary rate order: sorts by
/// rate (stable) and permutes the matrix to match. Returns the instance and
/// `order[k]` = original position of point `k + 1`. `start_pos` is a 0-based
/// input position; `None` starts at the highest rate.
pub fn from_unsorted(rates: Vec<Rational>, travel: Vec<Vec<Rational>>, start_pos: Option<usize>) -> Result<(MetricInstance, Vec<usize>)> {
    let (rv, order) = RateVector::from_unsorted(rates)?;
    let n = order.len();
    let permuted: Vec<Vec<Rational>> = (0..n)
        .map(|a| (0..n).map(|b| travel[order[a]][order[b]].clone()).collect())
        .collect();
    let start = match start_pos {
        Some(s) => order.iter().position(|&o| o == s).expect("start is a point") + 1,
        None => 1,
    };
    Ok((MetricInstance::new(rv, permuted, start)?, order))
}

#[derive(Debug, Clone)]
pub struct SpiralInstance {
    pub instance: MetricInstance,
    pub d1: Rational,
    pub d2: Rational,
    /// Point sets `G_1, ..., G_g`, then the low-rate tail.
    pub groups: Vec<Vec<usize>>,
    /// Point numbers in order along the spiral.
    pub spiral_order: Vec<usize>,
}

pub const SPIRAL_SNAP_BITS: u32 = 40;

/// Points spaced `n^(-2/3)` apart along an Archimedean spiral whose rings are
/// `n^(-1/3)` apart, starting at radius 1/2. `n` must be a power of 8.
pub fn gen_spiral(n: usize) -> Result<SpiralInstance> {
    let lg = n.trailing_zeros();
    if n < 8 || !n.is_power_of_two() || lg % 3 != 0 {
        return Err(Error::InvalidParameter(format!("spiral size {n} is not a power of 8 (>= 8)")));
    }
    let g = lg / 3;
    let d1 = pow2(-2 * g as i64);
    let d2 = pow2(-(g as i64));
    let (d1f, d2f) = (rational::to_f64(&d1), rational::to_f64(&d2));

    let radius = |th: f64| 0.5 + d2f * th / (2.0 * std::f64::consts::PI);
    let point = |th: f64| (radius(th) * th.cos(), radius(th) * th.sin());
    let dist = |a: (f64, f64), b: (f64, f64)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    let mut thetas = vec![0.0f64];
    for _ in 1..n {
        let th = *thetas.last().expect("nonempty");
        let p0 = point(th);
        let (mut lo, mut hi) = (th, th + 4.0 * d1f / radius(th));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if dist(p0, point(mid)) < d1f {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        thetas.push(hi);
    }
    let coords: Vec<(f64, f64)> = thetas.iter().map(|&t| point(t)).collect();
    let scale = (1u64 << SPIRAL_SNAP_BITS) as f64;
    let mut m = vec![vec![0u64; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let v = (dist(coords[a], coords[b]) * scale).ceil() as u64;
            m[a][b] = v.max(1);
            m[b][a] = m[a][b];
        }
    }
    metric_closure(&mut m);
    let den = BigInt::from(1u64 << SPIRAL_SNAP_BITS);
    let travel: Vec<Vec<Rational>> = m
        .iter()
        .map(|row| row.iter().map(|&v| Rational::new(BigInt::from(v), den.clone())).collect())
        .collect();

    // Group sizes n/2, n/4, ..., n/2^g along the spiral, then the tail.
    let nlog = int(n as u64 * lg as u64);
    let eps = int(3) / pow2(2 * g as i64);
    let mut rates = Vec::with_capacity(n);
    let mut sizes = Vec::new();
    for i in 1..=g {
        let size = n >> i;
        let h = (int(3) - &eps) * pow2(i as i64) / &nlog;
        rates.extend(std::iter::repeat(h).take(size));
        sizes.push(size);
    }
    let tail = n - rates.len();
    rates.extend(std::iter::repeat(pow2(-4 * g as i64)).take(tail));
    sizes.push(tail);
    let total = rates.iter().fold(Rational::zero(), |a, r| a + r);
    if !total.is_one() {
        return Err(Error::Internal(format!("spiral rates sum to {}", rational::format(&total))));
    }

    let (instance, order) = from_unsorted(rates, travel, Some(0))?;
    let mut pos_to_point = vec![0; n];
    for (k, &o) in order.iter().enumerate() {
        pos_to_point[o] = k + 1;
    }
    let mut groups = Vec::new();
    let mut at = 0;
    for size in sizes {
        let mut grp: Vec<usize> = pos_to_point[at..at + size].to_vec();
        grp.sort_unstable();
        groups.push(grp);
        at += size;
    }
    Ok(SpiralInstance {
        instance,
        d1,
        d2,
        groups,
        spiral_order: pos_to_point,
    })
}

/// Shortest-path closure, which repairs any triangle violations left by
/// rounding.
fn metric_closure(m: &mut [Vec<u64>]) {
    let n = m.len();
    for k in 0..n {
        for i in 0..n {
            let ik = m[i][k];
            for j in 0..n {
                let via = ik + m[k][j];
                if via < m[i][j] {
                    m[i][j] = via;
                }
            }
        }
    }
}

/// For the spiral: if every point in `G_1..G_g` stays at or below `cap`,
/// each of them needs a visit at least every `cap / h` time units, and each
/// visit costs at least the shortest travel time. Returns the implied total
/// visit share; a value above 1 shows `cap` is unattainable.
pub fn spiral_visit_share(sp: &SpiralInstance, cap: &Rational) -> Rational {
    let inst = &sp.instance;
    let n = inst.n();
    let mut dmin: Option<Rational> = None;
    for a in 1..=n {
        for b in a + 1..=n {
            let t = inst.travel(a, b);
            if dmin.as_ref().is_none_or(|d| t < d) {
                dmin = Some(t.clone());
            }
        }
    }
    let dmin = dmin.unwrap_or_else(Rational::zero);
    let groups = &sp.groups[..sp.groups.len() - 1];
    groups
        .iter()
        .flatten()
        .fold(Rational::zero(), |acc, &i| acc + &dmin * inst.rate(i) / cap)
}

#[derive(Debug, Clone)]
pub struct TwoCluster {
    pub instance: MetricInstance,
    /// Sweep order: first cluster left to right, then the second.
    pub sweep: Vec<usize>,
}

/// Two clusters of `n/2` points on a line, spaced `D/(2n)` inside a cluster,
/// with the far ends `D` apart. Each cluster carries rates
/// `1/4, 1/8, ..., 1/n`; the remaining points share what is left.
pub fn gen_two_cluster(n: usize, d: &Rational) -> Result<TwoCluster> {
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("cluster size {n} is not a power of two >= 4")));
    }
    if d <= &Rational::zero() {
        return Err(Error::InvalidParameter("D must be positive".into()));
    }
    let half = n / 2;
    let lg = n.trailing_zeros() as usize;
    let listed = lg - 1;
    let padding = n - 2 * listed;
    let pad_rate = if padding > 0 {
        ratio(2, n as i64) / int(padding as u64)
    } else {
        Rational::zero()
    };
    let step = d / int(2 * n as u64);
    let gap = d - &step * int(half as u64 - 1);
    let mut pos = Vec::with_capacity(n);
    let mut rates = Vec::with_capacity(n);
    for c in 0..2 {
        for k in 0..half {
            let base = if c == 0 { Rational::zero() } else { gap.clone() };
            pos.push(base + &step * int(k as u64));
            rates.push(if k < listed { pow2(-(k as i64 + 2)) } else { pad_rate.clone() });
        }
    }
    let travel: Vec<Vec<Rational>> = pos
        .iter()
        .map(|a| pos.iter().map(|b| if a > b { a - b } else { b - a }).collect())
        .collect();
    let (instance, order) = from_unsorted(rates, travel, Some(0))?;
    let mut sweep = vec![0; n];
    for (k, &o) in order.iter().enumerate() {
        sweep[o] = k + 1;
    }
    Ok(TwoCluster { instance, sweep })
}

/// Visits `order` cyclically, starting from the start point.
pub fn sweep_walk(inst: &MetricInstance, order: &[usize], horizon_time: &Rational) -> Walk {
    let mut w = Walker::new(inst, Some(horizon_time.clone()));
    if order.len() > 1 || order.first() != Some(&inst.start()) {
        let offset = order.iter().position(|&p| p == inst.start()).unwrap_or(0);
        let mut k = offset;
        while !w.done {
            k = (k + 1) % order.len();
            w.go(order[k]);
        }
    }
    w.finish()
}

/// Random instance: distinct points on a `side x side` grid under the
/// Manhattan metric, integer rates in `1..=100`.
pub fn gen_random_grid(n: usize, side: u64, seed: u64) -> Result<MetricInstance> {
    if n == 0 || (side * side) < n as u64 {
        return Err(Error::InvalidParameter("grid too small".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taken = std::collections::HashSet::new();
    let mut pts = Vec::with_capacity(n);
    while pts.len() < n {
        let p = (rng.gen_range(0..side) as i64, rng.gen_range(0..side) as i64);
        if taken.insert(p) {
            pts.push(p);
        }
    }
    let rates: Vec<Rational> = (0..n).map(|_| int(rng.gen_range(1u64..=100))).collect();
    let travel = pts
        .iter()
        .map(|a| pts.iter().map(|b| int((a.0 - b.0).abs() + (a.1 - b.1).abs())).collect())
        .collect();
    Ok(from_unsorted(rates, travel, None)?.0)
}

/// Random points on a line; MST weights are monotone under inclusion here.
pub fn gen_random_line(n: usize, seed: u64) -> Result<MetricInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = std::collections::BTreeSet::new();
    while xs.len() < n {
        xs.insert(rng.gen_range(0u64..10 * n as u64 + 10));
    }
    let xs: Vec<u64> = xs.into_iter().collect();
    let rates: Vec<Rational> = (0..n).map(|_| int(rng.gen_range(1u64..=20))).collect();
    let travel = xs
        .iter()
        .map(|&a| xs.iter().map(|&b| int(a.abs_diff(b))).collect())
        .collect();
    Ok(from_unsorted(rates, travel, None)?.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscreteAsContinuous {
    /// `h_i D floor(2 / h_i)` per point.
    pub bounds: Vec<Frac>,
    /// `2 / h_max`, the approximation ratio this route guarantees.
    pub ratio_bound: Frac,
    pub report: SimulationReport,
}

/// Follows the discrete 2-approximation's cut order on the metric.
pub fn discrete_as_continuous(inst: &MetricInstance, horizon_time: &Rational) -> Result<DiscreteAsContinuous> {
    let d = inst.diameter();
    let sched = two_approx(inst.rates())?;
    let mut stream = next_cuts_stream(&sched.schedule);
    let mut w = Walker::new(inst, Some(horizon_time.clone()));
    let mut idle_run = 0u64;
    let period = sched.freqs.iter().max().copied().unwrap_or(1);
    while !w.done && idle_run <= period {
        match stream.next() {
            Some(0) | None => idle_run += 1,
            Some(i) => {
                idle_run = 0;
                if i == w.at {
                    // Standing still for a round costs no travel but must
                    // not stall the walk forever.
                    continue;
                }
                w.go(i);
            }
        }
    }
    let walk = w.finish();
    let report = simulate_walk(inst, &walk, true)?;
    let bounds = inst
        .rates()
        .rates()
        .iter()
        .map(|h| Frac(h * &d * int(rational::floor_int(&(int(2) / h)))))
        .collect();
    Ok(DiscreteAsContinuous {
        bounds,
        ratio_bound: Frac(int(2) / inst.rates().max()),
        report,
    })
}

/// `ceil(2 log2 n)`, the tree-class count of the third algorithm.
pub fn algorithm3_s(n: usize) -> u32 {
    ceil_log2(&int(n as u64 * n as u64)).max(0) as u32
}
