//! The general-case algorithm: split into large and small rates, schedule
//! each side separately and interleave them with a fixed pattern.

use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::{optimal_height, DEFAULT_STATE_BUDGET};
use crate::pinwheel::{main_algorithm, next_cuts_stream, two_approx, CutStream};
use crate::rates::RateVector;
use crate::rational::{self, from_f64, int, ratio, Frac, Rational};
use crate::schedule::{CyclicSchedule, ListSchedule};

/// Source of a merged round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Token {
    L,
    S,
    B,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Token::L => "L",
            Token::S => "S",
            Token::B => "B",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitPlan {
    pub m: Frac,
    /// 1-based members, ascending.
    pub l: Vec<usize>,
    pub s: Vec<usize>,
    pub b: Option<usize>,
    pub l_sum: Frac,
    pub s_sum: Frac,
}

/// `log2 n / (4 log2 log2 n)`, where `log x` is taken as 1 for `x <= 1`.
pub fn default_m(n: usize) -> Rational {
    let lg = |x: f64| if x > 1.0 { x.log2() } else { 1.0 };
    let n = n as f64;
    from_f64(lg(n) / (4.0 * lg(lg(n)))).expect("finite")
}

fn require_normalized(rates: &RateVector) -> Result<()> {
    if rates.is_normalized() {
        Ok(())
    } else {
        Err(Error::NotNormalized {
            sum: rational::format(rates.total()),
        })
    }
}

fn sum_of(rates: &RateVector, members: &[usize]) -> Rational {
    members.iter().fold(Rational::zero(), |acc, &i| acc + rates.rate(i))
}

/// `L = {i : h_i >= 1/m}`, `S` the rest.
pub fn split(rates: &RateVector, m: &Rational) -> Result<SplitPlan> {
    require_normalized(rates)?;
    if m <= &Rational::zero() {
        return Err(Error::InvalidParameter("m must be positive".into()));
    }
    let threshold = Rational::one() / m;
    let (l, s): (Vec<usize>, Vec<usize>) = (1..=rates.len()).partition(|&i| rates.rate(i) >= &threshold);
    Ok(SplitPlan {
        m: Frac(m.clone()),
        l_sum: Frac(sum_of(rates, &l)),
        s_sum: Frac(sum_of(rates, &s)),
        l,
        s,
        b: None,
    })
}

/// Moves members of `S` to `L`, largest rate first, skipping any whose
/// removal would take the `S` sum below `target`. The achieved sum lies in
/// `[target, target + r)` for every rate `r` left in `S`.
pub fn rebalance(rates: &RateVector, plan: &SplitPlan, target: &Rational) -> Result<SplitPlan> {
    if plan.s_sum.0 < *target {
        return Err(Error::InvalidParameter(format!(
            "S sums to {}, below the target {}",
            plan.s_sum,
            rational::format(target)
        )));
    }
    let mut s_sum = plan.s_sum.0.clone();
    let mut l = plan.l.clone();
    let mut s = Vec::with_capacity(plan.s.len());
    for &i in &plan.s {
        let after = &s_sum - rates.rate(i);
        if &after >= target {
            s_sum = after;
            l.push(i);
        } else {
            s.push(i);
        }
    }
    l.sort_unstable();
    Ok(SplitPlan {
        m: plan.m.clone(),
        l_sum: Frac(sum_of(rates, &l)),
        s_sum: Frac(s_sum),
        l,
        s,
        b: plan.b,
    })
}

/// A sub-schedule over global bamboo indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubSchedule {
    /// `members[k]` is the global index of local bamboo `k + 1`.
    pub members: Vec<usize>,
    pub schedule: CyclicSchedule,
}

/// Infinite cut sequence of a sub-schedule, in global indices.
#[derive(Debug, Clone)]
pub enum SubStream {
    Residue(CutStream, Vec<usize>),
    List { list: ListSchedule, members: Vec<usize>, pos: usize },
    Single(usize),
}

impl SubStream {
    pub fn new(sub: &SubSchedule) -> Self {
        match &sub.schedule {
            CyclicSchedule::Residue(r) => SubStream::Residue(next_cuts_stream(r), sub.members.clone()),
            CyclicSchedule::List(l) => SubStream::List {
                list: l.clone(),
                members: sub.members.clone(),
                pos: 0,
            },
        }
    }
}

impl Iterator for SubStream {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        let local = match self {
            SubStream::Residue(stream, members) => {
                let i = stream.next()?;
                return Some(if i == 0 { 0 } else { members[i - 1] });
            }
            SubStream::List { list, members, pos } => {
                let pre = list.preamble.len();
                let i = if *pos < pre {
                    list.preamble[*pos]
                } else {
                    list.period[(*pos - pre) % list.period.len()]
                };
                *pos += 1;
                if i == 0 {
                    0
                } else {
                    members[i - 1]
                }
            }
            SubStream::Single(b) => *b,
        };
        Some(local)
    }
}

/// Round-robin over `pattern`: each round takes the next cut of the stream
/// named by the current token.
pub struct MergedStream {
    pattern: Vec<Token>,
    streams: Vec<(Token, SubStream)>,
    pos: usize,
}

pub fn merge_schedules(pattern: Vec<Token>, streams: Vec<(Token, SubStream)>) -> Result<MergedStream> {
    if pattern.is_empty() {
        return Err(Error::InvalidParameter("empty pattern".into()));
    }
    for t in &pattern {
        if !streams.iter().any(|(k, _)| k == t) {
            return Err(Error::InvalidParameter(format!("no stream for token {t}")));
        }
    }
    Ok(MergedStream {
        pattern,
        streams,
        pos: 0,
    })
}

impl Iterator for MergedStream {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        let token = self.pattern[self.pos % self.pattern.len()];
        self.pos += 1;
        let (_, stream) = self.streams.iter_mut().find(|(k, _)| *k == token)?;
        stream.next()
    }
}

/// Maps the `t`-th round (1-based) of the stream for `token` to its merged round.
struct SlotMap {
    offsets: Vec<u64>,
    len: u64,
}

impl SlotMap {
    fn new(pattern: &[Token], token: Token) -> Self {
        SlotMap {
            offsets: pattern
                .iter()
                .enumerate()
                .filter(|(_, t)| **t == token)
                .map(|(i, _)| i as u64 + 1)
                .collect(),
            len: pattern.len() as u64,
        }
    }

    fn c(&self) -> u64 {
        self.offsets.len() as u64
    }

    fn merged(&self, t: u64) -> u64 {
        let c = self.c();
        (t - 1) / c * self.len + self.offsets[((t - 1) % c) as usize]
    }
}

/// Largest merged gap (initial gap included) per member of a sub-schedule.
fn merged_gaps(sub: &SubSchedule, map: &SlotMap) -> Vec<u64> {
    let c = map.c();
    match &sub.schedule {
        CyclicSchedule::Residue(r) => r
            .residues()
            .iter()
            .map(|res| {
                let mut worst = map.merged(res.offset);
                for k in 0..c {
                    let t = res.offset + k * res.period;
                    worst = worst.max(map.merged(t + res.period) - map.merged(t));
                }
                worst
            })
            .collect(),
        CyclicSchedule::List(list) => {
            let seq = list.expand(c as usize + 1);
            let mut last = vec![0u64; sub.members.len()];
            let mut worst = vec![0u64; sub.members.len()];
            for (pos, &i) in seq.iter().enumerate() {
                if i == 0 {
                    continue;
                }
                let at = map.merged(pos as u64 + 1);
                worst[i - 1] = worst[i - 1].max(at - last[i - 1]);
                last[i - 1] = at;
            }
            worst
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    /// `L` empty: the Main Algorithm on everything.
    MainOnly,
    One,
    Two,
    ThreeA,
    ThreeB,
    Four,
    Five,
    Six,
}

impl Case {
    pub fn id(&self) -> &'static str {
        match self {
            Case::MainOnly => "0",
            Case::One => "1",
            Case::Two => "2",
            Case::ThreeA => "3a",
            Case::ThreeB => "3b",
            Case::Four => "4",
            Case::Five => "5",
            Case::Six => "6",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LSource {
    Optimal,
    /// The exhaustive search ran out of budget.
    TwoApproxFallback,
    TwoApprox,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BambooCertificate {
    pub bamboo: usize,
    pub class: Token,
    pub bound: Frac,
    pub realized: Frac,
    pub formula: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub case: &'static str,
    pub pattern: String,
    pub l_source: LSource,
    pub bamboos: Vec<BambooCertificate>,
    /// Largest `S`-rate before rebalancing, the slack unit for `o(1)` terms.
    pub max_s_rate: Frac,
}

impl Certificate {
    pub fn holds(&self) -> bool {
        self.bamboos.iter().all(|b| b.realized.0 <= b.bound.0)
    }

    pub fn realized_max(&self) -> Rational {
        self.bamboos
            .iter()
            .map(|b| b.realized.0.clone())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

#[derive(Debug, Clone)]
pub struct EightFifths {
    pub case: Case,
    pub plan: SplitPlan,
    pub pattern: Vec<Token>,
    pub subs: Vec<(Token, SubSchedule)>,
    pub certificate: Certificate,
}

impl EightFifths {
    pub fn stream(&self) -> MergedStream {
        let streams = self
            .subs
            .iter()
            .map(|(t, sub)| {
                let s = if *t == Token::B {
                    SubStream::Single(sub.members[0])
                } else {
                    SubStream::new(sub)
                };
                (*t, s)
            })
            .collect();
        merge_schedules(self.pattern.clone(), streams).expect("pattern references built streams")
    }

    pub fn pattern_string(&self) -> String {
        pattern_string(&self.pattern, self.case)
    }

    /// The merged stream as an exact list schedule, or `None` when preamble
    /// plus period would exceed `cap` rounds.
    pub fn cyclic(&self, cap: u64) -> Option<ListSchedule> {
        let p = self.pattern.len() as u64;
        let mut lead = 0u64;
        let mut reps = 1u64;
        for (token, sub) in &self.subs {
            let c = self.pattern.iter().filter(|t| *t == token).count() as u64;
            if c == 0 {
                continue;
            }
            let (pre, per) = match &sub.schedule {
                CyclicSchedule::Residue(r) => (0, r.hyperperiod()?),
                CyclicSchedule::List(l) => (l.preamble.len() as u64, l.period.len() as u64),
            };
            lead = lead.max(pre.div_ceil(c));
            reps = rational::lcm_u64(reps, per / num_integer::gcd(per, c))?;
        }
        let pre = lead.checked_mul(p)?;
        let per = reps.checked_mul(p)?;
        if pre.checked_add(per)? > cap {
            return None;
        }
        let seq: Vec<usize> = self.stream().take((pre + per) as usize).collect();
        Some(ListSchedule::new(seq[..pre as usize].to_vec(), seq[pre as usize..].to_vec()))
    }
}

fn pattern_string(pattern: &[Token], case: Case) -> String {
    let primed = matches!(case, Case::ThreeA | Case::ThreeB | Case::Four | Case::Five);
    let parts: Vec<String> = pattern
        .iter()
        .map(|t| match (t, primed) {
            (Token::L | Token::S, true) => format!("{t}'"),
            _ => t.to_string(),
        })
        .collect();
    format!("({})", parts.join(","))
}

#[derive(Debug, Clone, Copy)]
pub struct EightFifthsOptions {
    pub state_budget: usize,
}

impl Default for EightFifthsOptions {
    fn default() -> Self {
        EightFifthsOptions {
            state_budget: DEFAULT_STATE_BUDGET,
        }
    }
}

pub fn select_case(rates: &RateVector, plan: &SplitPlan) -> Case {
    let s = &plan.s_sum.0;
    let h1 = rates.rate(1);
    match plan.l.len() {
        0 => Case::MainOnly,
        1 => {
            if s > &ratio(3, 5) {
                Case::Five
            } else {
                Case::Six
            }
        }
        _ => {
            if s <= &ratio(2, 5) {
                Case::One
            } else if s <= &ratio(8, 15) {
                if h1 <= &ratio(8, 25) {
                    Case::Two
                } else if h1 <= &ratio(2, 5) {
                    Case::ThreeA
                } else {
                    Case::ThreeB
                }
            } else if s <= &ratio(3, 5) {
                Case::Four
            } else {
                Case::Five
            }
        }
    }
}

struct Side {
    sub: SubSchedule,
    /// `(1 + delta) H(side)` for Main-Algorithm sides.
    main_bound: Option<Rational>,
}

fn main_side(rates: &RateVector, members: &[usize]) -> Result<Side> {
    let sub_rates = rates.subset(members)?;
    let out = main_algorithm(&sub_rates)?;
    Ok(Side {
        sub: SubSchedule {
            members: members.to_vec(),
            schedule: CyclicSchedule::Residue(out.schedule),
        },
        main_bound: Some(out.diagnostics.bound.0),
    })
}

fn two_side(rates: &RateVector, members: &[usize]) -> Result<Side> {
    let out = two_approx(&rates.subset(members)?)?;
    Ok(Side {
        sub: SubSchedule {
            members: members.to_vec(),
            schedule: CyclicSchedule::Residue(out.schedule),
        },
        main_bound: None,
    })
}

fn optimal_side(rates: &RateVector, members: &[usize], budget: usize) -> Result<(Side, LSource)> {
    match optimal_height(&rates.subset(members)?, budget) {
        Ok(opt) => Ok((
            Side {
                sub: SubSchedule {
                    members: members.to_vec(),
                    schedule: opt.schedule,
                },
                main_bound: None,
            },
            LSource::Optimal,
        )),
        Err(Error::BudgetExceeded { .. }) => Ok((two_side(rates, members)?, LSource::TwoApproxFallback)),
        Err(e) => Err(e),
    }
}

fn single(b: usize) -> SubSchedule {
    SubSchedule {
        members: vec![b],
        schedule: CyclicSchedule::List(ListSchedule::new(vec![], vec![1])),
    }
}

/// Runs the general-case algorithm on a normalized instance.
pub fn eight_fifths(
    rates: &RateVector,
    m_override: Option<Rational>,
    opts: EightFifthsOptions,
) -> Result<EightFifths> {
    require_normalized(rates)?;
    let m = m_override.unwrap_or_else(|| default_m(rates.len()));
    let base = split(rates, &m)?;
    let case = select_case(rates, &base);
    let max_s_rate = base
        .s
        .first()
        .map(|&i| rates.rate(i).clone())
        .unwrap_or_else(Rational::zero);
    let h1 = rates.rate(1).clone();

    let mut plan = base.clone();
    let mut l_source = LSource::None;
    let mut l_side: Option<Side> = None;
    let mut s_side: Option<Side> = None;
    let (pattern, s_factor, l_rule): (Vec<Token>, u64, LRule) = match case {
        Case::MainOnly => {
            s_side = Some(main_side(rates, &plan.s)?);
            (vec![Token::S], 1, LRule::None)
        }
        Case::One | Case::Two => {
            let (side, src) = optimal_side(rates, &plan.l, opts.state_budget)?;
            l_side = Some(side);
            l_source = src;
            if !plan.s.is_empty() {
                s_side = Some(main_side(rates, &plan.s)?);
            }
            if case == Case::One {
                (vec![Token::L, Token::L, Token::L, Token::S], 4, LRule::Inflate(3))
            } else {
                (vec![Token::L, Token::L, Token::S], 3, LRule::Inflate(2))
            }
        }
        Case::ThreeA | Case::ThreeB => {
            let mut with_b = plan.clone();
            with_b.l.retain(|&i| i != 1);
            with_b.b = Some(1);
            plan = rebalance(rates, &with_b, &ratio(2, 5))?;
            l_side = Some(two_side(rates, &plan.l)?);
            l_source = LSource::TwoApprox;
            s_side = Some(main_side(rates, &plan.s)?);
            if case == Case::ThreeA {
                (vec![Token::L, Token::B, Token::L, Token::S], 4, LRule::TimesSum(4))
            } else {
                (vec![Token::B, Token::L, Token::B, Token::S], 4, LRule::TimesSum(8))
            }
        }
        Case::Four => {
            plan = rebalance(rates, &plan, &ratio(8, 15))?;
            l_side = Some(two_side(rates, &plan.l)?);
            l_source = LSource::TwoApprox;
            s_side = Some(main_side(rates, &plan.s)?);
            (vec![Token::L, Token::L, Token::S], 3, LRule::Inflate(2))
        }
        Case::Five => {
            plan = rebalance(rates, &plan, &ratio(3, 5))?;
            l_side = Some(two_side(rates, &plan.l)?);
            l_source = LSource::TwoApprox;
            s_side = Some(main_side(rates, &plan.s)?);
            (vec![Token::L, Token::S], 2, LRule::TimesSum(4))
        }
        Case::Six => {
            plan.b = Some(1);
            plan.l.clear();
            plan.l_sum = Frac(Rational::zero());
            if !plan.s.is_empty() {
                s_side = Some(main_side(rates, &plan.s)?);
            }
            (vec![Token::B, Token::S], 2, LRule::None)
        }
    };

    // Drop tokens whose sub-schedule is empty.
    let has = |t: Token| match t {
        Token::L => l_side.is_some(),
        Token::S => s_side.is_some(),
        Token::B => plan.b.is_some(),
    };
    let pattern: Vec<Token> = pattern.into_iter().filter(|&t| has(t)).collect();

    let mut subs: Vec<(Token, SubSchedule)> = Vec::new();
    let mut bamboos = Vec::new();
    if let Some(side) = &l_side {
        let map = SlotMap::new(&pattern, Token::L);
        let gaps = merged_gaps(&side.sub, &map);
        let own = own_gaps(&side.sub);
        let l_sum = &plan.l_sum.0;
        for ((&b, g), f) in side.sub.members.iter().zip(&gaps).zip(&own) {
            let h = rates.rate(b);
            let (bound, formula) = match l_rule {
                LRule::Inflate(d) => (
                    h * int(f + f.div_ceil(d)),
                    if d == 3 { "(f + ceil(f/3)) h" } else { "(f + ceil(f/2)) h" },
                ),
                LRule::TimesSum(c) => (l_sum * int(c), if c == 4 { "4 H(L')" } else { "8 H(L')" }),
                LRule::None => unreachable!("L side without a rule"),
            };
            bamboos.push(BambooCertificate {
                bamboo: b,
                class: Token::L,
                bound: Frac(bound),
                realized: Frac(h * int(*g)),
                formula,
            });
        }
        subs.push((Token::L, side.sub.clone()));
    }
    if let Some(b) = plan.b {
        let sub = single(b);
        let map = SlotMap::new(&pattern, Token::B);
        let gap = merged_gaps(&sub, &map)[0];
        let factor = (pattern.len() / pattern.iter().filter(|&&t| t == Token::B).count()) as u64;
        bamboos.push(BambooCertificate {
            bamboo: b,
            class: Token::B,
            bound: Frac(&h1 * int(factor)),
            realized: Frac(&h1 * int(gap)),
            formula: if factor == 2 { "2 h_1" } else { "4 h_1" },
        });
        subs.push((Token::B, sub));
    }
    if let Some(side) = &s_side {
        let map = SlotMap::new(&pattern, Token::S);
        let gaps = merged_gaps(&side.sub, &map);
        let main_bound = side.main_bound.clone().expect("S side uses the Main Algorithm");
        let factor = if pattern.len() == 1 { 1 } else { s_factor };
        for (&b, g) in side.sub.members.iter().zip(&gaps) {
            bamboos.push(BambooCertificate {
                bamboo: b,
                class: Token::S,
                bound: Frac(&main_bound * int(factor)),
                realized: Frac(rates.rate(b) * int(*g)),
                formula: "c (1 + delta) H(S)",
            });
        }
        subs.push((Token::S, side.sub.clone()));
    }
    bamboos.sort_by_key(|c| c.bamboo);

    let certificate = Certificate {
        case: case.id(),
        pattern: pattern_string(&pattern, case),
        l_source,
        bamboos,
        max_s_rate: Frac(max_s_rate),
    };
    Ok(EightFifths {
        case,
        plan,
        pattern,
        subs,
        certificate,
    })
}

#[derive(Debug, Clone, Copy)]
enum LRule {
    None,
    /// `(f + ceil(f/d)) h` with `f` the bamboo's gap in its own schedule.
    Inflate(u64),
    /// `c * H(L')`.
    TimesSum(u64),
}

/// Largest gap of each member within its own sub-schedule.
fn own_gaps(sub: &SubSchedule) -> Vec<u64> {
    merged_gaps(sub, &SlotMap { offsets: vec![1], len: 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{simulate_discrete, SimOptions};

    fn rv(p: &[(i64, i64)]) -> RateVector {
        RateVector::from_pairs(p).unwrap()
    }

    #[test]
    fn split_examples() {
        let r = rv(&[(1, 2), (1, 4), (1, 8), (1, 8)]);
        let p = split(&r, &int(4)).unwrap();
        assert_eq!((p.l.clone(), p.s.clone()), (vec![1, 2], vec![3, 4]));
        assert_eq!(p.l_sum.0, ratio(3, 4));
        let u = RateVector::uniform(8, ratio(1, 8)).unwrap();
        assert!(split(&u, &int(4)).unwrap().l.is_empty());
        assert!(matches!(split(&rv(&[(1, 2)]), &int(3)), Err(Error::NotNormalized { .. })));
        let m = default_m(10_000);
        assert!(m < ratio(9, 10) && m > ratio(89, 100));
    }

    #[test]
    fn rebalance_stays_within_one_rate() {
        let mut rates = vec![ratio(45, 100)];
        rates.extend(std::iter::repeat(ratio(1, 100)).take(55));
        let r = RateVector::new(rates).unwrap();
        let p = split(&r, &int(3)).unwrap();
        assert_eq!(p.s_sum.0, ratio(55, 100));
        let q = rebalance(&r, &p, &ratio(2, 5)).unwrap();
        assert!(q.s_sum.0 >= ratio(2, 5) && q.s_sum.0 <= ratio(41, 100));
        let same = rebalance(&r, &p, &p.s_sum.0).unwrap();
        assert_eq!(same.s, p.s);
        assert!(rebalance(&r, &p, &ratio(3, 5)).is_err());
    }

    #[test]
    fn merge_examples() {
        let s = SubSchedule {
            members: vec![2, 3],
            schedule: CyclicSchedule::List(ListSchedule::new(vec![], vec![1, 2])),
        };
        let m = merge_schedules(
            vec![Token::B, Token::S],
            vec![(Token::B, SubStream::Single(1)), (Token::S, SubStream::new(&s))],
        )
        .unwrap();
        assert_eq!(m.take(6).collect::<Vec<_>>(), vec![1, 2, 1, 3, 1, 2]);

        let l = SubSchedule {
            members: vec![10, 11],
            schedule: CyclicSchedule::List(ListSchedule::new(vec![], vec![1, 2])),
        };
        let s = SubSchedule {
            members: vec![20, 21, 22],
            schedule: CyclicSchedule::List(ListSchedule::new(vec![], vec![1, 2, 3])),
        };
        let m = merge_schedules(
            vec![Token::L, Token::L, Token::L, Token::S],
            vec![(Token::L, SubStream::new(&l)), (Token::S, SubStream::new(&s))],
        )
        .unwrap();
        assert_eq!(
            m.take(12).collect::<Vec<_>>(),
            vec![10, 11, 10, 20, 11, 10, 11, 21, 10, 11, 10, 22]
        );
    }

    #[test]
    fn case_six_on_three_bamboos() {
        let r = rv(&[(3, 4), (1, 8), (1, 8)]);
        let out = eight_fifths(&r, Some(int(2)), EightFifthsOptions::default()).unwrap();
        assert_eq!(out.case, Case::Six);
        assert_eq!(out.certificate.pattern, "(B,S)");
        assert!(out.certificate.holds());
        let b1 = &out.certificate.bamboos[0];
        assert_eq!(b1.realized.0, ratio(3, 2));
    }

    #[test]
    fn main_only_when_l_is_empty() {
        let r = RateVector::uniform(16, ratio(1, 16)).unwrap();
        let out = eight_fifths(&r, None, EightFifthsOptions::default()).unwrap();
        assert_eq!(out.case, Case::MainOnly);
        assert_eq!(out.certificate.realized_max(), ratio(7, 4));
        assert!(out.certificate.holds());
    }

    #[test]
    fn exact_merged_heights_match_simulation() {
        let r = rv(&[(3, 10), (1, 5), (1, 10), (1, 10), (1, 10), (1, 20), (1, 20), (1, 20), (1, 20)]);
        for m in [int(3), int(6), int(11), ratio(11, 2)] {
            let out = eight_fifths(&r, Some(m.clone()), EightFifthsOptions::default()).unwrap();
            let prefix: Vec<usize> = out.stream().take(20_000).collect();
            let sim = simulate_discrete(&r, &prefix, SimOptions { count_tail: false }).unwrap();
            for c in &out.certificate.bamboos {
                assert_eq!(sim.bamboo_max(c.bamboo), &c.realized.0, "m = {m} bamboo {}", c.bamboo);
            }
        }
    }

    #[test]
    fn cyclic_form_reproduces_certificate() {
        let r = rv(&[(3, 10), (1, 5), (1, 10), (1, 10), (1, 10), (1, 20), (1, 20), (1, 20), (1, 20)]);
        for m in [int(3), int(6), int(11)] {
            let out = eight_fifths(&r, Some(m), EightFifthsOptions::default()).unwrap();
            let list = out.cyclic(1 << 20).unwrap();
            let rep = crate::sim::evaluate_cyclic(&r, &CyclicSchedule::List(list)).unwrap();
            for c in &out.certificate.bamboos {
                assert_eq!(rep.bamboo_max(c.bamboo), &c.realized.0);
            }
        }
    }
}
