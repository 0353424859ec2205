use std::fs;
use std::io::Read;
use std::path::Path;

use bamboo_core::rational::{self, Rational};
use bamboo_core::{CyclicSchedule, Error, ListSchedule, RateVector, Residue, ResidueSchedule, ScheduleFile};
use num_traits::Zero;
use serde_json::Value;

/// Failure classes, mapped to exit codes by `main`.
#[derive(Debug)]
pub enum CliError {
    /// Malformed input; the message names the offending field.
    Input(String),
    /// A requested certification failed.
    Certification(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Certification(_) | CliError::Runtime(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Certification(m) | CliError::Runtime(m) => m,
        }
    }

    /// Wraps a core error raised while processing `field`.
    pub fn core(field: &str, e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } | Error::Internal(_) => CliError::Runtime(format!("{field}: {e}")),
            _ => CliError::Input(format!("{field}: {e}")),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_text(path: &Path) -> CliResult<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Input(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

pub fn parse_frac(field: &str, s: &str) -> CliResult<Rational> {
    rational::parse(s.trim()).map_err(|_| CliError::Input(format!("{field}: cannot parse {s:?} as a fraction")))
}

fn value_frac(field: &str, v: &Value) -> CliResult<Rational> {
    match v {
        Value::String(s) => parse_frac(field, s),
        Value::Number(n) => parse_frac(field, &n.to_string()),
        _ => Err(CliError::Input(format!("{field}: expected a fraction string or number"))),
    }
}

/// An instance in input order.
#[derive(Debug, Clone)]
pub struct Instance {
    pub rates: Vec<Rational>,
    pub travel: Option<Vec<Vec<Rational>>>,
    /// 1-based.
    pub start: Option<usize>,
}

impl Instance {
    pub fn total(&self) -> Rational {
        self.rates.iter().fold(Rational::zero(), |a, b| a + b)
    }
}

pub fn parse_instance(text: &str) -> CliResult<Instance> {
    let doc: Value = serde_json::from_str(text).map_err(|e| CliError::Input(format!("instance: invalid JSON: {e}")))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| CliError::Input("instance: expected a JSON object".into()))?;
    let rates_v = obj
        .get("rates")
        .ok_or_else(|| CliError::Input("rates: missing".into()))?
        .as_array()
        .ok_or_else(|| CliError::Input("rates: expected an array".into()))?;
    if rates_v.is_empty() {
        return Err(CliError::Input("rates: empty".into()));
    }
    let mut rates = Vec::with_capacity(rates_v.len());
    for (i, v) in rates_v.iter().enumerate() {
        let field = format!("rates[{i}]");
        let r = value_frac(&field, v)?;
        if r <= Rational::zero() {
            return Err(CliError::Input(format!("{field}: must be positive")));
        }
        rates.push(r);
    }
    let n = rates.len();
    let travel = match obj.get("travel") {
        None | Some(Value::Null) => None,
        Some(t) => {
            let rows = t
                .as_array()
                .ok_or_else(|| CliError::Input("travel: expected an array of rows".into()))?;
            if rows.len() != n {
                return Err(CliError::Input(format!("travel: expected {n} rows, found {}", rows.len())));
            }
            let mut m = Vec::with_capacity(n);
            for (i, row) in rows.iter().enumerate() {
                let row = row
                    .as_array()
                    .ok_or_else(|| CliError::Input(format!("travel[{i}]: expected an array")))?;
                if row.len() != n {
                    return Err(CliError::Input(format!("travel[{i}]: expected {n} entries, found {}", row.len())));
                }
                let parsed = row
                    .iter()
                    .enumerate()
                    .map(|(j, v)| value_frac(&format!("travel[{i}][{j}]"), v))
                    .collect::<CliResult<Vec<_>>>()?;
                m.push(parsed);
            }
            Some(m)
        }
    };
    let start = match obj.get("start") {
        None | Some(Value::Null) => None,
        Some(v) => match v.as_u64() {
            Some(s) if s >= 1 && s as usize <= n => Some(s as usize),
            _ => return Err(CliError::Input(format!("start: expected an integer in 1..={n}"))),
        },
    };
    Ok(Instance { rates, travel, start })
}

pub fn load_instance(path: &Path) -> CliResult<Instance> {
    parse_instance(&read_text(path)?)
}

pub fn parse_schedule(text: &str) -> CliResult<CyclicSchedule> {
    let file: ScheduleFile = serde_json::from_str(text).map_err(|e| {
        CliError::Input(format!(
            "schedule: expected {{\"residue\": [[p, q], ...]}} or {{\"preamble\": [...], \"period\": [...]}}: {e}"
        ))
    })?;
    CyclicSchedule::try_from(file).map_err(|e| CliError::core("schedule", e))
}

pub fn load_schedule(path: &Path) -> CliResult<CyclicSchedule> {
    parse_schedule(&read_text(path)?)
}

pub fn schedule_json(s: &CyclicSchedule) -> Value {
    serde_json::to_value(ScheduleFile::from(s)).expect("schedule serializes")
}

/// Sorted view of an input-order rate list. Core algorithms number bamboos
/// by non-increasing rate; this maps between the two numberings.
#[derive(Debug, Clone)]
pub struct Sorted {
    pub rates: RateVector,
    /// `order[k]` = input position (0-based) of sorted bamboo `k + 1`.
    pub order: Vec<usize>,
    /// `rank[p]` = sorted bamboo (1-based) at input position `p`.
    pub rank: Vec<usize>,
}

impl Sorted {
    pub fn new(rates: &[Rational]) -> CliResult<Self> {
        let (rv, order) = RateVector::from_unsorted(rates.to_vec()).map_err(|e| CliError::core("rates", e))?;
        Ok(Self::from_order(rv, order))
    }

    pub fn from_order(rates: RateVector, order: Vec<usize>) -> Self {
        let mut rank = vec![0; order.len()];
        for (k, &p) in order.iter().enumerate() {
            rank[p] = k + 1;
        }
        Sorted { rates, order, rank }
    }

    /// Reorders a per-bamboo vector from sorted to input order.
    pub fn to_input<T: Clone>(&self, v: &[T]) -> Vec<T> {
        (0..v.len()).map(|p| v[self.rank[p] - 1].clone()).collect()
    }

    /// Sorted 1-based index to input 1-based index; 0 (idle) is kept.
    pub fn index_to_input(&self, k: usize) -> usize {
        if k == 0 {
            0
        } else {
            self.order[k - 1] + 1
        }
    }

    pub fn schedule_to_input(&self, s: &CyclicSchedule) -> CyclicSchedule {
        match s {
            CyclicSchedule::Residue(r) => {
                let res: Vec<Residue> = self.to_input(r.residues());
                CyclicSchedule::Residue(ResidueSchedule::new(res).expect("permutation keeps residues valid"))
            }
            CyclicSchedule::List(l) => CyclicSchedule::List(ListSchedule::new(
                l.preamble.iter().map(|&k| self.index_to_input(k)).collect(),
                l.period.iter().map(|&k| self.index_to_input(k)).collect(),
            )),
        }
    }

    pub fn schedule_from_input(&self, s: &CyclicSchedule) -> CliResult<CyclicSchedule> {
        let n = self.order.len();
        let map = |i: usize| -> CliResult<usize> {
            match i {
                0 => Ok(0),
                i if i <= n => Ok(self.rank[i - 1]),
                _ => Err(CliError::Input(format!("schedule: bamboo index {i} out of range 1..={n}"))),
            }
        };
        Ok(match s {
            CyclicSchedule::Residue(r) => {
                if r.len() != n {
                    return Err(CliError::Input(format!(
                        "schedule: residue lists {} bamboos, instance has {n}",
                        r.len()
                    )));
                }
                let res: Vec<Residue> = self.order.iter().map(|&p| r.residues()[p]).collect();
                CyclicSchedule::Residue(ResidueSchedule::new(res).map_err(|e| CliError::core("schedule", e))?)
            }
            CyclicSchedule::List(l) => CyclicSchedule::List(ListSchedule::new(
                l.preamble.iter().map(|&i| map(i)).collect::<CliResult<_>>()?,
                l.period.iter().map(|&i| map(i)).collect::<CliResult<_>>()?,
            )),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use bamboo_core::rational::ratio;

    #[test]
    fn names_the_bad_field() {
        let e = parse_instance(r#"{"rates": ["1/2", "x"]}"#).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.message().starts_with("rates[1]"), "{}", e.message());
        let e = parse_instance(r#"{"rates": ["1/2"], "travel": [["0", "1"]]}"#).unwrap_err();
        assert!(e.message().starts_with("travel"), "{}", e.message());
        let e = parse_instance(r#"{"rates": ["1/2", "1/4"], "start": 3}"#).unwrap_err();
        assert!(e.message().starts_with("start"), "{}", e.message());
        assert!(parse_instance(r#"{"rate": []}"#).unwrap_err().message().starts_with("rates"));
    }

    #[test]
    fn accepts_decimals_and_integers() {
        let i = parse_instance(r#"{"rates": [0.25, "1/2", 1]}"#).unwrap();
        assert_eq!(i.rates, vec![ratio(1, 4), ratio(1, 2), ratio(1, 1)]);
    }

    #[test]
    fn sorted_round_trip() {
        let s = Sorted::new(&[ratio(1, 4), ratio(1, 2), ratio(1, 4)]).unwrap();
        assert_eq!(s.order, vec![1, 0, 2]);
        let sched = CyclicSchedule::List(ListSchedule::new(vec![2], vec![1, 2, 1, 3]));
        let back = s.schedule_from_input(&s.schedule_to_input(&sched)).unwrap();
        assert_eq!(back, sched);
        assert_eq!(s.to_input(&["a", "b", "c"]), vec!["b", "a", "c"]);
    }
}
