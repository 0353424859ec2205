use bamboo_core::continuous::{self, gen_spiral, Algorithm};
use bamboo_core::eight_fifths::{eight_fifths, EightFifthsOptions};
use bamboo_core::gen::{planted, planted_min_n};
use bamboo_core::online::{gen_reduce_fastest_lb, gen_reduce_max_12_7_family, reduce_fastest_with_threshold, reduce_max, reduce_max_stages};
use bamboo_core::oracle::optimal_height;
use bamboo_core::pinwheel::{main_algorithm, two_approx};
use bamboo_core::rational::{format, int, to_f64, Rational};
use bamboo_core::{evaluate_cyclic, CyclicSchedule, RateVector};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::commands::{budget, check_oracle_limit, emit};
use crate::input::{parse_frac, CliError, CliResult};
use crate::{BenchArgs, BenchSuite};

#[derive(Debug, Default)]
struct Row {
    suite: &'static str,
    algorithm: &'static str,
    param: String,
    n: usize,
    h1_over_h: Option<Rational>,
    total: Option<Rational>,
    realized: Option<Rational>,
    bound: Option<Rational>,
    oracle: Option<Rational>,
    d1: Option<Rational>,
}

const HEADER: &str =
    "id,suite,algorithm,param,n,h1_over_H,H,realized_max,bound,oracle_opt,ratio_vs_H,ratio_vs_oracle,max_over_d1,ratio_vs_H_approx";

fn cell(r: &Option<Rational>) -> String {
    r.as_ref().map(format).unwrap_or_default()
}

impl Row {
    fn csv(&self, id: usize) -> String {
        let div = |a: &Option<Rational>, b: &Option<Rational>| match (a, b) {
            (Some(a), Some(b)) => Some(a / b),
            _ => None,
        };
        let vs_h = div(&self.realized, &self.total);
        [
            id.to_string(),
            self.suite.into(),
            self.algorithm.into(),
            self.param.clone(),
            self.n.to_string(),
            cell(&self.h1_over_h),
            cell(&self.total),
            cell(&self.realized),
            cell(&self.bound),
            cell(&self.oracle),
            cell(&vs_h),
            cell(&div(&self.realized, &self.oracle)),
            cell(&div(&self.realized, &self.d1)),
            vs_h.as_ref().map(|r| format!("{:.6}", to_f64(r))).unwrap_or_default(),
        ]
        .join(",")
    }
}

fn core<T>(what: &str, r: bamboo_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::core(what, e))
}

fn random_row(suite: BenchSuite, head: &Rational, n: usize, seed: u64, id: u64, oracle: Option<usize>) -> CliResult<Row> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    let rates = core("head", planted(&mut rng, n, head))?;
    let total = rates.total().clone();
    let (algorithm, realized, bound) = match suite {
        BenchSuite::Main => {
            let out = core("main", main_algorithm(&rates))?;
            let rep = core("main", evaluate_cyclic(&rates, &CyclicSchedule::Residue(out.schedule)))?;
            ("main", rep.global_max().clone(), out.diagnostics.bound.0)
        }
        BenchSuite::Two => {
            let out = core("two", two_approx(&rates))?;
            let rep = core("two", evaluate_cyclic(&rates, &CyclicSchedule::Residue(out.schedule)))?;
            ("two", rep.global_max().clone(), int(2) * &total)
        }
        _ => {
            let opts = EightFifthsOptions {
                state_budget: oracle.unwrap_or(bamboo_core::oracle::DEFAULT_STATE_BUDGET),
            };
            let out = core("eightfifths", eight_fifths(&rates, None, opts))?;
            let bound = out.certificate.bamboos.iter().map(|b| b.bound.0.clone()).max().expect("nonempty");
            ("eightfifths", out.certificate.realized_max(), bound)
        }
    };
    let opt = match oracle.map(|b| optimal_height(&rates, b)) {
        Some(Ok(o)) => Some(o.height),
        // Budget exhaustion leaves the cell empty.
        Some(Err(bamboo_core::Error::BudgetExceeded { .. })) | None => None,
        Some(Err(e)) => return Err(CliError::core("oracle", e)),
    };
    Ok(Row {
        suite: "random",
        algorithm,
        param: format!("seed={seed}"),
        n,
        h1_over_h: Some(rates.max() / &total),
        total: Some(total),
        realized: Some(realized),
        bound: Some(bound),
        oracle: opt,
        d1: None,
    })
}

fn family_row(rates: &RateVector, algorithm: &'static str, param: String, realized: Rational, bound: Option<Rational>, oracle: Option<Rational>) -> Row {
    Row {
        suite: "family",
        algorithm,
        param,
        n: rates.len(),
        h1_over_h: Some(rates.max() / rates.total()),
        total: Some(rates.total().clone()),
        realized: Some(realized),
        bound,
        oracle,
        d1: None,
    }
}

pub fn run(a: BenchArgs) -> CliResult<()> {
    let seed = a.seed.ok_or_else(|| CliError::Input("seed: required in bench mode".into()))?;
    let budget = budget(&a.oracle)?;
    let rows: Vec<Row> = match a.suite {
        BenchSuite::Main | BenchSuite::Two | BenchSuite::Eightfifths => {
            let heads = a
                .heads
                .iter()
                .enumerate()
                .map(|(i, h)| parse_frac(&format!("heads[{i}]"), h))
                .collect::<CliResult<Vec<_>>>()?;
            let mut jobs = Vec::new();
            for h in &heads {
                let n = a.n.max(planted_min_n(h));
                if a.oracle_compare {
                    check_oracle_limit(n, a.oracle_limit)?;
                }
                for _ in 0..a.count {
                    jobs.push((h.clone(), n));
                }
            }
            let oracle = a.oracle_compare.then_some(budget);
            jobs.par_iter()
                .enumerate()
                .map(|(id, (h, n))| random_row(a.suite, h, *n, seed, id as u64, oracle))
                .collect::<CliResult<_>>()?
        }
        BenchSuite::ReduceMax => a
            .ks
            .par_iter()
            .map(|&k| {
                let r = core("ks", gen_reduce_max_12_7_family(k))?;
                let run = reduce_max(&r, 18 * k + 10);
                let st = core("ks", reduce_max_stages(&r, &run.schedule))?;
                Ok(family_row(&r, "reduce-max", format!("k={k}"), st.b1_height_after, None, None))
            })
            .collect::<CliResult<_>>()?,
        BenchSuite::ReduceFastest => {
            let eps = parse_frac("eps", &a.eps)?;
            let xs = a
                .xs
                .iter()
                .enumerate()
                .map(|(i, x)| parse_frac(&format!("xs[{i}]"), x))
                .collect::<CliResult<Vec<_>>>()?;
            xs.par_iter()
                .map(|x| {
                    let r = core("xs", gen_reduce_fastest_lb(x, &eps))?;
                    let run = reduce_fastest_with_threshold(&r, x, 2000);
                    let opt = core("oracle", optimal_height(&r, budget))?.height;
                    let param = format!("x={};eps={}", format(x), format(&eps));
                    Ok(family_row(&r, "reduce-fastest", param, run.report.global_max().clone(), None, Some(opt)))
                })
                .collect::<CliResult<_>>()?
        }
        BenchSuite::Spiral => a
            .ns
            .par_iter()
            .map(|&n| {
                let sp = core("ns", gen_spiral(n))?;
                let inst = &sp.instance;
                let plan = continuous::plan(inst, Algorithm::Three);
                let worst = plan
                    .bounds
                    .iter()
                    .enumerate()
                    .map(|(i, b)| &b.0 / inst.rate(i + 1))
                    .max()
                    .expect("nonempty");
                let run = core("spiral", continuous::run(inst, Algorithm::Three, &(int(2) * worst)))?;
                let bound = plan.bounds.iter().map(|b| b.0.clone()).max();
                Ok(Row {
                    suite: "spiral",
                    algorithm: "continuous-3",
                    param: format!("d1={}", format(&sp.d1)),
                    n,
                    h1_over_h: Some(inst.rates().max().clone()),
                    total: Some(Rational::from_integer(1.into())),
                    realized: Some(run.report.global_max().clone()),
                    bound,
                    oracle: None,
                    d1: Some(sp.d1.clone()),
                })
            })
            .collect::<CliResult<_>>()?,
    };
    let mut csv = format!("{HEADER}\n");
    for (id, r) in rows.iter().enumerate() {
        csv.push_str(&r.csv(id));
        csv.push('\n');
    }
    emit(a.out.as_deref(), &csv)
}
