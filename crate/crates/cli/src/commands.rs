use std::path::Path;

use bamboo_core::eight_fifths::{eight_fifths, EightFifthsOptions};
use bamboo_core::gen::{planted, random_rates};
use bamboo_core::online::{
    diverging, gen_reduce_fastest_lb, gen_reduce_max_12_7_family, reduce_max, reduce_max_stages,
    reduce_fastest_with_threshold, trace, OnlineRun,
};
use bamboo_core::oracle::{optimal_height, pinwheel_witness, DEFAULT_STATE_BUDGET};
use bamboo_core::pinwheel::{density, density_34_frequencies, main_algorithm, pinwheel_via_main, two_approx};
use bamboo_core::rational::{format, int, ratio, Rational};
use bamboo_core::schedule::DEFAULT_EXPANSION_CAP;
use bamboo_core::{evaluate_cyclic, CyclicSchedule, Frac, InstanceFile, RateVector};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::input::{load_instance, load_schedule, parse_frac, parse_schedule, schedule_json, write_text, CliError, CliResult, Sorted};
use crate::report::{to_json, Report};
use crate::{ApproxAlgo, ApproxArgs, Family, GenArgs, GenFamily, OracleCommand, OracleOpts, SimulateArgs, Strategy, VerifyArgs};

pub const BUDGET_ENV: &str = "BAMBOO_ORACLE_BUDGET";

pub fn budget(o: &OracleOpts) -> CliResult<usize> {
    if let Some(b) = o.budget {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("{BUDGET_ENV}: expected a positive integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_STATE_BUDGET),
    }
}

pub fn check_oracle_limit(n: usize, limit: usize) -> CliResult<()> {
    if n > limit {
        return Err(CliError::Input(format!(
            "oracle-compare: n = {n} exceeds the oracle limit {limit} (raise --oracle-limit)"
        )));
    }
    Ok(())
}

pub fn oracle_opt(rates: &RateVector, budget: usize) -> CliResult<Rational> {
    Ok(optimal_height(rates, budget).map_err(|e| CliError::core("oracle", e))?.height)
}

/// Writes to `out`, or stdout when absent.
pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn gen(a: GenArgs) -> CliResult<()> {
    let rates = match a.family {
        GenFamily::Random { n, seed, max_weight, head } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            match head {
                Some(h) => planted(&mut rng, n, &parse_frac("head", &h)?),
                None => random_rates(&mut rng, n, max_weight),
            }
            .map_err(|e| CliError::core("gen", e))?
        }
        GenFamily::Uniform { n } => {
            if n == 0 {
                return Err(CliError::Input("n: must be positive".into()));
            }
            RateVector::uniform(n, ratio(1, n as i64)).map_err(|e| CliError::core("n", e))?
        }
        GenFamily::Rm127 { k } => gen_reduce_max_12_7_family(k).map_err(|e| CliError::core("k", e))?,
        GenFamily::Rf { x, eps } => {
            gen_reduce_fastest_lb(&parse_frac("x", &x)?, &parse_frac("eps", &eps)?).map_err(|e| CliError::core("x", e))?
        }
    };
    emit(a.out.as_deref(), &to_json(&InstanceFile::from_rates(&rates)))
}

fn family_rates(a: &SimulateArgs) -> CliResult<(Sorted, Value, Option<u64>)> {
    match (a.family, &a.instance) {
        (Some(_), Some(_)) => Err(CliError::Input("instance: give either a file or --family, not both".into())),
        (None, None) => Err(CliError::Input("instance: missing (give a file or --family)".into())),
        (None, Some(p)) => {
            let inst = load_instance(p)?;
            Ok((Sorted::new(&inst.rates)?, json!({ "file": p.display().to_string() }), None))
        }
        (Some(Family::Rm127), None) => {
            let k = a.k.ok_or_else(|| CliError::Input("k: required for --family rm127".into()))?;
            let r = gen_reduce_max_12_7_family(k).map_err(|e| CliError::core("k", e))?;
            let n = r.len();
            Ok((Sorted::from_order(r, (0..n).collect()), json!({ "family": "rm127", "k": k }), Some(18 * k + 10)))
        }
        (Some(Family::Rf), None) => {
            let x = a.x.as_deref().ok_or_else(|| CliError::Input("x: required for --family rf".into()))?;
            let eps = parse_frac("eps", &a.eps)?;
            let r = gen_reduce_fastest_lb(&parse_frac("x", x)?, &eps).map_err(|e| CliError::core("x", e))?;
            let n = r.len();
            Ok((
                Sorted::from_order(r, (0..n).collect()),
                json!({ "family": "rf", "x": x, "eps": format(&eps) }),
                None,
            ))
        }
    }
}

pub fn simulate(a: SimulateArgs) -> CliResult<()> {
    let (sorted, source, default_horizon) = family_rates(&a)?;
    let horizon = a.horizon.or(default_horizon).unwrap_or(1000);
    if horizon == 0 {
        return Err(CliError::Input("horizon: must be positive".into()));
    }
    let rates = &sorted.rates;
    let (run, threshold): (OnlineRun, Option<Rational>) = match a.strategy {
        Strategy::ReduceMax => (reduce_max(rates, horizon), None),
        Strategy::ReduceFastest => {
            let x = parse_frac("x", a.x.as_deref().ok_or_else(|| CliError::Input("x: required for reduce-fastest".into()))?)?;
            if x <= int(0) {
                return Err(CliError::Input("x: must be positive".into()));
            }
            let t = if a.scale_by_h { &x * rates.total() } else { x };
            (reduce_fastest_with_threshold(rates, &t, horizon), Some(t))
        }
    };
    let total = rates.total().clone();
    let mut report = Report::from_sim(&sorted, &run.report, &total);
    if a.oracle_compare {
        check_oracle_limit(rates.len(), a.oracle_limit)?;
        report = report.with_oracle(&oracle_opt(rates, budget(&a.oracle)?)?);
    }
    if let Some(path) = &a.trace {
        let mut csv = String::from("round,cut_index,max_height_num,max_height_den\n");
        for (round, cut, top) in trace(rates, &run.schedule) {
            csv.push_str(&format!("{round},{},{},{}\n", sorted.index_to_input(cut), top.numer(), top.denom()));
        }
        write_text(path, &csv)?;
    }
    let stages = match (&a.family, a.strategy) {
        (Some(Family::Rm127), Strategy::ReduceMax) => reduce_max_stages(rates, &run.schedule).ok().map(|st| {
            json!({
                "stage_ends": st.stage_ends,
                "uncut_after_stage3": st.uncut_after_stage3,
                "b1_height_after": Frac(st.b1_height_after),
                "b1_max_until": Frac(st.b1_max_until),
                "four_h1": Frac(int(4) * rates.rate(1)),
            })
        }),
        _ => None,
    };
    let out = json!({
        "strategy": match a.strategy { Strategy::ReduceMax => "reduce-max", Strategy::ReduceFastest => "reduce-fastest" },
        "source": source,
        "horizon": horizon,
        "threshold": threshold.map(Frac),
        "idle_rounds": run.schedule.iter().filter(|&&c| c == 0).count(),
        "diverging": diverging(rates, &run.schedule).into_iter().map(|k| sorted.index_to_input(k)).collect::<Vec<_>>(),
        "steady_state_max": run.report.steady_state_max,
        "stages": stages,
        "report": report,
    });
    emit(None, &to_json(&out))
}

/// Re-reads the emitted schedule and checks it reproduces `expected`.
fn revalidate(sorted: &Sorted, schedule: &CyclicSchedule, expected: &Rational) -> CliResult<()> {
    let text = serde_json::to_string(&schedule_json(&sorted.schedule_to_input(schedule))).expect("serializable");
    let back = sorted.schedule_from_input(&parse_schedule(&text)?)?;
    let rep = evaluate_cyclic(&sorted.rates, &back).map_err(|e| CliError::core("schedule", e))?;
    if rep.global_max() != expected {
        return Err(CliError::Certification(format!(
            "schedule: reloaded schedule gives {} instead of {}",
            format(rep.global_max()),
            format(expected)
        )));
    }
    Ok(())
}

pub fn approx(a: ApproxArgs) -> CliResult<()> {
    let inst = load_instance(&a.instance)?;
    let sorted = Sorted::new(&inst.rates)?;
    let rates = &sorted.rates;
    let total = rates.total().clone();
    let budget = budget(&a.oracle)?;
    if a.oracle_compare {
        check_oracle_limit(rates.len(), a.oracle_limit)?;
    }
    let eval = |s: &CyclicSchedule| evaluate_cyclic(rates, s).map_err(|e| CliError::core("schedule", e));

    let mut extra = serde_json::Map::new();
    let (name, schedule, diagnostics, report) = match a.algorithm {
        ApproxAlgo::Main => {
            let out = main_algorithm(rates).map_err(|e| CliError::core("main", e))?;
            let s = CyclicSchedule::Residue(out.schedule);
            let sim = eval(&s)?;
            let mut d = serde_json::to_value(&out.diagnostics).expect("serializable");
            d["realized_max"] = json!(sim.global_max);
            let report = Report::from_sim(&sorted, &sim, &total).with_bound(out.diagnostics.bound.0.clone());
            ("main", Some(s), d, Some(report))
        }
        ApproxAlgo::Two => {
            let out = two_approx(rates).map_err(|e| CliError::core("two", e))?;
            let s = CyclicSchedule::Residue(out.schedule);
            let sim = eval(&s)?;
            let bound = int(2) * &total;
            let d = json!({
                "freqs": sorted.to_input(&out.freqs),
                "density": Frac(density(&out.freqs)),
                "bound": Frac(bound.clone()),
                "realized_max": sim.global_max,
            });
            ("two", Some(s), d, Some(Report::from_sim(&sorted, &sim, &total).with_bound(bound)))
        }
        ApproxAlgo::D34 => {
            let freqs = density_34_frequencies(rates).map_err(|e| CliError::core("d34", e))?;
            let bound = (ratio(4, 3) + rates.max() / &total) * &total;
            let (source, s) = match pinwheel_via_main(&freqs) {
                Ok(r) => ("main", Some(CyclicSchedule::Residue(r))),
                Err(_) => match pinwheel_witness(&freqs, budget) {
                    Ok(Some(l)) => ("oracle", Some(CyclicSchedule::List(l))),
                    _ => ("none", None),
                },
            };
            let sim = s.as_ref().map(&eval).transpose()?;
            let d = json!({
                "freqs": sorted.to_input(&freqs),
                "density": Frac(density(&freqs)),
                "bound": Frac(bound.clone()),
                "schedule_source": source,
                "realized_max": sim.as_ref().map(|r| r.global_max.clone()),
            });
            let report = sim.map(|sim| Report::from_sim(&sorted, &sim, &total).with_bound(bound));
            ("d34", s, d, report)
        }
        ApproxAlgo::Eightfifths => {
            let m = a.m.as_deref().map(|m| parse_frac("m", m)).transpose()?;
            let norm = rates.normalized();
            let out = eight_fifths(&norm, m, EightFifthsOptions { state_budget: budget })
                .map_err(|e| CliError::core("eightfifths", e))?;
            let mut cert = out.certificate.clone();
            let mut realized = vec![Rational::from_integer(0.into()); rates.len()];
            let mut bound = Rational::from_integer(0.into());
            for b in &mut cert.bamboos {
                realized[b.bamboo - 1] = b.realized.0.clone();
                bound = bound.max(b.bound.0.clone());
                b.bamboo = sorted.index_to_input(b.bamboo);
            }
            let mut report = Report::new(&sorted, &realized, &total, &total);
            report.bound = Some(Frac(&bound * &total));
            report.bound_satisfied = Some(out.certificate.holds());
            let prefix: Vec<usize> = out.stream().take(a.prefix).map(|k| sorted.index_to_input(k)).collect();
            let s = out.cyclic(DEFAULT_EXPANSION_CAP).map(CyclicSchedule::List);
            if let Some(s) = &s {
                // The certificate's exact heights must match the closed form.
                let sim = evaluate_cyclic(&norm, s).map_err(|e| CliError::core("schedule", e))?;
                if sim.global_max() != &out.certificate.realized_max() {
                    return Err(CliError::Certification("eightfifths: certificate disagrees with the schedule".into()));
                }
            }
            extra.insert("case".into(), json!(out.case.id()));
            extra.insert("pattern".into(), json!(out.pattern_string()));
            extra.insert("prefix".into(), json!(prefix));
            let d = json!({
                "m": out.plan.m,
                "l": out.plan.l.iter().map(|&k| sorted.index_to_input(k)).collect::<Vec<_>>(),
                "s": out.plan.s.iter().map(|&k| sorted.index_to_input(k)).collect::<Vec<_>>(),
                "b": out.plan.b.map(|k| sorted.index_to_input(k)),
                "certificate_units": "rates normalized to H = 1",
                "certificate": cert,
            });
            ("eightfifths", s, d, Some(report))
        }
    };

    let report = match (report, a.oracle_compare) {
        (Some(r), true) => Some(r.with_oracle(&oracle_opt(rates, budget)?)),
        (r, _) => r,
    };
    let mut verified = None;
    if a.verify {
        let ok = match (&schedule, &report) {
            (Some(s), Some(r)) if !matches!(a.algorithm, ApproxAlgo::Eightfifths) => {
                revalidate(&sorted, s, &r.global_max.0)?;
                r.bound_satisfied == Some(true)
            }
            (_, Some(r)) => r.bound_satisfied == Some(true),
            _ => false,
        };
        verified = Some(ok);
    }
    if let (Some(path), Some(s)) = (&a.schedule_out, &schedule) {
        write_text(path, &to_json(&schedule_json(&sorted.schedule_to_input(s))))?;
    }
    let mut out = serde_json::Map::new();
    out.insert("algorithm".into(), json!(name));
    out.extend(extra);
    out.insert("schedule".into(), schedule.as_ref().map(|s| schedule_json(&sorted.schedule_to_input(s))).into());
    out.insert("diagnostics".into(), diagnostics);
    out.insert("report".into(), json!(report));
    if let Some(v) = verified {
        out.insert("verified".into(), json!(v));
    }
    emit(None, &to_json(&Value::Object(out)))?;
    match verified {
        Some(false) => Err(CliError::Certification(format!("{name}: bound not certified"))),
        _ => Ok(()),
    }
}

pub fn oracle(c: OracleCommand) -> CliResult<()> {
    match c {
        OracleCommand::Opt { instance, schedule_out, oracle } => {
            let inst = load_instance(&instance)?;
            let sorted = Sorted::new(&inst.rates)?;
            let opt = optimal_height(&sorted.rates, budget(&oracle)?).map_err(|e| CliError::core("oracle", e))?;
            if let Some(p) = schedule_out {
                write_text(&p, &to_json(&schedule_json(&sorted.schedule_to_input(&opt.schedule))))?;
            }
            println!("{}", format(&opt.height));
            Ok(())
        }
        OracleCommand::Pinwheel { freqs, schedule_out, oracle } => {
            if let Some(i) = freqs.iter().position(|&f| f == 0) {
                return Err(CliError::Input(format!("freqs[{i}]: must be positive")));
            }
            let w = pinwheel_witness(&freqs, budget(&oracle)?).map_err(|e| CliError::core("oracle", e))?;
            if let (Some(p), Some(l)) = (schedule_out, &w) {
                write_text(&p, &to_json(&schedule_json(&CyclicSchedule::List(l.clone()))))?;
            }
            println!("{}", if w.is_some() { "feasible" } else { "infeasible" });
            Ok(())
        }
    }
}

pub fn verify(a: VerifyArgs) -> CliResult<()> {
    let inst = load_instance(&a.instance)?;
    let sorted = Sorted::new(&inst.rates)?;
    let s = sorted.schedule_from_input(&load_schedule(&a.schedule)?)?;
    let sim = evaluate_cyclic(&sorted.rates, &s).map_err(|e| CliError::core("schedule", e))?;
    let total = sorted.rates.total().clone();
    let mut report = Report::from_sim(&sorted, &sim, &total);
    if let Some(b) = &a.bound {
        report = report.with_bound(parse_frac("bound", b)?);
    }
    let expected = a.expect_max.as_deref().map(|e| parse_frac("expect-max", e)).transpose()?;
    let matches = expected.as_ref().map(|e| e == sim.global_max());
    let out = json!({
        "report": report,
        "steady_state_max": sim.steady_state_max,
        "expect_max_matches": matches,
    });
    emit(None, &to_json(&out))?;
    if report.bound_satisfied == Some(false) {
        return Err(CliError::Certification(format!("global max {} exceeds the bound", report.global_max)));
    }
    if matches == Some(false) {
        return Err(CliError::Certification(format!("global max {} differs from the expected value", report.global_max)));
    }
    Ok(())
}
