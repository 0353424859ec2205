use bamboo_core::continuous::{
    self, gen_random_grid, gen_random_line, gen_spiral, gen_two_cluster, lower_bound_diameter, lower_bound_mst,
    lower_bound_mst_exhaustive, periodic_walk, Algorithm, MetricInstance, Visit,
};
use bamboo_core::rational::Rational;
use bamboo_core::Frac;
use serde_json::json;

use crate::commands::emit;
use crate::input::{load_instance, parse_frac, write_text, CliError, CliResult, Instance, Sorted};
use crate::report::{to_json, Report};
use crate::{ContinuousCommand, MetricFamily};

/// Metric instance in sorted numbering plus the map back to input order.
fn metric(inst: Instance) -> CliResult<(MetricInstance, Sorted, Rational)> {
    let total = inst.total();
    let travel = inst
        .travel
        .ok_or_else(|| CliError::Input("travel: missing (continuous instances need a travel matrix)".into()))?;
    let (mi, order) =
        continuous::from_unsorted(inst.rates, travel, inst.start.map(|s| s - 1)).map_err(|e| CliError::core("travel", e))?;
    let sorted = Sorted::from_order(mi.rates().clone(), order);
    Ok((mi, sorted, total))
}

fn walk_csv(sorted: &Sorted, visits: &[Visit]) -> String {
    let mut csv = String::from("step,point,time\n");
    for (i, v) in visits.iter().enumerate() {
        csv.push_str(&format!("{i},{},{}\n", sorted.index_to_input(v.point), v.time));
    }
    csv
}

fn lower_bound(mi: &MetricInstance) -> Rational {
    lower_bound_diameter(mi).max(lower_bound_mst(mi).0)
}

pub fn run(c: ContinuousCommand) -> CliResult<()> {
    match c {
        ContinuousCommand::Run {
            instance,
            algo,
            horizon,
            max_iterations,
            walk_out,
            verify,
        } => {
            let (mi, sorted, total) = metric(load_instance(&instance)?)?;
            let algorithm = Algorithm::from_number(algo).map_err(|e| CliError::core("algo", e))?;
            let (plan, sim, visits, cycle) = match horizon {
                Some(h) => {
                    let h = parse_frac("horizon", &h)?;
                    let r = continuous::run(&mi, algorithm, &h).map_err(|e| CliError::core("horizon", e))?;
                    (r.plan, r.report, r.walk.visits, None)
                }
                None => {
                    let (plan, pw) = periodic_walk(&mi, algorithm, max_iterations)
                        .map_err(|e| CliError::core("walk", e))?
                        .ok_or_else(|| {
                            CliError::Runtime("walk: state did not repeat within --max-iterations; pass --horizon".into())
                        })?;
                    let sim = pw.report(&mi).map_err(|e| CliError::core("walk", e))?;
                    let cycle = json!({
                        "cycle_start_step": pw.preamble.len(),
                        "cycle_steps": pw.cycle.len(),
                        "cycle_time": pw.cycle_time,
                    });
                    (plan, sim, pw.unroll(1).visits, Some(cycle))
                }
            };
            let heights: Vec<Rational> = sim.per_bamboo_max.iter().map(|f| f.0.clone()).collect();
            let bounds: Vec<Rational> = plan.bounds.iter().map(|b| &b.0 * &total).collect();
            let violations: Vec<usize> = (0..heights.len())
                .filter(|&k| heights[k] > plan.bounds[k].0)
                .map(|k| sorted.index_to_input(k + 1))
                .collect();
            let mut report = Report::new(&sorted, &heights, &total, &total);
            report.bound = bounds.iter().max().cloned().map(Frac);
            report.bound_satisfied = Some(violations.is_empty());
            let lb = lower_bound(&mi) * &total;
            if let Some(p) = &walk_out {
                write_text(p, &walk_csv(&sorted, &visits))?;
            }
            let out = json!({
                "algorithm": algo,
                "s": plan.s,
                "diameter": plan.diameter,
                "classes": plan.state.classes.len(),
                "horizon": sim.horizon,
                "cycle": cycle,
                "per_bamboo_bound": sorted.to_input(&bounds).into_iter().map(Frac).collect::<Vec<_>>(),
                "violations": violations,
                "lower_bound": Frac(lb.clone()),
                "ratio_vs_lower_bound": Frac(&report.global_max.0 / &lb),
                "report": report,
            });
            emit(None, &to_json(&out))?;
            if verify && !violations.is_empty() {
                return Err(CliError::Certification(format!("points {violations:?} exceed their bounds")));
            }
            Ok(())
        }
        ContinuousCommand::Lb { instance, exhaustive } => {
            let (mi, sorted, total) = metric(load_instance(&instance)?)?;
            let (mst, set) = lower_bound_mst(&mi);
            let ex = if exhaustive {
                let (b, s) = lower_bound_mst_exhaustive(&mi).map_err(|e| CliError::core("exhaustive", e))?;
                Some(json!({
                    "bound": Frac(b * &total),
                    "set": s.into_iter().map(|k| sorted.index_to_input(k)).collect::<Vec<_>>(),
                }))
            } else {
                None
            };
            let out = json!({
                "diameter": Frac(mi.diameter()),
                "diameter_bound": Frac(lower_bound_diameter(&mi) * &total),
                "mst_bound": Frac(&mst * &total),
                "mst_set": set.into_iter().map(|k| sorted.index_to_input(k)).collect::<Vec<_>>(),
                "exhaustive": ex,
                "lower_bound": Frac(lower_bound(&mi) * &total),
            });
            emit(None, &to_json(&out))
        }
        ContinuousCommand::Gen { family, out } => {
            let inst = match family {
                MetricFamily::Spiral { n } => gen_spiral(n).map_err(|e| CliError::core("n", e))?.instance,
                MetricFamily::Clusters { n, d } => {
                    gen_two_cluster(n, &parse_frac("d", &d)?).map_err(|e| CliError::core("n", e))?.instance
                }
                MetricFamily::Grid { n, side, seed } => {
                    gen_random_grid(n, side, seed).map_err(|e| CliError::core("n", e))?
                }
                MetricFamily::Line { n, seed } => gen_random_line(n, seed).map_err(|e| CliError::core("n", e))?,
            };
            emit(out.as_deref(), &to_json(&inst.to_file()))
        }
    }
}
