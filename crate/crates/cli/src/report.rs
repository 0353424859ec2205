use bamboo_core::rational::Rational;
use bamboo_core::{Frac, SimulationReport};
use serde::Serialize;

use crate::input::Sorted;

/// The common report block, per-bamboo entries in input order.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub per_bamboo_max: Vec<Frac>,
    pub global_max: Frac,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<Frac>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_satisfied: Option<bool>,
    #[serde(rename = "ratio_vs_H")]
    pub ratio_vs_h: Frac,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_vs_oracle: Option<Frac>,
}

impl Report {
    /// `per_bamboo` is in sorted order; `scale` multiplies every height.
    pub fn new(sorted: &Sorted, per_bamboo: &[Rational], scale: &Rational, total: &Rational) -> Self {
        let heights: Vec<Rational> = per_bamboo.iter().map(|h| h * scale).collect();
        let global = heights.iter().max().cloned().expect("nonempty instance");
        Report {
            per_bamboo_max: sorted.to_input(&heights).into_iter().map(Frac).collect(),
            ratio_vs_h: Frac(&global / total),
            global_max: Frac(global),
            bound: None,
            bound_satisfied: None,
            ratio_vs_oracle: None,
        }
    }

    pub fn from_sim(sorted: &Sorted, sim: &SimulationReport, total: &Rational) -> Self {
        let hs: Vec<Rational> = sim.per_bamboo_max.iter().map(|f| f.0.clone()).collect();
        Self::new(sorted, &hs, &Rational::from_integer(1.into()), total)
    }

    pub fn with_bound(mut self, bound: Rational) -> Self {
        self.bound_satisfied = Some(self.global_max.0 <= bound);
        self.bound = Some(Frac(bound));
        self
    }

    pub fn with_oracle(mut self, opt: &Rational) -> Self {
        self.ratio_vs_oracle = Some(Frac(&self.global_max.0 / opt));
        self
    }
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
