//! Theoretical regret bounds for a configuration, as a text table.

use std::fmt::Write;

use crate::policy::linrel::{beta_t, linrel_regret_bound, ConfidenceSet};
use crate::policy::thompson::ts_bayes_regret_bound;

use super::config::ExperimentConfig;
use super::grid::SummaryRow;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub name: &'static str,
    pub value: f64,
}

pub fn bounds(cfg: &ExperimentConfig) -> Vec<BoundRow> {
    let (t, n, d, delta) = (cfg.world.horizon, cfg.world.n, cfg.world.d, cfg.policy.delta);
    vec![
        BoundRow {
            name: "linrel-l2",
            value: linrel_regret_bound(t, n, d, delta, ConfidenceSet::L2),
        },
        BoundRow {
            name: "linrel-l1",
            value: linrel_regret_bound(t, n, d, delta, ConfidenceSet::L1),
        },
        BoundRow {
            name: "thompson-bayes",
            value: ts_bayes_regret_bound(t, n, d, delta),
        },
    ]
}

/// Bound table for `cfg`, optionally followed by empirical mean regrets.
pub fn report_bounds(cfg: &ExperimentConfig, empirical: Option<&[SummaryRow]>) -> String {
    let (t, n, d, delta) = (cfg.world.horizon, cfg.world.n, cfg.world.d, cfg.policy.delta);
    let mut out = String::new();
    let _ = writeln!(out, "T = {t}, n = {n}, d = {d}, delta = {delta}");
    let _ = writeln!(out, "beta_T = {:.6e} (unscaled)", beta_t(t, n, d, delta, 1.0));
    let _ = writeln!(out, "{:<22} {:>16}", "bound", "R(T) <=");
    for row in bounds(cfg) {
        let _ = writeln!(out, "{:<22} {:>16.6e}", row.name, row.value);
    }
    if let Some(rows) = empirical {
        let _ = writeln!(out, "{:<22} {:>16}", "empirical", "mean R(T)");
        for row in rows {
            let _ = writeln!(out, "{:<22} {:>16.6e}", row.policy.as_str(), row.mean_regret);
        }
    }
    out
}
