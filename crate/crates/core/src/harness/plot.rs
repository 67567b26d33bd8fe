//! Gnuplot output: per-policy mean curves and a script that draws them.
//! Nothing is rendered here.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;

use super::config::PolicyKind;
use super::grid::RunResult;

pub const SCRIPT_NAME: &str = "plot.gp";

const HEADER: &str = "# regret and per-round time, averaged over seeds\n\
set datafile separator ','\n\
set key left top\n\
set xlabel 't'\n";

pub fn curve_file_name(policy: PolicyKind) -> String {
    format!("curve_{}.csv", policy.as_str())
}

/// Mean cumulative regret and mean wall time per round, per policy.
pub fn mean_curves(runs: &[RunResult]) -> BTreeMap<PolicyKind, Vec<(usize, f64, f64)>> {
    let mut sums: BTreeMap<PolicyKind, BTreeMap<usize, (f64, f64, usize)>> = BTreeMap::new();
    for run in runs {
        let per_t = sums.entry(run.policy).or_default();
        for rec in &run.records {
            let e = per_t.entry(rec.t).or_insert((0.0, 0.0, 0));
            e.0 += rec.cum_regret;
            e.1 += rec.wall_ns as f64;
            e.2 += 1;
        }
    }
    sums.into_iter()
        .map(|(p, per_t)| {
            let curve = per_t
                .into_iter()
                .map(|(t, (r, ns, k))| (t, r / k as f64, ns / k as f64))
                .collect();
            (p, curve)
        })
        .collect()
}

/// Writes `curve_<policy>.csv` files and `plot.gp` into `out_dir` and
/// returns the script path. With no runs the script holds only the header.
pub fn emit_plots(runs: &[RunResult], out_dir: impl AsRef<Path>) -> Result<PathBuf> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir)?;
    let curves = mean_curves(runs);
    let mut script = String::from(HEADER);
    if !curves.is_empty() {
        for (&policy, curve) in &curves {
            let mut w = csv::Writer::from_path(out_dir.join(curve_file_name(policy)))?;
            w.write_record(["t", "mean_cum_regret", "mean_wall_ns"])?;
            for (t, r, ns) in curve {
                w.write_record([t.to_string(), r.to_string(), ns.to_string()])?;
            }
            w.flush()?;
        }
        let stanzas = |column: usize| {
            curves
                .keys()
                .map(|&p| format!("  '{}' using 1:{column} skip 1 with lines title '{}'", curve_file_name(p), p))
                .collect::<Vec<_>>()
                .join(", \\\n")
        };
        script.push_str("\nset terminal pngcairo size 800,500\n");
        script.push_str("set output 'regret.png'\nset ylabel 'cumulative regret'\nunset logscale y\nplot \\\n");
        script.push_str(&stanzas(2));
        script.push_str("\n\nset output 'time.png'\nset ylabel 'ns per round'\nset logscale y\nplot \\\n");
        script.push_str(&stanzas(3));
        script.push('\n');
    }
    let path = out_dir.join(SCRIPT_NAME);
    fs::write(&path, script)?;
    Ok(path)
}
