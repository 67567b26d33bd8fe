//! Policy × seed grids: build each world from its seed, run the cells in
//! parallel, and write `regret.csv` / `summary.csv`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::RngCore;
use rayon::prelude::*;

use crate::arms::Catalog;
use crate::data_pipeline::read_matrix_csv;
use crate::environment::{NoiseModel, RoundRecord};
use crate::error::{check_dim, Error, Result};
use crate::graph_gen;
use crate::influence::{InfluenceGraph, ProfileMatrix};
use crate::policy::{
    LinRel, LinRelConfig, LinUcb, LinUcbConfig, Policy, RandomPolicy, Regression, ThompsonConfig, ThompsonSampling,
};
use crate::sim::{simulate, stream, stream_rng, Scenario};

use super::config::{CatalogKind, ExperimentConfig, GraphModel, PolicyKind, ProfileSource};

/// Builds the world for one seed. Every policy run with the same seed sees
/// the same graph, profiles and catalog.
pub fn build_scenario(cfg: &ExperimentConfig, seed: u64) -> Result<Scenario> {
    let w = &cfg.world;
    let mut instance = stream_rng(seed, stream::INSTANCE);
    let profiles = match &w.profiles {
        ProfileSource::Uniform => ProfileMatrix::random_uniform(w.n, w.d, &mut instance),
        ProfileSource::File(path) => {
            let p = ProfileMatrix::new(read_matrix_csv(path)?)?;
            check_dim("profile file rows (world.n)", w.n, p.n())?;
            check_dim("profile file columns (world.d)", w.d, p.d())?;
            p
        }
    };
    let catalog = match (cfg.catalog.kind, &cfg.catalog.file) {
        (CatalogKind::Ball, _) => Catalog::unit_ball(w.d)?,
        (CatalogKind::Finite, Some(path)) => Catalog::load_csv(path)?,
        (CatalogKind::Finite, None) => Catalog::random_finite(cfg.catalog.m, w.d, &mut instance)?,
    };
    let graph_seed = stream_rng(seed, stream::GRAPH).next_u64();
    let graph = build_graph(cfg, graph_seed)?;
    Scenario::new(
        graph,
        profiles,
        catalog,
        w.alpha,
        NoiseModel::new(w.sigma)?,
        w.dynamics.into(),
        seed,
    )
}

fn build_graph(cfg: &ExperimentConfig, seed: u64) -> Result<InfluenceGraph> {
    let n = cfg.world.n;
    let g = &cfg.graph;
    let base = match g.model {
        GraphModel::Cmp => graph_gen::complete(n)?,
        GraphModel::Er => graph_gen::erdos_renyi(n, seed)?,
        GraphModel::Ba => graph_gen::barabasi_albert(n, seed)?,
        GraphModel::File => {
            let path = g.path.as_ref().ok_or_else(|| Error::Config(vec!["graph.path: missing".into()]))?;
            let first = fs::read_to_string(path)?;
            if first.trim_start().starts_with("src") {
                graph_gen::read_edge_csv(path, Some(n), 0.0)?
            } else {
                let p = read_matrix_csv(path)?;
                check_dim("graph file rows (world.n)", n, p.nrows())?;
                InfluenceGraph::new(p, 0.0)?
            }
        }
    };
    if g.teleport > 0.0 {
        InfluenceGraph::new(base.matrix().clone(), g.teleport)
    } else {
        Ok(base)
    }
}

/// Instantiates a policy for `scenario` with the configured parameters.
pub fn make_policy(kind: PolicyKind, cfg: &ExperimentConfig, scenario: &Scenario) -> Result<Box<dyn Policy + Send>> {
    let p = &cfg.policy;
    let n = scenario.n();
    let catalog = scenario.catalog.clone();
    Ok(match kind {
        PolicyKind::Linrel => Box::new(LinRel::new(n, catalog, LinRelConfig::new(p.delta, p.beta_scale, p.lambda)?)?),
        PolicyKind::Thompson | PolicyKind::ThompsonIncremental => {
            let tc = ThompsonConfig {
                prior_variance: p.prior_variance,
                mode: kind.sample_mode().unwrap_or_default(),
            };
            Box::new(ThompsonSampling::new(n, catalog, cfg.world.sigma, tc, scenario.policy_rng())?)
        }
        PolicyKind::Linucb => {
            let lc = LinUcbConfig {
                c: p.linucb_c,
                lambda: p.lambda,
                ..Default::default()
            };
            Box::new(LinUcb::new(n, &catalog, lc)?)
        }
        PolicyKind::Regression => Box::new(Regression::new(n, catalog, p.lambda)?),
        PolicyKind::Rand => Box::new(RandomPolicy::new(n, catalog, scenario.policy_rng())),
    })
}

/// One (policy, seed) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub run_id: usize,
    pub policy: PolicyKind,
    pub seed: u64,
    pub records: Vec<RoundRecord>,
}

impl RunResult {
    pub fn final_regret(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cum_regret)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub policy: PolicyKind,
    pub mean_regret: f64,
    pub stderr_regret: f64,
    pub mean_ns_per_round: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub runs: Vec<RunResult>,
    pub summary: Vec<SummaryRow>,
}

impl GridResult {
    pub fn summary_for(&self, policy: PolicyKind) -> Option<&SummaryRow> {
        self.summary.iter().find(|s| s.policy == policy)
    }
}

/// Runs every (policy, seed) cell; results come back in grid order
/// (policies outer, seeds inner) regardless of scheduling.
pub fn run_cells(cfg: &ExperimentConfig) -> Result<GridResult> {
    cfg.validate()?;
    let cells: Vec<(usize, PolicyKind, u64)> = cfg
        .policy
        .list
        .iter()
        .flat_map(|&p| cfg.run.seeds.0.iter().map(move |&s| (p, s)))
        .enumerate()
        .map(|(i, (p, s))| (i, p, s))
        .collect();
    let work = || {
        cells
            .par_iter()
            .map(|&(run_id, policy, seed)| {
                let scenario = build_scenario(cfg, seed)?;
                let mut agent = make_policy(policy, cfg, &scenario)?;
                let mut records = simulate(&scenario, agent.as_mut(), cfg.world.horizon)?;
                if !cfg.run.timing {
                    records.iter_mut().for_each(|r| r.wall_ns = 0);
                }
                Ok(RunResult {
                    run_id,
                    policy,
                    seed,
                    records,
                })
            })
            .collect::<Result<Vec<_>>>()
    };
    let runs = if cfg.run.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.run.workers)
            .build()
            .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?
            .install(work)?
    } else {
        work()?
    };
    let summary = summarize(&cfg.policy.list, &runs);
    Ok(GridResult { runs, summary })
}

pub fn summarize(policies: &[PolicyKind], runs: &[RunResult]) -> Vec<SummaryRow> {
    policies
        .iter()
        .map(|&policy| {
            let mine: Vec<&RunResult> = runs.iter().filter(|r| r.policy == policy).collect();
            let k = mine.len() as f64;
            let finals: Vec<f64> = mine.iter().map(|r| r.final_regret()).collect();
            let mean = finals.iter().sum::<f64>() / k;
            let stderr = if mine.len() > 1 {
                let var = finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
                (var / k).sqrt()
            } else {
                0.0
            };
            let rounds: usize = mine.iter().map(|r| r.records.len()).sum();
            let ns: f64 = mine.iter().flat_map(|r| &r.records).map(|rec| rec.wall_ns as f64).sum();
            SummaryRow {
                policy,
                mean_regret: mean,
                stderr_regret: stderr,
                mean_ns_per_round: if rounds > 0 { ns / rounds as f64 } else { 0.0 },
                runs: mine.len(),
            }
        })
        .collect()
}

pub fn write_regret_csv(runs: &[RunResult], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["run_id", "policy", "seed", "t", "inst_regret", "cum_regret", "wall_ns"])?;
    for run in runs {
        for rec in &run.records {
            w.write_record([
                run.run_id.to_string(),
                run.policy.to_string(),
                run.seed.to_string(),
                rec.t.to_string(),
                rec.inst_regret.to_string(),
                rec.cum_regret.to_string(),
                rec.wall_ns.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv(summary: &[SummaryRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["policy", "mean_R_T", "stderr_R_T", "mean_ns_per_round"])?;
    for row in summary {
        w.write_record([
            row.policy.to_string(),
            row.mean_regret.to_string(),
            row.stderr_regret.to_string(),
            row.mean_ns_per_round.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Paths written by [`run_grid`].
#[derive(Debug, Clone)]
pub struct GridFiles {
    pub regret: PathBuf,
    pub summary: PathBuf,
    pub plot_script: PathBuf,
}

/// Runs the grid and writes `regret.csv`, `summary.csv`, the per-policy
/// curve files and `plot.gp` into `out_dir`.
pub fn run_grid(cfg: &ExperimentConfig, out_dir: impl AsRef<Path>) -> Result<(GridResult, GridFiles)> {
    let result = run_cells(cfg)?;
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir)?;
    let regret = out_dir.join("regret.csv");
    let summary = out_dir.join("summary.csv");
    write_regret_csv(&result.runs, &regret)?;
    write_summary_csv(&result.summary, &summary)?;
    let plot_script = super::plot::emit_plots(&result.runs, out_dir)?;
    Ok((
        result,
        GridFiles {
            regret,
            summary,
            plot_script,
        },
    ))
}

/// Human-readable summary table.
pub fn format_summary(summary: &[SummaryRow], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{:<22} {:>12} {:>10} {:>14} {:>5}", "policy", "mean R(T)", "stderr", "ns/round", "runs")?;
    for row in summary {
        writeln!(
            out,
            "{:<22} {:>12.3} {:>10.3} {:>14.0} {:>5}",
            row.policy.as_str(),
            row.mean_regret,
            row.stderr_regret,
            row.mean_ns_per_round,
            row.runs
        )?;
    }
    Ok(())
}
