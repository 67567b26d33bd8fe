use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use social_bandits::data_pipeline::{ingest, IngestOptions, DEFAULT_MIN_REVIEWS, DEFAULT_PROFILE_LAMBDA, DEFAULT_TELEPORT};
use social_bandits::graph_gen;
use social_bandits::harness::config::Seeds;
use social_bandits::harness::grid::format_summary;
use social_bandits::harness::{report_bounds, run_grid, ExperimentConfig, PolicyKind};

#[derive(Parser)]
#[command(name = "socbandit", version, about = "Social-influence recommendation bandits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a policy x seed grid and write regret.csv, summary.csv and plot.gp.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the policy list (repeatable or comma-separated).
        #[arg(long, value_delimiter = ',')]
        policy: Vec<String>,
        /// Override the seeds, e.g. `0..20` or `1,2,3`.
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the theoretical regret bounds for a configuration.
    Bounds {
        #[arg(long)]
        config: PathBuf,
    },
    /// Build u0.csv and p.csv from ratings and social edges.
    Ingest {
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MIN_REVIEWS)]
        min_reviews: usize,
        #[arg(long, default_value_t = DEFAULT_PROFILE_LAMBDA)]
        lambda: f64,
        #[arg(long, default_value_t = DEFAULT_TELEPORT)]
        teleport: f64,
    },
    /// Write a synthetic influence graph as an edge-list CSV.
    GenGraph {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Cmp,
    Er,
    Ba,
}

fn run(cli: Cli) -> social_bandits::Result<()> {
    match cli.command {
        Command::Run {
            config,
            policy,
            seeds,
            out,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if !policy.is_empty() {
                cfg.policy.list = policy.iter().map(|p| p.parse::<PolicyKind>()).collect::<Result<_, _>>()?;
            }
            if let Some(s) = seeds {
                cfg.run.seeds = s.parse::<Seeds>()?;
            }
            if let Some(o) = out {
                cfg.run.out = o;
            }
            cfg.validate()?;
            let (result, files) = run_grid(&cfg, &cfg.run.out)?;
            let mut stdout = std::io::stdout();
            format_summary(&result.summary, &mut stdout)?;
            print!("{}", report_bounds(&cfg, Some(&result.summary)));
            println!("wrote {}, {}, {}", files.regret.display(), files.summary.display(), files.plot_script.display());
        }
        Command::Bounds { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            print!("{}", report_bounds(&cfg, None));
        }
        Command::Ingest {
            ratings,
            edges,
            out,
            min_reviews,
            lambda,
            teleport,
        } => {
            let opts = IngestOptions {
                min_reviews,
                lambda,
                teleport,
            };
            let result = ingest(&ratings, &edges, &out, opts)?;
            println!(
                "{} users, d = {}: wrote {} and {}",
                result.users.len(),
                result.profiles.d(),
                result.u0_path.display(),
                result.p_path.display()
            );
        }
        Command::GenGraph { model, n, out, seed } => {
            let graph = match model {
                Model::Cmp => graph_gen::complete(n)?,
                Model::Er => graph_gen::erdos_renyi(n, seed)?,
                Model::Ba => graph_gen::barabasi_albert(n, seed)?,
            };
            graph_gen::write_edge_csv(&graph, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
