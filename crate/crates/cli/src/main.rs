//! `spinalloc` command line: generate networks, solve one instance, run
//! seeded experiments, and measure hyperbolicity.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spinalloc::csp::build_csp;
use spinalloc::experiment::{
    aggregate, emit_outputs, graph_delta, run_experiment, run_solver, EdgeProbRule, ExperimentConfig, Model, SolverKind,
};
use spinalloc::metrics::{components, interference_links, largest_component_diameter};
use spinalloc::net::{degree_stats, generate_erdos_renyi, generate_geometric, parse_edge_list, write_edge_list, ChannelParams, NetworkGraph};
use spinalloc::sp::SpParams;

#[derive(Parser)]
#[command(name = "spinalloc", version, about = "Resource-pool allocation for wireless interference networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random network and write it as an edge list.
    Generate(GraphArgs),
    /// Allocate pools on one network.
    Solve {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 4)]
        pools: usize,
        #[arg(long, default_value = "sp")]
        solver: String,
    },
    /// Run a Monte-Carlo experiment and write records.csv, summary.csv and figures.gp.
    Experiment(ExperimentArgs),
    /// Print the four-point hyperbolicity, component count and diameter.
    Hyperbolicity(GraphArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Read the network from an edge-list file instead of generating one.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value = "er")]
    model: String,
    /// Station count (er) or Poisson mean (geo).
    #[arg(long, default_value_t = 100)]
    stations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, allow_hyphen_values = true)]
    mu_dbm: Option<f64>,
    /// ER mean degree; the edge probability is this over the station count.
    #[arg(long, default_value_t = 4.5)]
    mean_degree: f64,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Solver to run; repeat for several.
    #[arg(long)]
    solver: Vec<String>,
    #[arg(long)]
    model: Option<String>,
    /// Station counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    stations: Vec<usize>,
    /// Pool counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    pools: Vec<usize>,
    #[arg(long, allow_hyphen_values = true)]
    mu_dbm: Option<f64>,
    /// Realizations per cell.
    #[arg(long)]
    z: Option<usize>,
    #[arg(long)]
    delta: bool,
}

fn load_graph(a: &GraphArgs) -> Result<NetworkGraph> {
    if let Some(path) = &a.graph {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return parse_edge_list(&text).with_context(|| format!("parsing {}", path.display()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    Ok(match a.model.parse::<Model>()? {
        Model::Er => generate_erdos_renyi(a.stations, EdgeProbRule::PerStation(a.mean_degree).edge_prob(a.stations), &mut rng)?,
        Model::Geometric => {
            let params = ChannelParams { mu_dbm: a.mu_dbm.unwrap_or(ChannelParams::default().mu_dbm), ..ChannelParams::default() };
            generate_geometric(a.stations as f64, &params, &mut rng)?.graph
        }
    })
}

fn write_out(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn experiment_config(a: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::parse_json(&text)?
        }
        None => ExperimentConfig {
            model: Model::Er,
            i_values: vec![100],
            q_values: vec![4],
            mu_dbm: ChannelParams::default().mu_dbm,
            edge_prob_rule: EdgeProbRule::default(),
            z: 10,
            master_seed: 0,
            solvers: SolverKind::ALL.to_vec(),
            sp_params: SpParams::default(),
            compute_delta: false,
            out_dir: PathBuf::from("out"),
        },
    };
    if let Some(s) = a.seed {
        cfg.master_seed = s;
    }
    if let Some(o) = &a.out {
        cfg.out_dir = o.clone();
    }
    if !a.solver.is_empty() {
        cfg.solvers = a.solver.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    }
    if let Some(m) = &a.model {
        cfg.model = m.parse()?;
    }
    if !a.stations.is_empty() {
        cfg.i_values = a.stations.clone();
    }
    if !a.pools.is_empty() {
        cfg.q_values = a.pools.clone();
    }
    if let Some(mu) = a.mu_dbm {
        cfg.mu_dbm = mu;
    }
    if let Some(z) = a.z {
        cfg.z = z;
    }
    cfg.compute_delta |= a.delta;
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate(a) => {
            let g = load_graph(&a)?;
            let (mean, std) = degree_stats(&g);
            let text = write_edge_list(&g);
            match &a.out {
                Some(dir) => write_out(dir, "graph.txt", &text)?,
                None => print!("{text}"),
            }
            eprintln!("stations={} edges={} mean_degree={mean:.4} degree_std={std:.4}", g.n(), g.edge_count());
        }
        Command::Solve { graph, pools, solver } => {
            if pools == 0 {
                bail!("--pools must be >= 1");
            }
            let g = load_graph(&graph)?;
            let kind: SolverKind = solver.parse()?;
            let mut rng = ChaCha8Rng::seed_from_u64(graph.seed ^ 0x5EED);
            let (alloc, stats) = run_solver(kind, &g, pools, &SpParams::default(), &mut rng)?;
            let links = interference_links(&g, &alloc)?;
            let zero = build_csp(&g, pools)?.is_zero_interference(&alloc)?;
            let csv = alloc.to_csv()?;
            match &graph.out {
                Some(dir) => write_out(dir, "allocation.csv", &csv)?,
                None => print!("{csv}"),
            }
            eprintln!("solver={kind} stations={} interference_links={links} zero_interference={zero}", g.n());
            eprintln!("{stats:?}");
        }
        Command::Experiment(a) => {
            let cfg = experiment_config(&a)?;
            let records = run_experiment(&cfg)?;
            let summary = aggregate(&records)?;
            let files = emit_outputs(&records, &summary, &cfg.out_dir)?;
            for row in &summary {
                println!(
                    "{} I={} Q={} {:<6} zero={:6.2}% conflicts={:.3}",
                    row.model, row.i_target, row.q, row.solver, row.zero_rate_pct, row.mean_conflicts
                );
            }
            println!("wrote {}, {}, {}", files.records.display(), files.summary.display(), files.figures.display());
        }
        Command::Hyperbolicity(a) => {
            let g = load_graph(&a)?;
            let delta = graph_delta(&g, a.seed)?;
            println!("delta={delta}");
            println!("components={}", components(&g).len());
            println!("diameter={}", largest_component_diameter(&g));
        }
    }
    Ok(())
}
