use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use fewshot_qaoa::analysis::{summarize, trajectory_kdes, variance_bound};
use fewshot_qaoa::anneal::two_state_noisy_chain;
use fewshot_qaoa::experiment::{run_experiment, write_landscape, ExperimentConfig, GraphSource, GraphStats, OptimizerConfig};
use fewshot_qaoa::graph::{brute_force_max_cut, WeightedGraph};
use fewshot_qaoa::qaoa::{diagonal_energies, landscape_grid};
use fewshot_qaoa::rng::substream;
use fewshot_qaoa::trajectory::Trajectory;
use fewshot_qaoa::{Error, Result};

/// Shot-limited QAOA MAX-CUT experiments.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random signed graph from the G(v, 3v/5) family.
    GenerateGraph {
        #[arg(long, default_value_t = 20)]
        vertices: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Exact expectation over a gamma-beta grid.
    Landscape {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 101)]
        grid_resolution: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run an optimizer on the emulated device, optionally over many trials.
    Optimize(OptimizeArgs),
    /// Score an existing trajectory against the exact landscape.
    Analyze {
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 101)]
        grid_resolution: usize,
        #[arg(long, default_value_t = 201)]
        kde_points: usize,
        /// Defaults to the trajectory's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-state Metropolis chain with and without shot noise.
    DemoTwoState {
        #[arg(long, default_value_t = 0.1)]
        temperature: f64,
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Analytic bound on the single-shot cost variance.
    Bound {
        #[arg(long)]
        edges: usize,
        #[arg(long)]
        vertices: usize,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        shots: usize,
    },
}

#[derive(Args)]
struct GraphArgs {
    /// Graph JSON file; otherwise a graph is generated.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    vertices: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl GraphArgs {
    fn load(&self) -> Result<WeightedGraph> {
        match &self.graph {
            Some(path) => GraphSource::File(path.clone()).load(self.seed),
            None => GraphSource::Generate {
                vertices: self.vertices,
                seed: Some(self.seed),
            }
            .load(self.seed),
        }
    }
}

#[derive(Args)]
struct OptimizeArgs {
    /// JSON experiment config; the flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shots: Option<usize>,
    /// Switching optimizers starts from that optimizer's single-shot defaults.
    #[arg(long, value_parser = ["anneal", "nes"])]
    optimizer: Option<String>,
    /// Annealing: evaluation budget. NES: budget / population size generations.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    grid_resolution: Option<usize>,
    /// Graph JSON file, replacing the config's graph source.
    #[arg(long)]
    graph: Option<PathBuf>,
}

impl OptimizeArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(name) = &self.optimizer {
            if name != cfg.optimizer.name() {
                cfg.optimizer = OptimizerConfig::by_name(name)?;
            }
        }
        if let Some(b) = self.budget {
            cfg.optimizer.set_budget(b)?;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.shots {
            cfg.shots = n;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(r) = self.grid_resolution {
            cfg.grid_resolution = r;
        }
        if let Some(g) = &self.graph {
            cfg.graph = GraphSource::File(g.clone());
        }
        Ok(cfg)
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenerateGraph { vertices, seed, out } => {
            let g = GraphSource::Generate {
                vertices,
                seed: Some(seed),
            }
            .load(seed)?;
            fs::create_dir_all(&out)?;
            g.save(&out.join("graph.json"))?;
            print_json(&GraphStats::new(&g)?)
        }
        Command::Landscape {
            graph,
            grid_resolution,
            out,
        } => {
            let g = graph.load()?;
            let diag = diagonal_energies(&g)?;
            let pi = std::f64::consts::PI;
            let l = landscape_grid(&diag, [0.0, pi], [0.0, pi], grid_resolution)?;
            fs::create_dir_all(&out)?;
            write_landscape(&out.join("landscape.json"), &l)?;
            let (best, at) = l.best();
            print_json(&json!({"best_value": best, "best_x": at, "worst_value": l.worst(), "range": l.range()}))
        }
        Command::Optimize(args) => {
            let report = run_experiment(args.config()?)?;
            let lines: Vec<_> = report
                .trials
                .iter()
                .map(|t| {
                    let s = &t.summary;
                    json!({
                        "trial": s.seeds.trial,
                        "evals": s.summary.evals,
                        "returned_x": s.returned_x,
                        "normalized_gap": s.summary.normalized_gap,
                        "success": s.success,
                    })
                })
                .collect();
            print_json(&json!({"trials": lines, "success_rate": report.sweep.success_rate}))
        }
        Command::Analyze {
            trajectory,
            graph,
            grid_resolution,
            kde_points,
            out,
        } => {
            let traj = Trajectory::read_jsonl(&trajectory).map_err(|e| Error::input(&trajectory, e))?;
            let g = GraphSource::File(graph).load(0)?;
            let diag = diagonal_energies(&g)?;
            let pi = std::f64::consts::PI;
            let l = landscape_grid(&diag, [0.0, pi], [0.0, pi], grid_resolution)?;
            let summary = summarize(&traj, &diag, &l, &brute_force_max_cut(&g)?, None)?;
            let kde = trajectory_kdes(&traj, &l, kde_points)?;
            let out = out.unwrap_or_else(|| trajectory.parent().map_or_else(PathBuf::new, Path::to_path_buf));
            fs::create_dir_all(&out)?;
            write_json(&out.join("analysis.json"), &summary)?;
            write_json(&out.join("kde.json"), &kde)?;
            print_json(&summary)
        }
        Command::DemoTwoState { temperature, steps, seed } => {
            let noisy = two_state_noisy_chain(temperature, steps, true, &mut substream(seed, "noisy"))?;
            let clean = two_state_noisy_chain(temperature, steps, false, &mut substream(seed, "noiseless"))?;
            let boltzmann = 1.0 / (1.0 + (-0.5 / temperature).exp());
            print_json(&json!({
                "temperature": temperature,
                "steps": steps,
                "noisy_occupancy_i1": noisy,
                "noiseless_occupancy_i1": clean,
                "boltzmann_occupancy_i1": boltzmann,
            }))
        }
        Command::Bound {
            edges,
            vertices,
            depth,
            shots,
        } => print_json(&variance_bound(edges, vertices, depth, shots)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
