//! Seeded end-to-end experiments: build the instance, run an optimizer for
//! one or more trials, score every run against the exact landscape and write
//! the artifacts.
//!
//! Randomness: the graph comes from its explicit seed or the `graph`
//! substream of the master seed. Each trial draws its optimizer and shot
//! noise from the `optimizer` and `shots` substreams of its trial seed, which
//! is the master seed for a single trial and `child_seed(master, k)` for
//! trial `k` of a sweep.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::analysis::{summarize, trajectory_kdes, MarginalKdes, Summary};
use crate::anneal::{anneal_run, AnnealConfig};
use crate::error::{invalid, Error, Result};
use crate::graph::{brute_force_max_cut, generate_graph, positive_cover_number, MaxCut, WeightedGraph};
use crate::nes::{nes_run, GenerationSummary, NesConfig};
use crate::qaoa::{diagonal_energies, landscape_grid, DiagonalEnergies, Landscape, ShotObjective};
use crate::rng::{child_seed, seeded, substream};
use crate::trajectory::{Bounds, OptimizeResult, Trajectory};

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphSource {
    /// A fresh member of the `G(v, 3v/5)` family.
    Generate {
        vertices: usize,
        /// Defaults to the `graph` substream of the master seed.
        #[serde(default)]
        seed: Option<u64>,
    },
    File(PathBuf),
}

impl GraphSource {
    pub fn load(&self, master_seed: u64) -> Result<WeightedGraph> {
        match self {
            GraphSource::Generate { vertices, seed } => {
                let mut rng = match seed {
                    Some(s) => seeded(*s),
                    None => substream(master_seed, "graph"),
                };
                generate_graph(*vertices, &mut rng)
            }
            GraphSource::File(path) => WeightedGraph::load(path).map_err(|e| Error::input(path, e)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OptimizerConfig {
    Anneal(AnnealConfig),
    Nes(NesConfig),
}

impl OptimizerConfig {
    /// Single-shot defaults for the named optimizer.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "anneal" => Ok(OptimizerConfig::Anneal(AnnealConfig::single_shot())),
            "nes" => Ok(OptimizerConfig::Nes(NesConfig::default())),
            other => Err(invalid(format!("unknown optimizer {other:?}, expected anneal or nes"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OptimizerConfig::Anneal(_) => "anneal",
            OptimizerConfig::Nes(_) => "nes",
        }
    }

    /// Annealing: the evaluation budget. NES: the number of generations is
    /// set to `budget / population_size`.
    pub fn set_budget(&mut self, budget: usize) -> Result<()> {
        match self {
            OptimizerConfig::Anneal(c) => c.eval_budget = budget,
            OptimizerConfig::Nes(c) => {
                if budget < c.population_size {
                    return Err(invalid(format!(
                        "budget {budget} is below one generation of {} members",
                        c.population_size
                    )));
                }
                c.generations = budget / c.population_size;
            }
        }
        Ok(())
    }

    fn share(&mut self, bounds: Bounds, shots: usize) {
        match self {
            OptimizerConfig::Anneal(c) => c.bounds = bounds,
            OptimizerConfig::Nes(c) => {
                c.bounds = bounds;
                c.shots_per_member = shots;
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            OptimizerConfig::Anneal(c) => c.validate(),
            OptimizerConfig::Nes(c) => c.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub optimizer: OptimizerConfig,
    /// Shots per objective evaluation; replaces the NES shots per member.
    pub shots: usize,
    /// Search box `[gamma, beta]`; replaces the optimizer's own bounds.
    pub bounds: Bounds,
    pub seed: u64,
    pub trials: usize,
    pub out: PathBuf,
    /// Points per axis of the exact landscape scan used for scoring.
    pub grid_resolution: usize,
    /// Points per axis of the marginal density estimates.
    pub kde_points: usize,
    /// Seconds per shot on the target device, for the projected time.
    pub shot_latency_s: f64,
    /// A run succeeds when its normalized gap is at most this.
    pub success_gap: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            graph: GraphSource::Generate {
                vertices: 20,
                seed: None,
            },
            optimizer: OptimizerConfig::Anneal(AnnealConfig::single_shot()),
            shots: 1,
            bounds: Bounds::angle_box(2),
            seed: 0,
            trials: 1,
            out: PathBuf::from("out"),
            grid_resolution: 101,
            kde_points: 201,
            shot_latency_s: 0.2,
            success_gap: 0.1,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let read = || -> Result<Self> { Ok(serde_json::from_str(&fs::read_to_string(path)?)?) };
        read().map_err(|e| Error::input(path, e))
    }

    /// Copies the shared bounds and shot count into the optimizer and checks
    /// everything.
    pub fn resolve(mut self) -> Result<Self> {
        if self.bounds.dim() != 2 {
            return Err(invalid(format!(
                "experiments run at depth 1 and need a 2-dimensional box, got {}",
                self.bounds.dim()
            )));
        }
        self.bounds.validate()?;
        self.optimizer.share(self.bounds.clone(), self.shots);
        self.optimizer.validate()?;
        if self.shots == 0 {
            return Err(invalid("shots must be at least 1"));
        }
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.grid_resolution < 2 || self.kde_points < 2 {
            return Err(invalid("grid resolution and KDE points must be at least 2"));
        }
        if !(self.shot_latency_s >= 0.0) || !(self.success_gap >= 0.0) {
            return Err(invalid("shot latency and success gap must be non-negative"));
        }
        Ok(self)
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        if self.trials == 1 {
            self.seed
        } else {
            child_seed(self.seed, trial as u64)
        }
    }

    fn trial_dir(&self, trial: usize) -> PathBuf {
        if self.trials == 1 {
            self.out.clone()
        } else {
            self.out.join(format!("trial-{trial:04}"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub vertices: usize,
    pub edges: usize,
    pub active_vertices: usize,
    pub total_weight: f64,
    pub positive_cover_number: usize,
    pub max_cut: f64,
}

impl GraphStats {
    pub fn new(g: &WeightedGraph) -> Result<Self> {
        Ok(Self {
            vertices: g.num_vertices(),
            edges: g.num_edges(),
            active_vertices: g.num_qubits(),
            total_weight: g.total_weight(),
            positive_cover_number: positive_cover_number(g)?,
            max_cut: brute_force_max_cut(g)?.max_cut,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub master: u64,
    pub trial: usize,
    /// Parent of the `optimizer` and `shots` substreams.
    pub trial_seed: u64,
    /// Explicit graph seed; absent when the `graph` substream was used.
    pub graph_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub version: String,
    pub config: ExperimentConfig,
    pub seeds: SeedRecord,
    pub graph: GraphStats,
    pub optimizer: String,
    pub result: OptimizeResult,
    /// The point the optimizer hands back: the best sampled point for
    /// annealing, the final search mean for NES.
    pub returned_x: Vec<f64>,
    #[serde(flatten)]
    pub summary: Summary,
    pub success: bool,
    pub total_shots: usize,
    pub projected_hardware_time_s: f64,
    pub kde: MarginalKdes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub version: String,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub success_gap: f64,
    pub normalized_gaps: Vec<f64>,
}

/// Everything a trial produced, in memory.
#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub summary: RunSummary,
    pub trajectory: Trajectory,
    pub generations: Option<Vec<GenerationSummary>>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub graph: WeightedGraph,
    pub landscape: Landscape,
    pub trials: Vec<TrialOutput>,
    pub sweep: SweepSummary,
}

/// Shared per-instance data every trial is scored against.
pub struct Instance {
    pub graph: WeightedGraph,
    pub diag: DiagonalEnergies,
    pub stats: GraphStats,
    pub oracle: MaxCut,
    pub landscape: Landscape,
}

impl Instance {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self> {
        let graph = cfg.graph.load(cfg.seed)?;
        let diag = diagonal_energies(&graph)?;
        let stats = GraphStats::new(&graph)?;
        let oracle = brute_force_max_cut(&graph)?;
        let [g, b] = [cfg.bounds.0[0], cfg.bounds.0[1]];
        let landscape = landscape_grid(&diag, g, b, cfg.grid_resolution)?;
        Ok(Self {
            graph,
            diag,
            stats,
            oracle,
            landscape,
        })
    }
}

/// Runs trial `trial` of a resolved config without touching the disk.
pub fn run_trial(cfg: &ExperimentConfig, inst: &Instance, trial: usize) -> Result<TrialOutput> {
    let trial_seed = cfg.trial_seed(trial);
    let mut obj = ShotObjective::new(inst.diag.clone(), cfg.shots, substream(trial_seed, "shots"))?;
    let mut rng = substream(trial_seed, "optimizer");
    let (result, trajectory, generations, returned_x) = match &cfg.optimizer {
        OptimizerConfig::Anneal(c) => {
            let (result, trajectory) = anneal_run(&mut obj, c, &mut rng)?;
            let returned = result.best_x.clone();
            (result, trajectory, None, returned)
        }
        OptimizerConfig::Nes(c) => {
            let out = nes_run(&mut obj, c, None, &mut rng)?;
            let returned = out.result.final_x.clone();
            (out.result, out.trajectory, Some(out.generations), returned)
        }
    };
    let summary = summarize(&trajectory, &inst.diag, &inst.landscape, &inst.oracle, Some(&returned_x))?;
    let kde = trajectory_kdes(&trajectory, &inst.landscape, cfg.kde_points)?;
    let total_shots = trajectory.records.iter().map(|r| r.shots).sum();
    let graph_seed = match cfg.graph {
        GraphSource::Generate { seed, .. } => seed,
        GraphSource::File(_) => None,
    };
    Ok(TrialOutput {
        summary: RunSummary {
            version: VERSION.to_string(),
            config: cfg.clone(),
            seeds: SeedRecord {
                master: cfg.seed,
                trial,
                trial_seed,
                graph_seed,
            },
            graph: inst.stats.clone(),
            optimizer: cfg.optimizer.name().to_string(),
            result,
            returned_x,
            success: summary.normalized_gap <= cfg.success_gap,
            summary,
            total_shots,
            projected_hardware_time_s: total_shots as f64 * cfg.shot_latency_s,
            kde,
        },
        trajectory,
        generations,
    })
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Runs every trial (concurrently when cores allow; results do not depend on
/// the schedule) and returns them in trial order.
pub fn run_trials(cfg: &ExperimentConfig, inst: &Instance) -> Result<Vec<TrialOutput>> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<TrialOutput>>>> = Mutex::new((0..cfg.trials).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers().min(cfg.trials) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= cfg.trials {
                    break;
                }
                let out = run_trial(cfg, inst, k);
                slots.lock().expect("no worker panicked")[k] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|slot| slot.expect("every trial ran"))
        .collect()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_lines<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut text = String::new();
    for item in items {
        text.push_str(&serde_json::to_string(item)?);
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn write_landscape(path: &Path, landscape: &Landscape) -> Result<()> {
    write_json(path, landscape)
}

/// Resolves `cfg`, runs all trials and writes the artifacts under `cfg.out`.
pub fn run_experiment(cfg: ExperimentConfig) -> Result<ExperimentReport> {
    let cfg = cfg.resolve()?;
    let inst = Instance::build(&cfg)?;
    let trials = run_trials(&cfg, &inst)?;

    fs::create_dir_all(&cfg.out)?;
    inst.graph.save(&cfg.out.join("graph.json"))?;
    write_landscape(&cfg.out.join("landscape.json"), &inst.landscape)?;
    for (k, t) in trials.iter().enumerate() {
        let dir = cfg.trial_dir(k);
        fs::create_dir_all(&dir)?;
        t.trajectory.write_jsonl(&dir.join("trajectory.jsonl"))?;
        write_json(&dir.join("summary.json"), &t.summary)?;
        write_json(&dir.join("kde.json"), &t.summary.kde)?;
        if let Some(g) = &t.generations {
            write_lines(&dir.join("generations.jsonl"), g)?;
        }
    }

    let normalized_gaps: Vec<f64> = trials.iter().map(|t| t.summary.summary.normalized_gap).collect();
    let successes = trials.iter().filter(|t| t.summary.success).count();
    let sweep = SweepSummary {
        version: VERSION.to_string(),
        trials: trials.len(),
        successes,
        success_rate: successes as f64 / trials.len() as f64,
        success_gap: cfg.success_gap,
        normalized_gaps,
    };
    if cfg.trials > 1 {
        write_json(&cfg.out.join("sweep.json"), &sweep)?;
    }
    Ok(ExperimentReport {
        graph: inst.graph,
        landscape: inst.landscape,
        trials,
        sweep,
    })
}
