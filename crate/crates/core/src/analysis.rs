//! Post-hoc analysis of optimizer runs: marginal kernel density estimates of
//! the sampled angles, the analytic shot-variance bound, and run summaries
//! scored against the exact landscape.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::MaxCut;
use crate::qaoa::{exact_expectation, linspace, DiagonalEnergies, Landscape, QaoaParams};
use crate::trajectory::{Phase, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelConvention {
    /// `1/(n h) sum exp(-(x - x_i)^2 / h^2)` with `h = n^(-1/(d+4))`.
    Literal,
    /// Unit-mass Gaussian kernel with `h = std * n^(-1/(d+4))`.
    Conventional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeEstimate {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
    pub sample_count: usize,
    pub dimension: usize,
}

impl KdeEstimate {
    /// Interior grid points that are local maxima of the density, as
    /// `(location, density)`, highest first.
    pub fn peaks(&self) -> Vec<(f64, f64)> {
        let mut peaks: Vec<(f64, f64)> = local_maxima(&self.density)
            .into_iter()
            .map(|k| (self.grid[k], self.density[k]))
            .collect();
        peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
        peaks
    }

    /// Trapezoid-rule integral over the grid.
    pub fn integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0] + f[1]))
            .sum()
    }
}

/// Indices `k` with `ys[k-1] < ys[k] >= ys[k+1]`.
pub fn local_maxima(ys: &[f64]) -> Vec<usize> {
    (1..ys.len().saturating_sub(1))
        .filter(|&k| ys[k] > ys[k - 1] && ys[k] >= ys[k + 1])
        .collect()
}

/// `h = n^(-1/(d+4))`.
pub fn bandwidth(sample_count: usize, dimension: usize) -> f64 {
    (sample_count as f64).powf(-1.0 / (dimension as f64 + 4.0))
}

pub fn kde(samples: &[f64], grid: &[f64]) -> Result<KdeEstimate> {
    kde_with(samples, grid, KernelConvention::Literal)
}

pub fn kde_with(samples: &[f64], grid: &[f64], convention: KernelConvention) -> Result<KdeEstimate> {
    if samples.is_empty() {
        return Err(invalid("kernel density estimate needs at least one sample"));
    }
    let n = samples.len();
    let rule = bandwidth(n, 1);
    let (h, norm, width) = match convention {
        KernelConvention::Literal => (rule, 1.0 / (n as f64 * rule), rule),
        KernelConvention::Conventional => {
            let mean = samples.iter().sum::<f64>() / n as f64;
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n.max(2) - 1) as f64;
            // a degenerate sample still needs a positive width
            let h = if var > 0.0 { var.sqrt() * rule } else { rule };
            let norm = 1.0 / (n as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
            (h, norm, h * std::f64::consts::SQRT_2)
        }
    };
    let density = grid
        .iter()
        .map(|&x| {
            norm * samples
                .iter()
                .map(|&xi| (-((x - xi) / width).powi(2)).exp())
                .sum::<f64>()
        })
        .collect();
    Ok(KdeEstimate {
        grid: grid.to_vec(),
        density,
        bandwidth: h,
        sample_count: n,
        dimension: 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceBound {
    /// Bound on the single-shot variance of the cost.
    pub sigma2_bound: f64,
    /// Bound on the variance of an `N`-shot sample mean.
    pub sample_mean_bound: f64,
}

/// `sigma^2 <= 2e ((v-1)^(2p+2) - 1) / ((v-1) - 1)` and its `N`-shot mean
/// counterpart `sigma^2 / N`.
pub fn variance_bound(edges: usize, vertices: usize, depth: usize, shots: usize) -> Result<VarianceBound> {
    if vertices < 3 {
        return Err(Error::Domain(format!(
            "variance bound needs at least 3 vertices, got {vertices}"
        )));
    }
    if depth == 0 || shots == 0 {
        return Err(invalid("depth and shot count must be at least 1"));
    }
    let base = (vertices - 1) as f64;
    let exponent = i32::try_from(2 * depth + 2).map_err(|_| invalid("depth too large"))?;
    let sigma2_bound = 2.0 * edges as f64 * (base.powi(exponent) - 1.0) / (base - 1.0);
    Ok(VarianceBound {
        sigma2_bound,
        sample_mean_bound: sigma2_bound / shots as f64,
    })
}

/// Mean of `-C` over gamma for every beta column of the grid.
pub fn beta_marginal(landscape: &Landscape) -> Vec<f64> {
    let rows = landscape.values.len() as f64;
    (0..landscape.betas.len())
        .map(|j| -landscape.values.iter().map(|row| row[j]).sum::<f64>() / rows)
        .collect()
}

/// Beta locations of the interior local maxima of [`beta_marginal`].
pub fn beta_marginal_optima(landscape: &Landscape) -> Vec<f64> {
    local_maxima(&beta_marginal(landscape))
        .into_iter()
        .map(|k| landscape.betas[k])
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalKdes {
    pub gamma: KdeEstimate,
    pub beta: KdeEstimate,
}

/// Literal-kernel KDEs of the gamma and beta coordinates on `points`-point
/// grids spanning the landscape box.
pub fn trajectory_kdes(traj: &Trajectory, landscape: &Landscape, points: usize) -> Result<MarginalKdes> {
    let span = |axis: &[f64]| linspace(axis[0], axis[axis.len() - 1], points);
    Ok(MarginalKdes {
        gamma: kde(&traj.coordinate(0), &span(&landscape.gammas))?,
        beta: kde(&traj.coordinate(1), &span(&landscape.betas))?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub evals: usize,
    pub evals_by_phase: BTreeMap<String, usize>,
    pub best_sampled_value: f64,
    pub best_sampled_x: Vec<f64>,
    pub final_x: Vec<f64>,
    #[serde(rename = "exact_C_at_final")]
    pub exact_c_at_final: f64,
    #[serde(rename = "exact_C_at_best")]
    pub exact_c_at_best: f64,
    /// `(grid max of -C - (-C at final)) / grid range`.
    pub normalized_gap: f64,
    pub normalized_gap_best: f64,
    pub grid_best_value: f64,
    pub grid_best_x: [f64; 2],
    pub grid_range: f64,
    pub max_cut: f64,
    pub min_energy: f64,
}

/// Scores a trajectory against the exact landscape. `final_x` defaults to
/// the last evaluated point.
pub fn summarize(
    traj: &Trajectory,
    diag: &DiagonalEnergies,
    landscape: &Landscape,
    oracle: &MaxCut,
    final_x: Option<&[f64]>,
) -> Result<Summary> {
    let last = traj.last().ok_or_else(|| invalid("trajectory is empty"))?;
    let best = traj
        .records
        .iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("non-empty");
    let final_x = final_x.map_or_else(|| last.x.clone(), <[f64]>::to_vec);
    let exact = |x: &[f64]| -> Result<f64> { Ok(exact_expectation(diag, &QaoaParams::from_point(x)?)) };
    let exact_c_at_final = exact(&final_x)?;
    let exact_c_at_best = exact(&best.x)?;

    let (grid_best_value, grid_best_x) = landscape.best();
    let grid_range = landscape.range();
    let gap = |c: f64| {
        if grid_range > 0.0 {
            (grid_best_value + c) / grid_range
        } else {
            0.0
        }
    };

    let mut evals_by_phase = BTreeMap::new();
    for r in &traj.records {
        let name = match r.phase {
            Phase::Anneal => "anneal",
            Phase::Local => "local",
            Phase::RestartAnneal => "restart-anneal",
            Phase::Nes => "nes",
        };
        *evals_by_phase.entry(name.to_string()).or_insert(0) += 1;
    }

    Ok(Summary {
        evals: traj.len(),
        evals_by_phase,
        best_sampled_value: best.value,
        best_sampled_x: best.x.clone(),
        final_x,
        exact_c_at_final,
        exact_c_at_best,
        normalized_gap: gap(exact_c_at_final),
        normalized_gap_best: gap(exact_c_at_best),
        grid_best_value,
        grid_best_x,
        grid_range,
        max_cut: oracle.max_cut,
        min_energy: oracle.min_energy,
    })
}
