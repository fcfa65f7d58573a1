//! Statevector emulation of the QAOA circuit over a diagonal cost
//! Hamiltonian, with exact expectations and shot-limited sampling.

use num_complex::Complex64;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{Assignment, WeightedGraph};
use crate::rng::Rng;
use crate::trajectory::{EvalTag, Objective, Trajectory};

/// Qubit limit for dense simulation (2^26 amplitudes).
pub const MAX_SIM_QUBITS: usize = 26;

/// QAOA angles. Flattened as `[gammas..., betas...]` when handed to an
/// optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() || gammas.len() != betas.len() {
            return Err(invalid(format!(
                "need equal, non-zero layer counts, got {} gammas and {} betas",
                gammas.len(),
                betas.len()
            )));
        }
        if gammas.iter().chain(&betas).any(|a| !a.is_finite()) {
            return Err(invalid("angles must be finite"));
        }
        Ok(Self { gammas, betas })
    }

    /// Single-layer angles.
    pub fn p1(gamma: f64, beta: f64) -> Self {
        Self::new(vec![gamma], vec![beta]).expect("finite p=1 angles")
    }

    /// Splits a flat `[gammas..., betas...]` point.
    pub fn from_point(x: &[f64]) -> Result<Self> {
        if x.is_empty() || !x.len().is_multiple_of(2) {
            return Err(invalid(format!("point of length {} is not 2p", x.len())));
        }
        let (g, b) = x.split_at(x.len() / 2);
        Self::new(g.to_vec(), b.to_vec())
    }

    pub fn to_point(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn depth(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }
}

/// Cost Hamiltonian on every basis state; bit `k` of the index is qubit `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalEnergies {
    values: Vec<f64>,
    num_qubits: usize,
}

impl DiagonalEnergies {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if !values.len().is_power_of_two() {
            return Err(invalid(format!("length {} is not a power of two", values.len())));
        }
        let num_qubits = values.len().trailing_zeros() as usize;
        Ok(Self { values, num_qubits })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn diagonal_energies(g: &WeightedGraph) -> Result<DiagonalEnergies> {
    let n = g.num_qubits();
    if n > MAX_SIM_QUBITS {
        return Err(Error::ResourceLimit {
            what: "qubit count",
            actual: n,
            limit: MAX_SIM_QUBITS,
        });
    }
    let mut values = vec![0.0; 1 << n];
    for (i, j, w) in g.qubit_edges() {
        for (b, v) in values.iter_mut().enumerate() {
            if (b >> i) & 1 == (b >> j) & 1 {
                *v += w;
            }
        }
    }
    Ok(DiagonalEnergies { values, num_qubits: n })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|+>^n`.
    pub fn uniform(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        let a = 1.0 / (dim as f64).sqrt();
        Self {
            amps: vec![Complex64::new(a, 0.0); dim],
        }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn num_qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<psi| diag |psi>`.
    pub fn expectation(&self, diag: &DiagonalEnergies) -> f64 {
        self.amps
            .iter()
            .zip(&diag.values)
            .map(|(a, &e)| a.norm_sqr() * e)
            .sum()
    }

    /// Multiplies amplitude `b` by `exp(-i gamma diag[b])`.
    pub fn apply_phase(&mut self, diag: &DiagonalEnergies, gamma: f64) {
        for (a, &e) in self.amps.iter_mut().zip(&diag.values) {
            let (s, c) = (gamma * e).sin_cos();
            *a *= Complex64::new(c, -s);
        }
    }

    /// Applies `exp(-i beta X)` to every qubit.
    pub fn apply_mixer(&mut self, beta: f64) {
        let (s, c) = beta.sin_cos();
        for q in 0..self.num_qubits() {
            let stride = 1usize << q;
            for block in self.amps.chunks_exact_mut(2 * stride) {
                let (lo, hi) = block.split_at_mut(stride);
                for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x, y) = (*a0, *a1);
                    // [[c, -is], [-is, c]]
                    *a0 = Complex64::new(c * x.re + s * y.im, c * x.im - s * y.re);
                    *a1 = Complex64::new(c * y.re + s * x.im, c * y.im - s * x.re);
                }
            }
        }
    }
}

/// Prepares `U(gammas, betas)|+>^n`.
pub fn evolve(diag: &DiagonalEnergies, params: &QaoaParams) -> Statevector {
    let mut psi = Statevector::uniform(diag.num_qubits);
    for (&gamma, &beta) in params.gammas.iter().zip(&params.betas) {
        psi.apply_phase(diag, gamma);
        psi.apply_mixer(beta);
    }
    psi
}

/// `C(gammas, betas)`.
pub fn exact_expectation(diag: &DiagonalEnergies, params: &QaoaParams) -> f64 {
    evolve(diag, params).expectation(diag)
}

/// Inclusive, evenly spaced samples of `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (count - 1) as f64;
            (0..count)
                .map(|k| if k == count - 1 { hi } else { lo + step * k as f64 })
                .collect()
        }
    }
}

/// Exact `C` over a p=1 grid. `values[i][j]` pairs `gammas[i]` with `betas[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl Landscape {
    fn cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &c)| (i, j, c)))
    }

    /// Grid maximum of `-C` and its `(gamma, beta)`.
    pub fn best(&self) -> (f64, [f64; 2]) {
        let (i, j, c) = self
            .cells()
            .min_by(|a, b| a.2.total_cmp(&b.2))
            .expect("non-empty grid");
        (-c, [self.gammas[i], self.betas[j]])
    }

    /// Grid minimum of `-C`.
    pub fn worst(&self) -> f64 {
        -self.cells().map(|(_, _, c)| c).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max(-C) - min(-C)` over the grid.
    pub fn range(&self) -> f64 {
        self.best().0 - self.worst()
    }
}

pub fn landscape_grid(
    diag: &DiagonalEnergies,
    gamma_range: [f64; 2],
    beta_range: [f64; 2],
    resolution: usize,
) -> Result<Landscape> {
    if resolution < 2 {
        return Err(invalid(format!("grid resolution must be at least 2, got {resolution}")));
    }
    let gammas = linspace(gamma_range[0], gamma_range[1], resolution);
    let betas = linspace(beta_range[0], beta_range[1], resolution);
    let values = gammas
        .iter()
        .map(|&gamma| {
            let mut phased = Statevector::uniform(diag.num_qubits);
            phased.apply_phase(diag, gamma);
            betas
                .iter()
                .map(|&beta| {
                    let mut psi = phased.clone();
                    psi.apply_mixer(beta);
                    psi.expectation(diag)
                })
                .collect()
        })
        .collect();
    Ok(Landscape {
        gammas,
        betas,
        values,
    })
}

/// Grid scan for arbitrary params; rejects depth other than one.
pub fn landscape_grid_for(
    diag: &DiagonalEnergies,
    params: &QaoaParams,
    gamma_range: [f64; 2],
    beta_range: [f64; 2],
    resolution: usize,
) -> Result<Landscape> {
    if params.depth() != 1 {
        return Err(invalid(format!(
            "landscape grid is two-dimensional and needs p = 1, got p = {}",
            params.depth()
        )));
    }
    landscape_grid(diag, gamma_range, beta_range, resolution)
}

/// Emulates a shot-limited device: every evaluation re-prepares the state,
/// draws `N` computational-basis outcomes and reports the sample mean of
/// `-energy`.
pub struct ShotObjective {
    diag: DiagonalEnergies,
    shots_per_eval: usize,
    rng: Rng,
    trajectory: Trajectory,
}

impl ShotObjective {
    pub fn new(diag: DiagonalEnergies, shots_per_eval: usize, rng: Rng) -> Result<Self> {
        if shots_per_eval == 0 {
            return Err(invalid("shots per evaluation must be at least 1"));
        }
        Ok(Self {
            diag,
            shots_per_eval,
            rng,
            trajectory: Trajectory::new(),
        })
    }

    pub fn diag(&self) -> &DiagonalEnergies {
        &self.diag
    }

    pub fn shots_per_eval(&self) -> usize {
        self.shots_per_eval
    }

    pub fn into_trajectory(self) -> Trajectory {
        self.trajectory
    }

    /// Runs one evaluation with the default shot count.
    pub fn sample_shots(&mut self, params: &QaoaParams, tag: &EvalTag) -> (f64, Vec<Assignment>) {
        let shots = tag.shots.unwrap_or(self.shots_per_eval).max(1);
        let psi = evolve(&self.diag, params);
        let mut cumulative = Vec::with_capacity(psi.amps.len());
        let mut acc = 0.0;
        for a in &psi.amps {
            acc += a.norm_sqr();
            cumulative.push(acc);
        }
        let n = self.diag.num_qubits;
        let last = cumulative.len() - 1;
        let mut total = 0.0;
        let outcomes: Vec<Assignment> = (0..shots)
            .map(|_| {
                let u = self.rng.random::<f64>() * acc;
                let b = cumulative.partition_point(|&c| c <= u).min(last);
                total += self.diag.values[b];
                Assignment::new(b as u64, n).expect("basis index fits register")
            })
            .collect();
        let mean = -total / shots as f64;
        self.trajectory.push(tag, &params.to_point(), mean, shots);
        (mean, outcomes)
    }
}

impl Objective for ShotObjective {
    fn evaluate(&mut self, x: &[f64], tag: &EvalTag) -> f64 {
        let params = QaoaParams::from_point(x).expect("optimizer passes 2p finite coordinates");
        self.sample_shots(&params, tag).0
    }

    fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    fn exact(&self, x: &[f64]) -> Option<f64> {
        QaoaParams::from_point(x)
            .ok()
            .map(|p| -exact_expectation(&self.diag, &p))
    }
}
