//! Natural evolution strategies with an isotropic Gaussian search
//! distribution.
//!
//! The gradient of the expected fitness with respect to the mean is
//! estimated from the population as `(1 / (sigma M)) sum_i f_i Z_i`, where
//! each `f_i` is the mean of that member's `N` shots. Summing shots inside
//! each member first is the same double sum over members and shots, so a
//! single shot per member still yields a usable estimate when the fitness
//! varies little across the population.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::Rng;
use crate::trajectory::{Bounds, EvalTag, Objective, OptimizeResult, Phase, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitnessShaping {
    None,
    /// Shift and scale to zero mean, unit variance within the population.
    Standardize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NesConfig {
    pub population_size: usize,
    pub generations: usize,
    pub sigma: f64,
    pub learning_rate: f64,
    pub bounds: Bounds,
    pub shots_per_member: usize,
    pub fitness_shaping: FitnessShaping,
    /// Pair draws as `Z, -Z` (only applied for even population sizes).
    pub antithetic: bool,
}

impl Default for NesConfig {
    fn default() -> Self {
        Self {
            population_size: 10,
            generations: 30,
            sigma: 0.25,
            learning_rate: 0.07,
            bounds: Bounds::angle_box(2),
            shots_per_member: 1,
            fitness_shaping: FitnessShaping::Standardize,
            antithetic: true,
        }
    }
}

impl NesConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(invalid("population size must be at least 2"));
        }
        if self.generations == 0 {
            return Err(invalid("need at least one generation"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(invalid("sigma must be positive"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid("learning rate must be non-negative"));
        }
        if self.shots_per_member == 0 {
            return Err(invalid("shots per member must be at least 1"));
        }
        self.bounds.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSample {
    pub mu: Vec<f64>,
    pub sigma: f64,
    /// Standard-normal draws `Z_k`.
    pub zs: Vec<Vec<f64>>,
    /// `mu + sigma Z_k`, before wrapping into the search box.
    pub members: Vec<Vec<f64>>,
    pub fitnesses: Vec<f64>,
}

impl PopulationSample {
    pub fn size(&self) -> usize {
        self.zs.len()
    }
}

pub fn sample_population(mu: &[f64], sigma: f64, size: usize, antithetic: bool, rng: &mut Rng) -> Result<PopulationSample> {
    if size < 2 {
        return Err(invalid("population size must be at least 2"));
    }
    let dim = mu.len();
    let mut zs: Vec<Vec<f64>> = Vec::with_capacity(size);
    let pair = antithetic && size.is_multiple_of(2);
    for k in 0..size {
        if pair && k % 2 == 1 {
            let mirrored = zs[k - 1].iter().map(|z| -z).collect();
            zs.push(mirrored);
        } else {
            zs.push((0..dim).map(|_| StandardNormal.sample(rng)).collect());
        }
    }
    let members = zs
        .iter()
        .map(|z| mu.iter().zip(z).map(|(m, z)| m + sigma * z).collect())
        .collect();
    Ok(PopulationSample {
        mu: mu.to_vec(),
        sigma,
        zs,
        members,
        fitnesses: Vec::new(),
    })
}

fn standardized(fitnesses: &[f64]) -> Option<Vec<f64>> {
    let n = fitnesses.len() as f64;
    let mean = fitnesses.iter().sum::<f64>() / n;
    let var = fitnesses.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / n;
    if var <= 0.0 || !var.is_finite() {
        return None;
    }
    let sd = var.sqrt();
    Some(fitnesses.iter().map(|f| (f - mean) / sd).collect())
}

/// `(1 / (sigma M)) sum_i f_i Z_i`. With standardization, a population of
/// identical fitnesses falls back to the raw values.
pub fn estimate_gradient(sample: &PopulationSample, shaping: FitnessShaping) -> Result<Vec<f64>> {
    let m = sample.size();
    if sample.fitnesses.len() != m {
        return Err(invalid(format!(
            "{} fitnesses for {m} members",
            sample.fitnesses.len()
        )));
    }
    let shaped;
    let fitnesses = match shaping {
        FitnessShaping::None => &sample.fitnesses,
        FitnessShaping::Standardize => match standardized(&sample.fitnesses) {
            Some(s) => {
                shaped = s;
                &shaped
            }
            None => &sample.fitnesses,
        },
    };
    let dim = sample.mu.len();
    let scale = 1.0 / (sample.sigma * m as f64);
    Ok((0..dim)
        .map(|d| scale * fitnesses.iter().zip(&sample.zs).map(|(f, z)| f * z[d]).sum::<f64>())
        .collect())
}

/// Double-sum form over members and individual shots,
/// `(1 / (sigma N M)) sum_i sum_j f_j(x_i) Z_i`.
pub fn estimate_gradient_from_shots(zs: &[Vec<f64>], shots: &[Vec<f64>], sigma: f64) -> Result<Vec<f64>> {
    let m = zs.len();
    if m == 0 || shots.len() != m {
        return Err(invalid("need one shot list per member"));
    }
    let n = shots[0].len();
    if n == 0 || shots.iter().any(|s| s.len() != n) {
        return Err(invalid("every member needs the same non-zero shot count"));
    }
    let dim = zs[0].len();
    let scale = 1.0 / (sigma * n as f64 * m as f64);
    let mut grad = vec![0.0; dim];
    for (z, member_shots) in zs.iter().zip(shots) {
        for &f in member_shots {
            for (g, zd) in grad.iter_mut().zip(z) {
                *g += f * zd;
            }
        }
    }
    grad.iter_mut().for_each(|g| *g *= scale);
    Ok(grad)
}

/// Per-generation record of the search mean and the step taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSummary {
    pub generation: usize,
    pub mu: Vec<f64>,
    pub grad: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NesOutcome {
    pub result: OptimizeResult,
    pub trajectory: Trajectory,
    pub generations: Vec<GenerationSummary>,
}

/// Evolves the search mean for `cfg.generations` generations, spending
/// exactly `population_size` evaluations per generation.
pub fn nes_run<O: Objective>(
    obj: &mut O,
    cfg: &NesConfig,
    initial_mu: Option<Vec<f64>>,
    rng: &mut Rng,
) -> Result<NesOutcome> {
    cfg.validate()?;
    let mut mu = match initial_mu {
        Some(mu) => {
            if mu.len() != cfg.bounds.dim() {
                return Err(invalid(format!(
                    "initial mean has {} coordinates, bounds have {}",
                    mu.len(),
                    cfg.bounds.dim()
                )));
            }
            mu
        }
        None => cfg.bounds.sample_uniform(rng),
    };
    cfg.bounds.wrap_point(&mut mu);

    let start = obj.evaluations();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut summaries = Vec::with_capacity(cfg.generations);
    for generation in 0..cfg.generations {
        let mut sample = sample_population(&mu, cfg.sigma, cfg.population_size, cfg.antithetic, rng)?;
        for (member, (x, z)) in sample.members.iter().zip(&sample.zs).enumerate() {
            let mut point = x.clone();
            cfg.bounds.wrap_point(&mut point);
            let tag = EvalTag {
                phase: Phase::Nes,
                shots: Some(cfg.shots_per_member),
                temperature: None,
                generation: Some(generation),
                member: Some(member),
                z: Some(z.clone()),
            };
            let value = obj.evaluate(&point, &tag);
            if best.as_ref().is_none_or(|(_, b)| value > *b) {
                best = Some((point, value));
            }
            sample.fitnesses.push(value);
        }
        let grad = estimate_gradient(&sample, cfg.fitness_shaping)?;
        for (m, g) in mu.iter_mut().zip(&grad) {
            *m += cfg.learning_rate * g;
        }
        cfg.bounds.wrap_point(&mut mu);
        summaries.push(GenerationSummary {
            generation,
            mu: mu.clone(),
            grad,
        });
    }

    let (best_x, best_value) = best.expect("at least one generation ran");
    let trajectory = Trajectory {
        records: obj.trajectory().records[start..].to_vec(),
    };
    let result = OptimizeResult {
        exact_at_best: obj.exact(&best_x),
        exact_at_final: obj.exact(&mu),
        best_x,
        best_value,
        final_x: mu,
        evaluations: trajectory.len(),
    };
    Ok(NesOutcome {
        result,
        trajectory,
        generations: summaries,
    })
}
