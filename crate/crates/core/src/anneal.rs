//! Dual annealing (generalized simulated annealing) for noisy objectives.
//!
//! Moves are drawn from the distorted Cauchy-Lorentz visiting distribution,
//! accepted with the Tsallis rule, and the visiting temperature follows the
//! generalized schedule. When the temperature drops below the restart
//! threshold the run polishes its best point with a Nelder-Mead search and
//! re-anneals from there. All values follow the maximization convention;
//! internally "energy" is `-value`.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};
use crate::local::nelder_mead;
use crate::rng::Rng;
use crate::trajectory::{Bounds, EvalTag, Objective, OptimizeResult, Phase, Trajectory};

/// Visiting steps are clipped to this magnitude before wrapping.
const TAIL_LIMIT: f64 = 1e8;

/// Temperature used inside the acceptance test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AcceptanceTemperature {
    /// `T_qv(t)` itself.
    SameAsVisiting,
    /// `T_qv(t) / t`.
    VisitingOverT,
}

/// Where the per-shot standard deviation for shot scheduling comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SigmaSource {
    /// A fixed value, typically the square root of the analytic variance bound.
    Fixed { sigma: f64 },
    /// Running estimate from the values observed so far.
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum ShotScheduleMode {
    Off,
    /// Keep the sample-mean deviation below `c_k * T_k`, with
    /// `c_k = c / ln(1 + t)` when `tighten` is set.
    Gelfand {
        c: f64,
        sigma: SigmaSource,
        #[serde(default)]
        tighten: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealConfig {
    /// Visiting parameter `q_v`, in (1, 3).
    pub q_v: f64,
    /// Acceptance parameter `q_a`, below 1.
    pub q_a: f64,
    /// `T_qv(1)`.
    pub t1_temperature: f64,
    pub restart_temp_ratio: f64,
    pub max_restarts: usize,
    pub eval_budget: usize,
    pub bounds: Bounds,
    pub local_search: bool,
    /// Evaluation cap per local-search invocation.
    pub local_search_evals: usize,
    pub acceptance_temperature: AcceptanceTemperature,
    pub shot_schedule: ShotScheduleMode,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            q_v: 2.62,
            q_a: -5.0,
            t1_temperature: 5230.0,
            restart_temp_ratio: 2e-5,
            max_restarts: 10,
            eval_budget: 1000,
            bounds: Bounds::angle_box(2),
            local_search: true,
            local_search_evals: 50,
            acceptance_temperature: AcceptanceTemperature::VisitingOverT,
            shot_schedule: ShotScheduleMode::Off,
        }
    }
}

impl AnnealConfig {
    /// The single-shot p=1 setup: ten restarts in about 326 evaluations.
    ///
    /// Each attempt runs six temperature steps from `T(1) = 1`, so the
    /// visiting scale shrinks from box-sized jumps to local moves within an
    /// attempt, followed by five local-search evaluations. Eleven attempts
    /// then take 320 evaluations.
    pub fn single_shot() -> Self {
        Self {
            t1_temperature: 1.0,
            restart_temp_ratio: restart_ratio_for_steps(2.62, 6),
            eval_budget: 326,
            local_search_evals: 5,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q_v > 1.0 && self.q_v < 3.0) {
            return Err(invalid(format!("q_v = {} must lie in (1, 3)", self.q_v)));
        }
        if !(self.q_a < 1.0) {
            return Err(invalid(format!("q_a = {} must be below 1", self.q_a)));
        }
        if !(self.t1_temperature > 0.0 && self.t1_temperature.is_finite()) {
            return Err(invalid("initial temperature must be positive"));
        }
        if !(self.restart_temp_ratio > 0.0 && self.restart_temp_ratio < 1.0) {
            return Err(invalid("restart temperature ratio must lie in (0, 1)"));
        }
        if self.eval_budget == 0 {
            return Err(invalid("evaluation budget must be at least 1"));
        }
        if let ShotScheduleMode::Gelfand { c, sigma, .. } = self.shot_schedule {
            if !(c > 0.0) {
                return Err(invalid("shot schedule constant c must be positive"));
            }
            if let SigmaSource::Fixed { sigma } = sigma {
                if !(sigma >= 0.0) {
                    return Err(invalid("shot schedule sigma must be non-negative"));
                }
            }
        }
        self.bounds.validate()
    }
}

/// Restart ratio at which the schedule first drops below the threshold at
/// step `steps + 1`, i.e. an attempt runs `steps` temperature steps.
pub fn restart_ratio_for_steps(q_v: f64, steps: u32) -> f64 {
    let num = 2f64.powf(q_v - 1.0) - 1.0;
    let at = |t: f64| num / ((1.0 + t).powf(q_v - 1.0) - 1.0);
    // geometric midpoint between T(steps) and T(steps + 1)
    (at(f64::from(steps)) * at(f64::from(steps + 1))).sqrt()
}

/// `T_qv(t) = T_qv(1) (2^(q_v-1) - 1) / ((1+t)^(q_v-1) - 1)`.
pub fn visiting_temperature(t: u64, t1_temperature: f64, q_v: f64) -> f64 {
    let t = t.max(1) as f64;
    let num = (q_v - 1.0) * 2f64.ln();
    let den = (q_v - 1.0) * (1.0 + t).ln();
    t1_temperature * (num.exp_m1() / den.exp_m1())
}

/// Heavy-tailed visiting distribution `g_qv`.
///
/// Each coordinate is `scale(T) * x / |y|^((q_v-1)/(3-q_v))` with `x`, `y`
/// standard normal, which reproduces the Tsallis visiting density.
#[derive(Debug, Clone, Copy)]
pub struct VisitingDistribution {
    q_v: f64,
    factor4_p: f64,
    factor6: f64,
}

impl VisitingDistribution {
    pub fn new(q_v: f64) -> Self {
        let factor2 = ((4.0 - q_v) * (q_v - 1.0).ln()).exp();
        let factor3 = ((2.0 - q_v) * std::f64::consts::LN_2 / (q_v - 1.0)).exp();
        let factor4_p = std::f64::consts::PI.sqrt() * factor2 / (factor3 * (3.0 - q_v));
        let factor5 = 1.0 / (q_v - 1.0) - 0.5;
        let d1 = 2.0 - factor5;
        let factor6 = std::f64::consts::PI * (1.0 - factor5)
            / (std::f64::consts::PI * (1.0 - factor5)).sin()
            / ln_gamma(d1).exp();
        Self {
            q_v,
            factor4_p,
            factor6,
        }
    }

    /// Width multiplier applied to the normal numerator at temperature `t`.
    pub fn scale(&self, temperature: f64) -> f64 {
        let q = self.q_v;
        let factor1 = (temperature.ln() / (q - 1.0)).exp();
        let factor4 = self.factor4_p * factor1;
        (-(q - 1.0) * (self.factor6 / factor4).ln() / (3.0 - q)).exp()
    }

    pub fn sample_coordinate(&self, scale: f64, rng: &mut Rng) -> f64 {
        let x: f64 = StandardNormal.sample(rng);
        let y: f64 = StandardNormal.sample(rng);
        let den = ((self.q_v - 1.0) * y.abs().ln() / (3.0 - self.q_v)).exp();
        (scale * x / den).clamp(-TAIL_LIMIT, TAIL_LIMIT)
    }

    /// Displacement vector of dimension `dim` at temperature `t`.
    pub fn sample(&self, temperature: f64, dim: usize, rng: &mut Rng) -> Vec<f64> {
        let scale = self.scale(temperature);
        (0..dim).map(|_| self.sample_coordinate(scale, rng)).collect()
    }
}

/// Tsallis acceptance probability for a move whose energy rises by `delta`
/// (positive means the proposal is worse).
pub fn acceptance_probability(delta: f64, temperature: f64, q_a: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(invalid(format!("acceptance temperature {temperature} must be positive")));
    }
    if delta <= 0.0 {
        return Ok(1.0);
    }
    if q_a == 1.0 {
        return Ok((-delta / temperature).exp());
    }
    let base = 1.0 + (q_a - 1.0) * delta / temperature;
    if base <= 0.0 {
        return Ok(0.0);
    }
    Ok((base.ln() / (1.0 - q_a)).exp().clamp(0.0, 1.0))
}

/// Shots needed so that `sigma / sqrt(N) <= c * T`.
pub fn shot_schedule(temperature: f64, sigma_hat: f64, c: f64) -> usize {
    let ratio = sigma_hat / (c * temperature);
    let n = (ratio * ratio).ceil();
    if n.is_finite() && n >= 1.0 {
        n.min(usize::MAX as f64) as usize
    } else {
        1
    }
}

/// Loop state of a single annealing chain.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealState {
    pub current_x: Vec<f64>,
    pub current_value: f64,
    pub best_x: Vec<f64>,
    pub best_value: f64,
    pub step: u64,
    pub temperature: f64,
}

impl AnnealState {
    fn observe(&mut self, x: &[f64], value: f64) {
        if value > self.best_value {
            self.best_value = value;
            self.best_x = x.to_vec();
        }
    }
}

/// Welford running variance of per-shot values.
#[derive(Debug, Default)]
struct RunningSigma {
    count: f64,
    mean: f64,
    m2: f64,
}

impl RunningSigma {
    fn push(&mut self, value: f64, shots: usize) {
        // a mean of N shots has sqrt(N) times less spread than one shot
        let v = value * (shots as f64).sqrt();
        self.count += 1.0;
        let d = v - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (v - self.mean);
    }

    fn sigma(&self) -> f64 {
        if self.count < 2.0 {
            0.0
        } else {
            (self.m2 / (self.count - 1.0)).sqrt()
        }
    }
}

struct Annealer<'a, O: Objective> {
    obj: &'a mut O,
    cfg: &'a AnnealConfig,
    rng: &'a mut Rng,
    visiting: VisitingDistribution,
    used: usize,
    sigma: RunningSigma,
}

impl<O: Objective> Annealer<'_, O> {
    fn remaining(&self) -> usize {
        self.cfg.eval_budget - self.used
    }

    fn shots_for(&self, temperature: f64, step: u64) -> Option<usize> {
        match self.cfg.shot_schedule {
            ShotScheduleMode::Off => None,
            ShotScheduleMode::Gelfand { c, sigma, tighten } => {
                let sigma_hat = match sigma {
                    SigmaSource::Fixed { sigma } => sigma,
                    SigmaSource::Empirical => self.sigma.sigma(),
                };
                let c = if tighten { c / (1.0 + step as f64).ln() } else { c };
                Some(shot_schedule(temperature, sigma_hat, c))
            }
        }
    }

    fn evaluate(&mut self, x: &[f64], tag: &EvalTag) -> f64 {
        let value = self.obj.evaluate(x, tag);
        self.used += 1;
        let shots = self.obj.trajectory().last().map_or(1, |r| r.shots);
        self.sigma.push(value, shots);
        value
    }

    fn proposal(&mut self, state: &AnnealState, chain_step: usize) -> Vec<f64> {
        let dim = self.cfg.bounds.dim();
        let mut x = state.current_x.clone();
        if chain_step < dim {
            let step = self.visiting.sample(state.temperature, dim, self.rng);
            for (xi, s) in x.iter_mut().zip(step) {
                *xi += s;
            }
        } else {
            let k = chain_step - dim;
            let scale = self.visiting.scale(state.temperature);
            x[k] += self.visiting.sample_coordinate(scale, self.rng);
        }
        self.cfg.bounds.wrap_point(&mut x);
        x
    }

    /// One annealing attempt from `state.current_x`. Returns false when the
    /// budget ran out.
    fn anneal(&mut self, state: &mut AnnealState, phase: Phase) -> bool {
        let cfg = self.cfg;
        let dim = cfg.bounds.dim();
        let threshold = cfg.t1_temperature * cfg.restart_temp_ratio;
        let mut t: u64 = 1;
        loop {
            let temperature = visiting_temperature(t, cfg.t1_temperature, cfg.q_v);
            if temperature < threshold {
                return true;
            }
            state.step = t;
            state.temperature = temperature;
            let accept_temp = match cfg.acceptance_temperature {
                AcceptanceTemperature::SameAsVisiting => temperature,
                AcceptanceTemperature::VisitingOverT => temperature / t as f64,
            };
            for chain_step in 0..2 * dim {
                if self.remaining() == 0 {
                    return false;
                }
                let x = self.proposal(state, chain_step);
                let mut tag = EvalTag::new(phase);
                tag.temperature = Some(temperature);
                tag.shots = self.shots_for(accept_temp, t);
                let value = self.evaluate(&x, &tag);
                state.observe(&x, value);
                let delta = state.current_value - value;
                let p = acceptance_probability(delta, accept_temp, cfg.q_a)
                    .expect("acceptance temperature is positive");
                if p >= 1.0 || self.rng.random::<f64>() < p {
                    state.current_x = x;
                    state.current_value = value;
                }
            }
            t += 1;
        }
    }

    fn local_search(&mut self, state: &mut AnnealState) {
        let cap = self.cfg.local_search_evals.min(self.remaining());
        if !self.cfg.local_search || cap == 0 {
            return;
        }
        let mut tag = EvalTag::new(Phase::Local);
        tag.temperature = Some(state.temperature);
        let before = self.obj.evaluations();
        let (x, value) = nelder_mead(
            &mut *self.obj,
            &state.best_x,
            state.best_value,
            &self.cfg.bounds,
            cap,
            &tag,
        );
        let spent = self.obj.evaluations() - before;
        for r in &self.obj.trajectory().records[before..] {
            self.sigma.push(r.value, r.shots);
        }
        self.used += spent;
        state.observe(&x, value);
        state.current_x = x;
        state.current_value = value;
    }
}

/// Runs dual annealing until the evaluation budget is spent or all restarts
/// are used.
pub fn anneal_run<O: Objective>(
    obj: &mut O,
    cfg: &AnnealConfig,
    rng: &mut Rng,
) -> Result<(OptimizeResult, Trajectory)> {
    cfg.validate()?;
    let start = obj.evaluations();
    let mut annealer = Annealer {
        visiting: VisitingDistribution::new(cfg.q_v),
        obj,
        cfg,
        rng,
        used: 0,
        sigma: RunningSigma::default(),
    };

    let x0 = cfg.bounds.sample_uniform(annealer.rng);
    let mut tag = EvalTag::new(Phase::Anneal);
    tag.temperature = Some(cfg.t1_temperature);
    let v0 = annealer.evaluate(&x0, &tag);
    let mut state = AnnealState {
        current_x: x0.clone(),
        current_value: v0,
        best_x: x0,
        best_value: v0,
        step: 1,
        temperature: cfg.t1_temperature,
    };

    let mut attempt = 0;
    loop {
        let phase = if attempt == 0 { Phase::Anneal } else { Phase::RestartAnneal };
        if !annealer.anneal(&mut state, phase) {
            break;
        }
        annealer.local_search(&mut state);
        if attempt == cfg.max_restarts || annealer.remaining() == 0 {
            break;
        }
        attempt += 1;
        state.current_x = state.best_x.clone();
        state.current_value = state.best_value;
    }

    let obj = annealer.obj;
    let trajectory = Trajectory {
        records: obj.trajectory().records[start..].to_vec(),
    };
    let result = OptimizeResult {
        exact_at_best: obj.exact(&state.best_x),
        exact_at_final: obj.exact(&state.current_x),
        best_x: state.best_x,
        best_value: state.best_value,
        final_x: state.current_x,
        evaluations: trajectory.len(),
    };
    Ok((result, trajectory))
}

/// Two-state Metropolis chain with `J(i1) = 0` and `i2` either the noisy
/// `K in {2, -1}` (equiprobable) or its mean `0.5`. Both endpoints are
/// re-evaluated at every proposal. Returns the fraction of steps spent in
/// `i1`.
pub fn two_state_noisy_chain(temperature: f64, steps: usize, noisy: bool, rng: &mut Rng) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(invalid("temperature must be positive"));
    }
    if steps == 0 {
        return Err(invalid("need at least one step"));
    }
    let energy = |state: bool, rng: &mut Rng| -> f64 {
        match (state, noisy) {
            (false, _) => 0.0,
            (true, false) => 0.5,
            (true, true) => {
                if rng.random::<bool>() {
                    2.0
                } else {
                    -1.0
                }
            }
        }
    };
    // false = i1, true = i2
    let mut state: bool = rng.random();
    let mut in_first = 0usize;
    for _ in 0..steps {
        let here = energy(state, rng);
        let there = energy(!state, rng);
        let delta = there - here;
        if delta <= 0.0 || rng.random::<f64>() < (-delta / temperature).exp() {
            state = !state;
        }
        if !state {
            in_first += 1;
        }
    }
    Ok(in_first as f64 / steps as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::trajectory::FnObjective;

    #[test]
    fn temperature_at_first_step() {
        for q_v in [1.5, 2.0, 2.62, 2.9] {
            assert_eq!(visiting_temperature(1, 5230.0, q_v), 5230.0);
        }
    }

    #[test]
    fn temperature_decreases() {
        let mut prev = f64::INFINITY;
        for t in 1..2000 {
            let temp = visiting_temperature(t, 5230.0, 2.62);
            assert!(temp < prev);
            prev = temp;
        }
    }

    #[test]
    fn temperature_q2_step3() {
        let temp = visiting_temperature(3, 9.0, 2.0);
        assert!((temp - 3.0).abs() < 1e-12);
    }

    #[test]
    fn restart_ratio_gives_requested_attempt_length() {
        for steps in [3u32, 8, 20] {
            let ratio = restart_ratio_for_steps(2.62, steps);
            let first_below = (1..1000u64)
                .find(|&t| visiting_temperature(t, 1.0, 2.62) < ratio)
                .unwrap();
            assert_eq!(first_below, u64::from(steps) + 1);
        }
    }

    #[test]
    fn acceptance_examples() {
        assert_eq!(acceptance_probability(-1.0, 2.0, -5.0).unwrap(), 1.0);
        assert_eq!(acceptance_probability(0.0, 2.0, -5.0).unwrap(), 1.0);
        let t = 3.0;
        assert_eq!(acceptance_probability(t / 6.0, t, -5.0).unwrap(), 0.0);
        assert_eq!(acceptance_probability(t / 6.0 + 0.1, t, -5.0).unwrap(), 0.0);
        assert!(acceptance_probability(t / 6.0 - 0.01, t, -5.0).unwrap() > 0.0);
        let p = acceptance_probability(t, t, 0.999).unwrap();
        assert!((p - (-1f64).exp()).abs() < 1e-3, "{p}");
        assert!(acceptance_probability(1.0, 0.0, -5.0).is_err());
        assert!(acceptance_probability(1.0, -1.0, -5.0).is_err());
    }

    #[test]
    fn acceptance_is_monotone_and_bounded() {
        for q_a in [-5.0, -1.0, 0.0, 0.5, 0.99] {
            let mut prev = 1.0;
            for k in 0..400 {
                let p = acceptance_probability(k as f64 * 0.01, 1.0, q_a).unwrap();
                assert!((0.0..=1.0).contains(&p));
                assert!(p <= prev + 1e-15);
                prev = p;
            }
        }
    }

    #[test]
    fn shot_schedule_examples() {
        assert_eq!(shot_schedule(1.0, 2.0, 1.0), 4);
        assert_eq!(shot_schedule(1.0, 0.0, 1.0), 1);
        assert_eq!(shot_schedule(0.5, 2.0, 1.0), 16);
        assert_eq!(shot_schedule(0.25, 3.0, 1.0), 4 * shot_schedule(0.5, 3.0, 1.0));
        // sample-mean deviation stays below c * T
        for (t, s, c) in [(0.3, 2.5, 0.7), (5.0, 100.0, 0.1), (1e-2, 1.0, 1.0)] {
            let n = shot_schedule(t, s, c) as f64;
            assert!(s / n.sqrt() <= c * t * (1.0 + 1e-12));
        }
    }

    fn median_abs(temperature: f64, rng: &mut Rng) -> Vec<f64> {
        let vis = VisitingDistribution::new(2.62);
        let mut v: Vec<f64> = (0..10_000).map(|_| vis.sample(temperature, 1, rng)[0].abs()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn visiting_spread_grows_with_temperature() {
        let mut rng = seeded(1);
        let hot = median_abs(10.0, &mut rng);
        let cold = median_abs(0.1, &mut rng);
        assert!(hot[5000] > cold[5000]);
        // Mann-Whitney U: hot draws exceed cold draws far more than half the time
        let mut wins = 0u64;
        let mut j = 0;
        for &c in &cold {
            while j < hot.len() && hot[j] <= c {
                j += 1;
            }
            wins += (hot.len() - j) as u64;
        }
        let n = 10_000f64;
        let u = wins as f64;
        let z = (u - n * n / 2.0) / (n * n * (2.0 * n + 1.0) / 12.0).sqrt();
        assert!(z > 10.0, "z = {z}");
    }

    #[test]
    fn visiting_is_symmetric() {
        let vis = VisitingDistribution::new(2.62);
        let mut rng = seeded(2);
        let n = 10_000;
        let s: f64 = (0..n).map(|_| vis.sample(1.0, 1, &mut rng)[0].signum()).sum();
        assert!((s / n as f64).abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn heavier_tails_at_larger_qv() {
        let kurtosis = |q_v: f64| {
            let vis = VisitingDistribution::new(q_v);
            let mut rng = seeded(3);
            // tiny temperature keeps the heaviest draws below the clipping limit
            let xs: Vec<f64> = (0..100_000).map(|_| vis.sample(1e-10, 1, &mut rng)[0]).collect();
            let n = xs.len() as f64;
            let m = xs.iter().sum::<f64>() / n;
            let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
            let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
            m4 / (m2 * m2)
        };
        let (heavy, light) = (kurtosis(2.9), kurtosis(2.1));
        assert!(heavy > light, "{heavy} vs {light}");
    }

    #[test]
    fn budget_of_one() {
        let mut obj = FnObjective::new(|x: &[f64]| -x[0]);
        let cfg = AnnealConfig {
            eval_budget: 1,
            ..AnnealConfig::default()
        };
        let (res, traj) = anneal_run(&mut obj, &cfg, &mut seeded(4)).unwrap();
        assert_eq!(res.evaluations, 1);
        assert_eq!(traj.len(), 1);
        assert_eq!(res.best_x, traj.records[0].x);
        assert_eq!(res.best_value, traj.records[0].value);
    }

    #[test]
    fn best_dominates_trajectory_and_budget_is_exact() {
        let mut obj = FnObjective::new(|x: &[f64]| (3.0 * x[0]).sin() + (2.0 * x[1]).cos());
        let cfg = AnnealConfig {
            eval_budget: 250,
            ..AnnealConfig::single_shot()
        };
        let (res, traj) = anneal_run(&mut obj, &cfg, &mut seeded(5)).unwrap();
        assert_eq!(res.evaluations, traj.len());
        assert!(traj.len() <= 250);
        assert!(traj.records.iter().all(|r| r.value <= res.best_value));
        assert!(cfg.bounds.contains(&res.best_x));
        assert!(traj.records.iter().all(|r| cfg.bounds.contains(&r.x)));
    }

    #[test]
    fn restarts_and_local_search_are_tagged() {
        let mut obj = FnObjective::new(|x: &[f64]| -(x[0] - 1.0).powi(2) - (x[1] - 2.0).powi(2));
        let (_, traj) = anneal_run(&mut obj, &AnnealConfig::single_shot(), &mut seeded(6)).unwrap();
        let count = |p: Phase| traj.records.iter().filter(|r| r.phase == p).count();
        assert!(count(Phase::Anneal) > 0);
        assert!(count(Phase::Local) > 0);
        assert!(count(Phase::RestartAnneal) > 0);
    }

    #[test]
    fn rejects_bad_config() {
        let mut obj = FnObjective::new(|_: &[f64]| 0.0);
        for cfg in [
            AnnealConfig { q_v: 3.0, ..AnnealConfig::default() },
            AnnealConfig { q_v: 1.0, ..AnnealConfig::default() },
            AnnealConfig { q_a: 1.5, ..AnnealConfig::default() },
            AnnealConfig { eval_budget: 0, ..AnnealConfig::default() },
            AnnealConfig { bounds: Bounds(vec![[1.0, 1.0]]), ..AnnealConfig::default() },
        ] {
            assert!(anneal_run(&mut obj, &cfg, &mut seeded(0)).is_err());
        }
    }

    #[test]
    fn gelfand_schedule_raises_shots_as_temperature_falls() {
        let mut obj = FnObjective::new(|x: &[f64]| x[0]);
        let cfg = AnnealConfig {
            eval_budget: 60,
            t1_temperature: 1.0,
            shot_schedule: ShotScheduleMode::Gelfand {
                c: 1.0,
                sigma: SigmaSource::Fixed { sigma: 1.0 },
                tighten: false,
            },
            local_search: false,
            ..AnnealConfig::single_shot()
        };
        let (_, traj) = anneal_run(&mut obj, &cfg, &mut seeded(7)).unwrap();
        let anneal: Vec<_> = traj.records.iter().skip(1).take(8).collect();
        assert!(anneal.first().unwrap().shots <= anneal.last().unwrap().shots);
        assert!(traj.records.iter().any(|r| r.shots > 1));
    }

    #[test]
    fn two_state_chain() {
        let mut rng = seeded(8);
        let noisy = two_state_noisy_chain(0.1, 100_000, true, &mut rng).unwrap();
        assert!((0.45..=0.55).contains(&noisy), "{noisy}");
        let clean = two_state_noisy_chain(0.1, 100_000, false, &mut rng).unwrap();
        assert!(clean >= 0.95, "{clean}");
        let warm = two_state_noisy_chain(0.5, 100_000, false, &mut rng).unwrap();
        let boltzmann = 1.0 / (1.0 + (-1f64).exp());
        assert!((warm - boltzmann).abs() < 0.02, "{warm} vs {boltzmann}");
        assert!(two_state_noisy_chain(0.0, 10, true, &mut rng).is_err());
    }
}
