//! Reflected Euler-Maruyama integrator with boundary local time.
//!
//! One step of the default (projection) scheme moves the state by the
//! Ornstein-Uhlenbeck drift and a Karhunen-Loeve noise increment, then
//! projects back onto the closure `{ G <= tol }` whenever the proposal
//! escapes. The Cameron-Martin distance removed by the projection is the
//! local-time increment, which makes `L` the H-unit boundary local time.
//!
//! Two clock conventions are supported coherently:
//!
//! * `dirichlet`: `X* = X - X dt + sqrt(2 dt) Q^{1/2} xi`; component
//!   quadratic variation accrues at rate 2 and the local-time/surface-
//!   measure constant is exact.
//! * `probabilist`: `X* = X - X dt / 2 + sqrt(dt) Q^{1/2} xi`; standard
//!   Brownian components, halved drift, halved local-time constant.
//!
//! A penalization scheme (inward drift `-(1/eps) max(G, 0) nu_G / |D_H G|_H`
//! with `L` the time integral of its magnitude) is provided as a
//! scheme-independence cross-check.

use crate::domain::{DomainScratch, LevelSetDomain};
use crate::error::{Error, Result};
use crate::rng::{tag, CounterRng};
use crate::space::{GaussianSpace, Vector};
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Time-scale convention of the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Clock {
    #[default]
    Dirichlet,
    Probabilist,
}

impl Clock {
    /// Drift coefficient in front of `-X dt`.
    pub fn drift_coeff(self) -> f64 {
        match self {
            Clock::Dirichlet => 1.0,
            Clock::Probabilist => 0.5,
        }
    }

    /// Variance rate of the noise: `sqrt(rate * dt) Q^{1/2} xi` per step;
    /// equals the realized quadratic-variation slope of each component.
    pub fn qv_rate(self) -> f64 {
        match self {
            Clock::Dirichlet => 2.0,
            Clock::Probabilist => 1.0,
        }
    }
}

/// Reflection scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Scheme {
    Projection,
    Penalization { epsilon: f64 },
}

impl Default for Scheme {
    fn default() -> Self {
        Scheme::Projection
    }
}

/// Step size, horizon, scheme, clock, seed, projection controls, path count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub clock: Clock,
    pub seed: u64,
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_max_newton_iters")]
    pub max_newton_iters: usize,
    #[serde(default = "default_paths")]
    pub paths: usize,
}

fn default_newton_tol() -> f64 {
    1e-10
}
fn default_max_newton_iters() -> usize {
    50
}
fn default_paths() -> usize {
    1
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidConfig("dt must be positive".into()));
        }
        if self.horizon < 0.0 {
            return Err(Error::InvalidConfig("horizon must be nonnegative".into()));
        }
        if self.horizon > 0.0 && self.dt > self.horizon {
            return Err(Error::InvalidConfig("dt must not exceed the horizon".into()));
        }
        if let Scheme::Penalization { epsilon } = self.scheme {
            if !(epsilon > 0.0) {
                return Err(Error::InvalidConfig(
                    "penalization epsilon must be positive".into(),
                ));
            }
        }
        if self.paths == 0 {
            return Err(Error::InvalidConfig("paths must be >= 1".into()));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::InvalidConfig("newton_tol must be positive".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

/// A discrete trajectory with its nondecreasing boundary local time.
///
/// `states` and `local_time` have `n_steps + 1` entries; `hit_flags` has one
/// entry per step. Local time grows only across hit-flagged steps, and under
/// the projection scheme every stored state satisfies `G <= newton_tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    pub local_time: Vec<f64>,
    pub hit_flags: Vec<bool>,
}

impl PathRecord {
    pub fn n_steps(&self) -> usize {
        self.hit_flags.len()
    }

    pub fn final_state(&self) -> &Vector {
        self.states.last().expect("paths hold at least one state")
    }

    pub fn total_local_time(&self) -> f64 {
        *self.local_time.last().expect("paths hold at least one state")
    }

    /// Local-time increment over step `n`.
    pub fn dl(&self, n: usize) -> f64 {
        self.local_time[n + 1] - self.local_time[n]
    }

    /// Structural invariants: lengths, `L_0 = 0`, monotone local time, and
    /// local-time support on hit-flagged steps.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n_steps();
        if self.states.len() != n + 1 || self.times.len() != n + 1 || self.local_time.len() != n + 1
        {
            return Err(Error::InvalidConfig("ragged path record".into()));
        }
        if self.local_time[0] != 0.0 {
            return Err(Error::InvalidConfig("local time must start at zero".into()));
        }
        for i in 0..n {
            let dl = self.dl(i);
            if dl < 0.0 {
                return Err(Error::InvalidConfig("local time must be nondecreasing".into()));
            }
            if dl > 0.0 && !self.hit_flags[i] {
                return Err(Error::InvalidConfig(
                    "local time grew off a hit-flagged step".into(),
                ));
            }
        }
        Ok(())
    }

    /// Write as CSV with header `t,x_1..x_d,L,hit`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let d = self.states[0].dim();
        let cols: Vec<String> = (1..=d).map(|k| format!("x_{k}")).collect();
        writeln!(w, "t,{},L,hit", cols.join(","))?;
        for (i, x) in self.states.iter().enumerate() {
            let hit = if i == 0 {
                0
            } else {
                u8::from(self.hit_flags[i - 1])
            };
            let coords: Vec<String> = x.coords().iter().map(|c| format!("{c}")).collect();
            writeln!(
                w,
                "{},{},{},{}",
                self.times[i],
                coords.join(","),
                self.local_time[i],
                hit
            )?;
        }
        Ok(())
    }
}

/// Work buffers for the allocation-free step kernel.
#[derive(Debug, Clone)]
pub struct StepScratch {
    saved: Vec<f64>,
    grad: Vec<f64>,
    domain: DomainScratch,
}

impl StepScratch {
    pub fn new(dim: usize) -> Self {
        Self {
            saved: vec![0.0; dim],
            grad: vec![0.0; dim],
            domain: DomainScratch::new(dim),
        }
    }
}

/// The step kernel: advances `state` into `out` without heap allocation.
fn em_step_into(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    config: &SimConfig,
    state: &[f64],
    noise: &[f64],
    out: &mut [f64],
    scratch: &mut StepScratch,
) -> Result<(f64, bool)> {
    let dt = config.dt;
    let sigma = (config.clock.qv_rate() * dt).sqrt();
    let drift = -config.clock.drift_coeff() * dt;

    match config.scheme {
        Scheme::Projection => {
            for (k, slot) in out.iter_mut().enumerate() {
                *slot = state[k] * (1.0 + drift);
                *slot += sigma * space.sqrt_lambdas()[k] * noise[k];
            }
            if domain.eval_g_buf(space, out, scratch.domain.perp_mut()) > config.newton_tol
            {
                scratch.saved.copy_from_slice(out);
                domain.project_buf(
                    space,
                    out,
                    config.newton_tol,
                    config.max_newton_iters,
                    &mut scratch.domain,
                )?;
                let dl = crate::domain::h_distance(space, out, &scratch.saved);
                Ok((dl, true))
            } else {
                Ok((0.0, false))
            }
        }
        Scheme::Penalization { epsilon } => {
            let g = domain.eval_g_buf(space, state, scratch.domain.perp_mut());
            for (k, slot) in out.iter_mut().enumerate() {
                *slot = state[k] * (1.0 + drift);
            }
            let mut dl = 0.0;
            let mut hit = false;
            if g > 0.0 {
                domain.grad_h_buf(space, state, &mut scratch.domain, &mut scratch.grad);
                let norm_sq: f64 = scratch
                    .grad
                    .iter()
                    .zip(space.lambdas())
                    .map(|(a, l)| a * a / l)
                    .sum();
                if norm_sq.sqrt() <= crate::domain::SINGULAR_GRADIENT_THRESHOLD {
                    return Err(Error::DegenerateGradient {
                        norm: norm_sq.sqrt(),
                        threshold: crate::domain::SINGULAR_GRADIENT_THRESHOLD,
                    });
                }
                // -(1/eps) max(G,0) nu_G / |D_H G|_H  =  -(1/eps) max(G,0) D_H G / |D_H G|_H^2
                let coeff = -(g / epsilon) / norm_sq * dt;
                for (slot, gr) in out.iter_mut().zip(&scratch.grad) {
                    *slot += coeff * gr;
                }
                dl = (g / epsilon) / norm_sq.sqrt() * dt;
                hit = true;
            }
            for (k, slot) in out.iter_mut().enumerate() {
                *slot += sigma * space.sqrt_lambdas()[k] * noise[k];
            }
            Ok((dl, hit))
        }
    }
}

/// A single Euler step: drift + noise proposal, then reflection bookkeeping.
///
/// `noise` holds `d` standard normal deviates. Returns the new state, the
/// local-time increment (H-distance removed by the reflection), and whether
/// the boundary acted.
pub fn em_step(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    config: &SimConfig,
    state: &Vector,
    noise: &[f64],
) -> Result<(Vector, f64, bool)> {
    if noise.len() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: noise.len(),
        });
    }
    let mut out = vec![0.0; space.dim()];
    let mut scratch = StepScratch::new(space.dim());
    let (dl, hit) = em_step_into(space, domain, config, state.coords(), noise, &mut out, &mut scratch)?;
    Ok((Vector::new(out), dl, hit))
}

/// One step of a trajectory as seen by an online observer. Slices stay
/// valid only for the duration of the callback.
#[derive(Debug)]
pub struct StepEvent<'a> {
    pub step: usize,
    pub before: &'a [f64],
    pub after: &'a [f64],
    pub dl: f64,
    pub hit: bool,
}

/// Integrate one path from `z`, calling `on_step` after every step, without
/// materializing the trajectory. Returns the final state. Bit-identical for
/// identical `(config, z, path_index)`; the noise stream is keyed by
/// `(seed, path_index, step)` so ensembles are order-independent.
pub fn integrate_path_observed(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    config: &SimConfig,
    z: &Vector,
    path_index: u64,
    mut on_step: impl FnMut(&StepEvent<'_>),
) -> Result<Vector> {
    config.validate()?;
    domain.validate(space)?;
    if z.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: z.dim(),
        });
    }
    if matches!(config.scheme, Scheme::Projection) && domain.eval_g(space, z) > config.newton_tol
    {
        return Err(Error::InvalidConfig(
            "initial state lies outside the closure".into(),
        ));
    }
    let n = config.n_steps();
    let rng = CounterRng::new(config.seed, path_index, tag::STEP_NOISE);
    let mut noise = vec![0.0; space.dim()];
    let mut scratch = StepScratch::new(space.dim());
    let mut cur = z.coords().to_vec();
    let mut next = vec![0.0; space.dim()];
    for step in 0..n {
        rng.standard_normals(step as u64, &mut noise);
        let (dl, hit) = em_step_into(space, domain, config, &cur, &noise, &mut next, &mut scratch)
            .map_err(|e| match e {
                Error::ProjectionDiverged {
                    iters,
                    g_value,
                    state,
                    ..
                } => Error::ProjectionDiverged {
                    iters,
                    g_value,
                    state,
                    step: Some(step),
                },
                other => other,
            })?;
        on_step(&StepEvent {
            step,
            before: &cur,
            after: &next,
            dl,
            hit,
        });
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(Vector::new(cur))
}

/// Integrate one path from `z`, materializing the full trajectory.
pub fn simulate(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    config: &SimConfig,
    z: &Vector,
    path_index: u64,
) -> Result<PathRecord> {
    let n = config.n_steps();
    let mut record = PathRecord {
        times: Vec::with_capacity(n + 1),
        states: Vec::with_capacity(n + 1),
        local_time: Vec::with_capacity(n + 1),
        hit_flags: Vec::with_capacity(n),
    };
    record.times.push(0.0);
    record.states.push(z.clone());
    record.local_time.push(0.0);
    let mut l_acc = 0.0;
    integrate_path_observed(space, domain, config, z, path_index, |event| {
        l_acc += event.dl;
        record.times.push((event.step + 1) as f64 * config.dt);
        record.states.push(Vector::new(event.after.to_vec()));
        record.local_time.push(l_acc);
        record.hit_flags.push(event.hit);
    })?;
    Ok(record)
}

/// Where paths start.
#[derive(Debug, Clone)]
pub enum StartLaw {
    /// Every path starts at the same point.
    Point(Vector),
    /// Rejection-sample the conditioned Gaussian law `gamma restricted to O`,
    /// one independent stream per path.
    StationaryRejection,
}

/// Cap on rejection attempts per path before reporting a low acceptance rate.
const MAX_REJECTION_ATTEMPTS: u64 = 1_000_000;

/// Draw the initial state for `path_index` under `start`.
pub fn initial_state(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    config: &SimConfig,
    start: &StartLaw,
    path_index: u64,
) -> Result<Vector> {
    match start {
        StartLaw::Point(z) => Ok(z.clone()),
        StartLaw::StationaryRejection => {
            let rng = CounterRng::new(config.seed, path_index, tag::INIT);
            let mut xi = vec![0.0; space.dim()];
            for attempt in 0..MAX_REJECTION_ATTEMPTS {
                rng.standard_normals(attempt, &mut xi);
                let x = space.scale_by_sqrt_q(&xi);
                if domain.contains(space, &x) {
                    return Ok(x);
                }
            }
            Err(Error::LowAcceptance {
                rate: 1.0 / MAX_REJECTION_ATTEMPTS as f64,
            })
        }
    }
}

/// Simulate `config.paths` paths and reduce each to a summary value.
///
/// Results come back indexed by path, so any worker topology produces the
/// same output for a fixed seed; merging is the caller's (associative,
/// order-fixed) fold over the returned vector.
pub fn run_ensemble_map<T: Send>(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    config: &SimConfig,
    start: &StartLaw,
    extract: impl Fn(u64, &PathRecord) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    config.validate()?;
    let run_one = |p: u64| -> Result<T> {
        let z = initial_state(space, domain, config, start, p)?;
        let record = simulate(space, domain, config, &z, p)?;
        extract(p, &record)
    };
    #[cfg(feature = "parallel")]
    {
        (0..config.paths as u64)
            .into_par_iter()
            .map(run_one)
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..config.paths as u64).map(run_one).collect()
    }
}

/// Streaming ensemble reduction: each path folds its steps into an
/// accumulator without materializing the trajectory. Returns the per-path
/// `(accumulator, final_state)` pairs indexed by path, so results are
/// independent of the worker topology.
pub fn run_ensemble_stats<T: Send>(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    config: &SimConfig,
    start: &StartLaw,
    init: impl Fn(u64, &Vector) -> T + Sync,
    on_step: impl Fn(&mut T, &StepEvent<'_>) + Sync,
) -> Result<Vec<(T, Vector)>> {
    config.validate()?;
    let run_one = |p: u64| -> Result<(T, Vector)> {
        let z = initial_state(space, domain, config, start, p)?;
        let mut acc = init(p, &z);
        let final_state =
            integrate_path_observed(space, domain, config, &z, p, |event| on_step(&mut acc, event))?;
        Ok((acc, final_state))
    };
    #[cfg(feature = "parallel")]
    {
        (0..config.paths as u64)
            .into_par_iter()
            .map(run_one)
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..config.paths as u64).map(run_one).collect()
    }
}

/// Reconstruct the driving noise path `W` from a trajectory by inverting the
/// decomposition: `W_t = X_t - z - drift_sum - reflection_sum` with
/// `drift_sum = sum(-c X_n dt)` and `reflection_sum = sum(-nu_G dL)`
/// (normal evaluated at the post-projection state for the projection scheme,
/// at the penalized state otherwise). Returns the cumulative `W` including
/// `W_0 = 0`.
pub fn reconstruct_noise(
    path: &PathRecord,
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    config: &SimConfig,
) -> Result<Vec<Vector>> {
    check_path_matches(path, space, config)?;
    let n = path.n_steps();
    let c = config.clock.drift_coeff();
    let mut out = Vec::with_capacity(n + 1);
    let mut w = Vector::zeros(space.dim());
    out.push(w.clone());
    for step in 0..n {
        let incr = step_noise_increment(path, space, domain, config, step, c)?;
        w = w.add_scaled(1.0, &incr);
        out.push(w.clone());
    }
    Ok(out)
}

// Reconstructed noise increment over one step.
fn step_noise_increment(
    path: &PathRecord,
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    config: &SimConfig,
    step: usize,
    drift_coeff: f64,
) -> Result<Vector> {
    let x0 = &path.states[step];
    let x1 = &path.states[step + 1];
    // dW = dX - drift - reflection
    let mut incr = x1.sub(x0);
    incr = incr.add_scaled(drift_coeff * config.dt, x0);
    if path.hit_flags[step] {
        let dl = path.dl(step);
        if dl > 0.0 {
            let at = match config.scheme {
                Scheme::Projection => x1,
                Scheme::Penalization { .. } => x0,
            };
            let nu = domain.unit_normal(space, at)?;
            incr = incr.add_scaled(dl, &nu);
        }
    }
    Ok(incr)
}

fn check_path_matches(path: &PathRecord, space: &GaussianSpace, config: &SimConfig) -> Result<()> {
    path.check_invariants()?;
    if path.states[0].dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: path.states[0].dim(),
        });
    }
    if path.n_steps() != config.n_steps() {
        return Err(Error::InvalidConfig(format!(
            "path has {} steps but the configuration prescribes {}",
            path.n_steps(),
            config.n_steps()
        )));
    }
    Ok(())
}

/// Cumulative per-component decomposition of a path along the H-basis
/// direction `v_k`: the coordinate series `Y^k = vhat_k(X)`, the
/// reconstructed noise component `W^k`, the drift integral, and the
/// reflection integral. All series include the `t = 0` entry.
#[derive(Debug, Clone)]
pub struct ComponentSeries {
    pub y: Vec<f64>,
    pub w: Vec<f64>,
    pub drift: Vec<f64>,
    pub refl: Vec<f64>,
}

impl ComponentSeries {
    /// Largest telescoping defect `|Y_n - Y_0 - (W_n + drift_n + refl_n)|`.
    pub fn max_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.y.len() {
            let r = (self.y[i] - self.y[0] - self.w[i] - self.drift[i] - self.refl[i]).abs();
            worst = worst.max(r);
        }
        worst
    }
}

/// Decompose the path along component `k` (zero-based).
pub fn component_series(
    path: &PathRecord,
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    config: &SimConfig,
    k: usize,
) -> Result<ComponentSeries> {
    if k >= space.dim() {
        return Err(Error::IndexOutOfRange {
            index: k,
            dim: space.dim(),
        });
    }
    check_path_matches(path, space, config)?;
    let n = path.n_steps();
    let c = config.clock.drift_coeff();
    let mut series = ComponentSeries {
        y: Vec::with_capacity(n + 1),
        w: vec![0.0],
        drift: vec![0.0],
        refl: vec![0.0],
    };
    series.y.push(space.hat(k, &path.states[0])?);
    let (mut w_acc, mut dr_acc, mut rf_acc) = (0.0, 0.0, 0.0);
    for step in 0..n {
        series.y.push(space.hat(k, &path.states[step + 1])?);
        dr_acc += -c * config.dt * space.hat(k, &path.states[step])?;
        if path.hit_flags[step] {
            let dl = path.dl(step);
            if dl > 0.0 {
                let at = match config.scheme {
                    Scheme::Projection => &path.states[step + 1],
                    Scheme::Penalization { .. } => &path.states[step],
                };
                let nu = domain.unit_normal(space, at)?;
                rf_acc += -dl * space.hat(k, &nu)?;
            }
        }
        let incr = step_noise_increment(path, space, domain, config, step, c)?;
        w_acc += space.hat(k, &incr)?;
        series.w.push(w_acc);
        series.drift.push(dr_acc);
        series.refl.push(rf_acc);
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Profile;
    use approx::assert_relative_eq;

    fn space(lambdas: &[f64]) -> GaussianSpace {
        GaussianSpace::new(lambdas.to_vec()).unwrap()
    }

    fn config(dt: f64, horizon: f64, seed: u64) -> SimConfig {
        SimConfig {
            dt,
            horizon,
            scheme: Scheme::Projection,
            clock: Clock::Dirichlet,
            seed,
            newton_tol: 1e-10,
            max_newton_iters: 50,
            paths: 1,
        }
    }

    #[test]
    fn drift_step_stays_inside() {
        let s = space(&[1.0]);
        let hs = LevelSetDomain::half_space(0, 0.0);
        let cfg = config(0.01, 1.0, 1);
        let (next, dl, hit) =
            em_step(&s, &hs, &cfg, &Vector::new(vec![-0.5]), &[0.0]).unwrap();
        assert_relative_eq!(next[0], -0.495, epsilon = 1e-15);
        assert_eq!(dl, 0.0);
        assert!(!hit);
    }

    #[test]
    fn step_onto_boundary_needs_no_projection() {
        let s = space(&[1.0]);
        let hs = LevelSetDomain::half_space(0, 0.0);
        let cfg = config(1.0, 1.0, 1);
        let (next, dl, hit) =
            em_step(&s, &hs, &cfg, &Vector::new(vec![-0.001]), &[0.0]).unwrap();
        assert_relative_eq!(next[0], 0.0, epsilon = 1e-18);
        assert_eq!(dl, 0.0);
        assert!(!hit);
    }

    #[test]
    fn overshoot_is_projected_with_matching_local_time() {
        let s = space(&[1.0]);
        let hs = LevelSetDomain::half_space(0, 0.0);
        let cfg = config(0.01, 1.0, 1);
        let (next, dl, hit) =
            em_step(&s, &hs, &cfg, &Vector::new(vec![-0.1]), &[1.0]).unwrap();
        let expected_overshoot = -0.1f64 * 0.99 + (2.0 * 0.01f64).sqrt();
        assert_relative_eq!(next[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(dl, expected_overshoot, epsilon = 1e-12);
        assert!(hit);
    }

    #[test]
    fn zero_horizon_gives_single_state_path() {
        let s = space(&[1.0, 1.0]);
        let ball = LevelSetDomain::ball(1.0).unwrap();
        let cfg = config(0.1, 0.0, 3);
        let path = simulate(&s, &ball, &cfg, &Vector::zeros(2), 0).unwrap();
        assert_eq!(path.states.len(), 1);
        assert_eq!(path.total_local_time(), 0.0);
    }

    #[test]
    fn identical_inputs_reproduce_paths_bitwise() {
        let s = space(&[1.0, 0.5]);
        let ball = LevelSetDomain::ball(1.0).unwrap();
        let cfg = config(1e-2, 2.0, 77);
        let z = Vector::new(vec![0.2, -0.1]);
        let a = simulate(&s, &ball, &cfg, &z, 4).unwrap();
        let b = simulate(&s, &ball, &cfg, &z, 4).unwrap();
        assert_eq!(a, b);
        let c = simulate(&s, &ball, &cfg, &z, 5).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn paths_respect_closure_and_local_time_support() {
        let s = space(&[1.0, 0.5]);
        let ball = LevelSetDomain::ball(1.0).unwrap();
        let cfg = config(1e-2, 5.0, 11);
        let path = simulate(&s, &ball, &cfg, &Vector::zeros(2), 0).unwrap();
        path.check_invariants().unwrap();
        let max_g = path
            .states
            .iter()
            .map(|x| ball.eval_g(&s, x))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(max_g <= cfg.newton_tol);
        // hits do occur on this horizon
        assert!(path.hit_flags.iter().any(|&h| h));
        // local time grows only on hit steps (exact zero elsewhere)
        let off_hit: f64 = (0..path.n_steps())
            .filter(|&i| !path.hit_flags[i])
            .map(|i| path.dl(i))
            .sum();
        assert_eq!(off_hit, 0.0);
    }

    #[test]
    fn reconstruction_inverts_injected_noise_on_halfspace() {
        let s = space(&[1.0]);
        let hs = LevelSetDomain::half_space(0, 0.0);
        let cfg = config(1e-3, 1.0, 21);
        let z = Vector::new(vec![-0.3]);
        let path = simulate(&s, &hs, &cfg, &z, 9).unwrap();
        let w = reconstruct_noise(&path, &s, &hs, &cfg).unwrap();

        let rng = CounterRng::new(cfg.seed, 9, tag::STEP_NOISE);
        let mut xi = [0.0];
        let sigma = (2.0 * cfg.dt).sqrt();
        for step in 0..path.n_steps() {
            rng.standard_normals(step as u64, &mut xi);
            let injected = sigma * xi[0];
            let recovered = w[step + 1][0] - w[step][0];
            assert!(
                (recovered - injected).abs() < 1e-12,
                "step {step}: {recovered} vs {injected}"
            );
        }
    }

    #[test]
    fn zero_noise_interior_path_has_zero_w() {
        let s = space(&[1.0]);
        let hs = LevelSetDomain::half_space(0, 0.0);
        let cfg = config(0.05, 0.25, 1);
        // hand-built pure-drift path
        let mut states = vec![Vector::new(vec![-0.5])];
        for i in 0..5 {
            let prev = states[i][0];
            states.push(Vector::new(vec![prev * (1.0 - cfg.dt)]));
        }
        let path = PathRecord {
            times: (0..=5).map(|i| i as f64 * cfg.dt).collect(),
            states,
            local_time: vec![0.0; 6],
            hit_flags: vec![false; 5],
        };
        let w = reconstruct_noise(&path, &s, &hs, &cfg).unwrap();
        for wi in w {
            assert!(wi[0].abs() < 1e-15);
        }
    }

    #[test]
    fn single_step_reconstruction_identity() {
        // no hit: W_1 = X_1 - z + z dt
        let s = space(&[1.0]);
        let hs = LevelSetDomain::half_space(0, 0.0);
        let cfg = config(0.5, 0.5, 33);
        let z = Vector::new(vec![-1.0]);
        let path = simulate(&s, &hs, &cfg, &z, 0).unwrap();
        if !path.hit_flags[0] {
            let w = reconstruct_noise(&path, &s, &hs, &cfg).unwrap();
            let expect = path.states[1][0] - z[0] + z[0] * cfg.dt;
            assert_relative_eq!(w[1][0], expect, epsilon = 1e-15);
        }
    }

    #[test]
    fn component_series_telescopes() {
        let s = space(&[1.0, 0.5]);
        let ball = LevelSetDomain::ball(1.0).unwrap();
        let cfg = config(1e-2, 3.0, 5);
        let path = simulate(&s, &ball, &cfg, &Vector::zeros(2), 2).unwrap();
        for k in 0..2 {
            let series = component_series(&path, &s, &ball, &cfg, k).unwrap();
            assert!(series.max_residual() <= 1e-12);
        }
        assert!(matches!(
            component_series(&path, &s, &ball, &cfg, 2),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn flat_graph_reflection_has_no_tangential_component() {
        let s = space(&[1.0, 1.0]);
        let hs = LevelSetDomain::half_space(0, 0.0);
        let cfg = config(1e-2, 3.0, 6);
        let path = simulate(&s, &hs, &cfg, &Vector::new(vec![-0.2, 0.4]), 0).unwrap();
        assert!(path.hit_flags.iter().any(|&h| h));
        let series = component_series(&path, &s, &hs, &cfg, 1).unwrap();
        assert!(series.refl.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn ball_reflection_components_match_normal_formula() {
        let s = space(&[1.0, 1.0]);
        let ball = LevelSetDomain::ball(1.0).unwrap();
        let cfg = config(1e-2, 3.0, 8);
        let path = simulate(&s, &ball, &cfg, &Vector::zeros(2), 1).unwrap();
        let mut checked = 0;
        for step in 0..path.n_steps() {
            if !path.hit_flags[step] {
                continue;
            }
            let dl = path.dl(step);
            let x = &path.states[step + 1];
            let norm = (x[0] * x[0] + x[1] * x[1]).sqrt();
            for k in 0..2 {
                let series = component_series(&path, &s, &ball, &cfg, k).unwrap();
                let incr = series.refl[step + 1] - series.refl[step];
                let expect = -x.coords()[k] / norm * dl;
                assert!((incr - expect).abs() <= 1e-12);
            }
            checked += 1;
        }
        assert!(checked > 0);
    }

    #[test]
    fn penalization_accumulates_local_time_outside() {
        let s = space(&[1.0]);
        let hs = LevelSetDomain::half_space(0, 0.0);
        let mut cfg = config(1e-3, 2.0, 13);
        cfg.scheme = Scheme::Penalization { epsilon: 1e-3 };
        let path = simulate(&s, &hs, &cfg, &Vector::new(vec![-0.1]), 0).unwrap();
        path.check_invariants().unwrap();
        assert!(path.total_local_time() > 0.0);
        // reconstruction is exact for penalization by construction
        let w = reconstruct_noise(&path, &s, &hs, &cfg).unwrap();
        let rng = CounterRng::new(cfg.seed, 0, tag::STEP_NOISE);
        let mut xi = [0.0];
        let sigma = (2.0 * cfg.dt).sqrt();
        for step in 0..path.n_steps() {
            rng.standard_normals(step as u64, &mut xi);
            let injected = sigma * xi[0];
            let recovered = w[step + 1][0] - w[step][0];
            assert!((recovered - injected).abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_rejection_start_is_inside_and_deterministic() {
        let s = space(&[1.0, 1.0]);
        let ball = LevelSetDomain::ball(1.0).unwrap();
        let cfg = config(1e-2, 1.0, 40);
        let a = initial_state(&s, &ball, &cfg, &StartLaw::StationaryRejection, 3).unwrap();
        let b = initial_state(&s, &ball, &cfg, &StartLaw::StationaryRejection, 3).unwrap();
        assert_eq!(a, b);
        assert!(ball.contains(&s, &a));
    }

    #[test]
    fn ensemble_results_are_indexed_by_path() {
        let s = space(&[1.0]);
        let hs = LevelSetDomain::half_space(0, 0.0);
        let mut cfg = config(1e-2, 1.0, 50);
        cfg.paths = 8;
        let finals = run_ensemble_map(
            &s,
            &hs,
            &cfg,
            &StartLaw::StationaryRejection,
            |p, record| Ok((p, record.final_state()[0])),
        )
        .unwrap();
        let again = run_ensemble_map(
            &s,
            &hs,
            &cfg,
            &StartLaw::StationaryRejection,
            |p, record| Ok((p, record.final_state()[0])),
        )
        .unwrap();
        assert_eq!(finals, again);
        for (i, (p, _)) in finals.iter().enumerate() {
            assert_eq!(*p, i as u64);
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = config(0.0, 1.0, 1);
        assert!(cfg.validate().is_err());
        cfg = config(0.1, 1.0, 1);
        cfg.paths = 0;
        assert!(cfg.validate().is_err());
        cfg = config(0.5, 0.1, 1);
        assert!(cfg.validate().is_err());
        cfg = config(0.1, 1.0, 1);
        cfg.scheme = Scheme::Penalization { epsilon: 0.0 };
        assert!(cfg.validate().is_err());
    }
}
