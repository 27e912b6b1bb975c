//! Quantitative verifiers tying simulation output to quadrature oracles.
//!
//! Analytic identities (integration by parts, Gauss-Green, the energy
//! identity) are checked by independent deterministic quadratures at
//! absolute tolerance; Monte Carlo quantities (stationarity, the Revuz
//! local-time constant, quadratic variation of the reconstructed noise) are
//! checked at three standard errors or 5% relative, whichever is looser.
//! Every verifier is a pure function of `(config, seed)`.

use crate::domain::LevelSetDomain;
use crate::engine::{self, Scheme, SimConfig, StartLaw};
use crate::error::{Error, Result};
use crate::quadrature::{
    gamma_volume_integral_fn, rho_surface_integral_fn, QuadratureRule,
};
use crate::rng::{tag, CounterRng};
use crate::space::{GaussianSpace, TestFunction, Vector};
use crate::stats;
use serde::{Deserialize, Serialize};

/// Relative tolerance floor for Monte Carlo verifiers.
pub const MC_RELATIVE_TOL: f64 = 0.05;
/// Standard-error multiplier for Monte Carlo verifiers.
pub const MC_SIGMA: f64 = 3.0;
/// Absolute tolerance for quadrature-backed verifiers.
pub const ANALYTIC_TOL: f64 = 1e-6;
/// Required acceptance rate for rejection oracles.
pub const MIN_ACCEPTANCE_RATE: f64 = 1e-3;

/// One verifier outcome: pass iff `|estimate - reference| <= tolerance`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SummaryReport {
    pub test: String,
    pub estimate: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Sample count for Monte Carlo tests, node count for quadratures.
    pub samples: u64,
    pub config_hash: String,
}

impl SummaryReport {
    pub fn new(test: impl Into<String>, estimate: f64, reference: f64, tolerance: f64, samples: u64) -> Self {
        Self {
            test: test.into(),
            estimate,
            reference,
            tolerance,
            pass: (estimate - reference).abs() <= tolerance,
            samples,
            config_hash: String::new(),
        }
    }

    pub fn with_hash(mut self, hash: &str) -> Self {
        self.config_hash = hash.to_string();
        self
    }

    /// Aligned human-readable row.
    pub fn table_row(&self) -> String {
        format!(
            "{:<28} {:>14.8} {:>14.8} {:>12.3e} {:>8} {:>10}",
            self.test,
            self.estimate,
            self.reference,
            self.tolerance,
            if self.pass { "PASS" } else { "FAIL" },
            self.samples
        )
    }

    pub fn table_header() -> String {
        format!(
            "{:<28} {:>14} {:>14} {:>12} {:>8} {:>10}",
            "test", "estimate", "reference", "tolerance", "result", "samples"
        )
    }
}

/// `vhat_k`-component of the unit outward normal at `x`.
fn normal_component(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    k: usize,
    x: &Vector,
) -> Result<f64> {
    let nu = domain.unit_normal(space, x)?;
    space.hat(k, &nu)
}

/// Residual of the boundary integration-by-parts identity in direction `k`:
/// `int_O D_k phi dgamma = int_O vhat_k phi dgamma
///  + int_{dO} nu^k Tr phi drho`,
/// with the trace realized as the boundary restriction of `phi`.
pub fn ibp_residual(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    phi: &TestFunction,
    k: usize,
    rule: &QuadratureRule,
) -> Result<f64> {
    if k >= space.dim() {
        return Err(Error::IndexOutOfRange {
            index: k,
            dim: space.dim(),
        });
    }
    let lhs = gamma_volume_integral_fn(
        space,
        domain,
        |x| phi.basis_derivative(space, k, x),
        rule,
    )?;
    let volume_term = gamma_volume_integral_fn(
        space,
        domain,
        |x| x[k] / space.sqrt_lambdas()[k] * phi.value(x),
        rule,
    )?;
    let boundary_term = rho_surface_integral_fn(
        space,
        domain,
        |x| {
            let v = Vector::new(x.to_vec());
            let nu_k = normal_component(space, domain, k, &v).unwrap_or(0.0);
            nu_k * phi.value(x)
        },
        rule.nodes_per_axis,
    )?;
    Ok((lhs - volume_term - boundary_term).abs())
}

/// Gauss-Green residual: the integration-by-parts identity with `phi = 1`,
/// `int_O vhat_k dgamma + int_{dO} nu^k drho = 0`.
pub fn gauss_green_residual(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    k: usize,
    rule: &QuadratureRule,
) -> Result<f64> {
    ibp_residual(space, domain, &TestFunction::constant(1.0), k, rule)
}

/// Dirichlet form `E_O(phi, psi) = int_O [D_H phi, D_H psi]_H dgamma`.
pub fn dirichlet_form(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    phi: &TestFunction,
    psi: &TestFunction,
    rule: &QuadratureRule,
) -> Result<f64> {
    gamma_volume_integral_fn(space, domain, |x| phi.h_gradient_inner(psi, space, x), rule)
}

/// Residual of the energy-measure identity
/// `2 E_O(phi, phi psi) - E_O(phi^2, psi) = 2 int_O psi [D_H phi, D_H phi]_H dgamma`.
pub fn energy_identity_residual(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    phi: &TestFunction,
    psi: &TestFunction,
    rule: &QuadratureRule,
) -> Result<f64> {
    let phi_psi = phi.product(psi);
    let phi_sq = phi.product(phi);
    let lhs = 2.0 * dirichlet_form(space, domain, phi, &phi_psi, rule)?
        - dirichlet_form(space, domain, &phi_sq, psi, rule)?;
    let rhs = 2.0
        * gamma_volume_integral_fn(
            space,
            domain,
            |x| psi.value(x) * phi.h_gradient_sq(space, x),
            rule,
        )?;
    Ok((lhs - rhs).abs())
}

/// Rejection-sample `n` points of `gamma` conditioned on `O`, reporting the
/// acceptance rate. Aborts below `MIN_ACCEPTANCE_RATE`.
pub fn rejection_oracle(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    seed: u64,
    n: usize,
) -> Result<(Vec<Vector>, f64)> {
    let mut out = Vec::with_capacity(n);
    let mut attempts_total = 0u64;
    let mut xi = vec![0.0; space.dim()];
    let max_attempts = (1.0 / MIN_ACCEPTANCE_RATE) as u64 * 20;
    for i in 0..n {
        let rng = CounterRng::new(seed, i as u64, tag::ORACLE);
        let mut found = false;
        for attempt in 0..max_attempts {
            rng.standard_normals(attempt, &mut xi);
            let x = space.scale_by_sqrt_q(&xi);
            attempts_total += 1;
            if domain.contains(space, &x) {
                out.push(x);
                found = true;
                break;
            }
        }
        if !found {
            return Err(Error::LowAcceptance {
                rate: out.len() as f64 / attempts_total as f64,
            });
        }
    }
    let rate = n as f64 / attempts_total as f64;
    if rate < MIN_ACCEPTANCE_RATE {
        return Err(Error::LowAcceptance { rate });
    }
    Ok((out, rate))
}

/// Two-sample KS reports per coordinate marginal (on the `vhat` scale)
/// between simulated states and oracle states.
pub fn stationarity_reports(
    space: &GaussianSpace,
    simulated: &[Vector],
    oracle: &[Vector],
) -> Result<Vec<SummaryReport>> {
    if simulated.is_empty() || oracle.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let band = stats::ks_band_two_sample(simulated.len(), oracle.len());
    let mut reports = Vec::with_capacity(space.dim());
    for k in 0..space.dim() {
        let mut xs: Vec<f64> = simulated
            .iter()
            .map(|v| space.hat(k, v))
            .collect::<Result<_>>()?;
        let mut ys: Vec<f64> = oracle
            .iter()
            .map(|v| space.hat(k, v))
            .collect::<Result<_>>()?;
        let ks = stats::ks_two_sample(&mut xs, &mut ys);
        reports.push(SummaryReport::new(
            format!("stationarity.v{}", k + 1),
            ks,
            0.0,
            band,
            simulated.len() as u64,
        ));
    }
    Ok(reports)
}

/// Simulate an ensemble from the rejection-sampled conditioned law, pool the
/// terminal states, and compare each coordinate marginal to a fresh oracle
/// sample by the two-sample KS statistic at the 95% band.
///
/// The configured horizon is the burn-in and must be at least 5 units of
/// the Dirichlet clock.
pub fn stationarity_test(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    config: &SimConfig,
    oracle_samples: usize,
) -> Result<Vec<SummaryReport>> {
    let burn_in = config.horizon * config.clock.drift_coeff();
    if burn_in < 5.0 - 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "stationarity burn-in must be >= 5 Dirichlet-clock units, got {burn_in}"
        )));
    }
    let finals = engine::run_ensemble_map(
        space,
        domain,
        config,
        &StartLaw::StationaryRejection,
        |_, record| Ok(record.final_state().clone()),
    )?;
    let (oracle, _rate) = rejection_oracle(space, domain, config.seed, oracle_samples)?;
    stationarity_reports(space, &finals, &oracle)
}

/// One-sample KS of the graph-direction marginal against the closed-form
/// truncated-normal CDF, for constant-profile (half-space) domains.
pub fn stationarity_closed_form(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    config: &SimConfig,
) -> Result<SummaryReport> {
    let (axis, level) = match domain {
        LevelSetDomain::GraphRegion {
            axis,
            profile: crate::domain::Profile::Constant { c },
        } => (*axis, *c),
        _ => {
            return Err(Error::UnsupportedGeometry(
                "closed-form stationary CDF requires a constant-profile graph".into(),
            ))
        }
    };
    let finals = engine::run_ensemble_map(
        space,
        domain,
        config,
        &StartLaw::StationaryRejection,
        |_, record| space.hat(axis, record.final_state()),
    )?;
    let mass = stats::normal_cdf(level);
    let mut xs = finals;
    let n = xs.len();
    let ks = stats::ks_one_sample(&mut xs, |t| {
        if t >= level {
            1.0
        } else {
            stats::normal_cdf(t) / mass
        }
    });
    Ok(SummaryReport::new(
        "stationarity.closed_form",
        ks,
        0.0,
        stats::ks_band_one_sample(n),
        n as u64,
    ))
}

/// Revuz correspondence: the time-normalized expected `f`-weighted local
/// time against `int_{dO} f drho / gamma(O)` (halved under the probabilist
/// clock).
pub fn revuz_test(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    config: &SimConfig,
    f: &TestFunction,
    nodes: usize,
) -> Result<SummaryReport> {
    let horizon = config.horizon;
    if !(horizon > 0.0) {
        return Err(Error::InvalidConfig("revuz test needs a positive horizon".into()));
    }
    let per_path = engine::run_ensemble_map(
        space,
        domain,
        config,
        &StartLaw::StationaryRejection,
        |_, record| {
            let mut acc = 0.0;
            for step in 0..record.n_steps() {
                let dl = record.dl(step);
                if dl > 0.0 {
                    let at = match config.scheme {
                        Scheme::Projection => &record.states[step + 1],
                        Scheme::Penalization { .. } => &record.states[step],
                    };
                    acc += f.value(at.coords()) * dl;
                }
            }
            Ok(acc / horizon)
        },
    )?;
    let (estimate, stderr) = stats::mean_stderr(&per_path);

    let rule = QuadratureRule::for_domain(domain, space.dim(), nodes)?;
    let surface = rho_surface_integral_fn(space, domain, |x| f.value(x), nodes)?;
    let volume = gamma_volume_integral_fn(space, domain, |_| 1.0, &rule)?;
    let reference = surface / volume * config.clock.qv_rate() / 2.0;

    let tolerance = (MC_SIGMA * stderr).max(MC_RELATIVE_TOL * reference.abs());
    Ok(SummaryReport::new(
        "revuz",
        estimate,
        reference,
        tolerance,
        per_path.len() as u64,
    ))
}

/// Mean of per-path expected local time `E[L_T]` with its standard error.
pub fn local_time_mean(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    config: &SimConfig,
) -> Result<(f64, f64)> {
    let per_path = engine::run_ensemble_map(
        space,
        domain,
        config,
        &StartLaw::StationaryRejection,
        |_, record| Ok(record.total_local_time()),
    )?;
    Ok(stats::mean_stderr(&per_path))
}

/// Realized quadratic-variation slope of the reconstructed noise component
/// `vhat_k(W)` (diagonal `k2 == k`) or the cross-covariation slope
/// (`k2 != k`). Diagonal slopes reference the clock constant at 3%
/// relative; cross slopes reference zero at 3% of the clock constant.
pub fn qv_test(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    config: &SimConfig,
    k: usize,
    k2: usize,
) -> Result<SummaryReport> {
    if config.dt > 1e-2 {
        return Err(Error::InvalidConfig(
            "qv test requires dt <= 1e-2".into(),
        ));
    }
    if k >= space.dim() || k2 >= space.dim() {
        return Err(Error::IndexOutOfRange {
            index: k.max(k2),
            dim: space.dim(),
        });
    }
    let horizon = config.horizon;
    let per_path = engine::run_ensemble_map(
        space,
        domain,
        config,
        &StartLaw::StationaryRejection,
        |_, record| {
            let w = engine::reconstruct_noise(record, space, domain, config)?;
            let mut acc = 0.0;
            for step in 0..record.n_steps() {
                let incr = w[step + 1].sub(&w[step]);
                let a = space.hat(k, &incr)?;
                let b = if k2 == k { a } else { space.hat(k2, &incr)? };
                acc += a * b;
            }
            Ok(acc / horizon)
        },
    )?;
    let (estimate, stderr) = stats::mean_stderr(&per_path);
    let clock_rate = config.clock.qv_rate();
    let (name, reference) = if k == k2 {
        (format!("qv.v{}", k + 1), clock_rate)
    } else {
        (format!("qv.cross.v{}v{}", k + 1, k2 + 1), 0.0)
    };
    let tolerance = (0.03 * clock_rate).max(MC_SIGMA * stderr);
    Ok(SummaryReport::new(
        name,
        estimate,
        reference,
        tolerance,
        per_path.len() as u64,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Profile;
    use crate::engine::{em_step, Clock};

    fn space(lambdas: &[f64]) -> GaussianSpace {
        GaussianSpace::new(lambdas.to_vec()).unwrap()
    }

    fn rule(domain: &LevelSetDomain, dim: usize, nodes: usize) -> QuadratureRule {
        QuadratureRule::for_domain(domain, dim, nodes).unwrap()
    }

    const ERF_INV_SQRT2: f64 = 0.682_689_492_137_085_9;
    const HALF_GAUSS_SECOND_MOMENT: f64 = 0.198_748_043_098_799_2;
    const TWO_PHI_ONE: f64 = 0.483_941_449_038_286_7;

    #[test]
    fn ibp_ball_1d_coordinate_function() {
        let s = space(&[1.0]);
        let ball = LevelSetDomain::ball(1.0).unwrap();
        let r = rule(&ball, 1, 48);
        let phi = TestFunction::coordinate(0);
        // Closed forms: lhs = erf(1/sqrt 2), volume = lhs - 2 phi(1),
        // boundary = 2 phi(1); residual vanishes.
        let lhs = gamma_volume_integral_fn(&s, &ball, |x| phi.basis_derivative(&s, 0, x), &r)
            .unwrap();
        assert!((lhs - ERF_INV_SQRT2).abs() < 1e-10);
        let vol =
            gamma_volume_integral_fn(&s, &ball, |x| x[0] * phi.value(x), &r).unwrap();
        assert!((vol - HALF_GAUSS_SECOND_MOMENT).abs() < 1e-10);
        let bnd = rho_surface_integral_fn(
            &s,
            &ball,
            |x| {
                let v = Vector::new(x.to_vec());
                normal_component(&s, &ball, 0, &v).unwrap() * phi.value(x)
            },
            48,
        )
        .unwrap();
        assert!((bnd - TWO_PHI_ONE).abs() < 1e-10);
        assert!(ibp_residual(&s, &ball, &phi, 0, &r).unwrap() < 1e-8);
    }

    #[test]
    fn ibp_halfspace_coordinate_function() {
        let s = space(&[1.0]);
        let hs = LevelSetDomain::half_space(0, 0.0);
        let r = rule(&hs, 1, 48);
        let phi = TestFunction::coordinate(0);
        let residual = ibp_residual(&s, &hs, &phi, 0, &r).unwrap();
        assert!(residual < 1e-8, "residual {residual}");
        // both sides equal 0.5
        let lhs =
            gamma_volume_integral_fn(&s, &hs, |x| phi.basis_derivative(&s, 0, x), &r).unwrap();
        assert!((lhs - 0.5).abs() < 1e-10);
    }

    #[test]
    fn ibp_constant_reduces_to_gauss_green_exactly() {
        let s = space(&[1.0, 0.5]);
        let dom = LevelSetDomain::graph_region(
            0,
            Profile::Quadratic {
                c: 0.4,
                slopes: vec![-0.3],
                curvatures: vec![0.25],
            },
        );
        let r = rule(&dom, 2, 32);
        let one = TestFunction::constant(1.0);
        let a = ibp_residual(&s, &dom, &one, 0, &r).unwrap();
        let b = gauss_green_residual(&s, &dom, 0, &r).unwrap();
        assert!((a - b).abs() <= 1e-14);
    }

    #[test]
    fn gauss_green_halfspace_cancels_to_nano() {
        let s = space(&[1.0]);
        let hs = LevelSetDomain::half_space(0, 0.0);
        let r = rule(&hs, 1, 48);
        assert!(gauss_green_residual(&s, &hs, 0, &r).unwrap() < 1e-9);
    }

    #[test]
    fn gauss_green_ball_by_symmetry() {
        let s = space(&[1.0, 1.0]);
        let ball = LevelSetDomain::ball(1.0).unwrap();
        let r = rule(&ball, 2, 32);
        for k in 0..2 {
            assert!(gauss_green_residual(&s, &ball, k, &r).unwrap() < 1e-9);
        }
    }

    #[test]
    fn gauss_green_shifted_hyperplane() {
        let s = space(&[1.0, 1.0]);
        let dom = LevelSetDomain::half_space(0, 0.5);
        let r = rule(&dom, 2, 48);
        assert!(gauss_green_residual(&s, &dom, 0, &r).unwrap() < 1e-6);
    }

    #[test]
    fn energy_identity_exact_case() {
        // phi = vhat_1, psi = 1 on the half-space: both sides equal 1.
        let s = space(&[1.0]);
        let hs = LevelSetDomain::half_space(0, 0.0);
        let r = rule(&hs, 1, 48);
        let phi = TestFunction::hat(&s, 0);
        let psi = TestFunction::constant(1.0);
        let lhs = 2.0 * dirichlet_form(&s, &hs, &phi, &phi.product(&psi), &r).unwrap()
            - dirichlet_form(&s, &hs, &phi.product(&phi), &psi, &r).unwrap();
        assert!((lhs - 1.0).abs() < 1e-9, "lhs {lhs}");
        assert!(energy_identity_residual(&s, &hs, &phi, &psi, &r).unwrap() < 1e-9);
    }

    #[test]
    fn energy_identity_constant_phi_vanishes() {
        let s = space(&[1.0, 1.0]);
        let ball = LevelSetDomain::ball(1.0).unwrap();
        let r = rule(&ball, 2, 24);
        let phi = TestFunction::constant(3.0);
        let psi = TestFunction::hat(&s, 1);
        let lhs = 2.0 * dirichlet_form(&s, &ball, &phi, &phi.product(&psi), &r).unwrap()
            - dirichlet_form(&s, &ball, &phi.product(&phi), &psi, &r).unwrap();
        assert!(lhs.abs() < 1e-12);
        assert!(energy_identity_residual(&s, &ball, &phi, &psi, &r).unwrap() < 1e-12);
    }

    #[test]
    fn energy_identity_nontrivial_pair() {
        let s = space(&[1.0]);
        let ball = LevelSetDomain::ball(1.0).unwrap();
        let r = rule(&ball, 1, 48);
        let phi = TestFunction::hat(&s, 0);
        let psi = phi.product(&phi);
        assert!(energy_identity_residual(&s, &ball, &phi, &psi, &r).unwrap() < 1e-6);
    }

    #[test]
    fn oracle_split_passes_ks() {
        let s = space(&[1.0, 1.0]);
        let ball = LevelSetDomain::ball(1.0).unwrap();
        let (a, rate_a) = rejection_oracle(&s, &ball, 11, 20_000).unwrap();
        let (b, _) = rejection_oracle(&s, &ball, 12, 20_000).unwrap();
        assert!(rate_a > 0.2);
        let reports = stationarity_reports(&s, &a, &b).unwrap();
        for rep in reports {
            assert!(rep.pass, "{}: ks {} band {}", rep.test, rep.estimate, rep.tolerance);
        }
    }

    #[test]
    fn sabotaged_drift_fails_stationarity() {
        // Integrate the half-space dynamics with the drift sign flipped to
        // +X dt: the law drifts off gamma|_O and the KS test must reject it.
        let s = space(&[1.0]);
        let hs = LevelSetDomain::half_space(0, 0.0);
        let n_paths = 4000;
        let dt = 1e-3;
        let steps = 2000;
        let mut finals = Vec::with_capacity(n_paths);
        for p in 0..n_paths {
            let rng = CounterRng::new(99, p as u64, tag::STEP_NOISE);
            let mut x = {
                let init = CounterRng::new(99, p as u64, tag::INIT);
                let mut xi = [0.0];
                let mut v = 1.0;
                for attempt in 0..10_000 {
                    init.standard_normals(attempt, &mut xi);
                    if xi[0] < 0.0 {
                        v = xi[0];
                        break;
                    }
                }
                v
            };
            let mut xi = [0.0];
            for step in 0..steps {
                rng.standard_normals(step, &mut xi);
                // sabotage: +x dt instead of -x dt
                let proposal = x + x * dt + (2.0 * dt).sqrt() * xi[0];
                x = proposal.min(0.0);
            }
            finals.push(Vector::new(vec![x]));
        }
        let (oracle, _) = rejection_oracle(&s, &hs, 100, finals.len()).unwrap();
        let reports = stationarity_reports(&s, &finals, &oracle).unwrap();
        assert!(!reports[0].pass, "sabotage must fail: ks {}", reports[0].estimate);
    }

    #[test]
    fn revuz_zero_function_is_exact() {
        let s = space(&[1.0]);
        let hs = LevelSetDomain::half_space(0, 0.0);
        let cfg = SimConfig {
            dt: 1e-3,
            horizon: 1.0,
            scheme: Scheme::Projection,
            clock: Clock::Dirichlet,
            seed: 4,
            newton_tol: 1e-10,
            max_newton_iters: 50,
            paths: 64,
        };
        let rep = revuz_test(&s, &hs, &cfg, &TestFunction::constant(0.0), 32).unwrap();
        assert_eq!(rep.estimate, 0.0);
        assert_eq!(rep.reference, 0.0);
        assert!(rep.pass);
    }

    #[test]
    fn qv_slope_short_run_dirichlet() {
        let s = space(&[1.0, 1.0]);
        let ball = LevelSetDomain::ball(1.0).unwrap();
        let cfg = SimConfig {
            dt: 1e-3,
            horizon: 2.0,
            scheme: Scheme::Projection,
            clock: Clock::Dirichlet,
            seed: 17,
            newton_tol: 1e-10,
            max_newton_iters: 50,
            paths: 32,
        };
        let rep = qv_test(&s, &ball, &cfg, 0, 0).unwrap();
        assert!(rep.pass, "qv {} vs {}", rep.estimate, rep.reference);
        let cross = qv_test(&s, &ball, &cfg, 0, 1).unwrap();
        assert!(cross.pass, "cross {}", cross.estimate);
    }

    #[test]
    fn qv_rejects_coarse_steps() {
        let s = space(&[1.0]);
        let hs = LevelSetDomain::half_space(0, 0.0);
        let cfg = SimConfig {
            dt: 0.1,
            horizon: 1.0,
            scheme: Scheme::Projection,
            clock: Clock::Dirichlet,
            seed: 1,
            newton_tol: 1e-10,
            max_newton_iters: 50,
            paths: 2,
        };
        assert!(qv_test(&s, &hs, &cfg, 0, 0).is_err());
    }

    #[test]
    fn ibp_residual_decays_under_refinement() {
        // Non-polynomial integrand on a curved graph: the residual is
        // quadrature-limited and must fall as nodes double.
        let s = space(&[1.0, 0.5]);
        let dom = LevelSetDomain::graph_region(
            0,
            Profile::Quadratic {
                c: 0.4,
                slopes: vec![-0.3],
                curvatures: vec![0.25],
            },
        );
        let phi = TestFunction::cosine(vec![2.0, 1.3]);
        let res: Vec<f64> = [8usize, 16, 32]
            .iter()
            .map(|&n| {
                let r = QuadratureRule::for_domain(&dom, 2, n).unwrap();
                ibp_residual(&s, &dom, &phi, 0, &r).unwrap()
            })
            .collect();
        assert!(
            res[0] > res[2] * 10.0 || res[0] < 1e-12,
            "no decay: {res:?}"
        );
        assert!(res[2] < 1e-8, "fine residual {res:?}");
    }

    #[test]
    fn em_step_examples_still_hold_inside_verify_context() {
        // spot-check that the verify module sees the same dynamics the
        // engine tests pin down
        let s = space(&[1.0]);
        let hs = LevelSetDomain::half_space(0, 0.0);
        let cfg = SimConfig {
            dt: 0.01,
            horizon: 1.0,
            scheme: Scheme::Projection,
            clock: Clock::Dirichlet,
            seed: 1,
            newton_tol: 1e-10,
            max_newton_iters: 50,
            paths: 1,
        };
        let (next, dl, hit) =
            em_step(&s, &hs, &cfg, &Vector::new(vec![-0.1]), &[1.0]).unwrap();
        assert!(hit);
        assert!((next[0]).abs() < 1e-12);
        assert!((dl - 0.042_421_356_237_309_5).abs() < 1e-12);
    }
}
