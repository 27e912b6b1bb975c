//! Deterministic quadrature for Gaussian volume and surface integrals.
//!
//! All surface geometry is computed in whitened coordinates `y = Q^{-1/2} x`,
//! where the Cameron-Martin metric is Euclidean and the Hausdorff-Gauss
//! density is `theta(y) = (2 pi)^{-d/2} exp(-|y|^2 / 2)`:
//!
//! * ball volumes: exact radial integral times a sphere rule in the original
//!   coordinates (no indicator error),
//! * ball surfaces: sphere rule with the anisotropy Jacobian
//!   `|Q^{1/2} u| / prod sqrt(lambda_k)`,
//! * graph regions: tensor Gauss-Hermite over the complementary axes, a
//!   truncated panel rule along the graph direction for volumes, and the
//!   area factor `sqrt(1 + |D_{H_Y} F|_H^2)` for surfaces.

use crate::domain::LevelSetDomain;
use crate::error::{Error, Result};
use crate::space::{GaussianSpace, TestFunction, Vector};
use std::f64::consts::{PI, TAU};

/// Default nodes per axis when the caller does not supply a rule.
pub const DEFAULT_NODES: usize = 48;

/// Minimum admissible node count per axis.
pub const MIN_NODES: usize = 8;

/// Integrand truncation half-width in whitened units: Gaussian mass beyond
/// is below 4e-17 and invisible at the advertised tolerances.
const WHITENED_CUT: f64 = 8.6;

/// Integration strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    /// Full-space tensor Gauss-Hermite (no boundary).
    TensorGaussHermite,
    /// Sphere rule times exact radial integral, for balls.
    PolarSphere,
    /// Marginal rule along the graph axis, tensor Gauss-Hermite across.
    GraphMarginal,
}

/// A deterministic rule: strategy, per-axis node count, dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    pub nodes_per_axis: usize,
    pub dim: usize,
}

impl QuadratureRule {
    pub fn new(kind: RuleKind, dim: usize, nodes_per_axis: usize) -> Result<Self> {
        if nodes_per_axis < MIN_NODES {
            return Err(Error::InvalidConfig(format!(
                "quadrature needs at least {MIN_NODES} nodes per axis, got {nodes_per_axis}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidConfig("rule dimension must be positive".into()));
        }
        let cap = match kind {
            RuleKind::TensorGaussHermite | RuleKind::GraphMarginal => 6,
            RuleKind::PolarSphere => 3,
        };
        if dim > cap {
            return Err(Error::UnsupportedGeometry(format!(
                "{kind:?} supports dimension <= {cap}, got {dim}"
            )));
        }
        Ok(Self {
            kind,
            nodes_per_axis,
            dim,
        })
    }

    /// The natural rule for a domain.
    pub fn for_domain(
        domain: &LevelSetDomain,
        dim: usize,
        nodes_per_axis: usize,
    ) -> Result<Self> {
        let kind = match domain {
            LevelSetDomain::Ball { .. } => RuleKind::PolarSphere,
            LevelSetDomain::GraphRegion { .. } => RuleKind::GraphMarginal,
        };
        Self::new(kind, dim, nodes_per_axis)
    }
}

// ---------------------------------------------------------------------------
// Node generation
// ---------------------------------------------------------------------------

/// Orthonormal probabilists' Hermite values `p_0..p_n` at `x`, plus `p_n'`.
/// The orthonormal recurrence keeps magnitudes tame for n in the hundreds.
fn hermite_orthonormal(n: usize, x: f64) -> (Vec<f64>, f64) {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n >= 1 {
        p.push(x);
    }
    for k in 1..n {
        let next = (x * p[k] - (k as f64).sqrt() * p[k - 1]) / ((k + 1) as f64).sqrt();
        p.push(next);
    }
    let dp = if n == 0 { 0.0 } else { (n as f64).sqrt() * p[n - 1] };
    (p, dp)
}

/// Gauss-Hermite nodes and weights for the standard normal weight
/// (probabilists' convention): weights are positive and sum to one.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    // Bracket the roots by scanning sign changes of p_n, then polish.
    let reach = 1.2 * (4.0 * n as f64 + 2.0).sqrt();
    let grid = 40 * n;
    let eval = |x: f64| hermite_orthonormal(n, x).0[n];
    let mut nodes = Vec::with_capacity(n);
    let mut prev_x = -reach;
    let mut prev_v = eval(prev_x);
    for i in 1..=grid {
        let x = -reach + 2.0 * reach * i as f64 / grid as f64;
        let v = eval(x);
        if prev_v == 0.0 {
            nodes.push(prev_x);
        } else if prev_v * v < 0.0 {
            let (mut a, mut b, mut fa) = (prev_x, x, prev_v);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                let fm = eval(m);
                if fa * fm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            let mut root = 0.5 * (a + b);
            for _ in 0..4 {
                let (p, dp) = hermite_orthonormal(n, root);
                root -= p[n] / dp;
            }
            nodes.push(root);
        }
        prev_x = x;
        prev_v = v;
    }
    debug_assert_eq!(nodes.len(), n);
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Christoffel numbers of the orthonormal system; they sum to 1 exactly
    // because the weight is a probability density.
    let weights = nodes
        .iter()
        .map(|&x| {
            let (p, _) = hermite_orthonormal(n, x);
            1.0 / p[..n].iter().map(|v| v * v).sum::<f64>()
        })
        .collect();
    (nodes, weights)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre on [a, b]: `panels` equal panels of `n` nodes.
fn composite_legendre(a: f64, b: f64, n: usize, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(n);
    let mut xs = Vec::with_capacity(n * panels);
    let mut ws = Vec::with_capacity(n * panels);
    for p in 0..panels {
        let lo = a + (b - a) * p as f64 / panels as f64;
        let hi = a + (b - a) * (p + 1) as f64 / panels as f64;
        let half = 0.5 * (hi - lo);
        for (x, w) in gx.iter().zip(&gw) {
            xs.push(lo + half * (x + 1.0));
            ws.push(half * w);
        }
    }
    (xs, ws)
}

/// Direction nodes and sigma-measure weights on the unit sphere S^{d-1}
/// for d = 1, 2, 3. d = 1 is the two-point counting "sphere".
fn sphere_rule(dim: usize, nodes: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    match dim {
        1 => Ok(vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)]),
        2 => {
            let m = (4 * nodes).max(32);
            Ok((0..m)
                .map(|i| {
                    let th = TAU * (i as f64 + 0.5) / m as f64;
                    (vec![th.cos(), th.sin()], TAU / m as f64)
                })
                .collect())
        }
        3 => {
            let (mu, wmu) = gauss_legendre(nodes);
            let m = 2 * nodes;
            let mut out = Vec::with_capacity(nodes * m);
            for (c, wc) in mu.iter().zip(&wmu) {
                let s = (1.0 - c * c).sqrt();
                for i in 0..m {
                    let ph = TAU * (i as f64 + 0.5) / m as f64;
                    out.push((vec![s * ph.cos(), s * ph.sin(), *c], wc * TAU / m as f64));
                }
            }
            Ok(out)
        }
        _ => Err(Error::UnsupportedGeometry(format!(
            "sphere rules available for dimension <= 3, got {dim}"
        ))),
    }
}

/// Visit the tensor grid of `axes.len()` identical 1-D rules.
fn for_each_tensor(nodes: &[f64], weights: &[f64], axes: usize, mut visit: impl FnMut(&[f64], f64)) {
    if axes == 0 {
        visit(&[], 1.0);
        return;
    }
    let n = nodes.len();
    let mut idx = vec![0usize; axes];
    let mut point = vec![0.0; axes];
    loop {
        let mut w = 1.0;
        for (a, &i) in idx.iter().enumerate() {
            point[a] = nodes[i];
            w *= weights[i];
        }
        visit(&point, w);
        // odometer
        let mut a = 0;
        loop {
            idx[a] += 1;
            if idx[a] < n {
                break;
            }
            idx[a] = 0;
            a += 1;
            if a == axes {
                return;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Integrals
// ---------------------------------------------------------------------------

/// Density of the Hausdorff-Gauss surface measure relative to H-surface
/// measure: `(2 pi)^{-d/2} exp(-sum x_k^2 / (2 lambda_k))`.
pub fn theta_density(space: &GaussianSpace, x: &Vector) -> f64 {
    let d = space.dim() as f64;
    let expo: f64 = x
        .coords()
        .iter()
        .zip(space.lambdas())
        .map(|(a, l)| a * a / (2.0 * l))
        .sum();
    (TAU).powf(-d / 2.0) * (-expo).exp()
}

/// `int_O f dgamma` for a scalar integrand given in E-coordinates.
pub fn gamma_volume_integral_fn(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    f: impl Fn(&[f64]) -> f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    if rule.dim != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: rule.dim,
        });
    }
    domain.validate(space)?;
    match (domain, rule.kind) {
        (LevelSetDomain::Ball { radius }, RuleKind::PolarSphere) => {
            ball_volume(space, *radius, &f, rule.nodes_per_axis)
        }
        (LevelSetDomain::GraphRegion { axis, profile }, RuleKind::GraphMarginal) => {
            graph_volume(space, *axis, profile, &f, rule.nodes_per_axis)
        }
        (_, kind) => Err(Error::UnsupportedGeometry(format!(
            "{kind:?} rule does not match this domain"
        ))),
    }
}

/// `int_O f dgamma` for a test function.
pub fn gamma_volume_integral(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    f: &TestFunction,
    rule: &QuadratureRule,
) -> Result<f64> {
    gamma_volume_integral_fn(space, domain, |x| f.value(x), rule)
}

/// Full-space Gaussian integral by tensor Gauss-Hermite (no domain cut).
pub fn gamma_full_integral(
    space: &GaussianSpace,
    f: impl Fn(&[f64]) -> f64,
    nodes_per_axis: usize,
) -> Result<f64> {
    let d = space.dim();
    if d > 6 {
        return Err(Error::UnsupportedGeometry(format!(
            "tensor rules support dimension <= 6, got {d}"
        )));
    }
    let (gx, gw) = gauss_hermite(nodes_per_axis);
    let mut total = 0.0;
    let mut x = vec![0.0; d];
    for_each_tensor(&gx, &gw, d, |y, w| {
        for k in 0..d {
            x[k] = space.sqrt_lambdas()[k] * y[k];
        }
        total += w * f(&x);
    });
    Ok(total)
}

fn ball_volume(
    space: &GaussianSpace,
    radius: f64,
    f: &impl Fn(&[f64]) -> f64,
    nodes: usize,
) -> Result<f64> {
    let d = space.dim();
    let dirs = sphere_rule(d, nodes)?;
    let (sx, sw) = composite_legendre(0.0, radius, nodes, 4);
    let mut total = 0.0;
    let mut x = vec![0.0; d];
    for (u, wu) in &dirs {
        let a: f64 = u
            .iter()
            .zip(space.lambdas())
            .map(|(ui, l)| ui * ui / l)
            .sum();
        let mut radial = 0.0;
        for (&s, &w) in sx.iter().zip(&sw) {
            for k in 0..d {
                x[k] = s * u[k];
            }
            radial += w * f(&x) * (-0.5 * s * s * a).exp() * s.powi(d as i32 - 1);
        }
        total += wu * radial;
    }
    let norm: f64 = space.sqrt_lambdas().iter().product();
    Ok(total / norm / TAU.powf(d as f64 / 2.0))
}

fn graph_volume(
    space: &GaussianSpace,
    axis: usize,
    profile: &crate::domain::Profile,
    f: &impl Fn(&[f64]) -> f64,
    nodes: usize,
) -> Result<f64> {
    let d = space.dim();
    let perp: Vec<usize> = (0..d).filter(|k| *k != axis).collect();
    let (gx, gw) = gauss_hermite(nodes);
    let inv_sqrt_tau = 1.0 / TAU.sqrt();
    let mut total = 0.0;
    let mut x = vec![0.0; d];
    let mut x_perp = vec![0.0; d - 1];
    for_each_tensor(&gx, &gw, d - 1, |y_perp, w_perp| {
        for (i, &k) in perp.iter().enumerate() {
            x_perp[i] = space.sqrt_lambdas()[k] * y_perp[i];
            x[k] = x_perp[i];
        }
        let cut = profile.value(&x_perp);
        let lo = if cut >= 0.0 {
            -WHITENED_CUT
        } else {
            -(cut * cut + 2.0 * WHITENED_CUT * WHITENED_CUT).sqrt()
        };
        let (tx, tw) = composite_legendre(lo, cut, nodes.max(16), 6);
        let mut inner = 0.0;
        for (&t, &w) in tx.iter().zip(&tw) {
            x[axis] = space.sqrt_lambdas()[axis] * t;
            inner += w * f(&x) * (-0.5 * t * t).exp();
        }
        total += w_perp * inner * inv_sqrt_tau;
    });
    Ok(total)
}

/// `int_{boundary O} f drho` with the Feyel-de La Pradelle Hausdorff-Gauss
/// measure, realized exactly in the truncated model. Dimension caps: balls
/// up to 3 (sphere parameterization), graphs up to 6 (marginal rule).
pub fn rho_surface_integral_fn(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    f: impl Fn(&[f64]) -> f64,
    nodes: usize,
) -> Result<f64> {
    domain.validate(space)?;
    match domain {
        LevelSetDomain::Ball { radius } => ball_surface(space, *radius, &f, nodes),
        LevelSetDomain::GraphRegion { axis, profile } => {
            if space.dim() > 6 {
                return Err(Error::UnsupportedGeometry(format!(
                    "graph surface integrals support dimension <= 6, got {}",
                    space.dim()
                )));
            }
            graph_surface(space, *axis, profile, &f, nodes, None)
        }
    }
}

/// `rho_surface_integral_fn` with the default node count, test-function form.
pub fn rho_surface_integral(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    f: &TestFunction,
) -> Result<f64> {
    rho_surface_integral_fn(space, domain, |x| f.value(x), DEFAULT_NODES)
}

fn ball_surface(
    space: &GaussianSpace,
    radius: f64,
    f: &impl Fn(&[f64]) -> f64,
    nodes: usize,
) -> Result<f64> {
    let d = space.dim();
    let dirs = sphere_rule(d, nodes)?;
    let mut total = 0.0;
    let mut x = vec![0.0; d];
    for (u, wu) in &dirs {
        let a: f64 = u
            .iter()
            .zip(space.lambdas())
            .map(|(ui, l)| ui * ui / l)
            .sum();
        let q_half: f64 = u
            .iter()
            .zip(space.lambdas())
            .map(|(ui, l)| l * ui * ui)
            .sum::<f64>()
            .sqrt();
        for k in 0..d {
            x[k] = radius * u[k];
        }
        total += wu * f(&x) * q_half * (-0.5 * radius * radius * a).exp();
    }
    let norm: f64 = space.sqrt_lambdas().iter().product();
    Ok(total * radius.powi(d as i32 - 1) / norm / TAU.powf(d as f64 / 2.0))
}

/// Graph surface integral.
///
/// With `active_axes = Some(m)` this computes the finite-dimensional
/// approximation carried by the subspace spanned by the graph direction and
/// the first `m` complementary basis directions: the remaining axes are
/// still integrated against gamma (they slice the surface), but only the
/// active directions contribute to the area factor. The approximations are
/// pointwise increasing in `m` with the full integral as supremum.
fn graph_surface(
    space: &GaussianSpace,
    axis: usize,
    profile: &crate::domain::Profile,
    f: &impl Fn(&[f64]) -> f64,
    nodes: usize,
    active_axes: Option<usize>,
) -> Result<f64> {
    let d = space.dim();
    let perp: Vec<usize> = (0..d).filter(|k| *k != axis).collect();
    let m = active_axes.unwrap_or(d - 1).min(d - 1);
    let (gx, gw) = gauss_hermite(nodes);
    let inv_sqrt_tau = 1.0 / TAU.sqrt();
    let mut total = 0.0;
    let mut x = vec![0.0; d];
    let mut x_perp = vec![0.0; d - 1];
    for_each_tensor(&gx, &gw, d - 1, |y_perp, w| {
        for (i, &k) in perp.iter().enumerate() {
            x_perp[i] = space.sqrt_lambdas()[k] * y_perp[i];
            x[k] = x_perp[i];
        }
        let height = profile.value(&x_perp);
        let grad_f = profile.gradient(&x_perp);
        // area factor restricted to the active directions
        let grad_sq: f64 = perp
            .iter()
            .enumerate()
            .take(m)
            .map(|(i, &k)| space.lambdas()[k] * grad_f[i] * grad_f[i])
            .sum();
        x[axis] = space.sqrt_lambdas()[axis] * height;
        total += w
            * f(&x)
            * (-0.5 * height * height).exp()
            * inv_sqrt_tau
            * (1.0 + grad_sq).sqrt();
    });
    Ok(total)
}

/// Monotone finite-dimensional surface approximation: only the graph
/// direction and the first `m` complementary axes span the approximating
/// subspace. Increasing in `m`; equals the full integral at `m = d - 1`.
pub fn rho_surface_partial(
    space: &GaussianSpace,
    domain: &LevelSetDomain,
    f: impl Fn(&[f64]) -> f64,
    nodes: usize,
    active_axes: usize,
) -> Result<f64> {
    match domain {
        LevelSetDomain::GraphRegion { axis, profile } => {
            graph_surface(space, *axis, profile, &f, nodes, Some(active_axes))
        }
        _ => Err(Error::UnsupportedGeometry(
            "partial surface integrals are defined for graph regions".into(),
        )),
    }
}
