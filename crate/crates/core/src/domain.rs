//! Level-set domains `O = { G < 0 }` and their boundary geometry.
//!
//! Two families cover the example catalogue: the centered ball
//! `G(x) = |x|^2 - r^2` and the region below a graph
//! `G(x) = vhat_j(x) - F(x_perp)`, with the half-space as the constant-
//! profile special case. Each carries an H-gradient `D_H G = Q grad G`,
//! a unit outward normal `nu_G = D_H G / |D_H G|_H`, and a damped-Newton
//! projection onto the closure used as the discrete reflection step.

use crate::error::{Error, Result};
use crate::space::{GammaSource, GaussianSpace, Vector};
use std::sync::Arc;

/// Below this H-norm the gradient is treated as degenerate and normals are
/// refused (the ball at the origin is the canonical case).
pub const SINGULAR_GRADIENT_THRESHOLD: f64 = 1e-12;

/// Coordinate box half-width over which built-in profiles declare their
/// Lipschitz bound.
const LIPSCHITZ_BOX: f64 = 10.0;

/// Copy the complementary coordinates of `x` (all but `axis`) into `out`.
#[inline]
fn fill_perp(x: &[f64], axis: usize, out: &mut [f64]) {
    let mut j = 0;
    for (k, &v) in x.iter().enumerate() {
        if k != axis {
            out[j] = v;
            j += 1;
        }
    }
}

/// Cameron-Martin distance between two coordinate slices.
#[inline]
pub fn h_distance(space: &GaussianSpace, a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(space.lambdas())
        .map(|((x, y), l)| (x - y) * (x - y) / l)
        .sum::<f64>()
        .sqrt()
}

type ProfileFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type ProfileGrad = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Graph profile `F` over the complementary coordinates, with its Euclidean
/// gradient. Admissibility beyond the declared Lipschitz bound is asserted
/// by the caller, not verified.
#[derive(Clone)]
pub enum Profile {
    Constant {
        c: f64,
    },
    /// `F(y) = c + <slopes, y>`
    Linear {
        c: f64,
        slopes: Vec<f64>,
    },
    /// `F(y) = c + <slopes, y> + <curvatures, y^2>` (diagonal quadratic)
    Quadratic {
        c: f64,
        slopes: Vec<f64>,
        curvatures: Vec<f64>,
    },
    Custom {
        value: ProfileFn,
        gradient: ProfileGrad,
        lipschitz: f64,
    },
}

impl Profile {
    pub fn value(&self, y: &[f64]) -> f64 {
        match self {
            Profile::Constant { c } => *c,
            Profile::Linear { c, slopes } => {
                c + slopes.iter().zip(y).map(|(a, b)| a * b).sum::<f64>()
            }
            Profile::Quadratic {
                c,
                slopes,
                curvatures,
            } => {
                c + slopes.iter().zip(y).map(|(a, b)| a * b).sum::<f64>()
                    + curvatures.iter().zip(y).map(|(a, b)| a * b * b).sum::<f64>()
            }
            Profile::Custom { value, .. } => value(y),
        }
    }

    pub fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; y.len()];
        self.gradient_into(y, &mut out);
        out
    }

    /// Allocation-free gradient for the built-in profiles; custom profiles
    /// fall back to their own allocation.
    pub fn gradient_into(&self, y: &[f64], out: &mut [f64]) {
        match self {
            Profile::Constant { .. } => out.fill(0.0),
            Profile::Linear { slopes, .. } => out.copy_from_slice(slopes),
            Profile::Quadratic {
                slopes, curvatures, ..
            } => {
                for (o, ((a, b), yi)) in out
                    .iter_mut()
                    .zip(slopes.iter().zip(curvatures).zip(y))
                {
                    *o = a + 2.0 * b * yi;
                }
            }
            Profile::Custom { gradient, .. } => out.copy_from_slice(&gradient(y)),
        }
    }

    /// Declared Lipschitz bound (on the `LIPSCHITZ_BOX` box for built-ins).
    pub fn lipschitz(&self) -> f64 {
        match self {
            Profile::Constant { .. } => 0.0,
            Profile::Linear { slopes, .. } => {
                slopes.iter().map(|a| a * a).sum::<f64>().sqrt()
            }
            Profile::Quadratic {
                slopes, curvatures, ..
            } => slopes
                .iter()
                .zip(curvatures)
                .map(|(a, b)| {
                    let g = a.abs() + 2.0 * b.abs() * LIPSCHITZ_BOX;
                    g * g
                })
                .sum::<f64>()
                .sqrt(),
            Profile::Custom { lipschitz, .. } => *lipschitz,
        }
    }
}

impl std::fmt::Debug for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Profile::Constant { c } => write!(f, "Constant({c})"),
            Profile::Linear { c, slopes } => write!(f, "Linear({c}, {slopes:?})"),
            Profile::Quadratic {
                c,
                slopes,
                curvatures,
            } => write!(f, "Quadratic({c}, {slopes:?}, {curvatures:?})"),
            Profile::Custom { lipschitz, .. } => write!(f, "Custom(lip={lipschitz})"),
        }
    }
}

/// A level-set domain `O = { G < 0 }`.
#[derive(Debug, Clone)]
pub enum LevelSetDomain {
    /// `G(x) = |x|^2 - r^2`, the centered E-ball of radius `r`.
    Ball { radius: f64 },
    /// `G(x) = vhat_axis(x) - F(x_perp)`, the region below the graph of `F`
    /// along the H-direction `v_axis`. `axis` is zero-based.
    GraphRegion { axis: usize, profile: Profile },
}

/// Reusable work buffers for the allocation-free domain kernels driving the
/// integrator's hot loop.
#[derive(Debug, Clone)]
pub struct DomainScratch {
    perp: Vec<f64>,
    perp_grad: Vec<f64>,
    grad: Vec<f64>,
    trial: Vec<f64>,
}

impl DomainScratch {
    pub fn new(dim: usize) -> Self {
        Self {
            perp: vec![0.0; dim.saturating_sub(1)],
            perp_grad: vec![0.0; dim.saturating_sub(1)],
            grad: vec![0.0; dim],
            trial: vec![0.0; dim],
        }
    }

    pub fn perp_mut(&mut self) -> &mut [f64] {
        &mut self.perp
    }
}

impl LevelSetDomain {
    pub fn ball(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidConfig("ball radius must be positive".into()));
        }
        Ok(LevelSetDomain::Ball { radius })
    }

    pub fn graph_region(axis: usize, profile: Profile) -> Self {
        LevelSetDomain::GraphRegion { axis, profile }
    }

    /// Half-space `{ vhat_axis < level }`: a graph region with constant profile.
    pub fn half_space(axis: usize, level: f64) -> Self {
        LevelSetDomain::GraphRegion {
            axis,
            profile: Profile::Constant { c: level },
        }
    }

    /// Check dimensional consistency against a space.
    pub fn validate(&self, space: &GaussianSpace) -> Result<()> {
        match self {
            LevelSetDomain::Ball { .. } => Ok(()),
            LevelSetDomain::GraphRegion { axis, profile } => {
                if *axis >= space.dim() {
                    return Err(Error::IndexOutOfRange {
                        index: *axis,
                        dim: space.dim(),
                    });
                }
                let probe = vec![0.0; space.dim() - 1];
                if profile.gradient(&probe).len() != space.dim() - 1 {
                    return Err(Error::InvalidConfig(format!(
                        "profile gradient has {} components, expected {}",
                        profile.gradient(&probe).len(),
                        space.dim() - 1
                    )));
                }
                Ok(())
            }
        }
    }


    /// Sign of `G` classifies position: negative interior, zero boundary,
    /// positive exterior.
    pub fn eval_g(&self, space: &GaussianSpace, x: &Vector) -> f64 {
        let mut perp = vec![0.0; x.dim().saturating_sub(1)];
        self.eval_g_buf(space, x.coords(), &mut perp)
    }

    /// `eval_g` on a coordinate slice, reusing `perp` as workspace
    /// (length `d - 1`; untouched for balls).
    pub fn eval_g_buf(&self, space: &GaussianSpace, x: &[f64], perp: &mut [f64]) -> f64 {
        match self {
            LevelSetDomain::Ball { radius } => {
                x.iter().map(|a| a * a).sum::<f64>() - radius * radius
            }
            LevelSetDomain::GraphRegion { axis, profile } => {
                fill_perp(x, *axis, perp);
                x[*axis] / space.sqrt_lambdas()[*axis] - profile.value(perp)
            }
        }
    }

    pub fn contains(&self, space: &GaussianSpace, x: &Vector) -> bool {
        self.eval_g(space, x) < 0.0
    }

    /// H-gradient `D_H G(x) = Q grad G(x)`, in E-coordinates.
    ///
    /// Ball: `2 Q x`. Graph: `v_axis - Q_perp grad F`, constant in the
    /// graph direction.
    pub fn grad_h(&self, space: &GaussianSpace, x: &Vector) -> Vector {
        let mut scratch = DomainScratch::new(x.dim());
        let mut out = vec![0.0; x.dim()];
        self.grad_h_buf(space, x.coords(), &mut scratch, &mut out);
        Vector::new(out)
    }

    /// `grad_h` on slices, writing into `out` with scratch workspace.
    pub fn grad_h_buf(
        &self,
        space: &GaussianSpace,
        x: &[f64],
        scratch: &mut DomainScratch,
        out: &mut [f64],
    ) {
        let DomainScratch {
            perp, perp_grad, ..
        } = scratch;
        self.grad_h_into_split(space, x, perp, perp_grad, out);
    }

    /// Squared H-norm of the H-gradient.
    pub fn grad_h_norm_sq(&self, space: &GaussianSpace, x: &Vector) -> f64 {
        let g = self.grad_h(space, x);
        space.h_inner(&g, &g).expect("gradient dimension")
    }

    /// Unit outward normal `nu_G = D_H G / |D_H G|_H`.
    ///
    /// Errors at degenerate points (ball at the origin); callers must only
    /// request normals near the boundary region.
    pub fn unit_normal(&self, space: &GaussianSpace, x: &Vector) -> Result<Vector> {
        let g = self.grad_h(space, x);
        let norm = space.h_inner(&g, &g)?.sqrt();
        if norm <= SINGULAR_GRADIENT_THRESHOLD {
            return Err(Error::DegenerateGradient {
                norm,
                threshold: SINGULAR_GRADIENT_THRESHOLD,
            });
        }
        Ok(g.scale(1.0 / norm))
    }

    /// Project `x` onto the closure `{ G <= tol }` by damped Newton steps in
    /// H-geometry, `y <- y - (G(y) / |D_H G(y)|_H^2) D_H G(y)`.
    ///
    /// Returns `(y, delta_l)` with `delta_l = |y - x|_H`, zero exactly when
    /// `x` already satisfies the constraint.
    pub fn project_to_closure(
        &self,
        space: &GaussianSpace,
        x: &Vector,
        tol: f64,
        max_iters: usize,
    ) -> Result<(Vector, f64)> {
        let mut y = x.coords().to_vec();
        let mut scratch = DomainScratch::new(x.dim());
        self.project_buf(space, &mut y, tol, max_iters, &mut scratch)?;
        let dl = h_distance(space, &y, x.coords());
        Ok((Vector::new(y), dl))
    }

    /// Project `y` in place onto `{ G <= tol }` by damped Newton steps.
    /// The local-time increment is the H-distance between the caller's
    /// saved entry state and the projected exit state.
    pub fn project_buf(
        &self,
        space: &GaussianSpace,
        y: &mut [f64],
        tol: f64,
        max_iters: usize,
        scratch: &mut DomainScratch,
    ) -> Result<()> {
        let mut g = self.eval_g_buf(space, y, &mut scratch.perp);
        if g <= tol {
            return Ok(());
        }
        for _ in 0..max_iters {
            {
                let DomainScratch {
                    perp,
                    perp_grad,
                    grad,
                    ..
                } = scratch;
                self.grad_h_into_split(space, y, perp, perp_grad, grad);
            }
            let norm_sq: f64 = scratch
                .grad
                .iter()
                .zip(space.lambdas())
                .map(|(a, l)| a * a / l)
                .sum();
            if norm_sq <= SINGULAR_GRADIENT_THRESHOLD * SINGULAR_GRADIENT_THRESHOLD {
                return Err(Error::DegenerateGradient {
                    norm: norm_sq.sqrt(),
                    threshold: SINGULAR_GRADIENT_THRESHOLD,
                });
            }
            // Damping on |G|: halve the Newton step until it improves.
            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let coeff = -scale * g / norm_sq;
                for ((t, yi), gr) in scratch.trial.iter_mut().zip(y.iter()).zip(&scratch.grad) {
                    *t = yi + coeff * gr;
                }
                let gc = self.eval_g_buf_trial(space, scratch);
                if gc.abs() < g.abs() || gc <= tol {
                    y.copy_from_slice(&scratch.trial);
                    g = gc;
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            if !accepted {
                break;
            }
            if g <= tol {
                return Ok(());
            }
        }
        Err(Error::ProjectionDiverged {
            iters: max_iters,
            g_value: g,
            state: y.to_vec(),
            step: None,
        })
    }

    fn eval_g_buf_trial(&self, space: &GaussianSpace, scratch: &mut DomainScratch) -> f64 {
        match self {
            LevelSetDomain::Ball { radius } => {
                scratch.trial.iter().map(|a| a * a).sum::<f64>() - radius * radius
            }
            LevelSetDomain::GraphRegion { axis, profile } => {
                fill_perp(&scratch.trial, *axis, &mut scratch.perp);
                scratch.trial[*axis] / space.sqrt_lambdas()[*axis] - profile.value(&scratch.perp)
            }
        }
    }

    fn grad_h_into_split(
        &self,
        space: &GaussianSpace,
        x: &[f64],
        perp: &mut [f64],
        perp_grad: &mut [f64],
        out: &mut [f64],
    ) {
        match self {
            LevelSetDomain::Ball { .. } => {
                for ((o, a), l) in out.iter_mut().zip(x).zip(space.lambdas()) {
                    *o = 2.0 * l * a;
                }
            }
            LevelSetDomain::GraphRegion { axis, profile } => {
                fill_perp(x, *axis, perp);
                profile.gradient_into(perp, perp_grad);
                let mut gi = perp_grad.iter();
                for (k, slot) in out.iter_mut().enumerate() {
                    if k == *axis {
                        *slot = space.sqrt_lambdas()[k];
                    } else {
                        *slot = -space.lambdas()[k] * gi.next().unwrap();
                    }
                }
            }
        }
    }

    /// Monte Carlo spot check of `E[ |D_H G|_H^{-q} ; |G| < delta ]`, the
    /// integrability the boundary theory assumes near the zero level.
    /// Returns the estimate and the number of samples that landed in the
    /// `|G| < delta` band.
    pub fn singular_moment_spot_check(
        &self,
        space: &GaussianSpace,
        q: f64,
        delta: f64,
        samples: usize,
        seed: u64,
    ) -> (f64, usize) {
        let mut src = GammaSource::new(seed, 0);
        let mut total = 0.0;
        let mut hits = 0usize;
        for _ in 0..samples {
            let x = space.sample_gamma(&mut src);
            if self.eval_g(space, &x).abs() < delta {
                hits += 1;
                let norm = self.grad_h_norm_sq(space, &x).sqrt();
                total += norm.max(SINGULAR_GRADIENT_THRESHOLD).powf(-q);
            }
        }
        (total / samples as f64, hits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn space(lambdas: &[f64]) -> GaussianSpace {
        GaussianSpace::new(lambdas.to_vec()).unwrap()
    }

    #[test]
    fn ball_sign_classification() {
        let s = space(&[1.0]);
        let ball = LevelSetDomain::ball(1.0).unwrap();
        assert_relative_eq!(ball.eval_g(&s, &Vector::new(vec![0.0])), -1.0);

        let s2 = space(&[1.0, 1.0]);
        let ball2 = LevelSetDomain::ball(2.0).unwrap();
        assert_relative_eq!(ball2.eval_g(&s2, &Vector::new(vec![2.0, 0.0])), 0.0);
    }

    #[test]
    fn graph_eval_uses_hat_coordinate() {
        let s = space(&[1.0, 1.0]);
        let hs = LevelSetDomain::half_space(0, 0.0);
        assert_relative_eq!(hs.eval_g(&s, &Vector::new(vec![-3.0, 5.0])), -3.0);
    }

    #[test]
    fn ball_gradient_is_2qx() {
        let s = space(&[1.0, 1.0]);
        let ball = LevelSetDomain::ball(1.0).unwrap();
        let g = ball.grad_h(&s, &Vector::new(vec![1.0, 0.0]));
        assert_eq!(g.coords(), &[2.0, 0.0]);

        let s4 = space(&[4.0]);
        let b4 = LevelSetDomain::ball(1.0).unwrap();
        assert_relative_eq!(b4.grad_h(&s4, &Vector::new(vec![2.0]))[0], 16.0);
    }

    #[test]
    fn flat_graph_gradient_is_constant_basis_vector() {
        let s = space(&[1.0, 1.0]);
        let hs = LevelSetDomain::half_space(0, 0.0);
        for x in [[0.0, 0.0], [3.0, -2.0]] {
            let g = hs.grad_h(&s, &Vector::new(x.to_vec()));
            assert_eq!(g.coords(), &[1.0, 0.0]);
        }
    }

    #[test]
    fn unit_normal_examples() {
        let s = space(&[1.0, 1.0]);
        let ball = LevelSetDomain::ball(1.0).unwrap();
        let n = ball.unit_normal(&s, &Vector::new(vec![1.0, 0.0])).unwrap();
        assert_relative_eq!(n[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(n[1], 0.0);

        // lambda = 4: |(16)|_H = 8, so nu = (2) and |nu|_H = 1.
        let s4 = space(&[4.0]);
        let b4 = LevelSetDomain::ball(1.0).unwrap();
        let n4 = b4.unit_normal(&s4, &Vector::new(vec![2.0])).unwrap();
        assert_relative_eq!(n4[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(s4.h_inner(&n4, &n4).unwrap(), 1.0, epsilon = 1e-12);

        let hs = LevelSetDomain::half_space(0, 0.0);
        let nh = hs.unit_normal(&s, &Vector::new(vec![0.4, 9.0])).unwrap();
        assert_eq!(nh.coords(), &[1.0, 0.0]);
    }

    #[test]
    fn normal_errors_at_degenerate_point() {
        let s = space(&[1.0, 1.0]);
        let ball = LevelSetDomain::ball(1.0).unwrap();
        assert!(matches!(
            ball.unit_normal(&s, &Vector::zeros(2)),
            Err(Error::DegenerateGradient { .. })
        ));
    }

    #[test]
    fn normal_is_outward() {
        // Moving a small H-step against the normal strictly decreases G.
        let cases: Vec<(GaussianSpace, LevelSetDomain, Vector)> = vec![
            (
                space(&[1.0, 0.5]),
                LevelSetDomain::ball(1.0).unwrap(),
                Vector::new(vec![0.6, 0.8]),
            ),
            (
                space(&[1.0, 0.5]),
                LevelSetDomain::graph_region(
                    0,
                    Profile::Quadratic {
                        c: 0.2,
                        slopes: vec![-0.3],
                        curvatures: vec![0.25],
                    },
                ),
                Vector::new(vec![0.2, 0.0]),
            ),
        ];
        for (s, dom, mut x) in cases {
            // Put x on the boundary first.
            let (y, _) = dom.project_to_closure(&s, &x, 1e-12, 50).unwrap();
            x = y;
            assert!(dom.eval_g(&s, &x).abs() <= 1e-9);
            let nu = dom.unit_normal(&s, &x).unwrap();
            let inside = x.add_scaled(-1e-4, &nu);
            assert!(dom.eval_g(&s, &inside) < dom.eval_g(&s, &x));
        }
    }

    #[test]
    fn ball_gradient_norm_identity() {
        // |D_H G|_H = 2 |Q^{1/2} x| for the ball.
        let s = space(&[1.3, 0.7, 0.2]);
        let ball = LevelSetDomain::ball(0.9).unwrap();
        for x in [[0.5, -0.2, 0.8], [1.0, 1.0, -1.0]] {
            let v = Vector::new(x.to_vec());
            let lhs = ball.grad_h_norm_sq(&s, &v).sqrt();
            let rhs = 2.0 * s.q_half_norm(&v);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
    }

    #[test]
    fn graph_gradient_norm_identity() {
        // |D_H G|_H^2 = 1 + |D_{H_Y} F|_H^2 for polynomial profiles.
        let s = space(&[1.0, 0.5, 0.25]);
        let dom = LevelSetDomain::graph_region(
            0,
            Profile::Quadratic {
                c: 0.1,
                slopes: vec![0.4, -0.7],
                curvatures: vec![0.3, 0.2],
            },
        );
        for x in [[0.0, 0.3, -0.4], [1.0, -2.0, 0.5]] {
            let v = Vector::new(x.to_vec());
            let lhs = dom.grad_h_norm_sq(&s, &v);
            let perp = [x[1], x[2]];
            let gf = match &dom {
                LevelSetDomain::GraphRegion { profile, .. } => profile.gradient(&perp),
                _ => unreachable!(),
            };
            let rhs = 1.0 + 0.5 * gf[0] * gf[0] + 0.25 * gf[1] * gf[1];
            assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
        }
    }

    #[test]
    fn projection_on_interior_point_is_identity() {
        let s = space(&[1.0, 1.0]);
        let ball = LevelSetDomain::ball(1.0).unwrap();
        let x = Vector::new(vec![0.1, -0.2]);
        let (y, dl) = ball.project_to_closure(&s, &x, 1e-10, 50).unwrap();
        assert_eq!(y, x);
        assert_eq!(dl, 0.0);
    }

    #[test]
    fn projection_radial_example() {
        let s = space(&[1.0]);
        let ball = LevelSetDomain::ball(1.0).unwrap();
        let (y, dl) = ball
            .project_to_closure(&s, &Vector::new(vec![2.0]), 1e-10, 50)
            .unwrap();
        assert_relative_eq!(y[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(dl, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn projection_halfspace_orthogonal_drop() {
        let s = space(&[1.0, 1.0]);
        let hs = LevelSetDomain::half_space(0, 0.0);
        let (y, dl) = hs
            .project_to_closure(&s, &Vector::new(vec![0.3, 7.0]), 1e-10, 50)
            .unwrap();
        assert_relative_eq!(y[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(y[1], 7.0);
        assert_relative_eq!(dl, 0.3, epsilon = 1e-12);
    }

    #[test]
    fn projection_is_idempotent() {
        let s = space(&[1.0, 0.5]);
        let dom = LevelSetDomain::graph_region(
            0,
            Profile::Quadratic {
                c: 0.4,
                slopes: vec![-0.3],
                curvatures: vec![0.25],
            },
        );
        let (y, dl) = dom
            .project_to_closure(&s, &Vector::new(vec![2.0, 0.7]), 1e-10, 50)
            .unwrap();
        assert!(dl > 0.0);
        let (y2, dl2) = dom.project_to_closure(&s, &y, 1e-10, 50).unwrap();
        assert_eq!(y2, y);
        assert_eq!(dl2, 0.0);
    }

    #[test]
    fn projection_lands_on_boundary_of_anisotropic_ball() {
        let s = space(&[1.0, 0.25]);
        let ball = LevelSetDomain::ball(1.0).unwrap();
        let (y, dl) = ball
            .project_to_closure(&s, &Vector::new(vec![1.4, -0.9]), 1e-10, 50)
            .unwrap();
        assert!(ball.eval_g(&s, &y).abs() <= 1e-10);
        assert!(dl > 0.0);
    }

    #[test]
    fn interior_mass_spot_check_positive() {
        let s = space(&[1.0, 1.0]);
        let ball = LevelSetDomain::ball(1.0).unwrap();
        let mut src = GammaSource::new(5, 0);
        let inside = (0..2000)
            .filter(|_| ball.contains(&s, &s.sample_gamma(&mut src)))
            .count();
        assert!(inside > 0);
    }
}
