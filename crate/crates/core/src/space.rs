//! The truncated Gaussian state space.
//!
//! A [`GaussianSpace`] is the centered Gaussian measure with diagonal
//! covariance `Q = diag(lambda_1 .. lambda_d)` on R^d, together with the
//! Cameron-Martin geometry it induces: the inner product
//! `[u, v]_H = sum_k u_k v_k / lambda_k`, the orthonormal H-basis
//! `v_k = sqrt(lambda_k) e_k`, and the hat functionals
//! `vhat_k(x) = x_k / sqrt(lambda_k)` which are standard normal under gamma.

use crate::error::{Error, Result};
use crate::rng::{tag, CounterRng};
use std::sync::Arc;

/// A point of the state space in `e_k` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    coords: Vec<f64>,
}

impl Vector {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            coords: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// `self + scale * other`, coordinatewise.
    pub fn add_scaled(&self, scale: f64, other: &Vector) -> Vector {
        Vector::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + scale * b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector::new(self.coords.iter().map(|a| a * s).collect())
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

impl From<Vec<f64>> for Vector {
    fn from(coords: Vec<f64>) -> Self {
        Self::new(coords)
    }
}

/// Truncated covariance spectrum defining gamma and its H-geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpace {
    lambdas: Vec<f64>,
    sqrt_lambdas: Vec<f64>,
}

impl GaussianSpace {
    /// Eigenvalues must be strictly positive and nonincreasing; the canonical
    /// ordering is enforced so that identical configurations hash identically.
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidConfig("spectrum must be nonempty".into()));
        }
        for pair in lambdas.windows(2) {
            if pair[1] > pair[0] {
                return Err(Error::InvalidConfig(format!(
                    "spectrum must be nonincreasing, got {} before {}",
                    pair[0], pair[1]
                )));
            }
        }
        if lambdas.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidConfig(
                "spectrum entries must be positive and finite".into(),
            ));
        }
        let sqrt_lambdas = lambdas.iter().map(|l| l.sqrt()).collect();
        Ok(Self {
            lambdas,
            sqrt_lambdas,
        })
    }

    /// Parametric decay `lambda_k = c * k^{-p}`, `k = 1..=d`.
    pub fn power_decay(c: f64, p: f64, d: usize) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidConfig("decay scale c must be positive".into()));
        }
        if p < 0.0 {
            return Err(Error::InvalidConfig(
                "decay exponent p must be nonnegative".into(),
            ));
        }
        Self::new((1..=d).map(|k| c * (k as f64).powf(-p)).collect())
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn sqrt_lambdas(&self) -> &[f64] {
        &self.sqrt_lambdas
    }

    fn check_dim(&self, v: &Vector) -> Result<()> {
        if v.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.dim(),
            });
        }
        Ok(())
    }

    /// Cameron-Martin inner product `[u, v]_H = sum u_k v_k / lambda_k`.
    pub fn h_inner(&self, u: &Vector, v: &Vector) -> Result<f64> {
        self.check_dim(u)?;
        self.check_dim(v)?;
        Ok(u.coords()
            .iter()
            .zip(v.coords())
            .zip(&self.lambdas)
            .map(|((a, b), l)| a * b / l)
            .sum())
    }

    /// Cameron-Martin norm `|u|_H`.
    pub fn h_norm(&self, u: &Vector) -> Result<f64> {
        Ok(self.h_inner(u, u)?.sqrt())
    }

    /// Hat functional `vhat_k(x) = x_k / sqrt(lambda_k)`; standard normal
    /// under gamma. `k` is zero-based.
    pub fn hat(&self, k: usize, x: &Vector) -> Result<f64> {
        self.check_dim(x)?;
        if k >= self.dim() {
            return Err(Error::IndexOutOfRange {
                index: k,
                dim: self.dim(),
            });
        }
        Ok(x[k] / self.sqrt_lambdas[k])
    }

    /// Covariance image `Ql`, realizing the duality bridge
    /// `[Ql, Ql']_H = <l, Ql'>` between functionals and H-vectors.
    pub fn apply_covariance(&self, l: &Vector) -> Result<Vector> {
        self.check_dim(l)?;
        Ok(Vector::new(
            l.coords()
                .iter()
                .zip(&self.lambdas)
                .map(|(a, l)| a * l)
                .collect(),
        ))
    }

    /// `Q^{1/2} xi` for a vector of standard normals: the Karhunen-Loeve map.
    pub fn scale_by_sqrt_q(&self, xi: &[f64]) -> Vector {
        Vector::new(
            xi.iter()
                .zip(&self.sqrt_lambdas)
                .map(|(z, s)| z * s)
                .collect(),
        )
    }

    /// `|Q^{1/2} x|` (Euclidean norm after covariance square root).
    pub fn q_half_norm(&self, x: &Vector) -> f64 {
        x.coords()
            .iter()
            .zip(&self.lambdas)
            .map(|(a, l)| a * a * l)
            .sum::<f64>()
            .sqrt()
    }

    /// Exact gamma sample by Karhunen-Loeve: `x_k = sqrt(lambda_k) xi_k`.
    pub fn sample_gamma(&self, source: &mut GammaSource) -> Vector {
        let xi = source.next_standard_normals(self.dim());
        self.scale_by_sqrt_q(&xi)
    }
}

/// Seeded, splittable source of gamma samples.
///
/// Draw `i` from stream `s` is a pure function of `(seed, s, i)`, so
/// ensembles are reproducible regardless of worker count or order.
#[derive(Debug, Clone)]
pub struct GammaSource {
    rng: CounterRng,
    next: u64,
}

impl GammaSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self {
            rng: CounterRng::new(seed, stream, tag::SAMPLE),
            next: 0,
        }
    }

    fn next_standard_normals(&mut self, n: usize) -> Vec<f64> {
        let mut buf = vec![0.0; n];
        self.rng.standard_normals(self.next, &mut buf);
        self.next += 1;
        buf
    }
}

type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradientField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A smooth test function with its Euclidean gradient.
///
/// The H-gradient is derived as `D_H phi = Q grad phi` and the directional
/// derivative along `v_k` as `D_k phi = sqrt(lambda_k) d_k phi`.
#[derive(Clone)]
pub struct TestFunction {
    value: ScalarField,
    gradient: GradientField,
}

impl TestFunction {
    pub fn new(
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |x| {
            let _ = x;
            c
        }, |x| vec![0.0; x.len()])
    }

    /// The coordinate function `x -> x_k`.
    pub fn coordinate(k: usize) -> Self {
        Self::new(
            move |x| x[k],
            move |x| {
                let mut g = vec![0.0; x.len()];
                g[k] = 1.0;
                g
            },
        )
    }

    /// The hat functional `vhat_k` as a test function.
    pub fn hat(space: &GaussianSpace, k: usize) -> Self {
        let s = space.sqrt_lambdas()[k];
        Self::new(
            move |x| x[k] / s,
            move |x| {
                let mut g = vec![0.0; x.len()];
                g[k] = 1.0 / s;
                g
            },
        )
    }

    /// `x -> x_k^2`.
    pub fn coordinate_squared(k: usize) -> Self {
        Self::new(
            move |x| x[k] * x[k],
            move |x| {
                let mut g = vec![0.0; x.len()];
                g[k] = 2.0 * x[k];
                g
            },
        )
    }

    /// `x -> cos(<w, x>)`; handy as a non-polynomial integrand.
    pub fn cosine(weights: Vec<f64>) -> Self {
        let w = weights.clone();
        let w2 = weights;
        Self::new(
            move |x| x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>().cos(),
            move |x| {
                let arg: f64 = x.iter().zip(&w2).map(|(a, b)| a * b).sum();
                w2.iter().map(|b| -b * arg.sin()).collect()
            },
        )
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.gradient)(x)
    }

    /// Pointwise product, with the product-rule gradient.
    pub fn product(&self, other: &TestFunction) -> TestFunction {
        let (fa, ga) = (self.value.clone(), self.gradient.clone());
        let (fb, gb) = (other.value.clone(), other.gradient.clone());
        let (fa2, fb2) = (fa.clone(), fb.clone());
        TestFunction::new(
            move |x| fa(x) * fb(x),
            move |x| {
                let (va, vb) = (fa2(x), fb2(x));
                ga(x)
                    .into_iter()
                    .zip(gb(x))
                    .map(|(da, db)| da * vb + va * db)
                    .collect()
            },
        )
    }

    /// Directional derivative along the H-basis vector `v_k`,
    /// `D_k phi = [Q grad phi, v_k]_H = sqrt(lambda_k) d_k phi`.
    pub fn basis_derivative(&self, space: &GaussianSpace, k: usize, x: &[f64]) -> f64 {
        space.sqrt_lambdas()[k] * self.gradient(x)[k]
    }

    /// Squared H-norm of the H-gradient, `|D_H phi|_H^2 = sum lambda_k (d_k phi)^2`.
    pub fn h_gradient_sq(&self, space: &GaussianSpace, x: &[f64]) -> f64 {
        self.gradient(x)
            .iter()
            .zip(space.lambdas())
            .map(|(g, l)| l * g * g)
            .sum()
    }

    /// H-inner product of two H-gradients, `[D_H phi, D_H psi]_H`.
    pub fn h_gradient_inner(&self, other: &TestFunction, space: &GaussianSpace, x: &[f64]) -> f64 {
        self.gradient(x)
            .iter()
            .zip(other.gradient(x))
            .zip(space.lambdas())
            .map(|((a, b), l)| l * a * b)
            .sum()
    }

    /// Check the declared gradient against central finite differences.
    pub fn gradient_consistent_at(&self, x: &[f64], rel_tol: f64) -> bool {
        let h = 1e-6;
        let grad = self.gradient(x);
        let mut xp = x.to_vec();
        for k in 0..x.len() {
            xp[k] = x[k] + h;
            let fp = self.value(&xp);
            xp[k] = x[k] - h;
            let fm = self.value(&xp);
            xp[k] = x[k];
            let fd = (fp - fm) / (2.0 * h);
            let scale = grad[k].abs().max(fd.abs()).max(1e-8);
            if (fd - grad[k]).abs() > rel_tol * scale {
                return false;
            }
        }
        true
    }
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("TestFunction")
    }
}
