//! Reflected Ornstein-Uhlenbeck diffusions on Gaussian level-set domains.
//!
//! The crate simulates the normally reflected Ornstein-Uhlenbeck process on
//! domains `O = { G < 0 }` of a truncated Gaussian space, accumulates the
//! boundary local time in Cameron-Martin units, and verifies the simulated
//! dynamics against deterministic quadrature oracles: integration by parts
//! on the boundary, Gauss-Green, the Dirichlet-form energy identity, the
//! stationarity of the conditioned Gaussian law, the Revuz correspondence
//! between local time and the Hausdorff-Gauss surface measure, and the
//! quadratic variation of the reconstructed driving noise.
//!
//! Modules mirror the moving parts: [`space`] (spectrum, Cameron-Martin
//! geometry, sampling), [`domain`] (level sets, normals, closure
//! projection), [`quadrature`] (Gaussian volume and surface integrals),
//! [`engine`] (reflected Euler scheme and path decomposition), [`verify`]
//! (quantitative checks), [`config`] (run configuration and hashing).

pub mod config;
pub mod domain;
pub mod engine;
pub mod error;
pub mod quadrature;
pub mod rng;
pub mod space;
pub mod stats;
pub mod verify;

pub use config::RunConfig;
pub use domain::{LevelSetDomain, Profile};
pub use engine::{Clock, PathRecord, Scheme, SimConfig};
pub use error::{Error, Result};
pub use quadrature::QuadratureRule;
pub use space::{GammaSource, GaussianSpace, TestFunction, Vector};
pub use verify::SummaryReport;

/// Pin the global worker-pool size. Thread count never affects numerical
/// output; it only schedules the path-indexed work.
#[cfg(feature = "parallel")]
pub fn configure_threads(n: usize) -> std::result::Result<(), String> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}
