//! Particle filtering over Feynman-Kac models.
//!
//! Two samplers share one model abstraction ([`FeynmanKac`]):
//!
//! * [`smc::run_smc`], the standard particle filter with multinomial
//!   resampling and IID uniforms;
//! * [`sqmc::run_sqmc`], its quasi-Monte Carlo counterpart, which feeds
//!   Owen-scrambled Sobol point sets through a Hilbert-curve ordering of
//!   the particles and an inverse-CDF ancestor selection.
//!
//! The concrete models in [`models`] cover the classical benchmarks: a
//! truncated autoregression (rare event), the basic stochastic volatility
//! model, a multivariate linear Gaussian model with an exact Kalman
//! reference ([`kalman`]), and an Euler-discretised diffusion-driven
//! stochastic volatility model whose Brownian increments can be built
//! either forward or by Brownian bridge ([`brownian`]).
//!
//! [`experiment`] is the replication harness used by the `sqmc` binary.

pub mod brownian;
pub mod error;
pub mod experiment;
pub mod fk;
pub mod hilbert;
pub mod kalman;
pub mod lowdisc;
pub mod models;
pub mod normal;
pub mod resample;
pub mod rng;
pub mod smc;
pub mod sqmc;

pub use error::{Error, Result};
pub use fk::{
    log_likelihood_estimate, normalize_weights, FeynmanKac, ParticleSystem, RunResult, TestFn,
};
pub use smc::{run_smc, SmcConfig};
pub use sqmc::{run_sqmc, SqmcConfig};
