//! Simulation and validation of multi-photon interference in multiport
//! interferometers.
//!
//! The crate covers the full workflow of a boson-sampling-style experiment
//! on a programmable linear circuit:
//!
//! - [`mesh`]: Haar-random unitaries, both sampled directly and dialed onto
//!   a rectangular mesh of directional couplers; decomposition of arbitrary
//!   unitaries into mesh parameters; gauge fixing ([`matrix`]).
//! - [`interference`]: N-photon event probabilities and full collision-free
//!   outcome distributions under ideal, partially distinguishable,
//!   series-truncated, and circuit-induced-distinguishability models, built
//!   on matrix permanents ([`permanent`]) and tensor permanents.
//! - [`photons`]: distinguishability descriptions — pairwise overlap
//!   matrices from model families or Gaussian spectra, and the `W` tensor of
//!   a frequency-dependent circuit.
//! - [`characterize`]: transfer-matrix reconstruction from single-photon
//!   counts and two-photon interference visibilities.
//! - [`validate`]: fidelity, total variation distance with Poisson
//!   bootstrap, overlap fitting, sampling, and likelihood-ratio curves for
//!   model discrimination.
//! - [`pipeline`] and [`io`]: declarative experiment configs, text formats,
//!   and the machinery behind the `multiphoton` command-line tool.
//!
//! The `examples/` directory holds one runnable program per capability;
//! start with `three_photon_distribution` and `model_ranking`.
//!
//! All randomized operations take explicit seeds and are deterministic
//! across runs and thread counts ([`rng`]).

pub mod characterize;
pub mod error;
pub mod interference;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod mesh;
pub mod patterns;
pub mod permanent;
pub mod photons;
pub mod pipeline;
pub mod rng;
pub mod validate;

pub use error::{Error, Result};
