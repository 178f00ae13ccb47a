//! Desk-scale simulation and verification of boundary-crossing asymptotics
//! for asymptotically stable random walks.
//!
//! The crate provides:
//!
//! - [`increments`]: step distributions attracted to stable laws, the
//!   positivity index, the truncated second moment and the norming sequence,
//!   with reproducible samplers;
//! - [`ladder`]: strict descending ladder simulation, the Monte Carlo
//!   renewal function, survival of `T_0` and tail fitting;
//! - [`boundary`]: boundary functions and the four integral-test
//!   classifiers (symbolic exponent arithmetic and numeric quadrature);
//! - [`passage`]: first-passage times over moving boundaries, the ladder
//!   decomposition of `T_g`, survival-ratio curves and the `V(g)` traces;
//! - [`htransform`]: the exact Doob h-transform kernel for lattice walks,
//!   the conditioned chain, and an importance-sampling survival estimator;
//! - [`whbound`]: the generating-function upper bound `q_n` and the `R(1)`
//!   sandwich;
//! - [`oracle`]: exact dynamic-programming ground truth for lattice models
//!   (rational and compensated floating backends).
//!
//! Every estimator takes an explicit [`rng::RngStream`]; identical seeds
//! reproduce identical results regardless of worker count. See the
//! `examples/` directory for one runnable example per capability, and the
//! thin `stablewalk` binary for batch experiment runs.

pub mod boundary;
pub mod config;
pub mod error;
pub mod fit;
pub mod htransform;
pub mod increments;
pub mod ladder;
pub mod oracle;
pub mod passage;
pub mod rng;
pub mod stats;
pub mod whbound;

pub use error::{Error, Result};
