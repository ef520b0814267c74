//! Next-generation reservoir computing (NG-RC) for many-body quantum state
//! dynamics, together with a small-scale simulator of the block-encoding
//! algorithm that trains and evaluates the same model on a quantum computer.
//!
//! Module map:
//! - [`dynamics`]: exact transverse-field Ising trajectories.
//! - [`ngrc`]: delay features, complex ridge regression, prediction, metrics.
//! - [`sim`]: gate-list circuits over a sparse state simulator.
//! - [`block_encoding`]: block-encoding algebra and post-selected application.
//! - [`qsvt`]: inversion polynomial and singular-value transforms.
//! - [`circuit`]: data oracles, feature encoders and prediction circuits.
//! - [`io`], [`experiment`]: file formats and the experiment driver.

// `!(x > 0.0)` is the NaN-rejecting form of every positivity check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod block_encoding;
pub mod circuit;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod io;
pub mod linalg;
pub mod ngrc;
pub mod qsvt;
pub mod sim;
pub mod state;

pub use error::{Error, Result};
pub use faer::c64;
pub use state::StateVector;
