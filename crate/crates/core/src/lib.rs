//! Shot-limited QAOA MAX-CUT workbench.
//!
//! An exact statevector emulator stands in for a quantum computer that can
//! only afford a handful of measurement shots per parameter point. Two
//! gradient-free optimizers, dual annealing and natural evolution
//! strategies, drive the p=1 angles on signed random graphs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod anneal;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod local;
pub mod nes;
pub mod qaoa;
pub mod rng;
pub mod trajectory;

pub use error::{Error, Result};
