//! Exchangeable coalescents with simultaneous multiple collisions, the
//! modified lookdown construction of the dual measure-valued population
//! model, and executable versions of their duality relations.
//!
//! The crate is `no_std` and only needs an allocator. Everything that
//! touches files, threads or the command line lives in the `xifv` crate.
//!
//! Module map:
//!
//! * [`simplex`]: points of the infinite simplex, the reproduction measure
//!   and the colouring of levels by uniform coins.
//! * [`combinatorics`]: set partitions, relabelling `x[π]`, Stirling numbers.
//! * [`rates`]: collision rates and block counting rates.
//! * [`coalescent`]: path samplers (jump chain, Poisson construction,
//!   bottleneck time change).
//! * [`lookdown`]: Moran model, lookdown model, the permutation coupling and
//!   ancestry tracing.
//! * [`duality`]: generators on finite type spaces and Monte Carlo duality
//!   checks.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod coalescent;
pub mod combinatorics;
pub mod duality;
mod error;
pub mod lookdown;
pub mod matrix;
pub mod rates;
pub mod seed;
pub mod simplex;
pub mod stats;

pub use error::{Error, Result};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
