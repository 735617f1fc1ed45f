//! Files, threads and the command line around [`xifv_core`].
//!
//! * [`model`]: `Ξ` and mutation models from presets or JSON.
//! * [`runner`]: a rayon-backed replicate runner.
//! * [`gof`]: chi-square homogeneity and two-sample Kolmogorov-Smirnov.
//! * [`output`]: 17-digit number formatting, CSV tables and run manifests.
//! * [`cli`]: the `xifv` subcommands.

pub mod cli;
pub mod gof;
pub mod model;
pub mod output;
pub mod runner;

pub use xifv_core as core;
