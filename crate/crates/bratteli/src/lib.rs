//! Finite-rank ordered Bratteli-Vershik dynamical systems.
//!
//! This crate models ordered Bratteli-Vershik diagrams with exact
//! big-integer incidence data, walks their adic (Vershik) dynamics on
//! finite path prefixes, approximates the invariant-measure cone by nested
//! simplices in exact rational arithmetic, and runs the continuous- and
//! measurable-eigenvalue tests that the diagram data supports: summability
//! of distances to integers, stable decompositions along matrix products,
//! dimension-group membership, Toeplitz classification, and a
//! martingale-type necessary condition driven by suffix statistics.
//!
//! Two generator families reproduce the classical example constructions:
//! a golden-mean self-similar system whose eigenvalue does not come from
//! the stable space of its matrices, and Toeplitz-type diagrams including
//! a rank-3 family with a non-continuous eigenvalue at -1.
//!
//! Every asymptotic verdict is labeled as finite-depth evidence; exact
//! claims (integer and rational tests) are computed exactly, and real
//! quantities are carried as certified intervals so reported inequalities
//! cannot flip through rounding.
//!
//! See the `examples/` directory for one runnable walkthrough per
//! capability, and the `bratteli` binary for the file-oriented interface.

pub mod cli;
pub mod constructions;
pub mod diagram;
pub mod dynamics;
pub mod format;
pub mod measures;
pub mod num;
pub mod spectra;

pub use diagram::{IncidenceMatrix, Level, OrderWord, OrderedDiagram};
pub use dynamics::PathPrefix;
pub use num::{Interval, Rat};

/// Crate version, embedded in every emitted report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
