//! Generators for the two example families: the golden-mean self-similar
//! system whose eigenvalue candidate avoids the contracted space of its
//! matrices, and Toeplitz-type diagrams including the rank-3 family with
//! a non-continuous eigenvalue at -1.

pub mod golden_mean;
pub mod toeplitz_family;

pub use golden_mean::{
    best_ordering, build as build_golden, lattice_step, matrix_power, BestOrderWord, Construction,
    GBound, GoldenData, GoldenError, MassBound, Params as GoldenParams, Step, WordCheck,
};
pub use toeplitz_family::{
    minus_one_disagreement, minus_one_disagreement_bruteforce, minus_one_phases, powers_of_three,
    rank3_minus_one, rank3_predicted_set, toeplitz_diagram, DisagreementSet, OrderRule,
    ToeplitzError,
};
