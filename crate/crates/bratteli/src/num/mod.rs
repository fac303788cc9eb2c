//! Exact and certified numerics: rational intervals, the golden field, and
//! small enclosures for the circle functions.

pub mod golden;
pub mod interval;

pub use golden::{fibonacci, phi_interval, root_interval, Golden, GoldenExt};
pub use interval::{
    decimal_string, frac_part, int_distance, int_distance_interval, one_minus_phase_sq, rat_i64,
    Certainty, Interval, Rat,
};
