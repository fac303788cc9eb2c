//! Eigenvalue criteria for finite-rank adic systems.
//!
//! The tests split into exact ones (integer and rational arithmetic:
//! dimension-group membership, denominator divisibility, Toeplitz
//! classification) and certified-numeric ones (summability series, stable
//! decompositions, subspace geometry, the martingale-type necessary
//! condition). Real quantities are certified intervals throughout, and
//! every asymptotic verdict carries an explicit finite-depth flag.

mod continuous;
mod decompose;
mod dimgroup;
mod martingale;
mod subspaces;
mod toeplitz;

pub use continuous::{
    continuous_necessary_series, sup_int_distance, sup_int_distance_interval,
    uniform_convergence_test, NecessarySeriesReport, SeriesClassification, UniformTailReport,
};
pub use decompose::{
    alpha_from_integer_vector, orthogonality_check, stable_decompose, stable_decompose_search,
    StableDecomposition,
};
pub use dimgroup::{
    dimension_group_membership, eigen_group_matrix, group_geo_check, independence_bound,
    rational_denominator_check, DimensionGroupWitness, EigenGroupReport, GroupGeoReport,
    IndependenceBound,
};
pub use martingale::{martingale_series, JSelection, MartingaleReport, PhaseMode, PhaseSchedule};
pub use subspaces::{kernel_basis, stable_subspaces, SubspaceReport, SummableEvidence};
pub use toeplitz::{toeplitz_classify, TailAssumption, ToeplitzClass, ToeplitzReport};

use crate::diagram::DiagramError;
use crate::dynamics::DynamicsError;
use crate::measures::MeasuresError;
use crate::num::interval::{Interval, Rat};
use num_bigint::{BigInt, BigUint};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Measures(#[from] MeasuresError),
    #[error("rounding ambiguous: component {0} of alpha*H(m) is within tolerance of a half integer")]
    AmbiguousRounding(usize),
    #[error("rank-deficient input: {0}")]
    RankDeficient(String),
    #[error("empty pair set: no (l, k) pair clears the mass threshold")]
    EmptyPairSet,
    #[error("{0}")]
    BadInput(String),
}

/// An eigenvalue candidate alpha, with lambda = exp(2 i pi alpha) implied.
#[derive(Debug, Clone, PartialEq)]
pub enum CandidateEigenvalue {
    /// Exact rational alpha.
    Rational(Rat),
    /// Certified real alpha carried as an interval.
    Certified(Interval),
}

impl CandidateEigenvalue {
    pub fn as_interval(&self) -> Interval {
        match self {
            CandidateEigenvalue::Rational(r) => Interval::point(r.clone()),
            CandidateEigenvalue::Certified(i) => i.clone(),
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, CandidateEigenvalue::Rational(_))
    }

    pub fn width(&self) -> Rat {
        self.as_interval().width()
    }
}

pub(crate) fn nat_to_rat(n: &BigUint) -> Rat {
    Rat::from(BigInt::from(n.clone()))
}

pub(crate) fn nats_to_rats(v: &[BigUint]) -> Vec<Rat> {
    v.iter().map(nat_to_rat).collect()
}

/// alpha * H as an interval vector.
pub(crate) fn scale_heights(alpha: &CandidateEigenvalue, heights: &[BigUint]) -> Vec<Interval> {
    let a = alpha.as_interval();
    heights.iter().map(|h| a.scale(&nat_to_rat(h))).collect()
}

/// Max-norm of an interval vector, as an interval.
pub fn norm_inf(v: &[Interval]) -> Interval {
    v.iter().map(Interval::abs).fold(Interval::zero(), |acc, x| acc.max_i(&x))
}
