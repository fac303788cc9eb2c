//! Classification of eigenvalue candidates for Toeplitz-type diagrams
//! from the characteristic sequence alone: continuous values are exactly
//! the fractions over the period scales, bounded characteristic sequences
//! admit nothing else, and non-continuous rational candidates must keep
//! q / gcd(q, p_n) within the rank.

use super::CandidateEigenvalue;
use crate::num::interval::Rat;
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailAssumption {
    /// The characteristic sequence is bounded beyond the given data.
    Bounded,
    /// It grows without bound.
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ToeplitzClass {
    /// alpha = a / p_m exactly; continuous eigenvalue with witness level.
    Continuous { witness: usize },
    /// Certifiably not an eigenvalue (continuous or measurable).
    Excluded { reason: String },
    /// Passes every computable necessary condition for a non-continuous
    /// measurable eigenvalue.
    NonContinuousCandidate { reduced_denominator_ratio: BigUint },
}

#[derive(Debug, Clone)]
pub struct ToeplitzReport {
    pub class: ToeplitzClass,
    /// Integer/rational reasoning only: the classification is exact given
    /// the tail assumption.
    pub exact: bool,
    pub caveats: Vec<String>,
}

/// Classify a candidate against a Toeplitz characteristic sequence
/// q_1..q_depth (the period scales are p_m = q_1 ... q_m) and the rank.
pub fn toeplitz_classify(
    alpha: &CandidateEigenvalue,
    q: &[BigUint],
    rank: usize,
    tail: TailAssumption,
) -> ToeplitzReport {
    let a = match alpha {
        CandidateEigenvalue::Certified(_) => {
            return ToeplitzReport {
                class: ToeplitzClass::Excluded {
                    reason: "irrational candidate: measurable eigenvalues of finite-rank \
                             Toeplitz systems are rational"
                        .into(),
                },
                exact: true,
                caveats: vec![
                    "the rationality theorem concerns measurable eigenvalues; continuous \
                     eigenvalues are measurable, so irrational candidates are excluded \
                     outright"
                        .into(),
                ],
            }
        }
        CandidateEigenvalue::Rational(a) => a.clone(),
    };
    let b = a.denom().magnitude().clone();
    // Continuous iff the reduced denominator divides some period scale.
    let mut p = BigUint::from(1u32);
    for (i, qn) in q.iter().enumerate() {
        p *= qn;
        if (&p % &b).is_zero() {
            return ToeplitzReport {
                class: ToeplitzClass::Continuous { witness: i + 1 },
                exact: true,
                caveats: vec![],
            };
        }
    }
    match tail {
        TailAssumption::Bounded => ToeplitzReport {
            class: ToeplitzClass::Excluded {
                reason: format!(
                    "denominator {b} divides no period scale and the characteristic \
                     sequence is bounded: all eigenvalues are continuous"
                ),
            },
            exact: true,
            caveats: vec!["boundedness of the tail is an assumption supplied by the caller".into()],
        },
        TailAssumption::Unbounded => {
            // q / gcd(q, p_n) is non-increasing in n, so its final value
            // decides "for all large computed n".
            let ratio = &b / b.gcd(&p);
            if ratio <= BigUint::from(rank as u64) {
                ToeplitzReport {
                    class: ToeplitzClass::NonContinuousCandidate {
                        reduced_denominator_ratio: ratio,
                    },
                    exact: true,
                    caveats: vec![
                        "necessary conditions only: candidacy is not a proof of existence"
                            .into(),
                    ],
                }
            } else {
                ToeplitzReport {
                    class: ToeplitzClass::Excluded {
                        reason: format!(
                            "q/(q, p_n) = {ratio} exceeds the rank {rank} at every computed \
                             level"
                        ),
                    },
                    exact: true,
                    caveats: vec![],
                }
            }
        }
    }
}

/// Convenience: alpha as an exact fraction a/b in lowest terms.
pub fn rational(a: i64, b: i64) -> CandidateEigenvalue {
    CandidateEigenvalue::Rational(Rat::new(a.into(), b.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q_pows_of_three() -> Vec<BigUint> {
        // q_n = 3^{l_n} with l = (0, 1, 2, 3): 1, 3, 9, 27.
        vec![1u32, 3, 9, 27].into_iter().map(BigUint::from).collect()
    }

    #[test]
    fn fractions_of_period_scales_are_continuous() {
        let q = q_pows_of_three();
        // p_3 = 27: 5/27 is continuous with witness 3.
        let r = toeplitz_classify(&rational(5, 27), &q, 3, TailAssumption::Unbounded);
        assert_eq!(r.class, ToeplitzClass::Continuous { witness: 3 });
        // 1/p_1 = integer case: witness 1.
        let r = toeplitz_classify(&rational(2, 1), &q, 3, TailAssumption::Unbounded);
        assert_eq!(r.class, ToeplitzClass::Continuous { witness: 1 });
    }

    #[test]
    fn bounded_tail_excludes_everything_else() {
        let q: Vec<BigUint> = vec![3u32; 5].into_iter().map(BigUint::from).collect();
        let r = toeplitz_classify(&rational(1, 5), &q, 3, TailAssumption::Bounded);
        assert!(matches!(r.class, ToeplitzClass::Excluded { .. }));
        assert!(r.exact);
    }

    #[test]
    fn minus_one_is_a_candidate_in_rank_three() {
        let q = q_pows_of_three();
        let r = toeplitz_classify(&rational(1, 2), &q, 3, TailAssumption::Unbounded);
        match r.class {
            ToeplitzClass::NonContinuousCandidate { reduced_denominator_ratio } => {
                assert_eq!(reduced_denominator_ratio, BigUint::from(2u32));
            }
            other => panic!("expected candidate, got {other:?}"),
        }
        // Denominator 7 cannot survive: 7/(7, p_n) = 7 > 3.
        let r = toeplitz_classify(&rational(1, 7), &q, 3, TailAssumption::Unbounded);
        assert!(matches!(r.class, ToeplitzClass::Excluded { .. }));
    }

    #[test]
    fn irrational_candidates_are_rejected() {
        use crate::num::golden::Golden;
        let alpha = CandidateEigenvalue::Certified(Golden::phi_pow(-1).to_interval(64));
        let r = toeplitz_classify(&alpha, &q_pows_of_three(), 3, TailAssumption::Unbounded);
        assert!(matches!(r.class, ToeplitzClass::Excluded { .. }));
        assert!(!r.caveats.is_empty());
    }
}
