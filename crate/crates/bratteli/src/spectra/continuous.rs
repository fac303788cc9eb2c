//! Necessary conditions for continuous eigenvalues: summability of the
//! distances |||alpha P(n) H(1)||| and the uniform-tail bound over suffix
//! sums.

use super::{scale_heights, CandidateEigenvalue, SpectraError};
use crate::diagram::OrderedDiagram;
use crate::dynamics::enumerate_suffixes;
use crate::num::interval::{int_distance, int_distance_interval, rat_i64, Interval, Rat};
use num_traits::Zero;

/// Componentwise distance to the nearest integer vector, then max: the
/// ||| . ||| seminorm for exact rational vectors.
pub fn sup_int_distance(v: &[Rat]) -> Rat {
    v.iter().map(int_distance).fold(Rat::zero(), |a, b| a.max(b))
}

/// Same for interval vectors.
pub fn sup_int_distance_interval(v: &[Interval]) -> Interval {
    v.iter()
        .map(int_distance_interval)
        .fold(Interval::zero(), |acc, d| acc.max_i(&d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesClassification {
    PlausiblySummable,
    Diverging,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct NecessarySeriesReport {
    /// terms[i] = |||alpha P(n) H(1)||| for n = 1 + i.
    pub terms: Vec<Interval>,
    pub partial_sums: Vec<Interval>,
    pub classification: SeriesClassification,
    /// True when alpha was rational, making every term exact.
    pub exact: bool,
    /// The classification extrapolates a finite prefix of the series.
    pub finite_depth_heuristic: bool,
}

/// Partial sums of |||alpha P(n) H(1)||| for n = 1..=horizon.
pub fn continuous_necessary_series(
    diagram: &OrderedDiagram,
    alpha: &CandidateEigenvalue,
    horizon: usize,
) -> Result<NecessarySeriesReport, SpectraError> {
    diagram.check_level(horizon)?;
    let mut terms = Vec::with_capacity(horizon);
    let mut partial_sums = Vec::with_capacity(horizon);
    let mut acc = Interval::zero();
    for n in 1..=horizon {
        let h = diagram.heights(n)?;
        let scaled = scale_heights(alpha, &h);
        let term = sup_int_distance_interval(&scaled);
        acc = acc.add(&term);
        terms.push(term);
        partial_sums.push(acc.clone());
    }
    let classification = classify_tail(&terms);
    Ok(NecessarySeriesReport {
        terms,
        partial_sums,
        classification,
        exact: alpha.is_rational(),
        finite_depth_heuristic: true,
    })
}

fn classify_tail(terms: &[Interval]) -> SeriesClassification {
    let window = 3.min(terms.len());
    if window == 0 {
        return SeriesClassification::Inconclusive;
    }
    let tail = &terms[terms.len() - window..];
    // Exactly zero tail: summable for sure.
    if tail.iter().all(|t| t.hi().is_zero()) {
        return SeriesClassification::PlausiblySummable;
    }
    // Certified geometric decay across the window.
    let ratio_cap = rat_i64(19, 20);
    let decaying = tail.windows(2).all(|w| {
        let bound = w[0].hi() * &ratio_cap;
        !w[0].hi().is_zero() && w[1].hi() <= &bound
    });
    if decaying && terms.len() >= 3 {
        return SeriesClassification::PlausiblySummable;
    }
    // Terms certified to stay above a fixed floor: diverging evidence.
    let floor = rat_i64(1, 100);
    if tail.iter().all(|t| t.lo() > &floor) {
        return SeriesClassification::Diverging;
    }
    SeriesClassification::Inconclusive
}

#[derive(Debug, Clone)]
pub struct UniformTailReport {
    /// Per level n in n0..horizon: max over realized suffix vectors of
    /// |||<s, alpha H(n)>|||.
    pub per_level_max: Vec<Interval>,
    /// Upper bound for the sup over points of the tail sum distance,
    /// clamped at the trivial bound 1/2.
    pub worst_tail: Interval,
    pub exact: bool,
}

/// Upper bound on sup_x ||| sum_{k=n0}^{horizon-1} <s_k(x), alpha H(k)> |||
/// by per-level maximization and subadditivity of the circle distance.
/// A small value is necessary evidence for a continuous eigenvalue, not a
/// proof.
pub fn uniform_convergence_test(
    diagram: &OrderedDiagram,
    alpha: &CandidateEigenvalue,
    n0: usize,
    horizon: usize,
) -> Result<UniformTailReport, SpectraError> {
    if n0 < 1 || n0 >= horizon {
        return Err(SpectraError::BadInput(format!(
            "need 1 <= n0 < horizon, got n0={n0}, horizon={horizon}"
        )));
    }
    diagram.check_level(horizon)?;
    let mut per_level_max = Vec::new();
    let mut total = Interval::zero();
    for n in n0..horizon {
        let h = diagram.heights(n)?;
        let scaled = scale_heights(alpha, &h);
        let mut level_max = Interval::zero();
        for k in 0..diagram.vertex_count(n + 1) {
            for l in 0..diagram.vertex_count(n) {
                for s in enumerate_suffixes(diagram, n, l, k)? {
                    let mut ip = Interval::zero();
                    for (c, a) in s.counts.iter().zip(&scaled) {
                        ip = ip.add(&a.scale(&super::nat_to_rat(c)));
                    }
                    let dist = int_distance_interval(&ip);
                    level_max = level_max.max_i(&dist);
                }
            }
        }
        total = total.add(&level_max);
        per_level_max.push(level_max);
    }
    let half = rat_i64(1, 2);
    let worst_tail = Interval::new(
        total.lo().clone().min(half.clone()),
        total.hi().clone().min(half),
    );
    Ok(UniformTailReport { per_level_max, worst_tail, exact: alpha.is_rational() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::fibonacci_diagram;
    use crate::num::golden::Golden;
    use num_bigint::BigInt;

    #[test]
    fn distance_conventions() {
        // Max-norm convention: (0.5, 0.3) is at distance 0.5.
        let v = vec![rat_i64(1, 2), rat_i64(3, 10)];
        assert_eq!(sup_int_distance(&v), rat_i64(1, 2));
        let z = vec![Rat::from(BigInt::from(4)), Rat::from(BigInt::from(-2))];
        assert_eq!(sup_int_distance(&z), Rat::zero());
    }

    #[test]
    fn zero_alpha_series_vanishes() {
        let d = fibonacci_diagram(6);
        let r = continuous_necessary_series(
            &d,
            &CandidateEigenvalue::Rational(Rat::zero()),
            6,
        )
        .unwrap();
        assert!(r.exact);
        assert!(r.terms.iter().all(|t| t.hi().is_zero()));
        assert_eq!(r.classification, SeriesClassification::PlausiblySummable);
    }

    #[test]
    fn golden_alpha_series_decays_geometrically() {
        let d = fibonacci_diagram(24);
        // alpha = 1/phi, certified at 192 bits.
        let alpha = CandidateEigenvalue::Certified(Golden::phi_pow(-1).to_interval(192));
        let r = continuous_necessary_series(&d, &alpha, 24).unwrap();
        assert!(!r.exact);
        assert_eq!(r.classification, SeriesClassification::PlausiblySummable);
        // Term ratio approaches 1/phi: |||alpha H(n)||| = phi^-n scale.
        for w in r.terms[5..20].windows(2) {
            let ratio = w[1].div(&w[0]);
            assert!(ratio.lo() > &rat_i64(55, 100), "ratio too small: {:?}", ratio);
            assert!(ratio.hi() < &rat_i64(67, 100), "ratio too big: {:?}", ratio);
        }
    }

    #[test]
    fn rational_alpha_diverges_on_fibonacci() {
        let d = fibonacci_diagram(12);
        let r = continuous_necessary_series(
            &d,
            &CandidateEigenvalue::Rational(rat_i64(1, 3)),
            12,
        )
        .unwrap();
        // Heights are coprime pairs, so alpha H(n) never approaches the
        // integer lattice; terms stay at distance >= 1/3 infinitely often.
        assert_eq!(r.classification, SeriesClassification::Diverging);
    }

    #[test]
    fn uniform_tail_single_level_hand_check() {
        // One level, word "221": suffix inner products <s, alpha H(1)>
        // with alpha = 1/10 and H(1) = (1,1): suffixes of word 221 at
        // letter-2 positions are (1,1) and (1,0); at letter-1: (0,0).
        let d = crate::diagram::OrderedDiagram::new(
            crate::diagram::OrderedDiagram::unit_hat(2),
            vec![crate::diagram::Level {
                matrix: crate::diagram::IncidenceMatrix::from_u64(&[&[1, 2], &[1, 1]]),
                orders: vec![
                    crate::diagram::OrderWord::Explicit(vec![1, 1, 0]),
                    crate::diagram::OrderWord::Explicit(vec![0, 1]),
                ],
            }],
        )
        .unwrap();
        let alpha = CandidateEigenvalue::Rational(rat_i64(1, 10));
        let r = uniform_convergence_test(&d, &alpha, 1, 2).unwrap();
        // Max distance: vertex 1 word gives <(1,1),(0.1,0.1)> = 0.2,
        // vertex 2 word "12" gives 0.1; max = 0.2.
        assert_eq!(r.worst_tail.hi(), &rat_i64(2, 10));
        assert!(r.exact);
    }
}
