//! Invariant-measure cone approximation by nested simplices.
//!
//! A level-m vector of tower-base masses determines an invariant measure
//! through the compatibility relation mu(m) = M^T(m+1) mu(m+1). Pushing
//! the extreme rays of the level-N cone down to level m gives candidate
//! vectors whose convex hull contains every invariant mu(m); the
//! per-coordinate hull is therefore a rigorous enclosure, exact in
//! rational arithmetic. Shrinking hull diameter is finite-depth evidence
//! of unique ergodicity, never a proof, and is labeled as such.

use crate::diagram::{DiagramError, OrderedDiagram};
use crate::num::interval::{Interval, Rat};
use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeasuresError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("degenerate candidate: vertex {0} has a zero product row")]
    Degenerate(usize),
}

/// Tower-base masses at one level, entries as certified intervals (width
/// zero in exact contexts).
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureVector {
    pub level: usize,
    pub entries: Vec<Interval>,
}

impl MeasureVector {
    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn max_width(&self) -> Rat {
        self.entries.iter().map(|e| e.width()).fold(Rat::zero(), |a, b| a.max(b))
    }

    /// Mass of the whole level-n tower over `vertex`.
    pub fn tower_mass(&self, heights: &[BigUint], vertex: usize) -> Interval {
        self.entries[vertex].scale(&Rat::from(BigInt::from(heights[vertex].clone())))
    }
}

/// Candidate extreme points of the measure cone seen from level m.
#[derive(Debug, Clone)]
pub struct MeasureSetReport {
    pub level: usize,
    pub horizon: usize,
    /// One normalized candidate per level-`horizon` vertex.
    pub candidates: Vec<Vec<Rat>>,
    /// Max pairwise sup-distance between candidates, exact.
    pub diameter: Rat,
    /// Single-linkage cluster count at 10x the tolerance.
    pub cluster_count: usize,
    pub unique_ergodicity: bool,
    pub tolerance: Rat,
    /// Always true: unique ergodicity from finitely many levels is
    /// evidence, not proof.
    pub finite_depth_heuristic: bool,
}

fn sup_distance(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            if d < Rat::zero() {
                -d
            } else {
                d
            }
        })
        .fold(Rat::zero(), |acc, d| acc.max(d))
}

/// Normalized cone candidates c_k = P^T(N, m) e_k / h_k(N).
///
/// Each candidate satisfies <c_k, H(m)> = 1 exactly, and every invariant
/// measure vector at level m is a convex combination of the candidates.
pub fn measure_candidates(
    diagram: &OrderedDiagram,
    m: usize,
    horizon: usize,
    tolerance: &Rat,
) -> Result<MeasureSetReport, MeasuresError> {
    diagram.check_level(horizon)?;
    if m < 1 || m > horizon {
        return Err(MeasuresError::Diagram(DiagramError::LevelOutOfRange(m, horizon)));
    }
    let p = diagram.product(horizon, m)?;
    let heights_top = diagram.heights(horizon)?;
    let mut candidates = Vec::with_capacity(p.rows());
    for k in 0..p.rows() {
        let h = Rat::from(BigInt::from(heights_top[k].clone()));
        if p.row_sum(k).is_zero() {
            return Err(MeasuresError::Degenerate(k));
        }
        let c: Vec<Rat> =
            p.row(k).iter().map(|e| Rat::from(BigInt::from(e.clone())) / &h).collect();
        candidates.push(c);
    }
    let mut diameter = Rat::zero();
    for i in 0..candidates.len() {
        for j in (i + 1)..candidates.len() {
            diameter = diameter.max(sup_distance(&candidates[i], &candidates[j]));
        }
    }
    let link_tol = tolerance * Rat::from(BigInt::from(10));
    let cluster_count = single_linkage_count(&candidates, &link_tol);
    Ok(MeasureSetReport {
        level: m,
        horizon,
        unique_ergodicity: diameter < *tolerance,
        candidates,
        diameter,
        cluster_count,
        tolerance: tolerance.clone(),
        finite_depth_heuristic: true,
    })
}

fn single_linkage_count(points: &[Vec<Rat>], tol: &Rat) -> usize {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    // Deterministic order: lower vertex index first.
    for i in 0..n {
        for j in (i + 1)..n {
            if sup_distance(&points[i], &points[j]) <= *tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect::<std::collections::HashSet<_>>().len()
}

/// Rigorous per-coordinate enclosure of every invariant measure vector at
/// level m, from the candidate hull at `horizon`.
pub fn measure_enclosure(
    diagram: &OrderedDiagram,
    m: usize,
    horizon: usize,
) -> Result<MeasureVector, MeasuresError> {
    let report = measure_candidates(diagram, m, horizon, &Rat::zero())?;
    let rank = report.candidates[0].len();
    let entries = (0..rank)
        .map(|i| {
            let mut lo = report.candidates[0][i].clone();
            let mut hi = lo.clone();
            for c in &report.candidates[1..] {
                lo = lo.min(c[i].clone());
                hi = hi.max(c[i].clone());
            }
            Interval::new(lo, hi)
        })
        .collect();
    Ok(MeasureVector { level: m, entries })
}

/// mu{tau_n = l, tau_{n+1} = k} = M_{k,l}(n+1) h_l(n) mu_k(n+1).
pub fn joint_tower_mass(
    diagram: &OrderedDiagram,
    mu_next: &MeasureVector,
    n: usize,
    l: usize,
    k: usize,
) -> Result<Interval, MeasuresError> {
    assert_eq!(mu_next.level, n + 1, "measure vector must live at level n+1");
    let m = diagram.matrix(n + 1);
    let h = diagram.heights(n)?;
    let factor = Rat::from(BigInt::from(m.get(k, l).clone()))
        * Rat::from(BigInt::from(h[l].clone()));
    Ok(mu_next.entries[k].scale(&factor))
}

/// Evidence-based classification of vertices into "mass bounded below"
/// and "summable mass". Finite-depth heuristic by construction.
#[derive(Debug, Clone)]
pub struct CleanReport {
    /// Vertices whose tower mass stays above the threshold on the tail of
    /// the computed range.
    pub bounded_below: Vec<usize>,
    pub complement: Vec<usize>,
    /// Per vertex: lower bound of the tail minimum of tower masses.
    pub tail_min_lower: Vec<Rat>,
    /// Per complement vertex: partial sum (upper bounds) of masses over
    /// all computed levels.
    pub complement_partial_sums: Vec<(usize, Rat)>,
    pub threshold: Rat,
    pub levels_used: usize,
    pub finite_depth_heuristic: bool,
    /// Greedy contraction suggestion: levels where every bounded-below
    /// vertex clears the threshold.
    pub suggested_cuts: Vec<usize>,
}

pub fn clean_diagnostic(
    diagram: &OrderedDiagram,
    depth: usize,
    threshold: &Rat,
) -> Result<CleanReport, MeasuresError> {
    diagram.check_level(depth)?;
    let d_count = (1..depth).map(|n| diagram.vertex_count(n)).max().unwrap_or(1);
    let mut masses: Vec<Vec<Interval>> = Vec::new(); // masses[n-1][vertex]
    for n in 1..depth {
        let mu = measure_enclosure(diagram, n, depth)?;
        let h = diagram.heights(n)?;
        let mut row = Vec::with_capacity(diagram.vertex_count(n));
        for v in 0..diagram.vertex_count(n) {
            row.push(mu.tower_mass(&h, v));
        }
        masses.push(row);
    }
    // The hull enclosure is loose for levels close to the horizon, so the
    // liminf evidence samples the middle third of the computed range.
    let len = masses.len();
    let window_lo = len / 3;
    let window_hi = (2 * len).div_ceil(3).max(window_lo + 1).min(len);
    let mut bounded_below = Vec::new();
    let mut complement = Vec::new();
    let mut tail_min_lower = Vec::new();
    for v in 0..d_count {
        let tail_min = masses[window_lo..window_hi]
            .iter()
            .filter_map(|row| row.get(v).map(|i| i.lo().clone()))
            .fold(None::<Rat>, |acc, x| Some(acc.map_or(x.clone(), |a| a.min(x))))
            .unwrap_or_else(Rat::zero);
        if tail_min >= *threshold {
            bounded_below.push(v);
        } else {
            complement.push(v);
        }
        tail_min_lower.push(tail_min);
    }
    let complement_partial_sums = complement
        .iter()
        .map(|&v| {
            let s = masses
                .iter()
                .filter_map(|row| row.get(v).map(|i| i.hi().clone()))
                .fold(Rat::zero(), |a, b| a + b);
            (v, s)
        })
        .collect();
    let suggested_cuts = {
        let mut cuts = vec![0usize];
        for (idx, row) in masses.iter().enumerate() {
            let n = idx + 1;
            let ok = bounded_below
                .iter()
                .all(|&v| row.get(v).map(|i| i.lo() >= threshold).unwrap_or(false));
            if ok {
                cuts.push(n);
            }
        }
        cuts
    };
    Ok(CleanReport {
        bounded_below,
        complement,
        tail_min_lower,
        complement_partial_sums,
        threshold: threshold.clone(),
        levels_used: depth - 1,
        finite_depth_heuristic: true,
        suggested_cuts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::fibonacci_diagram;
    use crate::num::interval::rat_i64;
    use num_traits::One;

    #[test]
    fn candidates_at_horizon_equal_corners() {
        let d = fibonacci_diagram(4);
        let r = measure_candidates(&d, 3, 3, &rat_i64(1, 1000)).unwrap();
        // P(3,3) = I: candidates are e_k / h_k(3).
        let h = d.heights(3).unwrap();
        for (k, c) in r.candidates.iter().enumerate() {
            for (i, x) in c.iter().enumerate() {
                if i == k {
                    assert_eq!(x, &Rat::new(BigInt::one(), BigInt::from(h[k].clone())));
                } else {
                    assert!(x.is_zero());
                }
            }
        }
        assert!(!r.unique_ergodicity);
    }

    #[test]
    fn candidates_are_normalized_and_compatible() {
        let d = fibonacci_diagram(10);
        let hm = d.heights(2).unwrap();
        let r = measure_candidates(&d, 2, 9, &rat_i64(1, 1000)).unwrap();
        for c in &r.candidates {
            let total: Rat = c
                .iter()
                .zip(&hm)
                .map(|(x, h)| x * Rat::from(BigInt::from(h.clone())))
                .fold(Rat::zero(), |a, b| a + b);
            assert!(total.is_one(), "candidates normalized against H(m)");
        }
        // Pushing level-3 candidates through M^T(3) gives level-2 candidates.
        let r3 = measure_candidates(&d, 3, 9, &rat_i64(1, 1000)).unwrap();
        let m3 = d.matrix(3);
        for (c2, c3) in r.candidates.iter().zip(&r3.candidates) {
            let pushed = m3.transpose_mul_rat_vec(c3);
            assert_eq!(&pushed, c2);
        }
    }

    #[test]
    fn enclosure_contains_golden_measure() {
        // For the stationary golden diagram the invariant measure at level
        // 1 is (phi, 1)-proportional: mu_1 = phi/(phi+1)... checked via
        // the defining relation instead: mu(1) = M^T mu(2) within hull.
        let d = fibonacci_diagram(20);
        let mu1 = measure_enclosure(&d, 1, 20).unwrap();
        let mu2 = measure_enclosure(&d, 2, 20).unwrap();
        let pushed = d.matrix(2).transpose_mul_interval_vec(&mu2.entries);
        for (a, b) in mu1.entries.iter().zip(&pushed) {
            assert!(a.intersects(b));
        }
        // Total mass is 1.
        let h = d.heights(1).unwrap();
        let total = mu1.tower_mass(&h, 0).add(&mu1.tower_mass(&h, 1));
        assert!(total.contains(&Rat::one()));
        // Width shrinks fast.
        assert!(mu1.max_width() < rat_i64(1, 1_000_000));
    }

    #[test]
    fn joint_masses_sum_to_next_level_mass() {
        let d = fibonacci_diagram(8);
        let mu3 = measure_enclosure(&d, 3, 8).unwrap();
        let h3 = d.heights(3).unwrap();
        for k in 0..2 {
            let mut sum = Interval::zero();
            for l in 0..2 {
                sum = sum.add(&joint_tower_mass(&d, &mu3, 2, l, k).unwrap());
            }
            let direct = mu3.tower_mass(&h3, k);
            assert!(sum.intersects(&direct));
        }
    }

    #[test]
    fn clean_diagnostic_on_fibonacci() {
        let d = fibonacci_diagram(10);
        let r = clean_diagnostic(&d, 10, &rat_i64(1, 10)).unwrap();
        assert_eq!(r.bounded_below, vec![0, 1]);
        assert!(r.complement.is_empty());
        assert!(r.finite_depth_heuristic);
        // Threshold sensitivity: same classification at 1/1000.
        let r2 = clean_diagnostic(&d, 10, &rat_i64(1, 1000)).unwrap();
        assert_eq!(r2.bounded_below, r.bounded_below);
    }
}
