//! The adic successor on finite path prefixes, suffix statistics, and
//! Kakutani-Rohlin tower coordinates.
//!
//! A depth-n prefix stands in for a point of the path space: it fixes the
//! hat edge and the edge taken into each level up to n. The successor map
//! replaces the lowest non-maximal edge and resets everything below it to
//! the minimal path; stepping past the all-maximal prefix is reported as
//! `Overflow`, a value, so orbit walkers can deepen on demand.
//!
//! Two counting conventions coexist on purpose. `suffix` counts edges
//! strictly above the chosen one (the suffix map driving the eigenvalue
//! series), while `below_counts` counts edges strictly below; the floor
//! index of a prefix in its tower is the weighted sum of the below-counts,
//! which is what the successor walk realizes step by step.

use crate::diagram::{DiagramError, OrderedDiagram};
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("invalid prefix: {0}")]
    InvalidPrefix(String),
    #[error("enumeration cap exceeded: more than {0} prefixes")]
    CapExceeded(usize),
}

/// A finite path from the root: hat edge position, then one order index
/// per level from 2 up to the depth.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathPrefix {
    /// Vertex visited at each level, trace[k-1] = vertex at level k.
    trace: Vec<usize>,
    /// Position of the hat edge among the parallel edges into trace[0].
    hat_index: u64,
    /// order_indices[k-2] = position in the order word of trace[k-1] at
    /// level k, for k = 2..=depth.
    order_indices: Vec<u64>,
}

/// Result of one successor step.
#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Next(PathPrefix),
    /// Every edge is maximal; the successor needs a deeper prefix.
    Overflow,
}

/// Suffix vector of order k: per vertex of level k, the number of edges
/// strictly above the chosen one into the level-(k+1) vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixVector {
    pub level: usize,
    pub counts: Vec<BigUint>,
}

impl SuffixVector {
    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    pub fn weighted(&self, heights: &[BigUint]) -> BigUint {
        assert_eq!(heights.len(), self.counts.len());
        self.counts.iter().zip(heights).map(|(a, b)| a * b).sum()
    }
}

/// Position of a prefix inside the level-n Kakutani-Rohlin partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerCoordinate {
    pub level: usize,
    pub vertex: usize,
    pub floor: BigUint,
}

impl PathPrefix {
    pub fn depth(&self) -> usize {
        self.trace.len()
    }

    pub fn vertex_at(&self, level: usize) -> usize {
        self.trace[level - 1]
    }

    pub fn end_vertex(&self) -> usize {
        *self.trace.last().unwrap()
    }

    pub fn hat_index(&self) -> u64 {
        self.hat_index
    }

    pub fn order_index(&self, level: usize) -> u64 {
        self.order_indices[level - 2]
    }

    pub fn new(
        diagram: &OrderedDiagram,
        hat_index: u64,
        order_indices: Vec<u64>,
        end_vertex: usize,
    ) -> Result<Self, DynamicsError> {
        let depth = order_indices.len() + 1;
        diagram.check_level(depth)?;
        let mut trace = vec![0usize; depth];
        trace[depth - 1] = end_vertex;
        let mut cur = end_vertex;
        for level in (2..=depth).rev() {
            let word = diagram.word(level, cur);
            let o = order_indices[level - 2];
            if BigUint::from(o) >= word.len() {
                return Err(DynamicsError::InvalidPrefix(format!(
                    "order index {} out of range at level {}",
                    o, level
                )));
            }
            cur = word.letter_at(&BigUint::from(o))?;
            trace[level - 2] = cur;
        }
        let h1 = &diagram.h1()[trace[0]];
        if BigUint::from(hat_index) >= *h1 {
            return Err(DynamicsError::InvalidPrefix(format!(
                "hat index {} out of range for vertex {}",
                hat_index, trace[0]
            )));
        }
        Ok(PathPrefix { trace, hat_index, order_indices })
    }

    /// The all-minimal (or all-maximal) prefix of depth `n` ending at
    /// `vertex`.
    pub fn extreme(
        diagram: &OrderedDiagram,
        n: usize,
        vertex: usize,
        max_side: bool,
    ) -> Result<Self, DynamicsError> {
        diagram.check_level(n)?;
        let trace = diagram.extreme_trace(n, vertex, max_side)?;
        let mut order_indices = Vec::with_capacity(n.saturating_sub(1));
        for level in 2..=n {
            let word = diagram.word(level, trace[level - 1]);
            let o = if max_side {
                (word.len() - 1u32).to_u64().ok_or_else(|| {
                    DynamicsError::InvalidPrefix("word too long for indexing".into())
                })?
            } else {
                0
            };
            order_indices.push(o);
        }
        let hat = if max_side {
            (&diagram.h1()[trace[0]] - 1u32).to_u64().unwrap()
        } else {
            0
        };
        Ok(PathPrefix { trace, hat_index: hat, order_indices })
    }

    pub fn minimal(diagram: &OrderedDiagram, n: usize, vertex: usize) -> Result<Self, DynamicsError> {
        Self::extreme(diagram, n, vertex, false)
    }

    pub fn maximal(diagram: &OrderedDiagram, n: usize, vertex: usize) -> Result<Self, DynamicsError> {
        Self::extreme(diagram, n, vertex, true)
    }

    pub fn is_maximal(&self, diagram: &OrderedDiagram) -> bool {
        let h1 = &diagram.h1()[self.trace[0]];
        if BigUint::from(self.hat_index) + 1u32 < *h1 {
            return false;
        }
        for level in 2..=self.depth() {
            let word = diagram.word(level, self.trace[level - 1]);
            if BigUint::from(self.order_indices[level - 2]) + 1u32 < word.len() {
                return false;
            }
        }
        true
    }

    pub fn is_minimal(&self) -> bool {
        self.hat_index == 0 && self.order_indices.iter().all(|&o| o == 0)
    }

    /// Vershik successor: bump the lowest non-maximal edge, reset below.
    pub fn vershik_step(&self, diagram: &OrderedDiagram) -> Result<StepOutcome, DynamicsError> {
        let h1 = &diagram.h1()[self.trace[0]];
        if BigUint::from(self.hat_index) + 1u32 < *h1 {
            let mut next = self.clone();
            next.hat_index += 1;
            return Ok(StepOutcome::Next(next));
        }
        for level in 2..=self.depth() {
            let word = diagram.word(level, self.trace[level - 1]);
            let o = self.order_indices[level - 2];
            if BigUint::from(o) + 1u32 < word.len() {
                let mut next = self.clone();
                next.order_indices[level - 2] = o + 1;
                let mut cur = word.letter_at(&BigUint::from(o + 1))?;
                next.trace[level - 2] = cur;
                for l in (2..level).rev() {
                    next.order_indices[l - 2] = 0;
                    let w = diagram.word(l, cur);
                    cur = w.letter_at(&BigUint::zero())?;
                    next.trace[l - 2] = cur;
                }
                next.hat_index = 0;
                return Ok(StepOutcome::Next(next));
            }
        }
        Ok(StepOutcome::Overflow)
    }

    /// Suffix vector of order k (0 <= k < depth): counts of edges strictly
    /// above the chosen one. Order 0 counts the parallel hat edges above.
    pub fn suffix(&self, diagram: &OrderedDiagram, k: usize) -> Result<SuffixVector, DynamicsError> {
        if k >= self.depth() {
            return Err(DynamicsError::InvalidPrefix(format!(
                "suffix order {} not below depth {}",
                k,
                self.depth()
            )));
        }
        if k == 0 {
            let above = &diagram.h1()[self.trace[0]] - 1u32 - BigUint::from(self.hat_index);
            return Ok(SuffixVector { level: 0, counts: vec![above] });
        }
        let word = diagram.word(k + 1, self.trace[k]);
        let counts =
            trailing_counts(word, self.order_indices[k - 1], diagram.vertex_count(k))?;
        Ok(SuffixVector { level: k, counts })
    }

    /// Counts of edges strictly below the chosen one, per source vertex.
    pub fn below_counts(
        &self,
        diagram: &OrderedDiagram,
        k: usize,
    ) -> Result<Vec<BigUint>, DynamicsError> {
        assert!(k >= 1 && k < self.depth());
        let word = diagram.word(k + 1, self.trace[k]);
        let mut counts = vec![BigUint::zero(); diagram.vertex_count(k)];
        let o = self.order_indices[k - 1];
        for p in 0..o {
            let l = word.letter_at(&BigUint::from(p))?;
            counts[l] += 1u32;
        }
        Ok(counts)
    }

    /// Floor index of the prefix in its level-n tower: the weighted sum of
    /// below-counts, which equals the number of successor steps from the
    /// tower base.
    pub fn return_time(&self, diagram: &OrderedDiagram) -> Result<BigUint, DynamicsError> {
        let mut r = BigUint::from(self.hat_index);
        for k in 1..self.depth() {
            let below = self.below_counts(diagram, k)?;
            let h = diagram.heights(k)?;
            r += below.iter().zip(&h).map(|(a, b)| a * b).sum::<BigUint>();
        }
        Ok(r)
    }

    pub fn tower_coordinate(
        &self,
        diagram: &OrderedDiagram,
    ) -> Result<TowerCoordinate, DynamicsError> {
        Ok(TowerCoordinate {
            level: self.depth(),
            vertex: self.end_vertex(),
            floor: self.return_time(diagram)?,
        })
    }
}

fn trailing_counts(
    word: &crate::diagram::OrderWord,
    position: u64,
    rank: usize,
) -> Result<Vec<BigUint>, DynamicsError> {
    let mut counts = vec![BigUint::zero(); rank];
    let len = word
        .len_usize()
        .ok_or_else(|| DynamicsError::InvalidPrefix("word too long to scan".into()))?;
    for p in (position as usize + 1)..len {
        let l = word.letter_at(&BigUint::from(p))?;
        counts[l] += 1u32;
    }
    Ok(counts)
}

/// All valid prefixes of depth `n`, grouped by end vertex and listed in
/// successor order within each tower. Errors beyond `cap` prefixes.
pub fn enumerate_prefixes(
    diagram: &OrderedDiagram,
    n: usize,
    cap: usize,
) -> Result<Vec<PathPrefix>, DynamicsError> {
    diagram.check_level(n)?;
    let total: BigUint = diagram.heights(n)?.iter().sum();
    if total > BigUint::from(cap) {
        return Err(DynamicsError::CapExceeded(cap));
    }
    let mut out = Vec::new();
    for vertex in 0..diagram.vertex_count(n) {
        let mut cur = PathPrefix::minimal(diagram, n, vertex)?;
        loop {
            out.push(cur.clone());
            match cur.vershik_step(diagram)? {
                StepOutcome::Next(next) => cur = next,
                StepOutcome::Overflow => break,
            }
        }
    }
    Ok(out)
}

/// The suffix vectors realized at level n by paths with tau_n = l and
/// tau_{n+1} = k: one vector per occurrence of letter l in the order word
/// of vertex k at level n + 1.
pub fn enumerate_suffixes(
    diagram: &OrderedDiagram,
    n: usize,
    l: usize,
    k: usize,
) -> Result<Vec<SuffixVector>, DynamicsError> {
    diagram.check_level(n + 1)?;
    let word = diagram.word(n + 1, k);
    let len = word
        .len_usize()
        .ok_or_else(|| DynamicsError::InvalidPrefix("word too long to scan".into()))?;
    let rank = diagram.vertex_count(n);
    let mut counts = vec![BigUint::zero(); rank];
    let mut rev = Vec::new();
    for p in (0..len).rev() {
        let letter = word.letter_at(&BigUint::from(p))?;
        if letter == l {
            rev.push(SuffixVector { level: n, counts: counts.clone() });
        }
        counts[letter] += 1u32;
    }
    rev.reverse();
    Ok(rev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{fibonacci_diagram, odometer_diagram};

    #[test]
    fn odometer_cycle_length() {
        let d = odometer_diagram(2, 4);
        let mut cur = PathPrefix::minimal(&d, 4, 0).unwrap();
        let mut steps = 0u32;
        loop {
            match cur.vershik_step(&d).unwrap() {
                StepOutcome::Next(n) => {
                    cur = n;
                    steps += 1;
                }
                StepOutcome::Overflow => break,
            }
        }
        // 2^3 floors at depth 4 (heights H(4) = 8).
        assert_eq!(steps, 7);
        assert!(cur.is_maximal(&d));
        assert_eq!(cur.return_time(&d).unwrap(), BigUint::from(7u32));
    }

    #[test]
    fn all_maximal_overflows() {
        let d = fibonacci_diagram(3);
        let max = PathPrefix::maximal(&d, 3, 0).unwrap();
        assert_eq!(max.vershik_step(&d).unwrap(), StepOutcome::Overflow);
    }

    #[test]
    fn return_time_matches_step_count() {
        let d = fibonacci_diagram(5);
        for vertex in 0..2 {
            let mut cur = PathPrefix::minimal(&d, 5, vertex).unwrap();
            let mut count = BigUint::zero();
            loop {
                assert_eq!(cur.return_time(&d).unwrap(), count);
                let tc = cur.tower_coordinate(&d).unwrap();
                assert_eq!(tc.vertex, vertex);
                assert_eq!(tc.floor, count);
                match cur.vershik_step(&d).unwrap() {
                    StepOutcome::Next(n) => {
                        assert_eq!(n.end_vertex(), vertex, "successor stays in tower");
                        cur = n;
                        count += 1u32;
                    }
                    StepOutcome::Overflow => break,
                }
            }
            let h = d.heights(5).unwrap();
            assert_eq!(count + 1u32, h[vertex]);
        }
    }

    #[test]
    fn suffix_trailing_counts() {
        // Vertex word "221" (0-based letters 1,1,0): position 0 leaves
        // trailing letters "21": one of each.
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
        let p = PathPrefix::new(&d, 0, vec![0], 0).unwrap();
        let s = p.suffix(&d, 1).unwrap();
        assert_eq!(s.counts, vec![BigUint::from(1u32), BigUint::from(1u32)]);
        // Last position: zero vector.
        let p = PathPrefix::new(&d, 0, vec![2], 0).unwrap();
        let s = p.suffix(&d, 1).unwrap();
        assert_eq!(s.total(), BigUint::zero());
    }

    #[test]
    fn suffix_sets_match_matrix_entries() {
        let d = fibonacci_diagram(4);
        for n in 1..4 {
            for l in 0..2 {
                for k in 0..2 {
                    let s = enumerate_suffixes(&d, n, l, k).unwrap();
                    assert_eq!(BigUint::from(s.len()), *d.matrix(n + 1).get(k, l));
                }
            }
        }
    }

    #[test]
    fn enumeration_counts_heights() {
        let d = fibonacci_diagram(4);
        let all = enumerate_prefixes(&d, 4, 10_000).unwrap();
        let h = d.heights(4).unwrap();
        let total: BigUint = h.iter().sum();
        assert_eq!(BigUint::from(all.len()), total);
        // Prefixes are distinct.
        let mut seen = std::collections::HashSet::new();
        for p in &all {
            assert!(seen.insert(p.clone()));
        }
    }

    #[test]
    fn suffix_zero_counts_parallel_hat_edges() {
        let d = crate::diagram::OrderedDiagram::new(
            vec![BigUint::from(3u32)],
            vec![crate::diagram::Level {
                matrix: crate::diagram::IncidenceMatrix::from_u64(&[&[2]]),
                orders: vec![crate::diagram::OrderWord::Explicit(vec![0, 0])],
            }],
        )
        .unwrap();
        let p = PathPrefix::new(&d, 1, vec![0], 0).unwrap();
        let s0 = p.suffix(&d, 0).unwrap();
        assert_eq!(s0.counts, vec![BigUint::from(1u32)]);
        assert_eq!(p.return_time(&d).unwrap(), BigUint::from(1u32));
    }
}
