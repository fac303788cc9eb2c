//! Toeplitz-type diagram generators: every vertex of a level receives the
//! same number of edges, so heights are the running products of the
//! characteristic sequence. Includes the rank-3 family realizing the
//! eigenvalue -1 measurably but not continuously, together with its
//! disagreement-set computation.

use crate::diagram::{DiagramError, IncidenceMatrix, Level, OrderWord, OrderedDiagram};
use crate::dynamics::{enumerate_prefixes, DynamicsError, PathPrefix};
use crate::measures::{measure_enclosure, MeasuresError};
use crate::num::interval::{Interval, Rat};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ToeplitzError {
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Measures(#[from] MeasuresError),
}

/// How each level's order words are produced.
#[derive(Debug, Clone)]
pub enum OrderRule {
    /// Letters cycle 1, 2, ..., d, 1, 2, ...; requires d | q_n.
    Cyclic,
    /// Explicit words per level (outer index: level n >= 2), 0-based
    /// letters.
    Words(Vec<Vec<Vec<u32>>>),
}

/// Builds a Toeplitz-type diagram of the given rank: level n >= 2 has
/// q[n-1] edges into every vertex. q[0] is the hat and must be 1.
pub fn toeplitz_diagram(
    q: &[BigUint],
    rank: usize,
    rule: &OrderRule,
    depth: usize,
) -> Result<OrderedDiagram, ToeplitzError> {
    if depth < 1 || depth > q.len() {
        return Err(ToeplitzError::BadParams(format!(
            "depth {depth} outside the q sequence of length {}",
            q.len()
        )));
    }
    if !q[0].is_one() {
        return Err(ToeplitzError::BadParams(
            "q_1 must be 1: the hat carries one edge per vertex".into(),
        ));
    }
    let mut levels = Vec::new();
    for n in 2..=depth {
        let qn = &q[n - 1];
        let qn_usize = qn
            .to_usize()
            .ok_or_else(|| ToeplitzError::BadParams("q value too large".into()))?;
        let words: Vec<Vec<u32>> = match rule {
            OrderRule::Cyclic => {
                if !(qn % BigUint::from(rank)).is_zero() {
                    return Err(ToeplitzError::BadParams(format!(
                        "cyclic rule needs rank {rank} to divide q_{n} = {qn}"
                    )));
                }
                let w: Vec<u32> = (0..qn_usize).map(|i| (i % rank) as u32).collect();
                vec![w; rank]
            }
            OrderRule::Words(all) => {
                let lw = all.get(n - 2).ok_or_else(|| {
                    ToeplitzError::BadParams(format!("missing words for level {n}"))
                })?;
                if lw.len() != rank {
                    return Err(ToeplitzError::BadParams(format!(
                        "level {n} needs {rank} words"
                    )));
                }
                for w in lw {
                    if w.len() != qn_usize {
                        return Err(ToeplitzError::BadParams(format!(
                            "level {n} words must have length q_{n} = {qn}"
                        )));
                    }
                }
                lw.clone()
            }
        };
        let mut data = Vec::with_capacity(rank * rank);
        for w in &words {
            let mut counts = vec![BigUint::zero(); rank];
            for &l in w {
                if l as usize >= rank {
                    return Err(ToeplitzError::BadParams("letter outside rank".into()));
                }
                counts[l as usize] += 1u32;
            }
            data.extend(counts);
        }
        levels.push(Level {
            matrix: IncidenceMatrix::new(rank, rank, data),
            orders: words.into_iter().map(OrderWord::Explicit).collect(),
        });
    }
    // Relaxed construction: a letter may be absent from every word of a
    // level (the rank-3 family drops letter 2 wherever t = 3), leaving a
    // vertex with no outgoing edges. Paths never reach such a vertex, so
    // the dynamics are unaffected.
    Ok(OrderedDiagram::new_relaxed(
        OrderedDiagram::unit_hat(rank),
        levels,
    )?)
}

/// Characteristic sequence q_n = 3^{l_n} for a strictly increasing
/// exponent sequence with l_1 = 0.
pub fn powers_of_three(exponents: &[u32]) -> Result<Vec<BigUint>, ToeplitzError> {
    if exponents.first() != Some(&0) {
        return Err(ToeplitzError::BadParams("exponent sequence must start at 0".into()));
    }
    for w in exponents.windows(2) {
        if w[1] <= w[0] {
            return Err(ToeplitzError::BadParams("exponents must strictly increase".into()));
        }
    }
    Ok(exponents.iter().map(|l| BigUint::from(3u32).pow(*l)).collect())
}

/// The rank-3 family: level n builds towers by the substitution
/// 1 -> (12)^{t-3} 131, 2 -> 1 (12)^{t-3} 31, 3 -> (12)^{t-3} 131 with
/// q_n = 2 t_n - 3 = 3^{l_n}. Level 1 is the trivial hat (q_1 = 1) and
/// the templates apply from level 2 on, which requires t_n >= 3 there.
pub fn rank3_minus_one(exponents: &[u32], depth: usize) -> Result<OrderedDiagram, ToeplitzError> {
    let q = powers_of_three(exponents)?;
    if depth < 1 || depth > q.len() {
        return Err(ToeplitzError::BadParams("depth outside exponent sequence".into()));
    }
    let mut words_by_level = Vec::new();
    for n in 2..=depth {
        let qn = q[n - 1]
            .to_usize()
            .ok_or_else(|| ToeplitzError::BadParams("q value too large".into()))?;
        // t = (q + 3) / 2; the templates need t >= 3.
        if qn % 2 == 0 {
            return Err(ToeplitzError::BadParams("q must be odd".into()));
        }
        let t = (qn + 3) / 2;
        if t < 3 {
            return Err(ToeplitzError::BadParams(format!(
                "level {n} has t = {t} < 3; the substitution templates are undefined"
            )));
        }
        let reps = t - 3;
        let mut w1 = Vec::with_capacity(qn);
        for _ in 0..reps {
            w1.extend_from_slice(&[0u32, 1]);
        }
        w1.extend_from_slice(&[0, 2, 0]);
        let mut w2 = Vec::with_capacity(qn);
        w2.push(0u32);
        for _ in 0..reps {
            w2.extend_from_slice(&[0, 1]);
        }
        w2.extend_from_slice(&[2, 0]);
        let w3 = w1.clone();
        words_by_level.push(vec![w1, w2, w3]);
    }
    toeplitz_diagram(&q, 3, &OrderRule::Words(words_by_level), depth)
}

/// The sign pattern of the candidate eigenfunction at -1: phase exponents
/// rho_1 = 0, rho_2 = rho_3 = 1 (so the tower sign is (-1)^{floor} on
/// tower 1 and its negative on towers 2 and 3).
pub fn minus_one_phases() -> Vec<Rat> {
    vec![Rat::zero(), Rat::one(), Rat::one()]
}

/// Where the level-n and level-(n+1) sign functions disagree, described
/// as floor sets per level-(n+1) tower.
#[derive(Debug, Clone)]
pub struct DisagreementSet {
    pub level: usize,
    /// Per level-(n+1) vertex: the set of floors (return-time values) on
    /// which the two sign functions differ.
    pub floors: Vec<BTreeSet<BigUint>>,
    /// Certified total mass of the set.
    pub mass: Interval,
    /// 4 / q_{n+1}.
    pub mass_budget: Rat,
    pub mass_ok: bool,
}

fn sign_of(parity: &BigUint, rho_negates: bool) -> i8 {
    let odd = parity.is_odd();
    let mut s = if odd { -1i8 } else { 1 };
    if rho_negates {
        s = -s;
    }
    s
}

/// Computes the disagreement set exactly by structural recursion on how
/// level-n towers stack inside level-(n+1) towers, and certifies its
/// mass against 4/q_{n+1}.
pub fn minus_one_disagreement(
    diagram: &OrderedDiagram,
    n: usize,
    mu_horizon: usize,
) -> Result<DisagreementSet, ToeplitzError> {
    diagram.check_level(n + 1)?;
    let rank = diagram.vertex_count(n + 1);
    let h_n = diagram.heights(n)?;
    let h_next = diagram.heights(n + 1)?;
    // All heights at one level coincide for Toeplitz diagrams.
    let base = &h_n[0];
    let rho = minus_one_phases();
    let negates = |v: usize| rho[v].is_one();
    let mut floors: Vec<BTreeSet<BigUint>> = vec![BTreeSet::new(); rank];
    for (k, set) in floors.iter_mut().enumerate() {
        let word = diagram.word(n + 1, k);
        let len = word.len_usize().expect("Toeplitz words are short");
        let mut offset = BigUint::zero();
        for pos in 0..len {
            let src = word.letter_at(&BigUint::from(pos))?;
            // On this stack segment, floor j = offset + r with r the
            // level-n floor; signs follow the floor parities.
            // f_n = (-1)^r rho_src, f_{n+1} = (-1)^{offset + r} rho_k:
            // disagreement is independent of r exactly when the offset
            // parity and phase flips cancel; otherwise the whole segment
            // disagrees.
            let seg_sign = sign_of(&offset, negates(k) != negates(src));
            if seg_sign == -1 {
                let mut r = BigUint::zero();
                while &r < base {
                    set.insert(&offset + &r);
                    r += 1u32;
                }
            }
            offset += base;
        }
        debug_assert_eq!(offset, h_next[k]);
    }
    // Certified mass: each floor of tower k at level n+1 has measure
    // mu_k(n+1).
    let mu = measure_enclosure(diagram, n + 1, mu_horizon)?;
    let mut mass = Interval::zero();
    for (k, set) in floors.iter().enumerate() {
        let count = Rat::from(BigInt::from(set.len()));
        mass = mass.add(&mu.entries[k].scale(&count));
    }
    let q_next: BigUint = {
        let m = diagram.matrix(n + 1);
        m.row_sum(0)
    };
    let mass_budget = Rat::new(BigInt::from(4), BigInt::from(q_next));
    let mass_ok = mass.hi() <= &mass_budget;
    Ok(DisagreementSet { level: n, floors, mass, mass_budget, mass_ok })
}

/// Brute-force oracle for the disagreement set: enumerate all depth-(n+1)
/// prefixes and compare the two sign functions pointwise.
pub fn minus_one_disagreement_bruteforce(
    diagram: &OrderedDiagram,
    n: usize,
    cap: usize,
) -> Result<Vec<BTreeSet<BigUint>>, ToeplitzError> {
    let rho = minus_one_phases();
    let negates = |v: usize| rho[v].is_one();
    let rank = diagram.vertex_count(n + 1);
    let mut floors: Vec<BTreeSet<BigUint>> = vec![BTreeSet::new(); rank];
    for p in enumerate_prefixes(diagram, n + 1, cap)? {
        let r_next = p.return_time(diagram)?;
        let truncated = truncate(diagram, &p, n)?;
        let r_n = truncated.return_time(diagram)?;
        let f_n = sign_of(&r_n, negates(truncated.end_vertex()));
        let f_next = sign_of(&r_next, negates(p.end_vertex()));
        if f_n != f_next {
            floors[p.end_vertex()].insert(r_next);
        }
    }
    Ok(floors)
}

fn truncate(
    diagram: &OrderedDiagram,
    p: &PathPrefix,
    depth: usize,
) -> Result<PathPrefix, ToeplitzError> {
    let orders: Vec<u64> = (2..=depth).map(|l| p.order_index(l)).collect();
    Ok(PathPrefix::new(diagram, p.hat_index(), orders, p.vertex_at(depth))?)
}

/// The structural description of the disagreement set for the rank-3
/// family: all of tower 3, the tower-2 part sitting over level-n tower 3,
/// and the first and last level-n block of tower 2.
pub fn rank3_predicted_set(
    diagram: &OrderedDiagram,
    n: usize,
) -> Result<Vec<BTreeSet<BigUint>>, ToeplitzError> {
    diagram.check_level(n + 1)?;
    let h_n = diagram.heights(n)?;
    let h_next = diagram.heights(n + 1)?;
    let base = &h_n[0];
    let mut floors: Vec<BTreeSet<BigUint>> = vec![BTreeSet::new(); 3];
    // Tower 3 entirely.
    {
        let mut j = BigUint::zero();
        while j < h_next[2] {
            floors[2].insert(j.clone());
            j += 1u32;
        }
    }
    // Tower 2: segments whose level-n vertex is 3, plus first and last
    // blocks of length h(n).
    {
        let word = diagram.word(n + 1, 1);
        let len = word.len_usize().expect("short word");
        for pos in 0..len {
            let src = word.letter_at(&BigUint::from(pos))?;
            let first = pos == 0;
            let last = pos == len - 1;
            if src == 2 || first || last {
                let offset = BigUint::from(pos) * base;
                let mut r = BigUint::zero();
                while &r < base {
                    floors[1].insert(&offset + &r);
                    r += 1u32;
                }
            }
        }
    }
    Ok(floors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toeplitz_heights_are_period_scales() {
        let q: Vec<BigUint> = [1u32, 3, 9, 27].iter().map(|&x| BigUint::from(x)).collect();
        let d = toeplitz_diagram(&q, 3, &OrderRule::Cyclic, 4).unwrap();
        let mut p = BigUint::one();
        for n in 1..=4 {
            p *= &q[n - 1];
            let h = d.heights(n).unwrap();
            assert!(h.iter().all(|x| *x == p), "H({n}) = p_{n} * ones");
        }
    }

    #[test]
    fn odometer_is_rank_one_toeplitz() {
        let q: Vec<BigUint> = [1u32, 2, 2, 2].iter().map(|&x| BigUint::from(x)).collect();
        let d = toeplitz_diagram(&q, 1, &OrderRule::Cyclic, 4).unwrap();
        assert_eq!(d.heights(4).unwrap(), vec![BigUint::from(8u32)]);
    }

    #[test]
    fn rank3_template_counts() {
        let d = rank3_minus_one(&[0, 1, 2, 3], 4).unwrap();
        // Letter counts per word: (t-1, t-3, 1).
        for n in 2..=4usize {
            let q = 3usize.pow(n as u32 - 1);
            let t = (q + 3) / 2;
            let m = d.matrix(n);
            for v in 0..3 {
                assert_eq!(m.get(v, 0), &BigUint::from(t - 1), "level {n}");
                assert_eq!(m.get(v, 1), &BigUint::from(t - 3));
                assert_eq!(m.get(v, 2), &BigUint::one());
                assert_eq!(m.row_sum(v), BigUint::from(q));
            }
        }
        // Words end with the low letter and start consistently: proper.
        for n in 2..=4 {
            assert!(d.check_proper(n).unwrap().is_proper(), "proper at {n}");
        }
    }

    #[test]
    fn level_q3_words_collapse_to_131() {
        let d = rank3_minus_one(&[0, 1, 2], 3).unwrap();
        let expect = OrderWord::Explicit(vec![0, 2, 0]);
        for v in 0..3 {
            assert_eq!(d.word(2, v), &expect);
        }
    }

    #[test]
    fn disagreement_matches_bruteforce_and_prediction() {
        // One level beyond the last checked n so the measure enclosure at
        // level n + 1 is tight (identical matrix rows collapse the hull).
        let d = rank3_minus_one(&[0, 1, 2, 3, 4], 5).unwrap();
        for n in 1..=3 {
            let fast = minus_one_disagreement(&d, n, 5).unwrap();
            let brute = minus_one_disagreement_bruteforce(&d, n, 10_000).unwrap();
            assert_eq!(fast.floors, brute, "structural vs brute force at n = {n}");
            let predicted = rank3_predicted_set(&d, n).unwrap();
            assert_eq!(fast.floors, predicted, "paperset identity at n = {n}");
            assert!(fast.mass_ok, "mass within 4/q at n = {n}: {:?}", fast.mass);
        }
    }
}
