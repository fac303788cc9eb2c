//! Ordered Bratteli-Vershik diagrams of finite rank.
//!
//! Level bookkeeping follows the usual convention: the hat connects the
//! root to level 1 and is described by the vector `h1`; for k >= 2 level k
//! carries an incidence matrix M(k) (rows indexed by the vertices of V_k,
//! columns by V_{k-1}) together with one order word per vertex of V_k. The
//! word of vertex j lists the source vertices of its incoming edges in
//! increasing edge order, so letter counts match the matrix row and the
//! word length is the row sum.
//!
//! All entries are arbitrary-precision integers; matrix products such as
//! the transition products P(n, m) = M(n) ... M(m+1) are exact.

use crate::num::interval::{Certainty, Interval, Rat};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagramError {
    #[error("level {0} outside materialized range 1..={1}")]
    LevelOutOfRange(usize, usize),
    #[error("matrix dimension mismatch at level {0}")]
    DimensionMismatch(usize),
    #[error("order word of vertex {vertex} at level {level} does not match matrix row")]
    WordMismatch { level: usize, vertex: usize },
    #[error("vertex {vertex} at level {level} has no incoming edges")]
    EmptyRow { level: usize, vertex: usize },
    #[error("vertex {vertex} at level {level} has no outgoing edges")]
    EmptyColumn { level: usize, vertex: usize },
    #[error("cut sequence must start at 0 and strictly increase within depth")]
    BadCuts,
    #[error("order word too large to materialize ({0} letters)")]
    WordTooLarge(BigUint),
    #[error("sign not decidable at current precision (position {0})")]
    UndecidableSign(BigUint),
    #[error("hat vector must have positive entries")]
    BadHat,
}

/// Nonnegative integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigUint>,
}

impl IncidenceMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigUint>) -> Self {
        assert_eq!(data.len(), rows * cols);
        IncidenceMatrix { rows, cols, data }
    }

    pub fn from_u64(rows: &[&[u64]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            for &e in *row {
                data.push(BigUint::from(e));
            }
        }
        IncidenceMatrix::new(r, c, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![BigUint::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = BigUint::one();
        }
        IncidenceMatrix::new(n, n, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigUint {
        &self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[BigUint] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_sum(&self, r: usize) -> BigUint {
        self.row(r).iter().sum()
    }

    pub fn mul(&self, other: &IncidenceMatrix) -> IncidenceMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut data = vec![BigUint::zero(); self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let t = a * other.get(k, j);
                    data[i * other.cols + j] += t;
                }
            }
        }
        IncidenceMatrix::new(self.rows, other.cols, data)
    }

    pub fn mul_nat_vec(&self, v: &[BigUint]) -> Vec<BigUint> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul_rat_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(a, b)| Rat::from(BigInt::from(a.clone())) * b)
                    .fold(Rat::zero(), |acc, x| acc + x)
            })
            .collect()
    }

    /// Transpose-apply: returns M^T v (v indexed by rows of M).
    pub fn transpose_mul_rat_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![Rat::zero(); self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j] += Rat::from(BigInt::from(self.get(i, j).clone())) * &v[i];
            }
        }
        out
    }

    pub fn mul_interval_vec(&self, v: &[Interval]) -> Vec<Interval> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i).iter().zip(v).fold(Interval::zero(), |acc, (a, x)| {
                    acc.add(&x.scale(&Rat::from(BigInt::from(a.clone()))))
                })
            })
            .collect()
    }

    pub fn transpose_mul_interval_vec(&self, v: &[Interval]) -> Vec<Interval> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![Interval::zero(); self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j] = out[j].add(&v[i].scale(&Rat::from(BigInt::from(self.get(i, j).clone()))));
            }
        }
        out
    }

    pub fn all_positive(&self) -> bool {
        self.data.iter().all(|e| !e.is_zero())
    }
}

/// Two-letter order word given in closed form by the hyperplane-hugging
/// recursion: a run of `k_run + 1` letters `2` followed by the coding of a
/// rotation. Used when the explicit letter list would be astronomically
/// long. Letters are stored 0-based (letter 0 is the paper's `1`).
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedWord {
    /// Certified direction vector, w[0] < 0 <= w[1].
    pub w: [Interval; 2],
    /// Letter counts: counts[i] = number of occurrences of letter i.
    pub counts: [BigUint; 2],
    /// The paper's run statistic K: the word starts with K + 1 letters `2`.
    pub k_run: BigUint,
}

impl BalancedWord {
    pub fn len(&self) -> BigUint {
        &self.counts[0] + &self.counts[1]
    }

    fn big_to_rat(x: &BigUint) -> Rat {
        Rat::from(BigInt::from(x.clone()))
    }

    /// c0 = -<h, w> as an interval.
    fn c0(&self) -> Interval {
        self.w[0]
            .scale(&Self::big_to_rat(&self.counts[0]))
            .add(&self.w[1].scale(&Self::big_to_rat(&self.counts[1])))
            .neg()
    }

    /// Letter at 0-based position `i`, decided certifiably.
    pub fn letter_at(&self, i: &BigUint) -> Result<usize, DiagramError> {
        assert!(*i < self.len(), "position out of range");
        if *i <= self.k_run {
            return Ok(1);
        }
        // Beyond the leading run the orbit c_i lives on the circle
        // (w1, w2] of circumference w2 - w1 and advances by w2 each step.
        let anchor = &self.k_run + 1u32; // index of first orbit point in (0, w2]
        let c_anchor = self.c0().add(&self.w[1].scale(&Self::big_to_rat(&anchor)));
        let t = i - &anchor;
        let circ = self.w[1].sub(&self.w[0]);
        let x = c_anchor
            .sub(&self.w[0])
            .add(&self.w[1].scale(&Self::big_to_rat(&t)));
        // q = floor(x / circ), certain only if both endpoints agree.
        let q_lo = (x.lo() / circ.hi()).floor();
        let q_hi = (x.hi() / circ.lo()).floor();
        if q_lo != q_hi {
            return Err(DiagramError::UndecidableSign(i.clone()));
        }
        let q = q_lo;
        let mut pos = x.sub(&circ.scale(&q));
        if pos.hi().is_zero() {
            // Landed exactly on the wrap point: the true orbit value is w2.
            pos = circ.clone();
        }
        // letter `1` (0-based 0) iff c_i = w1 + pos > 0 iff pos > -w1;
        // ties (c_i = 0) give letter `2`, matching the recursion.
        let thresh = self.w[0].neg();
        match thresh.lt_certain(&pos) {
            Certainty::Yes => Ok(0),
            Certainty::No => Ok(1),
            Certainty::Unknown => Err(DiagramError::UndecidableSign(i.clone())),
        }
    }
}

/// Order word of one vertex: explicit letter list or closed form.
#[derive(Debug, Clone, PartialEq)]
pub enum OrderWord {
    Explicit(Vec<u32>),
    Balanced(BalancedWord),
}

impl OrderWord {
    pub fn len(&self) -> BigUint {
        match self {
            OrderWord::Explicit(v) => BigUint::from(v.len()),
            OrderWord::Balanced(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len().is_zero()
    }

    pub fn len_usize(&self) -> Option<usize> {
        self.len().to_usize()
    }

    pub fn letter_count(&self, letter: usize) -> BigUint {
        match self {
            OrderWord::Explicit(v) => {
                BigUint::from(v.iter().filter(|&&l| l as usize == letter).count())
            }
            OrderWord::Balanced(b) => {
                if letter < 2 {
                    b.counts[letter].clone()
                } else {
                    BigUint::zero()
                }
            }
        }
    }

    pub fn letter_at(&self, i: &BigUint) -> Result<usize, DiagramError> {
        match self {
            OrderWord::Explicit(v) => {
                let idx = i.to_usize().expect("explicit word index fits usize");
                Ok(v[idx] as usize)
            }
            OrderWord::Balanced(b) => b.letter_at(i),
        }
    }

    pub fn first_letter(&self) -> Result<usize, DiagramError> {
        self.letter_at(&BigUint::zero())
    }

    pub fn last_letter(&self) -> Result<usize, DiagramError> {
        let n = self.len() - 1u32;
        self.letter_at(&n)
    }

    /// Materialize as an explicit letter vector, refusing beyond `cap`.
    pub fn materialize(&self, cap: usize) -> Result<Vec<u32>, DiagramError> {
        let len = self.len();
        if len > BigUint::from(cap) {
            return Err(DiagramError::WordTooLarge(len));
        }
        match self {
            OrderWord::Explicit(v) => Ok(v.clone()),
            OrderWord::Balanced(_) => {
                let n = len.to_usize().unwrap();
                let mut out = Vec::with_capacity(n);
                for i in 0..n {
                    out.push(self.letter_at(&BigUint::from(i))? as u32);
                }
                Ok(out)
            }
        }
    }
}

/// One level of the diagram: incidence matrix plus per-vertex order words.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub matrix: IncidenceMatrix,
    pub orders: Vec<OrderWord>,
}

/// A finite-depth ordered Bratteli-Vershik diagram.
///
/// Immutable after construction; the product memo is behind a mutex so
/// shared diagrams can be used from several threads, with each product
/// computed once.
#[derive(Debug)]
pub struct OrderedDiagram {
    h1: Vec<BigUint>,
    levels: Vec<Level>,
    product_memo: Mutex<HashMap<(usize, usize), Arc<IncidenceMatrix>>>,
}

impl Clone for OrderedDiagram {
    fn clone(&self) -> Self {
        OrderedDiagram {
            h1: self.h1.clone(),
            levels: self.levels.clone(),
            product_memo: Mutex::new(HashMap::new()),
        }
    }
}

impl PartialEq for OrderedDiagram {
    fn eq(&self, other: &Self) -> bool {
        self.h1 == other.h1 && self.levels == other.levels
    }
}

impl OrderedDiagram {
    pub fn new(h1: Vec<BigUint>, levels: Vec<Level>) -> Result<Self, DiagramError> {
        let d = OrderedDiagram { h1, levels, product_memo: Mutex::new(HashMap::new()) };
        d.validate()?;
        Ok(d)
    }

    /// Like `new` but tolerates vertices without outgoing edges (zero
    /// matrix columns). Such diagrams break the standing positivity
    /// assumption and exist to exercise kernel directions in tests.
    pub fn new_relaxed(h1: Vec<BigUint>, levels: Vec<Level>) -> Result<Self, DiagramError> {
        let d = OrderedDiagram { h1, levels, product_memo: Mutex::new(HashMap::new()) };
        d.validate_with(false)?;
        Ok(d)
    }

    /// All-ones hat of the given rank.
    pub fn unit_hat(rank: usize) -> Vec<BigUint> {
        vec![BigUint::one(); rank]
    }

    pub fn validate(&self) -> Result<(), DiagramError> {
        self.validate_with(true)
    }

    fn validate_with(&self, require_out_edges: bool) -> Result<(), DiagramError> {
        if self.h1.is_empty() || self.h1.iter().any(|h| h.is_zero()) {
            return Err(DiagramError::BadHat);
        }
        let mut prev = self.h1.len();
        for (i, level) in self.levels.iter().enumerate() {
            let lvl = i + 2;
            let m = &level.matrix;
            if m.cols() != prev {
                return Err(DiagramError::DimensionMismatch(lvl));
            }
            if level.orders.len() != m.rows() {
                return Err(DiagramError::DimensionMismatch(lvl));
            }
            for j in 0..m.rows() {
                if m.row_sum(j).is_zero() {
                    return Err(DiagramError::EmptyRow { level: lvl, vertex: j });
                }
                let word = &level.orders[j];
                if word.len() != m.row_sum(j) {
                    return Err(DiagramError::WordMismatch { level: lvl, vertex: j });
                }
                for c in 0..m.cols() {
                    if word.letter_count(c) != *m.get(j, c) {
                        return Err(DiagramError::WordMismatch { level: lvl, vertex: j });
                    }
                }
            }
            if require_out_edges {
                for c in 0..m.cols() {
                    if (0..m.rows()).all(|r| m.get(r, c).is_zero()) {
                        return Err(DiagramError::EmptyColumn { level: lvl, vertex: c });
                    }
                }
            }
            prev = m.rows();
        }
        Ok(())
    }

    /// Number of materialized levels (largest usable level index).
    pub fn depth(&self) -> usize {
        self.levels.len() + 1
    }

    pub fn h1(&self) -> &[BigUint] {
        &self.h1
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn check_level(&self, n: usize) -> Result<(), DiagramError> {
        if n < 1 || n > self.depth() {
            Err(DiagramError::LevelOutOfRange(n, self.depth()))
        } else {
            Ok(())
        }
    }

    pub fn vertex_count(&self, level: usize) -> usize {
        if level <= 1 {
            self.h1.len()
        } else {
            self.levels[level - 2].matrix.rows()
        }
    }

    /// M(level) for level >= 2.
    pub fn matrix(&self, level: usize) -> &IncidenceMatrix {
        &self.levels[level - 2].matrix
    }

    /// Order word of `vertex` at `level` (level >= 2).
    pub fn word(&self, level: usize, vertex: usize) -> &OrderWord {
        &self.levels[level - 2].orders[vertex]
    }

    /// True when all incidence matrix entries up to `n` are positive.
    pub fn all_positive(&self, n: usize) -> bool {
        self.levels[..n.saturating_sub(1)].iter().all(|l| l.matrix.all_positive())
    }

    /// True when the rank is constant for levels >= 2.
    pub fn constant_rank(&self) -> Option<usize> {
        let mut it = self.levels.iter().map(|l| l.matrix.rows());
        let first = it.next()?;
        if it.all(|r| r == first) {
            Some(first)
        } else {
            None
        }
    }

    /// Transition product P(n, m) = M(n) ... M(m+1); P(m, m) = I.
    pub fn product(&self, n: usize, m: usize) -> Result<Arc<IncidenceMatrix>, DiagramError> {
        if m < 1 || m > n {
            return Err(DiagramError::LevelOutOfRange(m, self.depth()));
        }
        self.check_level(n)?;
        let mut memo = self.product_memo.lock().unwrap();
        if let Some(p) = memo.get(&(n, m)) {
            return Ok(Arc::clone(p));
        }
        let result = if n == m {
            Arc::new(IncidenceMatrix::identity(self.vertex_count(m)))
        } else {
            // P(n, m) = M(n) P(n-1, m); reuse memoized tails.
            let mut acc = self.matrix(m + 1).clone();
            for k in (m + 2)..=n {
                acc = self.matrix(k).mul(&acc);
            }
            Arc::new(acc)
        };
        memo.insert((n, m), Arc::clone(&result));
        Ok(result)
    }

    /// Height vector H(n) = P(n, 1) H(1).
    pub fn heights(&self, n: usize) -> Result<Vec<BigUint>, DiagramError> {
        self.check_level(n)?;
        let mut h = self.h1.clone();
        for k in 2..=n {
            h = self.matrix(k).mul_nat_vec(&h);
        }
        Ok(h)
    }

    /// Contraction along `cuts`, which must start at 0 and strictly
    /// increase; new level k uses the path sets between consecutive cuts.
    pub fn telescope(&self, cuts: &[usize], word_cap: usize) -> Result<OrderedDiagram, DiagramError> {
        if cuts.len() < 2 || cuts[0] != 0 {
            return Err(DiagramError::BadCuts);
        }
        for w in cuts.windows(2) {
            if w[1] <= w[0] {
                return Err(DiagramError::BadCuts);
            }
        }
        let last = *cuts.last().unwrap();
        if last > self.depth() {
            return Err(DiagramError::LevelOutOfRange(last, self.depth()));
        }
        let new_h1 = self.heights(cuts[1])?;
        let mut levels = Vec::new();
        for w in cuts[1..].windows(2) {
            let (b, t) = (w[0], w[1]);
            let matrix = self.product(t, b)?.as_ref().clone();
            let mut orders = Vec::with_capacity(matrix.rows());
            for v in 0..matrix.rows() {
                let mut letters = Vec::new();
                self.collect_path_sources(v, t, b, word_cap, &mut letters)?;
                orders.push(OrderWord::Explicit(letters));
            }
            levels.push(Level { matrix, orders });
        }
        OrderedDiagram::new(new_h1, levels)
    }

    /// Appends the source vertices of all paths from level `b` into vertex
    /// `v` of level `t`, in the order induced by last-differing-edge
    /// comparison.
    fn collect_path_sources(
        &self,
        v: usize,
        t: usize,
        b: usize,
        cap: usize,
        out: &mut Vec<u32>,
    ) -> Result<(), DiagramError> {
        if t == b {
            out.push(v as u32);
            return Ok(());
        }
        let word = self.word(t, v);
        let len = word
            .len_usize()
            .ok_or_else(|| DiagramError::WordTooLarge(word.len()))?;
        for pos in 0..len {
            if out.len() > cap {
                return Err(DiagramError::WordTooLarge(BigUint::from(out.len())));
            }
            let src = word.letter_at(&BigUint::from(pos))?;
            self.collect_path_sources(src, t - 1, b, cap, out)?;
        }
        Ok(())
    }

    /// Unique all-minimal / all-maximal path evidence at depth `n`: all
    /// backward traces along minimal (resp. maximal) edges from the level-n
    /// vertices must coincide.
    pub fn check_proper(&self, n: usize) -> Result<ProperReport, DiagramError> {
        self.check_level(n)?;
        let unique_min = self.traces_agree(n, false)?;
        let unique_max = self.traces_agree(n, true)?;
        Ok(ProperReport { level: n, unique_min, unique_max })
    }

    fn traces_agree(&self, n: usize, max_side: bool) -> Result<bool, DiagramError> {
        if n == 1 {
            return Ok(true);
        }
        let mut trace: Option<Vec<usize>> = None;
        for v in 0..self.vertex_count(n) {
            let mut cur = v;
            let mut t = Vec::with_capacity(n - 1);
            for level in (2..=n).rev() {
                let w = self.word(level, cur);
                cur = if max_side { w.last_letter()? } else { w.first_letter()? };
                t.push(cur);
            }
            match &trace {
                None => trace = Some(t),
                Some(prev) => {
                    if *prev != t {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Minimal (or maximal) backward vertex trace from `vertex` at level
    /// `n` down to level 1; index 0 of the result is the level-1 vertex.
    pub fn extreme_trace(
        &self,
        n: usize,
        vertex: usize,
        max_side: bool,
    ) -> Result<Vec<usize>, DiagramError> {
        let mut out = vec![0usize; n];
        out[n - 1] = vertex;
        let mut cur = vertex;
        for level in (2..=n).rev() {
            let w = self.word(level, cur);
            cur = if max_side { w.last_letter()? } else { w.first_letter()? };
            out[level - 2] = cur;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProperReport {
    pub level: usize,
    pub unique_min: bool,
    pub unique_max: bool,
}

impl ProperReport {
    pub fn is_proper(&self) -> bool {
        self.unique_min && self.unique_max
    }
}

/// Builds the stationary golden-mean diagram: M(n) = [[1,1],[1,0]] with
/// order words "12" and "1" at every level.
pub fn fibonacci_diagram(depth: usize) -> OrderedDiagram {
    let mut levels = Vec::new();
    for _ in 2..=depth {
        levels.push(Level {
            matrix: IncidenceMatrix::from_u64(&[&[1, 1], &[1, 0]]),
            orders: vec![OrderWord::Explicit(vec![0, 1]), OrderWord::Explicit(vec![0])],
        });
    }
    OrderedDiagram::new(OrderedDiagram::unit_hat(2), levels).expect("valid by construction")
}

/// Rank-1 diagram with M(n) = [q] and the only possible order word.
pub fn odometer_diagram(q: u64, depth: usize) -> OrderedDiagram {
    let mut levels = Vec::new();
    for _ in 2..=depth {
        levels.push(Level {
            matrix: IncidenceMatrix::from_u64(&[&[q]]),
            orders: vec![OrderWord::Explicit(vec![0; q as usize])],
        });
    }
    OrderedDiagram::new(OrderedDiagram::unit_hat(1), levels).expect("valid by construction")
}
