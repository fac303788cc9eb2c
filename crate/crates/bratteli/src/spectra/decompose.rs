//! Stable decompositions alpha H(m) = v + w with w integral and v
//! contracted by the matrix products, plus the derived data: residual
//! profiles, orthogonality against invariant measures, and recovery of
//! alpha from an integer vector.

use super::{norm_inf, scale_heights, CandidateEigenvalue, SpectraError};
use crate::diagram::OrderedDiagram;
use crate::measures::MeasureVector;
use crate::num::interval::{frac_part, rat_i64, Interval, Rat};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

#[derive(Debug, Clone)]
pub struct StableDecomposition {
    pub level: usize,
    pub horizon: usize,
    /// Integer part w.
    pub w: Vec<BigInt>,
    /// Real part v = alpha H(m) - w, certified.
    pub v: Vec<Interval>,
    /// residuals[i] = ||P(m + i, m) v|| for i = 0..=horizon-m.
    pub residuals: Vec<Interval>,
    /// True when the residual at the horizon is certifiably below `tol`.
    pub contracted: bool,
    pub tolerance: Rat,
    /// True when w is the plain componentwise rounding of alpha H(m).
    pub w_is_rounding: bool,
}

fn round_interval(x: &Interval, tol: &Rat) -> Result<BigInt, SpectraError> {
    // Nearest integer to the midpoint; ambiguous when the interval sits at
    // distance ~1/2 from the lattice.
    let half = rat_i64(1, 2);
    let mid = x.midpoint();
    let r = (&mid + &half).floor();
    let dist = (&mid - &r).abs();
    if (&dist - &half).abs() <= *tol && x.width() <= *tol {
        return Err(SpectraError::AmbiguousRounding(0));
    }
    Ok(r.to_integer())
}

/// Decompose alpha H(m) as v + w. Starts from the componentwise rounding
/// and, if that v is not contracted at the horizon, searches the +/-1
/// integer offsets for the w with the certifiably smallest residual.
pub fn stable_decompose(
    diagram: &OrderedDiagram,
    alpha: &CandidateEigenvalue,
    m: usize,
    horizon: usize,
    tolerance: &Rat,
) -> Result<StableDecomposition, SpectraError> {
    if m < 1 || m > horizon {
        return Err(SpectraError::BadInput(format!("need 1 <= m <= horizon, got m={m}")));
    }
    diagram.check_level(horizon)?;
    let h = diagram.heights(m)?;
    let target = scale_heights(alpha, &h);
    let d = target.len();
    let mut rounding = Vec::with_capacity(d);
    for (i, t) in target.iter().enumerate() {
        match round_interval(t, &rat_i64(1, 1_000_000_000)) {
            Ok(r) => rounding.push(r),
            Err(SpectraError::AmbiguousRounding(_)) => {
                return Err(SpectraError::AmbiguousRounding(i))
            }
            Err(e) => return Err(e),
        }
    }
    let p_top = diagram.product(horizon, m)?;
    let residual_at_top = |w: &[BigInt]| -> Interval {
        let v: Vec<Interval> = target
            .iter()
            .zip(w)
            .map(|(t, wi)| t.sub(&Interval::point(Rat::from(wi.clone()))))
            .collect();
        let pv = interval_mat_vec(&p_top, &v);
        norm_inf(&pv)
    };

    let mut best_w = rounding.clone();
    let mut best_res = residual_at_top(&rounding);
    // Offsets are only worth scanning in small rank; 3^d candidates.
    if d <= 6 {
        let total = 3usize.pow(d as u32);
        for idx in 0..total {
            let mut rem = idx;
            let w: Vec<BigInt> = rounding
                .iter()
                .map(|r| {
                    let o = (rem % 3) as i8 - 1;
                    rem /= 3;
                    r + BigInt::from(o)
                })
                .collect();
            if w == rounding {
                continue;
            }
            let res = residual_at_top(&w);
            if res.hi() < best_res.hi() {
                best_res = res;
                best_w = w;
            }
        }
    }

    let v: Vec<Interval> = target
        .iter()
        .zip(&best_w)
        .map(|(t, wi)| t.sub(&Interval::point(Rat::from(wi.clone()))))
        .collect();
    let mut residuals = Vec::with_capacity(horizon - m + 1);
    for n in m..=horizon {
        let p = diagram.product(n, m)?;
        residuals.push(norm_inf(&interval_mat_vec(&p, &v)));
    }
    let contracted = residuals.last().unwrap().hi() < tolerance;
    let w_is_rounding = best_w == rounding;
    Ok(StableDecomposition {
        level: m,
        horizon,
        w: best_w,
        v,
        residuals,
        contracted,
        tolerance: tolerance.clone(),
        w_is_rounding,
    })
}

/// Scans m = 1..=max_level and returns the smallest m whose decomposition
/// contracts below `tol` at the horizon, together with all attempts.
pub fn stable_decompose_search(
    diagram: &OrderedDiagram,
    alpha: &CandidateEigenvalue,
    max_level: usize,
    horizon: usize,
    tolerance: &Rat,
) -> Result<Option<StableDecomposition>, SpectraError> {
    for m in 1..=max_level.min(horizon) {
        match stable_decompose(diagram, alpha, m, horizon, tolerance) {
            Ok(dec) if dec.contracted => return Ok(Some(dec)),
            Ok(_) => continue,
            Err(SpectraError::AmbiguousRounding(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

pub(crate) fn interval_mat_vec(
    m: &crate::diagram::IncidenceMatrix,
    v: &[Interval],
) -> Vec<Interval> {
    m.mul_interval_vec(v)
}

/// <v, mu(m)> as a certified interval; contains 0 whenever v lies in the
/// contracted space, for any invariant measure.
pub fn orthogonality_check(v: &[Interval], mu: &MeasureVector) -> Interval {
    assert_eq!(v.len(), mu.entries.len(), "dimension mismatch");
    v.iter()
        .zip(&mu.entries)
        .fold(Interval::zero(), |acc, (a, b)| acc.add(&a.mul(b)))
}

/// alpha = <w, mu(m)> reduced modulo 1, as a certified candidate.
pub fn alpha_from_integer_vector(w: &[BigInt], mu: &MeasureVector) -> CandidateEigenvalue {
    assert_eq!(w.len(), mu.entries.len(), "dimension mismatch");
    let ip = w
        .iter()
        .zip(&mu.entries)
        .fold(Interval::zero(), |acc, (wi, m)| acc.add(&m.scale(&Rat::from(wi.clone()))));
    // Shift so the lower end lands in [0, 1); the width is unchanged.
    let shift = ip.lo().floor();
    let reduced = ip.sub(&Interval::point(shift));
    if reduced.width().is_zero() {
        // Exact case: reduce fully.
        CandidateEigenvalue::Rational(frac_part(reduced.lo()))
    } else {
        CandidateEigenvalue::Certified(reduced)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::fibonacci_diagram;
    use crate::measures::measure_enclosure;
    use crate::num::golden::Golden;
    use num_traits::One;

    #[test]
    fn alpha_one_gives_zero_v() {
        let d = fibonacci_diagram(8);
        let alpha = CandidateEigenvalue::Rational(Rat::one());
        let dec = stable_decompose(&d, &alpha, 2, 8, &rat_i64(1, 1000)).unwrap();
        let h = d.heights(2).unwrap();
        assert_eq!(dec.w, h.iter().map(|x| BigInt::from(x.clone())).collect::<Vec<_>>());
        assert!(dec.v.iter().all(|x| x.contains_zero() && x.width().is_zero()));
        assert!(dec.contracted);
        assert!(dec.w_is_rounding);
    }

    #[test]
    fn golden_inverse_picks_stable_direction() {
        let d = fibonacci_diagram(20);
        let alpha = CandidateEigenvalue::Certified(Golden::phi_pow(-1).to_interval(192));
        let dec = stable_decompose(&d, &alpha, 1, 20, &rat_i64(1, 1000)).unwrap();
        // The rounding (1,1) is not contracted; the search finds (1,0).
        assert_eq!(dec.w, vec![BigInt::one(), BigInt::zero()]);
        assert!(!dec.w_is_rounding);
        assert!(dec.contracted);
        // Residual ratio ~ 1/phi.
        let r5 = &dec.residuals[5];
        let r6 = &dec.residuals[6];
        let ratio = r6.div(r5);
        assert!(ratio.lo() > &rat_i64(61, 100));
        assert!(ratio.hi() < &rat_i64(62, 100));
        // Search wrapper agrees at m = 1.
        let found = stable_decompose_search(&d, &alpha, 5, 20, &rat_i64(1, 1000))
            .unwrap()
            .expect("contracted level found");
        assert_eq!(found.level, 1);
    }

    #[test]
    fn ambiguous_rounding_detected() {
        let d = fibonacci_diagram(6);
        let alpha = CandidateEigenvalue::Rational(rat_i64(1, 2));
        // alpha H(1) = (1/2, 1/2): exactly half-integral.
        let out = stable_decompose(&d, &alpha, 1, 6, &rat_i64(1, 1000));
        assert!(matches!(out, Err(SpectraError::AmbiguousRounding(_))));
    }

    #[test]
    fn orthogonality_and_alpha_recovery() {
        let d = fibonacci_diagram(40);
        let mu1 = measure_enclosure(&d, 1, 40).unwrap();
        let alpha = CandidateEigenvalue::Certified(Golden::phi_pow(-1).to_interval(200));
        let dec = stable_decompose(&d, &alpha, 1, 30, &rat_i64(1, 1000)).unwrap();
        let ortho = orthogonality_check(&dec.v, &mu1);
        assert!(ortho.contains_zero());
        // w = (1,0) recovers alpha = mu_1(1) = 1/phi.
        let rec = alpha_from_integer_vector(&dec.w, &mu1);
        let rec_i = rec.as_interval();
        assert!(rec_i.intersects(&Golden::phi_pow(-1).to_interval(200)));
        // Round trip: decomposing the recovered alpha returns the same w.
        let dec2 = stable_decompose(&d, &rec, 1, 30, &rat_i64(1, 1000)).unwrap();
        assert_eq!(dec2.w, dec.w);
    }

    #[test]
    fn zero_vector_alpha() {
        let d = fibonacci_diagram(6);
        let mu = measure_enclosure(&d, 1, 6).unwrap();
        let rec = alpha_from_integer_vector(&[BigInt::zero(), BigInt::zero()], &mu);
        assert_eq!(rec.as_interval().hi(), &Rat::zero());
        // w = H(m): alpha = 1 = 0 mod 1.
        let h = d.heights(1).unwrap();
        let w: Vec<BigInt> = h.iter().map(|x| BigInt::from(x.clone())).collect();
        let rec = alpha_from_integer_vector(&w, &mu);
        match rec {
            CandidateEigenvalue::Certified(i) => {
                assert!(i.lo() <= &Rat::zero() || i.width() > Rat::zero());
            }
            CandidateEigenvalue::Rational(r) => assert!(r.is_zero()),
        }
    }
}
