//! Certified interval arithmetic over rational endpoints.
//!
//! Every value is an inclusion `[lo, hi]` with `lo <= hi`, both exact
//! rationals. Ring operations are exact; `coarsen` rounds endpoints outward
//! to a dyadic grid so repeated multiplication does not blow up coefficient
//! sizes. Square roots and the circle functions produce enclosures at a
//! requested precision.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

pub type Rat = BigRational;

/// Outcome of a comparison between intervals: certain, or not decidable at
/// the current widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certainty {
    Yes,
    No,
    Unknown,
}

impl Certainty {
    pub fn is_yes(self) -> bool {
        self == Certainty::Yes
    }
}

#[derive(Clone, PartialEq)]
pub struct Interval {
    lo: Rat,
    hi: Rat,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", decimal_string(&self.lo, 24), decimal_string(&self.hi, 24))
    }
}

pub fn rat_i64(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Decimal rendering of a rational, rounded toward zero at `digits` places.
pub fn decimal_string(x: &Rat, digits: u32) -> String {
    let sign = if x.is_negative() { "-" } else { "" };
    let ax = x.abs();
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = (ax.numer() * &scale) / ax.denom();
    let int_part = &scaled / &scale;
    let frac_part = &scaled % &scale;
    let frac_str = format!("{:0>width$}", frac_part.to_string(), width = digits as usize);
    let frac_str = frac_str.trim_end_matches('0');
    if frac_str.is_empty() {
        format!("{}{}", sign, int_part)
    } else {
        format!("{}{}.{}", sign, int_part, frac_str)
    }
}

impl Interval {
    pub fn new(lo: Rat, hi: Rat) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo, hi }
    }

    pub fn point(x: Rat) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn from_i64(n: i64) -> Self {
        Self::point(Rat::from(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Self::from_i64(0)
    }

    pub fn one() -> Self {
        Self::from_i64(1)
    }

    pub fn lo(&self) -> &Rat {
        &self.lo
    }

    pub fn hi(&self) -> &Rat {
        &self.hi
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rat {
        (&self.lo + &self.hi) / Rat::from(BigInt::from(2))
    }

    pub fn contains(&self, x: &Rat) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -self.hi.clone(), hi: -self.lo.clone() }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        Interval { lo: &self.lo - &other.hi, hi: &self.hi - &other.lo }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let c = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let mut lo = c[0].clone();
        let mut hi = c[0].clone();
        for v in &c[1..] {
            if *v < lo {
                lo = v.clone();
            }
            if *v > hi {
                hi = v.clone();
            }
        }
        Interval { lo, hi }
    }

    pub fn scale(&self, k: &Rat) -> Interval {
        if k.is_negative() {
            Interval { lo: &self.hi * k, hi: &self.lo * k }
        } else {
            Interval { lo: &self.lo * k, hi: &self.hi * k }
        }
    }

    /// Reciprocal; the interval must not contain zero.
    pub fn recip(&self) -> Interval {
        assert!(!self.contains_zero(), "reciprocal of interval containing zero");
        Interval { lo: self.hi.recip(), hi: self.lo.recip() }
    }

    pub fn div(&self, other: &Interval) -> Interval {
        self.mul(&other.recip())
    }

    pub fn abs(&self) -> Interval {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            Interval {
                lo: Rat::zero(),
                hi: self.lo.abs().max(self.hi.abs()),
            }
        }
    }

    pub fn min_i(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().min(other.hi.clone()),
        }
    }

    pub fn max_i(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().max(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    /// Round endpoints outward onto the grid of multiples of 2^-bits.
    pub fn coarsen(&self, bits: u32) -> Interval {
        Interval {
            lo: dyadic_floor(&self.lo, bits),
            hi: dyadic_ceil(&self.hi, bits),
        }
    }

    pub fn is_positive_certain(&self) -> Certainty {
        if self.lo.is_positive() {
            Certainty::Yes
        } else if !self.hi.is_positive() {
            Certainty::No
        } else {
            Certainty::Unknown
        }
    }

    pub fn is_negative_certain(&self) -> Certainty {
        if self.hi.is_negative() {
            Certainty::Yes
        } else if !self.lo.is_negative() {
            Certainty::No
        } else {
            Certainty::Unknown
        }
    }

    /// `self < other`, certified.
    pub fn lt_certain(&self, other: &Interval) -> Certainty {
        if self.hi < other.lo {
            Certainty::Yes
        } else if self.lo >= other.hi {
            Certainty::No
        } else {
            Certainty::Unknown
        }
    }

    /// `self <= other`, certified.
    pub fn le_certain(&self, other: &Interval) -> Certainty {
        if self.hi <= other.lo {
            Certainty::Yes
        } else if self.lo > other.hi {
            Certainty::No
        } else {
            Certainty::Unknown
        }
    }

    /// Enclosure of sqrt at roughly `bits` fractional bits. Requires lo >= 0.
    pub fn sqrt(&self, bits: u32) -> Interval {
        assert!(!self.lo.is_negative(), "sqrt of interval with negative part");
        Interval {
            lo: sqrt_lower(&self.lo, bits),
            hi: sqrt_upper(&self.hi, bits),
        }
    }

    /// Integer powers with exact endpoint arithmetic.
    pub fn pow_i(&self, n: u32) -> Interval {
        let mut acc = Interval::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.midpoint())
    }
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    // Good enough for reporting; exactness is never needed here.
    let bits = 80u32;
    let scaled = (x.numer() << bits) / x.denom();
    let (sign, digits) = scaled.to_u64_digits();
    let mut v = 0.0f64;
    for d in digits.iter().rev() {
        v = v * (u64::MAX as f64 + 1.0) + *d as f64;
    }
    let v = v / 2f64.powi(bits as i32);
    if sign == Sign::Minus {
        -v
    } else {
        v
    }
}

/// Largest multiple of 2^-bits that is <= x.
pub fn dyadic_floor(x: &Rat, bits: u32) -> Rat {
    let scale = BigInt::one() << bits;
    let num = x.numer() * &scale;
    Rat::new(num.div_floor(x.denom()), scale)
}

/// Smallest multiple of 2^-bits that is >= x.
pub fn dyadic_ceil(x: &Rat, bits: u32) -> Rat {
    let scale = BigInt::one() << bits;
    let num = x.numer() * &scale;
    Rat::new(num.div_ceil(x.denom()), scale)
}

trait DivFloorCeil {
    fn div_floor(&self, d: &BigInt) -> BigInt;
    fn div_ceil(&self, d: &BigInt) -> BigInt;
}

impl DivFloorCeil for BigInt {
    fn div_floor(&self, d: &BigInt) -> BigInt {
        num_integer::Integer::div_floor(self, d)
    }
    fn div_ceil(&self, d: &BigInt) -> BigInt {
        num_integer::Integer::div_ceil(self, d)
    }
}

fn sqrt_lower(x: &Rat, bits: u32) -> Rat {
    if x.is_zero() {
        return Rat::zero();
    }
    // floor(sqrt(x * 4^bits)) / 2^bits <= sqrt(x)
    let scale = BigInt::one() << (2 * bits);
    let n = (x.numer() * &scale) / x.denom();
    Rat::new(n.sqrt(), BigInt::one() << bits)
}

fn sqrt_upper(x: &Rat, bits: u32) -> Rat {
    if x.is_zero() {
        return Rat::zero();
    }
    let scale = BigInt::one() << (2 * bits);
    // ceil of x * 4^bits
    let n = DivFloorCeil::div_ceil(&(x.numer() * &scale), x.denom());
    let r = n.sqrt();
    let r = if &r * &r >= n { r } else { r + 1 };
    Rat::new(r, BigInt::one() << bits)
}

/// Distance from an exact rational to the nearest integer, in [0, 1/2].
pub fn int_distance(x: &Rat) -> Rat {
    let fl = x.floor();
    let frac = x - &fl;
    let half = rat_i64(1, 2);
    if frac <= half {
        frac
    } else {
        Rat::one() - frac
    }
}

/// Enclosure of the distance-to-nearest-integer function over an interval.
pub fn int_distance_interval(x: &Interval) -> Interval {
    let half = rat_i64(1, 2);
    let fa = int_distance(x.lo());
    let fb = int_distance(x.hi());
    // Integer inside drops the minimum to 0; a half-integer inside lifts the
    // maximum to 1/2.
    let contains_int = x.hi().floor() >= x.lo().ceil();
    let shifted = Interval::new(x.lo() - &half, x.hi() - &half);
    let contains_half = shifted.hi().floor() >= shifted.lo().ceil();
    let lo = if contains_int { Rat::zero() } else { fa.clone().min(fb.clone()) };
    let hi = if contains_half { half } else { fa.max(fb) };
    Interval::new(lo, hi)
}

/// Fractional part in [0, 1) of an exact rational.
pub fn frac_part(x: &Rat) -> Rat {
    x - x.floor()
}

/// Enclosure of pi. Machin's formula with interval tail bounds.
pub fn pi(bits: u32) -> Interval {
    // pi = 16 atan(1/5) - 4 atan(1/239)
    let a = atan_inv(5, bits + 8).scale(&Rat::from(BigInt::from(16)));
    let b = atan_inv(239, bits + 8).scale(&Rat::from(BigInt::from(4)));
    a.sub(&b).coarsen(bits)
}

/// Enclosure of atan(1/k) for integer k >= 2 via the alternating series.
fn atan_inv(k: i64, bits: u32) -> Interval {
    let x = rat_i64(1, k);
    let x2 = &x * &x;
    let mut term = x.clone();
    let mut sum = Rat::zero();
    let mut n = 0u32;
    let eps = Rat::new(BigInt::one(), BigInt::one() << bits);
    loop {
        let contrib = &term / Rat::from(BigInt::from(2 * n as i64 + 1));
        if n % 2 == 0 {
            sum += &contrib;
        } else {
            sum -= &contrib;
        }
        term *= &x2;
        n += 1;
        let next = &term / Rat::from(BigInt::from(2 * n as i64 + 1));
        if next < eps {
            // Alternating series: truncation error within +/- next term.
            return Interval::new(&sum - &next, &sum + &next);
        }
    }
}

/// Certified enclosure of cos(2*pi*x). Argument reduced exactly mod 1.
pub fn cos_two_pi(x: &Rat, bits: u32) -> Interval {
    let y = frac_part(x); // in [0,1)
    let angle = pi(bits + 16).scale(&(Rat::from(BigInt::from(2)) * y));
    cos_enclosure(&angle, bits)
}

/// The exact rational value of a finite f64.
pub fn rat_from_f64(x: f64) -> Rat {
    assert!(x.is_finite(), "cannot convert non-finite float");
    if x == 0.0 {
        return Rat::zero();
    }
    let (mantissa, exponent, sign) = {
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        if exp == 0 {
            (frac, -1074i64, sign)
        } else {
            (frac | (1u64 << 52), exp - 1075, sign)
        }
    };
    let num = BigInt::from(mantissa) * BigInt::from(sign);
    if exponent >= 0 {
        Rat::from(num << exponent as u32)
    } else {
        Rat::new(num, BigInt::one() << (-exponent) as u32)
    }
}

/// |1 - e^{2 i pi x}|^2 for an interval exponent, clamped to [0, 4].
pub fn one_minus_phase_sq_interval(x: &Interval, bits: u32) -> Interval {
    let four = Rat::from(BigInt::from(4));
    if x.width() >= Rat::one() {
        return Interval::new(Rat::zero(), four);
    }
    // Shift by an exact integer so the argument is small.
    let shift = x.lo().floor();
    let reduced = x.sub(&Interval::point(shift));
    let two = Rat::from(BigInt::from(2));
    let angle = pi(bits + 16).mul(&reduced.scale(&two));
    let c = cos_enclosure(&angle, bits);
    let raw = Interval::point(two.clone()).sub(&c.scale(&two));
    let lo = raw.lo().clone().max(Rat::zero()).min(four.clone());
    let hi = raw.hi().clone().min(four).max(lo.clone());
    Interval::new(lo, hi)
}

/// |1 - e^{2 i pi x}|^2 = 2 - 2 cos(2 pi x), certified, clamped to [0,4].
pub fn one_minus_phase_sq(x: &Rat, bits: u32) -> Interval {
    let two = Rat::from(BigInt::from(2));
    let c = cos_two_pi(x, bits);
    let raw = Interval::point(two.clone()).sub(&c.scale(&two));
    let lo = raw.lo().clone().max(Rat::zero());
    let hi = raw.hi().clone().min(Rat::from(BigInt::from(4)));
    Interval::new(lo.clone().min(hi.clone()), hi)
}

/// Taylor enclosure of cos on a small interval argument (|arg| <= 2*pi).
fn cos_enclosure(arg: &Interval, bits: u32) -> Interval {
    let lo = cos_point(arg.lo(), bits);
    let hi = cos_point(arg.hi(), bits);
    let mut out = lo.hull(&hi);
    // cos attains +/-1 at multiples of pi; detect interior extrema by
    // checking whether arg straddles k*pi for small k.
    let pi_i = pi(bits + 8);
    for k in -2..=2i64 {
        let kpi = pi_i.scale(&Rat::from(BigInt::from(k)));
        if arg.lo() <= kpi.hi() && kpi.lo() <= arg.hi() {
            if k % 2 == 0 {
                out = out.hull(&Interval::one());
            } else {
                out = out.hull(&Interval::from_i64(-1));
            }
        }
    }
    let neg1 = Rat::from(BigInt::from(-1));
    let pos1 = Rat::one();
    Interval::new(out.lo().clone().max(neg1), out.hi().clone().min(pos1))
}

/// cos at an exact rational point, by Taylor series with remainder bound.
fn cos_point(x: &Rat, bits: u32) -> Interval {
    let x2 = x * x;
    let mut term = Rat::one();
    let mut sum = Rat::zero();
    let eps = Rat::new(BigInt::one(), BigInt::one() << (bits + 4));
    let mut k = 0u64;
    loop {
        if k % 2 == 0 {
            sum += &term;
        } else {
            sum -= &term;
        }
        // next term: x^{2(k+1)} / (2(k+1))!
        let d = Rat::from(BigInt::from((2 * k + 1) * (2 * k + 2)));
        term = &term * &x2 / d;
        k += 1;
        if term < eps && k >= 4 {
            // For |x| <= 2 pi the series tail after an index beyond |x| is
            // bounded by the first omitted term.
            let out = Interval::new(&sum - &term, &sum + &term);
            return out.coarsen(bits);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        rat_i64(n, d)
    }

    #[test]
    fn arithmetic_encloses() {
        let a = Interval::new(r(1, 3), r(1, 2));
        let b = Interval::new(r(-1, 4), r(1, 5));
        let s = a.add(&b);
        assert_eq!(s.lo(), &r(1, 12));
        assert_eq!(s.hi(), &r(7, 10));
        let p = a.mul(&b);
        assert!(p.contains(&(r(1, 3) * r(-1, 4))));
        assert!(p.contains(&(r(1, 2) * r(1, 5))));
    }

    #[test]
    fn coarsen_is_outward() {
        let a = Interval::new(r(1, 3), r(2, 3));
        let c = a.coarsen(8);
        assert!(c.lo() <= a.lo());
        assert!(c.hi() >= a.hi());
        assert!(c.width() <= a.width() + r(2, 256));
    }

    #[test]
    fn sqrt_five() {
        let five = Interval::from_i64(5);
        let s = five.sqrt(128);
        let sq = s.mul(&s);
        assert!(sq.contains(&r(5, 1)));
        assert!(s.width() < r(1, 1_000_000_000));
    }

    #[test]
    fn int_distance_cases() {
        assert_eq!(int_distance(&r(7, 1)), r(0, 1));
        assert_eq!(int_distance(&r(1, 2)), r(1, 2));
        assert_eq!(int_distance(&r(3, 10)), r(3, 10));
        assert_eq!(int_distance(&r(-3, 10)), r(3, 10));
        assert_eq!(int_distance(&r(17, 10)), r(3, 10));
    }

    #[test]
    fn int_distance_interval_cases() {
        // Straddles the integer 2.
        let d = int_distance_interval(&Interval::new(r(19, 10), r(21, 10)));
        assert_eq!(d.lo(), &r(0, 1));
        assert_eq!(d.hi(), &r(1, 10));
        // Straddles a half integer.
        let d = int_distance_interval(&Interval::new(r(24, 10), r(26, 10)));
        assert_eq!(d.hi(), &r(1, 2));
        assert_eq!(d.lo(), &r(4, 10));
        // Fully inside one rounding cell.
        let d = int_distance_interval(&Interval::new(r(11, 10), r(12, 10)));
        assert_eq!(d.lo(), &r(1, 10));
        assert_eq!(d.hi(), &r(2, 10));
    }

    #[test]
    fn pi_enclosure() {
        let p = pi(64);
        assert!(p.contains(&r(355, 113)) || p.hi() < &r(355, 113)); // 355/113 > pi
        assert!(p.lo() > &r(314159, 100000));
        assert!(p.hi() < &r(314160, 100000));
        assert!(p.width() < Rat::new(BigInt::one(), BigInt::one() << 60));
    }

    #[test]
    fn phase_distance_halves() {
        // |1 - e^{i pi}|^2 = 4 at x = 1/2, 0 at integers.
        let at_half = one_minus_phase_sq(&r(1, 2), 64);
        assert!(at_half.contains(&r(4, 1)));
        assert!(at_half.width() < r(1, 1 << 30));
        let at_zero = one_minus_phase_sq(&r(0, 1), 64);
        assert!(at_zero.contains(&r(0, 1)));
        let at_third = one_minus_phase_sq(&r(1, 3), 64);
        // 2 - 2cos(2pi/3) = 3
        assert!(at_third.contains(&r(3, 1)));
    }
}
