//! Exact arithmetic in the golden field Q(phi) and in the quadratic
//! extension Q(phi)[sqrt(phi + 2)].
//!
//! phi is the positive root of x^2 = x + 1. The extension field hosts the
//! coordinates of the orthonormal eigenbasis of [[1,1],[1,0]], so the
//! self-similar construction can run on exact field elements: every sign
//! decision is algebraic, never a floating-point guess.

use super::interval::{rat_i64, Interval, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Element a + b*phi of Q(phi).
#[derive(Clone, PartialEq)]
pub struct Golden {
    pub a: Rat,
    pub b: Rat,
}

impl fmt::Debug for Golden {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}·phi)", self.a, self.b)
    }
}

impl Golden {
    pub fn new(a: Rat, b: Rat) -> Self {
        Golden { a, b }
    }

    pub fn from_rat(a: Rat) -> Self {
        Golden { a, b: Rat::zero() }
    }

    pub fn from_i64(n: i64) -> Self {
        Self::from_rat(Rat::from(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Self::from_i64(0)
    }

    pub fn one() -> Self {
        Self::from_i64(1)
    }

    pub fn phi() -> Self {
        Golden { a: Rat::zero(), b: Rat::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Galois conjugate a + b*(1 - phi).
    pub fn conj(&self) -> Self {
        Golden { a: &self.a + &self.b, b: -self.b.clone() }
    }

    /// Field norm: self * conj = a^2 + ab - b^2, a rational.
    pub fn norm(&self) -> Rat {
        &self.a * &self.a + &self.a * &self.b - &self.b * &self.b
    }

    pub fn inverse(&self) -> Self {
        assert!(!self.is_zero(), "inverse of zero in Q(phi)");
        let n = self.norm();
        let c = self.conj();
        Golden { a: c.a / &n, b: c.b / &n }
    }

    pub fn scale(&self, k: &Rat) -> Self {
        Golden { a: &self.a * k, b: &self.b * k }
    }

    /// Exact sign: -1, 0, or 1.
    pub fn signum(&self) -> i8 {
        if self.is_zero() {
            return 0;
        }
        if self.b.is_zero() {
            return if self.a.is_positive() { 1 } else { -1 };
        }
        if self.a.is_zero() {
            return if self.b.is_positive() { 1 } else { -1 };
        }
        let sa = self.a.is_positive();
        let sb = self.b.is_positive();
        if sa == sb {
            return if sa { 1 } else { -1 };
        }
        // Mixed signs: a + b*phi > 0 iff (for b > 0) phi > -a/b,
        // and q < phi iff q^2 - q - 1 < 0 for q > 0.
        let q = -&self.a / &self.b; // positive in the mixed case
        let disc = &q * &q - &q - Rat::one();
        debug_assert!(q.is_positive());
        let q_below_phi = disc.is_negative();
        if sb {
            // b > 0, a < 0: positive iff q < phi.
            if q_below_phi {
                1
            } else {
                -1
            }
        } else {
            // b < 0, a > 0: positive iff a > |b| phi iff q > phi.
            if q_below_phi {
                -1
            } else {
                1
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    /// Exact phi^k for any integer k (phi^-1 = phi - 1).
    pub fn phi_pow(k: i64) -> Self {
        let mut acc = Golden::one();
        let step = if k >= 0 {
            Golden::phi()
        } else {
            Golden { a: -Rat::one(), b: Rat::one() } // phi - 1 = 1/phi
        };
        for _ in 0..k.unsigned_abs() {
            acc = &acc * &step;
        }
        acc
    }

    pub fn to_interval(&self, bits: u32) -> Interval {
        let phi = phi_interval(bits + 8);
        Interval::point(self.a.clone())
            .add(&phi.scale(&self.b))
            .coarsen(bits)
    }
}

impl Add for &Golden {
    type Output = Golden;
    fn add(self, rhs: &Golden) -> Golden {
        Golden { a: &self.a + &rhs.a, b: &self.b + &rhs.b }
    }
}

impl Sub for &Golden {
    type Output = Golden;
    fn sub(self, rhs: &Golden) -> Golden {
        Golden { a: &self.a - &rhs.a, b: &self.b - &rhs.b }
    }
}

impl Mul for &Golden {
    type Output = Golden;
    fn mul(self, rhs: &Golden) -> Golden {
        // (a + b phi)(c + d phi) = ac + bd + (ad + bc + bd) phi
        let bd = &self.b * &rhs.b;
        Golden {
            a: &self.a * &rhs.a + &bd,
            b: &self.a * &rhs.b + &self.b * &rhs.a + &bd,
        }
    }
}

impl Neg for &Golden {
    type Output = Golden;
    fn neg(self) -> Golden {
        Golden { a: -self.a.clone(), b: -self.b.clone() }
    }
}

/// Element x + y*sqrt(phi+2) of the biquadratic extension.
#[derive(Clone, PartialEq)]
pub struct GoldenExt {
    pub x: Golden,
    pub y: Golden,
}

impl fmt::Debug for GoldenExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} + {:?}·√(phi+2))", self.x, self.y)
    }
}

impl GoldenExt {
    pub fn new(x: Golden, y: Golden) -> Self {
        GoldenExt { x, y }
    }

    pub fn from_golden(x: Golden) -> Self {
        GoldenExt { x, y: Golden::zero() }
    }

    pub fn from_rat(a: Rat) -> Self {
        Self::from_golden(Golden::from_rat(a))
    }

    pub fn zero() -> Self {
        Self::from_golden(Golden::zero())
    }

    pub fn one() -> Self {
        Self::from_golden(Golden::one())
    }

    /// sqrt(phi + 2) itself.
    pub fn root() -> Self {
        GoldenExt { x: Golden::zero(), y: Golden::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    fn radicand() -> Golden {
        Golden { a: rat_i64(2, 1), b: Rat::one() } // phi + 2
    }

    pub fn scale(&self, k: &Rat) -> Self {
        GoldenExt { x: self.x.scale(k), y: self.y.scale(k) }
    }

    pub fn mul_golden(&self, k: &Golden) -> Self {
        GoldenExt { x: &self.x * k, y: &self.y * k }
    }

    pub fn inverse(&self) -> Self {
        assert!(!self.is_zero(), "inverse of zero in Q(phi)[root]");
        // conj over the sqrt: (x - y s); (x + y s)(x - y s) = x^2 - y^2 (phi+2)
        let r = Self::radicand();
        let den = &(&self.x * &self.x) - &(&(&self.y * &self.y) * &r);
        let den_inv = den.inverse();
        GoldenExt {
            x: &self.x * &den_inv,
            y: &(-&self.y) * &den_inv,
        }
    }

    /// Exact sign determination.
    pub fn signum(&self) -> i8 {
        let sx = self.x.signum();
        let sy = self.y.signum();
        if sy == 0 {
            return sx;
        }
        if sx == 0 {
            return sy;
        }
        if sx == sy {
            return sx;
        }
        // Mixed: compare x^2 with y^2 (phi+2); both are Q(phi) values.
        let lhs = &self.x * &self.x;
        let rhs = &(&self.y * &self.y) * &Self::radicand();
        let d = (&lhs - &rhs).signum();
        // |x| > |y| s  iff  x^2 > y^2 (phi+2); then the sign of x wins.
        match d {
            0 => 0,
            1 => sx,
            _ => sy,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn min(&self, other: &Self) -> Self {
        if (self - other).is_negative() {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn to_interval(&self, bits: u32) -> Interval {
        let root = root_interval(bits + 8);
        self.x
            .to_interval(bits + 8)
            .add(&self.y.to_interval(bits + 8).mul(&root))
            .coarsen(bits)
    }
}

impl Add for &GoldenExt {
    type Output = GoldenExt;
    fn add(self, rhs: &GoldenExt) -> GoldenExt {
        GoldenExt { x: &self.x + &rhs.x, y: &self.y + &rhs.y }
    }
}

impl Sub for &GoldenExt {
    type Output = GoldenExt;
    fn sub(self, rhs: &GoldenExt) -> GoldenExt {
        GoldenExt { x: &self.x - &rhs.x, y: &self.y - &rhs.y }
    }
}

impl Mul for &GoldenExt {
    type Output = GoldenExt;
    fn mul(self, rhs: &GoldenExt) -> GoldenExt {
        let r = GoldenExt::radicand();
        GoldenExt {
            x: &(&self.x * &rhs.x) + &(&(&self.y * &rhs.y) * &r),
            y: &(&self.x * &rhs.y) + &(&self.y * &rhs.x),
        }
    }
}

impl Neg for &GoldenExt {
    type Output = GoldenExt;
    fn neg(self) -> GoldenExt {
        GoldenExt { x: -&self.x, y: -&self.y }
    }
}

/// Enclosure of phi = (1 + sqrt 5)/2 at the given precision.
pub fn phi_interval(bits: u32) -> Interval {
    let five = Interval::from_i64(5);
    let s5 = five.sqrt(bits + 4);
    s5.add(&Interval::one()).scale(&rat_i64(1, 2)).coarsen(bits)
}

/// Enclosure of sqrt(phi + 2).
pub fn root_interval(bits: u32) -> Interval {
    phi_interval(bits + 4)
        .add(&Interval::from_i64(2))
        .sqrt(bits + 4)
        .coarsen(bits)
}

/// Fibonacci with F(0) = 0, F(1) = 1, extended to negative indices.
pub fn fibonacci(n: i64) -> BigInt {
    if n >= 0 {
        let (mut a, mut b) = (BigInt::zero(), BigInt::one());
        for _ in 0..n {
            let c = &a + &b;
            a = b;
            b = c;
        }
        a
    } else {
        let f = fibonacci(-n);
        if (-n) % 2 == 1 {
            f
        } else {
            -f
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_ring_identities() {
        let phi = Golden::phi();
        let phi2 = &phi * &phi;
        // phi^2 = phi + 1
        assert_eq!(phi2, &phi + &Golden::one());
        // phi * (phi - 1) = 1
        let inv = Golden::phi_pow(-1);
        assert_eq!(&phi * &inv, Golden::one());
        assert_eq!(inv, Golden::new(rat_i64(-1, 1), rat_i64(1, 1)));
    }

    #[test]
    fn phi_pow_matches_fibonacci() {
        for k in -9i64..=9 {
            let p = Golden::phi_pow(k);
            assert_eq!(p.b, Rat::from(fibonacci(k)), "k={}", k);
            assert_eq!(p.a, Rat::from(fibonacci(k - 1)), "k={}", k);
        }
    }

    #[test]
    fn golden_signs_exact() {
        // phi - 1.6 > 0, phi - 1.7 < 0
        let x = &Golden::phi() - &Golden::from_rat(rat_i64(16, 10));
        assert_eq!(x.signum(), 1);
        let y = &Golden::phi() - &Golden::from_rat(rat_i64(17, 10));
        assert_eq!(y.signum(), -1);
        // 2 - phi > 0 (a > 0, b < 0 branch)
        let z = &Golden::from_i64(2) - &Golden::phi();
        assert_eq!(z.signum(), 1);
        // 1 - phi < 0
        let w = &Golden::one() - &Golden::phi();
        assert_eq!(w.signum(), -1);
    }

    #[test]
    fn ext_field_identities() {
        let s = GoldenExt::root();
        let s2 = &s * &s;
        assert_eq!(s2, GoldenExt::from_golden(GoldenExt::radicand()));
        let inv = s.inverse();
        assert_eq!(&s * &inv, GoldenExt::one());
        // sign of s - 1.9 (root is about 1.902)
        let a = &s - &GoldenExt::from_rat(rat_i64(19, 10));
        assert_eq!(a.signum(), 1);
        let b = &s - &GoldenExt::from_rat(rat_i64(191, 100));
        assert_eq!(b.signum(), -1);
    }

    #[test]
    fn interval_evaluations() {
        let phi = phi_interval(128);
        // phi^2 - phi - 1 contains 0
        let r = phi.mul(&phi).sub(&phi).sub(&Interval::one());
        assert!(r.contains_zero());
        let s = root_interval(128);
        let g = GoldenExt::root().to_interval(128);
        assert!(s.intersects(&g));
        let e = Golden::phi_pow(-7).to_interval(96);
        let direct = phi_interval(110).pow_i(7).recip();
        assert!(e.intersects(&direct));
    }
}
