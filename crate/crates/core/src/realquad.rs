//! Exact arithmetic for real quadratic irrationals `(a + b√D)/c`.
//!
//! Sign tests, floors and nearest-integer distances are decided by integer
//! comparisons only; a float enters solely as a first guess that the exact
//! predicates then correct.  Continued-fraction digits come from the
//! classical `(P, Q, D)` recurrence so coefficients stay bounded.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

/// `(a + b√D)/c` with `c > 0`; `D ≥ 0`, and `D` non-square whenever `b ≠ 0`
/// (otherwise the value would be rational in disguise).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealQuadratic {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

impl RealQuadratic {
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Self {
        assert!(!c.is_zero(), "zero denominator");
        assert!(!d.is_negative(), "negative radicand");
        let (a, b, c) = if c.is_negative() { (-a, -b, -c) } else { (a, b, c) };
        let sq = d.sqrt();
        if !b.is_zero() && &sq * &sq == d {
            // Collapse a disguised rational.
            return RealQuadratic {
                a: a + &b * sq,
                b: BigInt::zero(),
                c,
                d: BigInt::zero(),
            };
        }
        RealQuadratic { a, b, c, d }
    }

    pub fn from_rational(q: &BigRational) -> Self {
        Self::new(q.numer().clone(), BigInt::zero(), q.denom().clone(), BigInt::zero())
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(BigInt::from(n), BigInt::zero(), BigInt::one(), BigInt::zero())
    }

    /// The golden ratio `(1 + √5)/2`.
    pub fn golden_ratio() -> Self {
        Self::new(BigInt::one(), BigInt::one(), BigInt::from(2), BigInt::from(5))
    }

    /// `√2 − 1 = [0; 2, 2, 2, …]`.
    pub fn sqrt2_minus_1() -> Self {
        Self::new(BigInt::from(-1), BigInt::one(), BigInt::one(), BigInt::from(2))
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        if self.is_rational() {
            Some(BigRational::new(self.a.clone(), self.c.clone()))
        } else {
            None
        }
    }

    pub fn add_rational(&self, q: &BigRational) -> Self {
        let m = q.denom();
        let n = q.numer();
        RealQuadratic::new(
            &self.a * m + n * &self.c,
            &self.b * m,
            &self.c * m,
            self.d.clone(),
        )
    }

    pub fn mul_int(&self, n: &BigInt) -> Self {
        RealQuadratic::new(&self.a * n, &self.b * n, self.c.clone(), self.d.clone())
    }

    pub fn neg(&self) -> Self {
        RealQuadratic::new(-self.a.clone(), -self.b.clone(), self.c.clone(), self.d.clone())
    }

    pub fn sub_int(&self, n: &BigInt) -> Self {
        RealQuadratic::new(
            &self.a - n * &self.c,
            self.b.clone(),
            self.c.clone(),
            self.d.clone(),
        )
    }

    /// Algebraic conjugate `(a − b√D)/c`.
    pub fn conjugate(&self) -> Self {
        RealQuadratic::new(self.a.clone(), -self.b.clone(), self.c.clone(), self.d.clone())
    }

    /// Sign of the real value: −1, 0, +1.
    pub fn signum(&self) -> i32 {
        // sign(a + b√D), with c > 0 by the constructor.
        if self.b.is_zero() {
            return sign_to_i32(&self.a);
        }
        if self.a.is_zero() {
            return sign_to_i32(&self.b);
        }
        let sa = sign_to_i32(&self.a);
        let sb = sign_to_i32(&self.b);
        if sa == sb {
            return sa;
        }
        // Opposite signs: the larger of a² and b²·D wins.
        let lhs = &self.a * &self.a;
        let rhs = &self.b * &self.b * &self.d;
        match lhs.cmp(&rhs) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.signum() == 0
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn cmp_int(&self, n: &BigInt) -> Ordering {
        match self.sub_int(n).signum() {
            x if x < 0 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }

    /// Exact floor.  A float supplies the initial guess; the exact integer
    /// predicate walks it to the true value.
    pub fn floor(&self) -> BigInt {
        let approx = self.to_f64();
        let mut t = BigInt::from(approx.floor() as i64);
        while self.cmp_int(&t) == Ordering::Less {
            t -= 1;
        }
        loop {
            let next = &t + 1;
            if self.cmp_int(&next) != Ordering::Less {
                t = next;
            } else {
                break;
            }
        }
        t
    }

    /// Distance to the nearest integer, exact.
    pub fn dist_to_nearest_int(&self) -> RealQuadratic {
        let f = self.floor();
        let frac = self.sub_int(&f);
        let comp = frac.neg().add_rational(&BigRational::one());
        if frac.cmp(&comp) == Ordering::Less {
            frac
        } else {
            comp
        }
    }

    pub fn cmp(&self, other: &RealQuadratic) -> Ordering {
        // Only same-radicand comparisons are needed here.
        assert!(
            self.d == other.d || self.b.is_zero() || other.b.is_zero(),
            "comparison across different radicands"
        );
        let d = if self.b.is_zero() { other.d.clone() } else { self.d.clone() };
        let diff = RealQuadratic::new(
            &self.a * &other.c - &other.a * &self.c,
            &self.b * &other.c - &other.b * &self.c,
            &self.c * &other.c,
            d,
        );
        match diff.signum() {
            x if x < 0 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(0.0);
        let b = self.b.to_f64().unwrap_or(0.0);
        let c = self.c.to_f64().unwrap_or(1.0);
        let d = self.d.to_f64().unwrap_or(0.0);
        (a + b * d.sqrt()) / c
    }

    /// Partial quotients of the continued fraction of `x ∈ (0, 1)`:
    /// `x = [0; a₁, a₂, …]`.  Requires `x` irrational.
    pub fn cf_partial_quotients(&self, count: usize) -> Vec<BigInt> {
        assert!(!self.is_rational(), "partial quotient stream needs an irrational");
        assert!(
            self.signum() > 0 && self.cmp_int(&BigInt::one()) == Ordering::Less,
            "expected x in (0, 1)"
        );
        // Bring x = (a + b√D)/c to the form (P + √N)/Q with Q | N − P².
        let scale = &self.b.abs() * &self.c.abs();
        let mut p = &self.a * &scale;
        let n_rad = &self.b * &self.b * &self.d * &self.c * &self.c;
        let mut q = &self.c * &scale;
        if self.b.is_negative() {
            p = -p;
            q = -q;
        }
        debug_assert!(((&n_rad - &p * &p) % &q).is_zero());
        // Invert once (the integer part of x is 0 by the range check):
        // 1/((P+√N)/Q) = (−P + √N) / ((N − P²)/Q).
        let q_inv = (&n_rad - &p * &p) / &q;
        p = -p;
        q = q_inv;
        // Standard surd recurrence on ξ = (P + √N)/Q ≥ 1:
        //   a = ⌊ξ⌋;  P ← aQ − P;  Q ← (N − P²)/Q.
        let mut digits = Vec::with_capacity(count);
        while digits.len() < count {
            let value = RealQuadratic::new(p.clone(), BigInt::one(), q.clone(), n_rad.clone());
            let a = value.floor();
            digits.push(a.clone());
            p = &a * &q - &p;
            q = (&n_rad - &p * &p) / &q;
        }
        digits
    }
}

fn sign_to_i32(n: &BigInt) -> i32 {
    if n.is_zero() {
        0
    } else if n.is_negative() {
        -1
    } else {
        1
    }
}

impl fmt::Display for RealQuadratic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            write!(f, "{}/{}", self.a, self.c)
        } else {
            write!(f, "({} + {}·√{})/{}", self.a, self.b, self.d, self.c)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_ratio_floor_and_sign() {
        let phi = RealQuadratic::golden_ratio();
        assert_eq!(phi.floor(), BigInt::one());
        assert_eq!(phi.signum(), 1);
        assert_eq!(phi.conjugate().signum(), -1);
    }

    #[test]
    fn cf_digits_of_golden_fraction_are_all_ones() {
        // φ − 1 = (−1 + √5)/2 ∈ (0, 1) has quotients 1, 1, 1, …
        let x = RealQuadratic::golden_ratio().sub_int(&BigInt::one());
        let digits = x.cf_partial_quotients(12);
        assert!(digits.iter().all(|d| d == &BigInt::one()));
    }

    #[test]
    fn cf_digits_of_sqrt2_minus_1_are_all_twos() {
        let x = RealQuadratic::sqrt2_minus_1();
        let digits = x.cf_partial_quotients(12);
        assert!(digits.iter().all(|d| d == &BigInt::from(2)));
    }

    #[test]
    fn nearest_int_distance_is_exact() {
        // √2 ≈ 1.414: distance √2 − 1.
        let x = RealQuadratic::new(BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::from(2));
        let d = x.dist_to_nearest_int();
        assert_eq!(d.cmp(&RealQuadratic::sqrt2_minus_1()), Ordering::Equal);
        // 5·√2 ≈ 7.07: distance 5√2 − 7.
        let d5 = x.mul_int(&BigInt::from(5)).dist_to_nearest_int();
        let expected =
            RealQuadratic::new(BigInt::from(-7), BigInt::from(5), BigInt::one(), BigInt::from(2));
        assert_eq!(d5.cmp(&expected), Ordering::Equal);
    }

    #[test]
    fn disguised_rationals_collapse() {
        // (1 + 2√9)/1 = 7.
        let x = RealQuadratic::new(BigInt::one(), BigInt::from(2), BigInt::one(), BigInt::from(9));
        assert!(x.is_rational());
        assert_eq!(x.as_rational().unwrap(), BigRational::from_integer(7.into()));
    }

    #[test]
    fn floor_handles_negative_values() {
        let x = RealQuadratic::golden_ratio().neg();
        assert_eq!(x.floor(), BigInt::from(-2));
    }
}
