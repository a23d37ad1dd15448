//! Exact positive magnitudes of the form `c · p^(t/2)` with `c` rational.
//!
//! The theorem bounds mix integers (`m`, `κ`, `2`, `p`) with pure powers of
//! `p` coming from [`crate::ExtVal`] quantities, and square roots introduce
//! half-integer exponents.  Comparisons square both sides, so every verdict
//! inequality is decided in exact rational arithmetic.

use crate::padic::ExtVal;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

/// `coeff · p^(twice_exp / 2)` with `coeff > 0`, or exact zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Magnitude {
    p: u64,
    coeff: BigRational,
    twice_exp: i64,
}

impl Magnitude {
    pub fn zero(p: u64) -> Self {
        Magnitude {
            p,
            coeff: BigRational::zero(),
            twice_exp: 0,
        }
    }

    pub fn new(p: u64, coeff: BigRational, twice_exp: i64) -> Self {
        assert!(!coeff.is_negative(), "magnitudes are non-negative");
        if coeff.is_zero() {
            return Self::zero(p);
        }
        Magnitude {
            p,
            coeff,
            twice_exp,
        }
    }

    pub fn from_extval(p: u64, v: &ExtVal) -> Self {
        match v.twice_exp() {
            None => Self::zero(p),
            Some(t) => Magnitude {
                p,
                coeff: BigRational::one(),
                twice_exp: -t,
            },
        }
    }

    pub fn from_u64(p: u64, n: u64) -> Self {
        Self::new(p, BigRational::from_integer(BigInt::from(n)), 0)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn coeff(&self) -> &BigRational {
        &self.coeff
    }

    pub fn twice_exp(&self) -> i64 {
        self.twice_exp
    }

    pub fn mul(&self, other: &Magnitude) -> Magnitude {
        assert_eq!(self.p, other.p, "magnitudes over different primes");
        Magnitude::new(
            self.p,
            &self.coeff * &other.coeff,
            self.twice_exp + other.twice_exp,
        )
    }

    pub fn div(&self, other: &Magnitude) -> Magnitude {
        assert!(!other.is_zero(), "division by zero magnitude");
        assert_eq!(self.p, other.p);
        Magnitude::new(
            self.p,
            &self.coeff / &other.coeff,
            self.twice_exp - other.twice_exp,
        )
    }

    /// The square: always has an integer power of `p`.
    pub fn square(&self) -> Magnitude {
        self.mul(self)
    }

    /// Exact value as a rational when the exponent is even.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        if self.twice_exp % 2 != 0 {
            return None;
        }
        let e = self.twice_exp / 2;
        let pb = BigInt::from(self.p);
        let scale = if e >= 0 {
            BigRational::from_integer(pb.pow(e as u32))
        } else {
            BigRational::new(BigInt::one(), pb.pow((-e) as u32))
        };
        Some(&self.coeff * scale)
    }

    /// Largest integer `m ≥ 0` with `m ≤ self`, for exact bound extraction.
    pub fn floor_int(&self) -> BigInt {
        if self.is_zero() {
            return BigInt::zero();
        }
        if self.twice_exp % 2 == 0 {
            return self.as_rational().unwrap().floor().to_integer().max(BigInt::zero());
        }
        // m ≤ c·p^(t/2)  ⟺  m² ≤ c²·p^t (everything non-negative): isqrt.
        let sq = self.square().as_rational().unwrap();
        if sq.is_negative() || sq.is_zero() {
            return BigInt::zero();
        }
        sq.floor().to_integer().sqrt()
    }

    pub fn to_f64(&self) -> f64 {
        let c = self.coeff.to_f64().unwrap_or(f64::NAN);
        c * (self.p as f64).powf(self.twice_exp as f64 / 2.0)
    }

    /// Exact serialisation: coefficient and the exponent string.
    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let exp = ExtVal::from_half_exp(-self.twice_exp).render();
        if self.coeff.is_one() {
            exp
        } else if exp == "1" {
            format!("{}", self.coeff)
        } else {
            format!("{}*{}", self.coeff, exp)
        }
    }
}

impl PartialOrd for Magnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Magnitude {
    fn cmp(&self, other: &Self) -> Ordering {
        assert_eq!(self.p, other.p, "magnitudes over different primes");
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        // Compare c₁²·p^t₁ with c₂²·p^t₂ exactly.
        let lhs = self.square().as_rational().unwrap();
        let rhs = other.square().as_rational().unwrap();
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_squares_out_half_powers() {
        // 2·11^(1/2) vs 7: 4·11 = 44 < 49.
        let a = Magnitude::new(11, BigRational::from_integer(2.into()), 1);
        let b = Magnitude::from_u64(11, 7);
        assert!(a < b);
        assert_eq!(a.render(), "2*p^1/2");
    }

    #[test]
    fn floor_int_handles_half_exponents() {
        // 3·5^(1/2) ≈ 6.7 → 6.
        let m = Magnitude::new(5, BigRational::from_integer(3.into()), 1);
        assert_eq!(m.floor_int(), BigInt::from(6));
        // 5^2 = 25 exactly.
        let m = Magnitude::new(5, BigRational::one(), 4);
        assert_eq!(m.floor_int(), BigInt::from(25));
    }

    #[test]
    fn zero_is_least() {
        let z = Magnitude::zero(5);
        let one = Magnitude::from_u64(5, 1);
        assert!(z < one);
        assert_eq!(z.render(), "0");
    }
}
