//! Quadratic extensions `Q_p(ω)` with `ω² = Δ`.
//!
//! Two representations live here:
//!
//! * [`QuadExt`] — truncated coordinates `a + b·ω` with [`PAdic`]
//!   coefficients, the working type for projective points.  Extended
//!   valuations may be half-integers when the extension is ramified.
//! * [`RatQuad`] — exact rational coordinate pairs, used internally where
//!   the algebra keeps values exact (eigenvalue powers, κ scans, the
//!   logarithm series).  Its valuation goes through the field norm and is
//!   always exact.
//!
//! Elements with `b = 0` are field-agnostic embeddings of `Q_p`; mixing two
//! genuinely quadratic elements over different Δ is a usage error.

use crate::padic::{
    bigint_valuation, reduce_rational_mod, ExtVal, PAdic, PadicError, Result,
};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

/// Does `n` have a square root in `Q_p`?  Exact integer test: even
/// valuation and the unit part a residue square (`≡ 1 mod 8` for `p = 2`).
pub fn is_padic_square(n: &BigInt, p: u64) -> bool {
    if n.is_zero() {
        return true;
    }
    if n.is_negative() && false {
        unreachable!()
    }
    let v = bigint_valuation(n, p).unwrap();
    if v % 2 != 0 {
        return false;
    }
    let pb = BigInt::from(p);
    let mut unit = n / pb.pow(v as u32);
    if p == 2 {
        let r = unit.mod_floor(&BigInt::from(8)).to_u64().unwrap();
        return r == 1;
    }
    unit = unit.mod_floor(&pb);
    if unit.is_zero() {
        return false;
    }
    let e = (p - 1) / 2;
    unit.modpow(&BigInt::from(e), &pb).is_one()
}

/// Strip the square part: `n = s² · sf` with `sf` square-free (up to a
/// trial-division bound; any remaining square factor beyond the bound is
/// harmless, it only affects the canonical choice of ω).
pub fn strip_square_part(n: &BigInt) -> (BigInt, BigInt) {
    if n.is_zero() {
        return (BigInt::one(), BigInt::zero());
    }
    let mut s = BigInt::one();
    let mut rest = n.clone();
    let sign = if rest.is_negative() {
        rest = -rest;
        -BigInt::one()
    } else {
        BigInt::one()
    };
    let mut d = BigInt::from(2);
    let bound = BigInt::from(100_000u32);
    while &d * &d <= rest && d <= bound {
        let dd = &d * &d;
        while (&rest % &dd).is_zero() {
            rest /= &dd;
            s *= &d;
        }
        d += 1;
    }
    // Whole-square remainder (cheap isqrt check).
    let r = rest.sqrt();
    if &r * &r == rest {
        s *= &r;
        rest = BigInt::one();
    }
    (s, sign * rest)
}

// ---------------------------------------------------------------------------
// Exact rational coordinate pairs.
// ---------------------------------------------------------------------------

/// `a + b·ω` with exact rational coordinates (`ω² = Δ` supplied per call).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatQuad {
    pub a: BigRational,
    pub b: BigRational,
}

impl RatQuad {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        RatQuad { a, b }
    }

    pub fn from_int(n: i64) -> Self {
        RatQuad {
            a: BigRational::from_integer(BigInt::from(n)),
            b: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn add(&self, o: &RatQuad) -> RatQuad {
        RatQuad::new(&self.a + &o.a, &self.b + &o.b)
    }

    pub fn sub(&self, o: &RatQuad) -> RatQuad {
        RatQuad::new(&self.a - &o.a, &self.b - &o.b)
    }

    pub fn mul(&self, o: &RatQuad, delta: &BigInt) -> RatQuad {
        let d = BigRational::from_integer(delta.clone());
        RatQuad::new(
            &self.a * &o.a + &d * &self.b * &o.b,
            &self.a * &o.b + &self.b * &o.a,
        )
    }

    pub fn conj(&self) -> RatQuad {
        RatQuad::new(self.a.clone(), -self.b.clone())
    }

    /// Field norm `a² − Δ·b²` (exact).
    pub fn field_norm(&self, delta: &BigInt) -> BigRational {
        let d = BigRational::from_integer(delta.clone());
        &self.a * &self.a - d * &self.b * &self.b
    }

    pub fn inv(&self, delta: &BigInt) -> Option<RatQuad> {
        let n = self.field_norm(delta);
        if n.is_zero() {
            return None;
        }
        Some(RatQuad::new(&self.a / &n, -&self.b / &n))
    }

    pub fn pow(&self, e: u64, delta: &BigInt) -> RatQuad {
        let mut acc = RatQuad::one();
        let mut sq = self.clone();
        let mut n = e;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&sq, delta);
            }
            sq = sq.mul(&sq, delta);
            n >>= 1;
        }
        acc
    }

    /// Twice the extended valuation, via the field norm (exact; `None` for
    /// zero).  Requires Δ to be a non-square in `Q_p` (a genuine field).
    pub fn valuation_twice(&self, delta: &BigInt, p: u64) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let n = self.field_norm(delta);
        debug_assert!(!n.is_zero(), "norm of nonzero element in a field");
        let v = bigint_valuation(n.numer(), p).unwrap() - bigint_valuation(n.denom(), p).unwrap();
        Some(v)
    }

    /// Truncate to a [`QuadExt`] with both coordinates at relative
    /// precision `prec` (coordinates that are exactly zero stay exact).
    pub fn to_quadext(&self, p: u64, prec: u32, delta: &BigInt) -> QuadExt {
        let a = PAdic::from_rational(p, prec, &self.a).expect("nonzero denominator");
        let b = PAdic::from_rational(p, prec, &self.b).expect("nonzero denominator");
        QuadExt::new(delta.clone(), a, b)
    }
}

/// `log z` for an exact pair `z = 1 + u`, summed exactly in `Q(ω)` and
/// reduced coordinate-wise modulo `p^target_abs`.
///
/// `u` must satisfy `|u|_p < 1`.  Coordinates of the result whose exact sum
/// vanishes below the target precision come back as exact zero; the
/// discrepancy is below the declared precision.
pub fn log_exact(u: &RatQuad, delta: &BigInt, p: u64, target_abs: i64) -> Result<QuadExt> {
    let twice_t = match u.valuation_twice(delta, p) {
        None => {
            // log 1 = 0 exactly.
            return Ok(QuadExt::from_base(PAdic::zero(p)));
        }
        Some(t) => t,
    };
    if twice_t <= 0 {
        return Err(PadicError::LogDomain);
    }
    // Terms beyond N have valuation ≥ target: n·t − v_p(n) ≥ A once
    // n ≥ (A + 64)/t (v_p(n) ≤ log₂ n ≤ 64 in reach).
    let n_stop = ((2 * target_abs + 128) / twice_t + 1).max(4);
    let mut sum = RatQuad::new(BigRational::zero(), BigRational::zero());
    let mut power = RatQuad::one();
    for n in 1..=n_stop {
        power = power.mul(u, delta);
        let t = BigRational::new(BigInt::one(), BigInt::from(n));
        let term = RatQuad::new(&power.a * &t, &power.b * &t);
        if n % 2 == 1 {
            sum = sum.add(&term);
        } else {
            sum = sum.sub(&term);
        }
    }
    let reduce = |q: &BigRational| -> Result<PAdic> {
        if q.is_zero() {
            return Ok(PAdic::zero(p));
        }
        match reduce_rational_mod(q, p, target_abs) {
            Ok((val, unit, prec)) => Ok(PAdic::from_unit(p, prec, unit, val)),
            Err(PadicError::Cancelled { .. }) => Ok(PAdic::zero(p)),
            Err(e) => Err(e),
        }
    };
    Ok(QuadExt::new(delta.clone(), reduce(&sum.a)?, reduce(&sum.b)?))
}

// ---------------------------------------------------------------------------
// Truncated elements.
// ---------------------------------------------------------------------------

/// `a + b·ω` with truncated coordinates; `ω² = Δ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadExt {
    delta: BigInt,
    a: PAdic,
    b: PAdic,
}

impl QuadExt {
    pub fn new(delta: BigInt, a: PAdic, b: PAdic) -> Self {
        assert_eq!(a.prime(), b.prime(), "coordinate primes must match");
        assert!(
            !(delta.is_zero() && !b.is_zero()),
            "Δ = 0 is reserved for base-field embeddings"
        );
        QuadExt { delta, a, b }
    }

    /// Embed an element of `Q_p` (field-agnostic: compatible with any Δ).
    pub fn from_base(a: PAdic) -> Self {
        let p = a.prime();
        QuadExt {
            delta: BigInt::zero(),
            a,
            b: PAdic::zero(p),
        }
    }

    pub fn zero(p: u64) -> Self {
        Self::from_base(PAdic::zero(p))
    }

    pub fn one(p: u64, prec: u32) -> Self {
        Self::from_base(PAdic::one(p, prec))
    }

    pub fn prime(&self) -> u64 {
        self.a.prime()
    }

    pub fn delta(&self) -> &BigInt {
        &self.delta
    }

    pub fn coord_a(&self) -> &PAdic {
        &self.a
    }

    pub fn coord_b(&self) -> &PAdic {
        &self.b
    }

    pub fn is_base(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Base-field part when `b = 0`.
    pub fn as_base(&self) -> Option<&PAdic> {
        if self.is_base() {
            Some(&self.a)
        } else {
            None
        }
    }

    /// Minimum absolute precision over the inexact coordinates (`None` when
    /// every coordinate is exact).
    pub fn abs_precision(&self) -> Option<i64> {
        match (self.a.abs_precision(), self.b.abs_precision()) {
            (None, None) => None,
            (Some(x), None) => Some(x),
            (None, Some(y)) => Some(y),
            (Some(x), Some(y)) => Some(x.min(y)),
        }
    }

    /// Minimum relative precision over the nonzero coordinates.
    pub fn rel_precision(&self) -> Option<u32> {
        let pa = (!self.a.is_zero()).then(|| self.a.precision());
        let pb = (!self.b.is_zero()).then(|| self.b.precision());
        match (pa, pb) {
            (None, None) => None,
            (Some(x), None) => Some(x),
            (None, Some(y)) => Some(y),
            (Some(x), Some(y)) => Some(x.min(y)),
        }
    }

    fn common_delta(&self, other: &QuadExt) -> Result<BigInt> {
        match (self.is_base(), other.is_base()) {
            (true, true) => Ok(if self.delta.is_zero() {
                other.delta.clone()
            } else {
                self.delta.clone()
            }),
            (true, false) => Ok(other.delta.clone()),
            (false, true) => Ok(self.delta.clone()),
            (false, false) => {
                if self.delta == other.delta {
                    Ok(self.delta.clone())
                } else {
                    Err(PadicError::Mismatch(format!(
                        "quadratic extensions √{} and √{}",
                        self.delta, other.delta
                    )))
                }
            }
        }
    }

    /// Assemble coordinates, degrading an unresolvable coordinate to exact
    /// zero only when the sibling provably dominates it.
    fn assemble(
        p: u64,
        delta: BigInt,
        ra: Result<PAdic>,
        rb: Result<PAdic>,
        v_delta: i64,
    ) -> Result<QuadExt> {
        match (ra, rb) {
            (Ok(a), Ok(b)) => Ok(QuadExt::new(delta, a, b)),
            (Err(PadicError::Cancelled { known_below }), Ok(b)) => {
                match b.valuation() {
                    // ω-part resolvable and strictly dominant: the a part is
                    // below the declared precision.
                    Some(vb) if 2 * vb + v_delta < 2 * known_below => {
                        Ok(QuadExt::new(delta, PAdic::zero(p), b))
                    }
                    _ => Err(PadicError::Cancelled { known_below }),
                }
            }
            (Ok(a), Err(PadicError::Cancelled { known_below })) => match a.valuation() {
                Some(va) if 2 * va < 2 * known_below + v_delta => {
                    Ok(QuadExt::new(delta, a, PAdic::zero(p)))
                }
                _ => Err(PadicError::Cancelled { known_below }),
            },
            (Err(PadicError::Cancelled { known_below: x }), Err(PadicError::Cancelled { known_below: y })) => {
                Err(PadicError::Cancelled {
                    known_below: x.min(y),
                })
            }
            (Err(e), _) | (_, Err(e)) => Err(e),
        }
    }

    pub fn add(&self, other: &QuadExt) -> Result<QuadExt> {
        let delta = self.common_delta(other)?;
        let vd = delta_valuation(&delta, self.prime());
        Self::assemble(
            self.prime(),
            delta,
            self.a.add(&other.a),
            self.b.add(&other.b),
            vd,
        )
    }

    pub fn neg(&self) -> QuadExt {
        QuadExt {
            delta: self.delta.clone(),
            a: self.a.neg(),
            b: self.b.neg(),
        }
    }

    pub fn sub(&self, other: &QuadExt) -> Result<QuadExt> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &QuadExt) -> Result<QuadExt> {
        let delta = self.common_delta(other)?;
        let p = self.prime();
        let vd = delta_valuation(&delta, p);
        // (a₁a₂ + Δ·b₁b₂) + (a₁b₂ + b₁a₂)ω
        let cross = if self.b.is_zero() || other.b.is_zero() {
            PAdic::zero(p)
        } else {
            let prec = self
                .b
                .precision()
                .min(other.b.precision())
                .max(1);
            let d = PAdic::from_bigint(p, prec, &delta);
            self.b.mul(&other.b)?.mul(&d)?
        };
        let ra = self.a.mul(&other.a)?.add(&cross);
        let rb = {
            let t1 = self.a.mul(&other.b)?;
            let t2 = self.b.mul(&other.a)?;
            t1.add(&t2)
        };
        Self::assemble(p, delta, ra, rb, vd)
    }

    /// The nontrivial automorphism `σ(a + bω) = a − bω`.
    pub fn conj(&self) -> QuadExt {
        QuadExt {
            delta: self.delta.clone(),
            a: self.a.clone(),
            b: self.b.neg(),
        }
    }

    /// Field norm `x·σ(x) = a² − Δb²` as a base element.
    pub fn field_norm(&self) -> Result<PAdic> {
        let p = self.prime();
        if self.b.is_zero() {
            return self.a.mul(&self.a);
        }
        let bsq = self.b.mul(&self.b)?;
        let d = PAdic::from_bigint(p, bsq.precision().max(1), &self.delta);
        self.a.mul(&self.a)?.sub(&d.mul(&bsq)?)
    }

    pub fn inv(&self) -> Result<QuadExt> {
        if self.is_zero() {
            return Err(PadicError::DivisionByZero);
        }
        if self.is_base() {
            return Ok(QuadExt {
                delta: self.delta.clone(),
                a: self.a.inv()?,
                b: self.b.clone(),
            });
        }
        let n = self.field_norm()?;
        let n_inv = n.inv()?;
        Ok(QuadExt {
            delta: self.delta.clone(),
            a: self.a.mul(&n_inv)?,
            b: self.b.neg().mul(&n_inv)?,
        })
    }

    pub fn div(&self, other: &QuadExt) -> Result<QuadExt> {
        self.mul(&other.inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<QuadExt> {
        if e == 0 {
            return Ok(QuadExt::one(self.prime(), 1));
        }
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc: Option<QuadExt> = None;
        let mut sq = base;
        let mut n = e.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                acc = Some(match acc {
                    None => sq.clone(),
                    Some(a) => a.mul(&sq)?,
                });
            }
            n >>= 1;
            if n > 0 {
                sq = sq.mul(&sq)?;
            }
        }
        Ok(acc.unwrap())
    }

    /// `|x|_p` as an [`ExtVal`] (half-integer exponents in ramified
    /// extensions).  Falls back to the field norm when the two parts share
    /// the same size and cancellation is possible.
    pub fn norm(&self) -> Result<ExtVal> {
        let p = self.prime();
        if self.is_zero() {
            return Ok(ExtVal::Zero);
        }
        let vd = delta_valuation(&self.delta, p);
        match (self.a.valuation(), self.b.valuation()) {
            (Some(va), None) => Ok(ExtVal::from_exp(va)),
            (None, Some(vb)) => Ok(ExtVal::from_half_exp(2 * vb + vd)),
            (Some(va), Some(vb)) => {
                let ta = 2 * va;
                let tb = 2 * vb + vd;
                if ta != tb {
                    Ok(ExtVal::from_half_exp(ta.min(tb)))
                } else {
                    // Same size: |x|² = |a² − Δb²| (exact in a field).
                    let n = self.field_norm()?;
                    match n.valuation() {
                        None => Ok(ExtVal::Zero),
                        Some(v) => Ok(ExtVal::from_half_exp(v)),
                    }
                }
            }
            (None, None) => unreachable!("zero handled above"),
        }
    }

    /// `|x − y|_p`.
    pub fn dist(&self, other: &QuadExt) -> Result<ExtVal> {
        self.sub(other)?.norm()
    }

    /// p-adic logarithm via the exact series on canonical representatives.
    /// Requires `|x − 1|_p < 1`.
    pub fn log(&self) -> Result<QuadExt> {
        let target = self.abs_precision().unwrap_or(i64::MAX / 2);
        let u = RatQuad::new(
            self.a.representative() - BigRational::one(),
            self.b.representative(),
        );
        if u.is_zero() {
            return Ok(QuadExt::from_base(PAdic::zero(self.prime())));
        }
        let delta = if self.is_base() && self.delta.is_zero() {
            BigInt::one()
        } else {
            self.delta.clone()
        };
        log_exact(&u, &delta, self.prime(), target)
    }
}

pub(crate) fn delta_valuation(delta: &BigInt, p: u64) -> i64 {
    if delta.is_zero() {
        0
    } else {
        bigint_valuation(delta, p).unwrap()
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_base() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "({}) + ({})·√{}", self.a, self.b, self.delta)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn qe(p: u64, k: u32, delta: i64, a: i64, b: i64) -> QuadExt {
        QuadExt::new(
            BigInt::from(delta),
            PAdic::from_i64(p, k, a),
            PAdic::from_i64(p, k, b),
        )
    }

    #[test]
    fn norm_of_unit_in_q11_sqrt3() {
        // x = 2 + ω, Δ = 3: field norm 4 − 3 = 1, |x| = 1.
        let x = qe(11, 6, 3, 2, 1);
        assert_eq!(x.field_norm().unwrap().int_representative().unwrap(), BigInt::one());
        assert_eq!(x.norm().unwrap(), ExtVal::one());
    }

    #[test]
    fn conjugation_is_an_involution() {
        let x = qe(11, 6, 3, 2, 5);
        assert_eq!(x.conj().conj(), x);
        // conj(a + bω) = a − bω.
        assert_eq!(x.conj().coord_b().neg(), *x.coord_b());
    }

    #[test]
    fn ramified_valuations_are_half_integers() {
        // Δ = 11: |ω| = 11^(-1/2).
        let omega = qe(11, 6, 11, 0, 1);
        assert_eq!(omega.norm().unwrap(), ExtVal::from_half_exp(1));
        assert_eq!(omega.norm().unwrap().exp_denominator(), 2);
    }

    #[test]
    fn two_adic_same_size_parts_fall_back_to_norm() {
        // 1 + √3 over Q_2: norm 1 − 3 = −2, so |1 + √3| = 2^(-1/2).
        let x = qe(2, 8, 3, 1, 1);
        assert_eq!(x.norm().unwrap(), ExtVal::from_half_exp(1));
    }

    #[test]
    fn delta_mixing_is_an_error() {
        let x = qe(5, 4, 2, 1, 1);
        let y = qe(5, 4, 3, 1, 1);
        assert!(matches!(x.add(&y), Err(PadicError::Mismatch(_))));
        // Base elements adopt the other operand's extension.
        let z = QuadExt::from_base(PAdic::from_i64(5, 4, 7));
        assert!(x.add(&z).is_ok());
    }

    #[test]
    fn log_exact_matches_base_field_log() {
        // log on a base-field embedding agrees with PAdic::log.
        let p = 5u64;
        let x = PAdic::from_i64(p, 8, 6);
        let lx = x.log().unwrap();
        let xe = QuadExt::from_base(x);
        let l = xe.log().unwrap();
        assert!(l.is_base());
        assert_eq!(l.as_base().unwrap().valuation(), lx.valuation());
        assert_eq!(
            l.as_base().unwrap().unit_residue() % num_bigint::BigUint::from(p).pow(6),
            lx.unit_residue() % num_bigint::BigUint::from(p).pow(6)
        );
    }

    #[test]
    fn strip_square_part_normalizes_discriminants() {
        // 12 = 2²·3.
        let (s, sf) = strip_square_part(&BigInt::from(12));
        assert_eq!((s, sf), (BigInt::from(2), BigInt::from(3)));
        let (s, sf) = strip_square_part(&BigInt::from(-48));
        assert_eq!((s, sf), (BigInt::from(4), BigInt::from(-3)));
    }

    #[test]
    fn padic_square_detection() {
        assert!(is_padic_square(&BigInt::from(5), 11)); // 4² ≡ 5 (mod 11)
        assert!(!is_padic_square(&BigInt::from(2), 11));
        assert!(!is_padic_square(&BigInt::from(11), 11)); // odd valuation
        assert!(is_padic_square(&BigInt::from(17), 2)); // 17 ≡ 1 (mod 8)
        assert!(!is_padic_square(&BigInt::from(12), 2)); // 12/4 = 3 ≢ 1 (mod 8)
    }

    proptest! {
        #[test]
        fn x_times_inv_x_is_one(a in -50i64..50, b in -50i64..50) {
            prop_assume!(a != 0 || b != 0);
            // Δ = 2 is a non-square in Q_11, so the norm never cancels.
            let x = qe(11, 8, 2, a, b);
            prop_assume!(!x.is_zero());
            if let Ok(inv) = x.inv() {
                let prod = x.mul(&inv).unwrap();
                let one = QuadExt::one(11, 8);
                let d = prod.dist(&one);
                match d {
                    Ok(v) => prop_assert!(v <= ExtVal::from_exp(6)),
                    Err(PadicError::Cancelled{known_below}) => prop_assert!(known_below >= 6),
                    Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
                }
            }
        }

        #[test]
        fn norm_is_multiplicative_on_extension(a1 in -20i64..20, b1 in -20i64..20,
                                               a2 in -20i64..20, b2 in -20i64..20) {
            prop_assume!((a1, b1) != (0, 0) && (a2, b2) != (0, 0));
            let x = qe(5, 10, 2, a1, b1); // 2 is a non-square in Q_5
            let y = qe(5, 10, 2, a2, b2);
            let lhs = x.mul(&y).unwrap().norm().unwrap();
            let rhs = x.norm().unwrap().mul(&y.norm().unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn rat_quad_agrees_with_truncated(a in -30i64..30, b in -30i64..30, e in 1u64..6) {
            prop_assume!((a, b) != (0, 0));
            let delta = BigInt::from(3);
            let r = RatQuad::new(
                BigRational::from_integer(a.into()),
                BigRational::from_integer(b.into()),
            );
            let rp = r.pow(e, &delta);
            let x = qe(11, 12, 3, a, b);
            let xp = x.pow(e as i64).unwrap();
            let back = rp.to_quadext(11, 12, &delta);
            // Same value up to the truncated precision.
            let d = back.dist(&xp);
            match d {
                Ok(v) => prop_assert!(v <= ExtVal::from_exp(6)),
                Err(PadicError::Cancelled{..}) => {},
                Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
            }
        }
    }
}
