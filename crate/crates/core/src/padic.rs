//! Truncated-precision elements of `Q_p` and their exact absolute values.
//!
//! A nonzero element is stored as `unit · p^valuation` where `unit` is a
//! residue coprime to `p` known modulo `p^prec` (`prec ≥ 1` retained
//! digits).  The represented value is therefore known modulo
//! `p^(valuation + prec)`.  Exact zero is the only element with infinite
//! valuation.  Operations track precision; an addition whose retained
//! digits cancel completely reports [`PadicError::Cancelled`] instead of
//! inventing a value.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

/// Errors raised by the exact kernel.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PadicError {
    /// All retained digits of a sum cancelled: the result is `≡ 0 mod
    /// p^known_below` and cannot be resolved at the working precision.
    #[error("value indistinguishable from zero below p^{known_below}")]
    Cancelled { known_below: i64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("p-adic logarithm requires |x - 1|_p < 1")]
    LogDomain,
    #[error("insufficient precision: {0}")]
    Precision(String),
    #[error("operands belong to different fields: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, PadicError>;

// ---------------------------------------------------------------------------
// ExtVal: exact absolute values p^(-e) with e an integer, a half-integer or +∞.
// ---------------------------------------------------------------------------

/// An exact p-adic absolute value `p^(-e)` with `e ∈ (1/2)·Z ∪ {+∞}`.
///
/// `ExtVal` records only the exponent (the prime is contextual).  `Zero`
/// encodes `|0| = 0`, i.e. exponent `+∞`.  Ordering is by magnitude:
/// `Zero` is the smallest value and larger exponents mean smaller values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtVal {
    Zero,
    /// `|x| = p^(-(twice_exp / 2))`.
    Finite { twice_exp: i64 },
}

impl ExtVal {
    pub fn zero() -> Self {
        ExtVal::Zero
    }

    pub fn one() -> Self {
        ExtVal::Finite { twice_exp: 0 }
    }

    /// `p^(-e)` for an integer exponent `e`.
    pub fn from_exp(e: i64) -> Self {
        ExtVal::Finite { twice_exp: 2 * e }
    }

    /// `p^(-t/2)`.
    pub fn from_half_exp(t: i64) -> Self {
        ExtVal::Finite { twice_exp: t }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtVal::Zero)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, ExtVal::Finite { twice_exp: 0 })
    }

    /// Twice the exponent `e` of `p^(-e)`; `None` for zero.
    pub fn twice_exp(&self) -> Option<i64> {
        match self {
            ExtVal::Zero => None,
            ExtVal::Finite { twice_exp } => Some(*twice_exp),
        }
    }

    /// Denominator of the exponent (1 or 2 per the half-integer encoding).
    pub fn exp_denominator(&self) -> u8 {
        match self.twice_exp() {
            Some(t) if t % 2 != 0 => 2,
            _ => 1,
        }
    }

    pub fn mul(&self, other: &ExtVal) -> ExtVal {
        match (self.twice_exp(), other.twice_exp()) {
            (Some(a), Some(b)) => ExtVal::Finite { twice_exp: a + b },
            _ => ExtVal::Zero,
        }
    }

    pub fn recip(&self) -> Option<ExtVal> {
        self.twice_exp().map(|t| ExtVal::Finite { twice_exp: -t })
    }

    pub fn pow(&self, n: i64) -> ExtVal {
        match self.twice_exp() {
            Some(t) => ExtVal::Finite { twice_exp: t * n },
            None => ExtVal::Zero,
        }
    }

    /// Render with an explicit prime, e.g. `p^-3`, `p^-7/2`, `1`, `0`.
    /// The literal letter `p` is kept so exponent strings are uniform
    /// across records; the prime itself is always part of the record.
    pub fn render(&self) -> String {
        match self.twice_exp() {
            None => "0".to_string(),
            Some(0) => "1".to_string(),
            Some(t) if t % 2 == 0 => format!("p^{}", -t / 2),
            Some(t) => format!("p^{}/2", -t),
        }
    }

    /// Decimal approximation for human-readable columns.
    pub fn to_f64(&self, p: u64) -> f64 {
        match self.twice_exp() {
            None => 0.0,
            Some(t) => (p as f64).powf(-(t as f64) / 2.0),
        }
    }
}

impl PartialOrd for ExtVal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtVal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.twice_exp(), other.twice_exp()) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            // p^(-a/2) < p^(-b/2)  iff  a > b
            (Some(a), Some(b)) => b.cmp(&a),
        }
    }
}

impl fmt::Display for ExtVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

// ---------------------------------------------------------------------------
// PAdic
// ---------------------------------------------------------------------------

/// An element of `Q_p` at finite working precision.
///
/// Invariants: `unit ∈ [1, p^prec)`, `p ∤ unit`, and the represented value
/// `unit · p^val` is known modulo `p^(val + prec)`.  `val == None` encodes
/// exact zero (infinite valuation).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PAdic {
    p: u64,
    prec: u32,
    val: Option<i64>,
    unit: BigUint,
}

impl PAdic {
    // -- constructors -------------------------------------------------------

    pub fn zero(p: u64) -> Self {
        assert!(p >= 2, "prime must be at least 2");
        PAdic {
            p,
            prec: 0,
            val: None,
            unit: BigUint::zero(),
        }
    }

    pub fn one(p: u64, prec: u32) -> Self {
        Self::from_bigint(p, prec, &BigInt::one())
    }

    /// Embed an exact integer at relative precision `prec`.
    pub fn from_bigint(p: u64, prec: u32, n: &BigInt) -> Self {
        assert!(p >= 2 && prec >= 1, "need p ≥ 2 and at least one digit");
        if n.is_zero() {
            return Self::zero(p);
        }
        let pb = BigUint::from(p);
        let mut mag = n.magnitude().clone();
        let mut val: i64 = 0;
        loop {
            let (q, r) = mag.div_rem(&pb);
            if r.is_zero() {
                mag = q;
                val += 1;
            } else {
                break;
            }
        }
        let modulus = pb.pow(prec);
        let mut unit = mag % &modulus;
        if n.is_negative() {
            unit = &modulus - unit;
        }
        PAdic {
            p,
            prec,
            val: Some(val),
            unit,
        }
    }

    pub fn from_i64(p: u64, prec: u32, n: i64) -> Self {
        Self::from_bigint(p, prec, &BigInt::from(n))
    }

    /// Embed an exact rational `num/den` (`den ≠ 0`).
    pub fn from_ratio(p: u64, prec: u32, num: &BigInt, den: &BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(PadicError::DivisionByZero);
        }
        let n = Self::from_bigint(p, prec, num);
        let d = Self::from_bigint(p, prec, den);
        n.div(&d)
    }

    pub fn from_rational(p: u64, prec: u32, q: &BigRational) -> Result<Self> {
        Self::from_ratio(p, prec, q.numer(), q.denom())
    }

    /// Assemble from a unit residue and a valuation.  The residue is reduced
    /// modulo `p^prec` and must stay coprime to `p`.
    pub fn from_unit(p: u64, prec: u32, unit: BigUint, val: i64) -> Self {
        assert!(prec >= 1);
        let modulus = BigUint::from(p).pow(prec);
        let unit = unit % &modulus;
        assert!(
            !(unit.clone() % BigUint::from(p)).is_zero() && !unit.is_zero(),
            "unit residue must be coprime to p"
        );
        PAdic {
            p,
            prec,
            val: Some(val),
            unit,
        }
    }

    // -- accessors ----------------------------------------------------------

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// Retained unit digits (0 for exact zero, where it is meaningless).
    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// `None` means exact zero (valuation `+∞`).
    pub fn valuation(&self) -> Option<i64> {
        self.val
    }

    /// Absolute precision: the value is known modulo `p^abs`.  `None` for
    /// exact zero (known exactly).
    pub fn abs_precision(&self) -> Option<i64> {
        self.val.map(|v| v + self.prec as i64)
    }

    pub fn unit_residue(&self) -> &BigUint {
        &self.unit
    }

    pub fn is_zero(&self) -> bool {
        self.val.is_none()
    }

    pub fn is_one(&self) -> bool {
        self.val == Some(0) && self.unit.is_one()
    }

    /// `|x|_p` as an exact power of `p`.
    pub fn norm(&self) -> ExtVal {
        match self.val {
            None => ExtVal::Zero,
            Some(v) => ExtVal::from_exp(v),
        }
    }

    /// The canonical representative `unit · p^val` as an exact rational.
    pub fn representative(&self) -> BigRational {
        match self.val {
            None => BigRational::zero(),
            Some(v) => {
                let u = BigInt::from(self.unit.clone());
                let pb = BigInt::from(self.p);
                if v >= 0 {
                    BigRational::from_integer(u * pb.pow(v as u32))
                } else {
                    BigRational::new(u, pb.pow((-v) as u32))
                }
            }
        }
    }

    /// Canonical integer representative; `None` when the valuation is
    /// negative (the representative is not a p-adic integer).
    pub fn int_representative(&self) -> Option<BigInt> {
        match self.val {
            None => Some(BigInt::zero()),
            Some(v) if v >= 0 => {
                Some(BigInt::from(self.unit.clone()) * BigInt::from(self.p).pow(v as u32))
            }
            _ => None,
        }
    }

    fn modulus(&self) -> BigUint {
        BigUint::from(self.p).pow(self.prec)
    }

    fn check_prime(&self, other: &PAdic) -> Result<()> {
        if self.p != other.p {
            return Err(PadicError::Mismatch(format!(
                "primes {} and {}",
                self.p, other.p
            )));
        }
        Ok(())
    }

    /// Drop retained digits down to `prec` (never raises precision).
    pub fn reduce_precision(&self, prec: u32) -> PAdic {
        assert!(prec >= 1);
        if self.is_zero() || prec >= self.prec {
            return self.clone();
        }
        let modulus = BigUint::from(self.p).pow(prec);
        PAdic {
            p: self.p,
            prec,
            val: self.val,
            unit: &self.unit % &modulus,
        }
    }

    // -- arithmetic ----------------------------------------------------------

    pub fn neg(&self) -> PAdic {
        if self.is_zero() {
            return self.clone();
        }
        let m = self.modulus();
        PAdic {
            p: self.p,
            prec: self.prec,
            val: self.val,
            unit: &m - &self.unit,
        }
    }

    pub fn add(&self, other: &PAdic) -> Result<PAdic> {
        self.check_prime(other)?;
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let vx = self.val.unwrap();
        let vy = other.val.unwrap();
        let v0 = vx.min(vy);
        // The sum is known modulo p^a with a = min of the absolute precisions.
        let a = self.abs_precision().unwrap().min(other.abs_precision().unwrap());
        debug_assert!(v0 < a);
        let digits = (a - v0) as u32;
        let pb = BigUint::from(self.p);
        let modulus = pb.pow(digits);
        let sx = (&self.unit * pb.pow((vx - v0) as u32)) % &modulus;
        let sy = (&other.unit * pb.pow((vy - v0) as u32)) % &modulus;
        let s = (sx + sy) % &modulus;
        if s.is_zero() {
            return Err(PadicError::Cancelled { known_below: a });
        }
        let mut mag = s;
        let mut extra: i64 = 0;
        loop {
            let (q, r) = mag.div_rem(&pb);
            if r.is_zero() {
                mag = q;
                extra += 1;
            } else {
                break;
            }
        }
        let val = v0 + extra;
        let prec = (a - val) as u32;
        debug_assert!(prec >= 1);
        Ok(PAdic {
            p: self.p,
            prec,
            val: Some(val),
            unit: mag % pb.pow(prec),
        })
    }

    pub fn sub(&self, other: &PAdic) -> Result<PAdic> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &PAdic) -> Result<PAdic> {
        self.check_prime(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(PAdic::zero(self.p));
        }
        let prec = self.prec.min(other.prec);
        let modulus = BigUint::from(self.p).pow(prec);
        Ok(PAdic {
            p: self.p,
            prec,
            val: Some(self.val.unwrap() + other.val.unwrap()),
            unit: (&self.unit * &other.unit) % modulus,
        })
    }

    pub fn inv(&self) -> Result<PAdic> {
        match self.val {
            None => Err(PadicError::DivisionByZero),
            Some(v) => {
                let modulus = self.modulus();
                let unit = mod_inverse(&self.unit, &modulus)
                    .expect("unit residue is invertible by construction");
                Ok(PAdic {
                    p: self.p,
                    prec: self.prec,
                    val: Some(-v),
                    unit,
                })
            }
        }
    }

    pub fn div(&self, other: &PAdic) -> Result<PAdic> {
        self.mul(&other.inv()?)
    }

    /// Multiply by `p^e`.
    pub fn shift(&self, e: i64) -> PAdic {
        match self.val {
            None => self.clone(),
            Some(v) => PAdic {
                p: self.p,
                prec: self.prec,
                val: Some(v + e),
                unit: self.unit.clone(),
            },
        }
    }

    pub fn pow(&self, e: i64) -> Result<PAdic> {
        if e == 0 {
            return Ok(PAdic::one(self.p, self.prec.max(1)));
        }
        if self.is_zero() {
            if e < 0 {
                return Err(PadicError::DivisionByZero);
            }
            return Ok(self.clone());
        }
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = PAdic::one(self.p, self.prec);
        let mut sq = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&sq)?;
            }
            sq = sq.mul(&sq)?;
            n >>= 1;
        }
        Ok(acc)
    }

    /// `|x - y|_p`; [`PadicError::Cancelled`] when the difference cannot be
    /// resolved at the working precision.
    pub fn dist(&self, other: &PAdic) -> Result<ExtVal> {
        Ok(self.sub(other)?.norm())
    }

    // -- Hensel square roots --------------------------------------------------

    /// Square root to working precision when one exists in `Q_p`.
    ///
    /// `Ok(None)` means provably no root (odd valuation, or the unit part is
    /// a non-square in the residue ring).  For `p = 2` the criterion is
    /// `unit ≡ 1 (mod 8)` and at least 3 retained digits are required.
    /// Sign convention: the root whose unit residue has least representative
    /// `≤ (p^prec − 1)/2`.
    pub fn sqrt(&self) -> Result<Option<PAdic>> {
        let v = match self.val {
            None => return Ok(Some(self.clone())),
            Some(v) => v,
        };
        if v % 2 != 0 {
            return Ok(None);
        }
        let p = self.p;
        let pb = BigUint::from(p);
        if p == 2 {
            if self.prec < 3 {
                return Err(PadicError::Precision(
                    "need at least 3 digits to decide 2-adic squares (mod 8 test)".into(),
                ));
            }
            let u8_res = (&self.unit % BigUint::from(8u32)).to_u64().unwrap();
            if u8_res != 1 {
                return Ok(None);
            }
            // Lift digit by digit: s² ≡ u (mod 2^t); the root is determined
            // modulo 2^(prec−1).
            let mut s = BigUint::one();
            for t in 3..self.prec {
                let m_next = BigUint::from(2u32).pow(t + 1);
                if (&s * &s) % &m_next != &self.unit % &m_next {
                    s += BigUint::from(2u32).pow(t - 1);
                }
            }
            let out_prec = self.prec - 1;
            let m_out = BigUint::from(2u32).pow(out_prec);
            let s = s % &m_out;
            let s = canonical_sign(s, &m_out, 2);
            return Ok(Some(PAdic {
                p,
                prec: out_prec,
                val: Some(v / 2),
                unit: s,
            }));
        }
        // Odd p: Euler criterion then Newton lifting.
        let u_mod_p = &self.unit % &pb;
        let legendre = u_mod_p.modpow(&((&pb - 1u32) / 2u32), &pb);
        if !legendre.is_one() {
            return Ok(None);
        }
        let mut s = tonelli_shanks(&u_mod_p, p);
        let mut t: u32 = 1;
        let two_inv_cache = |m: &BigUint| mod_inverse(&BigUint::from(2u32), m).unwrap();
        while t < self.prec {
            t = (2 * t).min(self.prec);
            let m = pb.pow(t);
            let s_inv = mod_inverse(&(&s % &m), &m).expect("odd unit is invertible");
            let u_t = &self.unit % &m;
            s = ((&s + u_t * s_inv) % &m) * two_inv_cache(&m) % &m;
        }
        let m_out = self.modulus();
        let s = canonical_sign(s % &m_out, &m_out, p);
        Ok(Some(PAdic {
            p,
            prec: self.prec,
            val: Some(v / 2),
            unit: s,
        }))
    }

    // -- p-adic logarithm ------------------------------------------------------

    /// `log x = Σ (−1)^(n−1) (x−1)^n / n`, defined for `|x − 1|_p < 1`.
    ///
    /// The series is summed in exact rational arithmetic on the canonical
    /// representative and reduced modulo `p^A` where `A` is the input's
    /// absolute precision; guard terms absorb the valuation lost to the
    /// divisions by `n`.
    pub fn log(&self) -> Result<PAdic> {
        if self.val != Some(0) {
            // |x| ≠ 1 forces |x − 1| = max(|x|, 1) ≥ 1.
            return Err(PadicError::LogDomain);
        }
        if self.unit.is_one() {
            return Ok(PAdic::zero(self.p));
        }
        let a_target = self.abs_precision().unwrap();
        let u = BigInt::from(self.unit.clone()) - BigInt::one();
        let a = bigint_valuation(&u, self.p).expect("unit ≠ 1 here");
        if a < 1 {
            return Err(PadicError::LogDomain);
        }
        if a >= a_target {
            return Err(PadicError::Cancelled {
                known_below: a_target,
            });
        }
        let sum = log_series_rational(&u, self.p, a, a_target);
        let (val, unit, prec) = reduce_rational_mod(&sum, self.p, a_target)?;
        Ok(PAdic {
            p: self.p,
            prec,
            val: Some(val),
            unit,
        })
    }
}

impl fmt::Display for PAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.val {
            None => write!(f, "0"),
            Some(v) => write!(
                f,
                "{}*{}^{} + O({}^{})",
                self.unit,
                self.p,
                v,
                self.p,
                v + self.prec as i64
            ),
        }
    }
}

// ---------------------------------------------------------------------------
// Shared helpers (also used by the quadratic extension).
// ---------------------------------------------------------------------------

/// v_p(n) for a nonzero integer.
pub(crate) fn bigint_valuation(n: &BigInt, p: u64) -> Option<i64> {
    if n.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut m = n.abs();
    let mut v = 0i64;
    loop {
        let (q, r) = m.div_rem(&pb);
        if r.is_zero() {
            m = q;
            v += 1;
        } else {
            return Some(v);
        }
    }
}

/// Sum `log(1 + u)` truncated so that every discarded term has valuation
/// `≥ a_target`; `a = v_p(u) ≥ 1`.
pub(crate) fn log_series_rational(u: &BigInt, p: u64, a: i64, a_target: i64) -> BigRational {
    let mut sum = BigRational::zero();
    let mut power = BigInt::one();
    let mut n: i64 = 0;
    loop {
        n += 1;
        power *= u;
        let term = BigRational::new(power.clone(), BigInt::from(n));
        if n % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
        // Safe truncation: every m > n satisfies m·a − v_p(m) ≥ a_target once
        // (n+1)·a − ⌊log_p n⌋ and the next p-power checkpoint both clear it.
        let e_n = ilog_floor(n as u64, p);
        let next_power = (p as i64).checked_pow(e_n + 1).unwrap_or(i64::MAX);
        if (n + 1) * a - e_n as i64 >= a_target
            && next_power.saturating_mul(a) - (e_n as i64 + 1) >= a_target
        {
            return sum;
        }
    }
}

fn ilog_floor(n: u64, p: u64) -> u32 {
    let mut e = 0;
    let mut acc = p;
    while acc <= n {
        e += 1;
        acc = acc.saturating_mul(p);
    }
    e
}

/// Write a nonzero rational as `unit · p^val` with the unit reduced modulo
/// `p^(a_target − val)`; `Cancelled` when no digit below `a_target` survives.
pub(crate) fn reduce_rational_mod(
    q: &BigRational,
    p: u64,
    a_target: i64,
) -> Result<(i64, BigUint, u32)> {
    if q.is_zero() {
        return Err(PadicError::Cancelled {
            known_below: a_target,
        });
    }
    let vn = bigint_valuation(q.numer(), p).unwrap();
    let vd = bigint_valuation(q.denom(), p).unwrap();
    let val = vn - vd;
    if val >= a_target {
        return Err(PadicError::Cancelled {
            known_below: a_target,
        });
    }
    let prec = (a_target - val) as u32;
    let pb = BigInt::from(p);
    let modulus = BigInt::from(p).to_biguint().unwrap().pow(prec);
    let num_unit = (q.numer() / pb.pow(vn as u32)).mod_floor(&BigInt::from(modulus.clone()));
    let den_unit = (q.denom() / pb.pow(vd as u32)).mod_floor(&BigInt::from(modulus.clone()));
    let den_inv = mod_inverse(&den_unit.to_biguint().unwrap(), &modulus).unwrap();
    let unit = (num_unit.to_biguint().unwrap() * den_inv) % &modulus;
    Ok((val, unit, prec))
}

/// Modular inverse by extended Euclid; `None` when not coprime.
pub(crate) fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let a = BigInt::from(a.clone());
    let m_int = BigInt::from(m.clone());
    let ext = a.extended_gcd(&m_int);
    if !ext.gcd.is_one() {
        return None;
    }
    Some(ext.x.mod_floor(&m_int).to_biguint().unwrap())
}

/// Pick the root whose base-level residue is least: mod `p` for odd `p`
/// (mod 8 for `p = 2`).  Stable under precision increase, so eigenvalue
/// labelling does not flip when `k` grows.
fn canonical_sign(s: BigUint, m: &BigUint, p: u64) -> BigUint {
    let neg = m - &s;
    let base = BigUint::from(if p == 2 { 8u64 } else { p });
    let rs = &s % &base;
    let rn = &neg % &base;
    if rs <= rn {
        s
    } else {
        neg
    }
}

/// Square root of a quadratic residue modulo an odd prime.
fn tonelli_shanks(n: &BigUint, p: u64) -> BigUint {
    let pb = BigUint::from(p);
    if n.is_zero() {
        return BigUint::zero();
    }
    if p % 4 == 3 {
        return n.modpow(&((&pb + 1u32) / 4u32), &pb);
    }
    // Factor p − 1 = q·2^s with q odd.
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    // Find a non-residue z.
    let mut z = 2u64;
    loop {
        let e = BigUint::from(z).modpow(&BigUint::from((p - 1) / 2), &pb);
        if !e.is_one() {
            break;
        }
        z += 1;
    }
    let mut m = s;
    let mut c = BigUint::from(z).modpow(&BigUint::from(q), &pb);
    let mut t = n.modpow(&BigUint::from(q), &pb);
    let mut r = n.modpow(&BigUint::from((q + 1) / 2), &pb);
    while !t.is_one() {
        // Least i with t^(2^i) = 1.
        let mut i = 0u32;
        let mut tt = t.clone();
        while !tt.is_one() {
            tt = (&tt * &tt) % &pb;
            i += 1;
        }
        let b = c.modpow(&BigUint::from(2u64).pow(m - i - 1), &pb);
        m = i;
        c = (&b * &b) % &pb;
        t = (t * &c) % &pb;
        r = (r * b) % &pb;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn padic(p: u64, k: u32, n: i64) -> PAdic {
        PAdic::from_i64(p, k, n)
    }

    #[test]
    fn norm_of_single_p_factor() {
        // x = p at p = 5: |x| = 5^-1.
        let x = padic(5, 4, 5);
        assert_eq!(x.norm(), ExtVal::from_exp(1));
        assert_eq!(x.norm().render(), "p^-1");
    }

    #[test]
    fn norm_of_zero_is_zero() {
        assert_eq!(PAdic::zero(5).norm(), ExtVal::Zero);
        assert_eq!(ExtVal::Zero.render(), "0");
    }

    #[test]
    fn representative_round_trip() {
        let x = PAdic::from_ratio(3, 6, &BigInt::from(7), &BigInt::from(9)).unwrap();
        assert_eq!(x.valuation(), Some(-2));
        // 7/9 = 7·3^-2: unit 7.
        assert_eq!(x.unit_residue(), &BigUint::from(7u32));
    }

    #[test]
    fn addition_tracks_cancellation() {
        let x = padic(5, 4, 26); // 26 = 1 + 25
        let y = padic(5, 4, 1);
        let d = x.sub(&y).unwrap();
        assert_eq!(d.valuation(), Some(2)); // 25 = 5²
        // Full cancellation reports the unresolved threshold.
        let e = x.sub(&x);
        assert_eq!(e, Err(PadicError::Cancelled { known_below: 4 }));
    }

    #[test]
    fn exact_zero_operand_is_absorbing() {
        let z = PAdic::zero(7);
        let x = padic(7, 5, 10);
        assert!(x.mul(&z).unwrap().is_zero());
        assert_eq!(x.add(&z).unwrap(), x);
        assert!(z.sub(&z).unwrap().is_zero());
    }

    #[test]
    fn hensel_sqrt_examples() {
        // 4² ≡ 5 (mod 11): canonical root of 5 in Q_11 at one digit.
        let d = padic(11, 1, 5);
        let r = d.sqrt().unwrap().unwrap();
        assert_eq!(r.unit_residue(), &BigUint::from(4u32));
        // Odd valuation never a square.
        assert!(padic(11, 4, 11).sqrt().unwrap().is_none());
        // Rational square, canonical sign picks 3 over p^k − 3.
        let nine = padic(11, 6, 9);
        let r = nine.sqrt().unwrap().unwrap();
        assert_eq!(r.int_representative().unwrap(), BigInt::from(3));
    }

    #[test]
    fn hensel_sqrt_p2_criterion() {
        // 17 ≡ 1 (mod 8) is a 2-adic square; 5 is not.
        let x = padic(2, 8, 17);
        let r = x.sqrt().unwrap().unwrap();
        let rr = r.mul(&r).unwrap();
        assert_eq!(rr.dist(&x).t_unwrap_cancel(7), ExtVal::Zero);
        assert!(padic(2, 8, 5).sqrt().unwrap().is_none());
        assert!(matches!(
            padic(2, 2, 17).sqrt(),
            Err(PadicError::Precision(_))
        ));
    }

    // Small helper for tests: treat Cancelled{>= bound} as exact zero.
    trait CancelExt {
        fn t_unwrap_cancel(self, min_abs: i64) -> ExtVal;
    }
    impl CancelExt for Result<ExtVal> {
        fn t_unwrap_cancel(self, min_abs: i64) -> ExtVal {
            match self {
                Ok(v) => v,
                Err(PadicError::Cancelled { known_below }) => {
                    assert!(known_below >= min_abs, "resolved only below p^{known_below}");
                    ExtVal::Zero
                }
                Err(e) => panic!("unexpected {e}"),
            }
        }
    }

    #[test]
    fn log_of_one_is_exactly_zero() {
        assert!(PAdic::one(5, 6).log().unwrap().is_zero());
    }

    #[test]
    fn log_norm_matches_first_term() {
        // |log(1+p)| = |p| at p = 5.
        let x = padic(5, 6, 6);
        let l = x.log().unwrap();
        assert_eq!(l.norm(), ExtVal::from_exp(1));
    }

    #[test]
    fn log_value_matches_independent_series_oracle() {
        // Independent oracle: partial sums of Σ(−1)^(n−1) 5^n/n over Q until
        // terms vanish mod 5^6, reduced p-adically.
        let p = 5u64;
        let k = 6u32;
        let mut sum = BigRational::zero();
        let u = BigInt::from(5);
        let mut pw = BigInt::one();
        for n in 1..=12i64 {
            pw *= &u;
            let t = BigRational::new(pw.clone(), BigInt::from(n));
            if n % 2 == 1 {
                sum += t;
            } else {
                sum -= t;
            }
        }
        let (val, unit, _) = reduce_rational_mod(&sum, p, k as i64).unwrap();
        let x = padic(p, k, 6);
        let l = x.log().unwrap();
        assert_eq!(l.valuation(), Some(val));
        assert_eq!(l.unit_residue() % BigUint::from(p).pow(4), unit % BigUint::from(p).pow(4));
    }

    #[test]
    fn log_domain_is_enforced() {
        assert_eq!(padic(5, 4, 2).log(), Err(PadicError::LogDomain));
        assert_eq!(padic(5, 4, 5).log(), Err(PadicError::LogDomain));
    }

    #[test]
    fn extval_ordering_and_rendering() {
        let small = ExtVal::from_exp(3); // p^-3
        let big = ExtVal::from_exp(-1); // p^1
        assert!(small < big);
        assert!(ExtVal::Zero < small);
        assert_eq!(ExtVal::from_half_exp(7).render(), "p^-7/2");
        assert_eq!(ExtVal::from_half_exp(7).exp_denominator(), 2);
        assert_eq!(ExtVal::one().render(), "1");
    }

    proptest! {
        #[test]
        fn ultrametric_inequality(a in -2000i64..2000, b in -2000i64..2000) {
            let p = 3u64;
            let x = padic(p, 8, a);
            let y = padic(p, 8, b);
            if let Ok(s) = x.add(&y) {
                prop_assert!(s.norm() <= x.norm().max(y.norm()));
                if x.norm() != y.norm() {
                    prop_assert_eq!(s.norm(), x.norm().max(y.norm()));
                }
            }
        }

        #[test]
        fn norm_is_multiplicative(a in 1i64..5000, b in 1i64..5000) {
            let p = 7u64;
            let x = padic(p, 6, a);
            let y = padic(p, 6, b);
            prop_assert_eq!(x.mul(&y).unwrap().norm(), x.norm().mul(&y.norm()));
        }

        #[test]
        fn sqrt_squares_back(u in 1u64..10_000, parity in 0i64..3) {
            for p in [3u64, 5, 11, 2] {
                let x = PAdic::from_i64(p, 9, u as i64).shift(2 * parity);
                if let Ok(Some(r)) = x.sqrt() {
                    let rr = r.mul(&r).unwrap();
                    let min_prec = rr.abs_precision().unwrap().min(x.abs_precision().unwrap());
                    match rr.sub(&x) {
                        Ok(d) => prop_assert!(d.norm() <= ExtVal::from_exp(min_prec)),
                        Err(PadicError::Cancelled{..}) => {}
                        Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
                    }
                }
            }
        }

        #[test]
        fn sqrt_absence_agrees_with_residue_scan(u in 1u64..2000) {
            // A root exists iff the scan over Z/p^min(k,3) finds a compatible
            // square (valuation parity already handled by construction).
            for p in [3u64, 5, 7] {
                let x = PAdic::from_i64(p, 6, u as i64);
                if x.valuation() != Some(0) { continue; }
                let m = p.pow(3);
                let target = (u % m) as u128;
                let found = (0..m as u128).any(|s| (s * s) % m as u128 == target % m as u128);
                prop_assert_eq!(x.sqrt().unwrap().is_some(), found);
            }
        }

        #[test]
        fn pow_matches_repeated_mul(a in 1i64..200, e in 1u32..6) {
            let p = 5u64;
            let x = padic(p, 8, a);
            let mut acc = PAdic::one(p, 8);
            for _ in 0..e { acc = acc.mul(&x).unwrap(); }
            prop_assert_eq!(x.pow(e as i64).unwrap(), acc);
        }
    }
}
