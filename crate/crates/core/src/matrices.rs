//! The continued-fraction matrix semigroup and its spectral data.
//!
//! Exact integer matrices are the source of truth; reductions mod `p^k`
//! are derived views, so discriminant-zero tests and square classification
//! never depend on working precision.  Word matrices are the products
//! `A_w = A_{a₁}···A_{aₙ}` of letter matrices `A_a = [[0,1],[1,a]]`; their
//! lower row carries the convergent denominators `(q_{n−1}, q_n)`.

use crate::padic::{bigint_valuation, ExtVal, PAdic, PadicError};
use crate::proj::ProjPoint;
use crate::quad::{is_padic_square, log_exact, strip_square_part, QuadExt, RatQuad};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatError {
    #[error("determinant must be ±1, found {0}")]
    NonUnitDet(BigInt),
    #[error("matrix is not semisimple (zero discriminant)")]
    NonSemisimple,
    #[error("matrix is outside the admissible class: {0}")]
    NotInTilde(String),
    #[error("modulus p^k does not fit in 64 bits (p = {p}, k = {k})")]
    ModulusOverflow { p: u64, k: u32 },
    #[error(transparent)]
    Arithmetic(#[from] PadicError),
    #[error(transparent)]
    Projective(#[from] crate::proj::ProjError),
}

pub type Result<T> = std::result::Result<T, MatError>;

// ---------------------------------------------------------------------------
// Exact integer matrices.
// ---------------------------------------------------------------------------

/// A 2×2 matrix over arbitrary-precision integers, row-major `[a, b, c, d]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IMat2 {
    e: [BigInt; 4],
}

impl IMat2 {
    pub fn new(e: [BigInt; 4]) -> Self {
        IMat2 { e }
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Self {
        IMat2 {
            e: [a.into(), b.into(), c.into(), d.into()],
        }
    }

    pub fn identity() -> Self {
        Self::from_i64(1, 0, 0, 1)
    }

    pub fn entries(&self) -> &[BigInt; 4] {
        &self.e
    }

    pub fn mul(&self, o: &IMat2) -> IMat2 {
        let [a, b, c, d] = &self.e;
        let [e, f, g, h] = &o.e;
        IMat2::new([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }

    pub fn det(&self) -> BigInt {
        &self.e[0] * &self.e[3] - &self.e[1] * &self.e[2]
    }

    pub fn trace(&self) -> BigInt {
        &self.e[0] + &self.e[3]
    }

    pub fn transpose(&self) -> IMat2 {
        IMat2::new([
            self.e[0].clone(),
            self.e[2].clone(),
            self.e[1].clone(),
            self.e[3].clone(),
        ])
    }

    pub fn pow(&self, mut n: u64) -> IMat2 {
        let mut acc = IMat2::identity();
        let mut sq = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&sq);
            }
            sq = sq.mul(&sq);
            n >>= 1;
        }
        acc
    }

    /// Exact inverse for determinant ±1 (adjugate divided by the det).
    pub fn inverse(&self) -> Result<IMat2> {
        let det = self.det();
        if !det.magnitude().is_one() {
            return Err(MatError::NonUnitDet(det));
        }
        let [a, b, c, d] = &self.e;
        let mut adj = [d.clone(), -b.clone(), -c.clone(), a.clone()];
        if det.is_negative() {
            for x in &mut adj {
                *x = -std::mem::take(x);
            }
        }
        Ok(IMat2::new(adj))
    }

    pub fn is_identity(&self) -> bool {
        self.e[0].is_one() && self.e[1].is_zero() && self.e[2].is_zero() && self.e[3].is_one()
    }

    /// Entrywise congruence mod `p^k`.
    pub fn congruent(&self, other: &IMat2, p: u64, k: u32) -> bool {
        let m = BigInt::from(p).pow(k);
        self.e
            .iter()
            .zip(other.e.iter())
            .all(|(x, y)| ((x - y) % &m).is_zero())
    }

    pub fn reduce(&self, p: u64, k: u32) -> Result<ResMat2> {
        let modulus = checked_modulus(p, k)?;
        let m = BigInt::from(modulus);
        let r = |x: &BigInt| x.mod_floor(&m).to_u64().unwrap();
        Ok(ResMat2 {
            modulus,
            e: [r(&self.e[0]), r(&self.e[1]), r(&self.e[2]), r(&self.e[3])],
        })
    }
}

impl fmt::Display for IMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.e[0], self.e[1], self.e[2], self.e[3]
        )
    }
}

/// `A_a = [[0, 1], [1, a]]`.
pub fn letter_matrix(a: u64) -> IMat2 {
    IMat2::new([
        BigInt::zero(),
        BigInt::one(),
        BigInt::one(),
        BigInt::from(a),
    ])
}

/// The unipotent `D_a = [[1, 0], [a, 1]]`.
pub fn unipotent(a: &BigInt) -> IMat2 {
    IMat2::new([BigInt::one(), BigInt::zero(), a.clone(), BigInt::one()])
}

/// `A_w = A_{a₁}···A_{aₙ}` (the empty word maps to the identity).
pub fn matrix_of_word(word: &[u8]) -> IMat2 {
    let mut acc = IMat2::identity();
    for &a in word {
        acc = acc.mul(&letter_matrix(a as u64));
    }
    acc
}

/// Consecutive convergent denominators `(q_{n−1}, q_n)` read off `A_{w_n}`.
pub fn convergent_denominators(word: &[u8]) -> (BigInt, BigInt) {
    let m = matrix_of_word(word);
    (m.entries()[2].clone(), m.entries()[3].clone())
}

/// Determinant of the commutator `AB − BA`; zero iff `A` and `B` share an
/// eigenvector in the algebraic closure.
pub fn commutator_det(a: &IMat2, b: &IMat2) -> BigInt {
    let ab = a.mul(b);
    let ba = b.mul(a);
    IMat2::new([
        &ab.e[0] - &ba.e[0],
        &ab.e[1] - &ba.e[1],
        &ab.e[2] - &ba.e[2],
        &ab.e[3] - &ba.e[3],
    ])
    .det()
}

// ---------------------------------------------------------------------------
// Residue matrices mod p^k.
// ---------------------------------------------------------------------------

pub(crate) fn checked_modulus(p: u64, k: u32) -> Result<u64> {
    let mut m: u64 = 1;
    for _ in 0..k {
        m = m.checked_mul(p).ok_or(MatError::ModulusOverflow { p, k })?;
    }
    Ok(m)
}

/// A 2×2 matrix over `Z/p^k`, the canonical homomorphic image φ_k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResMat2 {
    pub modulus: u64,
    pub e: [u64; 4],
}

impl ResMat2 {
    pub fn identity(modulus: u64) -> Self {
        ResMat2 {
            modulus,
            e: [1 % modulus, 0, 0, 1 % modulus],
        }
    }

    pub fn letter(a: u64, modulus: u64) -> Self {
        ResMat2 {
            modulus,
            e: [0, 1 % modulus, 1 % modulus, a % modulus],
        }
    }

    pub fn mul(&self, o: &ResMat2) -> ResMat2 {
        debug_assert_eq!(self.modulus, o.modulus);
        let m = self.modulus as u128;
        let a = |i: usize| self.e[i] as u128;
        let b = |i: usize| o.e[i] as u128;
        ResMat2 {
            modulus: self.modulus,
            e: [
                ((a(0) * b(0) + a(1) * b(2)) % m) as u64,
                ((a(0) * b(1) + a(1) * b(3)) % m) as u64,
                ((a(2) * b(0) + a(3) * b(2)) % m) as u64,
                ((a(2) * b(1) + a(3) * b(3)) % m) as u64,
            ],
        }
    }

    pub fn det(&self) -> u64 {
        let m = self.modulus as u128;
        let ad = (self.e[0] as u128 * self.e[3] as u128) % m;
        let bc = (self.e[1] as u128 * self.e[2] as u128) % m;
        ((ad + m - bc) % m) as u64
    }

    pub fn is_identity(&self) -> bool {
        *self == ResMat2::identity(self.modulus)
    }

    pub fn pow(&self, mut n: u64) -> ResMat2 {
        let mut acc = ResMat2::identity(self.modulus);
        let mut sq = *self;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&sq);
            }
            sq = sq.mul(&sq);
            n >>= 1;
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Eigen-decomposition over Q_p and its quadratic extensions.
// ---------------------------------------------------------------------------

/// Square class of the discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenClass {
    /// Δ is a square in `Q_p`: eigenvalues in `Q_p`.
    SplitDistinct,
    /// Δ is a non-square: eigenvalues in `Q_p(√Δ̃)`.
    QuadDistinct,
}

/// An eigenvalue, kept exact where the algebra allows.
#[derive(Debug, Clone)]
pub enum Eigenvalue {
    /// Hensel-lifted element of `Q_p` (exact when Δ is a perfect square).
    Split(PAdic),
    /// Exact coordinates `a + b·ω` with `ω² = delta_core`.
    Quad(RatQuad),
}

impl Eigenvalue {
    /// Materialize as a truncated extension element.
    pub fn to_quadext(&self, p: u64, prec: u32, delta_core: &BigInt) -> QuadExt {
        match self {
            Eigenvalue::Split(x) => QuadExt::from_base(x.clone()),
            Eigenvalue::Quad(r) => r.to_quadext(p, prec, delta_core),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenData {
    pub class: EigenClass,
    /// Raw discriminant `tr² − 4·det`.
    pub delta: BigInt,
    /// `delta = sqrt_factor² · delta_core` with the core square-free.
    pub delta_core: BigInt,
    pub sqrt_factor: BigInt,
    /// λ₁ is labelled by the canonical Hensel sign (split) or the positive
    /// ω-coefficient (quad); λ₂ is the other root.
    pub lambda1: Eigenvalue,
    pub lambda2: Eigenvalue,
    /// Normalized eigenvectors of `Aᵀ`, matching λ₁ and λ₂.
    pub v1: ProjPoint,
    pub v2: ProjPoint,
    pub kappa: u64,
    /// `|log λ₁^{4κ}|_p`; `Zero` exactly when an eigenvalue is a root of
    /// unity (the matrix then falls outside the admissible class).
    pub eps3: ExtVal,
    /// Half-integer valuations may occur (ramified extension).
    pub ramified: bool,
}

#[derive(Debug, Clone)]
pub enum EigenDecomposition {
    /// Zero discriminant: a single repeated eigenvector.
    NonSemisimple,
    Semisimple(Box<EigenData>),
}

/// Membership verdict for the admissible class (two distinct eigenvectors,
/// no root-of-unity eigenvalue).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TildeMembership {
    pub is_member: bool,
    pub reason: Option<String>,
}

/// Decide membership by exact integer data only.
///
/// A root-of-unity eigenvalue of a ±1-determinant matrix forces the
/// characteristic polynomial into a six-element list, checked on
/// `(tr, det)` directly; rational roots ±1 land in the same list.
pub fn in_tilde_sl(m: &IMat2) -> Result<TildeMembership> {
    let det = m.det();
    if !det.magnitude().is_one() {
        return Err(MatError::NonUnitDet(det));
    }
    let tr = m.trace();
    let delta = &tr * &tr - BigInt::from(4) * &det;
    if delta.is_zero() {
        return Ok(TildeMembership {
            is_member: false,
            reason: Some("zero discriminant (non-semisimple)".into()),
        });
    }
    let d = det.to_i64().unwrap();
    let unity = match (tr.to_i64(), d) {
        (Some(0), -1) => Some("x^2 - 1"),
        (Some(0), 1) => Some("x^2 + 1"),
        (Some(2), 1) => Some("x^2 - 2x + 1"),
        (Some(-2), 1) => Some("x^2 + 2x + 1"),
        (Some(1), 1) => Some("x^2 - x + 1"),
        (Some(-1), 1) => Some("x^2 + x + 1"),
        _ => None,
    };
    if let Some(poly) = unity {
        return Ok(TildeMembership {
            is_member: false,
            reason: Some(format!("eigenvalues are roots of unity ({poly})")),
        });
    }
    Ok(TildeMembership {
        is_member: true,
        reason: None,
    })
}

/// Guard digits used by the eigen pipeline on top of the caller precision.
const EIGEN_GUARD: u32 = 8;

/// Full spectral data of a ±1-determinant matrix at working precision `k`.
pub fn eigen_decompose(m: &IMat2, p: u64, k: u32) -> Result<EigenDecomposition> {
    let det = m.det();
    if !det.magnitude().is_one() {
        return Err(MatError::NonUnitDet(det));
    }
    let tr = m.trace();
    let delta = &tr * &tr - BigInt::from(4) * &det;
    if delta.is_zero() {
        return Ok(EigenDecomposition::NonSemisimple);
    }
    let (sqrt_factor, delta_core) = strip_square_part(&delta);
    let k_work = k + EIGEN_GUARD;

    let (class, lambda1, lambda2) = if is_padic_square(&delta, p) {
        let d_padic = PAdic::from_bigint(p, k_work + 2, &delta);
        let root = d_padic
            .sqrt()?
            .expect("square class certified by the exact integer test");
        let two = PAdic::from_i64(p, k_work + 2, 2);
        let tr_p = PAdic::from_bigint(p, k_work + 2, &tr);
        let l1 = padic_add_exact(&tr_p, &root, &tr)?.div(&two)?;
        let l2 = padic_add_exact(&tr_p, &root.neg(), &tr)?.div(&two)?;
        (
            EigenClass::SplitDistinct,
            Eigenvalue::Split(l1),
            Eigenvalue::Split(l2),
        )
    } else {
        // λ = (tr ± s·ω)/2 with ω² = delta_core; the +ω root is λ₁.
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let a = BigRational::from_integer(tr.clone()) * &half;
        let b = BigRational::from_integer(sqrt_factor.clone()) * &half;
        (
            EigenClass::QuadDistinct,
            Eigenvalue::Quad(RatQuad::new(a.clone(), b.clone())),
            Eigenvalue::Quad(RatQuad::new(a, -b)),
        )
    };

    let v1 = eigenvector_of_transpose(m, &lambda1, p, k_work, &delta_core)?;
    let v2 = eigenvector_of_transpose(m, &lambda2, p, k_work, &delta_core)?;

    let kappa = kappa_from_charpoly(&tr, &det, p)?;
    let tilde = in_tilde_sl(m)?;
    let eps3 = if tilde.is_member {
        eps3_value(&lambda1, kappa, p, k, &delta_core)?
    } else {
        ExtVal::Zero
    };

    let ramified = is_ramified_core(&delta_core, p);
    Ok(EigenDecomposition::Semisimple(Box::new(EigenData {
        class,
        delta,
        delta_core,
        sqrt_factor,
        lambda1,
        lambda2,
        v1,
        v2,
        kappa,
        eps3,
        ramified,
    })))
}

/// `tr ± root` where cancellation cannot hide an exact value: the sum is a
/// unit or near-unit; a full cancellation just means more digits are needed.
fn padic_add_exact(a: &PAdic, b: &PAdic, _context: &BigInt) -> Result<PAdic> {
    a.add(b).map_err(MatError::Arithmetic)
}

fn is_ramified_core(core: &BigInt, p: u64) -> bool {
    match bigint_valuation(core, p) {
        None => false,
        Some(v) if v % 2 != 0 => true,
        Some(_) => {
            if p == 2 {
                // Odd core: 5 mod 8 is the unramified class; 3, 7 ramify.
                let r = core.mod_floor(&BigInt::from(8)).to_u64().unwrap_or(0);
                r == 3 || r == 7
            } else {
                false
            }
        }
    }
}

/// Kernel vector of `Aᵀ − λ` from exact entries: `(c, λ − a)`, falling back
/// to `(λ − d, b)`, and to the axes for diagonal matrices.
fn eigenvector_of_transpose(
    m: &IMat2,
    lambda: &Eigenvalue,
    p: u64,
    k_work: u32,
    delta_core: &BigInt,
) -> Result<ProjPoint> {
    let [a, b, c, d] = m.entries();
    if c.is_zero() && b.is_zero() {
        // Diagonal: eigenvalues are a and d exactly (perfect-square Δ).
        let lam_rat = match lambda {
            Eigenvalue::Split(x) => x.representative(),
            Eigenvalue::Quad(_) => unreachable!("diagonal matrices split over Q"),
        };
        let modulus = BigInt::from(p).pow(k_work);
        let diff = lam_rat - BigRational::from_integer(a.clone());
        let is_a = diff.is_integer() && diff.to_integer().mod_floor(&modulus).is_zero();
        let axis = if is_a { (1, 0) } else { (0, 1) };
        return Ok(ProjPoint::from_ints(p, k_work, axis.0, axis.1)?);
    }
    let (u, v) = if !c.is_zero() {
        let lam_minus = eigen_sub_int(lambda, a, p, k_work, delta_core)?;
        (
            QuadExt::from_base(PAdic::from_bigint(p, k_work, c)),
            lam_minus,
        )
    } else {
        let lam_minus = eigen_sub_int(lambda, d, p, k_work, delta_core)?;
        (
            lam_minus,
            QuadExt::from_base(PAdic::from_bigint(p, k_work, b)),
        )
    };
    Ok(ProjPoint::normalize(u, v)?)
}

fn eigen_sub_int(
    lambda: &Eigenvalue,
    n: &BigInt,
    p: u64,
    k_work: u32,
    delta_core: &BigInt,
) -> Result<QuadExt> {
    match lambda {
        Eigenvalue::Split(x) => {
            // λ − n on representatives; precision stays honest relative to
            // what the lift actually knows about λ.
            let diff = x.representative() - BigRational::from_integer(n.clone());
            if diff.is_zero() {
                return Ok(QuadExt::from_base(PAdic::zero(p)));
            }
            let known_abs = x.abs_precision().unwrap_or(i64::MAX);
            let j = bigint_valuation(diff.numer(), p).unwrap()
                - bigint_valuation(diff.denom(), p).unwrap();
            if j >= known_abs {
                return Err(MatError::Arithmetic(PadicError::Cancelled {
                    known_below: known_abs,
                }));
            }
            let prec = (known_abs - j).min(k_work as i64).max(1) as u32;
            Ok(QuadExt::from_base(
                PAdic::from_rational(p, prec, &diff).expect("nonzero"),
            ))
        }
        Eigenvalue::Quad(r) => {
            let diff = RatQuad::new(&r.a - BigRational::from_integer(n.clone()), r.b.clone());
            Ok(diff.to_quadext(p, k_work, delta_core))
        }
    }
}

// ---------------------------------------------------------------------------
// κ(A) and ε₃(A).
// ---------------------------------------------------------------------------

/// Least `t ≥ 1` with `|λ^t − 1|_p ≤ p^{-1}` for both eigenvalues of
/// `x² − tr·x + det` (`det = ±1`).
///
/// For `p ∤ Δ` this is a residue-ring order (the quotient is étale).  When
/// `p | Δ` the étale shortcut is unsound — `Z_p[λ]/p` picks up nilpotents
/// and its unit order can differ from the defining property — so the
/// property is scanned directly; the `t ≤ p²` pigeonhole bound keeps the
/// scan finite.
pub fn kappa_from_charpoly(tr: &BigInt, det: &BigInt, p: u64) -> Result<u64> {
    let delta = tr * tr - BigInt::from(4) * det;
    if delta.is_zero() {
        return Err(MatError::NonSemisimple);
    }
    if bigint_valuation(&delta, p).unwrap() == 0 {
        return Ok(kappa_etale(tr, det, p, &delta));
    }
    kappa_scan(tr, det, p, &delta)
}

/// Convenience wrapper on a matrix.
pub fn kappa(m: &IMat2, p: u64) -> Result<u64> {
    let det = m.det();
    if !det.magnitude().is_one() {
        return Err(MatError::NonUnitDet(det));
    }
    kappa_from_charpoly(&m.trace(), &det, p)
}

fn kappa_etale(tr: &BigInt, det: &BigInt, p: u64, delta: &BigInt) -> u64 {
    let pb = BigInt::from(p);
    let tr_p = tr.mod_floor(&pb).to_u64().unwrap();
    let det_p = det.mod_floor(&pb).to_u64().unwrap();
    if p == 2 {
        // Units of Z_2 are ≡ 1 (mod 2): split roots satisfy the bound at
        // t = 1.  Inert (Δ ≡ 5 mod 8): order of x̄ in F_4*.
        return if is_padic_square(delta, 2) {
            1
        } else {
            fp2_order(tr_p, det_p, 2)
        };
    }
    if is_padic_square(delta, p) {
        // Two roots mod p: λ = (tr ± s)·2⁻¹; κ = lcm of their orders.
        let s = sqrt_mod_p(delta.mod_floor(&pb).to_u64().unwrap(), p);
        let inv2 = mod_pow(2 % p, p - 2, p);
        let r1 = (tr_p + s) % p * inv2 % p;
        let r2 = (tr_p + p - s) % p * inv2 % p;
        let o1 = unit_order_mod_p(r1, p);
        let o2 = unit_order_mod_p(r2, p);
        o1.lcm(&o2)
    } else {
        fp2_order(tr_p, det_p, p)
    }
}

/// Direct scan `t = 1 .. p²` of the defining property; only reached when
/// `p | Δ`.
fn kappa_scan(tr: &BigInt, _det: &BigInt, p: u64, delta: &BigInt) -> Result<u64> {
    let bound = p * p;
    if is_padic_square(delta, p) {
        const SCAN_PREC: u32 = 10;
        let d_padic = PAdic::from_bigint(p, SCAN_PREC, delta);
        let root = d_padic.sqrt()?.expect("certified square");
        let two = PAdic::from_i64(p, SCAN_PREC, 2);
        let lam = PAdic::from_bigint(p, SCAN_PREC, tr)
            .add(&root)
            .map_err(MatError::Arithmetic)?
            .div(&two)?;
        let one = PAdic::one(p, SCAN_PREC);
        let mut pw = lam.clone();
        for t in 1..=bound {
            let ok = match pw.sub(&one) {
                Ok(d) => matches!(d.valuation(), Some(v) if v >= 1),
                // Unresolved below the working precision: certainly ≥ 1.
                Err(PadicError::Cancelled { .. }) => true,
                Err(e) => return Err(e.into()),
            };
            if ok {
                return Ok(t);
            }
            pw = pw.mul(&lam)?;
        }
        unreachable!("t ≤ p² is a theorem");
    }
    // Exact coordinates in Q(√core): λ = (tr + s·ω)/2.
    let (s, core) = strip_square_part(delta);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let lam = RatQuad::new(
        BigRational::from_integer(tr.clone()) * &half,
        BigRational::from_integer(s) * &half,
    );
    let one = RatQuad::one();
    let mut pw = lam.clone();
    for t in 1..=bound {
        let diff = pw.sub(&one);
        let ok = match diff.valuation_twice(&core, p) {
            None => true, // λ^t = 1 exactly
            Some(tv) => tv >= 2,
        };
        if ok {
            return Ok(t);
        }
        pw = pw.mul(&lam, &core);
    }
    unreachable!("t ≤ p² is a theorem");
}

/// `ε₃ = |log(λ₁^{4κ})|_p`, computed through the logarithm and
/// cross-checked against `|λ₁^{4κ} − 1|_p` (equal by the isometry on this
/// domain; a mismatch would be an arithmetic bug).
fn eps3_value(
    lambda1: &Eigenvalue,
    kappa: u64,
    p: u64,
    k: u32,
    delta_core: &BigInt,
) -> Result<ExtVal> {
    let e = 4 * kappa;
    match lambda1 {
        Eigenvalue::Split(lam) => {
            let z = lam.pow(e as i64)?;
            let direct = z
                .sub(&PAdic::one(p, z.precision().max(1)))
                .map_err(MatError::Arithmetic)?
                .norm();
            let via_log = z.log()?.norm();
            assert_eq!(direct, via_log, "log isometry violated: arithmetic bug");
            Ok(via_log)
        }
        Eigenvalue::Quad(lam) => {
            let z = lam.pow(e, delta_core);
            let u = z.sub(&RatQuad::one());
            let direct = match u.valuation_twice(delta_core, p) {
                None => return Ok(ExtVal::Zero), // λ^{4κ} = 1 exactly
                Some(t) => ExtVal::from_half_exp(t),
            };
            // Resolve the log far enough past the valuation to read it off.
            let target = direct.twice_exp().unwrap() / 2 + 2 + k as i64;
            let lg = log_exact(&u, delta_core, p, target)?;
            let via_log = lg.norm()?;
            assert_eq!(direct, via_log, "log isometry violated: arithmetic bug");
            Ok(via_log)
        }
    }
}

/// Public ε₃ on a matrix in the admissible class.
pub fn eps3(m: &IMat2, p: u64, k: u32) -> Result<ExtVal> {
    let tilde = in_tilde_sl(m)?;
    if !tilde.is_member {
        return Err(MatError::NotInTilde(
            tilde.reason.unwrap_or_else(|| "excluded".into()),
        ));
    }
    match eigen_decompose(m, p, k)? {
        EigenDecomposition::NonSemisimple => unreachable!("membership check rules this out"),
        EigenDecomposition::Semisimple(data) => Ok(data.eps3),
    }
}

// -- residue-field order helpers ---------------------------------------------

fn mod_pow(b: u64, mut e: u64, m: u64) -> u64 {
    let mm = m as u128;
    let mut acc: u128 = 1;
    let mut bb = (b % m) as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % mm;
        }
        bb = bb * bb % mm;
        e >>= 1;
    }
    acc as u64
}

fn sqrt_mod_p(n: u64, p: u64) -> u64 {
    // κ only needs this for desk-scale primes; the scan is exact.
    (0..p).find(|s| s * s % p == n % p).expect("residue certified")
}

fn trial_factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn unit_order_mod_p(x: u64, p: u64) -> u64 {
    debug_assert!(x % p != 0);
    let mut order = p - 1;
    for (q, e) in trial_factor(p - 1) {
        for _ in 0..e {
            if mod_pow(x, order / q, p) == 1 {
                order /= q;
            } else {
                break;
            }
        }
    }
    order
}

/// Order of `x̄` in `(F_p[x]/(x² − tr·x + det))* = F_{p²}*`.
fn fp2_order(tr: u64, det: u64, p: u64) -> u64 {
    let mul = |u: (u64, u64), v: (u64, u64)| -> (u64, u64) {
        let pp = p as u128;
        let (a1, b1) = (u.0 as u128, u.1 as u128);
        let (a2, b2) = (v.0 as u128, v.1 as u128);
        // (a₁ + b₁x)(a₂ + b₂x) with x² = tr·x − det.
        let cross = b1 * b2 % pp;
        let a = (a1 * a2 + (pp - det as u128 % pp) % pp * cross) % pp;
        let b = (a1 * b2 + b1 * a2 + tr as u128 * cross) % pp;
        (a as u64, b as u64)
    };
    let pow = |mut base: (u64, u64), mut e: u64| -> (u64, u64) {
        let mut acc = (1u64, 0u64);
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, base);
            }
            base = mul(base, base);
            e >>= 1;
        }
        acc
    };
    let x = (0u64, 1u64);
    let group = p * p - 1;
    let mut order = group;
    for (q, e) in trial_factor(group) {
        for _ in 0..e {
            if pow(x, order / q) == (1, 0) {
                order /= q;
            } else {
                break;
            }
        }
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_letter_matrix() {
        let m = matrix_of_word(&[1]);
        assert_eq!(m, IMat2::from_i64(0, 1, 1, 1));
        assert_eq!(m.det(), BigInt::from(-1));
    }

    #[test]
    fn hand_product_for_word_12() {
        // A_1·A_2 = [[1,2],[1,3]], det +1, tr 4.
        let m = matrix_of_word(&[1, 2]);
        assert_eq!(m, IMat2::from_i64(1, 2, 1, 3));
        assert_eq!(m.det(), BigInt::one());
        assert_eq!(m.trace(), BigInt::from(4));
    }

    #[test]
    fn fibonacci_entries_for_ones() {
        // A_{1^n} = [[F_{n−1}, F_n], [F_n, F_{n+1}]] by induction.
        let (mut f0, mut f1) = (BigInt::zero(), BigInt::one());
        for n in 1..=15usize {
            let m = matrix_of_word(&vec![1u8; n]);
            let f2 = &f0 + &f1;
            assert_eq!(m.entries()[0], f0, "n = {n}");
            assert_eq!(m.entries()[1], f1);
            assert_eq!(m.entries()[2], f1);
            assert_eq!(m.entries()[3], f2);
            f0 = std::mem::replace(&mut f1, f2);
        }
    }

    #[test]
    fn word_homomorphism_and_det_sign() {
        let u = [1u8, 3, 2];
        let v = [2u8, 1, 1, 4];
        let joined: Vec<u8> = u.iter().chain(v.iter()).copied().collect();
        assert_eq!(
            matrix_of_word(&joined),
            matrix_of_word(&u).mul(&matrix_of_word(&v))
        );
        for w in [&u[..], &v[..], &joined[..]] {
            let expect = if w.len() % 2 == 0 { 1 } else { -1 };
            assert_eq!(matrix_of_word(w).det(), BigInt::from(expect));
        }
    }

    #[test]
    fn identity_is_non_semisimple() {
        assert!(matches!(
            eigen_decompose(&IMat2::identity(), 5, 4).unwrap(),
            EigenDecomposition::NonSemisimple
        ));
    }

    #[test]
    fn eigen_a12_lives_in_sqrt3_extension() {
        // tr 4, det 1: Δ = 12 = 2²·3, λ = 2 ± √3.
        let m = matrix_of_word(&[1, 2]);
        match eigen_decompose(&m, 5, 6).unwrap() {
            EigenDecomposition::Semisimple(d) => {
                assert_eq!(d.class, EigenClass::QuadDistinct);
                assert_eq!(d.delta, BigInt::from(12));
                assert_eq!(d.delta_core, BigInt::from(3));
                assert_eq!(d.sqrt_factor, BigInt::from(2));
                match &d.lambda1 {
                    Eigenvalue::Quad(r) => {
                        assert_eq!(r.a, BigRational::from_integer(2.into()));
                        assert_eq!(r.b, BigRational::one());
                    }
                    _ => panic!("expected quadratic eigenvalue"),
                }
                // λ·σ(λ) = det = 1.
                match (&d.lambda1, &d.lambda2) {
                    (Eigenvalue::Quad(l1), Eigenvalue::Quad(l2)) => {
                        let prod = l1.mul(l2, &d.delta_core);
                        assert_eq!(prod.a, BigRational::one());
                        assert!(prod.b.is_zero());
                    }
                    _ => unreachable!(),
                }
            }
            _ => panic!("A_12 is semisimple"),
        }
    }

    #[test]
    fn eigen_a1_mod_11_splits_with_residue_8() {
        // Δ = 5 ≡ 4² (mod 11): split; λ₁ ≡ 8 (mod 11) under the canonical
        // sign and the eigenvector of A_1ᵀ = A_1 is (1, 8) mod 11.
        let m = matrix_of_word(&[1]);
        match eigen_decompose(&m, 11, 6).unwrap() {
            EigenDecomposition::Semisimple(d) => {
                assert_eq!(d.class, EigenClass::SplitDistinct);
                let lam = match &d.lambda1 {
                    Eigenvalue::Split(x) => x.clone(),
                    _ => panic!(),
                };
                let res = lam.unit_residue() % num_bigint::BigUint::from(11u32);
                assert_eq!(res, num_bigint::BigUint::from(8u32));
                let expected = ProjPoint::from_ints(11, 1, 1, 8).unwrap();
                assert!(d.v1.distance(&expected).unwrap().upper_bound() <= ExtVal::from_exp(1));
            }
            _ => panic!("A_1 is semisimple"),
        }
    }

    #[test]
    fn eigen_consistency_transpose_action() {
        // Aᵀ·v = λ·v projectively: the eigenvector is fixed by Aᵀ.
        for (word, p) in [(&[1u8][..], 11u64), (&[1, 2][..], 5), (&[2, 1, 3][..], 3)] {
            let m = matrix_of_word(word);
            if let EigenDecomposition::Semisimple(d) = eigen_decompose(&m, p, 8).unwrap() {
                for v in [&d.v1, &d.v2] {
                    let image = v.apply_transpose(&m).unwrap();
                    let dist = v.distance(&image).unwrap().upper_bound();
                    assert!(
                        dist <= ExtVal::from_exp(6),
                        "eigenvector moved: {word:?} p={p} dist={dist:?}"
                    );
                }
            } else {
                panic!("semisimple by the word-matrix property");
            }
        }
    }

    #[test]
    fn kappa_of_a1_at_11_is_10() {
        // Brute-force oracle: orders of the residue roots 8 and 4 mod 11.
        let order = |x: u64| (1..=10).find(|t| mod_pow(x, *t, 11) == 1).unwrap();
        assert_eq!(order(8).lcm(&order(4)), 10);
        let m = matrix_of_word(&[1]);
        assert_eq!(kappa(&m, 11).unwrap(), 10);
    }

    #[test]
    fn kappa_minimal_in_ramified_scan() {
        // [[1,1],[3,4]]: tr 5, det 1, Δ = 21 with v₃(21) = 1 (ramified scan
        // path).  Verify the defining property and minimality exactly.
        let m = IMat2::from_i64(1, 1, 3, 4);
        let k = kappa(&m, 3).unwrap();
        assert!(k <= 9, "paper bound κ ≤ p²");
        let (s, core) = strip_square_part(&BigInt::from(21));
        let half = BigRational::new(BigInt::one(), 2.into());
        let lam = RatQuad::new(
            BigRational::from_integer(5.into()) * &half,
            BigRational::from_integer(s) * &half,
        );
        let holds = |t: u64| {
            let d = lam.pow(t, &core).sub(&RatQuad::one());
            match d.valuation_twice(&core, 3) {
                None => true,
                Some(tv) => tv >= 2,
            }
        };
        assert!(holds(k));
        for t in 1..k {
            assert!(!holds(t), "κ must be minimal");
        }
    }

    #[test]
    fn kappa_respects_paper_bound_on_word_sample() {
        for p in [2u64, 3, 5] {
            for word in [&[1u8][..], &[2], &[1, 2], &[2, 2, 1], &[4, 3, 2, 1]] {
                let m = matrix_of_word(word);
                let k = kappa(&m, p).unwrap();
                assert!(k <= p * p, "κ({word:?}) = {k} > p² at p = {p}");
            }
        }
    }

    #[test]
    fn tilde_membership_examples() {
        for word in [&[1u8][..], &[2], &[1, 2], &[3, 1, 4, 1]] {
            assert!(in_tilde_sl(&matrix_of_word(word)).unwrap().is_member);
        }
        // D_a is excluded (non-semisimple).
        let t = in_tilde_sl(&unipotent(&BigInt::from(3))).unwrap();
        assert!(!t.is_member);
        assert!(t.reason.unwrap().contains("discriminant"));
        // Quarter rotation: x² + 1.
        let t = in_tilde_sl(&IMat2::from_i64(0, -1, 1, 0)).unwrap();
        assert!(!t.is_member);
        assert!(t.reason.unwrap().contains("x^2 + 1"));
    }

    #[test]
    fn eps3_of_a1_at_11_matches_modular_exponentiation_oracle() {
        // Oracle: lift the golden root mod 11^10, raise to the 40th power
        // (4κ with κ = 10), read the valuation of z − 1 off directly.
        let p = 11u64;
        let val = eps3(&matrix_of_word(&[1]), p, 8).unwrap();

        let root = PAdic::from_i64(p, 10, 5).sqrt().unwrap().unwrap();
        let lam = PAdic::from_i64(p, 10, 1)
            .add(&root)
            .unwrap()
            .div(&PAdic::from_i64(p, 10, 2))
            .unwrap();
        let z = lam.pow(40).unwrap();
        let oracle = z.sub(&PAdic::one(p, 10)).unwrap().norm();
        assert_eq!(val, oracle);
        // λ^κ ≡ 1 (mod p) already, so ε₃ ≤ p^{-1}.
        assert!(val <= ExtVal::from_exp(1));
        assert!(!val.is_zero());
    }

    #[test]
    fn eps3_bound_holds_on_word_sample() {
        for p in [2u64, 3, 5] {
            for word in [&[1u8][..], &[2], &[1, 2], &[2, 2, 1]] {
                let v = eps3(&matrix_of_word(word), p, 6).unwrap();
                assert!(v <= ExtVal::from_exp(1), "ε₃ ≤ p^-1 at p = {p}, {word:?}");
                assert!(!v.is_zero());
            }
        }
    }

    #[test]
    fn eps3_symmetric_in_eigenvalue_choice() {
        // |λ₁^{4κ} − 1| = |λ₂^{4κ} − 1| since λ₂ = ±λ₁⁻¹.
        let m = matrix_of_word(&[1, 2]);
        let p = 5u64;
        match eigen_decompose(&m, p, 10).unwrap() {
            EigenDecomposition::Semisimple(d) => {
                let e = 4 * d.kappa;
                let (l1, l2) = match (&d.lambda1, &d.lambda2) {
                    (Eigenvalue::Quad(a), Eigenvalue::Quad(b)) => (a.clone(), b.clone()),
                    _ => panic!("Δ = 12 is a non-square in Q_5"),
                };
                let v1 = l1
                    .pow(e, &d.delta_core)
                    .sub(&RatQuad::one())
                    .valuation_twice(&d.delta_core, p);
                let v2 = l2
                    .pow(e, &d.delta_core)
                    .sub(&RatQuad::one())
                    .valuation_twice(&d.delta_core, p);
                assert_eq!(v1, v2);
                assert!(!d.eps3.is_zero());
                assert_eq!(ExtVal::from_half_exp(v1.unwrap()), d.eps3);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn commutator_det_detects_shared_eigenvectors() {
        // A_u and A_u² share eigenvectors.
        let a = matrix_of_word(&[1, 2]);
        assert!(commutator_det(&a, &a.mul(&a)).is_zero());
        // A_1 and A_2 have four distinct eigenvectors.
        let c = commutator_det(&matrix_of_word(&[1]), &matrix_of_word(&[2]));
        assert_eq!(c, BigInt::one());
    }

    #[test]
    fn residue_reduction_is_homomorphic() {
        let u = matrix_of_word(&[1, 3, 2, 2]);
        let v = matrix_of_word(&[2, 1]);
        let (p, k) = (3u64, 3u32);
        let lhs = u.mul(&v).reduce(p, k).unwrap();
        let rhs = u.reduce(p, k).unwrap().mul(&v.reduce(p, k).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn inverse_round_trips() {
        for w in [&[1u8][..], &[1, 2], &[3, 1, 2]] {
            let m = matrix_of_word(w);
            assert!(m.mul(&m.inverse().unwrap()).is_identity());
        }
    }

    #[test]
    fn modulus_overflow_detected() {
        assert!(matches!(
            checked_modulus(11, 40),
            Err(MatError::ModulusOverflow { .. })
        ));
    }
}
