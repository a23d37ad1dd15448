//! The projective line `P¹(Q_p)` with the cross-determinant ultrametric.
//!
//! Points are kept in normalized coordinates: `max(|ω₁|, |ω₂|) = 1` and the
//! first coordinate of norm one is scaled to exactly 1, so projectively
//! equal inputs produce identical canonical representatives and the two
//! `min{...}` factors in the metric collapse to 1.

use crate::magnitude::Magnitude;
use crate::matrices::IMat2;
use crate::padic::{bigint_valuation, ExtVal, PAdic, PadicError};
use crate::quad::QuadExt;
use num_bigint::BigInt;
use num_traits::Zero;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProjError {
    #[error("both coordinates are zero")]
    BothZero,
    #[error("matrix determinant is not a p-adic unit")]
    NonUnitDet,
    #[error("coordinates unresolvable at precision (below p^{bound_exp})")]
    Precision { bound_exp: i64 },
    #[error(transparent)]
    Arithmetic(#[from] PadicError),
}

pub type Result<T> = std::result::Result<T, ProjError>;

/// Outcome of a distance computation at finite precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distance {
    Exact(ExtVal),
    /// The cross-determinant vanishes modulo everything retained: the
    /// points are indistinguishable at this precision, `d ≤ bound`.
    AtMost(ExtVal),
}

impl Distance {
    /// Exact value when resolved, otherwise the stated upper bound.
    pub fn upper_bound(&self) -> ExtVal {
        match self {
            Distance::Exact(v) | Distance::AtMost(v) => *v,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Distance::Exact(_))
    }

    /// Resolved and nonzero.
    pub fn positive(&self) -> Option<ExtVal> {
        match self {
            Distance::Exact(v) if !v.is_zero() => Some(*v),
            _ => None,
        }
    }
}

/// A point of `P¹(Q_p)` (or of `P¹` over a quadratic extension, for
/// eigenvectors) in canonical normalized coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjPoint {
    x: QuadExt,
    y: QuadExt,
}

impl ProjPoint {
    /// Normalize a raw coordinate pair: scale so the first coordinate of
    /// maximal norm becomes exactly 1.
    pub fn normalize(raw_x: QuadExt, raw_y: QuadExt) -> Result<ProjPoint> {
        if raw_x.is_zero() && raw_y.is_zero() {
            return Err(ProjError::BothZero);
        }
        let nx = raw_x.norm()?;
        let ny = raw_y.norm()?;
        let p = raw_x.prime();
        if nx >= ny {
            let scale = raw_x.inv()?;
            let y = raw_y.mul(&scale)?;
            let one = QuadExt::one(p, one_precision(&raw_x, &raw_y));
            Ok(ProjPoint { x: one, y })
        } else {
            let scale = raw_y.inv()?;
            let x = raw_x.mul(&scale)?;
            let one = QuadExt::one(p, one_precision(&raw_x, &raw_y));
            Ok(ProjPoint { x, y: one })
        }
    }

    pub fn from_base_pair(x: PAdic, y: PAdic) -> Result<ProjPoint> {
        Self::normalize(QuadExt::from_base(x), QuadExt::from_base(y))
    }

    pub fn from_ints(p: u64, prec: u32, a: i64, b: i64) -> Result<ProjPoint> {
        Self::from_base_pair(PAdic::from_i64(p, prec, a), PAdic::from_i64(p, prec, b))
    }

    pub fn prime(&self) -> u64 {
        self.x.prime()
    }

    pub fn coords(&self) -> (&QuadExt, &QuadExt) {
        (&self.x, &self.y)
    }

    /// Half-integer valuations present in the coordinates (ramified data).
    pub fn is_ramified(&self) -> bool {
        let check = |c: &QuadExt| {
            c.norm()
                .map(|n| n.exp_denominator() == 2)
                .unwrap_or(false)
        };
        check(&self.x) || check(&self.y)
    }

    /// `d(w, v) = |ω₁υ₂ − ω₂υ₁|` on normalized representatives.
    pub fn distance(&self, other: &ProjPoint) -> Result<Distance> {
        let t1 = self.x.mul(&other.y)?;
        let t2 = self.y.mul(&other.x)?;
        match t1.sub(&t2) {
            Ok(cross) => match cross.norm() {
                Ok(v) => Ok(Distance::Exact(v)),
                Err(PadicError::Cancelled { known_below }) => {
                    Ok(Distance::AtMost(ExtVal::from_exp(known_below)))
                }
                Err(e) => Err(e.into()),
            },
            Err(PadicError::Cancelled { known_below }) => {
                Ok(Distance::AtMost(ExtVal::from_exp(known_below)))
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Apply an integer matrix with unit determinant; the image stays
    /// normalized (entries have norm ≤ 1 and the matrix is invertible).
    pub fn apply(&self, m: &IMat2) -> Result<ProjPoint> {
        let det = m.det();
        if det.is_zero() || bigint_valuation(&det, self.prime()) != Some(0) {
            return Err(ProjError::NonUnitDet);
        }
        let p = self.prime();
        let prec = working_prec(self);
        let scalar = |n: &BigInt| QuadExt::from_base(PAdic::from_bigint(p, prec, n));
        let [a, b, c, d] = m.entries();
        let combine = |u: &BigInt, v: &BigInt| -> std::result::Result<QuadExt, PadicError> {
            let t1 = scalar(u).mul(&self.x)?;
            let t2 = scalar(v).mul(&self.y)?;
            t1.add(&t2)
        };
        let nx = combine(a, b);
        let ny = combine(c, d);
        match (nx, ny) {
            (Ok(x), Ok(y)) => Self::normalize(x, y),
            (Err(PadicError::Cancelled { known_below }), _)
            | (_, Err(PadicError::Cancelled { known_below })) => Err(ProjError::Precision {
                bound_exp: known_below,
            }),
            (Err(e), _) | (_, Err(e)) => Err(e.into()),
        }
    }

    /// Apply the transpose (trajectory steps use `Aᵀ`).
    pub fn apply_transpose(&self, m: &IMat2) -> Result<ProjPoint> {
        self.apply(&m.transpose())
    }

    /// `|u₁ω₁ + u₂ω₂|` for an integer vector `u`: the badly-approximable
    /// test quantity on a normalized point.
    pub fn inner_abs(&self, u: (i64, i64)) -> Result<Distance> {
        let p = self.prime();
        let prec = working_prec(self);
        let s = |n: i64| QuadExt::from_base(PAdic::from_bigint(p, prec, &BigInt::from(n)));
        let t1 = s(u.0).mul(&self.x)?;
        let t2 = s(u.1).mul(&self.y)?;
        match t1.add(&t2) {
            Ok(v) => match v.norm() {
                Ok(n) => Ok(Distance::Exact(n)),
                Err(PadicError::Cancelled { known_below }) => {
                    Ok(Distance::AtMost(ExtVal::from_exp(known_below)))
                }
                Err(e) => Err(e.into()),
            },
            Err(PadicError::Cancelled { known_below }) => {
                Ok(Distance::AtMost(ExtVal::from_exp(known_below)))
            }
            Err(e) => Err(e.into()),
        }
    }
}

// Relative precision granted to the synthetic unit coordinate.  The scaled
// coordinate is exactly 1 whatever the true value of the divisor, so it
// inherits the best precision present rather than the worst; projective
// equality of canonical representatives needs only determinism, which the
// max provides equally.
fn one_precision(a: &QuadExt, b: &QuadExt) -> u32 {
    let pa = a.rel_precision().unwrap_or(0);
    let pb = b.rel_precision().unwrap_or(0);
    pa.max(pb).clamp(1, 256)
}

fn working_prec(pt: &ProjPoint) -> u32 {
    one_precision(&pt.x, &pt.y)
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} : {})", self.x, self.y)
    }
}

// ---------------------------------------------------------------------------
// Empirical badly-approximable estimation.
// ---------------------------------------------------------------------------

/// Result of the exhaustive `0 < max(|a|,|b|) ≤ B` scan.
///
/// `epsilon` is the exact minimum of `|aω₁ + bω₂|_p · max(a², b²)` over the
/// box (the normalized form of the defining inequality), witnessed by the
/// lexicographically smallest `(|a|+|b|, a, b)`.
#[derive(Debug, Clone)]
pub struct PBadReport {
    pub bound: u64,
    pub epsilon: Magnitude,
    pub witness: (i64, i64),
    /// Some pair could not be resolved at the working precision and its
    /// upper bound undercuts the resolved minimum.
    pub precision_limited: bool,
    /// Tightest unresolved upper bound, when any pair failed to resolve.
    pub unresolved_floor: Option<Magnitude>,
}

impl PBadReport {
    pub fn is_positive_evidence(&self) -> bool {
        !self.precision_limited && !self.epsilon.is_zero()
    }
}

/// Exhaustive scan of integer pairs in the box `0 < max(|a|,|b|) ≤ B`.
pub fn pbad_estimate(point: &ProjPoint, bound: u64) -> Result<PBadReport> {
    assert!(bound >= 1, "bound must be at least 1");
    let p = point.prime();
    let b_i = bound as i64;
    let mut best: Option<(Magnitude, (i64, i64))> = None;
    let mut unresolved: Option<Magnitude> = None;
    // Scan in tie-break order: (|a| + |b|, a, b) ascending.
    'outer: for s in 1..=(2 * b_i) {
        for a in -b_i..=b_i {
            let r = s - a.abs();
            if r < 0 || r > b_i {
                continue;
            }
            let b_choices: &[i64] = if r == 0 { &[0] } else { &[-r, r] };
            for &b in b_choices {
                let weight = Magnitude::from_u64(p, (a.abs().max(b.abs()) as u64).pow(2));
                match point.inner_abs((a, b))? {
                    Distance::Exact(v) => {
                        let value = Magnitude::from_extval(p, &v).mul(&weight);
                        let better = match &best {
                            None => true,
                            Some((cur, _)) => value < *cur,
                        };
                        if better {
                            let zero = value.is_zero();
                            best = Some((value, (a, b)));
                            if zero {
                                break 'outer; // nothing goes below an exact zero
                            }
                        }
                    }
                    Distance::AtMost(v) => {
                        let cap = Magnitude::from_extval(p, &v).mul(&weight);
                        let tighter = match &unresolved {
                            None => true,
                            Some(cur) => cap < *cur,
                        };
                        if tighter {
                            unresolved = Some(cap);
                        }
                    }
                }
            }
        }
    }
    let limited = match (&unresolved, &best) {
        (Some(_), None) => true,
        (Some(u), Some((b, _))) => u < b,
        (None, _) => false,
    };
    let (epsilon, witness) = best.unwrap_or((Magnitude::zero(p), (0, 0)));
    Ok(PBadReport {
        bound,
        epsilon,
        witness,
        precision_limited: limited,
        unresolved_floor: unresolved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::{letter_matrix, matrix_of_word};

    fn pt(p: u64, k: u32, a: i64, b: i64) -> ProjPoint {
        ProjPoint::from_ints(p, k, a, b).unwrap()
    }

    #[test]
    fn distance_on_axes_is_one() {
        let e1 = pt(11, 6, 1, 0);
        let e2 = pt(11, 6, 0, 1);
        assert_eq!(e1.distance(&e2).unwrap(), Distance::Exact(ExtVal::one()));
    }

    #[test]
    fn distance_of_exact_point_to_itself_is_zero() {
        let x = pt(11, 6, 1, 0);
        assert_eq!(x.distance(&x).unwrap(), Distance::Exact(ExtVal::Zero));
        // With inexact unit coordinates the verdict is honest: ≤ p^-k.
        let y = pt(11, 6, 3, 7);
        match y.distance(&y).unwrap() {
            Distance::AtMost(bound) => assert!(bound <= ExtVal::from_exp(6)),
            Distance::Exact(v) => assert!(v.is_zero()),
        }
    }

    #[test]
    fn hand_oracle_distance_mod_11() {
        // d((1,8),(1,4)) = |4 − 8|₁₁ = 1.
        let a = pt(11, 6, 1, 8);
        let b = pt(11, 6, 1, 4);
        assert_eq!(a.distance(&b).unwrap(), Distance::Exact(ExtVal::one()));
    }

    #[test]
    fn normalization_examples() {
        // (11, 22) at p = 11 ~ (1, 2).
        assert_eq!(pt(11, 6, 11, 22), pt(11, 6, 1, 2));
        // (0, 7) → (0, 1).
        let c = pt(11, 6, 0, 7);
        assert_eq!(c, pt(11, 6, 0, 1));
        assert!(c.coords().0.is_zero());
        // (5, 10) at p = 5 ~ (1, 2).
        assert_eq!(pt(5, 6, 5, 10), pt(5, 6, 1, 2));
    }

    #[test]
    fn both_zero_rejected() {
        let z = PAdic::zero(5);
        assert!(matches!(
            ProjPoint::from_base_pair(z.clone(), z),
            Err(ProjError::BothZero)
        ));
    }

    #[test]
    fn identity_acts_trivially() {
        let x = pt(11, 6, 3, 7);
        assert_eq!(x.apply(&IMat2::identity()).unwrap(), x);
    }

    #[test]
    fn letter_matrix_action() {
        // A_1 · (0,1) = (1,1).
        let x = pt(11, 6, 0, 1);
        let y = x.apply(&letter_matrix(1)).unwrap();
        assert_eq!(y, pt(11, 6, 1, 1));
    }

    #[test]
    fn eigenvector_fixed_mod_p() {
        // A_1ᵀ = A_1 fixes (1, 8) mod 11: A(1,8) = (8, 9) ≡ 8·(1, 8).
        let x = pt(11, 1, 1, 8);
        let y = x.apply_transpose(&letter_matrix(1)).unwrap();
        assert!(x.distance(&y).unwrap().upper_bound() <= ExtVal::from_exp(1));
    }

    #[test]
    fn non_unit_determinant_rejected() {
        let m = IMat2::from_i64(2, 0, 0, 1); // det 2
        let x = pt(2, 6, 1, 1);
        assert!(matches!(x.apply(&m), Err(ProjError::NonUnitDet)));
    }

    #[test]
    fn pbad_on_rational_point_finds_exact_zero() {
        // (0, 1): the pair (1, 0) kills it.
        let x = pt(11, 8, 0, 1);
        let r = pbad_estimate(&x, 5).unwrap();
        assert!(r.epsilon.is_zero());
        // Tie-break order (|a|+|b|, a, b) reaches (−1, 0) first.
        assert_eq!(r.witness, (-1, 0));
        assert!(!r.is_positive_evidence());
    }

    #[test]
    fn pbad_monotone_in_bound() {
        let x = pt(11, 12, 4, 9);
        let r5 = pbad_estimate(&x, 5).unwrap();
        let r20 = pbad_estimate(&x, 20).unwrap();
        assert!(r20.epsilon <= r5.epsilon);
    }

    #[test]
    fn matrix_action_is_associative_with_product() {
        let x = pt(5, 10, 2, 3);
        let u = matrix_of_word(&[1, 2]);
        let v = matrix_of_word(&[2, 1, 1]);
        let lhs = x.apply(&v).unwrap().apply(&u).unwrap();
        let rhs = x.apply(&u.mul(&v)).unwrap();
        assert!(lhs.distance(&rhs).unwrap().upper_bound() <= ExtVal::from_exp(8));
    }

    #[test]
    fn ultrametric_triangle_on_samples() {
        let pts = [
            pt(5, 10, 1, 3),
            pt(5, 10, 2, 7),
            pt(5, 10, 13, 4),
            pt(5, 10, 1, 0),
            pt(5, 10, 5, 3),
        ];
        for a in &pts {
            for b in &pts {
                for c in &pts {
                    let ab = a.distance(b).unwrap().upper_bound();
                    let bc = b.distance(c).unwrap().upper_bound();
                    let ac = a.distance(c).unwrap();
                    if ac.is_exact() {
                        assert!(ac.upper_bound() <= ab.max(bc), "triangle violated");
                    }
                }
            }
        }
    }
}
