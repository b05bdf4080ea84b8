//! The protocol group `G` with generator `P`, its target group `G_T` and the
//! bilinear map `e: G × G → G_T`.
//!
//! Two interchangeable backends sit behind [`GroupSuite`]:
//!
//! * an **insecure** transparent mock in which every element is its own
//!   discrete logarithm (`k·P ↦ k`, `e(aP, bP) ↦ ab`). It exists so that each
//!   in-exponent identity of the protocol can be checked against plain
//!   Shamir arithmetic and must never protect real data;
//! * the supersingular curve `y^2 = x^3 + x` at desk-scale parameters with a
//!   reduced Tate pairing computed by Miller's algorithm.

mod curve;

pub use curve::{CurveParams, CurvePoint, Fp2};

use crate::algebra::{is_prime_u64, AlgebraError, PrimeField};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("operands belong to a different group suite")]
    SuiteMismatch,
    #[error("element is not in the order-q subgroup")]
    NotInSubgroup,
    #[error("scalar {0} is outside [0, q)")]
    ScalarOutOfRange(u64),
    #[error("invalid encoding: {0}")]
    Encoding(&'static str),
    #[error("bad suite parameters: {0}")]
    Parameters(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Operation tallies threaded through a computation by the caller, so that
/// instrumentation never needs shared mutable state.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounter {
    /// Base-field multiplications, squarings included.
    pub field_mul: u64,
    pub field_inv: u64,
    pub point_add: u64,
    pub point_double: u64,
    pub scalar_mul: u64,
    pub pairing: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Elements carry their discrete logs. Test and simulation use only.
    Mock,
    Curve(CurveParams),
}

/// An element of `G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupElement {
    Mock(u64),
    Curve(CurvePoint),
}

/// An element of `G_T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetElement {
    Mock(u64),
    Curve(Fp2),
}

/// A complete choice of `(G, P, G_T, e)`. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupSuite {
    name: String,
    backend: Backend,
    field: PrimeField,
    generator: GroupElement,
}

impl GroupSuite {
    /// Larger curve parameters for timing runs: `p = 4q - 1`.
    pub const LARGE_P: u64 = 2_147_486_203;
    pub const LARGE_Q: u64 = 536_871_551;

    pub fn mock(q: u64) -> Result<Self, GroupError> {
        let field = PrimeField::new(q)?;
        Ok(Self { name: format!("mock-{q}"), backend: Backend::Mock, field, generator: GroupElement::Mock(1 % q) })
    }

    pub fn curve(p: u64, q: u64) -> Result<Self, GroupError> {
        if !is_prime_u64(p) || p % 4 != 3 {
            return Err(GroupError::Parameters(format!("p = {p} must be a prime ≡ 3 mod 4")));
        }
        if p >= 1 << 62 {
            return Err(GroupError::Parameters("p must be below 2^62".into()));
        }
        let field = PrimeField::new(q)?;
        if !(p + 1).is_multiple_of(q) || q == 2 {
            return Err(GroupError::Parameters(format!("q = {q} must be an odd prime dividing p + 1")));
        }
        let params = CurveParams { p, q };
        let g = params.find_generator().ok_or_else(|| GroupError::Parameters("no point of order q".into()))?;
        Ok(Self {
            name: format!("curve-{p}-{q}"),
            backend: Backend::Curve(params),
            field,
            generator: GroupElement::Curve(g),
        })
    }

    pub fn mock13() -> Self {
        Self::mock(13).expect("13 is prime")
    }

    pub fn mock61() -> Self {
        Self::mock(PrimeField::MERSENNE_61).expect("2^61-1 is prime")
    }

    /// `p = 43`, `q = 11`: small enough to enumerate.
    pub fn curve43() -> Self {
        Self::curve(43, 11).expect("reference parameters")
    }

    pub fn curve_large() -> Self {
        Self::curve(Self::LARGE_P, Self::LARGE_Q).expect("reference parameters")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// The scalar field `F_q`.
    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn order(&self) -> u64 {
        self.field.modulus()
    }

    /// `P`.
    pub fn generator(&self) -> GroupElement {
        self.generator
    }

    pub fn identity(&self) -> GroupElement {
        match self.backend {
            Backend::Mock => GroupElement::Mock(0),
            Backend::Curve(_) => GroupElement::Curve(CurvePoint::Infinity),
        }
    }

    pub fn is_identity(&self, a: &GroupElement) -> bool {
        *a == self.identity()
    }

    /// Membership in the order-q subgroup of this suite.
    pub fn contains(&self, a: &GroupElement) -> bool {
        match (self.backend, a) {
            (Backend::Mock, GroupElement::Mock(v)) => self.field.contains(*v),
            (Backend::Curve(c), GroupElement::Curve(pt)) => c.in_subgroup(pt),
            _ => false,
        }
    }

    fn check(&self, a: &GroupElement) -> Result<(), GroupError> {
        match (self.backend, a) {
            (Backend::Mock, GroupElement::Mock(_)) | (Backend::Curve(_), GroupElement::Curve(_)) => {
                if self.contains(a) {
                    Ok(())
                } else {
                    Err(GroupError::NotInSubgroup)
                }
            }
            _ => Err(GroupError::SuiteMismatch),
        }
    }

    /// `k·a`.
    pub fn scalar_mul(&self, k: u64, a: &GroupElement) -> Result<GroupElement, GroupError> {
        self.scalar_mul_counted(k, a, &mut OpCounter::default())
    }

    pub fn scalar_mul_counted(
        &self,
        k: u64,
        a: &GroupElement,
        ops: &mut OpCounter,
    ) -> Result<GroupElement, GroupError> {
        if !self.field.contains(k) {
            return Err(GroupError::ScalarOutOfRange(k));
        }
        self.check(a)?;
        Ok(self.mul_unchecked(k, a, ops))
    }

    fn mul_unchecked(&self, k: u64, a: &GroupElement, ops: &mut OpCounter) -> GroupElement {
        ops.scalar_mul += 1;
        match (self.backend, a) {
            (Backend::Mock, GroupElement::Mock(v)) => {
                ops.field_mul += u64::from(k != 0);
                GroupElement::Mock(self.field.mul(k, *v))
            }
            (Backend::Curve(c), GroupElement::Curve(pt)) => GroupElement::Curve(c.mul(k, pt, ops)),
            _ => unreachable!("checked by caller"),
        }
    }

    /// `k·P` for a canonical scalar; `k` is reduced mod `q` first.
    pub fn mul_generator(&self, k: u64, ops: &mut OpCounter) -> GroupElement {
        self.mul_unchecked(self.field.reduce(k), &self.generator, ops)
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, GroupError> {
        self.add_counted(a, b, &mut OpCounter::default())
    }

    pub fn add_counted(
        &self,
        a: &GroupElement,
        b: &GroupElement,
        ops: &mut OpCounter,
    ) -> Result<GroupElement, GroupError> {
        match (self.backend, a, b) {
            (Backend::Mock, GroupElement::Mock(x), GroupElement::Mock(y)) => {
                self.check(a)?;
                self.check(b)?;
                Ok(GroupElement::Mock(self.field.add(*x, *y)))
            }
            (Backend::Curve(c), GroupElement::Curve(x), GroupElement::Curve(y)) => {
                if !c.is_on_curve(x) || !c.is_on_curve(y) {
                    return Err(GroupError::NotInSubgroup);
                }
                Ok(GroupElement::Curve(c.add(x, y, ops)))
            }
            _ => Err(GroupError::SuiteMismatch),
        }
    }

    pub fn neg(&self, a: &GroupElement) -> Result<GroupElement, GroupError> {
        match (self.backend, a) {
            (Backend::Mock, GroupElement::Mock(v)) => Ok(GroupElement::Mock(self.field.neg(*v))),
            (Backend::Curve(c), GroupElement::Curve(pt)) => Ok(GroupElement::Curve(c.neg(pt))),
            _ => Err(GroupError::SuiteMismatch),
        }
    }

    /// Sums a sequence of elements, starting from the identity.
    pub fn sum<'a, I>(&self, items: I) -> Result<GroupElement, GroupError>
    where
        I: IntoIterator<Item = &'a GroupElement>,
    {
        items.into_iter().try_fold(self.identity(), |acc, x| self.add(&acc, x))
    }

    /// `e(a, b)`.
    pub fn pairing(&self, a: &GroupElement, b: &GroupElement) -> Result<TargetElement, GroupError> {
        self.pairing_counted(a, b, &mut OpCounter::default())
    }

    pub fn pairing_counted(
        &self,
        a: &GroupElement,
        b: &GroupElement,
        ops: &mut OpCounter,
    ) -> Result<TargetElement, GroupError> {
        self.check(a)?;
        self.check(b)?;
        ops.pairing += 1;
        Ok(match (self.backend, a, b) {
            (Backend::Mock, GroupElement::Mock(x), GroupElement::Mock(y)) => {
                TargetElement::Mock(self.field.mul(*x, *y))
            }
            (Backend::Curve(c), GroupElement::Curve(x), GroupElement::Curve(y)) => {
                TargetElement::Curve(c.pairing(x, y, ops))
            }
            _ => unreachable!("checked above"),
        })
    }

    pub fn target_identity(&self) -> TargetElement {
        match self.backend {
            Backend::Mock => TargetElement::Mock(0),
            Backend::Curve(_) => TargetElement::Curve(Fp2::ONE),
        }
    }

    /// The group law of `G_T` (written multiplicatively).
    pub fn target_mul(&self, a: &TargetElement, b: &TargetElement) -> Result<TargetElement, GroupError> {
        match (self.backend, a, b) {
            (Backend::Mock, TargetElement::Mock(x), TargetElement::Mock(y)) => {
                Ok(TargetElement::Mock(self.field.add(*x, *y)))
            }
            (Backend::Curve(c), TargetElement::Curve(x), TargetElement::Curve(y)) => {
                Ok(TargetElement::Curve(curve::fp2_mul(c.fp(), *x, *y, &mut OpCounter::default())))
            }
            _ => Err(GroupError::SuiteMismatch),
        }
    }

    /// `a^k` in `G_T`.
    pub fn target_pow(&self, a: &TargetElement, k: u64) -> Result<TargetElement, GroupError> {
        match (self.backend, a) {
            (Backend::Mock, TargetElement::Mock(x)) => {
                Ok(TargetElement::Mock(self.field.mul(*x, self.field.reduce(k))))
            }
            (Backend::Curve(c), TargetElement::Curve(x)) => {
                Ok(TargetElement::Curve(curve::fp2_pow(c.fp(), *x, k, &mut OpCounter::default())))
            }
            _ => Err(GroupError::SuiteMismatch),
        }
    }

    /// Encoded length of one element of `G`.
    pub fn element_len(&self) -> usize {
        match self.backend {
            Backend::Mock => 8,
            Backend::Curve(c) => 1 + 2 * c.coord_len(),
        }
    }

    pub fn target_len(&self) -> usize {
        match self.backend {
            Backend::Mock => 8,
            Backend::Curve(c) => 2 * c.coord_len(),
        }
    }

    /// Mock: 8-byte big-endian log. Curve: tag byte (0 infinity, 1 affine)
    /// then `x` and `y` as fixed-width big-endian integers.
    pub fn encode_element(&self, a: &GroupElement) -> Vec<u8> {
        match (self.backend, a) {
            (Backend::Mock, GroupElement::Mock(v)) => v.to_be_bytes().to_vec(),
            (Backend::Curve(c), GroupElement::Curve(pt)) => {
                let w = c.coord_len();
                let mut out = Vec::with_capacity(1 + 2 * w);
                match *pt {
                    CurvePoint::Infinity => {
                        out.push(0);
                        out.resize(1 + 2 * w, 0);
                    }
                    CurvePoint::Affine { x, y } => {
                        out.push(1);
                        out.extend_from_slice(&x.to_be_bytes()[8 - w..]);
                        out.extend_from_slice(&y.to_be_bytes()[8 - w..]);
                    }
                }
                out
            }
            _ => panic!("element from a different suite"),
        }
    }

    /// Parses and validates an element, including subgroup membership.
    pub fn decode_element(&self, bytes: &[u8]) -> Result<GroupElement, GroupError> {
        if bytes.len() != self.element_len() {
            return Err(GroupError::Encoding("element length"));
        }
        let el = match self.backend {
            Backend::Mock => GroupElement::Mock(be_u64(bytes)),
            Backend::Curve(c) => {
                let w = c.coord_len();
                let x = be_u64(&bytes[1..1 + w]);
                let y = be_u64(&bytes[1 + w..]);
                match bytes[0] {
                    0 if x == 0 && y == 0 => GroupElement::Curve(CurvePoint::Infinity),
                    0 => return Err(GroupError::Encoding("nonzero coordinates on infinity")),
                    1 => GroupElement::Curve(CurvePoint::Affine { x, y }),
                    _ => return Err(GroupError::Encoding("unknown point tag")),
                }
            }
        };
        self.check(&el)?;
        Ok(el)
    }

    pub fn encode_target(&self, a: &TargetElement) -> Vec<u8> {
        match (self.backend, a) {
            (Backend::Mock, TargetElement::Mock(v)) => v.to_be_bytes().to_vec(),
            (Backend::Curve(c), TargetElement::Curve(v)) => {
                let w = c.coord_len();
                let mut out = v.re.to_be_bytes()[8 - w..].to_vec();
                out.extend_from_slice(&v.im.to_be_bytes()[8 - w..]);
                out
            }
            _ => panic!("target element from a different suite"),
        }
    }

    /// Parses a target element; rejects values outside the order-q subgroup of `G_T`.
    pub fn decode_target(&self, bytes: &[u8]) -> Result<TargetElement, GroupError> {
        if bytes.len() != self.target_len() {
            return Err(GroupError::Encoding("target length"));
        }
        match self.backend {
            Backend::Mock => {
                let v = be_u64(bytes);
                if !self.field.contains(v) {
                    return Err(GroupError::NotInSubgroup);
                }
                Ok(TargetElement::Mock(v))
            }
            Backend::Curve(c) => {
                let w = c.coord_len();
                let v = Fp2 { re: be_u64(&bytes[..w]), im: be_u64(&bytes[w..]) };
                if v.re >= c.p || v.im >= c.p {
                    return Err(GroupError::Encoding("coordinate not reduced"));
                }
                if curve::fp2_pow(c.fp(), v, c.q, &mut OpCounter::default()) != Fp2::ONE {
                    return Err(GroupError::NotInSubgroup);
                }
                Ok(TargetElement::Curve(v))
            }
        }
    }
}

fn be_u64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0u64, |acc, &b| (acc << 8) | b as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mock_worked_examples() {
        let s = GroupSuite::mock13();
        let p = s.generator();
        assert_eq!(s.scalar_mul(5, &p), Ok(GroupElement::Mock(5)));
        assert_eq!(s.scalar_mul(0, &p), Ok(s.identity()));
        let a = s.scalar_mul(3, &p).unwrap();
        let b = s.scalar_mul(4, &p).unwrap();
        assert_eq!(s.add(&a, &b), Ok(GroupElement::Mock(7)));
        let e = s.pairing(&s.scalar_mul(8, &p).unwrap(), &s.scalar_mul(11, &p).unwrap()).unwrap();
        assert_eq!(e, TargetElement::Mock(10));
        assert_eq!(s.pairing(&s.identity(), &p), Ok(s.target_identity()));
    }

    #[test]
    fn curve_identity_and_order() {
        let s = GroupSuite::curve43();
        let p = s.generator();
        assert_eq!(s.scalar_mul(0, &p), Ok(s.identity()));
        assert_eq!(s.add(&p, &s.identity()), Ok(p));
        assert_eq!(s.add(&p, &s.neg(&p).unwrap()), Ok(s.identity()));
        assert_eq!(s.pairing(&s.identity(), &p), Ok(s.target_identity()));
        assert_eq!(s.scalar_mul(11, &p), Err(GroupError::ScalarOutOfRange(11)));
        assert_ne!(s.pairing(&p, &p).unwrap(), s.target_identity());
    }

    #[test]
    fn mixed_suites_are_rejected() {
        let m = GroupSuite::mock13();
        let c = GroupSuite::curve43();
        assert_eq!(m.add(&m.generator(), &c.generator()), Err(GroupError::SuiteMismatch));
        assert_eq!(c.scalar_mul(2, &m.generator()), Err(GroupError::SuiteMismatch));
        assert_eq!(c.pairing(&c.generator(), &m.generator()), Err(GroupError::SuiteMismatch));
    }

    #[test]
    fn pairing_rejects_points_outside_subgroup() {
        let s = GroupSuite::curve43();
        // (0, 0) has order 2
        let two_torsion = GroupElement::Curve(CurvePoint::Affine { x: 0, y: 0 });
        assert_eq!(s.pairing(&two_torsion, &s.generator()), Err(GroupError::NotInSubgroup));
        let mut enc = vec![1, 0, 0];
        assert_eq!(s.decode_element(&enc), Err(GroupError::NotInSubgroup));
        enc[0] = 7;
        assert!(s.decode_element(&enc).is_err());
        assert!(s.decode_element(&[1, 2]).is_err());
    }

    #[test]
    fn suite_parameter_validation() {
        assert!(GroupSuite::curve(41, 7).is_err());
        assert!(GroupSuite::curve(43, 7).is_err());
        assert!(GroupSuite::mock(12).is_err());
        let large = GroupSuite::curve_large();
        assert_eq!(large.element_len(), 9);
        assert_eq!(large.target_len(), 8);
    }

    #[test]
    fn large_curve_bilinear_spot_check() {
        let s = GroupSuite::curve_large();
        let p = s.generator();
        let (a, b) = (123_456_789u64, 987_654u64);
        let lhs = s.pairing(&s.scalar_mul(a, &p).unwrap(), &s.scalar_mul(b, &p).unwrap()).unwrap();
        let base = s.pairing(&p, &p).unwrap();
        let rhs = s.target_pow(&base, s.field().mul(a, b)).unwrap();
        assert_eq!(lhs, rhs);
    }

    proptest! {
        #[test]
        fn mul_distributes_over_scalar_addition(k1 in 0u64..11, k2 in 0u64..11) {
            for s in [GroupSuite::mock13(), GroupSuite::curve43()] {
                let q = s.order();
                let (k1, k2) = (k1 % q, k2 % q);
                let p = s.generator();
                let lhs = s.scalar_mul(s.field().add(k1, k2), &p).unwrap();
                let rhs = s.add(&s.scalar_mul(k1, &p).unwrap(), &s.scalar_mul(k2, &p).unwrap()).unwrap();
                prop_assert_eq!(lhs, rhs);
            }
        }

        #[test]
        fn element_and_target_encodings_round_trip(k in 0u64..GroupSuite::LARGE_Q, j in 0u64..GroupSuite::LARGE_Q) {
            for s in [GroupSuite::mock61(), GroupSuite::curve_large(), GroupSuite::curve43()] {
                let (k, j) = (k % s.order(), j % s.order());
                let a = s.scalar_mul(k, &s.generator()).unwrap();
                let bytes = s.encode_element(&a);
                prop_assert_eq!(bytes.len(), s.element_len());
                prop_assert_eq!(s.decode_element(&bytes).unwrap(), a);
                let t = s.pairing(&a, &s.scalar_mul(j, &s.generator()).unwrap()).unwrap();
                let tb = s.encode_target(&t);
                prop_assert_eq!(s.decode_target(&tb).unwrap(), t);
            }
        }

        #[test]
        fn bilinearity_on_both_backends(a in 0u64..1u64 << 40, b in 0u64..1u64 << 40) {
            for s in [GroupSuite::mock61(), GroupSuite::curve_large()] {
                let (a, b) = (a % s.order(), b % s.order());
                let p = s.generator();
                let lhs = s.pairing(&s.scalar_mul(a, &p).unwrap(), &s.scalar_mul(b, &p).unwrap()).unwrap();
                let rhs = s.target_pow(&s.pairing(&p, &p).unwrap(), s.field().mul(a, b)).unwrap();
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
