//! Short Weierstrass curves `y² = x³ + ax + b` over a prime field.
//!
//! One implementation serves both configured profiles: the toy curve (group
//! order below 2¹⁰, small enough to enumerate) and NIST P-256. Field and
//! scalar arithmetic use Montgomery residues with a runtime modulus; point
//! arithmetic runs in Jacobian coordinates and converts back to affine once
//! per operation. Nothing here is constant time.

use std::fmt;

use crypto_bigint::modular::runtime_mod::{DynResidue, DynResidueParams};
use crypto_bigint::{Encoding, NonZero, U256};
use rand::RngCore;
use zeroize::Zeroize;

use super::CryptoError;

type Fe = DynResidue<4>;

/// Width in bytes of one encoded coordinate. Every curve is encoded at the
/// full 256-bit width so the canonical point encoding is curve independent.
pub const COORD_BYTES: usize = 32;

/// Length of an encoded finite point: tag byte plus two coordinates.
pub const POINT_BYTES: usize = 1 + 2 * COORD_BYTES;

/// Domain parameters of a curve and its base point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveParams {
    pub name: String,
    pub p: U256,
    pub a: U256,
    pub b: U256,
    pub gx: U256,
    pub gy: U256,
    /// Order of the base point.
    pub n: U256,
    pub cofactor: u32,
}

impl CurveParams {
    /// y² = x³ + 3x + 2 over F_991. The whole group has prime order 997 and
    /// (0, 420) generates it.
    pub fn toy() -> Self {
        Self {
            name: "toy997".into(),
            p: U256::from_u64(991),
            a: U256::from_u64(3),
            b: U256::from_u64(2),
            gx: U256::from_u64(0),
            gy: U256::from_u64(420),
            n: U256::from_u64(997),
            cofactor: 1,
        }
    }

    /// NIST P-256 (secp256r1).
    pub fn p256() -> Self {
        Self {
            name: "p256".into(),
            p: U256::from_be_hex(
                "ffffffff00000001000000000000000000000000ffffffffffffffffffffffff",
            ),
            a: U256::from_be_hex(
                "ffffffff00000001000000000000000000000000fffffffffffffffffffffffc",
            ),
            b: U256::from_be_hex(
                "5ac635d8aa3a93e7b3ebbd55769886bc651d06b0cc53b0f63bce3c3e27d2604b",
            ),
            gx: U256::from_be_hex(
                "6b17d1f2e12c4247f8bce6e563a440f277037d812deb33a0f4a13945d898c296",
            ),
            gy: U256::from_be_hex(
                "4fe342e2fe1a7f9b8ee7eb4a7c0f9e162bce33576b315ececbb6406837bf51f5",
            ),
            n: U256::from_be_hex(
                "ffffffff00000000ffffffffffffffffbce6faada7179e84f3b9cac2fc632551",
            ),
            cofactor: 1,
        }
    }
}

/// An element of the curve group in affine form, or the point at infinity.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupPoint {
    Infinity,
    Affine { x: U256, y: U256 },
}

impl GroupPoint {
    pub fn is_infinity(&self) -> bool {
        matches!(self, GroupPoint::Infinity)
    }

    /// Canonical encoding: `0x00` for infinity, else `0x04 ‖ x ‖ y` with
    /// 32-byte big-endian coordinates.
    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            GroupPoint::Infinity => vec![0x00],
            GroupPoint::Affine { x, y } => {
                let mut out = Vec::with_capacity(POINT_BYTES);
                out.push(0x04);
                out.extend_from_slice(&x.to_be_bytes());
                out.extend_from_slice(&y.to_be_bytes());
                out
            }
        }
    }

    /// Parses the canonical encoding without any curve membership check.
    pub fn from_bytes_unchecked(bytes: &[u8]) -> Result<Self, CryptoError> {
        match bytes {
            [0x00] => Ok(GroupPoint::Infinity),
            [0x04, rest @ ..] if rest.len() == 2 * COORD_BYTES => Ok(GroupPoint::Affine {
                x: U256::from_be_slice(&rest[..COORD_BYTES]),
                y: U256::from_be_slice(&rest[COORD_BYTES..]),
            }),
            _ => Err(CryptoError::MalformedPoint),
        }
    }
}

impl fmt::Debug for GroupPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupPoint::Infinity => write!(f, "O"),
            GroupPoint::Affine { x, y } => write!(f, "({x}, {y})"),
        }
    }
}

/// A scalar in `[1, n−1]`. The stored value is wiped on drop.
#[derive(Clone, PartialEq, Eq)]
pub struct Scalar(U256);

impl Scalar {
    pub fn new(curve: &Curve, value: U256) -> Result<Self, CryptoError> {
        if value == U256::ZERO || value >= curve.params.n {
            return Err(CryptoError::ScalarOutOfRange);
        }
        Ok(Scalar(value))
    }

    pub fn from_u64(curve: &Curve, value: u64) -> Result<Self, CryptoError> {
        Self::new(curve, U256::from_u64(value))
    }

    /// Uniform scalar in `[1, n−1]` by rejection sampling.
    pub fn random<R: RngCore + ?Sized>(curve: &Curve, rng: &mut R) -> Self {
        let bits = curve.order_bits;
        let len = bits.div_ceil(8);
        let top_mask = if bits.is_multiple_of(8) {
            0xff
        } else {
            (1u8 << (bits % 8)) - 1
        };
        let mut buf = [0u8; 32];
        loop {
            buf.fill(0);
            rng.fill_bytes(&mut buf[32 - len..]);
            buf[32 - len] &= top_mask;
            let candidate = U256::from_be_slice(&buf);
            if let Ok(s) = Scalar::new(curve, candidate) {
                buf.zeroize();
                return s;
            }
        }
    }

    pub fn value(&self) -> &U256 {
        &self.0
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        self.0.to_be_bytes()
    }
}

impl Drop for Scalar {
    fn drop(&mut self) {
        self.0.zeroize();
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Scalar(..)")
    }
}

#[derive(Clone, Copy)]
struct Jacobian {
    x: Fe,
    y: Fe,
    z: Fe,
}

/// A curve with its precomputed Montgomery parameters.
#[derive(Clone, Debug)]
pub struct Curve {
    params: CurveParams,
    fp: DynResidueParams<4>,
    fnp: DynResidueParams<4>,
    a: Fe,
    b: Fe,
    generator: GroupPoint,
    order_bits: usize,
}

impl Curve {
    pub fn new(params: CurveParams) -> Result<Self, CryptoError> {
        if !params.p.bit_vartime(0) || !params.n.bit_vartime(0) {
            return Err(CryptoError::InvalidCurve("modulus and order must be odd"));
        }
        let fp = DynResidueParams::new(&params.p);
        let fnp = DynResidueParams::new(&params.n);
        let a = Fe::new(&params.a, fp);
        let b = Fe::new(&params.b, fp);
        let curve = Curve {
            generator: GroupPoint::Affine {
                x: params.gx,
                y: params.gy,
            },
            order_bits: params.n.bits_vartime(),
            params,
            fp,
            fnp,
            a,
            b,
        };
        curve.check_params()?;
        Ok(curve)
    }

    fn check_params(&self) -> Result<(), CryptoError> {
        // 4a³ + 27b² ≠ 0 (mod p)
        let four = Fe::new(&U256::from_u64(4), self.fp);
        let tw7 = Fe::new(&U256::from_u64(27), self.fp);
        let disc = four
            .mul(&self.a.square().mul(&self.a))
            .add(&tw7.mul(&self.b.square()));
        if disc.retrieve() == U256::ZERO {
            return Err(CryptoError::InvalidCurve("singular curve"));
        }
        if !self.is_on_curve(&self.generator) || self.generator.is_infinity() {
            return Err(CryptoError::InvalidCurve("base point not on curve"));
        }
        if !self
            .mul_integer(&self.params.n, &self.generator)
            .is_infinity()
        {
            return Err(CryptoError::InvalidCurve("n·P ≠ O"));
        }
        Ok(())
    }

    pub fn params(&self) -> &CurveParams {
        &self.params
    }

    pub fn order(&self) -> &U256 {
        &self.params.n
    }

    pub fn order_bits(&self) -> usize {
        self.order_bits
    }

    /// The base point P.
    pub fn generator(&self) -> GroupPoint {
        self.generator
    }

    pub fn is_on_curve(&self, pt: &GroupPoint) -> bool {
        match pt {
            GroupPoint::Infinity => true,
            GroupPoint::Affine { x, y } => {
                if *x >= self.params.p || *y >= self.params.p {
                    return false;
                }
                let x = Fe::new(x, self.fp);
                let y = Fe::new(y, self.fp);
                let rhs = x.square().mul(&x).add(&self.a.mul(&x)).add(&self.b);
                y.square() == rhs
            }
        }
    }

    /// Ingress validation: on the curve, not infinity, and in the prime-order
    /// subgroup.
    pub fn validate(&self, pt: &GroupPoint) -> Result<(), CryptoError> {
        if pt.is_infinity() {
            return Err(CryptoError::PointAtInfinity);
        }
        if !self.is_on_curve(pt) {
            return Err(CryptoError::PointNotOnCurve);
        }
        if self.params.cofactor != 1 && !self.mul_integer(&self.params.n, pt).is_infinity() {
            return Err(CryptoError::PointWrongOrder);
        }
        Ok(())
    }

    /// Decodes and validates a point received from the network.
    pub fn decode_point(&self, bytes: &[u8]) -> Result<GroupPoint, CryptoError> {
        let pt = GroupPoint::from_bytes_unchecked(bytes)?;
        self.validate(&pt)?;
        Ok(pt)
    }

    pub fn negate(&self, pt: &GroupPoint) -> GroupPoint {
        match pt {
            GroupPoint::Infinity => GroupPoint::Infinity,
            GroupPoint::Affine { x, y } => GroupPoint::Affine {
                x: *x,
                y: Fe::new(y, self.fp).neg().retrieve(),
            },
        }
    }

    pub fn add(&self, p1: &GroupPoint, p2: &GroupPoint) -> GroupPoint {
        let j = self.jac_add(&self.to_jacobian(p1), &self.to_jacobian(p2));
        self.to_affine(&j)
    }

    /// `k·pt` for a range-checked scalar.
    pub fn mul(&self, k: &Scalar, pt: &GroupPoint) -> GroupPoint {
        self.mul_integer(&k.0, pt)
    }

    /// `k·pt` for any integer `k`, including 0 and multiples of n.
    pub fn mul_integer(&self, k: &U256, pt: &GroupPoint) -> GroupPoint {
        if pt.is_infinity() || *k == U256::ZERO {
            return GroupPoint::Infinity;
        }
        // Fixed 4-bit window, most significant nibble first.
        let base = self.to_jacobian(pt);
        let mut table = [base; 16];
        table[0] = self.jac_infinity();
        for i in 2..16 {
            table[i] = self.jac_add(&table[i - 1], &base);
        }
        let bytes = k.to_be_bytes();
        let mut acc = self.jac_infinity();
        let mut started = false;
        for byte in bytes {
            for nibble in [byte >> 4, byte & 0x0f] {
                if started {
                    for _ in 0..4 {
                        acc = self.jac_double(&acc);
                    }
                }
                if nibble != 0 {
                    acc = if started {
                        self.jac_add(&acc, &table[nibble as usize])
                    } else {
                        table[nibble as usize]
                    };
                    started = true;
                }
            }
        }
        self.to_affine(&acc)
    }

    /// `u1·P + u2·Q`, used by signature verification.
    pub(crate) fn mul_add_integers(&self, u1: &U256, u2: &U256, q: &GroupPoint) -> GroupPoint {
        let a = self.mul_integer(u1, &self.generator);
        let b = self.mul_integer(u2, q);
        self.add(&a, &b)
    }

    pub(crate) fn scalar_field(&self) -> DynResidueParams<4> {
        self.fnp
    }

    /// Reduces an arbitrary 256-bit value modulo n.
    pub(crate) fn reduce_mod_order(&self, v: &U256) -> U256 {
        let n = NonZero::new(self.params.n).expect("curve order is non-zero");
        v.rem(&n)
    }

    fn jac_infinity(&self) -> Jacobian {
        Jacobian {
            x: Fe::one(self.fp),
            y: Fe::one(self.fp),
            z: Fe::zero(self.fp),
        }
    }

    fn is_jac_infinity(&self, p: &Jacobian) -> bool {
        p.z == Fe::zero(self.fp)
    }

    fn to_jacobian(&self, pt: &GroupPoint) -> Jacobian {
        match pt {
            GroupPoint::Infinity => self.jac_infinity(),
            GroupPoint::Affine { x, y } => Jacobian {
                x: Fe::new(x, self.fp),
                y: Fe::new(y, self.fp),
                z: Fe::one(self.fp),
            },
        }
    }

    fn to_affine(&self, p: &Jacobian) -> GroupPoint {
        if self.is_jac_infinity(p) {
            return GroupPoint::Infinity;
        }
        let (zinv, _) = p.z.invert();
        let zinv2 = zinv.square();
        let x = p.x.mul(&zinv2);
        let y = p.y.mul(&zinv2.mul(&zinv));
        GroupPoint::Affine {
            x: x.retrieve(),
            y: y.retrieve(),
        }
    }

    fn jac_double(&self, p: &Jacobian) -> Jacobian {
        let zero = Fe::zero(self.fp);
        if self.is_jac_infinity(p) || p.y == zero {
            return self.jac_infinity();
        }
        let xx = p.x.square();
        let yy = p.y.square();
        let yyyy = yy.square();
        let zz = p.z.square();
        let s = p.x.mul(&yy);
        let s = s.add(&s);
        let s = s.add(&s);
        let m = xx.add(&xx).add(&xx).add(&self.a.mul(&zz.square()));
        let x3 = m.square().sub(&s).sub(&s);
        let y4 = yyyy.add(&yyyy);
        let y8 = y4.add(&y4);
        let y8 = y8.add(&y8);
        let y3 = m.mul(&s.sub(&x3)).sub(&y8);
        let yz = p.y.mul(&p.z);
        let z3 = yz.add(&yz);
        Jacobian {
            x: x3,
            y: y3,
            z: z3,
        }
    }

    fn jac_add(&self, p: &Jacobian, q: &Jacobian) -> Jacobian {
        if self.is_jac_infinity(p) {
            return *q;
        }
        if self.is_jac_infinity(q) {
            return *p;
        }
        let z1z1 = p.z.square();
        let z2z2 = q.z.square();
        let u1 = p.x.mul(&z2z2);
        let u2 = q.x.mul(&z1z1);
        let s1 = p.y.mul(&q.z).mul(&z2z2);
        let s2 = q.y.mul(&p.z).mul(&z1z1);
        if u1 == u2 {
            return if s1 == s2 {
                self.jac_double(p)
            } else {
                self.jac_infinity()
            };
        }
        let h = u2.sub(&u1);
        let r = s2.sub(&s1);
        let hh = h.square();
        let hhh = h.mul(&hh);
        let v = u1.mul(&hh);
        let x3 = r.square().sub(&hhh).sub(&v).sub(&v);
        let y3 = r.mul(&v.sub(&x3)).sub(&s1.mul(&hhh));
        let z3 = p.z.mul(&q.z).mul(&h);
        Jacobian {
            x: x3,
            y: y3,
            z: z3,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    /// Affine chord-tangent formulas over plain u64 arithmetic; the oracle for
    /// the toy curve.
    fn textbook_add(p1: Option<(u64, u64)>, p2: Option<(u64, u64)>) -> Option<(u64, u64)> {
        const P: u64 = 991;
        const A: u64 = 3;
        fn inv(v: u64) -> u64 {
            let mut r = 1;
            let mut b = v % P;
            let mut e = P - 2;
            while e > 0 {
                if e & 1 == 1 {
                    r = r * b % P;
                }
                b = b * b % P;
                e >>= 1;
            }
            r
        }
        let (x1, y1) = match p1 {
            None => return p2,
            Some(v) => v,
        };
        let (x2, y2) = match p2 {
            None => return p1,
            Some(v) => v,
        };
        let lambda = if x1 == x2 {
            if (y1 + y2) % P == 0 {
                return None;
            }
            (3 * x1 * x1 + A) % P * inv(2 * y1) % P
        } else {
            (y2 + P - y1) % P * inv((x2 + P - x1) % P) % P
        };
        let x3 = (lambda * lambda + 2 * P - x1 - x2) % P;
        let y3 = (lambda * ((x1 + P - x3) % P) % P + P - y1) % P;
        Some((x3, y3))
    }

    fn to_pt(v: Option<(u64, u64)>) -> GroupPoint {
        match v {
            None => GroupPoint::Infinity,
            Some((x, y)) => GroupPoint::Affine {
                x: U256::from_u64(x),
                y: U256::from_u64(y),
            },
        }
    }

    #[test]
    fn toy_doubling_matches_textbook_formulas() {
        let curve = Curve::new(CurveParams::toy()).unwrap();
        let g = curve.generator();
        let expected = to_pt(textbook_add(Some((0, 420)), Some((0, 420))));
        assert_eq!(curve.add(&g, &g), expected);
    }

    #[test]
    fn toy_multiples_match_iterated_textbook_addition() {
        let curve = Curve::new(CurveParams::toy()).unwrap();
        let g = curve.generator();
        let mut acc = None;
        for k in 1..997u64 {
            acc = textbook_add(acc, Some((0, 420)));
            let s = Scalar::from_u64(&curve, k).unwrap();
            assert_eq!(curve.mul(&s, &g), to_pt(acc), "k = {k}");
        }
        assert_eq!(textbook_add(acc, Some((0, 420))), None);
        assert!(curve.mul_integer(&U256::from_u64(997), &g).is_infinity());
    }

    #[test]
    fn identity_and_inverse() {
        let curve = Curve::new(CurveParams::p256()).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let pt = curve.mul(&Scalar::random(&curve, &mut rng), &curve.generator());
        assert_eq!(curve.add(&pt, &GroupPoint::Infinity), pt);
        assert_eq!(curve.add(&GroupPoint::Infinity, &pt), pt);
        assert!(curve.add(&pt, &curve.negate(&pt)).is_infinity());
    }

    #[test]
    fn scalar_range_is_enforced() {
        let curve = Curve::new(CurveParams::toy()).unwrap();
        assert!(Scalar::from_u64(&curve, 0).is_err());
        assert!(Scalar::from_u64(&curve, 997).is_err());
        assert!(Scalar::from_u64(&curve, 996).is_ok());
        let s = Scalar::from_u64(&curve, 1).unwrap();
        assert_eq!(curve.mul(&s, &curve.generator()), curve.generator());
    }

    #[test]
    fn p256_order_annihilates_generator() {
        let curve = Curve::new(CurveParams::p256()).unwrap();
        assert!(curve
            .mul_integer(curve.order(), &curve.generator())
            .is_infinity());
    }

    #[test]
    fn p256_known_double() {
        // 2G from the SEC 2 / NIST test vectors.
        let curve = Curve::new(CurveParams::p256()).unwrap();
        let two = Scalar::from_u64(&curve, 2).unwrap();
        let expected = GroupPoint::Affine {
            x: U256::from_be_hex(
                "7cf27b188d034f7e8a52380304b51ac3c08969e277f21b35a60b48fc47669978",
            ),
            y: U256::from_be_hex(
                "07775510db8ed040293d9ac69f7430dbba7dade63ce982299e04b79d227873d1",
            ),
        };
        assert_eq!(curve.mul(&two, &curve.generator()), expected);
    }

    #[test]
    fn validation_rejects_off_curve_and_infinity() {
        let curve = Curve::new(CurveParams::p256()).unwrap();
        let bad = GroupPoint::Affine {
            x: U256::ONE,
            y: U256::ONE,
        };
        assert_eq!(curve.validate(&bad), Err(CryptoError::PointNotOnCurve));
        assert_eq!(
            curve.validate(&GroupPoint::Infinity),
            Err(CryptoError::PointAtInfinity)
        );
        assert!(curve.decode_point(&[0x04, 1, 2]).is_err());
    }

    #[test]
    fn singular_curve_is_rejected() {
        let mut params = CurveParams::toy();
        // x³ over F_991 with a = b = 0 is singular.
        params.a = U256::ZERO;
        params.b = U256::ZERO;
        assert!(matches!(
            Curve::new(params),
            Err(CryptoError::InvalidCurve(_))
        ));
    }
}
