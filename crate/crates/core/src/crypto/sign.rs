//! ECDSA over the configured curve, key pairs, and a depth-1 certificate
//! stub issued by a single root CA.
//!
//! Nonces are derived from the private key and digest (HMAC-SHA256 with a
//! retry counter), so signing consumes no randomness and seeded runs stay
//! reproducible.

use crypto_bigint::modular::runtime_mod::DynResidue;
use crypto_bigint::{Encoding, U256};
use hmac::{Hmac, Mac};
use rand::RngCore;
use sha2::Sha256;

use super::curve::{Curve, GroupPoint, Scalar, POINT_BYTES};
use super::encoding::{decode_concat, encode_concat, Field, FieldKind};
use super::primitives::{hash_fields, Digest160, HashAlg, Identity};
use super::CryptoError;

pub const SIGNATURE_BYTES: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Signature {
    r: U256,
    s: U256,
}

impl Signature {
    pub fn to_bytes(&self) -> [u8; SIGNATURE_BYTES] {
        let mut out = [0u8; SIGNATURE_BYTES];
        out[..32].copy_from_slice(&self.r.to_be_bytes());
        out[32..].copy_from_slice(&self.s.to_be_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        if bytes.len() != SIGNATURE_BYTES {
            return Err(CryptoError::MalformedSignature);
        }
        Ok(Signature {
            r: U256::from_be_slice(&bytes[..32]),
            s: U256::from_be_slice(&bytes[32..]),
        })
    }

    /// A syntactically valid signature with random components, for forgery
    /// attempts.
    pub fn random<R: RngCore + ?Sized>(curve: &Curve, rng: &mut R) -> Self {
        Signature {
            r: *Scalar::random(curve, rng).value(),
            s: *Scalar::random(curve, rng).value(),
        }
    }
}

fn digest_to_int(curve: &Curve, digest: &Digest160) -> U256 {
    let mut buf = [0u8; 32];
    buf[12..].copy_from_slice(&digest.0);
    curve.reduce_mod_order(&U256::from_be_slice(&buf))
}

pub fn sign(curve: &Curve, sk: &Scalar, digest: &Digest160) -> Signature {
    let fnp = curve.scalar_field();
    let z = DynResidue::new(&digest_to_int(curve, digest), fnp);
    let d = DynResidue::new(sk.value(), fnp);
    let mut counter: u32 = 0;
    loop {
        let mut mac =
            <Hmac<Sha256> as Mac>::new_from_slice(&sk.to_bytes()).expect("any key length");
        mac.update(&digest.0);
        mac.update(&counter.to_be_bytes());
        let raw = U256::from_be_slice(&mac.finalize().into_bytes());
        counter += 1;
        let k = curve.reduce_mod_order(&raw);
        if k == U256::ZERO {
            continue;
        }
        let big_r = curve.mul_integer(&k, &curve.generator());
        let GroupPoint::Affine { x, .. } = big_r else {
            continue;
        };
        let r = curve.reduce_mod_order(&x);
        if r == U256::ZERO {
            continue;
        }
        let (kinv, _) = DynResidue::new(&k, fnp).invert();
        let s = kinv
            .mul(&z.add(&DynResidue::new(&r, fnp).mul(&d)))
            .retrieve();
        if s == U256::ZERO {
            continue;
        }
        return Signature { r, s };
    }
}

pub fn verify(curve: &Curve, pk: &GroupPoint, digest: &Digest160, sig: &Signature) -> bool {
    let n = curve.order();
    if sig.r == U256::ZERO || sig.s == U256::ZERO || sig.r >= *n || sig.s >= *n {
        return false;
    }
    if curve.validate(pk).is_err() {
        return false;
    }
    let fnp = curve.scalar_field();
    let (w, _) = DynResidue::new(&sig.s, fnp).invert();
    let z = DynResidue::new(&digest_to_int(curve, digest), fnp);
    let u1 = z.mul(&w).retrieve();
    let u2 = DynResidue::new(&sig.r, fnp).mul(&w).retrieve();
    match curve.mul_add_integers(&u1, &u2, pk) {
        GroupPoint::Infinity => false,
        GroupPoint::Affine { x, .. } => curve.reduce_mod_order(&x) == sig.r,
    }
}

#[derive(Clone, Debug)]
pub struct KeyPair {
    pub secret: Scalar,
    pub public: GroupPoint,
}

impl KeyPair {
    pub fn generate<R: RngCore + ?Sized>(curve: &Curve, rng: &mut R) -> Self {
        let secret = Scalar::random(curve, rng);
        let public = curve.mul(&secret, &curve.generator());
        KeyPair { secret, public }
    }
}

/// Cert_X: binds an identity to a signing public key under the root CA.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub subject: Identity,
    pub public: GroupPoint,
    pub signature: Signature,
}

impl Certificate {
    fn digest(alg: HashAlg, subject: &Identity, public: &GroupPoint) -> Digest160 {
        let pk = public.to_bytes();
        hash_fields(
            alg,
            &[
                Field::label("roamauth/cert"),
                subject.field(),
                Field::new(FieldKind::Point, &pk),
            ],
        )
    }

    pub fn verify(&self, curve: &Curve, alg: HashAlg, root: &GroupPoint) -> bool {
        curve.validate(&self.public).is_ok()
            && verify(
                curve,
                root,
                &Self::digest(alg, &self.subject, &self.public),
                &self.signature,
            )
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let pk = self.public.to_bytes();
        let sig = self.signature.to_bytes();
        encode_concat(&[
            self.subject.field(),
            Field::new(FieldKind::Point, &pk),
            Field::new(FieldKind::Signature, &sig),
        ])
    }

    pub fn from_bytes(curve: &Curve, bytes: &[u8]) -> Result<Self, CryptoError> {
        let fields = decode_concat(bytes)?;
        match fields.as_slice() {
            [id, pk, sig]
                if id.kind == FieldKind::Identity
                    && pk.kind == FieldKind::Point
                    && sig.kind == FieldKind::Signature =>
            {
                if pk.bytes.len() != POINT_BYTES {
                    return Err(CryptoError::MalformedPoint);
                }
                Ok(Certificate {
                    subject: Identity::from_slice(&id.bytes)?,
                    public: curve.decode_point(&pk.bytes)?,
                    signature: Signature::from_bytes(&sig.bytes)?,
                })
            }
            _ => Err(CryptoError::MalformedEncoding("certificate layout")),
        }
    }
}

/// Minimal root certificate authority.
#[derive(Clone, Debug)]
pub struct RootCa {
    keys: KeyPair,
}

impl RootCa {
    pub fn generate<R: RngCore + ?Sized>(curve: &Curve, rng: &mut R) -> Self {
        RootCa {
            keys: KeyPair::generate(curve, rng),
        }
    }

    pub fn public(&self) -> GroupPoint {
        self.keys.public
    }

    pub fn issue(
        &self,
        curve: &Curve,
        alg: HashAlg,
        subject: Identity,
        public: GroupPoint,
    ) -> Certificate {
        let digest = Certificate::digest(alg, &subject, &public);
        Certificate {
            subject,
            public,
            signature: sign(curve, &self.keys.secret, &digest),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::curve::CurveParams;
    use crate::crypto::primitives::hash_bytes;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn p256() -> Curve {
        Curve::new(CurveParams::p256()).unwrap()
    }

    #[test]
    fn sign_verify_roundtrip() {
        let curve = p256();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let kp = KeyPair::generate(&curve, &mut rng);
        let d = hash_bytes(HashAlg::Sha256Trunc160, b"h(A, V1, DID)");
        let sig = sign(&curve, &kp.secret, &d);
        assert!(verify(&curve, &kp.public, &d, &sig));
        let other = hash_bytes(HashAlg::Sha256Trunc160, b"something else");
        assert!(!verify(&curve, &kp.public, &other, &sig));
    }

    #[test]
    fn foreign_key_never_verifies() {
        let curve = p256();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let signer = KeyPair::generate(&curve, &mut rng);
        let mut accepted = 0;
        for i in 0..1000u32 {
            let d = hash_bytes(HashAlg::Sha256Trunc160, &i.to_be_bytes());
            let sig = sign(&curve, &signer.secret, &d);
            let other = KeyPair::generate(&curve, &mut rng);
            if verify(&curve, &other.public, &d, &sig) {
                accepted += 1;
            }
        }
        assert_eq!(accepted, 0);
    }

    #[test]
    fn malformed_encoding_is_an_error() {
        assert_eq!(
            Signature::from_bytes(&[0u8; 63]),
            Err(CryptoError::MalformedSignature)
        );
        let curve = p256();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let kp = KeyPair::generate(&curve, &mut rng);
        let d = hash_bytes(HashAlg::Sha256Trunc160, b"x");
        let zero = Signature::from_bytes(&[0u8; 64]).unwrap();
        assert!(!verify(&curve, &kp.public, &d, &zero));
    }

    #[test]
    fn toy_curve_signatures_work() {
        let curve = Curve::new(CurveParams::toy()).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let kp = KeyPair::generate(&curve, &mut rng);
        let d = hash_bytes(HashAlg::Sha256Trunc160, b"toy");
        assert!(verify(
            &curve,
            &kp.public,
            &d,
            &sign(&curve, &kp.secret, &d)
        ));
    }

    #[test]
    fn certificates() {
        let curve = p256();
        let alg = HashAlg::Sha256Trunc160;
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let ca = RootCa::generate(&curve, &mut rng);
        let fa = KeyPair::generate(&curve, &mut rng);
        let id = Identity::from_label("fa-1").unwrap();
        let cert = ca.issue(&curve, alg, id, fa.public);
        assert!(cert.verify(&curve, alg, &ca.public()));
        let parsed = Certificate::from_bytes(&curve, &cert.to_bytes()).unwrap();
        assert_eq!(parsed, cert);

        let rogue = RootCa::generate(&curve, &mut rng);
        assert!(!cert.verify(&curve, alg, &rogue.public()));
        let mut relabelled = cert.clone();
        relabelled.subject = Identity::from_label("fa-2").unwrap();
        assert!(!relabelled.verify(&curve, alg, &ca.public()));
    }
}
