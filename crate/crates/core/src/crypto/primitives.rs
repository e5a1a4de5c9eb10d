//! Fixed-width values, the truncated hash, point KDF, authenticated
//! encryption and the MAC used by the baseline scheme.

use std::fmt;

use chacha20poly1305::aead::{Aead, KeyInit};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use hmac::{Hmac, Mac};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256, Sha512};
use zeroize::Zeroize;

use super::curve::GroupPoint;
use super::encoding::{encode_concat, Field, FieldKind};
use super::CryptoError;

pub const DIGEST_BYTES: usize = 20;
pub const IDENTITY_BYTES: usize = 20;
pub const NONCE_BYTES: usize = 16;
pub const SYM_KEY_BYTES: usize = 32;
const AE_NONCE_BYTES: usize = 12;

macro_rules! fixed_bytes {
    ($name:ident, $len:expr, $kind:expr) => {
        #[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub [u8; $len]);

        impl $name {
            pub const LEN: usize = $len;

            pub fn from_slice(bytes: &[u8]) -> Result<Self, CryptoError> {
                let arr: [u8; $len] =
                    bytes.try_into().map_err(|_| CryptoError::LengthMismatch {
                        expected: $len,
                        actual: bytes.len(),
                    })?;
                Ok(Self(arr))
            }

            pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
                let mut b = [0u8; $len];
                rng.fill_bytes(&mut b);
                Self(b)
            }

            pub fn as_bytes(&self) -> &[u8; $len] {
                &self.0
            }

            pub fn field(&self) -> Field<'_> {
                Field::new($kind, &self.0)
            }

            pub fn to_hex(&self) -> String {
                hex::encode(self.0)
            }

            pub fn from_hex(s: &str) -> Result<Self, CryptoError> {
                let v = hex::decode(s).map_err(|_| CryptoError::MalformedEncoding("bad hex"))?;
                Self::from_slice(&v)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), hex::encode(self.0))
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&self.to_hex())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                Self::from_hex(&s).map_err(serde::de::Error::custom)
            }
        }
    };
}

fixed_bytes!(Digest160, DIGEST_BYTES, FieldKind::Digest);
fixed_bytes!(Identity, IDENTITY_BYTES, FieldKind::Identity);
fixed_bytes!(Nonce128, NONCE_BYTES, FieldKind::Nonce);

impl Identity {
    /// A 160-bit identity from a short label, zero padded on the right.
    pub fn from_label(label: &str) -> Result<Self, CryptoError> {
        let b = label.as_bytes();
        if b.is_empty() || b.len() > IDENTITY_BYTES {
            return Err(CryptoError::MalformedIdentity);
        }
        let mut out = [0u8; IDENTITY_BYTES];
        out[..b.len()].copy_from_slice(b);
        Ok(Identity(out))
    }

    /// Parses either 40 hex characters or a short label.
    pub fn parse(s: &str) -> Result<Self, CryptoError> {
        if s.len() == 2 * IDENTITY_BYTES && s.bytes().all(|c| c.is_ascii_hexdigit()) {
            return Self::from_hex(s);
        }
        Self::from_label(s)
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let trimmed: &[u8] = match self.0.iter().rposition(|&b| b != 0) {
            Some(i) => &self.0[..=i],
            None => &[],
        };
        match std::str::from_utf8(trimmed) {
            Ok(s) if !s.is_empty() && s.chars().all(|c| c.is_ascii_graphic() || c == ' ') => {
                f.write_str(s)
            }
            _ => f.write_str(&self.to_hex()),
        }
    }
}

/// Digest algorithms selectable in the suite config. Output is always
/// truncated to 160 bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum HashAlg {
    #[default]
    #[serde(rename = "sha256-160")]
    Sha256Trunc160,
    #[serde(rename = "sha512-160")]
    Sha512Trunc160,
}

pub fn hash_bytes(alg: HashAlg, data: &[u8]) -> Digest160 {
    let mut out = [0u8; DIGEST_BYTES];
    match alg {
        HashAlg::Sha256Trunc160 => out.copy_from_slice(&Sha256::digest(data)[..DIGEST_BYTES]),
        HashAlg::Sha512Trunc160 => out.copy_from_slice(&Sha512::digest(data)[..DIGEST_BYTES]),
    }
    Digest160(out)
}

/// h(f₁ ‖ f₂ ‖ …) with the injective field encoding.
pub fn hash_fields(alg: HashAlg, items: &[Field<'_>]) -> Digest160 {
    hash_bytes(alg, &encode_concat(items))
}

/// Bitwise XOR of two equal-length strings.
pub fn xor160(d1: &[u8], d2: &[u8]) -> Result<Vec<u8>, CryptoError> {
    if d1.len() != d2.len() {
        return Err(CryptoError::LengthMismatch {
            expected: d1.len(),
            actual: d2.len(),
        });
    }
    Ok(d1.iter().zip(d2).map(|(a, b)| a ^ b).collect())
}

pub(crate) fn xor20(a: &[u8; 20], b: &[u8; 20]) -> [u8; 20] {
    let mut out = [0u8; 20];
    for i in 0..20 {
        out[i] = a[i] ^ b[i];
    }
    out
}

/// Symmetric key derived from a group point.
#[derive(Clone, PartialEq, Eq)]
pub struct SymKey([u8; SYM_KEY_BYTES]);

impl SymKey {
    pub fn from_bytes(bytes: [u8; SYM_KEY_BYTES]) -> Self {
        SymKey(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; SYM_KEY_BYTES] {
        &self.0
    }
}

impl Drop for SymKey {
    fn drop(&mut self) {
        self.0.zeroize();
    }
}

impl fmt::Debug for SymKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SymKey(..)")
    }
}

/// SHA-256 over the canonical point encoding under a fixed label.
pub fn kdf_point(pt: &GroupPoint) -> Result<SymKey, CryptoError> {
    if pt.is_infinity() {
        return Err(CryptoError::PointAtInfinity);
    }
    let enc = pt.to_bytes();
    let input = encode_concat(&[
        Field::label("roamauth/kdf"),
        Field::new(FieldKind::Point, &enc),
    ]);
    let mut key = [0u8; SYM_KEY_BYTES];
    key.copy_from_slice(&Sha256::digest(input));
    Ok(SymKey(key))
}

/// `nonce ‖ ChaCha20-Poly1305(plaintext)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Ciphertext(pub Vec<u8>);

impl Ciphertext {
    pub fn field(&self) -> Field<'_> {
        Field::new(FieldKind::Ciphertext, &self.0)
    }
}

pub fn ae_encrypt<R: RngCore + ?Sized>(key: &SymKey, msg: &[u8], rng: &mut R) -> Ciphertext {
    let cipher = ChaCha20Poly1305::new(Key::from_slice(&key.0));
    let mut nonce = [0u8; AE_NONCE_BYTES];
    rng.fill_bytes(&mut nonce);
    let body = cipher
        .encrypt(Nonce::from_slice(&nonce), msg)
        .expect("chacha20poly1305 encryption is infallible for in-memory buffers");
    let mut out = nonce.to_vec();
    out.extend_from_slice(&body);
    Ciphertext(out)
}

pub fn ae_decrypt(key: &SymKey, ct: &Ciphertext) -> Result<Vec<u8>, CryptoError> {
    if ct.0.len() < AE_NONCE_BYTES {
        return Err(CryptoError::AuthenticationFailed);
    }
    let (nonce, body) = ct.0.split_at(AE_NONCE_BYTES);
    let cipher = ChaCha20Poly1305::new(Key::from_slice(&key.0));
    cipher
        .decrypt(Nonce::from_slice(nonce), body)
        .map_err(|_| CryptoError::AuthenticationFailed)
}

/// f_K(·): HMAC-SHA256 over the field encoding, truncated to 160 bits.
pub fn mac_fields(key: &[u8], items: &[Field<'_>]) -> Digest160 {
    let mut mac = <Hmac<Sha256> as Mac>::new_from_slice(key).expect("HMAC accepts any key length");
    mac.update(&encode_concat(items));
    let tag = mac.finalize().into_bytes();
    let mut out = [0u8; DIGEST_BYTES];
    out.copy_from_slice(&tag[..DIGEST_BYTES]);
    Digest160(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::curve::{Curve, CurveParams, Scalar};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use std::collections::HashSet;

    #[test]
    fn hash_is_deterministic_and_160_bits() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let m: Vec<u8> = (0..64).map(|_| rng.gen()).collect();
        assert_eq!(
            hash_bytes(HashAlg::Sha256Trunc160, &m),
            hash_bytes(HashAlg::Sha256Trunc160, &m)
        );
        assert_eq!(hash_bytes(HashAlg::Sha256Trunc160, b"").0.len() * 8, 160);
        assert_ne!(
            hash_bytes(HashAlg::Sha256Trunc160, &m),
            hash_bytes(HashAlg::Sha512Trunc160, &m)
        );
    }

    #[test]
    fn no_collisions_over_random_pairs() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let mut seen = HashSet::new();
        let mut inputs = HashSet::new();
        for _ in 0..20_000 {
            let m: [u8; 16] = rng.gen();
            if inputs.insert(m) {
                assert!(seen.insert(hash_bytes(HashAlg::Sha256Trunc160, &m)));
            }
        }
    }

    #[test]
    fn xor_laws() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let d1: [u8; 20] = rng.gen();
        let d2: [u8; 20] = rng.gen();
        assert_eq!(xor160(&d1, &[0u8; 20]).unwrap(), d1.to_vec());
        assert_eq!(xor160(&d1, &d1).unwrap(), vec![0u8; 20]);
        let once = xor160(&d1, &d2).unwrap();
        assert_eq!(xor160(&once, &d2).unwrap(), d1.to_vec());
        assert!(matches!(
            xor160(&d1, &d2[..19]),
            Err(CryptoError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn identity_labels() {
        let id = Identity::from_label("alice").unwrap();
        assert_eq!(id.to_string(), "alice");
        assert_eq!(Identity::parse(&id.to_hex()).unwrap(), id);
        assert!(Identity::from_label("").is_err());
        assert!(Identity::from_label("this label is far too long").is_err());
    }

    #[test]
    fn kdf_rejects_infinity_and_is_deterministic() {
        let curve = Curve::new(CurveParams::toy()).unwrap();
        assert!(kdf_point(&GroupPoint::Infinity).is_err());
        let g = curve.generator();
        assert_eq!(kdf_point(&g).unwrap(), kdf_point(&g).unwrap());
    }

    #[test]
    fn kdf_is_injective_over_toy_group() {
        let curve = Curve::new(CurveParams::toy()).unwrap();
        let mut keys = HashSet::new();
        for k in 1..997u64 {
            let pt = curve.mul(&Scalar::from_u64(&curve, k).unwrap(), &curve.generator());
            assert!(keys.insert(*kdf_point(&pt).unwrap().as_bytes()));
        }
    }

    #[test]
    fn ae_roundtrip_and_tamper_detection() {
        let curve = Curve::new(CurveParams::toy()).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let key = kdf_point(&curve.generator()).unwrap();
        let msg: Vec<u8> = (0..1024).map(|_| rng.gen()).collect();
        let ct = ae_encrypt(&key, &msg, &mut rng);
        assert_eq!(ae_decrypt(&key, &ct).unwrap(), msg);
        let mut bad = ct.clone();
        bad.0[20] ^= 0x01;
        assert_eq!(
            ae_decrypt(&key, &bad),
            Err(CryptoError::AuthenticationFailed)
        );
        let other = kdf_point(&curve.add(&curve.generator(), &curve.generator())).unwrap();
        assert_eq!(
            ae_decrypt(&other, &ct),
            Err(CryptoError::AuthenticationFailed)
        );
    }

    #[test]
    fn random_mutations_are_never_accepted() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let curve = Curve::new(CurveParams::toy()).unwrap();
        let key = kdf_point(&curve.generator()).unwrap();
        let ct = ae_encrypt(&key, b"payload under test", &mut rng);
        let mut accepted = 0;
        for _ in 0..10_000 {
            let mut m = ct.clone();
            let i = rng.gen_range(0..m.0.len());
            let bit: u8 = 1 << rng.gen_range(0..8);
            m.0[i] ^= bit;
            if ae_decrypt(&key, &m).is_ok() {
                accepted += 1;
            }
        }
        assert_eq!(accepted, 0);
    }

    #[test]
    fn ecdh_keys_agree_on_toy_curve() {
        let curve = Curve::new(CurveParams::toy()).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let b = Scalar::random(&curve, &mut rng);
        let c = Scalar::random(&curve, &mut rng);
        let big_b = curve.mul(&b, &curve.generator());
        let big_c = curve.mul(&c, &curve.generator());
        let k_fa = kdf_point(&curve.mul(&b, &big_c)).unwrap();
        let k_ha = kdf_point(&curve.mul(&c, &big_b)).unwrap();
        let ct = ae_encrypt(&k_fa, b"W2", &mut rng);
        assert_eq!(ae_decrypt(&k_ha, &ct).unwrap(), b"W2");
    }

    #[test]
    fn mac_depends_on_key() {
        let t1 = mac_fields(b"k1", &[Field::bytes(b"m")]);
        let t2 = mac_fields(b"k2", &[Field::bytes(b"m")]);
        assert_ne!(t1, t2);
        assert_eq!(t1, mac_fields(b"k1", &[Field::bytes(b"m")]));
    }
}
