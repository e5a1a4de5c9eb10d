//! Instrumented access to the primitives.
//!
//! Each protocol party in a session holds its own [`Engine`]; every primitive
//! it calls bumps exactly one counter. The hash inside a signature is part of
//! the signature operation (Gsign/Vsign), matching how the cost tables count
//! `E_K{h(·)}`.

use std::cell::Cell;
use std::ops::AddAssign;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::curve::{Curve, GroupPoint, Scalar};
use super::encoding::{decode_concat, encode_concat, Field, FieldKind, OwnedField};
use super::primitives::{self, xor20, Ciphertext, Digest160, SymKey};
use super::sign::{self, Certificate, Signature};
use super::{CryptoError, Suite};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounts {
    pub xor: u32,
    pub hash: u32,
    pub mul_online: u32,
    pub mul_pre: u32,
    pub esym: u32,
    pub dsym: u32,
    pub gsign: u32,
    pub vsign: u32,
    pub kdf: u32,
    pub cert_verify: u32,
    pub mac: u32,
}

impl OpCounts {
    pub fn total(&self) -> u32 {
        self.xor
            + self.hash
            + self.mul_online
            + self.mul_pre
            + self.esym
            + self.dsym
            + self.gsign
            + self.vsign
            + self.kdf
            + self.cert_verify
            + self.mac
    }

    pub fn mul(&self) -> u32 {
        self.mul_online + self.mul_pre
    }
}

impl AddAssign for OpCounts {
    fn add_assign(&mut self, o: Self) {
        self.xor += o.xor;
        self.hash += o.hash;
        self.mul_online += o.mul_online;
        self.mul_pre += o.mul_pre;
        self.esym += o.esym;
        self.dsym += o.dsym;
        self.gsign += o.gsign;
        self.vsign += o.vsign;
        self.kdf += o.kdf;
        self.cert_verify += o.cert_verify;
        self.mac += o.mac;
    }
}

/// Whether a point multiplication depends on anything received during the
/// session. Multiplications that do not can be done ahead of time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MulKind {
    Online,
    Precomputable,
}

pub struct Engine<'s> {
    suite: &'s Suite,
    counts: Cell<OpCounts>,
}

impl<'s> Engine<'s> {
    pub fn new(suite: &'s Suite) -> Self {
        Engine {
            suite,
            counts: Cell::new(OpCounts::default()),
        }
    }

    pub fn suite(&self) -> &'s Suite {
        self.suite
    }

    pub fn curve(&self) -> &'s Curve {
        self.suite.curve()
    }

    pub fn counts(&self) -> OpCounts {
        self.counts.get()
    }

    pub fn reset(&self) {
        self.counts.set(OpCounts::default());
    }

    fn bump(&self, f: impl FnOnce(&mut OpCounts)) {
        let mut c = self.counts.get();
        f(&mut c);
        self.counts.set(c);
    }

    pub fn hash(&self, items: &[Field<'_>]) -> Digest160 {
        self.bump(|c| c.hash += 1);
        self.suite.hash(items)
    }

    /// h(pt) over the canonical point encoding.
    pub fn hash_point(&self, pt: &GroupPoint) -> Digest160 {
        let enc = pt.to_bytes();
        self.hash(&[Field::new(FieldKind::Point, &enc)])
    }

    pub fn xor(&self, a: &[u8; 20], b: &[u8; 20]) -> [u8; 20] {
        self.bump(|c| c.xor += 1);
        xor20(a, b)
    }

    pub fn mul(&self, k: &Scalar, pt: &GroupPoint, kind: MulKind) -> GroupPoint {
        self.bump(|c| match kind {
            MulKind::Online => c.mul_online += 1,
            MulKind::Precomputable => c.mul_pre += 1,
        });
        self.curve().mul(k, pt)
    }

    pub fn kdf(&self, pt: &GroupPoint) -> Result<SymKey, CryptoError> {
        self.bump(|c| c.kdf += 1);
        primitives::kdf_point(pt)
    }

    pub fn encrypt<R: RngCore + ?Sized>(
        &self,
        key: &SymKey,
        items: &[Field<'_>],
        rng: &mut R,
    ) -> Ciphertext {
        self.bump(|c| c.esym += 1);
        primitives::ae_encrypt(key, &encode_concat(items), rng)
    }

    pub fn decrypt(&self, key: &SymKey, ct: &Ciphertext) -> Result<Vec<OwnedField>, CryptoError> {
        self.bump(|c| c.dsym += 1);
        decode_concat(&primitives::ae_decrypt(key, ct)?)
    }

    /// E_S{h(items)}: sign the digest of the encoded items.
    pub fn sign(&self, sk: &Scalar, items: &[Field<'_>]) -> Signature {
        self.bump(|c| c.gsign += 1);
        sign::sign(self.curve(), sk, &self.suite.hash(items))
    }

    pub fn verify(&self, pk: &GroupPoint, items: &[Field<'_>], sig: &Signature) -> bool {
        self.bump(|c| c.vsign += 1);
        sign::verify(self.curve(), pk, &self.suite.hash(items), sig)
    }

    pub fn verify_cert(&self, cert: &Certificate, root: &GroupPoint) -> bool {
        self.bump(|c| c.cert_verify += 1);
        cert.verify(self.curve(), self.suite.hash_alg(), root)
    }

    pub fn mac(&self, key: &[u8], items: &[Field<'_>]) -> Digest160 {
        self.bump(|c| c.mac += 1);
        primitives::mac_fields(key, items)
    }
}
