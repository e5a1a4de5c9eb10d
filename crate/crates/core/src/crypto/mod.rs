//! Cryptographic building blocks shared by both schemes.

pub mod cdl;
pub mod curve;
pub mod encoding;
pub mod meter;
pub mod primitives;
pub mod sign;
pub mod testvec;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use curve::{Curve, CurveParams, GroupPoint, Scalar};
pub use encoding::{decode_concat, encode_concat, Field, FieldKind, OwnedField};
pub use meter::{Engine, MulKind, OpCounts};
pub use primitives::{
    ae_decrypt, ae_encrypt, hash_bytes, hash_fields, kdf_point, mac_fields, xor160, Ciphertext,
    Digest160, HashAlg, Identity, Nonce128, SymKey,
};
pub use sign::{sign, verify, Certificate, KeyPair, RootCa, Signature};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("invalid curve parameters: {0}")]
    InvalidCurve(&'static str),
    #[error("scalar outside [1, n-1]")]
    ScalarOutOfRange,
    #[error("malformed point encoding")]
    MalformedPoint,
    #[error("point is not on the curve")]
    PointNotOnCurve,
    #[error("point at infinity not allowed here")]
    PointAtInfinity,
    #[error("point is outside the prime-order subgroup")]
    PointWrongOrder,
    #[error("length mismatch: expected {expected} bytes, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("malformed identity")]
    MalformedIdentity,
    #[error("malformed encoding: {0}")]
    MalformedEncoding(&'static str),
    #[error("malformed signature encoding")]
    MalformedSignature,
    #[error("authenticated decryption failed")]
    AuthenticationFailed,
    #[error("discrete log oracle refused: group order has {0} bits")]
    OracleRefused(usize),
    #[error("config: {0}")]
    Config(String),
}

/// Which curve a suite runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CurveProfile {
    /// Order-997 curve; discrete logs are brute-forceable.
    Toy,
    #[default]
    P256,
}

impl CurveProfile {
    pub fn params(self) -> CurveParams {
        match self {
            CurveProfile::Toy => CurveParams::toy(),
            CurveProfile::P256 => CurveParams::p256(),
        }
    }

    pub fn is_toy(self) -> bool {
        self == CurveProfile::Toy
    }
}

impl std::str::FromStr for CurveProfile {
    type Err = CryptoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "toy" => Ok(CurveProfile::Toy),
            "p256" | "production" => Ok(CurveProfile::P256),
            other => Err(CryptoError::Config(format!(
                "unknown curve profile `{other}`"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum CipherAlg {
    #[default]
    #[serde(rename = "chacha20poly1305")]
    ChaCha20Poly1305,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum SignatureAlg {
    /// ECDSA with HMAC-SHA256 derived nonces.
    #[default]
    #[serde(rename = "ecdsa")]
    Ecdsa,
}

/// Algorithm choices. Only output sizes are fixed by the protocol; everything
/// else is declared here.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub curve: CurveProfile,
    pub hash: HashAlg,
    pub cipher: CipherAlg,
    pub signature: SignatureAlg,
    pub key_bytes: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            curve: CurveProfile::P256,
            hash: HashAlg::Sha256Trunc160,
            cipher: CipherAlg::ChaCha20Poly1305,
            signature: SignatureAlg::Ecdsa,
            key_bytes: primitives::SYM_KEY_BYTES,
        }
    }
}

impl SuiteConfig {
    pub fn with_curve(curve: CurveProfile) -> Self {
        SuiteConfig {
            curve,
            ..Default::default()
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self, CryptoError> {
        let cfg: SuiteConfig = toml::from_str(s).map_err(|e| CryptoError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CryptoError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CryptoError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    fn check(&self) -> Result<(), CryptoError> {
        if self.key_bytes != primitives::SYM_KEY_BYTES {
            return Err(CryptoError::Config(format!(
                "key_bytes must be {} for chacha20poly1305",
                primitives::SYM_KEY_BYTES
            )));
        }
        Ok(())
    }
}

/// A configured curve plus algorithm choices.
#[derive(Clone, Debug)]
pub struct Suite {
    config: SuiteConfig,
    curve: Curve,
}

impl Suite {
    pub fn new(config: SuiteConfig) -> Result<Self, CryptoError> {
        config.check()?;
        let curve = Curve::new(config.curve.params())?;
        Ok(Suite { config, curve })
    }

    pub fn toy() -> Self {
        Self::new(SuiteConfig::with_curve(CurveProfile::Toy)).expect("built-in toy curve is valid")
    }

    pub fn production() -> Self {
        Self::new(SuiteConfig::default()).expect("built-in P-256 is valid")
    }

    pub fn config(&self) -> &SuiteConfig {
        &self.config
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    pub fn profile(&self) -> CurveProfile {
        self.config.curve
    }

    pub fn hash_alg(&self) -> HashAlg {
        self.config.hash
    }

    /// Uninstrumented h(·) for code outside a metered session.
    pub fn hash(&self, items: &[Field<'_>]) -> Digest160 {
        hash_fields(self.config.hash, items)
    }

    pub fn engine(&self) -> Engine<'_> {
        Engine::new(self)
    }
}
