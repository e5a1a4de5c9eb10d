use thiserror::Error;

use crate::crypto::CryptoError;

/// Why a protocol party aborted a step. Each variant has a stable numeric
/// code so it can cross the C ABI.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("local verification failed: H* != H")]
    LocalVerificationFailed,
    #[error("invalid point in {0}: {1}")]
    InvalidPoint(&'static str, CryptoError),
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("authenticated decryption of {0} failed")]
    DecryptionFailed(&'static str),
    #[error("certificate for {0} does not verify under the root CA")]
    InvalidCertificate(&'static str),
    #[error("signature {0} does not verify")]
    InvalidSignature(&'static str),
    #[error("V1 mismatch: user not authenticated")]
    V1Mismatch,
    #[error("W1 mismatch: agents not authenticated")]
    W1Mismatch,
    #[error("session mismatch: recovered {0} differs from this session")]
    SessionMismatch(&'static str),
    #[error("key update confirmation S_i mismatch")]
    UpdateMismatch,
    #[error("old password rejected by the smart card")]
    PasswordChangeRejected,
    #[error("smart card has no x_MU")]
    CardIncomplete,
    #[error("r_MU matches no registered user")]
    UnknownUser,
    #[error("S_HA check failed at foreign agent")]
    ShaMismatch,
    #[error("S_FA check failed at mobile user")]
    SfaMismatch,
    #[error("S_MF check failed")]
    SmfMismatch,
    #[error("home agent identity is unknown or does not match")]
    UnknownHomeAgent,
}

impl ProtocolError {
    pub fn code(&self) -> i32 {
        use ProtocolError::*;
        match self {
            LocalVerificationFailed => 101,
            InvalidPoint(..) => 102,
            Malformed(_) => 103,
            DecryptionFailed(_) => 104,
            InvalidCertificate(_) => 105,
            InvalidSignature(_) => 106,
            V1Mismatch => 107,
            W1Mismatch => 108,
            SessionMismatch(_) => 109,
            UpdateMismatch => 110,
            PasswordChangeRejected => 111,
            CardIncomplete => 112,
            UnknownUser => 113,
            ShaMismatch => 114,
            SfaMismatch => 115,
            SmfMismatch => 116,
            UnknownHomeAgent => 117,
        }
    }
}

impl From<crate::wire::WireError> for ProtocolError {
    fn from(e: crate::wire::WireError) -> Self {
        match e {
            crate::wire::WireError::Point(what, err) => ProtocolError::InvalidPoint(what, err),
            other => ProtocolError::Malformed(other.to_string()),
        }
    }
}
