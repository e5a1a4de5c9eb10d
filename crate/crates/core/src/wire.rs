//! Binary framing for every protocol message of both schemes.
//!
//! A frame is `kind (1 byte) ‖ body length (u32 BE) ‖ body`, where the body is
//! the injective field encoding of the message fields in protocol order:
//!
//! | kind | message        | body fields                                         |
//! |------|----------------|-----------------------------------------------------|
//! | 0x01 | `RegRequest`   | ID_MU, h(PW_MU ‖ x_MU)                              |
//! | 0x02 | `CardIssue`    | Q, H, C, ID_HA                                      |
//! | 0x03 | `Msg1`         | A, DID_MU, C, V_1, ID_HA                            |
//! | 0x04 | `Msg2`         | B, W_2, V_2                                         |
//! | 0x05 | `Msg3`         | W_3, V_3                                            |
//! | 0x06 | `Msg4`         | B, ID_FA, W_1                                       |
//! | 0x07 | `HomeMsg2`     | U, W_1, ID_HA                                       |
//! | 0x08 | `UpdMsg1`      | A_i                                                 |
//! | 0x09 | `UpdMsg2`      | B_i, S_i                                            |
//! | 0x21 | `MunReg1`      | ID_MU, N_MU                                         |
//! | 0x22 | `MunReg2`      | r_MU, PW_MU, N_HA, ID_HA                            |
//! | 0x23 | `MunM1`        | ID_HA, N_HA, r_MU                                   |
//! | 0x24 | `MunM2`        | ID_FA, N_FA, r_MU                                   |
//! | 0x25 | `MunM3`        | S_HA, P_HA                                          |
//! | 0x26 | `MunM4`        | S_FA, aP, S_HA, ID_FA, N_FA                         |
//! | 0x27 | `MunM5`        | bP, S_MF                                            |
//! | 0x28 | `MunUpd1`      | b_iP                                                |
//! | 0x29 | `MunUpd2`      | a_iP, S_MF_i                                        |
//!
//! Points are `0x04 ‖ x ‖ y` with 32-byte coordinates; digests, identities
//! and masked identities are 20 bytes; nonces 16 bytes; signatures 64 bytes;
//! ciphertexts are `nonce ‖ body ‖ tag`. Points are validated against the
//! curve when a frame is decoded.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::{
    decode_concat, encode_concat, Certificate, Ciphertext, CryptoError, Curve, Digest160,
    FieldKind, GroupPoint, Identity, Nonce128, OwnedField, Signature,
};
use crate::mun::messages::*;
use crate::proposed::messages::*;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WireError {
    #[error("truncated frame")]
    Truncated,
    #[error("unknown message kind 0x{0:02x}")]
    UnknownKind(u8),
    #[error("field encoding: {0}")]
    Encoding(CryptoError),
    #[error("expected {expected:?} field, found {found:?}")]
    UnexpectedField {
        expected: FieldKind,
        found: Option<FieldKind>,
    },
    #[error("bad field value: {0}")]
    BadValue(CryptoError),
    #[error("invalid point {0}: {1}")]
    Point(&'static str, CryptoError),
    #[error("trailing fields")]
    Trailing,
}

/// A protocol participant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    #[serde(rename = "MU")]
    Mu,
    #[serde(rename = "FA")]
    Fa,
    #[serde(rename = "HA")]
    Ha,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Mu => "MU",
            Role::Fa => "FA",
            Role::Ha => "HA",
        })
    }
}

/// Builds the field list of a message body.
#[derive(Default)]
pub struct FieldWriter {
    fields: Vec<OwnedField>,
}

impl FieldWriter {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(mut self, kind: FieldKind, bytes: Vec<u8>) -> Self {
        self.fields.push(OwnedField { kind, bytes });
        self
    }

    pub fn point(self, p: &GroupPoint) -> Self {
        self.push(FieldKind::Point, p.to_bytes())
    }

    pub fn digest(self, d: &Digest160) -> Self {
        self.push(FieldKind::Digest, d.0.to_vec())
    }

    pub fn identity(self, id: &Identity) -> Self {
        self.push(FieldKind::Identity, id.0.to_vec())
    }

    pub fn nonce(self, n: &Nonce128) -> Self {
        self.push(FieldKind::Nonce, n.0.to_vec())
    }

    pub fn ciphertext(self, c: &Ciphertext) -> Self {
        self.push(FieldKind::Ciphertext, c.0.clone())
    }

    pub fn signature(self, s: &Signature) -> Self {
        self.push(FieldKind::Signature, s.to_bytes().to_vec())
    }

    pub fn certificate(self, c: &Certificate) -> Self {
        self.push(FieldKind::Certificate, c.to_bytes())
    }

    pub fn finish(self) -> Vec<OwnedField> {
        self.fields
    }
}

/// Reads typed fields in order, validating points against the curve.
pub struct FieldReader<'a> {
    curve: &'a Curve,
    fields: std::vec::IntoIter<OwnedField>,
}

impl<'a> FieldReader<'a> {
    pub fn new(curve: &'a Curve, fields: Vec<OwnedField>) -> Self {
        FieldReader {
            curve,
            fields: fields.into_iter(),
        }
    }

    pub fn from_bytes(curve: &'a Curve, body: &[u8]) -> Result<Self, WireError> {
        Ok(Self::new(
            curve,
            decode_concat(body).map_err(WireError::Encoding)?,
        ))
    }

    fn take(&mut self, expected: FieldKind) -> Result<Vec<u8>, WireError> {
        match self.fields.next() {
            Some(f) if f.kind == expected => Ok(f.bytes),
            other => Err(WireError::UnexpectedField {
                expected,
                found: other.map(|f| f.kind),
            }),
        }
    }

    pub fn point(&mut self, what: &'static str) -> Result<GroupPoint, WireError> {
        let b = self.take(FieldKind::Point)?;
        self.curve
            .decode_point(&b)
            .map_err(|e| WireError::Point(what, e))
    }

    pub fn digest(&mut self) -> Result<Digest160, WireError> {
        Digest160::from_slice(&self.take(FieldKind::Digest)?).map_err(WireError::BadValue)
    }

    pub fn identity(&mut self) -> Result<Identity, WireError> {
        Identity::from_slice(&self.take(FieldKind::Identity)?).map_err(WireError::BadValue)
    }

    pub fn nonce(&mut self) -> Result<Nonce128, WireError> {
        Nonce128::from_slice(&self.take(FieldKind::Nonce)?).map_err(WireError::BadValue)
    }

    pub fn ciphertext(&mut self) -> Result<Ciphertext, WireError> {
        Ok(Ciphertext(self.take(FieldKind::Ciphertext)?))
    }

    pub fn signature(&mut self) -> Result<Signature, WireError> {
        Signature::from_bytes(&self.take(FieldKind::Signature)?).map_err(WireError::BadValue)
    }

    pub fn certificate(&mut self) -> Result<Certificate, WireError> {
        let b = self.take(FieldKind::Certificate)?;
        Certificate::from_bytes(self.curve, &b).map_err(|e| match e {
            CryptoError::PointNotOnCurve
            | CryptoError::PointAtInfinity
            | CryptoError::PointWrongOrder => WireError::Point("certificate key", e),
            other => WireError::BadValue(other),
        })
    }

    pub fn finish(mut self) -> Result<(), WireError> {
        match self.fields.next() {
            None => Ok(()),
            Some(_) => Err(WireError::Trailing),
        }
    }
}

/// Conversion between a message struct and its field list.
pub trait WireBody: Sized {
    fn to_fields(&self) -> Vec<OwnedField>;
    fn read(r: &mut FieldReader<'_>) -> Result<Self, WireError>;

    fn parse(curve: &Curve, fields: Vec<OwnedField>) -> Result<Self, WireError> {
        let mut r = FieldReader::new(curve, fields);
        let v = Self::read(&mut r)?;
        r.finish()?;
        Ok(v)
    }
}

macro_rules! messages {
    ($($variant:ident = $tag:literal),* $(,)?) => {
        /// Every wire message of both schemes.
        #[derive(Clone, Debug, PartialEq, Eq)]
        pub enum ProtocolMessage {
            $($variant($variant),)*
        }

        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
        pub enum MessageKind {
            $($variant,)*
        }

        impl MessageKind {
            pub fn tag(self) -> u8 {
                match self {
                    $(MessageKind::$variant => $tag,)*
                }
            }

            pub fn from_tag(tag: u8) -> Option<Self> {
                match tag {
                    $($tag => Some(MessageKind::$variant),)*
                    _ => None,
                }
            }

            pub fn name(self) -> &'static str {
                match self {
                    $(MessageKind::$variant => stringify!($variant),)*
                }
            }
        }

        impl ProtocolMessage {
            pub fn kind(&self) -> MessageKind {
                match self {
                    $(ProtocolMessage::$variant(_) => MessageKind::$variant,)*
                }
            }

            pub fn fields(&self) -> Vec<OwnedField> {
                match self {
                    $(ProtocolMessage::$variant(m) => m.to_fields(),)*
                }
            }

            fn parse_body(kind: MessageKind, curve: &Curve, fields: Vec<OwnedField>) -> Result<Self, WireError> {
                Ok(match kind {
                    $(MessageKind::$variant => ProtocolMessage::$variant($variant::parse(curve, fields)?),)*
                })
            }
        }

        $(
            impl From<$variant> for ProtocolMessage {
                fn from(m: $variant) -> Self {
                    ProtocolMessage::$variant(m)
                }
            }

            impl TryFrom<ProtocolMessage> for $variant {
                type Error = MessageKind;

                /// Fails with the kind actually received.
                fn try_from(m: ProtocolMessage) -> Result<Self, MessageKind> {
                    match m {
                        ProtocolMessage::$variant(inner) => Ok(inner),
                        other => Err(other.kind()),
                    }
                }
            }
        )*
    };
}

messages! {
    RegRequest = 0x01,
    CardIssue = 0x02,
    Msg1 = 0x03,
    Msg2 = 0x04,
    Msg3 = 0x05,
    Msg4 = 0x06,
    HomeMsg2 = 0x07,
    UpdMsg1 = 0x08,
    UpdMsg2 = 0x09,
    MunReg1 = 0x21,
    MunReg2 = 0x22,
    MunM1 = 0x23,
    MunM2 = 0x24,
    MunM3 = 0x25,
    MunM4 = 0x26,
    MunM5 = 0x27,
    MunUpd1 = 0x28,
    MunUpd2 = 0x29,
}

impl ProtocolMessage {
    pub fn encode(&self) -> Vec<u8> {
        let fields = self.fields();
        let borrowed: Vec<_> = fields.iter().map(OwnedField::as_field).collect();
        let body = encode_concat(&borrowed);
        let mut out = Vec::with_capacity(5 + body.len());
        out.push(self.kind().tag());
        out.extend_from_slice(&(body.len() as u32).to_be_bytes());
        out.extend_from_slice(&body);
        out
    }

    pub fn decode(curve: &Curve, frame: &[u8]) -> Result<Self, WireError> {
        if frame.len() < 5 {
            return Err(WireError::Truncated);
        }
        let kind = MessageKind::from_tag(frame[0]).ok_or(WireError::UnknownKind(frame[0]))?;
        let len = u32::from_be_bytes([frame[1], frame[2], frame[3], frame[4]]) as usize;
        if frame.len() != 5 + len {
            return Err(WireError::Truncated);
        }
        let fields = decode_concat(&frame[5..]).map_err(WireError::Encoding)?;
        Self::parse_body(kind, curve, fields)
    }
}

#[doc(hidden)]
#[macro_export]
macro_rules! wire_ty {
    (point) => {
        $crate::crypto::GroupPoint
    };
    (digest) => {
        $crate::crypto::Digest160
    };
    (identity) => {
        $crate::crypto::Identity
    };
    (nonce) => {
        $crate::crypto::Nonce128
    };
    (ciphertext) => {
        $crate::crypto::Ciphertext
    };
    (signature) => {
        $crate::crypto::Signature
    };
}

#[doc(hidden)]
#[macro_export]
macro_rules! wire_read {
    ($r:ident, point, $f:ident) => {
        $r.point(stringify!($f))?
    };
    ($r:ident, $m:ident, $f:ident) => {
        $r.$m()?
    };
}

/// Declares a message struct whose fields map one-to-one onto wire fields.
#[macro_export]
macro_rules! wire_message {
    ($(#[$meta:meta])* pub struct $name:ident { $($(#[$fm:meta])* $field:ident : $kind:ident),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq)]
        pub struct $name {
            $($(#[$fm])* pub $field: $crate::wire_ty!($kind),)*
        }

        impl $crate::wire::WireBody for $name {
            fn to_fields(&self) -> Vec<$crate::crypto::OwnedField> {
                $crate::wire::FieldWriter::new()
                    $(.$kind(&self.$field))*
                    .finish()
            }

            fn read(r: &mut $crate::wire::FieldReader<'_>) -> Result<Self, $crate::wire::WireError> {
                Ok($name { $($field: $crate::wire_read!(r, $kind, $field),)* })
            }
        }
    };
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::{Scalar, Suite};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn sample(suite: &Suite, seed: u64) -> Vec<ProtocolMessage> {
        let curve = suite.curve();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let pt = curve.mul(&Scalar::random(curve, &mut rng), &curve.generator());
        let d = Digest160::random(&mut rng);
        let id = Identity::random(&mut rng);
        let n = Nonce128::random(&mut rng);
        vec![
            Msg1 {
                a: pt,
                did: d,
                c: pt,
                v1: d,
                id_ha: id,
            }
            .into(),
            Msg4 {
                b: pt,
                id_fa: id,
                w1: d,
            }
            .into(),
            UpdMsg2 { b_i: pt, s_i: d }.into(),
            MunM1 {
                id_ha: id,
                n_ha: n,
                r_mu: d,
            }
            .into(),
            MunM4 {
                s_fa: d,
                a_pub: pt,
                p_fa: MunPfa {
                    s_ha: d,
                    id_fa: id,
                    n_fa: n,
                },
            }
            .into(),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn frames_roundtrip(seed in any::<u64>()) {
            let suite = Suite::toy();
            for m in sample(&suite, seed) {
                let back = ProtocolMessage::decode(suite.curve(), &m.encode()).unwrap();
                prop_assert_eq!(back, m);
            }
        }
    }

    #[test]
    fn off_curve_point_is_rejected_at_decode() {
        let suite = Suite::toy();
        let m: ProtocolMessage = UpdMsg1 {
            a_i: GroupPoint::Affine {
                x: 1u64.into(),
                y: 1u64.into(),
            },
        }
        .into();
        assert!(matches!(
            ProtocolMessage::decode(suite.curve(), &m.encode()),
            Err(WireError::Point(_, CryptoError::PointNotOnCurve))
        ));
    }

    #[test]
    fn framing_errors() {
        let suite = Suite::toy();
        assert_eq!(
            ProtocolMessage::decode(suite.curve(), &[0x03, 0, 0]),
            Err(WireError::Truncated)
        );
        assert_eq!(
            ProtocolMessage::decode(suite.curve(), &[0x7f, 0, 0, 0, 0]),
            Err(WireError::UnknownKind(0x7f))
        );
        let good = sample(&suite, 1)[1].encode();
        let mut trunc = good.clone();
        trunc.pop();
        assert_eq!(
            ProtocolMessage::decode(suite.curve(), &trunc),
            Err(WireError::Truncated)
        );
        // Msg4 body decoded under the Msg1 tag.
        let mut wrong = good;
        wrong[0] = 0x03;
        assert!(ProtocolMessage::decode(suite.curve(), &wrong).is_err());
    }
}
