//! Injective field encoding used for every hash input and message body.
//!
//! Each field is written as `kind (1 byte) ‖ length (u32 BE) ‖ payload`, so a
//! list of fields has exactly one encoding and no two distinct lists collide.

use serde::{Deserialize, Serialize};

use super::CryptoError;

/// Type tag carried by every encoded field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum FieldKind {
    Point = 1,
    Digest = 2,
    Identity = 3,
    Nonce = 4,
    Bytes = 5,
    Ciphertext = 6,
    Signature = 7,
    Certificate = 8,
    Label = 9,
}

impl FieldKind {
    pub fn from_tag(tag: u8) -> Option<Self> {
        use FieldKind::*;
        Some(match tag {
            1 => Point,
            2 => Digest,
            3 => Identity,
            4 => Nonce,
            5 => Bytes,
            6 => Ciphertext,
            7 => Signature,
            8 => Certificate,
            9 => Label,
            _ => return None,
        })
    }
}

/// One typed field, borrowed from its owner.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Field<'a> {
    pub kind: FieldKind,
    pub bytes: &'a [u8],
}

impl<'a> Field<'a> {
    pub fn new(kind: FieldKind, bytes: &'a [u8]) -> Self {
        Field { kind, bytes }
    }

    pub fn label(text: &'a str) -> Self {
        Field::new(FieldKind::Label, text.as_bytes())
    }

    pub fn bytes(bytes: &'a [u8]) -> Self {
        Field::new(FieldKind::Bytes, bytes)
    }
}

/// An owned decoded field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OwnedField {
    pub kind: FieldKind,
    pub bytes: Vec<u8>,
}

impl OwnedField {
    pub fn as_field(&self) -> Field<'_> {
        Field::new(self.kind, &self.bytes)
    }
}

pub fn encode_concat(items: &[Field<'_>]) -> Vec<u8> {
    let len = items.iter().map(|f| 5 + f.bytes.len()).sum();
    let mut out = Vec::with_capacity(len);
    for f in items {
        out.push(f.kind as u8);
        out.extend_from_slice(&(f.bytes.len() as u32).to_be_bytes());
        out.extend_from_slice(f.bytes);
    }
    out
}

pub fn decode_concat(mut bytes: &[u8]) -> Result<Vec<OwnedField>, CryptoError> {
    let mut out = Vec::new();
    while !bytes.is_empty() {
        if bytes.len() < 5 {
            return Err(CryptoError::MalformedEncoding("truncated field header"));
        }
        let kind = FieldKind::from_tag(bytes[0])
            .ok_or(CryptoError::MalformedEncoding("unknown field kind"))?;
        let len = u32::from_be_bytes([bytes[1], bytes[2], bytes[3], bytes[4]]) as usize;
        let rest = &bytes[5..];
        if rest.len() < len {
            return Err(CryptoError::MalformedEncoding("truncated field payload"));
        }
        out.push(OwnedField {
            kind,
            bytes: rest[..len].to_vec(),
        });
        bytes = &rest[len..];
    }
    Ok(out)
}
