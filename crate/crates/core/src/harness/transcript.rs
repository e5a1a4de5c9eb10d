//! Ordered capture of the frames exchanged in one run.
//!
//! JSON lines carry one entry per line with the frame in hex. The raw binary
//! capture is a sequence of records `sender (1) ‖ receiver (1) ‖ channel (1)
//! ‖ frame`, where the frame carries its own length.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::Curve;
use crate::wire::{MessageKind, ProtocolMessage, Role, WireError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Public,
    Secure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub step: usize,
    pub phase: String,
    pub sender: Role,
    pub receiver: Role,
    pub kind: MessageKind,
    pub channel: Channel,
    #[serde(with = "hex_bytes")]
    pub bytes: Vec<u8>,
    /// 8 × frame length.
    pub bit_len: u64,
    /// Size under the parameter-width cost model.
    pub nominal_bits: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
}

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("binary capture truncated at offset {0}")]
    Truncated(usize),
    #[error("binary capture has bad header byte at offset {0}")]
    BadHeader(usize),
    #[error("entry {0}: {1}")]
    Frame(usize, WireError),
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(b))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        hex::decode(s).map_err(serde::de::Error::custom)
    }
}

fn role_byte(r: Role) -> u8 {
    match r {
        Role::Mu => 1,
        Role::Fa => 2,
        Role::Ha => 3,
    }
}

fn role_from(b: u8) -> Option<Role> {
    match b {
        1 => Some(Role::Mu),
        2 => Some(Role::Fa),
        3 => Some(Role::Ha),
        _ => None,
    }
}

impl Transcript {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of messages recorded under `phase`.
    pub fn phase_len(&self, phase: &str) -> usize {
        self.entries.iter().filter(|e| e.phase == phase).count()
    }

    pub fn decode(&self, i: usize, curve: &Curve) -> Result<ProtocolMessage, TranscriptError> {
        ProtocolMessage::decode(curve, &self.entries[i].bytes)
            .map_err(|e| TranscriptError::Frame(i, e))
    }

    /// First decodable message of a given kind.
    pub fn find<T: TryFrom<ProtocolMessage>>(&self, curve: &Curve) -> Option<T> {
        self.entries
            .iter()
            .filter_map(|e| ProtocolMessage::decode(curve, &e.bytes).ok())
            .find_map(|m| T::try_from(m).ok())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("entry serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, TranscriptError> {
        let entries = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|source| TranscriptError::Json {
                    line: i + 1,
                    source,
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Transcript { entries })
    }

    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for e in &self.entries {
            out.push(role_byte(e.sender));
            out.push(role_byte(e.receiver));
            out.push(match e.channel {
                Channel::Public => 0,
                Channel::Secure => 1,
            });
            out.extend_from_slice(&e.bytes);
        }
        out
    }

    /// Rebuilds sender, receiver, channel and frames from a binary capture.
    /// Phase and nominal sizes are not part of the capture and come back
    /// empty.
    pub fn from_binary(data: &[u8]) -> Result<Self, TranscriptError> {
        let mut entries = Vec::new();
        let mut off = 0;
        while off < data.len() {
            if data.len() < off + 8 {
                return Err(TranscriptError::Truncated(off));
            }
            let sender = role_from(data[off]).ok_or(TranscriptError::BadHeader(off))?;
            let receiver = role_from(data[off + 1]).ok_or(TranscriptError::BadHeader(off + 1))?;
            let channel = match data[off + 2] {
                0 => Channel::Public,
                1 => Channel::Secure,
                _ => return Err(TranscriptError::BadHeader(off + 2)),
            };
            let frame_start = off + 3;
            let kind = MessageKind::from_tag(data[frame_start])
                .ok_or(TranscriptError::BadHeader(frame_start))?;
            let len = u32::from_be_bytes(data[frame_start + 1..frame_start + 5].try_into().unwrap())
                as usize;
            let end = frame_start + 5 + len;
            if end > data.len() {
                return Err(TranscriptError::Truncated(frame_start));
            }
            let bytes = data[frame_start..end].to_vec();
            entries.push(TranscriptEntry {
                step: entries.len(),
                phase: String::new(),
                sender,
                receiver,
                kind,
                channel,
                bit_len: 8 * bytes.len() as u64,
                nominal_bits: 0,
                bytes,
            });
            off = end;
        }
        Ok(Transcript { entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Transcript {
        let frames = [vec![0x08, 0, 0, 0, 2, 9, 9], vec![0x23, 0, 0, 0, 0]];
        Transcript {
            entries: frames
                .iter()
                .enumerate()
                .map(|(i, f)| TranscriptEntry {
                    step: i,
                    phase: String::new(),
                    sender: if i == 0 { Role::Mu } else { Role::Fa },
                    receiver: Role::Ha,
                    kind: MessageKind::from_tag(f[0]).unwrap(),
                    channel: Channel::Public,
                    bytes: f.clone(),
                    bit_len: 8 * f.len() as u64,
                    nominal_bits: 0,
                })
                .collect(),
        }
    }

    #[test]
    fn jsonl_and_binary_roundtrip() {
        let t = sample();
        assert_eq!(Transcript::from_jsonl(&t.to_jsonl()).unwrap(), t);
        assert_eq!(Transcript::from_binary(&t.to_binary()).unwrap(), t);
    }

    #[test]
    fn binary_errors() {
        let bin = sample().to_binary();
        assert!(matches!(
            Transcript::from_binary(&bin[..bin.len() - 1]),
            Err(TranscriptError::Truncated(_))
        ));
        let mut bad = bin.clone();
        bad[0] = 7;
        assert!(matches!(
            Transcript::from_binary(&bad),
            Err(TranscriptError::BadHeader(0))
        ));
        assert!(matches!(
            Transcript::from_jsonl("{\n"),
            Err(TranscriptError::Json { line: 1, .. })
        ));
    }
}
