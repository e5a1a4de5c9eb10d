//! In-memory delivery of frames between parties, with an optional hook
//! that sees (and may rewrite or drop) every frame before delivery.

use super::cost::CostModel;
use super::transcript::{Channel, Transcript, TranscriptEntry};
use crate::crypto::Curve;
use crate::error::ProtocolError;
use crate::wire::{MessageKind, ProtocolMessage, Role};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Deliver,
    Drop,
}

/// Called for every frame in flight. `frame` may be rewritten in place.
pub trait Hook {
    fn intercept(
        &mut self,
        step: usize,
        sender: Role,
        receiver: Role,
        kind: MessageKind,
        frame: &mut Vec<u8>,
    ) -> Verdict;
}

/// Flips one bit of the last byte of the frame sent at `step`.
#[derive(Clone, Copy, Debug)]
pub struct TamperHook {
    pub step: usize,
}

impl Hook for TamperHook {
    fn intercept(
        &mut self,
        step: usize,
        _: Role,
        _: Role,
        _: MessageKind,
        frame: &mut Vec<u8>,
    ) -> Verdict {
        if step == self.step {
            if let Some(b) = frame.last_mut() {
                *b ^= 0x01;
            }
        }
        Verdict::Deliver
    }
}

/// Drops the frame sent at `step`.
#[derive(Clone, Copy, Debug)]
pub struct DropHook {
    pub step: usize,
}

impl Hook for DropHook {
    fn intercept(
        &mut self,
        step: usize,
        _: Role,
        _: Role,
        _: MessageKind,
        _: &mut Vec<u8>,
    ) -> Verdict {
        if step == self.step {
            Verdict::Drop
        } else {
            Verdict::Deliver
        }
    }
}

/// A party stopped the run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Abort {
    pub party: Role,
    pub reason: AbortReason,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AbortReason {
    Protocol(ProtocolError),
    /// The expected message never arrived.
    Dropped,
    /// A well-formed frame of the wrong kind arrived.
    UnexpectedKind(MessageKind),
}

impl Abort {
    pub fn new(party: Role, e: ProtocolError) -> Self {
        Abort {
            party,
            reason: AbortReason::Protocol(e),
        }
    }

    /// Stable numeric code; protocol errors keep their own codes.
    pub fn code(&self) -> i32 {
        match &self.reason {
            AbortReason::Protocol(e) => e.code(),
            AbortReason::Dropped => 120,
            AbortReason::UnexpectedKind(_) => 121,
        }
    }

    pub fn describe(&self) -> String {
        match &self.reason {
            AbortReason::Protocol(e) => format!("{} aborted: {e}", self.party),
            AbortReason::Dropped => format!("{} aborted: expected message was dropped", self.party),
            AbortReason::UnexpectedKind(k) => {
                format!("{} aborted: unexpected {}", self.party, k.name())
            }
        }
    }
}

pub struct Bus<'a> {
    curve: &'a Curve,
    model: CostModel,
    hook: Option<&'a mut dyn Hook>,
    phase: String,
    pub transcript: Transcript,
}

impl<'a> Bus<'a> {
    pub fn new<'h: 'a>(curve: &'a Curve, hook: Option<&'a mut (dyn Hook + 'h)>) -> Self {
        let hook = hook.map(|h| h as &'a mut (dyn Hook + 'a));
        Bus {
            curve,
            model: CostModel::default(),
            hook,
            phase: String::new(),
            transcript: Transcript::default(),
        }
    }

    pub fn set_phase(&mut self, phase: impl Into<String>) {
        self.phase = phase.into();
    }

    /// Serializes `msg`, lets the hook act on the frame, records what was
    /// actually put on the wire and decodes it as the receiver would.
    pub fn send<T>(&mut self, from: Role, to: Role, channel: Channel, msg: T) -> Result<T, Abort>
    where
        T: Into<ProtocolMessage> + TryFrom<ProtocolMessage, Error = MessageKind>,
    {
        let msg: ProtocolMessage = msg.into();
        let kind = msg.kind();
        let step = self.transcript.len();
        let mut frame = msg.encode();
        let verdict = match self.hook.as_deref_mut() {
            Some(h) => h.intercept(step, from, to, kind, &mut frame),
            None => Verdict::Deliver,
        };
        let received = ProtocolMessage::decode(self.curve, &frame);
        let nominal_bits = match &received {
            Ok(m) => self.model.message_bits(m),
            Err(_) => self.model.message_bits(&msg),
        };
        let wire_kind = received.as_ref().map(|m| m.kind()).unwrap_or(kind);
        self.transcript.entries.push(TranscriptEntry {
            step,
            phase: self.phase.clone(),
            sender: from,
            receiver: to,
            kind: wire_kind,
            channel,
            bit_len: 8 * frame.len() as u64,
            nominal_bits,
            bytes: frame,
        });
        if verdict == Verdict::Drop {
            return Err(Abort {
                party: to,
                reason: AbortReason::Dropped,
            });
        }
        let m = received.map_err(|e| Abort::new(to, e.into()))?;
        T::try_from(m).map_err(|k| Abort {
            party: to,
            reason: AbortReason::UnexpectedKind(k),
        })
    }
}
