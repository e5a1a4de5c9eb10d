//! Field-equality linker for the unlinkability game.
//!
//! The linker decides "same user" when any first-message field repeats
//! between two transcripts. Before playing it calibrates on two accounts it
//! registered itself: fields that are equal across those two different users
//! (the home agent's identity, its public key) say nothing about who is
//! logging in and are ignored.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub type Fields = Vec<(&'static str, Vec<u8>)>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Linker {
    ignored: BTreeSet<&'static str>,
}

impl Linker {
    pub fn calibrate(own_a: &Fields, own_b: &Fields) -> Self {
        let ignored = own_a
            .iter()
            .filter(|(name, v)| own_b.iter().any(|(n, w)| n == name && w == v))
            .map(|(name, _)| *name)
            .collect();
        Linker { ignored }
    }

    pub fn ignored(&self) -> Vec<&'static str> {
        self.ignored.iter().copied().collect()
    }

    /// The fields that caused a link, empty when the transcripts look
    /// unrelated.
    pub fn evidence(&self, t1: &Fields, t2: &Fields) -> Vec<&'static str> {
        t1.iter()
            .filter(|(name, _)| !self.ignored.contains(name))
            .filter(|(name, v)| t2.iter().any(|(n, w)| n == name && w == v))
            .map(|(name, _)| *name)
            .collect()
    }

    pub fn link(&self, t1: &Fields, t2: &Fields) -> bool {
        !self.evidence(t1, t2).is_empty()
    }
}

/// Score of a run of the game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameScore {
    pub trials: usize,
    pub same_user_trials: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub ignored_fields: Vec<String>,
    /// Fields that produced links, with how often.
    pub linking_fields: Vec<(String, usize)>,
}

/// A linker wins the game when it beats guessing by this margin.
pub const WIN_ACCURACY: f64 = 0.9;
