//! Candidate password lists.
//!
//! One candidate per line. A line starting with `hex:` is decoded as hex,
//! which is how binary secrets (such as the HA-issued PW_MU of the baseline
//! scheme) are listed. Empty lines are skipped; `\r\n` endings are accepted.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DictionaryError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: bad hex candidate")]
    Hex { line: usize },
    #[error("dictionary is empty")]
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dictionary {
    words: Vec<Vec<u8>>,
}

const STEMS: &[&str] = &[
    "password", "letmein", "dragon", "monkey", "sunshine", "princess", "football", "shadow",
    "master", "qwerty", "baseball", "welcome", "trustno1", "superman", "iloveyou", "starwars",
    "whatever", "freedom", "hunter", "ranger",
];

impl Dictionary {
    pub fn new(words: Vec<Vec<u8>>) -> Result<Self, DictionaryError> {
        if words.is_empty() {
            return Err(DictionaryError::Empty);
        }
        Ok(Dictionary { words })
    }

    pub fn parse(text: &str) -> Result<Self, DictionaryError> {
        let mut words = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.is_empty() {
                continue;
            }
            match line.strip_prefix("hex:") {
                Some(h) => words
                    .push(hex::decode(h.trim()).map_err(|_| DictionaryError::Hex { line: i + 1 })?),
                None => words.push(line.as_bytes().to_vec()),
            }
        }
        Self::new(words)
    }

    pub fn load(path: &Path) -> Result<Self, DictionaryError> {
        let text = std::fs::read_to_string(path).map_err(|source| DictionaryError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// `size - 1` decoys shaped like `truth` plus `truth` itself, shuffled.
    /// Text passwords get word-and-digits decoys, binary ones random bytes of
    /// the same length.
    pub fn synthetic<R: RngCore + ?Sized>(truth: &[u8], size: usize, rng: &mut R) -> Self {
        let size = size.max(1);
        let textual = std::str::from_utf8(truth)
            .map(|s| !s.chars().any(char::is_control))
            .unwrap_or(false);
        let mut words = vec![truth.to_vec()];
        while words.len() < size {
            let w = if textual {
                let stem = STEMS[rng.gen_range(0..STEMS.len())];
                format!("{stem}{}", rng.gen_range(0..100_000)).into_bytes()
            } else {
                let mut b = vec![0u8; truth.len()];
                rng.fill_bytes(&mut b);
                b
            };
            if !words.contains(&w) {
                words.push(w);
            }
        }
        words.shuffle(rng);
        Dictionary { words }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, w: &[u8]) -> bool {
        self.words.iter().any(|x| x == w)
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> {
        self.words.iter().map(|w| w.as_slice())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for w in &self.words {
            out.push_str(&render(w));
            out.push('\n');
        }
        out
    }
}

/// Printable form of a candidate, `hex:` prefixed when it would not survive
/// a round trip through a text line.
pub fn render(w: &[u8]) -> String {
    match std::str::from_utf8(w) {
        Ok(s) if !s.is_empty() && !s.starts_with("hex:") && !s.contains(['\n', '\r']) => {
            s.to_string()
        }
        _ => format!("hex:{}", hex::encode(w)),
    }
}
