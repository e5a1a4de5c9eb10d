//! Declarative batch definitions, read from TOML:
//!
//! ```toml
//! seed = 7
//!
//! [[run]]
//! scheme = "proposed"
//! scenario = "key-update:3"
//! repeat = 10
//! ```
//!
//! Run `i` of entry `j` uses seed `seed + 1000 * j + i`, so a batch is
//! reproducible entry by entry.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::session::{run_session, HarnessError, SessionRun};
use super::{Scenario, SchemeId};
use crate::crypto::{CryptoError, CurveProfile, Suite};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchEntry {
    pub scheme: SchemeId,
    pub scenario: Scenario,
    #[serde(default = "one")]
    pub repeat: u32,
}

fn one() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchConfig {
    #[serde(default)]
    pub curve: CurveProfile,
    #[serde(default)]
    pub seed: u64,
    #[serde(rename = "run", default)]
    pub runs: Vec<BatchEntry>,
}

#[derive(Clone, Debug)]
pub struct BatchResult {
    pub entry: usize,
    pub seed: u64,
    pub scheme: SchemeId,
    pub scenario: Scenario,
    pub run: SessionRun,
}

impl BatchConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, CryptoError> {
        let cfg: BatchConfig = toml::from_str(s).map_err(|e| CryptoError::Config(e.to_string()))?;
        if cfg.runs.iter().any(|r| r.repeat == 0) {
            return Err(CryptoError::Config("repeat must be at least 1".into()));
        }
        Ok(cfg)
    }

    pub fn seed_for(&self, entry: usize, i: u32) -> u64 {
        self.seed
            .wrapping_add(1000 * entry as u64)
            .wrapping_add(i as u64)
    }

    /// Runs every entry; stops at the first scheme/scenario mismatch.
    pub fn execute(&self, suite: &Suite) -> Result<Vec<BatchResult>, HarnessError> {
        let mut out = Vec::new();
        for (j, e) in self.runs.iter().enumerate() {
            for i in 0..e.repeat {
                let seed = self.seed_for(j, i);
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                let run = run_session(suite, e.scheme, e.scenario, &mut rng, None)?;
                out.push(BatchResult {
                    entry: j,
                    seed,
                    scheme: e.scheme,
                    scenario: e.scenario,
                    run,
                });
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_runs() {
        let cfg = BatchConfig::from_toml_str(
            "curve = \"toy\"\nseed = 5\n[[run]]\nscheme = \"mun\"\nscenario = \"foreign-auth\"\nrepeat = 2\n\
             [[run]]\nscheme = \"proposed\"\nscenario = \"home-auth\"\n",
        )
        .unwrap();
        assert_eq!(cfg.runs[1].repeat, 1);
        let res = cfg.execute(&Suite::toy()).unwrap();
        assert_eq!(res.len(), 3);
        assert_eq!(res[2].seed, 1005);
        assert!(res.iter().all(|r| r.run.outcome.is_success()));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(
            BatchConfig::from_toml_str("[[run]]\nscheme = \"mun\"\nscenario = \"x\"\n").is_err()
        );
        assert!(BatchConfig::from_toml_str(
            "[[run]]\nscheme = \"mun\"\nscenario = \"home\"\nrepeat = 0\n"
        )
        .is_err());
        assert!(BatchConfig::from_toml_str("seeds = 1\n").is_err());
        let cfg =
            BatchConfig::from_toml_str("[[run]]\nscheme = \"mun\"\nscenario = \"home\"\n").unwrap();
        assert!(matches!(
            cfg.execute(&Suite::toy()),
            Err(HarnessError::Unsupported { .. })
        ));
    }
}
