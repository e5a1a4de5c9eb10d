//! 1000 seeded honest runs of each scenario on P-256 end with byte-equal
//! keys on both sides.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use roamauth::crypto::Suite;
use roamauth::harness::{run_session, Outcome, Scenario, SchemeId};

const RUNS: u64 = 1000;

fn agree(scheme: SchemeId, scenario: Scenario, expected_rounds: usize) {
    let suite = Suite::production();
    let mut failures = Vec::new();
    let mut keys = std::collections::HashSet::new();
    for seed in 0..RUNS {
        let run = run_session(
            &suite,
            scheme,
            scenario,
            &mut ChaCha20Rng::seed_from_u64(seed),
            None,
        )
        .unwrap();
        match &run.outcome {
            Outcome::Agreed {
                mu_key, peer_key, ..
            } if mu_key == peer_key && run.transcript.len() == expected_rounds => {
                keys.insert(format!("{mu_key:?}"));
            }
            other => failures.push((seed, format!("{other:?}"))),
        }
    }
    assert!(
        failures.is_empty(),
        "{scheme} {scenario}: {} failures, first {:?}",
        failures.len(),
        failures.first()
    );
    // Fresh ephemerals every run: no key repeats across seeds.
    assert_eq!(keys.len() as u64, RUNS);
}

#[test]
fn foreign_authentication() {
    agree(SchemeId::Proposed, Scenario::ForeignAuth, 4);
}

#[test]
fn home_authentication() {
    agree(SchemeId::Proposed, Scenario::HomeAuth, 2);
}

#[test]
fn three_key_updates() {
    agree(SchemeId::Proposed, Scenario::KeyUpdate(3), 10);
}

#[test]
fn password_change_then_login() {
    agree(SchemeId::Proposed, Scenario::PasswordChange, 4);
}

#[test]
fn baseline_foreign_authentication() {
    agree(SchemeId::Mun, Scenario::ForeignAuth, 5);
}
