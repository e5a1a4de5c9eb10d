//! Functionality comparison of the two implemented schemes.
//!
//! Every Yes/No in the `proposed` and `mun` columns is measured: attack
//! outcomes for the security rows, scenario runs and structural checks for
//! the rest. Each measured cell sits beside the published value and is
//! flagged when the two disagree. The other related schemes are carried
//! along as published values only.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::session::{run_session, Outcome};
use super::{
    MunWorld, ProposedWorld, Scenario, SchemeId, CHANGED_PASSWORD, DEFAULT_PASSWORD, DEFAULT_USER,
};
use crate::attacks::{run_attack, AttackError, AttackKind, AttackOptions, AttackOutcome};
use crate::crypto::{CurveProfile, Identity, Suite};
use crate::proposed;

/// Published columns for schemes that are not implemented here.
pub const OTHER_SCHEMES: [&str; 5] = [
    "Wu et al.",
    "Chang et al.",
    "He et al. (a)",
    "He et al. (b)",
    "Li et al.",
];

/// (row, proposed, others in [`OTHER_SCHEMES`] order, mun) as published.
const PUBLISHED: [(&str, bool, [bool; 5], bool); 13] = [
    (
        "User's anonymity",
        true,
        [false, false, false, false, true],
        false,
    ),
    (
        "Proper mutual authentication",
        true,
        [false, true, true, false, true],
        false,
    ),
    (
        "Resist MU impersonation attack",
        true,
        [false, true, true, false, true],
        false,
    ),
    (
        "Resist FA impersonation attack",
        true,
        [true, true, true, true, true],
        false,
    ),
    (
        "Resist HA impersonation attack",
        true,
        [true, true, true, true, true],
        false,
    ),
    (
        "Resist replay attack",
        true,
        [false, true, true, false, false],
        false,
    ),
    (
        "Perfect forward secrecy",
        true,
        [false, false, false, false, true],
        true,
    ),
    (
        "Resist off-line password guessing attack",
        true,
        [false, false, true, false, true],
        false,
    ),
    (
        "Resist insider attack",
        true,
        [false, false, true, false, true],
        false,
    ),
    (
        "No verification table",
        true,
        [true, false, true, false, true],
        true,
    ),
    (
        "Local password verification",
        true,
        [false, false, true, true, false],
        false,
    ),
    (
        "Correct password change",
        true,
        [false, false, true, false, true],
        false,
    ),
    (
        "Authentication when the user is in the home network",
        true,
        [false, false, true, false, false],
        false,
    ),
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub measured: bool,
    pub published: bool,
    pub mismatch: bool,
    /// What the measured value rests on.
    pub basis: String,
}

impl Cell {
    fn new(measured: bool, published: bool, basis: String) -> Self {
        Cell {
            measured,
            published,
            mismatch: measured != published,
            basis,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub property: String,
    pub proposed: Cell,
    pub mun: Cell,
    /// Published, not measured.
    pub others: Vec<(String, bool)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionalityMatrix {
    pub curve: CurveProfile,
    pub seed: u64,
    pub rows: Vec<MatrixRow>,
    pub outcomes: Vec<AttackOutcome>,
    pub note: String,
}

fn yes(b: bool) -> &'static str {
    if b {
        "Yes"
    } else {
        "No"
    }
}

/// Measured facts about one scheme that are not attacks.
struct Features {
    verification_table: usize,
    local_check: (bool, String),
    password_change: (bool, String),
    home: (bool, String),
}

fn features(suite: &Suite, scheme: SchemeId, seed: u64) -> Features {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let id = Identity::from_label(DEFAULT_USER).unwrap();
    let run_ok = |sc: Scenario| -> (bool, String) {
        match run_session(
            suite,
            scheme,
            sc,
            &mut ChaCha20Rng::seed_from_u64(seed),
            None,
        ) {
            Ok(r) => (
                r.outcome.is_success(),
                format!("{sc} run: {}", describe(&r.outcome)),
            ),
            Err(e) => (false, e.to_string()),
        }
    };
    match scheme {
        SchemeId::Proposed => {
            let world = ProposedWorld::generate(suite, &mut rng);
            // Registration only reads HA; nothing per user is stored.
            let mut mu = world.register_quiet(suite, id, DEFAULT_PASSWORD, &mut rng);
            let eng = suite.engine();
            mu.password = b"wrong password".to_vec();
            let refused = proposed::login_begin(&eng, &mu, &mut rng).is_err();
            let (changed, changed_basis) = run_ok(Scenario::PasswordChange);
            mu.password = DEFAULT_PASSWORD.to_vec();
            let new_card = proposed::password_change(&eng, &mu, CHANGED_PASSWORD, &mut rng);
            let old_fails = new_card
                .map(|card| {
                    let mut after = mu.clone();
                    after.card = card;
                    !proposed::local_verify(&eng, &after)
                })
                .unwrap_or(false);
            Features {
                verification_table: 0,
                local_check: (refused, format!("wrong password emits no Msg1: {refused}")),
                password_change: (
                    changed && old_fails,
                    format!("{changed_basis}; old password refused afterwards: {old_fails}"),
                ),
                home: run_ok(Scenario::HomeAuth),
            }
        }
        SchemeId::Mun => {
            let mut world = MunWorld::default();
            world.register_quiet(suite, id, &mut rng);
            Features {
                verification_table: world.ha.registered(),
                local_check: (
                    false,
                    "login sends the stored r_MU without any password input to check".into(),
                ),
                password_change: run_ok(Scenario::PasswordChange),
                home: run_ok(Scenario::HomeAuth),
            }
        }
    }
}

fn describe(o: &Outcome) -> String {
    match o {
        Outcome::Agreed {
            mu_key, peer_key, ..
        } => format!("keys equal: {}", mu_key == peer_key),
        Outcome::Registered => "registered".into(),
        Outcome::Aborted { reason, .. } => reason.clone(),
    }
}

fn resisted(outcomes: &[AttackOutcome], scheme: SchemeId, kind: AttackKind) -> (bool, String) {
    let o = outcomes
        .iter()
        .find(|o| o.scheme == scheme && o.attack == kind)
        .expect("attack was run");
    (
        !o.succeeded,
        format!(
            "{kind} attack {}",
            if o.succeeded { "succeeded" } else { "failed" }
        ),
    )
}

/// Runs every attack against both schemes, one thread per attack, and
/// assembles the table. `trials` sets the size of the unlinkability game.
pub fn functionality_matrix(
    suite: &Suite,
    seed: u64,
    trials: usize,
) -> Result<FunctionalityMatrix, AttackError> {
    let kinds = [
        AttackKind::MuImpersonation,
        AttackKind::FaImpersonation,
        AttackKind::HaImpersonation,
        AttackKind::ReplaySessionKey,
        AttackKind::ForwardSecrecy,
        AttackKind::OfflineGuess,
        AttackKind::Insider,
        AttackKind::Traceability,
    ];
    let jobs: Vec<(SchemeId, AttackKind, u64)> = [SchemeId::Proposed, SchemeId::Mun]
        .into_iter()
        .flat_map(|s| kinds.into_iter().map(move |k| (s, k)))
        .enumerate()
        .map(|(i, (s, k))| (s, k, i as u64))
        .collect();
    let opts = AttackOptions {
        trials: Some(trials),
        ..Default::default()
    };
    let outcomes: Vec<AttackOutcome> = std::thread::scope(|sc| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(scheme, kind, stream)| {
                let opts = &opts;
                sc.spawn(move || {
                    let mut rng = ChaCha20Rng::seed_from_u64(seed);
                    rng.set_stream(stream);
                    run_attack(suite, scheme, kind, opts, &mut rng)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("attack thread"))
            .collect::<Result<_, _>>()
    })?;

    let fp = features(suite, SchemeId::Proposed, seed);
    let fm = features(suite, SchemeId::Mun, seed);
    let measured = |scheme: SchemeId, f: &Features, row: usize| -> (bool, String) {
        let r = |k| resisted(&outcomes, scheme, k);
        match row {
            0 => r(AttackKind::Traceability),
            1 => {
                let parts = [
                    AttackKind::MuImpersonation,
                    AttackKind::FaImpersonation,
                    AttackKind::HaImpersonation,
                ]
                .map(r);
                let ok = parts.iter().all(|p| p.0);
                (
                    ok,
                    parts
                        .iter()
                        .map(|p| p.1.as_str())
                        .collect::<Vec<_>>()
                        .join("; "),
                )
            }
            2 => r(AttackKind::MuImpersonation),
            3 => r(AttackKind::FaImpersonation),
            4 => r(AttackKind::HaImpersonation),
            5 => r(AttackKind::ReplaySessionKey),
            6 => r(AttackKind::ForwardSecrecy),
            7 => r(AttackKind::OfflineGuess),
            8 => r(AttackKind::Insider),
            9 => (
                f.verification_table == 0,
                format!(
                    "HA holds {} per-user entries after registration",
                    f.verification_table
                ),
            ),
            10 => f.local_check.clone(),
            11 => f.password_change.clone(),
            _ => f.home.clone(),
        }
    };
    let rows = PUBLISHED
        .iter()
        .enumerate()
        .map(|(i, (name, p_pub, others, m_pub))| {
            let (pm, pb) = measured(SchemeId::Proposed, &fp, i);
            let (mm, mb) = measured(SchemeId::Mun, &fm, i);
            MatrixRow {
                property: name.to_string(),
                proposed: Cell::new(pm, *p_pub, pb),
                mun: Cell::new(mm, *m_pub, mb),
                others: OTHER_SCHEMES
                    .iter()
                    .zip(others)
                    .map(|(n, v)| (n.to_string(), *v))
                    .collect(),
            }
        })
        .collect();
    Ok(FunctionalityMatrix {
        curve: suite.profile(),
        seed,
        rows,
        outcomes,
        note: "proposed and mun columns measured; other columns published, not measured".into(),
    })
}

impl FunctionalityMatrix {
    pub fn mismatches(&self) -> Vec<(String, SchemeId)> {
        let mut v = Vec::new();
        for r in &self.rows {
            if r.proposed.mismatch {
                v.push((r.property.clone(), SchemeId::Proposed));
            }
            if r.mun.mismatch {
                v.push((r.property.clone(), SchemeId::Mun));
            }
        }
        v
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "property,proposed,proposed_published,proposed_flag,mun,mun_published,mun_flag",
        );
        for n in OTHER_SCHEMES {
            let _ = write!(s, ",{n} (published not measured)");
        }
        s.push('\n');
        let flag = |c: &Cell| if c.mismatch { "MISMATCH" } else { "" };
        for r in &self.rows {
            let _ = write!(
                s,
                "\"{}\",{},{},{},{},{},{}",
                r.property,
                yes(r.proposed.measured),
                yes(r.proposed.published),
                flag(&r.proposed),
                yes(r.mun.measured),
                yes(r.mun.published),
                flag(&r.mun)
            );
            for (_, v) in &r.others {
                let _ = write!(s, ",{}", yes(*v));
            }
            s.push('\n');
        }
        s
    }
}
