//! Exit gate: one PASS/FAIL line per acceptance criterion.
//!
//! Every criterion is evaluated and printed before the verdict, so a red
//! line comes with the measurements behind it. Expected values are written
//! out here rather than read back from the crate's own tables.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use roamauth::attacks::{run_attack, AttackKind, AttackOptions, AttackOutcome, Evidence};
use roamauth::crypto::cdl::CdlOracle;
use roamauth::crypto::{kdf_point, GroupPoint, Identity, Scalar, Suite};
use roamauth::harness::{
    run_proposed, run_session, Outcome, ProposedWorld, Scenario, SchemeId, DEFAULT_USER,
};
use roamauth::proposed;
use roamauth::wire::Role;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn agreed(o: &Outcome) -> bool {
    matches!(o, Outcome::Agreed { mu_key, peer_key, .. } if mu_key == peer_key)
}

fn c1_round_counts() -> Verdict {
    let suite = Suite::production();
    let mut parts = Vec::new();
    let mut pass = true;
    for (scheme, want) in [(SchemeId::Proposed, 4), (SchemeId::Mun, 5)] {
        let mut slowest = Duration::ZERO;
        let mut rounds = Vec::new();
        for seed in 0..20 {
            let t = Instant::now();
            let run =
                run_session(&suite, scheme, Scenario::ForeignAuth, &mut rng(seed), None).unwrap();
            slowest = slowest.max(t.elapsed());
            pass &= agreed(&run.outcome);
            rounds.push(run.transcript.len());
        }
        pass &= rounds.iter().all(|&r| r == want) && slowest < Duration::from_secs(1);
        parts.push(format!(
            "{scheme} {} rounds (want {want}), slowest {:.1} ms",
            rounds[0],
            slowest.as_secs_f64() * 1e3
        ));
    }
    verdict(pass, parts.join("; "))
}

/// (xor, hash, mul online, mul precomputable, esym, dsym, gsign, vsign)
type Ops = (u32, u32, u32, u32, u32, u32, u32, u32);

fn c2_operation_counts() -> Verdict {
    let expected: [(Role, Ops); 3] = [
        (Role::Mu, (2, 6, 1, 2, 0, 0, 0, 0)),
        (Role::Fa, (0, 1, 2, 1, 1, 1, 1, 1)),
        (Role::Ha, (1, 4, 2, 0, 1, 1, 1, 1)),
    ];
    let suite = Suite::production();
    let run = run_session(
        &suite,
        SchemeId::Proposed,
        Scenario::ForeignAuth,
        &mut rng(2),
        None,
    )
    .unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (role, want) in expected {
        let Some(r) = run.report.ops.iter().find(|r| r.role == role) else {
            return verdict(false, format!("no counts for {role}"));
        };
        let m = r.measured;
        let got = (
            m.add,
            m.hash,
            m.mul_online,
            m.mul_pre,
            m.esym,
            m.dsym,
            m.gsign,
            m.vsign,
        );
        pass &= got == want;
        parts.push(format!("{role} {got:?}"));
    }
    let rules = run
        .report
        .notes
        .iter()
        .filter(|n| n.contains("Pre") || n.contains("reused") || n.contains("column"))
        .count();
    pass &= rules >= 2;
    verdict(
        pass,
        format!("{} with {rules} counting rules printed", parts.join(", ")),
    )
}

fn c3_communication_bits() -> Verdict {
    let suite = Suite::production();
    let run = run_session(
        &suite,
        SchemeId::Proposed,
        Scenario::ForeignAuth,
        &mut rng(3),
        None,
    )
    .unwrap();
    let r = &run.report;
    let breakdown: u64 = r
        .messages
        .iter()
        .filter(|m| m.sender == Role::Mu || m.receiver == Role::Mu)
        .map(|m| m.nominal_bits)
        .sum();
    let json = r.to_json();
    let pass = !r.rule_text.is_empty()
        && r.messages.len() == 4
        && breakdown == r.mu_bits
        && r.published_mu_bits == Some(3808)
        && r.mu_bits_delta == Some(r.mu_bits as i64 - 3808)
        && json.contains("mu_bits_delta")
        && json.contains("rule_text");
    verdict(
        pass,
        format!(
            "{} bits beside published 3808 (delta {:+}), {} messages itemized, rule: {}",
            r.mu_bits,
            r.mu_bits as i64 - 3808,
            r.messages.len(),
            r.rule_text
        ),
    )
}

fn outcome(suite: &Suite, scheme: SchemeId, kind: AttackKind, seed: u64) -> AttackOutcome {
    run_attack(
        suite,
        scheme,
        kind,
        &AttackOptions::default(),
        &mut rng(seed),
    )
    .unwrap()
}

fn c4_attack_matrix() -> Verdict {
    let suite = Suite::production();
    let start = Instant::now();
    let mut pass = true;
    let mut wrong = Vec::new();
    for (i, kind) in AttackKind::MATRIX.into_iter().enumerate() {
        let mun = outcome(&suite, SchemeId::Mun, kind, 40 + i as u64);
        let ours = outcome(&suite, SchemeId::Proposed, kind, 40 + i as u64);
        for o in [&mun, &ours] {
            pass &= o.is_sound();
        }
        if !mun.succeeded {
            wrong.push(format!("{kind} failed against mun"));
        }
        if ours.succeeded {
            let how = match &ours.evidence {
                Evidence::SessionKey { note, .. } => note.clone(),
                Evidence::Password { verifiers, .. } => {
                    format!("guesses confirmed by {}", verifiers.join(", "))
                }
                other => format!("{other:?}"),
            };
            wrong.push(format!("{kind} succeeded against proposed ({how})"));
        }
    }
    let elapsed = start.elapsed();
    pass &= wrong.is_empty() && elapsed < Duration::from_secs(30);
    let detail = if wrong.is_empty() {
        "every strategy succeeds against mun and fails against proposed".to_string()
    } else {
        wrong.join(", ")
    };
    verdict(
        pass,
        format!("{detail}; {:.1} s on p256", elapsed.as_secs_f64()),
    )
}

fn c5_key_agreement() -> Verdict {
    let suite = Suite::production();
    let mut parts = Vec::new();
    let mut pass = true;
    for sc in [
        Scenario::ForeignAuth,
        Scenario::HomeAuth,
        Scenario::KeyUpdate(3),
        Scenario::PasswordChange,
    ] {
        let failures = (0..1000u64)
            .filter(|&seed| {
                let run =
                    run_session(&suite, SchemeId::Proposed, sc, &mut rng(seed), None).unwrap();
                !agreed(&run.outcome)
            })
            .count();
        pass &= failures == 0;
        parts.push(format!("{sc} {failures}/1000 failures"));
    }
    verdict(pass, parts.join(", "))
}

fn linkage_accuracy(scheme: SchemeId, trials: usize) -> (f64, usize) {
    let suite = Suite::production();
    let opts = AttackOptions {
        trials: Some(trials),
        ..AttackOptions::default()
    };
    let o = run_attack(&suite, scheme, AttackKind::Traceability, &opts, &mut rng(6)).unwrap();
    match o.evidence {
        Evidence::Linkage(s) => (s.accuracy, s.trials),
        other => panic!("traceability returned {other:?}"),
    }
}

fn c6_unlinkability() -> Verdict {
    let (mun, mun_n) = linkage_accuracy(SchemeId::Mun, 200);
    let (ours, ours_n) = linkage_accuracy(SchemeId::Proposed, 400);
    let pass = mun == 1.0 && mun_n >= 200 && (0.4..=0.6).contains(&ours) && ours_n >= 200;
    verdict(
        pass,
        format!("linker accuracy mun {mun:.3} over {mun_n}, proposed {ours:.3} over {ours_n}"),
    )
}

fn password_evidence(o: &AttackOutcome) -> (usize, usize, bool, Vec<String>) {
    match &o.evidence {
        Evidence::Password {
            tested,
            confirmable,
            matches_victim,
            verifiers,
            ..
        } => (*tested, *confirmable, *matches_victim, verifiers.clone()),
        other => panic!("offline guess returned {other:?}"),
    }
}

fn c7_offline_guessing() -> Verdict {
    let suite = Suite::production();
    let t = Instant::now();
    let mun = outcome(&suite, SchemeId::Mun, AttackKind::OfflineGuess, 7);
    let mun_time = t.elapsed();
    let (m_tested, _, m_hit, _) = password_evidence(&mun);
    let ours = outcome(&suite, SchemeId::Proposed, AttackKind::OfflineGuess, 7);
    let (o_tested, o_conf, _, verifiers) = password_evidence(&ours);
    let mun_ok = mun.succeeded && m_hit && m_tested == 1000 && mun_time < Duration::from_secs(1);
    let ours_ok = o_conf == 0 && o_tested == 1000;
    let mut detail = format!(
        "mun recovered: {m_hit} from {m_tested} words in {:.0} ms; proposed with stolen card: {o_conf} confirmable of {o_tested}",
        mun_time.as_secs_f64() * 1e3
    );
    if !ours_ok {
        detail.push_str(&format!(
            " via {}. Analysis: the card stores Q and x_MU, and Msg4 carries \
             W1 = h(N || A || B || ID_FA || ID_HA) in clear with N = Q xor h(PW || x_MU). \
             Every other input is public in the same session, so each guess costs two \
             hashes and needs neither ID_MU nor a discrete log",
            verifiers.join(", ")
        ));
    }
    verdict(mun_ok && ours_ok, detail)
}

fn c8_toy_oracle() -> Verdict {
    let suite = Suite::toy();
    let curve = suite.curve();
    let g = curve.generator();
    // Walk the whole group by repeated addition.
    let mut table = vec![GroupPoint::Infinity];
    for k in 1..997usize {
        table.push(curve.add(&table[k - 1], &g));
    }
    let mut seen: Vec<_> = table.iter().map(|p| p.to_bytes()).collect();
    seen.sort();
    seen.dedup();
    let mut pass = seen.len() == 997 && curve.add(&table[996], &g) == GroupPoint::Infinity;
    for a in 1..997u64 {
        let sa = Scalar::from_u64(curve, a).unwrap();
        pass &= curve.mul(&sa, &g) == table[a as usize];
        pass &= curve.validate(&table[a as usize]).is_ok();
        // Closure, inverses and ECDH with a walking partner.
        let b = a % 996 + 1;
        pass &= curve.add(&table[a as usize], &curve.negate(&table[a as usize]))
            == GroupPoint::Infinity;
        let sb = Scalar::from_u64(curve, b).unwrap();
        let ab = curve.mul(&sa, &table[b as usize]);
        pass &= ab == curve.mul(&sb, &table[a as usize]) && ab == table[(a * b % 997) as usize];
        pass &= kdf_point(&ab).unwrap() == kdf_point(&table[(a * b % 997) as usize]).unwrap();
    }
    let mut keys: Vec<_> = table[1..]
        .iter()
        .map(|p| *kdf_point(p).unwrap().as_bytes())
        .collect();
    keys.sort();
    keys.dedup();
    pass &= keys.len() == 996;

    // Ephemeral scalar recovery from an honest transcript point.
    let oracle = CdlOracle::new(curve).unwrap();
    let secret = Scalar::from_u64(curve, 613).unwrap();
    let found = oracle.log(&curve.mul(&secret, &g));
    pass &= found.map(|s| curve.mul(&s, &g)) == Some(curve.mul(&secret, &g));

    let opts = AttackOptions {
        oracle: true,
        ..AttackOptions::default()
    };
    let mut parts = Vec::new();
    for scheme in [SchemeId::Proposed, SchemeId::Mun] {
        let o = run_attack(
            &suite,
            scheme,
            AttackKind::ForwardSecrecy,
            &opts,
            &mut rng(8),
        )
        .unwrap();
        pass &= o.succeeded && o.is_sound();
        parts.push(format!("{scheme} SK recovered: {}", o.succeeded));
    }
    // Without the oracle the same strategy has nothing to work with.
    let blind = outcome(
        &Suite::production(),
        SchemeId::Proposed,
        AttackKind::ForwardSecrecy,
        8,
    );
    pass &= !blind.succeeded;
    parts.push(format!("p256 without oracle: {}", blind.succeeded));
    verdict(
        pass,
        format!(
            "997 points enumerated, laws and ECDH checked per element (all pairs in toy_group); {}",
            parts.join(", ")
        ),
    )
}

fn c9_local_verification() -> Verdict {
    let suite = Suite::production();
    let eng = suite.engine();
    let mut r = rng(9);
    let world = ProposedWorld::generate(&suite, &mut r);
    let id = Identity::from_label(DEFAULT_USER).unwrap();
    let mu = world.register_quiet(&suite, id, b"correct horse", &mut r);

    let mut wrong = mu.clone();
    wrong.password = b"battery staple".to_vec();
    let refused = run_proposed(&suite, &world, &wrong, Scenario::ForeignAuth, &mut r, None);
    let silent = !agreed(&refused.outcome) && refused.transcript.is_empty();

    let card = proposed::password_change(&eng, &mu, b"new horse", &mut r).unwrap();
    let mut old = mu.clone();
    old.card = card.clone();
    let old_rejected = !proposed::local_verify(&eng, &old);
    let old_run = run_proposed(&suite, &world, &old, Scenario::ForeignAuth, &mut r, None);
    let mut new = old.clone();
    new.password = b"new horse".to_vec();
    let new_run = run_proposed(&suite, &world, &new, Scenario::ForeignAuth, &mut r, None);
    let pass = silent
        && old_rejected
        && old_run.transcript.is_empty()
        && agreed(&new_run.outcome)
        && new_run.transcript.len() == 4;
    verdict(
        pass,
        format!(
            "wrong password sent {} frames; old password after change: refused {old_rejected}, {} frames; new password: {} rounds, agreed {}",
            refused.transcript.len(),
            old_run.transcript.len(),
            new_run.transcript.len(),
            agreed(&new_run.outcome)
        ),
    )
}

#[test]
fn acceptance() {
    type Criterion = (u8, &'static str, fn() -> Verdict);
    let criteria: [Criterion; 9] = [
        (1, "round counts", c1_round_counts),
        (2, "operation counts", c2_operation_counts),
        (3, "communication bits", c3_communication_bits),
        (4, "attack matrix", c4_attack_matrix),
        (5, "key agreement", c5_key_agreement),
        (6, "unlinkability game", c6_unlinkability),
        (7, "offline guessing", c7_offline_guessing),
        (8, "toy-curve oracle suite", c8_toy_oracle),
        (
            9,
            "local verification and password change",
            c9_local_verification,
        ),
    ];
    let mut red = Vec::new();
    for (n, name, check) in criteria {
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {n} {tag}: {name}: {}", v.detail);
        if !v.pass {
            red.push(n);
        }
    }
    assert!(red.is_empty(), "criteria not met: {red:?}");
}
