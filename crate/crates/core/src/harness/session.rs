use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::bus::{Abort, Bus, Hook};
use super::cost::{measure_costs, AccountingRule, CostReport};
use super::transcript::{Channel, Transcript};
use super::{
    MunWorld, ProposedWorld, Scenario, SchemeId, CHANGED_PASSWORD, DEFAULT_PASSWORD, DEFAULT_USER,
};
use crate::crypto::{Engine, Identity, OpCounts, Suite};
use crate::mun::{self, MunCredentials};
use crate::proposed::{self, MobileUser, SessionKey};
use crate::wire::Role;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HarnessError {
    #[error("scenario {scenario} is not defined for the {scheme} scheme")]
    Unsupported {
        scheme: SchemeId,
        scenario: Scenario,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum Outcome {
    /// Both ends hold a key; `mu_key == peer_key` for an honest run.
    Agreed {
        mu_key: SessionKey,
        peer_key: SessionKey,
        peer: Role,
    },
    Registered,
    Aborted {
        party: Role,
        code: i32,
        reason: String,
    },
}

impl Outcome {
    pub fn is_success(&self) -> bool {
        match self {
            Outcome::Agreed {
                mu_key, peer_key, ..
            } => mu_key == peer_key,
            Outcome::Registered => true,
            Outcome::Aborted { .. } => false,
        }
    }

    fn from_abort(a: &Abort) -> Self {
        Outcome::Aborted {
            party: a.party,
            code: a.code(),
            reason: a.describe(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SessionRun {
    pub transcript: Transcript,
    pub report: CostReport,
    pub outcome: Outcome,
}

struct Engines<'s> {
    mu: Engine<'s>,
    fa: Engine<'s>,
    ha: Engine<'s>,
}

impl<'s> Engines<'s> {
    fn new(suite: &'s Suite) -> Self {
        Engines {
            mu: suite.engine(),
            fa: suite.engine(),
            ha: suite.engine(),
        }
    }

    fn counts(&self, roles: &[Role]) -> Vec<(Role, OpCounts)> {
        roles
            .iter()
            .map(|r| {
                let c = match r {
                    Role::Mu => self.mu.counts(),
                    Role::Fa => self.fa.counts(),
                    Role::Ha => self.ha.counts(),
                };
                (*r, c)
            })
            .collect()
    }
}

/// Generates a deployment with one registered user from `rng` and runs
/// `scenario` on it.
pub fn run_session<R: RngCore + ?Sized>(
    suite: &Suite,
    scheme: SchemeId,
    scenario: Scenario,
    rng: &mut R,
    hook: Option<&mut dyn Hook>,
) -> Result<SessionRun, HarnessError> {
    let id = Identity::from_label(DEFAULT_USER).unwrap();
    match scheme {
        SchemeId::Proposed => {
            let world = ProposedWorld::generate(suite, rng);
            if scenario == Scenario::Registration {
                return Ok(run_registration_proposed(suite, &world, id, rng, hook));
            }
            let mu = world.register_quiet(suite, id, DEFAULT_PASSWORD, rng);
            Ok(run_proposed(suite, &world, &mu, scenario, rng, hook))
        }
        SchemeId::Mun => {
            let mut world = MunWorld::default();
            if scenario == Scenario::Registration {
                return Ok(run_registration_mun(suite, &mut world, id, rng, hook));
            }
            let cred = world.register_quiet(suite, id, rng);
            run_mun(suite, &world, &cred, scenario, rng, hook)
        }
    }
}

fn finish(
    suite: &Suite,
    scheme: SchemeId,
    scenario: Scenario,
    bus: Bus<'_>,
    engines: &Engines<'_>,
    outcome: Outcome,
) -> SessionRun {
    let _ = suite;
    let report = measure_costs(
        scheme,
        scenario,
        &bus.transcript,
        &engines.counts(&[Role::Mu, Role::Fa, Role::Ha]),
        AccountingRule::Nominal,
    );
    SessionRun {
        transcript: bus.transcript,
        report,
        outcome,
    }
}

fn run_registration_proposed<R: RngCore + ?Sized>(
    suite: &Suite,
    world: &ProposedWorld,
    id: Identity,
    rng: &mut R,
    hook: Option<&mut dyn Hook>,
) -> SessionRun {
    let mut bus = Bus::new(suite.curve(), hook);
    bus.set_phase("registration");
    let engines = Engines::new(suite);
    let outcome = match world.register(suite, id, DEFAULT_PASSWORD, rng, &mut bus) {
        Ok(mu) if proposed::local_verify(&engines.mu, &mu) => Outcome::Registered,
        Ok(_) => Outcome::from_abort(&Abort::new(
            Role::Mu,
            crate::error::ProtocolError::LocalVerificationFailed,
        )),
        Err(a) => Outcome::from_abort(&a),
    };
    finish(
        suite,
        SchemeId::Proposed,
        Scenario::Registration,
        bus,
        &engines,
        outcome,
    )
}

fn run_registration_mun<R: RngCore + ?Sized>(
    suite: &Suite,
    world: &mut MunWorld,
    id: Identity,
    rng: &mut R,
    hook: Option<&mut dyn Hook>,
) -> SessionRun {
    let mut bus = Bus::new(suite.curve(), hook);
    bus.set_phase("registration");
    let engines = Engines::new(suite);
    let outcome = match world.register(suite, id, rng, &mut bus) {
        Ok(_) => Outcome::Registered,
        Err(a) => Outcome::from_abort(&a),
    };
    finish(
        suite,
        SchemeId::Mun,
        Scenario::Registration,
        bus,
        &engines,
        outcome,
    )
}

/// Runs one scenario of the proposed scheme for an already registered user.
pub fn run_proposed<R: RngCore + ?Sized>(
    suite: &Suite,
    world: &ProposedWorld,
    mu: &MobileUser,
    scenario: Scenario,
    rng: &mut R,
    hook: Option<&mut dyn Hook>,
) -> SessionRun {
    let mut bus = Bus::new(suite.curve(), hook);
    let e = Engines::new(suite);
    let outcome = match proposed_flow(world, mu, scenario, rng, &mut bus, &e) {
        Ok(o) => o,
        Err(a) => Outcome::from_abort(&a),
    };
    finish(suite, SchemeId::Proposed, scenario, bus, &e, outcome)
}

fn proposed_flow<R: RngCore + ?Sized>(
    world: &ProposedWorld,
    mu: &MobileUser,
    scenario: Scenario,
    rng: &mut R,
    bus: &mut Bus<'_>,
    e: &Engines<'_>,
) -> Result<Outcome, Abort> {
    let pub_ = Channel::Public;
    match scenario {
        Scenario::HomeAuth => {
            bus.set_phase("home-auth");
            let (m1, eph) =
                proposed::home_login(&e.mu, mu, rng).map_err(|x| Abort::new(Role::Mu, x))?;
            let m1 = bus.send(Role::Mu, Role::Ha, pub_, m1)?;
            let (hm2, sk_ha) = proposed::home_ha_respond(&e.ha, &world.ha, &m1, rng)
                .map_err(|x| Abort::new(Role::Ha, x))?;
            let hm2 = bus.send(Role::Ha, Role::Mu, pub_, hm2)?;
            let sk_mu = proposed::home_mu_confirm(&e.mu, &eph, &hm2)
                .map_err(|x| Abort::new(Role::Mu, x))?;
            Ok(Outcome::Agreed {
                mu_key: sk_mu,
                peer_key: sk_ha,
                peer: Role::Ha,
            })
        }
        Scenario::PasswordChange => {
            bus.set_phase("password-change");
            let card = proposed::password_change(&e.mu, mu, CHANGED_PASSWORD, rng)
                .map_err(|x| Abort::new(Role::Mu, x))?;
            let changed = MobileUser {
                id: mu.id,
                password: CHANGED_PASSWORD.to_vec(),
                card,
            };
            let (sk_mu, sk_fa) = proposed_foreign(world, &changed, rng, bus, e)?;
            Ok(Outcome::Agreed {
                mu_key: sk_mu,
                peer_key: sk_fa,
                peer: Role::Fa,
            })
        }
        Scenario::ForeignAuth | Scenario::KeyUpdate(_) => {
            let (mut sk_mu, mut sk_fa) = proposed_foreign(world, mu, rng, bus, e)?;
            if let Scenario::KeyUpdate(k) = scenario {
                for i in 1..=k {
                    bus.set_phase(format!("update-{i}"));
                    let (u1, eph) = proposed::key_update_init(&e.mu, rng);
                    let u1 = bus.send(Role::Mu, Role::Fa, pub_, u1)?;
                    let (u2, next_fa) = proposed::key_update_respond(&e.fa, &u1, &sk_fa, rng)
                        .map_err(|x| Abort::new(Role::Fa, x))?;
                    let u2 = bus.send(Role::Fa, Role::Mu, pub_, u2)?;
                    sk_mu = proposed::key_update_confirm(&e.mu, &eph, &u2, &sk_mu)
                        .map_err(|x| Abort::new(Role::Mu, x))?;
                    sk_fa = next_fa;
                }
            }
            Ok(Outcome::Agreed {
                mu_key: sk_mu,
                peer_key: sk_fa,
                peer: Role::Fa,
            })
        }
        Scenario::Registration => unreachable!("registration is run separately"),
    }
}

fn proposed_foreign<R: RngCore + ?Sized>(
    world: &ProposedWorld,
    mu: &MobileUser,
    rng: &mut R,
    bus: &mut Bus<'_>,
    e: &Engines<'_>,
) -> Result<(SessionKey, SessionKey), Abort> {
    let pub_ = Channel::Public;
    bus.set_phase("auth");
    let (m1, ea) = proposed::login_begin(&e.mu, mu, rng).map_err(|x| Abort::new(Role::Mu, x))?;
    let m1 = bus.send(Role::Mu, Role::Fa, pub_, m1)?;
    proposed::route_login(&m1, &[world.ha.id()]).map_err(|x| Abort::new(Role::Fa, x))?;
    let (m2, eb) = proposed::fa_process_login(&e.fa, &world.fa, &m1, rng)
        .map_err(|x| Abort::new(Role::Fa, x))?;
    let m2 = bus.send(Role::Fa, Role::Ha, pub_, m2)?;
    let m3 =
        proposed::ha_process(&e.ha, &world.ha, &m2, rng).map_err(|x| Abort::new(Role::Ha, x))?;
    let m3 = bus.send(Role::Ha, Role::Fa, pub_, m3)?;
    let (m4, sk_fa) =
        proposed::fa_finish(&e.fa, &world.fa, &eb, &m3).map_err(|x| Abort::new(Role::Fa, x))?;
    let m4 = bus.send(Role::Fa, Role::Mu, pub_, m4)?;
    let sk_mu = proposed::mu_finish(&e.mu, &ea, &m4).map_err(|x| Abort::new(Role::Mu, x))?;
    Ok((sk_mu, sk_fa))
}

/// Runs one scenario of the baseline scheme for registered credentials.
pub fn run_mun<R: RngCore + ?Sized>(
    suite: &Suite,
    world: &MunWorld,
    cred: &MunCredentials,
    scenario: Scenario,
    rng: &mut R,
    hook: Option<&mut dyn Hook>,
) -> Result<SessionRun, HarnessError> {
    let rounds = match scenario {
        Scenario::ForeignAuth => 0,
        Scenario::KeyUpdate(k) => k,
        other => {
            return Err(HarnessError::Unsupported {
                scheme: SchemeId::Mun,
                scenario: other,
            })
        }
    };
    let mut bus = Bus::new(suite.curve(), hook);
    let e = Engines::new(suite);
    let outcome = match mun_flow(world, cred, rounds, rng, &mut bus, &e) {
        Ok(o) => o,
        Err(a) => Outcome::from_abort(&a),
    };
    Ok(finish(suite, SchemeId::Mun, scenario, bus, &e, outcome))
}

fn mun_flow<R: RngCore + ?Sized>(
    world: &MunWorld,
    cred: &MunCredentials,
    rounds: u32,
    rng: &mut R,
    bus: &mut Bus<'_>,
    e: &Engines<'_>,
) -> Result<Outcome, Abort> {
    let pub_ = Channel::Public;
    bus.set_phase("auth");
    let m1 = bus.send(Role::Mu, Role::Fa, pub_, mun::mun_login(cred))?;
    let (m2, pending) = mun::mun_fa_forward(&world.fa, &m1, rng);
    let m2 = bus.send(Role::Fa, Role::Ha, pub_, m2)?;
    let m3 = mun::mun_ha_auth(&e.ha, &world.ha, &m2).map_err(|x| Abort::new(Role::Ha, x))?;
    let m3 = bus.send(Role::Ha, Role::Fa, pub_, m3)?;
    let (m4, sess) = mun::mun_fa_respond(&e.fa, &world.fa, &pending, &m3, rng)
        .map_err(|x| Abort::new(Role::Fa, x))?;
    let m4 = bus.send(Role::Fa, Role::Mu, pub_, m4)?;
    let (m5, mut link_mu) =
        mun::mun_mu_respond(&e.mu, cred, &m4, rng).map_err(|x| Abort::new(Role::Mu, x))?;
    let m5 = bus.send(Role::Mu, Role::Fa, pub_, m5)?;
    let mut link_fa = mun::mun_fa_verify(&e.fa, &sess, &m5).map_err(|x| Abort::new(Role::Fa, x))?;
    for i in 1..=rounds {
        bus.set_phase(format!("update-{i}"));
        let (u1, eph) = mun::mun_update_init(&e.mu, rng);
        let u1 = bus.send(Role::Mu, Role::Fa, pub_, u1)?;
        let (u2, next_fa) = mun::mun_update_respond(&e.fa, &link_fa, &u1, rng)
            .map_err(|x| Abort::new(Role::Fa, x))?;
        let u2 = bus.send(Role::Fa, Role::Mu, pub_, u2)?;
        link_mu = mun::mun_update_confirm(&e.mu, &link_mu, &eph, &u2)
            .map_err(|x| Abort::new(Role::Mu, x))?;
        link_fa = next_fa;
    }
    Ok(Outcome::Agreed {
        mu_key: link_mu.key,
        peer_key: link_fa.key,
        peer: Role::Fa,
    })
}
