//! Honest deployments the adversary plays against.
//!
//! A net owns every honest party. Its fields are private to this module, so
//! adversary code can only reach the parties through the endpoint methods
//! (which take and return protocol messages, carried through the wire codec)
//! or through what a granted capability hands out. The referee accessors
//! are `pub(super)` and only used to judge outcomes.

use rand::RngCore;

use crate::crypto::{Certificate, GroupPoint, Identity, Scalar, Suite};
use crate::error::ProtocolError;
use crate::harness::{
    run_mun, run_proposed, AbortReason, Bus, Channel, MunWorld, Outcome, ProposedWorld, Scenario,
    Transcript, DEFAULT_PASSWORD,
};
use crate::mun::messages::{MunM1, MunM2, MunM3, MunM4, MunM5};
use crate::mun::{self, MunCredentials, MunFaPending, MunFaSession};
use crate::proposed::messages::{Msg1, Msg2, Msg3, Msg4};
use crate::proposed::{self, EphemeralA, EphemeralB, MobileUser, SessionKey, SmartCard};
use crate::wire::{MessageKind, ProtocolMessage, Role};

/// Whose honest session the adversary gets to watch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subject {
    Victim,
    Bystander,
    /// One of the two accounts the adversary registered itself.
    Own(usize),
}

pub const VICTIM: &str = "victim";
pub const BYSTANDER: &str = "bystander";
pub const OWN: [&str; 2] = ["mallory", "mallory-2"];
pub const OWN_PASSWORD: &[u8] = b"mallory's own password";

fn label(s: &str) -> Identity {
    Identity::from_label(s).expect("fixed labels fit")
}

/// Passes a message through encode, decode and the interaction log.
fn carry<T>(
    suite: &Suite,
    log: &mut Transcript,
    from: Role,
    to: Role,
    msg: T,
) -> Result<T, ProtocolError>
where
    T: Into<ProtocolMessage> + TryFrom<ProtocolMessage, Error = MessageKind>,
{
    let mut bus = Bus::new(suite.curve(), None);
    bus.set_phase("attack");
    let r = bus.send(from, to, Channel::Public, msg);
    for mut e in bus.transcript.entries {
        e.step = log.len();
        log.entries.push(e);
    }
    r.map_err(|a| match a.reason {
        AbortReason::Protocol(e) => e,
        other => ProtocolError::Malformed(format!("{other:?}")),
    })
}

fn agreed_key(o: &Outcome) -> SessionKey {
    match o {
        Outcome::Agreed {
            mu_key, peer_key, ..
        } if mu_key == peer_key => *mu_key,
        other => panic!("honest session failed: {other:?}"),
    }
}

pub struct ProposedNet {
    suite: Suite,
    world: ProposedWorld,
    victim: MobileUser,
    bystander: MobileUser,
    own: [MobileUser; 2],
    registration: Transcript,
    mu_live: Vec<(EphemeralA, Option<SessionKey>)>,
    fa_live: Vec<(EphemeralB, Option<SessionKey>)>,
    observed: Vec<SessionKey>,
    log: Transcript,
}

impl ProposedNet {
    pub fn new<R: RngCore + ?Sized>(suite: &Suite, rng: &mut R) -> Self {
        let world = ProposedWorld::generate(suite, rng);
        let mut bus = Bus::new(suite.curve(), None);
        bus.set_phase("registration");
        let victim = world
            .register(suite, label(VICTIM), DEFAULT_PASSWORD, rng, &mut bus)
            .expect("registration");
        let registration = bus.transcript;
        let bystander = world.register_quiet(suite, label(BYSTANDER), DEFAULT_PASSWORD, rng);
        let own = OWN.map(|n| world.register_quiet(suite, label(n), OWN_PASSWORD, rng));
        ProposedNet {
            suite: suite.clone(),
            world,
            victim,
            bystander,
            own,
            registration,
            mu_live: Vec::new(),
            fa_live: Vec::new(),
            observed: Vec::new(),
            log: Transcript::default(),
        }
    }

    pub fn suite(&self) -> &Suite {
        &self.suite
    }

    /// Runs an honest foreign authentication of `who` and hands over what
    /// went over the air, with the referee's index for its key.
    pub fn observe<R: RngCore + ?Sized>(
        &mut self,
        who: Subject,
        rng: &mut R,
    ) -> (Transcript, usize) {
        let mu = match who {
            Subject::Victim => &self.victim,
            Subject::Bystander => &self.bystander,
            Subject::Own(i) => &self.own[i],
        };
        let run = run_proposed(
            &self.suite,
            &self.world,
            mu,
            Scenario::ForeignAuth,
            rng,
            None,
        );
        self.observed.push(agreed_key(&run.outcome));
        (run.transcript, self.observed.len() - 1)
    }

    pub fn own_account(&self, i: usize) -> &MobileUser {
        &self.own[i]
    }

    // Public directory.

    pub fn id_fa(&self) -> Identity {
        self.world.fa.id()
    }

    pub fn cert_fa(&self) -> &Certificate {
        self.world.fa.cert()
    }

    pub fn cert_ha(&self) -> &Certificate {
        self.world.ha.cert()
    }

    pub fn c_pub(&self) -> GroupPoint {
        self.world.ha.c_pub()
    }

    // Capability material.

    pub(super) fn stolen_card(&self) -> SmartCard {
        self.victim.card.clone()
    }

    pub(super) fn registration(&self) -> Transcript {
        self.registration.clone()
    }

    pub(super) fn long_term_scalars(&self) -> Vec<Scalar> {
        let mut v: Vec<Scalar> = self
            .world
            .ha
            .long_term_scalars()
            .into_iter()
            .cloned()
            .collect();
        v.extend(self.world.fa.long_term_scalars().into_iter().cloned());
        v
    }

    // Endpoints.

    /// The victim starts a login; the adversary receives Msg1 instead of FA.
    pub fn victim_login<R: RngCore + ?Sized>(&mut self, rng: &mut R) -> (Msg1, usize) {
        let (m1, eph) = proposed::login_begin(&self.suite.engine(), &self.victim, rng)
            .expect("victim's card is valid");
        let m1 = carry(&self.suite, &mut self.log, Role::Mu, Role::Fa, m1).expect("honest frame");
        self.mu_live.push((eph, None));
        (m1, self.mu_live.len() - 1)
    }

    /// Delivers a Msg4 to the victim's session `h`.
    pub fn victim_receive(&mut self, h: usize, m4: Msg4) -> Result<(), ProtocolError> {
        let m4 = carry(&self.suite, &mut self.log, Role::Fa, Role::Mu, m4)?;
        let key = proposed::mu_finish(&self.suite.engine(), &self.mu_live[h].0, &m4)?;
        self.mu_live[h].1 = Some(key);
        Ok(())
    }

    pub fn fa_login<R: RngCore + ?Sized>(
        &mut self,
        m1: Msg1,
        rng: &mut R,
    ) -> Result<(Msg2, usize), ProtocolError> {
        let m1 = carry(&self.suite, &mut self.log, Role::Mu, Role::Fa, m1)?;
        proposed::route_login(&m1, &[self.world.ha.id()])?;
        let (m2, eph) = proposed::fa_process_login(&self.suite.engine(), &self.world.fa, &m1, rng)?;
        self.fa_live.push((eph, None));
        Ok((m2, self.fa_live.len() - 1))
    }

    pub fn fa_finish(&mut self, h: usize, m3: Msg3) -> Result<Msg4, ProtocolError> {
        let m3 = carry(&self.suite, &mut self.log, Role::Ha, Role::Fa, m3)?;
        let (m4, key) = proposed::fa_finish(
            &self.suite.engine(),
            &self.world.fa,
            &self.fa_live[h].0,
            &m3,
        )?;
        self.fa_live[h].1 = Some(key);
        Ok(m4)
    }

    pub fn ha<R: RngCore + ?Sized>(
        &mut self,
        m2: Msg2,
        rng: &mut R,
    ) -> Result<Msg3, ProtocolError> {
        let m2 = carry(&self.suite, &mut self.log, Role::Fa, Role::Ha, m2)?;
        proposed::ha_process(&self.suite.engine(), &self.world.ha, &m2, rng)
    }

    pub(super) fn take_log(&mut self) -> Transcript {
        std::mem::take(&mut self.log)
    }

    // Referee.

    pub(super) fn fa_key(&self, h: usize) -> Option<SessionKey> {
        self.fa_live.get(h).and_then(|s| s.1)
    }

    pub(super) fn mu_key(&self, h: usize) -> Option<SessionKey> {
        self.mu_live.get(h).and_then(|s| s.1)
    }

    pub(super) fn observed_key(&self, i: usize) -> Option<SessionKey> {
        self.observed.get(i).copied()
    }

    pub(super) fn victim_password(&self) -> Vec<u8> {
        self.victim.password.clone()
    }
}

struct MunFaSlot {
    pending: MunFaPending,
    session: Option<MunFaSession>,
    key: Option<SessionKey>,
}

pub struct MunNet {
    suite: Suite,
    world: MunWorld,
    victim: MunCredentials,
    bystander: MunCredentials,
    own: [MunCredentials; 2],
    registration: Transcript,
    mu_keys: Vec<SessionKey>,
    fa_live: Vec<MunFaSlot>,
    observed: Vec<SessionKey>,
    log: Transcript,
}

impl MunNet {
    pub fn new<R: RngCore + ?Sized>(suite: &Suite, rng: &mut R) -> Self {
        let mut world = MunWorld::default();
        let mut bus = Bus::new(suite.curve(), None);
        bus.set_phase("registration");
        let victim = world
            .register(suite, label(VICTIM), rng, &mut bus)
            .expect("registration");
        let registration = bus.transcript;
        let bystander = world.register_quiet(suite, label(BYSTANDER), rng);
        let own = [
            world.register_quiet(suite, label(OWN[0]), rng),
            world.register_quiet(suite, label(OWN[1]), rng),
        ];
        MunNet {
            suite: suite.clone(),
            world,
            victim,
            bystander,
            own,
            registration,
            mu_keys: Vec::new(),
            fa_live: Vec::new(),
            observed: Vec::new(),
            log: Transcript::default(),
        }
    }

    pub fn suite(&self) -> &Suite {
        &self.suite
    }

    pub fn observe<R: RngCore + ?Sized>(
        &mut self,
        who: Subject,
        rng: &mut R,
    ) -> (Transcript, usize) {
        let cred = match who {
            Subject::Victim => &self.victim,
            Subject::Bystander => &self.bystander,
            Subject::Own(i) => &self.own[i],
        };
        let run = run_mun(
            &self.suite,
            &self.world,
            cred,
            Scenario::ForeignAuth,
            rng,
            None,
        )
        .expect("supported");
        self.observed.push(agreed_key(&run.outcome));
        (run.transcript, self.observed.len() - 1)
    }

    pub fn own_account(&self, i: usize) -> &MunCredentials {
        &self.own[i]
    }

    pub fn id_fa(&self) -> Identity {
        self.world.fa.id
    }

    pub fn id_ha(&self) -> Identity {
        self.world.ha.id
    }

    pub(super) fn registration(&self) -> Transcript {
        self.registration.clone()
    }

    /// The victim answers an M4 as it would from FA.
    pub fn victim_respond<R: RngCore + ?Sized>(
        &mut self,
        m4: MunM4,
        rng: &mut R,
    ) -> Result<(MunM5, usize), ProtocolError> {
        let m4 = carry(&self.suite, &mut self.log, Role::Fa, Role::Mu, m4)?;
        let (m5, link) = mun::mun_mu_respond(&self.suite.engine(), &self.victim, &m4, rng)?;
        self.mu_keys.push(link.key);
        let m5 = carry(&self.suite, &mut self.log, Role::Mu, Role::Fa, m5)?;
        Ok((m5, self.mu_keys.len() - 1))
    }

    pub fn fa_login<R: RngCore + ?Sized>(
        &mut self,
        m1: MunM1,
        rng: &mut R,
    ) -> Result<(MunM2, usize), ProtocolError> {
        let m1 = carry(&self.suite, &mut self.log, Role::Mu, Role::Fa, m1)?;
        let (m2, pending) = mun::mun_fa_forward(&self.world.fa, &m1, rng);
        self.fa_live.push(MunFaSlot {
            pending,
            session: None,
            key: None,
        });
        Ok((m2, self.fa_live.len() - 1))
    }

    pub fn fa_respond<R: RngCore + ?Sized>(
        &mut self,
        h: usize,
        m3: MunM3,
        rng: &mut R,
    ) -> Result<MunM4, ProtocolError> {
        let m3 = carry(&self.suite, &mut self.log, Role::Ha, Role::Fa, m3)?;
        let slot = &mut self.fa_live[h];
        let (m4, sess) = mun::mun_fa_respond(
            &self.suite.engine(),
            &self.world.fa,
            &slot.pending,
            &m3,
            rng,
        )?;
        slot.session = Some(sess);
        Ok(m4)
    }

    pub fn fa_verify(&mut self, h: usize, m5: MunM5) -> Result<(), ProtocolError> {
        let m5 = carry(&self.suite, &mut self.log, Role::Mu, Role::Fa, m5)?;
        let slot = &mut self.fa_live[h];
        let sess = slot
            .session
            .as_ref()
            .ok_or_else(|| ProtocolError::Malformed("M5 before M4".into()))?;
        let link = mun::mun_fa_verify(&self.suite.engine(), sess, &m5)?;
        slot.key = Some(link.key);
        Ok(())
    }

    pub fn ha(&mut self, m2: MunM2) -> Result<MunM3, ProtocolError> {
        let m2 = carry(&self.suite, &mut self.log, Role::Fa, Role::Ha, m2)?;
        mun::mun_ha_auth(&self.suite.engine(), &self.world.ha, &m2)
    }

    pub(super) fn take_log(&mut self) -> Transcript {
        std::mem::take(&mut self.log)
    }

    pub(super) fn fa_key(&self, h: usize) -> Option<SessionKey> {
        self.fa_live.get(h).and_then(|s| s.key)
    }

    pub(super) fn mu_key(&self, h: usize) -> Option<SessionKey> {
        self.mu_keys.get(h).copied()
    }

    pub(super) fn observed_key(&self, i: usize) -> Option<SessionKey> {
        self.observed.get(i).copied()
    }

    pub(super) fn victim_password(&self) -> Vec<u8> {
        self.victim.pw_mu.0.to_vec()
    }
}
