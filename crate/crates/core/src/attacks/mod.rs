//! Adversary strategies against both schemes.
//!
//! Each attack is run by generic code in this module against a
//! [`SchemeAdapter`], which knows how to craft and read the messages of one
//! scheme. The adversary sees only an [`AdversaryView`] built from granted
//! capabilities, and a referee that holds the honest parties' results
//! decides whether the claimed evidence is real. A strategy that gets nowhere
//! still returns an outcome, with `succeeded = false`.

pub mod dictionary;
pub mod linkage;
mod mun;
pub mod net;
mod proposed;

use std::cell::RefCell;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::cdl::CdlOracle;
use crate::crypto::{CryptoError, CurveProfile, GroupPoint, Scalar, Suite};
use crate::harness::{SchemeId, Transcript};
use crate::proposed::{SessionKey, SmartCard};
use crate::wire::Role;

pub use dictionary::{Dictionary, DictionaryError};
pub use linkage::{GameScore, Linker, WIN_ACCURACY};
pub use net::{MunNet, ProposedNet, Subject};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackKind {
    MuImpersonation,
    FaImpersonation,
    HaImpersonation,
    OfflineGuess,
    Insider,
    Traceability,
    ReplaySessionKey,
    /// Long-term keys of every party plus an old transcript.
    ForwardSecrecy,
}

impl AttackKind {
    pub const ALL: [AttackKind; 8] = [
        AttackKind::MuImpersonation,
        AttackKind::FaImpersonation,
        AttackKind::HaImpersonation,
        AttackKind::OfflineGuess,
        AttackKind::Insider,
        AttackKind::Traceability,
        AttackKind::ReplaySessionKey,
        AttackKind::ForwardSecrecy,
    ];

    /// The attacks mounted against the baseline scheme's design.
    pub const MATRIX: [AttackKind; 6] = [
        AttackKind::MuImpersonation,
        AttackKind::FaImpersonation,
        AttackKind::HaImpersonation,
        AttackKind::OfflineGuess,
        AttackKind::Insider,
        AttackKind::Traceability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttackKind::MuImpersonation => "mu-impersonation",
            AttackKind::FaImpersonation => "fa-impersonation",
            AttackKind::HaImpersonation => "ha-impersonation",
            AttackKind::OfflineGuess => "offline-guess",
            AttackKind::Insider => "insider",
            AttackKind::Traceability => "traceability",
            AttackKind::ReplaySessionKey => "replay-session-key",
            AttackKind::ForwardSecrecy => "forward-secrecy",
        }
    }

    /// Capabilities granted by default.
    pub fn grants(self) -> Vec<Capability> {
        use Capability::*;
        match self {
            AttackKind::MuImpersonation | AttackKind::ReplaySessionKey => vec![Wiretap, Inject],
            AttackKind::FaImpersonation | AttackKind::HaImpersonation => vec![Wiretap, Inject],
            AttackKind::OfflineGuess => vec![Wiretap, StolenCard],
            AttackKind::Insider => vec![Registration, Inject],
            AttackKind::Traceability => vec![Wiretap],
            AttackKind::ForwardSecrecy => vec![Wiretap, LongTermKeys],
        }
    }

    /// Whether a discrete-log oracle changes what this attack can do.
    pub fn uses_oracle(self) -> bool {
        matches!(
            self,
            AttackKind::MuImpersonation | AttackKind::ReplaySessionKey | AttackKind::ForwardSecrecy
        )
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let alias = match s {
            "offline-guessing" | "offline-password-guessing" => Some(AttackKind::OfflineGuess),
            "replay" => Some(AttackKind::ReplaySessionKey),
            "pfs" => Some(AttackKind::ForwardSecrecy),
            "linkability" | "anonymity" => Some(AttackKind::Traceability),
            _ => None,
        };
        alias
            .or_else(|| AttackKind::ALL.into_iter().find(|k| k.name() == s))
            .ok_or_else(|| {
                let names: Vec<_> = AttackKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown attack '{s}' (known: {})", names.join(", "))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Capability {
    /// Read every public-channel frame of honest sessions.
    Wiretap,
    /// Send frames to honest parties and receive their answers.
    Inject,
    /// Everything stored on the victim's card (not the password).
    StolenCard,
    /// The victim's registration messages as seen by the home agent.
    Registration,
    /// Every long-term private scalar of HA and FA.
    LongTermKeys,
    /// Brute-force discrete logs; only on the toy curve.
    CdlOracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Access {
    pub capability: Capability,
    pub granted: bool,
}

/// A wiretapped session with the referee's handle for its key.
#[derive(Clone, Debug)]
pub struct Observation {
    pub transcript: Transcript,
    id: usize,
}

/// What the adversary knows. Every accessor checks and logs the capability
/// it relies on; without the grant it returns nothing.
pub struct AdversaryView {
    granted: Vec<Capability>,
    observations: Vec<Observation>,
    card: Option<SmartCard>,
    registration: Option<Transcript>,
    long_term: Vec<Scalar>,
    oracle: Option<CdlOracle>,
    log: RefCell<Vec<Access>>,
}

impl AdversaryView {
    pub fn empty() -> Self {
        AdversaryView {
            granted: Vec::new(),
            observations: Vec::new(),
            card: None,
            registration: None,
            long_term: Vec::new(),
            oracle: None,
            log: RefCell::new(Vec::new()),
        }
    }

    fn touch(&self, c: Capability) -> bool {
        let granted = self.granted.contains(&c);
        self.log.borrow_mut().push(Access {
            capability: c,
            granted,
        });
        granted
    }

    pub fn granted(&self) -> &[Capability] {
        &self.granted
    }

    pub fn observations(&self) -> &[Observation] {
        if self.touch(Capability::Wiretap) {
            &self.observations
        } else {
            &[]
        }
    }

    pub fn card(&self) -> Option<&SmartCard> {
        if self.touch(Capability::StolenCard) {
            self.card.as_ref()
        } else {
            None
        }
    }

    pub fn registration(&self) -> Option<&Transcript> {
        if self.touch(Capability::Registration) {
            self.registration.as_ref()
        } else {
            None
        }
    }

    pub fn long_term_scalars(&self) -> &[Scalar] {
        if self.touch(Capability::LongTermKeys) {
            &self.long_term
        } else {
            &[]
        }
    }

    pub fn oracle(&self) -> Option<&CdlOracle> {
        if self.touch(Capability::CdlOracle) {
            self.oracle.as_ref()
        } else {
            None
        }
    }

    pub fn may_inject(&self) -> bool {
        self.touch(Capability::Inject)
    }

    pub fn access_log(&self) -> Vec<Access> {
        self.log.borrow().clone()
    }
}

/// Collects the material for a view; only adapters fill it.
pub(crate) struct ViewBuilder {
    view: AdversaryView,
}

impl ViewBuilder {
    pub(crate) fn new(granted: &[Capability]) -> Self {
        let mut view = AdversaryView::empty();
        view.granted = granted.to_vec();
        ViewBuilder { view }
    }

    pub(crate) fn wants(&self, c: Capability) -> bool {
        self.view.granted.contains(&c)
    }

    pub(crate) fn observation(&mut self, transcript: Transcript, id: usize) {
        self.view.observations.push(Observation { transcript, id });
    }

    pub(crate) fn card(&mut self, card: SmartCard) {
        self.view.card = Some(card);
    }

    pub(crate) fn registration(&mut self, t: Transcript) {
        self.view.registration = Some(t);
    }

    pub(crate) fn long_term(&mut self, s: Vec<Scalar>) {
        self.view.long_term = s;
    }

    pub(crate) fn build(mut self, suite: &Suite) -> Result<AdversaryView, AttackError> {
        if self.wants(Capability::CdlOracle) {
            self.view.oracle = Some(CdlOracle::new(suite.curve()).map_err(AttackError::Oracle)?);
        }
        Ok(self.view)
    }
}

/// Which honest key a claimed key is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum KeyRef {
    Fa(usize),
    Mu(usize),
    Observed(usize),
}

impl KeyRef {
    fn role(self) -> Role {
        match self {
            KeyRef::Fa(_) => Role::Fa,
            KeyRef::Mu(_) | KeyRef::Observed(_) => Role::Mu,
        }
    }
}

/// One way an honest party turned the adversary down.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub variant: String,
    pub party: Role,
    pub code: i32,
    pub reason: String,
}

/// What a strategy claims to have achieved, before the referee looks.
pub(crate) enum Attempt {
    Key {
        key: SessionKey,
        against: KeyRef,
        note: String,
    },
    Password {
        recovered: Option<Vec<u8>>,
        tested: usize,
        confirmable: usize,
        verifiers: Vec<&'static str>,
    },
    Rejected {
        rejections: Vec<Rejection>,
        note: String,
    },
    Nothing(String),
}

pub(crate) type Check<'v> = Box<dyn Fn(&[u8]) -> bool + 'v>;

/// A check a candidate password must pass, built from the view.
pub(crate) struct Verifier<'v> {
    pub name: &'static str,
    pub check: Check<'v>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence {
    SessionKey {
        adversary_key: String,
        honest_party: Role,
        honest_key: Option<String>,
        matches: bool,
        note: String,
    },
    Password {
        recovered: Option<String>,
        tested: usize,
        confirmable: usize,
        verifiers: Vec<String>,
        matches_victim: bool,
    },
    Linkage(GameScore),
    Rejected {
        rejections: Vec<Rejection>,
        note: String,
    },
    None {
        reason: String,
    },
}

impl Evidence {
    /// True when the evidence on its face supports a success verdict.
    pub fn supports_success(&self) -> bool {
        match self {
            Evidence::SessionKey {
                adversary_key,
                honest_key,
                matches,
                ..
            } => *matches && honest_key.as_deref() == Some(adversary_key.as_str()),
            Evidence::Password {
                recovered,
                matches_victim,
                confirmable,
                ..
            } => *matches_victim && recovered.is_some() && *confirmable >= 1,
            Evidence::Linkage(s) => s.trials > 0 && s.accuracy >= WIN_ACCURACY,
            Evidence::Rejected { .. } | Evidence::None { .. } => false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub attack: AttackKind,
    pub scheme: SchemeId,
    pub curve: CurveProfile,
    pub succeeded: bool,
    pub evidence: Evidence,
    pub capabilities: Vec<Capability>,
    pub access_log: Vec<Access>,
    /// Frames the adversary exchanged with honest parties.
    #[serde(skip)]
    pub transcript: Transcript,
}

impl AttackOutcome {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("outcome serializes")
    }

    /// A success must carry evidence that supports it, and the adversary
    /// must not have used anything it was not granted.
    pub fn is_sound(&self) -> bool {
        let confined = self.access_log.iter().all(|a| a.granted || !self.succeeded);
        confined && (!self.succeeded || self.evidence.supports_success())
    }
}

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("discrete log oracle unavailable: {0}")]
    Oracle(CryptoError),
    #[error(transparent)]
    Dictionary(#[from] DictionaryError),
}

#[derive(Clone, Debug, Default)]
pub struct AttackOptions {
    /// Grant the brute-force discrete log oracle (toy curve only).
    pub oracle: bool,
    /// Defaults to 999 decoys plus the victim's password.
    pub dictionary: Option<Dictionary>,
    /// Rounds of the unlinkability game; defaults to [`DEFAULT_TRIALS`].
    pub trials: Option<usize>,
}

pub const DEFAULT_TRIALS: usize = 400;
pub const DEFAULT_DICTIONARY_SIZE: usize = 1000;

/// Crafting and reading the messages of one scheme.
pub(crate) trait SchemeAdapter {
    fn scheme(&self) -> SchemeId;
    fn suite(&self) -> &Suite;
    fn observe(&mut self, who: Subject, rng: &mut dyn RngCore) -> (Transcript, usize);
    fn fill(&mut self, b: &mut ViewBuilder);
    fn login_fields(&self, t: &Transcript) -> linkage::Fields;
    fn session_points(&self, t: &Transcript) -> Vec<GroupPoint>;
    fn key_from_shared(&self, shared: &GroupPoint) -> SessionKey;
    fn mu_impersonation(&mut self, view: &AdversaryView, rng: &mut dyn RngCore) -> Attempt;
    fn fa_impersonation(&mut self, view: &AdversaryView, rng: &mut dyn RngCore) -> Attempt;
    fn ha_impersonation(&mut self, view: &AdversaryView, rng: &mut dyn RngCore) -> Attempt;
    fn password_verifiers<'v>(&self, view: &'v AdversaryView) -> Vec<Verifier<'v>>;
    fn insider(
        &mut self,
        view: &AdversaryView,
        dict: &Dictionary,
        rng: &mut dyn RngCore,
    ) -> Attempt;
    fn replay_session_key(&mut self, view: &AdversaryView, rng: &mut dyn RngCore) -> Attempt;
    fn take_log(&mut self) -> Transcript;
    fn referee_key(&self, r: KeyRef) -> Option<SessionKey>;
    fn referee_password(&self) -> Vec<u8>;
}

/// Runs `kind` against a fresh deployment of `scheme` generated from `rng`.
pub fn run_attack(
    suite: &Suite,
    scheme: SchemeId,
    kind: AttackKind,
    opts: &AttackOptions,
    rng: &mut dyn RngCore,
) -> Result<AttackOutcome, AttackError> {
    let mut adapter: Box<dyn SchemeAdapter> = match scheme {
        SchemeId::Proposed => Box::new(proposed::ProposedAdapter::new(suite, rng)),
        SchemeId::Mun => Box::new(mun::MunAdapter::new(suite, rng)),
    };
    let mut grants = kind.grants();
    if opts.oracle && kind.uses_oracle() {
        grants.push(Capability::CdlOracle);
    }
    run_with(adapter.as_mut(), kind, &grants, opts, rng)
}

pub(crate) fn run_with(
    adapter: &mut dyn SchemeAdapter,
    kind: AttackKind,
    grants: &[Capability],
    opts: &AttackOptions,
    rng: &mut dyn RngCore,
) -> Result<AttackOutcome, AttackError> {
    let view = gather(adapter, grants, rng)?;
    let evidence = match kind {
        AttackKind::MuImpersonation => {
            let a = adapter.mu_impersonation(&view, rng);
            settle(adapter, a)
        }
        AttackKind::FaImpersonation => {
            let a = adapter.fa_impersonation(&view, rng);
            settle(adapter, a)
        }
        AttackKind::HaImpersonation => {
            let a = adapter.ha_impersonation(&view, rng);
            settle(adapter, a)
        }
        AttackKind::OfflineGuess => {
            let dict = dictionary_for(adapter, opts, rng)?;
            let a = offline_guess(adapter, &view, &dict);
            settle(adapter, a)
        }
        AttackKind::Insider => {
            let dict = dictionary_for(adapter, opts, rng)?;
            let a = adapter.insider(&view, &dict, rng);
            settle(adapter, a)
        }
        AttackKind::Traceability => Evidence::Linkage(traceability_game(
            adapter,
            &view,
            opts.trials.unwrap_or(DEFAULT_TRIALS),
            rng,
        )),
        AttackKind::ReplaySessionKey => {
            let a = adapter.replay_session_key(&view, rng);
            settle(adapter, a)
        }
        AttackKind::ForwardSecrecy => {
            let a = forward_secrecy(adapter, &view);
            settle(adapter, a)
        }
    };
    Ok(AttackOutcome {
        attack: kind,
        scheme: adapter.scheme(),
        curve: adapter.suite().profile(),
        succeeded: evidence.supports_success(),
        evidence,
        capabilities: grants.to_vec(),
        access_log: view.access_log(),
        transcript: adapter.take_log(),
    })
}

fn gather(
    adapter: &mut dyn SchemeAdapter,
    grants: &[Capability],
    rng: &mut dyn RngCore,
) -> Result<AdversaryView, AttackError> {
    let mut b = ViewBuilder::new(grants);
    if b.wants(Capability::Wiretap) {
        // Two sessions of the victim, so splicing across sessions is possible.
        for _ in 0..2 {
            let (t, id) = adapter.observe(Subject::Victim, rng);
            b.observation(t, id);
        }
    }
    adapter.fill(&mut b);
    b.build(adapter.suite())
}

fn dictionary_for(
    adapter: &dyn SchemeAdapter,
    opts: &AttackOptions,
    rng: &mut dyn RngCore,
) -> Result<Dictionary, AttackError> {
    Ok(match &opts.dictionary {
        Some(d) => d.clone(),
        None => Dictionary::synthetic(&adapter.referee_password(), DEFAULT_DICTIONARY_SIZE, rng),
    })
}

fn settle(adapter: &dyn SchemeAdapter, attempt: Attempt) -> Evidence {
    match attempt {
        Attempt::Key { key, against, note } => {
            let honest = adapter.referee_key(against);
            Evidence::SessionKey {
                adversary_key: key.key.to_hex(),
                honest_party: against.role(),
                honest_key: honest.map(|k| k.key.to_hex()),
                matches: honest == Some(key),
                note,
            }
        }
        Attempt::Password {
            recovered,
            tested,
            confirmable,
            verifiers,
        } => {
            let truth = adapter.referee_password();
            Evidence::Password {
                matches_victim: recovered.as_deref() == Some(truth.as_slice()),
                recovered: recovered.as_deref().map(dictionary::render),
                tested,
                confirmable,
                verifiers: verifiers.into_iter().map(String::from).collect(),
            }
        }
        Attempt::Rejected { rejections, note } => Evidence::Rejected { rejections, note },
        Attempt::Nothing(reason) => Evidence::None { reason },
    }
}

/// Runs every candidate through every verifier the view supports. A
/// candidate is confirmable when all of them accept it.
pub(crate) fn guess_with(verifiers: &[Verifier<'_>], dict: &Dictionary) -> Attempt {
    let names = verifiers.iter().map(|v| v.name).collect();
    if verifiers.is_empty() {
        return Attempt::Password {
            recovered: None,
            tested: dict.len(),
            confirmable: 0,
            verifiers: names,
        };
    }
    let hits: Vec<&[u8]> = dict
        .iter()
        .filter(|w| verifiers.iter().all(|v| (v.check)(w)))
        .collect();
    let recovered = match hits.as_slice() {
        [one] => Some(one.to_vec()),
        _ => None,
    };
    Attempt::Password {
        recovered,
        tested: dict.len(),
        confirmable: hits.len(),
        verifiers: names,
    }
}

fn offline_guess(adapter: &dyn SchemeAdapter, view: &AdversaryView, dict: &Dictionary) -> Attempt {
    guess_with(&adapter.password_verifiers(view), dict)
}

fn traceability_game(
    adapter: &mut dyn SchemeAdapter,
    view: &AdversaryView,
    trials: usize,
    rng: &mut dyn RngCore,
) -> GameScore {
    // The game needs fresh sessions on demand; it is the wiretap that pays
    // for them.
    let tapped = view.observations().len();
    let mut score = GameScore {
        trials: 0,
        same_user_trials: 0,
        correct: 0,
        accuracy: 0.0,
        ignored_fields: Vec::new(),
        linking_fields: Vec::new(),
    };
    if tapped == 0 {
        return score;
    }
    let own_a = adapter.observe(Subject::Own(0), rng).0;
    let own_b = adapter.observe(Subject::Own(1), rng).0;
    let linker = Linker::calibrate(&adapter.login_fields(&own_a), &adapter.login_fields(&own_b));
    score.ignored_fields = linker.ignored().into_iter().map(String::from).collect();
    for _ in 0..trials {
        let same = rng.gen_bool(0.5);
        let t1 = adapter.observe(Subject::Victim, rng).0;
        let t2 = adapter
            .observe(
                if same {
                    Subject::Victim
                } else {
                    Subject::Bystander
                },
                rng,
            )
            .0;
        let (f1, f2) = (adapter.login_fields(&t1), adapter.login_fields(&t2));
        let ev = linker.evidence(&f1, &f2);
        for name in &ev {
            match score.linking_fields.iter_mut().find(|(n, _)| n == name) {
                Some((_, c)) => *c += 1,
                None => score.linking_fields.push((name.to_string(), 1)),
            }
        }
        score.trials += 1;
        score.same_user_trials += same as usize;
        score.correct += (ev.is_empty() != same) as usize;
    }
    score.accuracy = score.correct as f64 / score.trials as f64;
    score
}

/// Tries every key derivable from long-term scalars and (when granted) the
/// discrete-log oracle against an old session.
fn forward_secrecy(adapter: &dyn SchemeAdapter, view: &AdversaryView) -> Attempt {
    let Some(obs) = view.observations().first() else {
        return Attempt::Nothing("no recorded session".into());
    };
    let curve = adapter.suite().curve();
    let points = adapter.session_points(&obs.transcript);
    let honest = adapter.referee_key(KeyRef::Observed(obs.id));
    let mut tried = 0usize;
    let mut candidates: Vec<(SessionKey, String)> = Vec::new();
    for (i, s) in view.long_term_scalars().iter().enumerate() {
        for (j, p) in points.iter().enumerate() {
            candidates.push((
                adapter.key_from_shared(&curve.mul(s, p)),
                format!("long-term scalar {i} times point {j}"),
            ));
        }
    }
    if let Some(oracle) = view.oracle() {
        for (i, p) in points.iter().enumerate() {
            for (j, q) in points.iter().enumerate().skip(i + 1) {
                if let Some(shared) = oracle.cdh(p, q) {
                    candidates.push((
                        adapter.key_from_shared(&shared),
                        format!("CDH of points {i} and {j}"),
                    ));
                }
            }
        }
    }
    for (key, how) in candidates {
        tried += 1;
        if Some(key) == honest {
            return Attempt::Key {
                key,
                against: KeyRef::Observed(obs.id),
                note: format!("derived from {how}"),
            };
        }
    }
    Attempt::Nothing(format!(
        "{tried} candidate keys from long-term material, none matched"
    ))
}
