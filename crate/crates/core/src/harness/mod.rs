//! Runs both schemes over an in-memory bus, captures transcripts and
//! accounts for their communication and computation costs.

pub mod bus;
pub mod cost;
pub mod matrix;
pub mod scenario;
mod session;
pub mod transcript;

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::crypto::{Identity, RootCa, Suite};
use crate::mun::{self, MunCredentials, MunForeignAgent, MunHomeAgent};
use crate::proposed::{self, ForeignAgent, HomeAgent, MobileUser};
use crate::wire::Role;

pub use bus::{Abort, AbortReason, Bus, DropHook, Hook, TamperHook, Verdict};
pub use cost::{measure_costs, AccountingRule, CostModel, CostReport, OpRow};
pub use session::{run_mun, run_proposed, run_session, HarnessError, Outcome, SessionRun};
pub use transcript::{Channel, Transcript, TranscriptEntry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeId {
    Proposed,
    Mun,
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeId::Proposed => "proposed",
            SchemeId::Mun => "mun",
        })
    }
}

impl FromStr for SchemeId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "proposed" => Ok(SchemeId::Proposed),
            "mun" => Ok(SchemeId::Mun),
            other => Err(format!(
                "unknown scheme '{other}' (expected proposed or mun)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Scenario {
    ForeignAuth,
    HomeAuth,
    /// Foreign authentication followed by this many update rounds.
    KeyUpdate(u32),
    /// Password change on the card, then foreign authentication with the
    /// new password.
    PasswordChange,
    Registration,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::ForeignAuth => f.write_str("foreign-auth"),
            Scenario::HomeAuth => f.write_str("home-auth"),
            Scenario::KeyUpdate(k) => write!(f, "key-update:{k}"),
            Scenario::PasswordChange => f.write_str("password-change"),
            Scenario::Registration => f.write_str("registration"),
        }
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let sc = match name {
            "foreign-auth" | "foreign" => Scenario::ForeignAuth,
            "home-auth" | "home" => Scenario::HomeAuth,
            "key-update" | "update" => {
                let k = match arg {
                    Some(a) => a
                        .parse()
                        .map_err(|_| format!("bad update round count '{a}'"))?,
                    None => 1,
                };
                if k == 0 {
                    return Err("key-update needs at least one round".into());
                }
                return Ok(Scenario::KeyUpdate(k));
            }
            "password-change" => Scenario::PasswordChange,
            "registration" | "register" => Scenario::Registration,
            other => return Err(format!("unknown scenario '{other}'")),
        };
        match arg {
            Some(_) => Err(format!("scenario '{name}' takes no argument")),
            None => Ok(sc),
        }
    }
}

impl From<Scenario> for String {
    fn from(s: Scenario) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for Scenario {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

pub const HA_LABEL: &str = "home-agent";
pub const FA_LABEL: &str = "foreign-agent";
pub const DEFAULT_USER: &str = "mobile-user";
pub const DEFAULT_PASSWORD: &[u8] = b"correct horse battery staple";
pub const CHANGED_PASSWORD: &[u8] = b"tr0ub4dor&3";

/// CA, home agent and one foreign agent of the proposed scheme.
pub struct ProposedWorld {
    pub ca: RootCa,
    pub ha: HomeAgent,
    pub fa: ForeignAgent,
}

impl ProposedWorld {
    pub fn generate<R: RngCore + ?Sized>(suite: &Suite, rng: &mut R) -> Self {
        let ca = RootCa::generate(suite.curve(), rng);
        let ha = HomeAgent::generate(suite, Identity::from_label(HA_LABEL).unwrap(), &ca, rng);
        let fa = ForeignAgent::generate(suite, Identity::from_label(FA_LABEL).unwrap(), &ca, rng);
        ProposedWorld { ca, ha, fa }
    }

    /// Registers a user over a (secure) bus and returns the finished card.
    pub fn register<R: RngCore + ?Sized>(
        &self,
        suite: &Suite,
        id: Identity,
        pw: &[u8],
        rng: &mut R,
        bus: &mut Bus<'_>,
    ) -> Result<MobileUser, Abort> {
        let eng = suite.engine();
        let (req, x) =
            proposed::register_request(&eng, id, pw, rng).map_err(|e| Abort::new(Role::Mu, e))?;
        let req = bus.send(Role::Mu, Role::Ha, Channel::Secure, req)?;
        let issue = proposed::register_issue(&eng, &self.ha, &req);
        let issue = bus.send(Role::Ha, Role::Mu, Channel::Secure, issue)?;
        Ok(MobileUser {
            id,
            password: pw.to_vec(),
            card: proposed::card_finalize(&issue, x),
        })
    }

    /// Registration outside any recorded run.
    pub fn register_quiet<R: RngCore + ?Sized>(
        &self,
        suite: &Suite,
        id: Identity,
        pw: &[u8],
        rng: &mut R,
    ) -> MobileUser {
        let mut bus = Bus::new(suite.curve(), None);
        self.register(suite, id, pw, rng, &mut bus)
            .expect("undisturbed registration succeeds")
    }
}

/// Home and foreign agent of the baseline scheme.
pub struct MunWorld {
    pub ha: MunHomeAgent,
    pub fa: MunForeignAgent,
}

impl Default for MunWorld {
    fn default() -> Self {
        MunWorld {
            ha: MunHomeAgent::new(Identity::from_label(HA_LABEL).unwrap()),
            fa: MunForeignAgent {
                id: Identity::from_label(FA_LABEL).unwrap(),
            },
        }
    }
}

impl MunWorld {
    pub fn register<R: RngCore + ?Sized>(
        &mut self,
        suite: &Suite,
        id: Identity,
        rng: &mut R,
        bus: &mut Bus<'_>,
    ) -> Result<MunCredentials, Abort> {
        let req = bus.send(
            Role::Mu,
            Role::Ha,
            Channel::Secure,
            mun::mun_register_request(id, rng),
        )?;
        let reply = mun::mun_register(&suite.engine(), &mut self.ha, &req, rng);
        let reply = bus.send(Role::Ha, Role::Mu, Channel::Secure, reply)?;
        Ok(MunCredentials::from_reply(id, &reply))
    }

    pub fn register_quiet<R: RngCore + ?Sized>(
        &mut self,
        suite: &Suite,
        id: Identity,
        rng: &mut R,
    ) -> MunCredentials {
        let mut bus = Bus::new(suite.curve(), None);
        self.register(suite, id, rng, &mut bus)
            .expect("undisturbed registration succeeds")
    }
}
