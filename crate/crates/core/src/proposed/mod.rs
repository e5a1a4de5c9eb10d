//! The anonymous roaming-authentication scheme: registration, foreign and
//! home network authentication, session key update and password change.
//!
//! Every step is a function of (party state, received message, rng) run
//! against a per-party [`Engine`](crate::crypto::Engine) so that the
//! primitives it uses are counted.

mod card;
mod foreign;
mod home;
pub mod messages;
mod register;
mod update;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use zeroize::Zeroize;

use crate::crypto::{
    Certificate, Curve, Digest160, Engine, Field, FieldKind, GroupPoint, Identity, KeyPair,
    Nonce128, RootCa, Scalar, Suite,
};

pub use card::{CardFileError, SmartCard};
pub use foreign::{
    fa_finish, fa_process_login, ha_process, login_begin, mu_finish, route_login, seal_w2, seal_w3,
    v2_items, v3_items, EphemeralA, EphemeralB,
};
pub use home::{home_ha_respond, home_login, home_mu_confirm};
pub use register::{
    card_finalize, local_verify, password_change, register_issue, register_request,
};
pub use update::{key_update_confirm, key_update_init, key_update_respond, UpdateEphemeral};

/// Length of the HA master secret y.
pub const MASTER_SECRET_BYTES: usize = 32;

/// Long-term material of the home agent: ID_HA, y, (c, C) and its signing
/// key with certificate.
#[derive(Clone)]
pub struct HomeAgent {
    id: Identity,
    y: [u8; MASTER_SECRET_BYTES],
    c: Scalar,
    c_pub: GroupPoint,
    signing: KeyPair,
    cert: Certificate,
    root: GroupPoint,
}

impl HomeAgent {
    pub fn generate<R: RngCore + ?Sized>(
        suite: &Suite,
        id: Identity,
        ca: &RootCa,
        rng: &mut R,
    ) -> Self {
        let curve = suite.curve();
        let mut y = [0u8; MASTER_SECRET_BYTES];
        rng.fill_bytes(&mut y);
        let c = Scalar::random(curve, rng);
        let c_pub = curve.mul(&c, &curve.generator());
        let signing = KeyPair::generate(curve, rng);
        let cert = ca.issue(curve, suite.hash_alg(), id, signing.public);
        HomeAgent {
            id,
            y,
            c,
            c_pub,
            signing,
            cert,
            root: ca.public(),
        }
    }

    pub fn id(&self) -> Identity {
        self.id
    }

    /// c and the signing key, for compromise experiments only.
    pub fn long_term_scalars(&self) -> [&Scalar; 2] {
        [&self.c, &self.signing.secret]
    }

    /// The static point C embedded in every issued card.
    pub fn c_pub(&self) -> GroupPoint {
        self.c_pub
    }

    pub fn cert(&self) -> &Certificate {
        &self.cert
    }

    /// h(ID_MU ‖ y), computed outside any engine. White-box hook for tests
    /// that check card and login invariants.
    pub fn user_secret(&self, suite: &Suite, id_mu: &Identity) -> Digest160 {
        suite.hash(&user_secret_fields(id_mu, &self.y))
    }

    fn user_secret_counted(&self, eng: &Engine<'_>, id_mu: &Identity) -> Digest160 {
        eng.hash(&user_secret_fields(id_mu, &self.y))
    }
}

impl Drop for HomeAgent {
    fn drop(&mut self) {
        self.y.zeroize();
    }
}

fn user_secret_fields<'a>(id_mu: &'a Identity, y: &'a [u8]) -> [Field<'a>; 2] {
    [id_mu.field(), Field::bytes(y)]
}

/// Long-term material of a foreign agent.
#[derive(Clone)]
pub struct ForeignAgent {
    id: Identity,
    signing: KeyPair,
    cert: Certificate,
    root: GroupPoint,
}

impl ForeignAgent {
    pub fn generate<R: RngCore + ?Sized>(
        suite: &Suite,
        id: Identity,
        ca: &RootCa,
        rng: &mut R,
    ) -> Self {
        let signing = KeyPair::generate(suite.curve(), rng);
        let cert = ca.issue(suite.curve(), suite.hash_alg(), id, signing.public);
        ForeignAgent {
            id,
            signing,
            cert,
            root: ca.public(),
        }
    }

    /// An agent holding a certificate it did not earn, e.g. one copied from
    /// another agent, paired with its own signing key.
    pub fn with_cert(id: Identity, signing: KeyPair, cert: Certificate, root: GroupPoint) -> Self {
        ForeignAgent {
            id,
            signing,
            cert,
            root,
        }
    }

    pub fn id(&self) -> Identity {
        self.id
    }

    /// The signing key, for compromise experiments only.
    pub fn long_term_scalars(&self) -> [&Scalar; 1] {
        [&self.signing.secret]
    }

    pub fn cert(&self) -> &Certificate {
        &self.cert
    }
}

/// What the mobile user types plus the card in the reader.
#[derive(Clone)]
pub struct MobileUser {
    pub id: Identity,
    pub password: Vec<u8>,
    pub card: SmartCard,
}

impl Drop for MobileUser {
    fn drop(&mut self) {
        self.password.zeroize();
    }
}

/// SK together with its update epoch (0 right after authentication).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionKey {
    pub key: Digest160,
    pub epoch: u32,
}

/// h(PW_MU ‖ x_MU).
pub fn masked_password(eng: &Engine<'_>, pw: &[u8], x: &Nonce128) -> Digest160 {
    eng.hash(&[Field::bytes(pw), x.field()])
}

/// H = h(ID_MU ‖ h(PW_MU ‖ x_MU)).
pub fn card_check_value(eng: &Engine<'_>, id: &Identity, masked: &Digest160) -> Digest160 {
    eng.hash(&[id.field(), masked.field()])
}

/// V_1 = h(N ‖ R_AC ‖ ID_HA).
pub fn v1_value(eng: &Engine<'_>, n: &Digest160, r_ac: &GroupPoint, id_ha: &Identity) -> Digest160 {
    let r = r_ac.to_bytes();
    eng.hash(&[n.field(), Field::new(FieldKind::Point, &r), id_ha.field()])
}

/// h over a list of points then identities, the shape of both W_1 variants.
pub fn bind_points(
    eng: &Engine<'_>,
    n: &Digest160,
    points: &[&GroupPoint],
    ids: &[&Identity],
) -> Digest160 {
    let enc: Vec<Vec<u8>> = points.iter().map(|p| p.to_bytes()).collect();
    let mut items = vec![n.field()];
    items.extend(enc.iter().map(|e| Field::new(FieldKind::Point, e)));
    items.extend(ids.iter().map(|i| i.field()));
    eng.hash(&items)
}

fn xor_digest(eng: &Engine<'_>, a: &[u8; 20], b: &[u8; 20]) -> Digest160 {
    Digest160(eng.xor(a, b))
}

fn check_point(
    curve: &Curve,
    what: &'static str,
    pt: &GroupPoint,
) -> Result<(), crate::error::ProtocolError> {
    curve
        .validate(pt)
        .map_err(|e| crate::error::ProtocolError::InvalidPoint(what, e))
}

pub fn session_key(eng: &Engine<'_>, shared: &GroupPoint, epoch: u32) -> SessionKey {
    SessionKey {
        key: eng.hash_point(shared),
        epoch,
    }
}
