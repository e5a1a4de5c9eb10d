//! The baseline roaming scheme: nonce-derived passwords, an HA that checks
//! r_MU, and an ECDH key between MU and FA confirmed by a MAC.
//!
//! The HA keeps a table of (ID_MU, PW_MU) records and finds the user by
//! recomputing r_MU for each entry. Without it the authentication step has
//! no way to know whose password to use.

pub mod messages;

use rand::RngCore;

use crate::crypto::{
    Digest160, Engine, Field, FieldKind, GroupPoint, Identity, MulKind, Nonce128, Scalar,
};
use crate::error::ProtocolError;
use crate::proposed::SessionKey;
use messages::*;

pub struct MunHomeAgent {
    pub id: Identity,
    users: Vec<(Identity, Digest160)>,
}

impl MunHomeAgent {
    pub fn new(id: Identity) -> Self {
        MunHomeAgent {
            id,
            users: Vec::new(),
        }
    }

    pub fn registered(&self) -> usize {
        self.users.len()
    }
}

#[derive(Clone, Debug)]
pub struct MunForeignAgent {
    pub id: Identity,
}

/// What MU holds after registration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MunCredentials {
    pub id_mu: Identity,
    pub r_mu: Digest160,
    pub pw_mu: Digest160,
    pub n_ha: Nonce128,
    pub id_ha: Identity,
}

impl MunCredentials {
    pub fn from_reply(id_mu: Identity, reply: &MunReg2) -> Self {
        MunCredentials {
            id_mu,
            r_mu: reply.r_mu,
            pw_mu: reply.pw_mu,
            n_ha: reply.n_ha,
            id_ha: reply.id_ha,
        }
    }
}

/// A key with the DH point it came from, which the next update round binds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MunLink {
    pub key: SessionKey,
    pub shared: GroupPoint,
}

/// FA's state after forwarding M2.
#[derive(Clone, Debug)]
pub struct MunFaPending {
    pub m1: MunM1,
    pub n_fa: Nonce128,
}

/// FA's state after sending M4.
#[derive(Debug)]
pub struct MunFaSession {
    a: Scalar,
    pub n_fa: Nonce128,
}

/// MU's registration request {ID_MU, N_MU}.
pub fn mun_register_request<R: RngCore + ?Sized>(id_mu: Identity, rng: &mut R) -> MunReg1 {
    MunReg1 {
        id_mu,
        n_mu: Nonce128::random(rng),
    }
}

/// HA derives PW_MU and r_MU and records the user.
pub fn mun_register<R: RngCore + ?Sized>(
    eng: &Engine<'_>,
    ha: &mut MunHomeAgent,
    req: &MunReg1,
    rng: &mut R,
) -> MunReg2 {
    let n_ha = Nonce128::random(rng);
    let pw_mu = eng.hash(&[req.n_mu.field(), n_ha.field()]);
    let r_mu = r_value(eng, &req.id_mu, &pw_mu, &ha.id);
    ha.users.push((req.id_mu, pw_mu));
    MunReg2 {
        r_mu,
        pw_mu,
        n_ha,
        id_ha: ha.id,
    }
}

/// r = h(ID_MU ‖ PW_MU) ⊕ ID_HA.
fn r_value(eng: &Engine<'_>, id_mu: &Identity, pw: &Digest160, id_ha: &Identity) -> Digest160 {
    let h = eng.hash(&[id_mu.field(), pw.field()]);
    Digest160(eng.xor(&h.0, &id_ha.0))
}

/// h(PW ‖ N_FA); P_HA when computed by HA.
pub fn p_value(eng: &Engine<'_>, pw: &Digest160, n_fa: &Nonce128) -> Digest160 {
    eng.hash(&[pw.field(), n_fa.field()])
}

/// S_HA = h(ID_FA ‖ N_FA) ⊕ r_MU ⊕ P.
pub fn s_ha_value(
    eng: &Engine<'_>,
    id_fa: &Identity,
    n_fa: &Nonce128,
    r_mu: &Digest160,
    p: &Digest160,
) -> Digest160 {
    let h = eng.hash(&[id_fa.field(), n_fa.field()]);
    Digest160(eng.xor(&eng.xor(&h.0, &r_mu.0), &p.0))
}

/// S_FA = h(S_HA ‖ N_FA ‖ N_HA).
pub fn s_fa_value(
    eng: &Engine<'_>,
    s_ha: &Digest160,
    n_fa: &Nonce128,
    n_ha: &Nonce128,
) -> Digest160 {
    eng.hash(&[s_ha.field(), n_fa.field(), n_ha.field()])
}

/// S_MF = f_K(N_FA ‖ bP).
pub fn s_mf_value(
    eng: &Engine<'_>,
    key: &SessionKey,
    n_fa: &Nonce128,
    b_pub: &GroupPoint,
) -> Digest160 {
    let b = b_pub.to_bytes();
    eng.mac(
        key.key.as_bytes(),
        &[n_fa.field(), Field::new(FieldKind::Point, &b)],
    )
}

/// K = h(abP).
pub fn key_from_point(eng: &Engine<'_>, shared: &GroupPoint, epoch: u32) -> SessionKey {
    SessionKey {
        key: eng.hash_point(shared),
        epoch,
    }
}

fn check_point(eng: &Engine<'_>, what: &'static str, pt: &GroupPoint) -> Result<(), ProtocolError> {
    eng.curve()
        .validate(pt)
        .map_err(|e| ProtocolError::InvalidPoint(what, e))
}

/// Step A1: the static login message.
pub fn mun_login(cred: &MunCredentials) -> MunM1 {
    MunM1 {
        id_ha: cred.id_ha,
        n_ha: cred.n_ha,
        r_mu: cred.r_mu,
    }
}

/// Step A2: FA stores M1 and forwards r_MU with its own nonce.
pub fn mun_fa_forward<R: RngCore + ?Sized>(
    fa: &MunForeignAgent,
    m1: &MunM1,
    rng: &mut R,
) -> (MunM2, MunFaPending) {
    let n_fa = Nonce128::random(rng);
    (
        MunM2 {
            id_fa: fa.id,
            n_fa,
            r_mu: m1.r_mu,
        },
        MunFaPending {
            m1: m1.clone(),
            n_fa,
        },
    )
}

/// Step A3: HA finds the user whose r_MU matches and answers for FA.
pub fn mun_ha_auth(
    eng: &Engine<'_>,
    ha: &MunHomeAgent,
    m2: &MunM2,
) -> Result<MunM3, ProtocolError> {
    let pw = ha
        .users
        .iter()
        .find(|(id, pw)| r_value(eng, id, pw, &ha.id) == m2.r_mu)
        .map(|(_, pw)| *pw)
        .ok_or(ProtocolError::UnknownUser)?;
    let p_ha = p_value(eng, &pw, &m2.n_fa);
    let s_ha = s_ha_value(eng, &m2.id_fa, &m2.n_fa, &m2.r_mu, &p_ha);
    Ok(MunM3 { s_ha, p_ha })
}

/// Step A4: FA recomputes S_HA from the P_HA it was given, then sends
/// S_FA, aP and P_FA in the clear.
pub fn mun_fa_respond<R: RngCore + ?Sized>(
    eng: &Engine<'_>,
    fa: &MunForeignAgent,
    pending: &MunFaPending,
    m3: &MunM3,
    rng: &mut R,
) -> Result<(MunM4, MunFaSession), ProtocolError> {
    let s_ha = s_ha_value(eng, &fa.id, &pending.n_fa, &pending.m1.r_mu, &m3.p_ha);
    if s_ha != m3.s_ha {
        return Err(ProtocolError::ShaMismatch);
    }
    let s_fa = s_fa_value(eng, &m3.s_ha, &pending.n_fa, &pending.m1.n_ha);
    let curve = eng.curve();
    let a = Scalar::random(curve, rng);
    let a_pub = eng.mul(&a, &curve.generator(), MulKind::Precomputable);
    let p_fa = MunPfa {
        s_ha: m3.s_ha,
        id_fa: fa.id,
        n_fa: pending.n_fa,
    };
    Ok((
        MunM4 { s_fa, a_pub, p_fa },
        MunFaSession {
            a,
            n_fa: pending.n_fa,
        },
    ))
}

/// Step A5: MU checks S_FA, picks b and confirms K_MF with S_MF.
pub fn mun_mu_respond<R: RngCore + ?Sized>(
    eng: &Engine<'_>,
    cred: &MunCredentials,
    m4: &MunM4,
    rng: &mut R,
) -> Result<(MunM5, MunLink), ProtocolError> {
    check_point(eng, "aP", &m4.a_pub)?;
    let p = p_value(eng, &cred.pw_mu, &m4.p_fa.n_fa);
    let s_ha = s_ha_value(eng, &m4.p_fa.id_fa, &m4.p_fa.n_fa, &cred.r_mu, &p);
    if s_fa_value(eng, &s_ha, &m4.p_fa.n_fa, &cred.n_ha) != m4.s_fa {
        return Err(ProtocolError::SfaMismatch);
    }
    let curve = eng.curve();
    let b = Scalar::random(curve, rng);
    let b_pub = eng.mul(&b, &curve.generator(), MulKind::Precomputable);
    let shared = eng.mul(&b, &m4.a_pub, MulKind::Online);
    let key = key_from_point(eng, &shared, 0);
    let s_mf = s_mf_value(eng, &key, &m4.p_fa.n_fa, &b_pub);
    Ok((MunM5 { b_pub, s_mf }, MunLink { key, shared }))
}

/// Step A6: FA derives K_MF and checks S_MF.
pub fn mun_fa_verify(
    eng: &Engine<'_>,
    sess: &MunFaSession,
    m5: &MunM5,
) -> Result<MunLink, ProtocolError> {
    check_point(eng, "bP", &m5.b_pub)?;
    let shared = eng.mul(&sess.a, &m5.b_pub, MulKind::Online);
    let key = key_from_point(eng, &shared, 0);
    if s_mf_value(eng, &key, &sess.n_fa, &m5.b_pub) != m5.s_mf {
        return Err(ProtocolError::SmfMismatch);
    }
    Ok(MunLink { key, shared })
}

/// MU's state for one update round.
#[derive(Debug)]
pub struct MunUpdateEphemeral {
    b_i: Scalar,
    pub b_pub: GroupPoint,
}

fn update_mac(
    eng: &Engine<'_>,
    key: &SessionKey,
    shared: &GroupPoint,
    prev: &GroupPoint,
) -> Digest160 {
    let s = shared.to_bytes();
    let p = prev.to_bytes();
    eng.mac(
        key.key.as_bytes(),
        &[
            Field::new(FieldKind::Point, &s),
            Field::new(FieldKind::Point, &p),
        ],
    )
}

/// Step U1: MU sends b_iP.
pub fn mun_update_init<R: RngCore + ?Sized>(
    eng: &Engine<'_>,
    rng: &mut R,
) -> (MunUpd1, MunUpdateEphemeral) {
    let curve = eng.curve();
    let b_i = Scalar::random(curve, rng);
    let b_pub = eng.mul(&b_i, &curve.generator(), MulKind::Precomputable);
    (MunUpd1 { b_i: b_pub }, MunUpdateEphemeral { b_i, b_pub })
}

/// Step U2: FA picks a_i, moves to K_i = h(a_ib_iP) and MACs the old point.
pub fn mun_update_respond<R: RngCore + ?Sized>(
    eng: &Engine<'_>,
    prev: &MunLink,
    m: &MunUpd1,
    rng: &mut R,
) -> Result<(MunUpd2, MunLink), ProtocolError> {
    check_point(eng, "b_iP", &m.b_i)?;
    let curve = eng.curve();
    let a_i = Scalar::random(curve, rng);
    let a_pub = eng.mul(&a_i, &curve.generator(), MulKind::Precomputable);
    let shared = eng.mul(&a_i, &m.b_i, MulKind::Online);
    let key = key_from_point(eng, &shared, prev.key.epoch + 1);
    let s_mf_i = update_mac(eng, &key, &shared, &prev.shared);
    Ok((MunUpd2 { a_i: a_pub, s_mf_i }, MunLink { key, shared }))
}

/// Step U3: MU accepts K_i only if the MAC over the previous point verifies.
pub fn mun_update_confirm(
    eng: &Engine<'_>,
    prev: &MunLink,
    eph: &MunUpdateEphemeral,
    m: &MunUpd2,
) -> Result<MunLink, ProtocolError> {
    check_point(eng, "a_iP", &m.a_i)?;
    let shared = eng.mul(&eph.b_i, &m.a_i, MulKind::Online);
    let key = key_from_point(eng, &shared, prev.key.epoch + 1);
    if update_mac(eng, &key, &shared, &prev.shared) != m.s_mf_i {
        return Err(ProtocolError::SmfMismatch);
    }
    Ok(MunLink { key, shared })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::{OpCounts, Suite};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    struct World {
        ha: MunHomeAgent,
        fa: MunForeignAgent,
        cred: MunCredentials,
        rng: ChaCha20Rng,
    }

    fn world(suite: &Suite, seed: u64) -> World {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut ha = MunHomeAgent::new(Identity::from_label("home").unwrap());
        let id = Identity::from_label("carol").unwrap();
        let req = mun_register_request(id, &mut rng);
        let reply = mun_register(&suite.engine(), &mut ha, &req, &mut rng);
        let fa = MunForeignAgent {
            id: Identity::from_label("visited").unwrap(),
        };
        World {
            ha,
            fa,
            cred: MunCredentials::from_reply(id, &reply),
            rng,
        }
    }

    fn run(suite: &Suite, w: &mut World) -> (MunLink, MunLink, [OpCounts; 3]) {
        let (e_mu, e_fa, e_ha) = (suite.engine(), suite.engine(), suite.engine());
        let m1 = mun_login(&w.cred);
        let (m2, pending) = mun_fa_forward(&w.fa, &m1, &mut w.rng);
        let m3 = mun_ha_auth(&e_ha, &w.ha, &m2).unwrap();
        let (m4, sess) = mun_fa_respond(&e_fa, &w.fa, &pending, &m3, &mut w.rng).unwrap();
        let (m5, mu) = mun_mu_respond(&e_mu, &w.cred, &m4, &mut w.rng).unwrap();
        let fa = mun_fa_verify(&e_fa, &sess, &m5).unwrap();
        (mu, fa, [e_mu.counts(), e_fa.counts(), e_ha.counts()])
    }

    #[test]
    fn honest_run_agrees_with_expected_counts() {
        let suite = Suite::production();
        let mut w = world(&suite, 1);
        let (mu, fa, [c_mu, c_fa, c_ha]) = run(&suite, &mut w);
        assert_eq!(mu, fa);
        assert_eq!(
            c_mu,
            OpCounts {
                xor: 2,
                hash: 4,
                mul_pre: 1,
                mul_online: 1,
                mac: 1,
                ..Default::default()
            }
        );
        assert_eq!(
            c_fa,
            OpCounts {
                xor: 2,
                hash: 3,
                mul_pre: 1,
                mul_online: 1,
                mac: 1,
                ..Default::default()
            }
        );
        assert_eq!(
            c_ha,
            OpCounts {
                xor: 3,
                hash: 3,
                ..Default::default()
            }
        );
    }

    #[test]
    fn registration_definitions() {
        let suite = Suite::toy();
        let w = world(&suite, 2);
        let eng = suite.engine();
        let h = eng.hash(&[w.cred.id_mu.field(), w.cred.pw_mu.field()]);
        assert_eq!(
            Digest160(crate::crypto::primitives::xor20(
                &w.cred.r_mu.0,
                &w.cred.id_ha.0
            )),
            h
        );
        assert_eq!(w.ha.registered(), 1);
    }

    #[test]
    fn distinct_users_get_distinct_r() {
        let suite = Suite::toy();
        let eng = suite.engine();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let mut ha = MunHomeAgent::new(Identity::from_label("home").unwrap());
        let mut seen = std::collections::HashSet::new();
        for i in 0..1000 {
            let req =
                mun_register_request(Identity::from_label(&format!("u{i}")).unwrap(), &mut rng);
            assert!(seen.insert(mun_register(&eng, &mut ha, &req, &mut rng).r_mu));
        }
    }

    #[test]
    fn login_message_is_static() {
        let suite = Suite::toy();
        let w = world(&suite, 4);
        assert_eq!(
            crate::wire::ProtocolMessage::from(mun_login(&w.cred)).encode(),
            crate::wire::ProtocolMessage::from(mun_login(&w.cred)).encode()
        );
    }

    #[test]
    fn fa_check_accepts_any_consistent_pair() {
        let suite = Suite::toy();
        let mut w = world(&suite, 5);
        let eng = suite.engine();
        let (_, pending) = mun_fa_forward(&w.fa, &mun_login(&w.cred), &mut w.rng);
        for _ in 0..50 {
            let p = Digest160::random(&mut w.rng);
            let s = s_ha_value(&eng, &w.fa.id, &pending.n_fa, &pending.m1.r_mu, &p);
            assert!(mun_fa_respond(
                &eng,
                &w.fa,
                &pending,
                &MunM3 { s_ha: s, p_ha: p },
                &mut w.rng
            )
            .is_ok());
        }
    }

    #[test]
    fn replayed_login_is_accepted_by_ha() {
        let suite = Suite::toy();
        let mut w = world(&suite, 6);
        let eng = suite.engine();
        let m1 = mun_login(&w.cred);
        let (m2a, _) = mun_fa_forward(&w.fa, &m1, &mut w.rng);
        let (m2b, _) = mun_fa_forward(&w.fa, &m1.clone(), &mut w.rng);
        assert!(mun_ha_auth(&eng, &w.ha, &m2a).is_ok());
        assert!(mun_ha_auth(&eng, &w.ha, &m2b).is_ok());
        let mut unknown = m2b;
        unknown.r_mu.0[0] ^= 1;
        assert_eq!(
            mun_ha_auth(&eng, &w.ha, &unknown).unwrap_err(),
            ProtocolError::UnknownUser
        );
    }

    #[test]
    fn tampered_messages_are_caught() {
        let suite = Suite::toy();
        let mut w = world(&suite, 7);
        let eng = suite.engine();
        let (m2, pending) = mun_fa_forward(&w.fa, &mun_login(&w.cred), &mut w.rng);
        let m3 = mun_ha_auth(&eng, &w.ha, &m2).unwrap();
        let mut bad3 = m3.clone();
        bad3.s_ha.0[0] ^= 1;
        assert_eq!(
            mun_fa_respond(&eng, &w.fa, &pending, &bad3, &mut w.rng).unwrap_err(),
            ProtocolError::ShaMismatch
        );
        let (m4, sess) = mun_fa_respond(&eng, &w.fa, &pending, &m3, &mut w.rng).unwrap();
        let mut bad4 = m4.clone();
        bad4.s_fa.0[1] ^= 1;
        assert_eq!(
            mun_mu_respond(&eng, &w.cred, &bad4, &mut w.rng).unwrap_err(),
            ProtocolError::SfaMismatch
        );
        let (mut m5, _) = mun_mu_respond(&eng, &w.cred, &m4, &mut w.rng).unwrap();
        m5.s_mf.0[2] ^= 1;
        assert_eq!(
            mun_fa_verify(&eng, &sess, &m5).unwrap_err(),
            ProtocolError::SmfMismatch
        );
    }

    #[test]
    fn update_rounds_agree_and_differ() {
        let suite = Suite::production();
        let mut w = world(&suite, 8);
        let eng = suite.engine();
        let (mut mu, mut fa, _) = run(&suite, &mut w);
        let mut keys = vec![mu.key.key];
        for _ in 0..3 {
            let (u1, eph) = mun_update_init(&eng, &mut w.rng);
            let (u2, fa_next) = mun_update_respond(&eng, &fa, &u1, &mut w.rng).unwrap();
            mu = mun_update_confirm(&eng, &mu, &eph, &u2).unwrap();
            fa = fa_next;
            assert_eq!(mu, fa);
            keys.push(mu.key.key);
        }
        let distinct: std::collections::HashSet<_> = keys.iter().collect();
        assert_eq!(distinct.len(), 4);
    }

    #[test]
    fn update_without_previous_point_is_rejected() {
        let suite = Suite::toy();
        let mut w = world(&suite, 9);
        let eng = suite.engine();
        let (mu, _, _) = run(&suite, &mut w);
        let (u1, eph) = mun_update_init(&eng, &mut w.rng);
        let fake_prev = MunLink {
            key: mu.key,
            shared: suite.curve().generator(),
        };
        let (forged, _) = mun_update_respond(&eng, &fake_prev, &u1, &mut w.rng).unwrap();
        assert_eq!(
            mun_update_confirm(&eng, &mu, &eph, &forged).unwrap_err(),
            ProtocolError::SmfMismatch
        );
    }
}
