use rand::RngCore;
use zeroize::Zeroize;

use super::messages::{Msg1, Msg2, Msg3, Msg4};
use super::register::check_card;
use super::{
    bind_points, check_point, session_key, v1_value, xor_digest, ForeignAgent, HomeAgent,
    MobileUser, SessionKey,
};
use crate::crypto::{
    Certificate, Ciphertext, Digest160, Engine, Field, FieldKind, GroupPoint, Identity, MulKind,
    Scalar, SymKey,
};
use crate::error::ProtocolError;
use crate::wire::FieldReader;

/// MU's per-session state between Msg1 and Msg4.
#[derive(Debug)]
pub struct EphemeralA {
    pub(super) a: Scalar,
    pub a_pub: GroupPoint,
    pub(super) n: Digest160,
    pub(super) c: GroupPoint,
    pub id_ha: Identity,
}

impl Drop for EphemeralA {
    fn drop(&mut self) {
        self.n.0.zeroize();
    }
}

/// FA's per-session state between Msg2 and Msg3.
#[derive(Debug)]
pub struct EphemeralB {
    b: Scalar,
    pub b_pub: GroupPoint,
    key: SymKey,
    pub a_pub: GroupPoint,
}

/// Step A1 (also the first step at home): local check, then
/// {A, DID_MU, C, V_1, ID_HA}. Nothing is emitted when the check fails.
pub fn login_begin<R: RngCore + ?Sized>(
    eng: &Engine<'_>,
    mu: &MobileUser,
    rng: &mut R,
) -> Result<(Msg1, EphemeralA), ProtocolError> {
    let masked = check_card(eng, mu)?;
    let curve = eng.curve();
    let card = &mu.card;
    let a = Scalar::random(curve, rng);
    let a_pub = eng.mul(&a, &curve.generator(), MulKind::Precomputable);
    let r_ac = eng.mul(&a, &card.c, MulKind::Precomputable);
    let n = xor_digest(eng, &card.q.0, &masked.0);
    let mask = eng.hash_point(&r_ac);
    let did = xor_digest(eng, &mu.id.0, &mask.0);
    let v1 = v1_value(eng, &n, &r_ac, &card.id_ha);
    let msg = Msg1 {
        a: a_pub,
        did,
        c: card.c,
        v1,
        id_ha: card.id_ha,
    };
    Ok((
        msg,
        EphemeralA {
            a,
            a_pub,
            n,
            c: card.c,
            id_ha: card.id_ha,
        },
    ))
}

/// Step A2: FA wraps the login for HA under the key derived from bC.
pub fn fa_process_login<R: RngCore + ?Sized>(
    eng: &Engine<'_>,
    fa: &ForeignAgent,
    m1: &Msg1,
    rng: &mut R,
) -> Result<(Msg2, EphemeralB), ProtocolError> {
    let curve = eng.curve();
    check_point(curve, "A", &m1.a)?;
    check_point(curve, "C", &m1.c)?;
    let b = Scalar::random(curve, rng);
    let b_pub = eng.mul(&b, &curve.generator(), MulKind::Precomputable);
    // C arrives with Msg1, so bC cannot be prepared ahead of it.
    let r_bc = eng.mul(&b, &m1.c, MulKind::Online);
    let key = eng
        .kdf(&r_bc)
        .map_err(|e| ProtocolError::InvalidPoint("bC", e))?;
    let w2 = seal_w2(eng, &key, &m1.a, &fa.cert, &m1.v1, &m1.did, rng);
    let a_enc = m1.a.to_bytes();
    let v2 = eng.sign(&fa.signing.secret, &v2_items(&a_enc, &m1.v1, &m1.did));
    Ok((
        Msg2 { b: b_pub, w2, v2 },
        EphemeralB {
            b,
            b_pub,
            key,
            a_pub: m1.a,
        },
    ))
}

/// FA's routing step: Msg1 is forwarded to the home agent named by ID_HA,
/// which must be one FA can reach.
pub fn route_login(m1: &Msg1, reachable: &[Identity]) -> Result<Identity, ProtocolError> {
    reachable
        .iter()
        .copied()
        .find(|id| *id == m1.id_ha)
        .ok_or(ProtocolError::UnknownHomeAgent)
}

/// Items covered by V_2.
pub fn v2_items<'a>(a_enc: &'a [u8], v1: &'a Digest160, did: &'a Digest160) -> [Field<'a>; 3] {
    [Field::new(FieldKind::Point, a_enc), v1.field(), did.field()]
}

/// Recovers ID_MU and checks V_1. Shared with the home-network flow.
pub(super) fn authenticate_user(
    eng: &Engine<'_>,
    ha: &HomeAgent,
    a: &GroupPoint,
    did: &Digest160,
    v1: &Digest160,
) -> Result<Digest160, ProtocolError> {
    let r_ac = eng.mul(&ha.c, a, MulKind::Online);
    let mask = eng.hash_point(&r_ac);
    let id_mu = Identity(eng.xor(&did.0, &mask.0));
    let secret = ha.user_secret_counted(eng, &id_mu);
    if v1_value(eng, &secret, &r_ac, &ha.id) != *v1 {
        return Err(ProtocolError::V1Mismatch);
    }
    Ok(secret)
}

/// Step A3: HA authenticates FA (certificate and V_2) and then MU (V_1).
pub fn ha_process<R: RngCore + ?Sized>(
    eng: &Engine<'_>,
    ha: &HomeAgent,
    m2: &Msg2,
    rng: &mut R,
) -> Result<Msg3, ProtocolError> {
    let curve = eng.curve();
    check_point(curve, "B", &m2.b)?;
    let r_bc = eng.mul(&ha.c, &m2.b, MulKind::Online);
    let key = eng
        .kdf(&r_bc)
        .map_err(|e| ProtocolError::InvalidPoint("cB", e))?;
    let fields = eng
        .decrypt(&key, &m2.w2)
        .map_err(|_| ProtocolError::DecryptionFailed("W_2"))?;
    let mut r = FieldReader::new(curve, fields);
    let a = r.point("A")?;
    let cert_fa = r.certificate()?;
    let v1 = r.digest()?;
    let did = r.digest()?;
    r.finish()?;

    if !eng.verify_cert(&cert_fa, &ha.root) {
        return Err(ProtocolError::InvalidCertificate("FA"));
    }
    let a_enc = a.to_bytes();
    if !eng.verify(&cert_fa.public, &v2_items(&a_enc, &v1, &did), &m2.v2) {
        return Err(ProtocolError::InvalidSignature("V_2"));
    }
    let secret = authenticate_user(eng, ha, &a, &did, &v1)?;

    let id_fa = cert_fa.subject;
    let w1 = bind_points(eng, &secret, &[&a, &m2.b], &[&id_fa, &ha.id]);
    let w3 = seal_w3(eng, &key, &id_fa, &ha.cert, &a, &m2.b, &w1, rng);
    let v3 = eng.sign(&ha.signing.secret, &v3_items(&ha.cert.to_bytes(), &w1));
    Ok(Msg3 { w3, v3 })
}

/// Items covered by V_3.
pub fn v3_items<'a>(cert_ha: &'a [u8], w1: &'a Digest160) -> [Field<'a>; 2] {
    [Field::new(FieldKind::Certificate, cert_ha), w1.field()]
}

/// Step A4: FA authenticates HA and derives SK = h(bA).
pub fn fa_finish(
    eng: &Engine<'_>,
    fa: &ForeignAgent,
    eph: &EphemeralB,
    m3: &Msg3,
) -> Result<(Msg4, SessionKey), ProtocolError> {
    let fields = eng
        .decrypt(&eph.key, &m3.w3)
        .map_err(|_| ProtocolError::DecryptionFailed("W_3"))?;
    let mut r = FieldReader::new(eng.curve(), fields);
    let id_fa = r.identity()?;
    let cert_ha: Certificate = r.certificate()?;
    let a = r.point("A")?;
    let b = r.point("B")?;
    let w1 = r.digest()?;
    r.finish()?;

    if a != eph.a_pub {
        return Err(ProtocolError::SessionMismatch("A"));
    }
    if b != eph.b_pub {
        return Err(ProtocolError::SessionMismatch("B"));
    }
    if id_fa != fa.id {
        return Err(ProtocolError::SessionMismatch("ID_FA"));
    }
    if !eng.verify_cert(&cert_ha, &fa.root) {
        return Err(ProtocolError::InvalidCertificate("HA"));
    }
    if !eng.verify(&cert_ha.public, &v3_items(&cert_ha.to_bytes(), &w1), &m3.v3) {
        return Err(ProtocolError::InvalidSignature("V_3"));
    }
    let shared = eng.mul(&eph.b, &eph.a_pub, MulKind::Online);
    Ok((
        Msg4 {
            b: eph.b_pub,
            id_fa,
            w1,
        },
        session_key(eng, &shared, 0),
    ))
}

/// Step A5: MU checks W_1 and derives SK = h(aB).
pub fn mu_finish(
    eng: &Engine<'_>,
    eph: &EphemeralA,
    m4: &Msg4,
) -> Result<SessionKey, ProtocolError> {
    check_point(eng.curve(), "B", &m4.b)?;
    let w1 = bind_points(eng, &eph.n, &[&eph.a_pub, &m4.b], &[&m4.id_fa, &eph.id_ha]);
    if w1 != m4.w1 {
        return Err(ProtocolError::W1Mismatch);
    }
    let shared = eng.mul(&eph.a, &m4.b, MulKind::Online);
    Ok(session_key(eng, &shared, 0))
}

/// W_2 = E_{R_BC}[A, Cert_FA, V_1, DID_MU].
pub fn seal_w2<R: RngCore + ?Sized>(
    eng: &Engine<'_>,
    key: &SymKey,
    a: &GroupPoint,
    cert_fa: &Certificate,
    v1: &Digest160,
    did: &Digest160,
    rng: &mut R,
) -> Ciphertext {
    let a_enc = a.to_bytes();
    let cert = cert_fa.to_bytes();
    eng.encrypt(
        key,
        &[
            Field::new(FieldKind::Point, &a_enc),
            Field::new(FieldKind::Certificate, &cert),
            v1.field(),
            did.field(),
        ],
        rng,
    )
}

/// W_3 = E_{R_BC}[ID_FA, Cert_HA, A, B, W_1].
#[allow(clippy::too_many_arguments)]
pub fn seal_w3<R: RngCore + ?Sized>(
    eng: &Engine<'_>,
    key: &SymKey,
    id_fa: &Identity,
    cert_ha: &Certificate,
    a: &GroupPoint,
    b: &GroupPoint,
    w1: &Digest160,
    rng: &mut R,
) -> Ciphertext {
    let cert = cert_ha.to_bytes();
    let a_enc = a.to_bytes();
    let b_enc = b.to_bytes();
    eng.encrypt(
        key,
        &[
            id_fa.field(),
            Field::new(FieldKind::Certificate, &cert),
            Field::new(FieldKind::Point, &a_enc),
            Field::new(FieldKind::Point, &b_enc),
            w1.field(),
        ],
        rng,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::{OpCounts, RootCa, Suite};
    use crate::proposed::{card_finalize, register_issue, register_request};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    struct World {
        ha: HomeAgent,
        fa: ForeignAgent,
        mu: MobileUser,
        rng: ChaCha20Rng,
    }

    fn world(suite: &Suite, seed: u64) -> World {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let ca = RootCa::generate(suite.curve(), &mut rng);
        let ha = HomeAgent::generate(suite, Identity::from_label("home").unwrap(), &ca, &mut rng);
        let fa = ForeignAgent::generate(
            suite,
            Identity::from_label("visited").unwrap(),
            &ca,
            &mut rng,
        );
        let eng = suite.engine();
        let id = Identity::from_label("alice").unwrap();
        let (req, x) = register_request(&eng, id, b"pw", &mut rng).unwrap();
        let card = card_finalize(&register_issue(&eng, &ha, &req), x);
        World {
            ha,
            fa,
            mu: MobileUser {
                id,
                password: b"pw".to_vec(),
                card,
            },
            rng,
        }
    }

    #[test]
    fn honest_chain_agrees_and_counts_match() {
        let suite = Suite::production();
        let mut w = world(&suite, 1);
        let (e_mu, e_fa, e_ha) = (suite.engine(), suite.engine(), suite.engine());
        let (m1, ea) = login_begin(&e_mu, &w.mu, &mut w.rng).unwrap();
        assert_eq!(ea.n, w.ha.user_secret(&suite, &w.mu.id));
        let (m2, eb) = fa_process_login(&e_fa, &w.fa, &m1, &mut w.rng).unwrap();
        let m3 = ha_process(&e_ha, &w.ha, &m2, &mut w.rng).unwrap();
        let (m4, sk_fa) = fa_finish(&e_fa, &w.fa, &eb, &m3).unwrap();
        let sk_mu = mu_finish(&e_mu, &ea, &m4).unwrap();
        assert_eq!(sk_mu, sk_fa);

        let mu = OpCounts {
            xor: 2,
            hash: 6,
            mul_pre: 2,
            mul_online: 1,
            ..Default::default()
        };
        assert_eq!(e_mu.counts(), mu);
        let fa = OpCounts {
            hash: 1,
            mul_pre: 1,
            mul_online: 2,
            esym: 1,
            dsym: 1,
            gsign: 1,
            vsign: 1,
            kdf: 1,
            cert_verify: 1,
            ..Default::default()
        };
        assert_eq!(e_fa.counts(), fa);
        let ha = OpCounts {
            xor: 1,
            hash: 4,
            mul_online: 2,
            esym: 1,
            dsym: 1,
            gsign: 1,
            vsign: 1,
            kdf: 1,
            cert_verify: 1,
            ..Default::default()
        };
        assert_eq!(e_ha.counts(), ha);
    }

    #[test]
    fn wrong_password_emits_nothing() {
        let suite = Suite::toy();
        let mut w = world(&suite, 2);
        w.mu.password = b"guess".to_vec();
        let eng = suite.engine();
        assert!(matches!(
            login_begin(&eng, &w.mu, &mut w.rng),
            Err(ProtocolError::LocalVerificationFailed)
        ));
        assert_eq!(eng.counts().mul(), 0);
    }

    #[test]
    fn msg1_fields_are_fresh_per_session() {
        let suite = Suite::production();
        let mut w = world(&suite, 3);
        let eng = suite.engine();
        let (m1, _) = login_begin(&eng, &w.mu, &mut w.rng).unwrap();
        let (m1b, _) = login_begin(&eng, &w.mu, &mut w.rng).unwrap();
        assert_ne!(m1.a, m1b.a);
        assert_ne!(m1.did, m1b.did);
        assert_ne!(m1.v1, m1b.v1);
    }

    #[test]
    fn off_curve_c_is_rejected_by_fa() {
        let suite = Suite::toy();
        let mut w = world(&suite, 4);
        let eng = suite.engine();
        let (mut m1, _) = login_begin(&eng, &w.mu, &mut w.rng).unwrap();
        m1.c = GroupPoint::Affine {
            x: 1u64.into(),
            y: 1u64.into(),
        };
        assert!(matches!(
            fa_process_login(&eng, &w.fa, &m1, &mut w.rng),
            Err(ProtocolError::InvalidPoint("C", _))
        ));
    }

    #[test]
    fn ha_rejects_forged_v2_and_bad_v1() {
        let suite = Suite::toy();
        let mut w = world(&suite, 5);
        let eng = suite.engine();
        let (m1, _) = login_begin(&eng, &w.mu, &mut w.rng).unwrap();
        let (mut m2, _) = fa_process_login(&eng, &w.fa, &m1, &mut w.rng).unwrap();
        m2.v2 = crate::crypto::Signature::random(suite.curve(), &mut w.rng);
        assert_eq!(
            ha_process(&eng, &w.ha, &m2, &mut w.rng).unwrap_err(),
            ProtocolError::InvalidSignature("V_2")
        );

        let mut bad = m1.clone();
        bad.v1.0[0] ^= 1;
        let (m2, _) = fa_process_login(&eng, &w.fa, &bad, &mut w.rng).unwrap();
        assert_eq!(
            ha_process(&eng, &w.ha, &m2, &mut w.rng).unwrap_err(),
            ProtocolError::V1Mismatch
        );
    }

    #[test]
    fn fa_rejects_tampered_w3_and_foreign_v3() {
        let suite = Suite::toy();
        let mut w = world(&suite, 6);
        let eng = suite.engine();
        let (m1, _) = login_begin(&eng, &w.mu, &mut w.rng).unwrap();
        let (m2, eb) = fa_process_login(&eng, &w.fa, &m1, &mut w.rng).unwrap();
        let m3 = ha_process(&eng, &w.ha, &m2, &mut w.rng).unwrap();
        let mut t = m3.clone();
        let last = t.w3.0.len() - 1;
        t.w3.0[last] ^= 1;
        assert_eq!(
            fa_finish(&eng, &w.fa, &eb, &t).unwrap_err(),
            ProtocolError::DecryptionFailed("W_3")
        );
        let mut f = m3.clone();
        let other = crate::crypto::KeyPair::generate(suite.curve(), &mut w.rng);
        f.v3 = crate::crypto::sign(suite.curve(), &other.secret, &Digest160([3; 20]));
        assert_eq!(
            fa_finish(&eng, &w.fa, &eb, &f).unwrap_err(),
            ProtocolError::InvalidSignature("V_3")
        );
    }

    #[test]
    fn msg4_field_substitution_is_caught() {
        let suite = Suite::toy();
        let mut w = world(&suite, 7);
        let eng = suite.engine();
        let (m1, ea) = login_begin(&eng, &w.mu, &mut w.rng).unwrap();
        let (m2, eb) = fa_process_login(&eng, &w.fa, &m1, &mut w.rng).unwrap();
        let m3 = ha_process(&eng, &w.ha, &m2, &mut w.rng).unwrap();
        let (m4, _) = fa_finish(&eng, &w.fa, &eb, &m3).unwrap();
        let mut b = m4.clone();
        b.b = suite.curve().add(&b.b, &suite.curve().generator());
        assert_eq!(
            mu_finish(&eng, &ea, &b).unwrap_err(),
            ProtocolError::W1Mismatch
        );
        let mut id = m4.clone();
        id.id_fa = Identity::from_label("rogue").unwrap();
        assert_eq!(
            mu_finish(&eng, &ea, &id).unwrap_err(),
            ProtocolError::W1Mismatch
        );
        let mut d = m4;
        d.w1.0[19] ^= 0x80;
        assert_eq!(
            mu_finish(&eng, &ea, &d).unwrap_err(),
            ProtocolError::W1Mismatch
        );
    }
}
