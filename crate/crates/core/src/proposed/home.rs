use rand::RngCore;

use super::foreign::{authenticate_user, login_begin, EphemeralA};
use super::messages::{HomeMsg2, Msg1};
use super::{bind_points, check_point, session_key, HomeAgent, MobileUser, SessionKey};
use crate::crypto::{Engine, MulKind, Scalar};
use crate::error::ProtocolError;

/// Step A1 at home: the same request as in a foreign network, sent to HA.
pub fn home_login<R: RngCore + ?Sized>(
    eng: &Engine<'_>,
    mu: &MobileUser,
    rng: &mut R,
) -> Result<(Msg1, EphemeralA), ProtocolError> {
    login_begin(eng, mu, rng)
}

/// Step A2 at home: HA checks V_1, answers with U = uP and derives h(uA).
pub fn home_ha_respond<R: RngCore + ?Sized>(
    eng: &Engine<'_>,
    ha: &HomeAgent,
    m1: &Msg1,
    rng: &mut R,
) -> Result<(HomeMsg2, SessionKey), ProtocolError> {
    let curve = eng.curve();
    if m1.id_ha != ha.id() {
        return Err(ProtocolError::UnknownHomeAgent);
    }
    check_point(curve, "A", &m1.a)?;
    let secret = authenticate_user(eng, ha, &m1.a, &m1.did, &m1.v1)?;
    let u = Scalar::random(curve, rng);
    let u_pub = eng.mul(&u, &curve.generator(), MulKind::Precomputable);
    let id_ha = ha.id();
    let w1 = bind_points(eng, &secret, &[&m1.a, &ha.c_pub(), &u_pub], &[&id_ha]);
    let shared = eng.mul(&u, &m1.a, MulKind::Online);
    Ok((
        HomeMsg2 {
            u: u_pub,
            w1,
            id_ha,
        },
        session_key(eng, &shared, 0),
    ))
}

/// Step A3 at home: MU checks W_1 and derives h(aU).
pub fn home_mu_confirm(
    eng: &Engine<'_>,
    eph: &EphemeralA,
    hm2: &HomeMsg2,
) -> Result<SessionKey, ProtocolError> {
    // The reply must come from the HA the request was addressed to.
    if hm2.id_ha != eph.id_ha {
        return Err(ProtocolError::UnknownHomeAgent);
    }
    check_point(eng.curve(), "U", &hm2.u)?;
    let w1 = bind_points(eng, &eph.n, &[&eph.a_pub, &eph.c, &hm2.u], &[&eph.id_ha]);
    if w1 != hm2.w1 {
        return Err(ProtocolError::W1Mismatch);
    }
    let shared = eng.mul(&eph.a, &hm2.u, MulKind::Online);
    Ok(session_key(eng, &shared, 0))
}
