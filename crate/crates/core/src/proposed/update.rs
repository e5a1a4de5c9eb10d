use rand::RngCore;

use super::messages::{UpdMsg1, UpdMsg2};
use super::{check_point, session_key, SessionKey};
use crate::crypto::{Digest160, Engine, Field, FieldKind, GroupPoint, MulKind, Scalar};
use crate::error::ProtocolError;

/// MU's state for one update round.
#[derive(Debug)]
pub struct UpdateEphemeral {
    a_i: Scalar,
    pub a_pub: GroupPoint,
}

fn confirmation(eng: &Engine<'_>, shared: &GroupPoint, prev: &SessionKey) -> Digest160 {
    let s = shared.to_bytes();
    eng.hash(&[Field::new(FieldKind::Point, &s), prev.key.field()])
}

/// Step U1: A_i = a_iP.
pub fn key_update_init<R: RngCore + ?Sized>(
    eng: &Engine<'_>,
    rng: &mut R,
) -> (UpdMsg1, UpdateEphemeral) {
    let curve = eng.curve();
    let a_i = Scalar::random(curve, rng);
    let a_pub = eng.mul(&a_i, &curve.generator(), MulKind::Precomputable);
    (UpdMsg1 { a_i: a_pub }, UpdateEphemeral { a_i, a_pub })
}

/// Step U2: FA answers with B_i and S_i = h(b_iA_i ‖ SK_{i−1}), moving to
/// SK_i = h(b_iA_i).
pub fn key_update_respond<R: RngCore + ?Sized>(
    eng: &Engine<'_>,
    m: &UpdMsg1,
    prev: &SessionKey,
    rng: &mut R,
) -> Result<(UpdMsg2, SessionKey), ProtocolError> {
    let curve = eng.curve();
    check_point(curve, "A_i", &m.a_i)?;
    let b_i = Scalar::random(curve, rng);
    let b_pub = eng.mul(&b_i, &curve.generator(), MulKind::Precomputable);
    let shared = eng.mul(&b_i, &m.a_i, MulKind::Online);
    let s_i = confirmation(eng, &shared, prev);
    Ok((
        UpdMsg2 { b_i: b_pub, s_i },
        session_key(eng, &shared, prev.epoch + 1),
    ))
}

/// Step U3: MU accepts SK_i only if S_i checks out; otherwise it keeps
/// SK_{i−1}.
pub fn key_update_confirm(
    eng: &Engine<'_>,
    eph: &UpdateEphemeral,
    m: &UpdMsg2,
    prev: &SessionKey,
) -> Result<SessionKey, ProtocolError> {
    check_point(eng.curve(), "B_i", &m.b_i)?;
    let shared = eng.mul(&eph.a_i, &m.b_i, MulKind::Online);
    if confirmation(eng, &shared, prev) != m.s_i {
        return Err(ProtocolError::UpdateMismatch);
    }
    Ok(session_key(eng, &shared, prev.epoch + 1))
}
