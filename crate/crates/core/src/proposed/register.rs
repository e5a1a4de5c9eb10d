use rand::RngCore;

use super::messages::{CardIssue, RegRequest};
use super::{card_check_value, masked_password, HomeAgent, MobileUser, SmartCard};
use crate::crypto::{Digest160, Engine, Identity, Nonce128};
use crate::error::ProtocolError;

/// MU side of registration: draws x_MU and masks the password with it.
pub fn register_request<R: RngCore + ?Sized>(
    eng: &Engine<'_>,
    id_mu: Identity,
    pw: &[u8],
    rng: &mut R,
) -> Result<(RegRequest, Nonce128), ProtocolError> {
    if pw.is_empty() {
        return Err(ProtocolError::Malformed("empty password".into()));
    }
    let x_mu = Nonce128::random(rng);
    let masked_pw = masked_password(eng, pw, &x_mu);
    Ok((RegRequest { id_mu, masked_pw }, x_mu))
}

/// HA side of registration. Nothing about the user is retained.
pub fn register_issue(eng: &Engine<'_>, ha: &HomeAgent, req: &RegRequest) -> CardIssue {
    let secret = ha.user_secret_counted(eng, &req.id_mu);
    let q = Digest160(eng.xor(&secret.0, &req.masked_pw.0));
    let h = card_check_value(eng, &req.id_mu, &req.masked_pw);
    CardIssue {
        q,
        h,
        c: ha.c_pub(),
        id_ha: ha.id(),
    }
}

/// MU writes x_MU into the freshly issued card.
pub fn card_finalize(issue: &CardIssue, x_mu: Nonce128) -> SmartCard {
    SmartCard {
        q: issue.q,
        h: issue.h,
        c: issue.c,
        id_ha: issue.id_ha,
        x_mu: Some(x_mu),
    }
}

/// The reader-side check H* = H. Returns h(PW ‖ x) on success so callers can
/// reuse it.
pub(super) fn check_card(eng: &Engine<'_>, mu: &MobileUser) -> Result<Digest160, ProtocolError> {
    let x = mu.card.x_mu.as_ref().ok_or(ProtocolError::CardIncomplete)?;
    let masked = masked_password(eng, &mu.password, x);
    if card_check_value(eng, &mu.id, &masked) == mu.card.h {
        Ok(masked)
    } else {
        Err(ProtocolError::LocalVerificationFailed)
    }
}

pub fn local_verify(eng: &Engine<'_>, mu: &MobileUser) -> bool {
    check_card(eng, mu).is_ok()
}

/// Replaces Q, H and x_MU on the card after checking the old password.
/// No message is exchanged with the home agent.
pub fn password_change<R: RngCore + ?Sized>(
    eng: &Engine<'_>,
    mu: &MobileUser,
    new_pw: &[u8],
    rng: &mut R,
) -> Result<SmartCard, ProtocolError> {
    let old = check_card(eng, mu).map_err(|e| match e {
        ProtocolError::LocalVerificationFailed => ProtocolError::PasswordChangeRejected,
        other => other,
    })?;
    if new_pw.is_empty() {
        return Err(ProtocolError::Malformed("empty password".into()));
    }
    let x_new = Nonce128::random(rng);
    let masked_new = masked_password(eng, new_pw, &x_new);
    let q = Digest160(eng.xor(&eng.xor(&mu.card.q.0, &old.0), &masked_new.0));
    let h = card_check_value(eng, &mu.id, &masked_new);
    Ok(SmartCard {
        q,
        h,
        c: mu.card.c,
        id_ha: mu.card.id_ha,
        x_mu: Some(x_new),
    })
}
