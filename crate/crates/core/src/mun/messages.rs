//! Wire messages of the baseline scheme.

use crate::crypto::{Digest160, Identity, Nonce128, OwnedField};
use crate::wire::{FieldReader, FieldWriter, WireBody, WireError};
use crate::wire_message;

wire_message! {
    /// MU → HA: `{ID_MU, N_MU}`.
    pub struct MunReg1 { id_mu: identity, n_mu: nonce }
}

wire_message! {
    /// HA → MU over the secure channel: `{r_MU, PW_MU, N_HA, ID_HA}`.
    pub struct MunReg2 { r_mu: digest, pw_mu: digest, n_ha: nonce, id_ha: identity }
}

wire_message! {
    /// MU → FA: `{ID_HA, N_HA, r_MU}`.
    pub struct MunM1 { id_ha: identity, n_ha: nonce, r_mu: digest }
}

wire_message! {
    /// FA → HA: `{ID_FA, N_FA, r_MU}`.
    pub struct MunM2 { id_fa: identity, n_fa: nonce, r_mu: digest }
}

wire_message! {
    /// HA → FA: `{S_HA, P_HA}`.
    pub struct MunM3 { s_ha: digest, p_ha: digest }
}

/// `P_FA = (S_HA ‖ ID_FA ‖ N_FA)`, sent in the clear.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MunPfa {
    pub s_ha: Digest160,
    pub id_fa: Identity,
    pub n_fa: Nonce128,
}

/// FA → MU: `{S_FA, aP, P_FA}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MunM4 {
    pub s_fa: Digest160,
    pub a_pub: crate::crypto::GroupPoint,
    pub p_fa: MunPfa,
}

impl WireBody for MunM4 {
    fn to_fields(&self) -> Vec<OwnedField> {
        FieldWriter::new()
            .digest(&self.s_fa)
            .point(&self.a_pub)
            .digest(&self.p_fa.s_ha)
            .identity(&self.p_fa.id_fa)
            .nonce(&self.p_fa.n_fa)
            .finish()
    }

    fn read(r: &mut FieldReader<'_>) -> Result<Self, WireError> {
        Ok(MunM4 {
            s_fa: r.digest()?,
            a_pub: r.point("aP")?,
            p_fa: MunPfa {
                s_ha: r.digest()?,
                id_fa: r.identity()?,
                n_fa: r.nonce()?,
            },
        })
    }
}

wire_message! {
    /// MU → FA: `{bP, S_MF}`.
    pub struct MunM5 { b_pub: point, s_mf: digest }
}

wire_message! {
    /// MU → FA: `b_iP`.
    pub struct MunUpd1 { b_i: point }
}

wire_message! {
    /// FA → MU: `{a_iP, S_MF_i}`.
    pub struct MunUpd2 { a_i: point, s_mf_i: digest }
}
