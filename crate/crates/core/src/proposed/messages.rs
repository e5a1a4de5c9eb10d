//! Wire messages of the proposed scheme.

use crate::wire_message;

wire_message! {
    /// MU → HA over the secure registration channel.
    pub struct RegRequest { id_mu: identity, masked_pw: digest }
}

wire_message! {
    /// HA → MU: the card contents before x_MU is entered.
    pub struct CardIssue { q: digest, h: digest, c: point, id_ha: identity }
}

wire_message! {
    /// MU → FA (or MU → HA at home): `{A, DID_MU, C, V_1, ID_HA}`.
    pub struct Msg1 { a: point, did: digest, c: point, v1: digest, id_ha: identity }
}

wire_message! {
    /// FA → HA: `{B, W_2, V_2}`.
    pub struct Msg2 { b: point, w2: ciphertext, v2: signature }
}

wire_message! {
    /// HA → FA: `{W_3, V_3}`.
    pub struct Msg3 { w3: ciphertext, v3: signature }
}

wire_message! {
    /// FA → MU: `{B, ID_FA, W_1}`.
    pub struct Msg4 { b: point, id_fa: identity, w1: digest }
}

wire_message! {
    /// HA → MU in the home network: `{U, W_1, ID_HA}`.
    pub struct HomeMsg2 { u: point, w1: digest, id_ha: identity }
}

wire_message! {
    /// MU → FA: `A_i`.
    pub struct UpdMsg1 { a_i: point }
}

wire_message! {
    /// FA → MU: `{B_i, S_i}`.
    pub struct UpdMsg2 { b_i: point, s_i: digest }
}
