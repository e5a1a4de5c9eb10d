use rand::RngCore;

use super::linkage::Fields;
use super::net::{MunNet, Subject};
use super::{
    AdversaryView, Attempt, Capability, Dictionary, KeyRef, Rejection, SchemeAdapter, Verifier,
    ViewBuilder,
};
use crate::crypto::{Digest160, GroupPoint, Identity, Nonce128, Scalar, Suite};
use crate::error::ProtocolError;
use crate::harness::{SchemeId, Transcript};
use crate::mun::messages::{MunM1, MunM2, MunM3, MunM4, MunM5, MunPfa, MunReg1, MunReg2};
use crate::mun::{
    self, key_from_point, p_value, s_fa_value, s_ha_value, s_mf_value, MunCredentials,
};
use crate::proposed::SessionKey;
use crate::wire::Role;

pub(crate) struct MunAdapter {
    net: MunNet,
    suite: Suite,
}

impl MunAdapter {
    pub(crate) fn new(suite: &Suite, rng: &mut dyn RngCore) -> Self {
        MunAdapter {
            net: MunNet::new(suite, rng),
            suite: suite.clone(),
        }
    }

    fn rejected(variant: &str, party: Role, e: ProtocolError) -> Attempt {
        let r = Rejection {
            variant: variant.to_string(),
            party,
            code: e.code(),
            reason: e.to_string(),
        };
        let note = format!("{variant}: {party} rejected ({})", r.reason);
        Attempt::Rejected {
            rejections: vec![r],
            note,
        }
    }

    /// Drives FA from M1 to M4 with HA answering honestly, then answers M4
    /// as MU with a fresh b. Needs nothing beyond an M1 FA will forward.
    fn serve_as_mu(&mut self, variant: &str, m1: MunM1, rng: &mut dyn RngCore) -> Attempt {
        let (m2, h) = match self.net.fa_login(m1, rng) {
            Ok(x) => x,
            Err(e) => return Self::rejected(variant, Role::Fa, e),
        };
        let m3 = match self.net.ha(m2) {
            Ok(m) => m,
            Err(e) => return Self::rejected(variant, Role::Ha, e),
        };
        self.finish_with_fa(variant, h, m3, rng)
    }

    fn finish_with_fa(
        &mut self,
        variant: &str,
        h: usize,
        m3: MunM3,
        rng: &mut dyn RngCore,
    ) -> Attempt {
        let m4 = match self.net.fa_respond(h, m3, rng) {
            Ok(m) => m,
            Err(e) => return Self::rejected(variant, Role::Fa, e),
        };
        let curve = self.suite.curve();
        let eng = self.suite.engine();
        let b = Scalar::random(curve, rng);
        let b_pub = curve.mul(&b, &curve.generator());
        let key = key_from_point(&eng, &curve.mul(&b, &m4.a_pub), 0);
        let s_mf = s_mf_value(&eng, &key, &m4.p_fa.n_fa, &b_pub);
        match self.net.fa_verify(h, MunM5 { b_pub, s_mf }) {
            Ok(()) => Attempt::Key {
                key,
                against: KeyRef::Fa(h),
                note: format!("{variant}: FA accepted M5"),
            },
            Err(e) => Self::rejected(variant, Role::Fa, e),
        }
    }
}

impl SchemeAdapter for MunAdapter {
    fn scheme(&self) -> SchemeId {
        SchemeId::Mun
    }

    fn suite(&self) -> &Suite {
        &self.suite
    }

    fn observe(&mut self, who: Subject, rng: &mut dyn RngCore) -> (Transcript, usize) {
        self.net.observe(who, rng)
    }

    fn fill(&mut self, b: &mut ViewBuilder) {
        if b.wants(Capability::Registration) {
            b.registration(self.net.registration());
        }
        // No card, and no long-term scalars: the baseline has none.
    }

    fn login_fields(&self, t: &Transcript) -> Fields {
        match t.find::<MunM1>(self.suite.curve()) {
            Some(m) => vec![
                ("ID_HA", m.id_ha.0.to_vec()),
                ("N_HA", m.n_ha.0.to_vec()),
                ("r_MU", m.r_mu.0.to_vec()),
            ],
            None => Vec::new(),
        }
    }

    fn session_points(&self, t: &Transcript) -> Vec<GroupPoint> {
        let curve = self.suite.curve();
        let mut pts = Vec::new();
        if let Some(m) = t.find::<MunM4>(curve) {
            pts.push(m.a_pub);
        }
        if let Some(m) = t.find::<MunM5>(curve) {
            pts.push(m.b_pub);
        }
        pts
    }

    fn key_from_shared(&self, shared: &GroupPoint) -> SessionKey {
        key_from_point(&self.suite.engine(), shared, 0)
    }

    /// Replays {ID_HA, N'_HA, r_MU} with a fresh N'_HA and answers M4.
    fn mu_impersonation(&mut self, view: &AdversaryView, rng: &mut dyn RngCore) -> Attempt {
        if !view.may_inject() {
            return Attempt::Nothing("no injection capability".into());
        }
        let Some(m1) = view
            .observations()
            .first()
            .and_then(|o| o.transcript.find::<MunM1>(self.suite.curve()))
        else {
            return Attempt::Nothing("no M1 to replay".into());
        };
        let m1 = MunM1 {
            n_ha: Nonce128::random(rng),
            ..m1
        };
        self.serve_as_mu("replayed M1 with fresh N_HA", m1, rng)
    }

    /// A rogue FA forwards the victim's M1 under its own identity, gets
    /// S_HA from HA and completes the exchange with the victim.
    fn fa_impersonation(&mut self, view: &AdversaryView, rng: &mut dyn RngCore) -> Attempt {
        if !view.may_inject() {
            return Attempt::Nothing("no injection capability".into());
        }
        let Some(m1) = view
            .observations()
            .first()
            .and_then(|o| o.transcript.find::<MunM1>(self.suite.curve()))
        else {
            return Attempt::Nothing("no M1 of the victim".into());
        };
        let variant = "rogue FA";
        let id_fa = Identity::from_label("rogue-fa").expect("fits");
        let n_fa = Nonce128::random(rng);
        let m3 = match self.net.ha(MunM2 {
            id_fa,
            n_fa,
            r_mu: m1.r_mu,
        }) {
            Ok(m) => m,
            Err(e) => return Self::rejected(variant, Role::Ha, e),
        };
        let curve = self.suite.curve().clone();
        let eng = self.suite.engine();
        let s_fa = s_fa_value(&eng, &m3.s_ha, &n_fa, &m1.n_ha);
        let a = Scalar::random(&curve, rng);
        let a_pub = curve.mul(&a, &curve.generator());
        let m4 = MunM4 {
            s_fa,
            a_pub,
            p_fa: MunPfa {
                s_ha: m3.s_ha,
                id_fa,
                n_fa,
            },
        };
        match self.net.victim_respond(m4, rng) {
            Ok((m5, h)) => Attempt::Key {
                key: key_from_point(&eng, &curve.mul(&a, &m5.b_pub), 0),
                against: KeyRef::Mu(h),
                note: format!(
                    "{variant}: HA issued S_HA without authenticating FA; the victim accepted M4"
                ),
            },
            Err(e) => Self::rejected(variant, Role::Mu, e),
        }
    }

    /// B sends an arbitrary r'; A answers FA's M2 itself with
    /// S_HA = h(ID_FA ‖ N_FA) ⊕ r' ⊕ P' for a P' of its choice.
    fn ha_impersonation(&mut self, view: &AdversaryView, rng: &mut dyn RngCore) -> Attempt {
        if !view.may_inject() {
            return Attempt::Nothing("no injection capability".into());
        }
        let variant = "fabricated S_HA";
        let m1 = MunM1 {
            id_ha: self.net.id_ha(),
            n_ha: Nonce128::random(rng),
            r_mu: Digest160::random(rng),
        };
        let (m2, h) = match self.net.fa_login(m1, rng) {
            Ok(x) => x,
            Err(e) => return Self::rejected(variant, Role::Fa, e),
        };
        let p = Digest160::random(rng);
        let s_ha = s_ha_value(&self.suite.engine(), &m2.id_fa, &m2.n_fa, &m2.r_mu, &p);
        self.finish_with_fa(variant, h, MunM3 { s_ha, p_ha: p }, rng)
    }

    /// S_HA = h(ID_FA ‖ N_FA) ⊕ r_MU ⊕ h(PW ‖ N_FA), all but PW on the air.
    fn password_verifiers<'v>(&self, view: &'v AdversaryView) -> Vec<Verifier<'v>> {
        let curve = self.suite.curve();
        let Some((m2, m3)) = view.observations().iter().find_map(|o| {
            Some((
                o.transcript.find::<MunM2>(curve)?,
                o.transcript.find::<MunM3>(curve)?,
            ))
        }) else {
            return Vec::new();
        };
        let suite = self.suite.clone();
        vec![Verifier {
            name: "S_HA from M3",
            check: Box::new(move |pw: &[u8]| {
                let Ok(pw) = Digest160::from_slice(pw) else {
                    return false;
                };
                let eng = suite.engine();
                s_ha_value(
                    &eng,
                    &m2.id_fa,
                    &m2.n_fa,
                    &m2.r_mu,
                    &p_value(&eng, &pw, &m2.n_fa),
                ) == m3.s_ha
            }),
        }]
    }

    /// HA generated PW_MU and sent it back; the insider simply logs in.
    fn insider(
        &mut self,
        view: &AdversaryView,
        _dict: &Dictionary,
        rng: &mut dyn RngCore,
    ) -> Attempt {
        let curve = self.suite.curve().clone();
        let Some(t) = view.registration() else {
            return Attempt::Nothing("no registration view".into());
        };
        let (Some(req), Some(reply)) = (t.find::<MunReg1>(&curve), t.find::<MunReg2>(&curve))
        else {
            return Attempt::Nothing("registration view incomplete".into());
        };
        if !view.may_inject() {
            return Attempt::Nothing("no injection capability".into());
        }
        let cred = MunCredentials::from_reply(req.id_mu, &reply);
        let variant = "credentials read at registration";
        let (m2, h) = match self.net.fa_login(mun::mun_login(&cred), rng) {
            Ok(x) => x,
            Err(e) => return Self::rejected(variant, Role::Fa, e),
        };
        let m3 = match self.net.ha(m2) {
            Ok(m) => m,
            Err(e) => return Self::rejected(variant, Role::Ha, e),
        };
        let m4 = match self.net.fa_respond(h, m3, rng) {
            Ok(m) => m,
            Err(e) => return Self::rejected(variant, Role::Fa, e),
        };
        // The full MU side, S_FA check included.
        let (m5, link) = match mun::mun_mu_respond(&self.suite.engine(), &cred, &m4, rng) {
            Ok(x) => x,
            Err(e) => return Self::rejected(variant, Role::Mu, e),
        };
        match self.net.fa_verify(h, m5) {
            Ok(()) => Attempt::Key {
                key: link.key,
                against: KeyRef::Fa(h),
                note: format!(
                    "{variant}: PW_MU = {} taken from HA's reply",
                    reply.pw_mu.to_hex()
                ),
            },
            Err(e) => Self::rejected(variant, Role::Fa, e),
        }
    }

    fn replay_session_key(&mut self, view: &AdversaryView, rng: &mut dyn RngCore) -> Attempt {
        self.mu_impersonation(view, rng)
    }

    fn take_log(&mut self) -> Transcript {
        self.net.take_log()
    }

    fn referee_key(&self, r: KeyRef) -> Option<SessionKey> {
        match r {
            KeyRef::Fa(h) => self.net.fa_key(h),
            KeyRef::Mu(h) => self.net.mu_key(h),
            KeyRef::Observed(i) => self.net.observed_key(i),
        }
    }

    fn referee_password(&self) -> Vec<u8> {
        self.net.victim_password()
    }
}
