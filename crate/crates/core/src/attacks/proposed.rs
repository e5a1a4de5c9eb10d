use rand::RngCore;

use super::linkage::Fields;
use super::net::{ProposedNet, Subject};
use super::{
    guess_with, AdversaryView, Attempt, Capability, Dictionary, KeyRef, Rejection, SchemeAdapter,
    Verifier, ViewBuilder,
};
use crate::crypto::{
    Certificate, Digest160, GroupPoint, Identity, KeyPair, MulKind, RootCa, Scalar, Signature,
    Suite, SymKey,
};
use crate::error::ProtocolError;
use crate::harness::{SchemeId, Transcript};
use crate::proposed::messages::{Msg1, Msg2, Msg3, Msg4, RegRequest};
use crate::proposed::{
    self, bind_points, masked_password, seal_w2, seal_w3, v2_items, v3_items, SessionKey,
};
use crate::wire::{FieldReader, Role};

pub(crate) struct ProposedAdapter {
    net: ProposedNet,
    suite: Suite,
}

impl ProposedAdapter {
    pub(crate) fn new(suite: &Suite, rng: &mut dyn RngCore) -> Self {
        ProposedAdapter {
            net: ProposedNet::new(suite, rng),
            suite: suite.clone(),
        }
    }
}

fn rejection(variant: &str, party: Role, e: &ProtocolError) -> Rejection {
    Rejection {
        variant: variant.to_string(),
        party,
        code: e.code(),
        reason: e.to_string(),
    }
}

fn summary(rs: &[Rejection]) -> String {
    rs.iter()
        .map(|r| format!("{}: {} rejected ({})", r.variant, r.party, r.reason))
        .collect::<Vec<_>>()
        .join("; ")
}

/// A certificate for `subject` from a CA the adversary runs itself.
fn self_issued(suite: &Suite, subject: Identity, rng: &mut dyn RngCore) -> (KeyPair, Certificate) {
    let ca = RootCa::generate(suite.curve(), rng);
    let keys = KeyPair::generate(suite.curve(), rng);
    let cert = ca.issue(suite.curve(), suite.hash_alg(), subject, keys.public);
    (keys, cert)
}

fn open_w3(suite: &Suite, key: &SymKey, m3: &Msg3) -> Option<Digest160> {
    let fields = suite.engine().decrypt(key, &m3.w3).ok()?;
    let mut r = FieldReader::new(suite.curve(), fields);
    r.identity().ok()?;
    r.certificate().ok()?;
    r.point("A").ok()?;
    r.point("B").ok()?;
    r.digest().ok()
}

impl SchemeAdapter for ProposedAdapter {
    fn scheme(&self) -> SchemeId {
        SchemeId::Proposed
    }

    fn suite(&self) -> &Suite {
        &self.suite
    }

    fn observe(&mut self, who: Subject, rng: &mut dyn RngCore) -> (Transcript, usize) {
        self.net.observe(who, rng)
    }

    fn fill(&mut self, b: &mut ViewBuilder) {
        if b.wants(Capability::StolenCard) {
            b.card(self.net.stolen_card());
        }
        if b.wants(Capability::Registration) {
            b.registration(self.net.registration());
        }
        if b.wants(Capability::LongTermKeys) {
            b.long_term(self.net.long_term_scalars());
        }
    }

    fn login_fields(&self, t: &Transcript) -> Fields {
        match t.find::<Msg1>(self.suite.curve()) {
            Some(m) => vec![
                ("A", m.a.to_bytes()),
                ("DID_MU", m.did.0.to_vec()),
                ("C", m.c.to_bytes()),
                ("V_1", m.v1.0.to_vec()),
                ("ID_HA", m.id_ha.0.to_vec()),
            ],
            None => Vec::new(),
        }
    }

    fn session_points(&self, t: &Transcript) -> Vec<GroupPoint> {
        let curve = self.suite.curve();
        let mut pts = Vec::new();
        if let Some(m) = t.find::<Msg1>(curve) {
            pts.push(m.a);
            pts.push(m.c);
        }
        if let Some(m) = t.find::<Msg2>(curve) {
            pts.push(m.b);
        }
        pts
    }

    fn key_from_shared(&self, shared: &GroupPoint) -> SessionKey {
        proposed::session_key(&self.suite.engine(), shared, 0)
    }

    /// Replays the victim's Msg1. HA vouches for it again, but the session
    /// key h(aB) needs the victim's a.
    fn mu_impersonation(&mut self, view: &AdversaryView, rng: &mut dyn RngCore) -> Attempt {
        if !view.may_inject() {
            return Attempt::Nothing("no injection capability".into());
        }
        let Some(m1) = view
            .observations()
            .first()
            .and_then(|o| o.transcript.find::<Msg1>(self.suite.curve()))
        else {
            return Attempt::Nothing("no Msg1 to replay".into());
        };
        let variant = "replayed Msg1";
        let (m2, h) = match self.net.fa_login(m1.clone(), rng) {
            Ok(x) => x,
            Err(e) => {
                return Attempt::Rejected {
                    rejections: vec![rejection(variant, Role::Fa, &e)],
                    note: String::new(),
                }
            }
        };
        let m3 = match self.net.ha(m2, rng) {
            Ok(m) => m,
            Err(e) => {
                return Attempt::Rejected {
                    rejections: vec![rejection(variant, Role::Ha, &e)],
                    note: String::new(),
                }
            }
        };
        let m4 = match self.net.fa_finish(h, m3) {
            Ok(m) => m,
            Err(e) => {
                return Attempt::Rejected {
                    rejections: vec![rejection(variant, Role::Fa, &e)],
                    note: String::new(),
                }
            }
        };
        if let Some(oracle) = view.oracle() {
            if let Some(a) = oracle.log(&m1.a) {
                let shared = self.suite.curve().mul(&a, &m4.b);
                return Attempt::Key {
                    key: self.key_from_shared(&shared),
                    against: KeyRef::Fa(h),
                    note: "a recovered from A by the discrete log oracle".into(),
                };
            }
        }
        Attempt::Nothing(
            "HA accepted the replayed Msg1 and FA sent Msg4, but h(aB) needs the victim's a".into(),
        )
    }

    /// Plays FA towards HA with the victim's live Msg1 and tries three ways
    /// of producing V_2 without FA's signing key.
    fn fa_impersonation(&mut self, view: &AdversaryView, rng: &mut dyn RngCore) -> Attempt {
        if !view.may_inject() {
            return Attempt::Nothing("no injection capability".into());
        }
        let curve = self.suite.curve().clone();
        let eng = self.suite.engine();
        let old_m2 = view
            .observations()
            .iter()
            .find_map(|o| o.transcript.find::<Msg2>(&curve));
        let (m1, mu_h) = self.net.victim_login(rng);
        let id_fa = self.net.id_fa();
        let real_cert = self.net.cert_fa().clone();
        let (own_keys, own_cert) = self_issued(&self.suite, id_fa, rng);

        let mut rejections = Vec::new();
        let mut variants: Vec<(&str, Certificate, Option<Signature>)> = vec![
            (
                "random V_2",
                real_cert.clone(),
                Some(Signature::random(&curve, rng)),
            ),
            ("self-issued Cert_FA", own_cert, None),
        ];
        if let Some(old) = old_m2 {
            variants.push(("V_2 spliced from another session", real_cert, Some(old.v2)));
        }
        for (variant, cert, sig) in variants {
            let b = Scalar::random(&curve, rng);
            let b_pub = eng.mul(&b, &curve.generator(), MulKind::Precomputable);
            let Ok(key) = eng.kdf(&eng.mul(&b, &m1.c, MulKind::Online)) else {
                continue;
            };
            let w2 = seal_w2(&eng, &key, &m1.a, &cert, &m1.v1, &m1.did, rng);
            let v2 = sig.unwrap_or_else(|| {
                eng.sign(
                    &own_keys.secret,
                    &v2_items(&m1.a.to_bytes(), &m1.v1, &m1.did),
                )
            });
            let m3 = match self.net.ha(Msg2 { b: b_pub, w2, v2 }, rng) {
                Ok(m) => m,
                Err(e) => {
                    rejections.push(rejection(variant, Role::Ha, &e));
                    continue;
                }
            };
            let Some(w1) = open_w3(&self.suite, &key, &m3) else {
                continue;
            };
            let m4 = Msg4 {
                b: b_pub,
                id_fa,
                w1,
            };
            match self.net.victim_receive(mu_h, m4) {
                Ok(()) => {
                    return Attempt::Key {
                        key: self.key_from_shared(&curve.mul(&b, &m1.a)),
                        against: KeyRef::Mu(mu_h),
                        note: format!("{variant}: HA answered and the victim accepted"),
                    }
                }
                Err(e) => rejections.push(rejection(variant, Role::Mu, &e)),
            }
        }
        let note = summary(&rejections);
        Attempt::Rejected { rejections, note }
    }

    /// Colluding pair: B logs in with a C of its own choosing so that A,
    /// sitting between FA and HA, can read W_2 and build W_3. A then needs
    /// a V_3 that FA accepts.
    fn ha_impersonation(&mut self, view: &AdversaryView, rng: &mut dyn RngCore) -> Attempt {
        if !view.may_inject() {
            return Attempt::Nothing("no injection capability".into());
        }
        let curve = self.suite.curve().clone();
        let eng = self.suite.engine();
        let cert_ha = self.net.cert_ha().clone();
        let id_ha = cert_ha.subject;
        let (own_keys, own_cert) = self_issued(&self.suite, id_ha, rng);
        // Any HA-signed (W_1, V_3) pair seen on the air.
        let old = view.observations().iter().find_map(|o| {
            Some((
                o.transcript.find::<Msg3>(&curve)?.v3,
                o.transcript.find::<Msg4>(&curve)?.w1,
            ))
        });

        let mut rejections = Vec::new();
        // (variant, certificate presented, replayed (V_3, W_1))
        type Variant<'s> = (&'s str, Certificate, Option<(Signature, Digest160)>);
        let mut variants: Vec<Variant> = vec![
            ("V_3 under A's own key", cert_ha.clone(), None),
            ("self-issued Cert_HA", own_cert, None),
        ];
        if let Some(pair) = old {
            variants.push((
                "V_3 and W_1 replayed from an earlier session",
                cert_ha,
                Some(pair),
            ));
        }
        for (variant, cert, replay) in variants {
            let a = Scalar::random(&curve, rng);
            let a_pub = curve.mul(&a, &curve.generator());
            let c = Scalar::random(&curve, rng);
            let c_pub = curve.mul(&c, &curve.generator());
            let m1 = Msg1 {
                a: a_pub,
                did: Digest160::random(rng),
                c: c_pub,
                v1: Digest160::random(rng),
                id_ha,
            };
            let (m2, h) = match self.net.fa_login(m1, rng) {
                Ok(x) => x,
                Err(e) => {
                    rejections.push(rejection(variant, Role::Fa, &e));
                    continue;
                }
            };
            // A holds c, so R_BC = cB.
            let Ok(key) = eng.kdf(&curve.mul(&c, &m2.b)) else {
                continue;
            };
            let (v3, w1) = match replay {
                Some((v3, w1)) => (v3, w1),
                None => {
                    let w1 = Digest160::random(rng);
                    (
                        eng.sign(&own_keys.secret, &v3_items(&cert.to_bytes(), &w1)),
                        w1,
                    )
                }
            };
            let w3 = seal_w3(
                &eng,
                &key,
                &self.net.id_fa(),
                &cert,
                &a_pub,
                &m2.b,
                &w1,
                rng,
            );
            match self.net.fa_finish(h, Msg3 { w3, v3 }) {
                Ok(m4) => {
                    return Attempt::Key {
                        key: self.key_from_shared(&curve.mul(&a, &m4.b)),
                        against: KeyRef::Fa(h),
                        note: format!(
                            "{variant}: FA accepted without HA taking part{}",
                            if rejections.is_empty() {
                                String::new()
                            } else {
                                format!("; before that {}", summary(&rejections))
                            }
                        ),
                    }
                }
                Err(e) => rejections.push(rejection(variant, Role::Fa, &e)),
            }
        }
        let note = summary(&rejections);
        Attempt::Rejected { rejections, note }
    }

    /// Card data plus an old session. The one verifier computable from
    /// them is W_1 = h(N ‖ A ‖ B ‖ ID_FA ‖ ID_HA) with N = Q ⊕ h(PW ‖ x_MU);
    /// V_1 needs R_AC = aC and H needs ID_MU.
    fn password_verifiers<'v>(&self, view: &'v AdversaryView) -> Vec<Verifier<'v>> {
        let curve = self.suite.curve();
        let Some(card) = view.card() else {
            return Vec::new();
        };
        let Some(x) = card.x_mu else {
            return Vec::new();
        };
        let Some((m1, m4)) = view.observations().iter().find_map(|o| {
            Some((
                o.transcript.find::<Msg1>(curve)?,
                o.transcript.find::<Msg4>(curve)?,
            ))
        }) else {
            return Vec::new();
        };
        let suite = self.suite.clone();
        let q = card.q;
        vec![Verifier {
            name: "W_1 from Msg4",
            check: Box::new(move |pw: &[u8]| {
                let eng = suite.engine();
                let masked = masked_password(&eng, pw, &x);
                let n = Digest160(crate::crypto::primitives::xor20(&q.0, &masked.0));
                bind_points(&eng, &n, &[&m1.a, &m4.b], &[&m4.id_fa, &m1.id_ha]) == m4.w1
            }),
        }]
    }

    /// The insider saw {ID_MU, h(PW_MU ‖ x_MU)} and HA's reply. Without
    /// x_MU no candidate can be checked against anything.
    fn insider(
        &mut self,
        view: &AdversaryView,
        dict: &Dictionary,
        _rng: &mut dyn RngCore,
    ) -> Attempt {
        if view
            .registration()
            .and_then(|t| t.find::<RegRequest>(self.suite.curve()))
            .is_none()
        {
            return Attempt::Nothing("no registration view".into());
        }
        guess_with(&[], dict)
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::{run_with, AttackKind, AttackOptions, Evidence};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn adapter(seed: u64) -> (ProposedAdapter, ChaCha20Rng) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        (ProposedAdapter::new(&Suite::toy(), &mut rng), rng)
    }

    fn codes(e: &Evidence) -> Vec<i32> {
        match e {
            Evidence::Rejected { rejections, .. } => rejections.iter().map(|r| r.code).collect(),
            Evidence::SessionKey { .. } => vec![0],
            _ => Vec::new(),
        }
    }

    #[test]
    fn fa_impersonation_variants_rejected_by_ha() {
        let (mut a, mut rng) = adapter(1);
        let out = run_with(
            &mut a,
            AttackKind::FaImpersonation,
            &AttackKind::FaImpersonation.grants(),
            &AttackOptions::default(),
            &mut rng,
        )
        .unwrap();
        assert!(!out.succeeded);
        let sig = ProtocolError::InvalidSignature("V_2").code();
        let cert = ProtocolError::InvalidCertificate("FA").code();
        assert_eq!(codes(&out.evidence), vec![sig, cert, sig]);
    }

    #[test]
    fn ha_forgeries_rejected_but_replayed_v3_accepted() {
        let (mut a, mut rng) = adapter(2);
        let grants = AttackKind::HaImpersonation.grants();
        let out = run_with(
            &mut a,
            AttackKind::HaImpersonation,
            &grants,
            &AttackOptions::default(),
            &mut rng,
        )
        .unwrap();
        let Evidence::SessionKey { matches, note, .. } = &out.evidence else {
            panic!("{:?}", out.evidence)
        };
        assert!(matches);
        assert!(note.contains("replayed"));
        assert!(note.contains(&ProtocolError::InvalidSignature("V_3").to_string()));
        assert!(note.contains(&ProtocolError::InvalidCertificate("HA").to_string()));
    }

    #[test]
    fn stolen_card_plus_transcript_confirms_password() {
        let (mut a, mut rng) = adapter(3);
        let grants = AttackKind::OfflineGuess.grants();
        let out = run_with(
            &mut a,
            AttackKind::OfflineGuess,
            &grants,
            &AttackOptions::default(),
            &mut rng,
        )
        .unwrap();
        assert!(out.succeeded, "{:?}", out.evidence);
        // The card alone, or the transcript alone, gives nothing to test.
        for g in [vec![Capability::StolenCard], vec![Capability::Wiretap]] {
            let out = run_with(
                &mut a,
                AttackKind::OfflineGuess,
                &g,
                &AttackOptions::default(),
                &mut rng,
            )
            .unwrap();
            assert!(
                matches!(out.evidence, Evidence::Password { confirmable: 0, ref verifiers, .. } if verifiers.is_empty())
            );
        }
    }

    #[test]
    fn insider_with_registration_view_has_no_verifier() {
        let (mut a, mut rng) = adapter(4);
        let grants = AttackKind::Insider.grants();
        let out = run_with(
            &mut a,
            AttackKind::Insider,
            &grants,
            &AttackOptions::default(),
            &mut rng,
        )
        .unwrap();
        assert!(!out.succeeded);
        assert!(matches!(
            out.evidence,
            Evidence::Password {
                confirmable: 0,
                tested: 1000,
                ..
            }
        ));
    }

    #[test]
    fn replayed_msg1_is_accepted_by_ha() {
        let (mut a, mut rng) = adapter(5);
        let grants = AttackKind::MuImpersonation.grants();
        let out = run_with(
            &mut a,
            AttackKind::MuImpersonation,
            &grants,
            &AttackOptions::default(),
            &mut rng,
        )
        .unwrap();
        assert!(!out.succeeded);
        let Evidence::None { reason } = &out.evidence else {
            panic!("{:?}", out.evidence)
        };
        assert!(reason.contains("accepted"));
        // Msg1 to FA, Msg2 to HA, Msg3 back.
        assert_eq!(out.transcript.len(), 3);
    }
}
