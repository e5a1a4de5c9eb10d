use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::{CryptoError, Curve, Digest160, GroupPoint, Identity, Nonce128};

/// Credential record {Q, H, C, ID_HA, x_MU}. `x_mu` is `None` between issue
/// and finalize.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmartCard {
    pub q: Digest160,
    pub h: Digest160,
    pub c: GroupPoint,
    pub id_ha: Identity,
    pub x_mu: Option<Nonce128>,
}

#[derive(Debug, Error)]
pub enum CardFileError {
    #[error("card file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("card field: {0}")]
    Field(#[from] CryptoError),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CardFile {
    q: Digest160,
    h: Digest160,
    c: String,
    id_ha: Identity,
    x_mu: Option<Nonce128>,
}

impl SmartCard {
    pub fn to_json(&self) -> String {
        let file = CardFile {
            q: self.q,
            h: self.h,
            c: hex::encode(self.c.to_bytes()),
            id_ha: self.id_ha,
            x_mu: self.x_mu,
        };
        serde_json::to_string_pretty(&file).expect("card serializes")
    }

    /// Parses a card file, validating C against `curve`.
    pub fn from_json(curve: &Curve, text: &str) -> Result<Self, CardFileError> {
        let file: CardFile = serde_json::from_str(text)?;
        let c_bytes = hex::decode(&file.c).map_err(|_| CryptoError::MalformedPoint)?;
        Ok(SmartCard {
            q: file.q,
            h: file.h,
            c: curve.decode_point(&c_bytes)?,
            id_ha: file.id_ha,
            x_mu: file.x_mu,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::{Scalar, Suite};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn card(suite: &Suite) -> SmartCard {
        let curve = suite.curve();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        SmartCard {
            q: Digest160::random(&mut rng),
            h: Digest160::random(&mut rng),
            c: curve.mul(&Scalar::random(curve, &mut rng), &curve.generator()),
            id_ha: Identity::from_label("home").unwrap(),
            x_mu: Some(Nonce128::random(&mut rng)),
        }
    }

    #[test]
    fn card_file_roundtrip() {
        let suite = Suite::production();
        let c = card(&suite);
        assert_eq!(
            SmartCard::from_json(suite.curve(), &c.to_json()).unwrap(),
            c
        );
        let mut partial = c.clone();
        partial.x_mu = None;
        assert_eq!(
            SmartCard::from_json(suite.curve(), &partial.to_json()).unwrap(),
            partial
        );
    }

    #[test]
    fn card_file_rejects_bad_point_and_junk() {
        let suite = Suite::toy();
        let c = card(&suite);
        let mut v: serde_json::Value = serde_json::from_str(&c.to_json()).unwrap();
        v["c"] = serde_json::Value::String(format!("04{}", "00".repeat(64)));
        assert!(matches!(
            SmartCard::from_json(suite.curve(), &v.to_string()),
            Err(CardFileError::Field(_))
        ));
        assert!(matches!(
            SmartCard::from_json(suite.curve(), "{"),
            Err(CardFileError::Json(_))
        ));
    }
}
