//! Brute-force discrete logarithm oracle.
//!
//! Only usable on groups small enough to enumerate. With it an adversary can
//! recover ephemeral scalars from public points, which is exactly the
//! capability the key-secrecy arguments assume away.

use crypto_bigint::U256;

use super::curve::{Curve, GroupPoint, Scalar};
use super::CryptoError;

/// Largest group order (in bits) the oracle agrees to search.
pub const MAX_ORDER_BITS: usize = 20;

#[derive(Clone, Debug)]
pub struct CdlOracle {
    curve: Curve,
}

impl CdlOracle {
    pub fn new(curve: &Curve) -> Result<Self, CryptoError> {
        let bits = curve.order_bits();
        if bits > MAX_ORDER_BITS {
            return Err(CryptoError::OracleRefused(bits));
        }
        Ok(CdlOracle {
            curve: curve.clone(),
        })
    }

    /// Finds `k` with `k·base = target` by walking the multiples of `base`.
    pub fn solve(&self, base: &GroupPoint, target: &GroupPoint) -> Option<Scalar> {
        if base.is_infinity() || target.is_infinity() {
            return None;
        }
        let n = self.curve.order();
        let mut acc = *base;
        let mut k = U256::ONE;
        while k < *n {
            if acc == *target {
                return Scalar::new(&self.curve, k).ok();
            }
            acc = self.curve.add(&acc, base);
            k = k.wrapping_add(&U256::ONE);
        }
        None
    }

    /// Scalar of `target` relative to the curve's base point.
    pub fn log(&self, target: &GroupPoint) -> Option<Scalar> {
        self.solve(&self.curve.generator(), target)
    }

    /// Computes `xy·P` from `x·P` and `y·P`.
    pub fn cdh(&self, xp: &GroupPoint, yp: &GroupPoint) -> Option<GroupPoint> {
        let x = self.log(xp)?;
        Some(self.curve.mul(&x, yp))
    }
}
