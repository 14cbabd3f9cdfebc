//! Detector models: Alice's photon-number-resolving detector and Bob's
//! binary single-photon detector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Bob's binary detector: efficiency per photon plus a dark-count
/// probability per gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpdParams {
    pub eta_b: f64,
    pub dark_prob: f64,
}

impl SpdParams {
    /// Unit efficiency, no dark counts.
    pub const IDEAL: SpdParams = SpdParams { eta_b: 1.0, dark_prob: 0.0 };

    pub fn new(eta_b: f64, dark_prob: f64) -> Result<Self> {
        let p = SpdParams { eta_b, dark_prob };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta_b) {
            return Err(Error::invalid(format!(
                "eta_b must lie in [0, 1], got {}",
                self.eta_b
            )));
        }
        if !(0.0..1.0).contains(&self.dark_prob) {
            return Err(Error::invalid(format!(
                "dark_prob must lie in [0, 1), got {}",
                self.dark_prob
            )));
        }
        Ok(())
    }

    /// Click probability for `m` arriving photons:
    /// 1 − (1 − dark)·(1 − η_b)^m.
    pub fn click_prob(&self, m_arrived: u64) -> f64 {
        1.0 - (1.0 - self.dark_prob) * (1.0 - self.eta_b).powi(m_arrived as i32)
    }
}

/// Probability that an efficiency-η number-resolving detector registers `k`
/// of `n` incident photons: C(n,k) η^k (1−η)^{n−k}, zero for k > n.
pub fn pnrd_povm_prob(n: u64, k: u64, eta_a: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    // Binomial pmf in log-free form; n stays small (photon counts).
    let mut coeff = 1.0;
    for i in 0..k {
        coeff *= (n - i) as f64 / (k - i) as f64;
    }
    coeff * eta_a.powi(k as i32) * (1.0 - eta_a).powi((n - k) as i32)
}

/// Draw the herald count for `n_true` incident photons.
pub fn pnrd_sample(n_true: u64, eta_a: f64, rng: &mut RngStream) -> u64 {
    rng.binomial(n_true, eta_a)
}

/// Draw Bob's click for `m_arrived` photons.
pub fn spd_click(m_arrived: u64, p: &SpdParams, rng: &mut RngStream) -> bool {
    rng.bernoulli(p.click_prob(m_arrived))
}
