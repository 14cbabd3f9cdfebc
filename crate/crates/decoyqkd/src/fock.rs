//! Photon-number distributions and the two source models: a heralded PDC
//! source and a weak coherent pulse.
//!
//! Distributions are stored as truncated probability vectors. Every
//! constructor here targets a law whose exact total mass is 1, so the
//! adaptive cutoff simply extends until the accumulated mass leaves a tail
//! below `TAIL_EPS`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Truncated tail mass allowed past the cutoff.
pub const TAIL_EPS: f64 = 1e-12;

/// A photon-number distribution truncated at an adaptive cutoff `n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDistribution {
    probs: Vec<f64>,
}

impl FockDistribution {
    /// Validate and wrap a probability vector. Entries must lie in `[0, 1]`
    /// and sum to 1 within 1e-9.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("distribution needs at least one entry"));
        }
        for (n, &p) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("probs[{n}] = {p} outside [0, 1]")));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "probabilities sum to {total}, expected 1 within 1e-9"
            )));
        }
        Ok(FockDistribution { probs })
    }

    /// Point mass at photon number `n`.
    pub fn delta(n: usize) -> Self {
        let mut probs = vec![0.0; n + 1];
        probs[n] = 1.0;
        FockDistribution { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    /// Probability of photon number `n` (zero past the cutoff).
    pub fn prob(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, &p)| n as f64 * p)
            .sum()
    }

    /// Total variation distance, `max |P(A) − Q(A)|` over events.
    pub fn total_variation(&self, other: &FockDistribution) -> f64 {
        let len = self.probs.len().max(other.probs.len());
        let mut acc = 0.0;
        for n in 0..len {
            acc += (self.prob(n) - other.prob(n)).abs();
        }
        0.5 * acc
    }

    /// Inverse-CDF draw. Residual truncated mass collapses onto `n_max`.
    pub fn sample(&self, rng: &mut RngStream) -> u64 {
        let u = rng.uniform();
        let mut acc = 0.0;
        for (n, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return n as u64;
            }
        }
        self.n_max() as u64
    }
}

/// Heralded PDC source: squared parametric gain and Alice's PNRD efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeraldedSourceParams {
    /// |λ|², the squared parametric gain magnitude, in `[0, 1)`.
    pub lambda_sq: f64,
    /// Alice's photon-number-resolving detector efficiency, in `[0, 1]`.
    pub eta_a: f64,
}

impl HeraldedSourceParams {
    pub fn new(lambda_sq: f64, eta_a: f64) -> Result<Self> {
        let src = HeraldedSourceParams { lambda_sq, eta_a };
        src.validate()?;
        Ok(src)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.lambda_sq) {
            return Err(Error::invalid(format!(
                "lambda_sq must lie in [0, 1), got {}",
                self.lambda_sq
            )));
        }
        if !(0.0..=1.0).contains(&self.eta_a) {
            return Err(Error::invalid(format!(
                "eta_a must lie in [0, 1], got {}",
                self.eta_a
            )));
        }
        Ok(())
    }
}

/// Weak coherent pulse: Poissonian photon number with mean `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WcpParams {
    /// Mean photon number per pulse, ≥ 0.
    pub mu: f64,
}

impl WcpParams {
    pub fn new(mu: f64) -> Result<Self> {
        let w = WcpParams { mu };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0) {
            return Err(Error::invalid(format!("mu must be ≥ 0, got {}", self.mu)));
        }
        Ok(())
    }
}

/// Photon-number law of the pulse Bob receives when Alice's PNRD registered
/// `k` photons:
///
/// P(k+m | k) = (1−x)^{k+1} C(k+m, k) x^m  with x = (1−η_a)·|λ|².
///
/// The mass below `k` is zero: a herald of `k` lower-bounds the photon
/// number. The series sums to exactly 1, so the cutoff extends until the
/// accounted mass leaves a tail below `TAIL_EPS`.
pub fn conditional_distribution(src: &HeraldedSourceParams, k: u32) -> Result<FockDistribution> {
    src.validate()?;
    let x = (1.0 - src.eta_a) * src.lambda_sq;
    if x >= 1.0 {
        return Err(Error::invalid(format!(
            "(1 - eta_a) * lambda_sq = {x} is not normalizable"
        )));
    }

    let k = k as usize;
    let mut probs = vec![0.0; k];
    // term(m) = (1-x)^{k+1} C(k+m, k) x^m, built by recurrence
    // term(m+1) = term(m) * x * (k+m+1)/(m+1).
    let mut term = (1.0 - x).powi(k as i32 + 1);
    let mut mass = 0.0;
    let mut m = 0usize;
    loop {
        probs.push(term);
        mass += term;
        if 1.0 - mass < TAIL_EPS {
            break;
        }
        term *= x * (k + m + 1) as f64 / (m + 1) as f64;
        m += 1;
    }
    FockDistribution::from_probs(probs)
}

/// Photon-number marginal of the two-mode squeezed state: the geometric law
/// p(n) = (1−|λ|²)·|λ|^{2n}, with mean |λ|²/(1−|λ|²).
pub fn pdc_joint_distribution(lambda_sq: f64) -> Result<FockDistribution> {
    if !(0.0..1.0).contains(&lambda_sq) {
        return Err(Error::invalid(format!(
            "lambda_sq must lie in [0, 1), got {lambda_sq}"
        )));
    }
    let mut probs = Vec::new();
    let mut term = 1.0 - lambda_sq;
    let mut mass = 0.0;
    loop {
        probs.push(term);
        mass += term;
        if 1.0 - mass < TAIL_EPS {
            break;
        }
        term *= lambda_sq;
    }
    FockDistribution::from_probs(probs)
}

/// Poisson photon-number law of a weak coherent pulse.
pub fn wcp_distribution(w: &WcpParams) -> Result<FockDistribution> {
    w.validate()?;
    let mu = w.mu;
    let mut probs = Vec::new();
    let mut term = (-mu).exp();
    let mut mass = 0.0;
    let mut n = 0usize;
    loop {
        probs.push(term);
        mass += term;
        if 1.0 - mass < TAIL_EPS {
            break;
        }
        n += 1;
        term *= mu / n as f64;
    }
    FockDistribution::from_probs(probs)
}

/// Draw a photon number from `d` using the caller's stream.
pub fn sample_fock(d: &FockDistribution, rng: &mut RngStream) -> u64 {
    d.sample(rng)
}
