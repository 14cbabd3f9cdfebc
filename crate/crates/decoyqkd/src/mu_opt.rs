//! The figure of merit D = p_B(1) − p_B(>1) and the optimal weak-pulse
//! intensity under each channel scenario.
//!
//! p_B(1) is the probability a pulse leaves as exactly one photon and that
//! photon arrives; p_B(>1) is the probability it leaves multiphoton and
//! arrives non-vacuum. Maximizing their difference favors intensities
//! whose detected light is mostly single photons.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{fock_transmittivity, ChannelScenario};
use crate::error::{Error, Result};
use crate::fock::{wcp_distribution, WcpParams};
use crate::search::golden_section_max;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeritInputs {
    pub mu: f64,
    pub scenario: ChannelScenario,
}

/// D = Pois(1; μ)·T(1) − Σ_{n≥2} Pois(n; μ)·T(n), with the Poisson series
/// truncated at a tail below 1e-12.
pub fn merit(m: &MeritInputs) -> Result<f64> {
    m.scenario.validate()?;
    let dist = wcp_distribution(&WcpParams { mu: m.mu })?;
    Ok(merit_from_dist(dist.probs(), &m.scenario))
}

fn merit_from_dist(probs: &[f64], scenario: &ChannelScenario) -> f64 {
    let mut d = 0.0;
    for (n, &p) in probs.iter().enumerate().skip(1) {
        let t = p * fock_transmittivity(scenario, n as u64);
        if n == 1 {
            d += t;
        } else {
            d -= t;
        }
    }
    d
}

/// Result of the intensity search. `degenerate` marks scenarios where no
/// positive intensity achieves D > 0, in which case `mu_star` is 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuOptimum {
    pub mu_star: f64,
    pub d_star: f64,
    pub degenerate: bool,
}

const MU_HI: f64 = 2.0;
const SCAN_POINTS: usize = 2000;

/// Maximize D over μ ∈ [0, 2].
///
/// A pre-scan (2000 linear points plus a geometric ladder near zero, to
/// catch optima at tiny intensity) verifies the rise-then-fall shape that
/// golden-section search requires; a scan that is not unimodal aborts
/// rather than risk returning a local optimum. When the scan never sees
/// D > 0 the search is degenerate: sending nothing beats any intensity.
pub fn optimal_mu(scenario: &ChannelScenario) -> Result<MuOptimum> {
    scenario.validate()?;
    let d_of = |mu: f64| {
        let dist = wcp_distribution(&WcpParams { mu }).expect("mu in [0, 2] is valid");
        merit_from_dist(dist.probs(), scenario)
    };

    let mut grid: Vec<f64> = (0..=9).map(|j| 1e-9 * 10f64.powi(j) / 2.0).collect();
    grid.extend((0..=SCAN_POINTS).map(|i| MU_HI * i as f64 / SCAN_POINTS as f64));
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let values: Vec<f64> = grid.iter().map(|&mu| d_of(mu)).collect();

    // Rise-then-fall check with a dead band for flat stretches.
    const TOL: f64 = 1e-12;
    let mut rising = true;
    for w in values.windows(2) {
        let diff = w[1] - w[0];
        if rising {
            if diff < -TOL {
                rising = false;
            }
        } else if diff > TOL {
            return Err(Error::NonConvergence(
                "merit scan is not unimodal over [0, 2]; refusing to optimize".to_string(),
            ));
        }
    }

    let scan_max = values
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if scan_max <= 0.0 {
        return Ok(MuOptimum { mu_star: 0.0, d_star: 0.0, degenerate: true });
    }

    let (mu_star, d_star) = golden_section_max(d_of, 0.0, MU_HI, 1e-7)?;
    Ok(MuOptimum { mu_star, d_star, degenerate: false })
}

/// Parameter families for the optimal-intensity curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveFamily {
    /// Grid over the channel efficiency η_c of a pure-loss channel.
    Loss,
    /// Grid over the ratio κ₁/κ_m at fixed multiphoton transmittivity.
    AttackRatio { kappa_m: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub param: f64,
    pub mu_star: f64,
    pub d_star: f64,
    pub degenerate: bool,
}

/// Evaluate the optimal intensity across a parameter grid. Points are
/// independent; evaluation is parallel with deterministic output order.
pub fn mu_curve(family: &CurveFamily, grid: &[f64]) -> Result<Vec<CurvePoint>> {
    if grid.is_empty() {
        return Err(Error::invalid("curve grid must be non-empty"));
    }
    if let CurveFamily::AttackRatio { kappa_m } = family {
        if !(0.0..=1.0).contains(kappa_m) {
            return Err(Error::invalid(format!(
                "kappa_m must lie in [0, 1], got {kappa_m}"
            )));
        }
    }
    for &p in grid {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!(
                "curve grid values must lie in [0, 1], got {p}"
            )));
        }
    }
    grid.par_iter()
        .map(|&param| {
            let scenario = match *family {
                CurveFamily::Loss => ChannelScenario::LossOnly { eta_c: param },
                CurveFamily::AttackRatio { kappa_m } => ChannelScenario::PnsAttack {
                    kappa_1: param * kappa_m,
                    kappa_m,
                },
            };
            let opt = optimal_mu(&scenario)?;
            Ok(CurvePoint {
                param,
                mu_star: opt.mu_star,
                d_star: opt.d_star,
                degenerate: opt.degenerate,
            })
        })
        .collect()
}
