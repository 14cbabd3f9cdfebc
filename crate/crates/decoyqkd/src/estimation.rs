//! Channel-efficiency estimation from herald-tagged click counts, and the
//! attack decision built on it.
//!
//! Alice tags decoy pulses with the herald count k and records Bob's
//! clicks per tag. Each tag's click rate pins down the channel efficiency
//! through a monotone forward model; disagreement between the k = 1 and
//! k = 2 inversions is the attack signature.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelScenario;
use crate::detector::SpdParams;
use crate::error::{Error, Result};
use crate::fock::{conditional_distribution, HeraldedSourceParams};
use crate::search::bisect;
use crate::stats::wilson_interval;

/// Counts for one herald tag.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagCounts {
    pub sent: u64,
    pub clicked: u64,
}

/// Per-tag pulse and click counts for the decoy stream.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClickLedger {
    rows: BTreeMap<u32, TagCounts>,
}

impl ClickLedger {
    pub fn new() -> Self {
        ClickLedger::default()
    }

    /// Record one sent pulse with tag `k` and whether it produced a click.
    pub fn record(&mut self, k: u32, clicked: bool) {
        let row = self.rows.entry(k).or_default();
        row.sent += 1;
        if clicked {
            row.clicked += 1;
        }
    }

    /// Add a pre-aggregated row. Rejects clicked > sent.
    pub fn add_counts(&mut self, k: u32, counts: TagCounts) -> Result<()> {
        if counts.clicked > counts.sent {
            return Err(Error::invalid(format!(
                "tag {k}: clicked {} exceeds sent {}",
                counts.clicked, counts.sent
            )));
        }
        let row = self.rows.entry(k).or_default();
        row.sent += counts.sent;
        row.clicked += counts.clicked;
        Ok(())
    }

    /// Merge another ledger into this one (associative, commutative).
    pub fn merge(&mut self, other: &ClickLedger) {
        for (&k, &counts) in &other.rows {
            let row = self.rows.entry(k).or_default();
            row.sent += counts.sent;
            row.clicked += counts.clicked;
        }
    }

    pub fn counts(&self, k: u32) -> TagCounts {
        self.rows.get(&k).copied().unwrap_or_default()
    }

    pub fn tags(&self) -> impl Iterator<Item = (u32, TagCounts)> + '_ {
        self.rows.iter().map(|(&k, &c)| (k, c))
    }

    /// CSV with the fixed header `tag,sent,clicked`, rows ordered by tag.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tag,sent,clicked\n");
        for (&k, &c) in &self.rows {
            let _ = writeln!(out, "{},{},{}", k, c.sent, c.clicked);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<ClickLedger> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::invalid("empty ledger CSV"))?;
        if header.trim() != "tag,sent,clicked" {
            return Err(Error::invalid(format!(
                "ledger CSV header must be `tag,sent,clicked`, got `{header}`"
            )));
        }
        let mut ledger = ClickLedger::new();
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != 3 {
                return Err(Error::invalid(format!(
                    "ledger CSV row {}: expected 3 fields, got {}",
                    i + 2,
                    fields.len()
                )));
            }
            let parse = |name: &str, s: &str| -> Result<u64> {
                s.trim().parse::<u64>().map_err(|_| {
                    Error::invalid(format!("ledger CSV row {}: bad {name} `{s}`", i + 2))
                })
            };
            let tag = parse("tag", fields[0])? as u32;
            let sent = parse("sent", fields[1])?;
            let clicked = parse("clicked", fields[2])?;
            ledger.add_counts(tag, TagCounts { sent, clicked })?;
        }
        Ok(ledger)
    }
}

/// Click-rate estimate for one tag, with the induced channel-efficiency
/// interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmittivityEstimate {
    pub k: u32,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub eta_low: f64,
    pub eta_high: f64,
}

/// Outcome of comparing the k = 1 and k = 2 efficiency intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionVerdict {
    pub attack_detected: bool,
    pub eta1_interval: (f64, f64),
    pub eta2_interval: (f64, f64),
    pub alpha: f64,
}

/// Click probability at Bob given `n` photons left Alice, marginalized over
/// the channel. Closed forms:
///
/// loss:   1 − (1−dark)·(1−η_c·η_b)^n
/// attack: n=1 → 1 − (1−dark)·(1−κ₁·η_b)
///         n≥2 → 1 − (1−dark)·(1−κ_m + κ_m·(1−η_b)^{n−1})
pub fn click_prob_given_sent(c: &ChannelScenario, spd: &SpdParams, n: u64) -> f64 {
    let survive = 1.0 - spd.dark_prob;
    match *c {
        ChannelScenario::LossOnly { eta_c } => {
            1.0 - survive * (1.0 - eta_c * spd.eta_b).powi(n as i32)
        }
        ChannelScenario::PnsAttack { kappa_1, kappa_m } => match n {
            0 => spd.dark_prob,
            1 => 1.0 - survive * (1.0 - kappa_1 * spd.eta_b),
            _ => {
                let miss = 1.0 - kappa_m + kappa_m * (1.0 - spd.eta_b).powi(n as i32 - 1);
                1.0 - survive * miss
            }
        },
    }
}

/// Expected click probability for a herald-k decoy pulse:
/// Q_k = Σ_n P(n|k) · P(click | n sent).
pub fn expected_click_prob(
    src: &HeraldedSourceParams,
    k: u32,
    c: &ChannelScenario,
    spd: &SpdParams,
) -> Result<f64> {
    c.validate()?;
    spd.validate()?;
    let dist = conditional_distribution(src, k)?;
    let q = dist
        .probs()
        .iter()
        .enumerate()
        .map(|(n, &p)| p * click_prob_given_sent(c, spd, n as u64))
        .sum::<f64>();
    Ok(q.clamp(0.0, 1.0))
}

fn q_of_eta(src: &HeraldedSourceParams, k: u32, spd: &SpdParams, eta_c: f64) -> Result<f64> {
    expected_click_prob(src, k, &ChannelScenario::LossOnly { eta_c }, spd)
}

/// Invert the loss-only forward model: find the η_c whose expected click
/// probability equals `observed_rate`. Bisection to |Δη| < 1e-10; Q_k is
/// strictly increasing in η_c whenever η_b > 0 and dark_prob < 1.
pub fn invert_to_eta(
    src: &HeraldedSourceParams,
    k: u32,
    spd: &SpdParams,
    observed_rate: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&observed_rate) {
        return Err(Error::invalid(format!(
            "observed_rate must lie in [0, 1], got {observed_rate}"
        )));
    }
    let q0 = q_of_eta(src, k, spd, 0.0)?;
    let q1 = q_of_eta(src, k, spd, 1.0)?;
    if q1 - q0 < 1e-15 {
        return Err(Error::invalid(
            "click probability does not depend on the channel; cannot invert".to_string(),
        ));
    }
    if observed_rate < q0 || observed_rate > q1 {
        return Err(Error::OutOfRange { observed: observed_rate, lo: q0, hi: q1 });
    }
    if observed_rate == q0 {
        return Ok(0.0);
    }
    if observed_rate == q1 {
        return Ok(1.0);
    }
    bisect(
        |eta| q_of_eta(src, k, spd, eta).expect("params validated") - observed_rate,
        0.0,
        1.0,
        1e-10,
    )
}

/// Wilson interval on the tag's click probability, mapped through the
/// monotone inversion onto channel efficiency. Rates outside the model's
/// reachable band clamp to its edges.
pub fn estimate_transmittivity(
    ledger: &ClickLedger,
    k: u32,
    src: &HeraldedSourceParams,
    spd: &SpdParams,
    alpha: f64,
) -> Result<TransmittivityEstimate> {
    let counts = ledger.counts(k);
    if counts.sent == 0 {
        return Err(Error::InsufficientData(format!(
            "no pulses recorded for herald tag {k}"
        )));
    }
    let (ci_low, ci_high) = wilson_interval(counts.clicked, counts.sent, alpha)?;
    let q0 = q_of_eta(src, k, spd, 0.0)?;
    let q1 = q_of_eta(src, k, spd, 1.0)?;
    let to_eta = |rate: f64| -> Result<f64> {
        invert_to_eta(src, k, spd, rate.clamp(q0, q1))
    };
    Ok(TransmittivityEstimate {
        k,
        rate: counts.clicked as f64 / counts.sent as f64,
        ci_low,
        ci_high,
        eta_low: to_eta(ci_low)?,
        eta_high: to_eta(ci_high)?,
    })
}

/// Compare the efficiency intervals induced by the k = 1 and k = 2 tags.
/// Disjoint intervals mean the channel treats one- and two-photon pulses
/// inconsistently with any pure-loss model: an attack.
pub fn detect_pns(
    ledger: &ClickLedger,
    src: &HeraldedSourceParams,
    spd: &SpdParams,
    alpha: f64,
) -> Result<DetectionVerdict> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 0.5), got {alpha}"
        )));
    }
    let e1 = estimate_transmittivity(ledger, 1, src, spd, alpha)?;
    let e2 = estimate_transmittivity(ledger, 2, src, spd, alpha)?;
    let disjoint = e1.eta_high < e2.eta_low || e2.eta_high < e1.eta_low;
    Ok(DetectionVerdict {
        attack_detected: disjoint,
        eta1_interval: (e1.eta_low, e1.eta_high),
        eta2_interval: (e2.eta_low, e2.eta_high),
        alpha,
    })
}
