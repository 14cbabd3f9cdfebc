//! End-to-end Monte Carlo session runner for the two transmitter schemes:
//! an all-heralded source (`hsps`) and a fast weak-pulse transmitter that
//! interleaves heralded decoys (`hybrid`).
//!
//! Pulses are simulated in fixed blocks of 65536, each block drawing from
//! its own `(seed, "session", block)` stream, so the report is
//! bit-identical no matter how blocks are scheduled across workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{sample_arrival, ChannelScenario};
use crate::detector::{pnrd_sample, spd_click, SpdParams};
use crate::error::{Error, Result};
use crate::estimation::{
    detect_pns, expected_click_prob, invert_to_eta, ClickLedger, DetectionVerdict,
};
use crate::fock::{
    pdc_joint_distribution, wcp_distribution, FockDistribution, HeraldedSourceParams, WcpParams,
};
use crate::mu_opt::optimal_mu;
use crate::rng::RngStream;

/// Pulses per RNG block; the unit of deterministic parallelism.
pub const BLOCK_PULSES: u64 = 65536;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Hsps,
    Hybrid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionConfig {
    pub scheme: Scheme,
    pub pulses: u64,
    pub src: HeraldedSourceParams,
    /// Weak-pulse intensity; hybrid scheme only.
    pub wcp: Option<WcpParams>,
    /// Probability a hybrid pulse is routed to the decoy path.
    pub decoy_fraction: Option<f64>,
    pub scenario: ChannelScenario,
    pub spd: SpdParams,
    pub alpha: f64,
    pub seed: u64,
    pub dead_time_ns: f64,
    pub wcp_clock_hz: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    kind: String,
    eta_c: Option<f64>,
    kappa_1: Option<f64>,
    kappa_m: Option<f64>,
}

impl RawScenario {
    fn build(self) -> Result<ChannelScenario> {
        match self.kind.as_str() {
            "loss_only" => {
                if self.kappa_1.is_some() || self.kappa_m.is_some() {
                    return Err(Error::Config(
                        "loss_only scenario takes eta_c only".to_string(),
                    ));
                }
                let eta_c = self
                    .eta_c
                    .ok_or_else(|| Error::Config("loss_only scenario requires eta_c".to_string()))?;
                Ok(ChannelScenario::LossOnly { eta_c })
            }
            "pns_attack" => {
                if self.eta_c.is_some() {
                    return Err(Error::Config(
                        "pns_attack scenario takes kappa_1 and kappa_m only".to_string(),
                    ));
                }
                let kappa_1 = self.kappa_1.ok_or_else(|| {
                    Error::Config("pns_attack scenario requires kappa_1".to_string())
                })?;
                let kappa_m = self.kappa_m.ok_or_else(|| {
                    Error::Config("pns_attack scenario requires kappa_m".to_string())
                })?;
                Ok(ChannelScenario::PnsAttack { kappa_1, kappa_m })
            }
            other => Err(Error::Config(format!(
                "unknown scenario kind `{other}` (expected loss_only or pns_attack)"
            ))),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scheme: String,
    pulses: u64,
    alpha: f64,
    seed: u64,
    dead_time_ns: f64,
    wcp_clock_hz: f64,
    decoy_fraction: Option<f64>,
    src: HeraldedSourceParams,
    wcp: Option<WcpParams>,
    scenario: RawScenario,
    spd: SpdParams,
}

impl SessionConfig {
    /// Parse and validate a TOML config. Unknown keys are an error.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        let scheme = match raw.scheme.as_str() {
            "hsps" => Scheme::Hsps,
            "hybrid" => Scheme::Hybrid,
            other => {
                return Err(Error::Config(format!(
                    "unknown scheme `{other}` (expected hsps or hybrid)"
                )))
            }
        };
        let cfg = SessionConfig {
            scheme,
            pulses: raw.pulses,
            src: raw.src,
            wcp: raw.wcp,
            decoy_fraction: raw.decoy_fraction,
            scenario: raw.scenario.build()?,
            spd: raw.spd,
            alpha: raw.alpha,
            seed: raw.seed,
            dead_time_ns: raw.dead_time_ns,
            wcp_clock_hz: raw.wcp_clock_hz,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pulses == 0 {
            return Err(Error::invalid("pulses must be positive"));
        }
        self.src.validate()?;
        self.scenario.validate()?;
        self.spd.validate()?;
        if self.spd.eta_b <= 0.0 {
            return Err(Error::invalid(
                "eta_b must be positive: a blind detector cannot estimate the channel",
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::invalid(format!(
                "alpha must lie in (0, 0.5), got {}",
                self.alpha
            )));
        }
        if !(self.dead_time_ns >= 0.0 && self.dead_time_ns.is_finite()) {
            return Err(Error::invalid(format!(
                "dead_time_ns must be finite and ≥ 0, got {}",
                self.dead_time_ns
            )));
        }
        if !(self.wcp_clock_hz > 0.0 && self.wcp_clock_hz.is_finite()) {
            return Err(Error::invalid(format!(
                "wcp_clock_hz must be finite and positive, got {}",
                self.wcp_clock_hz
            )));
        }
        match self.scheme {
            Scheme::Hsps => {
                if self.wcp.is_some() || self.decoy_fraction.is_some() {
                    return Err(Error::invalid(
                        "wcp and decoy_fraction apply to the hybrid scheme only",
                    ));
                }
            }
            Scheme::Hybrid => {
                let wcp = self
                    .wcp
                    .ok_or_else(|| Error::invalid("hybrid scheme requires a wcp section"))?;
                wcp.validate()?;
                let f = self
                    .decoy_fraction
                    .ok_or_else(|| Error::invalid("hybrid scheme requires decoy_fraction"))?;
                if !(0.0..=1.0).contains(&f) {
                    return Err(Error::invalid(format!(
                        "decoy_fraction must lie in [0, 1], got {f}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Decoy,
    Wcp,
}

/// Full per-pulse audit record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PulseRecord {
    pub index: u64,
    pub origin: Origin,
    pub herald_k: Option<u64>,
    pub n_sent: u64,
    pub n_arrived: u64,
    pub bob_click: bool,
    /// Click survived basis sifting and the pulse belongs to the key
    /// stream (single-photon heralds for hsps, weak pulses for hybrid).
    pub sifted: bool,
}

/// Clock rates implied by the detector dead time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Throughput {
    pub effective_clock_hz: f64,
    /// Largest decoy fraction the heralded stream can sustain at the full
    /// weak-pulse clock; hybrid scheme only.
    pub max_decoy_fraction: Option<f64>,
}

/// Effective clock accounting. The heralded stream is limited to one pulse
/// per dead time; the weak-pulse stream runs at its own clock.
pub fn throughput(cfg: &SessionConfig) -> Result<Throughput> {
    cfg.validate()?;
    match cfg.scheme {
        Scheme::Hsps => {
            if cfg.dead_time_ns == 0.0 {
                return Err(Error::invalid(
                    "hsps scheme requires a positive dead_time_ns",
                ));
            }
            Ok(Throughput {
                effective_clock_hz: 1e9 / cfg.dead_time_ns,
                max_decoy_fraction: None,
            })
        }
        Scheme::Hybrid => {
            let max_fraction = if cfg.dead_time_ns == 0.0 {
                1.0
            } else {
                ((1e9 / cfg.dead_time_ns) / cfg.wcp_clock_hz).min(1.0)
            };
            Ok(Throughput {
                effective_clock_hz: cfg.wcp_clock_hz,
                max_decoy_fraction: Some(max_fraction),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub scheme: Scheme,
    pub pulses: u64,
    pub decoy_pulses: u64,
    pub wcp_pulses: u64,
    pub ledger: ClickLedger,
    /// True when the decoy ledger cannot support a verdict.
    pub insufficient_data: bool,
    pub verdict: Option<DetectionVerdict>,
    pub wcp_click_rate: Option<f64>,
    pub sifted_key_count: u64,
    pub effective_clock_hz: f64,
    pub max_decoy_fraction: Option<f64>,
    /// Optimal weak-pulse intensity for a loss-only channel at the
    /// efficiency inferred from the single-photon tag.
    pub mu_recommended: Option<f64>,
}

struct SimContext {
    pdc: FockDistribution,
    wcp: Option<FockDistribution>,
}

impl SimContext {
    fn new(cfg: &SessionConfig) -> Result<Self> {
        Ok(SimContext {
            pdc: pdc_joint_distribution(cfg.src.lambda_sq)?,
            wcp: match cfg.wcp {
                Some(w) => Some(wcp_distribution(&w)?),
                None => None,
            },
        })
    }
}

fn simulate_pulse(
    cfg: &SessionConfig,
    ctx: &SimContext,
    index: u64,
    rng: &mut RngStream,
) -> PulseRecord {
    let origin = match cfg.scheme {
        Scheme::Hsps => Origin::Decoy,
        Scheme::Hybrid => {
            if rng.bernoulli(cfg.decoy_fraction.expect("validated")) {
                Origin::Decoy
            } else {
                Origin::Wcp
            }
        }
    };
    let (herald_k, n_sent) = match origin {
        Origin::Decoy => {
            let n = ctx.pdc.sample(rng);
            let k = pnrd_sample(n, cfg.src.eta_a, rng);
            (Some(k), n)
        }
        Origin::Wcp => {
            let n = ctx.wcp.as_ref().expect("validated").sample(rng);
            (None, n)
        }
    };
    let n_arrived = sample_arrival(&cfg.scenario, n_sent, rng);
    let bob_click = spd_click(n_arrived, &cfg.spd, rng);
    // Basis agreement: a coin per click. Only the key stream contributes
    // sifted bits: single-photon heralds for hsps, weak pulses for hybrid.
    let basis_agrees = bob_click && rng.bernoulli(0.5);
    let is_key = match cfg.scheme {
        Scheme::Hsps => herald_k == Some(1),
        Scheme::Hybrid => origin == Origin::Wcp,
    };
    let sifted = basis_agrees && is_key;
    PulseRecord { index, origin, herald_k, n_sent, n_arrived, bob_click, sifted }
}

#[derive(Default)]
struct BlockStats {
    ledger: ClickLedger,
    decoy_pulses: u64,
    wcp_pulses: u64,
    wcp_clicked: u64,
    sifted_key: u64,
}

impl BlockStats {
    fn absorb(&mut self, rec: &PulseRecord) {
        match rec.origin {
            Origin::Decoy => {
                self.decoy_pulses += 1;
                if let Some(k @ (1 | 2)) = rec.herald_k {
                    self.ledger.record(k as u32, rec.bob_click);
                }
            }
            Origin::Wcp => {
                self.wcp_pulses += 1;
                if rec.bob_click {
                    self.wcp_clicked += 1;
                }
            }
        }
        if rec.sifted {
            self.sifted_key += 1;
        }
    }

    fn merge(&mut self, other: BlockStats) {
        self.ledger.merge(&other.ledger);
        self.decoy_pulses += other.decoy_pulses;
        self.wcp_pulses += other.wcp_pulses;
        self.wcp_clicked += other.wcp_clicked;
        self.sifted_key += other.sifted_key;
    }
}

fn simulate_block(cfg: &SessionConfig, ctx: &SimContext, block: u64) -> BlockStats {
    let mut rng = RngStream::new(cfg.seed, "session", block);
    let start = block * BLOCK_PULSES;
    let end = (start + BLOCK_PULSES).min(cfg.pulses);
    let mut stats = BlockStats::default();
    for index in start..end {
        let rec = simulate_pulse(cfg, ctx, index, &mut rng);
        stats.absorb(&rec);
    }
    stats
}

/// Run a full session. Deterministic in `cfg` (seed included) regardless
/// of how many workers execute the blocks.
pub fn run_session(cfg: &SessionConfig) -> Result<SessionReport> {
    cfg.validate()?;
    let ctx = SimContext::new(cfg)?;
    let n_blocks = cfg.pulses.div_ceil(BLOCK_PULSES);
    let partials: Vec<BlockStats> = (0..n_blocks)
        .into_par_iter()
        .map(|b| simulate_block(cfg, &ctx, b))
        .collect();
    let mut stats = BlockStats::default();
    for p in partials {
        stats.merge(p);
    }

    let (verdict, insufficient_data) = match detect_pns(&stats.ledger, &cfg.src, &cfg.spd, cfg.alpha)
    {
        Ok(v) => (Some(v), false),
        Err(Error::InsufficientData(_)) => (None, true),
        Err(e) => return Err(e),
    };

    let mu_recommended = recommend_mu(cfg, &stats.ledger)?;
    let thr = throughput(cfg)?;

    Ok(SessionReport {
        scheme: cfg.scheme,
        pulses: cfg.pulses,
        decoy_pulses: stats.decoy_pulses,
        wcp_pulses: stats.wcp_pulses,
        ledger: stats.ledger,
        insufficient_data,
        verdict,
        wcp_click_rate: if stats.wcp_pulses > 0 {
            Some(stats.wcp_clicked as f64 / stats.wcp_pulses as f64)
        } else {
            None
        },
        sifted_key_count: stats.sifted_key,
        effective_clock_hz: thr.effective_clock_hz,
        max_decoy_fraction: thr.max_decoy_fraction,
        mu_recommended,
    })
}

/// Optimal intensity for a loss-only channel at the efficiency implied by
/// the single-photon tag's observed click rate.
fn recommend_mu(cfg: &SessionConfig, ledger: &ClickLedger) -> Result<Option<f64>> {
    let counts = ledger.counts(1);
    if counts.sent == 0 {
        return Ok(None);
    }
    let rate = counts.clicked as f64 / counts.sent as f64;
    let q0 = expected_click_prob(&cfg.src, 1, &ChannelScenario::LossOnly { eta_c: 0.0 }, &cfg.spd)?;
    let q1 = expected_click_prob(&cfg.src, 1, &ChannelScenario::LossOnly { eta_c: 1.0 }, &cfg.spd)?;
    let eta = invert_to_eta(&cfg.src, 1, &cfg.spd, rate.clamp(q0, q1))?;
    let opt = optimal_mu(&ChannelScenario::LossOnly { eta_c: eta })?;
    Ok(Some(opt.mu_star))
}

/// Replay the audit records for pulse indices `[first, first + count)`.
/// Reproduces exactly what [`run_session`] drew for those pulses.
pub fn sample_records(cfg: &SessionConfig, first: u64, count: u64) -> Result<Vec<PulseRecord>> {
    cfg.validate()?;
    if first.checked_add(count).is_none_or(|end| end > cfg.pulses) {
        return Err(Error::invalid(format!(
            "record window [{first}, {first}+{count}) exceeds pulses {}",
            cfg.pulses
        )));
    }
    let ctx = SimContext::new(cfg)?;
    let mut out = Vec::with_capacity(count as usize);
    let last = first + count;
    let first_block = first / BLOCK_PULSES;
    let last_block = (last.saturating_sub(1)) / BLOCK_PULSES;
    for block in first_block..=last_block {
        let mut rng = RngStream::new(cfg.seed, "session", block);
        let start = block * BLOCK_PULSES;
        let end = (start + BLOCK_PULSES).min(cfg.pulses);
        for index in start..end {
            let rec = simulate_pulse(cfg, &ctx, index, &mut rng);
            if index >= first && index < last {
                out.push(rec);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(super) fn hsps_config() -> SessionConfig {
        SessionConfig {
            scheme: Scheme::Hsps,
            pulses: 200_000,
            src: HeraldedSourceParams { lambda_sq: 0.25, eta_a: 1.0 },
            wcp: None,
            decoy_fraction: None,
            scenario: ChannelScenario::LossOnly { eta_c: 0.1 },
            spd: SpdParams::IDEAL,
            alpha: 0.01,
            seed: 7,
            dead_time_ns: 50.0,
            wcp_clock_hz: 1e10,
        }
    }

    fn hybrid_config() -> SessionConfig {
        SessionConfig {
            scheme: Scheme::Hybrid,
            pulses: 200_000,
            wcp: Some(WcpParams { mu: 0.5 }),
            decoy_fraction: Some(0.3),
            ..hsps_config()
        }
    }

    #[test]
    fn toml_round_trip_and_validation() {
        let text = r#"
scheme = "hybrid"
pulses = 1000
alpha = 0.01
seed = 42
dead_time_ns = 50.0
wcp_clock_hz = 1e10
decoy_fraction = 0.1

[src]
lambda_sq = 0.25
eta_a = 0.8

[wcp]
mu = 0.5

[scenario]
kind = "loss_only"
eta_c = 0.1

[spd]
eta_b = 1.0
dark_prob = 0.0
"#;
        let cfg = SessionConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.scheme, Scheme::Hybrid);
        assert_eq!(cfg.pulses, 1000);
        assert_eq!(cfg.scenario, ChannelScenario::LossOnly { eta_c: 0.1 });
        assert_eq!(cfg.wcp, Some(WcpParams { mu: 0.5 }));
    }

    #[test]
    fn toml_rejects_unknown_and_inconsistent_keys() {
        let base = r#"
scheme = "hsps"
pulses = 1000
alpha = 0.01
seed = 42
dead_time_ns = 50.0
wcp_clock_hz = 1e10

[src]
lambda_sq = 0.25
eta_a = 0.8

[scenario]
kind = "loss_only"
eta_c = 0.1

[spd]
eta_b = 1.0
dark_prob = 0.0
"#;
        assert!(SessionConfig::from_toml_str(base).is_ok());
        // Unknown top-level key.
        let bad = format!("{base}\nmystery = 1\n");
        assert!(SessionConfig::from_toml_str(&bad).is_err());
        // Unknown key inside a section.
        let bad = base.replace("eta_a = 0.8", "eta_a = 0.8\nextra = 2.0");
        assert!(SessionConfig::from_toml_str(&bad).is_err());
        // Scenario kind/field mismatch.
        let bad = base.replace("eta_c = 0.1", "kappa_1 = 0.1\nkappa_m = 0.9");
        assert!(SessionConfig::from_toml_str(&bad).is_err());
        // hsps with hybrid-only keys.
        let bad = format!("{base}\ndecoy_fraction = 0.5\n");
        assert!(SessionConfig::from_toml_str(&bad).is_err());
        // Missing wcp for hybrid.
        let bad = base.replace("scheme = \"hsps\"", "scheme = \"hybrid\"\ndecoy_fraction = 0.5");
        assert!(SessionConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn validate_catches_bad_fields() {
        let mut cfg = hsps_config();
        cfg.pulses = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = hsps_config();
        cfg.alpha = 0.5;
        assert!(cfg.validate().is_err());
        let mut cfg = hsps_config();
        cfg.spd.eta_b = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = hybrid_config();
        cfg.decoy_fraction = Some(1.5);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn throughput_anchors() {
        let cfg = hsps_config();
        let t = throughput(&cfg).unwrap();
        assert_eq!(t.effective_clock_hz, 2e7);
        assert_eq!(t.max_decoy_fraction, None);

        let cfg = hybrid_config();
        let t = throughput(&cfg).unwrap();
        assert_eq!(t.effective_clock_hz, 1e10);
        assert_eq!(t.max_decoy_fraction, Some(2e-3));

        let mut cfg = hsps_config();
        cfg.dead_time_ns = 0.0;
        assert!(throughput(&cfg).is_err());

        let mut cfg = hybrid_config();
        cfg.dead_time_ns = 0.0;
        assert_eq!(throughput(&cfg).unwrap().max_decoy_fraction, Some(1.0));
    }

    #[test]
    fn session_is_deterministic() {
        let cfg = hybrid_config();
        let a = run_session(&cfg).unwrap();
        let b = run_session(&cfg).unwrap();
        assert_eq!(a, b);
        let mut other = cfg.clone();
        other.seed = 8;
        let c = run_session(&other).unwrap();
        assert_ne!(a.ledger, c.ledger);
    }

    #[test]
    fn session_rates_match_forward_model() {
        let cfg = hsps_config();
        let report = run_session(&cfg).unwrap();
        assert_eq!(report.decoy_pulses, cfg.pulses);
        assert_eq!(report.wcp_pulses, 0);
        assert_eq!(report.wcp_click_rate, None);
        assert!(!report.insufficient_data);
        let v = report.verdict.unwrap();
        assert!(!v.attack_detected);
        for (k, expect) in [(1u32, 0.1f64), (2, 0.19)] {
            let c = report.ledger.counts(k);
            assert!(c.sent > 0);
            let rate = c.clicked as f64 / c.sent as f64;
            let bound = 3.0 * (expect * (1.0 - expect) / c.sent as f64).sqrt();
            assert!((rate - expect).abs() < bound, "tag {k}: rate {rate}");
        }
        // Loss-only at eta_c = 0.1 recommends an intensity on the loss
        // curve, strictly inside (0.31, 0.5].
        let mu = report.mu_recommended.unwrap();
        assert!(mu > 0.31 && mu <= 0.5);
    }

    #[test]
    fn hybrid_splits_pulses_and_detects_attack() {
        let mut cfg = hybrid_config();
        cfg.scenario = ChannelScenario::PnsAttack { kappa_1: 0.01, kappa_m: 0.9 };
        cfg.pulses = 1_000_000;
        cfg.decoy_fraction = Some(0.1);
        let report = run_session(&cfg).unwrap();
        assert_eq!(report.decoy_pulses + report.wcp_pulses, cfg.pulses);
        assert!(report.verdict.unwrap().attack_detected);
        assert!(report.wcp_click_rate.is_some());
        assert!(report.sifted_key_count > 0);
    }

    #[test]
    fn single_pulse_session_flags_insufficient_data() {
        let mut cfg = hsps_config();
        cfg.pulses = 1;
        let report = run_session(&cfg).unwrap();
        assert!(report.insufficient_data);
        assert_eq!(report.verdict, None);
    }

    #[test]
    fn records_respect_channel_invariants() {
        let mut cfg = hybrid_config();
        cfg.pulses = 70_000; // spans two blocks
        let recs = sample_records(&cfg, 0, 70_000).unwrap();
        assert_eq!(recs.len(), 70_000);
        for r in &recs {
            assert_eq!(r.herald_k.is_some(), r.origin == Origin::Decoy);
            assert!(r.n_arrived <= r.n_sent);
            if let Some(k) = r.herald_k {
                assert!(k <= r.n_sent);
            }
            if r.sifted {
                assert!(r.bob_click);
            }
        }
        // Window replay agrees with the full replay.
        let window = sample_records(&cfg, 65_530, 20).unwrap();
        assert_eq!(&recs[65_530..65_550], window.as_slice());
        assert!(sample_records(&cfg, 69_000, 2_000).is_err());
    }

    #[test]
    fn attack_records_lose_exactly_one_photon() {
        let mut cfg = hsps_config();
        cfg.scenario = ChannelScenario::PnsAttack { kappa_1: 0.3, kappa_m: 0.8 };
        cfg.pulses = 50_000;
        for r in sample_records(&cfg, 0, 50_000).unwrap() {
            if r.n_sent >= 2 {
                assert!(r.n_arrived == 0 || r.n_arrived == r.n_sent - 1);
            } else {
                assert!(r.n_arrived <= r.n_sent);
            }
        }
    }
}
