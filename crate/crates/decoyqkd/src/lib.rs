//! Pulse-level simulator and numerical toolkit for quantum key
//! distribution with photon-number decoy states.
//!
//! The crate models a heralded parametric-downconversion source whose
//! herald count tags each pulse's photon number, sends pulses through a
//! lossy or adversarial channel, and detects them with a binary
//! single-photon detector. On top of the pulse layer it provides:
//!
//! - per-herald transmittivity estimation and a photon-number-splitting
//!   attack test ([`estimation`]),
//! - Hong-Ou-Mandel interference calibration for matching the heralded
//!   and weak-coherent-pulse wavepackets ([`hom`]),
//! - the figure of merit D = p_B(1) − p_B(>1) and the optimal weak-pulse
//!   intensity ([`mu_opt`]),
//! - a deterministic, parallel Monte Carlo session runner with JSON/CSV
//!   reporting ([`session`], [`report`]).

pub mod channel;
pub mod detector;
pub mod error;
pub mod estimation;
pub mod fock;
pub mod hom;
pub mod mu_opt;
pub mod report;
pub mod rng;
pub mod search;
pub mod session;
pub mod stats;

pub use channel::{fock_transmittivity, loss_ratio_identity, sample_arrival, ChannelScenario};
pub use detector::{pnrd_povm_prob, pnrd_sample, spd_click, SpdParams};
pub use error::{Error, Result};
pub use estimation::{
    click_prob_given_sent, detect_pns, estimate_transmittivity, expected_click_prob,
    invert_to_eta, ClickLedger, DetectionVerdict, TagCounts, TransmittivityEstimate,
};
pub use fock::{
    conditional_distribution, pdc_joint_distribution, sample_fock, wcp_distribution,
    FockDistribution, HeraldedSourceParams, WcpParams,
};
pub use hom::{
    calibrate, coincidence_rate, coincidence_rate_degraded, noisy_calibrate,
    noisy_calibrate_adjust, visibility, Adjustable, CalibrationOutcome, CalibrationStep, HomParams,
};
pub use mu_opt::{merit, mu_curve, optimal_mu, CurveFamily, CurvePoint, MeritInputs, MuOptimum};
pub use report::{calibration_csv, curve_csv, emit_report, json_string, ReportFormat};
pub use rng::RngStream;
pub use session::{
    run_session, sample_records, throughput, Origin, PulseRecord, Scheme, SessionConfig,
    SessionReport, Throughput,
};
pub use stats::{inverse_normal_cdf, wilson_interval};
