//! Channel scenarios: pure loss and the block-and-boost PNS attack.
//!
//! Both scenarios reduce, for detection purposes, to a per-photon-number
//! transmittivity: the probability that a pulse carrying n photons arrives
//! non-vacuum. Loss gives 1 − (1−η_c)ⁿ; the attack substitutes κ₁ for
//! single photons and κ_m for all multiphoton pulses (κ₂ in some contexts;
//! the same quantity).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelScenario {
    /// Memoryless loss with single-photon efficiency `eta_c`.
    LossOnly { eta_c: f64 },
    /// Eve blocks single photons with probability 1−κ₁ and, for n ≥ 2,
    /// keeps one photon and forwards the rest losslessly with probability
    /// κ_m (the same value for every n ≥ 2).
    PnsAttack { kappa_1: f64, kappa_m: f64 },
}

impl ChannelScenario {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64| -> Result<()> {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {v}")));
            }
            Ok(())
        };
        match *self {
            ChannelScenario::LossOnly { eta_c } => check("eta_c", eta_c),
            ChannelScenario::PnsAttack { kappa_1, kappa_m } => {
                check("kappa_1", kappa_1)?;
                check("kappa_m", kappa_m)
            }
        }
    }

    /// An attack is effective when it pushes the single/multi transmittivity
    /// ratio below 0.5, a regime loss can never reach.
    pub fn is_effective_attack(&self) -> bool {
        match *self {
            ChannelScenario::LossOnly { .. } => false,
            ChannelScenario::PnsAttack { kappa_1, kappa_m } => {
                kappa_m > 0.0 && kappa_1 / kappa_m < 0.5
            }
        }
    }
}

/// Probability that an n-photon pulse arrives non-vacuum.
pub fn fock_transmittivity(c: &ChannelScenario, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    match *c {
        ChannelScenario::LossOnly { eta_c } => 1.0 - (1.0 - eta_c).powi(n as i32),
        ChannelScenario::PnsAttack { kappa_1, kappa_m } => {
            if n == 1 {
                kappa_1
            } else {
                kappa_m
            }
        }
    }
}

/// Ratio of one- to two-photon transmittivity under pure loss:
/// η⁽¹⁾/η⁽²⁾ = 1/(2−η_c), which spans [0.5, 1] as η_c spans [0, 1].
pub fn loss_ratio_identity(eta_c: f64) -> f64 {
    1.0 / (2.0 - eta_c)
}

/// Draw the arriving photon number for a pulse of `n_sent` photons.
///
/// Loss thins each photon independently. Under attack, a single photon
/// passes whole with probability κ₁; a multiphoton pulse loses exactly one
/// photon to Eve and the remainder is forwarded losslessly with
/// probability κ_m, otherwise blocked.
pub fn sample_arrival(c: &ChannelScenario, n_sent: u64, rng: &mut RngStream) -> u64 {
    if n_sent == 0 {
        return 0;
    }
    match *c {
        ChannelScenario::LossOnly { eta_c } => rng.binomial(n_sent, eta_c),
        ChannelScenario::PnsAttack { kappa_1, kappa_m } => {
            if n_sent == 1 {
                if rng.bernoulli(kappa_1) {
                    1
                } else {
                    0
                }
            } else if rng.bernoulli(kappa_m) {
                n_sent - 1
            } else {
                0
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_transmittivity_closed_form() {
        let c = ChannelScenario::LossOnly { eta_c: 0.1 };
        assert!((fock_transmittivity(&c, 2) - 0.19).abs() < 1e-12);
        assert_eq!(fock_transmittivity(&c, 0), 0.0);
        let ideal = ChannelScenario::LossOnly { eta_c: 1.0 };
        for n in 1..6 {
            assert_eq!(fock_transmittivity(&ideal, n), 1.0);
        }
    }

    #[test]
    fn attack_transmittivity_is_piecewise() {
        let c = ChannelScenario::PnsAttack { kappa_1: 0.0, kappa_m: 1.0 };
        assert_eq!(fock_transmittivity(&c, 1), 0.0);
        assert_eq!(fock_transmittivity(&c, 2), 1.0);
        assert_eq!(fock_transmittivity(&c, 7), 1.0);
        assert_eq!(fock_transmittivity(&c, 0), 0.0);
    }

    #[test]
    fn loss_is_monotone_in_photon_number() {
        for &eta_c in &[0.01, 0.1, 0.5, 0.9] {
            let c = ChannelScenario::LossOnly { eta_c };
            let mut prev = 0.0;
            for n in 0..20 {
                let t = fock_transmittivity(&c, n);
                assert!(t >= prev);
                prev = t;
            }
        }
    }

    #[test]
    fn two_photon_identity_and_high_loss_approximation() {
        for &eta_c in &[0.001, 0.01, 0.1, 0.5, 0.99] {
            let c = ChannelScenario::LossOnly { eta_c };
            let t1 = fock_transmittivity(&c, 1);
            let t2 = fock_transmittivity(&c, 2);
            assert!((t2 - (2.0 * t1 - t1 * t1)).abs() < 1e-12);
            // eta2 ≈ 2*eta_c holds to relative error eta_c/2 in the
            // high-loss regime.
            let rel = (t2 - 2.0 * eta_c).abs() / (2.0 * eta_c);
            assert!(rel <= eta_c / 2.0 + 1e-12, "rel {rel} at {eta_c}");
        }
    }

    #[test]
    fn ratio_identity_endpoints() {
        assert!((loss_ratio_identity(0.0) - 0.5).abs() < 1e-15);
        assert!((loss_ratio_identity(1.0) - 1.0).abs() < 1e-15);
        assert!((loss_ratio_identity(0.5) - 2.0 / 3.0).abs() < 1e-15);
        // Cross-check against the transmittivity ratio itself.
        for &eta_c in &[0.0, 0.25, 0.5, 0.75, 1.0] {
            let c = ChannelScenario::LossOnly { eta_c };
            let direct = if eta_c == 0.0 {
                0.5
            } else {
                fock_transmittivity(&c, 1) / fock_transmittivity(&c, 2)
            };
            assert!((loss_ratio_identity(eta_c) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn effective_attack_flag_tracks_ratio() {
        assert!(ChannelScenario::PnsAttack { kappa_1: 0.01, kappa_m: 0.9 }.is_effective_attack());
        assert!(!ChannelScenario::PnsAttack { kappa_1: 0.6, kappa_m: 0.9 }.is_effective_attack());
        assert!(!ChannelScenario::PnsAttack { kappa_1: 0.0, kappa_m: 0.0 }.is_effective_attack());
        assert!(!ChannelScenario::LossOnly { eta_c: 0.1 }.is_effective_attack());
    }

    #[test]
    fn validate_rejects_out_of_range() {
        assert!(ChannelScenario::LossOnly { eta_c: 1.2 }.validate().is_err());
        assert!(ChannelScenario::PnsAttack { kappa_1: -0.1, kappa_m: 0.5 }.validate().is_err());
        assert!(ChannelScenario::PnsAttack { kappa_1: 0.5, kappa_m: 1.1 }.validate().is_err());
        assert!(ChannelScenario::LossOnly { eta_c: 0.0 }.validate().is_ok());
    }

    #[test]
    fn lossless_channel_passes_everything() {
        let c = ChannelScenario::LossOnly { eta_c: 1.0 };
        let mut rng = RngStream::new(5, "channel", 0);
        for _ in 0..100 {
            assert_eq!(sample_arrival(&c, 5, &mut rng), 5);
        }
    }

    #[test]
    fn attack_forwards_all_but_one() {
        let c = ChannelScenario::PnsAttack { kappa_1: 0.0, kappa_m: 1.0 };
        let mut rng = RngStream::new(5, "channel", 1);
        for _ in 0..100 {
            assert_eq!(sample_arrival(&c, 3, &mut rng), 2);
            assert_eq!(sample_arrival(&c, 1, &mut rng), 0);
            assert_eq!(sample_arrival(&c, 0, &mut rng), 0);
        }
    }

    #[test]
    fn arrival_rate_matches_transmittivity() {
        // Per-photon Bernoulli survival is the independent oracle for the
        // closed form 1 − (1−η_c)ⁿ.
        let trials = 1_000_000u64;
        for (i, &eta_c) in [0.01, 0.1, 0.5].iter().enumerate() {
            let c = ChannelScenario::LossOnly { eta_c };
            for n in 1..=3u64 {
                let mut rng = RngStream::new(77, "channel", (i * 3 + n as usize) as u64);
                let mut hits = 0u64;
                for _ in 0..trials {
                    let mut survived = 0u64;
                    for _ in 0..n {
                        if rng.bernoulli(eta_c) {
                            survived += 1;
                        }
                    }
                    if survived > 0 {
                        hits += 1;
                    }
                }
                let p = fock_transmittivity(&c, n);
                let bound = 3.0 * (p * (1.0 - p) / trials as f64).sqrt();
                let observed = hits as f64 / trials as f64;
                assert!(
                    (observed - p).abs() < bound,
                    "eta_c {eta_c} n {n}: observed {observed}, expected {p}"
                );
            }
        }
    }

    #[test]
    fn binomial_thinning_agrees_with_per_photon_loss() {
        // sample_arrival uses a binomial draw; check its non-vacuum rate
        // against the same closed form.
        let c = ChannelScenario::LossOnly { eta_c: 0.1 };
        let trials = 1_000_000u64;
        let mut rng = RngStream::new(3, "channel", 9);
        let hits = (0..trials)
            .filter(|_| sample_arrival(&c, 2, &mut rng) > 0)
            .count() as f64;
        let p = 0.19;
        let bound = 3.0 * (p * (1.0 - p) / trials as f64).sqrt();
        assert!((hits / trials as f64 - p).abs() < bound);
    }
}
