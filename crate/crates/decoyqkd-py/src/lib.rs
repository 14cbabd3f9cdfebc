//! Python bindings. Thin wrappers over the core crate: the physics lives in
//! `decoyqkd`, this module only converts types and maps errors onto Python
//! exceptions.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use decoyqkd as core;

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::InvalidParam(_) | core::Error::Config(_) | core::Error::OutOfRange { .. } => {
            PyValueError::new_err(e.to_string())
        }
        core::Error::InsufficientData(_) | core::Error::NonConvergence(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        core::Error::Io(_) => PyIOError::new_err(e.to_string()),
    }
}

/// Heralded downconversion source: parametric gain and herald efficiency.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Source {
    inner: core::HeraldedSourceParams,
}

#[pymethods]
impl Source {
    #[new]
    fn new(lambda_sq: f64, eta_a: f64) -> Self {
        Source { inner: core::HeraldedSourceParams { lambda_sq, eta_a } }
    }

    #[getter]
    fn lambda_sq(&self) -> f64 {
        self.inner.lambda_sq
    }

    #[getter]
    fn eta_a(&self) -> f64 {
        self.inner.eta_a
    }

    /// Output photon-number probabilities given a herald reading of `k`.
    fn conditional(&self, k: u32) -> PyResult<Vec<f64>> {
        Ok(core::conditional_distribution(&self.inner, k).map_err(err)?.probs().to_vec())
    }

    /// Single entry of the conditional distribution.
    fn conditional_prob(&self, k: u32, n: usize) -> PyResult<f64> {
        Ok(core::conditional_distribution(&self.inner, k).map_err(err)?.prob(n))
    }

    fn __repr__(&self) -> String {
        format!("Source(lambda_sq={}, eta_a={})", self.inner.lambda_sq, self.inner.eta_a)
    }
}

/// Binary click detector: efficiency and dark-count probability.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Detector {
    inner: core::SpdParams,
}

#[pymethods]
impl Detector {
    #[new]
    fn new(eta_b: f64, dark_prob: f64) -> Self {
        Detector { inner: core::SpdParams { eta_b, dark_prob } }
    }

    /// Unit efficiency, no dark counts.
    #[staticmethod]
    fn ideal() -> Self {
        Detector { inner: core::SpdParams::IDEAL }
    }

    #[getter]
    fn eta_b(&self) -> f64 {
        self.inner.eta_b
    }

    #[getter]
    fn dark_prob(&self) -> f64 {
        self.inner.dark_prob
    }

    /// Click probability when `m` photons arrive.
    fn click_prob(&self, m: u64) -> f64 {
        self.inner.click_prob(m)
    }

    fn __repr__(&self) -> String {
        format!("Detector(eta_b={}, dark_prob={})", self.inner.eta_b, self.inner.dark_prob)
    }
}

/// Channel model: plain loss, or the block-and-boost attack.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Scenario {
    inner: core::ChannelScenario,
}

#[pymethods]
impl Scenario {
    /// Independent per-photon survival with probability `eta_c`.
    #[staticmethod]
    fn loss_only(eta_c: f64) -> Self {
        Scenario { inner: core::ChannelScenario::LossOnly { eta_c } }
    }

    /// Single photons pass with probability `kappa_1`; multiphoton pulses
    /// pass with probability `kappa_m` minus one captured photon.
    #[staticmethod]
    fn pns_attack(kappa_1: f64, kappa_m: f64) -> Self {
        Scenario { inner: core::ChannelScenario::PnsAttack { kappa_1, kappa_m } }
    }

    /// Probability an `n`-photon pulse arrives non-vacuum.
    fn transmittivity(&self, n: u64) -> f64 {
        core::fock_transmittivity(&self.inner, n)
    }

    fn __repr__(&self) -> String {
        match self.inner {
            core::ChannelScenario::LossOnly { eta_c } => {
                format!("Scenario.loss_only({eta_c})")
            }
            core::ChannelScenario::PnsAttack { kappa_1, kappa_m } => {
                format!("Scenario.pns_attack({kappa_1}, {kappa_m})")
            }
        }
    }
}

/// Per-tag sent/clicked counts for one- and two-photon decoys.
#[pyclass]
struct Ledger {
    inner: core::ClickLedger,
}

#[pymethods]
impl Ledger {
    #[new]
    fn new() -> Self {
        Ledger { inner: core::ClickLedger::new() }
    }

    fn add_counts(&mut self, k: u32, sent: u64, clicked: u64) -> PyResult<()> {
        self.inner.add_counts(k, core::TagCounts { sent, clicked }).map_err(err)
    }

    /// (sent, clicked) for tag `k`; zeros when the tag never appeared.
    fn counts(&self, k: u32) -> (u64, u64) {
        let c = self.inner.counts(k);
        (c.sent, c.clicked)
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        Ok(Ledger { inner: core::ClickLedger::from_csv(text).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        let c1 = self.inner.counts(1);
        let c2 = self.inner.counts(2);
        format!(
            "Ledger(tag1={}/{}, tag2={}/{})",
            c1.clicked, c1.sent, c2.clicked, c2.sent
        )
    }
}

/// Detection verdict: estimated efficiency intervals per decoy tag and the
/// disjointness decision.
#[pyclass]
struct Verdict {
    #[pyo3(get)]
    attack_detected: bool,
    #[pyo3(get)]
    eta1_interval: (f64, f64),
    #[pyo3(get)]
    eta2_interval: (f64, f64),
    #[pyo3(get)]
    alpha: f64,
}

#[pymethods]
impl Verdict {
    fn __repr__(&self) -> String {
        format!(
            "Verdict(attack_detected={}, eta1_interval={:?}, eta2_interval={:?}, alpha={})",
            self.attack_detected, self.eta1_interval, self.eta2_interval, self.alpha
        )
    }
}

/// Optimal weak-pulse intensity and the merit it achieves.
#[pyclass]
struct MuOptimum {
    #[pyo3(get)]
    mu_star: f64,
    #[pyo3(get)]
    d_star: f64,
    #[pyo3(get)]
    degenerate: bool,
}

#[pymethods]
impl MuOptimum {
    fn __repr__(&self) -> String {
        format!(
            "MuOptimum(mu_star={}, d_star={}, degenerate={})",
            self.mu_star, self.d_star, self.degenerate
        )
    }
}

/// Two-photon interferometer settings: bandwidths, center frequencies, delay.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Hom {
    inner: core::HomParams,
}

#[pymethods]
impl Hom {
    #[new]
    #[pyo3(signature = (sigma1, sigma2, omega1 = 0.0, omega2 = 0.0, t = 0.0))]
    fn new(sigma1: f64, sigma2: f64, omega1: f64, omega2: f64, t: f64) -> Self {
        Hom { inner: core::HomParams { sigma1, sigma2, omega1, omega2, t } }
    }

    #[getter]
    fn sigma1(&self) -> f64 {
        self.inner.sigma1
    }

    #[getter]
    fn sigma2(&self) -> f64 {
        self.inner.sigma2
    }

    #[getter]
    fn t(&self) -> f64 {
        self.inner.t
    }

    /// Coincidence rate at the current settings; 1/2 far from the dip.
    fn coincidence_rate(&self) -> f64 {
        core::coincidence_rate(&self.inner)
    }

    /// Dip visibility at zero delay.
    fn visibility(&self) -> f64 {
        core::visibility(&self.inner)
    }

    /// Minimize the coincidence rate over delay and/or the first bandwidth.
    /// Returns the calibrated settings and the sweep count.
    #[pyo3(signature = (adjust_t = true, adjust_sigma1 = true))]
    fn calibrate(&self, adjust_t: bool, adjust_sigma1: bool) -> PyResult<(Hom, u32)> {
        let out = core::calibrate(
            &self.inner,
            core::Adjustable { t: adjust_t, sigma1: adjust_sigma1 },
        )
        .map_err(err)?;
        Ok((Hom { inner: out.params }, out.sweeps))
    }

    /// Calibrate from counted coincidences instead of exact rates.
    fn noisy_calibrate(&self, counts_per_point: u64, seed: u64) -> PyResult<(Hom, u32)> {
        let mut rng = core::RngStream::new(seed, "calibrate", 0);
        let out = core::noisy_calibrate(&self.inner, counts_per_point, &mut rng).map_err(err)?;
        Ok((Hom { inner: out.params }, out.sweeps))
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "Hom(sigma1={}, sigma2={}, omega1={}, omega2={}, t={})",
            p.sigma1, p.sigma2, p.omega1, p.omega2, p.t
        )
    }
}

/// Photon-number probabilities of a weak coherent pulse with mean `mu`.
#[pyfunction]
fn wcp_probs(mu: f64) -> PyResult<Vec<f64>> {
    Ok(core::wcp_distribution(&core::WcpParams { mu }).map_err(err)?.probs().to_vec())
}

/// Forward-model click probability for a herald-`k` decoy pulse.
#[pyfunction]
fn expected_click_prob(
    source: &Source,
    k: u32,
    scenario: &Scenario,
    detector: &Detector,
) -> PyResult<f64> {
    core::expected_click_prob(&source.inner, k, &scenario.inner, &detector.inner).map_err(err)
}

/// Compare the per-tag efficiency intervals implied by a ledger; disjoint
/// intervals mean no single loss channel explains both tags.
#[pyfunction]
fn detect(ledger: &Ledger, source: &Source, detector: &Detector, alpha: f64) -> PyResult<Verdict> {
    let v = core::detect_pns(&ledger.inner, &source.inner, &detector.inner, alpha).map_err(err)?;
    Ok(Verdict {
        attack_detected: v.attack_detected,
        eta1_interval: v.eta1_interval,
        eta2_interval: v.eta2_interval,
        alpha: v.alpha,
    })
}

/// Score confidence interval for a binomial proportion.
#[pyfunction]
fn wilson_interval(successes: u64, trials: u64, alpha: f64) -> PyResult<(f64, f64)> {
    core::wilson_interval(successes, trials, alpha).map_err(err)
}

/// Quantile function of the standard normal distribution.
#[pyfunction]
fn inverse_normal_cdf(p: f64) -> PyResult<f64> {
    core::inverse_normal_cdf(p).map_err(err)
}

/// Ratio of one- to two-photon transmittivity of a pure-loss channel;
/// stays in [1/2, 1] for every efficiency.
#[pyfunction]
fn loss_ratio_identity(eta_c: f64) -> f64 {
    core::loss_ratio_identity(eta_c)
}

/// Weak-pulse intensity maximizing the single-photon-arrival advantage.
#[pyfunction]
fn optimal_mu(scenario: &Scenario) -> PyResult<MuOptimum> {
    let opt = core::optimal_mu(&scenario.inner).map_err(err)?;
    Ok(MuOptimum { mu_star: opt.mu_star, d_star: opt.d_star, degenerate: opt.degenerate })
}

/// Run a full session from a TOML config string; returns the report as JSON.
/// Deterministic in the config's seed.
#[pyfunction]
fn run_session(config_toml: &str) -> PyResult<String> {
    let cfg = core::SessionConfig::from_toml_str(config_toml).map_err(err)?;
    let report = core::run_session(&cfg).map_err(err)?;
    core::emit_report(&report, core::ReportFormat::Json).map_err(err)
}

#[pymodule]
fn decoyqkd_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Source>()?;
    m.add_class::<Detector>()?;
    m.add_class::<Scenario>()?;
    m.add_class::<Ledger>()?;
    m.add_class::<Verdict>()?;
    m.add_class::<MuOptimum>()?;
    m.add_class::<Hom>()?;
    m.add_function(wrap_pyfunction!(wcp_probs, m)?)?;
    m.add_function(wrap_pyfunction!(expected_click_prob, m)?)?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(wilson_interval, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_normal_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(loss_ratio_identity, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_mu, m)?)?;
    m.add_function(wrap_pyfunction!(run_session, m)?)?;
    Ok(())
}
