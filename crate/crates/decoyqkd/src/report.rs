//! Result emission: JSON with reproducible float formatting, and the CSV
//! layouts used by the command-line tools.
//!
//! Floats are printed with 17 significant digits (`{:.16e}`), enough to
//! round-trip any f64 exactly, so a parsed report compares equal to the
//! one that was written.

use std::fmt::Write as _;
use std::io;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hom::CalibrationStep;
use crate::mu_opt::CurvePoint;
use crate::session::SessionReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::Config(format!(
                "unknown format `{other}` (expected json or csv)"
            ))),
        }
    }
}

struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize any value as compact JSON with 17-significant-digit floats.
pub fn json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::invalid(format!("serialization failed: {e}")))?;
    String::from_utf8(buf).map_err(|e| Error::invalid(format!("non-utf8 output: {e}")))
}

fn f64_field(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_f64_field(v: Option<f64>) -> String {
    v.map(f64_field).unwrap_or_default()
}

/// Serialize a session report. JSON is a single object with fixed field
/// order; CSV is the ledger block (header `tag,sent,clicked`) followed by
/// a blank line and `field,value` rows in fixed order.
pub fn emit_report(r: &SessionReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => json_string(r),
        ReportFormat::Csv => {
            let mut out = r.ledger.to_csv();
            out.push('\n');
            out.push_str("field,value\n");
            let scheme = match r.scheme {
                crate::session::Scheme::Hsps => "hsps",
                crate::session::Scheme::Hybrid => "hybrid",
            };
            let mut row = |field: &str, value: String| {
                let _ = writeln!(out, "{field},{value}");
            };
            row("scheme", scheme.to_string());
            row("pulses", r.pulses.to_string());
            row("decoy_pulses", r.decoy_pulses.to_string());
            row("wcp_pulses", r.wcp_pulses.to_string());
            row("insufficient_data", r.insufficient_data.to_string());
            match &r.verdict {
                Some(v) => {
                    row("attack_detected", v.attack_detected.to_string());
                    row("eta1_low", f64_field(v.eta1_interval.0));
                    row("eta1_high", f64_field(v.eta1_interval.1));
                    row("eta2_low", f64_field(v.eta2_interval.0));
                    row("eta2_high", f64_field(v.eta2_interval.1));
                    row("alpha", f64_field(v.alpha));
                }
                None => {
                    row("attack_detected", String::new());
                    row("eta1_low", String::new());
                    row("eta1_high", String::new());
                    row("eta2_low", String::new());
                    row("eta2_high", String::new());
                    row("alpha", String::new());
                }
            }
            row("wcp_click_rate", opt_f64_field(r.wcp_click_rate));
            row("sifted_key_count", r.sifted_key_count.to_string());
            row("effective_clock_hz", f64_field(r.effective_clock_hz));
            row("max_decoy_fraction", opt_f64_field(r.max_decoy_fraction));
            row("mu_recommended", opt_f64_field(r.mu_recommended));
            Ok(out)
        }
    }
}

/// Optimal-intensity curve: `param,mu_star,D_star,flag` with flag `ok` or
/// `degenerate`.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("param,mu_star,D_star,flag\n");
    for p in points {
        let flag = if p.degenerate { "degenerate" } else { "ok" };
        let _ = writeln!(
            out,
            "{},{},{},{flag}",
            f64_field(p.param),
            f64_field(p.mu_star),
            f64_field(p.d_star)
        );
    }
    out
}

/// Calibration trace: `iteration,t,sigma1,visibility`, one row per sweep.
pub fn calibration_csv(trace: &[CalibrationStep]) -> String {
    let mut out = String::from("iteration,t,sigma1,visibility\n");
    for s in trace {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            s.iteration,
            f64_field(s.t),
            f64_field(s.sigma1),
            f64_field(s.visibility)
        );
    }
    out
}
