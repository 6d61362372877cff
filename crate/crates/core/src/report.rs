//! Serializable report types shared between the library and the CLI.
//!
//! Everything here is plain data at `f64` precision; reports are JSON for
//! structure and CSV for tables, with no timestamps so identical runs are
//! byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::chain::{AddressabilityReport, ChainLayout, LineId};
use crate::ensemble::SignalReport;
use crate::oracle::PairClass;
use crate::scalar::Real;

/// Complex number as a serializable pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl ComplexValue {
    pub fn magnitude(&self) -> f64 {
        (self.re * self.re + self.im * self.im).sqrt()
    }
}

impl<F: Real> From<Complex<F>> for ComplexValue {
    fn from(c: Complex<F>) -> ComplexValue {
        ComplexValue {
            re: c.re.to_f64(),
            im: c.im.to_f64(),
        }
    }
}

/// Line table keyed by `spin:cond`.
pub type LineTable = BTreeMap<String, ComplexValue>;

pub fn line_table<F: Real>(lines: &BTreeMap<LineId, Complex<F>>) -> LineTable {
    lines
        .iter()
        .map(|(l, a)| (l.to_string(), ComplexValue::from(*a)))
        .collect()
}

/// Serializable form of [`SignalReport`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignalReportData {
    pub lines: LineTable,
    pub reference: ComplexValue,
    pub pulse_count: usize,
}

impl SignalReportData {
    pub fn from_report<F: Real>(report: &SignalReport<F>) -> SignalReportData {
        SignalReportData {
            lines: line_table(&report.lines),
            reference: ComplexValue::from(report.reference),
            pulse_count: report.pulse_count,
        }
    }
}

/// CSV table of every line frequency: `spin,cond,frequency`.
pub fn spectrum_csv(layout: &ChainLayout, report: &AddressabilityReport) -> String {
    let mut out = String::from("spin,cond,frequency\n");
    let _ = layout;
    for (line, freq) in &report.lines {
        let _ = writeln!(out, "{},{},{}", line.spin, line.cond, freq);
    }
    out
}

/// CSV table of an interrogation classification: `register,class`.
pub fn classification_csv(classes: &[(u32, PairClass)], width: usize) -> String {
    let mut out = String::from("register,class\n");
    for (reg, class) in classes {
        let pattern: String = (0..width)
            .map(|i| if (reg >> i) & 1 == 1 { '1' } else { '0' })
            .collect();
        let name = match class {
            PairClass::TrueMatch => "true_match",
            PairClass::FalseMatch => "false_match",
            PairClass::RejectedDephased => "rejected_dephased",
            PairClass::RejectedNoCoherence => "rejected_no_coherence",
        };
        let _ = writeln!(out, "{pattern},{name}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::addressability_report;

    #[test]
    fn spectrum_csv_rows() {
        let layout = ChainLayout::default_layout(4).unwrap();
        let report = addressability_report(&layout);
        let csv = spectrum_csv(&layout, &report);
        // 2 edge spins x 2 lines + 2 interior x 4 lines + header
        assert_eq!(csv.lines().count(), 1 + 12);
        assert!(csv.starts_with("spin,cond,frequency\n"));
    }

    #[test]
    fn complex_value_magnitude() {
        let v = ComplexValue { re: 3.0, im: 4.0 };
        assert_eq!(v.magnitude(), 5.0);
    }
}
