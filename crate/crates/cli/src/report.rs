//! Report layouts: JSON verification reports and CSV tables.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    /// Largest residual observed (or the checked quantity).
    pub value: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub pass: bool,
}

impl Check {
    /// Passes when `value ≤ tolerance`; NaN never passes.
    pub fn at_most(name: &str, value: f64, tolerance: f64, samples: usize) -> Self {
        Check {
            name: name.to_string(),
            value,
            tolerance,
            samples,
            pass: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationInfo {
    pub word_length: usize,
    pub theta_radius: usize,
    pub theta_accuracy: f64,
    pub quadrature_tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub seed: u64,
    pub genus: usize,
    pub truncation: TruncationInfo,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
    pub pass: bool,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Renders rows of already formatted fields under a comma-separated header; fields
/// containing commas (vertex labels such as `W(1,3)`) are quoted.
pub fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header.split(',')).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Shortest round-trip representation (exponent form for tiny and huge values), so
/// equal numbers give equal bytes.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_check_fails() {
        assert!(!Check::at_most("x", f64::NAN, 1.0, 1).pass);
        assert!(Check::at_most("x", 1.0, 1.0, 1).pass);
    }

    #[test]
    fn csv_layout() {
        let t = csv("a,b", vec![vec![num(1.5), num(-0.25)]]);
        assert_eq!(t, "a,b\n1.5,-0.25\n");
        assert_eq!(num(1.5e-14), "1.5e-14");
        let t = csv("w", vec![vec!["W(1,3)".to_string()]]);
        assert_eq!(t, "w\n\"W(1,3)\"\n");
    }
}
