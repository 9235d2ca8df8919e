//! Plot-ready CSV output.
//!
//! Floats are printed with 9 significant digits (`%.9g` style), missing
//! values as `NA`, lines end with `\n`.

use std::fmt::Write as _;

use crate::sim::{MetricsSummary, ReplicationResult, METRICS};

/// Formats `x` like C's `%.9g`.
pub fn format_sig9(x: f64) -> String {
    if x.is_nan() {
        return "NA".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (8 - exp) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A sweep: one row per value of the swept parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    /// Emitted as `# ` lines above the header.
    pub comments: Vec<String>,
    pub sweep: String,
    pub columns: Vec<String>,
    rows: Vec<(f64, Vec<f64>)>,
}

impl ResultsTable {
    pub fn new(sweep: impl Into<String>, columns: Vec<String>) -> Self {
        Self {
            comments: Vec::new(),
            sweep: sweep.into(),
            columns,
            rows: Vec::new(),
        }
    }

    /// Adds a row, keeping rows sorted by the sweep value.
    pub fn push_row(&mut self, key: f64, values: Vec<f64>) {
        assert_eq!(values.len(), self.columns.len(), "row width must match header");
        let at = self.rows.partition_point(|(k, _)| *k <= key);
        self.rows.insert(at, (key, values));
    }

    pub fn rows(&self) -> &[(f64, Vec<f64>)] {
        &self.rows
    }

    /// Values of one column, in row order.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|(_, v)| v[k]).collect())
    }

    pub fn keys(&self) -> Vec<f64> {
        self.rows.iter().map(|(k, _)| *k).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            for line in c.lines() {
                let _ = writeln!(out, "# {line}");
            }
        }
        out.push_str(&self.sweep);
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (key, values) in &self.rows {
            out.push_str(&format_sig9(*key));
            for v in values {
                out.push(',');
                out.push_str(&format_sig9(*v));
            }
            out.push('\n');
        }
        out
    }
}

/// Column names `{metric}_mean`, `{metric}_ci_low`, `{metric}_ci_high`.
pub fn ci_columns(metric: &str) -> [String; 3] {
    [
        format!("{metric}_mean"),
        format!("{metric}_ci_low"),
        format!("{metric}_ci_high"),
    ]
}

pub fn summary_csv(summary: &MetricsSummary) -> String {
    let mut out = String::from("metric,mean,std_err,ci_low,ci_high,n\n");
    for (name, s) in METRICS.iter().zip(&summary.stats) {
        let _ = writeln!(
            out,
            "{name},{},{},{},{},{}",
            format_sig9(s.mean),
            format_sig9(s.std_err),
            format_sig9(s.ci_low()),
            format_sig9(s.ci_high()),
            s.n
        );
    }
    out
}

pub fn replications_csv(results: &[ReplicationResult]) -> String {
    let mut out = String::from("seed");
    for m in METRICS {
        out.push(',');
        out.push_str(m);
    }
    out.push('\n');
    for r in results {
        out.push_str(&r.seed.to_string());
        for v in r.metric_values() {
            out.push(',');
            out.push_str(&format_sig9(v));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (1.0 / 3.0, "0.333333333"),
            (123_456_789.0, "123456789"),
            (1_234_567_890.0, "1.23456789e+09"),
            (0.0001, "0.0001"),
            (0.000_012_345, "1.2345e-05"),
            (6.0 / 7.0, "0.857142857"),
            (0.999_999_999_6, "1"),
            (f64::NAN, "NA"),
        ];
        for (x, want) in cases {
            assert_eq!(format_sig9(x), want, "{x}");
        }
    }

    #[test]
    fn rows_stay_sorted() {
        let mut t = ResultsTable::new("n_tap", vec!["a".into()]);
        t.push_row(3.0, vec![1.0]);
        t.push_row(1.0, vec![2.0]);
        t.push_row(2.0, vec![f64::NAN]);
        t.comments.push("preset".into());
        assert_eq!(t.keys(), vec![1.0, 2.0, 3.0]);
        assert_eq!(t.to_csv(), "# preset\nn_tap,a\n1,2\n2,NA\n3,1\n");
    }

    #[test]
    #[should_panic]
    fn rejects_ragged_rows() {
        let mut t = ResultsTable::new("x", vec!["a".into(), "b".into()]);
        t.push_row(1.0, vec![1.0]);
    }
}
