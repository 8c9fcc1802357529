//! CSV report rendering.
//!
//! Every table starts with comment lines carrying the tool version and the
//! sorted config echo, so a report alone is enough to rerun the experiment.
//! Floats are written with 17 significant digits and round-trip exactly.

use std::fmt::Write as _;

use crate::experiments::{Estimate, Verdict, VerdictKind};

/// Formats a float so that parsing it back yields the identical bits.
pub fn float_field(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn verdict_field(kind: VerdictKind) -> &'static str {
    match kind {
        VerdictKind::Consistent => "consistent",
        VerdictKind::Inconclusive => "inconclusive",
        VerdictKind::Violated => "violated",
    }
}

/// A CSV table under construction.
pub struct Table {
    buf: String,
    columns: usize,
}

impl Table {
    /// Opens a table: version header, config echo, then the column row.
    pub fn new(echo: &[(String, String)], columns: &[&str]) -> Table {
        assert!(!columns.is_empty());
        let mut buf = String::new();
        let _ = writeln!(buf, "# contact-lab {}", env!("CARGO_PKG_VERSION"));
        for (key, value) in echo {
            let _ = writeln!(buf, "# {key} = {value}");
        }
        let mut table = Table { buf, columns: columns.len() };
        table.raw_row(columns.iter().copied());
        table
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "row width must match the header");
        self.raw_row(fields.iter().map(String::as_str));
    }

    fn raw_row<'a>(&mut self, fields: impl Iterator<Item = &'a str>) {
        let mut first = true;
        for field in fields {
            debug_assert!(
                !field.contains(',') && !field.contains('\n'),
                "fields must not need quoting"
            );
            if !first {
                self.buf.push(',');
            }
            self.buf.push_str(field);
            first = false;
        }
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// The shared tail of every estimate-carrying row.
pub fn estimate_fields(est: &Estimate) -> Vec<String> {
    vec![
        est.n_runs.to_string(),
        float_field(est.p_hat),
        float_field(est.ci_low),
        float_field(est.ci_high),
    ]
}

pub const ESTIMATE_COLUMNS: [&str; 4] = ["n_runs", "p_hat", "ci_low", "ci_high"];

/// Estimate fields plus the bound and verdict, then the success count and
/// hypothesis warning as trailing extras.
pub fn verdict_fields(verdict: &Verdict) -> Vec<String> {
    let mut fields = estimate_fields(&verdict.estimate);
    fields.push(float_field(verdict.bound_value));
    fields.push(verdict_field(verdict.kind).to_string());
    fields.push(verdict.estimate.n_success.to_string());
    fields.push(verdict.warning.clone().unwrap_or_default().replace(',', ";"));
    fields
}

pub const VERDICT_COLUMNS: [&str; 8] = [
    "n_runs", "p_hat", "ci_low", "ci_high", "bound", "verdict", "n_success", "warning",
];
