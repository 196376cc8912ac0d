//! Locale-independent number formatting and `key = value` reports.

use std::io::Write;

use qot_core::io::format_number;

/// `x` with 12 significant digits, in the style of C's `%.12g`.
pub fn num(x: f64) -> String {
    format_number(x)
}

/// Aligned `key = value` lines.
#[derive(Default)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn value(&mut self, key: &str, x: f64) -> &mut Self {
        self.text(key, num(x))
    }

    pub fn text(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.lines.push((key.to_string(), value.into()));
        self
    }

    pub fn print(&self) {
        let width = self.lines.iter().map(|l| l.0.len()).max().unwrap_or(0);
        let mut out = std::io::stdout().lock();
        for (k, v) in &self.lines {
            let _ = writeln!(out, "{k:<width$} = {v}");
        }
    }
}
