//! Text output for step functions.

use std::fmt::Write;

use crate::estimate::{StepCdf, VarianceEstimate};

/// How numbers are rendered in CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumberFormat {
    /// Shortest representation that round-trips.
    Full,
    /// Fixed number of significant digits.
    Significant(usize),
}

impl NumberFormat {
    pub fn render(self, x: f64) -> String {
        match self {
            NumberFormat::Full => format!("{x}"),
            NumberFormat::Significant(digits) => significant(x, digits),
        }
    }

    pub fn render_variance(self, v: Option<VarianceEstimate>) -> (String, String) {
        match v {
            None => (String::new(), String::new()),
            Some(VarianceEstimate::Unstable) => ("unstable".into(), "unstable".into()),
            Some(VarianceEstimate::Finite(v)) => (self.render(v), self.render(v.sqrt())),
        }
    }
}

/// Fixed-point rendering of `x` with `digits` significant digits.
pub fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1) as i32;
    let magnitude = x.abs().log10().floor() as i32;
    let mut decimals = (digits - 1 - magnitude).max(0);
    let mut s = format!("{:.*}", decimals as usize, x);
    // Rounding can carry into a new leading digit (9.9999999 -> 10.000000).
    let carried: f64 = s.parse().unwrap_or(x);
    if carried != 0.0 && (carried.abs().log10().floor() as i32) > magnitude && decimals > 0 {
        decimals -= 1;
        s = format!("{:.*}", decimals as usize, x);
    }
    s
}

/// `t,estimate,variance,stderr` with one row per jump. Variance columns are
/// empty when absent and `unstable` for a degenerate sum.
pub fn step_cdf_csv(f: &StepCdf, fmt: NumberFormat) -> String {
    let mut out = String::from("t,estimate,variance,stderr\n");
    for j in f.jumps() {
        let (var, se) = fmt.render_variance(j.variance);
        let _ = writeln!(out, "{},{},{},{}", NumberFormat::Full.render(j.t), fmt.render(j.estimate), var, se);
    }
    out
}
