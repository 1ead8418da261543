//! Product-form CDF estimators for left-censored samples.
//!
//! Every estimator is a right-continuous step function with jumps at the
//! distinct exact values `x*_1 < ... < x*_l`. The value at `t` is a product of
//! factors over the exact values strictly greater than `t`, so the estimate is
//! 1 at and after the largest exact value and `lower_value` below the smallest.
//!
//! | method          | factor at `x*_k`                 |
//! |-----------------|----------------------------------|
//! | product-limit   | `1 - d_k / y_k`                  |
//! | rhr-mle         | `1 - d_k / (y_k - q_k)`          |
//! | crhf-exp        | `exp(-d_k / y_k)`                |
//!
//! `d_k` counts exact observations at the value, `q_k` censored ones tied with
//! it and `y_k` all observations at or below it. The reversed-hazard estimator
//! drops the censored ties from the at-risk count, which is the same as
//! treating a censored value tied with an exact one as slightly smaller.

use serde::{Deserialize, Serialize, Serializer};

use crate::data::{ExactRow, ExactTallyTable, TallyTable};
use crate::error::{EstimateError, Result};

/// Non-zero factors below this switch the running product to log space.
pub const LOG_SPACE_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ProductLimit,
    RhrMle,
    CrhfExp,
    Ecdf,
    KmNegation,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ProductLimit => "product-limit",
            Method::RhrMle => "rhr-mle",
            Method::CrhfExp => "crhf-exp",
            Method::Ecdf => "ecdf",
            Method::KmNegation => "km-negation",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A pointwise variance estimate. `Unstable` marks a Greenwood-type sum with a
/// zero denominator that is not cancelled by a zero estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarianceEstimate {
    Finite(f64),
    Unstable,
}

impl VarianceEstimate {
    pub fn value(self) -> Option<f64> {
        match self {
            VarianceEstimate::Finite(v) => Some(v),
            VarianceEstimate::Unstable => None,
        }
    }

    pub fn stderr(self) -> Option<f64> {
        self.value().map(f64::sqrt)
    }
}

impl Serialize for VarianceEstimate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            VarianceEstimate::Finite(v) => s.serialize_f64(*v),
            VarianceEstimate::Unstable => s.serialize_str("unstable"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub t: f64,
    pub estimate: f64,
    pub variance: Option<VarianceEstimate>,
}

impl Serialize for Jump {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Jump", 4)?;
        st.serialize_field("t", &self.t)?;
        st.serialize_field("estimate", &self.estimate)?;
        st.serialize_field("variance", &self.variance)?;
        st.serialize_field("stderr", &self.variance.and_then(VarianceEstimate::stderr))?;
        st.end()
    }
}

/// Right-continuous step estimate of a CDF.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepCdf {
    method: Method,
    lower_value: f64,
    lower_variance: Option<VarianceEstimate>,
    jumps: Vec<Jump>,
}

impl StepCdf {
    pub(crate) fn from_levels(method: Method, values: &[f64], levels: &[f64]) -> Self {
        debug_assert_eq!(levels.len(), values.len() + 1);
        let jumps = values
            .iter()
            .zip(&levels[1..])
            .map(|(&t, &estimate)| Jump { t, estimate, variance: None })
            .collect();
        Self { method, lower_value: levels[0], lower_variance: None, jumps }
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Estimate for `t` below the first jump.
    pub fn lower_value(&self) -> f64 {
        self.lower_value
    }

    pub fn lower_variance(&self) -> Option<VarianceEstimate> {
        self.lower_variance
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn jump_points(&self) -> impl Iterator<Item = f64> + '_ {
        self.jumps.iter().map(|j| j.t)
    }

    pub fn has_variance(&self) -> bool {
        self.jumps.iter().all(|j| j.variance.is_some())
    }

    /// Estimate and variance at `t`.
    pub fn eval(&self, t: f64) -> (f64, Option<VarianceEstimate>) {
        let idx = self.jumps.partition_point(|j| j.t <= t);
        if idx == 0 {
            (self.lower_value, self.lower_variance)
        } else {
            let j = &self.jumps[idx - 1];
            (j.estimate, j.variance)
        }
    }

    pub fn estimate_at(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    /// Probability mass at each jump; the first mass excludes `lower_value`.
    pub fn masses(&self) -> Vec<f64> {
        let mut prev = self.lower_value;
        self.jumps
            .iter()
            .map(|j| {
                let m = j.estimate - prev;
                prev = j.estimate;
                m
            })
            .collect()
    }

    pub fn mean(&self, policy: LeftoverPolicy) -> f64 {
        let masses = self.masses();
        let mut total: f64 = self.jumps.iter().zip(&masses).map(|(j, m)| j.t * m).sum();
        if policy == LeftoverPolicy::AtFirstExact {
            if let Some(first) = self.jumps.first() {
                total += first.t * self.lower_value;
            }
        }
        total
    }

    /// Smallest jump point whose estimate reaches `p`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(EstimateError::ProbabilityOutOfRange(p).into());
        }
        let last = self.jumps.last().ok_or(EstimateError::NoJumps)?;
        Ok(self.jumps.iter().find(|j| j.estimate >= p).map_or(last.t, |j| j.t))
    }

    fn with_variances(mut self, lower: VarianceEstimate, at_jumps: Vec<VarianceEstimate>) -> Self {
        self.lower_variance = Some(lower);
        for (j, v) in self.jumps.iter_mut().zip(at_jumps) {
            j.variance = Some(v);
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("step function serializes")
    }
}

/// Where the estimate's mass below the first exact value goes when computing a
/// mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeftoverPolicy {
    #[default]
    AtFirstExact,
    AtZero,
}

impl LeftoverPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            LeftoverPolicy::AtFirstExact => "at-first-exact",
            LeftoverPolicy::AtZero => "at-zero",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Accumulation {
    Direct,
    Log,
}

impl Accumulation {
    pub(crate) fn for_factors(factors: &[f64]) -> Self {
        if factors.iter().any(|&f| f > 0.0 && f < LOG_SPACE_THRESHOLD) {
            Accumulation::Log
        } else {
            Accumulation::Direct
        }
    }
}

/// `out[k] = prod(factors[k..])`, with `out[len] = 1`.
pub(crate) fn suffix_products(factors: &[f64], mode: Accumulation) -> Vec<f64> {
    let mut out = vec![1.0; factors.len() + 1];
    match mode {
        Accumulation::Direct => {
            let mut acc = 1.0;
            for (k, &f) in factors.iter().enumerate().rev() {
                acc *= f;
                out[k] = acc;
            }
        }
        Accumulation::Log => {
            let mut log_acc = 0.0;
            for (k, &f) in factors.iter().enumerate().rev() {
                log_acc += f.ln();
                out[k] = log_acc.exp();
            }
        }
    }
    out
}

fn product_estimator(table: &TallyTable, method: Method, factor: impl Fn(&ExactRow) -> f64) -> Result<StepCdf> {
    let exact = table.exact_tally()?;
    let factors: Vec<f64> = exact.rows().iter().map(factor).collect();
    let levels = suffix_products(&factors, Accumulation::for_factors(&factors));
    let values: Vec<f64> = exact.rows().iter().map(|r| r.value).collect();
    Ok(StepCdf::from_levels(method, &values, &levels))
}

/// Product-limit (chain-rule) estimator.
pub fn product_limit_cdf(table: &TallyTable) -> Result<StepCdf> {
    product_estimator(table, Method::ProductLimit, |r| {
        1.0 - r.exact as f64 / r.at_or_below as f64
    })
}

/// Maximum-likelihood estimator built on the reversed hazard rate.
pub fn rhr_mle_cdf(table: &TallyTable) -> Result<StepCdf> {
    product_estimator(table, Method::RhrMle, |r| {
        1.0 - r.exact as f64 / (r.at_or_below - r.censored) as f64
    })
}

/// Exponential of the cumulative reversed hazard: `F(t) = exp(-sum d_k / y_k)`
/// over exact values above `t`.
pub fn crhf_exp_cdf(table: &TallyTable) -> Result<StepCdf> {
    let exact = table.exact_tally()?;
    let rows = exact.rows();
    let mut levels = vec![1.0; rows.len() + 1];
    let mut cumulative = 0.0;
    for (k, r) in rows.iter().enumerate().rev() {
        cumulative += r.exact as f64 / r.at_or_below as f64;
        levels[k] = (-cumulative).exp();
    }
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    Ok(StepCdf::from_levels(Method::CrhfExp, &values, &levels))
}

#[derive(Debug, Clone, Copy)]
enum Term {
    Finite(f64),
    /// Zero denominator.
    Infinite,
}

/// Combines an estimate with the Greenwood-type sum of the terms above it.
fn variances_from_terms(f: &StepCdf, terms: &[Term], zero_estimate_cancels: bool) -> StepCdf {
    let mut at_jumps = vec![VarianceEstimate::Finite(0.0); terms.len()];
    let mut sum = 0.0;
    let mut unstable = false;
    let combine = |estimate: f64, sum: f64, unstable: bool| {
        if unstable {
            if zero_estimate_cancels && estimate == 0.0 {
                VarianceEstimate::Finite(0.0)
            } else {
                VarianceEstimate::Unstable
            }
        } else {
            VarianceEstimate::Finite(estimate * estimate * sum)
        }
    };
    for k in (0..terms.len()).rev() {
        at_jumps[k] = combine(f.jumps[k].estimate, sum, unstable);
        match terms[k] {
            Term::Finite(v) => sum += v,
            Term::Infinite => unstable = true,
        }
    }
    let lower = combine(f.lower_value, sum, unstable);
    f.clone().with_variances(lower, at_jumps)
}

fn check_method(f: &StepCdf, expected: Method, exact: &ExactTallyTable) -> Result<()> {
    if f.method != expected || f.jumps.len() != exact.len() {
        return Err(EstimateError::MethodMismatch { expected, found: f.method }.into());
    }
    Ok(())
}

/// Greenwood variance `F(t)^2 * sum d_k / (y_k (y_k - d_k))` for a
/// product-limit estimate. A term with `y_k = d_k` makes the variance
/// `Unstable` wherever it enters the sum.
pub fn greenwood_variance(table: &TallyTable, f: &StepCdf) -> Result<StepCdf> {
    let exact = table.exact_tally()?;
    check_method(f, Method::ProductLimit, &exact)?;
    let terms: Vec<Term> = exact
        .rows()
        .iter()
        .map(|r| {
            let (d, y) = (r.exact as f64, r.at_or_below as f64);
            if r.at_or_below == r.exact {
                Term::Infinite
            } else {
                Term::Finite(d / (y * (y - d)))
            }
        })
        .collect();
    Ok(variances_from_terms(f, &terms, false))
}

/// Delta-method variance `F1(t)^2 * sum d_k / (y*_{k-1} (y_k - q_k))` for the
/// reversed-hazard estimate, where `y*_{k-1}` is the at-or-below count of the
/// previous exact value (zero for the first). The zero-count term only enters
/// below the first exact value; there it yields 0 when the estimate is 0 and
/// `Unstable` otherwise.
pub fn rhr_variance(table: &TallyTable, f: &StepCdf) -> Result<StepCdf> {
    let exact = table.exact_tally()?;
    check_method(f, Method::RhrMle, &exact)?;
    let mut prev_exact_y = 0usize;
    let terms: Vec<Term> = exact
        .rows()
        .iter()
        .map(|r| {
            let term = if prev_exact_y == 0 {
                Term::Infinite
            } else {
                let d = r.exact as f64;
                Term::Finite(d / (prev_exact_y as f64 * (r.at_or_below - r.censored) as f64))
            };
            prev_exact_y = r.at_or_below;
            term
        })
        .collect();
    Ok(variances_from_terms(f, &terms, true))
}

/// `product_limit_cdf` with Greenwood variances.
pub fn product_limit_with_variance(table: &TallyTable) -> Result<StepCdf> {
    greenwood_variance(table, &product_limit_cdf(table)?)
}

/// `rhr_mle_cdf` with delta-method variances.
pub fn rhr_mle_with_variance(table: &TallyTable) -> Result<StepCdf> {
    rhr_variance(table, &rhr_mle_cdf(table)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhrEntry {
    pub value: f64,
    /// Maximum-likelihood reversed hazard rate `d_k / (d_k + y_{k-1})`.
    pub rate: f64,
    /// Index into the full tally.
    pub source: usize,
}

/// Reversed hazard rate estimates at every distinct value with an exact
/// observation. Values without one have estimate 0 and are omitted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhrTable {
    entries: Vec<RhrEntry>,
}

impl RhrTable {
    pub fn entries(&self) -> &[RhrEntry] {
        &self.entries
    }

    /// Rates indexed by tally row, 0 where the row has no exact observation.
    pub fn dense(&self, rows: usize) -> Vec<f64> {
        let mut out = vec![0.0; rows];
        for e in &self.entries {
            out[e.source] = e.rate;
        }
        out
    }
}

pub fn rhr_table(table: &TallyTable) -> RhrTable {
    let entries = table
        .rows()
        .iter()
        .enumerate()
        .filter(|(_, r)| r.exact >= 1)
        .map(|(source, r)| {
            debug_assert_eq!(r.exact + r.below(), r.at_or_below - r.censored);
            RhrEntry {
                value: r.value,
                rate: r.exact as f64 / (r.exact + r.below()) as f64,
                source,
            }
        })
        .collect();
    RhrTable { entries }
}

fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// Nonparametric log-likelihood in reversed-hazard form,
/// `sum_{k>=2} d_k ln r_k + y_{k-1} ln(1 - r_k)`. `rates[k]` is the rate of
/// tally row `k`; the first row's rate is fixed at 1 and ignored.
pub fn rhr_log_likelihood(table: &TallyTable, rates: &[f64]) -> f64 {
    table
        .rows()
        .iter()
        .zip(rates)
        .skip(1)
        .map(|(row, &r)| xlogy(row.exact as f64, r) + xlogy(row.below() as f64, 1.0 - r))
        .sum()
}

/// Closed-form `d^2 l / d r_k^2` at the maximum: `-(y_k - q_k)^3 / (d_k (y_k - d_k - q_k))`.
pub fn rhr_log_likelihood_curvature(table: &TallyTable, row: usize) -> f64 {
    let r = table.rows()[row];
    let at_risk = (r.at_or_below - r.censored) as f64;
    -at_risk.powi(3) / (r.exact as f64 * r.below() as f64)
}
