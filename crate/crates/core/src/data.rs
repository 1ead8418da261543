//! Left-censored observations and the order-statistic tallies built from them.
//!
//! A data file holds one `(value, detected)` pair per line. A detected value is
//! an exact measurement; an undetected one records the limit of detection that
//! the true value lies at or below.

use std::io::BufRead;

use serde::Serialize;

use crate::error::{DataError, Result};

/// One measurement: `detected = false` means left-censored at `value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observation {
    pub value: f64,
    pub detected: bool,
}

impl Observation {
    pub fn exact(value: f64) -> Self {
        Self { value, detected: true }
    }

    pub fn censored(value: f64) -> Self {
        Self { value, detected: false }
    }
}

/// A validated sample: non-empty, finite non-negative values, at least one
/// exact measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    observations: Vec<Observation>,
}

impl Dataset {
    pub fn new(observations: Vec<Observation>) -> Result<Self> {
        if observations.is_empty() {
            return Err(DataError::Empty.into());
        }
        for (index, obs) in observations.iter().enumerate() {
            if !obs.value.is_finite() {
                return Err(DataError::NonFinite { index }.into());
            }
            if obs.value < 0.0 {
                return Err(DataError::Negative { index, value: obs.value }.into());
            }
        }
        if !observations.iter().any(|o| o.detected) {
            return Err(DataError::AllCensored.into());
        }
        Ok(Self { observations })
    }

    /// Parses the line-oriented CSV format. Line numbers in errors are 1-based.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut observations = Vec::new();
        let mut seen_content = false;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| DataError::Io(e.to_string()))?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let first_content = !seen_content;
            seen_content = true;
            let mut fields = trimmed.split(',').map(str::trim);
            let (Some(value), Some(flag), None) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(DataError::Malformed {
                    line: line_no,
                    reason: "expected exactly two comma-separated fields".into(),
                }
                .into());
            };
            if first_content && value.eq_ignore_ascii_case("value") && flag.eq_ignore_ascii_case("detected") {
                continue;
            }
            let value: f64 = value.parse().map_err(|_| DataError::Malformed {
                line: line_no,
                reason: format!("`{value}` is not a decimal number"),
            })?;
            if !value.is_finite() {
                return Err(DataError::Malformed {
                    line: line_no,
                    reason: "value must be finite".into(),
                }
                .into());
            }
            if value < 0.0 {
                return Err(DataError::NegativeOnLine { line: line_no, value }.into());
            }
            let detected = match flag {
                "1" => true,
                "0" => false,
                other => {
                    return Err(DataError::Malformed {
                        line: line_no,
                        reason: format!("detected flag must be 0 or 1, got `{other}`"),
                    }
                    .into())
                }
            };
            observations.push(Observation { value, detected });
        }
        Self::new(observations)
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    /// Always false for a constructed dataset; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn n_detected(&self) -> usize {
        self.observations.iter().filter(|o| o.detected).count()
    }

    pub fn tally(&self) -> TallyTable {
        TallyTable::from_observations(&self.observations)
    }
}

/// One distinct observed value with its exact/censored counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TallyRow {
    pub value: f64,
    /// Exact observations equal to `value`.
    pub exact: usize,
    /// Censored observations recorded at `value`.
    pub censored: usize,
    /// Observations less than or equal to `value`.
    pub at_or_below: usize,
}

impl TallyRow {
    pub fn total(&self) -> usize {
        self.exact + self.censored
    }

    /// Observations strictly below `value`.
    pub fn below(&self) -> usize {
        self.at_or_below - self.total()
    }
}

/// Distinct values in increasing order with cumulative counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TallyTable {
    rows: Vec<TallyRow>,
}

impl TallyTable {
    /// Ties are exact `f64` equality: no tolerance is applied.
    pub fn from_observations(observations: &[Observation]) -> Self {
        let mut sorted: Vec<Observation> = observations.to_vec();
        sorted.sort_by(|a, b| a.value.total_cmp(&b.value));
        let mut rows: Vec<TallyRow> = Vec::new();
        let mut cumulative = 0;
        for obs in sorted {
            cumulative += 1;
            match rows.last_mut() {
                Some(row) if row.value == obs.value => {
                    if obs.detected {
                        row.exact += 1;
                    } else {
                        row.censored += 1;
                    }
                    row.at_or_below = cumulative;
                }
                _ => rows.push(TallyRow {
                    value: obs.value,
                    exact: usize::from(obs.detected),
                    censored: usize::from(!obs.detected),
                    at_or_below: cumulative,
                }),
            }
        }
        Self { rows }
    }

    /// Builds a table from `(value, exact, censored)` counts. Values must be
    /// strictly increasing and every row must hold at least one observation.
    pub fn from_counts(counts: &[(f64, usize, usize)]) -> Result<Self> {
        let mut rows = Vec::with_capacity(counts.len());
        let mut cumulative = 0;
        for (i, &(value, exact, censored)) in counts.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(DataError::Negative { index: i, value }.into());
            }
            if exact + censored == 0 {
                return Err(DataError::EmptyRow { index: i }.into());
            }
            if let Some(prev) = rows.last().map(|r: &TallyRow| r.value) {
                if value <= prev {
                    return Err(DataError::Unsorted { index: i }.into());
                }
            }
            cumulative += exact + censored;
            rows.push(TallyRow { value, exact, censored, at_or_below: cumulative });
        }
        if rows.is_empty() {
            return Err(DataError::Empty.into());
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[TallyRow] {
        &self.rows
    }

    /// Number of distinct values.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n(&self) -> usize {
        self.rows.last().map_or(0, |r| r.at_or_below)
    }

    /// Expands the counts back into a flat sample, sorted by value with exact
    /// observations before censored ones at each value.
    pub fn to_observations(&self) -> Vec<Observation> {
        let mut out = Vec::with_capacity(self.n());
        for row in &self.rows {
            out.extend(std::iter::repeat_n(Observation::exact(row.value), row.exact));
            out.extend(std::iter::repeat_n(Observation::censored(row.value), row.censored));
        }
        out
    }

    pub fn exact_tally(&self) -> Result<ExactTallyTable> {
        let rows: Vec<ExactRow> = self
            .rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.exact >= 1)
            .map(|(source, r)| ExactRow {
                value: r.value,
                exact: r.exact,
                censored: r.censored,
                at_or_below: r.at_or_below,
                source,
            })
            .collect();
        if rows.is_empty() {
            return Err(DataError::AllCensored.into());
        }
        Ok(ExactTallyTable { rows })
    }
}

/// A distinct value carrying at least one exact observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactRow {
    pub value: f64,
    pub exact: usize,
    /// Censored observations tied with this exact value.
    pub censored: usize,
    pub at_or_below: usize,
    /// Index of the matching row in the full tally.
    pub source: usize,
}

impl ExactRow {
    /// All observations (exact or not) equal to `value`.
    pub fn total(&self) -> usize {
        self.exact + self.censored
    }

    /// Observations strictly below `value`, counting every distinct value.
    pub fn below(&self) -> usize {
        self.at_or_below - self.total()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactTallyTable {
    rows: Vec<ExactRow>,
}

impl ExactTallyTable {
    pub fn rows(&self) -> &[ExactRow] {
        &self.rows
    }

    /// Number of distinct exact values.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}
