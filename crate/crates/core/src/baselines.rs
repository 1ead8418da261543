//! Reference methods: substitution of non-detects, the plain ECDF and the
//! Kaplan-Meier estimator applied to the negated sample.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, TallyTable};
use crate::estimate::{Method, StepCdf};

/// Replacement for a censored value `v` (its own limit of detection).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubstitutionStrategy {
    Zero,
    HalfLod,
    LodOverSqrt2,
    Lod,
}

impl SubstitutionStrategy {
    pub const ALL: [SubstitutionStrategy; 4] = [
        SubstitutionStrategy::Zero,
        SubstitutionStrategy::HalfLod,
        SubstitutionStrategy::LodOverSqrt2,
        SubstitutionStrategy::Lod,
    ];

    pub fn substitute(self, lod: f64) -> f64 {
        match self {
            SubstitutionStrategy::Zero => 0.0,
            SubstitutionStrategy::HalfLod => lod / 2.0,
            SubstitutionStrategy::LodOverSqrt2 => lod / std::f64::consts::SQRT_2,
            SubstitutionStrategy::Lod => lod,
        }
    }
}

pub fn substitution_mean(data: &Dataset, strategy: SubstitutionStrategy) -> f64 {
    let sum: f64 = data
        .observations()
        .iter()
        .map(|o| if o.detected { o.value } else { strategy.substitute(o.value) })
        .sum();
    sum / data.len() as f64
}

/// Empirical CDF of the recorded values, ignoring censoring flags.
pub fn ecdf(data: &Dataset) -> StepCdf {
    let all_exact: Vec<_> = data
        .observations()
        .iter()
        .map(|o| crate::data::Observation::exact(o.value))
        .collect();
    let table = TallyTable::from_observations(&all_exact);
    let n = table.n() as f64;
    let values: Vec<f64> = table.rows().iter().map(|r| r.value).collect();
    let levels: Vec<f64> = std::iter::once(0.0)
        .chain(table.rows().iter().map(|r| r.at_or_below as f64 / n))
        .collect();
    StepCdf::from_levels(Method::Ecdf, &values, &levels)
}

/// Kaplan-Meier survival curve for right-censored data. `jumps` holds the
/// survival just after each distinct event time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KmCurve {
    jumps: Vec<(f64, f64)>,
}

impl KmCurve {
    /// Events at a time are processed before censorings at the same time, so
    /// censored subjects stay in the risk set.
    pub fn fit(times: &[f64], events: &[bool]) -> Self {
        assert_eq!(times.len(), events.len());
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
        let mut jumps = Vec::new();
        let mut survival = 1.0;
        let mut at_risk = times.len();
        let mut i = 0;
        while i < order.len() {
            let time = times[order[i]];
            let mut deaths = 0;
            let mut j = i;
            while j < order.len() && times[order[j]] == time {
                deaths += usize::from(events[order[j]]);
                j += 1;
            }
            if deaths > 0 {
                survival *= 1.0 - deaths as f64 / at_risk as f64;
                jumps.push((time, survival));
            }
            at_risk -= j - i;
            i = j;
        }
        Self { jumps }
    }

    pub fn jumps(&self) -> &[(f64, f64)] {
        &self.jumps
    }

    /// `S(time)`, right-continuous.
    pub fn survival(&self, time: f64) -> f64 {
        let idx = self.jumps.partition_point(|&(t, _)| t <= time);
        if idx == 0 {
            1.0
        } else {
            self.jumps[idx - 1].1
        }
    }

    /// `S(time-)`: survival after every event strictly before `time`.
    pub fn survival_before(&self, time: f64) -> f64 {
        let idx = self.jumps.partition_point(|&(t, _)| t < time);
        if idx == 0 {
            1.0
        } else {
            self.jumps[idx - 1].1
        }
    }
}

/// Product-limit CDF obtained by fitting Kaplan-Meier to `-X` and reading
/// `F(t) = P(-X >= -t) = S((-t)-)`.
pub fn km_negation_oracle(data: &Dataset) -> StepCdf {
    let times: Vec<f64> = data.observations().iter().map(|o| -o.value).collect();
    let events: Vec<bool> = data.observations().iter().map(|o| o.detected).collect();
    let km = KmCurve::fit(&times, &events);
    // Event times in ascending order are the exact values in descending order.
    let values: Vec<f64> = km.jumps().iter().rev().map(|&(t, _)| -t).collect();
    let mut levels = Vec::with_capacity(values.len() + 1);
    levels.push(km.jumps().last().map_or(1.0, |&(_, s)| s));
    levels.extend(values.iter().map(|&x| km.survival_before(-x)));
    StepCdf::from_levels(Method::KmNegation, &values, &levels)
}
