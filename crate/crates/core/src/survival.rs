//! Right-censored observations stratified by a categorical covariate, and the
//! conditional product-limit estimators of the event and censoring laws.
//!
//! Ties at a common time follow the usual survival convention: events happen
//! before censorings. For the event distribution this means censored subjects
//! at `t` are still at risk for the events at `t`; for the censoring
//! distribution the events at `t` leave the risk set first.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CovariateLevel {
    pub id: usize,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub time: f64,
    /// `true` when the event was observed, `false` when censored.
    pub event: bool,
    pub level: usize,
}

impl Observation {
    pub fn new(time: f64, event: bool, level: usize) -> Self {
        Self { time, event, level }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalDataset {
    observations: Vec<Observation>,
    levels: Vec<CovariateLevel>,
}

impl SurvivalDataset {
    /// Validates times and level references. Level ids must be `0..d` in order.
    pub fn new(observations: Vec<Observation>, levels: Vec<CovariateLevel>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if levels.is_empty() || levels.iter().enumerate().any(|(i, l)| l.id != i) {
            return Err(Error::Config(
                "covariate level ids must be dense and ordered 0..d".into(),
            ));
        }
        for (index, obs) in observations.iter().enumerate() {
            if !(obs.time.is_finite() && obs.time > 0.0) {
                return Err(Error::InvalidTime {
                    index,
                    time: obs.time,
                });
            }
            if obs.level >= levels.len() {
                return Err(Error::UnknownLevel {
                    index,
                    level: obs.level,
                });
            }
        }
        Ok(Self {
            observations,
            levels,
        })
    }

    /// Convenience constructor with numeric labels `"0"`, `"1"`, ...
    pub fn with_unlabelled_levels(observations: Vec<Observation>, d: usize) -> Result<Self> {
        let levels = (0..d)
            .map(|id| CovariateLevel {
                id,
                label: id.to_string(),
            })
            .collect();
        Self::new(observations, levels)
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn levels(&self) -> &[CovariateLevel] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Multiplies every time by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        let observations = self
            .observations
            .iter()
            .map(|o| Observation::new(o.time * factor, o.event, o.level))
            .collect();
        Self::new(observations, self.levels.clone())
    }
}

/// Splits the sample by covariate level, preserving input order within each
/// group. Entry `x` of the result holds the observations with level `x`.
pub fn partition(dataset: &SurvivalDataset) -> Result<Vec<Vec<Observation>>> {
    let mut groups = vec![Vec::new(); dataset.levels.len()];
    for obs in &dataset.observations {
        groups[obs.level].push(*obs);
    }
    if let Some(empty) = groups.iter().position(Vec::is_empty) {
        return Err(Error::DegenerateLevel(empty));
    }
    Ok(groups)
}

/// Right-continuous nondecreasing step function on `[0, inf)`, zero before
/// the first jump.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StepDistribution {
    jump_times: Vec<f64>,
    values: Vec<f64>,
}

impl StepDistribution {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `values[i]` is the value on `[jump_times[i], jump_times[i + 1])`.
    pub fn from_parts(jump_times: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(jump_times.len(), values.len());
        debug_assert!(jump_times.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        Self { jump_times, values }
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.last().is_none_or(|&v| v == 0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.jump_times.partition_point(|&s| s <= t) {
            0 => 0.0,
            i => self.values[i - 1],
        }
    }

    /// Value just before `t`.
    pub fn left_limit(&self, t: f64) -> f64 {
        match self.jump_times.partition_point(|&s| s < t) {
            0 => 0.0,
            i => self.values[i - 1],
        }
    }

    /// Largest value attained.
    pub fn total(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `inf { t >= 0 : F(t) >= p }`, or `fallback` when `F` never reaches `p`.
    pub fn generalized_inverse(&self, p: f64, fallback: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        let idx = self.values.partition_point(|&v| v < p);
        self.jump_times.get(idx).copied().unwrap_or(fallback)
    }

    pub fn scaled_time(&self, factor: f64) -> Self {
        Self {
            jump_times: self.jump_times.iter().map(|t| t * factor).collect(),
            values: self.values.clone(),
        }
    }
}

/// Observations sharing one time, after sorting.
#[derive(Debug, Clone, Copy)]
struct TimeGroup {
    time: f64,
    events: usize,
    censored: usize,
}

fn time_groups(sub: &[Observation]) -> Vec<TimeGroup> {
    let mut sorted: Vec<(f64, bool)> = sub.iter().map(|o| (o.time, o.event)).collect();
    sorted.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let mut groups: Vec<TimeGroup> = Vec::new();
    for (time, event) in sorted {
        match groups.last_mut() {
            Some(g) if g.time == time => {
                if event {
                    g.events += 1
                } else {
                    g.censored += 1
                }
            }
            _ => groups.push(TimeGroup {
                time,
                events: usize::from(event),
                censored: usize::from(!event),
            }),
        }
    }
    groups
}

/// Running product-limit value kept in telescoped form: between two removals
/// of the competing class, `1 - F` falls linearly in the number of primary
/// failures, so without censoring the estimate is exactly `count / n`.
struct ProductLimit {
    base_f: f64,
    base_s: f64,
    base_risk: usize,
    since: usize,
}

impl ProductLimit {
    fn new(n: usize) -> Self {
        Self {
            base_f: 0.0,
            base_s: 1.0,
            base_risk: n,
            since: 0,
        }
    }

    fn value(&self) -> f64 {
        if self.base_risk == 0 {
            return self.base_f;
        }
        (self.base_f + self.base_s * self.since as f64 / self.base_risk as f64).min(1.0)
    }

    /// The risk set shrank for a reason other than a primary failure.
    fn rebase(&mut self, at_risk: usize) {
        if self.base_risk > 0 && self.since > 0 {
            let r = self.base_risk as f64;
            self.base_f += self.base_s * self.since as f64 / r;
            self.base_s *= (self.base_risk - self.since) as f64 / r;
        }
        self.base_risk = at_risk;
        self.since = 0;
    }
}

/// `(1/n) #{Y <= t, event == k}` for the subsample.
pub fn ecdf_sub(sub: &[Observation], event: bool) -> StepDistribution {
    cumulative_counts(sub, |g| if event { g.events } else { g.censored })
}

/// `(1/n) #{Y <= t}`.
pub fn ecdf_all(sub: &[Observation]) -> StepDistribution {
    cumulative_counts(sub, |g| g.events + g.censored)
}

fn cumulative_counts(sub: &[Observation], count: impl Fn(&TimeGroup) -> usize) -> StepDistribution {
    let n = sub.len() as f64;
    let mut jumps = Vec::new();
    let mut values = Vec::new();
    let mut acc = 0usize;
    for g in time_groups(sub) {
        let c = count(&g);
        if c > 0 {
            acc += c;
            jumps.push(g.time);
            values.push(acc as f64 / n);
        }
    }
    StepDistribution::from_parts(jumps, values)
}

/// Kaplan-Meier estimate of the event-time distribution.
pub fn km_event(sub: &[Observation]) -> Result<StepDistribution> {
    if !sub.iter().any(|o| o.event) {
        return Err(Error::NoEvents);
    }
    let mut at_risk = sub.len();
    let mut pl = ProductLimit::new(at_risk);
    let mut jumps = Vec::new();
    let mut values = Vec::new();
    for g in time_groups(sub) {
        if g.events > 0 {
            pl.since += g.events;
            jumps.push(g.time);
            values.push(pl.value());
        }
        at_risk -= g.events + g.censored;
        if g.censored > 0 {
            pl.rebase(at_risk);
        }
    }
    Ok(StepDistribution::from_parts(jumps, values))
}

/// Kaplan-Meier estimate of the censoring distribution. Returns the zero
/// function when nothing is censored.
pub fn km_censoring(sub: &[Observation]) -> StepDistribution {
    let mut at_risk = sub.len();
    let mut pl = ProductLimit::new(at_risk);
    let mut jumps = Vec::new();
    let mut values = Vec::new();
    for g in time_groups(sub) {
        if g.events > 0 {
            at_risk -= g.events;
            pl.rebase(at_risk);
        }
        if g.censored > 0 {
            pl.since += g.censored;
            jumps.push(g.time);
            values.push(pl.value());
        }
        at_risk -= g.censored;
    }
    StepDistribution::from_parts(jumps, values)
}

/// Per-level quantities derived from one subsample.
#[derive(Debug, Clone, PartialEq)]
pub struct SubSampleSummary {
    pub n_x: usize,
    pub y_max: f64,
    pub y_max_uncensored: f64,
    pub f_hat: StepDistribution,
    pub g_hat: StepDistribution,
    pub h_hat: StepDistribution,
    pub h1_hat: StepDistribution,
    pub cure_rate_hat: f64,
}

impl SubSampleSummary {
    pub fn new(sub: &[Observation]) -> Result<Self> {
        if sub.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let f_hat = km_event(sub)?;
        let y_max = sub.iter().map(|o| o.time).fold(f64::MIN, f64::max);
        let y_max_uncensored = sub
            .iter()
            .filter(|o| o.event)
            .map(|o| o.time)
            .fold(f64::MIN, f64::max);
        let cure_rate_hat = (1.0 - f_hat.eval(y_max)).clamp(0.0, 1.0);
        Ok(Self {
            n_x: sub.len(),
            y_max,
            y_max_uncensored,
            g_hat: km_censoring(sub),
            h_hat: ecdf_all(sub),
            h1_hat: ecdf_sub(sub, true),
            f_hat,
            cure_rate_hat,
        })
    }

    pub fn censoring_rate(&self) -> f64 {
        1.0 - self.h1_hat.total()
    }
}
