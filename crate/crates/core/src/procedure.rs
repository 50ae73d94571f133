//! Per-level tests of insufficient follow-up and the two ways of combining
//! them across covariate levels.
//!
//! For each level the statistic is
//! `T(x) = f_{b_x}(Y_max) - eps F(Y_max) / (tau - Y_max)` and the null of
//! insufficient follow-up is rejected when `T(x)` falls below the
//! `alpha`-quantile of the bootstrap differences `D*`.
//!
//! * Method 1 rejects only if every level rejects (intersection-union).
//! * Method 2 picks the level with the largest `(1 - gamma)`-quantile of the
//!   bootstrap `T*` and uses that level's decision.

use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_distributions, BootstrapConfig, BootstrapDraws, LevelDraws};
use crate::density::Bandwidths;
use crate::error::{Error, Result};
use crate::fit::LevelFit;
use crate::rng::Stream;
use crate::survival::{partition, SurvivalDataset};

pub const DEFAULT_EPSILON: f64 = 0.01;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_GAMMA: f64 = 0.025;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub epsilon: f64,
    pub tau: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Start of the monotone tail per level; empty means 0 for every level.
    pub a_x: Vec<f64>,
    pub bootstrap: BootstrapConfig,
    /// Restrict testing to these levels. Combined decisions need every level.
    pub tested_levels: Option<Vec<usize>>,
}

impl TestConfig {
    pub fn new(tau: f64) -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            tau,
            alpha: DEFAULT_ALPHA,
            gamma: DEFAULT_GAMMA,
            a_x: Vec::new(),
            bootstrap: BootstrapConfig::default(),
            tested_levels: None,
        }
    }

    pub fn a_x_for(&self, level: usize) -> f64 {
        self.a_x.get(level).copied().unwrap_or(0.0)
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(self.epsilon) {
            return Err(Error::Config(format!("epsilon must be in (0, 1), got {}", self.epsilon)));
        }
        if !open_unit(self.alpha) {
            return Err(Error::Config(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        if !open_unit(self.gamma) {
            return Err(Error::Config(format!("gamma must be in (0, 1), got {}", self.gamma)));
        }
        if !self.tau.is_finite() {
            return Err(Error::Config("tau must be finite".into()));
        }
        if !self.a_x.is_empty() && self.a_x.len() != d {
            return Err(Error::Config(format!(
                "expected {d} values of a_x, got {}",
                self.a_x.len()
            )));
        }
        if let Some(levels) = &self.tested_levels {
            if levels.is_empty() || levels.iter().any(|&l| l >= d) {
                return Err(Error::Config("tested levels out of range".into()));
            }
        }
        self.bootstrap.validate()
    }
}

/// `f - eps F / (tau - y_max)`.
pub fn statistic(
    smoothed_at_y_max: f64,
    f_at_y_max: f64,
    y_max: f64,
    epsilon: f64,
    tau: f64,
) -> Result<f64> {
    if !(tau > y_max) {
        return Err(Error::Config(
            "tau must exceed the largest observed time".into(),
        ));
    }
    Ok(smoothed_at_y_max - epsilon * f_at_y_max / (tau - y_max))
}

/// Order-statistic quantile: `v_(ceil(q B))` of the sorted values, with
/// `ceil(0)` read as 1.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    quantile_sorted(&sorted, q)
}

pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let b = sorted.len();
    let k = ((q * b as f64).ceil() as usize).clamp(1, b);
    sorted[k - 1]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndividualDecision {
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
}

/// Compares the statistic with the `alpha`-quantile of `d_star`. The p-value
/// is `(1 + #{D* <= T}) / (B + 1)`.
pub fn individual_test(statistic: f64, d_star: &[f64], alpha: f64) -> IndividualDecision {
    let critical_value = quantile(d_star, alpha);
    let below = d_star.iter().filter(|&&d| d <= statistic).count();
    IndividualDecision {
        critical_value,
        p_value: (1 + below) as f64 / (d_star.len() + 1) as f64,
        reject: statistic < critical_value,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub level: usize,
    pub label: String,
    pub n_x: usize,
    pub y_max: f64,
    pub a_x: f64,
    pub statistic: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
    /// `(1 - gamma)`-quantile of the bootstrap statistic `T*`.
    pub q_upper: f64,
    pub smoothed_density_at_y_max: f64,
    pub f_hat_at_y_max: f64,
    pub cure_rate_hat: f64,
    pub bandwidths: Bandwidths,
    pub bootstrap_redraws: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Method1 {
    pub reject: bool,
    pub p_value: f64,
}

/// Rejects iff every level rejects; the p-value is the largest individual one.
pub fn method1(results: &[LevelResult]) -> Method1 {
    Method1 {
        reject: results.iter().all(|r| r.reject),
        p_value: results.iter().map(|r| r.p_value).fold(0.0, f64::max),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Method2 {
    pub selected_level: usize,
    pub selected_label: String,
    pub reject: bool,
    pub p_value: f64,
}

/// Index into `q_upper` of the largest value, ties to the first.
pub fn select_level(q_upper: &[f64]) -> usize {
    let mut best = 0;
    for (i, &q) in q_upper.iter().enumerate().skip(1) {
        if q > q_upper[best] {
            best = i;
        }
    }
    best
}

/// Follows the decision of the level with the largest `q_upper`; results must
/// be ordered by level id.
pub fn method2(results: &[LevelResult]) -> Method2 {
    let q: Vec<f64> = results.iter().map(|r| r.q_upper).collect();
    let chosen = &results[select_level(&q)];
    Method2 {
        selected_level: chosen.level,
        selected_label: chosen.label.clone(),
        reject: chosen.reject,
        p_value: chosen.p_value,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub levels: Vec<LevelResult>,
    /// Present when every level was tested.
    pub method1: Option<Method1>,
    pub method2: Option<Method2>,
}

/// Builds the per-level result from a fit and its bootstrap draws.
pub fn level_result(
    fit: &LevelFit,
    label: &str,
    draws: &LevelDraws,
    config: &TestConfig,
) -> Result<LevelResult> {
    let f_at = fit.summary.f_hat.eval(fit.summary.y_max);
    let stat = statistic(
        fit.smoothed_at_y_max,
        f_at,
        fit.summary.y_max,
        config.epsilon,
        config.tau,
    )?;
    let decision = individual_test(stat, &draws.d_star, config.alpha);
    Ok(LevelResult {
        level: fit.level,
        label: label.to_owned(),
        n_x: fit.summary.n_x,
        y_max: fit.summary.y_max,
        a_x: fit.a_x,
        statistic: stat,
        critical_value: decision.critical_value,
        p_value: decision.p_value,
        reject: decision.reject,
        q_upper: quantile(&draws.t_star, 1.0 - config.gamma),
        smoothed_density_at_y_max: fit.smoothed_at_y_max,
        f_hat_at_y_max: f_at,
        cure_rate_hat: fit.summary.cure_rate_hat,
        bandwidths: fit.bandwidths,
        bootstrap_redraws: draws.redraws,
    })
}

/// Fits every tested level of `dataset`.
pub fn fit_levels(dataset: &SurvivalDataset, config: &TestConfig) -> Result<Vec<LevelFit>> {
    let d = dataset.levels().len();
    config.validate(d)?;
    let groups = partition(dataset)?;
    let tested: Vec<usize> = match &config.tested_levels {
        Some(l) => l.clone(),
        None => (0..d).collect(),
    };
    tested
        .into_iter()
        .map(|x| {
            let fit = LevelFit::new(x, &groups[x], config.a_x_for(x), config.bootstrap.grid_size)?;
            if !(config.tau > fit.summary.y_max) {
                return Err(Error::Config(format!(
                    "tau = {} must exceed the largest observed time {} of level '{}'",
                    config.tau,
                    fit.summary.y_max,
                    dataset.levels()[x].label
                )));
            }
            Ok(fit)
        })
        .collect()
}

/// Assembles the report from fits and draws.
pub fn assemble_report(
    dataset: &SurvivalDataset,
    fits: &[LevelFit],
    draws: &BootstrapDraws,
    config: &TestConfig,
) -> Result<TestReport> {
    let levels = fits
        .iter()
        .map(|fit| {
            let d = draws
                .get(fit.level)
                .ok_or_else(|| Error::Config(format!("no bootstrap draws for level {}", fit.level)))?;
            level_result(fit, &dataset.levels()[fit.level].label, d, config)
        })
        .collect::<Result<Vec<_>>>()?;
    let complete = levels.len() == dataset.levels().len();
    Ok(TestReport {
        method1: complete.then(|| method1(&levels)),
        method2: complete.then(|| method2(&levels)),
        levels,
    })
}

/// Full pipeline: fit, bootstrap, per-level tests, Methods 1 and 2.
pub fn run_tests(dataset: &SurvivalDataset, config: &TestConfig, stream: Stream) -> Result<TestReport> {
    let fits = fit_levels(dataset, config)?;
    let draws = bootstrap_distributions(&fits, &config.bootstrap, config.epsilon, config.tau, stream)?;
    assemble_report(dataset, &fits, &draws, config)
}
