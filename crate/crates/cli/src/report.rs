//! Report and manifest types written by the CLI.

use std::io::Write;

use followup::density::{BOOTSTRAP_BANDWIDTH_EXPONENT, STATISTIC_BANDWIDTH_EXPONENT};
use followup::procedure::{Method1, Method2};
use followup::{LevelFit, LevelResult, SurvivalDataset};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
    pub rows: usize,
}

/// `b = y_max * min(n^(-exponent), cap)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthRule {
    pub statistic_exponent: f64,
    pub bootstrap_exponent: f64,
    pub cap: f64,
}

impl Default for BandwidthRule {
    fn default() -> Self {
        Self {
            statistic_exponent: STATISTIC_BANDWIDTH_EXPONENT,
            bootstrap_exponent: BOOTSTRAP_BANDWIDTH_EXPONENT,
            cap: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestParams {
    pub time_col: String,
    pub event_col: String,
    pub covariate_cols: Vec<String>,
    pub epsilon: f64,
    pub tau: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub bootstrap: usize,
    pub grid_size: usize,
    pub seed: u64,
    pub a_x: Vec<f64>,
    pub bandwidth_rule: BandwidthRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateParams {
    pub time_col: String,
    pub event_col: String,
    pub covariate_cols: Vec<String>,
    pub a_x: Vec<f64>,
    pub bandwidth_rule: BandwidthRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest<P> {
    pub command: String,
    pub version: String,
    pub input: InputDigest,
    pub params: P,
}

impl<P> RunManifest<P> {
    pub fn new(command: &str, input: InputDigest, params: P) -> Self {
        Self {
            command: command.to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            input,
            params,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReportFile {
    pub manifest: RunManifest<TestParams>,
    pub levels: Vec<LevelResult>,
    pub method1: Option<Method1>,
    pub method2: Option<Method2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub level: usize,
    pub label: String,
    pub n_x: usize,
    /// Share of the sample in this level.
    pub rho_hat: f64,
    pub y_max: f64,
    pub y_max_uncensored: f64,
    pub censoring_rate: f64,
    pub cure_rate_hat: f64,
    pub smoothed_density_at_y_max: f64,
    pub b_x: f64,
    pub b0_x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReportFile {
    pub manifest: RunManifest<EstimateParams>,
    pub levels: Vec<EstimateRow>,
}

/// Writes JSON with a trailing newline.
pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")
}

/// Long-format curves for plotting: the product-limit estimate at 0 and at
/// each jump, and the knots of its least concave majorant on `[a_x, y_max]`.
pub fn write_plot_data<W: Write>(
    dataset: &SurvivalDataset,
    fits: &[LevelFit],
    out: W,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["level", "label", "curve", "t", "value"])?;
    for fit in fits {
        let id = fit.level.to_string();
        let label = &dataset.levels()[fit.level].label;
        let f = &fit.summary.f_hat;
        let mut row = |curve: &str, t: f64, v: f64| {
            w.write_record([id.as_str(), label.as_str(), curve, &t.to_string(), &v.to_string()])
        };
        row("km", 0.0, 0.0)?;
        for (&t, &v) in f.jump_times().iter().zip(f.values()) {
            row("km", t, v)?;
        }
        let m = fit.majorant();
        for (&t, &v) in m.knots().iter().zip(m.knot_values()) {
            row("lcm", t, v)?;
        }
    }
    w.flush()
}

pub fn write_estimate_csv<W: Write>(rows: &[EstimateRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
}
