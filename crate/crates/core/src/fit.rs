//! Per-level estimation shared by the statistic and the bootstrap.

use serde::{Deserialize, Serialize};

use crate::bootstrap::LevelSampler;
use crate::density::{
    grenander_of, lcm_of_step, Bandwidths, ConcaveMajorant, GrenanderDensity, SmoothedGrenander,
};
use crate::error::{Error, Result};
use crate::survival::{Observation, SubSampleSummary};

#[derive(Debug, Clone, PartialEq)]
pub struct LevelFit {
    pub level: usize,
    pub a_x: f64,
    pub summary: SubSampleSummary,
    pub density: GrenanderDensity,
    pub bandwidths: Bandwidths,
    /// Smoothed density at `y_max` with the statistic bandwidth `b_x`.
    pub smoothed_at_y_max: f64,
    /// Smoothed density at `y_max` with the generating bandwidth `b0_x`.
    pub generating_at_y_max: f64,
    pub sampler: LevelSampler,
}

impl LevelFit {
    pub fn new(level: usize, sub: &[Observation], a_x: f64, grid_size: usize) -> Result<Self> {
        let summary = SubSampleSummary::new(sub)?;
        let y_max = summary.y_max;
        if !(a_x >= 0.0 && a_x < y_max) {
            return Err(Error::Config(format!(
                "a_x = {a_x} must lie in [0, {y_max}) for level {level}"
            )));
        }
        let density = grenander_of(&summary.f_hat, a_x, y_max)?;
        let bandwidths = Bandwidths::from_rules(summary.n_x, y_max, a_x);
        let smoothed_at_y_max =
            SmoothedGrenander::new(&density, bandwidths.b_x, a_x, y_max).eval(y_max)?;
        let generating = SmoothedGrenander::new(&density, bandwidths.b0_x, a_x, y_max);
        let generating_at_y_max = generating.eval(y_max)?;
        let sampler = LevelSampler::new(
            level,
            summary.n_x,
            summary.f_hat.clone(),
            summary.g_hat.clone(),
            &generating,
            grid_size,
        )?;
        Ok(Self {
            level,
            a_x,
            summary,
            density,
            bandwidths,
            smoothed_at_y_max,
            generating_at_y_max,
            sampler,
        })
    }

    /// Density of the bootstrap population at `y_max`: the generating
    /// estimate clipped at zero, as the sampler sees it.
    pub fn bootstrap_centre(&self) -> f64 {
        self.generating_at_y_max.max(0.0)
    }

    pub fn majorant(&self) -> ConcaveMajorant {
        lcm_of_step(&self.summary.f_hat, self.a_x, self.summary.y_max)
            .expect("majorant was already built for this level")
    }
}

/// Plain per-level estimates, without anything bootstrap-related.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelEstimate {
    pub n_x: usize,
    pub y_max: f64,
    pub y_max_uncensored: f64,
    pub censoring_rate: f64,
    pub cure_rate_hat: f64,
    pub smoothed_density_at_y_max: f64,
    pub bandwidths: Bandwidths,
}

pub fn estimate_level(sub: &[Observation], a_x: f64) -> Result<LevelEstimate> {
    let summary = SubSampleSummary::new(sub)?;
    let y_max = summary.y_max;
    if !(a_x >= 0.0 && a_x < y_max) {
        return Err(Error::Config(format!("a_x = {a_x} must lie in [0, {y_max})")));
    }
    let density = grenander_of(&summary.f_hat, a_x, y_max)?;
    let bandwidths = Bandwidths::from_rules(summary.n_x, y_max, a_x);
    let smoothed = SmoothedGrenander::new(&density, bandwidths.b_x, a_x, y_max).eval(y_max)?;
    Ok(LevelEstimate {
        n_x: summary.n_x,
        y_max,
        y_max_uncensored: summary.y_max_uncensored,
        censoring_rate: summary.censoring_rate(),
        cure_rate_hat: summary.cure_rate_hat,
        smoothed_density_at_y_max: smoothed,
        bandwidths,
    })
}
