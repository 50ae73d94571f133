//! Smoothed bootstrap with the covariate counts held fixed.
//!
//! Event times come from the Kaplan-Meier estimate below `a_x` and from the
//! clipped smoothed Grenander density on `[a_x, y_max]`; whatever probability
//! is left over is the estimated cure fraction and yields `T* = inf`.
//! Censoring times come from the censoring Kaplan-Meier estimate with its
//! defect mass placed at `y_max`, so `Y* <= y_max` always holds.

use rand::distributions::Open01;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{grenander_of, rule_bandwidth, SmoothedCdfGrid, SmoothedGrenander};
use crate::density::STATISTIC_BANDWIDTH_EXPONENT;
use crate::error::{Error, Result};
use crate::fit::LevelFit;
use crate::rng::{tag, Stream};
use crate::survival::{km_event, Observation, StepDistribution};

pub const DEFAULT_GRID_SIZE: usize = 1024;
pub const DEFAULT_MAX_RETRIES: usize = 10;
pub const MIN_REPLICATES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub grid_size: usize,
    pub max_retries: usize,
}

impl BootstrapConfig {
    pub fn new(replicates: usize) -> Self {
        Self {
            replicates,
            grid_size: DEFAULT_GRID_SIZE,
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < MIN_REPLICATES {
            return Err(Error::Config(format!(
                "at least {MIN_REPLICATES} bootstrap replicates are required, got {}",
                self.replicates
            )));
        }
        if self.grid_size < crate::density::MIN_GRID_SIZE {
            return Err(Error::Config(format!(
                "CDF grid size must be at least {}, got {}",
                crate::density::MIN_GRID_SIZE,
                self.grid_size
            )));
        }
        Ok(())
    }
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self::new(500)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventDraw {
    Time(f64),
    Cured,
}

/// Maps a uniform `u` to a bootstrap event time. If the clipped smoothed mass
/// exceeds `1 - F(a_x)`, the smoothed part is rescaled to fill it and no draw
/// is cured.
pub fn draw_event_time(
    u: f64,
    f_hat: &StepDistribution,
    grid: &SmoothedCdfGrid,
    a_x: f64,
) -> EventDraw {
    let below = f_hat.eval(a_x);
    let mass = grid.mass();
    let room = 1.0 - below;
    if u <= below {
        EventDraw::Time(f_hat.generalized_inverse(u, a_x).min(a_x))
    } else if mass > room {
        EventDraw::Time(grid.inverse((u - below) * mass / room))
    } else if u <= below + mass {
        EventDraw::Time(grid.inverse(u - below))
    } else {
        EventDraw::Cured
    }
}

pub fn draw_censoring_time(v: f64, g_hat: &StepDistribution, y_max: f64) -> f64 {
    g_hat.generalized_inverse(v, y_max)
}

/// Everything needed to generate bootstrap subsamples for one level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSampler {
    pub level: usize,
    pub n_x: usize,
    pub a_x: f64,
    pub y_max: f64,
    pub f_hat: StepDistribution,
    pub g_hat: StepDistribution,
    pub grid: SmoothedCdfGrid,
}

impl LevelSampler {
    pub fn new(
        level: usize,
        n_x: usize,
        f_hat: StepDistribution,
        g_hat: StepDistribution,
        generating: &SmoothedGrenander<'_>,
        grid_size: usize,
    ) -> Result<Self> {
        let (a_x, y_max) = generating.domain();
        Ok(Self {
            level,
            n_x,
            a_x,
            y_max,
            f_hat,
            g_hat,
            grid: SmoothedCdfGrid::build(generating, grid_size)?,
        })
    }

    /// Probability that a bootstrap subject is uncured.
    pub fn uncured_mass(&self) -> f64 {
        (self.f_hat.eval(self.a_x) + self.grid.mass()).min(1.0)
    }

    pub fn draw_event_time(&self, u: f64) -> EventDraw {
        draw_event_time(u, &self.f_hat, &self.grid, self.a_x)
    }

    pub fn draw_censoring_time(&self, v: f64) -> f64 {
        draw_censoring_time(v, &self.g_hat, self.y_max)
    }

    pub fn draw_observation<R: Rng + ?Sized>(&self, rng: &mut R) -> Observation {
        let u: f64 = rng.sample(Open01);
        let v: f64 = rng.sample(Open01);
        let c = self.draw_censoring_time(v);
        match self.draw_event_time(u) {
            EventDraw::Time(t) if t <= c => Observation::new(t, true, self.level),
            _ => Observation::new(c, false, self.level),
        }
    }

    pub fn draw_subsample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Observation> {
        (0..self.n_x).map(|_| self.draw_observation(rng)).collect()
    }
}

/// Bootstrap statistics for one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDraws {
    pub level: usize,
    /// `f*_{b_x}(Y*_max) - max(f_{b0_x}(Y_max), 0)`, one per replicate.
    pub d_star: Vec<f64>,
    /// `f*_{b_x}(Y*_max) - eps F*(Y*_max) / (tau - Y*_max)`, one per replicate.
    pub t_star: Vec<f64>,
    /// Replicates that had to be redrawn.
    pub redraws: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapDraws {
    pub levels: Vec<LevelDraws>,
}

impl BootstrapDraws {
    pub fn get(&self, level: usize) -> Option<&LevelDraws> {
        self.levels.iter().find(|d| d.level == level)
    }
}

/// Smoothed estimate at the largest time of a bootstrap subsample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateEstimate {
    pub y_max: f64,
    pub f_at_y_max: f64,
    pub smoothed_at_y_max: f64,
}

/// Refits the estimator on a (bootstrap) subsample. `None` when the subsample
/// has no events or no room above `a_x`.
pub fn replicate_estimate(sub: &[Observation], a_x: f64) -> Option<ReplicateEstimate> {
    let y_max = sub.iter().map(|o| o.time).fold(f64::MIN, f64::max);
    if !(y_max > a_x) {
        return None;
    }
    let f_hat = km_event(sub).ok()?;
    let density = grenander_of(&f_hat, a_x, y_max).ok()?;
    let b = rule_bandwidth(sub.len(), y_max, a_x, STATISTIC_BANDWIDTH_EXPONENT);
    let smoothed_at_y_max = SmoothedGrenander::new(&density, b, a_x, y_max)
        .eval(y_max)
        .ok()?;
    Some(ReplicateEstimate {
        y_max,
        f_at_y_max: f_hat.eval(y_max),
        smoothed_at_y_max,
    })
}

fn one_replicate(
    fit: &LevelFit,
    stream: Stream,
    max_retries: usize,
) -> Result<(ReplicateEstimate, usize)> {
    for attempt in 0..=max_retries {
        let mut rng = stream.child(attempt as u64).rng();
        let sub = fit.sampler.draw_subsample(&mut rng);
        if let Some(est) = replicate_estimate(&sub, fit.a_x) {
            return Ok((est, attempt));
        }
    }
    Err(Error::DegenerateBootstrap {
        level: fit.level,
        attempts: max_retries + 1,
    })
}

/// Runs `config.replicates` bootstrap replicates for every fitted level.
/// Replicate `b` of level `x` uses the stream `stream / BOOTSTRAP / x / b`,
/// and results are written by index, so the output does not depend on the
/// number of worker threads.
pub fn bootstrap_distributions(
    fits: &[LevelFit],
    config: &BootstrapConfig,
    epsilon: f64,
    tau: f64,
    stream: Stream,
) -> Result<BootstrapDraws> {
    config.validate()?;
    let root = stream.child(tag::BOOTSTRAP);
    let levels = fits
        .iter()
        .map(|fit| {
            if !(tau > fit.summary.y_max) {
                return Err(Error::Config(
                    "tau must exceed the largest observed time".into(),
                ));
            }
            let level_stream = root.child(fit.level as u64);
            let results: Vec<Result<(ReplicateEstimate, usize)>> = (0..config.replicates)
                .into_par_iter()
                .map(|b| one_replicate(fit, level_stream.child(b as u64), config.max_retries))
                .collect();
            let centre = fit.bootstrap_centre();
            let mut d_star = Vec::with_capacity(config.replicates);
            let mut t_star = Vec::with_capacity(config.replicates);
            let mut redraws = 0;
            for r in results {
                let (est, attempts) = r?;
                redraws += attempts;
                d_star.push(est.smoothed_at_y_max - centre);
                t_star.push(
                    est.smoothed_at_y_max - epsilon * est.f_at_y_max / (tau - est.y_max),
                );
            }
            Ok(LevelDraws {
                level: fit.level,
                d_star,
                t_star,
                redraws,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BootstrapDraws { levels })
}
