//! Least concave majorant of a distribution estimate and its left derivative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survival::StepDistribution;

/// Piecewise-linear concave function through `(knots[i], knot_values[i])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcaveMajorant {
    knots: Vec<f64>,
    knot_values: Vec<f64>,
}

impl ConcaveMajorant {
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn knot_values(&self) -> &[f64] {
        &self.knot_values
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.knots
            .iter()
            .copied()
            .zip(self.knot_values.iter().copied())
            .collect()
    }

    /// Linear interpolation; clamps outside the knot range.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.knots.len();
        if t <= self.knots[0] {
            return self.knot_values[0];
        }
        if t >= self.knots[n - 1] {
            return self.knot_values[n - 1];
        }
        let i = self.knots.partition_point(|&k| k <= t) - 1;
        let (t0, t1) = (self.knots[i], self.knots[i + 1]);
        let (y0, y1) = (self.knot_values[i], self.knot_values[i + 1]);
        y0 + (y1 - y0) * (t - t0) / (t1 - t0)
    }
}

#[inline]
fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Upper hull of points with strictly increasing abscissae (monotone chain).
/// Collinear interior points are dropped.
pub fn lcm(points: &[(f64, f64)]) -> Result<ConcaveMajorant> {
    if points.len() < 2 {
        return Err(Error::DegenerateDomain(points.len()));
    }
    debug_assert!(points.windows(2).all(|w| w[0].0 < w[1].0));
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) >= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let (knots, knot_values) = hull.into_iter().unzip();
    Ok(ConcaveMajorant { knots, knot_values })
}

/// Majorant of the step function `f_hat` on `[a_x, y_max]`, anchored at the
/// two endpoints and every jump in between.
pub fn lcm_of_step(f_hat: &StepDistribution, a_x: f64, y_max: f64) -> Result<ConcaveMajorant> {
    if !(y_max > a_x) {
        return Err(Error::DegenerateDomain(1));
    }
    let mut points = Vec::with_capacity(f_hat.jump_times().len() + 2);
    points.push((a_x, f_hat.eval(a_x)));
    for (&t, &v) in f_hat.jump_times().iter().zip(f_hat.values()) {
        if t > a_x && t < y_max {
            points.push((t, v));
        }
    }
    points.push((y_max, f_hat.eval(y_max)));
    lcm(&points)
}

/// Nonincreasing step density on `[breakpoints[0], breakpoints[last]]`;
/// `slopes[i]` applies on `(breakpoints[i], breakpoints[i + 1]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrenanderDensity {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
}

impl GrenanderDensity {
    /// Panics unless `breakpoints.len() == slopes.len() + 1`.
    pub fn from_parts(breakpoints: Vec<f64>, slopes: Vec<f64>) -> Self {
        assert_eq!(breakpoints.len(), slopes.len() + 1);
        Self {
            breakpoints,
            slopes,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn lower(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn upper(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1]
    }

    /// Left-continuous value; zero outside the support.
    pub fn eval(&self, u: f64) -> f64 {
        if u < self.lower() || u > self.upper() {
            return 0.0;
        }
        let i = self.breakpoints.partition_point(|&b| b < u);
        self.slopes[i.saturating_sub(1).min(self.slopes.len() - 1)]
    }

    pub fn mass(&self) -> f64 {
        self.slopes
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(s, w)| s * (w[1] - w[0]))
            .sum()
    }
}

/// Slopes of the majorant's linear pieces.
pub fn grenander(majorant: &ConcaveMajorant) -> GrenanderDensity {
    let slopes = majorant
        .knots
        .windows(2)
        .zip(majorant.knot_values.windows(2))
        .map(|(t, y)| ((y[1] - y[0]) / (t[1] - t[0])).max(0.0))
        .collect();
    GrenanderDensity {
        breakpoints: majorant.knots.clone(),
        slopes,
    }
}
