//! Boundary-corrected kernel smoothing of a Grenander density.
//!
//! The Grenander density is piecewise constant and the boundary kernel is
//! `(c0 + c1 v) k(v)`, so each piece contributes
//! `slope * (c0 [m_0] + c1 [m_1])` over its image in `v`. No quadrature is
//! involved in evaluating the estimator itself.

use serde::{Deserialize, Serialize};

use super::kernel::{boundary_coeffs, Kernel, Triweight};
use super::majorant::GrenanderDensity;
use crate::error::{Error, Result};

/// Exponent of the test-statistic bandwidth `y_max * min(n^(-7/30), 1/2)`.
pub const STATISTIC_BANDWIDTH_EXPONENT: f64 = 7.0 / 30.0;
/// Exponent of the bootstrap-generation bandwidth `y_max * min(n^(-1/9), 1/2)`.
pub const BOOTSTRAP_BANDWIDTH_EXPONENT: f64 = 1.0 / 9.0;

const DOMAIN_SLACK: f64 = 1e-12;

/// `y_max * min(n^(-exponent), 1/2)`, pulled just below half the estimation
/// window so the left and right boundary branches never overlap.
pub fn rule_bandwidth(n_x: usize, y_max: f64, a_x: f64, exponent: f64) -> f64 {
    let b = y_max * (n_x as f64).powf(-exponent).min(0.5);
    let half = 0.5 * (y_max - a_x);
    if b >= half {
        half * (1.0 - 4.0 * f64::EPSILON)
    } else {
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bandwidths {
    /// Bandwidth of the test statistic.
    pub b_x: f64,
    /// Bandwidth of the density the bootstrap samples from.
    pub b0_x: f64,
}

impl Bandwidths {
    pub fn from_rules(n_x: usize, y_max: f64, a_x: f64) -> Self {
        Self {
            b_x: rule_bandwidth(n_x, y_max, a_x, STATISTIC_BANDWIDTH_EXPONENT),
            b0_x: rule_bandwidth(n_x, y_max, a_x, BOOTSTRAP_BANDWIDTH_EXPONENT),
        }
    }
}

/// The smoothed estimator on `[a_x, y_max]` for one bandwidth.
#[derive(Debug, Clone, Copy)]
pub struct SmoothedGrenander<'a, K: Kernel = Triweight> {
    density: &'a GrenanderDensity,
    kernel: K,
    bandwidth: f64,
    a_x: f64,
    y_max: f64,
}

impl<'a> SmoothedGrenander<'a, Triweight> {
    pub fn new(density: &'a GrenanderDensity, bandwidth: f64, a_x: f64, y_max: f64) -> Self {
        Self::with_kernel(density, Triweight, bandwidth, a_x, y_max)
    }
}

impl<'a, K: Kernel> SmoothedGrenander<'a, K> {
    pub fn with_kernel(
        density: &'a GrenanderDensity,
        kernel: K,
        bandwidth: f64,
        a_x: f64,
        y_max: f64,
    ) -> Self {
        assert!(bandwidth > 0.0, "bandwidth must be positive");
        Self {
            density,
            kernel,
            bandwidth,
            a_x,
            y_max,
        }
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a_x, self.y_max)
    }

    /// Coefficients `(c0, c1)` of the kernel `(c0 + c1 v) k(v)` used at `t`.
    fn branch_coeffs(&self, t: f64) -> Result<(f64, f64)> {
        let b = self.bandwidth;
        if t < self.a_x + b {
            boundary_coeffs(&self.kernel, ((t - self.a_x) / b).min(1.0))
        } else if t > self.y_max - b {
            let (phi, psi) = boundary_coeffs(&self.kernel, ((self.y_max - t) / b).min(1.0))?;
            Ok((phi, -psi))
        } else {
            Ok((1.0, 0.0))
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= self.a_x - DOMAIN_SLACK && t <= self.y_max + DOMAIN_SLACK) {
            return Err(Error::Domain {
                t,
                lo: self.a_x,
                hi: self.y_max,
            });
        }
        let t = t.clamp(self.a_x, self.y_max);
        let (c0, c1) = self.branch_coeffs(t)?;
        Ok(self.integrate(t, c0, c1))
    }

    /// Plain kernel smoothing with no boundary correction; the convolution is
    /// still cut to `[a_x, y_max]`.
    pub fn eval_interior_kernel(&self, t: f64) -> f64 {
        self.integrate(t, 1.0, 0.0)
    }

    fn integrate(&self, t: f64, c0: f64, c1: f64) -> f64 {
        let b = self.bandwidth;
        let lo = self.a_x.max(t - b);
        let hi = self.y_max.min(t + b);
        if hi <= lo {
            return 0.0;
        }
        let bp = self.density.breakpoints();
        let slopes = self.density.slopes();
        // first piece whose right end exceeds `lo`
        let mut i = bp[1..].partition_point(|&r| r <= lo);
        let mut acc = 0.0;
        let mut m_upper = self.kernel.partial_moments((t - lo) / b);
        while i < slopes.len() && bp[i] < hi {
            let u1 = bp[i + 1].min(hi);
            let lower_v = (t - u1) / b;
            let m_lower = self.kernel.partial_moments(lower_v);
            let slope = slopes[i];
            if slope != 0.0 {
                acc += slope
                    * (c0 * (m_upper[0] - m_lower[0]) + c1 * (m_upper[1] - m_lower[1]));
            }
            m_upper = m_lower;
            i += 1;
        }
        acc
    }
}

/// Convenience wrapper around [`SmoothedGrenander::eval`] with the tri-weight kernel.
pub fn smoothed_grenander_at(
    density: &GrenanderDensity,
    t: f64,
    bandwidth: f64,
    a_x: f64,
    y_max: f64,
) -> Result<f64> {
    SmoothedGrenander::new(density, bandwidth, a_x, y_max).eval(t)
}

/// Cumulative integral of the clipped smoothed density `max(f, 0)` on an
/// equispaced grid over `[a_x, y_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedCdfGrid {
    a_x: f64,
    step: f64,
    cdf: Vec<f64>,
}

// 4-point Gauss-Legendre on [-1, 1]
const GL_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];
const SUB_PANELS: usize = 4;

pub const MIN_GRID_SIZE: usize = 256;

impl SmoothedCdfGrid {
    pub fn build<K: Kernel>(smoothed: &SmoothedGrenander<'_, K>, grid_size: usize) -> Result<Self> {
        if grid_size < MIN_GRID_SIZE {
            return Err(Error::Config(format!(
                "CDF grid size must be at least {MIN_GRID_SIZE}, got {grid_size}"
            )));
        }
        let (a_x, y_max) = smoothed.domain();
        let step = (y_max - a_x) / grid_size as f64;
        let sub = step / SUB_PANELS as f64;
        let mut cdf = Vec::with_capacity(grid_size + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for cell in 0..grid_size {
            let left = a_x + cell as f64 * step;
            let mut cell_mass = 0.0;
            for p in 0..SUB_PANELS {
                let mid = left + (p as f64 + 0.5) * sub;
                for (node, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
                    let u = (mid + 0.5 * sub * node).clamp(a_x, y_max);
                    cell_mass += w * smoothed.eval(u)?.max(0.0);
                }
            }
            acc += 0.5 * sub * cell_mass;
            cdf.push(acc);
        }
        Ok(Self { a_x, step, cdf })
    }

    pub fn grid_size(&self) -> usize {
        self.cdf.len() - 1
    }

    /// Total clipped mass on `[a_x, y_max]`.
    pub fn mass(&self) -> f64 {
        self.cdf[self.cdf.len() - 1]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.cdf
            .iter()
            .enumerate()
            .map(|(i, &c)| (self.a_x + i as f64 * self.step, c))
    }

    /// Piecewise-linear interpolation of the grid CDF at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let x = (t - self.a_x) / self.step;
        if x <= 0.0 {
            return 0.0;
        }
        let i = x.floor() as usize;
        if i >= self.grid_size() {
            return self.mass();
        }
        let frac = x - i as f64;
        self.cdf[i] + frac * (self.cdf[i + 1] - self.cdf[i])
    }

    /// Smallest `t` with interpolated CDF equal to `target`, for
    /// `target` in `[0, mass]`.
    pub fn inverse(&self, target: f64) -> f64 {
        let idx = self.cdf.partition_point(|&c| c < target);
        if idx == 0 {
            return self.a_x;
        }
        if idx >= self.cdf.len() {
            return self.a_x + self.grid_size() as f64 * self.step;
        }
        let (c0, c1) = (self.cdf[idx - 1], self.cdf[idx]);
        let frac = (target - c0) / (c1 - c0);
        self.a_x + (idx as f64 - 1.0 + frac) * self.step
    }
}
