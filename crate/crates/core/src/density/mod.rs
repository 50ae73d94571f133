//! Monotone density estimation: least concave majorant, Grenander
//! estimator, and its boundary-corrected kernel smoothing.

mod kernel;
mod majorant;
mod smooth;

pub use kernel::{boundary_coeffs, Kernel, Triweight};
pub use majorant::{grenander, lcm, lcm_of_step, ConcaveMajorant, GrenanderDensity};
pub use smooth::{
    rule_bandwidth, smoothed_grenander_at, Bandwidths, SmoothedCdfGrid, SmoothedGrenander,
    BOOTSTRAP_BANDWIDTH_EXPONENT, MIN_GRID_SIZE, STATISTIC_BANDWIDTH_EXPONENT,
};

use crate::error::Result;
use crate::survival::StepDistribution;

/// Grenander density of the distribution estimate `f_hat` on `[a_x, y_max]`.
pub fn grenander_of(f_hat: &StepDistribution, a_x: f64, y_max: f64) -> Result<GrenanderDensity> {
    Ok(grenander(&lcm_of_step(f_hat, a_x, y_max)?))
}
