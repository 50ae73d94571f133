//! Base kernels and the boundary-correction coefficients.

use crate::error::{Error, Result};

const SINGULAR_TOL: f64 = 1e-14;

/// A symmetric kernel supported on `[-1, 1]` whose partial moments
/// `m_j(s) = int_{-1}^{s} v^j k(v) dv`, `j = 0, 1, 2`, are known in closed form.
pub trait Kernel: Send + Sync {
    fn value(&self, v: f64) -> f64;

    /// `(m_0(s), m_1(s), m_2(s))`; `s` is clamped to `[-1, 1]`.
    fn partial_moments(&self, s: f64) -> [f64; 3];
}

/// `k(v) = (35/32)(1 - v^2)^3` on `[-1, 1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Triweight;

const C: f64 = 35.0 / 32.0;

#[inline]
fn triweight_antiderivatives(v: f64) -> [f64; 3] {
    let v2 = v * v;
    let v3 = v2 * v;
    let v4 = v2 * v2;
    let v5 = v4 * v;
    let v6 = v4 * v2;
    let v7 = v6 * v;
    let v8 = v4 * v4;
    let v9 = v8 * v;
    [
        C * (v - v3 + 0.6 * v5 - v7 / 7.0),
        C * (0.5 * v2 - 0.75 * v4 + 0.5 * v6 - 0.125 * v8),
        C * (v3 / 3.0 - 0.6 * v5 + 3.0 * v7 / 7.0 - v9 / 9.0),
    ]
}

impl Kernel for Triweight {
    fn value(&self, v: f64) -> f64 {
        if v.abs() > 1.0 {
            0.0
        } else {
            let w = 1.0 - v * v;
            C * w * w * w
        }
    }

    fn partial_moments(&self, s: f64) -> [f64; 3] {
        let s = s.clamp(-1.0, 1.0);
        let hi = triweight_antiderivatives(s);
        let lo = triweight_antiderivatives(-1.0);
        [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]]
    }
}

/// Solves `phi m0 + psi m1 = 1`, `phi m1 + psi m2 = 0` for the moments of
/// `kernel` over `[-1, s]`.
pub fn boundary_coeffs<K: Kernel + ?Sized>(kernel: &K, s: f64) -> Result<(f64, f64)> {
    let [m0, m1, m2] = kernel.partial_moments(s);
    let det = m0 * m2 - m1 * m1;
    if det.abs() < SINGULAR_TOL {
        return Err(Error::SingularBoundarySystem(s));
    }
    Ok((m2 / det, -m1 / det))
}
