#![allow(dead_code)]

use followup::Observation;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small sample with deliberate ties: times on a coarse lattice.
pub fn tied_sample(rng: &mut impl Rng, n: usize) -> Vec<Observation> {
    (0..n)
        .map(|_| {
            let t = rng.gen_range(1..=8) as f64 * 0.5;
            Observation::new(t, rng.gen_bool(0.6), 0)
        })
        .collect()
}

pub fn continuous_sample(rng: &mut impl Rng, n: usize, p_event: f64) -> Vec<Observation> {
    (0..n)
        .map(|_| {
            let t = -rng.gen::<f64>().ln() * 2.0 + 1e-9;
            Observation::new(t, rng.gen_bool(p_event), 0)
        })
        .collect()
}

/// Textbook product-limit estimate of the event distribution at `t`.
/// Events at a tied time leave before censorings.
pub fn km_oracle(sub: &[Observation], t: f64) -> f64 {
    let mut times: Vec<f64> = sub.iter().filter(|o| o.event).map(|o| o.time).collect();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup();
    let mut surv = 1.0;
    for &s in times.iter().filter(|&&s| s <= t) {
        let at_risk = sub.iter().filter(|o| o.time >= s).count() as f64;
        let deaths = sub.iter().filter(|o| o.event && o.time == s).count() as f64;
        surv *= 1.0 - deaths / at_risk;
    }
    1.0 - surv
}

/// Product-limit estimate of the censoring distribution: at a tie, the
/// events have already left the risk set.
pub fn km_censoring_oracle(sub: &[Observation], t: f64) -> f64 {
    let mut times: Vec<f64> = sub.iter().filter(|o| !o.event).map(|o| o.time).collect();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup();
    let mut surv = 1.0;
    for &s in times.iter().filter(|&&s| s <= t) {
        let at_risk = sub
            .iter()
            .filter(|o| o.time > s || (o.time == s && !o.event))
            .count() as f64;
        let cens = sub.iter().filter(|o| !o.event && o.time == s).count() as f64;
        surv *= 1.0 - cens / at_risk;
    }
    1.0 - surv
}

/// Weighted pool-adjacent-violators for a nonincreasing fit.
pub fn pava_decreasing(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, f64, usize)> = Vec::new();
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() > 1 {
            let (v2, w2, c2) = blocks[blocks.len() - 1];
            let (v1, w1, c1) = blocks[blocks.len() - 2];
            if v1 >= v2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            blocks.push(((v1 * w1 + v2 * w2) / (w1 + w2), w1 + w2, c1 + c2));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(v, _, c)| std::iter::repeat_n(v, c))
        .collect()
}

/// Tri-weight kernel written out as a polynomial.
pub fn triweight(v: f64) -> f64 {
    if v.abs() > 1.0 {
        0.0
    } else {
        35.0 / 32.0 * (1.0 - 3.0 * v * v + 3.0 * v.powi(4) - v.powi(6))
    }
}

/// `int_{-1}^{s} v^j k(v) dv` from the monomial expansion of the kernel.
pub fn triweight_moment(j: i32, s: f64) -> f64 {
    let coeffs = [(0, 1.0), (2, -3.0), (4, 3.0), (6, -1.0)];
    let s = s.clamp(-1.0, 1.0);
    coeffs
        .iter()
        .map(|&(p, c)| {
            let q = p + j + 1;
            c * (s.powi(q) - (-1.0f64).powi(q)) / q as f64
        })
        .sum::<f64>()
        * 35.0
        / 32.0
}

/// Cramer's rule for the boundary system with the oracle moments.
pub fn coeffs_oracle(s: f64) -> (f64, f64) {
    let (m0, m1, m2) = (triweight_moment(0, s), triweight_moment(1, s), triweight_moment(2, s));
    let det = m0 * m2 - m1 * m1;
    (m2 / det, -m1 / det)
}

/// Boundary kernel at `t`, evaluated at `v`, written independently of the library.
pub fn boundary_kernel(t: f64, v: f64, b: f64, a: f64, y: f64) -> f64 {
    if t < a + b {
        let (phi, psi) = coeffs_oracle(((t - a) / b).min(1.0));
        (phi + psi * v) * triweight(v)
    } else if t > y - b {
        let (phi, psi) = coeffs_oracle(((y - t) / b).min(1.0));
        (phi - psi * v) * triweight(v)
    } else {
        triweight(v)
    }
}

/// Trapezoid rule for `(1/b) int k^B((t-u)/b) f(u) du` with `points` nodes in
/// total, split at the breakpoints of the step density so each panel is smooth.
pub fn smoothed_trapezoid(
    breaks: &[f64],
    heights: &[f64],
    t: f64,
    b: f64,
    a: f64,
    y: f64,
    points: usize,
) -> f64 {
    let lo = a.max(t - b);
    let hi = y.min(t + b);
    let mut total = 0.0;
    for (i, &h) in heights.iter().enumerate() {
        let l = breaks[i].max(lo);
        let r = breaks[i + 1].min(hi);
        if r <= l || h == 0.0 {
            continue;
        }
        let m = ((points as f64 * (r - l) / (hi - lo)).ceil() as usize).max(2);
        let step = (r - l) / m as f64;
        let g = |u: f64| boundary_kernel(t, (t - u) / b, b, a, y);
        let mut s = 0.5 * (g(l) + g(r));
        for k in 1..m {
            s += g(l + k as f64 * step);
        }
        total += h * s * step;
    }
    total / b
}

/// Kolmogorov distance between a sample and a continuous CDF.
pub fn ks_distance(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
