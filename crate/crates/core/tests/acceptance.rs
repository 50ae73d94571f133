//! Acceptance criteria A1 to A9. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{
    coeffs_oracle, continuous_sample, km_oracle, pava_decreasing, rng, smoothed_trapezoid,
    tied_sample,
};
use followup::density::{boundary_coeffs, grenander_of, GrenanderDensity, Kernel, SmoothedGrenander, Triweight};
use followup::procedure::{run_tests, TestConfig};
use followup::sim::{generate_dataset, run_grid, write_csv, Case, CaseResult, HarnessConfig, Setting};
use followup::{km_event, Observation, Stream};
use rand::Rng;

const SEED: u64 = 20_240_917;

type Outcome = Result<String, String>;

fn check(cond: bool, ok: String, bad: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(bad)
    }
}

fn a1() -> Outcome {
    if boundary_coeffs(&Triweight, 1.0).map_err(|e| e.to_string())? != (1.0, 0.0) {
        return Err("boundary_coeffs(1) != (1, 0)".into());
    }
    let (m0, m1, m2) = (0.5, -35.0 / 256.0, 1.0 / 18.0);
    let det = m0 * m2 - m1 * m1;
    let (phi, psi) = boundary_coeffs(&Triweight, 0.0).map_err(|e| e.to_string())?;
    let err0 = (phi - m2 / det).abs().max((psi + m1 / det).abs());
    if err0 >= 1e-10 {
        return Err(format!("s=0 differs from the 2x2 solve by {err0:e}"));
    }
    let residual = |s: f64| -> Result<(f64, f64), String> {
        let (p, q) = boundary_coeffs(&Triweight, s).map_err(|e| e.to_string())?;
        let [n0, n1, n2] = Triweight.partial_moments(s);
        let abs = (p * n0 + q * n1 - 1.0).abs().max((p * n1 + q * n2).abs());
        Ok((abs, abs / (p * n0).abs().max(1.0)))
    };
    let mut r = rng(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        worst = worst.max(residual(r.gen::<f64>())?.0);
    }
    let mut scaled: f64 = 0.0;
    for _ in 0..100 {
        scaled = scaled.max(residual(-0.94 * r.gen::<f64>())?.1);
    }
    let (po, qo) = coeffs_oracle(0.5);
    let (p5, q5) = boundary_coeffs(&Triweight, 0.5).map_err(|e| e.to_string())?;
    let err5 = ((p5 - po) / po).abs().max(((q5 - qo) / qo).abs());
    check(
        worst < 1e-12 && err5 < 1e-10,
        format!("s=0 err {err0:.1e}; max residual {worst:.1e} over 100 s in [0, 1]; scaled residual {scaled:.1e} on (-0.94, 0]"),
        format!("max residual {worst:e}, s=0.5 oracle err {err5:e}"),
    )
}

fn a2() -> Outcome {
    let mut r = rng(SEED + 2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = r.gen_range(2..=50);
        let mut xs: Vec<f64> = (0..n).map(|_| r.gen::<f64>().powi(2) * 5.0 + 1e-6).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let sub: Vec<Observation> = xs.iter().map(|&t| Observation::new(t, true, 0)).collect();
        let f = km_event(&sub).map_err(|e| e.to_string())?;
        let g = grenander_of(&f, 0.0, xs[n - 1]).map_err(|e| e.to_string())?;
        let mut left = 0.0;
        let (mut raw, mut lens) = (Vec::new(), Vec::new());
        for &x in &xs {
            lens.push(x - left);
            raw.push(1.0 / (n as f64 * (x - left)));
            left = x;
        }
        let fit = pava_decreasing(&raw, &lens);
        let mut left = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            worst = worst.max((g.eval(0.5 * (left + x)) - fit[i]).abs() / fit[i].max(1.0));
            left = x;
        }
    }
    let mut bad = 0;
    for i in 0..300 {
        let p_event = 0.3 + 0.6 * r.gen::<f64>();
        let sub = continuous_sample(&mut r, 5 + i % 80, p_event);
        let Ok(f) = km_event(&sub) else { continue };
        let y_max = sub.iter().map(|o| o.time).fold(0.0, f64::max);
        let a = if i % 3 == 0 { 0.0 } else { 0.5 * y_max * r.gen::<f64>() };
        let g = grenander_of(&f, a, y_max).map_err(|e| e.to_string())?;
        let monotone = g.slopes().windows(2).all(|w| w[0] >= w[1]) && g.slopes().iter().all(|&s| s >= 0.0);
        let mass_ok = (g.mass() - (f.eval(y_max) - f.eval(a))).abs() < 1e-10;
        if !(monotone && mass_ok) {
            bad += 1;
        }
    }
    check(
        worst < 1e-10 && bad == 0,
        format!("PAVA max diff {worst:.1e}; 300 censored inputs monotone and mass-conserving"),
        format!("PAVA max diff {worst:e}; {bad} censored inputs violate monotonicity or mass"),
    )
}

fn a3() -> Outcome {
    let mut r = rng(SEED + 3);
    let mut const_err: f64 = 0.0;
    for _ in 0..50 {
        let a = if r.gen_bool(0.5) { 0.0 } else { 2.0 * r.gen::<f64>() };
        let y = a + 0.5 + 5.0 * r.gen::<f64>();
        let c = 0.1 + r.gen::<f64>();
        let d = GrenanderDensity::from_parts(vec![a, y], vec![c]);
        let b = (y - a) * (0.05 + 0.44 * r.gen::<f64>());
        let s = SmoothedGrenander::new(&d, b, a, y);
        for t in [a, a + 0.5 * b, 0.5 * (a + y), y - 0.5 * b, y] {
            const_err = const_err.max((s.eval(t).map_err(|e| e.to_string())? - c).abs());
        }
    }
    let mut quad_err: f64 = 0.0;
    for _ in 0..30 {
        let a = if r.gen_bool(0.5) { 0.0 } else { r.gen::<f64>() };
        let y = a + 1.0 + 4.0 * r.gen::<f64>();
        let k = r.gen_range(1..10);
        let mut cuts: Vec<f64> = (0..k - 1).map(|_| a + (y - a) * r.gen::<f64>()).collect();
        cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
        let mut breaks = vec![a];
        breaks.extend(cuts);
        breaks.push(y);
        let mut h: Vec<f64> = (0..k).map(|_| 3.0 * r.gen::<f64>()).collect();
        h.sort_by(|p, q| q.partial_cmp(p).unwrap());
        let d = GrenanderDensity::from_parts(breaks, h);
        let b = (y - a) * (0.05 + 0.44 * r.gen::<f64>());
        let s = SmoothedGrenander::new(&d, b, a, y);
        for t in [a, y, a + (y - a) * r.gen::<f64>()] {
            let oracle = smoothed_trapezoid(d.breakpoints(), d.slopes(), t, b, a, y, 100_000);
            quad_err = quad_err.max((s.eval(t).map_err(|e| e.to_string())? - oracle).abs());
        }
    }
    check(
        const_err < 1e-10 && quad_err < 1e-6,
        format!("constant reproduction err {const_err:.1e}; trapezoid oracle err {quad_err:.1e}"),
        format!("constant reproduction err {const_err:e}; trapezoid oracle err {quad_err:e}"),
    )
}

fn grid(cases: &[Case], n: usize, reps: usize) -> Result<Vec<CaseResult>, String> {
    run_grid(cases, &HarnessConfig::new(n, reps, 500, SEED)).map_err(|e| e.to_string())
}

fn se(p: f64, r: usize) -> f64 {
    (p * (1.0 - p) / r as f64).sqrt()
}

fn a4() -> Outcome {
    let mut case = Case::new(Setting::TwoCovariates, vec![0.99; 4]);
    case.tested_levels = Some(vec![1]);
    let res = grid(&[case], 2000, 500)?;
    let rate = res[0].reject_individual[1].ok_or("level (0,1) not tested")?;
    let m = res[0].effective_replications();
    check(
        (rate - 0.18).abs() <= 0.05,
        format!("rejection rate of H0 at (0,1) = {rate:.3} over {m} replications (target 0.18 +- 0.05)"),
        format!("rejection rate of H0 at (0,1) = {rate:.3} over {m} replications, outside 0.18 +- 0.05"),
    )
}

fn a5() -> Outcome {
    let case = Case::new(Setting::ExpUnif { rho: 0.5, p: [0.6, 0.6], delta_g: 0.01 }, vec![0.95, 0.95]);
    let res = grid(&[case], 1000, 200)?;
    let bound = 0.05 + 2.0 * se(0.05, 200);
    let m1 = res[0].reject_method1.ok_or("no Method 1 rate")?;
    let m2 = res[0].reject_method2.ok_or("no Method 2 rate")?;
    check(
        m1 <= bound && m2 <= bound,
        format!("M1 = {m1:.3}, M2 = {m2:.3} <= {bound:.4}"),
        format!("M1 = {m1:.3}, M2 = {m2:.3}, bound {bound:.4}"),
    )
}

fn setting2(q: f64) -> Case {
    Case::new(Setting::ExpExp { rho: 0.5, p: [0.7, 0.7] }, vec![q, q])
}

fn a6_a7() -> (Outcome, Outcome) {
    let reps = 200;
    let res = match grid(&[setting2(0.995), setting2(0.999)], 1000, reps) {
        Ok(r) => r,
        Err(e) => return (Err(e.clone()), Err(e)),
    };
    let (lo, hi) = (&res[0], &res[1]);
    let rates = |c: &CaseResult| {
        vec![
            ("x=0", c.reject_individual[0].unwrap()),
            ("x=1", c.reject_individual[1].unwrap()),
            ("M1", c.reject_method1.unwrap()),
            ("M2", c.reject_method2.unwrap()),
        ]
    };
    let mut notes = Vec::new();
    let mut ok = true;
    for ((name, p), (_, q)) in rates(lo).into_iter().zip(rates(hi)) {
        let tol = 2.0 * (se(p, reps).powi(2) + se(q, reps).powi(2)).sqrt();
        ok &= q >= p - tol;
        notes.push(format!("{name} {p:.3}->{q:.3}"));
    }
    for c in [lo, hi] {
        let (m1, m2) = (c.reject_method1.unwrap(), c.reject_method2.unwrap());
        ok &= m2 >= m1 - 0.02;
    }
    notes.push(format!(
        "M2-M1 = {:.3}/{:.3}",
        lo.reject_method2.unwrap() - lo.reject_method1.unwrap(),
        hi.reject_method2.unwrap() - hi.reject_method1.unwrap()
    ));
    let a6 = check(ok, notes.join(", "), notes.join(", "));

    let (p0, p1) = (lo.reject_individual[0].unwrap(), lo.reject_individual[1].unwrap());
    let m1 = lo.reject_method1.unwrap();
    let prod = p0 * p1;
    let se_diff = (se(m1, reps).powi(2) + (p1 * se(p0, reps)).powi(2) + (p0 * se(p1, reps)).powi(2)).sqrt();
    let a7 = check(
        (m1 - prod).abs() <= 3.0 * se_diff,
        format!("tau_G = q0.995/q0.995: M1 = {m1:.3}, product = {prod:.3}, 3 SE = {:.3}", 3.0 * se_diff),
        format!("M1 = {m1:.3}, product = {prod:.3}, 3 SE = {:.3}", 3.0 * se_diff),
    );
    (a6, a7)
}

fn a8() -> Outcome {
    let cases = vec![
        Case::new(Setting::ExpExp { rho: 0.5, p: [0.3, 0.7] }, vec![0.975, 0.999]),
        Case::new(Setting::TwoCovariates, vec![0.99, 0.995, 0.95, 0.999]),
    ];
    let csv = |workers: usize| -> Result<Vec<u8>, String> {
        let mut cfg = HarnessConfig::new(800, 8, 100, SEED);
        cfg.workers = workers;
        let res = run_grid(&cases, &cfg).map_err(|e| e.to_string())?;
        let mut buf = Vec::new();
        write_csv(&res, &mut buf).map_err(|e| e.to_string())?;
        Ok(buf)
    };
    let base = csv(1)?;
    let same_grid = [2, 4, 7].iter().all(|&w| csv(w).as_ref() == Ok(&base));

    let data = generate_dataset(&cases[1], 2000, &mut Stream::root(SEED).rng()).map_err(|e| e.to_string())?;
    let cfg = TestConfig::new(cases[1].setting.tau());
    let report = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_tests(&data, &cfg, Stream::root(SEED)).map(|r| format!("{r:?}")))
    };
    let one = report(1).map_err(|e| e.to_string())?;
    let same_test = [3, 8].iter().all(|&t| report(t).as_ref().ok() == Some(&one));
    check(
        same_grid && same_test,
        "harness CSV and test report byte-identical for 1/2/4/7 workers and 1/3/8 threads".into(),
        format!("harness identical: {same_grid}; test report identical: {same_test}"),
    )
}

fn a9() -> Outcome {
    let mut r = rng(SEED + 9);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 200 {
        let sub = tied_sample(&mut r, 1 + checked % 30);
        let Ok(f) = km_event(&sub) else { continue };
        for o in &sub {
            for t in [o.time, o.time - 0.25] {
                worst = worst.max((f.eval(t) - km_oracle(&sub, t)).abs());
            }
        }
        checked += 1;
    }
    check(
        worst < 1e-12,
        format!("200 tied samples, max diff {worst:.1e}"),
        format!("max diff {worst:e}"),
    )
}

fn main() -> ExitCode {
    let mut failed = Vec::new();
    let mut report = |name: &str, title: &str, started: Instant, out: Outcome| {
        let secs = started.elapsed().as_secs_f64();
        match out {
            Ok(msg) => println!("PASS {name} {title}: {msg} [{secs:.1}s]"),
            Err(msg) => {
                println!("FAIL {name} {title}: {msg} [{secs:.1}s]");
                failed.push(name.to_owned());
            }
        }
    };
    let t = Instant::now();
    report("A1", "boundary coefficients", t, a1());
    let t = Instant::now();
    report("A2", "Grenander correctness", t, a2());
    let t = Instant::now();
    report("A3", "smoothing identities", t, a3());
    let t = Instant::now();
    report("A4", "Setting 3 anchor", t, a4());
    let t = Instant::now();
    report("A5", "level control", t, a5());
    let t = Instant::now();
    let (a6, a7) = a6_a7();
    report("A6", "power ordering and method comparison", t, a6);
    report("A7", "intersection-union product law", t, a7);
    let t = Instant::now();
    report("A8", "determinism", t, a8());
    let t = Instant::now();
    report("A9", "product-limit oracle", t, a9());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
