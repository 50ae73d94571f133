//! Parallel rejection-rate runner.
//!
//! Replication `r` of case `c` draws its data from the stream
//! `seed / c / r / DATA` and its bootstrap from `seed / c / r / BOOTSTRAP / x / b`.
//! Outcomes are stored by replication index, so results are identical for
//! every worker count.

use std::io::{self, Write};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::settings::{generate_dataset, Case, Scenario};
use crate::bootstrap::BootstrapConfig;
use crate::error::{Error, Result};
use crate::procedure::{run_tests, TestConfig, TestReport, DEFAULT_ALPHA, DEFAULT_EPSILON, DEFAULT_GAMMA};
use crate::rng::{tag, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub n: usize,
    pub replications: usize,
    pub epsilon: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub bootstrap: BootstrapConfig,
    pub workers: usize,
    pub seed: u64,
}

impl HarnessConfig {
    pub fn new(n: usize, replications: usize, bootstrap_replicates: usize, seed: u64) -> Self {
        Self {
            n,
            replications,
            epsilon: DEFAULT_EPSILON,
            alpha: DEFAULT_ALPHA,
            gamma: DEFAULT_GAMMA,
            bootstrap: BootstrapConfig::new(bootstrap_replicates),
            workers: 1,
            seed,
        }
    }

    pub fn test_config(&self, case: &Case) -> TestConfig {
        TestConfig {
            epsilon: self.epsilon,
            tau: case.setting.tau(),
            alpha: self.alpha,
            gamma: self.gamma,
            a_x: Vec::new(),
            bootstrap: self.bootstrap,
            tested_levels: case.tested_levels.clone(),
        }
    }
}

/// Aggregated outcome of one case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub case: Case,
    pub scenario: Scenario,
    pub n: usize,
    pub replications: usize,
    /// Replications that could not be tested (e.g. an empty level).
    pub failures: usize,
    /// Rejection rate of each level's own null; `None` for untested levels.
    pub reject_individual: Vec<Option<f64>>,
    pub reject_method1: Option<f64>,
    pub reject_method2: Option<f64>,
    /// How often Method 2 selected each level.
    pub selection_counts: Vec<usize>,
}

impl CaseResult {
    /// Number of replications that entered the rates.
    pub fn effective_replications(&self) -> usize {
        self.replications - self.failures
    }
}

/// Decisions of a single replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationOutcome {
    pub individual: Vec<Option<bool>>,
    pub method1: Option<bool>,
    pub method2: Option<bool>,
    pub selected: Option<usize>,
}

impl ReplicationOutcome {
    fn from_report(report: &TestReport, d: usize) -> Self {
        let mut individual = vec![None; d];
        for r in &report.levels {
            individual[r.level] = Some(r.reject);
        }
        Self {
            individual,
            method1: report.method1.map(|m| m.reject),
            method2: report.method2.as_ref().map(|m| m.reject),
            selected: report.method2.as_ref().map(|m| m.selected_level),
        }
    }
}

pub fn run_replication(
    case: &Case,
    case_index: usize,
    replication: usize,
    config: &HarnessConfig,
) -> Result<ReplicationOutcome> {
    let stream = Stream::root(config.seed)
        .child(case_index as u64)
        .child(replication as u64);
    let mut rng = stream.child(tag::DATA).rng();
    let dataset = generate_dataset(case, config.n, &mut rng)?;
    let report = run_tests(&dataset, &config.test_config(case), stream)?;
    Ok(ReplicationOutcome::from_report(&report, case.setting.n_levels()))
}

fn aggregate(case: &Case, config: &HarnessConfig, outcomes: &[Option<ReplicationOutcome>]) -> CaseResult {
    let d = case.setting.n_levels();
    let ok: Vec<&ReplicationOutcome> = outcomes.iter().flatten().collect();
    let m = ok.len();
    let rate = |count: usize| if m == 0 { f64::NAN } else { count as f64 / m as f64 };
    let reject_individual = (0..d)
        .map(|x| {
            let tested = ok.first().is_some_and(|o| o.individual[x].is_some());
            tested.then(|| rate(ok.iter().filter(|o| o.individual[x] == Some(true)).count()))
        })
        .collect();
    let combined = ok.first().is_some_and(|o| o.method1.is_some());
    let mut selection_counts = vec![0; d];
    for o in &ok {
        if let Some(s) = o.selected {
            selection_counts[s] += 1;
        }
    }
    CaseResult {
        case: case.clone(),
        scenario: case.scenario(),
        n: config.n,
        replications: outcomes.len(),
        failures: outcomes.len() - m,
        reject_individual,
        reject_method1: combined.then(|| rate(ok.iter().filter(|o| o.method1 == Some(true)).count())),
        reject_method2: combined.then(|| rate(ok.iter().filter(|o| o.method2 == Some(true)).count())),
        selection_counts,
    }
}

/// Runs every case with `config.replications` replications on a pool of
/// `config.workers` threads. `progress(case_index, done)` is called after
/// each finished replication.
pub fn run_grid_with_progress<F>(cases: &[Case], config: &HarnessConfig, progress: F) -> Result<Vec<CaseResult>>
where
    F: Fn(usize, usize) + Sync,
{
    if config.replications == 0 {
        return Err(Error::Config("at least one replication is required".into()));
    }
    if config.n == 0 {
        return Err(Error::Config("sample size must be positive".into()));
    }
    if config.workers == 0 {
        return Err(Error::Config("worker count must be positive".into()));
    }
    config.bootstrap.validate()?;
    for case in cases {
        case.validate()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        cases
            .iter()
            .enumerate()
            .map(|(ci, case)| {
                let done = AtomicUsize::new(0);
                let outcomes: Vec<Option<ReplicationOutcome>> = (0..config.replications)
                    .into_par_iter()
                    .map(|r| {
                        let out = run_replication(case, ci, r, config).ok();
                        progress(ci, done.fetch_add(1, Ordering::Relaxed) + 1);
                        out
                    })
                    .collect();
                Ok(aggregate(case, config, &outcomes))
            })
            .collect()
    })
}

pub fn run_grid(cases: &[Case], config: &HarnessConfig) -> Result<Vec<CaseResult>> {
    run_grid_with_progress(cases, config, |_, _| {})
}

fn fmt_rate(v: Option<f64>) -> String {
    v.map(|r| format!("{r}")).unwrap_or_default()
}

/// Writes results as CSV. Level columns run over the largest level count in
/// `results`; cells for absent or untested levels are empty.
pub fn write_csv<W: Write>(results: &[CaseResult], mut out: W) -> io::Result<()> {
    let d = results
        .iter()
        .map(|r| r.case.setting.n_levels())
        .max()
        .unwrap_or(0);
    let mut header = vec![
        "setting".to_string(),
        "scenario".into(),
        "tauG_levels".into(),
        "n".into(),
        "rho_params".into(),
    ];
    header.extend((0..d).map(|x| format!("reject_indiv_{x}")));
    header.push("reject_m1".into());
    header.push("reject_m2".into());
    header.extend((0..d).map(|x| format!("sel_count_{x}")));
    header.push("reps".into());
    header.push("failures".into());
    writeln!(out, "{}", header.join(","))?;
    for r in results {
        let tau_levels: Vec<String> = r.case.tau_quantiles.iter().map(|q| q.to_string()).collect();
        let mut row = vec![
            r.case.setting.id().to_string(),
            r.scenario.to_string(),
            tau_levels.join(";"),
            r.n.to_string(),
            r.case.setting.params_label(),
        ];
        row.extend((0..d).map(|x| fmt_rate(r.reject_individual.get(x).copied().flatten())));
        row.push(fmt_rate(r.reject_method1));
        row.push(fmt_rate(r.reject_method2));
        row.extend((0..d).map(|x| {
            r.selection_counts
                .get(x)
                .filter(|_| r.reject_method2.is_some())
                .map(|c| c.to_string())
                .unwrap_or_default()
        }));
        row.push(r.replications.to_string());
        row.push(r.failures.to_string());
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
