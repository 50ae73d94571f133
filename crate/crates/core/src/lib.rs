//! Tests for sufficient follow-up in survival data with a cure fraction and
//! categorical covariates.
//!
//! The sample is split by covariate level. In each level the density of the
//! event time at the end of follow-up is estimated by a boundary-corrected
//! smoothed Grenander estimator, and its sampling distribution is
//! approximated by a smoothed bootstrap. The per-level tests are combined
//! either as an intersection-union test (Method 1) or by following the level
//! where follow-up is least likely to be sufficient (Method 2).
//!
//! ```no_run
//! use followup::{run_tests, Observation, Stream, SurvivalDataset, TestConfig};
//!
//! let obs = vec![Observation::new(1.2, true, 0), Observation::new(3.4, false, 1)];
//! let data = SurvivalDataset::with_unlabelled_levels(obs, 2).unwrap();
//! let report = run_tests(&data, &TestConfig::new(10.0), Stream::root(42)).unwrap();
//! println!("{:?}", report.method2);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bootstrap;
pub mod density;
pub mod error;
pub mod fit;
pub mod procedure;
pub mod rng;
pub mod sim;
pub mod survival;

pub use bootstrap::{bootstrap_distributions, BootstrapConfig, BootstrapDraws};
pub use error::{Error, Result};
pub use fit::{estimate_level, LevelEstimate, LevelFit};
pub use procedure::{run_tests, LevelResult, Method1, Method2, TestConfig, TestReport};
pub use rng::Stream;
pub use survival::{
    km_censoring, km_event, partition, CovariateLevel, Observation, StepDistribution,
    SubSampleSummary, SurvivalDataset,
};
