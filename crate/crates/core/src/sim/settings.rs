//! Data-generating processes of the simulation study.
//!
//! | id | covariate               | p(x)                             | uncured law                  | censoring `C~`              |
//! |----|-------------------------|----------------------------------|------------------------------|-----------------------------|
//! | 1  | Bernoulli(rho)          | logistic(-0.6 + 1.3x)            | Weibull(1.2 e^{-0.9x}, 0.8)  | uniform, `dG = 0.01`        |
//! | 2  | Bernoulli(rho)          | given                            | Exp(5 - 0.5x)                | Exp(1 + 1.5x)               |
//! | 3  | two dependent binaries  | logistic(-0.6 + 1.3x1 - 0.3x2)   | Exp(1 - 0.25x1 - 0.3x2)      | uniform, `dG = 0.01`        |
//! | 4  | Bernoulli(rho)          | given                            | Exp(1)                       | uniform, `dG` in {0, 0.01}  |
//!
//! In every setting the observed censoring time is `min(C~, tau_G(x))`.

use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survival::{CovariateLevel, Observation, SurvivalDataset};

pub const TAU_QUANTILE_LEVELS: [f64; 5] = [0.95, 0.975, 0.99, 0.995, 0.999];
/// `tau` is the largest uncured quantile at this level across covariates.
pub const TAU_REFERENCE_QUANTILE: f64 = 0.9999;

const SETTING3_PMF: [f64; 4] = [0.36, 0.24, 0.16, 0.24];
const SETTING3_BITS: [(f64, f64); 4] = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "setting", rename_all = "snake_case")]
pub enum Setting {
    /// Setting 1.
    Weibull { rho: f64 },
    /// Setting 2.
    ExpExp { rho: f64, p: [f64; 2] },
    /// Setting 3; levels in order (0,0), (0,1), (1,0), (1,1).
    TwoCovariates,
    /// Setting 4.
    ExpUnif { rho: f64, p: [f64; 2], delta_g: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UncuredLaw {
    Exponential { rate: f64 },
    /// `F(t) = 1 - exp(-scale t^shape)`.
    Weibull { scale: f64, shape: f64 },
}

impl UncuredLaw {
    pub fn cdf(&self, t: f64) -> f64 {
        match *self {
            UncuredLaw::Exponential { rate } => 1.0 - (-rate * t).exp(),
            UncuredLaw::Weibull { scale, shape } => 1.0 - (-scale * t.powf(shape)).exp(),
        }
    }

    pub fn quantile(&self, q: f64) -> f64 {
        let h = -(1.0 - q).ln();
        match *self {
            UncuredLaw::Exponential { rate } => h / rate,
            UncuredLaw::Weibull { scale, shape } => (h / scale).powf(1.0 / shape),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CensoringLaw {
    /// `C~ ~ U[0, zeta]` with `zeta` chosen so `P(C~ >= tau_G) = delta_g`.
    Uniform { delta_g: f64 },
    Exponential { rate: f64 },
}

/// `C = min(C~, tau_G)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensoringSampler {
    pub law: CensoringLaw,
    pub tau_g: f64,
}

impl CensoringSampler {
    /// Upper end of the uniform law, `tau_G / (1 - delta_g)`.
    pub fn zeta(&self) -> Option<f64> {
        match self.law {
            CensoringLaw::Uniform { delta_g } => Some(self.tau_g / (1.0 - delta_g)),
            CensoringLaw::Exponential { .. } => None,
        }
    }

    /// `P(C = tau_G)`.
    pub fn mass_at_end(&self) -> f64 {
        match self.law {
            CensoringLaw::Uniform { delta_g } => delta_g,
            CensoringLaw::Exponential { rate } => (-rate * self.tau_g).exp(),
        }
    }

    /// `P(C <= t)` for `t < tau_G`.
    pub fn cdf(&self, t: f64) -> f64 {
        if t >= self.tau_g {
            return 1.0;
        }
        match self.law {
            CensoringLaw::Uniform { delta_g } => t * (1.0 - delta_g) / self.tau_g,
            CensoringLaw::Exponential { rate } => 1.0 - (-rate * t).exp(),
        }
    }

    /// `P(C >= t)` for `t <= tau_G`.
    pub fn survival_at(&self, t: f64) -> f64 {
        match self.law {
            CensoringLaw::Uniform { delta_g } => 1.0 - t * (1.0 - delta_g) / self.tau_g,
            CensoringLaw::Exponential { rate } => (-rate * t).exp(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        let raw = match self.law {
            CensoringLaw::Uniform { delta_g } => u * self.tau_g / (1.0 - delta_g),
            CensoringLaw::Exponential { rate } => -u.ln() / rate,
        };
        raw.min(self.tau_g)
    }
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl Setting {
    pub fn id(&self) -> u8 {
        match self {
            Setting::Weibull { .. } => 1,
            Setting::ExpExp { .. } => 2,
            Setting::TwoCovariates => 3,
            Setting::ExpUnif { .. } => 4,
        }
    }

    pub fn n_levels(&self) -> usize {
        match self {
            Setting::TwoCovariates => 4,
            _ => 2,
        }
    }

    pub fn level_labels(&self) -> Vec<String> {
        match self {
            Setting::TwoCovariates => SETTING3_BITS
                .iter()
                .map(|(a, b)| format!("({a},{b})"))
                .collect(),
            _ => vec!["0".into(), "1".into()],
        }
    }

    pub fn levels(&self) -> Vec<CovariateLevel> {
        self.level_labels()
            .into_iter()
            .enumerate()
            .map(|(id, label)| CovariateLevel { id, label })
            .collect()
    }

    pub fn level_probabilities(&self) -> Vec<f64> {
        match *self {
            Setting::Weibull { rho } | Setting::ExpExp { rho, .. } | Setting::ExpUnif { rho, .. } => {
                vec![1.0 - rho, rho]
            }
            Setting::TwoCovariates => SETTING3_PMF.to_vec(),
        }
    }

    /// `p(x)`, the probability of being uncured.
    pub fn uncure_probability(&self, level: usize) -> f64 {
        match *self {
            Setting::Weibull { .. } => logistic(-0.6 + 1.3 * level as f64),
            Setting::ExpExp { p, .. } | Setting::ExpUnif { p, .. } => p[level],
            Setting::TwoCovariates => {
                let (x1, x2) = SETTING3_BITS[level];
                logistic(-0.6 + 1.3 * x1 - 0.3 * x2)
            }
        }
    }

    pub fn uncured_law(&self, level: usize) -> UncuredLaw {
        let x = level as f64;
        match *self {
            Setting::Weibull { .. } => UncuredLaw::Weibull {
                scale: 1.2 * (-0.9 * x).exp(),
                shape: 0.8,
            },
            Setting::ExpExp { .. } => UncuredLaw::Exponential { rate: 5.0 - 0.5 * x },
            Setting::TwoCovariates => {
                let (x1, x2) = SETTING3_BITS[level];
                UncuredLaw::Exponential {
                    rate: 1.0 - 0.25 * x1 - 0.3 * x2,
                }
            }
            Setting::ExpUnif { .. } => UncuredLaw::Exponential { rate: 1.0 },
        }
    }

    pub fn uncured_quantile(&self, level: usize, q: f64) -> f64 {
        self.uncured_law(level).quantile(q)
    }

    pub fn censoring_law(&self, level: usize) -> CensoringLaw {
        match *self {
            Setting::Weibull { .. } | Setting::TwoCovariates => CensoringLaw::Uniform { delta_g: 0.01 },
            Setting::ExpUnif { delta_g, .. } => CensoringLaw::Uniform { delta_g },
            Setting::ExpExp { .. } => CensoringLaw::Exponential {
                rate: 1.0 + 1.5 * level as f64,
            },
        }
    }

    pub fn censoring_for_level(&self, level: usize, tau_g: f64) -> CensoringSampler {
        CensoringSampler {
            law: self.censoring_law(level),
            tau_g,
        }
    }

    /// `max_x q_0.9999(x)`.
    pub fn tau(&self) -> f64 {
        (0..self.n_levels())
            .map(|x| self.uncured_quantile(x, TAU_REFERENCE_QUANTILE))
            .fold(f64::MIN, f64::max)
    }

    /// Short `key=value` description of the free parameters.
    pub fn params_label(&self) -> String {
        match *self {
            Setting::Weibull { rho } => format!("rho={rho}"),
            Setting::ExpExp { rho, p } => format!("rho={rho};p={}/{}", p[0], p[1]),
            Setting::TwoCovariates => "joint_pmf=0.36/0.24/0.16/0.24".into(),
            Setting::ExpUnif { rho, p, delta_g } => {
                format!("rho={rho};p={}/{};deltaG={delta_g}", p[0], p[1])
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit_open = |v: f64| v > 0.0 && v < 1.0;
        let unit_closed = |v: f64| (0.0..=1.0).contains(&v);
        match *self {
            Setting::Weibull { rho } if !unit_open(rho) => {
                Err(Error::Config(format!("rho must be in (0, 1), got {rho}")))
            }
            Setting::ExpExp { rho, p } | Setting::ExpUnif { rho, p, .. }
                if !unit_open(rho) || !p.iter().all(|&v| unit_closed(v)) =>
            {
                Err(Error::Config(format!(
                    "rho must be in (0, 1) and p in [0, 1], got rho={rho}, p={p:?}"
                )))
            }
            Setting::ExpUnif { delta_g, .. } if delta_g != 0.0 && delta_g != 0.01 => Err(
                Error::Config(format!("deltaG must be 0 or 0.01, got {delta_g}")),
            ),
            _ => Ok(()),
        }
    }
}

/// A setting together with the follow-up length of each level, expressed as
/// a quantile level of that level's uncured distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    #[serde(flatten)]
    pub setting: Setting,
    pub tau_quantiles: Vec<f64>,
    /// Test only these levels (no combined decisions).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tested_levels: Option<Vec<usize>>,
}

impl Case {
    pub fn new(setting: Setting, tau_quantiles: Vec<f64>) -> Self {
        Self {
            setting,
            tau_quantiles,
            tested_levels: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.setting.validate()?;
        let d = self.setting.n_levels();
        if self.tau_quantiles.len() != d {
            return Err(Error::Config(format!(
                "setting {} has {d} levels but {} tau quantile levels were given",
                self.setting.id(),
                self.tau_quantiles.len()
            )));
        }
        if let Some(q) = self
            .tau_quantiles
            .iter()
            .find(|q| !TAU_QUANTILE_LEVELS.iter().any(|l| (*l - **q).abs() < 1e-12))
        {
            return Err(Error::Config(format!(
                "tau quantile level {q} is not one of {TAU_QUANTILE_LEVELS:?}"
            )));
        }
        if let Some(levels) = &self.tested_levels {
            if levels.is_empty() || levels.iter().any(|&l| l >= d) {
                return Err(Error::Config("tested levels out of range".into()));
            }
        }
        Ok(())
    }

    pub fn tau_g(&self, level: usize) -> f64 {
        self.setting
            .uncured_quantile(level, self.tau_quantiles[level])
    }

    pub fn censoring(&self, level: usize) -> CensoringSampler {
        self.setting.censoring_for_level(level, self.tau_g(level))
    }

    pub fn scenario(&self) -> Scenario {
        classify_scenario(&self.tau_quantiles)
    }

    /// `P(C < T)` for a subject of `level`, from
    /// `P(T <= C | uncured) = int_0^{F_u(tau_G)} P(C >= F_u^{-1}(u)) du`
    /// by composite Simpson.
    pub fn censoring_probability(&self, level: usize) -> f64 {
        let p = self.setting.uncure_probability(level);
        let law = self.setting.uncured_law(level);
        let cens = self.censoring(level);
        let upper = law.cdf(cens.tau_g);
        let steps = 2_000;
        let h = upper / steps as f64;
        let g = |u: f64| cens.survival_at(law.quantile(u).min(cens.tau_g));
        let mut acc = g(0.0) + g(upper);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * g(i as f64 * h);
        }
        1.0 - p * acc * h / 3.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    A,
    B,
    C,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Scenario::A => "A",
            Scenario::B => "B",
            Scenario::C => "C",
        };
        f.write_str(s)
    }
}

/// C: every level beyond the 0.99 quantile. B: every level at or beyond it,
/// or exactly one at 0.975 with the rest at or beyond 0.99. A: otherwise.
pub fn classify_scenario(levels: &[f64]) -> Scenario {
    const TOL: f64 = 1e-12;
    if levels.iter().all(|&q| q > 0.99 + TOL) {
        return Scenario::C;
    }
    let at_least = |q: f64| q >= 0.99 - TOL;
    let at_975 = levels.iter().filter(|&&q| (q - 0.975).abs() < TOL).count();
    let rest_ok = levels
        .iter()
        .filter(|&&q| (q - 0.975).abs() >= TOL)
        .all(|&q| at_least(q));
    if levels.iter().all(|&q| at_least(q)) || (at_975 == 1 && rest_ok) {
        Scenario::B
    } else {
        Scenario::A
    }
}

/// One sample of size `n` from the case's mixture cure model.
pub fn generate_dataset<R: Rng + ?Sized>(case: &Case, n: usize, rng: &mut R) -> Result<SurvivalDataset> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let setting = &case.setting;
    let d = setting.n_levels();
    let probs = setting.level_probabilities();
    let samplers: Vec<CensoringSampler> = (0..d).map(|x| case.censoring(x)).collect();
    let laws: Vec<UncuredLaw> = (0..d).map(|x| setting.uncured_law(x)).collect();
    let uncure: Vec<f64> = (0..d).map(|x| setting.uncure_probability(x)).collect();
    let mut observations = Vec::with_capacity(n);
    for _ in 0..n {
        let mut u: f64 = rng.gen();
        let mut level = d - 1;
        for (x, &p) in probs.iter().enumerate() {
            if u < p {
                level = x;
                break;
            }
            u -= p;
        }
        let uncured = rng.gen::<f64>() < uncure[level];
        let t = if uncured {
            laws[level].quantile(rng.sample(Open01))
        } else {
            f64::INFINITY
        };
        let c = samplers[level].sample(rng);
        observations.push(if t <= c {
            Observation::new(t, true, level)
        } else {
            Observation::new(c, false, level)
        });
    }
    SurvivalDataset::new(observations, setting.levels())
}
