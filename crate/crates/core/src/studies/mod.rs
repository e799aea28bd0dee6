//! Simulation studies: size and power of the tests under the model families,
//! dimension recovery, and convergence of the undirected statistic.
//!
//! Every study is deterministic given its [`ExperimentConfig`]; the CSV form
//! carries the SHA-256 of the canonical config JSON and the seed.

mod convergence;
mod dims;
mod ergm_power;
mod partial;
mod undirected;

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gof::{DEFAULT_BOOTSTRAP, MIN_BOOTSTRAP};
use crate::rng::{derive_seed, tags};

pub use convergence::{scaled_lambda_max_sample, HistogramRow};

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Hex SHA-256 of the compact JSON form of any run configuration.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    sha256_hex(serde_json::to_string(config).expect("config serializes").as_bytes())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// β-model (expit) truth fitted by the β-model: size.
    Fig5Expit,
    /// β-model with exp link fitted by the expit β-model.
    Fig5Exp,
    /// `P_ij ~ Unif(0, 0.1)` fitted by the β-model.
    Fig5Nonpar,
    /// Latent dimension recovery.
    Fig4Dims,
    /// ERGM 2-star coefficient power curve.
    Fig7ErgmPower,
    /// ER test from aggregated relational data.
    Fig6Ard,
    /// Directed ER tests against a two-block directed SBM.
    Fig8Directed,
    /// Distribution of the scaled largest eigenvalue under the true `P`.
    TwConvergence,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Fig5Expit,
        Experiment::Fig5Exp,
        Experiment::Fig5Nonpar,
        Experiment::Fig4Dims,
        Experiment::Fig7ErgmPower,
        Experiment::Fig6Ard,
        Experiment::Fig8Directed,
        Experiment::TwConvergence,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Experiment::Fig5Expit => "fig5-expit",
            Experiment::Fig5Exp => "fig5-exp",
            Experiment::Fig5Nonpar => "fig5-nonpar",
            Experiment::Fig4Dims => "fig4-dims",
            Experiment::Fig7ErgmPower => "fig7-ergm-power",
            Experiment::Fig6Ard => "fig6-ard",
            Experiment::Fig8Directed => "fig8-directed",
            Experiment::TwConvergence => "tw-convergence",
        }
    }

    fn uses_bootstrap(self) -> bool {
        !matches!(self, Experiment::Fig6Ard | Experiment::TwConvergence)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.id() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown experiment '{s}'")))
    }
}

/// Full description of a study run.
///
/// `grid` depends on the experiment: true dimensions for `fig4-dims`, 2-star
/// coefficients for `fig7-ergm-power`, edge probabilities for
/// `tw-convergence`; it is ignored elsewhere. `param_sets` is the number of
/// drawn parameter sets per point in `fig4-dims` (1 elsewhere), and
/// `replicates` counts networks per parameter set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n_values: Vec<usize>,
    pub replicates: usize,
    pub bootstrap: usize,
    pub alpha: f64,
    pub seed: u64,
    pub grid: Vec<f64>,
    pub param_sets: usize,
}

impl ExperimentConfig {
    /// Desk-scale defaults.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = ExperimentConfig {
            experiment,
            n_values: vec![50, 100, 200],
            replicates: 100,
            bootstrap: DEFAULT_BOOTSTRAP,
            alpha: 0.05,
            seed: 2021,
            grid: Vec::new(),
            param_sets: 1,
        };
        match experiment {
            Experiment::Fig5Expit | Experiment::Fig5Exp | Experiment::Fig5Nonpar => {}
            Experiment::Fig4Dims => {
                c.n_values = vec![100, 200];
                c.grid = vec![1.0, 2.0];
                c.param_sets = 25;
                c.replicates = 20;
            }
            Experiment::Fig7ErgmPower => {
                c.n_values = vec![25, 50];
                c.grid = vec![-0.05, -0.025, 0.0, 0.025, 0.05];
            }
            Experiment::Fig6Ard => {
                c.n_values = vec![30, 60, 90, 120];
                c.replicates = 200;
            }
            Experiment::Fig8Directed => c.n_values = vec![25, 50, 100],
            Experiment::TwConvergence => {
                c.n_values = vec![1000];
                c.replicates = 2000;
                c.grid = vec![0.3];
            }
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Invalid("replicates must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Invalid(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if self.n_values.is_empty() {
            return Err(Error::Invalid("n_values is empty".into()));
        }
        if self.experiment.uses_bootstrap() && self.bootstrap < MIN_BOOTSTRAP {
            return Err(Error::Invalid(format!("B = {} is below {MIN_BOOTSTRAP}", self.bootstrap)));
        }
        if self.param_sets == 0 {
            return Err(Error::Invalid("param_sets must be at least 1".into()));
        }
        match self.experiment {
            Experiment::Fig4Dims => {
                if self.grid.is_empty() || self.grid.iter().any(|&d| d < 1.0 || d.fract() != 0.0) {
                    return Err(Error::Invalid("fig4-dims grid must list positive integer dimensions".into()));
                }
            }
            Experiment::Fig7ErgmPower => {
                if self.grid.is_empty() || self.grid.iter().any(|t| !t.is_finite()) {
                    return Err(Error::Invalid("fig7-ergm-power needs a finite 2-star grid".into()));
                }
                if self.n_values.iter().any(|&n| n < 5) {
                    return Err(Error::Invalid("fig7-ergm-power needs n >= 5".into()));
                }
            }
            Experiment::Fig6Ard => {
                if self.n_values.iter().any(|&n| n < 20 || n % 10 != 0) {
                    return Err(Error::Invalid("fig6-ard needs n a multiple of 10, at least 20".into()));
                }
            }
            Experiment::TwConvergence if self.grid.is_empty() || self.grid.iter().any(|&p| !(p > 0.0 && p < 1.0)) => {
                return Err(Error::Invalid("tw-convergence grid must hold probabilities in (0, 1)".into()));
            }
            _ => {}
        }
        if self.n_values.iter().any(|&n| n < 3) {
            return Err(Error::Invalid("every n must be at least 3".into()));
        }
        Ok(())
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of [`Self::canonical_json`].
    pub fn hash(&self) -> String {
        sha256_hex(self.canonical_json().as_bytes())
    }

    /// Seed for one parameter point, independent of what else is on the grid.
    pub(crate) fn point_seed(&self, n: usize, param: f64) -> u64 {
        derive_seed(derive_seed(self.seed, tags::REPLICATE, n as u64), tags::REPLICATE, param.to_bits())
    }
}

/// Rejection (or success) rate at one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub series: String,
    pub n: usize,
    pub param: Option<f64>,
    /// Replicates that produced a decision.
    pub trials: usize,
    pub hits: usize,
    /// Replicates whose fit or test failed; excluded from `trials`.
    pub errors: usize,
    /// Data sets redrawn because the model fit did not exist.
    pub redraws: usize,
    pub rate: f64,
    /// Binomial standard error of `rate`.
    pub se: f64,
}

impl RateRow {
    fn new(series: &str, n: usize, param: Option<f64>, outcomes: &[Outcome]) -> Self {
        let mut row = RateRow {
            series: series.to_string(),
            n,
            param,
            trials: 0,
            hits: 0,
            errors: 0,
            redraws: 0,
            rate: f64::NAN,
            se: f64::NAN,
        };
        for o in outcomes {
            row.redraws += o.redraws;
            match o.hit {
                Some(h) => {
                    row.trials += 1;
                    row.hits += h as usize;
                }
                None => row.errors += 1,
            }
        }
        if row.trials > 0 {
            let t = row.trials as f64;
            row.rate = row.hits as f64 / t;
            row.se = (row.rate * (1.0 - row.rate) / t).sqrt();
        }
        row
    }
}

/// One replicate's result for one series.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Outcome {
    pub hit: Option<bool>,
    pub redraws: usize,
}

impl Outcome {
    pub fn from_result(r: Result<bool>, redraws: usize) -> Self {
        Outcome { hit: r.ok(), redraws }
    }
}

/// Kolmogorov–Smirnov distance of one convergence sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsRow {
    pub n: usize,
    pub p: f64,
    pub replicates: usize,
    pub ks: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub rates: Vec<RateRow>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub histogram: Vec<HistogramRow>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub ks: Vec<KsRow>,
}

impl StudyReport {
    pub fn rate(&self, series: &str, n: usize, param: Option<f64>) -> Option<&RateRow> {
        self.rates
            .iter()
            .find(|r| r.series == series && r.n == n && r.param == param)
    }

    fn header(&self) -> String {
        format!(
            "# experiment={}\n# config_hash={}\n# seed={}\n# config={}\n",
            self.config.experiment,
            self.config_hash,
            self.config.seed,
            self.config.canonical_json()
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header();
        if self.config.experiment == Experiment::TwConvergence {
            for k in &self.ks {
                let _ = writeln!(out, "# ks n={} p={} replicates={} distance={:.6}", k.n, k.p, k.replicates, k.ks);
            }
            out.push_str("n,p,bin_lo,bin_hi,count,density,tw1_density\n");
            for h in &self.histogram {
                let _ = writeln!(
                    out,
                    "{},{},{:.4},{:.4},{},{:.6},{:.6}",
                    h.n, h.p, h.bin_lo, h.bin_hi, h.count, h.density, h.tw1_density
                );
            }
            return out;
        }
        out.push_str("series,n,param,trials,hits,errors,redraws,rate,se\n");
        for r in &self.rates {
            let param = r.param.map(|p| format!("{p}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{:.6},{:.6}",
                r.series, r.n, param, r.trials, r.hits, r.errors, r.redraws, r.rate, r.se
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs a study. Replicates run in parallel and are gathered in index order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<StudyReport> {
    config.validate()?;
    let mut report = StudyReport {
        config: config.clone(),
        config_hash: config.hash(),
        rates: Vec::new(),
        histogram: Vec::new(),
        ks: Vec::new(),
    };
    match config.experiment {
        Experiment::Fig5Expit | Experiment::Fig5Exp | Experiment::Fig5Nonpar => {
            report.rates = undirected::run(config)?;
        }
        Experiment::Fig4Dims => report.rates = dims::run(config)?,
        Experiment::Fig7ErgmPower => report.rates = ergm_power::run(config)?,
        Experiment::Fig6Ard => report.rates = partial::run_ard(config)?,
        Experiment::Fig8Directed => report.rates = partial::run_directed(config)?,
        Experiment::TwConvergence => {
            let (hist, ks) = convergence::run(config)?;
            report.histogram = hist;
            report.ks = ks;
        }
    }
    Ok(report)
}

/// Evaluates `f` on every replicate index in parallel, in index order.
pub(crate) fn replicate<T: Send>(count: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..count).into_par_iter().map(f).collect()
}
