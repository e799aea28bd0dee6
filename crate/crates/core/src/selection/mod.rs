//! Latent-dimension selection and community detection on fitted positions.

mod cluster;

pub use cluster::{kmeans_communities, misclassification, ClusterEval, KmeansFit};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gof::{test_undirected_bootstrap, BernoulliSampler, TestReport, DEFAULT_BOOTSTRAP};
use crate::graph::{Graph, NodeLabeling};
use crate::models::{fit_latent_space, LatentSpaceParams, PgdOptions};
use crate::rng::{derive_seed, tags};

/// `ceil(sqrt(n))`, capped at 12.
pub fn default_max_dim(n: usize) -> usize {
    ((n as f64).sqrt().ceil() as usize).clamp(1, 12)
}

#[derive(Clone, Debug)]
pub struct SelectionOptions {
    pub pgd: PgdOptions,
    pub bootstrap: usize,
    pub alpha: f64,
    /// Defaults to [`default_max_dim`] when `None`.
    pub max_d: Option<usize>,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        SelectionOptions {
            pgd: PgdOptions::default(),
            bootstrap: DEFAULT_BOOTSTRAP,
            alpha: 0.05,
            max_d: None,
        }
    }
}

/// Outcome at one candidate dimension.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DimensionTrial {
    pub d: usize,
    /// Seed handed to the bootstrap test at this dimension.
    pub seed: u64,
    pub pgd_iterations: usize,
    pub pgd_converged: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub report: Option<TestReport>,
    /// Fitting or testing failure; the dimension counts as rejected.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl DimensionTrial {
    pub fn rejected(&self) -> bool {
        self.report.as_ref().is_none_or(|r| r.reject)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DimensionScan {
    /// First dimension not rejected; `None` when every candidate was.
    pub d_fit: Option<usize>,
    pub exhausted: bool,
    pub max_d: usize,
    pub trail: Vec<DimensionTrial>,
    /// Fit at `d_fit`.
    #[serde(skip)]
    pub fit: Option<LatentSpaceParams>,
}

/// Fits the latent space model at `d = 1, 2, ...` and returns the first
/// dimension whose bootstrap test does not reject.
pub fn select_dimension(g: &Graph, opts: &SelectionOptions, seed: u64) -> Result<DimensionScan> {
    if g.is_directed() {
        return Err(Error::Invalid("dimension selection needs an undirected graph".into()));
    }
    let n = g.n();
    let max_d = opts.max_d.unwrap_or_else(|| default_max_dim(n));
    if max_d == 0 || max_d >= n {
        return Err(Error::Invalid(format!("max_d = {max_d} for {n} nodes")));
    }
    let mut trail = Vec::new();
    for d in 1..=max_d {
        let test_seed = derive_seed(seed, tags::DIMENSION, d as u64);
        let (trial, fit) = try_dimension(g, d, opts, test_seed);
        let accepted = !trial.rejected();
        trail.push(trial);
        if accepted {
            return Ok(DimensionScan {
                d_fit: Some(d),
                exhausted: false,
                max_d,
                trail,
                fit,
            });
        }
    }
    Ok(DimensionScan {
        d_fit: None,
        exhausted: true,
        max_d,
        trail,
        fit: None,
    })
}

/// Test statistic and clustering quality at one fitted dimension.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CommunityRow {
    pub d: usize,
    pub trial: DimensionTrial,
    /// k-means within-cluster sum of squares on the fitted positions.
    pub wcss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub misclassification: Option<f64>,
    pub labels: Option<Vec<usize>>,
}

/// For each `d` in `dims`: fit, test, and run k-means with `k` clusters on the
/// fitted positions, scoring against `truth` when given. A dimension whose fit
/// fails keeps its error in the trial and has no labels.
pub fn community_scan(
    g: &Graph,
    k: usize,
    dims: &[usize],
    opts: &SelectionOptions,
    restarts: usize,
    truth: Option<&NodeLabeling>,
    seed: u64,
) -> Result<Vec<CommunityRow>> {
    if g.is_directed() {
        return Err(Error::Invalid("community detection needs an undirected graph".into()));
    }
    if let Some(t) = truth {
        if t.len() != g.n() {
            return Err(Error::Invalid(format!("{} true labels for {} nodes", t.len(), g.n())));
        }
    }
    let mut rows = Vec::with_capacity(dims.len());
    for &d in dims {
        if d == 0 || d >= g.n() {
            return Err(Error::Invalid(format!("dimension {d} for {} nodes", g.n())));
        }
        let (trial, fit) = try_dimension(g, d, opts, derive_seed(seed, tags::DIMENSION, d as u64));
        let mut row = CommunityRow {
            d,
            trial,
            wcss: None,
            misclassification: None,
            labels: None,
        };
        if let Some(fit) = fit {
            let km = kmeans_communities(&fit.z, k, restarts, derive_seed(seed, tags::KMEANS, d as u64))?;
            if let Some(t) = truth {
                row.misclassification = Some(misclassification(&km.labels, t)?.rate);
            }
            row.wcss = Some(km.wcss);
            row.labels = Some(km.labels.labels().to_vec());
        }
        rows.push(row);
    }
    Ok(rows)
}

fn try_dimension(g: &Graph, d: usize, opts: &SelectionOptions, seed: u64) -> (DimensionTrial, Option<LatentSpaceParams>) {
    let mut trial = DimensionTrial {
        d,
        seed,
        pgd_iterations: 0,
        pgd_converged: false,
        report: None,
        error: None,
    };
    let fit = match fit_latent_space(g, d, None, &opts.pgd) {
        Ok(f) => f,
        Err(e) => {
            trial.error = Some(e.to_string());
            return (trial, None);
        }
    };
    trial.pgd_iterations = fit.iterations;
    trial.pgd_converged = fit.converged;
    let outcome = fit.params.prob_matrix().and_then(|p_hat| {
        test_undirected_bootstrap(g, &BernoulliSampler(&p_hat), &p_hat, opts.bootstrap, opts.alpha, seed)
    });
    match outcome {
        Ok(r) => trial.report = Some(r),
        Err(e) => trial.error = Some(e.to_string()),
    }
    (trial, Some(fit.params))
}
