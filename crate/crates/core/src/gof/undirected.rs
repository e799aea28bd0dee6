use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{
    check_alpha, mean_sd, outside_open_interval, tw1_two_sided, BootstrapMeta, GraphSampler, Method, Reference, Refit,
    TestReport, MIN_BOOTSTRAP,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, ProbMatrix};
use crate::rmt::tw1_moments;
use crate::rng::{derive_seed, tags};
use crate::spectral::residual_undirected;

/// Asymptotic test: `t1 = n^{2/3}(lambda_max - 2)`, `t2 = n^{2/3}(-lambda_min - 2)`,
/// rejected when `max(t1, t2) > TW1(1 - alpha/2)` or `min(t1, t2) < TW1(alpha/2)`.
pub fn test_undirected_asymptotic(g: &Graph, p_hat: &ProbMatrix, alpha: f64) -> Result<TestReport> {
    check_alpha(alpha)?;
    let (lmin, lmax) = residual_undirected(g, p_hat)?.extreme_eigenvalues()?;
    let scale = (g.n() as f64).powf(2.0 / 3.0);
    let t1 = scale * (lmax - 2.0);
    let t2 = scale * (-lmin - 2.0);
    let (lo, hi) = tw1_two_sided(alpha)?;
    let reject = t1.max(t2) > hi || t1.min(t2) < lo;
    let statistics = BTreeMap::from([
        ("lambda_max".to_string(), lmax),
        ("lambda_min".to_string(), lmin),
        ("t1".to_string(), t1),
        ("t2".to_string(), t2),
    ]);
    Ok(TestReport {
        test: "undirected-asymptotic".into(),
        statistics,
        reference: Reference::Tw1,
        method: Method::Asymptotic,
        alpha,
        lower: Some(lo),
        upper: hi,
        reject,
        bootstrap: None,
        seed: None,
    })
}

/// Bootstrap moments of the residual extremes under the fitted model.
#[derive(Clone, Debug, PartialEq)]
pub struct UndirectedReference {
    pub replicates: usize,
    pub mu_max: f64,
    pub s_max: f64,
    pub mu_min: f64,
    pub s_min: f64,
    pub refit: bool,
}

/// Draws `b` graphs from `sampler`, builds each residual against the same
/// `p_hat` and records the mean and SD of its extreme eigenvalues.
pub fn undirected_bootstrap_reference(
    sampler: &dyn GraphSampler,
    p_hat: &ProbMatrix,
    b: usize,
    seed: u64,
) -> Result<UndirectedReference> {
    reference(sampler, p_hat, None, b, seed)
}

/// As [`undirected_bootstrap_reference`], but each draw is residualized
/// against `refit` applied to that draw. Off by default everywhere.
pub fn undirected_bootstrap_reference_refit(
    sampler: &dyn GraphSampler,
    p_hat: &ProbMatrix,
    refit: Refit<'_>,
    b: usize,
    seed: u64,
) -> Result<UndirectedReference> {
    reference(sampler, p_hat, Some(refit), b, seed)
}

fn reference(
    sampler: &dyn GraphSampler,
    p_hat: &ProbMatrix,
    refit: Option<Refit<'_>>,
    b: usize,
    seed: u64,
) -> Result<UndirectedReference> {
    if b < MIN_BOOTSTRAP {
        return Err(Error::Bootstrap(format!("B = {b} is below the minimum of {MIN_BOOTSTRAP}")));
    }
    if sampler.n() != p_hat.n() || sampler.is_directed() || p_hat.is_directed() {
        return Err(Error::Invalid("sampler and probability matrix disagree on shape".into()));
    }
    let extremes: Vec<(f64, f64)> = (0..b)
        .into_par_iter()
        .map(|k| {
            let g = sampler.sample(derive_seed(seed, tags::BOOTSTRAP, k as u64))?;
            match refit {
                Some(f) => residual_undirected(&g, &f(&g)?)?.extreme_eigenvalues(),
                None => residual_undirected(&g, p_hat)?.extreme_eigenvalues(),
            }
        })
        .collect::<Result<_>>()?;
    let (mins, maxs): (Vec<f64>, Vec<f64>) = extremes.into_iter().unzip();
    let (mu_max, s_max) = mean_sd(&maxs);
    let (mu_min, s_min) = mean_sd(&mins);
    if !(s_max > 0.0) || !(s_min > 0.0) {
        return Err(Error::Bootstrap("bootstrap extremes have zero spread".into()));
    }
    Ok(UndirectedReference {
        replicates: b,
        mu_max,
        s_max,
        mu_min,
        s_min,
        refit: refit.is_some(),
    })
}

impl UndirectedReference {
    /// `t = mu_TW + s_TW max((lambda_max - mu_max)/s_max, -(lambda_min - mu_min)/s_min)`,
    /// rejected unless `TW1(alpha/2) < t < TW1(1 - alpha/2)`.
    pub fn decide(&self, g: &Graph, p_hat: &ProbMatrix, alpha: f64, seed: Option<u64>) -> Result<TestReport> {
        check_alpha(alpha)?;
        let (lmin, lmax) = residual_undirected(g, p_hat)?.extreme_eigenvalues()?;
        let (mu_tw, s_tw) = tw1_moments();
        let z_max = (lmax - self.mu_max) / self.s_max;
        let z_min = -(lmin - self.mu_min) / self.s_min;
        let t = mu_tw + s_tw * z_max.max(z_min);
        let (lo, hi) = tw1_two_sided(alpha)?;
        let statistics = BTreeMap::from([
            ("lambda_max".to_string(), lmax),
            ("lambda_min".to_string(), lmin),
            ("t".to_string(), t),
        ]);
        let moments = BTreeMap::from([
            ("mu_max".to_string(), self.mu_max),
            ("s_max".to_string(), self.s_max),
            ("mu_min".to_string(), self.mu_min),
            ("s_min".to_string(), self.s_min),
        ]);
        Ok(TestReport {
            test: "undirected-bootstrap".into(),
            statistics,
            reference: Reference::Tw1,
            method: Method::Bootstrap,
            alpha,
            lower: Some(lo),
            upper: hi,
            reject: outside_open_interval(t, lo, hi),
            bootstrap: Some(BootstrapMeta {
                replicates: self.replicates,
                moments,
                refit: self.refit,
            }),
            seed,
        })
    }
}

/// Bootstrap-corrected undirected test with every replicate residual built
/// against the same `p_hat`.
pub fn test_undirected_bootstrap(
    g: &Graph,
    sampler: &dyn GraphSampler,
    p_hat: &ProbMatrix,
    b: usize,
    alpha: f64,
    seed: u64,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    if g.n() != p_hat.n() {
        return Err(Error::Invalid(format!("graph has {} nodes, probability matrix {}", g.n(), p_hat.n())));
    }
    let reference = undirected_bootstrap_reference(sampler, p_hat, b, seed)?;
    reference.decide(g, p_hat, alpha, Some(seed))
}
