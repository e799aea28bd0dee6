use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{
    check_alpha, mean_sd, outside_open_interval, tw1_two_sided, BootstrapMeta, GraphSampler, Method, Reference, Refit,
    TestReport, MIN_BOOTSTRAP,
};
use crate::error::{Error, Result};
use crate::graph::{ArdMatrix, Graph, ProbMatrix};
use crate::models::fit_er_ard;
use crate::rmt::{explaw_quantile, tw1_moments};
use crate::rng::{derive_seed, tags};
use crate::spectral::{residual_ard, residual_directed};

/// `(mu, sigma)` for the largest eigenvalue of `X^T X` with `X` of shape
/// `rows x cols`: with `m` the smaller and `n` the larger dimension,
/// `mu = (sqrt(n-1) + sqrt(m))^2` and `sigma = sqrt(mu) (1/sqrt(n-1) + 1/sqrt(m))^{1/3}`.
pub fn rect_tw_centering(rows: usize, cols: usize) -> Result<(f64, f64)> {
    let (m, n) = (rows.min(cols), rows.max(cols));
    if m < 1 || n < 2 {
        return Err(Error::Invalid(format!("{rows}x{cols} is too small for the singular value test")));
    }
    let (a, b) = (((n - 1) as f64).sqrt(), (m as f64).sqrt());
    let mu = (a + b).powi(2);
    let sigma = mu.sqrt() * (1.0 / a + 1.0 / b).cbrt();
    Ok((mu, sigma))
}

/// `(s_max^2 - mu) / sigma`.
pub fn rect_tw_statistic(s_max: f64, rows: usize, cols: usize) -> Result<f64> {
    let (mu, sigma) = rect_tw_centering(rows, cols)?;
    Ok((s_max * s_max - mu) / sigma)
}

fn check_directed(g: &Graph, p_hat: &ProbMatrix) -> Result<()> {
    if !g.is_directed() {
        return Err(Error::Invalid("directed test needs a directed graph".into()));
    }
    if g.n() != p_hat.n() {
        return Err(Error::Invalid(format!("graph has {} nodes, probability matrix {}", g.n(), p_hat.n())));
    }
    Ok(())
}

fn tw_report(test: &str, stats: BTreeMap<String, f64>, t: f64, alpha: f64) -> Result<TestReport> {
    let (lo, hi) = tw1_two_sided(alpha)?;
    Ok(TestReport {
        test: test.into(),
        statistics: stats,
        reference: Reference::Tw1,
        method: Method::Asymptotic,
        alpha,
        lower: Some(lo),
        upper: hi,
        reject: outside_open_interval(t, lo, hi),
        bootstrap: None,
        seed: None,
    })
}

/// Largest singular value of the directed residual against the
/// rectangular TW1 centering.
pub fn test_directed_tw(g: &Graph, p_hat: &ProbMatrix, alpha: f64) -> Result<TestReport> {
    check_alpha(alpha)?;
    check_directed(g, p_hat)?;
    let a = residual_directed(g, p_hat)?;
    let s_max = a.largest_singular_value();
    let t = rect_tw_statistic(s_max, g.n(), g.n())?;
    let stats = BTreeMap::from([("s_max".to_string(), s_max), ("t".to_string(), t)]);
    tw_report("directed-tw", stats, t, alpha)
}

/// `sqrt(n) s_min` of the directed residual; rejected when above the
/// exponential-law quantile `q(1 - alpha)`.
pub fn test_directed_explaw(g: &Graph, p_hat: &ProbMatrix, alpha: f64) -> Result<TestReport> {
    check_alpha(alpha)?;
    check_directed(g, p_hat)?;
    let a = residual_directed(g, p_hat)?;
    let (s_min, _) = a.extreme_singular_values();
    let t = (g.n() as f64).sqrt() * s_min;
    let upper = explaw_quantile(1.0 - alpha)?;
    Ok(TestReport {
        test: "directed-explaw".into(),
        statistics: BTreeMap::from([("s_min".to_string(), s_min), ("t".to_string(), t)]),
        reference: Reference::Explaw,
        method: Method::Asymptotic,
        alpha,
        lower: None,
        upper,
        reject: t > upper,
        bootstrap: None,
        seed: None,
    })
}

/// ARD test of the ER model: `p` from the double average, residual of the
/// `m x K` count matrix, largest singular value against rectangular TW1.
pub fn test_ard_er(y: &ArdMatrix, alpha: f64) -> Result<TestReport> {
    check_alpha(alpha)?;
    if y.m() < 2 || y.k() < 2 {
        return Err(Error::Invalid(format!("ARD test needs m, K >= 2, got {}x{}", y.m(), y.k())));
    }
    let p_hat = fit_er_ard(y)?;
    let a = residual_ard(y, p_hat)?;
    let s_max = a.largest_singular_value();
    let t = rect_tw_statistic(s_max, y.m(), y.k())?;
    let stats = BTreeMap::from([
        ("p_hat".to_string(), p_hat),
        ("s_max".to_string(), s_max),
        ("t".to_string(), t),
    ]);
    tw_report("ard-er", stats, t, alpha)
}

/// Bootstrap moments of the directed residual's largest singular value.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectedReference {
    pub replicates: usize,
    pub mu: f64,
    pub s: f64,
    pub refit: bool,
}

pub fn directed_bootstrap_reference(
    sampler: &dyn GraphSampler,
    p_hat: &ProbMatrix,
    b: usize,
    seed: u64,
) -> Result<DirectedReference> {
    reference(sampler, p_hat, None, b, seed)
}

/// Each draw residualized against `refit` applied to that draw.
pub fn directed_bootstrap_reference_refit(
    sampler: &dyn GraphSampler,
    p_hat: &ProbMatrix,
    refit: Refit<'_>,
    b: usize,
    seed: u64,
) -> Result<DirectedReference> {
    reference(sampler, p_hat, Some(refit), b, seed)
}

fn reference(
    sampler: &dyn GraphSampler,
    p_hat: &ProbMatrix,
    refit: Option<Refit<'_>>,
    b: usize,
    seed: u64,
) -> Result<DirectedReference> {
    if b < MIN_BOOTSTRAP {
        return Err(Error::Bootstrap(format!("B = {b} is below the minimum of {MIN_BOOTSTRAP}")));
    }
    if sampler.n() != p_hat.n() || !sampler.is_directed() {
        return Err(Error::Invalid("sampler and probability matrix disagree on shape".into()));
    }
    let tops: Vec<f64> = (0..b)
        .into_par_iter()
        .map(|k| {
            let g = sampler.sample(derive_seed(seed, tags::BOOTSTRAP, k as u64))?;
            let a = match refit {
                Some(f) => residual_directed(&g, &f(&g)?)?,
                None => residual_directed(&g, p_hat)?,
            };
            Ok(a.largest_singular_value())
        })
        .collect::<Result<_>>()?;
    let (mu, s) = mean_sd(&tops);
    if !(s > 0.0) {
        return Err(Error::Bootstrap("bootstrap singular values have zero spread".into()));
    }
    Ok(DirectedReference {
        replicates: b,
        mu,
        s,
        refit: refit.is_some(),
    })
}

impl DirectedReference {
    /// `t = mu_TW + s_TW (s_max - mu) / s`, two-sided against TW1.
    pub fn decide(&self, g: &Graph, p_hat: &ProbMatrix, alpha: f64, seed: Option<u64>) -> Result<TestReport> {
        check_alpha(alpha)?;
        check_directed(g, p_hat)?;
        let s_max = residual_directed(g, p_hat)?.largest_singular_value();
        let (mu_tw, s_tw) = tw1_moments();
        let t = mu_tw + s_tw * (s_max - self.mu) / self.s;
        let mut report = tw_report(
            "directed-bootstrap",
            BTreeMap::from([("s_max".to_string(), s_max), ("t".to_string(), t)]),
            t,
            alpha,
        )?;
        report.method = Method::Bootstrap;
        report.bootstrap = Some(BootstrapMeta {
            replicates: self.replicates,
            moments: BTreeMap::from([("mu".to_string(), self.mu), ("s".to_string(), self.s)]),
            refit: self.refit,
        });
        report.seed = seed;
        Ok(report)
    }
}

pub fn test_directed_bootstrap(
    g: &Graph,
    sampler: &dyn GraphSampler,
    p_hat: &ProbMatrix,
    b: usize,
    alpha: f64,
    seed: u64,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    check_directed(g, p_hat)?;
    directed_bootstrap_reference(sampler, p_hat, b, seed)?.decide(g, p_hat, alpha, Some(seed))
}
