use super::{replicate, ExperimentConfig, Outcome, RateRow};
use crate::ergm::{default_burn_thin, estimate_p_ergm, fit_ergm_mple, sample_ergm, ErgmSpec, ErgmTerm};
use crate::error::Result;
use crate::gof::{test_undirected_bootstrap, ErgmSampler};
use crate::models::logit;
use crate::rng::{derive_seed, tags};

/// Target edge density of the generating models.
pub(crate) const DENSITY: f64 = 0.25;
pub(crate) const TRIANGLE_COEF: f64 = 0.02;

/// Edges + triangles + 2-stars with the edge coefficient set so that the
/// mean-field density stays at [`DENSITY`] for every 2-star coefficient.
pub(crate) fn truth_spec(n: usize, kstar: f64) -> Result<ErgmSpec> {
    let m = (n - 2) as f64;
    let edges = logit(DENSITY) - TRIANGLE_COEF * m * DENSITY * DENSITY - 2.0 * kstar * m * DENSITY;
    ErgmSpec::new(
        vec![ErgmTerm::Edges, ErgmTerm::Triangles, ErgmTerm::Kstar2],
        vec![edges, TRIANGLE_COEF, kstar],
    )
}

fn one(config: &ExperimentConfig, n: usize, kstar: f64, seed: u64) -> Result<bool> {
    let truth = truth_spec(n, kstar)?;
    let g = sample_ergm(&truth, n, default_burn_thin(n).0, derive_seed(seed, tags::DATA, 0))?;
    let fitted = fit_ergm_mple(&g, &[ErgmTerm::Edges, ErgmTerm::Triangles])?;
    let p_hat = estimate_p_ergm(&fitted, n, config.bootstrap, derive_seed(seed, tags::ERGM_P, 0))?;
    let sampler = ErgmSampler::new(fitted, n);
    let report = test_undirected_bootstrap(
        &g,
        &sampler,
        &p_hat,
        config.bootstrap,
        config.alpha,
        derive_seed(seed, tags::BOOTSTRAP, 0),
    )?;
    Ok(report.reject)
}

pub(super) fn run(config: &ExperimentConfig) -> Result<Vec<RateRow>> {
    let mut rows = Vec::new();
    for &n in &config.n_values {
        for &kstar in &config.grid {
            let base = config.point_seed(n, kstar);
            let out = replicate(config.replicates, |r| {
                Outcome::from_result(one(config, n, kstar, derive_seed(base, tags::REPLICATE, r as u64)), 0)
            });
            rows.push(RateRow::new("bootstrap", n, Some(kstar), &out));
        }
    }
    Ok(rows)
}
