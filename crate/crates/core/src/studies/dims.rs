use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{replicate, ExperimentConfig, Outcome, RateRow};
use crate::error::Result;
use crate::graph::{sample_graph, ProbMatrix};
use crate::models::{LatentSpaceParams, PgdOptions};
use crate::rng::{derive_seed, rng_from_seed, tags};
use crate::selection::{select_dimension, SelectionOptions};

/// `alpha_i ~ Unif(-2, -1) / 100`, `z_i ~ N(0, I_d)`.
fn truth(n: usize, d: usize, seed: u64) -> Result<ProbMatrix> {
    let mut rng = rng_from_seed(seed);
    let alpha = (0..n).map(|_| rng.random_range(-2.0..-1.0) * 1e-2).collect();
    let z = (0..n)
        .map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    LatentSpaceParams {
        alpha,
        z,
        beta_cov: 0.0,
        covariate: None,
    }
    .prob_matrix()
}

pub(super) fn run(config: &ExperimentConfig) -> Result<Vec<RateRow>> {
    let opts = SelectionOptions {
        pgd: PgdOptions::default(),
        bootstrap: config.bootstrap,
        alpha: config.alpha,
        max_d: None,
    };
    let mut rows = Vec::new();
    for &n in &config.n_values {
        for &d in &config.grid {
            let d_true = d as usize;
            let base = config.point_seed(n, d);
            let total = config.param_sets * config.replicates;
            let outcomes = replicate(total, |k| {
                let (set, net) = (k / config.replicates, k % config.replicates);
                let p = match truth(n, d_true, derive_seed(base, tags::TRUTH, set as u64)) {
                    Ok(p) => p,
                    Err(_) => return Outcome::default(),
                };
                let data = derive_seed(derive_seed(base, tags::DATA, set as u64), tags::REPLICATE, net as u64);
                let g = sample_graph(&p, data);
                let scan = select_dimension(&g, &opts, derive_seed(data, tags::DIMENSION, 0));
                Outcome::from_result(scan.map(|s| s.d_fit == Some(d_true)), 0)
            });
            rows.push(RateRow::new("correct", n, Some(d), &outcomes));
        }
    }
    Ok(rows)
}
