use rand::Rng;

use super::{replicate, Experiment, ExperimentConfig, Outcome, RateRow};
use crate::error::{Error, Result};
use crate::gof::{test_undirected_asymptotic, test_undirected_bootstrap, BernoulliSampler};
use crate::graph::{sample_graph, ProbMatrix};
use crate::models::{fit_beta_mle, uniform_prob_matrix, BetaParams, Link};
use crate::rng::{derive_seed, rng_from_seed, tags};

/// Fresh data sets drawn when the β-model MLE does not exist.
pub(crate) const MAX_REDRAWS: usize = 50;

fn truth(config: &ExperimentConfig, n: usize, seed: u64) -> Result<ProbMatrix> {
    let mut rng = rng_from_seed(seed);
    let link = match config.experiment {
        Experiment::Fig5Nonpar => return uniform_prob_matrix(n, 0.0, 0.1, seed),
        Experiment::Fig5Exp => Link::Exp,
        _ => Link::Expit,
    };
    let beta = (0..n).map(|_| rng.random_range(-2.0..0.0)).collect();
    BetaParams { beta, link }.prob_matrix()
}

/// `(bootstrap, asymptotic)` decisions for one replicate.
fn one(config: &ExperimentConfig, n: usize, rep_seed: u64) -> (Outcome, Outcome) {
    let p = match truth(config, n, derive_seed(rep_seed, tags::TRUTH, 0)) {
        Ok(p) => p,
        Err(_) => return (Outcome::default(), Outcome::default()),
    };
    for attempt in 0..MAX_REDRAWS {
        let g = sample_graph(&p, derive_seed(rep_seed, tags::DATA, attempt as u64));
        let p_hat = match fit_beta_mle(&g).and_then(|b| b.prob_matrix()) {
            Ok(p_hat) => p_hat,
            Err(Error::MleNonexistent(_)) => continue,
            Err(_) => return (Outcome::default(), Outcome::default()),
        };
        let boot = test_undirected_bootstrap(
            &g,
            &BernoulliSampler(&p_hat),
            &p_hat,
            config.bootstrap,
            config.alpha,
            derive_seed(rep_seed, tags::BOOTSTRAP, 0),
        )
        .map(|r| r.reject);
        let asym = test_undirected_asymptotic(&g, &p_hat, config.alpha).map(|r| r.reject);
        return (Outcome::from_result(boot, attempt), Outcome::from_result(asym, attempt));
    }
    let gave_up = Outcome { hit: None, redraws: MAX_REDRAWS };
    (gave_up, gave_up)
}

pub(super) fn run(config: &ExperimentConfig) -> Result<Vec<RateRow>> {
    let mut rows = Vec::new();
    for &n in &config.n_values {
        let base = config.point_seed(n, 0.0);
        let out = replicate(config.replicates, |r| one(config, n, derive_seed(base, tags::REPLICATE, r as u64)));
        let (boot, asym): (Vec<_>, Vec<_>) = out.into_iter().unzip();
        rows.push(RateRow::new("bootstrap", n, None, &boot));
        rows.push(RateRow::new("asymptotic", n, None, &asym));
    }
    Ok(rows)
}
