//! Parametric network models: edge-probability evaluation and fitting.

mod beta;
mod er;
mod latent;
mod sbm;

pub use beta::{fit_beta_mle, BetaParams, Link};
pub use er::{fit_er, fit_er_ard, ErParams};
pub use latent::{
    fit_latent_space, fit_latent_space_from, initialize_latent_space, LatentFit, LatentSpaceParams, PgdOptions,
};
pub use sbm::SbmParams;

use nalgebra::DMatrix;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::ProbMatrix;
use crate::rng::rng_from_seed;

/// A fully parameterized model with closed-form edge probabilities. JSON
/// form: `{"family": "<name>", ...parameters}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ModelSpec {
    Er(ErParams),
    Sbm(SbmParams),
    Beta(BetaParams),
    LatentSpace(LatentSpaceParams),
}

impl ModelSpec {
    pub fn prob_matrix(&self) -> Result<ProbMatrix> {
        match self {
            ModelSpec::Er(p) => p.prob_matrix(),
            ModelSpec::Sbm(p) => p.prob_matrix(),
            ModelSpec::Beta(p) => p.prob_matrix(),
            ModelSpec::LatentSpace(p) => p.prob_matrix(),
        }
    }
}

/// Free-form alternative: `P_ij ~ Unif(lo, hi)` independently for `i < j`.
pub fn uniform_prob_matrix(n: usize, lo: f64, hi: f64, seed: u64) -> Result<ProbMatrix> {
    let mut rng = rng_from_seed(seed);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = lo + (hi - lo) * rng.random::<f64>();
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    ProbMatrix::new(m, false)
}

#[inline]
pub(crate) fn expit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub(crate) fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// `log(1 + e^x)` without overflow.
#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}
