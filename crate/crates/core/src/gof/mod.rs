//! Goodness-of-fit tests: statistics, rejection rules and bootstrap
//! recalibration.

mod directed;
mod undirected;

pub use directed::{
    directed_bootstrap_reference, directed_bootstrap_reference_refit, rect_tw_centering, rect_tw_statistic, test_ard_er, test_directed_bootstrap,
    test_directed_explaw, test_directed_tw, DirectedReference,
};
pub use undirected::{
    test_undirected_asymptotic, test_undirected_bootstrap, undirected_bootstrap_reference,
    undirected_bootstrap_reference_refit, UndirectedReference,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ergm::{default_burn_thin, sample_ergm, ErgmSpec};
use crate::error::{Error, Result};
use crate::graph::{sample_graph, Graph, ProbMatrix};
use crate::rmt::tw1_quantile;

/// Smallest bootstrap size accepted.
pub const MIN_BOOTSTRAP: usize = 50;
pub const DEFAULT_BOOTSTRAP: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reference {
    Tw1,
    Explaw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Asymptotic,
    Bootstrap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapMeta {
    pub replicates: usize,
    /// `mu_max, s_max, mu_min, s_min` for undirected tests, `mu, s` for
    /// directed ones.
    pub moments: BTreeMap<String, f64>,
    /// Replicates were residualized against their own refitted model.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub refit: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub statistics: BTreeMap<String, f64>,
    pub reference: Reference,
    pub method: Method,
    pub alpha: f64,
    /// Rejection thresholds; `lower` is absent for one-sided tests.
    pub lower: Option<f64>,
    pub upper: f64,
    pub reject: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bootstrap: Option<BootstrapMeta>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

impl TestReport {
    pub fn statistic(&self, name: &str) -> Option<f64> {
        self.statistics.get(name).copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Invalid(format!("alpha {alpha} outside (0, 1)")));
    }
    Ok(())
}

/// `(TW1(alpha/2), TW1(1 - alpha/2))`.
pub fn tw1_two_sided(alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    Ok((tw1_quantile(alpha / 2.0)?, tw1_quantile(1.0 - alpha / 2.0)?))
}

/// Not rejected iff `lower < t < upper`; ties are kept.
pub fn outside_open_interval(t: f64, lower: f64, upper: f64) -> bool {
    !(lower < t && t < upper)
}

/// Refits the null model to one bootstrap draw.
pub type Refit<'a> = &'a (dyn Fn(&Graph) -> Result<ProbMatrix> + Sync);

/// Draws graphs from a fitted null model.
pub trait GraphSampler: Sync {
    fn n(&self) -> usize;
    fn is_directed(&self) -> bool;
    fn sample(&self, seed: u64) -> Result<Graph>;
}

/// Independent Bernoulli edges with probabilities `P`.
pub struct BernoulliSampler<'a>(pub &'a ProbMatrix);

impl GraphSampler for BernoulliSampler<'_> {
    fn n(&self) -> usize {
        self.0.n()
    }

    fn is_directed(&self) -> bool {
        self.0.is_directed()
    }

    fn sample(&self, seed: u64) -> Result<Graph> {
        Ok(sample_graph(self.0, seed))
    }
}

/// One fresh Metropolis chain per draw.
pub struct ErgmSampler {
    pub spec: ErgmSpec,
    pub n: usize,
    pub burn_in: usize,
}

impl ErgmSampler {
    pub fn new(spec: ErgmSpec, n: usize) -> Self {
        ErgmSampler {
            spec,
            n,
            burn_in: default_burn_thin(n).0,
        }
    }
}

impl GraphSampler for ErgmSampler {
    fn n(&self) -> usize {
        self.n
    }

    fn is_directed(&self) -> bool {
        false
    }

    fn sample(&self, seed: u64) -> Result<Graph> {
        sample_ergm(&self.spec, self.n, self.burn_in, seed)
    }
}

/// Mean and sample standard deviation.
pub(crate) fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmt::Tw1Table;

    #[test]
    fn strict_inequalities_at_the_boundary() {
        let (lo, hi) = tw1_two_sided(0.05).unwrap();
        assert!(outside_open_interval(hi, lo, hi));
        assert!(outside_open_interval(lo, lo, hi));
        assert!(!outside_open_interval(0.5 * (lo + hi), lo, hi));
        assert!(tw1_two_sided(0.0).is_err());
    }

    #[test]
    fn thresholds_widen_as_alpha_shrinks() {
        let mut prev = tw1_two_sided(0.5).unwrap();
        for a in [0.3, 0.2, 0.1, 0.05, 0.02, 0.01] {
            let cur = tw1_two_sided(a).unwrap();
            assert!(cur.0 <= prev.0 && cur.1 >= prev.1);
            prev = cur;
        }
    }

    #[test]
    fn two_sided_size_for_independent_tw_pair() {
        // For t1, t2 iid TW1 the max/min rule keeps H0 only when both lie in
        // (q_lo, q_hi), so its size is 1 - (1 - alpha)^2: each marginal tail
        // is bounded by alpha, and the union by 2 alpha.
        let t = Tw1Table::embedded();
        for alpha in [0.01, 0.05, 0.1] {
            let (lo, hi) = tw1_two_sided(alpha).unwrap();
            let inside = t.cdf(hi) - t.cdf(lo);
            let size = 1.0 - inside * inside;
            assert!((inside - (1.0 - alpha)).abs() < 1e-6);
            assert!((size - (1.0 - (1.0 - alpha).powi(2))).abs() < 1e-5);
            assert!(size <= 2.0 * alpha);
            let one_stat = 1.0 - inside;
            assert!(one_stat <= alpha + 1e-9);
        }
    }

    #[test]
    fn sample_sd() {
        let (m, s) = mean_sd(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
