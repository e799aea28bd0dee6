use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::expit;
use crate::error::{Error, Result};
use crate::graph::{Graph, ProbMatrix};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    #[default]
    Expit,
    /// `P_ij = exp(beta_i + beta_j)`; requires every pairwise sum below 0.
    Exp,
}

/// β-model: node-specific sociability parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub beta: Vec<f64>,
    #[serde(default)]
    pub link: Link,
}

impl BetaParams {
    pub fn prob_matrix(&self) -> Result<ProbMatrix> {
        let b = &self.beta;
        let n = b.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let s = b[i] + b[j];
                let v = match self.link {
                    Link::Expit => expit(s),
                    Link::Exp => {
                        if !(s < 0.0) {
                            return Err(Error::Invalid(format!(
                                "exp link needs beta_i + beta_j < 0, got {s} at ({i}, {j})"
                            )));
                        }
                        s.exp()
                    }
                };
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        ProbMatrix::new(m, false)
    }
}

const MAX_ITERS: usize = 10_000;
const STEP_TOL: f64 = 1e-10;
const SCORE_TOL: f64 = 1e-8;

/// Maximum likelihood fit of the expit β-model by the fixed-point iteration
/// `beta_i <- log d_i - log sum_{j != i} 1 / (exp(-beta_j) + exp(beta_i))`.
pub fn fit_beta_mle(g: &Graph) -> Result<BetaParams> {
    if g.is_directed() {
        return Err(Error::Invalid("beta-model needs an undirected graph".into()));
    }
    let n = g.n();
    if n < 3 {
        return Err(Error::MleNonexistent(format!("{n} nodes")));
    }
    let deg = g.degrees();
    if let Some(i) = deg.iter().position(|&d| d == 0 || d == n - 1) {
        return Err(Error::MleNonexistent(format!("node {i} has degree {}", deg[i])));
    }
    let log_d: Vec<f64> = deg.iter().map(|&d| (d as f64).ln()).collect();
    let mut beta = vec![0.0f64; n];
    let mut next = vec![0.0f64; n];
    let mut neg = vec![0.0f64; n];
    for it in 1..=MAX_ITERS {
        for (e, b) in neg.iter_mut().zip(&beta) {
            *e = (-b).exp();
        }
        let mut change = 0.0f64;
        for i in 0..n {
            let pos = beta[i].exp();
            let s: f64 = (0..n).filter(|&j| j != i).map(|j| 1.0 / (neg[j] + pos)).sum();
            next[i] = log_d[i] - s.ln();
            change = change.max((next[i] - beta[i]).abs());
        }
        std::mem::swap(&mut beta, &mut next);
        if !change.is_finite() || beta.iter().any(|b| b.abs() > 700.0) {
            return Err(Error::MleNonexistent("fixed-point iteration diverged".into()));
        }
        if change < STEP_TOL && score_residual(&beta, &deg) < SCORE_TOL {
            return Ok(BetaParams { beta, link: Link::Expit });
        }
        if it == MAX_ITERS {
            return Err(Error::NonConvergence {
                iterations: it,
                msg: format!("last step {change:.3e}"),
            });
        }
    }
    unreachable!()
}

/// `max_i |sum_j expit(beta_i + beta_j) - d_i|`.
fn score_residual(beta: &[f64], deg: &[usize]) -> f64 {
    let n = beta.len();
    (0..n)
        .map(|i| {
            let s: f64 = (0..n).filter(|&j| j != i).map(|j| expit(beta[i] + beta[j])).sum();
            (s - deg[i] as f64).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sample_graph;
    use crate::models::logit;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;

    fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n, false, &edges).unwrap()
    }

    #[test]
    fn regular_graph_closed_form() {
        // k-regular: every beta equals logit(k / (n-1)) / 2.
        let g = cycle(10);
        let fit = fit_beta_mle(&g).unwrap();
        let want = logit(2.0 / 9.0) / 2.0;
        assert!(fit.beta.iter().all(|b| (b - want).abs() < 1e-8), "{:?}", fit.beta);
    }

    /// Independent solve: Newton on the score equations.
    fn newton_beta(g: &Graph) -> Vec<f64> {
        let n = g.n();
        let d = g.degrees();
        let mut b = vec![0.0; n];
        for _ in 0..100 {
            let mut grad = nalgebra::DVector::<f64>::zeros(n);
            let mut hess = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let p = expit(b[i] + b[j]);
                        grad[i] += p;
                        let w = p * (1.0 - p);
                        hess[(i, i)] += w;
                        hess[(i, j)] += w;
                    }
                }
                grad[i] -= d[i] as f64;
            }
            let step = hess.lu().solve(&grad).unwrap();
            for i in 0..n {
                b[i] -= step[i];
            }
        }
        b
    }

    #[test]
    fn small_graph_matches_newton() {
        // 5 nodes: degrees (3, 2, 2, 2, 1).
        let g = Graph::from_edges(5, false, &[(0, 1), (0, 2), (0, 3), (1, 2), (3, 4)]).unwrap();
        let fit = fit_beta_mle(&g).unwrap();
        let want = newton_beta(&g);
        for (a, b) in fit.beta.iter().zip(&want) {
            assert!((a - b).abs() < 1e-7, "{:?} vs {:?}", fit.beta, want);
        }
    }

    fn loglik(b: &[f64], g: &Graph) -> f64 {
        let n = g.n();
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let t = b[i] + b[j];
                s += if g.has_edge(i, j) { t } else { 0.0 } - crate::models::softplus(t);
            }
        }
        s
    }

    #[test]
    fn small_graph_matches_grid_search() {
        // Degrees (2, 2, 3, 2, 3). Cyclic coordinate grid search with a
        // shrinking grid; the likelihood is concave so this finds the maximum.
        let g = Graph::from_edges(5, false, &[(2, 4), (2, 0), (2, 1), (4, 0), (4, 3), (1, 3)]).unwrap();
        assert_eq!(g.degrees(), vec![2, 2, 3, 2, 3]);
        let mut b = vec![0.0; 5];
        let mut h = 0.5;
        while h > 1e-6 {
            for _ in 0..50 {
                for i in 0..5 {
                    let best = (-20..=20)
                        .map(|k| b[i] + k as f64 * h / 10.0)
                        .max_by(|&x, &y| {
                            let (mut bx, mut by) = (b.clone(), b.clone());
                            bx[i] = x;
                            by[i] = y;
                            loglik(&bx, &g).total_cmp(&loglik(&by, &g))
                        })
                        .unwrap();
                    b[i] = best;
                }
            }
            h /= 10.0;
        }
        let fit = fit_beta_mle(&g).unwrap();
        for (a, w) in fit.beta.iter().zip(&b) {
            assert!((a - w).abs() < 1e-3, "{:?} vs {:?}", fit.beta, b);
        }
    }

    #[test]
    fn star_has_no_mle() {
        let g = Graph::from_edges(5, false, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert!(matches!(fit_beta_mle(&g), Err(Error::MleNonexistent(_))));
    }

    #[test]
    fn boundary_degrees_have_no_mle() {
        let mut g = cycle(6);
        g.set_edge(0, 3, true);
        g.set_edge(0, 2, true);
        g.set_edge(0, 4, true);
        assert!(matches!(fit_beta_mle(&g), Err(Error::MleNonexistent(_))));
        let mut iso = cycle(5);
        iso.set_edge(0, 1, false);
        iso.set_edge(0, 4, false);
        assert!(matches!(fit_beta_mle(&iso), Err(Error::MleNonexistent(_))));
    }

    #[test]
    fn exp_link_domain() {
        let ok = BetaParams { beta: vec![-0.5, -1.0, -0.2], link: Link::Exp };
        let p = ok.prob_matrix().unwrap();
        assert!((p.get(0, 1) - (-1.5f64).exp()).abs() < 1e-15);
        let bad = BetaParams { beta: vec![-0.5, 0.6, -0.2], link: Link::Exp };
        assert!(bad.prob_matrix().is_err());
    }

    #[test]
    fn recovers_truth_at_moderate_size() {
        let mut rng = rng_from_seed(11);
        let truth: Vec<f64> = (0..150).map(|_| -1.5 + rng.random::<f64>()).collect();
        let p = BetaParams { beta: truth.clone(), link: Link::Expit }.prob_matrix().unwrap();
        let fit = fit_beta_mle(&sample_graph(&p, 3)).unwrap();
        let rmse = (fit.beta.iter().zip(&truth).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / 150.0).sqrt();
        assert!(rmse < 0.3, "rmse {rmse}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn fitted_degrees_match_observed(seed in 0u64..10_000) {
            let truth = BetaParams { beta: vec![-0.7; 40], link: Link::Expit }.prob_matrix().unwrap();
            let g = sample_graph(&truth, seed);
            if let Ok(fit) = fit_beta_mle(&g) {
                prop_assert!(score_residual(&fit.beta, &g.degrees()) < 1e-8);
            }
        }
    }
}
