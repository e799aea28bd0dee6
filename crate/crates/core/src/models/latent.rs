//! Inner-product latent space model
//! `logit P_ij = alpha_i + alpha_j + b X_ij + <z_i, z_j>`, fitted by
//! projected gradient ascent on the log-likelihood.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{expit, logit, softplus};
use crate::error::{Error, Result};
use crate::graph::{Graph, ProbMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentSpaceParams {
    pub alpha: Vec<f64>,
    /// One `d`-vector per node.
    pub z: Vec<Vec<f64>>,
    #[serde(default)]
    pub beta_cov: f64,
    /// Optional symmetric `n x n` edge covariate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariate: Option<Vec<Vec<f64>>>,
}

impl LatentSpaceParams {
    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn dim(&self) -> usize {
        self.z.first().map_or(0, Vec::len)
    }

    fn validate(&self) -> Result<()> {
        let (n, d) = (self.n(), self.dim());
        if self.z.len() != n || self.z.iter().any(|r| r.len() != d) {
            return Err(Error::Invalid(format!("latent positions must be {n} rows of length {d}")));
        }
        if let Some(x) = &self.covariate {
            if x.len() != n || x.iter().any(|r| r.len() != n) {
                return Err(Error::Invalid(format!("covariate must be {n}x{n}")));
            }
        }
        Ok(())
    }

    /// Log-odds matrix; the diagonal is left at zero.
    pub fn logodds(&self) -> Result<DMatrix<f64>> {
        self.validate()?;
        let st = State::from_params(self);
        Ok(st.theta(None))
    }

    pub fn prob_matrix(&self) -> Result<ProbMatrix> {
        let theta = self.logodds()?;
        let n = theta.nrows();
        ProbMatrix::new(DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { expit(theta[(i, j)]) }), false)
    }
}

/// Accepted steps may grow up to this multiple of the base step sizes.
const MAX_SCALE: f64 = 64.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PgdOptions {
    pub max_iters: usize,
    /// Stop once the relative objective change drops below this.
    pub tol: f64,
    /// Base step size.
    pub eta: f64,
    /// Projection box: `|alpha_i| <= alpha_bound`, `||z_i|| <= z_bound`.
    /// The defaults keep every fitted log-odds within +-18.
    pub alpha_bound: f64,
    pub z_bound: f64,
}

impl Default for PgdOptions {
    fn default() -> Self {
        PgdOptions {
            max_iters: 2000,
            tol: 1e-7,
            eta: 0.2,
            alpha_bound: 3.0,
            z_bound: 12f64.sqrt(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LatentFit {
    pub params: LatentSpaceParams,
    pub iterations: usize,
    /// False when `max_iters` was hit before the tolerance.
    pub converged: bool,
    /// Log-likelihood after each accepted iteration, starting with the init.
    pub objective: Vec<f64>,
}

#[derive(Clone)]
struct State {
    alpha: DVector<f64>,
    z: DMatrix<f64>,
    b: f64,
    x: Option<DMatrix<f64>>,
}

impl State {
    fn from_params(p: &LatentSpaceParams) -> Self {
        let (n, d) = (p.n(), p.dim());
        State {
            alpha: DVector::from_column_slice(&p.alpha),
            z: DMatrix::from_fn(n, d, |i, k| p.z[i][k]),
            b: p.beta_cov,
            x: p.covariate.as_ref().map(|x| DMatrix::from_fn(n, n, |i, j| x[i][j])),
        }
    }

    fn to_params(&self) -> LatentSpaceParams {
        let (n, d) = self.z.shape();
        LatentSpaceParams {
            alpha: self.alpha.iter().copied().collect(),
            z: (0..n).map(|i| (0..d).map(|k| self.z[(i, k)]).collect()).collect(),
            beta_cov: self.b,
            covariate: self
                .x
                .as_ref()
                .map(|x| (0..n).map(|i| x.row(i).iter().copied().collect()).collect()),
        }
    }

    fn theta(&self, out: Option<DMatrix<f64>>) -> DMatrix<f64> {
        let n = self.alpha.len();
        let mut t = out.unwrap_or_else(|| DMatrix::zeros(n, n));
        t.gemm(1.0, &self.z, &self.z.transpose(), 0.0);
        for j in 0..n {
            for i in 0..n {
                t[(i, j)] += self.alpha[i] + self.alpha[j];
            }
        }
        if let Some(x) = &self.x {
            t += x * self.b;
        }
        t.fill_diagonal(0.0);
        t
    }

    /// Centre the columns of Z and absorb the shift into alpha so that the
    /// log-odds are unchanged.
    fn center(&mut self) {
        let n = self.z.nrows();
        let mean = self.z.row_mean();
        let mm = mean.norm_squared();
        for i in 0..n {
            let zi_dot = self.z.row(i).dot(&mean);
            self.alpha[i] += zi_dot - 0.5 * mm;
        }
        for mut row in self.z.row_iter_mut() {
            row -= &mean;
        }
    }

    fn clip(&mut self, alpha_bound: f64, z_bound: f64) {
        self.alpha.apply(|a| *a = a.clamp(-alpha_bound, alpha_bound));
        for mut row in self.z.row_iter_mut() {
            let norm = row.norm();
            if norm > z_bound {
                row *= z_bound / norm;
            }
        }
    }
}

/// `sum_{i<j} A_ij theta_ij - log(1 + exp(theta_ij))`.
fn objective(a: &DMatrix<f64>, theta: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..j {
            let t = theta[(i, j)];
            s += a[(i, j)] * t - softplus(t);
        }
    }
    s
}

fn check_graph(g: &Graph) -> Result<()> {
    if g.is_directed() {
        return Err(Error::Invalid("latent space model needs an undirected graph".into()));
    }
    if g.n() < 3 {
        return Err(Error::Invalid(format!("{} nodes is too few to fit", g.n())));
    }
    Ok(())
}

/// Spectral initialisation: threshold the adjacency spectrum, clip and take
/// logits, set alpha from degrees, then embed the doubly centred remainder.
pub fn initialize_latent_space(g: &Graph, d: usize, covariate: Option<&DMatrix<f64>>) -> Result<LatentSpaceParams> {
    check_graph(g)?;
    let n = g.n();
    if d == 0 || d >= n {
        return Err(Error::Invalid(format!("latent dimension {d} for {n} nodes")));
    }
    let a = g.adjacency_matrix();
    let nf = n as f64;
    let density = g.edge_count() as f64 / g.dyad_count() as f64;
    let clip = 1.0 / nf;
    let clamp = |p: f64| p.clamp(clip, 1.0 - clip);

    let eig = SymmetricEigen::new(a.clone());
    let tau = 2.01 * (nf * density.max(clip)).sqrt();
    let mut p_tilde = DMatrix::zeros(n, n);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam.abs() >= tau {
            let u = eig.eigenvectors.column(k);
            p_tilde.ger(lam, &u, &u, 1.0);
        }
    }
    let degrees = g.degrees();
    let alpha = DVector::from_iterator(n, degrees.iter().map(|&dg| 0.5 * logit(clamp(dg as f64 / (nf - 1.0)))));

    let mut g_mat = DMatrix::from_fn(n, n, |i, j| logit(clamp(p_tilde[(i, j)])) - alpha[i] - alpha[j]);
    g_mat.fill_diagonal(0.0);
    // J G J with J = I - 11'/n.
    let col_mean = g_mat.row_mean();
    for mut row in g_mat.row_iter_mut() {
        row -= &col_mean;
    }
    let row_mean = g_mat.column_mean();
    for mut col in g_mat.column_iter_mut() {
        col -= &row_mean;
    }
    let g_mat = (&g_mat + g_mat.transpose()) * 0.5;
    let ge = SymmetricEigen::new(g_mat);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| ge.eigenvalues[j].total_cmp(&ge.eigenvalues[i]));
    let mut z = DMatrix::zeros(n, d);
    for (k, &idx) in order.iter().take(d).enumerate() {
        // A non-positive eigenvalue would give a zero column, which gradient
        // steps can never leave; keep a small multiple of the eigenvector.
        let scale = ge.eigenvalues[idx].max(0.01).sqrt();
        z.set_column(k, &(ge.eigenvectors.column(idx) * scale));
    }
    let st = State {
        alpha,
        z,
        b: 0.0,
        x: covariate.cloned(),
    };
    let p = st.to_params();
    p.validate()?;
    Ok(p)
}

/// Spectral initialisation followed by projected gradient ascent.
pub fn fit_latent_space(g: &Graph, d: usize, covariate: Option<&DMatrix<f64>>, opts: &PgdOptions) -> Result<LatentFit> {
    let init = initialize_latent_space(g, d, covariate)?;
    fit_latent_space_from(g, &init, opts)
}

/// Projected gradient ascent from a supplied starting point.
pub fn fit_latent_space_from(g: &Graph, init: &LatentSpaceParams, opts: &PgdOptions) -> Result<LatentFit> {
    check_graph(g)?;
    init.validate()?;
    let n = g.n();
    if init.n() != n {
        return Err(Error::Invalid(format!("init has {} nodes, graph {n}", init.n())));
    }
    if !(opts.alpha_bound > 0.0 && opts.z_bound > 0.0) {
        return Err(Error::Invalid("projection bounds must be positive".into()));
    }
    let a = g.adjacency_matrix();
    let mut st = State::from_params(init);
    let z_op = if st.z.ncols() == 0 { 0.0 } else { st.z.singular_values().max() };
    let eta_z = 2.0 * opts.eta / (z_op * z_op).max(1e-8);
    let eta_a = opts.eta / n as f64;
    let eta_b = st.x.as_ref().map_or(0.0, |x| opts.eta / x.norm_squared().max(1e-12));

    let mut theta = st.theta(None);
    let mut obj = objective(&a, &theta);
    if !obj.is_finite() {
        return Err(Error::NonConvergence {
            iterations: 0,
            msg: "initial objective is not finite".into(),
        });
    }
    let mut trace = vec![obj];
    let mut scale = 1.0f64;
    let mut resid = DMatrix::zeros(n, n);
    let mut converged = false;
    let mut iters = 0;

    while iters < opts.max_iters {
        for j in 0..n {
            for i in 0..n {
                resid[(i, j)] = if i == j { 0.0 } else { a[(i, j)] - expit(theta[(i, j)]) };
            }
        }
        let g_alpha = resid.column_sum();
        let g_z = &resid * &st.z;
        let g_b = st.x.as_ref().map_or(0.0, |x| 0.5 * resid.dot(x));

        let mut accepted = None;
        for _ in 0..40 {
            let mut cand = st.clone();
            cand.alpha.axpy(scale * eta_a, &g_alpha, 1.0);
            cand.z += &g_z * (scale * eta_z);
            cand.b += scale * eta_b * g_b;
            cand.clip(opts.alpha_bound, opts.z_bound);
            cand.center();
            let t = cand.theta(None);
            let o = objective(&a, &t);
            if o.is_finite() && o >= obj {
                accepted = Some((cand, t, o));
                break;
            }
            scale *= 0.5;
        }
        iters += 1;
        let Some((cand, t, o)) = accepted else {
            // No ascent direction left at machine precision.
            converged = true;
            break;
        };
        let rel = (o - obj).abs() / obj.abs().max(1e-300);
        st = cand;
        theta = t;
        obj = o;
        trace.push(obj);
        scale = (scale * 2.0).min(MAX_SCALE);
        if rel < opts.tol {
            converged = true;
            break;
        }
    }
    if opts.max_iters == 0 {
        converged = false;
    }
    Ok(LatentFit {
        params: st.to_params(),
        iterations: iters,
        converged,
        objective: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sample_graph;
    use crate::rng::rng_from_seed;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn truth(n: usize, d: usize, seed: u64) -> LatentSpaceParams {
        let mut rng = rng_from_seed(seed);
        let alpha: Vec<f64> = (0..n).map(|_| -1.0 + 0.5 * rng.random::<f64>()).collect();
        let mut z = DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng));
        let mean = z.row_mean();
        for mut row in z.row_iter_mut() {
            row -= &mean;
        }
        LatentSpaceParams {
            alpha,
            z: (0..n).map(|i| z.row(i).iter().copied().collect()).collect(),
            beta_cov: 0.0,
            covariate: None,
        }
    }

    fn upper(m: &DMatrix<f64>) -> Vec<f64> {
        let n = m.nrows();
        (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).map(|(i, j)| m[(i, j)]).collect()
    }

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn logodds_formula() {
        let p = LatentSpaceParams {
            alpha: vec![0.1, -0.2, 0.3],
            z: vec![vec![1.0, 0.0], vec![0.5, 0.5], vec![-1.0, 2.0]],
            beta_cov: 2.0,
            covariate: Some(vec![vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.5], vec![0.0, 0.5, 0.0]]),
        };
        let t = p.logodds().unwrap();
        assert!((t[(0, 1)] - (0.1 - 0.2 + 0.5 + 2.0)).abs() < 1e-14);
        assert!((t[(1, 2)] - (-0.2 + 0.3 + 0.5 + 1.0)).abs() < 1e-14);
        assert_eq!(t[(2, 2)], 0.0);
        let pm = p.prob_matrix().unwrap();
        assert!((pm.get(0, 2) - expit(0.4 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn centering_preserves_logodds() {
        let mut p = truth(20, 2, 1);
        for row in p.z.iter_mut() {
            row[0] += 3.0;
        }
        let before = p.logodds().unwrap();
        let mut st = State::from_params(&p);
        st.center();
        assert!(st.z.row_mean().norm() < 1e-12);
        assert!((st.theta(None) - before).amax() < 1e-12);
    }

    #[test]
    fn zero_iterations_return_init() {
        let t = truth(30, 2, 2);
        let g = sample_graph(&t.prob_matrix().unwrap(), 5);
        let fit = fit_latent_space_from(&g, &t, &PgdOptions { max_iters: 0, ..Default::default() }).unwrap();
        assert_eq!(fit.params, t);
        assert_eq!(fit.iterations, 0);
    }

    #[test]
    fn objective_never_decreases() {
        let t = truth(60, 2, 3);
        let g = sample_graph(&t.prob_matrix().unwrap(), 6);
        let fit = fit_latent_space(&g, 2, None, &PgdOptions::default()).unwrap();
        assert!(fit.objective.windows(2).all(|w| w[1] >= w[0]));
        assert!(fit.objective.len() > 2);
        let z = DMatrix::from_fn(60, 2, |i, k| fit.params.z[i][k]);
        assert!(z.row_mean().norm() < 1e-9);
    }

    #[test]
    fn rotation_of_init_rotates_fit() {
        let t = truth(40, 2, 4);
        let g = sample_graph(&t.prob_matrix().unwrap(), 7);
        let init = initialize_latent_space(&g, 2, None).unwrap();
        let (c, s) = (0.6f64, 0.8f64);
        let mut rotated = init.clone();
        for row in rotated.z.iter_mut() {
            let (x, y) = (row[0], row[1]);
            *row = vec![c * x - s * y, s * x + c * y];
        }
        let opts = PgdOptions { max_iters: 200, ..Default::default() };
        let a = fit_latent_space_from(&g, &init, &opts).unwrap();
        let b = fit_latent_space_from(&g, &rotated, &opts).unwrap();
        let diff = (a.params.logodds().unwrap() - b.params.logodds().unwrap()).amax();
        assert!(diff < 1e-8, "diff {diff}");
    }

    #[test]
    fn recovers_logodds() {
        let t = truth(200, 2, 8);
        let g = sample_graph(&t.prob_matrix().unwrap(), 9);
        let fit = fit_latent_space(&g, 2, None, &PgdOptions::default()).unwrap();
        let r = corr(&upper(&fit.params.logodds().unwrap()), &upper(&t.logodds().unwrap()));
        assert!(r >= 0.9, "correlation {r}");
    }

    #[test]
    fn covariate_coefficient_moves() {
        let n = 80;
        let mut t = truth(n, 1, 10);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i != j && (i % 2 == j % 2) { 1.0 } else { 0.0 }).collect())
            .collect();
        t.beta_cov = 1.0;
        t.covariate = Some(x.clone());
        let g = sample_graph(&t.prob_matrix().unwrap(), 11);
        let xm = DMatrix::from_fn(n, n, |i, j| x[i][j]);
        let fit = fit_latent_space(&g, 1, Some(&xm), &PgdOptions::default()).unwrap();
        assert!(fit.params.beta_cov > 0.4, "b = {}", fit.params.beta_cov);
    }
}
