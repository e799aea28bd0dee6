//! Exponential random graph models over edges, triangles and 2-stars:
//! sufficient statistics, a single-toggle Metropolis sampler, maximum
//! pseudo-likelihood fitting and simulated edge probabilities.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, ProbMatrix};
use crate::models::expit;
use crate::rng::{derive_seed, rng_from_seed, tags, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErgmTerm {
    Edges,
    Triangles,
    Kstar2,
}

impl ErgmTerm {
    fn index(self) -> usize {
        match self {
            ErgmTerm::Edges => 0,
            ErgmTerm::Triangles => 1,
            ErgmTerm::Kstar2 => 2,
        }
    }
}

impl std::str::FromStr for ErgmTerm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "edges" => Ok(ErgmTerm::Edges),
            "triangles" | "triangle" => Ok(ErgmTerm::Triangles),
            "kstar2" | "kstar(2)" | "2-stars" => Ok(ErgmTerm::Kstar2),
            other => Err(Error::Invalid(format!("unknown ERGM term '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgmSpec {
    pub terms: Vec<ErgmTerm>,
    pub theta: Vec<f64>,
}

impl ErgmSpec {
    pub fn new(terms: Vec<ErgmTerm>, theta: Vec<f64>) -> Result<Self> {
        let s = ErgmSpec { terms, theta };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        validate_terms(&self.terms)?;
        if self.theta.len() != self.terms.len() {
            return Err(Error::Invalid(format!(
                "{} coefficients for {} terms",
                self.theta.len(),
                self.terms.len()
            )));
        }
        if self.theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Invalid("ERGM coefficients must be finite".into()));
        }
        Ok(())
    }

    /// Coefficients laid out over (edges, triangles, kstar2), zero when absent.
    fn full_theta(&self) -> [f64; 3] {
        let mut t = [0.0; 3];
        for (term, &v) in self.terms.iter().zip(&self.theta) {
            t[term.index()] = v;
        }
        t
    }
}

fn validate_terms(terms: &[ErgmTerm]) -> Result<()> {
    if terms.is_empty() {
        return Err(Error::Invalid("ERGM needs at least one term".into()));
    }
    for (k, t) in terms.iter().enumerate() {
        if terms[..k].contains(t) {
            return Err(Error::Invalid(format!("duplicate ERGM term {t:?}")));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuffStats {
    pub edges: u64,
    pub triangles: u64,
    pub kstar2: u64,
}

impl SuffStats {
    pub fn as_array(&self) -> [u64; 3] {
        [self.edges, self.triangles, self.kstar2]
    }
}

pub fn suff_stats(g: &Graph) -> Result<SuffStats> {
    if g.is_directed() {
        return Err(Error::Invalid("ERGM statistics need an undirected graph".into()));
    }
    let bits = BitGraph::from_graph(g);
    let n = g.n();
    let mut tri = 0u64;
    for (i, j) in g.edges() {
        // Count each triangle at its two smallest vertices.
        tri += bits.common_above(i, j, j) as u64;
    }
    let kstar2 = (0..n).map(|i| {
        let d = g.degree(i) as u64;
        d * d.saturating_sub(1) / 2
    });
    Ok(SuffStats {
        edges: g.edge_count() as u64,
        triangles: tri,
        kstar2: kstar2.sum(),
    })
}

/// Change in (edges, triangles, kstar2) from adding edge `ij` to `g` with
/// `ij` itself treated as absent.
pub fn change_stats(g: &Graph, i: usize, j: usize) -> [f64; 3] {
    let bits = BitGraph::from_graph(g);
    bits.change(i, j)
}

/// Adjacency rows as bitsets plus a degree vector.
#[derive(Clone)]
struct BitGraph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
    deg: Vec<usize>,
}

impl BitGraph {
    fn empty(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        BitGraph {
            n,
            words,
            rows: vec![0; n * words],
            deg: vec![0; n],
        }
    }

    fn from_graph(g: &Graph) -> Self {
        let mut b = BitGraph::empty(g.n());
        for (i, j) in g.edges() {
            b.set(i, j, true);
        }
        b
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words..(i + 1) * self.words]
    }

    fn has(&self, i: usize, j: usize) -> bool {
        self.rows[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    fn set(&mut self, i: usize, j: usize, on: bool) {
        if self.has(i, j) == on {
            return;
        }
        let (wi, wj) = (i * self.words + j / 64, j * self.words + i / 64);
        self.rows[wi] ^= 1 << (j % 64);
        self.rows[wj] ^= 1 << (i % 64);
        if on {
            self.deg[i] += 1;
            self.deg[j] += 1;
        } else {
            self.deg[i] -= 1;
            self.deg[j] -= 1;
        }
    }

    fn common(&self, i: usize, j: usize) -> u32 {
        self.row(i).iter().zip(self.row(j)).map(|(a, b)| (a & b).count_ones()).sum()
    }

    /// Common neighbours with index greater than `floor`.
    fn common_above(&self, i: usize, j: usize, floor: usize) -> u32 {
        (0..self.words)
            .map(|w| {
                let mut m = self.row(i)[w] & self.row(j)[w];
                let lo = w * 64;
                if floor + 1 > lo {
                    let shift = floor + 1 - lo;
                    m = if shift >= 64 { 0 } else { m & (!0u64 << shift) };
                }
                m.count_ones()
            })
            .sum()
    }

    fn change(&self, i: usize, j: usize) -> [f64; 3] {
        let e = self.has(i, j) as usize;
        [
            1.0,
            self.common(i, j) as f64,
            (self.deg[i] - e + self.deg[j] - e) as f64,
        ]
    }

    fn to_graph(&self) -> Graph {
        let mut g = Graph::empty(self.n, false);
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.has(i, j) {
                    g.set_edge(i, j, true);
                }
            }
        }
        g
    }
}

/// Burn-in of `20 C(n,2)` toggles and thinning of `C(n,2)`.
pub fn default_burn_thin(n: usize) -> (usize, usize) {
    let pairs = n * n.saturating_sub(1) / 2;
    (20 * pairs, pairs.max(1))
}

/// A Metropolis chain started from the empty graph; proposals toggle a
/// uniformly chosen dyad.
pub struct ErgmChain {
    theta: [f64; 3],
    state: BitGraph,
    rng: Rng,
}

impl ErgmChain {
    pub fn new(spec: &ErgmSpec, n: usize, seed: u64) -> Result<Self> {
        spec.validate()?;
        if n < 2 {
            return Err(Error::Invalid(format!("ERGM on {n} nodes")));
        }
        Ok(ErgmChain {
            theta: spec.full_theta(),
            state: BitGraph::empty(n),
            rng: rng_from_seed(seed),
        })
    }

    pub fn step(&mut self, toggles: usize) {
        let n = self.state.n;
        for _ in 0..toggles {
            let i = self.rng.random_range(0..n);
            let mut j = self.rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let d = self.state.change(i, j);
            let delta = self.theta[0] * d[0] + self.theta[1] * d[1] + self.theta[2] * d[2];
            let present = self.state.has(i, j);
            let log_ratio = if present { -delta } else { delta };
            if log_ratio >= 0.0 || self.rng.random::<f64>() < log_ratio.exp() {
                self.state.set(i, j, !present);
            }
        }
    }

    pub fn graph(&self) -> Graph {
        self.state.to_graph()
    }
}

/// One draw after `burn_in` toggles from the empty graph. Repeated draws
/// from a single chain go through [`ErgmChain`].
pub fn sample_ergm(spec: &ErgmSpec, n: usize, burn_in: usize, seed: u64) -> Result<Graph> {
    let mut chain = ErgmChain::new(spec, n, seed)?;
    chain.step(burn_in);
    Ok(chain.graph())
}

/// Maximum pseudo-likelihood: logistic regression of each dyad on its change
/// statistics, solved by damped Newton.
pub fn fit_ergm_mple(g: &Graph, terms: &[ErgmTerm]) -> Result<ErgmSpec> {
    if g.is_directed() {
        return Err(Error::Invalid("ERGM needs an undirected graph".into()));
    }
    validate_terms(terms)?;
    let n = g.n();
    let bits = BitGraph::from_graph(g);
    let pairs = n * n.saturating_sub(1) / 2;
    let p = terms.len();
    let mut x = DMatrix::zeros(pairs, p);
    let mut y = DVector::zeros(pairs);
    let mut r = 0;
    for i in 0..n {
        for j in i + 1..n {
            let d = bits.change(i, j);
            for (c, t) in terms.iter().enumerate() {
                x[(r, c)] = d[t.index()];
            }
            y[r] = bits.has(i, j) as u8 as f64;
            r += 1;
        }
    }
    let ones = y.sum();
    if ones == 0.0 || ones == pairs as f64 {
        return Err(Error::NonConvergence {
            iterations: 0,
            msg: "complete separation: the graph is empty or complete".into(),
        });
    }
    let loglik = |th: &DVector<f64>| -> f64 {
        let eta = &x * th;
        eta.iter().zip(y.iter()).map(|(&e, &yy)| yy * e - crate::models::softplus(e)).sum()
    };
    let mut theta = DVector::zeros(p);
    let mut ll = loglik(&theta);
    const MAX_NEWTON: usize = 100;
    for it in 0..MAX_NEWTON {
        let eta = &x * &theta;
        let mu = eta.map(expit);
        let grad = x.tr_mul(&(&y - &mu));
        if grad.norm() < 1e-8 {
            return ErgmSpec::new(terms.to_vec(), theta.iter().copied().collect());
        }
        let w = mu.map(|m| m * (1.0 - m));
        let mut xw = x.clone();
        for (mut row, &wi) in xw.row_iter_mut().zip(w.iter()) {
            row *= wi;
        }
        let h = x.tr_mul(&xw);
        let step = h.cholesky().map(|c| c.solve(&grad)).ok_or_else(|| Error::NonConvergence {
            iterations: it,
            msg: "singular pseudo-likelihood Hessian (collinear or separated statistics)".into(),
        })?;
        // Near the optimum the gain falls below rounding in the log-likelihood.
        let noise = 64.0 * f64::EPSILON * (ll.abs() + 1.0);
        let mut t = 1.0;
        loop {
            let cand = &theta + &step * t;
            let l = loglik(&cand);
            if l >= ll - noise || t < 1e-10 {
                theta = cand;
                ll = l;
                break;
            }
            t *= 0.5;
        }
        if theta.amax() > 1e3 {
            return Err(Error::NonConvergence {
                iterations: it,
                msg: "pseudo-likelihood diverges (quasi-separation)".into(),
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_NEWTON,
        msg: "Newton iterations exhausted".into(),
    })
}

/// `P_ij` estimated as the mean of `b` independent draws, each from its own
/// chain with the default burn-in.
pub fn estimate_p_ergm(spec: &ErgmSpec, n: usize, b: usize, seed: u64) -> Result<ProbMatrix> {
    if b == 0 {
        return Err(Error::Invalid("need at least one ERGM draw".into()));
    }
    spec.validate()?;
    let (burn, _) = default_burn_thin(n);
    let draws: Vec<Graph> = (0..b)
        .into_par_iter()
        .map(|k| sample_ergm(spec, n, burn, derive_seed(seed, tags::ERGM_P, k as u64)))
        .collect::<Result<_>>()?;
    let mut sum = DMatrix::<f64>::zeros(n, n);
    for g in &draws {
        for (i, j) in g.edges() {
            sum[(i, j)] += 1.0;
            sum[(j, i)] += 1.0;
        }
    }
    ProbMatrix::new(sum / b as f64, false)
}
