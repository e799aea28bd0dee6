//! Residual matrices and their extreme spectrum.
//!
//! Each residual centres the observed data at the fitted probabilities and
//! scales every entry to the variance its reference theorem expects:
//! rows of the undirected residual have total variance one, directed and ARD
//! residual entries have unit variance.

mod eigen;

pub use eigen::{dense_extremes, extreme_eigenvalues, extreme_singular_values, largest_singular_value};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ArdMatrix, Graph, ProbMatrix};

/// Probabilities closer than this to 0 or 1 are rejected, not clamped.
pub const PROB_EPS: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualKind {
    UndirectedSym,
    Directed,
    ArdRect,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualMatrix {
    a: DMatrix<f64>,
    kind: ResidualKind,
}

impl ResidualMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.a
    }

    pub fn kind(&self) -> ResidualKind {
        self.kind
    }

    pub fn shape(&self) -> (usize, usize) {
        self.a.shape()
    }

    /// Extreme eigenvalues; only meaningful for the symmetric kind.
    pub fn extreme_eigenvalues(&self) -> Result<(f64, f64)> {
        if self.kind != ResidualKind::UndirectedSym {
            return Err(Error::Invalid(format!("{:?} residual is not symmetric", self.kind)));
        }
        Ok(eigen::extreme_eigenvalues_unchecked(&self.a))
    }

    pub fn extreme_singular_values(&self) -> (f64, f64) {
        extreme_singular_values(&self.a)
    }

    pub fn largest_singular_value(&self) -> f64 {
        largest_singular_value(&self.a)
    }

    /// Comma-separated dump for debugging.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for r in 0..self.a.nrows() {
            let row: Vec<String> = self.a.row(r).iter().map(|x| format!("{x:.12e}")).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

fn check_prob(i: usize, j: usize, p: f64) -> Result<()> {
    if p <= PROB_EPS || p >= 1.0 - PROB_EPS {
        return Err(Error::DegenerateProbability { row: i, col: j, value: p });
    }
    Ok(())
}

fn check_sizes(g: &Graph, p: &ProbMatrix) -> Result<()> {
    if g.n() != p.n() {
        return Err(Error::Invalid(format!(
            "graph has {} nodes, probability matrix {}",
            g.n(),
            p.n()
        )));
    }
    Ok(())
}

/// `(G_ij - P_ij) / sqrt((n-1) P_ij (1-P_ij))` off the diagonal, zero on it.
pub fn residual_undirected(g: &Graph, p: &ProbMatrix) -> Result<ResidualMatrix> {
    if g.is_directed() || p.is_directed() {
        return Err(Error::Invalid("undirected residual needs an undirected graph and matrix".into()));
    }
    check_sizes(g, p)?;
    let n = g.n();
    let nm1 = (n.saturating_sub(1)) as f64;
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let pij = p.get(i, j);
            check_prob(i, j, pij)?;
            let y = g.has_edge(i, j) as u8 as f64;
            let v = (y - pij) / (nm1 * pij * (1.0 - pij)).sqrt();
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    Ok(ResidualMatrix {
        a,
        kind: ResidualKind::UndirectedSym,
    })
}

/// `(G_ij - P_ij) / sqrt(P_ij (1-P_ij))` off the diagonal, zero on it.
pub fn residual_directed(g: &Graph, p: &ProbMatrix) -> Result<ResidualMatrix> {
    check_sizes(g, p)?;
    let n = g.n();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let row = g.row(i);
        for j in 0..n {
            if i == j {
                continue;
            }
            let pij = p.get(i, j);
            check_prob(i, j, pij)?;
            a[(i, j)] = (row[j] as f64 - pij) / (pij * (1.0 - pij)).sqrt();
        }
    }
    Ok(ResidualMatrix {
        a,
        kind: ResidualKind::Directed,
    })
}

/// `(Y_ij - n_j p) / sqrt(n_j p (1-p))` for every entry; no diagonal rule.
pub fn residual_ard(y: &ArdMatrix, p_hat: f64) -> Result<ResidualMatrix> {
    if !(p_hat > PROB_EPS && p_hat < 1.0 - PROB_EPS) {
        return Err(Error::DegenerateFit(format!("ARD edge probability {p_hat}")));
    }
    let sizes = y.group_sizes();
    let a = DMatrix::from_fn(y.m(), y.k(), |i, j| {
        let nj = sizes[j] as f64;
        (y.count(i, j) as f64 - nj * p_hat) / (nj * p_hat * (1.0 - p_hat)).sqrt()
    });
    Ok(ResidualMatrix {
        a,
        kind: ResidualKind::ArdRect,
    })
}
