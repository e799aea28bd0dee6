use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ArdMatrix, Graph, ProbMatrix};

/// Erdős–Rényi (directed: DER) model on `n` nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErParams {
    pub n: usize,
    pub p: f64,
    #[serde(default)]
    pub directed: bool,
}

impl ErParams {
    pub fn prob_matrix(&self) -> Result<ProbMatrix> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::Invalid(format!("ER probability {} outside [0, 1]", self.p)));
        }
        ProbMatrix::constant(self.n, self.p, self.directed)
    }
}

/// Edge density: edges over dyads (ordered dyads when directed).
pub fn fit_er(g: &Graph) -> Result<ErParams> {
    let dyads = g.dyad_count();
    if dyads == 0 {
        return Err(Error::DegenerateFit("graph has no dyads".into()));
    }
    let p = g.edge_count() as f64 / dyads as f64;
    if p == 0.0 || p == 1.0 {
        return Err(Error::DegenerateFit(format!("edge density is {p}")));
    }
    Ok(ErParams {
        n: g.n(),
        p,
        directed: g.is_directed(),
    })
}

/// `p = (1/mK) sum_i sum_j Y_ij / n_j`.
pub fn fit_er_ard(y: &ArdMatrix) -> Result<f64> {
    let (m, k) = (y.m(), y.k());
    if m == 0 || k == 0 {
        return Err(Error::DegenerateFit("ARD matrix is empty".into()));
    }
    let sizes = y.group_sizes();
    let total: f64 = (0..m)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| y.count(i, j) as f64 / sizes[j] as f64)
        .sum();
    let p = total / (m * k) as f64;
    if p == 0.0 || p == 1.0 {
        return Err(Error::DegenerateFit(format!("ARD edge probability is {p}")));
    }
    Ok(p)
}
