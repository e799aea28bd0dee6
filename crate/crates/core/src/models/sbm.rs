use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeLabeling, ProbMatrix};

/// Stochastic block model with given labels (used as a generator only).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub labels: NodeLabeling,
    /// `K x K` block probabilities, row-major.
    pub block: Vec<Vec<f64>>,
    #[serde(default)]
    pub directed: bool,
}

impl SbmParams {
    pub fn new(labels: NodeLabeling, block: Vec<Vec<f64>>, directed: bool) -> Result<Self> {
        let s = SbmParams { labels, block, directed };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let k = self.labels.k();
        if self.block.len() != k || self.block.iter().any(|r| r.len() != k) {
            return Err(Error::Invalid(format!("block matrix must be {k}x{k}")));
        }
        for a in 0..k {
            for b in 0..k {
                let v = self.block[a][b];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Invalid(format!("block probability {v} outside [0, 1]")));
                }
                if !self.directed && v != self.block[b][a] {
                    return Err(Error::Invalid("undirected block matrix must be symmetric".into()));
                }
            }
        }
        Ok(())
    }

    pub fn prob_matrix(&self) -> Result<ProbMatrix> {
        self.validate()?;
        let n = self.labels.len();
        let l = self.labels.labels();
        ProbMatrix::new(DMatrix::from_fn(n, n, |i, j| self.block[l[i]][l[j]]), self.directed)
    }
}
