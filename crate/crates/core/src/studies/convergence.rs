use serde::{Deserialize, Serialize};

use super::{replicate, ExperimentConfig, KsRow};
use crate::error::Result;
use crate::graph::{sample_graph, ProbMatrix};
use crate::rmt::Tw1Table;
use crate::rng::{derive_seed, tags};
use crate::spectral::residual_undirected;

const BIN_LO: f64 = -7.0;
const BIN_HI: f64 = 5.0;
const BIN_WIDTH: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub n: usize,
    pub p: f64,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: usize,
    pub density: f64,
    pub tw1_density: f64,
}

/// `n^{2/3} (lambda_max - 2)` for ER graphs residualized against the true `p`.
pub fn scaled_lambda_max_sample(n: usize, p: f64, replicates: usize, seed: u64) -> Result<Vec<f64>> {
    let pm = ProbMatrix::constant(n, p, false)?;
    let scale = (n as f64).powf(2.0 / 3.0);
    replicate(replicates, |r| {
        let g = sample_graph(&pm, derive_seed(seed, tags::DATA, r as u64));
        let (_, lmax) = residual_undirected(&g, &pm)?.extreme_eigenvalues()?;
        Ok(scale * (lmax - 2.0))
    })
    .into_iter()
    .collect()
}

pub(super) fn run(config: &ExperimentConfig) -> Result<(Vec<HistogramRow>, Vec<KsRow>)> {
    let table = Tw1Table::embedded();
    let bins = ((BIN_HI - BIN_LO) / BIN_WIDTH).round() as usize;
    let mut hist = Vec::new();
    let mut ks = Vec::new();
    for &n in &config.n_values {
        for &p in &config.grid {
            let sample = scaled_lambda_max_sample(n, p, config.replicates, config.point_seed(n, p))?;
            ks.push(KsRow {
                n,
                p,
                replicates: sample.len(),
                ks: table.ks_distance(&sample),
            });
            let mut counts = vec![0usize; bins];
            for &t in &sample {
                let b = ((t - BIN_LO) / BIN_WIDTH).floor();
                if b >= 0.0 && (b as usize) < bins {
                    counts[b as usize] += 1;
                }
            }
            let total = sample.len() as f64;
            for (b, &count) in counts.iter().enumerate() {
                let lo = BIN_LO + b as f64 * BIN_WIDTH;
                let hi = lo + BIN_WIDTH;
                hist.push(HistogramRow {
                    n,
                    p,
                    bin_lo: lo,
                    bin_hi: hi,
                    count,
                    density: count as f64 / (total * BIN_WIDTH),
                    tw1_density: (table.cdf(hi) - table.cdf(lo)) / BIN_WIDTH,
                });
            }
        }
    }
    Ok((hist, ks))
}
