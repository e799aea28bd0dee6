//! Reference distributions for the spectral statistics.
//!
//! TW1 is carried as a tabulated CDF produced by GOE Monte Carlo (see
//! [`generate_tw1_table`]); the version that ships with the crate lives in
//! `data/tw1.csv` and is loaded once. The exponential-type law for the
//! scaled smallest singular value has a closed form.

pub mod goe;

use std::fmt::Write as _;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, tags};

const EMBEDDED_TABLE: &str = include_str!("../../data/tw1.csv");

/// Tabulated TW1 distribution function on an ascending grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tw1Table {
    grid: Vec<f64>,
    cdf: Vec<f64>,
    mean: f64,
    sd: f64,
    meta: TableMeta,
}

/// Provenance of a generated table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableMeta {
    pub seed: u64,
    pub replicates: usize,
    pub matrix_size: usize,
    pub truncation: usize,
}

impl Tw1Table {
    /// The table shipped with the crate.
    pub fn embedded() -> &'static Tw1Table {
        static TABLE: OnceLock<Tw1Table> = OnceLock::new();
        TABLE.get_or_init(|| Tw1Table::from_csv(EMBEDDED_TABLE).expect("embedded TW1 table is valid"))
    }

    /// Builds a table from grid/CDF columns; mean and sd are integrated from
    /// the table itself.
    pub fn new(grid: Vec<f64>, cdf: Vec<f64>, meta: TableMeta) -> Result<Self> {
        if grid.len() != cdf.len() || grid.len() < 2 {
            return Err(Error::Invalid("table needs matching grid and cdf columns".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invalid("table grid must be strictly ascending".into()));
        }
        if cdf.windows(2).any(|w| w[1] < w[0]) || cdf.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::Invalid("table cdf must be nondecreasing within [0, 1]".into()));
        }
        if cdf[0] >= 1e-3 || cdf[cdf.len() - 1] <= 0.999 {
            return Err(Error::Invalid("table does not cover the bulk of the distribution".into()));
        }
        let (mean, sd) = integrate_moments(&grid, &cdf);
        Ok(Tw1Table {
            grid,
            cdf,
            mean,
            sd,
            meta,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    pub fn meta(&self) -> &TableMeta {
        &self.meta
    }

    /// `(mu_TW, s_TW)`.
    pub fn moments(&self) -> (f64, f64) {
        (self.mean, self.sd)
    }

    /// Piecewise-linear CDF. Outside the grid the end values are returned;
    /// the grid carries all but a negligible fraction of the mass.
    pub fn cdf(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x <= g[0] {
            return self.cdf[0];
        }
        if x >= g[g.len() - 1] {
            return self.cdf[g.len() - 1];
        }
        let k = g.partition_point(|&v| v <= x);
        let (x0, x1) = (g[k - 1], g[k]);
        let (f0, f1) = (self.cdf[k - 1], self.cdf[k]);
        f0 + (f1 - f0) * (x - x0) / (x1 - x0)
    }

    /// Inverse of the piecewise-linear CDF. Probabilities outside the range
    /// spanned by the table are an error rather than clamped.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        let f = &self.cdf;
        if !(q > 0.0 && q < 1.0) || q < f[0] || q > f[f.len() - 1] {
            return Err(Error::Domain(q));
        }
        // First grid point whose CDF reaches q.
        let k = f.partition_point(|&v| v < q);
        if f[k] == q || k == 0 {
            return Ok(self.grid[k]);
        }
        let (f0, f1) = (f[k - 1], f[k]);
        let (x0, x1) = (self.grid[k - 1], self.grid[k]);
        Ok(x0 + (x1 - x0) * (q - f0) / (f1 - f0))
    }

    /// Kolmogorov-Smirnov distance between the empirical CDF of `sample`
    /// and the table.
    pub fn ks_distance(&self, sample: &[f64]) -> f64 {
        let mut x = sample.to_vec();
        x.sort_by(|a, b| a.total_cmp(b));
        let k = x.len() as f64;
        x.iter().enumerate().fold(0.0f64, |d, (i, &v)| {
            let f = self.cdf(v);
            d.max((f - i as f64 / k).abs()).max((f - (i + 1) as f64 / k).abs())
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# TW1 cumulative distribution table (GOE Monte Carlo)").unwrap();
        writeln!(s, "# mean={:.10}", self.mean).unwrap();
        writeln!(s, "# sd={:.10}", self.sd).unwrap();
        writeln!(s, "# seed={}", self.meta.seed).unwrap();
        writeln!(s, "# replicates={}", self.meta.replicates).unwrap();
        writeln!(s, "# matrix_size={}", self.meta.matrix_size).unwrap();
        writeln!(s, "# truncation={}", self.meta.truncation).unwrap();
        writeln!(s, "x,cdf").unwrap();
        for (x, f) in self.grid.iter().zip(&self.cdf) {
            writeln!(s, "{x:.4},{f:.8}").unwrap();
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut meta = TableMeta {
            seed: 0,
            replicates: 0,
            matrix_size: 0,
            truncation: 0,
        };
        let (mut declared_mean, mut declared_sd) = (None, None);
        let mut grid = Vec::new();
        let mut cdf = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            let perr = |msg: String| Error::Parse { line: i + 1, msg };
            if let Some(c) = line.strip_prefix('#') {
                if let Some((k, v)) = c.trim().split_once('=') {
                    let v = v.trim();
                    match k.trim() {
                        "mean" => declared_mean = v.parse::<f64>().ok(),
                        "sd" => declared_sd = v.parse::<f64>().ok(),
                        "seed" => meta.seed = v.parse().map_err(|_| perr(format!("bad seed {v}")))?,
                        "replicates" => meta.replicates = v.parse().map_err(|_| perr(format!("bad count {v}")))?,
                        "matrix_size" => meta.matrix_size = v.parse().map_err(|_| perr(format!("bad size {v}")))?,
                        "truncation" => meta.truncation = v.parse().map_err(|_| perr(format!("bad size {v}")))?,
                        _ => {}
                    }
                }
                continue;
            }
            if line.is_empty() || line.starts_with('x') {
                continue;
            }
            let (x, f) = line
                .split_once(',')
                .ok_or_else(|| perr("expected x,cdf".into()))?;
            grid.push(x.trim().parse::<f64>().map_err(|_| perr(format!("bad x {x}")))?);
            cdf.push(f.trim().parse::<f64>().map_err(|_| perr(format!("bad cdf {f}")))?);
        }
        let table = Tw1Table::new(grid, cdf, meta)?;
        // Header moments are informational; they must agree with the body.
        for (name, declared, actual) in [("mean", declared_mean, table.mean), ("sd", declared_sd, table.sd)] {
            if let Some(d) = declared {
                if (d - actual).abs() > 1e-6 {
                    return Err(Error::Invalid(format!(
                        "header {name} {d} disagrees with tabulated value {actual}"
                    )));
                }
            }
        }
        Ok(table)
    }
}

/// Mean and standard deviation of the distribution whose CDF is the linear
/// interpolation of the table (uniform mass within each cell).
fn integrate_moments(grid: &[f64], cdf: &[f64]) -> (f64, f64) {
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    let mut mass = 0.0;
    for k in 0..grid.len() - 1 {
        let w = cdf[k + 1] - cdf[k];
        let (a, b) = (grid[k], grid[k + 1]);
        m1 += w * 0.5 * (a + b);
        m2 += w * (a * a + a * b + b * b) / 3.0;
        mass += w;
    }
    let mean = m1 / mass;
    (mean, (m2 / mass - mean * mean).sqrt())
}

/// `TW1(q)` from the embedded table.
pub fn tw1_quantile(q: f64) -> Result<f64> {
    Tw1Table::embedded().quantile(q)
}

/// `(mu_TW, s_TW)` of the embedded table.
pub fn tw1_moments() -> (f64, f64) {
    Tw1Table::embedded().moments()
}

/// `P(sqrt(n) s_min >= t)` in the limit: `exp(-t^2/2 - t)`.
pub fn explaw_survival(t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Invalid(format!("survival argument must be a finite t >= 0, got {t}")));
    }
    Ok((-0.5 * t * t - t).exp())
}

/// Closed-form inverse of [`explaw_survival`]: the `q`-quantile.
pub fn explaw_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(q));
    }
    Ok(-1.0 + (1.0 - 2.0 * (-q).ln_1p()).sqrt())
}

/// Settings for regenerating the TW1 table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub matrix_size: usize,
    pub replicates: usize,
    pub seed: u64,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_step: f64,
}

impl Default for TableSpec {
    fn default() -> Self {
        TableSpec {
            matrix_size: 10_000_000,
            replicates: 400_000,
            seed: 20_211_105,
            grid_min: -8.0,
            grid_max: 7.0,
            grid_step: 0.02,
        }
    }
}

/// Monte Carlo sample of scaled GOE largest eigenvalues.
pub fn goe_edge_sample(matrix_size: usize, replicates: usize, seed: u64) -> Vec<f64> {
    const CHUNK: usize = 1000;
    let chunks = replicates.div_ceil(CHUNK);
    let mut out: Vec<f64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = rng_from_seed(derive_seed(seed, tags::TABLE, c as u64));
            let len = CHUNK.min(replicates - c * CHUNK);
            (0..len)
                .map(|_| goe::scaled_goe_lambda_max(matrix_size, &mut rng))
                .collect::<Vec<_>>()
        })
        .collect();
    out.truncate(replicates);
    out
}

/// Regenerates the TW1 table from GOE Monte Carlo.
pub fn generate_tw1_table(spec: &TableSpec) -> Result<Tw1Table> {
    if spec.replicates == 0 || !(spec.grid_step > 0.0) || spec.grid_max <= spec.grid_min {
        return Err(Error::Invalid("table spec needs replicates and an ascending grid".into()));
    }
    let mut sample = goe_edge_sample(spec.matrix_size, spec.replicates, spec.seed);
    sample.sort_by(|a, b| a.total_cmp(b));
    let steps = ((spec.grid_max - spec.grid_min) / spec.grid_step).round() as usize;
    let total = sample.len() as f64;
    let mut grid = Vec::with_capacity(steps + 1);
    let mut cdf = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        // Rounded so the CSV round trip is exact.
        let x = ((spec.grid_min + k as f64 * spec.grid_step) * 1e4).round() / 1e4;
        let below = sample.partition_point(|&v| v <= x) as f64;
        grid.push(x);
        cdf.push(((below / total) * 1e8).round() / 1e8);
    }
    Tw1Table::new(
        grid,
        cdf,
        TableMeta {
            seed: spec.seed,
            replicates: spec.replicates,
            matrix_size: spec.matrix_size,
            truncation: goe::edge_truncation(spec.matrix_size),
        },
    )
}
