use super::{replicate, ExperimentConfig, Outcome, RateRow};
use crate::error::Result;
use crate::gof::{
    directed_bootstrap_reference_refit, test_ard_er, test_directed_bootstrap, test_directed_explaw, test_directed_tw,
    BernoulliSampler,
};
use crate::graph::{extract_ard, sample_graph, NodeLabeling, ProbMatrix};
use crate::models::{fit_er, ErParams, SbmParams};
use crate::rng::{derive_seed, tags};

pub(crate) const ARD_P: f64 = 0.3;
pub(crate) const ARD_SBM: [[f64; 2]; 2] = [[0.4, 0.2], [0.2, 0.4]];
pub(crate) const DER_P: f64 = 0.2;
pub(crate) const DSBM: [[f64; 2]; 2] = [[0.3, 0.1], [0.2, 0.3]];

fn two_blocks(n: usize, block: [[f64; 2]; 2], directed: bool) -> Result<ProbMatrix> {
    let labels = NodeLabeling::contiguous_blocks(n, 2)?;
    SbmParams::new(labels, block.iter().map(|r| r.to_vec()).collect(), directed)?.prob_matrix()
}

/// `m = n/3` respondents (every third node), `K = n/10` equal contiguous
/// groups.
fn ard_decision(p: &ProbMatrix, alpha: f64, seed: u64) -> Result<bool> {
    let n = p.n();
    let groups = NodeLabeling::contiguous_blocks(n, n / 10)?;
    let respondents: Vec<usize> = (0..n / 3).map(|i| 3 * i).collect();
    let g = sample_graph(p, seed);
    let y = extract_ard(&g, &groups, &respondents)?;
    Ok(test_ard_er(&y, alpha)?.reject)
}

pub(super) fn run_ard(config: &ExperimentConfig) -> Result<Vec<RateRow>> {
    let mut rows = Vec::new();
    for &n in &config.n_values {
        let truths = [
            ("er", ErParams { n, p: ARD_P, directed: false }.prob_matrix()?),
            ("sbm", two_blocks(n, ARD_SBM, false)?),
        ];
        for (k, (name, p)) in truths.iter().enumerate() {
            let base = config.point_seed(n, k as f64);
            let out = replicate(config.replicates, |r| {
                Outcome::from_result(ard_decision(p, config.alpha, derive_seed(base, tags::DATA, r as u64)), 0)
            });
            rows.push(RateRow::new(name, n, None, &out));
        }
    }
    Ok(rows)
}

const DIRECTED_TESTS: [&str; 4] = ["bootstrap", "explaw", "tw", "bootstrap-refit"];

/// Decisions of [`DIRECTED_TESTS`] against a fitted directed ER model.
fn directed_decisions(config: &ExperimentConfig, p: &ProbMatrix, seed: u64) -> [Outcome; 4] {
    let g = sample_graph(p, derive_seed(seed, tags::DATA, 0));
    let p_hat = match fit_er(&g).and_then(|f| f.prob_matrix()) {
        Ok(p_hat) => p_hat,
        Err(_) => return [Outcome::default(); 4],
    };
    let boot = test_directed_bootstrap(
        &g,
        &BernoulliSampler(&p_hat),
        &p_hat,
        config.bootstrap,
        config.alpha,
        derive_seed(seed, tags::BOOTSTRAP, 0),
    );
    let explaw = test_directed_explaw(&g, &p_hat, config.alpha);
    let tw = test_directed_tw(&g, &p_hat, config.alpha);
    let refit = |g: &crate::graph::Graph| fit_er(g)?.prob_matrix();
    let boot_refit = directed_bootstrap_reference_refit(
        &BernoulliSampler(&p_hat),
        &p_hat,
        &refit,
        config.bootstrap,
        derive_seed(seed, tags::BOOTSTRAP, 0),
    )
    .and_then(|r| r.decide(&g, &p_hat, config.alpha, None));
    [boot, explaw, tw, boot_refit].map(|r| Outcome::from_result(r.map(|r| r.reject), 0))
}

pub(super) fn run_directed(config: &ExperimentConfig) -> Result<Vec<RateRow>> {
    let mut rows = Vec::new();
    for &n in &config.n_values {
        let truths = [
            ("der", ErParams { n, p: DER_P, directed: true }.prob_matrix()?),
            ("dsbm", two_blocks(n, DSBM, true)?),
        ];
        for (k, (name, p)) in truths.iter().enumerate() {
            let base = config.point_seed(n, k as f64);
            let out = replicate(config.replicates, |r| {
                directed_decisions(config, p, derive_seed(base, tags::REPLICATE, r as u64))
            });
            for (t, test) in DIRECTED_TESTS.iter().enumerate() {
                let col: Vec<Outcome> = out.iter().map(|o| o[t]).collect();
                rows.push(RateRow::new(&format!("{name}-{test}"), n, None, &col));
            }
        }
    }
    Ok(rows)
}
