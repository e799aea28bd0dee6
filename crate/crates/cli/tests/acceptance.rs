//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `cargo test -p netgof-cli --test acceptance -- 2 7` runs a subset. Failures
//! are reported, and the process exits non-zero on them only when
//! `NETGOF_ACCEPTANCE_STRICT` is set.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use netgof::ergm::{default_burn_thin, suff_stats, ErgmChain, ErgmSpec, ErgmTerm};
use netgof::graph::{extract_ard, write_ard_csv, write_edge_list};
use netgof::models::{fit_beta_mle, SbmParams};
use netgof::rmt::{explaw_quantile, explaw_survival, goe_edge_sample, tw1_moments, Tw1Table};
use netgof::rng::rng_from_seed;
use netgof::spectral::{extreme_eigenvalues, extreme_singular_values, largest_singular_value};
use netgof::studies::{run_experiment, Experiment, ExperimentConfig, RateRow, StudyReport};
use netgof::{sample_graph, Graph, NodeLabeling, ProbMatrix};

struct Verdict {
    pass: bool,
    lines: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Verdict {
            pass: true,
            lines: Vec::new(),
        }
    }

    /// Records one check; the criterion passes only if every check does.
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.pass &= ok;
        self.lines.push(format!("{} {}", if ok { "ok  " } else { "MISS" }, what.into()));
    }

    fn note(&mut self, what: impl Into<String>) {
        self.lines.push(format!("     {}", what.into()));
    }
}

// ---------------------------------------------------------------- helpers

fn study(experiment: Experiment, tweak: impl FnOnce(&mut ExperimentConfig)) -> StudyReport {
    let mut config = ExperimentConfig::defaults(experiment);
    tweak(&mut config);
    run_experiment(&config).expect("study runs")
}

fn row<'a>(r: &'a StudyReport, series: &str, n: usize, param: Option<f64>) -> &'a RateRow {
    r.rate(series, n, param)
        .unwrap_or_else(|| panic!("no row {series} n={n} param={param:?}"))
}

fn describe(r: &RateRow) -> String {
    let param = r.param.map(|p| format!(" param={p}")).unwrap_or_default();
    format!(
        "{} n={}{}: {:.3} ({}/{}, se {:.3}, errors {})",
        r.series, r.n, param, r.rate, r.hits, r.trials, r.se, r.errors
    )
}

/// Two-sided binomial noise band for the difference of two rates, from
/// their pooled rate.
fn noise(a: &RateRow, b: &RateRow) -> f64 {
    let pooled = (a.hits + b.hits) as f64 / (a.trials + b.trials) as f64;
    2.0 * (pooled * (1.0 - pooled) * (1.0 / a.trials as f64 + 1.0 / b.trials as f64)).sqrt()
}

fn in_range(r: &RateRow, lo: f64, hi: f64) -> bool {
    r.trials > 0 && (lo..=hi).contains(&r.rate)
}

// ------------------------------------------------------------ criterion 1

/// Largest eigenvalue of the leading `rows x rows` block of the
/// tridiagonal GOE model, `n^{1/6} (lambda - 2 sqrt(n))`.
fn tridiagonal_goe_statistic(n: usize, rows: usize, rng: &mut impl rand::Rng) -> f64 {
    let diag: Vec<f64> = (0..rows)
        .map(|_| std::f64::consts::SQRT_2 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let off: Vec<f64> = (1..rows)
        .map(|k| ChiSquared::new((n - k) as f64).unwrap().sample(rng).sqrt())
        .collect();
    // Eigenvalues below x, by the signs of the LDL^T pivots.
    let below = |x: f64| {
        let mut count = 0;
        let mut q = diag[0] - x;
        for k in 0..rows {
            if k > 0 {
                let prev = if q == 0.0 { 1e-300 } else { q };
                q = diag[k] - x - off[k - 1] * off[k - 1] / prev;
            }
            count += (q < 0.0) as usize;
        }
        count
    };
    let radius = (0..rows)
        .map(|k| diag[k].abs() + if k > 0 { off[k - 1] } else { 0.0 } + off.get(k).copied().unwrap_or(0.0))
        .fold(0.0, f64::max);
    let (mut lo, mut hi) = (-radius, radius);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if below(mid) == rows {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    (n as f64).powf(1.0 / 6.0) * (lambda - 2.0 * (n as f64).sqrt())
}

fn mean_sd(x: &[f64]) -> (f64, f64) {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64;
    (m, v.sqrt())
}

fn tw1_reference() -> Verdict {
    let mut v = Verdict::new();
    let table = Tw1Table::embedded();
    let sample = goe_edge_sample(2000, 10_000, 101);
    let ks = table.ks_distance(&sample);
    v.check(ks <= 0.03, format!("KS of 10000 GOE edges at n = 2000 vs table: {ks:.4} <= 0.03"));
    let (m2000, s2000) = mean_sd(&sample);
    v.note(format!("n = 2000 sample moments: mean {m2000:.4}, sd {s2000:.4}"));

    // Independent oracle: its own tridiagonal sampler and bisection, at a
    // size where the finite-n bias is far below the tolerance.
    let n = 1_000_000;
    let rows = (10.0 * (n as f64).cbrt()) as usize;
    let mut rng = rng_from_seed(0x0AC1E);
    let oracle: Vec<f64> = (0..100_000).map(|_| tridiagonal_goe_statistic(n, rows, &mut rng)).collect();
    let (om, os) = mean_sd(&oracle);
    let (tm, ts) = tw1_moments();
    v.check((tm - om).abs() <= 0.02, format!("table mean {tm:.4} vs oracle {om:.4} (n = 1e6, 1e5 draws)"));
    v.check((ts - os).abs() <= 0.02, format!("table sd {ts:.4} vs oracle {os:.4}"));
    v
}

// -------------------------------------------------------- criteria 2 to 4

fn beta_size() -> Verdict {
    let mut v = Verdict::new();
    let r = study(Experiment::Fig5Expit, |c| {
        c.n_values = vec![50, 100, 200];
        c.replicates = 100;
        c.bootstrap = 200;
    });
    let rows: Vec<&RateRow> = [50, 100, 200].iter().map(|&n| row(&r, "bootstrap", n, None)).collect();
    for x in &rows {
        v.note(describe(x));
    }
    v.check(in_range(rows[2], 0.01, 0.10), "size at n = 200 within [0.01, 0.10]");
    for w in rows.windows(2) {
        let ok = w[1].rate >= w[0].rate - noise(w[0], w[1]);
        v.check(ok, format!("n = {} not below n = {} beyond Monte Carlo noise", w[1].n, w[0].n));
    }
    v
}

fn nonparametric_power() -> Verdict {
    let mut v = Verdict::new();
    let r = study(Experiment::Fig5Nonpar, |c| {
        c.n_values = vec![200];
        c.replicates = 100;
    });
    let x = row(&r, "bootstrap", 200, None);
    v.note(describe(x));
    v.check(x.trials > 0 && x.rate >= 0.9, "power at n = 200 >= 0.9");
    v
}

fn exp_link_misspecification() -> Verdict {
    let mut v = Verdict::new();
    let r = study(Experiment::Fig5Exp, |c| {
        c.n_values = vec![50, 100, 200];
        c.replicates = 100;
    });
    for n in [50, 100, 200] {
        let x = row(&r, "bootstrap", n, None);
        v.note(describe(x));
        v.check(x.trials > 0 && x.rate <= 0.15, format!("rejection at n = {n} <= 0.15"));
    }
    v
}

// ------------------------------------------------------------ criterion 5

fn dimension_selection() -> Verdict {
    let mut v = Verdict::new();
    let r = study(Experiment::Fig4Dims, |c| {
        c.n_values = vec![100, 200];
        c.grid = vec![1.0, 2.0];
        c.param_sets = 25;
        c.replicates = 20;
    });
    for d in [1.0, 2.0] {
        let small = row(&r, "correct", 100, Some(d));
        let large = row(&r, "correct", 200, Some(d));
        v.note(describe(small));
        v.note(describe(large));
        v.check(large.trials > 0 && large.rate >= 0.75, format!("d = {d}: correct rate at n = 200 >= 0.75"));
        v.check(large.rate >= small.rate, format!("d = {d}: rate at n = 200 >= rate at n = 100"));
    }
    v
}

// ------------------------------------------------------------ criterion 6

fn ergm_power() -> Verdict {
    let mut v = Verdict::new();
    let grid = vec![-0.05, -0.025, 0.0, 0.025, 0.05];
    let r = study(Experiment::Fig7ErgmPower, |c| {
        c.n_values = vec![25, 50];
        c.grid = grid.clone();
        c.replicates = 100;
    });
    for n in [25, 50] {
        for &g in &grid {
            v.note(describe(row(&r, "bootstrap", n, Some(g))));
        }
        let zero = row(&r, "bootstrap", n, Some(0.0));
        v.check(in_range(zero, 0.01, 0.10), format!("n = {n}: rejection at 0 within [0.01, 0.10]"));
        for sign in [-1.0, 1.0] {
            let side: Vec<&RateRow> = [0.0, 0.025, 0.05]
                .iter()
                .map(|&a| row(&r, "bootstrap", n, Some(if a == 0.0 { 0.0 } else { sign * a })))
                .collect();
            let monotone = side.windows(2).all(|w| w[1].rate >= w[0].rate - noise(w[0], w[1]));
            v.check(monotone, format!("n = {n}, sign {sign:+}: nondecreasing in |coefficient| within noise"));
            let (first, last) = (side[0], side[2]);
            v.check(
                last.rate > first.rate + noise(first, last),
                format!(
                    "n = {n}, sign {sign:+}: rate at |coefficient| = 0.05 exceeds rate at 0 beyond noise ({:.3} vs {:.3})",
                    last.rate, first.rate
                ),
            );
        }
    }
    let off_zero: Vec<f64> = grid.iter().copied().filter(|&g| g != 0.0).collect();
    let pooled = |n: usize| {
        let rows: Vec<&RateRow> = off_zero.iter().map(|&g| row(&r, "bootstrap", n, Some(g))).collect();
        let (hits, trials) = rows.iter().fold((0, 0), |(h, t), x| (h + x.hits, t + x.trials));
        RateRow {
            series: "pooled".into(),
            n,
            param: None,
            trials,
            hits,
            errors: 0,
            redraws: 0,
            rate: hits as f64 / trials.max(1) as f64,
            se: 0.0,
        }
    };
    let (p25, p50) = (pooled(25), pooled(50));
    v.check(
        p50.rate > p25.rate + noise(&p25, &p50),
        format!("power away from 0 grows from n = 25 to 50 beyond noise ({:.3} vs {:.3})", p50.rate, p25.rate),
    );
    v
}

// ------------------------------------------------------------ criterion 7

fn ard_test() -> Verdict {
    let mut v = Verdict::new();
    let r = study(Experiment::Fig6Ard, |c| c.n_values = vec![30, 60, 90, 120]);
    for n in [30, 60, 90, 120] {
        let er = row(&r, "er", n, None);
        v.note(describe(er));
        v.note(describe(row(&r, "sbm", n, None)));
        v.check(in_range(er, 0.01, 0.12), format!("size at n = {n} within [0.01, 0.12]"));
    }
    let sbm = row(&r, "sbm", 120, None);
    v.check(sbm.trials > 0 && sbm.rate >= 0.8, "SBM power at n = 120 >= 0.8");
    v
}

// ------------------------------------------------------------ criterion 8

fn directed_tests() -> Verdict {
    let mut v = Verdict::new();
    let r = study(Experiment::Fig8Directed, |c| {
        c.n_values = vec![25, 50, 100];
        c.replicates = 100;
    });
    let alpha = r.config.alpha;
    for n in [25, 50, 100] {
        for s in ["der-bootstrap", "dsbm-bootstrap", "der-explaw", "dsbm-explaw", "der-tw", "dsbm-tw"] {
            v.note(describe(row(&r, s, n, None)));
        }
        let size = row(&r, "der-bootstrap", n, None);
        v.check(in_range(size, 0.01, 0.10), format!("bootstrap size at n = {n} within [0.01, 0.10]"));
        let ex = row(&r, "dsbm-explaw", n, None);
        let t = ex.trials as f64;
        let band = 2.576 * (t * alpha * (1.0 - alpha)).sqrt();
        v.check(
            ex.trials > 0 && (ex.hits as f64 - t * alpha).abs() <= band,
            format!("explaw power at n = {n} consistent with alpha ({} hits of {}, 99% band)", ex.hits, ex.trials),
        );
    }
    let (size, power) = (row(&r, "der-bootstrap", 100, None), row(&r, "dsbm-bootstrap", 100, None));
    v.check(
        power.rate - size.rate >= 0.3,
        format!("bootstrap power minus size at n = 100: {:.3} >= 0.3", power.rate - size.rate),
    );
    v
}

// ------------------------------------------------------------ criterion 9

fn random_symmetric(n: usize, rng: &mut impl rand::Rng) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = rng.random_range(-3.0..3.0);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    m
}

/// Coefficients of `det(xI - A)` by the Faddeev–LeVerrier recursion,
/// highest power first.
fn char_poly(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut coef = vec![1.0];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        m = a * &m + DMatrix::identity(n, n) * coef[k - 1];
        let c = -(a * &m).trace() / k as f64;
        coef.push(c);
    }
    coef
}

/// All real roots of a polynomial whose roots are known to be real and
/// simple: sign changes on a fine grid, then bisection.
fn real_roots(coef: &[f64]) -> Vec<f64> {
    let eval = |x: f64| coef.iter().fold(0.0, |acc, c| acc * x + c);
    let bound = 1.0 + coef[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let steps = 200_000;
    let h = 2.0 * bound / steps as f64;
    let mut roots = Vec::new();
    for s in 0..steps {
        let (mut lo, mut hi) = (-bound + s as f64 * h, -bound + (s + 1) as f64 * h);
        if eval(lo) == 0.0 {
            roots.push(lo);
            continue;
        }
        if eval(lo).signum() == eval(hi).signum() {
            continue;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if eval(mid).signum() == eval(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots
}

fn loglik(b: &[f64], g: &Graph) -> f64 {
    let n = g.n();
    let mut l = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let s = b[i] + b[j];
            l += if g.has_edge(i, j) { s } else { 0.0 } - s.exp().ln_1p();
        }
    }
    l
}

fn oracle_suite() -> Verdict {
    let mut v = Verdict::new();
    let start = Instant::now();
    let mut rng = rng_from_seed(9);

    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        for _ in 0..25 {
            let a = random_symmetric(n, &mut rng);
            let roots = real_roots(&char_poly(&a));
            let (lo, hi) = extreme_eigenvalues(&a).unwrap();
            if roots.len() != n {
                worst = f64::INFINITY;
                continue;
            }
            worst = worst.max((roots[0] - lo).abs()).max((roots[n - 1] - hi).abs());
        }
    }
    v.check(worst < 1e-7, format!("extreme eigenvalues vs characteristic roots, n <= 4: max error {worst:.1e}"));

    let mut worst: f64 = 0.0;
    for (m, k) in [(3, 5), (5, 3), (4, 4), (40, 60), (200, 300)] {
        let a = DMatrix::from_fn(m, k, |_, _| rng.random_range(-1.0..1.0));
        let gram = if m <= k { &a * a.transpose() } else { a.transpose() * &a };
        let eig: nalgebra::DVector<f64> = gram.symmetric_eigenvalues();
        let top = eig.max().sqrt();
        let bottom = eig.min().max(0.0).sqrt();
        let (s_min, s_max) = extreme_singular_values(&a);
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1.0);
        worst = worst
            .max(rel(s_max, top))
            .max(rel(s_min, bottom))
            .max(rel(largest_singular_value(&a), top));
    }
    v.check(worst < 1e-8, format!("singular values vs Gram eigenvalues: max relative error {worst:.1e}"));

    let spec = ErgmSpec::new(vec![ErgmTerm::Edges, ErgmTerm::Triangles, ErgmTerm::Kstar2], vec![-0.3, 0.4, -0.2]).unwrap();
    let pairs: Vec<(usize, usize)> = (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j))).collect();
    let mut exact: HashMap<[u64; 3], f64> = HashMap::new();
    let mut z = 0.0;
    for mask in 0u32..1 << pairs.len() {
        let edges: Vec<_> = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        let g = Graph::from_edges(5, false, &edges).unwrap();
        let (e, t, s) = (
            edges.len() as f64,
            triangle_count(&g) as f64,
            g.degrees().iter().map(|&d| (d * d.saturating_sub(1) / 2) as f64).sum::<f64>(),
        );
        let w = (-0.3 * e + 0.4 * t - 0.2 * s).exp();
        *exact.entry([e as u64, t as u64, s as u64]).or_default() += w;
        z += w;
    }
    let (burn, thin) = default_burn_thin(5);
    let mut chain = ErgmChain::new(&spec, 5, 23).unwrap();
    chain.step(burn);
    let draws = 40_000;
    let mut seen: HashMap<[u64; 3], f64> = HashMap::new();
    for _ in 0..draws {
        chain.step(thin);
        *seen.entry(suff_stats(&chain.graph()).unwrap().as_array()).or_default() += 1.0;
    }
    let mut keys: Vec<[u64; 3]> = exact.keys().chain(seen.keys()).copied().collect();
    keys.sort();
    keys.dedup();
    let tv = 0.5
        * keys
            .iter()
            .map(|k| (exact.get(k).copied().unwrap_or(0.0) / z - seen.get(k).copied().unwrap_or(0.0) / draws as f64).abs())
            .sum::<f64>();
    v.check(tv <= 0.05, format!("ERGM chain vs enumeration at n = 5: total variation {tv:.4} <= 0.05"));

    let g = Graph::from_edges(5, false, &[(2, 4), (2, 0), (2, 1), (4, 0), (4, 3), (1, 3)]).unwrap();
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
    let err = fit.beta.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    v.check(err < 1e-3, format!("beta MLE vs likelihood grid at n = 5: max error {err:.1e}"));

    let mut err: f64 = 0.0;
    for (n, k) in [(10, 2), (12, 3), (9, 4)] {
        // Circulant k-regular graph.
        let mut edges = Vec::new();
        for i in 0..n {
            for s in 1..=k / 2 {
                edges.push((i, (i + s) % n));
            }
            if k % 2 == 1 && i < n / 2 {
                edges.push((i, i + n / 2));
            }
        }
        let g = Graph::from_edges(n, false, &edges).unwrap();
        assert!(g.degrees().iter().all(|&d| d == k));
        let p = k as f64 / (n - 1) as f64;
        let want = 0.5 * (p / (1.0 - p)).ln();
        let fit = fit_beta_mle(&g).unwrap();
        err = fit.beta.iter().fold(err, |m, x| m.max((x - want).abs()));
    }
    v.check(err < 1e-8, format!("k-regular beta MLE vs closed form: max error {err:.1e}"));

    let mut err: f64 = 0.0;
    for i in 1..1000 {
        let q = i as f64 / 1000.0;
        err = err.max((explaw_survival(explaw_quantile(q).unwrap()).unwrap() - (1.0 - q)).abs());
    }
    v.check(err <= 1e-12, format!("explaw quantile inverts the survival function: max error {err:.1e}"));

    let elapsed = start.elapsed().as_secs_f64();
    v.check(elapsed < 10.0, format!("suite took {elapsed:.2} s < 10 s"));
    v
}

fn triangle_count(g: &Graph) -> usize {
    let n = g.n();
    let mut t = 0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                t += (g.has_edge(i, j) && g.has_edge(j, k) && g.has_edge(i, k)) as usize;
            }
        }
    }
    t
}

// ----------------------------------------------------------- criterion 10

fn s(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

/// Runs `args` with `{out}` replaced by a fresh path, twice; returns the
/// files and stdout of each run.
fn run_twice(dir: &Path, tag: &str, args: &[String]) -> Result<[Vec<u8>; 2], String> {
    let mut runs = Vec::new();
    for k in 0..2 {
        let mut outputs = Vec::new();
        let args: Vec<String> = args
            .iter()
            .map(|a| {
                if let Some(name) = a.strip_prefix("{out}") {
                    let p = dir.join(format!("{tag}-{k}{name}"));
                    outputs.push(p.clone());
                    s(&p)
                } else {
                    a.clone()
                }
            })
            .collect();
        let out = Command::new(env!("CARGO_BIN_EXE_netgof"))
            .args(&args)
            .output()
            .map_err(|e| e.to_string())?;
        if !matches!(out.status.code(), Some(0 | 2)) {
            return Err(format!("{tag} failed: {}", String::from_utf8_lossy(&out.stderr)));
        }
        let mut bytes = out.stdout;
        for p in &outputs {
            bytes.extend(std::fs::read(p).map_err(|e| format!("{}: {e}", p.display()))?);
        }
        runs.push(bytes);
    }
    Ok([runs.remove(0), runs.remove(0)])
}

fn determinism() -> Verdict {
    let mut v = Verdict::new();
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let er: PathBuf = d.join("er.edges");
    write_edge_list(&sample_graph(&ProbMatrix::constant(60, 0.2, false).unwrap(), 1), &er).unwrap();
    let labels = NodeLabeling::contiguous_blocks(60, 2).unwrap();
    let sbm_p = SbmParams::new(labels, vec![vec![0.5, 0.05], vec![0.05, 0.5]], false)
        .unwrap()
        .prob_matrix()
        .unwrap();
    let sbm = d.join("sbm.edges");
    write_edge_list(&sample_graph(&sbm_p, 2), &sbm).unwrap();
    let ard = d.join("ard.csv");
    let g = sample_graph(&ProbMatrix::constant(90, 0.3, false).unwrap(), 3);
    let groups = NodeLabeling::contiguous_blocks(90, 9).unwrap();
    let respondents: Vec<usize> = (0..30).map(|i| 3 * i).collect();
    write_ard_csv(&extract_ard(&g, &groups, &respondents).unwrap(), &ard).unwrap();
    let truth = d.join("truth.txt");
    std::fs::write(&truth, "a\n".repeat(30) + &"b\n".repeat(30)).unwrap();

    let mut cases: Vec<(String, Vec<String>)> = Vec::new();
    let words = |x: &str| x.split_whitespace().map(String::from).collect::<Vec<_>>();
    for (model, extra) in [
        ("er", ""),
        ("er", "--method tw"),
        ("beta-expit", ""),
        ("latent", "--dim 2"),
        ("ergm", "--terms edges,triangles"),
        ("directed", ""),
        ("directed", "--method tw"),
        ("directed", "--method explaw"),
    ] {
        let mut a = words(&format!("test {model} {extra} --B 60 --seed 4 --out {{out}}.json --graph"));
        a.push(s(&er));
        cases.push((format!("test {model} {extra}"), a));
    }
    let mut a = words("test ard-er --out {out}.json --ard");
    a.push(s(&ard));
    cases.push(("test ard-er".into(), a));
    for (e, extra) in [
        ("fig5-expit", "--n 30 --replicates 6 --B 50"),
        ("fig5-exp", "--n 30 --replicates 6 --B 50"),
        ("fig5-nonpar", "--n 30 --replicates 6 --B 50"),
        ("fig4-dims", "--n 40 --replicates 2 --param-sets 2 --B 50"),
        ("fig7-ergm-power", "--n 15 --grid 0,0.05 --replicates 4 --B 50"),
        ("fig6-ard", "--n 30,60 --replicates 20"),
        ("fig8-directed", "--n 25 --replicates 6 --B 50"),
        ("tw-convergence", "--n 60 --replicates 50"),
    ] {
        let a = words(&format!("replicate {e} {extra} --seed 12 --out {{out}}.csv --json {{out}}.json"));
        cases.push((format!("replicate {e}"), a));
    }
    let mut a = words("select-dim --B 50 --max-d 3 --seed 5 --out {out}.json --graph");
    a.push(s(&sbm));
    cases.push(("select-dim".into(), a));
    let mut a = words("communities --k 2 --B 50 --restarts 10 --seed 5 --out {out}.csv --labels-out {out}.labels --truth");
    a.extend([s(&truth), "--graph".into(), s(&sbm)]);
    cases.push(("communities".into(), a));
    cases.push(("tw-table".into(), words("tw-table --size 300 --replicates 2000 --seed 3 --out {out}.csv")));

    for (k, (name, args)) in cases.iter().enumerate() {
        match run_twice(d, &format!("case{k}"), args) {
            Ok([a, b]) => v.check(a == b && !a.is_empty(), format!("{name}: identical output ({} bytes)", a.len())),
            Err(e) => v.check(false, format!("{name}: {e}")),
        }
    }
    v
}

// ------------------------------------------------------------------ main

type Criterion = (u32, &'static str, fn() -> Verdict);

const CRITERIA: [Criterion; 10] = [
    (1, "TW1 reference table", tw1_reference),
    (2, "undirected size under the beta model", beta_size),
    (3, "undirected power against a non-parametric alternative", nonparametric_power),
    (4, "exp-link misspecification", exp_link_misspecification),
    (5, "latent dimension selection", dimension_selection),
    (6, "ERGM power curve", ergm_power),
    (7, "ARD test", ard_test),
    (8, "directed tests", directed_tests),
    (9, "oracle equivalences", oracle_suite),
    (10, "deterministic outputs", determinism),
];

fn main() {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (id, name, run) in CRITERIA {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            let mut v = Verdict::new();
            v.check(false, format!("panicked: {msg}"));
            v
        });
        let secs = start.elapsed().as_secs_f64();
        let tag = if verdict.pass { "PASS" } else { "FAIL" };
        failed += !verdict.pass as usize;
        println!("{tag} criterion {id}: {name} ({secs:.1} s)");
        for line in &verdict.lines {
            println!("    {line}");
        }
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 && std::env::var_os("NETGOF_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
