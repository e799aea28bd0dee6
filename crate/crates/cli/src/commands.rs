use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use netgof::ergm::{estimate_p_ergm, fit_ergm_mple, ErgmTerm};
use netgof::gof::{
    test_ard_er, test_directed_bootstrap, test_directed_explaw, test_directed_tw, test_undirected_asymptotic,
    test_undirected_bootstrap, BernoulliSampler, ErgmSampler, TestReport,
};
use netgof::graph::{load_edge_list, read_ard_csv, Graph, NodeLabeling};
use netgof::models::{fit_beta_mle, fit_er, fit_latent_space, PgdOptions};
use netgof::rmt::generate_tw1_table;
use netgof::rng::{derive_seed, tags};
use netgof::selection::{community_scan, select_dimension, SelectionOptions};
use netgof::studies::{config_hash, run_experiment};
use serde::Serialize;

use crate::config::{experiment_config, table_spec};
use crate::{
    CliError, CliResult, CommunitiesArgs, Model, ReplicateArgs, RunArgs, SelectDimArgs, TestArgs, TestMethod,
    TwTableArgs, Verdict,
};

fn load_graph(path: &Path, nodes: Option<usize>, directed: bool) -> CliResult<Graph> {
    let load = load_edge_list(path, nodes, directed)?;
    if load.self_loops_dropped > 0 {
        eprintln!("netgof: dropped {} self-loops from {}", load.self_loops_dropped, path.display());
    }
    Ok(load.graph)
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// To `out` when given, otherwise stdout.
fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn csv_header<T: Serialize>(command: &str, config: &T, seed: u64) -> String {
    let mut s = String::new();
    writeln!(s, "# command={command}").unwrap();
    writeln!(s, "# config_hash={}", config_hash(config)).unwrap();
    writeln!(s, "# seed={seed}").unwrap();
    writeln!(s, "# config={}", serde_json::to_string(config).expect("config serializes")).unwrap();
    s
}

fn verdict(reject: bool) -> Verdict {
    if reject {
        Verdict::Rejected
    } else {
        Verdict::Done
    }
}

pub fn test(a: TestArgs) -> CliResult<Verdict> {
    let RunArgs { seed, alpha, b, out } = a.run.clone();
    let report = match a.model {
        Model::ArdEr => {
            if a.method.is_some_and(|m| m != TestMethod::Tw) {
                return Err(CliError::Usage("ard-er only has the Tracy-Widom reference".into()));
            }
            let path = a.ard.as_deref().ok_or_else(|| CliError::Usage("ard-er needs --ard".into()))?;
            test_ard_er(&read_ard_csv(path)?, alpha)?
        }
        model => {
            let path = a
                .graph
                .as_deref()
                .ok_or_else(|| CliError::Usage(format!("{model:?} needs --graph")))?;
            let method = a.method.unwrap_or(TestMethod::Bootstrap);
            if model == Model::Directed {
                let g = load_graph(path, a.nodes, true)?;
                let p_hat = fit_er(&g)?.prob_matrix()?;
                match method {
                    TestMethod::Bootstrap => test_directed_bootstrap(&g, &BernoulliSampler(&p_hat), &p_hat, b, alpha, seed)?,
                    TestMethod::Tw => test_directed_tw(&g, &p_hat, alpha)?,
                    TestMethod::Explaw => test_directed_explaw(&g, &p_hat, alpha)?,
                }
            } else {
                if method == TestMethod::Explaw {
                    return Err(CliError::Usage("explaw applies to directed graphs only".into()));
                }
                let g = load_graph(path, a.nodes, false)?;
                undirected(&a, &g, method)?
            }
        }
    };
    let json = report.to_json();
    println!("{json}");
    if let Some(p) = out.as_deref() {
        write_file(p, &format!("{json}\n"))?;
    }
    Ok(verdict(report.reject))
}

fn undirected(a: &TestArgs, g: &Graph, method: TestMethod) -> CliResult<TestReport> {
    let RunArgs { seed, alpha, b, .. } = a.run;
    let mut ergm = None;
    let p_hat = match a.model {
        Model::Er => fit_er(g)?.prob_matrix()?,
        Model::BetaExpit => fit_beta_mle(g)?.prob_matrix()?,
        Model::Latent => {
            let fit = fit_latent_space(g, a.dim, None, &PgdOptions::default())?;
            if !fit.converged {
                eprintln!("netgof: latent fit stopped after {} iterations without converging", fit.iterations);
            }
            fit.params.prob_matrix()?
        }
        Model::Ergm => {
            let terms = a
                .terms
                .iter()
                .map(|t| t.parse::<ErgmTerm>())
                .collect::<netgof::Result<Vec<_>>>()?;
            let spec = fit_ergm_mple(g, &terms)?;
            let p = estimate_p_ergm(&spec, g.n(), b, derive_seed(seed, tags::ERGM_P, 0))?;
            ergm = Some(spec);
            p
        }
        Model::Directed | Model::ArdEr => unreachable!("handled by the caller"),
    };
    let report = match (method, ergm) {
        (TestMethod::Tw, _) => test_undirected_asymptotic(g, &p_hat, alpha)?,
        (_, Some(spec)) => test_undirected_bootstrap(g, &ErgmSampler::new(spec, g.n()), &p_hat, b, alpha, seed)?,
        (_, None) => test_undirected_bootstrap(g, &BernoulliSampler(&p_hat), &p_hat, b, alpha, seed)?,
    };
    Ok(report)
}

pub fn replicate(a: ReplicateArgs) -> CliResult<Verdict> {
    let config = experiment_config(a.experiment, a.config.as_deref(), |c| {
        if let Some(n) = a.n {
            c.n_values = n;
        }
        if let Some(r) = a.replicates {
            c.replicates = r;
        }
        if let Some(b) = a.b {
            c.bootstrap = b;
        }
        if let Some(alpha) = a.alpha {
            c.alpha = alpha;
        }
        if let Some(seed) = a.seed {
            c.seed = seed;
        }
        if let Some(grid) = a.grid {
            c.grid = grid;
        }
        if let Some(p) = a.param_sets {
            c.param_sets = p;
        }
    })?;
    let report = run_experiment(&config)?;
    emit(a.out.as_deref(), &report.to_csv())?;
    if let Some(p) = a.json.as_deref() {
        write_file(p, &format!("{}\n", report.to_json()))?;
    }
    if let Some(p) = a.out.as_deref() {
        eprintln!("netgof: wrote {} (config {})", p.display(), &report.config_hash[..12]);
    }
    Ok(Verdict::Done)
}

fn selection_options(run: &RunArgs, max_d: Option<usize>) -> SelectionOptions {
    SelectionOptions {
        pgd: PgdOptions::default(),
        bootstrap: run.b,
        alpha: run.alpha,
        max_d,
    }
}

pub fn select_dim(a: SelectDimArgs) -> CliResult<Verdict> {
    let g = load_graph(&a.graph.graph, a.graph.nodes, false)?;
    let scan = select_dimension(&g, &selection_options(&a.run, a.max_d), a.run.seed)?;
    let json = serde_json::to_string_pretty(&scan).expect("scan serializes");
    println!("{json}");
    if let Some(p) = a.run.out.as_deref() {
        write_file(p, &format!("{json}\n"))?;
    }
    Ok(verdict(scan.exhausted))
}

/// One label per line in node order; any tokens, numbered by first use.
fn read_labels(path: &Path) -> CliResult<NodeLabeling> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut labels = Vec::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let next = ids.len();
        labels.push(*ids.entry(line).or_insert(next));
    }
    Ok(NodeLabeling::new(labels, ids.len().max(1))?)
}

#[derive(Serialize)]
struct CommunitiesRun {
    graph: String,
    nodes: usize,
    edges: usize,
    k: usize,
    dims: Vec<usize>,
    restarts: usize,
    truth: Option<String>,
    bootstrap: usize,
    alpha: f64,
    seed: u64,
}

pub fn communities(a: CommunitiesArgs) -> CliResult<Verdict> {
    let g = load_graph(&a.graph.graph, a.graph.nodes, false)?;
    let truth = a.truth.as_deref().map(read_labels).transpose()?;
    let dims = a.dims.clone().unwrap_or_else(|| vec![a.k, a.k + 1]);
    let opts = selection_options(&a.run, None);
    let rows = community_scan(&g, a.k, &dims, &opts, a.restarts, truth.as_ref(), a.run.seed)?;
    println!("{}", serde_json::to_string_pretty(&rows).expect("rows serialize"));

    let run = CommunitiesRun {
        graph: a.graph.graph.display().to_string(),
        nodes: g.n(),
        edges: g.edge_count(),
        k: a.k,
        dims,
        restarts: a.restarts,
        truth: a.truth.as_ref().map(|p| p.display().to_string()),
        bootstrap: a.run.b,
        alpha: a.run.alpha,
        seed: a.run.seed,
    };
    let header = csv_header("communities", &run, a.run.seed);
    if let Some(p) = a.run.out.as_deref() {
        let mut csv = header.clone();
        csv.push_str("d,t,reject,wcss,misclassification,error\n");
        for r in &rows {
            let report = r.trial.report.as_ref();
            let opt = |v: Option<f64>| v.map(|x| format!("{x:.10}")).unwrap_or_default();
            writeln!(
                csv,
                "{},{},{},{},{},{}",
                r.d,
                opt(report.and_then(|rep| rep.statistic("t"))),
                report.map(|rep| rep.reject.to_string()).unwrap_or_default(),
                opt(r.wcss),
                opt(r.misclassification),
                r.trial.error.as_deref().unwrap_or("").replace(',', ";"),
            )
            .unwrap();
        }
        write_file(p, &csv)?;
    }
    if let Some(p) = a.labels_out.as_deref() {
        let mut csv = header;
        csv.push_str("node,d,cluster\n");
        for r in &rows {
            for (node, c) in r.labels.iter().flatten().enumerate() {
                writeln!(csv, "{node},{},{c}", r.d).unwrap();
            }
        }
        write_file(p, &csv)?;
    }
    Ok(Verdict::Done)
}

pub fn tw_table(a: TwTableArgs) -> CliResult<Verdict> {
    let spec = table_spec(a.config.as_deref(), |s| {
        if let Some(n) = a.size {
            s.matrix_size = n;
        }
        if let Some(r) = a.replicates {
            s.replicates = r;
        }
        if let Some(seed) = a.seed {
            s.seed = seed;
        }
    })?;
    let table = generate_tw1_table(&spec)?;
    // The table body already records its seed.
    let mut csv = String::new();
    writeln!(csv, "# config_hash={}", config_hash(&spec)).unwrap();
    writeln!(csv, "# config={}", serde_json::to_string(&spec).expect("spec serializes")).unwrap();
    csv.push_str(&table.to_csv());
    emit(a.out.as_deref(), &csv)?;
    Ok(Verdict::Done)
}
