//! Python bindings. Reports and scans come back as plain dicts built from
//! their JSON form.

use netgof::ergm::{default_burn_thin, fit_ergm_mple, sample_ergm, ErgmSpec, ErgmTerm};
use netgof::gof::{
    test_ard_er as ard_er, test_directed_bootstrap, test_directed_explaw, test_directed_tw,
    test_undirected_asymptotic as und_asymptotic, test_undirected_bootstrap as und_bootstrap, BernoulliSampler,
    DEFAULT_BOOTSTRAP,
};
use netgof::graph::load_edge_list;
use netgof::models::{fit_beta_mle as beta_mle, fit_er as er_fit, fit_latent_space as latent_fit, PgdOptions};
use netgof::rmt::{explaw_quantile as explaw_q, tw1_moments as tw1_mom, tw1_quantile as tw1_q, Tw1Table};
use netgof::selection::{kmeans_communities as kmeans, misclassification as misclass, select_dimension as select_dim};
use netgof::selection::SelectionOptions;
use netgof::studies::{run_experiment, Experiment, ExperimentConfig};
use netgof::{ArdMatrix, Graph, NodeLabeling, ProbMatrix};
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde_json::Value;

pyo3::create_exception!(netgof, NetgofError, PyException);

trait OrRaise<T> {
    fn or_raise(self) -> PyResult<T>;
}

impl<T> OrRaise<T> for netgof::Result<T> {
    fn or_raise(self) -> PyResult<T> {
        self.map_err(|e| NetgofError::new_err(e.to_string()))
    }
}

fn to_py<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| NetgofError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(frozen, name = "Graph", module = "netgof")]
pub struct PyGraph {
    inner: Graph,
}

#[pymethods]
impl PyGraph {
    #[new]
    #[pyo3(signature = (n, edges, directed = false))]
    fn new(n: usize, edges: Vec<(usize, usize)>, directed: bool) -> PyResult<Self> {
        Ok(PyGraph {
            inner: Graph::from_edges(n, directed, &edges).or_raise()?,
        })
    }

    /// Reads a whitespace or comma separated edge list.
    #[staticmethod]
    #[pyo3(signature = (path, n = None, directed = false))]
    fn from_edge_list(path: &str, n: Option<usize>, directed: bool) -> PyResult<Self> {
        Ok(PyGraph {
            inner: load_edge_list(path, n, directed).or_raise()?.graph,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn directed(&self) -> bool {
        self.inner.is_directed()
    }

    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().collect()
    }

    fn degrees(&self) -> Vec<usize> {
        self.inner.degrees()
    }

    fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.inner.n() && j < self.inner.n() && self.inner.has_edge(i, j)
    }

    fn __repr__(&self) -> String {
        let kind = if self.inner.is_directed() { "directed" } else { "undirected" };
        format!("Graph(n={}, edges={}, {kind})", self.inner.n(), self.inner.edge_count())
    }
}

#[pyclass(frozen, name = "ProbMatrix", module = "netgof")]
pub struct PyProbMatrix {
    inner: ProbMatrix,
}

#[pymethods]
impl PyProbMatrix {
    /// From a square list of rows; the diagonal is ignored.
    #[new]
    #[pyo3(signature = (rows, directed = false))]
    fn new(rows: Vec<Vec<f64>>, directed: bool) -> PyResult<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(NetgofError::new_err("probability rows must form a square matrix"));
        }
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Ok(PyProbMatrix {
            inner: ProbMatrix::new(m, directed).or_raise()?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (n, p, directed = false))]
    fn constant(n: usize, p: f64, directed: bool) -> PyResult<Self> {
        Ok(PyProbMatrix {
            inner: ProbMatrix::constant(n, p, directed).or_raise()?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn get(&self, i: usize, j: usize) -> PyResult<f64> {
        if i >= self.inner.n() || j >= self.inner.n() {
            return Err(NetgofError::new_err(format!("index ({i}, {j}) out of range")));
        }
        Ok(self.inner.get(i, j))
    }

    fn to_rows(&self) -> Vec<Vec<f64>> {
        let n = self.inner.n();
        (0..n).map(|i| (0..n).map(|j| self.inner.get(i, j)).collect()).collect()
    }

    fn __repr__(&self) -> String {
        format!("ProbMatrix(n={})", self.inner.n())
    }
}

fn wrap(p: ProbMatrix) -> PyProbMatrix {
    PyProbMatrix { inner: p }
}

#[pyfunction]
fn sample_graph(p: PyRef<'_, PyProbMatrix>, seed: u64) -> PyGraph {
    PyGraph {
        inner: netgof::sample_graph(&p.inner, seed),
    }
}

#[pyfunction]
fn fit_er(g: PyRef<'_, PyGraph>) -> PyResult<PyProbMatrix> {
    Ok(wrap(er_fit(&g.inner).and_then(|f| f.prob_matrix()).or_raise()?))
}

/// `(beta, P_hat)` for the expit-link beta model.
#[pyfunction]
fn fit_beta_mle(g: PyRef<'_, PyGraph>) -> PyResult<(Vec<f64>, PyProbMatrix)> {
    let fit = beta_mle(&g.inner).or_raise()?;
    let p = fit.prob_matrix().or_raise()?;
    Ok((fit.beta, wrap(p)))
}

/// `(params, P_hat)`; `params` holds alpha, z, iterations and converged.
#[pyfunction]
#[pyo3(signature = (g, d, max_iters = 2000))]
fn fit_latent_space<'py>(
    py: Python<'py>,
    g: PyRef<'_, PyGraph>,
    d: usize,
    max_iters: usize,
) -> PyResult<(Bound<'py, PyAny>, PyProbMatrix)> {
    let opts = PgdOptions {
        max_iters,
        ..PgdOptions::default()
    };
    let fit = latent_fit(&g.inner, d, None, &opts).or_raise()?;
    let p = fit.params.prob_matrix().or_raise()?;
    let params = serde_json::json!({
        "alpha": fit.params.alpha,
        "z": fit.params.z,
        "iterations": fit.iterations,
        "converged": fit.converged,
    });
    Ok((to_py(py, &params)?, wrap(p)))
}

#[pyfunction]
#[pyo3(signature = (g, p_hat, alpha = 0.05))]
fn test_undirected_asymptotic<'py>(
    py: Python<'py>,
    g: PyRef<'_, PyGraph>,
    p_hat: PyRef<'_, PyProbMatrix>,
    alpha: f64,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &und_asymptotic(&g.inner, &p_hat.inner, alpha).or_raise()?)
}

/// Parametric bootstrap with independent Bernoulli edges drawn from `p_hat`.
#[pyfunction]
#[pyo3(signature = (g, p_hat, b = DEFAULT_BOOTSTRAP, alpha = 0.05, seed = 0))]
fn test_undirected_bootstrap<'py>(
    py: Python<'py>,
    g: PyRef<'_, PyGraph>,
    p_hat: PyRef<'_, PyProbMatrix>,
    b: usize,
    alpha: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let p = &p_hat.inner;
    to_py(py, &und_bootstrap(&g.inner, &BernoulliSampler(p), p, b, alpha, seed).or_raise()?)
}

/// `method` is one of `bootstrap`, `tw` or `explaw`.
#[pyfunction]
#[pyo3(signature = (g, p_hat, method = "bootstrap", b = DEFAULT_BOOTSTRAP, alpha = 0.05, seed = 0))]
fn test_directed<'py>(
    py: Python<'py>,
    g: PyRef<'_, PyGraph>,
    p_hat: PyRef<'_, PyProbMatrix>,
    method: &str,
    b: usize,
    alpha: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let p = &p_hat.inner;
    let report = match method {
        "bootstrap" => test_directed_bootstrap(&g.inner, &BernoulliSampler(p), p, b, alpha, seed),
        "tw" => test_directed_tw(&g.inner, p, alpha),
        "explaw" => test_directed_explaw(&g.inner, p, alpha),
        other => return Err(NetgofError::new_err(format!("unknown directed method '{other}'"))),
    };
    to_py(py, &report.or_raise()?)
}

/// `counts[i][j]`: ties from respondent `i` to group `j`.
#[pyfunction]
#[pyo3(signature = (counts, group_sizes, alpha = 0.05))]
fn test_ard_er<'py>(
    py: Python<'py>,
    counts: Vec<Vec<u64>>,
    group_sizes: Vec<u64>,
    alpha: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let y = ArdMatrix::new(counts, group_sizes).or_raise()?;
    to_py(py, &ard_er(&y, alpha).or_raise()?)
}

#[pyfunction]
#[pyo3(signature = (g, b = DEFAULT_BOOTSTRAP, alpha = 0.05, max_d = None, seed = 0))]
fn select_dimension<'py>(
    py: Python<'py>,
    g: PyRef<'_, PyGraph>,
    b: usize,
    alpha: f64,
    max_d: Option<usize>,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = SelectionOptions {
        bootstrap: b,
        alpha,
        max_d,
        ..SelectionOptions::default()
    };
    to_py(py, &select_dim(&g.inner, &opts, seed).or_raise()?)
}

/// `(labels, wcss)` of the best of `restarts` k-means runs.
#[pyfunction]
#[pyo3(signature = (points, k, restarts = 200, seed = 0))]
fn kmeans_communities(points: Vec<Vec<f64>>, k: usize, restarts: usize, seed: u64) -> PyResult<(Vec<usize>, f64)> {
    let fit = kmeans(&points, k, restarts, seed).or_raise()?;
    Ok((fit.labels.labels().to_vec(), fit.wcss))
}

fn labeling(labels: Vec<usize>) -> PyResult<NodeLabeling> {
    let k = labels.iter().max().map_or(1, |m| m + 1);
    NodeLabeling::new(labels, k).or_raise()
}

#[pyfunction]
fn misclassification(est: Vec<usize>, truth: Vec<usize>) -> PyResult<f64> {
    Ok(misclass(&labeling(est)?, &labeling(truth)?).or_raise()?.rate)
}

fn ergm_spec(terms: Vec<String>, theta: Vec<f64>) -> PyResult<ErgmSpec> {
    let terms = terms
        .iter()
        .map(|t| t.parse::<ErgmTerm>())
        .collect::<netgof::Result<Vec<_>>>()
        .or_raise()?;
    ErgmSpec::new(terms, theta).or_raise()
}

/// Metropolis draw; `burn_in` defaults to twenty sweeps over all dyads.
#[pyfunction]
#[pyo3(signature = (terms, theta, n, seed, burn_in = None))]
fn sample_ergm_graph(terms: Vec<String>, theta: Vec<f64>, n: usize, seed: u64, burn_in: Option<usize>) -> PyResult<PyGraph> {
    let spec = ergm_spec(terms, theta)?;
    let burn = burn_in.unwrap_or_else(|| default_burn_thin(n).0);
    Ok(PyGraph {
        inner: sample_ergm(&spec, n, burn, seed).or_raise()?,
    })
}

#[pyfunction]
fn fit_ergm(g: PyRef<'_, PyGraph>, terms: Vec<String>) -> PyResult<Vec<f64>> {
    let zeros = vec![0.0; terms.len()];
    let spec = ergm_spec(terms, zeros)?;
    Ok(fit_ergm_mple(&g.inner, &spec.terms).or_raise()?.theta)
}

#[pyfunction]
fn tw1_quantile(q: f64) -> PyResult<f64> {
    tw1_q(q).or_raise()
}

#[pyfunction]
fn tw1_cdf(x: f64) -> f64 {
    Tw1Table::embedded().cdf(x)
}

#[pyfunction]
fn tw1_moments() -> (f64, f64) {
    tw1_mom()
}

#[pyfunction]
fn explaw_quantile(q: f64) -> PyResult<f64> {
    explaw_q(q).or_raise()
}

/// Runs a study and returns its CSV. `overrides` is a dict of settings
/// layered over the study defaults.
#[pyfunction]
#[pyo3(signature = (experiment, overrides = None))]
fn replicate(py: Python<'_>, experiment: &str, overrides: Option<Bound<'_, PyAny>>) -> PyResult<String> {
    let e: Experiment = experiment.parse().or_raise()?;
    let mut value = serde_json::to_value(ExperimentConfig::defaults(e)).expect("defaults serialize");
    if let Some(o) = overrides {
        let text: String = py.import("json")?.call_method1("dumps", (o,))?.extract()?;
        let extra: Value = serde_json::from_str(&text).map_err(|e| NetgofError::new_err(e.to_string()))?;
        let Value::Object(extra) = extra else {
            return Err(NetgofError::new_err("overrides must be a dict"));
        };
        value.as_object_mut().expect("struct").extend(extra);
    }
    let config: ExperimentConfig = serde_json::from_value(value).map_err(|e| NetgofError::new_err(e.to_string()))?;
    config.validate().or_raise()?;
    Ok(run_experiment(&config).or_raise()?.to_csv())
}

#[pymodule]
#[pyo3(name = "netgof")]
pub fn netgof_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NetgofError", m.py().get_type::<NetgofError>())?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyProbMatrix>()?;
    m.add_function(wrap_pyfunction!(sample_graph, m)?)?;
    m.add_function(wrap_pyfunction!(fit_er, m)?)?;
    m.add_function(wrap_pyfunction!(fit_beta_mle, m)?)?;
    m.add_function(wrap_pyfunction!(fit_latent_space, m)?)?;
    m.add_function(wrap_pyfunction!(test_undirected_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(test_undirected_bootstrap, m)?)?;
    m.add_function(wrap_pyfunction!(test_directed, m)?)?;
    m.add_function(wrap_pyfunction!(test_ard_er, m)?)?;
    m.add_function(wrap_pyfunction!(select_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans_communities, m)?)?;
    m.add_function(wrap_pyfunction!(misclassification, m)?)?;
    m.add_function(wrap_pyfunction!(sample_ergm_graph, m)?)?;
    m.add_function(wrap_pyfunction!(fit_ergm, m)?)?;
    m.add_function(wrap_pyfunction!(tw1_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(tw1_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(tw1_moments, m)?)?;
    m.add_function(wrap_pyfunction!(explaw_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(replicate, m)?)?;
    Ok(())
}
