//! Core data types: binary graphs, edge-probability matrices, node labelings
//! and aggregated relational data, plus Bernoulli sampling of graphs.

mod ard;
mod io;

pub use ard::{extract_ard, read_ard_csv, write_ard_csv, ArdMatrix};
pub use io::{load_edge_list, parse_edge_list, write_edge_list, EdgeListLoad};

use nalgebra::DMatrix;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};

/// Square binary adjacency structure with zero diagonal.
///
/// Stored densely (row-major bytes). When `directed` is false the adjacency
/// is kept symmetric by every mutating method.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "GraphRepr", try_from = "GraphRepr")]
pub struct Graph {
    n: usize,
    directed: bool,
    adj: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    directed: bool,
    edges: Vec<(usize, usize)>,
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr {
            n: g.n,
            directed: g.directed,
            edges: g.edges().collect(),
        }
    }
}

impl TryFrom<GraphRepr> for Graph {
    type Error = Error;

    fn try_from(r: GraphRepr) -> Result<Self> {
        let mut g = Graph::empty(r.n, r.directed);
        for (u, v) in r.edges {
            g.check_index(u)?;
            g.check_index(v)?;
            if u == v {
                return Err(Error::Invalid(format!("self-loop at node {u}")));
            }
            g.set_edge(u, v, true);
        }
        Ok(g)
    }
}

impl Graph {
    pub fn empty(n: usize, directed: bool) -> Self {
        Graph {
            n,
            directed,
            adj: vec![0; n * n],
        }
    }

    pub fn complete(n: usize, directed: bool) -> Self {
        let mut g = Graph::empty(n, directed);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    g.adj[i * n + j] = 1;
                }
            }
        }
        g
    }

    /// Builds a graph from an edge list, rejecting self-loops and out-of-range
    /// indices. Undirected edges are symmetrized.
    pub fn from_edges(n: usize, directed: bool, edges: &[(usize, usize)]) -> Result<Self> {
        GraphRepr {
            n,
            directed,
            edges: edges.to_vec(),
        }
        .try_into()
    }

    /// Validates a dense 0/1 matrix against the graph invariants.
    pub fn from_adjacency(adj: &DMatrix<f64>, directed: bool) -> Result<Self> {
        let n = adj.nrows();
        if adj.ncols() != n {
            return Err(Error::Invalid(format!(
                "adjacency must be square, got {}x{}",
                n,
                adj.ncols()
            )));
        }
        let mut g = Graph::empty(n, directed);
        for i in 0..n {
            for j in 0..n {
                let x = adj[(i, j)];
                if x != 0.0 && x != 1.0 {
                    return Err(Error::Invalid(format!("entry ({i}, {j}) = {x} is not binary")));
                }
                if i == j && x != 0.0 {
                    return Err(Error::Invalid(format!("nonzero diagonal at {i}")));
                }
                if !directed && x != adj[(j, i)] {
                    return Err(Error::Invalid(format!(
                        "undirected adjacency not symmetric at ({i}, {j})"
                    )));
                }
                g.adj[i * n + j] = x as u8;
            }
        }
        Ok(g)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_directed(&self) -> bool {
        self.directed
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j] != 0
    }

    /// Row `i` of the adjacency matrix as 0/1 bytes.
    #[inline]
    pub fn row(&self, i: usize) -> &[u8] {
        &self.adj[i * self.n..(i + 1) * self.n]
    }

    /// Sets edge `(i, j)` (and `(j, i)` when undirected). Panics on `i == j`.
    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        assert_ne!(i, j, "self-loops are not representable");
        let v = present as u8;
        self.adj[i * self.n + j] = v;
        if !self.directed {
            self.adj[j * self.n + i] = v;
        }
    }

    pub fn toggle(&mut self, i: usize, j: usize) {
        let present = self.has_edge(i, j);
        self.set_edge(i, j, !present);
    }

    /// Out-degree of `i` (the degree for undirected graphs).
    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|&x| x as usize).sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    /// Number of edges; unordered pairs for undirected graphs, arcs otherwise.
    pub fn edge_count(&self) -> usize {
        let total: usize = self.adj.iter().map(|&x| x as usize).sum();
        if self.directed {
            total
        } else {
            total / 2
        }
    }

    /// Number of dyads that can carry an edge.
    pub fn dyad_count(&self) -> usize {
        let ordered = self.n * self.n.saturating_sub(1);
        if self.directed {
            ordered
        } else {
            ordered / 2
        }
    }

    /// Edges as index pairs; `u < v` for undirected graphs.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        let directed = self.directed;
        (0..n).flat_map(move |i| {
            let start = if directed { 0 } else { i + 1 };
            (start..n).filter_map(move |j| self.has_edge(i, j).then_some((i, j)))
        })
    }

    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.adj[i * self.n + j] as f64)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            Err(Error::IndexOutOfRange { index: i, n: self.n })
        } else {
            Ok(())
        }
    }
}

/// Pairwise edge-probability matrix with a zero diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "ProbRepr", try_from = "ProbRepr")]
pub struct ProbMatrix {
    directed: bool,
    p: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct ProbRepr {
    n: usize,
    directed: bool,
    p: Vec<Vec<f64>>,
}

impl From<ProbMatrix> for ProbRepr {
    fn from(m: ProbMatrix) -> Self {
        let n = m.n();
        ProbRepr {
            n,
            directed: m.directed,
            p: (0..n).map(|i| (0..n).map(|j| m.p[(i, j)]).collect()).collect(),
        }
    }
}

impl TryFrom<ProbRepr> for ProbMatrix {
    type Error = Error;

    fn try_from(r: ProbRepr) -> Result<Self> {
        if r.p.len() != r.n || r.p.iter().any(|row| row.len() != r.n) {
            return Err(Error::Invalid(format!("probability matrix is not {0}x{0}", r.n)));
        }
        let m = DMatrix::from_fn(r.n, r.n, |i, j| r.p[i][j]);
        ProbMatrix::new(m, r.directed)
    }
}

const SYMMETRY_TOL: f64 = 1e-12;

impl ProbMatrix {
    /// Validates entries in `[0, 1]` and symmetry (undirected). The diagonal is
    /// overwritten with zeros.
    pub fn new(mut p: DMatrix<f64>, directed: bool) -> Result<Self> {
        let n = p.nrows();
        if p.ncols() != n {
            return Err(Error::Invalid(format!(
                "probability matrix must be square, got {}x{}",
                n,
                p.ncols()
            )));
        }
        for i in 0..n {
            p[(i, i)] = 0.0;
            for j in 0..n {
                let x = p[(i, j)];
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::Invalid(format!("probability {x} at ({i}, {j})")));
                }
                if !directed && (x - p[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::Invalid(format!(
                        "undirected probability matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(ProbMatrix { directed, p })
    }

    /// Constant off-diagonal probability.
    pub fn constant(n: usize, p: f64, directed: bool) -> Result<Self> {
        ProbMatrix::new(DMatrix::from_element(n, n, p), directed)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    #[inline]
    pub fn is_directed(&self) -> bool {
        self.directed
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    /// Expected degree of every node under the matrix.
    pub fn expected_degrees(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.p.row(i).sum()).collect()
    }
}

/// Community assignment with labels in `0..k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LabelRepr")]
pub struct NodeLabeling {
    k: usize,
    labels: Vec<usize>,
}

#[derive(Deserialize)]
struct LabelRepr {
    k: usize,
    labels: Vec<usize>,
}

impl TryFrom<LabelRepr> for NodeLabeling {
    type Error = Error;

    fn try_from(r: LabelRepr) -> Result<Self> {
        NodeLabeling::new(r.labels, r.k)
    }
}

impl NodeLabeling {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Invalid("labeling needs at least one community".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::Invalid(format!("label {bad} out of range for k = {k}")));
        }
        Ok(NodeLabeling { k, labels })
    }

    /// Maps arbitrary integer ids onto `0..k` in ascending id order.
    pub fn from_raw(raw: &[i64]) -> Result<Self> {
        let mut ids: Vec<i64> = raw.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let labels = raw
            .iter()
            .map(|x| ids.binary_search(x).expect("id present"))
            .collect();
        NodeLabeling::new(labels, ids.len().max(1))
    }

    /// `n` nodes split into `k` contiguous blocks of (nearly) equal size.
    pub fn contiguous_blocks(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::Invalid(format!("cannot split {n} nodes into {k} blocks")));
        }
        NodeLabeling::new((0..n).map(|i| i * k / n).collect(), k)
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Draws each dyad independently with probability `p_ij`. Undirected matrices
/// draw the upper triangle and mirror it.
pub fn sample_graph(p: &ProbMatrix, seed: u64) -> Graph {
    sample_graph_with(p, &mut rng_from_seed(seed))
}

pub fn sample_graph_with(p: &ProbMatrix, rng: &mut Rng) -> Graph {
    let n = p.n();
    let mut g = Graph::empty(n, p.directed);
    for i in 0..n {
        let start = if p.directed { 0 } else { i + 1 };
        for j in start..n {
            if i != j && rng.random::<f64>() < p.get(i, j) {
                g.set_edge(i, j, true);
            }
        }
    }
    g
}
