//! Edge-list text format.
//!
//! One edge per line as two node indices separated by whitespace and/or a
//! comma. Lines that are blank or start with `#` or `%` are comments. Indices
//! are 0- or 1-based, decided by the smallest index in the file, unless a
//! comment carries `base=0` / `base=1`. A comment token `n=<count>` supplies
//! the node count when the caller does not.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::Graph;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeListLoad {
    pub graph: Graph,
    pub self_loops_dropped: usize,
}

pub fn load_edge_list(path: impl AsRef<Path>, n: Option<usize>, directed: bool) -> Result<EdgeListLoad> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, n, directed)
}

pub fn parse_edge_list(text: &str, n: Option<usize>, directed: bool) -> Result<EdgeListLoad> {
    let mut pairs = Vec::new();
    let mut declared_base = None;
    let mut declared_n = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#').or_else(|| line.strip_prefix('%')) {
            for tok in comment.split_whitespace() {
                if let Some(v) = tok.strip_prefix("base=") {
                    declared_base = v.parse::<usize>().ok().filter(|b| *b <= 1);
                } else if let Some(v) = tok.strip_prefix("n=") {
                    declared_n = v.parse::<usize>().ok();
                }
            }
            continue;
        }
        let toks: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .collect();
        if toks.len() != 2 {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected two node indices, found {}", toks.len()),
            });
        }
        let parse = |t: &str| {
            t.parse::<usize>().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("not a node index: {t:?}"),
            })
        };
        pairs.push((parse(toks[0])?, parse(toks[1])?));
    }

    let min_index = pairs.iter().map(|&(u, v)| u.min(v)).min();
    let base = declared_base.unwrap_or(match min_index {
        Some(m) if m >= 1 => 1,
        _ => 0,
    });
    let max_index = pairs.iter().map(|&(u, v)| u.max(v)).max();
    let n = match n.or(declared_n) {
        Some(n) => n,
        None => max_index.map_or(0, |m| m + 1 - base),
    };

    let mut graph = Graph::empty(n, directed);
    let mut self_loops_dropped = 0;
    for (u, v) in pairs {
        if u < base || v < base {
            return Err(Error::IndexOutOfRange { index: u.min(v), n });
        }
        let (u, v) = (u - base, v - base);
        graph.check_index(u)?;
        graph.check_index(v)?;
        if u == v {
            self_loops_dropped += 1;
            continue;
        }
        graph.set_edge(u, v, true);
    }
    Ok(EdgeListLoad {
        graph,
        self_loops_dropped,
    })
}

/// Writes a 0-based edge list with a header that pins the node count and
/// index base, so reloading reproduces the graph exactly.
pub fn write_edge_list(graph: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    writeln!(
        out,
        "# n={} base=0 directed={}",
        graph.n(),
        graph.is_directed()
    )
    .expect("write to vec");
    for (u, v) in graph.edges() {
        writeln!(out, "{u} {v}").expect("write to vec");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
