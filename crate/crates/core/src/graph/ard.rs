//! Aggregated relational data: respondent-by-group tie counts.
//!
//! CSV layout: a header row of group names, a second row of group sizes,
//! then one row of counts per respondent. Lines starting with `#` are skipped.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Graph, NodeLabeling};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArdMatrix {
    m: usize,
    k: usize,
    /// Row-major `m x k`.
    counts: Vec<u64>,
    group_sizes: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group_names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    respondent_groups: Option<Vec<usize>>,
}

impl ArdMatrix {
    /// `counts[i][j]` is the number of ties respondent `i` reports into group `j`.
    pub fn new(counts: Vec<Vec<u64>>, group_sizes: Vec<u64>) -> Result<Self> {
        let k = group_sizes.len();
        if k == 0 {
            return Err(Error::Invalid("ARD needs at least one group".into()));
        }
        if let Some(j) = group_sizes.iter().position(|&s| s == 0) {
            return Err(Error::Invalid(format!("group {j} has size zero")));
        }
        let m = counts.len();
        let mut flat = Vec::with_capacity(m * k);
        for (i, row) in counts.iter().enumerate() {
            if row.len() != k {
                return Err(Error::Invalid(format!(
                    "respondent {i} has {} counts, expected {k}",
                    row.len()
                )));
            }
            for (j, &y) in row.iter().enumerate() {
                if y > group_sizes[j] {
                    return Err(Error::Invalid(format!(
                        "count {y} for respondent {i} exceeds size {} of group {j}",
                        group_sizes[j]
                    )));
                }
            }
            flat.extend_from_slice(row);
        }
        Ok(ArdMatrix {
            m,
            k,
            counts: flat,
            group_sizes,
            group_names: None,
            respondent_groups: None,
        })
    }

    pub fn with_group_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.k {
            return Err(Error::Invalid(format!(
                "{} group names for {} groups",
                names.len(),
                self.k
            )));
        }
        self.group_names = Some(names);
        Ok(self)
    }

    pub fn with_respondent_groups(mut self, groups: Vec<usize>) -> Result<Self> {
        if groups.len() != self.m || groups.iter().any(|&g| g >= self.k) {
            return Err(Error::Invalid("respondent group labels do not match the matrix".into()));
        }
        self.respondent_groups = Some(groups);
        Ok(self)
    }

    /// Checks the declared network size against the group sizes.
    pub fn check_total(&self, n: usize) -> Result<()> {
        let total: u64 = self.group_sizes.iter().sum();
        if total > n as u64 {
            return Err(Error::Invalid(format!(
                "group sizes sum to {total}, more than the {n} declared nodes"
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.k + j]
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.counts[i * self.k..(i + 1) * self.k]
    }

    pub fn group_sizes(&self) -> &[u64] {
        &self.group_sizes
    }

    pub fn group_names(&self) -> Option<&[String]> {
        self.group_names.as_deref()
    }

    pub fn respondent_groups(&self) -> Option<&[usize]> {
        self.respondent_groups.as_deref()
    }
}

/// Counts, for each respondent, the edges into every group of `groups`.
///
/// A respondent's own node is never counted (there are no self-edges). For
/// directed graphs the respondent's out-edges are used.
pub fn extract_ard(g: &Graph, groups: &NodeLabeling, respondents: &[usize]) -> Result<ArdMatrix> {
    let n = g.n();
    if groups.len() != n {
        return Err(Error::Invalid(format!(
            "labels cover {} nodes, graph has {n}; groups must partition all nodes",
            groups.len()
        )));
    }
    let sizes = groups.sizes();
    if let Some(j) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::Invalid(format!("group {j} is empty; labels do not form a partition")));
    }
    let k = groups.k();
    let mut counts = Vec::with_capacity(respondents.len());
    for &r in respondents {
        if r >= n {
            return Err(Error::IndexOutOfRange { index: r, n });
        }
        let mut row = vec![0u64; k];
        for (j, &e) in g.row(r).iter().enumerate() {
            if e != 0 {
                row[groups.label(j)] += 1;
            }
        }
        counts.push(row);
    }
    let ard = ArdMatrix::new(counts, sizes.iter().map(|&s| s as u64).collect())?;
    let resp_groups = respondents.iter().map(|&r| groups.label(r)).collect();
    ard.with_respondent_groups(resp_groups)
}

pub fn read_ard_csv(path: impl AsRef<Path>) -> Result<ArdMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ard_csv(&text)
}

pub(crate) fn parse_ard_csv(text: &str) -> Result<ArdMatrix> {
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let split = |l: &str| l.split(',').map(|t| t.trim().to_string()).collect::<Vec<_>>();

    let (_, header) = rows
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "missing group-name header".into() })?;
    let names = split(header);
    let (size_line, sizes) = rows
        .next()
        .ok_or_else(|| Error::Parse { line: 2, msg: "missing group-size row".into() })?;
    let parse_row = |line: usize, l: &str| -> Result<Vec<u64>> {
        split(l)
            .iter()
            .map(|t| {
                t.parse::<u64>().map_err(|_| Error::Parse {
                    line,
                    msg: format!("not a nonnegative integer: {t:?}"),
                })
            })
            .collect()
    };
    let sizes = parse_row(size_line, sizes)?;
    if sizes.len() != names.len() {
        return Err(Error::Parse {
            line: size_line,
            msg: format!("{} sizes for {} groups", sizes.len(), names.len()),
        });
    }
    let counts = rows
        .map(|(line, l)| parse_row(line, l))
        .collect::<Result<Vec<_>>>()?;
    ArdMatrix::new(counts, sizes)?.with_group_names(names)
}

pub fn write_ard_csv(ard: &ArdMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let names: Vec<String> = match ard.group_names() {
        Some(n) => n.to_vec(),
        None => (0..ard.k()).map(|j| format!("group{}", j + 1)).collect(),
    };
    let join = |it: &mut dyn Iterator<Item = String>| it.collect::<Vec<_>>().join(",");
    let mut out = String::new();
    out.push_str(&names.join(","));
    out.push('\n');
    out.push_str(&join(&mut ard.group_sizes().iter().map(|s| s.to_string())));
    out.push('\n');
    for i in 0..ard.m() {
        out.push_str(&join(&mut ard.row(i).iter().map(|s| s.to_string())));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
