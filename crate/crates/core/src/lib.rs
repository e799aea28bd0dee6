//! Spectral goodness-of-fit tests for network models.
//!
//! A fitted model yields an edge-probability matrix; the observed adjacency is
//! centred and scaled entrywise against it, and the extreme eigenvalues (or
//! singular values) of the resulting residual matrix are compared with
//! Tracy–Widom or exponential-law references, optionally after a parametric
//! bootstrap recalibration.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ergm;
pub mod error;
pub mod gof;
pub mod graph;
pub mod models;
pub mod rmt;
pub mod rng;
pub mod selection;
pub mod spectral;
pub mod studies;

pub use error::{Error, Result};
pub use graph::{sample_graph, ArdMatrix, Graph, NodeLabeling, ProbMatrix};
