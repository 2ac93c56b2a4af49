//! Dependable spanners under independent random edge failure.
//!
//! Graphs live on ranked vertices `1..=n` ([`graph::RankGraph`]). Every edge
//! of a graph survives independently with probability `psi`; the quality of
//! a graph is its *deficiency*, the number of vertex pairs left without a
//! straight (monotone in rank) path. The crate builds one-dimensional
//! constructions whose expected deficiency stays close to that of the
//! filtered complete graph while using near-linearly many edges, lifts them
//! to point sets in `[0,1)^d` through locality-sensitive orderings, and
//! measures all of it exactly or by seeded Monte Carlo.

pub mod error;
pub mod euclid;
pub mod experiments;
pub mod graph;
pub mod io;
pub mod lso;
pub mod reach;
pub mod rng;
pub mod spanner1d;

mod bitrows;

pub use error::{Error, Result};
pub use graph::{complete_graph, graph_union, interval_graph, RankGraph, Vertex};
pub use rng::RandomStream;
