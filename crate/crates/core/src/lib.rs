//! Threshold landscapes, overlap statistics and exact posterior simulation for
//! a subgraph planted in an Erdős–Rényi graph.

pub mod canon;
pub mod classify;
pub mod embed;
pub mod error;
pub mod graph;
pub mod numeric;
pub mod overlap;
pub mod sim;
pub mod subgraphs;
pub mod thresholds;

pub use canon::{canonical_form, CanonicalForm};
pub use error::{Error, ParseError, Result};
pub use graph::{generate, parse_graph, Family, Graph};
