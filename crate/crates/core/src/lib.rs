//! Metric dimension of outerplanar graphs and trees.

pub mod dual;
pub mod embed;
pub mod error;
pub mod gen;
pub mod harness;
pub mod outerplanar;
pub mod reductions;
pub mod graph;
pub mod resolve;
pub mod solver;
pub mod tree;

pub use error::{MdimError, Result};
pub use graph::Graph;
