//! Packing bounded-degree separable graphs into a complete host graph.

pub mod assignment;
pub mod balancing;
pub mod clock;
pub mod designs;
pub mod edge_table;
pub mod embed;
pub mod error;
pub mod generate;
pub mod graph;
pub mod isotype;
pub mod oracle;
pub mod pipeline;
pub mod planner;
pub mod rational;
pub mod separation;

pub use edge_table::EdgeTable;
pub use graph::{Graph, GraphSequence, PackingMap};
pub use rational::Rational;
