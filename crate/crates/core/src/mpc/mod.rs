//! Simulated Massively Parallel Computation: the kernel, tree and sort
//! primitives, Bellman-Ford engines and end-to-end pipelines.

pub mod bf;
pub mod hopset;
pub mod pipeline;
pub mod scan;
pub mod sim;
pub mod sort;
pub mod spanner;
pub mod tree;
pub mod tuples;

pub use sim::{Message, Metrics, Outbox, Sim, SimConfig, SimError, Store, HEADER_WORDS};
