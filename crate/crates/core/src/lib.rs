#![no_std]
//! Distance sketches, hopsets and spanners built inside simulated MPC and
//! Congested Clique executions, with brute-force oracles.

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod clique;
pub mod coin;
pub mod explore;
pub mod graph;
pub mod hopset;
pub mod mpc;
pub mod pipeline;
pub mod ratio;
pub mod spanner;
pub mod tz;
pub mod verify;

pub use graph::{Distance, DistanceVector, Edge, GraphError, VertexId, Weight, WeightedGraph};
pub use ratio::Ratio;
