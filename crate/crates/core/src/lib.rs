//! Shotgun assembly of Erdős–Rényi graphs.
//!
//! Sample `G(n, p)` graphs, shred them into anonymized 1- and 2-neighborhood
//! collections, reconstruct the labeled graph from those collections, and
//! measure where reconstruction succeeds as `p = n^(-alpha)` varies.

pub mod assemble_one;
pub mod assemble_two;
pub mod error;
pub mod graph;
pub mod harness;
pub mod iso;
pub mod shotgun;
pub mod witness;

pub use assemble_one::{AssemblyOutcome, AssemblyStatus};
pub use error::{Error, Result};
pub use graph::{sample_er, EdgeProb, ErParams, Graph};
pub use shotgun::{NeighborhoodCollection, NeighborhoodView};
