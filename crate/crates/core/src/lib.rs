//! Simulation and inference for balanced community modulated random
//! recursive trees (BCMRT).
//!
//! At every step two nodes arrive, one of type `A` and one of type `B`. Each
//! attaches to a uniformly chosen earlier node of the other type with
//! probability `q`, and of its own type otherwise. The crate samples such
//! trees, computes their statistics, estimates and tests `q` when the tree is
//! seen with time labels, with only the root edge, or as a bare shape, and
//! checks every Monte Carlo quantity against exact recursions and brute-force
//! enumeration.

pub mod canonical;
pub mod clustering;
pub mod error;
pub mod estimators;
pub mod generator;
pub mod hypothesis;
pub mod observe;
pub mod oracles;
pub mod rng;
pub mod special;
pub mod statistics;
pub mod tree;

pub use error::{Error, Result};
pub use observe::{project, ObservedTree, Setting};
pub use tree::{NodeId, NodeType, Shape, TimeLabelledTree};
