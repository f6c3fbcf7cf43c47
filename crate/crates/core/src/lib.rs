//! Subtree prune and regraft on weighted real trees.
//!
//! Excursion paths encode trees; [`rtree`] holds finite weighted trees and the
//! SPR operator; [`metric`] computes Prohorov and Gromov–Hausdorff type
//! distances; [`sampler`], [`dynamics`] and [`verify`] cover random trees,
//! the jump chains and the Monte Carlo checks; [`io`] reads and writes the
//! CSV and JSON formats.

pub mod dynamics;
pub mod error;
pub mod excursion;
pub mod io;
pub mod metric;
pub mod rtree;
pub mod sampler;
pub mod verify;

pub use dynamics::{cladogram_spr_step, run_chain, spr_jump_step, transition_matrix, Cladogram};
pub use error::{Error, Result};
pub use excursion::{insert, Excursion, GammaPoint};
pub use rtree::{Atom, Edge, PointRef, Tree, WeightedTree};
pub use sampler::{Method, SamplerConfig};
