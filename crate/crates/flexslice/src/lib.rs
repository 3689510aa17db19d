//! Admission control and embedding of network slices whose VNF order may be
//! partially flexible.
//!
//! A slice is a linear chain of VNFs; some occupy pinned chain positions,
//! the rest may be reordered. The engine enumerates the admissible orderings
//! and decides, slice by slice, whether to admit the request and where to
//! place its VNFs and virtual links on a capacitated physical network. Three
//! solvers share the same model:
//!
//! * [`exact`] — exhaustive joint optimizer for small instances, plus an
//!   LP-format export of the full linearized model for external MILP
//!   solvers;
//! * [`bnb`] — depth-first branch-and-bound over placements with an
//!   A*-style bound (committed usage plus a load-balance estimate) and an
//!   optional per-configuration branch limit;
//! * [`bfn`] — a greedy best-fit-neighbor baseline.
//!
//! [`topology`] builds fat-trees and loads WAN graphs, [`harness`] runs the
//! scenario matrix and writes reports. The default `parallel` feature
//! spreads the exhaustive search and independent scenario runs over all
//! cores; disabling it yields a dependency-free sequential build.

pub mod bfn;
pub mod bnb;
pub mod configs;
pub mod error;
pub mod exact;
pub mod harness;
pub mod model;
pub mod pathing;
pub mod topology;

pub use error::{Error, Result};
