//! Zero-temperature Edwards–Anderson spin glass on finite graphs.
//!
//! The crate is `no_std` (with `alloc`) and contains the pure algorithmic
//! pieces: graph construction, reproducible Gaussian disorder and its two
//! coupled perturbations, exact and heuristic ground-state solvers, and the
//! observables built on top of ground states (overlaps, droplets, interface
//! energies, the valley statistic, critical droplets and boundary
//! dependence). File formats, experiment orchestration and the command-line
//! front end live in the `ea-lab` crate.
//!
//! ```
//! use ea_core::lattice::{LatticeGraph, Topology};
//! use ea_core::disorder::{sample_disorder, Stream};
//! use ea_core::solver::{solve_exact, BoundaryCondition, ExactOptions};
//!
//! let g = LatticeGraph::cube(Topology::OpenCube { d: 2, l: 3 }).unwrap();
//! let j = sample_disorder(&g, 7, &Stream::new("J"));
//! let bc = BoundaryCondition::all_plus(&g).unwrap();
//! let gs = solve_exact(&g, &j, &bc, &ExactOptions::default()).unwrap();
//! assert!(gs.exact);
//! ```

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod disorder;
mod error;
pub mod lattice;
pub mod observables;
pub mod rng;
pub mod solver;
#[cfg(test)]
mod test_support;

pub use error::{Error, Result};
