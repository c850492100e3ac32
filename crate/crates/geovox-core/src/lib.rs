//! Scale- and rotation-invariant geodesic surface-variation features for 3D
//! shapes, computed with Eulerian PDE solvers on dense voxel grids, together
//! with a covariance-eigenfeature baseline, control-point diffeomorphic
//! point-set registration (LDDMM) for vertex tracking, and temporal
//! deformation analysis over tracked mesh sequences.
//!
//! The crate is `no_std` (it requires `alloc`) and carries no I/O: file
//! formats and the command-line front end live in the companion `geovox`
//! crate. Float math goes through [`libm`] so results do not depend on the
//! host's libm.
//!
//! Pipeline overview, from a surface point cloud to the feature field:
//!
//! 1. [`grid::voxelize`] builds a solid occupancy mask.
//! 2. [`eulerian::setup_boundaries`] erodes the mask and encloses it in a
//!    surrounding sphere, giving two non-intersecting Dirichlet boundaries.
//! 3. [`eulerian::solve_laplace`] relaxes the harmonic interpolant between
//!    the boundaries, [`eulerian::tangent_field`] normalizes its gradient,
//!    and [`eulerian::solve_lengths`] integrates the paired geodesic-length
//!    transport equations along that field.
//! 4. [`eulerian::feature_field`] forms the feature as sphere radius over
//!    geodesic length, and [`eulerian::surface_feature`] samples it back
//!    onto surface points.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod covariance;
pub mod error;
pub mod eulerian;
pub mod grid;
pub mod lddmm;
pub mod math;
pub mod shapes;
pub mod temporal;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
