//! Error type shared by all modules.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::grid::ScalarGrid;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A precondition on caller-supplied data was violated.
    InvalidInput(String),
    /// The shape cannot support the requested operation (e.g. erosion
    /// emptied the mask).
    DegenerateShape(String),
    /// A sample point lies outside the grid's world bounding box.
    OutOfDomain { point: [f64; 3] },
    /// The grid cannot contain the surrounding sphere; the caller must
    /// re-pad the voxelization.
    GridTooSmall(String),
    /// An iterative solver hit its iteration cap above tolerance. Carries
    /// the last iterate for diagnostics.
    NotConverged(Box<NotConverged>),
    /// Integration left the plausible coordinate range, usually a step-size
    /// problem.
    NumericalBlowup { limit: f64 },
    /// Internal invariant violation: the geodesic length field must be
    /// strictly positive inside the solve region.
    NonPositiveG { index: [usize; 3], value: f64 },
}

/// Diagnostics attached to [`Error::NotConverged`].
#[derive(Debug, Clone, PartialEq)]
pub struct NotConverged {
    /// Which solver gave up.
    pub solver: &'static str,
    pub iterations: usize,
    pub residual: f64,
    pub tolerance: f64,
    /// Last iterate(s), in solver-specific order.
    pub last: Vec<ScalarGrid>,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateShape(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::DegenerateShape(msg) => write!(f, "degenerate shape: {msg}"),
            Error::OutOfDomain { point } => write!(
                f,
                "point ({}, {}, {}) outside the grid domain",
                point[0], point[1], point[2]
            ),
            Error::GridTooSmall(msg) => write!(f, "grid too small: {msg}"),
            Error::NotConverged(info) => write!(
                f,
                "{} did not converge: residual {} > tolerance {} after {} iterations",
                info.solver, info.residual, info.tolerance, info.iterations
            ),
            Error::NumericalBlowup { limit } => {
                write!(f, "numerical blow-up: coordinate magnitude exceeded {limit}")
            }
            Error::NonPositiveG { index, value } => write!(
                f,
                "non-positive geodesic length {value} at voxel ({}, {}, {})",
                index[0], index[1], index[2]
            ),
        }
    }
}

impl core::error::Error for Error {}
