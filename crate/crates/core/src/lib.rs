//! Continuum percolation with random ellipses.
//!
//! The model places grains (ellipses with unit semi-minor axis and a
//! heavy-tailed semi-major axis, or disks) on a planar Poisson process and
//! asks connectivity questions about the covered set and its complement:
//! box crossings, circuits, annulus connections, covering counts, and the
//! multiscale removal process that couples the model to fractal percolation.
//!
//! Modules mirror the pipeline: [`geometry`] holds the exact predicates,
//! [`sampling`] the axis laws and window samplers, [`events`] the percolation
//! events, [`montecarlo`] the replicated estimation harness, [`multiscale`]
//! the recursion and removal machinery, and [`cli`] the command-line surface.

pub mod cli;
pub mod error;
pub mod events;
pub mod geometry;
pub mod montecarlo;
pub mod multiscale;
pub mod quad;
pub mod raster;
pub mod rng;
pub mod sampling;
pub mod stats;
pub mod svg;

pub use error::ModelError;
pub use geometry::{BoxSpec, GrainKind, GrainSpec, Point, Segment};
pub use sampling::{AxisLaw, Configuration, TruncationReport};

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, ModelError>;
