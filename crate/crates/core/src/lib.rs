//! Analytical road maps from GPS traces and the trajectory tooling built on
//! them.
//!
//! The numerical core is generic over the scalar type: curve fitting runs on
//! any ordered [`Field`] (including exact rationals), geometry on any
//! [`Real`]. The aliases at the crate root fix the scalar to `f64`, which is
//! what the file formats and the command-line tool use.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eval;
pub mod formats;
pub mod geo;
pub mod geom;
pub mod polyfit;
pub mod roadmap;
pub mod routing;
pub mod scalar;
pub mod synth;
pub mod trajectory;

pub use geo::{GeoError, GeoPoint, TimedSample};
pub use geom::PlanarPoint;
pub use polyfit::{Curve2D, FitError};
pub use roadmap::{GraphTopology, MapError, MapSegment, RoadMap, SegmentId};
pub use scalar::{Field, Real};

pub type Point = geom::PlanarPoint<f64>;
pub type Geo = geo::GeoPoint<f64>;
pub type Sample = geo::TimedSample<f64>;
pub type Curve = polyfit::Curve2D<f64>;
pub type Map = roadmap::RoadMap<f64>;
pub type Topology = roadmap::GraphTopology<f64>;
