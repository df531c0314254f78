//! Analytical road map built from bucketed GPS traces.
//!
//! A map is a directed intersection graph plus one arc-length parameterised
//! polynomial curve per map segment. Edge segments cover the road between two
//! intersection discs; turn segments cover one way of crossing an
//! intersection, identified by the incoming and outgoing edge.

mod build;
mod query;
mod raster;
pub mod topology;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::geo::GeoPoint;
use crate::geom::PlanarPoint;
use crate::polyfit::{Curve2D, FitError};
use crate::scalar::{lit, Real};

pub use build::{
    bucket_samples, degree_for_length, fit_segments, refit_with_neighbors, BucketPoint, Buckets,
    RouteTrace,
};
pub use query::{Projection, SegmentIndex, TIE_EPS};
pub use raster::{rasterize_crop, BinaryImage, PgmError};
pub use topology::{Edge, EdgeId, GraphTopology, Node, NodeId, TopologyError};

/// Identifies a map segment. Ordering is canonical: every edge segment sorts
/// before every turn segment, then by ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SegmentId {
    Edge(EdgeId),
    Turn(EdgeId, EdgeId),
}

impl fmt::Display for SegmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SegmentId::Edge(e) => write!(f, "edge {e}"),
            SegmentId::Turn(a, b) => write!(f, "turn {a}->{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("trace {trace}: route mismatch: {reason}")]
    RouteMismatch { trace: usize, reason: String },
    #[error("trace {trace}: corrupt at sample {sample}: jump of {gap:.1} m")]
    TraceCorrupt {
        trace: usize,
        sample: usize,
        gap: f64,
    },
    #[error("insufficient data for {segment}: {points} points, need {needed}")]
    InsufficientData {
        segment: SegmentId,
        points: usize,
        needed: usize,
    },
    #[error("fit failed for {segment}: {source}")]
    Fit {
        segment: SegmentId,
        #[source]
        source: FitError,
    },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Tunables of the map construction pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct MapConfig<T> {
    /// Degree for the shortest segments.
    pub min_degree: usize,
    pub max_degree: usize,
    /// Segment length that buys one extra polynomial degree.
    pub meters_per_degree: T,
    /// Neighbor buffer used by the continuity refit.
    pub delta: T,
    /// Consecutive samples further apart than this mark a corrupt trace.
    pub max_sample_gap: T,
    /// A bucket needs at least `coverage_factor * (degree + 1)` points.
    pub coverage_factor: usize,
}

impl<T: Real> Default for MapConfig<T> {
    fn default() -> Self {
        Self {
            min_degree: 3,
            max_degree: 9,
            meters_per_degree: lit(75.0),
            delta: lit(5.0),
            max_sample_gap: lit(50.0),
            coverage_factor: 2,
        }
    }
}

/// One fitted map segment: the curve over arc distance `d in [0, length]`
/// and its 1 m polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSegment<T> {
    pub id: SegmentId,
    pub curve: Curve2D<T>,
    pub length: T,
    pub polyline: Vec<PlanarPoint<T>>,
}

impl<T: Real> MapSegment<T> {
    /// Builds the segment and samples its polyline at every whole meter.
    pub fn new(id: SegmentId, curve: Curve2D<T>, length: T) -> Result<Self, MapError> {
        if !(length > T::zero()) || !length.is_finite() {
            return Err(MapError::InvalidInput(format!(
                "{id}: length must be positive, got {length}"
            )));
        }
        let curve = curve.with_param_range(T::zero(), length);
        let n = length.floor().to_usize().unwrap_or(0);
        let polyline = (0..=n)
            .map(|k| curve.point_at(&T::from_usize(k).unwrap_or_else(T::zero)))
            .collect();
        Ok(Self {
            id,
            curve,
            length,
            polyline,
        })
    }

    pub fn start(&self) -> PlanarPoint<T> {
        self.curve.point_at(&T::zero())
    }

    pub fn end(&self) -> PlanarPoint<T> {
        self.curve.point_at(&self.length)
    }
}

/// A complete map: topology, fitted segments and the geodetic anchor of the
/// planar frame.
#[derive(Debug, Clone)]
pub struct RoadMap<T> {
    topology: GraphTopology<T>,
    segments: BTreeMap<SegmentId, MapSegment<T>>,
    origin: GeoPoint<T>,
    index: SegmentIndex<T>,
}

impl<T: Real> PartialEq for RoadMap<T> {
    fn eq(&self, other: &Self) -> bool {
        self.topology == other.topology
            && self.segments == other.segments
            && self.origin == other.origin
    }
}

impl<T: Real> RoadMap<T> {
    /// Validates segment ids against the topology and builds the spatial index.
    pub fn new(
        topology: GraphTopology<T>,
        segments: BTreeMap<SegmentId, MapSegment<T>>,
        origin: GeoPoint<T>,
    ) -> Result<Self, MapError> {
        for e in topology.edges() {
            if !segments.contains_key(&SegmentId::Edge(e.id)) {
                return Err(MapError::InsufficientData {
                    segment: SegmentId::Edge(e.id),
                    points: 0,
                    needed: 1,
                });
            }
        }
        for (id, seg) in &segments {
            if seg.id != *id {
                return Err(MapError::InvalidInput(format!(
                    "segment keyed {id} carries id {}",
                    seg.id
                )));
            }
            validate_segment_id(&topology, *id)?;
        }
        let index = SegmentIndex::build(&segments);
        Ok(Self {
            topology,
            segments,
            origin,
            index,
        })
    }

    pub fn topology(&self) -> &GraphTopology<T> {
        &self.topology
    }

    pub fn segments(&self) -> &BTreeMap<SegmentId, MapSegment<T>> {
        &self.segments
    }

    pub fn segment(&self, id: SegmentId) -> Option<&MapSegment<T>> {
        self.segments.get(&id)
    }

    pub fn origin(&self) -> GeoPoint<T> {
        self.origin
    }

    /// Nearest point on any segment polyline.
    pub fn project_point(&self, p: PlanarPoint<T>) -> Option<Projection<T>> {
        self.index.nearest(&self.segments, p, None)
    }

    /// Nearest point restricted to `candidates`.
    pub fn project_onto(
        &self,
        p: PlanarPoint<T>,
        candidates: &[SegmentId],
    ) -> Option<Projection<T>> {
        self.index.nearest(&self.segments, p, Some(candidates))
    }

    /// Segments that may follow `id` on a legal drive.
    pub fn successors(&self, id: SegmentId) -> Vec<SegmentId> {
        match id {
            SegmentId::Edge(e) => self
                .segments
                .keys()
                .filter(|s| matches!(s, SegmentId::Turn(a, _) if *a == e))
                .copied()
                .collect(),
            SegmentId::Turn(_, b) => vec![SegmentId::Edge(b)],
        }
    }

    /// Largest gap between the end of a segment and the start of any legal
    /// successor.
    pub fn max_adjacency_gap(&self) -> T {
        let mut worst = T::zero();
        for (id, seg) in &self.segments {
            for next in self.successors(*id) {
                if let Some(n) = self.segments.get(&next) {
                    worst = worst.max(seg.end().distance(&n.start()));
                }
            }
        }
        worst
    }

    /// Segment ids covered by a node route: its edges and the turns between them.
    pub fn route_segments(&self, route: &[NodeId]) -> Result<Vec<SegmentId>, MapError> {
        let edges = self.topology.route_edges(route)?;
        Ok(route_segment_ids(&edges))
    }
}

/// Full construction: bucket the traces, fit every bucket, then run one
/// neighbor-aware refit pass.
pub fn build_map<T: Real>(
    traces: &[RouteTrace<T>],
    topology: GraphTopology<T>,
    origin: GeoPoint<T>,
    config: &MapConfig<T>,
) -> Result<RoadMap<T>, MapError> {
    let buckets = bucket_samples(traces, &topology, config)?;
    let fitted = fit_segments(&buckets, &topology, config)?;
    let refitted = refit_with_neighbors(&fitted, config)?;
    RoadMap::new(topology, refitted, origin)
}

/// Edge and turn ids along an edge sequence.
pub fn route_segment_ids(edges: &[EdgeId]) -> Vec<SegmentId> {
    let mut out = Vec::with_capacity(edges.len() * 2);
    for (i, e) in edges.iter().enumerate() {
        if i > 0 {
            out.push(SegmentId::Turn(edges[i - 1], *e));
        }
        out.push(SegmentId::Edge(*e));
    }
    out
}

pub(crate) fn validate_segment_id<T: Real>(
    topology: &GraphTopology<T>,
    id: SegmentId,
) -> Result<(), MapError> {
    match id {
        SegmentId::Edge(e) => {
            topology
                .edge(e)
                .ok_or_else(|| MapError::InvalidInput(format!("{id}: unknown edge")))?;
        }
        SegmentId::Turn(a, b) => {
            let ea = topology
                .edge(a)
                .ok_or_else(|| MapError::InvalidInput(format!("{id}: unknown edge {a}")))?;
            let eb = topology
                .edge(b)
                .ok_or_else(|| MapError::InvalidInput(format!("{id}: unknown edge {b}")))?;
            if ea.to != eb.from {
                return Err(MapError::InvalidInput(format!(
                    "{id}: edges do not share a node"
                )));
            }
        }
    }
    Ok(())
}
