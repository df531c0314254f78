//! Line-oriented text formats.
//!
//! Every format shares the same lexical rules: one record per line, fields
//! separated by commas, blank lines ignored, lines starting with `#` are
//! comments except for the `# origin,<lat>,<lon>` and `# route,<ids...>`
//! directives. Floats are written in their shortest round-trip form, so a
//! parsed file written back and parsed again gives identical values.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::geo::{to_geodetic, to_planar, GeoError, GeoPoint, TimedSample};
use crate::geom::PlanarPoint;
use crate::polyfit::Curve2D;
use crate::roadmap::{
    Edge, EdgeId, GraphTopology, MapError, MapSegment, Node, NodeId, RoadMap, SegmentId,
};
use crate::routing::{Route, RoutePlan};
use crate::synth::{EdgeShape, SynthEdge, SynthParams, SynthSpec};
use crate::trajectory::{Pose, Trajectory, HORIZON};

type P = PlanarPoint<f64>;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Geo(#[from] GeoError),
}

fn err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Writes `bytes` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

/// A record: 1-based line number and its fields.
struct Record<'a> {
    line: usize,
    fields: Vec<&'a str>,
}

impl<'a> Record<'a> {
    fn kind(&self) -> &'a str {
        self.fields[0]
    }

    fn expect_len(&self, n: usize) -> Result<(), FormatError> {
        if self.fields.len() == n {
            Ok(())
        } else {
            Err(err(
                self.line,
                format!(
                    "`{}` needs {} fields, found {}",
                    self.kind(),
                    n,
                    self.fields.len()
                ),
            ))
        }
    }

    fn f64(&self, i: usize) -> Result<f64, FormatError> {
        let s = self.field(i)?;
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(err(
                self.line,
                format!("field {} is not a finite number: `{s}`", i + 1),
            )),
        }
    }

    fn int<I: std::str::FromStr>(&self, i: usize) -> Result<I, FormatError> {
        let s = self.field(i)?;
        s.parse().map_err(|_| {
            err(
                self.line,
                format!("field {} is not an integer: `{s}`", i + 1),
            )
        })
    }

    fn field(&self, i: usize) -> Result<&'a str, FormatError> {
        self.fields
            .get(i)
            .copied()
            .ok_or_else(|| err(self.line, format!("missing field {}", i + 1)))
    }

    fn node(&self, i: usize) -> Result<NodeId, FormatError> {
        self.int(i).map(NodeId)
    }

    fn edge(&self, i: usize) -> Result<EdgeId, FormatError> {
        self.int(i).map(EdgeId)
    }
}

/// Splits a document into records. Directives come back with kinds
/// `#origin` and `#route`.
fn records(text: &str) -> Vec<Record<'_>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim_start();
            for (tag, kind) in [("origin,", "#origin"), ("route,", "#route")] {
                if let Some(body) = rest.strip_prefix(tag) {
                    let mut fields = vec![kind];
                    fields.extend(body.split(',').map(str::trim));
                    out.push(Record {
                        line: i + 1,
                        fields,
                    });
                }
            }
            continue;
        }
        out.push(Record {
            line: i + 1,
            fields: line.split(',').map(str::trim).collect(),
        });
    }
    out
}

fn parse_origin(r: &Record) -> Result<GeoPoint<f64>, FormatError> {
    r.expect_len(3)?;
    GeoPoint::new(r.f64(1)?, r.f64(2)?).map_err(|e| err(r.line, e.to_string()))
}

fn parse_ids(r: &Record, from: usize) -> Result<Vec<NodeId>, FormatError> {
    (from..r.fields.len()).map(|i| r.node(i)).collect()
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn origin_line(out: &mut String, o: &GeoPoint<f64>) {
    let _ = writeln!(out, "# origin,{},{}", o.lat, o.lon);
}

// ---------------------------------------------------------------- topology

/// Intersection graph with geodetic node centers.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyFile {
    /// Planar-frame anchor; defaults to the node centroid.
    pub origin: Option<GeoPoint<f64>>,
    pub nodes: Vec<(NodeId, GeoPoint<f64>, f64)>,
    pub edges: Vec<Edge>,
}

impl TopologyFile {
    pub fn origin(&self) -> Result<GeoPoint<f64>, FormatError> {
        match self.origin {
            Some(o) => Ok(o),
            None => crate::geo::centroid(&self.nodes.iter().map(|n| n.1).collect::<Vec<_>>())
                .ok_or_else(|| FormatError::Invalid("topology has no nodes".into())),
        }
    }

    /// Planar graph in the frame of [`Self::origin`].
    pub fn to_graph(&self) -> Result<(GraphTopology<f64>, GeoPoint<f64>), FormatError> {
        let origin = self.origin()?;
        let nodes = self
            .nodes
            .iter()
            .map(|(id, g, radius)| {
                Ok(Node {
                    id: *id,
                    center: to_planar(*g, origin)?,
                    radius: *radius,
                })
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        let topo = GraphTopology::new(nodes, self.edges.clone()).map_err(MapError::from)?;
        Ok((topo, origin))
    }

    pub fn from_graph(
        topology: &GraphTopology<f64>,
        origin: GeoPoint<f64>,
    ) -> Result<Self, FormatError> {
        Ok(Self {
            origin: Some(origin),
            nodes: topology
                .nodes()
                .iter()
                .map(|n| Ok((n.id, to_geodetic(n.center, origin)?, n.radius)))
                .collect::<Result<_, FormatError>>()?,
            edges: topology.edges().to_vec(),
        })
    }
}

fn topology_record(r: &Record, file: &mut TopologyFile) -> Result<bool, FormatError> {
    match r.kind() {
        "#origin" => file.origin = Some(parse_origin(r)?),
        "node" => {
            r.expect_len(5)?;
            let g = GeoPoint::new(r.f64(2)?, r.f64(3)?).map_err(|e| err(r.line, e.to_string()))?;
            let radius = r.f64(4)?;
            if radius <= 0.0 {
                return Err(err(r.line, "radius must be positive"));
            }
            file.nodes.push((r.node(1)?, g, radius));
        }
        "edge" => {
            r.expect_len(4)?;
            file.edges.push(Edge {
                id: r.edge(1)?,
                from: r.node(2)?,
                to: r.node(3)?,
            });
        }
        _ => return Ok(false),
    }
    Ok(true)
}

pub fn parse_topology(text: &str) -> Result<TopologyFile, FormatError> {
    let mut file = TopologyFile {
        origin: None,
        nodes: Vec::new(),
        edges: Vec::new(),
    };
    for r in records(text) {
        if !topology_record(&r, &mut file)? {
            return Err(err(r.line, format!("unknown record `{}`", r.kind())));
        }
    }
    Ok(file)
}

fn topology_body(out: &mut String, t: &TopologyFile) {
    for (id, g, radius) in &t.nodes {
        let _ = writeln!(out, "node,{id},{},{},{radius}", g.lat, g.lon);
    }
    for e in &t.edges {
        let _ = writeln!(out, "edge,{},{},{}", e.id, e.from, e.to);
    }
}

pub fn write_topology(t: &TopologyFile) -> String {
    let mut out =
        String::from("# intersections: node,id,lat,lon,radius_m / roads: edge,id,from,to\n");
    if let Some(o) = &t.origin {
        origin_line(&mut out, o);
    }
    topology_body(&mut out, t);
    out
}

// ------------------------------------------------------------------- trace

/// One GPS recording.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub origin: GeoPoint<f64>,
    pub route: Vec<NodeId>,
    /// Milliseconds since the start of the trace, and position.
    pub rows: Vec<(i64, GeoPoint<f64>)>,
}

impl TraceFile {
    /// Samples in the frame anchored at `origin`.
    pub fn samples_in(&self, origin: GeoPoint<f64>) -> Result<Vec<TimedSample<f64>>, FormatError> {
        self.rows
            .iter()
            .map(|(ms, g)| {
                Ok(TimedSample::new(
                    *ms as f64 / 1000.0,
                    to_planar(*g, origin)?,
                ))
            })
            .collect()
    }

    /// Samples in the trace's own frame.
    pub fn samples(&self) -> Result<Vec<TimedSample<f64>>, FormatError> {
        self.samples_in(self.origin)
    }
}

/// Parses a trace. With a topology, route node ids are checked against it.
pub fn parse_trace(
    text: &str,
    topology: Option<&GraphTopology<f64>>,
) -> Result<TraceFile, FormatError> {
    let mut origin = None;
    let mut route = None;
    let mut rows: Vec<(i64, GeoPoint<f64>)> = Vec::new();
    for r in records(text) {
        match r.kind() {
            "#origin" => origin = Some(parse_origin(&r)?),
            "#route" => {
                let ids = parse_ids(&r, 1)?;
                if let Some(t) = topology {
                    if let Some(bad) = ids.iter().find(|n| t.node(**n).is_none()) {
                        return Err(err(r.line, format!("unknown node {bad} in route")));
                    }
                }
                route = Some(ids);
            }
            _ => {
                r.expect_len(3)?;
                let ms: i64 = r.int(0)?;
                if let Some((prev, _)) = rows.last() {
                    if ms <= *prev {
                        return Err(err(r.line, format!("timestamp {ms} does not increase")));
                    }
                }
                let g =
                    GeoPoint::new(r.f64(1)?, r.f64(2)?).map_err(|e| err(r.line, e.to_string()))?;
                rows.push((ms, g));
            }
        }
    }
    Ok(TraceFile {
        origin: origin
            .ok_or_else(|| FormatError::Invalid("trace lacks `# origin` header".into()))?,
        route: route.ok_or_else(|| FormatError::Invalid("trace lacks `# route` header".into()))?,
        rows,
    })
}

pub fn write_trace(t: &TraceFile) -> String {
    let mut out = String::new();
    origin_line(&mut out, &t.origin);
    let _ = writeln!(out, "# route,{}", join(&t.route));
    for (ms, g) in &t.rows {
        let _ = writeln!(out, "{ms},{},{}", g.lat, g.lon);
    }
    out
}

/// Node list from a file holding a `# route,...` directive or a
/// `route,...` record; other records are ignored, so trace files qualify.
pub fn parse_route(text: &str) -> Result<Vec<NodeId>, FormatError> {
    for r in records(text) {
        if r.kind() == "#route" || r.kind() == "route" {
            return parse_ids(&r, 1);
        }
    }
    Err(FormatError::Invalid("no route found".into()))
}

// --------------------------------------------------------------------- map

/// Stored map: the topology echo keeps the geodetic node positions exactly
/// as given, segments store coefficients only.
#[derive(Debug, Clone, PartialEq)]
pub struct MapFile {
    pub origin: GeoPoint<f64>,
    pub topology: TopologyFile,
    /// Per segment: curve over `[0, length]` and the length.
    pub segments: BTreeMap<SegmentId, (Curve2D<f64>, f64)>,
}

impl MapFile {
    pub fn from_map(map: &RoadMap<f64>, topology: &TopologyFile) -> Self {
        Self {
            origin: map.origin(),
            topology: TopologyFile {
                origin: None,
                ..topology.clone()
            },
            segments: map
                .segments()
                .iter()
                .map(|(id, s)| (*id, (s.curve.clone(), s.length)))
                .collect(),
        }
    }

    /// Rebuilds the map; polylines are resampled from the curves.
    pub fn to_road_map(&self) -> Result<RoadMap<f64>, FormatError> {
        let topo = TopologyFile {
            origin: Some(self.origin),
            ..self.topology.clone()
        };
        let (graph, origin) = topo.to_graph()?;
        let segments = self
            .segments
            .iter()
            .map(|(id, (c, len))| Ok((*id, MapSegment::new(*id, c.clone(), *len)?)))
            .collect::<Result<BTreeMap<_, _>, MapError>>()?;
        Ok(RoadMap::new(graph, segments, origin)?)
    }
}

pub fn parse_map(text: &str) -> Result<MapFile, FormatError> {
    let mut topology = TopologyFile {
        origin: None,
        nodes: Vec::new(),
        edges: Vec::new(),
    };
    let mut segments = BTreeMap::new();
    for r in records(text) {
        if topology_record(&r, &mut topology)? {
            continue;
        }
        if r.kind() != "segment" {
            return Err(err(r.line, format!("unknown record `{}`", r.kind())));
        }
        let (id, at) = match r.field(1)? {
            "edge" => (SegmentId::Edge(r.edge(2)?), 3),
            "turn" => (SegmentId::Turn(r.edge(2)?, r.edge(3)?), 4),
            other => return Err(err(r.line, format!("unknown segment kind `{other}`"))),
        };
        let degree: usize = r.int(at)?;
        let length = r.f64(at + 1)?;
        r.expect_len(at + 2 + 2 * (degree + 1))?;
        let coeffs = |k: usize| -> Result<Vec<f64>, FormatError> {
            (0..=degree)
                .map(|j| r.f64(at + 2 + k * (degree + 1) + j))
                .collect()
        };
        let curve = Curve2D::new(coeffs(0)?, coeffs(1)?, (0.0, length))
            .map_err(|e| err(r.line, e.to_string()))?;
        if segments.insert(id, (curve, length)).is_some() {
            return Err(err(r.line, format!("duplicate {id}")));
        }
    }
    let origin = topology
        .origin
        .take()
        .ok_or_else(|| FormatError::Invalid("map lacks `# origin` header".into()))?;
    Ok(MapFile {
        origin,
        topology,
        segments,
    })
}

pub fn write_map(m: &MapFile) -> String {
    let mut out = String::from("# map: topology, then segment,kind,ids,degree,length,x coeffs,y coeffs (highest power first)\n");
    origin_line(&mut out, &m.origin);
    topology_body(&mut out, &m.topology);
    for (id, (c, length)) in &m.segments {
        let ids = match id {
            SegmentId::Edge(e) => format!("edge,{e}"),
            SegmentId::Turn(a, b) => format!("turn,{a},{b}"),
        };
        let _ = writeln!(
            out,
            "segment,{ids},{},{length},{},{}",
            c.degree(),
            join(c.coeffs_x()),
            join(c.coeffs_y())
        );
    }
    out
}

// -------------------------------------------------------------------- plan

pub fn parse_plan(
    text: &str,
    topology: &GraphTopology<f64>,
) -> Result<RoutePlan<f64>, FormatError> {
    let mut plan = RoutePlan::empty();
    let mut total = None;
    for r in records(text) {
        match r.kind() {
            "leg" => {
                let length = r.f64(1)?;
                let nodes = parse_ids(&r, 2)?;
                let edges = topology
                    .route_edges(&nodes)
                    .map_err(|e| err(r.line, e.to_string()))?;
                plan.legs.push(Route {
                    nodes,
                    edges,
                    length,
                });
            }
            "total" => {
                r.expect_len(2)?;
                total = Some(r.f64(1)?);
            }
            "pair" => {
                r.expect_len(4)?;
                plan.pair_edge_counts
                    .insert((r.edge(1)?, r.edge(2)?), r.int(3)?);
            }
            other => return Err(err(r.line, format!("unknown record `{other}`"))),
        }
    }
    plan.total_length =
        total.ok_or_else(|| FormatError::Invalid("plan lacks a total line".into()))?;
    Ok(plan)
}

pub fn write_plan(plan: &RoutePlan<f64>) -> String {
    let mut out = String::from(
        "# plan: leg,length_m,nodes... / total,length_m / pair,in_edge,out_edge,crossings\n",
    );
    for leg in &plan.legs {
        let _ = writeln!(out, "leg,{},{}", leg.length, join(&leg.nodes));
    }
    let _ = writeln!(out, "total,{}", plan.total_length);
    for ((a, b), n) in &plan.pair_edge_counts {
        let _ = writeln!(out, "pair,{a},{b},{n}");
    }
    out
}

// ------------------------------------------------------------------ labels

/// Pose at `t0` and the following 7 s, for one trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Label {
    pub trace: String,
    pub pose: Pose<f64>,
    pub trajectory: Trajectory<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelFile {
    pub origin: GeoPoint<f64>,
    pub labels: Vec<Label>,
}

pub fn parse_labels(text: &str) -> Result<LabelFile, FormatError> {
    let mut origin = None;
    let mut labels = Vec::new();
    for r in records(text) {
        match r.kind() {
            "#origin" => origin = Some(parse_origin(&r)?),
            "label" => {
                r.expect_len(6 + 2 * HORIZON)?;
                let pose = Pose::new(r.f64(2)?, P::new(r.f64(3)?, r.f64(4)?), r.f64(5)?);
                let mut pts = [P::origin(); HORIZON];
                for (n, p) in pts.iter_mut().enumerate() {
                    *p = P::new(r.f64(6 + 2 * n)?, r.f64(7 + 2 * n)?);
                }
                labels.push(Label {
                    trace: r.field(1)?.to_string(),
                    pose,
                    trajectory: Trajectory::new(pts).map_err(|e| err(r.line, e.to_string()))?,
                });
            }
            other => return Err(err(r.line, format!("unknown record `{other}`"))),
        }
    }
    Ok(LabelFile {
        origin: origin
            .ok_or_else(|| FormatError::Invalid("labels lack `# origin` header".into()))?,
        labels,
    })
}

pub fn write_labels(f: &LabelFile) -> String {
    let mut out = String::from(
        "# label,trace,t0_s,x,y,heading_rad, then x,y of the 7 ego-frame points (+y forward)\n",
    );
    origin_line(&mut out, &f.origin);
    for l in &f.labels {
        let pts = join(l.trajectory.points.iter().flat_map(|p| [p.x, p.y]));
        let _ = writeln!(
            out,
            "label,{},{},{},{},{},{pts}",
            l.trace, l.pose.t, l.pose.p.x, l.pose.p.y, l.pose.heading
        );
    }
    out
}

// ------------------------------------------------------------------- poses

/// A pose record; predictions may lack position or heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseRow {
    pub t: f64,
    pub p: Option<P>,
    pub heading: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseFile {
    pub origin: Option<GeoPoint<f64>>,
    pub rows: Vec<PoseRow>,
}

/// `pose,t,x,y,heading`; empty x/y mean no response, empty heading means
/// no orientation.
pub fn parse_poses(text: &str) -> Result<PoseFile, FormatError> {
    let mut origin = None;
    let mut rows = Vec::new();
    for r in records(text) {
        match r.kind() {
            "#origin" => origin = Some(parse_origin(&r)?),
            "pose" => {
                r.expect_len(5)?;
                let p = if r.field(2)?.is_empty() && r.field(3)?.is_empty() {
                    None
                } else {
                    Some(P::new(r.f64(2)?, r.f64(3)?))
                };
                let heading = if r.field(4)?.is_empty() {
                    None
                } else {
                    Some(r.f64(4)?)
                };
                rows.push(PoseRow {
                    t: r.f64(1)?,
                    p,
                    heading,
                });
            }
            other => return Err(err(r.line, format!("unknown record `{other}`"))),
        }
    }
    Ok(PoseFile { origin, rows })
}

pub fn write_poses(f: &PoseFile) -> String {
    let mut out = String::from("# pose,t_s,x,y,heading_rad (empty fields: no response)\n");
    if let Some(o) = &f.origin {
        origin_line(&mut out, o);
    }
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &f.rows {
        let _ = writeln!(
            out,
            "pose,{},{},{},{}",
            r.t,
            opt(r.p.map(|p| p.x)),
            opt(r.p.map(|p| p.y)),
            opt(r.heading)
        );
    }
    out
}

// ------------------------------------------------------------------- truth

#[derive(Debug, Clone, PartialEq)]
pub struct TruthFile {
    pub origin: GeoPoint<f64>,
    pub polylines: BTreeMap<SegmentId, Vec<P>>,
}

/// `truth,edge,<e>,x,y,x,y,...` or `truth,turn,<a>,<b>,x,y,...`.
pub fn parse_truth(text: &str) -> Result<TruthFile, FormatError> {
    let mut origin = None;
    let mut polylines = BTreeMap::new();
    for r in records(text) {
        match r.kind() {
            "#origin" => origin = Some(parse_origin(&r)?),
            "truth" => {
                let (id, at) = match r.field(1)? {
                    "edge" => (SegmentId::Edge(r.edge(2)?), 3),
                    "turn" => (SegmentId::Turn(r.edge(2)?, r.edge(3)?), 4),
                    other => return Err(err(r.line, format!("unknown segment kind `{other}`"))),
                };
                if (r.fields.len() - at) % 2 != 0 || r.fields.len() - at < 4 {
                    return Err(err(r.line, "need at least two x,y pairs"));
                }
                let pts = (at..r.fields.len())
                    .step_by(2)
                    .map(|i| Ok(P::new(r.f64(i)?, r.f64(i + 1)?)))
                    .collect::<Result<Vec<_>, FormatError>>()?;
                polylines.insert(id, pts);
            }
            other => return Err(err(r.line, format!("unknown record `{other}`"))),
        }
    }
    Ok(TruthFile {
        origin: origin
            .ok_or_else(|| FormatError::Invalid("truth lacks `# origin` header".into()))?,
        polylines,
    })
}

pub fn write_truth(f: &TruthFile) -> String {
    let mut out = String::from("# reference geometry per segment: truth,kind,ids,x,y,x,y,...\n");
    origin_line(&mut out, &f.origin);
    for (id, pts) in &f.polylines {
        let ids = match id {
            SegmentId::Edge(e) => format!("edge,{e}"),
            SegmentId::Turn(a, b) => format!("turn,{a},{b}"),
        };
        let _ = writeln!(
            out,
            "truth,{ids},{}",
            join(pts.iter().flat_map(|p| [p.x, p.y]))
        );
    }
    out
}

// ------------------------------------------------------------------ report

/// Ordered key/value document.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub entries: Vec<(String, String)>,
}

impl Report {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

pub fn parse_report(text: &str) -> Result<Report, FormatError> {
    let mut report = Report::default();
    for r in records(text) {
        if r.fields.len() != 2 {
            return Err(err(r.line, "report lines are key,value"));
        }
        report
            .entries
            .push((r.fields[0].to_string(), r.fields[1].to_string()));
    }
    Ok(report)
}

pub fn write_report(r: &Report) -> String {
    let mut out = String::new();
    for (k, v) in &r.entries {
        let _ = writeln!(out, "{k},{v}");
    }
    out
}

// ------------------------------------------------------------- synth spec

/// `# origin`, `param,<name>,<value>`, `node,id,x,y,radius` (planar
/// meters) and `edge,id,from,to,line` or `edge,id,from,to,arc,<bend_deg>`.
pub fn parse_synth_spec(text: &str) -> Result<SynthSpec, FormatError> {
    let mut origin = None;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut params = SynthParams::default();
    for r in records(text) {
        match r.kind() {
            "#origin" => origin = Some(parse_origin(&r)?),
            "param" => {
                r.expect_len(3)?;
                match r.field(1)? {
                    "sigma" => params.sigma = r.f64(2)?,
                    "rate_hz" => params.rate_hz = r.f64(2)?,
                    "cruise_speed" => params.cruise_speed = r.f64(2)?,
                    "turn_speed" => params.turn_speed = r.f64(2)?,
                    "seed" => params.seed = r.int(2)?,
                    "km_limit" => params.limit = r.f64(2)? * 1000.0,
                    "runs" => params.runs = r.int(2)?,
                    "min_crossings" => params.min_crossings = r.int(2)?,
                    other => return Err(err(r.line, format!("unknown parameter `{other}`"))),
                }
            }
            "node" => {
                r.expect_len(5)?;
                nodes.push(Node {
                    id: r.node(1)?,
                    center: P::new(r.f64(2)?, r.f64(3)?),
                    radius: r.f64(4)?,
                });
            }
            "edge" => {
                let shape = match r.field(4)? {
                    "line" => {
                        r.expect_len(5)?;
                        EdgeShape::Line
                    }
                    "arc" => {
                        r.expect_len(6)?;
                        EdgeShape::Arc {
                            bend_deg: r.f64(5)?,
                        }
                    }
                    other => return Err(err(r.line, format!("unknown edge shape `{other}`"))),
                };
                edges.push(SynthEdge {
                    id: r.edge(1)?,
                    from: r.node(2)?,
                    to: r.node(3)?,
                    shape,
                });
            }
            other => return Err(err(r.line, format!("unknown record `{other}`"))),
        }
    }
    Ok(SynthSpec {
        origin: origin
            .ok_or_else(|| FormatError::Invalid("world spec lacks `# origin` header".into()))?,
        nodes,
        edges,
        params,
    })
}
