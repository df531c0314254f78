//! Synthetic worlds with closed-form road geometry, for checking the map
//! pipeline against known truth.
//!
//! Roads are straight lines or "bent" roads: a straight stub leaving each
//! intersection, joined by one circular arc. Inside an intersection a drive
//! follows the incoming stub, a fillet arc and the outgoing stub. Everything
//! here works in `f64`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::geo::{GeoPoint, TimedSample};
use crate::geom::PlanarPoint;
use crate::roadmap::{
    Edge, EdgeId, GraphTopology, Node, NodeId, RouteTrace, SegmentId, TopologyError,
};
use crate::routing::{simulate_coverage, CoverageConfig, RoutePlan, RoutingError};
use crate::scalar::wrap_angle;

type P = PlanarPoint<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error("invalid world: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeShape {
    Line,
    /// Leaves and enters the intersections `bend_deg` degrees off the
    /// center-to-center chord (positive bends left first).
    Arc {
        bend_deg: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthEdge {
    pub id: EdgeId,
    pub from: NodeId,
    pub to: NodeId,
    pub shape: EdgeShape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    /// Per-axis Gaussian noise, meters.
    pub sigma: f64,
    pub rate_hz: f64,
    pub cruise_speed: f64,
    /// Speed through a right-angle turn; sharper turns use it too, gentler
    /// ones blend toward cruise speed.
    pub turn_speed: f64,
    pub seed: u64,
    /// Distance budget of the coverage simulation, meters.
    pub limit: f64,
    pub runs: usize,
    pub min_crossings: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            sigma: 3.0,
            rate_hz: 1.0,
            cruise_speed: 10.0,
            turn_speed: 6.0,
            seed: 1,
            limit: 50_000.0,
            runs: 100,
            min_crossings: 3,
        }
    }
}

/// Planar description of a world.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub origin: GeoPoint<f64>,
    pub nodes: Vec<Node<f64>>,
    pub edges: Vec<SynthEdge>,
    pub params: SynthParams,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Piece {
    Line {
        a: P,
        b: P,
    },
    /// Circle `center`, `radius`, starting angle and signed sweep (radians).
    Arc {
        center: P,
        radius: f64,
        start: f64,
        sweep: f64,
    },
}

impl Piece {
    fn length(&self) -> f64 {
        match self {
            Piece::Line { a, b } => a.distance(b),
            Piece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    fn point_at(&self, s: f64) -> P {
        match *self {
            Piece::Line { a, b } => {
                let len = a.distance(&b);
                if len == 0.0 {
                    a
                } else {
                    a.lerp(&b, s / len)
                }
            }
            Piece::Arc {
                center,
                radius,
                start,
                sweep,
            } => {
                let ang = start + sweep.signum() * s / radius;
                center + P::from_heading(ang) * radius
            }
        }
    }

    fn sub(&self, s0: f64, s1: f64) -> Piece {
        match *self {
            Piece::Line { .. } => Piece::Line {
                a: self.point_at(s0),
                b: self.point_at(s1),
            },
            Piece::Arc {
                center,
                radius,
                start,
                sweep,
            } => Piece::Arc {
                center,
                radius,
                start: start + sweep.signum() * s0 / radius,
                sweep: sweep.signum() * (s1 - s0) / radius,
            },
        }
    }
}

/// Arc-length parameterised chain of lines and circular arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pieces: Vec<Piece>,
    /// Start distance of each piece, plus the total at the end.
    starts: Vec<f64>,
}

impl Path {
    fn new(pieces: Vec<Piece>) -> Self {
        let mut starts = vec![0.0];
        for p in &pieces {
            starts.push(starts.last().unwrap() + p.length());
        }
        Self { pieces, starts }
    }

    pub fn length(&self) -> f64 {
        *self.starts.last().unwrap()
    }

    pub fn point_at(&self, s: f64) -> P {
        let s = s.clamp(0.0, self.length());
        let i = self.starts[1..]
            .iter()
            .position(|end| s <= *end)
            .unwrap_or(self.pieces.len() - 1);
        self.pieces[i].point_at(s - self.starts[i])
    }

    /// Unit direction of travel at `s`.
    pub fn tangent_at(&self, s: f64) -> P {
        let h = 1e-6;
        let (a, b) = (
            self.point_at((s - h).max(0.0)),
            self.point_at((s + h).min(self.length())),
        );
        let d = b - a;
        d * (1.0 / d.norm())
    }

    fn sub(&self, s0: f64, s1: f64) -> Vec<Piece> {
        let mut out = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            let (lo, hi) = (self.starts[i], self.starts[i + 1]);
            let (a, b) = (s0.max(lo), s1.min(hi));
            if b - a > 1e-12 {
                out.push(p.sub(a - lo, b - lo));
            }
        }
        out
    }

    /// Points every `step` meters plus the end point.
    pub fn polyline(&self, step: f64) -> Vec<P> {
        let n = (self.length() / step).ceil().max(1.0) as usize;
        (0..=n)
            .map(|k| self.point_at(self.length() * k as f64 / n as f64))
            .collect()
    }
}

/// A validated world with the geometry of every road.
#[derive(Debug, Clone)]
pub struct SynthWorld {
    pub spec: SynthSpec,
    pub topology: GraphTopology<f64>,
    paths: BTreeMap<EdgeId, Path>,
}

impl SynthWorld {
    pub fn new(spec: SynthSpec) -> Result<Self, SynthError> {
        let p = &spec.params;
        if !(p.sigma >= 0.0 && p.rate_hz > 0.0 && p.cruise_speed > 0.0 && p.turn_speed > 0.0) {
            return Err(SynthError::Invalid(
                "noise must be non-negative; rate and speeds positive".into(),
            ));
        }
        let topology = GraphTopology::new(
            spec.nodes.clone(),
            spec.edges
                .iter()
                .map(|e| Edge {
                    id: e.id,
                    from: e.from,
                    to: e.to,
                })
                .collect(),
        )?;
        let mut paths = BTreeMap::new();
        for e in &spec.edges {
            let a = topology.node(e.from).expect("validated");
            let b = topology.node(e.to).expect("validated");
            let stub = a.radius.max(b.radius) + 5.0;
            let chord = b.center - a.center;
            let len = chord.norm();
            if len <= 2.0 * stub {
                return Err(SynthError::Invalid(format!(
                    "edge {}: intersections too close for their radii",
                    e.id
                )));
            }
            let path = match e.shape {
                EdgeShape::Line => Path::new(vec![Piece::Line {
                    a: a.center,
                    b: b.center,
                }]),
                EdgeShape::Arc { bend_deg } => {
                    let phi = bend_deg.to_radians();
                    if !(phi.abs() > 1e-6 && phi.abs() < PI / 2.0) {
                        return Err(SynthError::Invalid(format!(
                            "edge {}: bend must be nonzero and below 90 degrees",
                            e.id
                        )));
                    }
                    let alpha = chord.heading();
                    let p1 = a.center + P::from_heading(alpha + phi) * stub;
                    let p2 = b.center - P::from_heading(alpha - phi) * stub;
                    let c = len - 2.0 * stub * phi.cos();
                    if c <= 0.0 {
                        return Err(SynthError::Invalid(format!(
                            "edge {}: bend too sharp",
                            e.id
                        )));
                    }
                    let radius = c / (2.0 * phi.abs().sin());
                    // The arc turns against the bend, so its center sits on
                    // that side of the first stub.
                    let inward = P::from_heading(alpha + phi - phi.signum() * PI / 2.0);
                    let center = p1 + inward * radius;
                    let start = (p1 - center).heading();
                    Path::new(vec![
                        Piece::Line { a: a.center, b: p1 },
                        Piece::Arc {
                            center,
                            radius,
                            start,
                            sweep: -2.0 * phi,
                        },
                        Piece::Line { a: p2, b: b.center },
                    ])
                }
            };
            paths.insert(e.id, path);
        }
        Ok(Self {
            spec,
            topology,
            paths,
        })
    }

    pub fn edge_path(&self, id: EdgeId) -> Option<&Path> {
        self.paths.get(&id)
    }

    /// Lengths of the road geometry, for routing.
    pub fn edge_lengths(&self) -> BTreeMap<EdgeId, f64> {
        self.paths.iter().map(|(id, p)| (*id, p.length())).collect()
    }

    fn turn_geometry(&self, a: EdgeId, b: EdgeId) -> Option<(P, P, P, f64, f64)> {
        let node = self.topology.node(self.topology.edge(b)?.from)?;
        let (pa, pb) = (&self.paths[&a], &self.paths[&b]);
        let d_in = pa.tangent_at(pa.length());
        let d_out = pb.tangent_at(0.0);
        let beta = wrap_angle(d_out.heading() - d_in.heading());
        Some((node.center, d_in, d_out, beta, node.radius))
    }

    /// Pieces crossing an intersection from tangent point to tangent point.
    fn fillet(&self, a: EdgeId, b: EdgeId) -> Option<Vec<Piece>> {
        let (c, d_in, d_out, beta, radius) = self.turn_geometry(a, b)?;
        if beta.abs() > 170f64.to_radians() {
            return None;
        }
        let t = radius / 2.0;
        let t1 = c - d_in * t;
        let t2 = c + d_out * t;
        if beta.abs() < 1e-9 {
            return Some(vec![Piece::Line { a: t1, b: t2 }]);
        }
        let r = t / (beta.abs() / 2.0).tan();
        let normal = d_in.rotated(beta.signum() * PI / 2.0);
        let center = t1 + normal * r;
        Some(vec![Piece::Arc {
            center,
            radius: r,
            start: (t1 - center).heading(),
            sweep: beta,
        }])
    }

    /// Drive path through the node centers of `route`.
    pub fn route_path(&self, route: &[NodeId]) -> Result<Path, SynthError> {
        let edges = self.topology.route_edges(route)?;
        if edges.is_empty() {
            return Err(SynthError::Invalid("route needs at least one edge".into()));
        }
        let mut pieces = Vec::new();
        for (i, e) in edges.iter().enumerate() {
            let path = &self.paths[e];
            let head = if i > 0 {
                self.topology.node(route[i]).unwrap().radius / 2.0
            } else {
                0.0
            };
            let tail = if i + 1 < edges.len() {
                self.topology.node(route[i + 1]).unwrap().radius / 2.0
            } else {
                0.0
            };
            pieces.extend(path.sub(head, path.length() - tail));
            if i + 1 < edges.len() {
                let f = self.fillet(*e, edges[i + 1]).ok_or_else(|| {
                    SynthError::Invalid(format!("route reverses at node {}", route[i + 1]))
                })?;
                pieces.extend(f);
            }
        }
        Ok(Path::new(pieces))
    }

    /// Dense reference polylines for every edge and every non-reversing
    /// turn. Turns extend 2 m past their intersection disc.
    pub fn truth_polylines(&self, step: f64) -> BTreeMap<SegmentId, Vec<P>> {
        let mut out = BTreeMap::new();
        for (id, p) in &self.paths {
            out.insert(SegmentId::Edge(*id), p.polyline(step));
        }
        for (a, b) in self.topology.pair_edges() {
            let Some(f) = self.fillet(a, b) else { continue };
            let (c, d_in, d_out, _, radius) = self.turn_geometry(a, b).expect("pair exists");
            let reach = radius + 2.0;
            let mut pieces = vec![Piece::Line {
                a: c - d_in * reach,
                b: c - d_in * (radius / 2.0),
            }];
            pieces.extend(f);
            pieces.push(Piece::Line {
                a: c + d_out * (radius / 2.0),
                b: c + d_out * reach,
            });
            out.insert(SegmentId::Turn(a, b), Path::new(pieces).polyline(step));
        }
        out
    }

    /// Speed along `path`: cruise, slowing linearly over 30 m toward each
    /// turn of the route.
    fn speed_profile(&self, route: &[NodeId], path: &Path) -> impl Fn(f64) -> f64 {
        let p = self.spec.params.clone();
        let mut slow = Vec::new();
        let edges = self.topology.route_edges(route).unwrap_or_default();
        let mut s = 0.0;
        for (i, e) in edges.iter().enumerate() {
            let r_head = if i > 0 {
                self.topology.node(route[i]).unwrap().radius / 2.0
            } else {
                0.0
            };
            let r_tail = if i + 1 < edges.len() {
                self.topology.node(route[i + 1]).unwrap().radius / 2.0
            } else {
                0.0
            };
            s += self.paths[e].length() - r_head - r_tail;
            if i + 1 < edges.len() {
                let pieces = self.fillet(*e, edges[i + 1]).unwrap_or_default();
                let f: f64 = pieces.iter().map(Piece::length).sum();
                let (_, _, _, beta, _) = self.turn_geometry(*e, edges[i + 1]).unwrap();
                let share = (beta.abs() / (PI / 2.0)).min(1.0);
                let v =
                    p.cruise_speed + (p.turn_speed.min(p.cruise_speed) - p.cruise_speed) * share;
                slow.push((s + f / 2.0, v));
                s += f;
            }
        }
        let _ = path;
        move |x: f64| {
            let mut v = p.cruise_speed;
            for &(at, vt) in &slow {
                let d = (x - at).abs();
                if d < 30.0 {
                    v = v.min(vt + (p.cruise_speed - vt) * d / 30.0);
                }
            }
            v
        }
    }

    /// Noiseless sample positions of one drive, with timestamps in ms.
    pub fn drive_truth(&self, route: &[NodeId]) -> Result<Vec<(i64, P)>, SynthError> {
        let (path, schedule) = self.schedule(route)?;
        Ok(schedule
            .into_iter()
            .map(|(ms, s)| (ms, path.point_at(s)))
            .collect())
    }

    /// Noiseless poses at the sample times: timestamp, position and heading.
    pub fn drive_truth_poses(&self, route: &[NodeId]) -> Result<Vec<(i64, P, f64)>, SynthError> {
        let (path, schedule) = self.schedule(route)?;
        Ok(schedule
            .into_iter()
            .map(|(ms, s)| (ms, path.point_at(s), path.tangent_at(s).heading()))
            .collect())
    }

    /// Sample times and the distance along the route at each.
    fn schedule(&self, route: &[NodeId]) -> Result<(Path, Vec<(i64, f64)>), SynthError> {
        let path = self.route_path(route)?;
        let speed = self.speed_profile(route, &path);
        // Time as a function of distance, on a fine grid.
        let ds = 0.05;
        let n = (path.length() / ds).ceil() as usize;
        let mut times = Vec::with_capacity(n + 1);
        let mut dist = Vec::with_capacity(n + 1);
        let mut t = 0.0;
        times.push(0.0);
        dist.push(0.0);
        for k in 1..=n {
            let s0 = path.length() * (k - 1) as f64 / n as f64;
            let s1 = path.length() * k as f64 / n as f64;
            t += (s1 - s0) * 0.5 * (1.0 / speed(s0) + 1.0 / speed(s1));
            times.push(t);
            dist.push(s1);
        }
        let end_ms = (t * 1000.0).ceil() as i64;
        let step_ms = 1000.0 / self.spec.params.rate_hz;
        let mut out = Vec::new();
        let mut j = 0;
        let mut k = 0usize;
        loop {
            let ms = (k as f64 * step_ms).round() as i64;
            if ms >= end_ms {
                break;
            }
            let tt = ms as f64 / 1000.0;
            while j + 1 < times.len() - 1 && times[j + 1] < tt {
                j += 1;
            }
            let f = ((tt - times[j]) / (times[j + 1] - times[j])).clamp(0.0, 1.0);
            out.push((ms, dist[j] + (dist[j + 1] - dist[j]) * f));
            k += 1;
        }
        out.push((end_ms, path.length()));
        Ok((path, out))
    }

    /// One noisy drive; `stream` selects an independent noise stream.
    pub fn drive(&self, route: &[NodeId], stream: u64) -> Result<Vec<(i64, P)>, SynthError> {
        let truth = self.drive_truth(route)?;
        let sigma = self.spec.params.sigma;
        if sigma == 0.0 {
            return Ok(truth);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.spec.params.seed);
        rng.set_stream(u64::MAX - stream);
        let noise = Normal::new(0.0, sigma).map_err(|e| SynthError::Invalid(e.to_string()))?;
        Ok(truth
            .into_iter()
            .map(|(ms, p)| {
                (
                    ms,
                    p + P::new(noise.sample(&mut rng), noise.sample(&mut rng)),
                )
            })
            .collect())
    }
}

/// World, driving plan and one trace per plan leg.
#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub world: SynthWorld,
    pub plan: RoutePlan<f64>,
    /// Per leg: the driven route (see [`generate`]), timestamps (ms) and
    /// noisy planar positions.
    pub drives: Vec<Drive>,
}

/// Driven node route and its timestamped (ms) positions.
pub type Drive = (Vec<NodeId>, Vec<(i64, P)>);

impl SynthOutput {
    pub fn route_traces(&self) -> Vec<RouteTrace<f64>> {
        self.drives
            .iter()
            .map(|(route, rows)| RouteTrace {
                route: route.clone(),
                samples: rows
                    .iter()
                    .map(|(ms, p)| TimedSample::new(*ms as f64 / 1000.0, *p))
                    .collect(),
            })
            .collect()
    }
}

/// Nodes of leg `i`, preceded by the node the driver came from when the
/// previous leg ended here, so the crossing between legs is recorded.
/// A U-turn between legs is not prepended.
fn approach_route(plan: &RoutePlan<f64>, i: usize) -> Vec<NodeId> {
    let leg = &plan.legs[i].nodes;
    let prev = i
        .checked_sub(1)
        .and_then(|j| plan.legs[j].nodes.iter().rev().nth(1).copied());
    match prev {
        Some(p) if leg.get(1) != Some(&p) => {
            std::iter::once(p).chain(leg.iter().copied()).collect()
        }
        _ => leg.clone(),
    }
}

/// Plans coverage drives over the world and simulates every leg. Each
/// trace starts on the last edge of the previous leg.
pub fn generate(spec: SynthSpec) -> Result<SynthOutput, SynthError> {
    let world = SynthWorld::new(spec)?;
    let p = &world.spec.params;
    let cfg = CoverageConfig {
        seed: p.seed,
        limit: p.limit,
        runs: p.runs,
        min_crossings: p.min_crossings,
    };
    let outcome = simulate_coverage(&world.topology, &world.edge_lengths(), &cfg)?;
    let drives = outcome
        .plan
        .legs
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let route = approach_route(&outcome.plan, i);
            Ok((route.clone(), world.drive(&route, i as u64)?))
        })
        .collect::<Result<Vec<_>, SynthError>>()?;
    Ok(SynthOutput {
        world,
        plan: outcome.plan,
        drives,
    })
}

/// Strongly connected random graph: nodes on a jittered grid joined by a
/// random directed cycle, plus random extra edges between nearby nodes.
pub fn random_topology(
    nodes: usize,
    edges: usize,
    seed: u64,
) -> Result<GraphTopology<f64>, SynthError> {
    if nodes < 2 || edges < nodes || edges > nodes * (nodes - 1) {
        return Err(SynthError::Invalid(format!(
            "cannot build {edges} edges on {nodes} nodes"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = (nodes as f64).sqrt().ceil() as usize;
    let spacing = 400.0;
    let list: Vec<Node<f64>> = (0..nodes)
        .map(|i| Node {
            id: NodeId(i as u32 + 1),
            center: P::new(
                (i % side) as f64 * spacing + rng.random_range(-80.0..80.0),
                (i / side) as f64 * spacing + rng.random_range(-80.0..80.0),
            ),
            radius: 15.0,
        })
        .collect();
    let mut order: Vec<usize> = (0..nodes).collect();
    for i in (1..nodes).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut pairs: Vec<(usize, usize)> = (0..nodes)
        .map(|k| (order[k], order[(k + 1) % nodes]))
        .collect();
    let mut candidates: Vec<(usize, usize)> = (0..nodes)
        .flat_map(|a| (0..nodes).map(move |b| (a, b)))
        .filter(|(a, b)| a != b && !pairs.contains(&(*a, *b)))
        .collect();
    candidates.sort_by(|x, y| {
        let dx = list[x.0].center.distance(&list[x.1].center);
        let dy = list[y.0].center.distance(&list[y.1].center);
        dx.total_cmp(&dy).then(x.cmp(y))
    });
    // Pick randomly among the nearest remaining candidates.
    while pairs.len() < edges {
        let window = candidates.len().min(3 * nodes);
        let k = rng.random_range(0..window);
        pairs.push(candidates.remove(k));
    }
    let list_edges = pairs
        .iter()
        .enumerate()
        .map(|(i, (a, b))| Edge {
            id: EdgeId(i as u32 + 1),
            from: list[*a].id,
            to: list[*b].id,
        })
        .collect();
    Ok(GraphTopology::new(list, list_edges)?)
}
