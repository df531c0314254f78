use std::collections::BTreeMap;

use crate::geo::TimedSample;
use crate::geom::PlanarPoint;
use crate::polyfit::{fit_pinned, fit_points, Curve2D, Pin};
use crate::scalar::{from_usize, lit, Real};

use super::topology::{EdgeId, GraphTopology, NodeId};
use super::{validate_segment_id, MapConfig, MapError, MapSegment, SegmentId};

/// A driven trace together with the node sequence it declares.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteTrace<T> {
    pub route: Vec<NodeId>,
    pub samples: Vec<TimedSample<T>>,
}

/// A sample placed into a segment bucket.
///
/// `d` is the travelled distance from the first sample of this pass inside
/// the segment. Samples before a trace leaves its first intersection, or
/// after it enters its last one, have no segment of their own; they go to
/// the adjacent edge as `overhang`, with negative `d` before the edge
/// and `d` past the edge exit after it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BucketPoint<T> {
    pub d: T,
    pub p: PlanarPoint<T>,
    /// Index of the trace the sample came from.
    pub pass: usize,
    pub overhang: bool,
}

pub type Buckets<T> = BTreeMap<SegmentId, Vec<BucketPoint<T>>>;

/// `clamp(min + floor(length / meters_per_degree), min, max)`.
pub fn degree_for_length<T: Real>(length: T, config: &MapConfig<T>) -> usize {
    let extra = (length / config.meters_per_degree)
        .floor()
        .to_usize()
        .unwrap_or(0);
    (config.min_degree + extra).clamp(config.min_degree, config.max_degree)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Lead,
    OnEdge(usize),
    OnTurn(usize),
    Tail,
}

/// Places every sample of every trace into exactly one segment bucket.
pub fn bucket_samples<T: Real>(
    traces: &[RouteTrace<T>],
    topology: &GraphTopology<T>,
    config: &MapConfig<T>,
) -> Result<Buckets<T>, MapError> {
    let mut buckets: Buckets<T> = BTreeMap::new();
    for (pass, trace) in traces.iter().enumerate() {
        bucket_trace(pass, trace, topology, config, &mut buckets)?;
    }
    Ok(buckets)
}

fn bucket_trace<T: Real>(
    pass: usize,
    trace: &RouteTrace<T>,
    topology: &GraphTopology<T>,
    config: &MapConfig<T>,
    buckets: &mut Buckets<T>,
) -> Result<(), MapError> {
    let mismatch = |reason: String| MapError::RouteMismatch {
        trace: pass,
        reason,
    };
    if trace.route.len() < 2 {
        return Err(mismatch("route needs at least two nodes".into()));
    }
    let edges = topology
        .route_edges(&trace.route)
        .map_err(|e| mismatch(e.to_string()))?;
    for (i, w) in trace.samples.windows(2).enumerate() {
        let gap = w[0].p.distance(&w[1].p);
        if !(gap <= config.max_sample_gap) {
            return Err(MapError::TraceCorrupt {
                trace: pass,
                sample: i + 1,
                gap: gap.to_f64().unwrap_or(f64::NAN),
            });
        }
    }

    let inside = |k: usize, p: &PlanarPoint<T>| -> bool {
        let n = topology.node(trace.route[k]).expect("validated route");
        p.distance(&n.center) <= n.radius
    };
    let last = trace.route.len() - 1;
    let segment_of = |phase: Phase| -> SegmentId {
        match phase {
            Phase::Lead => SegmentId::Edge(edges[0]),
            Phase::OnEdge(i) => SegmentId::Edge(edges[i]),
            Phase::OnTurn(k) => SegmentId::Turn(edges[k - 1], edges[k]),
            Phase::Tail => SegmentId::Edge(edges[last - 1]),
        }
    };

    let mut phase = Phase::Lead;
    let mut seen_first = false;
    let mut assigned: Vec<(Phase, T)> = Vec::with_capacity(trace.samples.len());
    let mut run_d = T::zero();
    let mut prev: Option<PlanarPoint<T>> = None;

    for s in &trace.samples {
        let before = phase;
        loop {
            let next = match phase {
                Phase::Lead => {
                    if inside(0, &s.p) {
                        seen_first = true;
                        None
                    } else if seen_first {
                        Some(Phase::OnEdge(0))
                    } else {
                        None
                    }
                }
                Phase::OnEdge(i) => {
                    if inside(i + 1, &s.p) {
                        Some(if i + 1 == last {
                            Phase::Tail
                        } else {
                            Phase::OnTurn(i + 1)
                        })
                    } else {
                        None
                    }
                }
                Phase::OnTurn(k) => {
                    if inside(k, &s.p) {
                        None
                    } else {
                        Some(Phase::OnEdge(k))
                    }
                }
                Phase::Tail => None,
            };
            match next {
                Some(p) => phase = p,
                None => break,
            }
        }
        let step = prev.map(|q| q.distance(&s.p)).unwrap_or_else(T::zero);
        if phase != before {
            // Tail keeps measuring along the final edge; every other new
            // segment starts at zero.
            let continues = phase == Phase::Tail && before == Phase::OnEdge(last - 1);
            run_d = if continues { run_d + step } else { T::zero() };
        } else {
            run_d = run_d + step;
        }
        assigned.push((phase, run_d));
        prev = Some(s.p);
    }

    if !seen_first {
        return Err(mismatch(format!(
            "trace never enters its first node {}",
            trace.route[0]
        )));
    }
    if phase != Phase::Tail {
        return Err(mismatch(format!(
            "trace ends before reaching its final node {}",
            trace.route[last]
        )));
    }

    // Lead samples: distance measured backwards from the first sample after
    // leaving the first intersection.
    let lead_count = assigned
        .iter()
        .take_while(|(ph, _)| *ph == Phase::Lead)
        .count();
    let mut back = T::zero();
    for i in (0..lead_count).rev() {
        back = back - trace.samples[i].p.distance(&trace.samples[i + 1].p);
        assigned[i].1 = back;
    }

    for (s, (ph, d)) in trace.samples.iter().zip(assigned) {
        buckets
            .entry(segment_of(ph))
            .or_default()
            .push(BucketPoint {
                d,
                p: s.p,
                pass,
                overhang: matches!(ph, Phase::Lead | Phase::Tail),
            });
    }
    Ok(())
}

/// Fits one arc-length parameterised curve per bucket.
pub fn fit_segments<T: Real>(
    buckets: &Buckets<T>,
    topology: &GraphTopology<T>,
    config: &MapConfig<T>,
) -> Result<BTreeMap<SegmentId, MapSegment<T>>, MapError> {
    let mut out = BTreeMap::new();
    for (id, points) in buckets {
        validate_segment_id(topology, *id)?;
        let length = points
            .iter()
            .filter(|b| !b.overhang)
            .map(|b| b.d)
            .fold(T::neg_infinity(), T::max);
        let degree = degree_for_length(length.max(T::zero()), config);
        let needed = config.coverage_factor * (degree + 1);
        if points.len() < needed || !(length > T::zero()) {
            return Err(MapError::InsufficientData {
                segment: *id,
                points: points.len(),
                needed,
            });
        }
        let params: Vec<T> = points.iter().map(|b| b.d).collect();
        let pts: Vec<PlanarPoint<T>> = points.iter().map(|b| b.p).collect();
        let raw = fit_points(&params, &pts, degree).map_err(|source| MapError::Fit {
            segment: *id,
            source,
        })?;
        let seg = arc_length_segment(*id, &raw, T::zero(), length, degree)?;
        out.insert(*id, seg);
    }
    Ok(out)
}

/// Re-expresses `curve` over `[d0, d1]` as a curve of arc length with the
/// same degree, endpoints held fixed. A polynomial cannot be an exact
/// arc-length parameterisation, so the resampling is repeated until the
/// 1 m polyline spacing is within 1 %.
fn arc_length_segment<T: Real>(
    id: SegmentId,
    curve: &Curve2D<T>,
    d0: T,
    d1: T,
    degree: usize,
) -> Result<MapSegment<T>, MapError> {
    let mut seg = reparameterize(id, curve, d0, d1, degree)?;
    for _ in 0..4 {
        let worst = seg
            .polyline
            .windows(2)
            .map(|w| (w[0].distance(&w[1]) - T::one()).abs())
            .fold(T::zero(), T::max);
        if worst <= lit(0.01) {
            break;
        }
        let c = seg.curve.clone();
        seg = reparameterize(id, &c, T::zero(), seg.length, degree)?;
    }
    Ok(seg)
}

fn reparameterize<T: Real>(
    id: SegmentId,
    curve: &Curve2D<T>,
    d0: T,
    d1: T,
    degree: usize,
) -> Result<MapSegment<T>, MapError> {
    let fit_err = |source| MapError::Fit {
        segment: id,
        source,
    };
    let steps = ((d1 - d0) / lit::<T>(0.05))
        .ceil()
        .to_usize()
        .unwrap_or(0)
        .clamp(200, 200_000);
    let h = (d1 - d0) / from_usize::<T>(steps);
    let mut params = Vec::with_capacity(steps + 1);
    let mut cum = Vec::with_capacity(steps + 1);
    let mut prev = curve.point_at(&d0);
    let mut acc = T::zero();
    params.push(d0);
    cum.push(acc);
    for k in 1..=steps {
        let s = if k == steps {
            d1
        } else {
            d0 + h * from_usize::<T>(k)
        };
        let p = curve.point_at(&s);
        acc = acc + p.distance(&prev);
        params.push(s);
        cum.push(acc);
        prev = p;
    }
    let total = acc;
    if !(total > lit(1e-6)) {
        return Err(MapError::InvalidInput(format!("{id}: degenerate curve")));
    }
    let intervals = total.ceil().to_usize().unwrap_or(1).max(2 * (degree + 1));
    let mut arc = Vec::with_capacity(intervals + 1);
    let mut pts = Vec::with_capacity(intervals + 1);
    let mut j = 0;
    for k in 0..=intervals {
        let target = total * from_usize::<T>(k) / from_usize::<T>(intervals);
        while j + 1 < cum.len() - 1 && cum[j + 1] < target {
            j += 1;
        }
        let span = cum[j + 1] - cum[j];
        let f = if span > T::zero() {
            ((target - cum[j]) / span).max(T::zero()).min(T::one())
        } else {
            T::zero()
        };
        let s = params[j] + (params[j + 1] - params[j]) * f;
        arc.push(target);
        pts.push(curve.point_at(&s));
    }
    let pins = [
        Pin {
            param: T::zero(),
            point: curve.point_at(&d0),
        },
        Pin {
            param: total,
            point: curve.point_at(&d1),
        },
    ];
    let fitted = fit_pinned(&arc, &pts, degree, &pins).map_err(fit_err)?;
    MapSegment::new(id, fitted, total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Junction {
    EdgeStart(EdgeId),
    EdgeEnd(EdgeId),
}

fn junctions(id: SegmentId) -> (Junction, Junction) {
    match id {
        SegmentId::Edge(e) => (Junction::EdgeStart(e), Junction::EdgeEnd(e)),
        SegmentId::Turn(a, b) => (Junction::EdgeEnd(a), Junction::EdgeStart(b)),
    }
}

/// Single neighbor-aware refit pass.
///
/// Every segment is refitted against its own 1 m samples plus the last
/// `delta` meters of each predecessor (placed at `d in [-delta, 0)`) and the
/// first `delta` meters of each successor (at `d in (length, length + delta]`).
/// Segments meeting at a junction are all pinned to the mean of their
/// pre-refit endpoints there, which closes the gaps exactly. A side without
/// neighbors is refitted unpinned. All refits read the pre-refit state, so the
/// result does not depend on iteration order.
pub fn refit_with_neighbors<T: Real>(
    segments: &BTreeMap<SegmentId, MapSegment<T>>,
    config: &MapConfig<T>,
) -> Result<BTreeMap<SegmentId, MapSegment<T>>, MapError> {
    let delta = config.delta;
    if !(delta > T::zero()) || !delta.is_finite() {
        return Err(MapError::InvalidInput(format!(
            "refit buffer must be positive, got {delta}"
        )));
    }

    // Junction -> (segments ending there, segments starting there).
    let mut members: BTreeMap<Junction, (Vec<SegmentId>, Vec<SegmentId>)> = BTreeMap::new();
    for id in segments.keys() {
        let (start, end) = junctions(*id);
        members.entry(start).or_default().1.push(*id);
        members.entry(end).or_default().0.push(*id);
    }
    let pin_at = |j: Junction| -> Option<PlanarPoint<T>> {
        let (ending, starting) = members.get(&j)?;
        if ending.len() + starting.len() < 2 || ending.is_empty() || starting.is_empty() {
            return None;
        }
        let pts: Vec<PlanarPoint<T>> = ending
            .iter()
            .map(|s| segments[s].end())
            .chain(starting.iter().map(|s| segments[s].start()))
            .collect();
        let n = from_usize::<T>(pts.len());
        let sum = pts.iter().fold(PlanarPoint::origin(), |a, p| a + *p);
        Some(PlanarPoint::new(sum.x / n, sum.y / n))
    };

    let mut out = BTreeMap::new();
    for (id, seg) in segments {
        let (start_j, end_j) = junctions(*id);
        let length = seg.length;
        let mut params = Vec::new();
        let mut pts = Vec::new();
        for (k, p) in seg.polyline.iter().enumerate() {
            params.push(from_usize::<T>(k));
            pts.push(*p);
        }
        params.push(length);
        pts.push(seg.end());

        if let Some((ending, _)) = members.get(&start_j) {
            for pred in ending {
                let ps = &segments[pred];
                for (k, p) in ps.polyline.iter().enumerate() {
                    let d = from_usize::<T>(k);
                    if d >= ps.length - delta && d < ps.length {
                        params.push(d - ps.length);
                        pts.push(*p);
                    }
                }
            }
        }
        if let Some((_, starting)) = members.get(&end_j) {
            for succ in starting {
                let ss = &segments[succ];
                for (k, p) in ss.polyline.iter().enumerate().skip(1) {
                    let d = from_usize::<T>(k);
                    if d <= delta {
                        params.push(length + d);
                        pts.push(*p);
                    }
                }
            }
        }

        let mut pins = Vec::new();
        if let Some(p) = pin_at(start_j) {
            pins.push(Pin {
                param: T::zero(),
                point: p,
            });
        }
        if let Some(p) = pin_at(end_j) {
            pins.push(Pin {
                param: length,
                point: p,
            });
        }
        let degree = seg.curve.degree().max(pins.len());
        let curve = fit_pinned(&params, &pts, degree, &pins).map_err(|source| MapError::Fit {
            segment: *id,
            source,
        })?;
        out.insert(
            *id,
            arc_length_segment(*id, &curve, T::zero(), length, degree)?,
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roadmap::topology::{Edge, Node};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn pt(x: f64, y: f64) -> PlanarPoint<f64> {
        PlanarPoint::new(x, y)
    }

    /// Nodes 1 (0,0), 2 (0,100), 3 (100,100); edges 1->2 (e10), 2->3 (e11),
    /// 2->1 (e12). Radius 10 m.
    fn l_topology() -> GraphTopology<f64> {
        let node = |id, x, y| Node {
            id: NodeId(id),
            center: pt(x, y),
            radius: 10.0,
        };
        let edge = |id, from, to| Edge {
            id: EdgeId(id),
            from: NodeId(from),
            to: NodeId(to),
        };
        GraphTopology::new(
            vec![
                node(1, 0.0, 0.0),
                node(2, 0.0, 100.0),
                node(3, 100.0, 100.0),
            ],
            vec![edge(10, 1, 2), edge(11, 2, 3), edge(12, 2, 1)],
        )
        .unwrap()
    }

    fn l_path(step: f64) -> Vec<PlanarPoint<f64>> {
        let mut v = Vec::new();
        let mut y = 0.0;
        while y < 100.0 {
            v.push(pt(0.0, y));
            y += step;
        }
        let mut x = 0.0;
        while x <= 100.0 + 1e-9 {
            v.push(pt(x, 100.0));
            x += step;
        }
        v
    }

    fn trace(route: &[u32], pts: Vec<PlanarPoint<f64>>) -> RouteTrace<f64> {
        RouteTrace {
            route: route.iter().map(|&n| NodeId(n)).collect(),
            samples: pts
                .into_iter()
                .enumerate()
                .map(|(i, p)| TimedSample::new(i as f64, p))
                .collect(),
        }
    }

    #[test]
    fn straight_trace_distances() {
        let t = l_topology();
        let pts: Vec<_> = (0..=100).map(|y| pt(0.0, y as f64)).collect();
        let b = bucket_samples(&[trace(&[1, 2], pts)], &t, &MapConfig::default()).unwrap();
        let e: Vec<_> = b[&SegmentId::Edge(EdgeId(10))]
            .iter()
            .filter(|p| !p.overhang)
            .map(|p| p.d)
            .collect();
        assert_eq!(e.len(), 79); // y = 11 ..= 89
        for (k, d) in e.iter().enumerate() {
            assert!((d - k as f64).abs() < 1e-9);
        }
        let lead: Vec<_> = b[&SegmentId::Edge(EdgeId(10))]
            .iter()
            .filter(|p| p.overhang && p.d < 0.0)
            .collect();
        assert_eq!(lead.len(), 11);
        assert_eq!(lead[0].d, -11.0);
    }

    #[test]
    fn turn_membership_matches_disc_classifier() {
        let t = l_topology();
        let pts = l_path(2.5);
        let tr = trace(&[1, 2, 3], pts.clone());
        let b = bucket_samples(&[tr], &t, &MapConfig::default()).unwrap();
        let total: usize = b.values().map(Vec::len).sum();
        assert_eq!(total, pts.len());
        // Brute-force classifier: disc of node 2 -> turn, everything else on
        // an edge (or overhang at the route ends).
        let turn = &b[&SegmentId::Turn(EdgeId(10), EdgeId(11))];
        let expected: Vec<_> = pts
            .iter()
            .filter(|p| p.distance(&pt(0.0, 100.0)) <= 10.0)
            .copied()
            .collect();
        assert_eq!(turn.iter().map(|b| b.p).collect::<Vec<_>>(), expected);
        for seg in [SegmentId::Edge(EdgeId(10)), SegmentId::Edge(EdgeId(11))] {
            for bp in &b[&seg] {
                assert!(bp.p.distance(&pt(0.0, 100.0)) > 10.0);
                if !bp.overhang {
                    assert!(bp.p.distance(&pt(0.0, 0.0)) > 10.0);
                    assert!(bp.p.distance(&pt(100.0, 100.0)) > 10.0);
                }
            }
        }
        // Per pass, distances strictly increase within every bucket.
        for pts in b.values() {
            for w in pts.windows(2) {
                assert!(w[1].d > w[0].d);
            }
        }
    }

    #[test]
    fn bucketing_errors() {
        let t = l_topology();
        let cfg = MapConfig::default();
        let far: Vec<_> = (0..20).map(|i| pt(500.0, i as f64)).collect();
        assert!(matches!(
            bucket_samples(&[trace(&[1, 2], far)], &t, &cfg),
            Err(MapError::RouteMismatch { .. })
        ));
        let jump = vec![pt(0.0, 0.0), pt(0.0, 5.0), pt(0.0, 80.0), pt(0.0, 100.0)];
        assert!(matches!(
            bucket_samples(&[trace(&[1, 2], jump)], &t, &cfg),
            Err(MapError::TraceCorrupt { sample: 2, .. })
        ));
        let short: Vec<_> = (0..50).map(|y| pt(0.0, y as f64)).collect();
        assert!(matches!(
            bucket_samples(&[trace(&[1, 2], short)], &t, &cfg),
            Err(MapError::RouteMismatch { .. })
        ));
        assert!(matches!(
            bucket_samples(&[trace(&[1, 3], l_path(1.0))], &t, &cfg),
            Err(MapError::RouteMismatch { .. })
        ));
    }

    #[test]
    fn straight_bucket_fits_the_line() {
        let t = l_topology();
        let pts: Vec<_> = (0..=100).map(|y| pt(0.0, y as f64)).collect();
        let cfg = MapConfig::default();
        let b = bucket_samples(&[trace(&[1, 2], pts)], &t, &cfg).unwrap();
        let segs = fit_segments(&b, &t, &cfg).unwrap();
        let s = &segs[&SegmentId::Edge(EdgeId(10))];
        assert!((s.length - 78.0).abs() < 1e-6);
        assert_eq!(s.polyline.len(), 79);
        for (k, p) in s.polyline.iter().enumerate() {
            assert!(p.x.abs() < 1e-6);
            assert!((p.y - 11.0 - k as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn noisy_arc_bucket_follows_the_arc() {
        // Quarter circle of radius 30 m around (0, 0), sigma 1 m, 400 points.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let r = 30.0;
        let n = 400;
        let truth = |a: f64| pt(r * a.cos(), r * a.sin());
        let arc_len = r * std::f64::consts::FRAC_PI_2;
        let mut bucket = Vec::new();
        for pass in 0..4 {
            let mut d = 0.0;
            let mut prev: Option<PlanarPoint<f64>> = None;
            for k in 0..n / 4 {
                let a = std::f64::consts::FRAC_PI_2 * k as f64 / (n / 4 - 1) as f64;
                let p = truth(a) + pt(noise.sample(&mut rng), noise.sample(&mut rng));
                if let Some(q) = prev {
                    d += p.distance(&q);
                }
                prev = Some(p);
                bucket.push(BucketPoint {
                    d,
                    p,
                    pass,
                    overhang: false,
                });
            }
        }
        let mut buckets = Buckets::new();
        buckets.insert(SegmentId::Edge(EdgeId(10)), bucket);
        let segs = fit_segments(&buckets, &l_topology(), &MapConfig::default()).unwrap();
        let s = &segs[&SegmentId::Edge(EdgeId(10))];
        let mean: f64 =
            s.polyline.iter().map(|p| (p.norm() - r).abs()).sum::<f64>() / s.polyline.len() as f64;
        assert!(mean < 0.5, "mean {mean}");
        // Arc-length parameterisation: 1 m spacing within 5 %.
        for w in s.polyline.windows(2) {
            assert!((w[0].distance(&w[1]) - 1.0).abs() < 0.05);
        }
        assert!(s.length > 0.8 * arc_len);
    }

    #[test]
    fn starved_or_empty_bucket() {
        let mut buckets = Buckets::new();
        buckets.insert(SegmentId::Turn(EdgeId(10), EdgeId(11)), Vec::new());
        assert!(matches!(
            fit_segments(&buckets, &l_topology(), &MapConfig::default()),
            Err(MapError::InsufficientData {
                segment: SegmentId::Turn(EdgeId(10), EdgeId(11)),
                ..
            })
        ));
        let few: Vec<_> = (0..5)
            .map(|k| BucketPoint {
                d: k as f64,
                p: pt(0.0, k as f64),
                pass: 0,
                overhang: false,
            })
            .collect();
        buckets.clear();
        buckets.insert(SegmentId::Edge(EdgeId(10)), few);
        assert!(matches!(
            fit_segments(&buckets, &l_topology(), &MapConfig::default()),
            Err(MapError::InsufficientData {
                points: 5,
                needed: 8,
                ..
            })
        ));
    }

    fn straight_segment(
        id: SegmentId,
        a: PlanarPoint<f64>,
        b: PlanarPoint<f64>,
    ) -> MapSegment<f64> {
        let len = a.distance(&b);
        let dir = (b - a) * (1.0 / len);
        let c = Curve2D::new(vec![dir.x, a.x], vec![dir.y, a.y], (0.0, len)).unwrap();
        MapSegment::new(id, c, len).unwrap()
    }

    #[test]
    fn refit_closes_constructed_gap() {
        let e = SegmentId::Edge(EdgeId(10));
        let t = SegmentId::Turn(EdgeId(10), EdgeId(11));
        let mut segs = BTreeMap::new();
        segs.insert(e, straight_segment(e, pt(0.0, 0.0), pt(0.0, 100.0)));
        segs.insert(t, straight_segment(t, pt(0.0, 102.0), pt(0.0, 202.0)));
        let out = refit_with_neighbors(&segs, &MapConfig::default()).unwrap();
        let gap = out[&e].end().distance(&out[&t].start());
        assert!(gap <= 0.1, "gap {gap}");
        for w in out[&e].polyline.windows(2) {
            assert!((w[0].distance(&w[1]) - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn refit_is_nearly_idempotent_on_continuous_input() {
        let e = SegmentId::Edge(EdgeId(10));
        let t = SegmentId::Turn(EdgeId(10), EdgeId(11));
        let f = SegmentId::Edge(EdgeId(11));
        let mut segs = BTreeMap::new();
        segs.insert(e, straight_segment(e, pt(0.0, 10.0), pt(0.0, 90.0)));
        // Quarter arc from (0,90) to (10,100) approximated by a dense fit.
        let arc: Vec<_> = (0..=100)
            .map(|k| {
                let a = std::f64::consts::FRAC_PI_2 * k as f64 / 100.0;
                pt(10.0 - 10.0 * a.cos(), 90.0 + 10.0 * a.sin())
            })
            .collect();
        let ds: Vec<f64> = (0..=100)
            .map(|k| 5.0 * std::f64::consts::PI * k as f64 / 100.0)
            .collect();
        let c = fit_points(&ds, &arc, 5).unwrap();
        segs.insert(t, MapSegment::new(t, c, *ds.last().unwrap()).unwrap());
        segs.insert(f, straight_segment(f, pt(10.0, 100.0), pt(90.0, 100.0)));
        let out = refit_with_neighbors(&segs, &MapConfig::default()).unwrap();
        for id in [e, t, f] {
            for (a, b) in segs[&id].polyline.iter().zip(&out[&id].polyline) {
                assert!(a.distance(b) <= 0.2, "{id}: {a:?} vs {b:?}");
            }
        }
        assert!(out[&e].end().distance(&out[&t].start()) < 1e-9);
        assert!(out[&t].end().distance(&out[&f].start()) < 1e-9);
    }

    #[test]
    fn refit_rejects_non_positive_delta() {
        let cfg = MapConfig {
            delta: 0.0,
            ..MapConfig::default()
        };
        assert!(matches!(
            refit_with_neighbors(&BTreeMap::new(), &cfg),
            Err(MapError::InvalidInput(_))
        ));
    }

    #[test]
    fn degree_schedule() {
        let cfg = MapConfig::<f64>::default();
        assert_eq!(degree_for_length(10.0, &cfg), 3);
        assert_eq!(degree_for_length(75.0, &cfg), 4);
        assert_eq!(degree_for_length(449.0, &cfg), 8);
        assert_eq!(degree_for_length(5000.0, &cfg), 9);
    }
}
