//! Shortest routes over the intersection graph and the coverage simulation
//! that picks a driving plan.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::roadmap::{EdgeId, GraphTopology, NodeId};
use crate::scalar::{lit, Real};

pub type EdgeLengths<T> = BTreeMap<EdgeId, T>;
pub type PairCounts = BTreeMap<(EdgeId, EdgeId), usize>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RoutingError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("source and destination are both {0}")]
    SameNode(NodeId),
    #[error("edge {edge} has no positive finite length")]
    BadLength { edge: EdgeId },
    #[error("no route from {from} to {to}")]
    NoRoute { from: NodeId, to: NodeId },
    #[error("coverage impossible: {} unreachable node pairs, first {:?}", .unreachable.len(), .unreachable.first())]
    CoverageImpossible { unreachable: Vec<(NodeId, NodeId)> },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route<T> {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
    pub length: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutePlan<T> {
    pub legs: Vec<Route<T>>,
    pub total_length: T,
    pub pair_edge_counts: PairCounts,
}

impl<T: Real> RoutePlan<T> {
    pub fn empty() -> Self {
        Self {
            legs: Vec::new(),
            total_length: T::zero(),
            pair_edge_counts: PairCounts::new(),
        }
    }

    /// Edges of all legs in driving order.
    pub fn drive(&self) -> Vec<EdgeId> {
        self.legs
            .iter()
            .flat_map(|l| l.edges.iter().copied())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageConfig<T> {
    pub seed: u64,
    /// Distance budget of one simulated drive, meters.
    pub limit: T,
    pub runs: usize,
    pub min_crossings: usize,
}

impl<T: Real> Default for CoverageConfig<T> {
    fn default() -> Self {
        Self {
            seed: 0,
            limit: lit(350_000.0),
            runs: 1000,
            min_crossings: 3,
        }
    }
}

/// Selected plan and why it won.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageOutcome<T> {
    pub plan: RoutePlan<T>,
    /// Index of the winning run.
    pub run: usize,
    /// U-turn-free pair edges of the topology crossed fewer than
    /// `min_crossings` times.
    pub under_crossed: usize,
}

/// Straight center-to-center length of every edge.
pub fn chord_lengths<T: Real>(topology: &GraphTopology<T>) -> EdgeLengths<T> {
    topology
        .edges()
        .iter()
        .filter_map(|e| topology.chord_length(e.id).map(|l| (e.id, l)))
        .collect()
}

/// Dense view of the graph used by the searches.
struct Graph<T> {
    ids: Vec<NodeId>,
    /// Outgoing `(target index, edge, length)` ordered by target id.
    out: Vec<Vec<(usize, EdgeId, T)>>,
    /// Incoming `(source index, length)`.
    inc: Vec<Vec<(usize, T)>>,
}

impl<T: Real> Graph<T> {
    fn new(topology: &GraphTopology<T>, lengths: &EdgeLengths<T>) -> Result<Self, RoutingError> {
        let mut ids: Vec<NodeId> = topology.nodes().iter().map(|n| n.id).collect();
        ids.sort();
        let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let mut out = vec![Vec::new(); ids.len()];
        let mut inc = vec![Vec::new(); ids.len()];
        for e in topology.edges() {
            let len = lengths.get(&e.id).copied().unwrap_or_else(T::nan);
            if !(len > T::zero()) || !len.is_finite() {
                return Err(RoutingError::BadLength { edge: e.id });
            }
            let (a, b) = (index[&e.from], index[&e.to]);
            out[a].push((b, e.id, len));
            inc[b].push((a, len));
        }
        for o in &mut out {
            o.sort_by_key(|(b, ..)| ids[*b]);
        }
        Ok(Self { ids, out, inc })
    }

    fn index_of(&self, id: NodeId) -> Result<usize, RoutingError> {
        self.ids
            .binary_search(&id)
            .map_err(|_| RoutingError::UnknownNode(id))
    }

    /// Distance from every node to `dst`.
    fn distances_to(&self, dst: usize) -> Vec<T> {
        let mut dist = vec![T::infinity(); self.ids.len()];
        dist[dst] = T::zero();
        let mut heap = BinaryHeap::new();
        heap.push(Entry {
            cost: T::zero(),
            node: dst,
        });
        while let Some(Entry { cost, node }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            for &(src, len) in &self.inc[node] {
                let c = cost + len;
                if c < dist[src] {
                    dist[src] = c;
                    heap.push(Entry { cost: c, node: src });
                }
            }
        }
        dist
    }

    /// Lexicographically smallest shortest path, given distances to `dst`.
    fn trace(&self, src: usize, dst: usize, dist: &[T]) -> Option<Route<T>> {
        if !dist[src].is_finite() {
            return None;
        }
        let tol = lit::<T>(1e-9);
        let mut nodes = vec![self.ids[src]];
        let mut edges = Vec::new();
        let mut length = T::zero();
        let mut at = src;
        while at != dst {
            let slack = tol * (T::one() + dist[at]);
            let &(next, edge, len) = self.out[at]
                .iter()
                .find(|(b, _, len)| (*len + dist[*b] - dist[at]).abs() <= slack)?;
            nodes.push(self.ids[next]);
            edges.push(edge);
            length = length + len;
            at = next;
        }
        Some(Route {
            nodes,
            edges,
            length,
        })
    }
}

#[derive(PartialEq)]
struct Entry<T> {
    cost: T,
    node: usize,
}

impl<T: PartialOrd> Eq for Entry<T> {}

impl<T: PartialOrd> Ord for Entry<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl<T: PartialOrd> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-length directed route; among equal lengths (within 1e-9
/// relative) the lexicographically smallest node sequence wins.
pub fn shortest_route<T: Real>(
    topology: &GraphTopology<T>,
    lengths: &EdgeLengths<T>,
    src: NodeId,
    dst: NodeId,
) -> Result<Route<T>, RoutingError> {
    let g = Graph::new(topology, lengths)?;
    let (s, d) = (g.index_of(src)?, g.index_of(dst)?);
    if s == d {
        return Err(RoutingError::SameNode(src));
    }
    let dist = g.distances_to(d);
    g.trace(s, d, &dist)
        .ok_or(RoutingError::NoRoute { from: src, to: dst })
}

/// Counts consecutive edge pairs of the whole drive, across leg boundaries.
pub fn pair_edge_counts<T>(plan: &RoutePlan<T>) -> PairCounts
where
    T: Real,
{
    let mut counts = PairCounts::new();
    let drive = plan.drive();
    for w in drive.windows(2) {
        *counts.entry((w[0], w[1])).or_default() += 1;
    }
    counts
}

/// Runs `runs` independent drives and keeps the one leaving the fewest
/// pair edges under-crossed; ties go to fewer legs, then to the lower run.
///
/// Run `k` draws from a ChaCha8 stream seeded with `seed` on stream `k`, so
/// each run is reproducible on its own.
#[allow(clippy::needless_range_loop)]
pub fn simulate_coverage<T: Real>(
    topology: &GraphTopology<T>,
    lengths: &EdgeLengths<T>,
    config: &CoverageConfig<T>,
) -> Result<CoverageOutcome<T>, RoutingError> {
    if config.runs == 0 {
        return Err(RoutingError::InvalidInput(
            "at least one run is needed".into(),
        ));
    }
    if !(config.limit >= T::zero()) || !config.limit.is_finite() {
        return Err(RoutingError::InvalidInput(format!(
            "distance limit must be finite and non-negative, got {}",
            config.limit
        )));
    }
    let g = Graph::new(topology, lengths)?;
    let n = g.ids.len();
    if config.limit <= T::zero() {
        return Ok(CoverageOutcome {
            plan: RoutePlan::empty(),
            run: 0,
            under_crossed: under_crossed(topology, &PairCounts::new(), config.min_crossings),
        });
    }
    if n < 2 {
        return Err(RoutingError::InvalidInput("need at least two nodes".into()));
    }

    // routes[src][dst]
    let mut routes: Vec<Vec<Option<Route<T>>>> = vec![vec![None; n]; n];
    let mut unreachable = Vec::new();
    for d in 0..n {
        let dist = g.distances_to(d);
        for s in 0..n {
            if s == d {
                continue;
            }
            match g.trace(s, d, &dist) {
                Some(r) => routes[s][d] = Some(r),
                None => unreachable.push((g.ids[s], g.ids[d])),
            }
        }
    }
    if !unreachable.is_empty() {
        unreachable.sort();
        return Err(RoutingError::CoverageImpossible { unreachable });
    }

    let edge_ix: BTreeMap<EdgeId, usize> = topology
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| (e.id, i))
        .collect();
    let pairs: Vec<(usize, usize)> = topology
        .pair_edges()
        .iter()
        .map(|(a, b)| (edge_ix[a], edge_ix[b]))
        .collect();
    let m = edge_ix.len();
    let legs_of = |run: usize| -> Vec<(usize, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(run as u64);
        let mut at = rng.random_range(0..n);
        let mut total = T::zero();
        let mut legs = Vec::new();
        while total < config.limit {
            let mut to = rng.random_range(0..n - 1);
            if to >= at {
                to += 1;
            }
            let r = routes[at][to].as_ref().expect("strongly connected");
            total = total + r.length;
            legs.push((at, to));
            at = to;
        }
        legs
    };

    let mut counts = vec![0usize; m * m];
    let mut best: Option<(usize, usize, usize)> = None;
    for run in 0..config.runs {
        counts.iter_mut().for_each(|c| *c = 0);
        let legs = legs_of(run);
        let mut prev: Option<usize> = None;
        for &(s, d) in &legs {
            for e in &routes[s][d].as_ref().expect("strongly connected").edges {
                let cur = edge_ix[e];
                if let Some(p) = prev {
                    counts[p * m + cur] += 1;
                }
                prev = Some(cur);
            }
        }
        let score = pairs
            .iter()
            .filter(|(a, b)| counts[a * m + b] < config.min_crossings)
            .count();
        let key = (score, legs.len(), run);
        if best.is_none_or(|b| key < b) {
            best = Some(key);
        }
    }
    let (score, _, run) = best.expect("at least one run");
    let legs: Vec<Route<T>> = legs_of(run)
        .into_iter()
        .map(|(s, d)| routes[s][d].clone().expect("strongly connected"))
        .collect();
    let total_length = legs.iter().fold(T::zero(), |a, l| a + l.length);
    let mut plan = RoutePlan {
        legs,
        total_length,
        pair_edge_counts: PairCounts::new(),
    };
    plan.pair_edge_counts = pair_edge_counts(&plan);
    Ok(CoverageOutcome {
        plan,
        run,
        under_crossed: score,
    })
}

/// Number of U-turn-free pair edges crossed fewer than `min` times.
pub fn under_crossed<T: Real>(
    topology: &GraphTopology<T>,
    counts: &PairCounts,
    min: usize,
) -> usize {
    topology
        .pair_edges()
        .iter()
        .filter(|p| counts.get(p).copied().unwrap_or(0) < min)
        .count()
}
