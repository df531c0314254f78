//! Directed intersection graph.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::geom::PlanarPoint;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An intersection: center and the radius of its disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node<T> {
    pub id: NodeId,
    pub center: PlanarPoint<T>,
    pub radius: T,
}

/// A directed road between two intersections.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub from: NodeId,
    pub to: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("duplicate edge id {0}")]
    DuplicateEdge(EdgeId),
    #[error("edge {edge} references unknown node {node}")]
    UnknownNode { edge: EdgeId, node: NodeId },
    #[error("edge {0} is a self loop")]
    SelfLoop(EdgeId),
    #[error("edges {0} and {1} connect the same ordered node pair")]
    ParallelEdge(EdgeId, EdgeId),
    #[error("node {0} has a non-positive or non-finite radius")]
    InvalidRadius(NodeId),
    #[error("no edge from node {from} to node {to}")]
    NoEdge { from: NodeId, to: NodeId },
    #[error("unknown node {0}")]
    MissingNode(NodeId),
}

/// Nodes and directed edges with lookup indices.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphTopology<T> {
    nodes: Vec<Node<T>>,
    edges: Vec<Edge>,
    node_index: BTreeMap<NodeId, usize>,
    edge_index: BTreeMap<EdgeId, usize>,
    pair_index: BTreeMap<(NodeId, NodeId), EdgeId>,
}

impl<T: Real> GraphTopology<T> {
    pub fn new(nodes: Vec<Node<T>>, edges: Vec<Edge>) -> Result<Self, TopologyError> {
        let mut node_index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if !(n.radius > T::zero() && n.radius.is_finite()) || !n.center.is_finite() {
                return Err(TopologyError::InvalidRadius(n.id));
            }
            if node_index.insert(n.id, i).is_some() {
                return Err(TopologyError::DuplicateNode(n.id));
            }
        }
        let mut edge_index = BTreeMap::new();
        let mut pair_index = BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            for node in [e.from, e.to] {
                if !node_index.contains_key(&node) {
                    return Err(TopologyError::UnknownNode { edge: e.id, node });
                }
            }
            if e.from == e.to {
                return Err(TopologyError::SelfLoop(e.id));
            }
            if edge_index.insert(e.id, i).is_some() {
                return Err(TopologyError::DuplicateEdge(e.id));
            }
            if let Some(other) = pair_index.insert((e.from, e.to), e.id) {
                return Err(TopologyError::ParallelEdge(other, e.id));
            }
        }
        Ok(Self {
            nodes,
            edges,
            node_index,
            edge_index,
            pair_index,
        })
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> Option<&Node<T>> {
        self.node_index.get(&id).map(|&i| &self.nodes[i])
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edge_index.get(&id).map(|&i| &self.edges[i])
    }

    pub fn edge_between(&self, from: NodeId, to: NodeId) -> Option<&Edge> {
        self.pair_index
            .get(&(from, to))
            .and_then(|id| self.edge(*id))
    }

    /// Outgoing edges of `node`, ordered by target node id.
    pub fn out_edges(&self, node: NodeId) -> impl Iterator<Item = &Edge> + '_ {
        self.pair_index
            .range((node, NodeId(0))..=(node, NodeId(u32::MAX)))
            .filter_map(move |(_, id)| self.edge(*id))
    }

    pub fn in_edges(&self, node: NodeId) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.to == node)
    }

    /// Edge sequence realising a node sequence.
    pub fn route_edges(&self, route: &[NodeId]) -> Result<Vec<EdgeId>, TopologyError> {
        for n in route {
            if self.node(*n).is_none() {
                return Err(TopologyError::MissingNode(*n));
            }
        }
        route
            .windows(2)
            .map(|w| {
                self.edge_between(w[0], w[1])
                    .map(|e| e.id)
                    .ok_or(TopologyError::NoEdge {
                        from: w[0],
                        to: w[1],
                    })
            })
            .collect()
    }

    /// All ordered pairs of consecutive edges through a node, excluding
    /// immediate reversals onto the edge just driven.
    pub fn pair_edges(&self) -> Vec<(EdgeId, EdgeId)> {
        let mut out = Vec::new();
        for e_in in &self.edges {
            for e_out in self.out_edges(e_in.to) {
                if e_out.to != e_in.from {
                    out.push((e_in.id, e_out.id));
                }
            }
        }
        out.sort();
        out
    }

    /// Straight-line distance between the centers of an edge's endpoints.
    pub fn chord_length(&self, id: EdgeId) -> Option<T> {
        let e = self.edge(id)?;
        let a = self.node(e.from)?.center;
        let b = self.node(e.to)?.center;
        Some(a.distance(&b))
    }
}
