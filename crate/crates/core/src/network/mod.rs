//! Linear networks, points on them, and point patterns.
//!
//! A [`LinearNetwork`] is an undirected graph whose edges are line segments
//! with a positive length (µm) and a branch label. Points are addressed as
//! `(edge, offset)` pairs where the offset is measured from the edge's `from`
//! vertex. Distances are shortest-path distances `d_L` within the network,
//! computed from an all-pairs vertex distance table that is built once at
//! construction.

mod geometry;
mod simplify;

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use geometry::{erode, lattice, sphere_count, Lattice, SphereProfile, SubNetwork};
pub use simplify::{simplify_tree, EdgeMapping, Simplified};

/// Label of the part of a dendrite an edge belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Main,
    Side,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Main => "main",
            Branch::Side => "side",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: u64,
    pub x: Option<f64>,
    pub y: Option<f64>,
}

/// An edge between two vertices, stored by vertex index.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: u64,
    pub from: usize,
    pub to: usize,
    pub length: f64,
    pub branch: Branch,
}

/// Edge record as supplied by callers: endpoints are vertex *ids*.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub id: u64,
    pub from: u64,
    pub to: u64,
    pub length: f64,
    pub branch: Branch,
}

/// A location on the network.
///
/// Points sitting exactly on a vertex are stored in canonical form: the
/// lowest-index incident edge together with the matching terminal offset
/// (`0` or the edge length). Construct through [`LinearNetwork::point`] to
/// get this guarantee.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NetworkPoint {
    pub edge: usize,
    pub offset: f64,
}

impl NetworkPoint {
    /// Total order by edge index, then offset.
    pub fn cmp_position(&self, other: &Self) -> Ordering {
        self.edge
            .cmp(&other.edge)
            .then(self.offset.total_cmp(&other.offset))
    }
}

/// A weighted undirected graph of line segments.
///
/// Immutable after construction; all queries are `&self`.
#[derive(Clone)]
pub struct LinearNetwork {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    dist: Vec<f64>,
    leaf_dist: Vec<f64>,
    edge_index: HashMap<u64, usize>,
    is_tree: bool,
}

impl fmt::Debug for LinearNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearNetwork")
            .field("vertices", &self.vertices.len())
            .field("edges", &self.edges.len())
            .field("total_length", &self.total_length())
            .field("is_tree", &self.is_tree)
            .finish()
    }
}

impl PartialEq for LinearNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges
    }
}

impl LinearNetwork {
    /// Validates and indexes a network.
    ///
    /// Edges are re-ordered by id so that edge index order equals id order.
    /// Cycles are allowed here (see [`is_tree`](Self::is_tree)); the file
    /// loader rejects them.
    pub fn new(vertices: Vec<Vertex>, edges: Vec<EdgeSpec>) -> Result<Self> {
        let mut vindex = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if vindex.insert(v.id, i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "vertex",
                    id: v.id,
                });
            }
        }
        let mut specs = edges;
        specs.sort_by_key(|e| e.id);
        let mut built = Vec::with_capacity(specs.len());
        let mut edge_index = HashMap::with_capacity(specs.len());
        for (i, e) in specs.iter().enumerate() {
            if edge_index.insert(e.id, i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "edge",
                    id: e.id,
                });
            }
            if !(e.length > 0.0) || !e.length.is_finite() {
                return Err(Error::NonpositiveLength {
                    edge: e.id,
                    length: e.length,
                });
            }
            let from = *vindex.get(&e.from).ok_or(Error::UnknownVertex {
                edge: e.id,
                vertex: e.from,
            })?;
            let to = *vindex.get(&e.to).ok_or(Error::UnknownVertex {
                edge: e.id,
                vertex: e.to,
            })?;
            built.push(Edge {
                id: e.id,
                from,
                to,
                length: e.length,
                branch: e.branch,
            });
        }
        if built.is_empty() {
            return Err(Error::Parse("network has no edges".into()));
        }

        let nv = vertices.len();
        let mut adjacency = vec![Vec::new(); nv];
        for (i, e) in built.iter().enumerate() {
            adjacency[e.from].push((i, e.to));
            if e.to != e.from {
                adjacency[e.to].push((i, e.from));
            }
        }

        let components = count_components(&adjacency);
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        let has_self_loop = built.iter().any(|e| e.from == e.to);
        let is_tree = !has_self_loop && built.len() + 1 == nv;

        let mut dist = vec![f64::INFINITY; nv * nv];
        for s in 0..nv {
            dijkstra(&built, &adjacency, s, &mut dist[s * nv..(s + 1) * nv]);
        }

        let leaves: Vec<usize> = (0..nv).filter(|&v| adjacency[v].len() == 1).collect();
        let leaf_dist = (0..nv)
            .map(|v| {
                leaves
                    .iter()
                    .map(|&l| dist[v * nv + l])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();

        Ok(Self {
            vertices,
            edges: built,
            adjacency,
            dist,
            leaf_dist,
            edge_index,
            is_tree,
        })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> &Edge {
        &self.edges[index]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// `(edge index, neighbouring vertex)` pairs incident to vertex `v`.
    pub fn incident(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn is_tree(&self) -> bool {
        self.is_tree
    }

    /// Edge index for an external edge id.
    pub fn edge_by_id(&self, id: u64) -> Option<usize> {
        self.edge_index.get(&id).copied()
    }

    /// Shortest-path distance between two vertices (by index).
    pub fn vertex_distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.vertices.len() + b]
    }

    /// Distance from vertex `v` to the nearest degree-1 vertex.
    pub fn vertex_leaf_distance(&self, v: usize) -> f64 {
        self.leaf_dist[v]
    }

    /// Total measure `|L|`.
    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Measure of the part of the network carrying the given label.
    pub fn branch_length(&self, branch: Branch) -> f64 {
        self.edges
            .iter()
            .filter(|e| e.branch == branch)
            .fold(0.0, |acc, e| acc + e.length)
    }

    /// Builds a canonical point from an edge index and an offset.
    ///
    /// Offsets within `1e-9·length` outside the edge are clamped.
    pub fn point(&self, edge: usize, offset: f64) -> Result<NetworkPoint> {
        let e = self
            .edges
            .get(edge)
            .ok_or_else(|| Error::PointOffNetwork(format!("edge index {edge} out of range")))?;
        let slack = 1e-9 * e.length;
        if !offset.is_finite() || offset < -slack || offset > e.length + slack {
            return Err(Error::PointOffNetwork(format!(
                "offset {offset} outside [0, {}] on edge {}",
                e.length, e.id
            )));
        }
        let offset = offset.clamp(0.0, e.length);
        if offset == 0.0 {
            Ok(self.vertex_point(e.from))
        } else if offset == e.length {
            Ok(self.vertex_point(e.to))
        } else {
            Ok(NetworkPoint { edge, offset })
        }
    }

    /// Builds a point from an external edge id.
    pub fn point_by_id(&self, edge_id: u64, offset: f64) -> Result<NetworkPoint> {
        let edge = self
            .edge_by_id(edge_id)
            .ok_or_else(|| Error::PointOffNetwork(format!("unknown edge id {edge_id}")))?;
        self.point(edge, offset)
    }

    /// Canonical representation of vertex `v`.
    pub fn vertex_point(&self, v: usize) -> NetworkPoint {
        let edge = self.adjacency[v]
            .iter()
            .map(|&(e, _)| e)
            .min()
            .expect("connected network has no isolated vertices");
        let e = &self.edges[edge];
        let offset = if e.from == v { 0.0 } else { e.length };
        NetworkPoint { edge, offset }
    }

    /// If the point coincides with a vertex, that vertex's index.
    pub fn point_vertex(&self, p: &NetworkPoint) -> Option<usize> {
        let e = &self.edges[p.edge];
        if p.offset == 0.0 {
            Some(e.from)
        } else if p.offset == e.length {
            Some(e.to)
        } else {
            None
        }
    }

    /// Checks that a point refers to this network.
    pub fn contains(&self, p: &NetworkPoint) -> bool {
        p.edge < self.edges.len()
            && p.offset.is_finite()
            && p.offset >= 0.0
            && p.offset <= self.edges[p.edge].length
    }

    pub fn branch_of(&self, p: &NetworkPoint) -> Branch {
        self.edges[p.edge].branch
    }

    /// Shortest-path distance from a point to vertex `v`.
    pub fn point_vertex_distance(&self, p: &NetworkPoint, v: usize) -> f64 {
        let e = &self.edges[p.edge];
        let via_from = p.offset + self.vertex_distance(e.from, v);
        let via_to = (e.length - p.offset) + self.vertex_distance(e.to, v);
        via_from.min(via_to)
    }

    /// Shortest-path distance `d_L(p, q)`.
    ///
    /// Minimum over the four endpoint routings, plus the direct route when
    /// both points lie on the same edge.
    pub fn distance(&self, p: &NetworkPoint, q: &NetworkPoint) -> f64 {
        let ep = &self.edges[p.edge];
        let eq = &self.edges[q.edge];
        let p_ends = [(ep.from, p.offset), (ep.to, ep.length - p.offset)];
        let q_ends = [(eq.from, q.offset), (eq.to, eq.length - q.offset)];
        let mut best = f64::INFINITY;
        if p.edge == q.edge {
            best = (p.offset - q.offset).abs();
        }
        for &(a, da) in &p_ends {
            for &(b, db) in &q_ends {
                best = best.min(da + self.vertex_distance(a, b) + db);
            }
        }
        best
    }

    /// Checked variant of [`distance`](Self::distance).
    pub fn try_distance(&self, p: &NetworkPoint, q: &NetworkPoint) -> Result<f64> {
        for x in [p, q] {
            if !self.contains(x) {
                return Err(Error::PointOffNetwork(format!("{x:?}")));
            }
        }
        Ok(self.distance(p, q))
    }

    /// Distance from a point to the nearest degree-1 vertex.
    pub fn leaf_distance(&self, p: &NetworkPoint) -> f64 {
        let e = &self.edges[p.edge];
        (p.offset + self.leaf_dist[e.from]).min(e.length - p.offset + self.leaf_dist[e.to])
    }

    /// Largest distance from `p` to any point of the network.
    pub fn eccentricity(&self, p: &NetworkPoint) -> f64 {
        // The farthest point is either a vertex or the far side of a
        // "tent" on some edge; on trees it is always a leaf.
        let mut best = 0.0f64;
        for (i, e) in self.edges.iter().enumerate() {
            if i == p.edge {
                best = best.max(self.point_vertex_distance(p, e.from));
                best = best.max(self.point_vertex_distance(p, e.to));
                continue;
            }
            let da = self.point_vertex_distance(p, e.from);
            let db = self.point_vertex_distance(p, e.to);
            best = best.max(0.5 * (da + db + e.length));
        }
        best
    }
}

fn count_components(adjacency: &[Vec<(usize, usize)>]) -> usize {
    let n = adjacency.len();
    let mut seen = vec![false; n];
    let mut components = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        components += 1;
        seen[s] = true;
        stack.push(s);
        while let Some(v) = stack.pop() {
            for &(_, w) in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    components
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

fn dijkstra(edges: &[Edge], adjacency: &[Vec<(usize, usize)>], source: usize, out: &mut [f64]) {
    out[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(HeapItem(0.0, source));
    while let Some(HeapItem(d, v)) = heap.pop() {
        if d > out[v] {
            continue;
        }
        for &(e, w) in &adjacency[v] {
            let nd = d + edges[e].length;
            if nd < out[w] {
                out[w] = nd;
                heap.push(HeapItem(nd, w));
            }
        }
    }
}

/// A finite set of points on a network.
#[derive(Debug, Clone)]
pub struct PointPattern {
    network: Arc<LinearNetwork>,
    points: Vec<NetworkPoint>,
}

impl PointPattern {
    pub fn new(network: Arc<LinearNetwork>, points: Vec<NetworkPoint>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !network.contains(p)) {
            return Err(Error::PointOffNetwork(format!("{p:?}")));
        }
        Ok(Self { network, points })
    }

    pub fn empty(network: Arc<LinearNetwork>) -> Self {
        Self {
            network,
            points: Vec::new(),
        }
    }

    pub fn network(&self) -> &Arc<LinearNetwork> {
        &self.network
    }

    pub fn points(&self) -> &[NetworkPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points on edges carrying `branch`.
    pub fn count_on(&self, branch: Branch) -> usize {
        self.points
            .iter()
            .filter(|p| self.network.branch_of(p) == branch)
            .count()
    }

    /// Number of points whose edge index satisfies `pred`; partial edges
    /// are handled by filtering offsets in the closure's caller.
    pub fn count_where(&self, mut pred: impl FnMut(&NetworkPoint) -> bool) -> usize {
        self.points.iter().filter(|p| pred(p)).count()
    }

    /// Same points, restricted to those satisfying `keep`.
    pub fn filter(&self, mut keep: impl FnMut(usize, &NetworkPoint) -> bool) -> Self {
        let points = self
            .points
            .iter()
            .enumerate()
            .filter(|(i, p)| keep(*i, p))
            .map(|(_, p)| *p)
            .collect();
        Self {
            network: Arc::clone(&self.network),
            points,
        }
    }
}

#[cfg(test)]
pub(crate) mod test_nets {
    use super::*;

    pub fn vertices(n: u64) -> Vec<Vertex> {
        (0..n)
            .map(|id| Vertex {
                id,
                x: None,
                y: None,
            })
            .collect()
    }

    pub fn spec(id: u64, from: u64, to: u64, length: f64, branch: Branch) -> EdgeSpec {
        EdgeSpec {
            id,
            from,
            to,
            length,
            branch,
        }
    }

    /// Single segment of the given length.
    pub fn segment(length: f64) -> LinearNetwork {
        LinearNetwork::new(vertices(2), vec![spec(0, 0, 1, length, Branch::Main)]).unwrap()
    }

    /// Y-tree: O=0, A=1, B=2, C=3 with |OA|=3, |OB|=4, |OC|=5.
    pub fn y_tree() -> LinearNetwork {
        LinearNetwork::new(
            vertices(4),
            vec![
                spec(0, 0, 1, 3.0, Branch::Main),
                spec(1, 0, 2, 4.0, Branch::Main),
                spec(2, 0, 3, 5.0, Branch::Side),
            ],
        )
        .unwrap()
    }
}
