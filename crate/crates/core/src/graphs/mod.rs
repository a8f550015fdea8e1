//! Finite undirected multigraphs with ring labels and a designated boundary.
//!
//! Every graph carries a `ring` label per vertex: the graph distance from
//! vertex 0. The boundary is the outermost ring. Balls are re-rooted so that
//! the centre becomes vertex 0, which keeps both properties intact after
//! [`ball`]; [`contract_boundary`] merges the boundary into a single vertex
//! carrying the summed edge multiplicities (wired boundary condition).

mod construct;

pub use construct::{build_reference, build_ringed_tree, build_triangulation, Horizontal, Reference};

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for VertexId {
    fn from(v: usize) -> Self {
        VertexId(v)
    }
}

/// Boundary condition on a finite ball: keep it as is, or short the
/// outermost ring into one vertex.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    #[default]
    Free,
    Wired,
}

impl BoundaryCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryCondition::Free => "free",
            BoundaryCondition::Wired => "wired",
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(BoundaryCondition::Free),
            "wired" => Ok(BoundaryCondition::Wired),
            other => Err(Error::param("bc", format!("expected free or wired, got `{other}`"))),
        }
    }
}

/// Immutable multigraph. Adjacency lists are sorted by neighbour id and
/// carry the edge multiplicity (which doubles as conductance and coupling).
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    adjacency: Vec<Vec<(usize, u32)>>,
    ring: Vec<usize>,
    in_boundary: Vec<bool>,
    label: String,
}

impl Graph {
    /// Builds a connected graph from an edge list. Repeated edges add up their
    /// multiplicities; rings are set by breadth-first search from vertex 0.
    pub fn from_edges<I>(vertex_count: usize, edges: I, label: impl Into<String>) -> Result<Graph>
    where
        I: IntoIterator<Item = (usize, usize, u32)>,
    {
        let adjacency = collect_adjacency(vertex_count, edges)?;
        let ring = bfs(&adjacency, 0);
        let ring = ring
            .into_iter()
            .enumerate()
            .map(|(v, d)| d.ok_or(Error::Disconnected(VertexId(v))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::assemble(adjacency, ring, label.into()))
    }

    /// Same as [`Graph::from_edges`] but with ring labels supplied by the
    /// caller (used by the layered constructions).
    pub(crate) fn with_rings<I>(ring: Vec<usize>, edges: I, label: impl Into<String>) -> Result<Graph>
    where
        I: IntoIterator<Item = (usize, usize, u32)>,
    {
        let adjacency = collect_adjacency(ring.len(), edges)?;
        Ok(Self::assemble(adjacency, ring, label.into()))
    }

    fn assemble(adjacency: Vec<Vec<(usize, u32)>>, ring: Vec<usize>, label: String) -> Graph {
        let max_ring = ring.iter().copied().max().unwrap_or(0);
        let in_boundary = ring.iter().map(|&r| r == max_ring).collect();
        Graph {
            adjacency,
            ring,
            in_boundary,
            label,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Number of distinct adjacent pairs.
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Sum of multiplicities over all edges.
    pub fn total_multiplicity(&self) -> u64 {
        self.edges().map(|(_, _, m)| u64::from(m)).sum()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn ring(&self, v: VertexId) -> usize {
        self.ring[v.0]
    }

    pub fn rings(&self) -> &[usize] {
        &self.ring
    }

    pub fn max_ring(&self) -> usize {
        self.ring.iter().copied().max().unwrap_or(0)
    }

    pub fn is_boundary(&self, v: VertexId) -> bool {
        self.in_boundary[v.0]
    }

    pub fn boundary(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.in_boundary
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(v, _)| VertexId(v))
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertex_count()).map(VertexId)
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (VertexId, u32)> + '_ {
        self.adjacency[v.0].iter().map(|&(u, m)| (VertexId(u), m))
    }

    /// Raw adjacency row, for inner loops.
    #[inline]
    pub(crate) fn adj(&self, v: usize) -> &[(usize, u32)] {
        &self.adjacency[v]
    }

    /// Number of distinct neighbours.
    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v.0].len()
    }

    /// Degree counted with multiplicity.
    pub fn weighted_degree(&self, v: VertexId) -> u64 {
        self.adjacency[v.0].iter().map(|&(_, m)| u64::from(m)).sum()
    }

    pub fn multiplicity(&self, u: VertexId, v: VertexId) -> u32 {
        self.adjacency[u.0]
            .binary_search_by_key(&v.0, |&(w, _)| w)
            .map(|i| self.adjacency[u.0][i].1)
            .unwrap_or(0)
    }

    /// Edges as `(u, v, mult)` with `u < v`, sorted by `(u, v)`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, u32)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, row)| {
            row.iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, m)| (VertexId(u), VertexId(v), m))
        })
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v.0 < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange(v, self.vertex_count()))
        }
    }

    /// Plain-text edge list: a `vertices=<N> label=<text>` header, then one
    /// `u v mult` line per edge sorted by `(u, v)`.
    pub fn dump(&self) -> String {
        let mut out = format!("vertices={} label={}\n", self.vertex_count(), self.label);
        for (u, v, m) in self.edges() {
            out.push_str(&format!("{u} {v} {m}\n"));
        }
        out
    }
}

fn collect_adjacency<I>(vertex_count: usize, edges: I) -> Result<Vec<Vec<(usize, u32)>>>
where
    I: IntoIterator<Item = (usize, usize, u32)>,
{
    if vertex_count == 0 {
        return Err(Error::param("vertex_count", "a graph needs at least one vertex"));
    }
    let mut rows: Vec<BTreeMap<usize, u32>> = vec![BTreeMap::new(); vertex_count];
    for (u, v, m) in edges {
        for w in [u, v] {
            if w >= vertex_count {
                return Err(Error::VertexOutOfRange(VertexId(w), vertex_count));
            }
        }
        if u == v {
            return Err(Error::SelfLoop(VertexId(u)));
        }
        if m == 0 {
            continue;
        }
        *rows[u].entry(v).or_insert(0) += m;
        *rows[v].entry(u).or_insert(0) += m;
    }
    Ok(rows
        .into_iter()
        .map(|row| row.into_iter().collect())
        .collect())
}

fn bfs(adjacency: &[Vec<(usize, u32)>], source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adjacency.len()];
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let next = dist[v].map(|d| d + 1);
        for &(u, _) in &adjacency[v] {
            if dist[u].is_none() {
                dist[u] = next;
                queue.push_back(u);
            }
        }
    }
    dist
}

/// Breadth-first distances from `source`; `None` marks unreachable vertices.
pub fn distances(g: &Graph, source: VertexId) -> Result<Vec<Option<usize>>> {
    g.check_vertex(source)?;
    Ok(bfs(&g.adjacency, source.0))
}

/// Number of vertices at each distance from `source`.
pub fn sphere_sizes(g: &Graph, source: VertexId) -> Result<Vec<usize>> {
    let dist = distances(g, source)?;
    let mut sizes = Vec::new();
    for d in dist.into_iter().flatten() {
        if sizes.len() <= d {
            sizes.resize(d + 1, 0);
        }
        sizes[d] += 1;
    }
    Ok(sizes)
}

/// Vertices grouped by distance from `source`, each group in increasing id
/// order.
pub fn spheres(g: &Graph, source: VertexId) -> Result<Vec<Vec<VertexId>>> {
    let dist = distances(g, source)?;
    let mut out: Vec<Vec<VertexId>> = Vec::new();
    for (v, d) in dist.into_iter().enumerate() {
        if let Some(d) = d {
            if out.len() <= d {
                out.resize_with(d + 1, Vec::new);
            }
            out[d].push(VertexId(v));
        }
    }
    Ok(out)
}

/// Induced subgraph on the vertices within distance `r` of `center`.
///
/// Vertices are renumbered by `(distance, original id)`, so the centre
/// becomes vertex 0 and ring labels are distances from the centre.
pub fn ball(g: &Graph, center: VertexId, r: usize) -> Result<Graph> {
    let dist = distances(g, center)?;
    let mut kept: Vec<(usize, usize)> = dist
        .iter()
        .enumerate()
        .filter_map(|(v, d)| d.filter(|&d| d <= r).map(|d| (d, v)))
        .collect();
    kept.sort_unstable();
    let mut new_id = vec![usize::MAX; g.vertex_count()];
    for (i, &(_, v)) in kept.iter().enumerate() {
        new_id[v] = i;
    }
    let ring: Vec<usize> = kept.iter().map(|&(d, _)| d).collect();
    let edges = g
        .edges()
        .filter(|(u, v, _)| new_id[u.0] != usize::MAX && new_id[v.0] != usize::MAX)
        .map(|(u, v, m)| (new_id[u.0], new_id[v.0], m));
    let label = format!("{}-ball-c{}-r{}", g.label, center, r);
    Graph::with_rings(ring, edges, label)
}

/// Merges every boundary vertex into one new vertex (the last id). Edges
/// with one boundary endpoint are kept with multiplicities summed; edges
/// inside the boundary are dropped.
pub fn contract_boundary(g: &Graph) -> Result<Graph> {
    let boundary_size = g.in_boundary.iter().filter(|&&b| b).count();
    if boundary_size == 0 {
        return Err(Error::EmptyBoundary);
    }
    let mut new_id = vec![0usize; g.vertex_count()];
    let mut next = 0;
    for v in 0..g.vertex_count() {
        if !g.in_boundary[v] {
            new_id[v] = next;
            next += 1;
        }
    }
    let merged = next;
    for v in 0..g.vertex_count() {
        if g.in_boundary[v] {
            new_id[v] = merged;
        }
    }
    let edges: Vec<_> = g
        .edges()
        .filter(|(u, v, _)| !(g.in_boundary[u.0] && g.in_boundary[v.0]))
        .map(|(u, v, m)| (new_id[u.0], new_id[v.0], m))
        .collect();
    let label = format!("{}-wired", g.label);
    let adjacency = collect_adjacency(merged + 1, edges)?;
    let ring = bfs(&adjacency, 0)
        .into_iter()
        .enumerate()
        .map(|(v, d)| d.ok_or(Error::Disconnected(VertexId(v))))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Graph::assemble(adjacency, ring, label);
    // The merged vertex is the boundary even if BFS would put it elsewhere.
    out.in_boundary = (0..=merged).map(|v| v == merged).collect();
    Ok(out)
}

/// Ids of every vertex of `g` in `contract_boundary(g)`; boundary vertices
/// map to the merged vertex.
pub fn contraction_map(g: &Graph) -> Vec<VertexId> {
    let interior = g.in_boundary.iter().filter(|&&b| !b).count();
    let mut next = 0;
    g.in_boundary
        .iter()
        .map(|&b| {
            if b {
                VertexId(interior)
            } else {
                next += 1;
                VertexId(next - 1)
            }
        })
        .collect()
}

/// Id of a single vertex after [`contract_boundary`].
pub fn contracted_id(g: &Graph, v: VertexId) -> Result<VertexId> {
    g.check_vertex(v)?;
    Ok(contraction_map(g)[v.0])
}
