use std::str::FromStr;

use super::Graph;
use crate::error::{Error, Result};

/// Ball of radius `radius` in the {3,q} triangulation, grown ring by ring.
///
/// Ring `k` is a cycle in cyclic order. Walking it, each vertex `v_i` gets
/// `q - 3 - parents(v_i)` fresh children in ring `k + 1`; the last of them is
/// also a child of `v_{i+1}`. Every vertex below the last ring then has
/// degree exactly `q` and every face is a triangle. Ids are ring-major.
pub fn build_triangulation(q: usize, radius: usize) -> Result<Graph> {
    if q < 7 {
        return Err(Error::param("q", format!("{{3,{q}}} is not hyperbolic, need q >= 7")));
    }
    let label = format!("tri-q{q}-r{radius}");
    let mut ring = vec![0usize];
    let mut parents = vec![0usize];
    let mut edges: Vec<(usize, usize, u32)> = Vec::new();
    if radius == 0 {
        return Graph::with_rings(ring, edges, label);
    }

    let mut current: Vec<usize> = (1..=q).collect();
    for &v in &current {
        edges.push((0, v, 1));
        ring.push(1);
        parents.push(1);
    }
    close_cycle(&current, &mut edges);

    for k in 1..radius {
        let mut next = Vec::new();
        let mut last_fresh = Vec::with_capacity(current.len());
        for &v in &current {
            let fresh = q - 3 - parents[v];
            for _ in 0..fresh {
                let w = ring.len();
                ring.push(k + 1);
                parents.push(1);
                edges.push((v, w, 1));
                next.push(w);
            }
            last_fresh.push(*next.last().expect("q >= 7 gives at least two fresh children"));
        }
        for (i, &shared) in last_fresh.iter().enumerate() {
            let successor = current[(i + 1) % current.len()];
            edges.push((successor, shared, 1));
            parents[shared] = 2;
        }
        close_cycle(&next, &mut edges);
        current = next;
    }
    Graph::with_rings(ring, edges, label)
}

fn close_cycle(cycle: &[usize], edges: &mut Vec<(usize, usize, u32)>) {
    for (i, &v) in cycle.iter().enumerate() {
        edges.push((v, cycle[(i + 1) % cycle.len()], 1));
    }
}

/// How the vertices of one tree generation are joined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Horizontal {
    #[default]
    Path,
    Cycle,
}

impl FromStr for Horizontal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "path" => Ok(Horizontal::Path),
            "cycle" => Ok(Horizontal::Cycle),
            other => Err(Error::param("horizontal", format!("expected path or cycle, got `{other}`"))),
        }
    }
}

/// Binary tree of the given depth with each generation joined left to right.
///
/// Vertex `i` has children `2i + 1` and `2i + 2`, so generation `k` occupies
/// ids `2^k - 1 ..= 2^(k+1) - 2`.
pub fn build_ringed_tree(depth: usize, horizontal: Horizontal) -> Result<Graph> {
    let n = (1usize << (depth + 1)) - 1;
    let mut edges = Vec::new();
    let mut ring = vec![0usize; n];
    for k in 0..=depth {
        let start = (1usize << k) - 1;
        let end = (1usize << (k + 1)) - 1;
        for v in start..end {
            ring[v] = k;
            if k < depth {
                edges.push((v, 2 * v + 1, 1));
                edges.push((v, 2 * v + 2, 1));
            }
            if v + 1 < end {
                edges.push((v, v + 1, 1));
            }
        }
        if horizontal == Horizontal::Cycle && end - start >= 3 {
            edges.push((end - 1, start, 1));
        }
    }
    let label = match horizontal {
        Horizontal::Path => format!("ringed-tree-d{depth}"),
        Horizontal::Cycle => format!("ringed-tree-cycle-d{depth}"),
    };
    Graph::with_rings(ring, edges, label)
}

/// Small comparison and oracle graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reference {
    /// Path with `length` edges.
    Path { length: usize },
    Cycle { length: usize },
    /// Complete `branching`-ary tree.
    Tree { branching: usize, depth: usize },
    /// `side` x `side` square grid patch.
    Grid { side: usize },
    Complete { order: usize },
}

impl Reference {
    /// Parses a kind name together with its size parameters. `size` is the
    /// path/cycle length, tree depth, grid side or complete-graph order.
    pub fn parse(kind: &str, size: usize, branching: usize) -> Result<Reference> {
        match kind {
            "path" => Ok(Reference::Path { length: size }),
            "cycle" => Ok(Reference::Cycle { length: size }),
            "tree" => Ok(Reference::Tree {
                branching,
                depth: size,
            }),
            "grid" => Ok(Reference::Grid { side: size }),
            "complete" => Ok(Reference::Complete { order: size }),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

pub fn build_reference(kind: Reference) -> Result<Graph> {
    match kind {
        Reference::Path { length } => {
            if length == 0 {
                return Err(Error::param("length", "path length must be positive"));
            }
            Graph::from_edges(length + 1, (0..length).map(|i| (i, i + 1, 1)), format!("path-{length}"))
        }
        Reference::Cycle { length } => {
            if length < 3 {
                return Err(Error::param("length", "a simple cycle needs at least 3 vertices"));
            }
            Graph::from_edges(
                length,
                (0..length).map(|i| (i, (i + 1) % length, 1)),
                format!("cycle-{length}"),
            )
        }
        Reference::Tree { branching, depth } => {
            if branching == 0 {
                return Err(Error::param("branching", "must be positive"));
            }
            let mut n = 1usize;
            let mut level = 1usize;
            for _ in 0..depth {
                level *= branching;
                n += level;
            }
            let internal = n - level;
            let edges = (0..internal).flat_map(|v| (1..=branching).map(move |c| (v, branching * v + c, 1)));
            Graph::from_edges(n, edges, format!("tree-b{branching}-d{depth}"))
        }
        Reference::Grid { side } => {
            if side == 0 {
                return Err(Error::param("side", "must be positive"));
            }
            let id = |r: usize, c: usize| r * side + c;
            let mut edges = Vec::new();
            for r in 0..side {
                for c in 0..side {
                    if c + 1 < side {
                        edges.push((id(r, c), id(r, c + 1), 1));
                    }
                    if r + 1 < side {
                        edges.push((id(r, c), id(r + 1, c), 1));
                    }
                }
            }
            Graph::from_edges(side * side, edges, format!("grid-{side}"))
        }
        Reference::Complete { order } => {
            if order == 0 {
                return Err(Error::param("order", "must be positive"));
            }
            let edges = (0..order).flat_map(|u| (u + 1..order).map(move |v| (u, v, 1)));
            Graph::from_edges(order, edges, format!("complete-{order}"))
        }
    }
}
