//! Local and cluster updates for the O(n) model at inverse temperature beta.

use petgraph::unionfind::UnionFind;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::spins::{dot, norm, random_unit, SpinConfig};

/// One Metropolis proposal per vertex in id order; returns the acceptance
/// rate of the non-trivial proposals.
///
/// An Ising spin proposes a flip with probability 1/2 and otherwise stays.
/// Always proposing the flip makes the sweep deterministic wherever the
/// local field vanishes, and on small graphs such states form closed
/// cycles (on a triangle, `+-+` and `-+-` map to each other forever).
/// For `n >= 2` the spin is rotated by an angle uniform in
/// `[-width, width]` towards a uniformly random tangent direction, a
/// symmetric proposal.
pub fn metropolis_sweep<R: Rng + ?Sized>(c: &mut SpinConfig<'_>, beta: f64, width: f64, rng: &mut R) -> f64 {
    let g = c.graph();
    let n = c.dimension();
    let pinned = c.pinned().map(|v| v.0);
    let mut field = vec![0.0; n];
    let mut proposal = vec![0.0; n];
    let mut accepted = 0usize;
    let mut attempted = 0usize;

    for v in 0..g.vertex_count() {
        if Some(v) == pinned || (n == 1 && rng.random_bool(0.5)) {
            continue;
        }
        attempted += 1;
        field.iter_mut().for_each(|x| *x = 0.0);
        for &(u, m) in g.adj(v) {
            let m = f64::from(m);
            for (f, s) in field.iter_mut().zip(c.s(u)) {
                *f += m * s;
            }
        }
        let current = c.s(v);
        let delta_h = if n == 1 {
            2.0 * current[0] * field[0]
        } else {
            tangent_rotation(current, width, &mut proposal, rng);
            -(dot(&proposal, &field) - dot(current, &field))
        };
        if delta_h <= 0.0 || rng.random::<f64>() < (-beta * delta_h).exp() {
            accepted += 1;
            let s = c.s_mut(v);
            if n == 1 {
                s[0] = -s[0];
            } else {
                s.copy_from_slice(&proposal);
            }
        }
    }
    c.renormalise();
    if attempted == 0 {
        // nothing proposed, nothing rejected
        1.0
    } else {
        accepted as f64 / attempted as f64
    }
}

/// `out = cos(phi) s + sin(phi) t` with `t` a uniform unit tangent at `s`
/// and `phi` uniform in `[-width, width]`.
fn tangent_rotation<R: Rng + ?Sized>(s: &[f64], width: f64, out: &mut [f64], rng: &mut R) {
    loop {
        for x in out.iter_mut() {
            *x = StandardNormal.sample(rng);
        }
        let along = dot(out, s);
        for (x, si) in out.iter_mut().zip(s) {
            *x -= along * si;
        }
        let r = norm(out);
        if r > 1e-8 {
            let phi = rng.random_range(-width..=width);
            let (sin, cos) = phi.sin_cos();
            for (x, si) in out.iter_mut().zip(s) {
                *x = cos * si + sin * *x / r;
            }
            return;
        }
    }
}

/// Reusable buffers for cluster growth.
#[derive(Debug, Default)]
pub struct ClusterWorkspace {
    in_cluster: Vec<bool>,
    stack: Vec<usize>,
    cluster: Vec<usize>,
    projection: Vec<f64>,
    axis: Vec<f64>,
}

impl ClusterWorkspace {
    pub fn new(vertex_count: usize, n: usize) -> Self {
        ClusterWorkspace {
            in_cluster: vec![false; vertex_count],
            stack: Vec::new(),
            cluster: Vec::new(),
            projection: Vec::new(),
            axis: vec![0.0; n],
        }
    }
}

/// One Wolff cluster move; returns the cluster size.
///
/// A uniform unit axis `r` is drawn (for Ising, `r = +1`). Starting from a
/// uniform seed, the edge to a neighbour joins with probability
/// `max(0, 1 - exp(-2 beta mult (r.s_u)(r.s_v)))`, and the cluster is then
/// reflected through the hyperplane orthogonal to `r`. A cluster that
/// reaches a pinned spin is left unchanged.
pub fn wolff_step<R: Rng + ?Sized>(c: &mut SpinConfig<'_>, beta: f64, rng: &mut R) -> usize {
    let mut ws = ClusterWorkspace::new(c.graph().vertex_count(), c.dimension());
    wolff_step_with(c, beta, rng, &mut ws)
}

pub fn wolff_step_with<R: Rng + ?Sized>(
    c: &mut SpinConfig<'_>,
    beta: f64,
    rng: &mut R,
    ws: &mut ClusterWorkspace,
) -> usize {
    let g = c.graph();
    let n = c.dimension();
    let vcount = g.vertex_count();
    if ws.in_cluster.len() != vcount || ws.axis.len() != n {
        *ws = ClusterWorkspace::new(vcount, n);
    }

    if n == 1 {
        ws.axis[0] = 1.0;
    } else {
        random_unit(&mut ws.axis, rng);
    }
    let axis = &ws.axis;
    let project = |v: usize| if n == 1 { c.s(v)[0] } else { dot(axis, c.s(v)) };

    let seed = rng.random_range(0..vcount);
    ws.cluster.clear();
    ws.projection.clear();
    ws.stack.clear();
    ws.in_cluster[seed] = true;
    ws.stack.push(seed);
    while let Some(v) = ws.stack.pop() {
        let pv = project(v);
        ws.cluster.push(v);
        ws.projection.push(pv);
        for &(u, m) in g.adj(v) {
            if ws.in_cluster[u] {
                continue;
            }
            let coupling = 2.0 * beta * f64::from(m) * pv * project(u);
            if coupling <= 0.0 {
                continue;
            }
            if rng.random::<f64>() < 1.0 - (-coupling).exp() {
                ws.in_cluster[u] = true;
                ws.stack.push(u);
            }
        }
    }

    let blocked = c.pinned().is_some_and(|p| ws.in_cluster[p.0]);
    for (&v, &p) in ws.cluster.iter().zip(&ws.projection) {
        ws.in_cluster[v] = false;
        if blocked {
            continue;
        }
        let s = c.s_mut(v);
        for (x, a) in s.iter_mut().zip(&ws.axis) {
            *x -= 2.0 * p * a;
        }
        if n > 1 {
            let r = norm(s);
            s.iter_mut().for_each(|x| *x /= r);
        }
    }
    ws.cluster.len()
}

/// One Swendsen-Wang update of an Ising configuration. Aligned neighbours
/// are bonded with probability `1 - exp(-2 beta mult)`, then every bond
/// cluster receives a fresh uniform sign (a cluster holding the pinned spin
/// keeps its sign). Returns the cluster label of each vertex.
pub fn swendsen_wang_sweep<R: Rng + ?Sized>(c: &mut SpinConfig<'_>, beta: f64, rng: &mut R) -> Vec<usize> {
    assert_eq!(c.dimension(), 1, "Swendsen-Wang is implemented for Ising spins only");
    let g = c.graph();
    let vcount = g.vertex_count();
    let mut clusters = UnionFind::<usize>::new(vcount);
    for v in 0..vcount {
        for &(u, m) in g.adj(v) {
            if u > v && c.s(u)[0] == c.s(v)[0] && rng.random::<f64>() < 1.0 - (-2.0 * beta * f64::from(m)).exp() {
                clusters.union(u, v);
            }
        }
    }
    let labels = clusters.into_labeling();
    let mut sign = vec![0.0f64; vcount];
    if let Some(p) = c.pinned() {
        sign[labels[p.0]] = c.s(p.0)[0];
    }
    for v in 0..vcount {
        let root = labels[v];
        if sign[root] == 0.0 {
            sign[root] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        }
        c.s_mut(v)[0] = sign[root];
    }
    labels
}
