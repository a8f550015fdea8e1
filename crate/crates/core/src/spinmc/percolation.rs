use petgraph::unionfind::UnionFind;
use rand::Rng;

use super::DistanceEstimate;
use crate::error::{Error, Result};
use crate::graphs::{spheres, Graph, VertexId};

/// Probability that an edge of multiplicity `mult` is open in the FK
/// representation of the Ising model: `1 - exp(-2 beta mult)`.
pub fn fk_bond_probability(beta: f64, mult: u32) -> f64 {
    -(-2.0 * beta * f64::from(mult)).exp_m1()
}

/// `2p / (1 + p)`: the FK edge parameter whose q = 2 random-cluster
/// measure dominates Bernoulli(p) bond percolation. Connection
/// probabilities at `p` are therefore lower bounds for Ising correlations
/// at the matching coupling.
pub fn ising_to_fk(p: f64) -> f64 {
    2.0 * p / (1.0 + p)
}

/// Bernoulli bond percolation: every parallel copy of an edge is open
/// independently with probability `prob`. Returns, by distance from
/// `center`, the fraction of samples in which `center` reaches a vertex at
/// that distance (averaged over the sphere).
pub fn bernoulli_connectivity<R: Rng + ?Sized>(
    g: &Graph,
    prob: f64,
    samples: usize,
    center: VertexId,
    rng: &mut R,
) -> Result<Vec<DistanceEstimate>> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::param("prob", "must lie in [0, 1]"));
    }
    if samples == 0 {
        return Err(Error::param("samples", "must be positive"));
    }
    let shells = spheres(g, center)?;
    let n = g.vertex_count();
    let edges: Vec<(usize, usize, f64)> = g
        .edges()
        .map(|(u, v, m)| (u.0, v.0, 1.0 - (1.0 - prob).powi(m as i32)))
        .collect();

    let mut sum = vec![0.0; shells.len()];
    let mut sum_sq = vec![0.0; shells.len()];
    for _ in 0..samples {
        let mut uf = UnionFind::<usize>::new(n);
        for &(u, v, p) in &edges {
            if rng.random::<f64>() < p {
                uf.union(u, v);
            }
        }
        let root = uf.find(center.0);
        for (d, shell) in shells.iter().enumerate() {
            let hit = shell.iter().filter(|v| uf.find(v.0) == root).count() as f64 / shell.len() as f64;
            sum[d] += hit;
            sum_sq[d] += hit * hit;
        }
    }
    let k = samples as f64;
    Ok((0..shells.len())
        .map(|d| {
            let mean = sum[d] / k;
            let var = if samples > 1 {
                ((sum_sq[d] / k - mean * mean) * k / (k - 1.0)).max(0.0)
            } else {
                0.0
            };
            DistanceEstimate {
                distance: d,
                estimate: mean,
                stderr: (var / k).sqrt(),
                samples,
            }
        })
        .collect())
}
