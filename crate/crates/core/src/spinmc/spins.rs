use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graphs::{Graph, VertexId};

/// Generator used for every chain.
pub type McRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream `index` of base seed `base`: ChaCha8 seeded with
/// `mix64(base + (index + 1) * 0x9E3779B97F4A7C15)` (wrapping arithmetic).
pub fn stream_rng(base: u64, index: u64) -> McRng {
    let seed = mix64(base.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)));
    ChaCha8Rng::seed_from_u64(seed)
}

/// Spins on the vertices of a graph, stored as `n` components per vertex.
/// For `n = 1` the single component is `+1` or `-1`.
#[derive(Clone, Debug)]
pub struct SpinConfig<'g> {
    graph: &'g Graph,
    n: usize,
    spins: Vec<f64>,
    pinned: Option<usize>,
}

impl<'g> SpinConfig<'g> {
    /// Every spin equal to the first basis vector.
    pub fn aligned(graph: &'g Graph, n: usize) -> Result<Self> {
        check_dimension(n)?;
        let mut spins = vec![0.0; graph.vertex_count() * n];
        for s in spins.chunks_mut(n) {
            s[0] = 1.0;
        }
        Ok(SpinConfig {
            graph,
            n,
            spins,
            pinned: None,
        })
    }

    /// Independent uniform spins (infinite-temperature sample).
    pub fn random<R: Rng + ?Sized>(graph: &'g Graph, n: usize, rng: &mut R) -> Result<Self> {
        let mut c = Self::aligned(graph, n)?;
        for v in 0..graph.vertex_count() {
            let s = &mut c.spins[v * n..(v + 1) * n];
            random_unit(s, rng);
        }
        Ok(c)
    }

    /// Wraps explicit spin values; `n >= 2` spins must be unit vectors.
    pub fn from_values(graph: &'g Graph, n: usize, spins: Vec<f64>) -> Result<Self> {
        check_dimension(n)?;
        if spins.len() != graph.vertex_count() * n {
            return Err(Error::param("spins", "length must be vertex_count * n"));
        }
        for s in spins.chunks(n) {
            let ok = if n == 1 {
                s[0] == 1.0 || s[0] == -1.0
            } else {
                (norm(s) - 1.0).abs() <= 1e-12
            };
            if !ok {
                return Err(Error::param("spins", "every spin must lie on the unit sphere"));
            }
        }
        Ok(SpinConfig {
            graph,
            n,
            spins,
            pinned: None,
        })
    }

    /// Freezes the spin at `v`; samplers never change it.
    pub fn pin(&mut self, v: VertexId) {
        self.pinned = Some(v.0);
    }

    pub fn pinned(&self) -> Option<VertexId> {
        self.pinned.map(VertexId)
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn spin(&self, v: VertexId) -> &[f64] {
        &self.spins[v.0 * self.n..(v.0 + 1) * self.n]
    }

    #[inline]
    pub(crate) fn s(&self, v: usize) -> &[f64] {
        &self.spins[v * self.n..(v + 1) * self.n]
    }

    #[inline]
    pub(crate) fn s_mut(&mut self, v: usize) -> &mut [f64] {
        &mut self.spins[v * self.n..(v + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.spins
    }

    #[inline]
    pub fn dot(&self, u: VertexId, v: VertexId) -> f64 {
        dot(self.s(u.0), self.s(v.0))
    }

    /// `H = -sum over edges of mult * <s_u, s_v>`.
    pub fn energy(&self) -> f64 {
        let mut h = 0.0;
        for v in 0..self.graph.vertex_count() {
            for &(u, m) in self.graph.adj(v) {
                if u > v {
                    h -= f64::from(m) * dot(self.s(u), self.s(v));
                }
            }
        }
        h
    }

    /// Euclidean norm of the mean spin.
    pub fn magnetisation(&self) -> f64 {
        let mut total = vec![0.0; self.n];
        for s in self.spins.chunks(self.n) {
            for (t, x) in total.iter_mut().zip(s) {
                *t += x;
            }
        }
        norm(&total) / self.graph.vertex_count() as f64
    }

    /// Largest deviation of a spin norm from 1.
    pub fn max_norm_error(&self) -> f64 {
        self.spins
            .chunks(self.n)
            .map(|s| (norm(s) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn renormalise(&mut self) {
        if self.n == 1 {
            return;
        }
        for s in self.spins.chunks_mut(self.n) {
            let r = norm(s);
            for x in s.iter_mut() {
                *x /= r;
            }
        }
    }
}

/// Energy of a configuration.
pub fn energy(c: &SpinConfig<'_>) -> f64 {
    c.energy()
}

fn check_dimension(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::param("n", "spin dimension must be at least 1"))
    } else {
        Ok(())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Uniform point on the unit sphere in `out.len()` dimensions.
pub(crate) fn random_unit<R: Rng + ?Sized>(out: &mut [f64], rng: &mut R) {
    if out.len() == 1 {
        out[0] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        return;
    }
    loop {
        for x in out.iter_mut() {
            *x = StandardNormal.sample(rng);
        }
        let r = norm(out);
        if r > 1e-8 {
            for x in out.iter_mut() {
                *x /= r;
            }
            return;
        }
    }
}
