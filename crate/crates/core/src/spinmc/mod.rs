//! Monte Carlo sampling of the O(n) model on finite graphs.
//!
//! Gibbs measure `exp(-beta H)` with `H = -sum mult <s_u, s_v>`. Free
//! boundary means the graph as given; wired boundary contracts the outer
//! ring into one vertex that carries an ordinary spin.

mod chain;
mod percolation;
mod samplers;
mod spins;

pub use chain::{correlations_csv, fk_connectivity, run_chain, ChainResult, Estimate};
pub use percolation::{bernoulli_connectivity, fk_bond_probability, ising_to_fk};
pub use samplers::{metropolis_sweep, swendsen_wang_sweep, wolff_step, wolff_step_with, ClusterWorkspace};
pub use spins::{energy, mix64, stream_rng, McRng, SpinConfig};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graphs::{BoundaryCondition, VertexId};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Spin dimension; 1 is Ising, 2 is XY.
    pub n: usize,
    pub beta: f64,
    pub bc: BoundaryCondition,
    /// Wired only: freeze the merged boundary spin to the first basis vector
    /// instead of letting it fluctuate.
    pub pin_boundary: bool,
}

impl ModelParams {
    pub fn new(n: usize, beta: f64, bc: BoundaryCondition) -> Self {
        ModelParams {
            n,
            beta,
            bc,
            pin_boundary: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("n", "spin dimension must be at least 1"));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::param("beta", "must be finite and non-negative"));
        }
        if self.pin_boundary && self.bc != BoundaryCondition::Wired {
            return Err(Error::param("pin_boundary", "only meaningful with the wired boundary"));
        }
        Ok(())
    }

    /// Boundary label used in CSV output.
    pub fn bc_label(&self) -> &'static str {
        match (self.bc, self.pin_boundary) {
            (BoundaryCondition::Wired, true) => "wired-pinned",
            (bc, _) => bc.as_str(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Metropolis,
    #[default]
    Wolff,
    /// One Wolff step after every Metropolis sweep.
    Mixed,
    /// Ising only.
    SwendsenWang,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Metropolis => "metropolis",
            Algorithm::Wolff => "wolff",
            Algorithm::Mixed => "mixed",
            Algorithm::SwendsenWang => "swendsen-wang",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "metropolis" => Ok(Algorithm::Metropolis),
            "wolff" => Ok(Algorithm::Wolff),
            "mixed" => Ok(Algorithm::Mixed),
            "swendsen-wang" => Ok(Algorithm::SwendsenWang),
            other => Err(Error::param("algorithm", format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Start {
    /// Uniform random spins.
    #[default]
    Hot,
    Cold,
}

/// How a per-distance estimate is formed from the vertices at that distance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Averaging {
    #[default]
    Sphere,
    /// Smallest id at each distance.
    Canonical,
}

/// Monte Carlo schedule, counted in sweeps. During burn-in a Wolff sweep
/// is as many cluster moves as it takes to flip `vertex_count` spins; after
/// burn-in the move count per sweep is frozen at the resulting average.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McSchedule {
    pub burn_in: usize,
    pub sweeps: usize,
    /// Measure after every `stride`-th sweep.
    pub stride: usize,
    pub replicas: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub start: Start,
    pub averaging: Averaging,
}

/// Batches per replica for the batch-means error.
pub const BATCHES: usize = 20;

impl Default for McSchedule {
    fn default() -> Self {
        McSchedule {
            burn_in: 1000,
            sweeps: 10_000,
            stride: 1,
            replicas: 4,
            seed: 0,
            algorithm: Algorithm::Wolff,
            start: Start::Hot,
            averaging: Averaging::Sphere,
        }
    }
}

impl McSchedule {
    pub fn measurements(&self) -> usize {
        self.sweeps.checked_div(self.stride).unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.stride == 0 || self.replicas == 0 || self.sweeps == 0 {
            return Err(Error::InvalidSchedule(
                "sweeps, stride and replicas must be positive".into(),
            ));
        }
        if self.measurements() < 2 {
            return Err(Error::InvalidSchedule(format!(
                "{} sweeps at stride {} give fewer than two measurements",
                self.sweeps, self.stride
            )));
        }
        Ok(())
    }
}

/// Per-distance estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceEstimate {
    pub distance: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Pair correlation `<s_center . s_v>` binned by `d(center, v)`, starting at
/// distance 0.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationSeries {
    pub graph: String,
    pub params: ModelParams,
    pub algorithm: String,
    pub center: VertexId,
    pub schedule: Option<McSchedule>,
    pub points: Vec<DistanceEstimate>,
}

impl CorrelationSeries {
    /// Series with the given estimates at distances `0, 1, ...`; handy for
    /// analysis of externally produced numbers.
    pub fn from_values(graph: &str, params: ModelParams, estimates: &[f64], stderrs: &[f64], samples: usize) -> Self {
        let points = estimates
            .iter()
            .zip(stderrs)
            .enumerate()
            .map(|(distance, (&estimate, &stderr))| DistanceEstimate {
                distance,
                estimate,
                stderr,
                samples,
            })
            .collect();
        CorrelationSeries {
            graph: graph.to_string(),
            params,
            algorithm: "external".to_string(),
            center: VertexId(0),
            schedule: None,
            points,
        }
    }

    pub fn max_distance(&self) -> usize {
        self.points.last().map_or(0, |p| p.distance)
    }

    pub fn at(&self, distance: usize) -> Option<&DistanceEstimate> {
        self.points.iter().find(|p| p.distance == distance)
    }
}
