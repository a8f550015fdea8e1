//! Graphs as networks of unit resistors (edge conductance = multiplicity).

mod msfn;
mod solver;

pub use msfn::{ms_function, ms_function_with, msfn_csv, optimize_scaling, MsFunction, ScalingOptimum, GRADIENT_CAP};
pub use solver::SolverOptions;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::sig;
use crate::graphs::{contract_boundary, contracted_id, contraction_map, spheres, BoundaryCondition, Graph, VertexId};

/// Unit-current potential between two terminals, grounded at the source.
#[derive(Clone, Debug)]
pub struct PotentialField<'g> {
    graph: &'g Graph,
    values: Vec<f64>,
    source: VertexId,
    sink: VertexId,
    current: f64,
    residual: f64,
    iterations: usize,
}

impl<'g> PotentialField<'g> {
    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, v: VertexId) -> f64 {
        self.values[v.0]
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn sink(&self) -> VertexId {
        self.sink
    }

    pub fn current(&self) -> f64 {
        self.current
    }

    /// Final max-norm Kirchhoff residual.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Potential difference per unit current.
    pub fn resistance(&self) -> f64 {
        (self.values[self.sink.0] - self.values[self.source.0]) / self.current
    }

    /// `sum over edges of mult * (h(u) - h(v))^2`.
    pub fn dirichlet_energy(&self) -> f64 {
        dirichlet_energy(self.graph, &self.values)
    }

    /// Largest `|h(u) - h(v)|` over edges.
    pub fn max_gradient(&self) -> f64 {
        max_gradient(self.graph, &self.values)
    }

    /// Net current out of each vertex, `(L h)(v)`.
    pub fn net_currents(&self) -> Vec<f64> {
        (0..self.graph.vertex_count())
            .map(|v| {
                self.graph
                    .adj(v)
                    .iter()
                    .map(|&(u, m)| f64::from(m) * (self.values[v] - self.values[u]))
                    .sum()
            })
            .collect()
    }
}

pub(crate) fn dirichlet_energy(g: &Graph, values: &[f64]) -> f64 {
    g.edges()
        .map(|(u, v, m)| {
            let d = values[u.0] - values[v.0];
            f64::from(m) * d * d
        })
        .sum()
}

pub(crate) fn max_gradient(g: &Graph, values: &[f64]) -> f64 {
    g.edges()
        .map(|(u, v, _)| (values[u.0] - values[v.0]).abs())
        .fold(0.0, f64::max)
}

/// Solves Kirchhoff's equations for one unit of current between `source`
/// (held at potential 0) and `sink`.
pub fn solve_potential<'g>(
    g: &'g Graph,
    source: VertexId,
    sink: VertexId,
    opts: &SolverOptions,
) -> Result<PotentialField<'g>> {
    g.check_vertex(source)?;
    g.check_vertex(sink)?;
    if source == sink {
        return Err(Error::SameTerminal(source));
    }
    if !(opts.tolerance > 0.0) {
        return Err(Error::param("tolerance", "must be positive"));
    }
    let sol = solver::solve_unit_current(g, source.0, sink.0, opts)?;
    Ok(PotentialField {
        graph: g,
        values: sol.values,
        source,
        sink,
        current: 1.0,
        residual: sol.residual,
        iterations: sol.iterations,
    })
}

/// Effective resistance between `x` and `y`. Under the wired condition the
/// boundary is contracted first, and neither endpoint may lie in it; use
/// [`resistance_to_boundary`] to measure against the wired boundary itself.
pub fn effective_resistance(g: &Graph, x: VertexId, y: VertexId, bc: BoundaryCondition) -> Result<f64> {
    effective_resistance_with(g, x, y, bc, &SolverOptions::default())
}

pub fn effective_resistance_with(
    g: &Graph,
    x: VertexId,
    y: VertexId,
    bc: BoundaryCondition,
    opts: &SolverOptions,
) -> Result<f64> {
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    match bc {
        BoundaryCondition::Free => Ok(solve_potential(g, x, y, opts)?.resistance()),
        BoundaryCondition::Wired => {
            for v in [x, y] {
                if g.is_boundary(v) {
                    return Err(Error::InBoundary(v));
                }
            }
            let wired = contract_boundary(g)?;
            let (cx, cy) = (contracted_id(g, x)?, contracted_id(g, y)?);
            Ok(solve_potential(&wired, cx, cy, opts)?.resistance())
        }
    }
}

/// Resistance between `x` and the contracted boundary.
pub fn resistance_to_boundary(g: &Graph, x: VertexId, opts: &SolverOptions) -> Result<f64> {
    g.check_vertex(x)?;
    if g.is_boundary(x) {
        return Err(Error::InBoundary(x));
    }
    let wired = contract_boundary(g)?;
    let merged = VertexId(wired.vertex_count() - 1);
    Ok(solve_potential(&wired, contracted_id(g, x)?, merged, opts)?.resistance())
}

/// Which vertices at distance `d` a profile point measures against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ProfileTarget {
    /// The smallest id at that distance.
    #[default]
    Canonical,
    /// Mean over the whole sphere.
    SphereMean,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfilePoint {
    pub distance: usize,
    pub resistance: f64,
}

/// Resistance from `center` to vertices at each distance `1..=max`.
///
/// Under the wired condition, targets lying in the boundary are measured
/// against the merged boundary vertex.
pub fn resistance_profile(
    g: &Graph,
    center: VertexId,
    bc: BoundaryCondition,
    target: ProfileTarget,
    opts: &SolverOptions,
) -> Result<Vec<ProfilePoint>> {
    let shells = spheres(g, center)?;
    let wired;
    let (network, ids) = match bc {
        BoundaryCondition::Free => (g, g.vertices().collect::<Vec<_>>()),
        BoundaryCondition::Wired => {
            if g.is_boundary(center) {
                return Err(Error::InBoundary(center));
            }
            wired = contract_boundary(g)?;
            (&wired, contraction_map(g))
        }
    };
    let c = ids[center.0];
    shells
        .iter()
        .enumerate()
        .skip(1)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(distance, shell)| {
            let targets: &[VertexId] = match target {
                ProfileTarget::Canonical => &shell[..1],
                ProfileTarget::SphereMean => shell,
            };
            let mut total = 0.0;
            for &t in targets {
                total += solve_potential(network, c, ids[t.0], opts)?.resistance();
            }
            Ok(ProfilePoint {
                distance,
                resistance: total / targets.len() as f64,
            })
        })
        .collect()
}

/// CSV with header `graph,bc,distance,resistance`, 12 significant digits.
pub fn profile_csv(label: &str, bc: BoundaryCondition, points: &[ProfilePoint]) -> String {
    let mut out = String::from("graph,bc,distance,resistance\n");
    for p in points {
        out.push_str(&format!("{label},{bc},{},{}\n", p.distance, sig(p.resistance, 12)));
    }
    out
}
