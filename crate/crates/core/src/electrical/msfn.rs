//! Test functions for the complex translation of angle variables.
//!
//! Given the unit-current potential `h` from `x` to `y`, the function
//! `a = lambda * h` is scaled so that
//!
//! * `a(y) - a(x) >= c1 * d(x, y)` with `c1 > 0`,
//! * `sum over edges |a(u) - a(v)|^2 <= (a(y) - a(x)) / 2`,
//! * `|a(u) - a(v)| <= 1/10` on every edge.

use super::{dirichlet_energy, max_gradient, solve_potential, PotentialField, SolverOptions};
use crate::error::{Error, Result};
use crate::format::sig;
use crate::graphs::{distances, Graph, VertexId};

pub const GRADIENT_CAP: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct MsFunction<'g> {
    pub graph: &'g Graph,
    pub a: Vec<f64>,
    pub x: VertexId,
    pub y: VertexId,
    pub lambda: f64,
    /// `(a(y) - a(x)) / d(x, y)`.
    pub c1: f64,
    /// `sum over edges of mult * (a(u) - a(v))^2`.
    pub energy: f64,
    pub max_gradient: f64,
    pub distance: usize,
}

impl MsFunction<'_> {
    /// `a(y) - a(x)`.
    pub fn gain(&self) -> f64 {
        self.a[self.y.0] - self.a[self.x.0]
    }

    pub fn gain_condition(&self) -> bool {
        self.c1 > 0.0 && self.gain() >= self.c1 * self.distance as f64
    }

    pub fn energy_condition(&self) -> bool {
        self.energy <= 0.5 * self.gain()
    }

    pub fn gradient_condition(&self) -> bool {
        self.max_gradient <= GRADIENT_CAP
    }

    pub fn all_conditions(&self) -> bool {
        self.gain_condition() && self.energy_condition() && self.gradient_condition()
    }
}

/// Largest scaling of the unit-current potential allowed by the energy
/// and gradient conditions.
pub fn ms_function<'g>(g: &'g Graph, x: VertexId, y: VertexId) -> Result<MsFunction<'g>> {
    ms_function_with(g, x, y, &SolverOptions::default())
}

pub fn ms_function_with<'g>(
    g: &'g Graph,
    x: VertexId,
    y: VertexId,
    opts: &SolverOptions,
) -> Result<MsFunction<'g>> {
    let h = solve_potential(g, x, y, opts)?;
    let distance = distances(g, x)?[y.0].ok_or(Error::Disconnected(y))?;
    let h_gain = h.value(y) - h.value(x);
    let h_energy = h.dirichlet_energy();
    let h_grad = h.max_gradient();
    if !(h_gain > 0.0 && h_grad > 0.0) {
        return Err(Error::param("ms_function", "potential difference is not positive"));
    }

    // Thomson gives h_gain == h_energy up to solver tolerance, so the energy
    // cap is 1/2; the measured ratio keeps the inequality exact.
    let mut lambda = 0.5_f64.min(h_gain / (2.0 * h_energy)).min(GRADIENT_CAP / h_grad);
    for _ in 0..64 {
        let a: Vec<f64> = h.values().iter().map(|v| lambda * v).collect();
        let mut msf = MsFunction {
            graph: g,
            x,
            y,
            lambda,
            c1: 0.0,
            energy: dirichlet_energy(g, &a),
            max_gradient: max_gradient(g, &a),
            distance,
            a,
        };
        msf.c1 = msf.gain() / distance as f64;
        if msf.c1 * distance as f64 > msf.gain() {
            msf.c1 = msf.c1.next_down();
        }
        if msf.c1 <= 0.0 {
            return Err(Error::param("ms_function", format!("achieved c1 = {} is not positive", msf.c1)));
        }
        if msf.energy_condition() && msf.gradient_condition() {
            return Ok(msf);
        }
        // rounding pushed a product past its cap
        lambda = lambda.next_down();
    }
    Err(Error::param("ms_function", "could not satisfy the caps in floating point"))
}

/// CSV with header
/// `graph,x,y,distance,lambda,c1,gain,energy,max_gradient,gain_ok,energy_ok,gradient_ok`,
/// floats at 12 significant digits.
pub fn msfn_csv(label: &str, rows: &[MsFunction<'_>]) -> String {
    let mut out = String::from("graph,x,y,distance,lambda,c1,gain,energy,max_gradient,gain_ok,energy_ok,gradient_ok\n");
    for m in rows {
        out.push_str(&format!(
            "{label},{},{},{},{},{},{},{},{},{},{},{}\n",
            m.x,
            m.y,
            m.distance,
            sig(m.lambda, 12),
            sig(m.c1, 12),
            sig(m.gain(), 12),
            sig(m.energy, 12),
            sig(m.max_gradient, 12),
            m.gain_condition(),
            m.energy_condition(),
            m.gradient_condition(),
        ));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingOptimum {
    pub lambda: f64,
    pub exponent: f64,
    /// Upper end of the search interval, `1 / (10 max |dh|)`.
    pub cap: f64,
}

/// Minimises `-lambda (h(y) - h(x)) + beta * sum mult (cosh(lambda dh) - 1)`
/// over `lambda` in `(0, cap]`.
///
/// The objective is convex with negative slope at 0, so the minimiser is
/// the root of the derivative or the cap.
pub fn optimize_scaling(h: &PotentialField<'_>, beta: f64) -> Result<ScalingOptimum> {
    if !(beta > 0.0) {
        return Err(Error::param("beta", "must be positive"));
    }
    let g = h.graph();
    let gain = h.value(h.sink()) - h.value(h.source());
    let steps: Vec<(f64, f64)> = g
        .edges()
        .map(|(u, v, m)| (f64::from(m), h.value(u) - h.value(v)))
        .collect();
    let cap = GRADIENT_CAP / h.max_gradient();
    let exponent = |l: f64| -> f64 {
        -l * gain + beta * steps.iter().map(|&(m, d)| m * ((l * d).cosh() - 1.0)).sum::<f64>()
    };
    let slope = |l: f64| -> f64 { -gain + beta * steps.iter().map(|&(m, d)| m * d * (l * d).sinh()).sum::<f64>() };

    let lambda = if slope(cap) <= 0.0 {
        cap
    } else {
        let (mut lo, mut hi) = (0.0, cap);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * cap {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    Ok(ScalingOptimum {
        lambda,
        exponent: exponent(lambda).min(0.0),
        cap,
    })
}
