//! Jacobi-preconditioned conjugate gradient on the grounded graph Laplacian.

use crate::error::{Error, Result};
use crate::graphs::Graph;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Bound on the max-norm of the Kirchhoff residual.
    pub tolerance: f64,
    /// Defaults to `20 * vertex_count` when `None`.
    pub max_iterations: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-10,
            max_iterations: None,
        }
    }
}

pub(crate) struct Solution {
    pub values: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// `y = L x` with the grounded row and column removed (entry forced to 0).
fn apply_laplacian(g: &Graph, ground: usize, x: &[f64], y: &mut [f64]) {
    for (v, out) in y.iter_mut().enumerate() {
        if v == ground {
            *out = 0.0;
            continue;
        }
        let mut acc = 0.0;
        for &(u, m) in g.adj(v) {
            let m = f64::from(m);
            acc += m * x[v];
            if u != ground {
                acc -= m * x[u];
            }
        }
        *out = acc;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves `L h = e_sink` with `h(source) = 0`, i.e. one unit of current
/// entering at `sink` and leaving at `source`.
///
/// Converged means the max-norm residual is below `tolerance` and the
/// residual's projection `h . r` is too; the latter bounds the gap between
/// Dirichlet energy and `h(sink)`.
pub(crate) fn solve_unit_current(
    g: &Graph,
    source: usize,
    sink: usize,
    opts: &SolverOptions,
) -> Result<Solution> {
    let n = g.vertex_count();
    let cap = opts.max_iterations.unwrap_or(20 * n).max(1);
    let tol = opts.tolerance;
    let inv_diag: Vec<f64> = (0..n)
        .map(|v| {
            let d: u32 = g.adj(v).iter().map(|&(_, m)| m).sum();
            if v == source || d == 0 {
                0.0
            } else {
                1.0 / f64::from(d)
            }
        })
        .collect();

    let mut b = vec![0.0; n];
    b[sink] = 1.0;
    let mut x = vec![0.0; n];
    let mut r = b.clone();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut iterations = 0;

    loop {
        if max_abs(&r) <= tol && dot(&x, &r).abs() <= tol {
            // Recompute the true residual; the recursive one drifts.
            apply_laplacian(g, source, &x, &mut ap);
            for v in 0..n {
                r[v] = if v == source { 0.0 } else { b[v] - ap[v] };
            }
            if max_abs(&r) <= tol && dot(&x, &r).abs() <= tol {
                break;
            }
            z = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
        }
        if iterations >= cap {
            return Err(Error::NonConvergence {
                iterations,
                residual: max_abs(&r),
            });
        }
        apply_laplacian(g, source, &p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::NonConvergence {
                iterations,
                residual: max_abs(&r),
            });
        }
        let alpha = rz / pap;
        for v in 0..n {
            x[v] += alpha * p[v];
            r[v] -= alpha * ap[v];
        }
        for v in 0..n {
            z[v] = r[v] * inv_diag[v];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for v in 0..n {
            p[v] = z[v] + beta * p[v];
        }
        iterations += 1;
    }

    Ok(Solution {
        residual: max_abs(&r),
        values: x,
        iterations,
    })
}
