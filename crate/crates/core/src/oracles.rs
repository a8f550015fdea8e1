//! Exact reference values for tiny instances.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graphs::{Graph, VertexId};

/// Value together with a bound on its absolute error.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactResult {
    pub value: f64,
    pub method: String,
    pub error_bound: f64,
}

pub const BRUTE_FORCE_LIMIT: usize = 20;
pub const DENSE_LIMIT: usize = 50;

/// `<s_x s_y>` for the Ising model by summing over all `2^V` states.
///
/// States are visited in Gray-code order so each step flips one spin and
/// updates the energy locally. Weights are taken relative to the ground
/// state energy, so nothing overflows.
pub fn brute_force_ising(g: &Graph, beta: f64, x: VertexId, y: VertexId) -> Result<ExactResult> {
    let n = g.vertex_count();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            vertices: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::param("beta", "must be finite and non-negative"));
    }

    // first pass: energies, second pass: weights shifted by the minimum
    let states = 1usize << n;
    let mut spins = vec![1i64; n];
    let mut h: i64 = -(g.total_multiplicity() as i64);
    let mut energies = Vec::with_capacity(states);
    let mut products = Vec::with_capacity(states);
    for k in 0..states {
        if k > 0 {
            let v = k.trailing_zeros() as usize;
            let local: i64 = g.adj(v).iter().map(|&(u, m)| i64::from(m) * spins[u]).sum();
            // flipping s_v changes H by 2 s_v * local
            h += 2 * spins[v] * local;
            spins[v] = -spins[v];
        }
        energies.push(h);
        products.push(spins[x.0] * spins[y.0]);
    }
    let h_min = *energies.iter().min().expect("at least one state");
    let (mut num, mut den) = (0.0, 0.0);
    for (&e, &p) in energies.iter().zip(&products) {
        let w = (-beta * (e - h_min) as f64).exp();
        num += p as f64 * w;
        den += w;
    }
    let value = num / den;
    Ok(ExactResult {
        value,
        method: format!("enumeration of {states} states"),
        error_bound: 4.0 * states as f64 * f64::EPSILON,
    })
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Adaptive Simpson; returns the integral and the summed refinement deltas.
fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return (left + right + delta / 15.0, delta.abs());
        }
        let (l, le) = recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1);
        let (r, re) = recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
        (l + r, le + re)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Single-edge O(2) correlation `I1(beta) / I0(beta)`, as the ratio of
/// `int cos(t) e^{beta cos t}` to `int e^{beta cos t}` over `[0, pi]`.
pub fn bessel_ratio(beta: f64) -> Result<ExactResult> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::param("beta", "must be finite and non-negative"));
    }
    if beta == 0.0 {
        return Ok(ExactResult {
            value: 0.0,
            method: "odd integrand".into(),
            error_bound: 0.0,
        });
    }
    // scale by e^{-beta} so the integrands stay bounded by 1
    let pi = std::f64::consts::PI;
    let den_f = |t: f64| (beta * (t.cos() - 1.0)).exp();
    let num_f = |t: f64| t.cos() * (beta * (t.cos() - 1.0)).exp();
    let tol = 1e-13;
    let (num, num_err) = adaptive_simpson(&num_f, 0.0, pi, tol);
    let (den, den_err) = adaptive_simpson(&den_f, 0.0, pi, tol);
    let value = num / den;
    // first-order propagation of the refinement deltas through the ratio
    let error_bound = (num_err + value.abs() * den_err) / den + 4.0 * f64::EPSILON;
    Ok(ExactResult {
        value,
        method: "adaptive Simpson".into(),
        error_bound,
    })
}

/// `bessel_ratio(beta)^d`: the O(2) correlation across `d` edges of a
/// free-boundary path, where the angle increments are independent.
pub fn o2_path_correlation(d: usize, beta: f64) -> Result<ExactResult> {
    let r = bessel_ratio(beta)?;
    if d == 0 {
        return Ok(ExactResult {
            value: 1.0,
            method: "distance 0".into(),
            error_bound: 0.0,
        });
    }
    let value = r.value.powi(d as i32);
    let dd = d as f64;
    let error_bound = dd * (r.value.abs() + r.error_bound).powi(d as i32 - 1) * r.error_bound
        + dd * f64::EPSILON * value.abs();
    Ok(ExactResult {
        value,
        method: format!("bessel ratio to the power {d}"),
        error_bound,
    })
}

/// Effective resistance by LU factorisation of the Laplacian with `x`
/// grounded. The bound is the residual scaled by the inverse's norm,
/// estimated from the solution of the same system.
pub fn dense_resistance(g: &Graph, x: VertexId, y: VertexId) -> Result<ExactResult> {
    let n = g.vertex_count();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            vertices: n,
            limit: DENSE_LIMIT,
        });
    }
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    if x == y {
        return Err(Error::SameTerminal(x));
    }
    let keep: Vec<usize> = (0..n).filter(|&v| v != x.0).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &v) in keep.iter().enumerate() {
        index[v] = i;
    }
    let m = keep.len();
    let mut lap = DMatrix::<f64>::zeros(m, m);
    for (i, &v) in keep.iter().enumerate() {
        for &(u, mult) in g.adj(v) {
            let w = f64::from(mult);
            lap[(i, i)] += w;
            if u != x.0 {
                lap[(i, index[u])] -= w;
            }
        }
    }
    let mut rhs = DVector::<f64>::zeros(m);
    rhs[index[y.0]] = 1.0;
    let sol = lap
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::param("graph", "grounded Laplacian is singular"))?;
    let residual = (&lap * &sol - &rhs).amax();
    let value = sol[index[y.0]];
    Ok(ExactResult {
        value,
        method: "dense LU".into(),
        error_bound: residual * sol.amax().max(1.0) * m as f64 + 8.0 * f64::EPSILON * value.abs(),
    })
}
