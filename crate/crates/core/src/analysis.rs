//! Decay fits, verdicts and the complex-translation bound.

use std::fmt;

use crate::electrical::MsFunction;
use crate::error::{Error, Result};
use crate::format::sig;
use crate::graphs::{Graph, VertexId};
use crate::spinmc::CorrelationSeries;

/// Least-squares fit of `log C(d) = intercept - rate * d`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    /// `-slope`, clipped at 0.
    pub rate: f64,
    pub intercept: f64,
    /// `None` when the log-estimates have no spread.
    pub r_squared: Option<f64>,
    pub distances_used: Vec<usize>,
}

pub const MIN_FIT_POINTS: usize = 3;

/// Fits the positive, reasonably resolved points at distance >= 1.
/// A point is used when its estimate is positive and its relative error
/// is below one half.
pub fn fit_exponential(series: &CorrelationSeries) -> Result<DecayFit> {
    let pts: Vec<(f64, f64, usize)> = series
        .points
        .iter()
        .filter(|p| p.distance >= 1 && p.estimate > 0.0 && p.stderr / p.estimate < 0.5)
        .map(|p| (p.distance as f64, p.estimate.ln(), p.distance))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            usable: pts.len(),
            required: MIN_FIT_POINTS,
        });
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 1e-24 * k {
        let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        Some((1.0 - ss_res / syy).clamp(0.0, 1.0))
    } else {
        None
    };
    Ok(DecayFit {
        rate: (-slope).max(0.0),
        intercept,
        r_squared,
        distances_used: pts.iter().map(|p| p.2).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub rate_min: f64,
    pub r2_min: f64,
    pub level_min: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            rate_min: 0.05,
            r2_min: 0.9,
            level_min: 0.2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Verdict {
    Decay { rate: f64 },
    Plateau { level: f64 },
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Decay { .. } => "decay",
            Verdict::Plateau { .. } => "plateau",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    pub fn is_decay(&self) -> bool {
        matches!(self, Verdict::Decay { .. })
    }

    pub fn is_plateau(&self) -> bool {
        matches!(self, Verdict::Plateau { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Smallest estimate over distances `1..=D` when every such point has
/// `stderr < level_min / 3`.
fn plateau_level(series: &CorrelationSeries, level_min: f64) -> Option<f64> {
    let tested: Vec<_> = series.points.iter().filter(|p| p.distance >= 1).collect();
    if tested.is_empty() || tested.iter().any(|p| !(p.stderr < level_min / 3.0)) {
        return None;
    }
    Some(tested.iter().map(|p| p.estimate).fold(f64::INFINITY, f64::min))
}

/// Decay is tested first: a series whose fit is clean and steep enough is
/// decaying even if its values are still large at the largest distance.
/// Series reaching only `D < 4` are inconclusive.
pub fn classify(series: &CorrelationSeries, t: &Thresholds) -> Verdict {
    if series.max_distance() < 4 {
        return Verdict::Inconclusive;
    }
    if let Ok(fit) = fit_exponential(series) {
        if fit.rate > t.rate_min && fit.r_squared.is_some_and(|r2| r2 >= t.r2_min) {
            return Verdict::Decay { rate: fit.rate };
        }
    }
    match plateau_level(series, t.level_min) {
        Some(level) if level >= t.level_min => Verdict::Plateau { level },
        _ => Verdict::Inconclusive,
    }
}

/// Coefficient in front of the `cosh` loss term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LossCoefficient {
    #[default]
    Beta,
    /// Doubled, for sensitivity checks.
    TwoBeta,
}

impl LossCoefficient {
    pub fn factor(self) -> f64 {
        match self {
            LossCoefficient::Beta => 1.0,
            LossCoefficient::TwoBeta => 2.0,
        }
    }
}

/// `exp(-(a(y) - a(x)) + c beta sum mult (cosh(a(u) - a(v)) - 1))` for an
/// arbitrary function `a` on the vertices.
pub fn ms_bound_values(g: &Graph, a: &[f64], x: VertexId, y: VertexId, beta: f64, coeff: LossCoefficient) -> f64 {
    let loss: f64 = g
        .edges()
        .map(|(u, v, m)| f64::from(m) * ((a[u.0] - a[v.0]).cosh() - 1.0))
        .sum();
    (-(a[y.0] - a[x.0]) + coeff.factor() * beta * loss).exp()
}

/// Upper bound on the O(2) pair correlation `<s_x . s_y>` obtained by
/// shifting angles by `i a`.
pub fn ms_bound(msf: &MsFunction<'_>, beta: f64, coeff: LossCoefficient) -> f64 {
    ms_bound_values(msf.graph, &msf.a, msf.x, msf.y, beta, coeff)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MagnetisationProxy {
    pub total: f64,
    /// `|sphere(d)| * C(d)` for each distance.
    pub terms: Vec<f64>,
}

/// `sum_d |sphere(d)| C(d)` including the `d = 0` term.
pub fn magnetisation_proxy(series: &CorrelationSeries, spheres: &[usize]) -> Result<MagnetisationProxy> {
    if series.points.len() != spheres.len() {
        return Err(Error::param(
            "spheres",
            format!("{} sphere sizes for {} distances", spheres.len(), series.points.len()),
        ));
    }
    let terms: Vec<f64> = series
        .points
        .iter()
        .zip(spheres)
        .map(|(p, &s)| s as f64 * p.estimate)
        .collect();
    Ok(MagnetisationProxy {
        total: terms.iter().sum(),
        terms,
    })
}

/// CSV with header `graph,n,beta,bc,distance,sphere_size,estimate,term,cumulative`,
/// floats at 10 significant digits. The last `cumulative` is the total.
pub fn magnetisation_csv(series: &CorrelationSeries, spheres: &[usize], proxy: &MagnetisationProxy) -> String {
    let mut out = String::from("graph,n,beta,bc,distance,sphere_size,estimate,term,cumulative\n");
    let mut cumulative = 0.0;
    for ((p, &size), &term) in series.points.iter().zip(spheres).zip(&proxy.terms) {
        cumulative += term;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            series.graph,
            series.params.n,
            sig(series.params.beta, 10),
            series.params.bc_label(),
            p.distance,
            size,
            sig(p.estimate, 10),
            sig(term, 10),
            sig(cumulative, 10),
        ));
    }
    out
}

/// One line of the verdict report.
#[derive(Clone, Debug, PartialEq)]
pub struct VerdictRow {
    pub graph: String,
    pub n: usize,
    pub beta: f64,
    pub bc: String,
    pub verdict: Verdict,
    pub fit: Option<DecayFit>,
    /// Set for plateau verdicts.
    pub plateau_level: Option<f64>,
    pub ms_bound_at_max_d: Option<f64>,
}

impl VerdictRow {
    pub fn new(series: &CorrelationSeries, t: &Thresholds, ms_bound_at_max_d: Option<f64>) -> Self {
        let verdict = classify(series, t);
        VerdictRow {
            graph: series.graph.clone(),
            n: series.params.n,
            beta: series.params.beta,
            bc: series.params.bc_label().to_string(),
            verdict,
            fit: fit_exponential(series).ok(),
            plateau_level: match verdict {
                Verdict::Plateau { level } => Some(level),
                _ => None,
            },
            ms_bound_at_max_d,
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| sig(v, 10)).unwrap_or_default()
}

/// CSV with header
/// `graph,n,beta,bc,verdict,rate,r_squared,plateau_level,ms_bound_at_max_d`;
/// missing values are empty fields.
pub fn verdicts_csv<'a>(rows: impl IntoIterator<Item = &'a VerdictRow>) -> String {
    let mut out = String::from("graph,n,beta,bc,verdict,rate,r_squared,plateau_level,ms_bound_at_max_d\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.graph,
            r.n,
            sig(r.beta, 10),
            r.bc,
            r.verdict,
            opt(r.fit.as_ref().map(|f| f.rate)),
            opt(r.fit.as_ref().and_then(|f| f.r_squared)),
            opt(r.plateau_level),
            opt(r.ms_bound_at_max_d),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::electrical::ms_function;
    use crate::graphs::{build_reference, BoundaryCondition, Reference};
    use crate::spinmc::ModelParams;

    fn series(values: &[f64], err: f64) -> CorrelationSeries {
        let p = ModelParams::new(2, 1.0, BoundaryCondition::Free);
        CorrelationSeries::from_values("t", p, values, &vec![err; values.len()], 100)
    }

    fn exp_series(rate: f64, dmax: usize) -> CorrelationSeries {
        let v: Vec<f64> = (0..=dmax).map(|d| (-rate * d as f64).exp()).collect();
        series(&v, 0.0)
    }

    #[test]
    fn exact_exponential() {
        let fit = fit_exponential(&exp_series(0.5, 6)).unwrap();
        assert!((fit.rate - 0.5).abs() < 1e-12);
        assert!((fit.r_squared.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(fit.distances_used, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn constant_series_is_degenerate() {
        let fit = fit_exponential(&series(&[1.0, 0.8, 0.8, 0.8, 0.8], 0.0)).unwrap();
        assert_eq!(fit.rate, 0.0);
        assert_eq!(fit.r_squared, None);
    }

    #[test]
    fn noisy_points_are_dropped() {
        let s = series(&[1.0, 0.5, 0.25, -0.01, 0.1], 0.0);
        let mut s2 = s.clone();
        s2.points[4].stderr = 0.06;
        assert_eq!(fit_exponential(&s).unwrap().distances_used, vec![1, 2, 4]);
        assert!(matches!(
            fit_exponential(&s2),
            Err(Error::InsufficientData { usable: 2, required: 3 })
        ));
    }

    #[test]
    fn verdict_examples() {
        let t = Thresholds::default();
        assert!(classify(&series(&[1.0, 0.8, 0.8, 0.8, 0.8, 0.8], 1e-4), &t).is_plateau());
        assert!(classify(&exp_series(1.0, 6), &t).is_decay());
        let noise = series(&[1.0, 0.01, -0.02, 0.0, 0.03, -0.01], 0.5);
        assert_eq!(classify(&noise, &t), Verdict::Inconclusive);
        // too short to judge
        assert_eq!(classify(&exp_series(1.0, 3), &t), Verdict::Inconclusive);
    }

    #[test]
    fn bound_with_zero_function_is_one() {
        let g = build_reference(Reference::Path { length: 3 }).unwrap();
        let a = vec![0.0; 4];
        assert_eq!(ms_bound_values(&g, &a, VertexId(0), VertexId(3), 2.0, LossCoefficient::Beta), 1.0);
    }

    #[test]
    fn bound_on_path() {
        let d = 6;
        let g = build_reference(Reference::Path { length: d }).unwrap();
        let msf = ms_function(&g, VertexId(0), VertexId(d)).unwrap();
        let per_edge = -0.1 + (0.1f64.cosh() - 1.0);
        assert!((per_edge + 0.0950).abs() < 1e-4);
        let b = ms_bound(&msf, 1.0, LossCoefficient::Beta);
        assert!((b.ln() - d as f64 * per_edge).abs() < 1e-10);
        let b2 = ms_bound(&msf, 1.0, LossCoefficient::TwoBeta);
        assert!(b2 > b);
    }

    #[test]
    fn proxy_sums() {
        let s = series(&[1.0; 6], 0.0);
        assert_eq!(magnetisation_proxy(&s, &[1; 6]).unwrap().total, 6.0);
        let v: Vec<f64> = (0..=5).map(|d| 0.5f64.powi(d)).collect();
        let sizes: Vec<usize> = (0..=5).map(|d| 1 << d).collect();
        let p = magnetisation_proxy(&series(&v, 0.0), &sizes).unwrap();
        assert_eq!(p.total, 6.0);
        assert!(p.terms.iter().all(|&t| t == 1.0));
        assert!(magnetisation_proxy(&s, &[1; 5]).is_err());
    }

    #[test]
    fn csv_fields() {
        let row = VerdictRow::new(&exp_series(0.5, 6), &Thresholds::default(), Some(0.25));
        let csv = verdicts_csv([&row]);
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "t,2,1,free,decay,0.5,1,,0.25"
        );
    }

    #[test]
    fn magnetisation_rows() {
        let v: Vec<f64> = (0..=3).map(|d| 0.5f64.powi(d)).collect();
        let sizes = [1, 2, 4, 8];
        let s = series(&v, 0.0);
        let p = magnetisation_proxy(&s, &sizes).unwrap();
        let csv = magnetisation_csv(&s, &sizes, &p);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "graph,n,beta,bc,distance,sphere_size,estimate,term,cumulative");
        assert_eq!(lines[4], "t,2,1,free,3,8,0.125,1,4");
    }
}
