//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use hypspin_cli::config::parse_config;
use hypspin_cli::experiment::ARTIFACTS;
use hypspin_cli::{run_experiment, Report};
use hypspin_core::analysis::{classify, fit_exponential, ms_bound, LossCoefficient, Thresholds, Verdict};
use hypspin_core::electrical::{
    effective_resistance_with, ms_function_with, resistance_profile, ProfileTarget, SolverOptions,
};
use hypspin_core::graphs::{
    build_reference, build_ringed_tree, build_triangulation, contract_boundary, spheres, BoundaryCondition, Graph,
    Horizontal, Reference, VertexId,
};
use hypspin_core::oracles::{brute_force_ising, dense_resistance, o2_path_correlation};
use hypspin_core::spinmc::{
    fk_connectivity, run_chain, Algorithm, CorrelationSeries, DistanceEstimate, McSchedule, ModelParams,
};
use statrs::function::erf::erfc;

const SIGMAS: f64 = 3.0;
const SOLVER_TOLERANCE: f64 = 1e-10;
const RUNTIME_LIMIT_SECS: f64 = 600.0;
/// Free-boundary increment band on the radius-8 ball, frozen from a pilot.
const FREE_BAND: (f64, f64) = (0.15, 0.35);
const WIRED_INCREMENT_MAX: f64 = 1e-2;
const C1_VARIATION_MAX: f64 = 0.25;
const DENSE_AGREEMENT: f64 = 1e-8;

struct Outcome {
    id: usize,
    name: &'static str,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn new(id: usize, name: &'static str) -> Self {
        Outcome {
            id,
            name,
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: String) {
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn print(&self) {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let detail = self.failures.iter().chain(&self.notes).cloned().collect::<Vec<_>>().join("; ");
        println!("{status} criterion {} {}: {detail}", self.id, self.name);
    }
}

fn opts() -> SolverOptions {
    SolverOptions {
        tolerance: SOLVER_TOLERANCE,
        ..SolverOptions::default()
    }
}

fn schedule(algorithm: Algorithm, sweeps: usize, seed: u64) -> McSchedule {
    McSchedule {
        burn_in: sweeps / 10,
        sweeps,
        replicas: 4,
        seed,
        algorithm,
        ..McSchedule::default()
    }
}

fn headline_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/headline.conf")
}

fn run_in_pool(threads: usize, text: &str, dir: &Path) -> (Report, BTreeMap<&'static str, Vec<u8>>) {
    let mut cfg = parse_config(text).expect("headline config parses");
    cfg.output_dir = dir.to_path_buf();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let report = pool.install(|| run_experiment(&cfg)).expect("headline run");
    let files = ARTIFACTS
        .iter()
        .map(|&name| (name, fs::read(dir.join(name)).expect("artifact written")))
        .collect();
    (report, files)
}

fn cell(report: &Report, n: usize, beta: f64) -> Option<&CorrelationSeries> {
    report
        .chains
        .iter()
        .map(|c| &c.series)
        .find(|s| s.params.n == n && s.params.beta == beta && s.params.bc == BoundaryCondition::Free)
}

fn describe(s: &CorrelationSeries, t: &Thresholds) -> (Verdict, String) {
    let v = classify(s, t);
    let fit = fit_exponential(s)
        .map(|f| format!("rate={:.4} r2={}", f.rate, f.r_squared.map_or("-".into(), |r| format!("{r:.4}"))))
        .unwrap_or_else(|_| "no fit".into());
    (v, format!("n={} beta={}: {} {fit}", s.params.n, s.params.beta, v.as_str()))
}

fn dichotomy(report: &Report, elapsed: f64) -> Outcome {
    let mut o = Outcome::new(1, "dichotomy on the radius-5 ball");
    let t = Thresholds::default();
    let g = build_triangulation(7, 5).unwrap();
    o.check(g.vertex_count() == 617, format!("{} vertices", g.vertex_count()));
    let expect: [(usize, f64, &str); 5] = [(1, 1.5, "plateau"), (2, 0.5, "decay"), (2, 1.5, "decay"), (2, 3.0, "decay"), (1, 0.25, "decay")];
    for (n, beta, want) in expect {
        let Some(s) = cell(report, n, beta) else {
            o.check(false, format!("n={n} beta={beta}: missing from the headline run"));
            continue;
        };
        let (v, text) = describe(s, &t);
        let ok = match want {
            "plateau" => v.is_plateau(),
            _ => {
                let fit = fit_exponential(s).ok();
                v.is_decay()
                    && fit.is_some_and(|f| f.rate > t.rate_min && f.r_squared.is_some_and(|r| r >= t.r2_min))
            }
        };
        o.check(ok, format!("{text} (want {want})"));
    }
    o.check(elapsed < RUNTIME_LIMIT_SECS, format!("suite runtime {elapsed:.0}s"));
    o
}

fn tree_contrast() -> Outcome {
    let mut o = Outcome::new(2, "tree decays where the triangulation orders");
    let beta = 2.0;
    let tree = build_reference(Reference::Tree { branching: 2, depth: 6 }).unwrap();
    let p = ModelParams::new(1, beta, BoundaryCondition::Free);
    let r = run_chain(&tree, &p, &schedule(Algorithm::Wolff, 20_000, 21), VertexId(0)).unwrap();
    let mut worst: f64 = 0.0;
    for pt in &r.series.points[1..] {
        let exact = beta.tanh().powi(pt.distance as i32);
        let z = (pt.estimate - exact).abs() / pt.stderr;
        worst = worst.max(z);
        if z > SIGMAS {
            o.check(false, format!("tree d={}: {:.5} vs {:.5} ({z:.2} sigma)", pt.distance, pt.estimate, exact));
        }
    }
    o.check(true, format!("tree within {worst:.2} sigma of tanh(2)^d"));
    let hyp = build_triangulation(7, 5).unwrap();
    let r = run_chain(&hyp, &p, &schedule(Algorithm::Wolff, 20_000, 22), VertexId(0)).unwrap();
    let (v, text) = describe(&r.series, &Thresholds::default());
    o.check(v.is_plateau(), format!("triangulation {text}"));
    o
}

fn increments(points: &[f64]) -> Vec<f64> {
    points.windows(2).map(|w| w[1] - w[0]).collect()
}

fn resistance_laws() -> Outcome {
    let mut o = Outcome::new(3, "resistance growth laws");
    let opts = opts();

    let g = build_triangulation(7, 8).unwrap();
    let profile = resistance_profile(&g, VertexId(0), BoundaryCondition::Free, ProfileTarget::Canonical, &opts).unwrap();
    let r: Vec<f64> = std::iter::once(0.0).chain(profile.iter().map(|p| p.resistance)).collect();
    let inc = increments(&r);
    let band = &inc[2..=7];
    let ok = band.iter().all(|&x| x >= FREE_BAND.0 && x <= FREE_BAND.1);
    o.check(
        ok,
        format!(
            "free increments d=2..7 in [{:.4}, {:.4}], band [{}, {}]",
            band.iter().cloned().fold(f64::INFINITY, f64::min),
            band.iter().cloned().fold(0.0, f64::max),
            FREE_BAND.0,
            FREE_BAND.1
        ),
    );

    let side = 41;
    let grid = build_reference(Reference::Grid { side }).unwrap();
    let center = VertexId((side / 2) * side + side / 2);
    let profile = resistance_profile(&grid, center, BoundaryCondition::Free, ProfileTarget::Canonical, &opts).unwrap();
    let r: Vec<f64> = std::iter::once(0.0).chain(profile.iter().take(11).map(|p| p.resistance)).collect();
    let inc = increments(&r);
    let decreasing = inc[1..=10].windows(2).all(|w| w[1] < w[0]);
    o.check(decreasing, format!("41x41 grid increments d=1..10 strictly decreasing: {decreasing}"));

    let target = VertexId(8);
    let mut prev = 0.0;
    let mut last = f64::INFINITY;
    let mut monotone = true;
    for radius in 3..=8 {
        let g = build_triangulation(7, radius).unwrap();
        let w = effective_resistance_with(&g, VertexId(0), target, BoundaryCondition::Wired, &opts).unwrap();
        monotone &= w >= prev;
        last = w - prev;
        prev = w;
    }
    o.check(monotone, "wired resistance non-decreasing in radius".into());
    o.check(
        last < WIRED_INCREMENT_MAX,
        format!("wired increment at radius 8 {last:.2e} < {WIRED_INCREMENT_MAX:e}"),
    );
    o
}

fn ms_certificates() -> Outcome {
    let mut o = Outcome::new(4, "MS-function certificates");
    let g = build_triangulation(7, 8).unwrap();
    let shells = spheres(&g, VertexId(0)).unwrap();
    let mut c1 = Vec::new();
    let mut bad = Vec::new();
    for (d, shell) in shells.iter().enumerate().take(7).skip(2) {
        for y in [shell[0], shell[shell.len() / 2]] {
            let m = ms_function_with(&g, VertexId(0), y, &opts()).unwrap();
            if !(m.all_conditions() && m.c1 > 0.0) {
                bad.push(format!("d={d} y={y}"));
            }
            c1.push(m.c1);
        }
    }
    let what = if bad.is_empty() {
        format!("all three inequalities hold on {} pairs", c1.len())
    } else {
        format!("inequalities violated at {}", bad.join(", "))
    };
    o.check(bad.is_empty(), what);
    let (lo, hi) = c1.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    let variation = (hi - lo) / hi;
    o.check(
        variation < C1_VARIATION_MAX,
        format!("c1 in [{lo:.4}, {hi:.4}], variation {:.1}%", 100.0 * variation),
    );
    o
}

fn bound_dominance(report: &Report) -> Outcome {
    let mut o = Outcome::new(5, "MS bound dominates the O(2) estimate");
    let g = build_triangulation(7, 5).unwrap();
    let shells = spheres(&g, VertexId(0)).unwrap();
    let functions: Vec<Vec<_>> = shells
        .iter()
        .map(|shell| {
            shell
                .iter()
                .filter(|&&y| y != VertexId(0))
                .map(|&y| ms_function_with(&g, VertexId(0), y, &opts()).unwrap())
                .collect()
        })
        .collect();
    let mut tight = f64::INFINITY;
    for beta in [0.5, 1.5, 3.0] {
        let Some(s) = cell(report, 2, beta) else {
            o.check(false, format!("beta={beta}: n=2 cell missing"));
            continue;
        };
        for coeff in [LossCoefficient::Beta, LossCoefficient::TwoBeta] {
            for pt in &s.points[1..] {
                let fs = &functions[pt.distance];
                let bound = fs.iter().map(|m| ms_bound(m, beta, coeff)).sum::<f64>() / fs.len() as f64;
                let floor = pt.estimate - SIGMAS * pt.stderr;
                tight = tight.min(bound - floor);
                if bound < floor {
                    o.check(
                        false,
                        format!("beta={beta} {coeff:?} d={}: bound {bound:.4} < {:.4}", pt.distance, floor),
                    );
                }
            }
        }
    }
    o.check(true, format!("smallest margin {tight:.4}"));
    o
}

fn small_corpus() -> Vec<Graph> {
    let mut out = vec![
        build_triangulation(7, 1).unwrap(),
        contract_boundary(&build_triangulation(7, 2).unwrap()).unwrap(),
        build_ringed_tree(2, Horizontal::Path).unwrap(),
    ];
    for kind in [
        Reference::Cycle { length: 3 },
        Reference::Path { length: 4 },
        Reference::Complete { order: 4 },
        Reference::Cycle { length: 6 },
        Reference::Tree { branching: 2, depth: 2 },
        Reference::Grid { side: 3 },
    ] {
        out.push(build_reference(kind).unwrap());
    }
    out
}

fn dense_corpus() -> Vec<Graph> {
    let mut out = small_corpus();
    out.extend([
        build_triangulation(7, 2).unwrap(),
        build_triangulation(8, 1).unwrap(),
        contract_boundary(&build_triangulation(7, 3).unwrap()).unwrap(),
        build_ringed_tree(4, Horizontal::Cycle).unwrap(),
        build_reference(Reference::Grid { side: 7 }).unwrap(),
        build_reference(Reference::Complete { order: 10 }).unwrap(),
        build_reference(Reference::Path { length: 40 }).unwrap(),
    ]);
    out
}

/// Batch means report zero error when no fluctuation was seen, yet a mean
/// of N samples cannot resolve a deviation below 1/N.
fn resolved_stderr(pt: &DistanceEstimate) -> f64 {
    pt.stderr.max(1.0 / pt.samples as f64)
}

/// Per-point comparisons of estimates against exact values.
#[derive(Default)]
struct Tally {
    compared: usize,
    exceeded: usize,
    worst: f64,
}

impl Tally {
    fn compare(&mut self, o: &mut Outcome, what: &str, pt: &DistanceEstimate, exact: f64, slack: f64) {
        let sigma = resolved_stderr(pt);
        let err = (pt.estimate - exact).abs();
        self.compared += 1;
        self.worst = self.worst.max(err / sigma);
        if err > SIGMAS * sigma + slack {
            self.exceeded += 1;
            o.check(
                false,
                format!("{what} d={}: {:.5} vs {exact:.5} +- {:.5}", pt.distance, pt.estimate, pt.stderr),
            );
        }
    }

    /// Summary with the number of exceedances an unbiased Gaussian
    /// estimator would produce on average.
    fn summary(&self, name: &str) -> String {
        let tail = erfc(SIGMAS / std::f64::consts::SQRT_2);
        format!(
            "{name}: {} comparisons, {} beyond {SIGMAS} sigma (expected {:.1}), worst {:.2} sigma",
            self.compared,
            self.exceeded,
            tail * self.compared as f64,
            self.worst
        )
    }
}

fn oracle_equivalence() -> Outcome {
    let mut o = Outcome::new(6, "Monte Carlo and solvers match exact oracles");
    let mut ising = Tally::default();
    let mut seed = 600;
    for g in small_corpus() {
        assert!(g.vertex_count() <= 12);
        let shells = spheres(&g, VertexId(0)).unwrap();
        for beta in [0.3, 1.0, 2.0] {
            let exact: Vec<f64> = shells
                .iter()
                .map(|shell| {
                    shell
                        .iter()
                        .map(|&v| brute_force_ising(&g, beta, VertexId(0), v).unwrap().value)
                        .sum::<f64>()
                        / shell.len() as f64
                })
                .collect();
            for algorithm in [Algorithm::Metropolis, Algorithm::Wolff] {
                seed += 1;
                let p = ModelParams::new(1, beta, BoundaryCondition::Free);
                let r = run_chain(&g, &p, &schedule(algorithm, 20_000, seed), VertexId(0)).unwrap();
                let what = format!("{} {algorithm} beta={beta}", g.label());
                for pt in &r.series.points[1..] {
                    ising.compare(&mut o, &what, pt, exact[pt.distance], 0.0);
                }
            }
        }
    }
    o.check(true, ising.summary("Ising"));

    let path = build_reference(Reference::Path { length: 6 }).unwrap();
    let mut o2 = Tally::default();
    for beta in [0.5, 1.0, 2.0] {
        for algorithm in [Algorithm::Metropolis, Algorithm::Wolff] {
            seed += 1;
            let p = ModelParams::new(2, beta, BoundaryCondition::Free);
            let r = run_chain(&path, &p, &schedule(algorithm, 20_000, seed), VertexId(0)).unwrap();
            let what = format!("O(2) path {algorithm} beta={beta}");
            for pt in &r.series.points[1..] {
                let exact = o2_path_correlation(pt.distance, beta).unwrap();
                o2.compare(&mut o, &what, pt, exact.value, exact.error_bound);
            }
        }
    }
    o.check(true, o2.summary("O(2) path"));

    let mut max_diff: f64 = 0.0;
    for g in dense_corpus() {
        assert!(g.vertex_count() <= 50);
        for x in 0..g.vertex_count() {
            for y in x + 1..g.vertex_count() {
                let (x, y) = (VertexId(x), VertexId(y));
                let dense = dense_resistance(&g, x, y).unwrap().value;
                let cg = effective_resistance_with(&g, x, y, BoundaryCondition::Free, &opts()).unwrap();
                max_diff = max_diff.max((dense - cg).abs());
            }
        }
    }
    o.check(
        max_diff <= DENSE_AGREEMENT,
        format!("dense vs iterative resistance max diff {max_diff:.1e}"),
    );
    o
}

fn fk_coupling() -> Outcome {
    let mut o = Outcome::new(7, "FK connectivity equals the Ising correlation");
    let g = build_triangulation(7, 4).unwrap();
    let mut worst: f64 = 0.0;
    for (i, beta) in [0.3, 1.0].into_iter().enumerate() {
        let p = ModelParams::new(1, beta, BoundaryCondition::Free);
        let fk = fk_connectivity(&g, &p, &schedule(Algorithm::SwendsenWang, 20_000, 700 + i as u64), VertexId(0)).unwrap();
        let spin = run_chain(&g, &p, &schedule(Algorithm::Wolff, 20_000, 710 + i as u64), VertexId(0)).unwrap();
        for (a, b) in fk.points.iter().zip(&spin.series.points).skip(1) {
            let sigma = a.stderr.hypot(b.stderr);
            let err = (a.estimate - b.estimate).abs();
            worst = worst.max(err / sigma);
            if err > SIGMAS * sigma {
                o.check(
                    false,
                    format!("beta={beta} d={}: fk {:.5} vs spin {:.5}", a.distance, a.estimate, b.estimate),
                );
            }
        }
    }
    o.check(true, format!("worst {worst:.2} sigma"));
    o
}

fn determinism(a: &BTreeMap<&'static str, Vec<u8>>, b: &BTreeMap<&'static str, Vec<u8>>) -> Outcome {
    let mut o = Outcome::new(8, "headline artifacts identical at 1 and 4 threads");
    for name in ARTIFACTS {
        o.check(a.get(name) == b.get(name), format!("{name} identical"));
    }
    o.notes = vec![format!("{} artifacts byte-identical", ARTIFACTS.len())];
    o
}

fn main() {
    let start = Instant::now();
    let text = fs::read_to_string(headline_path()).expect("headline config");
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("headline");
    let (report, first) = run_in_pool(1, &text, &dir);
    let (_, second) = run_in_pool(4, &text, &dir);

    let mut outcomes = vec![
        tree_contrast(),
        resistance_laws(),
        ms_certificates(),
        bound_dominance(&report),
        oracle_equivalence(),
        fk_coupling(),
        determinism(&first, &second),
    ];
    outcomes.push(dichotomy(&report, start.elapsed().as_secs_f64()));
    outcomes.sort_by_key(|o| o.id);

    for o in &outcomes {
        o.print();
    }
    let failed = outcomes.iter().filter(|o| !o.passed()).count();
    println!(
        "acceptance: {} of {} criteria passed in {:.0}s",
        outcomes.len() - failed,
        outcomes.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
