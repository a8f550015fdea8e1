//! Runs a configured experiment and writes its artifacts.
//!
//! The output directory receives `config.resolved`, `resistance.csv`,
//! `msfn.csv`, `correlations.csv`, `verdicts.csv` and `magnetisation.csv`.
//! Every (n, beta, bc) cell runs with the configured seed, and all results
//! are merged in cell order, so the bytes do not depend on the thread count.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use hypspin_core::analysis::{magnetisation_csv, magnetisation_proxy, ms_bound_values, verdicts_csv, VerdictRow};
use hypspin_core::electrical::{ms_function_with, msfn_csv, profile_csv, resistance_profile, SolverOptions};
use hypspin_core::graphs::{contract_boundary, contraction_map, sphere_sizes, spheres, BoundaryCondition, Graph, VertexId};
use hypspin_core::spinmc::{correlations_csv, run_chain, Averaging, ChainResult};

use crate::config::ExperimentConfig;
use crate::{stage, CliError};

pub const ARTIFACTS: [&str; 6] = [
    "config.resolved",
    "resistance.csv",
    "msfn.csv",
    "correlations.csv",
    "verdicts.csv",
    "magnetisation.csv",
];

/// In-memory results of a run, next to the files written.
#[derive(Debug)]
pub struct Report {
    pub dir: PathBuf,
    pub chains: Vec<ChainResult>,
    pub verdicts: Vec<VerdictRow>,
}

pub(crate) fn write_file(stage: &'static str, path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        stage,
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn create_dir(stage: &'static str, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        stage,
        path: dir.to_path_buf(),
        source,
    })
}

/// Joins CSV documents that share a header.
pub(crate) fn concat_csv(parts: impl IntoIterator<Item = String>) -> String {
    let mut out = String::new();
    for (i, part) in parts.into_iter().enumerate() {
        let body = if i == 0 {
            part.as_str()
        } else {
            part.split_once('\n').map_or("", |(_, rest)| rest)
        };
        out.push_str(body);
    }
    out
}

/// The graph a boundary condition actually simulates, with the centre in
/// its ids.
struct Network {
    graph: Graph,
    center: VertexId,
}

fn network(g: &Graph, center: VertexId, bc: BoundaryCondition) -> hypspin_core::Result<Network> {
    match bc {
        BoundaryCondition::Free => Ok(Network {
            graph: g.clone(),
            center,
        }),
        BoundaryCondition::Wired => Ok(Network {
            graph: contract_boundary(g)?,
            center: contraction_map(g)[center.0],
        }),
    }
}

/// MS functions from the centre to the vertices at the largest distance.
struct FarTargets {
    network: Network,
    functions: Vec<(VertexId, Vec<f64>)>,
}

impl FarTargets {
    fn new(network: Network, averaging: Averaging, opts: &SolverOptions) -> hypspin_core::Result<FarTargets> {
        let shells = spheres(&network.graph, network.center)?;
        let far = shells.last().cloned().unwrap_or_default();
        let far = match averaging {
            Averaging::Sphere => far,
            Averaging::Canonical => far.into_iter().take(1).collect(),
        };
        let functions = far
            .par_iter()
            .map(|&y| ms_function_with(&network.graph, network.center, y, opts).map(|m| (y, m.a)))
            .collect::<hypspin_core::Result<Vec<_>>>()?;
        Ok(FarTargets { network, functions })
    }

    /// Mean of the per-target bounds, which dominates the mean correlation.
    fn bound(&self, beta: f64, cfg: &ExperimentConfig) -> Option<f64> {
        if self.functions.is_empty() {
            return None;
        }
        let total: f64 = self
            .functions
            .iter()
            .map(|(y, a)| ms_bound_values(&self.network.graph, a, self.network.center, *y, beta, cfg.analysis.loss))
            .sum();
        Some(total / self.functions.len() as f64)
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let dir = cfg.output_dir.clone();
    create_dir("output", &dir)?;
    write_file("output", &dir.join("config.resolved"), &cfg.to_string())?;

    let g = stage("graph", cfg.graph.build())?;
    let center = VertexId(cfg.graph.center);
    stage("graph", g.check_vertex(center))?;
    let label = g.label().to_string();
    let opts = cfg.electrical.solver;

    let mut profiles = Vec::new();
    for bc in [BoundaryCondition::Free, BoundaryCondition::Wired] {
        if bc == BoundaryCondition::Wired && (g.max_ring() == 0 || g.is_boundary(center)) {
            continue;
        }
        let points = stage("resistance", resistance_profile(&g, center, bc, cfg.electrical.target, &opts))?;
        profiles.push(profile_csv(&label, bc, &points));
    }
    let resistance = concat_csv(profiles);

    let shells = stage("msfn", spheres(&g, center))?;
    let msfns = stage(
        "msfn",
        shells
            .par_iter()
            .skip(1)
            .map(|shell| ms_function_with(&g, center, shell[0], &opts))
            .collect::<hypspin_core::Result<Vec<_>>>(),
    )?;
    let msfn = msfn_csv(&label, &msfns);

    let cells = cfg.model.cells();
    let chains = stage(
        "simulate",
        cells
            .par_iter()
            .map(|p| run_chain(&g, p, &cfg.mc.0, center))
            .collect::<hypspin_core::Result<Vec<_>>>(),
    )?;

    let mut networks = Vec::new();
    let mut far = Vec::new();
    for &bc in &cfg.model.bc {
        let net = stage("analysis", network(&g, center, bc))?;
        let sizes = stage("analysis", sphere_sizes(&net.graph, net.center))?;
        networks.push((bc, sizes));
        if cfg.model.n.iter().any(|&n| n >= 2) {
            let targets = stage("analysis", FarTargets::new(net, cfg.mc.0.averaging, &opts))?;
            far.push((bc, targets));
        }
    }
    let mut verdicts = Vec::new();
    let mut magnetisation = Vec::new();
    for chain in &chains {
        let s = &chain.series;
        let bound = if s.params.n >= 2 {
            far.iter()
                .find(|(bc, _)| *bc == s.params.bc)
                .and_then(|(_, t)| t.bound(s.params.beta, cfg))
        } else {
            None
        };
        verdicts.push(VerdictRow::new(s, &cfg.analysis.thresholds, bound));
        let sizes = &networks
            .iter()
            .find(|(bc, _)| *bc == s.params.bc)
            .expect("every cell's boundary condition has a network")
            .1;
        let proxy = stage("analysis", magnetisation_proxy(s, sizes))?;
        magnetisation.push(magnetisation_csv(s, sizes, &proxy));
    }

    let files = [
        ("resistance.csv", resistance),
        ("msfn.csv", msfn),
        ("correlations.csv", correlations_csv(chains.iter().map(|c| &c.series))),
        ("verdicts.csv", verdicts_csv(&verdicts)),
        ("magnetisation.csv", concat_csv(magnetisation)),
    ];
    for (name, contents) in &files {
        write_file("write", &dir.join(name), contents)?;
    }
    Ok(Report { dir, chains, verdicts })
}
