use std::borrow::Cow;

use rayon::prelude::*;

use super::samplers::{metropolis_sweep, swendsen_wang_sweep, wolff_step_with, ClusterWorkspace};
use super::spins::{stream_rng, McRng, SpinConfig};
use super::{Algorithm, Averaging, CorrelationSeries, DistanceEstimate, McSchedule, ModelParams, Start, BATCHES};
use crate::error::{Error, Result};
use crate::format::sig;
use crate::graphs::{contract_boundary, contraction_map, spheres, BoundaryCondition, Graph, VertexId};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainResult {
    pub series: CorrelationSeries,
    pub abs_magnetisation: Estimate,
    pub energy: Estimate,
}

/// Graph actually simulated, with the centre and target sets in its ids.
struct Network<'a> {
    graph: Cow<'a, Graph>,
    center: usize,
    targets: Vec<Vec<usize>>,
    pinned: Option<usize>,
}

fn prepare<'a>(g: &'a Graph, p: &ModelParams, center: VertexId, averaging: Averaging) -> Result<Network<'a>> {
    p.validate()?;
    g.check_vertex(center)?;
    let (graph, center, pinned) = match p.bc {
        BoundaryCondition::Free => (Cow::Borrowed(g), center.0, None),
        BoundaryCondition::Wired => {
            if g.is_boundary(center) {
                return Err(Error::InBoundary(center));
            }
            let wired = contract_boundary(g)?;
            let merged = wired.vertex_count() - 1;
            let c = contraction_map(g)[center.0].0;
            (Cow::Owned(wired), c, p.pin_boundary.then_some(merged))
        }
    };
    let targets = spheres(&graph, VertexId(center))?
        .into_iter()
        .map(|shell| {
            let ids = shell.into_iter().map(|v| v.0);
            match averaging {
                Averaging::Sphere => ids.collect(),
                Averaging::Canonical => ids.take(1).collect(),
            }
        })
        .collect();
    Ok(Network {
        graph,
        center,
        targets,
        pinned,
    })
}

/// Equal-size batches of a scalar measurement stream.
#[derive(Clone, Debug)]
struct Batches {
    sums: Vec<f64>,
    per_batch: usize,
}

impl Batches {
    fn new(batches: usize, per_batch: usize) -> Self {
        Batches {
            sums: vec![0.0; batches],
            per_batch,
        }
    }

    fn add(&mut self, index: usize, x: f64) {
        self.sums[index / self.per_batch] += x;
    }

    fn means(&self) -> impl Iterator<Item = f64> + '_ {
        self.sums.iter().map(|s| s / self.per_batch as f64)
    }
}

/// Pools the batch means of all replicas and estimates the error of their
/// mean from their spread. Every replica runs the same schedule, so equal
/// weights are the right ones; weighting by each replica's estimated
/// variance would favour replicas that happened to see fewer rare
/// fluctuations and bias the mean.
fn pool<'a>(parts: impl IntoIterator<Item = &'a Batches>) -> Estimate {
    let means: Vec<f64> = parts.into_iter().flat_map(Batches::means).collect();
    let k = means.len() as f64;
    let mean = means.iter().sum::<f64>() / k;
    let var = if k > 1.0 {
        means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0) / k
    } else {
        0.0
    };
    Estimate {
        mean,
        stderr: var.sqrt(),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Observable {
    Spin,
    Connectivity,
}

struct ReplicaOutput {
    per_distance: Vec<Batches>,
    magnetisation: Batches,
    energy: Batches,
}

struct Sweeper {
    algorithm: Algorithm,
    beta: f64,
    width: f64,
    workspace: ClusterWorkspace,
    /// Cluster moves per Wolff sweep once burn-in is over.
    wolff_steps: Option<usize>,
    burn_in_moves: usize,
    burn_in_flipped: usize,
}

impl Sweeper {
    /// Runs one sweep; returns the Metropolis acceptance rate when there was
    /// a Metropolis component and the bond clusters for Swendsen-Wang.
    fn sweep(&mut self, c: &mut SpinConfig<'_>, rng: &mut McRng) -> (Option<f64>, Option<Vec<usize>>) {
        match self.algorithm {
            Algorithm::Metropolis => (Some(metropolis_sweep(c, self.beta, self.width, rng)), None),
            Algorithm::Wolff => {
                if let Some(steps) = self.wolff_steps {
                    for _ in 0..steps {
                        wolff_step_with(c, self.beta, rng, &mut self.workspace);
                    }
                } else {
                    let target = c.graph().vertex_count();
                    let mut touched = 0;
                    while touched < target {
                        touched += wolff_step_with(c, self.beta, rng, &mut self.workspace);
                        self.burn_in_moves += 1;
                    }
                    self.burn_in_flipped += touched;
                }
                (None, None)
            }
            Algorithm::Mixed => {
                let acc = metropolis_sweep(c, self.beta, self.width, rng);
                wolff_step_with(c, self.beta, rng, &mut self.workspace);
                (Some(acc), None)
            }
            Algorithm::SwendsenWang => (None, Some(swendsen_wang_sweep(c, self.beta, rng))),
        }
    }

    /// Fixes the number of Wolff moves per sweep to `N / mean cluster size`.
    /// Stopping on the flipped-spin count instead would make the measurement
    /// times depend on the state and bias the estimates.
    fn freeze(&mut self, vertex_count: usize) {
        let steps = if self.burn_in_moves == 0 {
            1
        } else {
            let mean = self.burn_in_flipped as f64 / self.burn_in_moves as f64;
            (vertex_count as f64 / mean).round().max(1.0) as usize
        };
        self.wolff_steps = Some(steps);
    }

    /// Nudges the proposal width towards 50% acceptance.
    fn adapt(&mut self, acceptance: f64) {
        if acceptance > 0.5 {
            self.width = (self.width * 1.1).min(std::f64::consts::PI);
        } else {
            self.width /= 1.1;
        }
    }
}

fn run_replica(
    net: &Network<'_>,
    p: &ModelParams,
    sched: &McSchedule,
    algorithm: Algorithm,
    observable: Observable,
    index: usize,
) -> Result<ReplicaOutput> {
    let g: &Graph = &net.graph;
    let mut rng = stream_rng(sched.seed, index as u64);
    let mut c = match sched.start {
        Start::Hot => SpinConfig::random(g, p.n, &mut rng)?,
        Start::Cold => SpinConfig::aligned(g, p.n)?,
    };
    if let Some(v) = net.pinned {
        c.s_mut(v).iter_mut().enumerate().for_each(|(i, x)| *x = if i == 0 { 1.0 } else { 0.0 });
        c.pin(VertexId(v));
    }
    let mut sweeper = Sweeper {
        algorithm,
        beta: p.beta,
        width: 1.0,
        workspace: ClusterWorkspace::new(g.vertex_count(), p.n),
        wolff_steps: None,
        burn_in_moves: 0,
        burn_in_flipped: 0,
    };

    for _ in 0..sched.burn_in {
        if let (Some(acc), _) = sweeper.sweep(&mut c, &mut rng) {
            if p.n > 1 {
                sweeper.adapt(acc);
            }
        }
    }
    sweeper.freeze(g.vertex_count());

    let batches = BATCHES.min(sched.measurements());
    let per_batch = sched.measurements() / batches;
    let used = batches * per_batch;
    let mut out = ReplicaOutput {
        per_distance: vec![Batches::new(batches, per_batch); net.targets.len()],
        magnetisation: Batches::new(batches, per_batch),
        energy: Batches::new(batches, per_batch),
    };
    let mut taken = 0;
    for s in 0..sched.sweeps {
        if taken == used {
            break;
        }
        let (_, labels) = sweeper.sweep(&mut c, &mut rng);
        if (s + 1) % sched.stride != 0 {
            continue;
        }
        let center = c.s(net.center).to_vec();
        for (d, targets) in net.targets.iter().enumerate() {
            let total: f64 = match observable {
                Observable::Spin => targets
                    .iter()
                    .map(|&v| super::spins::dot(&center, c.s(v)))
                    .sum(),
                Observable::Connectivity => {
                    let labels = labels.as_ref().expect("Swendsen-Wang provides clusters");
                    targets
                        .iter()
                        .filter(|&&v| labels[v] == labels[net.center])
                        .count() as f64
                }
            };
            out.per_distance[d].add(taken, total / targets.len() as f64);
        }
        out.magnetisation.add(taken, c.magnetisation());
        out.energy.add(taken, c.energy());
        taken += 1;
    }
    Ok(out)
}

fn run_replicas(
    net: &Network<'_>,
    p: &ModelParams,
    sched: &McSchedule,
    algorithm: Algorithm,
    observable: Observable,
) -> Result<Vec<ReplicaOutput>> {
    (0..sched.replicas)
        .into_par_iter()
        .map(|i| run_replica(net, p, sched, algorithm, observable, i))
        .collect()
}

fn merge_series(
    outputs: &[ReplicaOutput],
    label: &str,
    p: &ModelParams,
    sched: &McSchedule,
    algorithm: &str,
    center: VertexId,
) -> CorrelationSeries {
    let batches = BATCHES.min(sched.measurements());
    let samples = batches * (sched.measurements() / batches) * sched.replicas;
    let distances = outputs[0].per_distance.len();
    let points = (0..distances)
        .map(|d| {
            let e = pool(outputs.iter().map(|o| &o.per_distance[d]));
            DistanceEstimate {
                distance: d,
                estimate: e.mean,
                stderr: e.stderr,
                samples,
            }
        })
        .collect();
    CorrelationSeries {
        graph: label.to_string(),
        params: *p,
        algorithm: algorithm.to_string(),
        center,
        schedule: Some(*sched),
        points,
    }
}

/// Samples the model and estimates `<s_center . s_v>` by distance together
/// with the mean absolute magnetisation and mean energy.
///
/// Replicas run in parallel, each on its own RNG stream; results are merged
/// by replica index, so the output depends only on the inputs and the seed.
pub fn run_chain(g: &Graph, p: &ModelParams, sched: &McSchedule, center: VertexId) -> Result<ChainResult> {
    sched.validate()?;
    if sched.algorithm == Algorithm::SwendsenWang && p.n != 1 {
        return Err(Error::param("algorithm", "Swendsen-Wang needs Ising spins (n = 1)"));
    }
    let net = prepare(g, p, center, sched.averaging)?;
    let outputs = run_replicas(&net, p, sched, sched.algorithm, Observable::Spin)?;
    let series = merge_series(&outputs, g.label(), p, sched, sched.algorithm.as_str(), center);
    Ok(ChainResult {
        series,
        abs_magnetisation: pool(outputs.iter().map(|o| &o.magnetisation)),
        energy: pool(outputs.iter().map(|o| &o.energy)),
    })
}

/// Probability that `center` and `v` share a Swendsen-Wang bond cluster,
/// by distance. Under the Edwards-Sokal coupling this equals the Ising
/// pair correlation. The schedule's algorithm is ignored.
pub fn fk_connectivity(g: &Graph, p: &ModelParams, sched: &McSchedule, center: VertexId) -> Result<CorrelationSeries> {
    if p.n != 1 {
        return Err(Error::param("n", "FK connectivity is defined for the Ising model only"));
    }
    sched.validate()?;
    let net = prepare(g, p, center, sched.averaging)?;
    let outputs = run_replicas(&net, p, sched, Algorithm::SwendsenWang, Observable::Connectivity)?;
    Ok(merge_series(&outputs, g.label(), p, sched, "fk", center))
}

/// CSV with header `graph,n,beta,bc,algorithm,distance,estimate,stderr,samples`;
/// floats at 10 significant digits.
pub fn correlations_csv<'a>(series: impl IntoIterator<Item = &'a CorrelationSeries>) -> String {
    let mut out = String::from("graph,n,beta,bc,algorithm,distance,estimate,stderr,samples\n");
    for s in series {
        for pt in &s.points {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                s.graph,
                s.params.n,
                sig(s.params.beta, 10),
                s.params.bc_label(),
                s.algorithm,
                pt.distance,
                sig(pt.estimate, 10),
                sig(pt.stderr, 10),
                pt.samples
            ));
        }
    }
    out
}
