//! Experiment configuration in a line-oriented `section.key = value` format.
//!
//! `#` starts a comment. Lists are comma separated. Every key may appear at
//! most once. Parsing fills in every default, and `Display` writes the
//! complete configuration back in a form that parses to the same value.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use hypspin_core::analysis::{LossCoefficient, Thresholds};
use hypspin_core::electrical::{ProfileTarget, SolverOptions};
use hypspin_core::graphs::{
    build_reference, build_ringed_tree, build_triangulation, BoundaryCondition, Graph, Horizontal, Reference,
};
use hypspin_core::spinmc::{Algorithm, Averaging, McSchedule, ModelParams, Start};

/// Every key the format knows about.
pub const KEYS: &[&str] = &[
    "graph.type",
    "graph.q",
    "graph.radius",
    "graph.depth",
    "graph.size",
    "graph.branching",
    "graph.horizontal",
    "graph.center",
    "model.n",
    "model.beta",
    "model.bc",
    "model.pin_boundary",
    "mc.algorithm",
    "mc.sweeps",
    "mc.burn_in",
    "mc.stride",
    "mc.replicas",
    "mc.seed",
    "mc.start",
    "mc.averaging",
    "analysis.rate_min",
    "analysis.r2_min",
    "analysis.level_min",
    "analysis.loss",
    "electrical.tolerance",
    "electrical.target",
    "output.dir",
];

/// Where a value came from: a line of the file, or the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Line(usize),
    EndOfInput(usize),
    CommandLine,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(n) => write!(f, "line {n}"),
            Location::EndOfInput(n) => write!(f, "line {n} (end of input)"),
            Location::CommandLine => f.write_str("command line"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{location}: `{key}`: {message}")]
pub struct ConfigError {
    pub location: Location,
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(location: Location, key: &str, message: impl Into<String>) -> Self {
        ConfigError {
            location,
            key: key.to_string(),
            message: message.into(),
        }
    }

    /// Line number in the file, if the error points into one.
    pub fn line(&self) -> Option<usize> {
        match self.location {
            Location::Line(n) | Location::EndOfInput(n) => Some(n),
            Location::CommandLine => None,
        }
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

/// Raw `key -> value` pairs with their locations, before typing.
#[derive(Clone, Debug, Default)]
pub struct Entries {
    values: BTreeMap<String, (Location, String)>,
    lines: usize,
}

impl Entries {
    pub fn parse(text: &str) -> Result<Entries> {
        let mut entries = Entries::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            entries.lines = line;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let loc = Location::Line(line);
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::new(loc, content, "expected `section.key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(ConfigError::new(loc, key, "unknown key"));
            }
            if value.is_empty() {
                return Err(ConfigError::new(loc, key, "empty value"));
            }
            if let Some((first, _)) = entries.values.get(key) {
                return Err(ConfigError::new(loc, key, format!("duplicate key, first set at {first}")));
            }
            entries.values.insert(key.to_string(), (loc, value.to_string()));
        }
        Ok(entries)
    }

    /// Sets or replaces a value from the command line.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(ConfigError::new(Location::CommandLine, key, "unknown key"));
        }
        self.values
            .insert(key.to_string(), (Location::CommandLine, value.into()));
        Ok(())
    }

    /// Drops every key of a section.
    pub fn clear_section(&mut self, section: &str) {
        let prefix = format!("{section}.");
        self.values.retain(|k, _| !k.starts_with(&prefix));
    }

    fn take(&mut self, key: &str) -> Option<(Location, String)> {
        self.values.remove(key)
    }

    fn missing(&self, key: &str) -> ConfigError {
        ConfigError::new(Location::EndOfInput(self.lines), key, "missing required key")
    }

    fn scalar<T>(&mut self, key: &str, expected: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Option<(Location, T)>> {
        match self.take(key) {
            None => Ok(None),
            Some((loc, raw)) => parse(&raw)
                .map(|v| Some((loc, v)))
                .ok_or_else(|| ConfigError::new(loc, key, format!("expected {expected}, got `{raw}`"))),
        }
    }

    fn list<T>(&mut self, key: &str, expected: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Option<(Location, Vec<T>)>> {
        match self.take(key) {
            None => Ok(None),
            Some((loc, raw)) => raw
                .split(',')
                .map(|item| {
                    let item = item.trim();
                    parse(item).ok_or_else(|| {
                        ConfigError::new(loc, key, format!("expected a list of {expected}, got `{item}`"))
                    })
                })
                .collect::<Result<Vec<T>>>()
                .map(|v| Some((loc, v))),
        }
    }

    fn usize(&mut self, key: &str) -> Result<Option<(Location, usize)>> {
        self.scalar(key, "a non-negative integer", |s| s.parse().ok())
    }

    fn f64(&mut self, key: &str) -> Result<Option<(Location, f64)>> {
        self.scalar(key, "a finite number", parse_f64)
    }

    /// Keys left over after every section has been read.
    fn leftover(&self, section: &str) -> Option<(Location, String)> {
        let prefix = format!("{section}.");
        self.values
            .iter()
            .find(|(k, _)| k.starts_with(&prefix))
            .map(|(k, (loc, _))| (*loc, k.clone()))
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

fn parse_bc(s: &str) -> Option<BoundaryCondition> {
    s.parse().ok()
}

fn start_str(s: Start) -> &'static str {
    match s {
        Start::Hot => "hot",
        Start::Cold => "cold",
    }
}

fn averaging_str(a: Averaging) -> &'static str {
    match a {
        Averaging::Sphere => "sphere",
        Averaging::Canonical => "canonical",
    }
}

fn loss_str(l: LossCoefficient) -> &'static str {
    match l {
        LossCoefficient::Beta => "beta",
        LossCoefficient::TwoBeta => "2beta",
    }
}

fn target_str(t: ProfileTarget) -> &'static str {
    match t {
        ProfileTarget::Canonical => "canonical",
        ProfileTarget::SphereMean => "sphere-mean",
    }
}

fn horizontal_str(h: Horizontal) -> &'static str {
    match h {
        Horizontal::Path => "path",
        Horizontal::Cycle => "cycle",
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GraphKind {
    Triangulation { q: usize, radius: usize },
    RingedTree { depth: usize, horizontal: Horizontal },
    Tree { branching: usize, depth: usize },
    Path { size: usize },
    Cycle { size: usize },
    Grid { size: usize },
    Complete { size: usize },
}

impl GraphKind {
    pub fn name(&self) -> &'static str {
        match self {
            GraphKind::Triangulation { .. } => "triangulation",
            GraphKind::RingedTree { .. } => "ringed-tree",
            GraphKind::Tree { .. } => "tree",
            GraphKind::Path { .. } => "path",
            GraphKind::Cycle { .. } => "cycle",
            GraphKind::Grid { .. } => "grid",
            GraphKind::Complete { .. } => "complete",
        }
    }

    pub fn build(&self) -> hypspin_core::Result<Graph> {
        match *self {
            GraphKind::Triangulation { q, radius } => build_triangulation(q, radius),
            GraphKind::RingedTree { depth, horizontal } => build_ringed_tree(depth, horizontal),
            GraphKind::Tree { branching, depth } => build_reference(Reference::Tree { branching, depth }),
            GraphKind::Path { size } => build_reference(Reference::Path { length: size }),
            GraphKind::Cycle { size } => build_reference(Reference::Cycle { length: size }),
            GraphKind::Grid { size } => build_reference(Reference::Grid { side: size }),
            GraphKind::Complete { size } => build_reference(Reference::Complete { order: size }),
        }
    }

    /// Centre used when none is given: the middle of a grid, vertex 0 otherwise.
    pub fn default_center(&self) -> usize {
        match *self {
            GraphKind::Grid { size } => (size / 2) * size + size / 2,
            _ => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphSection {
    pub kind: GraphKind,
    pub center: usize,
}

impl GraphSection {
    pub fn from_entries(e: &mut Entries) -> Result<GraphSection> {
        let (type_loc, name) = e
            .scalar("graph.type", "a graph type", |s| Some(s.to_string()))?
            .ok_or_else(|| e.missing("graph.type"))?;
        let kind = match name.as_str() {
            "triangulation" => GraphKind::Triangulation {
                q: e.usize("graph.q")?.map_or(7, |v| v.1),
                radius: e.usize("graph.radius")?.map_or(5, |v| v.1),
            },
            "ringed-tree" => GraphKind::RingedTree {
                depth: e.usize("graph.depth")?.map_or(6, |v| v.1),
                horizontal: e
                    .scalar("graph.horizontal", "path or cycle", |s| s.parse().ok())?
                    .map_or(Horizontal::Path, |v| v.1),
            },
            "tree" => GraphKind::Tree {
                branching: e.usize("graph.branching")?.map_or(2, |v| v.1),
                depth: e.usize("graph.depth")?.map_or(6, |v| v.1),
            },
            "path" | "cycle" | "grid" | "complete" => {
                let size = e.usize("graph.size")?.map_or(10, |v| v.1);
                match name.as_str() {
                    "path" => GraphKind::Path { size },
                    "cycle" => GraphKind::Cycle { size },
                    "grid" => GraphKind::Grid { size },
                    _ => GraphKind::Complete { size },
                }
            }
            other => {
                return Err(ConfigError::new(
                    type_loc,
                    "graph.type",
                    format!("unknown graph type `{other}`, expected triangulation, ringed-tree, tree, path, cycle, grid or complete"),
                ))
            }
        };
        let center = e.usize("graph.center")?;
        if let Some((loc, key)) = e.leftover("graph") {
            return Err(ConfigError::new(loc, &key, format!("does not apply to graph.type = {name}")));
        }
        let section = GraphSection {
            center: center.map_or(kind.default_center(), |v| v.1),
            kind,
        };
        let g = kind
            .build()
            .map_err(|err| ConfigError::new(type_loc, "graph.type", err.to_string()))?;
        if section.center >= g.vertex_count() {
            let loc = center.map_or(type_loc, |v| v.0);
            return Err(ConfigError::new(
                loc,
                "graph.center",
                format!("must be below the vertex count {}", g.vertex_count()),
            ));
        }
        Ok(section)
    }

    pub fn build(&self) -> hypspin_core::Result<Graph> {
        self.kind.build()
    }
}

impl fmt::Display for GraphSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "graph.type = {}", self.kind.name())?;
        match self.kind {
            GraphKind::Triangulation { q, radius } => {
                writeln!(f, "graph.q = {q}")?;
                writeln!(f, "graph.radius = {radius}")?;
            }
            GraphKind::RingedTree { depth, horizontal } => {
                writeln!(f, "graph.depth = {depth}")?;
                writeln!(f, "graph.horizontal = {}", horizontal_str(horizontal))?;
            }
            GraphKind::Tree { branching, depth } => {
                writeln!(f, "graph.branching = {branching}")?;
                writeln!(f, "graph.depth = {depth}")?;
            }
            GraphKind::Path { size } | GraphKind::Cycle { size } | GraphKind::Grid { size } | GraphKind::Complete { size } => {
                writeln!(f, "graph.size = {size}")?;
            }
        }
        writeln!(f, "graph.center = {}", self.center)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSection {
    pub n: Vec<usize>,
    pub beta: Vec<f64>,
    pub bc: Vec<BoundaryCondition>,
    pub pin_boundary: bool,
}

impl ModelSection {
    pub fn from_entries(e: &mut Entries) -> Result<ModelSection> {
        let (n_loc, n) = e
            .list("model.n", "positive integers", |s| s.parse::<usize>().ok())?
            .ok_or_else(|| e.missing("model.n"))?;
        if n.contains(&0) {
            return Err(ConfigError::new(n_loc, "model.n", "spin dimension must be at least 1"));
        }
        let (beta_loc, beta) = e
            .list("model.beta", "numbers", parse_f64)?
            .ok_or_else(|| e.missing("model.beta"))?;
        if beta.iter().any(|&b| b < 0.0) {
            return Err(ConfigError::new(beta_loc, "model.beta", "inverse temperatures must be non-negative"));
        }
        let bc = e
            .list("model.bc", "free or wired", parse_bc)?
            .map_or(vec![BoundaryCondition::Free], |v| v.1);
        let pin = e.scalar("model.pin_boundary", "true or false", parse_bool)?;
        if let Some((loc, true)) = pin {
            if !bc.contains(&BoundaryCondition::Wired) {
                return Err(ConfigError::new(loc, "model.pin_boundary", "requires wired in model.bc"));
            }
        }
        Ok(ModelSection {
            n,
            beta,
            bc,
            pin_boundary: pin.is_some_and(|v| v.1),
        })
    }

    /// One parameter set per (n, beta, bc), in that nesting order.
    pub fn cells(&self) -> Vec<ModelParams> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &beta in &self.beta {
                for &bc in &self.bc {
                    let mut p = ModelParams::new(n, beta, bc);
                    p.pin_boundary = self.pin_boundary && bc == BoundaryCondition::Wired;
                    out.push(p);
                }
            }
        }
        out
    }
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for ModelSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "model.n = {}", join(&self.n, |n| n.to_string()))?;
        writeln!(f, "model.beta = {}", join(&self.beta, |b| format!("{b:?}")))?;
        writeln!(f, "model.bc = {}", join(&self.bc, |b| b.to_string()))?;
        writeln!(f, "model.pin_boundary = {}", self.pin_boundary)
    }
}

/// The Monte Carlo schedule, whose `seed` is required.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McSection(pub McSchedule);

impl McSection {
    pub fn from_entries(e: &mut Entries) -> Result<McSection> {
        let d = McSchedule::default();
        let algorithm = e.scalar("mc.algorithm", "metropolis, wolff, mixed or swendsen-wang", |s| s.parse().ok())?;
        let sweeps = e.usize("mc.sweeps")?;
        let burn_in = e.usize("mc.burn_in")?;
        let stride = e.usize("mc.stride")?;
        let replicas = e.usize("mc.replicas")?;
        let (_, seed) = e
            .scalar("mc.seed", "an unsigned 64-bit integer", |s| s.parse::<u64>().ok())?
            .ok_or_else(|| e.missing("mc.seed"))?;
        let start = e.scalar("mc.start", "hot or cold", |s| match s {
            "hot" => Some(Start::Hot),
            "cold" => Some(Start::Cold),
            _ => None,
        })?;
        let averaging = e.scalar("mc.averaging", "sphere or canonical", |s| match s {
            "sphere" => Some(Averaging::Sphere),
            "canonical" => Some(Averaging::Canonical),
            _ => None,
        })?;
        let sched = McSchedule {
            burn_in: burn_in.map_or(d.burn_in, |v| v.1),
            sweeps: sweeps.map_or(d.sweeps, |v| v.1),
            stride: stride.map_or(d.stride, |v| v.1),
            replicas: replicas.map_or(d.replicas, |v| v.1),
            seed,
            algorithm: algorithm.map_or(d.algorithm, |v| v.1),
            start: start.map_or(d.start, |v| v.1),
            averaging: averaging.map_or(d.averaging, |v| v.1),
        };
        if let Err(err) = sched.validate() {
            let (key, given) = if sched.replicas == 0 {
                ("mc.replicas", replicas)
            } else if sched.stride == 0 {
                ("mc.stride", stride)
            } else {
                ("mc.sweeps", sweeps.or(stride))
            };
            let loc = given.map_or(Location::EndOfInput(e.lines), |v| v.0);
            return Err(ConfigError::new(loc, key, err.to_string()));
        }
        Ok(McSection(sched))
    }
}

impl fmt::Display for McSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.0;
        writeln!(f, "mc.algorithm = {}", s.algorithm)?;
        writeln!(f, "mc.sweeps = {}", s.sweeps)?;
        writeln!(f, "mc.burn_in = {}", s.burn_in)?;
        writeln!(f, "mc.stride = {}", s.stride)?;
        writeln!(f, "mc.replicas = {}", s.replicas)?;
        writeln!(f, "mc.seed = {}", s.seed)?;
        writeln!(f, "mc.start = {}", start_str(s.start))?;
        writeln!(f, "mc.averaging = {}", averaging_str(s.averaging))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalysisSection {
    pub thresholds: Thresholds,
    pub loss: LossCoefficient,
}

impl AnalysisSection {
    pub fn from_entries(e: &mut Entries) -> Result<AnalysisSection> {
        let mut t = Thresholds::default();
        if let Some((loc, v)) = e.f64("analysis.rate_min")? {
            if v < 0.0 {
                return Err(ConfigError::new(loc, "analysis.rate_min", "must be non-negative"));
            }
            t.rate_min = v;
        }
        if let Some((loc, v)) = e.f64("analysis.r2_min")? {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError::new(loc, "analysis.r2_min", "must lie in [0, 1]"));
            }
            t.r2_min = v;
        }
        if let Some((loc, v)) = e.f64("analysis.level_min")? {
            if !(v > 0.0 && v <= 1.0) {
                return Err(ConfigError::new(loc, "analysis.level_min", "must lie in (0, 1]"));
            }
            t.level_min = v;
        }
        let loss = e
            .scalar("analysis.loss", "beta or 2beta", |s| match s {
                "beta" => Some(LossCoefficient::Beta),
                "2beta" => Some(LossCoefficient::TwoBeta),
                _ => None,
            })?
            .map_or(LossCoefficient::Beta, |v| v.1);
        Ok(AnalysisSection { thresholds: t, loss })
    }
}

impl fmt::Display for AnalysisSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "analysis.rate_min = {:?}", self.thresholds.rate_min)?;
        writeln!(f, "analysis.r2_min = {:?}", self.thresholds.r2_min)?;
        writeln!(f, "analysis.level_min = {:?}", self.thresholds.level_min)?;
        writeln!(f, "analysis.loss = {}", loss_str(self.loss))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElectricalSection {
    pub solver: SolverOptions,
    pub target: ProfileTarget,
}

impl ElectricalSection {
    pub fn from_entries(e: &mut Entries) -> Result<ElectricalSection> {
        let mut solver = SolverOptions::default();
        if let Some((loc, v)) = e.f64("electrical.tolerance")? {
            if v <= 0.0 {
                return Err(ConfigError::new(loc, "electrical.tolerance", "must be positive"));
            }
            solver.tolerance = v;
        }
        let target = e
            .scalar("electrical.target", "canonical or sphere-mean", |s| match s {
                "canonical" => Some(ProfileTarget::Canonical),
                "sphere-mean" => Some(ProfileTarget::SphereMean),
                _ => None,
            })?
            .map_or(ProfileTarget::Canonical, |v| v.1);
        Ok(ElectricalSection { solver, target })
    }
}

impl fmt::Display for ElectricalSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "electrical.tolerance = {:?}", self.solver.tolerance)?;
        writeln!(f, "electrical.target = {}", target_str(self.target))
    }
}

pub const DEFAULT_OUTPUT_DIR: &str = "results";

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub graph: GraphSection,
    pub model: ModelSection,
    pub mc: McSection,
    pub analysis: AnalysisSection,
    pub electrical: ElectricalSection,
    pub output_dir: PathBuf,
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::from_entries(Entries::parse(text)?)
}

impl ExperimentConfig {
    pub fn from_entries(mut e: Entries) -> Result<ExperimentConfig> {
        let graph = GraphSection::from_entries(&mut e)?;
        let model = ModelSection::from_entries(&mut e)?;
        let algorithm_loc = e.values.get("mc.algorithm").map(|v| v.0);
        let mc = McSection::from_entries(&mut e)?;
        let analysis = AnalysisSection::from_entries(&mut e)?;
        let electrical = ElectricalSection::from_entries(&mut e)?;
        let output_dir = e
            .take("output.dir")
            .map_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR), |v| PathBuf::from(v.1));

        if mc.0.algorithm == Algorithm::SwendsenWang && model.n.iter().any(|&n| n != 1) {
            return Err(ConfigError::new(
                algorithm_loc.unwrap_or(Location::EndOfInput(e.lines)),
                "mc.algorithm",
                "swendsen-wang requires model.n = 1",
            ));
        }
        if model.bc.contains(&BoundaryCondition::Wired) {
            let g = graph
                .build()
                .map_err(|err| ConfigError::new(Location::EndOfInput(e.lines), "graph.type", err.to_string()))?;
            if g.max_ring() == 0 || g.is_boundary(hypspin_core::VertexId(graph.center)) {
                return Err(ConfigError::new(
                    Location::EndOfInput(e.lines),
                    "graph.center",
                    "wired runs need a centre off the outermost ring",
                ));
            }
        }
        Ok(ExperimentConfig {
            graph,
            model,
            mc,
            analysis,
            electrical,
            output_dir,
        })
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.graph)?;
        write!(f, "{}", self.model)?;
        write!(f, "{}", self.mc)?;
        write!(f, "{}", self.analysis)?;
        write!(f, "{}", self.electrical)?;
        writeln!(f, "output.dir = {}", self.output_dir.display())
    }
}
