//! Command-line front end. Experiments are driven by a config file; the
//! one-shot subcommands take flags named after config keys, layered over
//! `--config` when one is given.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use hypspin_core::analysis::{verdicts_csv, VerdictRow};
use hypspin_core::electrical::{ms_function_with, msfn_csv, profile_csv, resistance_profile};
use hypspin_core::graphs::{spheres, BoundaryCondition, VertexId};
use hypspin_core::oracles::{bessel_ratio, brute_force_ising, dense_resistance, o2_path_correlation, ExactResult};
use hypspin_core::spinmc::{correlations_csv, run_chain, CorrelationSeries, DistanceEstimate, ModelParams};

use crate::config::{
    AnalysisSection, ElectricalSection, Entries, ExperimentConfig, GraphSection, McSection, ModelSection,
};
use crate::experiment::{create_dir, write_file};
use crate::{run_experiment, stage, CliError};

#[derive(Debug, Parser)]
#[command(name = "hypspin", version, about = "O(n) spin models and electrical networks on hyperbolic graphs")]
pub struct Cli {
    /// Experiment configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Overrides `mc.seed`.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Output directory; one-shot commands print to stdout without it.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Worker threads. Changes speed only, never output.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<NonZeroUsize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Graph construction.
    Graph {
        #[command(subcommand)]
        action: GraphAction,
    },
    /// Resistance profile from the centre.
    Resist(ResistArgs),
    /// MS-function certificates from the centre to one vertex per distance.
    Msfn(MsfnArgs),
    /// Pair correlations by Monte Carlo.
    Simulate(SimulateArgs),
    /// Exact reference values.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Verdicts for a correlations CSV.
    Fit(FitArgs),
    /// Full experiment from `--config`.
    #[command(alias = "run")]
    Report,
}

#[derive(Debug, Subcommand)]
pub enum GraphAction {
    /// Writes the edge-list dump.
    Build(GraphArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct GraphArgs {
    /// triangulation, ringed-tree, tree, path, cycle, grid or complete.
    #[arg(long = "type", value_name = "TYPE")]
    pub kind: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub radius: Option<String>,
    #[arg(long)]
    pub depth: Option<String>,
    #[arg(long)]
    pub size: Option<String>,
    #[arg(long)]
    pub branching: Option<String>,
    #[arg(long)]
    pub horizontal: Option<String>,
    #[arg(long)]
    pub center: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ResistArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// free or wired.
    #[arg(long)]
    pub bc: Option<String>,
    /// canonical or sphere-mean.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub tolerance: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct MsfnArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub tolerance: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Comma-separated spin dimensions.
    #[arg(long)]
    pub n: Option<String>,
    /// Comma-separated inverse temperatures.
    #[arg(long)]
    pub beta: Option<String>,
    /// Comma-separated boundary conditions.
    #[arg(long)]
    pub bc: Option<String>,
    #[arg(long)]
    pub pin_boundary: Option<String>,
    #[arg(long)]
    pub algorithm: Option<String>,
    #[arg(long)]
    pub sweeps: Option<String>,
    #[arg(long)]
    pub burn_in: Option<String>,
    #[arg(long)]
    pub stride: Option<String>,
    #[arg(long)]
    pub replicas: Option<String>,
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long)]
    pub averaging: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Correlations CSV as written by `simulate`.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long)]
    pub rate_min: Option<String>,
    #[arg(long)]
    pub r2_min: Option<String>,
    #[arg(long)]
    pub level_min: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// `<s_x s_y>` for the Ising model by enumeration.
    Ising {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        x: usize,
        #[arg(long)]
        y: usize,
    },
    /// `I1(beta) / I0(beta)`.
    Bessel {
        #[arg(long)]
        beta: f64,
    },
    /// O(2) correlation across `distance` edges of a path.
    O2Path {
        #[arg(long)]
        distance: usize,
        #[arg(long)]
        beta: f64,
    },
    /// Effective resistance by a dense solve.
    Resistance {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        x: usize,
        #[arg(long)]
        y: usize,
    },
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n.get());
    }
    let pool = builder
        .build()
        .map_err(|err| CliError::Usage(format!("cannot start {:?} threads: {err}", cli.threads)))?;
    pool.install(|| dispatch(&cli))
}

fn base_entries(cli: &Cli) -> Result<Entries, CliError> {
    let mut e = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|err| {
                CliError::Usage(format!("cannot read config {}: {err}", path.display()))
            })?;
            Entries::parse(&text)?
        }
        None => Entries::default(),
    };
    if let Some(seed) = cli.seed {
        e.set("mc.seed", seed.to_string())?;
    }
    if let Some(out) = &cli.out {
        e.set("output.dir", out.display().to_string())?;
    }
    Ok(e)
}

fn set_opt(e: &mut Entries, key: &str, value: &Option<String>) -> Result<(), CliError> {
    if let Some(v) = value {
        e.set(key, v.clone())?;
    }
    Ok(())
}

fn apply_graph(e: &mut Entries, g: &GraphArgs) -> Result<(), CliError> {
    if g.kind.is_some() {
        e.clear_section("graph");
    }
    set_opt(e, "graph.type", &g.kind)?;
    set_opt(e, "graph.q", &g.q)?;
    set_opt(e, "graph.radius", &g.radius)?;
    set_opt(e, "graph.depth", &g.depth)?;
    set_opt(e, "graph.size", &g.size)?;
    set_opt(e, "graph.branching", &g.branching)?;
    set_opt(e, "graph.horizontal", &g.horizontal)?;
    set_opt(e, "graph.center", &g.center)
}

/// Writes `contents` to `out/name`, or to stdout when no directory is set.
fn emit(out: Option<&Path>, name: &str, contents: &str) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            create_dir("output", dir)?;
            write_file("write", &dir.join(name), contents)
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|source| CliError::Io {
                    stage: "write",
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn print_exact(r: &ExactResult) -> Result<(), CliError> {
    emit(None, "", &format!("value={} error_bound={:e} method={}\n", r.value, r.error_bound, r.method))
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Graph {
            action: GraphAction::Build(args),
        } => {
            let mut e = base_entries(cli)?;
            apply_graph(&mut e, args)?;
            let section = GraphSection::from_entries(&mut e)?;
            let g = stage("graph", section.build())?;
            emit(out, "graph.txt", &g.dump())
        }
        Command::Resist(args) => {
            let mut e = base_entries(cli)?;
            apply_graph(&mut e, &args.graph)?;
            set_opt(&mut e, "electrical.target", &args.target)?;
            set_opt(&mut e, "electrical.tolerance", &args.tolerance)?;
            let section = GraphSection::from_entries(&mut e)?;
            let electrical = ElectricalSection::from_entries(&mut e)?;
            let bcs: Vec<BoundaryCondition> = match args.bc.as_deref() {
                None => vec![BoundaryCondition::Free],
                Some(s) => s
                    .split(',')
                    .map(|b| b.trim().parse())
                    .collect::<Result<_, _>>()
                    .map_err(|err: hypspin_core::Error| CliError::Usage(err.to_string()))?,
            };
            let g = stage("graph", section.build())?;
            let center = VertexId(section.center);
            let mut parts = Vec::new();
            for bc in bcs {
                let points = stage(
                    "resistance",
                    resistance_profile(&g, center, bc, electrical.target, &electrical.solver),
                )?;
                parts.push(profile_csv(g.label(), bc, &points));
            }
            emit(out, "resistance.csv", &crate::experiment::concat_csv(parts))
        }
        Command::Msfn(args) => {
            let mut e = base_entries(cli)?;
            apply_graph(&mut e, &args.graph)?;
            set_opt(&mut e, "electrical.tolerance", &args.tolerance)?;
            let section = GraphSection::from_entries(&mut e)?;
            let electrical = ElectricalSection::from_entries(&mut e)?;
            let g = stage("graph", section.build())?;
            let center = VertexId(section.center);
            let shells = stage("msfn", spheres(&g, center))?;
            let rows = shells
                .iter()
                .skip(1)
                .map(|shell| stage("msfn", ms_function_with(&g, center, shell[0], &electrical.solver)))
                .collect::<Result<Vec<_>, _>>()?;
            emit(out, "msfn.csv", &msfn_csv(g.label(), &rows))
        }
        Command::Simulate(args) => {
            let mut e = base_entries(cli)?;
            apply_graph(&mut e, &args.graph)?;
            for (key, value) in [
                ("model.n", &args.n),
                ("model.beta", &args.beta),
                ("model.bc", &args.bc),
                ("model.pin_boundary", &args.pin_boundary),
                ("mc.algorithm", &args.algorithm),
                ("mc.sweeps", &args.sweeps),
                ("mc.burn_in", &args.burn_in),
                ("mc.stride", &args.stride),
                ("mc.replicas", &args.replicas),
                ("mc.start", &args.start),
                ("mc.averaging", &args.averaging),
            ] {
                set_opt(&mut e, key, value)?;
            }
            let section = GraphSection::from_entries(&mut e)?;
            let model = ModelSection::from_entries(&mut e)?;
            let mc = McSection::from_entries(&mut e)?;
            let g = stage("graph", section.build())?;
            let center = VertexId(section.center);
            let chains = model
                .cells()
                .iter()
                .map(|p| stage("simulate", run_chain(&g, p, &mc.0, center)))
                .collect::<Result<Vec<_>, _>>()?;
            emit(out, "correlations.csv", &correlations_csv(chains.iter().map(|c| &c.series)))
        }
        Command::Oracle { which } => match which {
            OracleCommand::Ising { graph, beta, x, y } => {
                let mut e = base_entries(cli)?;
                apply_graph(&mut e, graph)?;
                let g = stage("graph", GraphSection::from_entries(&mut e)?.build())?;
                print_exact(&stage("oracle", brute_force_ising(&g, *beta, VertexId(*x), VertexId(*y)))?)
            }
            OracleCommand::Bessel { beta } => print_exact(&stage("oracle", bessel_ratio(*beta))?),
            OracleCommand::O2Path { distance, beta } => {
                print_exact(&stage("oracle", o2_path_correlation(*distance, *beta))?)
            }
            OracleCommand::Resistance { graph, x, y } => {
                let mut e = base_entries(cli)?;
                apply_graph(&mut e, graph)?;
                let g = stage("graph", GraphSection::from_entries(&mut e)?.build())?;
                print_exact(&stage("oracle", dense_resistance(&g, VertexId(*x), VertexId(*y)))?)
            }
        },
        Command::Fit(args) => {
            let mut e = base_entries(cli)?;
            set_opt(&mut e, "analysis.rate_min", &args.rate_min)?;
            set_opt(&mut e, "analysis.r2_min", &args.r2_min)?;
            set_opt(&mut e, "analysis.level_min", &args.level_min)?;
            let analysis = AnalysisSection::from_entries(&mut e)?;
            let text = fs::read_to_string(&args.input).map_err(|source| CliError::Io {
                stage: "fit",
                path: args.input.clone(),
                source,
            })?;
            let series = read_correlations(&text)?;
            let rows: Vec<VerdictRow> = series
                .iter()
                .map(|s| VerdictRow::new(s, &analysis.thresholds, None))
                .collect();
            emit(out, "verdicts.csv", &verdicts_csv(&rows))
        }
        Command::Report => {
            if cli.config.is_none() {
                return Err(CliError::Usage("report needs --config".into()));
            }
            let cfg = ExperimentConfig::from_entries(base_entries(cli)?)?;
            let report = run_experiment(&cfg)?;
            emit(None, "", &verdicts_csv(&report.verdicts))
        }
    }
}

/// Groups the rows of a correlations CSV into series, in order of first
/// appearance.
pub fn read_correlations(text: &str) -> Result<Vec<CorrelationSeries>, CliError> {
    let bad = |message: String| CliError::Input { stage: "fit", message };
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|err| bad(err.to_string()))?.clone();
    let expected = ["graph", "n", "beta", "bc", "algorithm", "distance", "estimate", "stderr", "samples"];
    if header.iter().ne(expected) {
        return Err(bad(format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut out: Vec<CorrelationSeries> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|err| bad(err.to_string()))?;
        let row = i + 2;
        let field = |k: usize| -> Result<&str, CliError> {
            record.get(k).ok_or_else(|| bad(format!("row {row}: missing field {}", expected[k])))
        };
        let num = |k: usize| -> Result<f64, CliError> {
            field(k)?
                .parse::<f64>()
                .map_err(|err| bad(format!("row {row}: {}: {err}", expected[k])))
        };
        let int = |k: usize| -> Result<usize, CliError> {
            field(k)?
                .parse::<usize>()
                .map_err(|err| bad(format!("row {row}: {}: {err}", expected[k])))
        };
        let (graph, n, beta, bc_label, algorithm) = (field(0)?, int(1)?, num(2)?, field(3)?, field(4)?);
        let (bc, pin) = match bc_label {
            "wired-pinned" => (BoundaryCondition::Wired, true),
            other => (other.parse().map_err(|err: hypspin_core::Error| bad(format!("row {row}: {err}")))?, false),
        };
        let point = DistanceEstimate {
            distance: int(5)?,
            estimate: num(6)?,
            stderr: num(7)?,
            samples: int(8)?,
        };
        let same = |s: &CorrelationSeries| {
            s.graph == graph && s.params.n == n && s.params.beta == beta && s.params.bc_label() == bc_label && s.algorithm == algorithm
        };
        match out.last_mut() {
            Some(s) if same(s) => s.points.push(point),
            _ => {
                let mut params = ModelParams::new(n, beta, bc);
                params.pin_boundary = pin;
                let mut s = CorrelationSeries::from_values(graph, params, &[], &[], 0);
                s.algorithm = algorithm.to_string();
                s.points.push(point);
                out.push(s);
            }
        }
    }
    Ok(out)
}
