use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hypspin_cli::experiment::ARTIFACTS;
use hypspin_cli::parse_config;

fn hypspin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypspin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn quick_config(dir: &Path) -> std::path::PathBuf {
    let text = format!(
        "graph.type = triangulation\n\
         graph.radius = 3\n\
         model.n = 1, 2\n\
         model.beta = 0.5\n\
         model.bc = free, wired\n\
         mc.sweeps = 400\n\
         mc.burn_in = 100\n\
         mc.replicas = 2\n\
         mc.seed = 1\n\
         output.dir = {}\n",
        dir.join("run").display()
    );
    let path = dir.join("quick.conf");
    fs::write(&path, text).unwrap();
    path
}

/// Reads a CSV file, checks its header and returns the records.
fn read_csv(path: &Path, header: &str) -> Vec<csv::StringRecord> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let got: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(got.join(","), header, "{}", path.display());
    let rows: Vec<_> = reader.records().map(Result::unwrap).collect();
    assert!(!rows.is_empty(), "{} has no rows", path.display());
    rows
}

#[test]
fn graph_build_dumps_the_ball() {
    let out = hypspin(&["graph", "build", "--type", "triangulation", "--radius", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("vertices=8 label="));
    let edges: Vec<(usize, usize, u32)> = lines
        .map(|l| {
            let f: Vec<_> = l.split(' ').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(edges.len(), 14);
    assert!(edges.iter().all(|&(u, v, m)| u < v && v < 8 && m == 1));
}

#[test]
fn help_and_usage_exit_codes() {
    assert_eq!(hypspin(&["--help"]).status.code(), Some(0));
    assert_eq!(hypspin(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(hypspin(&["simulate", "--threads", "0"]).status.code(), Some(1));
    assert_eq!(hypspin(&["report"]).status.code(), Some(1));
}

#[test]
fn config_errors_exit_1_with_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    fs::write(&path, "graph.type = path\nmodel.n = 0\nmodel.beta = 1\nmc.seed = 1\n").unwrap();
    let out = hypspin(&["report", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("model.n") && err.contains('2'), "{err}");

    fs::write(&path, "graph.colour = blue\n").unwrap();
    let out = hypspin(&["report", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("graph.colour"));
}

#[test]
fn runtime_errors_exit_2_naming_the_stage() {
    let out = hypspin(&[
        "oracle", "ising", "--type", "triangulation", "--radius", "3", "--beta", "1", "--x", "0", "--y", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("stage `oracle`"), "{}", stderr(&out));
}

#[test]
fn unwritable_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    fs::write(&file, "").unwrap();
    let config = quick_config(dir.path());
    let out = hypspin(&[
        "report",
        "--config",
        config.to_str().unwrap(),
        "--out",
        file.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("stage `output`"), "{}", stderr(&out));
}

#[test]
fn oracle_prints_value_and_bound() {
    let out = hypspin(&["oracle", "bessel", "--beta", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let value: f64 = text
        .split_whitespace()
        .find_map(|f| f.strip_prefix("value="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 0.44639).abs() < 1e-5, "{text}");
    assert!(text.contains("error_bound=") && text.contains("method="));
}

#[test]
fn report_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let config = quick_config(dir.path());
    let out = hypspin(&["report", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let run = dir.path().join("run");
    for name in ARTIFACTS {
        assert!(run.join(name).is_file(), "{name} missing");
    }

    let resolved = fs::read_to_string(run.join("config.resolved")).unwrap();
    let cfg = parse_config(&resolved).unwrap();
    assert_eq!(cfg.to_string(), resolved);
    assert_eq!(cfg.model.cells().len(), 4);

    let resistance = read_csv(&run.join("resistance.csv"), "graph,bc,distance,resistance");
    assert!(resistance.iter().any(|r| &r[1] == "wired"));
    read_csv(
        &run.join("msfn.csv"),
        "graph,x,y,distance,lambda,c1,gain,energy,max_gradient,gain_ok,energy_ok,gradient_ok",
    );
    let corr = read_csv(
        &run.join("correlations.csv"),
        "graph,n,beta,bc,algorithm,distance,estimate,stderr,samples",
    );
    assert!(corr.iter().all(|r| r[6].parse::<f64>().unwrap().abs() <= 1.0 + 1e-12));
    let verdicts = read_csv(
        &run.join("verdicts.csv"),
        "graph,n,beta,bc,verdict,rate,r_squared,plateau_level,ms_bound_at_max_d",
    );
    assert_eq!(verdicts.len(), 4);
    assert_eq!(stdout(&out), fs::read_to_string(run.join("verdicts.csv")).unwrap());
    read_csv(
        &run.join("magnetisation.csv"),
        "graph,n,beta,bc,distance,sphere_size,estimate,term,cumulative",
    );
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let config = quick_config(dir.path());
    let mut runs = Vec::new();
    for threads in ["1", "2"] {
        let target = dir.path().join(format!("t{threads}"));
        let out = hypspin(&[
            "report",
            "--config",
            config.to_str().unwrap(),
            "--threads",
            threads,
            "--out",
            target.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        runs.push(target);
    }
    for name in ARTIFACTS.iter().filter(|&&n| n != "config.resolved") {
        let a = fs::read(runs[0].join(name)).unwrap();
        let b = fs::read(runs[1].join(name)).unwrap();
        assert!(a == b, "{name} differs between thread counts");
    }
}

#[test]
fn fit_reads_simulate_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = hypspin(&[
        "simulate", "--type", "path", "--size", "8", "--center", "0", "--n", "1", "--beta", "0.3, 3", "--sweeps",
        "2000", "--burn-in", "200", "--seed", "7", "--out", out_dir,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let input = dir.path().join("correlations.csv");
    let corr = read_csv(&input, "graph,n,beta,bc,algorithm,distance,estimate,stderr,samples");
    assert_eq!(corr.len(), 2 * 9);

    let out = hypspin(&["fit", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let verdicts: Vec<String> = reader.records().map(|r| r.unwrap()[4].to_string()).collect();
    assert_eq!(verdicts.len(), 2);
    assert_eq!(verdicts[0], "decay");

    fs::write(&input, "a,b\n1,2\n").unwrap();
    let out = hypspin(&["fit", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("stage `fit`"));
}
