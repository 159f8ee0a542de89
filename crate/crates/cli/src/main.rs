use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use floc::checks::Fault;
use floc::experiment::{
    self, analyze_files, default_models, AnalyzeOptions, ExperimentConfig, ExperimentKind, ModelEntry, RunOutput,
    UpModeSel,
};
use floc::formats::{format_edge_list, format_monitor_list, monitor_path_for, write_file};
use floc::oracle::DEFAULT_MAX_NODES;
use floc::topogen::{generate, place_monitors, GenSpec, ModelKind};
use floc::{Error, MechanismKind};

const CONFIG_ERROR: u8 = 1;
const RUNTIME_ERROR: u8 = 2;
const CHECK_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(name = "floc", version, about = "Failure-localization capability of monitor-probed networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one random topology and write it as an edge list.
    Gen(GenArgs),
    /// Per-node bounds (and exact values on small inputs) for a topology file.
    Analyze(AnalyzeArgs),
    /// Identifiable-set sizes over a grid of models, μ and k.
    Sweep(ExperimentArgs),
    /// Original vs relaxed UP bounds.
    Tightness(ExperimentArgs),
    /// Compare every bound against the exact oracle on random small instances.
    OracleCheck(ExperimentArgs),
}

#[derive(Args)]
struct GenArgs {
    /// ER, RG, BA or RPL.
    #[arg(long)]
    model: ModelKind,
    #[arg(long, default_value_t = experiment::DEFAULT_NODES)]
    nodes: usize,
    /// Expected link count; the model parameter is calibrated to it.
    #[arg(long, conflicts_with = "param")]
    links: Option<f64>,
    /// Model parameter: p (ER), d_c (RG), n_min (BA) or alpha (RPL).
    #[arg(long)]
    param: Option<f64>,
    /// Number of monitors to place at random. Written next to the edge list
    /// with a `.monitors` extension.
    #[arg(long)]
    monitors: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge list path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Edge list, one `u v` pair per line.
    edges: PathBuf,
    /// Monitor list; defaults to the edge list with a `.monitors` extension.
    #[arg(long)]
    monitors: Option<PathBuf>,
    /// Measurement paths for UP; shortest paths between monitors otherwise.
    #[arg(long)]
    paths: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    mechanisms: Option<Vec<MechanismKind>>,
    #[arg(long)]
    up_mode: Option<UpModeSel>,
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
    oracle_budget: usize,
    /// Output directory for csp.csv, up.csv, oracle.csv, sets.json and
    /// summary.json. Without it the per-node tables go to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment config. Flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated models: ER, RG, BA, RPL or FILE.
    #[arg(long, value_delimiter = ',')]
    model: Option<Vec<String>>,
    #[arg(long)]
    nodes: Option<usize>,
    /// Comma-separated expected link counts, one model entry per value.
    #[arg(long, value_delimiter = ',', conflicts_with = "param")]
    links: Option<Vec<f64>>,
    /// Comma-separated model parameters, one model entry per value.
    #[arg(long, value_delimiter = ',')]
    param: Option<Vec<f64>>,
    /// Edge list for `--model FILE`.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Monitor list for `--model FILE`.
    #[arg(long)]
    monitors: Option<PathBuf>,
    /// Path file for `--model FILE`.
    #[arg(long)]
    paths: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    mu_list: Option<Vec<usize>>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    mechanisms: Option<Vec<MechanismKind>>,
    #[arg(long)]
    up_mode: Option<UpModeSel>,
    #[arg(long)]
    seed: Option<u64>,
    /// Result CSV; stdout when absent. Metadata goes to `<out>.meta.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "FLOC_PARALLEL")]
    parallel: Option<usize>,
    /// Largest |V| handed to the exact oracle.
    #[arg(long)]
    oracle_budget: Option<usize>,
    /// Inject a known defect (oracle-check self test).
    #[arg(long, hide = true)]
    fault: Option<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    // Usage errors are config errors, not clap's default status 2.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { CONFIG_ERROR } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Sweep(a) => cmd_experiment(ExperimentKind::Sweep, a),
        Command::Tightness(a) => cmd_experiment(ExperimentKind::Tightness, a),
        Command::OracleCheck(a) => cmd_experiment(ExperimentKind::OracleCheck, a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::InvalidSpec(_)
        | Error::Unachievable { .. }
        | Error::BudgetExceeded(_)
        | Error::KOutOfRange { .. } => CONFIG_ERROR,
        _ => RUNTIME_ERROR,
    }
}

fn cmd_gen(a: GenArgs) -> Result<u8, Error> {
    let spec = match (a.param, a.links) {
        (Some(p), _) => GenSpec::new(a.model, a.nodes, p, a.seed),
        (None, Some(t)) => GenSpec::with_target(a.model, a.nodes, t, a.seed),
        (None, None) => return Err(Error::Config("one of --links or --param is required".into())),
    };
    if a.monitors.is_some() && a.out.is_none() {
        return Err(Error::Config("--monitors needs --out".into()));
    }
    let out = generate(&spec)?;
    log::info!(
        "{} n={} param={} links={} draws={}",
        a.model,
        a.nodes,
        out.param,
        out.topology.edge_count(),
        out.attempts
    );
    let g = match a.monitors {
        Some(mu) => place_monitors(out.topology, mu, a.seed)?,
        None => out.topology,
    };
    match &a.out {
        Some(path) => {
            write_file(path, &format_edge_list(&g))?;
            if a.monitors.is_some() {
                write_file(&monitor_path_for(path), &format_monitor_list(&g))?;
            }
        }
        None => print_stdout(&format_edge_list(&g))?,
    }
    Ok(0)
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<u8, Error> {
    let monitors = a.monitors.unwrap_or_else(|| monitor_path_for(&a.edges));
    let mut opts = AnalyzeOptions {
        k_max: a.kmax,
        oracle_budget: a.oracle_budget,
        ..AnalyzeOptions::default()
    };
    if let Some(m) = a.mechanisms {
        opts.mechanisms = m;
    }
    if let Some(m) = a.up_mode {
        opts.up_mode = m;
    }
    let report = analyze_files(&a.edges, &monitors, a.paths.as_deref(), &opts)?;
    match &a.out {
        Some(dir) => {
            report.write_dir(dir)?;
            println!("{}", report.summary);
        }
        None => {
            let mut text = format!("# {}\n", report.summary);
            text += &report.csp_csv()?;
            text += "\n";
            text += &report.up_csv()?;
            if !report.oracle.is_empty() {
                text += "\n";
                text += &report.oracle_csv()?;
            }
            print_stdout(&text)?;
        }
    }
    Ok(0)
}

fn cmd_experiment(kind: ExperimentKind, a: ExperimentArgs) -> Result<u8, Error> {
    let cfg = build_config(kind, a)?;
    let out_path = cfg.out.clone();
    let resolved = cfg.resolve()?;
    let output = experiment::run(&resolved)?;
    match &out_path {
        Some(path) => experiment::write_output(path, &output)?,
        None if kind != ExperimentKind::OracleCheck => print_stdout(&experiment::records_csv(&output.records)?)?,
        None => {}
    }
    Ok(check_status(&output))
}

/// Prints the oracle-check verdict; the counterexample goes to stderr.
fn check_status(output: &RunOutput) -> u8 {
    let Some(check) = &output.check else {
        return 0;
    };
    let checks: u64 = check.report.tallies.values().map(|t| t.total()).sum();
    if check.report.passed() {
        println!("all checks passed ({} instances, {checks} checks)", check.instances);
        let m = check.report.cap_upper_match;
        if m.total() > 0 {
            println!("CAP upper bound exact on {}/{} nodes", m.passed, m.total());
        }
        return 0;
    }
    for (name, t) in &check.report.tallies {
        if t.failed > 0 {
            println!("FAILED {name}: {} of {}", t.failed, t.total());
        }
    }
    if let Some((label, ce)) = &check.counterexample {
        eprintln!("counterexample ({label}):");
        eprintln!("{}", ce.to_json());
    }
    CHECK_FAILURE
}

fn build_config(kind: ExperimentKind, a: ExperimentArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &a.config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path)?;
            if cfg.experiment != kind {
                return Err(Error::Config(format!(
                    "{} is a {} config, not {}",
                    path.display(),
                    cfg.experiment.as_str(),
                    kind.as_str()
                )));
            }
            cfg
        }
        None => ExperimentConfig::new(kind),
    };

    let rebuild = a.model.is_some() || a.links.is_some() || a.param.is_some();
    if rebuild {
        let names: Vec<String> = match &a.model {
            Some(m) => m.clone(),
            None if !cfg.models.is_empty() => cfg.models.iter().map(|e| e.model.clone()).collect(),
            None => ModelKind::ALL.iter().map(|k| k.as_str().to_string()).collect(),
        };
        let mut names_seen = Vec::new();
        cfg.models.clear();
        for name in names {
            if names_seen.contains(&name) {
                continue;
            }
            names_seen.push(name.clone());
            if name.eq_ignore_ascii_case("FILE") {
                cfg.models.push(file_entry(&a)?);
                continue;
            }
            let kind: ModelKind = name.parse()?;
            let base = ModelEntry {
                target_links: None,
                n: a.nodes.or(if kind_samples_n(cfg.experiment) { None } else { Some(experiment::DEFAULT_NODES) }),
                ..ModelEntry::generator(kind, 0, 0.0)
            };
            match (&a.links, &a.param) {
                (Some(ts), _) => cfg.models.extend(ts.iter().map(|&t| ModelEntry {
                    target_links: Some(t),
                    ..base.clone()
                })),
                (None, Some(ps)) => cfg.models.extend(ps.iter().map(|&p| ModelEntry {
                    param: Some(p),
                    ..base.clone()
                })),
                (None, None) if cfg.experiment == ExperimentKind::OracleCheck => cfg.models.push(base),
                (None, None) => {
                    let defaults = default_models(cfg.experiment);
                    cfg.models.extend(
                        defaults
                            .iter()
                            .filter(|d| d.model == kind.as_str())
                            .map(|d| ModelEntry { n: base.n, ..d.clone() }),
                    );
                }
            }
        }
    } else if let Some(n) = a.nodes {
        if cfg.models.is_empty() {
            cfg.models = default_models(kind);
        }
        for e in cfg.models.iter_mut().filter(|e| e.edges.is_none()) {
            e.n = Some(n);
        }
    }
    if !rebuild && (a.edges.is_some() || a.monitors.is_some() || a.paths.is_some()) {
        return Err(Error::Config("--edges, --monitors and --paths need --model FILE".into()));
    }

    if let Some(v) = a.mu_list {
        cfg.mu_list = v;
    }
    if let Some(v) = a.instances {
        cfg.instances = Some(v);
    }
    if let Some(v) = a.kmax {
        cfg.k_max = Some(v);
    }
    if let Some(v) = a.mechanisms {
        cfg.mechanisms = v;
    }
    if let Some(v) = a.up_mode {
        cfg.up_mode = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.out {
        cfg.out = Some(v);
    }
    if let Some(v) = a.parallel {
        cfg.parallel = Some(v);
    }
    if let Some(v) = a.oracle_budget {
        cfg.oracle_budget = v;
    }
    if let Some(f) = a.fault {
        cfg.fault = match f.as_str() {
            "none" => Fault::None,
            "pi-off-by-one" => Fault::PiOffByOne,
            _ => return Err(Error::Config(format!("unknown fault `{f}`"))),
        };
    }
    Ok(cfg)
}

fn kind_samples_n(kind: ExperimentKind) -> bool {
    kind == ExperimentKind::OracleCheck
}

fn file_entry(a: &ExperimentArgs) -> Result<ModelEntry, Error> {
    let edges = a
        .edges
        .clone()
        .ok_or_else(|| Error::Config("--model FILE needs --edges".into()))?;
    Ok(ModelEntry::file(edges, a.monitors.clone(), a.paths.clone()))
}

fn print_stdout(text: &str) -> Result<(), Error> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::Io {
            path: Path::new("<stdout>").to_path_buf(),
            source: e,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use floc::experiment::Source;

    fn args(extra: &[&str]) -> ExperimentArgs {
        let mut argv = vec!["floc", "sweep"];
        argv.extend_from_slice(extra);
        match Cli::parse_from(argv).command {
            Command::Sweep(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn flags_build_models() {
        let cfg = build_config(ExperimentKind::Sweep, args(&["--model", "ER,BA", "--links", "51,99", "--nodes", "16"]))
            .unwrap();
        assert_eq!(cfg.models.len(), 4);
        assert!(cfg.models.iter().all(|m| m.n == Some(16)));
        let r = cfg.resolve().unwrap();
        let names: Vec<_> = r.models.iter().map(|m| m.name.as_str()).collect();
        assert_eq!(names, ["ER-L51", "ER-L99", "BA-L51", "BA-L99"]);
    }

    #[test]
    fn nodes_override_defaults() {
        let cfg = build_config(ExperimentKind::Sweep, args(&["--nodes", "12"])).unwrap();
        assert_eq!(cfg.models.len(), 4);
        assert!(cfg.models.iter().all(|m| m.n == Some(12)));
    }

    #[test]
    fn file_needs_edges() {
        let e = build_config(ExperimentKind::Sweep, args(&["--model", "FILE"])).unwrap_err();
        assert_eq!(exit_code(&e), CONFIG_ERROR);
        let e = build_config(ExperimentKind::Sweep, args(&["--monitors", "x.monitors"])).unwrap_err();
        assert_eq!(exit_code(&e), CONFIG_ERROR);
    }

    #[test]
    fn file_source() {
        let cfg = build_config(
            ExperimentKind::Sweep,
            args(&["--model", "FILE", "--edges", "net.edges", "--monitors", "net.monitors"]),
        )
        .unwrap();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.models[0].name, "net");
        assert!(matches!(&r.models[0].source, Source::File { monitors: Some(_), .. }));
    }

    #[test]
    fn unknown_model_is_config_error() {
        let e = build_config(ExperimentKind::Sweep, args(&["--model", "XYZ", "--links", "5"])).unwrap_err();
        assert_eq!(exit_code(&e), CONFIG_ERROR);
    }
}
