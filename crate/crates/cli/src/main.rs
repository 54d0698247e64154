use clap::{Parser, ValueEnum};
use rieszlab::harness::verify::{verify_all, VerifyOptions};
use rieszlab::harness::{run, write_atomic, RunConfig, Verb};
use rieszlab::{Exec, LabError};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Execute the verbs listed in the config.
    Run,
    Build,
    KernelsCheck,
    Heat,
    Resolve,
    Multiplier,
    Parametrix,
    Riesz,
    Scaling,
    VerifyAll,
}

/// Discrete connected-sum models and Riesz transform diagnostics.
#[derive(Debug, Parser)]
#[command(name = "rieszlab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run config; defaults apply to every omitted field.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Upper end k0 of the energy grid.
    #[arg(long)]
    k: Option<f64>,
    /// Heat times.
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<f64>>,
    /// CG tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "source-vertex")]
    source_vertex: Option<usize>,
    #[arg(long)]
    probes: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long = "R", value_delimiter = ',')]
    r: Option<Vec<usize>>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; RIESZLAB_JOBS takes precedence.
    #[arg(long)]
    jobs: Option<usize>,
    /// Criterion ids, names or tags for verify-all.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    /// JSON report path. verify-all writes its pass/fail report here
    /// (default: <out>/verify.json); other verbs collect their JSON
    /// diagnostics into it.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Perturb the Laplacian in the decomposition check.
    #[arg(long)]
    inject_fault: bool,
}

fn verb(c: Command) -> Option<Verb> {
    Some(match c {
        Command::Build => Verb::Build,
        Command::KernelsCheck => Verb::KernelsCheck,
        Command::Heat => Verb::Heat,
        Command::Resolve => Verb::Resolve,
        Command::Multiplier => Verb::Multiplier,
        Command::Parametrix => Verb::Parametrix,
        Command::Riesz => Verb::Riesz,
        Command::Scaling => Verb::Scaling,
        Command::Run | Command::VerifyAll => return None,
    })
}

fn jobs(cli: &Cli) -> Result<Option<usize>, LabError> {
    match std::env::var("RIESZLAB_JOBS") {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| LabError::Config(format!("RIESZLAB_JOBS must be a positive integer, got {s:?}"))),
        Err(_) => match cli.jobs {
            Some(0) => Err(LabError::Config("--jobs must be positive".into())),
            j => Ok(j),
        },
    }
}

/// `scaling --out table.csv` names the table file rather than the directory.
fn table_path(cli: &Cli) -> Option<&Path> {
    let o = cli.out.as_deref()?;
    (cli.command == Command::Scaling && o.extension().is_some_and(|e| e == "csv")).then_some(o)
}

fn config(cli: &Cli) -> Result<RunConfig, LabError> {
    let mut cfg = match &cli.spec {
        Some(p) => RunConfig::from_path(p).map_err(|e| match e {
            LabError::Io(io) => LabError::Config(format!("{}: {io}", p.display())),
            e => e,
        })?,
        None => RunConfig::default(),
    };
    if let Some(k) = cli.k {
        cfg.k_grid.k0 = k;
    }
    if let Some(t) = &cli.t {
        cfg.heat_times = t.clone();
    }
    if let Some(tol) = cli.tol {
        cfg.tolerances.cg = tol;
    }
    if cli.source_vertex.is_some() {
        cfg.source_vertex = cli.source_vertex;
    }
    if let Some(n) = cli.probes {
        cfg.probes = n;
    }
    if let Some(p) = &cli.p {
        cfg.p_list = p.clone();
    }
    if let Some(r) = &cli.r {
        cfg.r_list = r.clone();
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = match table_path(cli) {
            Some(t) => t.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")).to_path_buf(),
            None => o.clone(),
        };
    }
    if let Some(v) = verb(cli.command) {
        cfg.verbs = vec![v];
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main_inner(cli: &Cli) -> Result<i32, LabError> {
    let cfg = config(cli)?;
    let exec = match jobs(cli)? {
        Some(1) => Exec::Sequential,
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
            Exec::Parallel
        }
        None => Exec::Parallel,
    };
    if cli.command == Command::VerifyAll {
        let opts = VerifyOptions {
            only: cli.only.clone(),
            inject_fault: cli.inject_fault,
        };
        let rep = verify_all(&cfg, &opts, exec)?;
        for r in &rep.results {
            println!("{}", r.line());
        }
        let path = cli.report.clone().unwrap_or_else(|| cfg.out_dir.join("verify.json"));
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        let mut text = serde_json::to_string_pretty(&rep)?;
        text.push('\n');
        write_atomic(&path, text.as_bytes())?;
        let passed = rep.results.iter().filter(|r| r.passed).count();
        println!("{passed}/{} criteria passed", rep.results.len());
        return Ok(if rep.all_passed() { 0 } else { 1 });
    }
    let outcome = run(&cfg, exec)?;
    if let Some(t) = table_path(cli) {
        let produced = cfg.out_dir.join("table.csv");
        if produced.exists() && t.file_name() != produced.file_name() {
            std::fs::rename(&produced, t)?;
        }
    }
    if let Some(path) = &cli.report {
        let mut diag = serde_json::Map::new();
        for name in outcome.manifest.steps.iter().flat_map(|s| &s.outputs) {
            if name.ends_with(".json") {
                let text = std::fs::read_to_string(cfg.out_dir.join(name))?;
                diag.insert(name.clone(), serde_json::from_str(&text)?);
            }
        }
        let doc = serde_json::json!({"config_sha256": outcome.manifest.config_sha256, "outputs": diag});
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        write_atomic(path, text.as_bytes())?;
    }
    for s in &outcome.manifest.steps {
        println!("{:<14} {:<8} {:>8.2}s {} file(s)", s.verb, s.status, s.seconds, s.outputs.len());
    }
    if let Some(e) = &outcome.manifest.error {
        eprintln!("error: {e}");
    }
    println!("manifest: {}", cfg.out_dir.join(rieszlab::harness::MANIFEST_NAME).display());
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match main_inner(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
