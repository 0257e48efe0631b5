use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cadmm::bench::{run_bench, run_one, ConfigOverrides, Manifest, ProblemSource, SolverKind, SolverSpec};
use cadmm::checks::{run_checks, ALL_CHECKS};
use cadmm::dnnsdp::{TuningPolicy, DEFAULT_DEXT_TAU};
use cadmm::io::{read_records, read_result, write_problem, write_result, RunRecord};
use cadmm::problems::GenSpec;
use cadmm::profile::{performance_profile, Metric};
use cadmm::{Error, Result, SolveStatus};

/// Corrected semi-proximal ADMM for doubly nonnegative SDPs.
#[derive(Parser, Debug)]
#[command(name = "cadmm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one problem and write its run record.
    Solve(SolveArgs),
    /// Run a solver matrix over a manifest, or profile existing records.
    Bench(BenchArgs),
    /// Run the invariant and oracle checks.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Native,
    Biqmac,
    BiqmacExt,
    Qaplib,
    Dimacs,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Problem file.
    #[arg(long, conflicts_with = "generate", required_unless_present = "generate")]
    problem: Option<PathBuf>,
    /// Format of --problem.
    #[arg(long, value_enum, default_value = "native", requires = "problem")]
    format: Format,
    /// Seeded instance, FAMILY:SIZE:SEED (families: biq, extbiq, theta, rcp, fap, qap).
    #[arg(long, value_name = "FAMILY:SIZE:SEED")]
    generate: Option<String>,
    #[arg(long, value_parser = ["cadmm", "dext"], default_value = "cadmm")]
    solver: String,
    /// Fixed step of the directly extended method.
    #[arg(long, default_value_t = DEFAULT_DEXT_TAU)]
    tau: f64,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    tau0: Option<f64>,
    #[arg(long)]
    tau_bar: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Defaults to 20000 (3-block) or 40000 (4-block).
    #[arg(long)]
    max_iters: Option<usize>,
    /// Policy override KEY=VALUE, e.g. sigma_tuning=false or check_period=100.
    #[arg(long = "policy", value_name = "KEY=VALUE")]
    policy: Vec<String>,
    /// Run record output (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also save the problem in the native format.
    #[arg(long)]
    save_problem: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Manifest of problems and solvers (JSON).
    #[arg(long, conflicts_with = "records", required_unless_present = "records")]
    manifest: Option<PathBuf>,
    /// Existing run records (single records or arrays) to profile instead.
    #[arg(long, num_args = 1..)]
    records: Vec<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Comma-separated check ids (default: all).
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
}

fn apply_policy_overrides(policy: TuningPolicy, overrides: &[String]) -> Result<TuningPolicy> {
    let mut v = serde_json::to_value(policy)?;
    for o in overrides {
        let (key, raw) = o
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("policy override '{o}' is not KEY=VALUE")))?;
        let obj = v.as_object_mut().expect("policy serializes to an object");
        if !obj.contains_key(key) {
            let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
            return Err(Error::InvalidConfig(format!("unknown policy key '{key}' (expected one of {})", keys.join(", "))));
        }
        let val: serde_json::Value =
            serde_json::from_str(raw).map_err(|_| Error::InvalidConfig(format!("cannot parse policy value '{raw}'")))?;
        obj.insert(key.to_string(), val);
    }
    serde_json::from_value(v).map_err(|e| Error::InvalidConfig(format!("policy override: {e}")))
}

fn solve(a: &SolveArgs) -> Result<SolveStatus> {
    let src = match (&a.generate, &a.problem) {
        (Some(g), _) => ProblemSource::generated(g.parse::<GenSpec>()?),
        (None, Some(p)) => {
            let p = Some(p.clone());
            match a.format {
                Format::Native => ProblemSource { problem: p, ..Default::default() },
                Format::Biqmac => ProblemSource { biqmac: p, ..Default::default() },
                Format::BiqmacExt => ProblemSource { biqmac_ext: p, ..Default::default() },
                Format::Qaplib => ProblemSource { qaplib: p, ..Default::default() },
                Format::Dimacs => ProblemSource { dimacs: p, ..Default::default() },
            }
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    let label = src.label();
    let prob = src.load(Path::new("."))?;
    if let Some(path) = &a.save_problem {
        let meta = [("name".to_string(), label.clone())].into_iter().collect();
        write_problem(&prob, meta, path)?;
    }
    let overrides = ConfigOverrides {
        sigma: a.sigma,
        alpha: a.alpha,
        tau0: a.tau0,
        tau_bar: a.tau_bar,
        eps: a.eps,
        tol: Some(a.tol),
        max_iters: a.max_iters,
    };
    let cfg = overrides.config_for(&prob);
    let policy = apply_policy_overrides(TuningPolicy::default(), &a.policy)?;
    let kind: SolverKind = a.solver.parse()?;
    let spec = SolverSpec { kind, tau: (kind == SolverKind::Dext).then_some(a.tau), name: None };
    let record = run_one(&label, &prob, &spec, &cfg, &policy);
    println!("{}", RunRecord::summary_header());
    println!("{}", record.summary_line());
    if let Some(e) = &record.error {
        eprintln!("error: {e}");
    }
    if let Some(out) = &a.out {
        write_result(&record, out)?;
    }
    Ok(record.status)
}

fn bench(a: &BenchArgs) -> Result<()> {
    if let Some(m) = &a.manifest {
        let manifest = Manifest::read(m)?;
        let base = m.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf);
        let out = run_bench(&manifest, &base)?;
        out.write(&a.out)?;
        print!("{}", out.summary());
        return Ok(());
    }
    let mut records = Vec::new();
    for p in &a.records {
        match read_records(p) {
            Ok(mut rs) => records.append(&mut rs),
            Err(_) => records.push(read_result(p)?),
        }
    }
    std::fs::create_dir_all(&a.out)?;
    for metric in [Metric::Iterations, Metric::Time] {
        let prof = performance_profile(&records, metric, cadmm::bench::PROFILE_POINTS)?;
        let name = if metric == Metric::Iterations { "profile_iterations.csv" } else { "profile_time.csv" };
        std::fs::write(a.out.join(name), prof.to_csv())?;
        if metric == Metric::Iterations {
            println!("{}", RunRecord::summary_header());
            for r in &records {
                println!("{}", r.summary_line());
            }
            for c in &prof.curves {
                println!("{:<8} solved {:>5.1}%  iteration-profile area {:.4}", c.solver, 100.0 * c.solve_fraction, c.area());
            }
        }
    }
    Ok(())
}

fn check(a: &CheckArgs) -> bool {
    let ids: Vec<u8> = if a.only.is_empty() { ALL_CHECKS.to_vec() } else { a.only.clone() };
    let outcomes = run_checks(&ids);
    for o in &outcomes {
        println!("{}", o.line());
    }
    outcomes.iter().all(|o| o.passed || o.informational)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => solve(a).map(|s| s.exit_code()),
        Command::Bench(a) => bench(a).map(|()| 0),
        Command::Check(a) => Ok(if check(a) { 0 } else { 1 }),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
