use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand};

use super::config::read;
use super::{
    build_kernel, pretty_json, simulate, verify, BuildRequest, ExperimentConfig, ExperimentError,
    FileKernel, FractionalKernel, KernelSpec, Manifest, Outcome, OutputSet, RandomKernel, Suite,
    VerificationSummary, EXIT_USAGE, SCHEMA,
};
use crate::stats::DiagnosticReport;

const DEFAULT_OUT: &str = "ustat-out";

/// Degenerate U-statistics experiments.
#[derive(Debug, Parser)]
#[command(name = "ustat", version, about)]
pub struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a kernel file with a diagnostics block.
    BuildKernel(BuildArgs),
    /// Run an exact randomized suite (identities or inequalities).
    Verify(VerifyArgs),
    /// Run a Monte Carlo suite from a config file.
    Simulate(SimulateArgs),
    /// Print a report and exit with its outcome.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
#[command(group(
    ArgGroup::new("source")
        .required(true)
        .args(["fractional", "random", "from", "config"])
))]
pub struct BuildArgs {
    /// Fractional product kernel of order P, arity A on [M].
    #[arg(long, num_args = 3, value_names = ["P", "A", "M"])]
    pub fractional: Option<Vec<usize>>,
    /// Random normalized kernel of order P on [M] keeping each support with
    /// probability DENSITY; uses --seed.
    #[arg(long, num_args = 3, value_names = ["P", "M", "DENSITY"])]
    pub random: Option<Vec<String>>,
    /// Existing kernel file (text or JSON).
    #[arg(long)]
    pub from: Option<PathBuf>,
    /// JSON kernel spec, e.g. {"fractional": {"order": 3, "arity": 2, "size": 100}}.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write kernel.json.
    #[arg(long)]
    pub json: bool,
    #[arg(long, default_value = DEFAULT_OUT)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// identities or inequalities; overrides the config.
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub instances: Option<usize>,
    #[arg(long)]
    pub max_size: Option<usize>,
    #[arg(long)]
    pub max_order: Option<usize>,
    /// Treat mismatches of the uncorrected covariance identity as violations.
    #[arg(long)]
    pub strict_stated: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A report.json, verify_<suite>.json, or a directory holding one.
    pub path: PathBuf,
}

fn config_error(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Config(msg.into())
}

fn kernel_spec(args: &BuildArgs) -> Result<KernelSpec, ExperimentError> {
    if let Some(v) = &args.fractional {
        return Ok(KernelSpec::Fractional(FractionalKernel {
            order: v[0],
            arity: v[1],
            size: v[2],
        }));
    }
    if let Some(v) = &args.random {
        let int = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| config_error(format!("`{s}` is not a nonnegative integer")))
        };
        let density = v[2]
            .parse::<f64>()
            .map_err(|_| config_error(format!("`{}` is not a number", v[2])))?;
        return Ok(KernelSpec::Random(RandomKernel {
            order: int(&v[0])?,
            size: int(&v[1])?,
            density,
            seed: args.seed,
        }));
    }
    if let Some(path) = &args.from {
        return Ok(KernelSpec::File(FileKernel { path: path.clone() }));
    }
    let path = args.config.as_ref().expect("clap enforces one source");
    serde_json::from_str(&read(path)?).map_err(|e| config_error(e.to_string()))
}

fn finish(
    mut files: OutputSet,
    dir: &Path,
    command: &str,
    cfg: &ExperimentConfig,
    hash: &str,
    replicates: usize,
    outcome: Outcome,
) -> Result<Outcome, ExperimentError> {
    let mut names = files.names();
    names.push("manifest.json".into());
    let mut config = cfg.clone();
    config.output = None;
    let manifest = Manifest {
        config_hash: hash.to_string(),
        schema: SCHEMA.to_string(),
        command: command.to_string(),
        suite: cfg.suite.name().to_string(),
        seed: cfg.seed,
        replicates,
        outcome,
        files: names,
        config,
    };
    files.add("manifest.json", pretty_json(&manifest));
    files.write(dir)?;
    Ok(outcome)
}

fn out_dir(flag: &Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    flag.clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn cmd_build_kernel(args: &BuildArgs) -> Result<Outcome, ExperimentError> {
    let request = BuildRequest {
        kernel: kernel_spec(args)?,
        json: args.json,
    };
    let (kernel, diag, files) = build_kernel(&request)?;
    files.write(&args.out)?;
    println!("config_hash {}", diag.config_hash);
    println!(
        "kernel order {} size {} supports {} sum a^2 {:.12} rho^2 {:.6e}",
        kernel.order(),
        kernel.size(),
        kernel.len(),
        diag.squared_norm,
        diag.rho_squared
    );
    for c in &diag.contraction_norms {
        println!("contraction r={} norm {:.6e}", c.r, c.norm);
    }
    println!("wrote {}", args.out.display());
    Ok(Outcome::Pass)
}

fn print_summary(s: &VerificationSummary) {
    println!("config_hash {}", s.config_hash);
    for c in &s.checks {
        println!(
            "{:<32} instances {:>4} violations {:>4} worst margin {:+.3e}{}",
            c.check,
            c.instances,
            c.violations,
            c.worst_margin,
            if c.enforced { "" } else { " (informational)" }
        );
    }
    println!("{} violations: {:?}", s.violations, s.outcome);
}

fn cmd_verify(args: &VerifyArgs) -> Result<Outcome, ExperimentError> {
    let mut cfg = match (&args.config, &args.suite) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(_)) => ExperimentConfig::new(Suite::Identities),
        (None, None) => return Err(config_error("verify needs --suite or --config")),
    };
    if let Some(s) = &args.suite {
        cfg.suite = s.parse()?;
    }
    if !cfg.suite.is_exact() {
        return Err(config_error(format!(
            "verify runs identities or inequalities, not `{}`",
            cfg.suite.name()
        )));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.instances {
        cfg.verify.instances = n;
    }
    if let Some(n) = args.max_size {
        cfg.verify.max_size = n;
    }
    if let Some(n) = args.max_order {
        cfg.verify.max_order = n;
    }
    cfg.verify.strict_stated |= args.strict_stated;
    cfg.validate()?;
    let hash = cfg.hash()?;
    let (summary, files) = verify(&cfg, &hash)?;
    print_summary(&summary);
    let dir = out_dir(&args.out, &cfg);
    finish(
        files,
        &dir,
        "verify",
        &cfg,
        &hash,
        cfg.verify.instances,
        summary.outcome,
    )
}

fn print_report(r: &DiagnosticReport) {
    println!("config_hash {}", r.config_hash);
    for e in &r.entries {
        println!(
            "{} {:<64} {:.6} <= {:.6}",
            if e.pass { "PASS" } else { "FAIL" },
            e.name,
            e.statistic,
            e.threshold
        );
    }
    for n in &r.notes {
        println!("note: {n}");
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<Outcome, ExperimentError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if cfg.suite.is_exact() {
        return Err(config_error(format!(
            "simulate runs fclt, universality or diagnostics, not `{}`",
            cfg.suite.name()
        )));
    }
    cfg.validate()?;
    let hash = cfg.hash()?;
    let out = simulate(&cfg, &hash)?;
    print_report(&out.report);
    let outcome = Outcome::from_pass(out.report.passed());
    let dir = out_dir(&args.out, &cfg);
    finish(
        out.files,
        &dir,
        "simulate",
        &cfg,
        &hash,
        cfg.replicates,
        outcome,
    )
}

fn cmd_report(args: &ReportArgs) -> Result<Outcome, ExperimentError> {
    let path = if args.path.is_dir() {
        let mut candidates = vec![args.path.join("report.json")];
        for suite in ["identities", "inequalities"] {
            candidates.push(args.path.join(format!("verify_{suite}.json")));
        }
        candidates
            .into_iter()
            .find(|p| p.is_file())
            .ok_or_else(|| config_error(format!("no report found in {}", args.path.display())))?
    } else {
        args.path.clone()
    };
    let text = read(&path)?;
    if let Ok(r) = DiagnosticReport::from_json(&text) {
        print_report(&r);
        return Ok(Outcome::from_pass(r.passed()));
    }
    match serde_json::from_str::<VerificationSummary>(&text) {
        Ok(s) => {
            print_summary(&s);
            Ok(s.outcome)
        }
        Err(_) => Err(config_error(format!("{} is not a report", path.display()))),
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, ExperimentError> {
    match &cli.command {
        Command::BuildKernel(a) => cmd_build_kernel(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Report(a) => cmd_report(a),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 pass, 1 failure, 2 usage or config error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let start = Instant::now();
    let result = match cli.threads {
        Some(0) => Err(config_error("--threads must be at least 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(config_error(e.to_string())),
        },
        None => dispatch(&cli),
    };
    eprintln!("wall time {:.3} s", start.elapsed().as_secs_f64());
    match result {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
