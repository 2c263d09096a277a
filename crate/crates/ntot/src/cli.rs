//! Command-line surface: problem generation, single solves, experiment
//! sweeps, isometry/certificate reports, and oracle cross-checks.
//!
//! Every randomized command requires or synthesizes a seed and echoes it;
//! rerunning with the echoed seed reproduces all outputs byte for byte.
//! Parameter precedence is flag > config file > built-in default, and the
//! run manifest records the provenance of every resolved value.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! failure, 3 certificate required but invalid.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiments::{
    gen_problem, iterations_experiment, residual_experiment, success_experiment, Axis, ProblemSpec,
    SweepSpec,
};
use crate::io::{
    format_float, parse_config, read_matrix, read_vector, write_matrix, write_vector,
};
use crate::rip::{certificate_for_theorem, default_parameters, exact_ric};
use crate::rng::GENERATOR_ID;
use crate::solvers::{solve, RecoveryProblem, SolverConfig, StopRule, Variant};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_CERTIFICATE: i32 = 3;

#[derive(Parser)]
#[command(
    name = "ntot",
    version,
    about = "Sparse recovery via Newton-step optimal thresholding, with baselines and a deterministic benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded Gaussian recovery problem and write it as text files
    Gen(GenArgs),
    /// Run one algorithm on a problem read from files
    Solve(SolveArgs),
    /// Run a residual, iterations, or success study and write CSV
    Sweep(SweepArgs),
    /// Exact restricted-isometry constants and convergence certificates
    Ric(RicArgs),
    /// Run the brute-force oracle and inequality-replay suites
    OracleCheck(OracleArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Optional key=value config file (flags override it)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Noise scale for y = A x* + noise * theta
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Algorithm: ntot, ntrot, ntrotp, iht, nsiht, nshtp, omp, sp
    #[arg(long)]
    algo: Option<String>,
    /// Measurement matrix file
    #[arg(long)]
    matrix: PathBuf,
    /// Measurement vector file
    #[arg(long)]
    rhs: PathBuf,
    /// Optional ground-truth vector file
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Stopping rule: residual, relative-error, cap
    #[arg(long)]
    stop: Option<String>,
    #[arg(long)]
    stop_tol: Option<f64>,
    /// Refuse to run unless this theorem's certificate validates (1, 2 or 3)
    #[arg(long)]
    require_certificate: Option<u8>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Study: residual, iterations, success
    #[arg(long)]
    study: Option<String>,
    /// Axis for grid studies: k_over_n or m_over_n
    #[arg(long)]
    axis: Option<String>,
    #[arg(long)]
    from: Option<f64>,
    #[arg(long)]
    to: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated algorithm list
    #[arg(long)]
    algos: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Comma-separated epsilon values for the residual study; "auto" uses
    /// the per-matrix default rule
    #[arg(long)]
    eps_list: Option<String>,
    /// Comma-separated lambda values for the residual study
    #[arg(long)]
    lambda_list: Option<String>,
    /// Dimension preset: desk (64x128, 20 trials) or paper (256x512, 50 trials)
    #[arg(long)]
    preset: Option<String>,
    /// Worker thread count for trial execution (0 = all cores)
    #[arg(long)]
    workers: Option<usize>,
    /// Output CSV path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RicArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    matrix: PathBuf,
    /// Comma-separated isometry orders to compute exactly
    #[arg(long)]
    orders: Option<String>,
    /// Sparsity level for the certificates
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args)]
struct OracleArgs {
    /// Run only one suite: projection, relaxation, inequalities,
    /// contraction, negative-control
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Resolves parameters with flag > config file > default precedence and
/// records provenance for the manifest.
struct Resolver {
    config: BTreeMap<String, String>,
    resolved: Vec<(String, String, &'static str)>,
}

impl Resolver {
    fn new(config_path: Option<&Path>) -> Result<Self> {
        let mut config = BTreeMap::new();
        if let Some(path) = config_path {
            for (k, v) in parse_config(&std::fs::read_to_string(path)?)? {
                config.insert(k, v);
            }
        }
        Ok(Resolver {
            config,
            resolved: Vec::new(),
        })
    }

    fn resolve<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + ToString + Clone,
    {
        let (value, provenance) = if let Some(v) = flag {
            (v, "flag")
        } else if let Some(raw) = self.config.get(key) {
            let v = raw
                .parse::<T>()
                .map_err(|_| Error::Parse(format!("config key '{key}': bad value '{raw}'")))?;
            (v, "config")
        } else {
            (default, "default")
        };
        self.resolved
            .push((key.to_string(), value.to_string(), provenance));
        self.resolved.sort();
        self.resolved.dedup();
        Ok(value)
    }

    fn note(&mut self, key: &str, value: impl ToString, provenance: &'static str) {
        self.resolved
            .push((key.to_string(), value.to_string(), provenance));
    }

    fn manifest(&self, command: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# ntot v{TOOLKIT_VERSION}");
        let _ = writeln!(s, "# generator = {GENERATOR_ID}");
        let _ = writeln!(s, "command = {command}");
        for (key, value, provenance) in &self.resolved {
            let _ = writeln!(s, "{key} = {value}  # {provenance}");
        }
        s
    }
}

fn csv_header(resolver: &Resolver, command: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# ntot v{TOOLKIT_VERSION}");
    let _ = writeln!(s, "# generator = {GENERATOR_ID}");
    let _ = writeln!(s, "# command = {command}");
    for (key, value, provenance) in &resolver.resolved {
        let _ = writeln!(s, "# {key} = {value} ({provenance})");
    }
    s
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_)
        | Error::Parse(_)
        | Error::GuardExceeded(_)
        | Error::DimensionMismatch(_)
        | Error::MissingGroundTruth => EXIT_USAGE,
        Error::InvalidCertificate(_) => EXIT_CERTIFICATE,
        Error::NonConvergence { .. }
        | Error::NumericalFailure(_)
        | Error::NonFinite(_)
        | Error::Io(_) => EXIT_NUMERICAL,
    }
}

/// Parses argv and runs the selected command, returning the process exit
/// code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with exit code 0.
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Ric(args) => cmd_ric(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn synth_seed() -> u64 {
    use std::time::{SystemTime, UNIX_EPOCH};
    let nanos = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0);
    crate::rng::mix64(nanos ^ std::process::id() as u64)
}

fn cmd_gen(args: GenArgs) -> Result<i32> {
    let mut r = Resolver::new(args.config.as_deref())?;
    let m = r.resolve("m", args.m, 64usize)?;
    let n = r.resolve("n", args.n, 128usize)?;
    let k = r.resolve("k", args.k, 5usize)?;
    let noise = r.resolve("noise", args.noise, 0.0f64)?;
    let seed = r.resolve("seed", args.seed, synth_seed())?;
    println!("seed = {seed}");
    let spec = ProblemSpec::new(m, n, k, noise, seed)?;
    let problem = gen_problem(&spec)?;
    std::fs::create_dir_all(&args.out_dir)?;
    write_matrix(&args.out_dir.join("A.txt"), &problem.a)?;
    write_vector(&args.out_dir.join("y.txt"), &problem.y)?;
    write_vector(
        &args.out_dir.join("x_true.txt"),
        problem.x_true.as_ref().expect("generated problems carry ground truth"),
    )?;
    std::fs::write(args.out_dir.join("manifest.txt"), r.manifest("gen"))?;
    println!(
        "wrote A.txt, y.txt, x_true.txt, manifest.txt to {}",
        args.out_dir.display()
    );
    Ok(EXIT_OK)
}

fn parse_stop_rule(s: &str) -> Result<StopRule> {
    match s {
        "residual" => Ok(StopRule::Residual),
        "relative-error" => Ok(StopRule::RelativeError),
        "cap" => Ok(StopRule::IterationCapOnly),
        other => Err(Error::InvalidConfig(format!("unknown stop rule '{other}'"))),
    }
}

fn trace_csv(resolver: &Resolver, algorithm: Variant, result: &crate::solvers::SolveResult) -> String {
    let mut s = csv_header(resolver, "solve");
    let _ = writeln!(s, "algorithm,iteration,residual_l2,relative_error,qp_iters,qp_converged");
    for t in &result.trace {
        let rel = t
            .relative_error
            .map(format_float)
            .unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            algorithm,
            t.iteration,
            format_float(t.residual),
            rel,
            t.qp_iterations,
            t.qp_converged
        );
    }
    s
}

fn cmd_solve(args: SolveArgs) -> Result<i32> {
    let mut r = Resolver::new(args.config.as_deref())?;
    let algo_name = r.resolve("algo", args.algo, "ntrotp".to_string())?;
    let variant = Variant::parse(&algo_name)?;
    let a = read_matrix(&args.matrix)?;
    let y = read_vector(&args.rhs)?;
    let x_true = args.truth.as_deref().map(read_vector).transpose()?;
    let k = r.resolve("k", args.k, 5usize)?;
    let lambda = r.resolve("lambda", args.lambda, 5.0f64)?;
    let eps = match args.eps {
        Some(e) => {
            r.note("eps", e, "flag");
            e
        }
        None => match r.config.get("eps").cloned() {
            Some(raw) => {
                let e = raw
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("config key 'eps': bad value '{raw}'")))?;
                r.note("eps", e, "config");
                e
            }
            None => {
                let e = default_parameters(&a, lambda)?;
                r.note("eps", format_float(e), "default");
                e
            }
        },
    };
    let max_iter = r.resolve("max_iter", args.max_iter, 50usize)?;
    let stop_name = r.resolve("stop", args.stop, "residual".to_string())?;
    let stop_rule = parse_stop_rule(&stop_name)?;
    let stop_tol = r.resolve("stop_tol", args.stop_tol, 1e-6f64)?;

    if let Some(theorem) = args.require_certificate {
        let cert = certificate_for_theorem(theorem, &a, k, eps, lambda)?;
        println!("{}", cert.render());
        if !cert.valid {
            eprintln!("error: theorem {theorem} certificate is invalid for these parameters");
            return Ok(EXIT_CERTIFICATE);
        }
    }

    let problem = RecoveryProblem::new(a, y, k, x_true, None)?;
    let mut config = SolverConfig::new(variant, eps, lambda);
    config.max_outer_iter = max_iter;
    config.stop_rule = stop_rule;
    config.stop_tol = stop_tol;
    let result = solve(&problem, &config)?;

    std::fs::create_dir_all(&args.out_dir)?;
    write_vector(&args.out_dir.join("x_hat.txt"), &result.x_hat)?;
    std::fs::write(
        args.out_dir.join("trace.csv"),
        trace_csv(&r, variant, &result),
    )?;
    std::fs::write(args.out_dir.join("manifest.txt"), r.manifest("solve"))?;
    println!(
        "{}: status {:?}, {} iterations, final residual {}",
        variant,
        result.status,
        result.iterations_used(),
        format_float(result.final_residual())
    );
    if result.status == crate::solvers::Status::NumericalFailure {
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}

fn parse_variant_list(s: &str) -> Result<Vec<Variant>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(Variant::parse)
        .collect()
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad float '{t}' in list")))
        })
        .collect()
}

fn linspace(from: f64, to: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![from];
    }
    (0..points)
        .map(|i| from + (to - from) * i as f64 / (points - 1) as f64)
        .collect()
}

fn configure_workers(workers: Option<usize>) -> Result<()> {
    #[cfg(feature = "parallel")]
    if let Some(w) = workers {
        if w > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build_global()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<i32> {
    let mut r = Resolver::new(args.config.as_deref())?;
    // Worker count is an execution detail: it never appears in output
    // metadata so CSVs stay byte-identical across worker counts.
    configure_workers(args.workers)?;
    let preset = r.resolve("preset", args.preset, "desk".to_string())?;
    let (pm, pn, ptrials) = match preset.as_str() {
        "desk" => (64usize, 128usize, 20usize),
        "paper" => (256, 512, 50),
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown preset '{other}' (expected desk or paper)"
            )))
        }
    };
    let study = r.resolve("study", args.study, "success".to_string())?;
    let m = r.resolve("m", args.m, pm)?;
    let n = r.resolve("n", args.n, pn)?;
    let k = r.resolve("k", args.k, 5usize)?;
    let noise = r.resolve("noise", args.noise, 0.0f64)?;
    let seed = r.resolve("seed", args.seed, synth_seed())?;
    println!("seed = {seed}");
    let out = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("{study}.csv")));

    let csv = match study.as_str() {
        "residual" => {
            let algos_raw =
                r.resolve("algos", args.algos, "ntrot,ntrotp,iht,nsiht,nshtp".to_string())?;
            let algorithms = parse_variant_list(&algos_raw)?;
            let max_iter = r.resolve("max_iter", args.max_iter, 50usize)?;
            let lambda_raw = r.resolve("lambda_list", args.lambda_list, "5".to_string())?;
            let lambdas = parse_f64_list(&lambda_raw)?;
            let eps_raw = r.resolve("eps_list", args.eps_list, "auto".to_string())?;
            let eps_values: Vec<Option<f64>> = if eps_raw.trim() == "auto" {
                vec![None]
            } else {
                parse_f64_list(&eps_raw)?.into_iter().map(Some).collect()
            };
            let spec = ProblemSpec::new(m, n, k, noise, seed)?;
            let mut s = csv_header(&r, "sweep");
            let _ = writeln!(
                s,
                "epsilon,lambda,algorithm,iteration,residual_l2,relative_error"
            );
            for &eps in &eps_values {
                for &lambda in &lambdas {
                    for row in residual_experiment(&spec, &algorithms, eps, lambda, max_iter)? {
                        let rel = row.relative_error.map(format_float).unwrap_or_default();
                        let _ = writeln!(
                            s,
                            "{},{},{},{},{},{}",
                            format_float(row.epsilon),
                            format_float(row.lambda),
                            row.algorithm,
                            row.iteration,
                            format_float(row.residual),
                            rel
                        );
                    }
                }
            }
            s
        }
        "iterations" | "success" => {
            let algos_raw = r.resolve("algos", args.algos, "ntrot,ntrotp,nsiht,nshtp".to_string())?;
            let algorithms = parse_variant_list(&algos_raw)?;
            let axis_name = r.resolve("axis", args.axis, "k_over_n".to_string())?;
            let axis = Axis::parse(&axis_name)?;
            let from = r.resolve("from", args.from, 0.01f64)?;
            let to = r.resolve("to", args.to, 0.35f64)?;
            let points = r.resolve("points", args.points, 8usize)?;
            let trials = r.resolve("trials", args.trials, ptrials)?;
            let default_cap = if study == "success" { 20 } else { 50 };
            let max_iter = r.resolve("max_iter", args.max_iter, default_cap)?;
            let lambda_raw = r.resolve("lambda_list", args.lambda_list, "5".to_string())?;
            let lambda = *parse_f64_list(&lambda_raw)?
                .first()
                .ok_or_else(|| Error::InvalidConfig("lambda list is empty".into()))?;
            let sweep = SweepSpec {
                axis,
                grid: linspace(from, to, points),
                trials_per_point: trials,
                algorithms,
                m,
                n,
                k,
                base_seed: seed,
                max_outer_iter: max_iter,
                eps: None,
                lambda,
                noise_scale: noise,
            };
            let mut s = csv_header(&r, "sweep");
            if study == "iterations" {
                let _ = writeln!(s, "algorithm,axis,axis_value,avg_iterations");
                for row in iterations_experiment(&sweep)? {
                    let _ = writeln!(
                        s,
                        "{},{},{},{}",
                        row.algorithm,
                        row.axis,
                        format_float(row.axis_value),
                        format_float(row.avg_iterations)
                    );
                }
            } else {
                let _ = writeln!(s, "algorithm,axis,axis_value,trials,successes,success_rate");
                for row in success_experiment(&sweep, noise)? {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{}",
                        row.algorithm,
                        row.axis,
                        format_float(row.axis_value),
                        row.trials,
                        row.successes,
                        format_float(row.success_rate)
                    );
                }
            }
            s
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown study '{other}' (expected residual, iterations, success)"
            )))
        }
    };
    std::fs::write(&out, csv)?;
    println!("wrote {}", out.display());
    Ok(EXIT_OK)
}

fn cmd_ric(args: RicArgs) -> Result<i32> {
    let mut r = Resolver::new(args.config.as_deref())?;
    let a = read_matrix(&args.matrix)?;
    let orders_raw = r.resolve("orders", args.orders, "1,2,3".to_string())?;
    let orders: Vec<usize> = orders_raw
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad order '{t}'")))
        })
        .collect::<Result<_>>()?;
    let k = r.resolve("k", args.k, 1usize)?;
    let lambda = r.resolve("lambda", args.lambda, 5.0f64)?;
    let eps = match args.eps {
        Some(e) => e,
        None => default_parameters(&a, lambda)?,
    };
    r.note("eps", format_float(eps), if args.eps.is_some() { "flag" } else { "default" });
    for q in orders {
        let res = exact_ric(&a, q)?;
        println!(
            "delta_{q} = {}  (witness {:?}, {} supports)",
            format_float(res.delta),
            res.witness_support.indices(),
            res.supports_enumerated
        );
    }
    for theorem in 1..=3u8 {
        let cert = certificate_for_theorem(theorem, &a, k, eps, lambda)?;
        println!("{}", cert.render());
    }
    Ok(EXIT_OK)
}

fn cmd_oracle_check(args: OracleArgs) -> Result<i32> {
    let seed = args.seed.unwrap_or(0x0C_0FFE);
    println!("seed = {seed}");
    let reports = crate::oracle::run_suites(args.suite.as_deref(), seed)?;
    let mut all_pass = true;
    for report in &reports {
        let verdict = if report.passed() { "pass" } else { "FAIL" };
        println!(
            "{:<18} {} ({} checks, {} failures)",
            report.name, verdict, report.checks, report.failures
        );
        for note in &report.notes {
            println!("    {note}");
        }
        all_pass &= report.passed();
    }
    Ok(if all_pass { EXIT_OK } else { EXIT_USAGE })
}

/// Gen helper shared by tests: builds the problem exactly as `gen` writes it.
pub fn gen_files(out_dir: &Path, m: usize, n: usize, k: usize, noise: f64, seed: u64) -> Result<()> {
    let spec = ProblemSpec::new(m, n, k, noise, seed)?;
    let problem = gen_problem(&spec)?;
    std::fs::create_dir_all(out_dir)?;
    write_matrix(&out_dir.join("A.txt"), &problem.a)?;
    write_vector(&out_dir.join("y.txt"), &problem.y)?;
    write_vector(&out_dir.join("x_true.txt"), problem.x_true.as_ref().unwrap())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.01, 0.35, 5);
        assert_eq!(g.len(), 5);
        assert!((g[0] - 0.01).abs() < 1e-15);
        assert!((g[4] - 0.35).abs() < 1e-15);
        assert_eq!(linspace(0.2, 0.9, 1), vec![0.2]);
    }

    #[test]
    fn variant_list_parsing() {
        let v = parse_variant_list("ntot, sp,iht").unwrap();
        assert_eq!(v, vec![Variant::Ntot, Variant::Sp, Variant::Iht]);
        assert!(parse_variant_list("nope").is_err());
    }

    #[test]
    fn resolver_precedence_flag_over_config_over_default() {
        let dir = std::env::temp_dir().join(format!("ntot-cli-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let cfg = dir.join("cfg.txt");
        std::fs::write(&cfg, "m = 7\nn = 9\n").unwrap();
        let mut r = Resolver::new(Some(&cfg)).unwrap();
        assert_eq!(r.resolve("m", Some(3usize), 1).unwrap(), 3);
        assert_eq!(r.resolve("n", None, 1usize).unwrap(), 9);
        assert_eq!(r.resolve("k", None::<usize>, 5).unwrap(), 5);
        let manifest = r.manifest("gen");
        assert!(manifest.contains("m = 3  # flag"));
        assert!(manifest.contains("n = 9  # config"));
        assert!(manifest.contains("k = 5  # default"));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        assert_eq!(run(["ntot", "frobnicate"]), EXIT_USAGE);
    }

    #[test]
    fn error_exit_codes() {
        assert_eq!(exit_code_for(&Error::InvalidConfig("x".into())), EXIT_USAGE);
        assert_eq!(
            exit_code_for(&Error::InvalidCertificate("x".into())),
            EXIT_CERTIFICATE
        );
        assert_eq!(
            exit_code_for(&Error::NonConvergence {
                iterations: 1,
                residual: 1.0
            }),
            EXIT_NUMERICAL
        );
    }
}
