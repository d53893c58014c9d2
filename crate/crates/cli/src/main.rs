mod io;
mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::builder::BoolishValueParser;
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use resilient_cluster::approx::recover_via_2approx;
use resilient_cluster::generator::generate;
use resilient_cluster::lp::certify;
use resilient_cluster::mstdp::solve_outlier_clustering;
use resilient_cluster::oracle::{brute_force, candidate_count, DEFAULT_WORK_CAP};
use resilient_cluster::perturb::falsify_resilience;
use resilient_cluster::{
    ApproxAlgorithm, Error, FalsifierVerdict, Formulation, GeneratorConfig, GeneratorMode,
    Instance, Objective, Rational, Scalar, VerdictKind,
};
use serde::Serialize;

use crate::io::{list_instances, read_instance, write_instance, Loaded, NumberMode};
use crate::report::{Emit, LpWitness, Report, Verdict};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_NOT_RESILIENT: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("malformed JSON: {0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Solver(#[from] Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Solver(
                Error::Infeasible { .. }
                | Error::InstanceTooLarge { .. }
                | Error::ConfigInfeasible(_),
            ) => EXIT_INFEASIBLE,
            _ => EXIT_ERROR,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "resilient-cluster",
    version,
    about = "Exact clustering and LP certificates for perturbation-resilient instances"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance (or every .json file in a directory).
    Solve(SolveArgs),
    /// Certify optimality or non-resilience through the LP relaxation.
    Certify(CertifyArgs),
    /// Write a planted instance with a known optimal clustering.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Instance file, or a directory of instance files.
    #[arg(long)]
    input: PathBuf,
    /// Use exact rational arithmetic regardless of instance size.
    #[arg(
        long,
        env = "RESILIENT_CLUSTER_EXACT",
        action = ArgAction::SetTrue,
        value_parser = BoolishValueParser::new()
    )]
    exact: bool,
    /// Largest n solved exactly without --exact.
    #[arg(long, default_value_t = 256)]
    exact_cap: usize,
    /// Worker threads for directory input.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl InputArgs {
    fn mode(&self) -> NumberMode {
        NumberMode {
            force_exact: self.exact,
            exact_cap: self.exact_cap,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Lp,
    Mstdp,
    Gonzalez,
    Hs,
    Oracle,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    /// kcenter, kmedian, kmeans or lp:P.
    #[arg(long, default_value = "kcenter")]
    objective: Objective,
    #[arg(long, value_enum, default_value_t = Method::Lp)]
    method: Method,
    /// LP formulation; chosen from the instance when omitted.
    #[arg(long)]
    formulation: Option<Formulation>,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    formulation: Option<Formulation>,
    /// Also search for a 2-perturbation that changes the optimum.
    #[arg(long)]
    falsify: bool,
    /// Perturbations tried by the falsifier.
    #[arg(long, default_value_t = 2000)]
    budget: usize,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    z: usize,
    /// Separation factor between clusters; must exceed 2 in resilient modes.
    #[arg(long, default_value_t = 4.0)]
    sigma: f64,
    /// Radius of the planted clusters.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// symmetric, asymmetric, outlier or non_resilient.
    #[arg(long, default_value = "symmetric")]
    mode: GeneratorMode,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Outcome {
    report: Report,
    code: u8,
}

fn default_formulation<S: Scalar>(inst: &Instance<S>) -> Formulation {
    if inst.z() > 0 {
        Formulation::Kco
    } else if inst.is_symmetric() {
        Formulation::Kc
    } else {
        Formulation::AsymKc
    }
}

fn solve_with<S: Emit>(inst: &Instance<S>, args: &SolveArgs) -> Result<Outcome, CliError> {
    let obj = args.objective;
    let needs_kcenter = matches!(args.method, Method::Lp | Method::Gonzalez | Method::Hs);
    if needs_kcenter && obj != Objective::KCenter {
        return Err(CliError::Invalid(format!(
            "method {:?} solves kcenter, not {obj}",
            args.method
        )));
    }
    let name = format!("{:?}", args.method).to_lowercase();
    let (report, code) = match args.method {
        Method::Lp => {
            let form = args
                .formulation
                .unwrap_or_else(|| default_formulation(inst));
            return lp_report(inst, form, &name);
        }
        Method::Mstdp => {
            let clus = solve_outlier_clustering(inst, obj)?;
            (
                Report::new(inst, Verdict::Solved, &name, obj, Some(&clus))?,
                EXIT_OK,
            )
        }
        Method::Gonzalez | Method::Hs => {
            let alg = if args.method == Method::Gonzalez {
                ApproxAlgorithm::Gonzalez
            } else {
                ApproxAlgorithm::HochbaumShmoys
            };
            let clus = recover_via_2approx(inst, alg)?;
            (
                Report::new(inst, Verdict::Solved, &name, obj, Some(&clus))?,
                EXIT_OK,
            )
        }
        Method::Oracle => {
            let res = brute_force(inst, obj)?;
            let mut report = Report::new(inst, Verdict::Optimal, &name, obj, Some(&res.best))?;
            report.unique = Some(res.unique);
            (report, EXIT_OK)
        }
    };
    Ok(Outcome { report, code })
}

fn lp_report<S: Emit>(
    inst: &Instance<S>,
    form: Formulation,
    method: &str,
) -> Result<Outcome, CliError> {
    let verdict = certify(inst, form)?;
    let (kind, code) = match verdict.kind {
        VerdictKind::Optimal => (Verdict::Optimal, EXIT_OK),
        VerdictKind::Not2pr => (Verdict::Not2pr, EXIT_NOT_RESILIENT),
    };
    let mut report = Report::new(
        inst,
        kind,
        method,
        Objective::KCenter,
        verdict.clustering.as_ref(),
    )?;
    report.formulation = Some(form);
    report.lp_radius = Some(verdict.lp_radius.emit());
    report.lp_witness = verdict.fractional_witness.as_ref().map(|w| LpWitness {
        radius: w.radius.emit(),
        y: w.y.iter().flatten().map(Emit::emit).collect(),
    });
    Ok(Outcome { report, code })
}

fn certify_with<S: Emit>(inst: &Instance<S>, args: &CertifyArgs) -> Result<Outcome, CliError> {
    let form = args
        .formulation
        .unwrap_or_else(|| default_formulation(inst));
    let mut out = lp_report(inst, form, "lp")?;
    if args.falsify {
        let work = candidate_count(inst.n(), inst.k(), inst.z());
        if work > DEFAULT_WORK_CAP {
            eprintln!(
                "skipping falsifier: {work} candidate solutions exceed the cap {DEFAULT_WORK_CAP}"
            );
        } else {
            let found = falsify_resilience(inst, Objective::KCenter, args.budget)?;
            if found.verdict == FalsifierVerdict::NotResilient {
                out.report.verdict = Verdict::Not2pr;
                out.code = EXIT_NOT_RESILIENT;
            }
            out.report.falsifier = Some((&found).into());
        }
    }
    Ok(out)
}

/// Runs `f` in the instance's number mode. A float run that loses
/// precision is repeated on the exact conversion of the same matrix.
fn dispatch(
    loaded: &Loaded,
    f: impl Fn(&Loaded) -> Result<Outcome, CliError>,
) -> Result<Outcome, CliError> {
    match f(loaded) {
        Err(CliError::Solver(Error::SolverPrecisionExceeded)) => {
            let Loaded::Float(inst) = loaded else {
                return Err(Error::SolverPrecisionExceeded.into());
            };
            eprintln!("floating-point simplex lost precision, retrying in exact mode");
            let exact = inst.convert(|v| Rational::from_f64(*v).expect("validated finite"));
            f(&Loaded::Exact(exact))
        }
        other => other,
    }
}

fn timed(
    path: &Path,
    mode: NumberMode,
    run: &dyn Fn(&Loaded) -> Result<Outcome, CliError>,
) -> Result<Outcome, CliError> {
    let file = read_instance(path, mode)?;
    let start = Instant::now();
    let mut out = dispatch(&file.instance, run)?;
    out.report.timing_ms = start.elapsed().as_secs_f64() * 1e3;
    if let (Some(planted), Some(found)) = (&file.planted, &out.report.clustering) {
        out.report.matches_planted = Some(found.to_clustering()?.same_partition(planted));
    }
    Ok(out)
}

#[derive(Serialize)]
struct BatchEntry {
    file: PathBuf,
    exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<Report>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// Errors dominate, then infeasibility, then non-resilience.
fn batch_code(codes: impl Iterator<Item = u8>) -> u8 {
    let rank = |c: u8| match c {
        EXIT_ERROR => 3,
        EXIT_INFEASIBLE => 2,
        EXIT_NOT_RESILIENT => 1,
        _ => 0,
    };
    codes.max_by_key(|&c| rank(c)).unwrap_or(EXIT_OK)
}

fn print_json<T: Serialize>(value: &T) {
    let text = serde_json::to_string_pretty(value).expect("report serialises");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn run_input(input: &InputArgs, run: &(dyn Fn(&Loaded) -> Result<Outcome, CliError> + Sync)) -> u8 {
    let mode = input.mode();
    if !input.input.is_dir() {
        return match timed(&input.input, mode, run) {
            Ok(out) => {
                print_json(&out.report);
                out.code
            }
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        };
    }
    let files = match list_instances(&input.input) {
        Ok(files) => files,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(input.jobs.max(1))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    let entries: Vec<BatchEntry> = pool.install(|| {
        files
            .par_iter()
            .map(|file| match timed(file, mode, run) {
                Ok(out) => BatchEntry {
                    file: file.clone(),
                    exit_code: out.code,
                    report: Some(out.report),
                    error: None,
                },
                Err(e) => BatchEntry {
                    file: file.clone(),
                    exit_code: e.exit_code(),
                    report: None,
                    error: Some(e.to_string()),
                },
            })
            .collect()
    });
    print_json(&entries);
    batch_code(entries.iter().map(|e| e.exit_code))
}

fn cmd_solve(args: &SolveArgs) -> u8 {
    run_input(&args.input, &|loaded| match loaded {
        Loaded::Exact(inst) => solve_with(inst, args),
        Loaded::Float(inst) => solve_with(inst, args),
    })
}

fn cmd_certify(args: &CertifyArgs) -> u8 {
    run_input(&args.input, &|loaded| match loaded {
        Loaded::Exact(inst) => certify_with(inst, args),
        Loaded::Float(inst) => certify_with(inst, args),
    })
}

fn cmd_generate(args: &GenerateArgs) -> Result<(), CliError> {
    let cfg = GeneratorConfig::new(args.n, args.k, args.z, args.mode, args.seed)
        .with_sigma(args.sigma)
        .with_radius(args.radius);
    let (inst, planted) = generate::<Rational>(&cfg)?;
    let text = write_instance(&inst, Some(&planted));
    match &args.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(path.clone(), e)),
        None => {
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Generate(args) => match cmd_generate(args) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
    };
    ExitCode::from(code)
}
