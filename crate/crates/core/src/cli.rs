//! The `matround` command line.
//!
//! Exit codes: 0 on success (and, for `verify`, when every check passes), 1 on
//! solver failure or a failed check, 2 on usage and instance errors.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::instance::{parse_instance, Instance, FORMAT};
use crate::polytope::{decompose_base, decompose_point, Mode};
use crate::rng::{stream, time_seed, Domain};
use crate::solvers::{
    pareto_query, solve_loose_packing, solve_matroid_knapsacks, solve_mincost_packing, solve_minimax, ParetoOutcome,
    SolverParams, TargetVector,
};
use crate::stats::{
    check_traces, default_subsets, estimate_marginals, marginals_from_samples, test_independent_submodular_tails,
    test_linear_tails, test_negative_correlation, test_submodular_lower_tail, Harness, Method, Sampler,
};

/// Largest number of sampled sets or traces written out in full.
const LISTING_LIMIT: usize = 1000;

const DEFAULT_DELTAS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];

#[derive(Parser, Debug)]
#[command(
    name = "matround",
    version,
    about = "Dependent randomized rounding in matroid polytopes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Instance file (JSON).
    #[arg(long)]
    instance: PathBuf,
    /// Seed for all randomness; defaults to the clock except for `verify`.
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; the report goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent trials.
    #[arg(long, env = "MATROUND_JOBS", default_value_t = 1)]
    jobs: usize,
    /// Leave the wall-time field out of the report.
    #[arg(long)]
    omit_timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the instance point as a convex combination of bases or independent sets.
    Decompose {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Round the instance point.
    Round {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "swap")]
        method: MethodArg,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Write elementary-step traces here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Monte Carlo checks of the rounding guarantees.
    Verify {
        #[arg(value_enum)]
        check: CheckArg,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20_000)]
        trials: usize,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// Comma-separated tail parameters.
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
        /// Random subsets added to all pairs when the instance lists none.
        #[arg(long, default_value_t = 10)]
        extra_subsets: usize,
    },
    /// Run an optimization pipeline.
    Solve {
        #[arg(value_enum)]
        problem: ProblemArg,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 25)]
        trials: usize,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Base,
    Matroid,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MethodArg {
    Swap,
    Pipage,
    Independent,
    AdjustPipage,
    SwapPoint,
}

impl MethodArg {
    fn method(self) -> Method {
        match self {
            MethodArg::Swap => Method::Swap,
            MethodArg::Pipage => Method::Pipage,
            MethodArg::Independent => Method::Independent,
            MethodArg::AdjustPipage => Method::AdjustPipage,
            MethodArg::SwapPoint => Method::SwapPoint,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum CheckArg {
    Marginals,
    Negcorr,
    Tails,
    SubmodLower,
    SubmodIndep,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ProblemArg {
    Knapsack,
    Loose,
    Minimax,
    Mincost,
    Pareto,
}

/// The report written by every command.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub format: u32,
    pub command: String,
    /// Arguments after the program name; rerunning them reproduces the report.
    pub argv: Vec<String>,
    pub params: Value,
    pub seed: u64,
    pub seed_from_clock: bool,
    pub outputs: Value,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

/// Outcome of [`run_command`].
#[derive(Debug)]
pub struct Run {
    pub code: i32,
    pub report: Option<RunReport>,
    /// The report (without `--out`) or help text.
    pub stdout: Option<String>,
    /// Usage and runtime errors.
    pub stderr: Option<String>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Schema { .. }
            | Error::NotInPolytope { .. }
            | Error::Inconsistent(_)
            | Error::InvalidCombination(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load(common: &Common) -> std::result::Result<Instance, Failure> {
    parse_instance(&common.instance).map_err(|e| Failure::Usage(format!("{}: {e}", common.instance.display())))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

struct Prepared {
    command: String,
    params: Value,
    seed: u64,
    seed_from_clock: bool,
    outputs: Value,
    passed: bool,
    failed_is_error: bool,
}

fn seed_of(common: &Common) -> (u64, bool) {
    match common.seed {
        Some(s) => (s, false),
        None => (time_seed(), true),
    }
}

fn default_method(inst: &Instance) -> Result<Method> {
    Ok(match inst.point_mode()? {
        Mode::B => Method::Swap,
        Mode::P => Method::SwapPoint,
    })
}

fn sampler(inst: &Instance, method: Method) -> Result<Sampler> {
    let point = inst.require_point()?;
    let comb = inst.file.combination.as_ref().filter(|_| method.is_swap());
    let comb = comb.filter(|c| {
        let d = inst.matroid.rank_full();
        method != Method::Swap || c.terms.iter().all(|t| t.set.len() == d)
    });
    Sampler::new(method, &inst.matroid, point, comb)
}

fn run_decompose(common: &Common, mode: Option<ModeArg>) -> std::result::Result<Prepared, Failure> {
    let inst = load(common)?;
    let point = inst.require_point()?;
    let mode = match mode {
        Some(ModeArg::Base) => Mode::B,
        Some(ModeArg::Matroid) => Mode::P,
        None => inst.point_mode()?,
    };
    let c = match mode {
        Mode::B => decompose_base(&inst.matroid, point)?,
        Mode::P => decompose_point(&inst.matroid, point)?,
    };
    let r = c.recompose(inst.n());
    let max_error = r.iter().zip(point).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(Prepared {
        command: "decompose".into(),
        params: json!({"instance": common.instance, "mode": mode.name()}),
        seed: common.seed.unwrap_or(0),
        seed_from_clock: false,
        outputs: json!({"mode": mode.name(), "terms": c.len(), "combination": c, "max_error": max_error}),
        passed: true,
        failed_is_error: false,
    })
}

fn run_round(
    common: &Common,
    method: MethodArg,
    trials: usize,
    trace: Option<&PathBuf>,
) -> std::result::Result<Prepared, Failure> {
    if trials == 0 {
        return Err(Failure::Usage("--trials must be positive".into()));
    }
    let inst = load(common)?;
    let method = method.method();
    let s = sampler(&inst, method)?;
    let (seed, clock) = seed_of(common);
    let harness = Harness::new(trials, seed).with_jobs(common.jobs);
    let samples = harness.samples(&s)?;
    let marg = marginals_from_samples(&s, &harness, &samples);
    let mut outputs = json!({
        "method": method.name(),
        "trials": trials,
        "frequencies": marg.elements.iter().map(|e| e.estimate).collect::<Vec<_>>(),
        "structural_violations": marg.structural_violations,
    });
    if trials <= LISTING_LIMIT {
        outputs["sets"] = to_value(&samples);
    }
    if let Some(path) = trace {
        let traced = trials.min(LISTING_LIMIT);
        let mut entries = Vec::with_capacity(traced);
        for t in 0..traced {
            let (set, tr) = s.sample_traced(&mut stream(seed, Domain::Rounding, t as u64))?;
            entries.push(json!({"trial": t, "set": set, "trace": tr}));
        }
        let check = check_traces(&s, &Harness::new(traced, seed).with_jobs(common.jobs))?;
        let doc = json!({"method": method.name(), "seed": seed, "runs": entries});
        write_json(path, &doc).map_err(Failure::Runtime)?;
        outputs["trace_check"] = to_value(&check);
    }
    Ok(Prepared {
        command: "round".into(),
        params: json!({"instance": common.instance, "method": method.name(), "trials": trials}),
        seed,
        seed_from_clock: clock,
        // Independent rounding makes no feasibility promise.
        passed: method == Method::Independent || marg.structural_violations == 0,
        failed_is_error: true,
        outputs,
    })
}

fn run_verify(
    check: CheckArg,
    common: &Common,
    trials: usize,
    method: Option<MethodArg>,
    deltas: Option<&Vec<f64>>,
    extra: usize,
) -> std::result::Result<Prepared, Failure> {
    let seed = common
        .seed
        .ok_or_else(|| Failure::Usage("verify requires --seed for reproducibility".into()))?;
    if trials == 0 {
        return Err(Failure::Usage("--trials must be positive".into()));
    }
    let inst = load(common)?;
    let harness = Harness::new(trials, seed).with_jobs(common.jobs);
    let deltas: Vec<f64> = deltas
        .cloned()
        .or_else(|| inst.file.deltas.clone())
        .unwrap_or_else(|| DEFAULT_DELTAS.to_vec());
    let method = match (method, check) {
        (Some(m), _) => m.method(),
        (None, CheckArg::SubmodIndep) => Method::Independent,
        (None, _) => default_method(&inst)?,
    };
    let need_functions = || -> std::result::Result<(), Failure> {
        if inst.functions.is_empty() {
            Err(Failure::Usage("this check needs at least one function".into()))
        } else {
            Ok(())
        }
    };
    let (name, outputs, passed) = match check {
        CheckArg::Marginals => {
            let r = estimate_marginals(&sampler(&inst, method)?, &harness)?;
            ("marginals", to_value(&r), r.passed)
        }
        CheckArg::Negcorr => {
            let subsets = inst
                .file
                .subsets
                .clone()
                .unwrap_or_else(|| default_subsets(inst.n(), extra, seed));
            let r = test_negative_correlation(&sampler(&inst, method)?, &subsets, &harness)?;
            ("negcorr", to_value(&r), r.passed)
        }
        CheckArg::Tails => {
            let a = inst.file.weights.clone().unwrap_or_else(|| vec![1.0; inst.n()]);
            let r = test_linear_tails(&sampler(&inst, method)?, &a, &deltas, &harness)?;
            ("tails", to_value(&r), r.passed)
        }
        CheckArg::SubmodLower => {
            need_functions()?;
            let s = sampler(&inst, method)?;
            let reports = inst
                .functions
                .iter()
                .map(|f| test_submodular_lower_tail(f, &s, &deltas, &harness))
                .collect::<Result<Vec<_>>>()?;
            let passed = reports.iter().all(|r| r.passed);
            ("submod-lower", to_value(&reports), passed)
        }
        CheckArg::SubmodIndep => {
            need_functions()?;
            let x = inst.require_point()?;
            let reports = inst
                .functions
                .iter()
                .map(|f| test_independent_submodular_tails(f, x, &deltas, &harness))
                .collect::<Result<Vec<_>>>()?;
            let passed = reports.iter().all(|r| r.passed);
            ("submod-indep", to_value(&reports), passed)
        }
    };
    Ok(Prepared {
        command: format!("verify {name}"),
        params: json!({
            "instance": common.instance,
            "method": method.name(),
            "trials": trials,
            "deltas": deltas,
        }),
        seed,
        seed_from_clock: false,
        outputs,
        passed,
        failed_is_error: true,
    })
}

fn run_solve(problem: ProblemArg, common: &Common, params: SolverParams) -> std::result::Result<Prepared, Failure> {
    params.validate()?;
    let inst = load(common)?;
    let m = &inst.matroid;
    let first_function = || {
        inst.functions
            .first()
            .cloned()
            .ok_or_else(|| Failure::Usage("this problem needs a function".into()))
    };
    let (name, outputs, passed) = match problem {
        ProblemArg::Knapsack => {
            let r = solve_matroid_knapsacks(&first_function()?, m, inst.require_packing()?, &params)?;
            ("knapsack", to_value(&r), r.feasible)
        }
        ProblemArg::Loose => {
            let r = solve_loose_packing(&first_function()?, m, inst.require_packing()?, &params)?;
            ("loose", to_value(&r), r.feasible)
        }
        ProblemArg::Minimax => {
            let r = solve_minimax(m, &inst.congestion_matrix()?, &params)?;
            ("minimax", to_value(&r), true)
        }
        ProblemArg::Mincost => {
            let r = solve_mincost_packing(m, inst.require_packing()?, &params)?;
            ("mincost", to_value(&r), true)
        }
        ProblemArg::Pareto => {
            let targets = TargetVector::new(
                inst.file
                    .targets
                    .clone()
                    .ok_or_else(|| Failure::Usage("pareto needs targets".into()))?,
            )?;
            let r = pareto_query(&inst.functions, m, &targets, &params)?;
            let ok = !matches!(r.outcome, ParetoOutcome::Failure { .. });
            ("pareto", to_value(&r), ok)
        }
    };
    Ok(Prepared {
        command: format!("solve {name}"),
        params: json!({"instance": common.instance, "solver": to_value(&params)}),
        seed: params.seed,
        seed_from_clock: common.seed.is_none(),
        outputs,
        passed,
        failed_is_error: true,
    })
}

fn write_json(path: &PathBuf, v: &impl Serialize) -> std::result::Result<(), String> {
    let text = serde_json::to_string_pretty(v).expect("reports serialize");
    std::fs::write(path, text + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Parses `argv` (including the program name), runs the command and writes the
/// report to `--out` when given.
pub fn run_command<I, T>(argv: I) -> Run
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let text = e.render().to_string();
            let (stdout, stderr) = if code == 0 {
                (Some(text), None)
            } else {
                (None, Some(text))
            };
            return Run {
                code,
                report: None,
                stdout,
                stderr,
            };
        }
    };
    let start = Instant::now();
    let (common, result) = match &cli.command {
        Command::Decompose { common, mode } => (common, run_decompose(common, *mode)),
        Command::Round {
            common,
            method,
            trials,
            trace,
        } => (common, run_round(common, *method, *trials, trace.as_ref())),
        Command::Verify {
            check,
            common,
            trials,
            method,
            deltas,
            extra_subsets,
        } => (
            common,
            run_verify(*check, common, *trials, *method, deltas.as_ref(), *extra_subsets),
        ),
        Command::Solve {
            problem,
            common,
            epsilon,
            trials,
            steps,
            samples,
            depth,
        } => {
            let params = SolverParams {
                epsilon: *epsilon,
                steps: *steps,
                samples: *samples,
                depth: *depth,
                trials: *trials,
                seed: seed_of(common).0,
            };
            (common, run_solve(*problem, common, params))
        }
    };
    let prepared = match result {
        Ok(p) => p,
        Err(Failure::Usage(msg)) => {
            return Run {
                code: 2,
                report: None,
                stdout: None,
                stderr: Some(format!("error: {msg}")),
            }
        }
        Err(Failure::Runtime(msg)) => {
            return Run {
                code: 1,
                report: None,
                stdout: None,
                stderr: Some(format!("error: {msg}")),
            }
        }
    };
    let report = RunReport {
        format: FORMAT,
        command: prepared.command,
        argv: argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
        params: prepared.params,
        seed: prepared.seed,
        seed_from_clock: prepared.seed_from_clock,
        outputs: prepared.outputs,
        passed: prepared.passed,
        wall_time_ms: (!common.omit_timing).then(|| start.elapsed().as_secs_f64() * 1e3),
    };
    let mut stdout = None;
    match &common.out {
        Some(path) => {
            if let Err(e) = write_json(path, &report) {
                return Run {
                    code: 1,
                    report: Some(report),
                    stdout: None,
                    stderr: Some(format!("error: {e}")),
                };
            }
        }
        None => stdout = Some(serde_json::to_string_pretty(&report).expect("reports serialize")),
    }
    let code = if report.passed || !prepared.failed_is_error {
        0
    } else {
        1
    };
    Run {
        code,
        report: Some(report),
        stdout,
        stderr: None,
    }
}

/// Entry point for the binary: prints the report or the error and returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let run = run_command(argv);
    use std::io::Write;
    // A closed pipe is not an error worth reporting.
    if let Some(text) = &run.stdout {
        let _ = writeln!(std::io::stdout(), "{text}");
    }
    if let Some(text) = &run.stderr {
        let _ = writeln!(std::io::stderr(), "{text}");
    }
    run.code
}
