//! Command-line front end for `pellsieve`.
//!
//! Everything goes through [`run`], which takes the argument vector and the
//! two output streams so the whole tool can be driven in-process by tests.
//! Records on stdout are JSON lines `{"kind": ..., "payload": ...}` with all
//! integers written as decimal strings, or CSV for sweeps.

mod checkpoint;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pellsieve::lucas::{lucas_pair, LucasParams};
use pellsieve::pell::{self, PellSolution};
use pellsieve::search::{
    self, check_instance, collect_hits, conjecture1_probe, conjecture2_probe, search_pair,
    solve_c1, sweep_with, Inequality, PairReport, SweepOptions,
};
use pellsieve::sieve::{self, classify_exclusion};
use pellsieve::{Int, MPolicy, SearchHit, SearchQuery};
use serde::Serialize;
use serde_json::json;

use checkpoint::Checkpoint;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INCONSISTENT: i32 = 2;

/// Deliberate corruption used by tests to reach the self-check paths.
#[derive(Debug, Clone, Copy, Default)]
pub struct Faults {
    /// Add one to every `x` produced by `check` and `sweep` before it is
    /// verified.
    pub corrupt_hits: bool,
}

#[derive(Parser, Debug)]
#[command(name = "pellsieve", version, about = "Search and certify (a^n - 2^m)(b^n - 2^m) = x^2")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Test a single instance
    Check { a: u64, b: u64, m: u64, n: u64 },
    /// Exhaustive search over a box of (a, b, n)
    Sweep(SweepArgs),
    /// Pell equation solutions
    #[command(subcommand)]
    Pell(PellCmd),
    /// Lucas sequence terms U_n(P, Q), V_n(P, Q)
    #[command(subcommand)]
    Lucas(LucasCmd),
    /// Exclusion rules and exponent classes
    #[command(subcommand)]
    Sieve(SieveCmd),
    /// Probes of the two open conjectures
    #[command(subcommand)]
    Conjecture(ConjectureCmd),
    /// Exact checks of the auxiliary inequalities and equation
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Args, Debug, Clone)]
struct SweepArgs {
    #[arg(long, default_value_t = 2)]
    a_min: u64,
    #[arg(long)]
    a_max: u64,
    #[arg(long, default_value_t = 2)]
    b_min: u64,
    #[arg(long)]
    b_max: u64,
    #[arg(long, default_value_t = 2)]
    n_min: u64,
    #[arg(long)]
    n_max: u64,
    /// Fixed value of m
    #[arg(long, default_value_t = 1, conflicts_with = "m_all")]
    m: u64,
    /// Visit every m with 0 < m < n
    #[arg(long)]
    m_all: bool,
    /// Disable the exclusion classifier and the exponent-class sieve
    #[arg(long)]
    no_sieve: bool,
    /// Odd primes for the exponent-class sieve
    #[arg(long, value_delimiter = ',', conflicts_with = "no_sieve")]
    primes: Option<Vec<u64>>,
    /// Worker threads, 0 for one per core
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Record completed pairs here and resume from it if it exists
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum PellCmd {
    /// Fundamental solution of x^2 - d y^2 = 1 (or 2 with --n2)
    Fund {
        d: u64,
        #[arg(long)]
        n2: bool,
    },
    /// Solutions of x^2 - d y^2 = 1
    Gen {
        d: u64,
        #[arg(long, default_value_t = 5)]
        count: usize,
    },
    /// Solutions of x^2 - d y^2 = 2
    Gen2 {
        d: u64,
        #[arg(long, default_value_t = 5)]
        count: usize,
    },
    /// Solutions of a x^2 - b y^2 = 1
    Ratio {
        a: u64,
        b: u64,
        #[arg(long, default_value_t = 5)]
        count: usize,
    },
    /// Solutions of u^2 - 5 v^2 = -4^k
    Neg4k {
        k: u32,
        #[arg(long, default_value_t = 5)]
        count: usize,
    },
}

#[derive(Args, Debug)]
struct LucasArgs {
    #[arg(allow_negative_numbers = true)]
    p: Int,
    #[arg(allow_negative_numbers = true)]
    q: Int,
    n: u64,
}

#[derive(Subcommand, Debug)]
enum LucasCmd {
    U(LucasArgs),
    V(LucasArgs),
    Pair(LucasArgs),
}

#[derive(Subcommand, Debug)]
enum SieveCmd {
    /// First exclusion rule covering the cell, if any
    Classify { a: u64, b: u64, m: u64, n: u64 },
    /// Exponent classes excluded by one prime
    Classes { a: u64, b: u64, m: u64, p: u64 },
    /// Exponent classes surviving every listed prime
    Residual {
        a: u64,
        b: u64,
        m: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<u64>,
        #[arg(long, default_value_t = 1_000_000)]
        cap: u64,
    },
}

#[derive(Subcommand, Debug)]
enum ConjectureCmd {
    /// (2^n - 2)((2 P_k)^n - 2) = x^2 for odd k > 3
    One {
        #[arg(long, value_delimiter = ',', default_values_t = [5, 7, 9, 11])]
        k: Vec<u64>,
        #[arg(long, default_value_t = 100)]
        n_max: u64,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Largest n among solutions with 2 < a < b and m = 1
    Two {
        #[arg(long, default_value_t = 100)]
        a_max: u64,
        #[arg(long, default_value_t = 100)]
        b_max: u64,
        #[arg(long, default_value_t = 200)]
        n_max: u64,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
}

#[derive(Args, Debug)]
struct Range {
    #[arg(long)]
    m_min: Option<u64>,
    #[arg(long, default_value_t = 64)]
    m_max: u64,
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    /// 5^m > 2^(2m+1) - 3
    L9(Range),
    /// 2 * 3^(4m-3) > 5^m + 1
    L11(Range),
    /// (z + 1)(2z - 1)^2 = 10^(2m)
    C1 {
        #[arg(long, default_value_t = 12)]
        m_max: u64,
    },
}

/// Why a command stopped early.
#[derive(Debug)]
pub(crate) enum Failure {
    Usage(String),
    Inconsistent(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

macro_rules! usage_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Usage(e.to_string())
            }
        }
    )*};
}
usage_from!(
    pellsieve::SearchError,
    pellsieve::SieveError,
    pellsieve::PellError,
    pellsieve::LucasError
);

type Outcome = Result<(), Failure>;

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T, O, E>(args: I, out: &mut O, err: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    O: Write,
    E: Write + Send,
{
    run_with_faults(args, out, err, Faults::default())
}

pub fn run_with_faults<I, T, O, E>(args: I, out: &mut O, err: &mut E, faults: Faults) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    O: Write,
    E: Write + Send,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{rendered}");
                EXIT_OK
            };
        }
    };
    let result = dispatch(cli.command, out, err, faults).and_then(|()| Ok(out.flush()?));
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Inconsistent(msg)) => {
            let _ = writeln!(err, "internal inconsistency: {msg}");
            EXIT_INCONSISTENT
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch<O: Write, E: Write + Send>(cmd: Command, out: &mut O, err: &mut E, faults: Faults) -> Outcome {
    match cmd {
        Command::Check { a, b, m, n } => check(a, b, m, n, out, faults),
        Command::Sweep(args) => sweep(&args, out, err, faults),
        Command::Pell(cmd) => pell_cmd(cmd, out),
        Command::Lucas(cmd) => lucas_cmd(cmd, out),
        Command::Sieve(cmd) => sieve_cmd(cmd, out),
        Command::Conjecture(cmd) => conjecture_cmd(cmd, out, err),
        Command::Verify(cmd) => verify_cmd(cmd, out),
    }
}

fn emit<O: Write, P: Serialize>(out: &mut O, kind: &str, payload: P) -> Outcome {
    let line = serde_json::to_string(&json!({ "kind": kind, "payload": payload }))
        .expect("records always serialize");
    writeln!(out, "{line}")?;
    Ok(())
}

fn corrupt(hit: &mut SearchHit, faults: Faults) {
    if faults.corrupt_hits {
        hit.x += 1u32;
    }
}

pub(crate) fn verify_hits(hits: &[SearchHit]) -> Outcome {
    match hits.iter().find(|h| !h.verify()) {
        Some(h) => Err(Failure::Inconsistent(format!(
            "reported x = {} does not square to the product at (a, b, m, n) = ({}, {}, {}, {})",
            h.x, h.a, h.b, h.m, h.n
        ))),
        None => Ok(()),
    }
}

fn check<O: Write>(a: u64, b: u64, m: u64, n: u64, out: &mut O, faults: Faults) -> Outcome {
    let found = check_instance(a, b, m, n)?;
    let verdict = classify_exclusion(a, b, m, n)?;
    match found {
        Some(x) => {
            let mut hit = SearchHit { a, b, m, n, x };
            corrupt(&mut hit, faults);
            verify_hits(std::slice::from_ref(&hit))?;
            if verdict.excluded() {
                return Err(Failure::Inconsistent(format!(
                    "rule {} excludes a verified solution",
                    verdict.rule()
                )));
            }
            emit(out, "hit", &hit)
        }
        None => emit(out, "verdict", &verdict),
    }
}

fn build_query(args: &SweepArgs) -> SearchQuery {
    let mut query = SearchQuery::new(
        args.a_min..=args.a_max,
        args.b_min..=args.b_max,
        args.n_min..=args.n_max,
    );
    query.m_policy = if args.m_all { MPolicy::AllBelowN } else { MPolicy::Fixed(args.m) };
    if args.no_sieve {
        query = query.unsieved();
    } else if let Some(primes) = &args.primes {
        query.sieve_primes = primes.clone();
    }
    query
}

fn progress_line(report: &PairReport) -> String {
    let s = &report.stats;
    format!(
        "pair {} {}: {:.3}s, {} cells, {} classified, {} sieved, {} prefiltered, {} root-tested, {} hits",
        report.a,
        report.b,
        report.elapsed.as_secs_f64(),
        s.cells,
        s.classified_out,
        s.sieved_out,
        s.prefiltered_out,
        s.root_tested,
        report.hits.len()
    )
}

fn sweep<O: Write, E: Write + Send>(args: &SweepArgs, out: &mut O, err: &mut E, faults: Faults) -> Outcome {
    let query = build_query(args);
    query.validate()?;

    let mut checkpoint = match &args.checkpoint {
        Some(path) => Some(Checkpoint::open(path, &query)?),
        None => None,
    };
    let mut hits: Vec<SearchHit> = Vec::new();
    let mut options = SweepOptions { jobs: args.jobs, ..Default::default() };
    if let Some(cp) = &checkpoint {
        verify_hits(cp.hits())?;
        if let Some((a, b)) = cp.last_pair() {
            let fresh = search_pair(&query, a, b)?;
            if fresh.hits != cp.hits_of(a, b) {
                return Err(Failure::Inconsistent(format!(
                    "checkpointed pair ({a}, {b}) does not match a recomputation"
                )));
            }
        }
        hits.extend(cp.hits().iter().cloned());
        options.skip = cp.completed();
        writeln!(err, "resuming: {} pairs already complete", options.skip.len())?;
    }

    let err = Mutex::new(err);
    let writer = checkpoint.as_mut().map(Mutex::new);
    let io_error: Mutex<Option<std::io::Error>> = Mutex::new(None);
    let reports = sweep_with(&query, &options, |report| {
        let _ = writeln!(err.lock().unwrap(), "{}", progress_line(report));
        if let Some(w) = &writer {
            if let Err(e) = w.lock().unwrap().record(report) {
                io_error.lock().unwrap().get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = io_error.into_inner().unwrap() {
        return Err(e.into());
    }
    if let Some(cp) = checkpoint.as_mut() {
        cp.finish()?;
    }

    let mut fresh = collect_hits(&reports);
    for h in &mut fresh {
        corrupt(h, faults);
    }
    verify_hits(&fresh)?;
    hits.extend(fresh);
    search::sort_hits(&mut hits);

    match args.format {
        Format::Json => {
            for h in &hits {
                emit(out, "hit", h)?;
            }
        }
        Format::Csv => {
            writeln!(out, "a,b,m,n,x")?;
            for h in &hits {
                writeln!(out, "{},{},{},{},{}", h.a, h.b, h.m, h.n, h.x)?;
            }
        }
    }
    Ok(())
}

fn solution_record(role: &str, index: usize, s: &PellSolution, extra: serde_json::Value) -> serde_json::Value {
    let mut v = json!({
        "role": role,
        "index": index.to_string(),
        "x": s.x.to_string(),
        "y": s.y.to_string(),
    });
    if let (Some(obj), serde_json::Value::Object(more)) = (v.as_object_mut(), extra) {
        obj.extend(more);
    }
    v
}

fn emit_solutions<O: Write>(
    out: &mut O,
    role: &str,
    solutions: &[PellSolution],
    extra: serde_json::Value,
) -> Outcome {
    for (i, s) in solutions.iter().enumerate() {
        emit(out, "pell_solution", solution_record(role, i, s, extra.clone()))?;
    }
    Ok(())
}

fn pell_cmd<O: Write>(cmd: PellCmd, out: &mut O) -> Outcome {
    match cmd {
        PellCmd::Fund { d, n2: false } => {
            let f = pell::fundamental_n1(d)?;
            emit(out, "pell_solution", solution_record("N1", 0, &f.as_solution(), json!({ "d": d.to_string() })))
        }
        PellCmd::Fund { d, n2: true } => match pell::fundamental_n2(d)? {
            Some(f) => emit(
                out,
                "pell_solution",
                solution_record("N2", 0, &f.as_solution(), json!({ "d": d.to_string() })),
            ),
            None => Err(pellsieve::PellError::InsolvableN2(d).into()),
        },
        PellCmd::Gen { d, count } => {
            emit_solutions(out, "N1", &pell::gen_n1(d, count)?, json!({ "d": d.to_string() }))
        }
        PellCmd::Gen2 { d, count } => {
            emit_solutions(out, "N2", &pell::gen_n2(d, count)?, json!({ "d": d.to_string() }))
        }
        PellCmd::Ratio { a, b, count } => emit_solutions(
            out,
            "RATIO",
            &pell::gen_ratio(a, b, count)?,
            json!({ "a": a.to_string(), "b": b.to_string() }),
        ),
        PellCmd::Neg4k { k, count } => emit_solutions(
            out,
            "NEG4K",
            &pell::solve_neg4k(k, count)?,
            json!({ "d": "5", "k": k.to_string() }),
        ),
    }
}

fn lucas_cmd<O: Write>(cmd: LucasCmd, out: &mut O) -> Outcome {
    let (args, want_u, want_v) = match cmd {
        LucasCmd::U(a) => (a, true, false),
        LucasCmd::V(a) => (a, false, true),
        LucasCmd::Pair(a) => (a, true, true),
    };
    let params = LucasParams::new(args.p.clone(), args.q.clone())?;
    let pair = lucas_pair(&params, args.n);
    let mut payload = json!({
        "P": args.p.to_string(),
        "Q": args.q.to_string(),
        "n": args.n.to_string(),
    });
    let obj = payload.as_object_mut().unwrap();
    if want_u {
        obj.insert("u".into(), pair.u.to_string().into());
    }
    if want_v {
        obj.insert("v".into(), pair.v.to_string().into());
    }
    emit(out, "lucas_value", payload)
}

fn sieve_cmd<O: Write>(cmd: SieveCmd, out: &mut O) -> Outcome {
    match cmd {
        SieveCmd::Classify { a, b, m, n } => emit(out, "verdict", classify_exclusion(a, b, m, n)?),
        SieveCmd::Classes { a, b, m, p } => {
            emit(out, "class_set", sieve::qr_excluded_classes(a, b, m, p)?)
        }
        SieveCmd::Residual { a, b, m, primes, cap } => {
            emit(out, "class_set", sieve::residual_classes(a, b, m, &primes, cap)?)
        }
    }
}

fn conjecture_cmd<O: Write, E: Write>(cmd: ConjectureCmd, out: &mut O, err: &mut E) -> Outcome {
    let hits = match cmd {
        ConjectureCmd::One { k, n_max, jobs } => conjecture1_probe(&k, n_max, jobs)?,
        ConjectureCmd::Two { a_max, b_max, n_max, jobs } => {
            let report = conjecture2_probe(a_max, b_max, n_max, jobs)?;
            writeln!(err, "largest n among hits: {}", report.max_n)?;
            report.hits
        }
    };
    verify_hits(&hits)?;
    for h in &hits {
        emit(out, "hit", h)?;
    }
    Ok(())
}

fn verify_cmd<O: Write>(cmd: VerifyCmd, out: &mut O) -> Outcome {
    let (which, range) = match cmd {
        VerifyCmd::L9(r) => (Inequality::L9, r),
        VerifyCmd::L11(r) => (Inequality::L11, r),
        VerifyCmd::C1 { m_max } => {
            for (m, z) in solve_c1(m_max) {
                emit(out, "c1_solution", json!({ "m": m.to_string(), "z": z.to_string() }))?;
            }
            return Ok(());
        }
    };
    let start = range.m_min.unwrap_or(which.domain_start());
    for (m, holds) in search::verify_inequality(which, start..=range.m_max)? {
        emit(
            out,
            "inequality",
            json!({ "which": which, "m": m.to_string(), "holds": holds }),
        )?;
    }
    Ok(())
}
