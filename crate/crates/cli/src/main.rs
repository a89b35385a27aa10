use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use unbalanced::bounds::{bounds_for, bounds_report, known_count, sandwich_check};
use unbalanced::enumerate::{
    bipartite_audit, enumerate_chambers, parity_audit, selection_space_audit, signature_uniqueness_audit, ChamberSet,
    EnumerateOptions, Enumeration,
};
use unbalanced::families::{balance_certify, Family};
use unbalanced::kernel::Field;
use unbalanced::lattice::{
    build_flat_lattice, characteristic_polynomial, projective_charpoly, whitney_compare, zaslavsky_count, MAX_BINARY_N,
    MAX_RATIONAL_N,
};
use unbalanced::{Error, Integer};

const EXIT_AUDIT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BALANCED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "unbalanced",
    version,
    about = "Maximal unbalanced families and chambers of the all-subset arrangement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print E_n for each n.
    Count(RunArgs),
    /// Enumerate chambers and write the chamber file.
    Enumerate(RunArgs),
    /// Certify a family read as JSON from standard input.
    Certify,
    /// Sorted signatures of all chambers.
    Signatures(RunArgs),
    /// Characteristic polynomial of the flat lattice.
    Charpoly {
        #[arg(long)]
        n: NRange,
        #[arg(long, default_value = "Q")]
        field: Field,
        #[arg(long, value_enum, default_value = "raw")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bounds on E_n, with the sandwich verdict where E_n is tabulated.
    Bounds {
        #[arg(long)]
        n: NRange,
        #[arg(long, value_enum, default_value = "raw")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every audit and cross-check over a range of n.
    Verify {
        #[arg(long)]
        n: NRange,
        #[arg(long, env = "UNBALANCED_THREADS")]
        threads: Option<usize>,
        /// Also certify every selection family (n <= 5).
        #[arg(long)]
        selection_space: bool,
        #[arg(long, value_enum, default_value = "raw")]
        format: Format,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    n: NRange,
    #[arg(long, env = "UNBALANCED_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, requires = "checkpoint")]
    resume: bool,
    #[arg(long)]
    limit_chambers: Option<usize>,
    /// Seconds.
    #[arg(long)]
    time_budget: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Raw,
}

/// `5`, `2..4` or `2..=4`, both ends inclusive.
#[derive(Clone, Debug)]
struct NRange(RangeInclusive<usize>);

impl FromStr for NRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("invalid n {t:?}"));
        let range = match s.split_once("..") {
            None => num(s).map(|n| n..=n)?,
            Some((a, b)) => num(a)?..=num(b.strip_prefix('=').unwrap_or(b))?,
        };
        if range.is_empty() {
            return Err(format!("empty range {s}"));
        }
        Ok(NRange(range))
    }
}

impl NRange {
    fn within(&self, lo: usize, hi: usize, what: &str) -> anyhow::Result<RangeInclusive<usize>> {
        if *self.0.start() < lo || *self.0.end() > hi {
            return Err(Usage(format!("{what} supports {lo} <= n <= {hi}")).into());
        }
        Ok(self.0.clone())
    }
}

/// Bad flags or input; exits with the usage code.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// An audit failed; exits with the audit code after the report is printed.
#[derive(Debug)]
struct AuditFailed(Vec<String>);

impl fmt::Display for AuditFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "failed audits: {}", self.0.join(", "))
    }
}

impl std::error::Error for AuditFailed {}

fn default_threads(threads: Option<usize>) -> anyhow::Result<usize> {
    match threads {
        Some(0) => Err(Usage("--threads must be positive".into()).into()),
        Some(t) => Ok(t),
        None => Ok(std::thread::available_parallelism().map_or(1, |p| p.get())),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run_enumeration(n: usize, args: &RunArgs) -> anyhow::Result<Enumeration> {
    let options = EnumerateOptions {
        threads: default_threads(args.threads)?,
        checkpoint: args.checkpoint.clone(),
        resume: args.resume,
        limit_chambers: args.limit_chambers,
        time_budget: args
            .time_budget
            .map(|s| Duration::try_from_secs_f64(s).map_err(|_| Usage(format!("invalid --time-budget {s}"))))
            .transpose()?,
        ..Default::default()
    };
    let run = enumerate_chambers(n, &options)?;
    eprintln!(
        "n={n}: {} chambers{}, {} generations, {} LP calls, {} ms",
        run.chambers.count(),
        if run.complete { "" } else { " (incomplete)" },
        run.stats.generations,
        run.stats.lp_calls,
        run.stats.elapsed_ms
    );
    Ok(run)
}

fn count(args: RunArgs) -> anyhow::Result<ExitCode> {
    let range = args.n.within(1, 8, "count")?;
    if args.checkpoint.is_some() && range.start() != range.end() {
        bail!(Usage("--checkpoint needs a single n".into()));
    }
    let mut text = String::new();
    for n in range {
        let start = Instant::now();
        let run = run_enumeration(n, &args)?;
        let e = run.chambers.count();
        eprintln!("n={n}: wall time {:.3?}", start.elapsed());
        text += &match args.format.unwrap_or(Format::Raw) {
            Format::Json => {
                json!({"schema": "1", "n": n, "E": e.to_string(), "complete": run.complete}).to_string() + "\n"
            }
            Format::Csv => format!("{n},{e},{}\n", run.complete),
            Format::Raw if run.complete => format!("E_{n} = {e}\n"),
            Format::Raw => format!("E_{n} >= {e} (incomplete)\n"),
        };
    }
    emit(&args.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn enumerate(args: RunArgs) -> anyhow::Result<ExitCode> {
    let n = *args.n.within(2, 8, "enumerate")?.start();
    if args.n.0.start() != args.n.0.end() {
        bail!(Usage("enumerate takes a single n".into()));
    }
    let run = run_enumeration(n, &args)?;
    let chambers = &run.chambers;
    let text = match args.format.unwrap_or(Format::Raw) {
        Format::Raw => chambers.to_chamber_file(),
        Format::Csv => chambers.to_signature_csv(),
        Format::Json => {
            let keys: Vec<String> = chambers.keys().iter().map(|k| k.to_hex()).collect();
            json!({
                "schema": "1",
                "n": n,
                "complete": run.complete,
                "count": chambers.count(),
                "lp_calls": run.stats.lp_calls,
                "chambers": keys,
            })
            .to_string()
                + "\n"
        }
    };
    emit(&args.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn certify() -> anyhow::Result<ExitCode> {
    let mut input = String::new();
    io::stdin().read_to_string(&mut input)?;
    let fam = Family::parse_json(&input).map_err(|e| Usage(format!("malformed family: {e}")))?;
    let cert = balance_certify(&fam)?;
    let mut body = cert.to_json();
    body.schema = Some("1".into());
    println!("{}", serde_json::to_string(&body)?);
    Ok(if cert.is_balanced() { ExitCode::from(EXIT_BALANCED) } else { ExitCode::SUCCESS })
}

fn signatures(args: RunArgs) -> anyhow::Result<ExitCode> {
    let n = *args.n.within(2, 8, "signatures")?.start();
    if args.n.0.start() != args.n.0.end() {
        bail!(Usage("signatures takes a single n".into()));
    }
    let run = run_enumeration(n, &args)?;
    let text = match args.format.unwrap_or(Format::Csv) {
        Format::Csv | Format::Raw => run.chambers.to_signature_csv(),
        Format::Json => {
            let mut sigs: Vec<Vec<u64>> = run.chambers.signatures().into_iter().map(|s| s.0).collect();
            sigs.sort();
            json!({"schema": "1", "n": n, "complete": run.complete, "signatures": sigs}).to_string() + "\n"
        }
    };
    emit(&args.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn charpoly(n: NRange, field: Field, format: Format, out: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let hi = match field {
        Field::Rationals => MAX_RATIONAL_N,
        Field::Binary => 16,
    };
    let mut text = String::new();
    for n in n.within(2, hi, &format!("charpoly over {field}"))? {
        let p = match field {
            Field::Binary if n > MAX_BINARY_N => projective_charpoly(n)?,
            _ => characteristic_polynomial(&build_flat_lattice(n, field)?),
        };
        eprintln!("n={n}: {} chambers over {field}", zaslavsky_count(&p)?);
        text += &match format {
            Format::Raw => format!("{p}\n"),
            Format::Csv => p.to_json().coeffs.join(",") + "\n",
            Format::Json => {
                let mut body = p.to_json();
                body.schema = Some("1".into());
                serde_json::to_string(&body)? + "\n"
            }
        };
    }
    emit(&out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn bounds(n: NRange, format: Format, out: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let mut text = String::new();
    for n in n.within(1, 64, "bounds")? {
        let e = known_count(n);
        let report = bounds_report(n, e.as_ref())?;
        text += &match format {
            Format::Json => serde_json::to_string(&report)? + "\n",
            Format::Csv => format!(
                "{n},{},{},{},{},{}\n",
                report.lower_power,
                report.lower_product,
                report.upper,
                report.e.clone().unwrap_or_default(),
                report.sandwich.map(|b| b.to_string()).unwrap_or_default()
            ),
            Format::Raw => match (&report.e, report.sandwich) {
                (Some(e), Some(ok)) => format!(
                    "n={n}: {} < {e} < {}, {} <= {e}: {}\n",
                    report.lower_power,
                    report.upper,
                    report.lower_product,
                    if ok { "holds" } else { "fails" }
                ),
                _ => format!(
                    "n={n}: {} < E_{n} < {}, {} <= E_{n}\n",
                    report.lower_power, report.upper, report.lower_product
                ),
            },
        };
    }
    emit(&out, &text)?;
    Ok(ExitCode::SUCCESS)
}

struct Check {
    name: String,
    n: usize,
    passed: bool,
    line: String,
}

struct Report(Vec<Check>);

impl Report {
    fn push(&mut self, name: &str, n: usize, passed: bool, line: String) {
        eprintln!("{} {line}", if passed { "pass" } else { "FAIL" });
        self.0.push(Check { name: name.into(), n, passed, line });
    }

    fn failures(&self) -> Vec<String> {
        self.0.iter().filter(|c| !c.passed).map(|c| format!("{}({})", c.name, c.n)).collect()
    }
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn verify_n(n: usize, threads: usize, selection_space: bool, report: &mut Report) -> anyhow::Result<()> {
    let run = enumerate_chambers(n, &EnumerateOptions::with_threads(threads))?;
    let chambers: &ChamberSet = &run.chambers;
    let e = chambers.count();
    let expected = known_count(n).expect("tabulated");
    report.push(
        "enumeration",
        n,
        run.complete && expected == e.into(),
        format!("enumerated({n}) = {e}, table {expected}"),
    );

    let z = zaslavsky_count(&characteristic_polynomial(&build_flat_lattice(n, Field::Rationals)?))?;
    let line = if z == e.into() {
        format!("zaslavsky({n}) = {z} = enumerated({n})")
    } else {
        format!("zaslavsky({n}) = {z} != enumerated({n}) = {e}")
    };
    report.push("zaslavsky", n, z == e.into(), line);

    let unique = signature_uniqueness_audit(chambers);
    report.push(
        "uniqueness",
        n,
        unique.passed() && unique.distinct == e,
        format!("uniqueness: {} distinct signatures", unique.distinct),
    );

    if n >= 3 {
        let parity = parity_audit(chambers);
        report.push(
            "parity",
            n,
            parity.passed(),
            format!(
                "parity({n}): {} all even, {} all odd, {} mixed",
                parity.all_even,
                parity.all_odd,
                parity.violations.len()
            ),
        );
        let bip = bipartite_audit(chambers);
        report.push(
            "bipartite",
            n,
            bip.bipartite,
            format!(
                "bipartite({n}): {}, classes {}/{}, {} edges, colors {} parity",
                if bip.bipartite { "yes" } else { "no" },
                bip.classes.0,
                bip.classes.1,
                bip.edges,
                if bip.matches_parity { "match" } else { "do not match" }
            ),
        );
    }

    let w = whitney_compare(n)?;
    report.push(
        "whitney",
        n,
        w.passed(),
        format!("whitney({n}): |w_k| over Q [{}] vs F2 [{}]", join(&w.rational), join(&w.binary)),
    );

    let b = bounds_for(n)?;
    let e_big = Integer::from(e);
    let holds = sandwich_check(n, &e_big)?;
    // E_2 = 2^1: the strict upper bound cannot hold at n = 2
    let known_tight = n == 2 && e_big == b.upper && b.lower_power < e_big && b.lower_product <= e_big;
    report.push(
        "sandwich",
        n,
        holds || known_tight,
        format!(
            "sandwich({n}): {} < {e} < {}, {} <= {e}{}",
            b.lower_power,
            b.upper,
            b.lower_product,
            if known_tight { " (upper bound attained at n = 2)" } else { "" }
        ),
    );

    if selection_space {
        let s = selection_space_audit(n)?;
        let line = format!(
            "{} selections: {} unbalanced, {} balanced, signature sets {}",
            s.selections,
            s.unbalanced,
            s.balanced,
            if s.disjoint() { "disjoint" } else { "overlap" }
        );
        let passed = s.disjoint() && s.unbalanced == e && (n < 3 || s.strict_inclusion());
        report.push("selection-space", n, passed, line);
    }
    Ok(())
}

fn verify(n: NRange, threads: Option<usize>, selection_space: bool, format: Format) -> anyhow::Result<ExitCode> {
    let hi = if selection_space { 5 } else { 6 };
    let range = n.within(2, hi, if selection_space { "verify --selection-space" } else { "verify" })?;
    let threads = default_threads(threads)?;
    let mut report = Report(Vec::new());
    for n in range {
        verify_n(n, threads, selection_space, &mut report)?;
    }
    let failures = report.failures();
    match format {
        Format::Json => {
            let checks: Vec<_> = report
                .0
                .iter()
                .map(|c| json!({"name": c.name, "n": c.n, "passed": c.passed, "detail": c.line}))
                .collect();
            println!("{}", json!({"schema": "1", "passed": failures.is_empty(), "checks": checks}));
        }
        Format::Csv => {
            for c in &report.0 {
                println!("{},{},{}", c.name, c.n, if c.passed { "pass" } else { "fail" });
            }
        }
        Format::Raw => {
            for c in &report.0 {
                println!("{}", c.line);
            }
            println!(
                "{}",
                if failures.is_empty() { "all pass".into() } else { format!("FAILED: {}", failures.join(", ")) }
            );
        }
    }
    if failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Err(AuditFailed(failures).into())
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Count(args) => count(args),
        Command::Enumerate(args) => enumerate(args),
        Command::Certify => certify(),
        Command::Signatures(args) => signatures(args),
        Command::Charpoly { n, field, format, out } => charpoly(n, field, format, out),
        Command::Bounds { n, format, out } => bounds(n, format, out),
        Command::Verify { n, threads, selection_space, format } => verify(n, threads, selection_space, format),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.is::<Usage>() {
        return EXIT_USAGE;
    }
    if err.is::<AuditFailed>() {
        return EXIT_AUDIT;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Audit { .. } | Error::Internal(_)) => EXIT_AUDIT,
        Some(_) => EXIT_USAGE,
        None if err.is::<io::Error>() => EXIT_USAGE,
        None => EXIT_AUDIT,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
