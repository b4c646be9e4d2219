//! `pcx`: exact search, certificate verification and scans from the shell.
//!
//! Exit codes: 0 computed or verified, 1 a checked claim failed, 2 a search
//! ran out of budget, 64 bad usage, 70 internal error.

mod render;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pcx_core::arith::PrimeBasis;
use pcx_core::conj2::{verify_conjecture2, Status};
use pcx_core::scanner::{h_density, scan_h, HDensity, HRecord};
use pcx_core::search::{check_range, exact_f, Budget, RangeMode, DEFAULT_CAP};
use pcx_core::tables::{builtin_table, load_table};
use pcx_core::theorems::{
    builtin_scheme, remark_counterexample, theorem1, theorem2, verify_counting, verify_uniqueness_chain_k4,
    CountingReport, UniquenessChainReport,
};
use pcx_core::Error;

const EXIT_FALSIFIED: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_INTERNAL: u8 = 70;

#[derive(Parser)]
#[command(name = "pcx", version, about = "Sets of integers without k+1 pairwise coprime members: exact search and certificates")]
struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write output to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (results do not depend on this)
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Value,
    Uniqueness,
}

#[derive(Args, Clone, Copy)]
struct BudgetArgs {
    /// Wall-clock limit per n, in milliseconds
    #[arg(long)]
    budget_ms: Option<u64>,
    /// Node limit per n
    #[arg(long)]
    budget_nodes: Option<u64>,
}

impl BudgetArgs {
    fn budget(self) -> Budget {
        let mut b = Budget::default();
        if let Some(ms) = self.budget_ms {
            b.max_time = Duration::from_millis(ms);
        }
        if let Some(nodes) = self.budget_nodes {
            b.max_nodes = nodes;
        }
        b
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute f(n, k), optionally listing every maximum set
    F {
        #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
        n: i64,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        k: u32,
        #[arg(long)]
        enumerate: bool,
        #[arg(long, default_value_t = DEFAULT_CAP as u64, value_parser = clap::value_parser!(u64).range(1..))]
        cap: u64,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Compute f(n, k) for every n in a range
    Range {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        k: u32,
        #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
        from: i64,
        #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
        to: i64,
        #[arg(long, value_enum)]
        mode: Mode,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Verify a claim and emit a certificate
    Verify {
        #[command(subcommand)]
        what: Verify,
    },
    /// Check the n = p_k^2 - 1 construction
    Remark {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=15))]
        k: u32,
    },
    /// Scan prime indices t for the (H) condition
    ScanH {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=10_000_000))]
        t_max: u64,
    },
}

#[derive(Subcommand)]
enum Verify {
    /// Induction over every residue of the window
    Conjecture2 {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=15))]
        k: u32,
        /// Case table to use instead of the built-in one
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Class-counting bound for each n in a range
    Counting {
        #[arg(long, value_parser = clap::value_parser!(u32).range(3..=4))]
        k: u32,
        #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
        from: i64,
        #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
        to: i64,
    },
    /// The k = 4 uniqueness chain for each n in a range within [49, 199]
    #[command(name = "uniqueness-k4")]
    UniquenessK4 {
        #[arg(long, value_parser = clap::value_parser!(i64).range(49..=199))]
        from: i64,
        #[arg(long, value_parser = clap::value_parser!(i64).range(49..=199))]
        to: i64,
    },
    /// Full pipeline and assembly for theorem 1 (k = 3) or 2 (k = 4)
    Theorem {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        which: u8,
    },
}

/// How a run ended, before it is turned into an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Verdict {
    Ok,
    Falsified,
    OverBudget,
}

struct Report {
    json: String,
    text: String,
    verdict: Verdict,
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Internal(_) | Error::Io(_) => Failure::Internal(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn report<T: Serialize>(value: &T, text: String, verdict: Verdict) -> Result<Report, Failure> {
    let json = serde_json::to_string_pretty(value).map_err(|e| Failure::Internal(e.to_string()))?;
    Ok(Report { json, text, verdict })
}

fn check_order(from: i64, to: i64) -> Result<(), Failure> {
    if from > to {
        return Err(Failure::Usage(format!("--from {from} exceeds --to {to}")));
    }
    Ok(())
}

#[derive(Serialize)]
struct CountingRun {
    claim: &'static str,
    k: usize,
    from: i64,
    to: i64,
    status: Status,
    reports: Vec<CountingReport>,
}

#[derive(Serialize)]
struct ChainRun {
    claim: &'static str,
    from: i64,
    to: i64,
    status: Status,
    reports: Vec<UniquenessChainReport>,
}

#[derive(Serialize)]
struct ScanRun {
    claim: &'static str,
    t_max: usize,
    hits: Vec<HRecord>,
    density: HDensity,
}

fn status_of(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn verdict_of(ok: bool) -> Verdict {
    if ok {
        Verdict::Ok
    } else {
        Verdict::Falsified
    }
}

fn run(command: &Command) -> Result<Report, Failure> {
    match command {
        Command::F { n, k, enumerate, cap, budget } => {
            let outcome = exact_f(*n, *k as usize, budget.budget(), *enumerate, *cap as usize)?;
            let verdict = if outcome.is_exact() { Verdict::Ok } else { Verdict::OverBudget };
            report(&outcome, render::search(&outcome), verdict)
        }
        Command::Range { k, from, to, mode, budget } => {
            check_order(*from, *to)?;
            let mode = match mode {
                Mode::Value => RangeMode::Value,
                Mode::Uniqueness => RangeMode::Uniqueness,
            };
            let r = check_range(*k as usize, *from, *to, mode, budget.budget())?;
            let claim_failed = r.entries.iter().any(|e| {
                e.f_value.is_some()
                    && match mode {
                        RangeMode::Value => e.matches_e != Some(true),
                        RangeMode::Uniqueness => e.e_is_unique_maximum != Some(true),
                    }
            });
            let verdict = if claim_failed {
                Verdict::Falsified
            } else if !r.all_exact {
                Verdict::OverBudget
            } else {
                Verdict::Ok
            };
            report(&r, render::range(&r), verdict)
        }
        Command::Verify { what } => run_verify(what),
        Command::Remark { k } => {
            let r = remark_counterexample(&PrimeBasis::new(*k as usize)?)?;
            report(&r, render::remark(&r), Verdict::Ok)
        }
        Command::ScanH { t_max } => {
            let t_max = *t_max as usize;
            let run = ScanRun { claim: "scan-h", t_max, hits: scan_h(t_max), density: h_density(t_max) };
            let text = render::scan(&run.hits, &run.density);
            report(&run, text, Verdict::Ok)
        }
    }
}

fn run_verify(what: &Verify) -> Result<Report, Failure> {
    match what {
        Verify::Conjecture2 { k, table } => {
            let k = *k as usize;
            let basis = PrimeBasis::new(k)?;
            let table = match table {
                Some(path) => load_table(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
                None => builtin_table(k)?,
            };
            if table.k != k {
                return Err(Failure::Usage(format!("table is for k = {}, not {k}", table.k)));
            }
            let cert = verify_conjecture2(&basis, &table)?;
            report(&cert, render::conjecture2(&cert), verdict_of(cert.passed()))
        }
        Verify::Counting { k, from, to } => {
            check_order(*from, *to)?;
            let scheme = builtin_scheme(*k as usize)?;
            let reports: Vec<CountingReport> = (*from..=*to).map(|n| verify_counting(&scheme, n)).collect();
            let ok = reports.iter().all(|r| r.status.passed());
            let run = CountingRun { claim: "counting", k: *k as usize, from: *from, to: *to, status: status_of(ok), reports };
            report(&run, render::counting(&run.reports), verdict_of(ok))
        }
        Verify::UniquenessK4 { from, to } => {
            check_order(*from, *to)?;
            let reports: Vec<UniquenessChainReport> =
                (*from..=*to).map(verify_uniqueness_chain_k4).collect::<Result<_, _>>()?;
            let ok = reports.iter().all(|r| r.status.passed());
            let run = ChainRun { claim: "uniqueness-chain-k4", from: *from, to: *to, status: status_of(ok), reports };
            report(&run, render::chain(&run.reports), verdict_of(ok))
        }
        Verify::Theorem { which } => {
            let run = match which {
                1 => theorem1(Budget::default())?,
                _ => theorem2(Budget::default())?,
            };
            let over_budget = run.search.as_ref().is_some_and(|s| !s.all_exact);
            let verdict = if over_budget {
                Verdict::OverBudget
            } else {
                verdict_of(run.passed())
            };
            report(&run, render::theorem(&run), verdict)
        }
    }
}

fn emit(out: &Option<PathBuf>, body: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, body),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t as usize).build_global() {
            eprintln!("pcx: error: {e}");
            return ExitCode::from(EXIT_INTERNAL);
        }
    }
    let result = run(&cli.command);
    let r = match result {
        Ok(r) => r,
        Err(Failure::Usage(msg)) => {
            eprintln!("pcx: error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("pcx: internal error: {msg}");
            return ExitCode::from(EXIT_INTERNAL);
        }
    };
    let body = match cli.format {
        Format::Json => r.json + "\n",
        Format::Text => r.text,
    };
    if let Err(e) = emit(&cli.out, &body) {
        eprintln!("pcx: error writing output: {e}");
        return ExitCode::from(EXIT_INTERNAL);
    }
    match r.verdict {
        Verdict::Ok => ExitCode::SUCCESS,
        Verdict::Falsified => ExitCode::from(EXIT_FALSIFIED),
        Verdict::OverBudget => ExitCode::from(EXIT_BUDGET),
    }
}
