mod eval;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use frobq::suites::{self, SuiteConfig};

#[derive(Parser)]
#[command(name = "frobq", version, about = "Verification runner for restricted Weyl algebra computations")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Option<Cmd>,
}

#[derive(Args, Clone)]
struct Common {
    /// characteristic (3, 5 or 7)
    #[arg(long, env = "FROBQ_P", default_value_t = 3, global = true)]
    p: u32,
    /// number of variable pairs
    #[arg(long, env = "FROBQ_N", default_value_t = 1, global = true)]
    n: usize,
    /// h-adic precision N (default 2p)
    #[arg(long, env = "FROBQ_PRECISION", global = true)]
    precision: Option<usize>,
    /// pole floor for Laurent coefficients
    #[arg(long, env = "FROBQ_FLOOR", allow_hyphen_values = true, global = true)]
    floor: Option<i32>,
    #[arg(long, env = "FROBQ_SEED", default_value_t = 0, global = true)]
    seed: u64,
    /// `all`, a suite, `suite/check` or a check id such as c06.char3
    #[arg(long, env = "FROBQ_SUITE", default_value = "all", global = true)]
    suite: String,
    #[arg(long, env = "FROBQ_REPORT", value_enum, default_value_t = Format::Json, global = true)]
    report: Format,
    /// write the report here instead of stdout
    #[arg(long, env = "FROBQ_OUT", global = true)]
    out: Option<PathBuf>,
    /// report 0 ms for every check, making reports byte-reproducible
    #[arg(long, global = true)]
    no_timing: bool,
    /// worker threads (0 = rayon default)
    #[arg(long, env = "FROBQ_JOBS", default_value_t = 0, global = true)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// run verification suites (the default)
    Run,
    /// evaluate an element expression and print its normal form
    Eval {
        expr: String,
        /// use x y − y x = h instead of y x − x y = h
        #[arg(long)]
        opposite: bool,
    },
    /// list suites and checks
    List,
}

#[derive(ValueEnum, Clone, Copy)]
enum Format {
    Json,
    Markdown,
}

fn config(c: &Common) -> SuiteConfig {
    SuiteConfig { p: c.p, n: c.n, precision: c.precision.unwrap_or(2 * c.p as usize), floor: c.floor, seed: c.seed }
}

fn run(args: &Common) -> Result<bool> {
    let cfg = config(args);
    let checks = suites::select(&cfg, &args.suite)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build().context("thread pool")?;
    let mut results: Vec<_> = pool.install(|| checks.par_iter().map(|c| c.run(&cfg)).collect());
    suites::sort_results(&mut results);
    let rep = report::Report::new(&cfg, &args.suite, &results, !args.no_timing);
    let text = match args.report {
        Format::Json => rep.json(),
        Format::Markdown => rep.markdown(),
    };
    match &args.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(rep.ok())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        None | Some(Cmd::Run) => run(&cli.common),
        Some(Cmd::Eval { expr, opposite }) => {
            let ctx = eval::EvalContext { p: cli.common.p, n: cli.common.n, floor: cli.common.floor, opposite };
            eval::evaluate(&ctx, &expr).map(|v| {
                println!("{v}");
                true
            })
        }
        Some(Cmd::List) => {
            for c in suites::registry() {
                println!("{:<8} {:<20} criterion {:>2}  requires {}", c.suite, c.id, c.criterion, c.requirement);
            }
            Ok(true)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
