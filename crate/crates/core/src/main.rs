use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand};

use layersat::bench::{self, SuiteOptions, SOLVER_STACK_BYTES};
use layersat::dimacs::{self, ParseOptions};
use layersat::dpll::{Heuristic, SatResult, Solver};
use layersat::{oracle, Cnf, Lit, PartialAssignment};

const EXIT_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;
const EXIT_INPUT_ERROR: u8 = 1;
const EXIT_MODEL_REJECTED: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "layersat", version, about = "DPLL SAT solver with a layered assignment trail")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a DIMACS file (`-` for standard input).
    Solve {
        path: PathBuf,
        /// Validate the solver state at every operation boundary.
        #[arg(long)]
        check_invariants: bool,
        #[arg(long, default_value = "moms")]
        heuristic: Heuristic,
        /// Print decisions, propagations and time to standard error.
        #[arg(long)]
        stats: bool,
        /// Give up after this many seconds.
        #[arg(long)]
        timeout: Option<f64>,
    },
    /// Check a model (the body of a `v` line) against a DIMACS file.
    Check {
        path: PathBuf,
        /// Literals, e.g. `1 -2 -3 4`; a leading `v` and trailing `0` are allowed.
        #[arg(required = true, allow_hyphen_values = true, num_args = 1..)]
        model: Vec<String>,
    },
    /// Solve every `.cnf` file in each directory and report per-suite statistics.
    Bench {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// Per-instance limit in seconds.
        #[arg(long, default_value_t = 5000.0)]
        timeout: f64,
        #[arg(long, default_value = "moms")]
        heuristic: Heuristic,
        /// Worker threads; keep at or below the number of physical cores.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Per-instance records; sorted time series are written next to it.
        #[arg(long, default_value = "bench.csv")]
        csv: PathBuf,
        #[arg(long)]
        check_invariants: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve { path, check_invariants, heuristic, stats, timeout } => {
            run_solve(&path, check_invariants, heuristic, stats, timeout)
        }
        Command::Check { path, model } => run_check(&path, &model.join(" ")),
        Command::Bench { dirs, timeout, heuristic, jobs, csv, check_invariants } => {
            let options = SuiteOptions { timeout: seconds(timeout), heuristic, jobs, check_invariants };
            run_bench(&dirs, &options, &csv)
        }
    };
    ExitCode::from(code)
}

fn seconds(s: f64) -> Duration {
    Duration::try_from_secs_f64(s).unwrap_or(Duration::MAX)
}

fn read_cnf(path: &Path) -> Result<Cnf, u8> {
    match dimacs::read_path(path, ParseOptions::default()) {
        Ok(parsed) => {
            for warning in parsed.warnings {
                eprintln!("c warning: {}: {warning}", path.display());
            }
            Ok(parsed.cnf)
        }
        Err(err) => {
            eprintln!("{}: {err}", path.display());
            Err(EXIT_INPUT_ERROR)
        }
    }
}

fn run_solve(path: &Path, check_invariants: bool, heuristic: Heuristic, stats: bool, timeout: Option<f64>) -> u8 {
    let start = Instant::now();
    let cnf = match read_cnf(path) {
        Ok(cnf) => cnf,
        Err(code) => return code,
    };
    let deadline = timeout.and_then(|t| start.checked_add(seconds(t)));
    let worker = thread::Builder::new().stack_size(SOLVER_STACK_BYTES).spawn(move || {
        let mut solver =
            Solver::new(&cnf).with_heuristic(heuristic).with_invariant_checks(check_invariants).with_deadline(deadline);
        let outcome = solver.solve();
        let violations = solver.state().audit().map(|a| (a.boundary_checks, a.violations.clone()));
        (outcome, solver.stats(), violations, cnf)
    });
    let (outcome, search, audit, cnf) = match worker.map(|h| h.join()) {
        Ok(Ok(done)) => done,
        _ => {
            eprintln!("c solver thread failed");
            return EXIT_INTERNAL;
        }
    };
    let elapsed = start.elapsed();

    if stats {
        eprintln!("c decisions: {}", search.decisions);
        eprintln!("c propagations: {}", search.propagations);
        eprintln!("c max depth: {}", search.max_depth);
        eprintln!("c seconds: {:.6}", elapsed.as_secs_f64());
    }
    if let Some((checks, violations)) = audit {
        eprintln!("c invariant checks: {checks}, violations: {}", violations.len());
        if !violations.is_empty() {
            for v in violations.iter().take(20) {
                eprintln!("c violation: {v}");
            }
            return EXIT_INTERNAL;
        }
    }

    let (text, code) = match outcome {
        Ok(SatResult::Sat(model)) => {
            if oracle::check_model(&cnf, &model) != Ok(true) {
                eprintln!("c model failed independent check");
                return EXIT_INTERNAL;
            }
            let mut v_line = String::from("v");
            for lit in model.to_lits() {
                v_line.push_str(&format!(" {lit}"));
            }
            (format!("s SATISFIABLE\n{v_line} 0\n"), EXIT_SAT)
        }
        Ok(SatResult::Unsat) => ("s UNSATISFIABLE\n".to_string(), EXIT_UNSAT),
        Err(_) => ("s UNKNOWN\n".to_string(), 0),
    };
    match io::stdout().lock().write_all(text.as_bytes()) {
        Ok(()) => code,
        Err(_) => EXIT_INTERNAL,
    }
}

fn parse_model(cnf: &Cnf, text: &str) -> Result<PartialAssignment, String> {
    let mut tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.first() == Some(&"v") {
        tokens.remove(0);
    }
    if tokens.last() == Some(&"0") {
        tokens.pop();
    }
    let mut lits = Vec::with_capacity(tokens.len());
    for token in tokens {
        let code: i32 = token.parse().map_err(|_| format!("`{token}` is not a literal"))?;
        let lit = Lit::from_code(code).ok_or_else(|| format!("`{token}` is not a literal"))?;
        if lit.var().index() >= cnf.var_count() {
            return Err(format!("literal {code} out of range for {} variables", cnf.vars()));
        }
        if lits.contains(&!lit) {
            return Err(format!("model assigns both {code} and {}", -code));
        }
        lits.push(lit);
    }
    let model = PartialAssignment::from_lits(cnf.var_count(), lits);
    if let Some(v) = model.values().iter().position(|v| !v.is_assigned()) {
        return Err(format!("model is not total: variable {} has no value", v + 1));
    }
    Ok(model)
}

fn run_check(path: &Path, model_text: &str) -> u8 {
    let cnf = match read_cnf(path) {
        Ok(cnf) => cnf,
        Err(code) => return code,
    };
    let model = match parse_model(&cnf, model_text) {
        Ok(model) => model,
        Err(msg) => {
            eprintln!("{msg}");
            return EXIT_INPUT_ERROR;
        }
    };
    match oracle::check_model(&cnf, &model) {
        Ok(true) => {
            println!("model satisfies the formula");
            0
        }
        Ok(false) => {
            println!("model falsifies the formula");
            EXIT_MODEL_REJECTED
        }
        Err(err) => {
            eprintln!("{err}");
            EXIT_INPUT_ERROR
        }
    }
}

fn series_path(csv: &Path, suite: &str) -> PathBuf {
    let stem = csv.file_stem().map_or_else(|| "bench".into(), |s| s.to_string_lossy().into_owned());
    csv.with_file_name(format!("{stem}.{suite}.sorted.csv"))
}

fn run_bench(dirs: &[PathBuf], options: &SuiteOptions, csv: &Path) -> u8 {
    let mut all_records = Vec::new();
    let mut all_stats = Vec::new();
    for dir in dirs {
        let report = match bench::run_suite(dir, options) {
            Ok(report) => report,
            Err(err) => {
                eprintln!("{}: {err}", dir.display());
                return EXIT_INPUT_ERROR;
            }
        };
        let series = series_path(csv, &report.stats.suite_name);
        if let Err(err) = File::create(&series)
            .map_err(csv::Error::from)
            .and_then(|f| bench::write_sorted_series(BufWriter::new(f), &report.records))
        {
            eprintln!("{}: {err}", series.display());
            return EXIT_INPUT_ERROR;
        }
        all_records.extend(report.records);
        all_stats.push(report.stats);
    }
    if let Err(err) = File::create(csv)
        .map_err(csv::Error::from)
        .and_then(|f| bench::write_records_csv(BufWriter::new(f), &all_records))
    {
        eprintln!("{}: {err}", csv.display());
        return EXIT_INPUT_ERROR;
    }
    match bench::write_stats_csv(io::stdout().lock(), &all_stats) {
        Ok(()) => 0,
        Err(_) => EXIT_INTERNAL,
    }
}
