//! Benchmark harness: solve every `.cnf` file of a directory under a time
//! limit, record one row per instance and aggregate per-suite statistics
//! (average, sample standard deviation and sum of the solved instances).

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use crate::dimacs::{self, ParseOptions};
use crate::dpll::{Heuristic, SatResult, Solver};
use crate::oracle;

/// Stack for solver threads; recursion depth grows with the variable count.
pub const SOLVER_STACK_BYTES: usize = 256 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchVerdict {
    Sat,
    Unsat,
    Timeout,
    Error,
}

impl fmt::Display for BenchVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchVerdict::Sat => "SAT",
            BenchVerdict::Unsat => "UNSAT",
            BenchVerdict::Timeout => "TIMEOUT",
            BenchVerdict::Error => "ERROR",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub instance_path: PathBuf,
    pub verdict: BenchVerdict,
    pub wall_time_seconds: f64,
    pub decisions: u64,
    pub propagations: u64,
}

impl BenchRecord {
    pub fn is_solved(&self) -> bool {
        matches!(self.verdict, BenchVerdict::Sat | BenchVerdict::Unsat)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchStats {
    pub suite_name: String,
    pub avg: f64,
    pub sd: f64,
    pub sum: f64,
    pub solved: usize,
    pub total: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub timeout: Duration,
    pub heuristic: Heuristic,
    pub jobs: usize,
    pub check_invariants: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            timeout: Duration::from_secs(5000),
            heuristic: Heuristic::Moms,
            jobs: 1,
            check_invariants: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub records: Vec<BenchRecord>,
    pub stats: BenchStats,
}

/// Average, sample standard deviation and sum over solved instances.
pub fn aggregate_stats(suite_name: &str, records: &[BenchRecord]) -> BenchStats {
    let times: Vec<f64> = records.iter().filter(|r| r.is_solved()).map(|r| r.wall_time_seconds).collect();
    let solved = times.len();
    let sum = times.iter().fold(0.0, |acc, t| acc + t);
    let avg = if solved > 0 { sum / solved as f64 } else { 0.0 };
    let sd = if solved > 1 {
        (times.iter().map(|t| (t - avg).powi(2)).sum::<f64>() / (solved - 1) as f64).sqrt()
    } else {
        0.0
    };
    BenchStats { suite_name: suite_name.to_string(), avg, sd, sum, solved, total: records.len() }
}

/// Parses and solves one file, timing both. SAT models are re-checked; a
/// model that fails the check is recorded as an error.
pub fn run_instance(path: &Path, options: &SuiteOptions) -> BenchRecord {
    let start = Instant::now();
    let mut record = BenchRecord {
        instance_path: path.to_path_buf(),
        verdict: BenchVerdict::Error,
        wall_time_seconds: 0.0,
        decisions: 0,
        propagations: 0,
    };
    let Ok(parsed) = dimacs::read_path(path, ParseOptions::default()) else {
        record.wall_time_seconds = start.elapsed().as_secs_f64();
        return record;
    };
    let cnf = parsed.cnf;
    let mut solver = Solver::new(&cnf)
        .with_heuristic(options.heuristic)
        .with_invariant_checks(options.check_invariants)
        .with_deadline(start.checked_add(options.timeout));
    let outcome = solver.solve();
    record.wall_time_seconds = start.elapsed().as_secs_f64();
    let stats = solver.stats();
    record.decisions = stats.decisions;
    record.propagations = stats.propagations;
    let clean = solver.state().audit().is_none_or(|a| a.violations.is_empty());
    record.verdict = match outcome {
        Err(_) => BenchVerdict::Timeout,
        Ok(_) if !clean => BenchVerdict::Error,
        Ok(SatResult::Unsat) => BenchVerdict::Unsat,
        Ok(SatResult::Sat(model)) => match oracle::check_model(&cnf, &model) {
            Ok(true) => BenchVerdict::Sat,
            _ => BenchVerdict::Error,
        },
    };
    record
}

/// `.cnf` files directly inside `dir`, sorted by path.
pub fn list_instances(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "cnf") {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

pub fn suite_name(dir: &Path) -> String {
    dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// Solves every instance of `dir`, `options.jobs` at a time. Records come
/// back in path order regardless of scheduling.
pub fn run_suite(dir: &Path, options: &SuiteOptions) -> io::Result<SuiteReport> {
    let paths = list_instances(dir)?;
    let records = run_instances(&paths, options)?;
    let stats = aggregate_stats(&suite_name(dir), &records);
    Ok(SuiteReport { records, stats })
}

pub fn run_instances(paths: &[PathBuf], options: &SuiteOptions) -> io::Result<Vec<BenchRecord>> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<BenchRecord>>> = Mutex::new(vec![None; paths.len()]);
    let workers = options.jobs.clamp(1, paths.len().max(1));
    thread::scope(|scope| -> io::Result<()> {
        let mut handles = Vec::with_capacity(workers);
        for _ in 0..workers {
            let handle = thread::Builder::new().stack_size(SOLVER_STACK_BYTES).spawn_scoped(scope, || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(path) = paths.get(i) else { break };
                let record = run_instance(path, options);
                slots.lock().expect("no worker panicked holding the lock")[i] = Some(record);
            })?;
            handles.push(handle);
        }
        for handle in handles {
            if let Err(panic) = handle.join() {
                std::panic::resume_unwind(panic);
            }
        }
        Ok(())
    })?;
    Ok(slots.into_inner().expect("workers joined").into_iter().map(|r| r.expect("every slot filled")).collect())
}

/// A row of already-formatted CSV fields.
trait CsvRow {
    fn fields(&self) -> Vec<String>;
}

impl CsvRow for BenchRecord {
    fn fields(&self) -> Vec<String> {
        vec![
            self.instance_path.display().to_string(),
            self.verdict.to_string(),
            format!("{:.6}", self.wall_time_seconds),
            self.decisions.to_string(),
            self.propagations.to_string(),
        ]
    }
}

impl CsvRow for BenchStats {
    fn fields(&self) -> Vec<String> {
        vec![
            self.suite_name.clone(),
            format!("{:.6}", self.avg),
            format!("{:.6}", self.sd),
            format!("{:.6}", self.sum),
            self.solved.to_string(),
            self.total.to_string(),
        ]
    }
}

pub const RECORD_HEADER: [&str; 5] = ["path", "verdict", "seconds", "decisions", "propagations"];
pub const STATS_HEADER: [&str; 6] = ["suite", "avg", "sd", "sum", "solved", "total"];

fn write_rows<W: Write, R: CsvRow>(out: W, header: &[&str], rows: &[R]) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row.fields())?;
    }
    writer.flush()?;
    Ok(())
}

/// `path,verdict,seconds,decisions,propagations`, one row per record.
pub fn write_records_csv<W: Write>(out: W, records: &[BenchRecord]) -> csv::Result<()> {
    write_rows(out, &RECORD_HEADER, records)
}

/// `suite,avg,sd,sum,solved,total`, one row per suite.
pub fn write_stats_csv<W: Write>(out: W, stats: &[BenchStats]) -> csv::Result<()> {
    write_rows(out, &STATS_HEADER, stats)
}

/// Solved instances' times in increasing order, as `rank,seconds` with
/// rank starting at 1: the number of instances solved within that time.
pub fn write_sorted_series<W: Write>(out: W, records: &[BenchRecord]) -> csv::Result<()> {
    let mut times: Vec<f64> = records.iter().filter(|r| r.is_solved()).map(|r| r.wall_time_seconds).collect();
    times.sort_by(f64::total_cmp);
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["rank", "seconds"])?;
    for (i, t) in times.iter().enumerate() {
        writer.write_record([(i + 1).to_string(), format!("{t:.6}")])?;
    }
    writer.flush()?;
    Ok(())
}
