#![allow(dead_code)]

use std::path::PathBuf;

use layersat::{dimacs, Cnf};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn benchmarks(suite: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks").join(suite)
}

/// Raw clauses: variables drawn with replacement, so repeated literals and
/// tautologies occur.
pub fn random_clauses(rng: &mut ChaCha8Rng, vars: u32, clauses: usize, max_len: usize) -> Vec<Vec<i32>> {
    (0..clauses)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            (0..len)
                .map(|_| {
                    let v = rng.gen_range(1..=vars) as i32;
                    if rng.gen_bool(0.5) {
                        v
                    } else {
                        -v
                    }
                })
                .collect()
        })
        .collect()
}

pub fn to_dimacs(vars: u32, clauses: &[Vec<i32>]) -> String {
    let mut text = format!("p cnf {vars} {}\n", clauses.len());
    for clause in clauses {
        for lit in clause {
            text.push_str(&format!("{lit} "));
        }
        text.push_str("0\n");
    }
    text
}

/// A random formula, passed through the DIMACS reader so that it arrives
/// normalized the same way files do.
pub fn random_cnf(
    rng: &mut ChaCha8Rng,
    max_vars: u32,
    max_clauses: usize,
    max_len: usize,
) -> (Vec<Vec<i32>>, u32, Cnf) {
    let vars = rng.gen_range(1..=max_vars);
    let count = rng.gen_range(0..=max_clauses);
    let raw = random_clauses(rng, vars, count, max_len);
    let cnf = dimacs::parse(to_dimacs(vars, &raw).as_bytes()).expect("generated DIMACS parses");
    (raw, vars, cnf)
}

/// Uniform random 3-SAT with distinct variables per clause, near the
/// satisfiability threshold for a mix of verdicts.
pub fn random_3sat(rng: &mut ChaCha8Rng, vars: u32) -> Cnf {
    let clauses = (vars as f64 * 4.26).round() as usize;
    let raw: Vec<Vec<i32>> = (0..clauses)
        .map(|_| {
            let mut picked: Vec<i32> = Vec::with_capacity(3);
            while picked.len() < 3 {
                let v = rng.gen_range(1..=vars) as i32;
                if !picked.contains(&v) && !picked.contains(&-v) {
                    picked.push(if rng.gen_bool(0.5) { v } else { -v });
                }
            }
            picked
        })
        .collect();
    Cnf::new(vars, raw).unwrap().normalized()
}
