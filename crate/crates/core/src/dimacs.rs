//! DIMACS CNF reading and writing.
//!
//! Accepted input:
//!
//! * comment lines (first non-blank character `c`) anywhere, ignored;
//! * exactly one header `p cnf <vars> <clauses>` before any clause data;
//! * clauses as whitespace-separated nonzero integers terminated by `0`,
//!   free to span lines; a bare `0` is the empty clause;
//! * the SATLIB trailer: a line holding only `%` ends the clause section,
//!   after which only blank lines, comments and a lone `0` may follow.
//!
//! After reading, repeated literals inside a clause are dropped (first
//! occurrence kept) and tautological clauses are removed.

use std::fmt;
use std::fs;
use std::io::{self, Read};
use std::path::Path;

use thiserror::Error;

use crate::cnf::Cnf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    MissingHeader,
    BadHeader,
    LiteralOutOfRange,
    UnterminatedClause,
    ClauseCountMismatch,
    TrailingGarbage,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DiagnosticKind::MissingHeader => "missing header",
            DiagnosticKind::BadHeader => "bad header",
            DiagnosticKind::LiteralOutOfRange => "literal out of range",
            DiagnosticKind::UnterminatedClause => "unterminated clause",
            DiagnosticKind::ClauseCountMismatch => "clause count mismatch",
            DiagnosticKind::TrailingGarbage => "trailing garbage",
        };
        f.write_str(s)
    }
}

/// A parse problem located at a 1-based line.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}: {detail}")]
pub struct ParseDiagnostic {
    pub kind: DiagnosticKind,
    pub line: usize,
    pub detail: String,
}

impl ParseDiagnostic {
    fn new(kind: DiagnosticKind, line: usize, detail: impl Into<String>) -> Self {
        debug_assert!(line >= 1);
        ParseDiagnostic { kind, line, detail: detail.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    /// Reject files whose clause count differs from the header. When false
    /// the mismatch is reported as a warning instead.
    pub strict_clause_count: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { strict_clause_count: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed {
    pub cnf: Cnf,
    pub warnings: Vec<ParseDiagnostic>,
}

#[derive(Debug, Error)]
pub enum DimacsError {
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Parse(#[from] ParseDiagnostic),
}

/// Parses with default options (clause count enforced).
pub fn parse(input: &[u8]) -> Result<Cnf, ParseDiagnostic> {
    parse_with(input, ParseOptions::default()).map(|p| p.cnf)
}

pub fn parse_with(input: &[u8], options: ParseOptions) -> Result<Parsed, ParseDiagnostic> {
    use DiagnosticKind::*;

    let mut header: Option<(u32, u64, usize)> = None;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut clause_start = 0usize;
    let mut after_trailer = false;
    let mut last_line = 1usize;

    for (idx, raw) in input.split(|&b| b == b'\n').enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let first = raw.iter().copied().find(|b| !b.is_ascii_whitespace());
        let Some(first) = first else { continue };
        if first == b'c' {
            continue;
        }
        if let Some(&bad) = raw.iter().find(|&&b| b >= 0x80) {
            let kind = if header.is_none() { BadHeader } else { TrailingGarbage };
            return Err(ParseDiagnostic::new(kind, line_no, format!("non-ASCII byte 0x{bad:02x}")));
        }
        // ASCII checked above
        let text = std::str::from_utf8(raw).expect("ascii");
        let mut tokens = text.split_ascii_whitespace();

        let Some((vars, _, _)) = header else {
            if first != b'p' {
                return Err(ParseDiagnostic::new(
                    MissingHeader,
                    line_no,
                    "expected `p cnf <vars> <clauses>` before clause data",
                ));
            }
            header = Some(parse_header(&mut tokens, line_no)?);
            continue;
        };

        if after_trailer {
            if text.trim() == "0" {
                continue;
            }
            return Err(ParseDiagnostic::new(
                TrailingGarbage,
                line_no,
                format!("unexpected `{}` after `%` trailer", text.trim()),
            ));
        }
        if text.trim() == "%" {
            if !current.is_empty() {
                return Err(ParseDiagnostic::new(
                    UnterminatedClause,
                    clause_start,
                    "clause not terminated by 0 before `%`",
                ));
            }
            after_trailer = true;
            continue;
        }
        if first == b'p' {
            return Err(ParseDiagnostic::new(BadHeader, line_no, "duplicate header"));
        }

        for token in tokens {
            let value = parse_int(token).ok_or_else(|| {
                ParseDiagnostic::new(TrailingGarbage, line_no, format!("`{token}` is not an integer"))
            })?;
            if value == 0 {
                clauses.push(std::mem::take(&mut current));
                continue;
            }
            if value.unsigned_abs() > vars as u64 {
                return Err(ParseDiagnostic::new(
                    LiteralOutOfRange,
                    line_no,
                    format!("literal {token} exceeds declared variable count {vars}"),
                ));
            }
            if current.is_empty() {
                clause_start = line_no;
            }
            current.push(value as i32);
        }
    }

    let Some((vars, declared, header_line)) = header else {
        return Err(ParseDiagnostic::new(MissingHeader, last_line, "no `p cnf` header found"));
    };
    if !current.is_empty() {
        return Err(ParseDiagnostic::new(
            UnterminatedClause,
            clause_start,
            "clause not terminated by 0 at end of input",
        ));
    }

    let mut warnings = Vec::new();
    if clauses.len() as u64 != declared {
        let diag = ParseDiagnostic::new(
            ClauseCountMismatch,
            header_line,
            format!("header declares {declared} clauses, found {}", clauses.len()),
        );
        if options.strict_clause_count {
            return Err(diag);
        }
        warnings.push(diag);
    }

    let cnf = Cnf::new(vars, clauses).expect("literals range-checked while reading").normalized();
    Ok(Parsed { cnf, warnings })
}

fn parse_header<'a>(
    tokens: &mut impl Iterator<Item = &'a str>,
    line: usize,
) -> Result<(u32, u64, usize), ParseDiagnostic> {
    let bad = |detail: &str| ParseDiagnostic::new(DiagnosticKind::BadHeader, line, detail);
    let fields: Vec<&str> = tokens.collect();
    if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
        return Err(bad("expected `p cnf <vars> <clauses>`"));
    }
    let count = |s: &str| s.parse::<u64>().ok().filter(|&n| n <= i32::MAX as u64);
    let vars = count(fields[2]).ok_or_else(|| bad("variable count must be an integer in 0..2^31"))?;
    let declared = count(fields[3]).ok_or_else(|| bad("clause count must be an integer in 0..2^31"))?;
    Ok((vars as u32, declared, line))
}

/// Integers of arbitrary magnitude; anything beyond i64 saturates so that
/// the range check reports it.
fn parse_int(token: &str) -> Option<i64> {
    let digits = token.strip_prefix('-').or_else(|| token.strip_prefix('+')).unwrap_or(token);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some(token.parse::<i64>().unwrap_or(i64::MAX))
}

/// Canonical DIMACS: header, then one `0`-terminated clause per line.
pub fn write(cnf: &Cnf) -> String {
    let mut out = format!("p cnf {} {}\n", cnf.vars(), cnf.len());
    for clause in cnf.clauses() {
        for lit in clause {
            out.push_str(&lit.code().to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}

/// Reads a formula from `path`, or from standard input for `-`.
pub fn read_path(path: &Path, options: ParseOptions) -> Result<Parsed, DimacsError> {
    let bytes = if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf)?;
        buf
    } else {
        fs::read(path)?
    };
    Ok(parse_with(&bytes, options)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::fixtures::example_one;
    use proptest::prelude::*;

    fn kind_of(text: &str) -> (DiagnosticKind, usize) {
        let d = parse(text.as_bytes()).unwrap_err();
        (d.kind, d.line)
    }

    #[test]
    fn parses_basic_file() {
        let cnf = parse(b"p cnf 3 2\n1 -3 0\n2 3 -1 0\n").unwrap();
        assert_eq!(cnf.vars(), 3);
        assert_eq!(cnf.to_codes(), vec![vec![1, -3], vec![2, 3, -1]]);
    }

    #[test]
    fn parses_walkthrough_formula() {
        let text = "c comment\np cnf 7 5\n1 2 3 0\n-1 -2 0\n2 -3 0\n2 4 5 0\n5 6 7 0\n";
        assert_eq!(parse(text.as_bytes()).unwrap(), example_one());
    }

    #[test]
    fn literal_out_of_range() {
        assert_eq!(kind_of("p cnf 3 1\n4 0\n"), (DiagnosticKind::LiteralOutOfRange, 2));
        assert_eq!(kind_of("p cnf 3 1\n99999999999999999999999 0\n"), (DiagnosticKind::LiteralOutOfRange, 2));
    }

    #[test]
    fn header_errors() {
        assert_eq!(kind_of("1 2 0\n"), (DiagnosticKind::MissingHeader, 1));
        assert_eq!(kind_of("c only comments\n"), (DiagnosticKind::MissingHeader, 2));
        assert_eq!(kind_of(""), (DiagnosticKind::MissingHeader, 1));
        assert_eq!(kind_of("p cnf 3\n"), (DiagnosticKind::BadHeader, 1));
        assert_eq!(kind_of("p dnf 3 1\n1 0\n"), (DiagnosticKind::BadHeader, 1));
        assert_eq!(kind_of("p cnf -3 1\n"), (DiagnosticKind::BadHeader, 1));
        assert_eq!(kind_of("p cnf 3 1\np cnf 3 1\n1 0\n"), (DiagnosticKind::BadHeader, 2));
        assert_eq!(kind_of("p cnf 3 1 \u{e9}\n"), (DiagnosticKind::BadHeader, 1));
    }

    #[test]
    fn body_errors() {
        assert_eq!(kind_of("p cnf 3 1\n1 2\n"), (DiagnosticKind::UnterminatedClause, 2));
        assert_eq!(kind_of("p cnf 3 1\n1 x 0\n"), (DiagnosticKind::TrailingGarbage, 2));
        assert_eq!(kind_of("p cnf 3 2\n1 0\n"), (DiagnosticKind::ClauseCountMismatch, 1));
        assert_eq!(kind_of("p cnf 3 1\n1 0\n%\n2 0\n"), (DiagnosticKind::TrailingGarbage, 4));
        assert_eq!(kind_of("p cnf 3 1\n1 \u{e9} 0\n"), (DiagnosticKind::TrailingGarbage, 2));
    }

    #[test]
    fn clause_count_mismatch_can_be_a_warning() {
        let parsed = parse_with(b"p cnf 3 2\n1 0\n", ParseOptions { strict_clause_count: false }).unwrap();
        assert_eq!(parsed.cnf.len(), 1);
        assert_eq!(parsed.warnings.len(), 1);
        assert_eq!(parsed.warnings[0].kind, DiagnosticKind::ClauseCountMismatch);
    }

    #[test]
    fn satlib_layout() {
        let text = "c generated\np cnf 4  2 \n 1 -2\n 3 0\n -4 2 0\n%\n0\n\n";
        let cnf = parse(text.as_bytes()).unwrap();
        assert_eq!(cnf.to_codes(), vec![vec![1, -2, 3], vec![-4, 2]]);
        let crlf = "p cnf 2 1\r\n1 -2 0\r\n";
        assert_eq!(parse(crlf.as_bytes()).unwrap().to_codes(), vec![vec![1, -2]]);
    }

    #[test]
    fn empty_clause_and_normalization() {
        let cnf = parse(b"p cnf 2 3\n0\n1 1 -2 0\n2 -2 0\n").unwrap();
        assert_eq!(cnf.to_codes(), vec![vec![], vec![1, -2]]);
    }

    #[test]
    fn write_examples() {
        assert_eq!(write(&Cnf::new(1, [vec![1]]).unwrap()), "p cnf 1 1\n1 0\n");
        assert_eq!(write(&Cnf::new(0, Vec::<Vec<i32>>::new()).unwrap()), "p cnf 0 0\n");
        let text = write(&example_one());
        assert_eq!(parse(text.as_bytes()).unwrap(), example_one());
    }

    proptest! {
        #[test]
        fn round_trip(vars in 0u32..8, raw in prop::collection::vec(prop::collection::vec((1i32..=8, any::<bool>()), 0..6), 0..10)) {
            let clauses: Vec<Vec<i32>> = raw
                .into_iter()
                .map(|c| c.into_iter().filter(|&(v, _)| v as u32 <= vars).map(|(v, s)| if s { v } else { -v }).collect())
                .collect();
            let cnf = Cnf::new(vars, clauses).unwrap().normalized();
            prop_assert_eq!(parse(write(&cnf).as_bytes()).unwrap(), cnf);
        }

        #[test]
        fn never_panics(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
            let _ = parse(&bytes);
        }

        #[test]
        fn never_panics_on_near_dimacs(text in "(c[ -~]*\n|p cnf [0-9]{1,2} [0-9]{1,2}\n|[-0-9 %]{0,12}\n){0,8}") {
            let _ = parse(text.as_bytes());
        }
    }
}
