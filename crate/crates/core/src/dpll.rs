//! The recursive search: `solve` checks for a falsified clause, then for a
//! satisfied formula, and otherwise branches on a chosen literal through
//! `step`, trying "literal true" before "literal false". Each `step` opens a
//! decision layer, assigns and propagates, recurses, and reverts the layer
//! before returning, so the state is left exactly as it was found, even
//! when a model is found.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::cnf::{Cnf, Lit, PartialAssignment, TruthValue, Var};
use crate::state::SolverState;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    /// A total satisfying assignment.
    Sat(PartialAssignment),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn model(&self) -> Option<&PartialAssignment> {
        match self {
            SatResult::Sat(model) => Some(model),
            SatResult::Unsat => None,
        }
    }
}

/// Branching rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Heuristic {
    /// Maximum occurrences in clauses of minimum residual size.
    #[default]
    Moms,
    /// Lowest-index unassigned variable, positive literal.
    FirstUnset,
}

impl FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "moms" => Ok(Heuristic::Moms),
            "first-unset" => Ok(Heuristic::FirstUnset),
            other => Err(format!("unknown heuristic `{other}` (expected moms or first-unset)")),
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Heuristic::Moms => "moms",
            Heuristic::FirstUnset => "first-unset",
        })
    }
}

/// The search ran past its deadline. The state has been restored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interrupted;

impl fmt::Display for Interrupted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("search interrupted by deadline")
    }
}

impl std::error::Error for Interrupted {}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub decisions: u64,
    pub propagations: u64,
    pub solve_calls: u64,
    /// Deepest nesting of `solve`, the root call counting as 1.
    pub max_depth: usize,
}

/// One assignment made during search, in the order it happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    Decision { level: i32, var: Var, value: bool },
    Propagation { level: i32, var: Var, value: bool },
    Backtrack { level: i32 },
}

enum Search {
    Sat(PartialAssignment),
    Unsat,
    Interrupted,
}

/// Picks the branching literal. Requires that no clause is falsified and
/// that some clause is not yet satisfied.
pub fn choose_literal(state: &SolverState, heuristic: Heuristic) -> Lit {
    match heuristic {
        Heuristic::Moms => moms(state),
        Heuristic::FirstUnset => first_unset(state),
    }
}

fn moms(state: &SolverState) -> Lit {
    let formula = state.formula();
    let open = || (0..formula.len()).filter(|&j| !state.is_satisfied(j));
    let residual = |j: usize| formula.clause(j).len() - state.false_counts()[j] as usize;

    let min_size = open().map(residual).min().expect("choose_literal: every clause is satisfied");
    assert!(min_size > 0, "choose_literal: formula has a falsified clause");

    // scores[2v] counts the positive literal, scores[2v+1] the negative one
    let mut scores = vec![0u32; 2 * formula.var_count()];
    for j in open().filter(|&j| residual(j) == min_size) {
        for &lit in formula.clause(j) {
            if state.literal_value(lit) == TruthValue::Unassigned {
                scores[2 * lit.var().index() + usize::from(!lit.is_positive())] += 1;
            }
        }
    }
    let (best, _) =
        scores.chunks_exact(2).enumerate().filter(|(_, s)| s[0] + s[1] > 0).fold((None, 0), |(best, top), (v, s)| {
            let total = s[0] + s[1];
            if best.is_none() || total > top {
                (Some(v), total)
            } else {
                (best, top)
            }
        });
    let v = best.expect("an open clause of minimum size has an unassigned literal");
    Var::new(v as u32).lit(scores[2 * v] >= scores[2 * v + 1])
}

fn first_unset(state: &SolverState) -> Lit {
    let v = state
        .assignment()
        .values()
        .iter()
        .position(|v| !v.is_assigned())
        .expect("choose_literal: every variable is assigned");
    Var::new(v as u32).lit(true)
}

/// A search over one formula.
#[derive(Debug)]
pub struct Solver<'f> {
    state: SolverState<'f>,
    heuristic: Heuristic,
    deadline: Option<Instant>,
    trace: Option<Vec<TraceEvent>>,
    stats: SearchStats,
    depth: usize,
}

impl<'f> Solver<'f> {
    pub fn new(formula: &'f Cnf) -> Self {
        Self::from_state(SolverState::new(formula))
    }

    pub fn from_state(state: SolverState<'f>) -> Self {
        Solver {
            state,
            heuristic: Heuristic::default(),
            deadline: None,
            trace: None,
            stats: SearchStats::default(),
            depth: 0,
        }
    }

    pub fn with_heuristic(mut self, heuristic: Heuristic) -> Self {
        self.heuristic = heuristic;
        self
    }

    /// Validate the state at the entry and exit of every state operation.
    pub fn with_invariant_checks(mut self, enabled: bool) -> Self {
        if enabled {
            self.state.enable_audit();
        }
        self
    }

    pub fn with_deadline(mut self, deadline: Option<Instant>) -> Self {
        self.deadline = deadline;
        self
    }

    /// Record every decision, propagation and backtrack.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn state(&self) -> &SolverState<'f> {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut SolverState<'f> {
        &mut self.state
    }

    pub fn stats(&self) -> SearchStats {
        SearchStats { propagations: self.state.propagations(), ..self.stats }
    }

    pub fn trace(&self) -> &[TraceEvent] {
        self.trace.as_deref().unwrap_or(&[])
    }

    /// Decides whether the current partial assignment extends to a model.
    pub fn solve(&mut self) -> Result<SatResult, Interrupted> {
        if self.state.decision_level() >= 0 {
            let top = self.state.decision_level() as usize;
            assert!(!self.state.trail().layer(top).is_empty(), "solve: top decision layer is empty");
        }
        finish(self.solve_rec())
    }

    /// Tries `lit := value` in a new decision layer and searches below it.
    pub fn step(&mut self, lit: Lit, value: bool) -> Result<SatResult, Interrupted> {
        assert!(!self.state.has_empty_clause(), "step: formula has a falsified clause");
        assert!(!self.state.is_empty(), "step: formula is already satisfied");
        finish(self.step_rec(lit, value))
    }

    fn solve_rec(&mut self) -> Search {
        self.depth += 1;
        self.stats.solve_calls += 1;
        self.stats.max_depth = self.stats.max_depth.max(self.depth);
        let result = self.solve_body();
        self.depth -= 1;
        result
    }

    fn solve_body(&mut self) -> Search {
        if self.stats.solve_calls.is_multiple_of(256) {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline {
                    return Search::Interrupted;
                }
            }
        }
        if self.state.has_empty_clause() {
            return Search::Unsat;
        }
        if self.state.is_empty() {
            return Search::Sat(complete(self.state.assignment()));
        }
        let lit = choose_literal(&self.state, self.heuristic);
        match self.step_rec(lit, true) {
            Search::Unsat => self.step_rec(lit, false),
            found => found,
        }
    }

    fn step_rec(&mut self, lit: Lit, value: bool) -> Search {
        self.state.increase_decision_level();
        self.state.set_literal(lit, value);
        self.stats.decisions += 1;
        if let Some(trace) = self.trace.as_mut() {
            let level = self.state.decision_level();
            for (i, (var, value)) in self.state.trail().layer(level as usize).into_iter().enumerate() {
                trace.push(if i == 0 {
                    TraceEvent::Decision { level, var, value }
                } else {
                    TraceEvent::Propagation { level, var, value }
                });
            }
        }
        let result = self.solve_rec();
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceEvent::Backtrack { level: self.state.decision_level() });
        }
        self.state.revert_last_decision_level();
        result
    }
}

fn finish(search: Search) -> Result<SatResult, Interrupted> {
    match search {
        Search::Sat(model) => Ok(SatResult::Sat(model)),
        Search::Unsat => Ok(SatResult::Unsat),
        Search::Interrupted => Err(Interrupted),
    }
}

/// Unassigned variables become False.
fn complete(tau: &PartialAssignment) -> PartialAssignment {
    PartialAssignment::from_values(
        tau.values().iter().map(|&v| if v.is_assigned() { v } else { TruthValue::False }).collect(),
    )
}

/// Solves `state` with the default heuristic, leaving it unchanged.
pub fn solve(state: &mut SolverState) -> SatResult {
    let taken = std::mem::replace(state, SolverState::new(state.formula()));
    let mut solver = Solver::from_state(taken);
    let result = solver.solve().expect("no deadline set");
    *state = solver.state;
    result
}
