//! Mutable search state: the layered assignment trail, per-clause true/false
//! literal counters and the occurrence lists used to update them.
//!
//! Every clause `i` carries two counters, `true_count[i]` and
//! `false_count[i]`, equal to the number of its literals that are currently
//! true and false. A clause is satisfied iff `true_count > 0`, falsified iff
//! `false_count == len`, and unit iff `true_count == 0 && false_count == len - 1`,
//! so all three checks are constant time. Assigning a variable touches only
//! the clauses in that variable's two occurrence lists.
//!
//! The operations check their preconditions with `assert!` (a failed
//! precondition is a caller bug). [`SolverState::validate`] re-derives every
//! redundant structure from scratch and reports disagreements; with
//! auditing enabled it runs at the entry and exit of every operation.

use std::fmt;

use crate::cnf::{self, Cnf, Lit, PartialAssignment, TruthValue, Var};

/// The assignment trail, split into one contiguous layer per decision level.
///
/// Arrays have fixed capacity `vars`. Layer `d` occupies
/// `[layer_start[d], layer_end[d])`. Slots beyond the live part are kept
/// zeroed so that two states with equal live content compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trail {
    variables: Vec<u32>,
    values: Vec<bool>,
    layer_start: Vec<u32>,
    layer_end: Vec<u32>,
    decision_level: i32,
    /// Set by `increase_decision_level`, cleared by the first assignment in
    /// the new layer. Only an open top layer may be empty.
    layer_open: bool,
}

impl Trail {
    fn new(vars: usize) -> Self {
        Trail {
            variables: vec![0; vars],
            values: vec![false; vars],
            layer_start: vec![0; vars],
            layer_end: vec![0; vars],
            decision_level: -1,
            layer_open: false,
        }
    }

    pub fn decision_level(&self) -> i32 {
        self.decision_level
    }

    pub fn is_layer_open(&self) -> bool {
        self.layer_open
    }

    /// Number of assignments on the trail.
    pub fn len(&self) -> usize {
        if self.decision_level < 0 {
            0
        } else {
            self.layer_end[self.decision_level as usize] as usize
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entry(&self, index: usize) -> (Var, bool) {
        (Var::new(self.variables[index]), self.values[index])
    }

    /// Assignments of decision level `level`, in order.
    pub fn layer(&self, level: usize) -> Vec<(Var, bool)> {
        assert!((level as i64) <= self.decision_level as i64, "no layer {level}");
        (self.layer_start[level] as usize..self.layer_end[level] as usize).map(|i| self.entry(i)).collect()
    }

    pub fn layers(&self) -> Vec<Vec<(Var, bool)>> {
        (0..=self.decision_level).map(|d| self.layer(d as usize)).collect()
    }

    fn top(&self) -> usize {
        self.decision_level as usize
    }

    fn top_is_empty(&self) -> bool {
        let d = self.top();
        self.layer_start[d] == self.layer_end[d]
    }
}

/// Which of the state invariants a [`Violation`] breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Invariant {
    /// Counters agree with a recount of the clause under the assignment.
    Counters,
    /// Occurrence lists are exactly the clauses containing each literal.
    Occurrences,
    /// The trail and the assignment describe the same set of assignments.
    TrailAssignment,
    /// Layer bounds, contiguity, non-empty layers, no repeated variables.
    TrailStructure,
    /// `set_literal` failed to reduce the number of unset variables.
    Termination,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Invariant::Counters => "V1 counters",
            Invariant::Occurrences => "V2 occurrences",
            Invariant::TrailAssignment => "V3 trail/assignment",
            Invariant::TrailStructure => "V4 trail structure",
            Invariant::Termination => "termination variant",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub invariant: Invariant,
    pub location: String,
    pub expected: String,
    pub actual: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: expected {}, found {}", self.invariant, self.location, self.expected, self.actual)
    }
}

fn violation(
    invariant: Invariant,
    location: impl Into<String>,
    expected: impl fmt::Display,
    actual: impl fmt::Display,
) -> Violation {
    Violation { invariant, location: location.into(), expected: expected.to_string(), actual: actual.to_string() }
}

/// Record of runtime contract checks, kept when auditing is enabled.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Audit {
    /// Number of `validate` runs at operation boundaries.
    pub boundary_checks: u64,
    /// Number of `set_literal` calls whose unset-count decrease was checked.
    pub variant_checks: u64,
    /// Violations found, each prefixed with the operation and boundary.
    pub violations: Vec<String>,
}

/// Everything the search mutates, for equality checks across operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub assignment: PartialAssignment,
    pub trail: Trail,
    pub true_count: Vec<i32>,
    pub false_count: Vec<i32>,
}

#[derive(Debug, Clone)]
pub struct SolverState<'f> {
    formula: &'f Cnf,
    assignment: PartialAssignment,
    trail: Trail,
    true_count: Vec<i32>,
    false_count: Vec<i32>,
    positive_occurrences: Vec<Vec<u32>>,
    negative_occurrences: Vec<Vec<u32>>,
    propagations: u64,
    audit: Option<Audit>,
}

impl<'f> SolverState<'f> {
    /// Fresh state: nothing assigned, decision level -1. The formula is
    /// expected to be normalized (no repeated literals in a clause).
    pub fn new(formula: &'f Cnf) -> Self {
        let vars = formula.var_count();
        let mut positive_occurrences = vec![Vec::new(); vars];
        let mut negative_occurrences = vec![Vec::new(); vars];
        for (j, clause) in formula.clauses().iter().enumerate() {
            for lit in clause {
                let lists = if lit.is_positive() { &mut positive_occurrences } else { &mut negative_occurrences };
                let list = &mut lists[lit.var().index()];
                if list.last() != Some(&(j as u32)) {
                    list.push(j as u32);
                }
            }
        }
        SolverState {
            formula,
            assignment: PartialAssignment::unassigned(vars),
            trail: Trail::new(vars),
            true_count: vec![0; formula.len()],
            false_count: vec![0; formula.len()],
            positive_occurrences,
            negative_occurrences,
            propagations: 0,
            audit: None,
        }
    }

    /// Turns on boundary validation for every subsequent operation.
    pub fn enable_audit(&mut self) {
        if self.audit.is_none() {
            self.audit = Some(Audit::default());
        }
    }

    pub fn audit(&self) -> Option<&Audit> {
        self.audit.as_ref()
    }

    pub fn formula(&self) -> &'f Cnf {
        self.formula
    }

    pub fn assignment(&self) -> &PartialAssignment {
        &self.assignment
    }

    pub fn trail(&self) -> &Trail {
        &self.trail
    }

    pub fn decision_level(&self) -> i32 {
        self.trail.decision_level
    }

    pub fn true_counts(&self) -> &[i32] {
        &self.true_count
    }

    pub fn false_counts(&self) -> &[i32] {
        &self.false_count
    }

    /// Clauses containing `lit`, in increasing index order.
    pub fn occurrences(&self, lit: Lit) -> &[u32] {
        let lists = if lit.is_positive() { &self.positive_occurrences } else { &self.negative_occurrences };
        &lists[lit.var().index()]
    }

    /// Assignments made by unit propagation since construction.
    pub fn propagations(&self) -> u64 {
        self.propagations
    }

    pub fn unset_count(&self) -> usize {
        self.formula.var_count() - self.trail.len()
    }

    pub fn literal_value(&self, lit: Lit) -> TruthValue {
        cnf::literal_value(&self.assignment, lit)
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            assignment: self.assignment.clone(),
            trail: self.trail.clone(),
            true_count: self.true_count.clone(),
            false_count: self.false_count.clone(),
        }
    }

    pub fn is_satisfied(&self, clause: usize) -> bool {
        self.true_count[clause] > 0
    }

    pub fn is_falsified(&self, clause: usize) -> bool {
        self.false_count[clause] as usize == self.formula.clause(clause).len()
    }

    pub fn is_unit(&self, clause: usize) -> bool {
        self.true_count[clause] == 0 && self.false_count[clause] as usize + 1 == self.formula.clause(clause).len()
    }

    /// Some clause has all of its literals false.
    pub fn has_empty_clause(&self) -> bool {
        (0..self.formula.len()).any(|j| self.is_falsified(j))
    }

    /// Every clause has a true literal.
    pub fn is_empty(&self) -> bool {
        self.true_count.iter().all(|&t| t > 0)
    }

    /// Opens a new, empty decision layer.
    pub fn increase_decision_level(&mut self) {
        let dl = self.trail.decision_level;
        assert!(
            (dl as i64) < self.formula.var_count() as i64 - 1,
            "increase_decision_level: decision level {dl} already at the bound for {} variables",
            self.formula.var_count()
        );
        assert!(dl < 0 || !self.trail.top_is_empty(), "increase_decision_level: current layer {dl} is empty");
        self.check("increase_decision_level", "entry");

        let start = if dl < 0 { 0 } else { self.trail.layer_end[dl as usize] };
        let next = (dl + 1) as usize;
        self.trail.layer_start[next] = start;
        self.trail.layer_end[next] = start;
        self.trail.decision_level += 1;
        self.trail.layer_open = true;

        self.check("increase_decision_level", "exit");
    }

    /// Assigns an unset variable in the current layer and updates the
    /// counters of the clauses it occurs in. No propagation.
    pub fn set_variable(&mut self, var: Var, value: bool) {
        assert!(self.trail.decision_level >= 0, "set_variable: no decision level open");
        assert!(
            !self.assignment.get(var).is_assigned(),
            "set_variable: {var} is already assigned {:?}",
            self.assignment.get(var)
        );
        self.check("set_variable", "entry");
        self.assign(var, value);
        self.check("set_variable", "exit");
    }

    fn assign(&mut self, var: Var, value: bool) {
        let top = self.trail.top();
        let slot = self.trail.layer_end[top] as usize;
        self.trail.variables[slot] = var.index() as u32;
        self.trail.values[slot] = value;
        self.trail.layer_end[top] += 1;
        self.trail.layer_open = false;
        self.assignment.set(var, value.into());

        let lists = if value {
            (&self.positive_occurrences, &self.negative_occurrences)
        } else {
            (&self.negative_occurrences, &self.positive_occurrences)
        };
        for &j in &lists.0[var.index()] {
            self.true_count[j as usize] += 1;
        }
        for &j in &lists.1[var.index()] {
            self.false_count[j as usize] += 1;
        }
    }

    /// Makes `lit` take truth value `value`, then propagates unit clauses
    /// until none remain or some clause is falsified.
    ///
    /// Propagation is breadth-first over the trail: the entries appended
    /// since this call are scanned in order, and for each one the clauses
    /// containing the literal it made false are checked in index order. A
    /// unit clause's remaining literal is assigned as soon as it is found.
    pub fn set_literal(&mut self, lit: Lit, value: bool) {
        assert!(self.trail.decision_level >= 0, "set_literal: no decision level open");
        assert_eq!(self.literal_value(lit), TruthValue::Unassigned, "set_literal: literal {lit} is already assigned");
        self.check("set_literal", "entry");
        let unset_before = self.audit.is_some().then(|| cnf::count_unset_variables(&self.assignment));

        let chosen = if value { lit } else { !lit };
        let mut head = self.trail.len();
        self.assign(chosen.var(), chosen.is_positive());
        'propagate: while head < self.trail.len() {
            let (var, value) = self.trail.entry(head);
            head += 1;
            let falsified = var.lit(!value);
            let lists = if falsified.is_positive() { &self.positive_occurrences } else { &self.negative_occurrences };
            let n = lists[var.index()].len();
            for k in 0..n {
                let lists =
                    if falsified.is_positive() { &self.positive_occurrences } else { &self.negative_occurrences };
                let j = lists[var.index()][k] as usize;
                if self.is_falsified(j) {
                    break 'propagate;
                }
                if self.is_unit(j) {
                    let unit = self
                        .formula
                        .clause(j)
                        .iter()
                        .copied()
                        .find(|&l| self.literal_value(l) == TruthValue::Unassigned)
                        .expect("a unit clause has one unassigned literal");
                    self.assign(unit.var(), unit.is_positive());
                    self.propagations += 1;
                }
            }
        }

        if let Some(before) = unset_before {
            let after = cnf::count_unset_variables(&self.assignment);
            let audit = self.audit.as_mut().expect("audit enabled");
            audit.variant_checks += 1;
            if after >= before {
                audit.violations.push(format!(
                    "set_literal: {}",
                    violation(Invariant::Termination, "set_literal", format!("< {before} unset"), after)
                ));
            }
        }
        self.check("set_literal", "exit");
    }

    /// Unassigns every variable of the top layer and drops the layer.
    pub fn revert_last_decision_level(&mut self) {
        assert!(self.trail.decision_level >= 0, "revert_last_decision_level: decision level is -1");
        self.check("revert_last_decision_level", "entry");

        let top = self.trail.top();
        let (start, end) = (self.trail.layer_start[top] as usize, self.trail.layer_end[top] as usize);
        for slot in (start..end).rev() {
            let var = Var::new(self.trail.variables[slot]);
            let value = self.trail.values[slot];
            self.assignment.set(var, TruthValue::Unassigned);
            let (made_true, made_false) = if value {
                (&self.positive_occurrences, &self.negative_occurrences)
            } else {
                (&self.negative_occurrences, &self.positive_occurrences)
            };
            for &j in &made_true[var.index()] {
                self.true_count[j as usize] -= 1;
            }
            for &j in &made_false[var.index()] {
                self.false_count[j as usize] -= 1;
            }
            self.trail.variables[slot] = 0;
            self.trail.values[slot] = false;
        }
        self.trail.layer_start[top] = 0;
        self.trail.layer_end[top] = 0;
        self.trail.decision_level -= 1;
        self.trail.layer_open = false;

        self.check("revert_last_decision_level", "exit");
    }

    fn check(&mut self, op: &str, boundary: &str) {
        if self.audit.is_none() {
            return;
        }
        let found = self.validate();
        let audit = self.audit.as_mut().expect("audit enabled");
        audit.boundary_checks += 1;
        audit.violations.extend(found.into_iter().map(|v| format!("{op} {boundary}: {v}")));
    }

    /// Recomputes every derived structure and lists each disagreement.
    /// Empty iff the state is consistent. Works on arbitrarily corrupted
    /// states.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let formula = self.formula;
        let vars = formula.var_count();

        // V1
        if self.assignment.len() != vars {
            out.push(violation(Invariant::Counters, "assignment", format!("length {vars}"), self.assignment.len()));
            return out;
        }
        if self.true_count.len() != formula.len() || self.false_count.len() != formula.len() {
            out.push(violation(
                Invariant::Counters,
                "counter arrays",
                format!("length {}", formula.len()),
                format!("{}/{}", self.true_count.len(), self.false_count.len()),
            ));
        } else {
            for (j, clause) in formula.clauses().iter().enumerate() {
                let t = cnf::count_true_literals(&self.assignment, clause);
                let f = cnf::count_false_literals(&self.assignment, clause);
                if self.true_count[j] < 0 || self.true_count[j] as usize != t {
                    out.push(violation(Invariant::Counters, format!("clause {j} true count"), t, self.true_count[j]));
                }
                if self.false_count[j] < 0 || self.false_count[j] as usize != f {
                    out.push(violation(Invariant::Counters, format!("clause {j} false count"), f, self.false_count[j]));
                }
            }
        }

        // V2
        let mut positive = vec![Vec::new(); vars];
        let mut negative = vec![Vec::new(); vars];
        for (j, clause) in formula.clauses().iter().enumerate() {
            for lit in clause {
                let list = if lit.is_positive() { &mut positive } else { &mut negative };
                let list = &mut list[lit.var().index()];
                if list.last() != Some(&(j as u32)) {
                    list.push(j as u32);
                }
            }
        }
        for (polarity, expected, actual) in
            [("+", &positive, &self.positive_occurrences), ("-", &negative, &self.negative_occurrences)]
        {
            if actual.len() != vars {
                out.push(violation(
                    Invariant::Occurrences,
                    format!("{polarity} lists"),
                    format!("{vars} lists"),
                    actual.len(),
                ));
                continue;
            }
            for v in 0..vars {
                if expected[v] != actual[v] {
                    out.push(violation(
                        Invariant::Occurrences,
                        format!("literal {polarity}{}", v + 1),
                        format!("{:?}", expected[v]),
                        format!("{:?}", actual[v]),
                    ));
                }
            }
        }

        // V4
        let trail = &self.trail;
        let structure_ok = self.validate_trail(&mut out);

        // V3
        if structure_ok {
            let mut seen: Vec<Option<bool>> = vec![None; vars];
            for i in 0..trail.len() {
                let v = trail.variables[i] as usize;
                seen[v] = Some(trail.values[i]);
            }
            for (v, on_trail) in seen.iter().enumerate() {
                let assigned = self.assignment.values()[v];
                let consistent = match on_trail {
                    None => assigned == TruthValue::Unassigned,
                    Some(value) => assigned == TruthValue::from(*value),
                };
                if !consistent {
                    out.push(violation(
                        Invariant::TrailAssignment,
                        format!("variable x{}", v + 1),
                        match on_trail {
                            None => "Unassigned (not on trail)".to_string(),
                            Some(value) => format!("{:?} (trail)", TruthValue::from(*value)),
                        },
                        format!("{assigned:?}"),
                    ));
                }
            }
        }
        out
    }

    /// Checks the trail's shape; returns whether its live part can be read.
    fn validate_trail(&self, out: &mut Vec<Violation>) -> bool {
        let found = self.trail_violations();
        let ok = found.is_empty();
        out.extend(found);
        ok
    }

    fn trail_violations(&self) -> Vec<Violation> {
        let trail = &self.trail;
        let vars = self.formula.var_count();
        let mut found = Vec::new();
        let bad = |location: String, expected: String, actual: String| {
            violation(Invariant::TrailStructure, location, expected, actual)
        };

        for (name, len) in [
            ("variables", trail.variables.len()),
            ("values", trail.values.len()),
            ("layer starts", trail.layer_start.len()),
            ("layer ends", trail.layer_end.len()),
        ] {
            if len != vars {
                found.push(bad(format!("trail {name}"), format!("capacity {vars}"), len.to_string()));
            }
        }
        if trail.decision_level < -1 || trail.decision_level as i64 >= vars as i64 {
            found.push(bad("decision level".into(), format!("in -1..{vars}"), trail.decision_level.to_string()));
        }
        if !found.is_empty() {
            return found;
        }
        if trail.decision_level == -1 {
            if trail.layer_open {
                found.push(bad("decision level -1".into(), "no open layer".into(), "layer open".into()));
            }
            return found;
        }

        let top = trail.decision_level as usize;
        for d in 0..=top {
            let (s, e) = (trail.layer_start[d], trail.layer_end[d]);
            if !(s <= e && e as usize <= vars) {
                found.push(bad(format!("layer {d}"), format!("start <= end <= {vars}"), format!("[{s}, {e})")));
                continue;
            }
            let expected_start = if d == 0 { 0 } else { trail.layer_end[d - 1] };
            if s != expected_start {
                found.push(bad(format!("layer {d} start"), expected_start.to_string(), s.to_string()));
            }
            if s == e && (d < top || !trail.layer_open) {
                found.push(bad(format!("layer {d}"), "non-empty".into(), "empty".into()));
            }
        }
        if trail.layer_open && !trail.top_is_empty() {
            found.push(bad(format!("layer {top}"), "open layer to be empty".into(), "assignments present".into()));
        }
        if !found.is_empty() {
            return found;
        }

        let mut seen = vec![false; vars];
        for i in 0..trail.len() {
            let v = trail.variables[i] as usize;
            if v >= vars {
                found.push(bad(format!("trail entry {i}"), format!("variable < {vars}"), v.to_string()));
            } else if std::mem::replace(&mut seen[v], true) {
                found.push(bad(
                    format!("trail entry {i}"),
                    "distinct variables".into(),
                    format!("x{} repeated", v + 1),
                ));
            }
        }
        found
    }

    #[cfg(test)]
    pub(crate) fn corrupt(&mut self) -> Corruptor<'_, 'f> {
        Corruptor(self)
    }
}

#[cfg(test)]
pub(crate) struct Corruptor<'a, 'f>(&'a mut SolverState<'f>);

#[cfg(test)]
impl Corruptor<'_, '_> {
    pub fn true_count(&mut self, clause: usize, value: i32) {
        self.0.true_count[clause] = value;
    }

    pub fn assignment(&mut self, var: Var, value: TruthValue) {
        self.0.assignment.set(var, value);
    }

    pub fn occurrences(&mut self, lit: Lit, list: Vec<u32>) {
        let lists = if lit.is_positive() { &mut self.0.positive_occurrences } else { &mut self.0.negative_occurrences };
        lists[lit.var().index()] = list;
    }

    pub fn trail_variable(&mut self, slot: usize, var: u32) {
        self.0.trail.variables[slot] = var;
    }

    pub fn layer_end(&mut self, level: usize, end: u32) {
        self.0.trail.layer_end[level] = end;
    }
}
