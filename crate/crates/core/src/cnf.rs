//! Immutable CNF formulas, the literal/variable encoding, and the pure
//! evaluation functions that everything else is specified against.

use std::fmt;
use std::ops::Not;

use thiserror::Error;

/// A propositional variable, zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    pub fn new(index: u32) -> Self {
        assert!(index < i32::MAX as u32, "variable index {index} exceeds 32-bit literal range");
        Var(index)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn lit(self, positive: bool) -> Lit {
        let code = self.0 as i32 + 1;
        Lit(if positive { code } else { -code })
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0 + 1)
    }
}

/// A literal in DIMACS encoding: `v+1` for the positive literal of variable
/// `v`, `-(v+1)` for its negation. Never zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(i32);

impl Lit {
    /// Returns `None` for the reserved code `0` and for `i32::MIN`.
    pub fn from_code(code: i32) -> Option<Self> {
        if code == 0 || code == i32::MIN {
            None
        } else {
            Some(Lit(code))
        }
    }

    pub fn code(self) -> i32 {
        self.0
    }

    pub fn var(self) -> Var {
        Var(self.0.unsigned_abs() - 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Three-valued truth. The canonical integer encoding is -1 / 0 / 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[repr(i8)]
pub enum TruthValue {
    #[default]
    Unassigned = -1,
    False = 0,
    True = 1,
}

impl TruthValue {
    pub fn code(self) -> i8 {
        self as i8
    }

    pub fn from_code(code: i8) -> Option<Self> {
        match code {
            -1 => Some(TruthValue::Unassigned),
            0 => Some(TruthValue::False),
            1 => Some(TruthValue::True),
            _ => None,
        }
    }

    pub fn is_assigned(self) -> bool {
        self != TruthValue::Unassigned
    }
}

impl From<bool> for TruthValue {
    fn from(value: bool) -> Self {
        if value {
            TruthValue::True
        } else {
            TruthValue::False
        }
    }
}

impl Not for TruthValue {
    type Output = TruthValue;

    /// Swaps True and False; Unassigned is a fixed point.
    fn not(self) -> TruthValue {
        match self {
            TruthValue::Unassigned => TruthValue::Unassigned,
            TruthValue::False => TruthValue::True,
            TruthValue::True => TruthValue::False,
        }
    }
}

/// One truth value per variable of a formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PartialAssignment {
    values: Vec<TruthValue>,
}

impl PartialAssignment {
    /// All variables unassigned.
    pub fn unassigned(vars: usize) -> Self {
        PartialAssignment { values: vec![TruthValue::Unassigned; vars] }
    }

    pub fn from_values(values: Vec<TruthValue>) -> Self {
        PartialAssignment { values }
    }

    /// A total assignment.
    pub fn from_bools(values: &[bool]) -> Self {
        PartialAssignment { values: values.iter().map(|&b| b.into()).collect() }
    }

    /// Builds an assignment over `vars` variables from DIMACS literals; a
    /// literal fixes its variable so that the literal is true.
    pub fn from_lits(vars: usize, lits: impl IntoIterator<Item = Lit>) -> Self {
        let mut tau = Self::unassigned(vars);
        for lit in lits {
            tau.set(lit.var(), lit.is_positive().into());
        }
        tau
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, var: Var) -> TruthValue {
        self.values[var.index()]
    }

    pub fn set(&mut self, var: Var, value: TruthValue) {
        self.values[var.index()] = value;
    }

    pub fn values(&self) -> &[TruthValue] {
        &self.values
    }

    pub fn is_total(&self) -> bool {
        self.values.iter().all(|v| v.is_assigned())
    }

    /// Assigned variables as literals that are true under this assignment.
    pub fn to_lits(&self) -> Vec<Lit> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_assigned())
            .map(|(i, &v)| Var::new(i as u32).lit(v == TruthValue::True))
            .collect()
    }
}

/// An ordered list of literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Clause(Vec<Lit>);

impl Clause {
    pub fn new(lits: Vec<Lit>) -> Self {
        Clause(lits)
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Lit> {
        self.0.iter()
    }

    pub fn is_tautology(&self) -> bool {
        self.0.iter().any(|&l| self.0.contains(&!l))
    }

    pub fn has_duplicates(&self) -> bool {
        self.0.iter().enumerate().any(|(i, l)| self.0[..i].contains(l))
    }
}

impl<'a> IntoIterator for &'a Clause {
    type Item = &'a Lit;
    type IntoIter = std::slice::Iter<'a, Lit>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("clause {clause} contains the reserved literal 0")]
    ZeroLiteral { clause: usize },
    #[error("clause {clause} contains literal {literal}, out of range for {vars} variables")]
    LiteralOutOfRange { clause: usize, literal: i64, vars: u32 },
    #[error("variable count {0} exceeds the 32-bit limit")]
    TooManyVariables(u64),
}

/// A CNF formula: a variable count and a list of clauses whose literals all
/// lie in `1..=vars` by absolute value. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Cnf {
    vars: u32,
    clauses: Vec<Clause>,
}

impl Cnf {
    /// Builds a formula from DIMACS literal codes, checking ranges. No
    /// normalization is applied.
    pub fn new<C, I>(vars: u32, clauses: C) -> Result<Self, CnfError>
    where
        C: IntoIterator<Item = I>,
        I: IntoIterator<Item = i32>,
    {
        if vars > i32::MAX as u32 {
            return Err(CnfError::TooManyVariables(vars as u64));
        }
        let mut out = Vec::new();
        for (ci, clause) in clauses.into_iter().enumerate() {
            let mut lits = Vec::new();
            for code in clause {
                if code == 0 {
                    return Err(CnfError::ZeroLiteral { clause: ci });
                }
                if code.unsigned_abs() > vars {
                    return Err(CnfError::LiteralOutOfRange { clause: ci, literal: code as i64, vars });
                }
                lits.push(Lit(code));
            }
            out.push(Clause(lits));
        }
        Ok(Cnf { vars, clauses: out })
    }

    pub fn vars(&self) -> u32 {
        self.vars
    }

    pub fn var_count(&self) -> usize {
        self.vars as usize
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, index: usize) -> &Clause {
        &self.clauses[index]
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Removes repeated literals within each clause (first occurrence kept)
    /// and drops clauses containing a literal together with its negation.
    pub fn normalized(&self) -> Cnf {
        let clauses = self
            .clauses
            .iter()
            .filter(|c| !c.is_tautology())
            .map(|c| {
                let mut lits: Vec<Lit> = Vec::with_capacity(c.len());
                for &l in c {
                    if !lits.contains(&l) {
                        lits.push(l);
                    }
                }
                Clause(lits)
            })
            .collect();
        Cnf { vars: self.vars, clauses }
    }

    pub fn is_normalized(&self) -> bool {
        self.clauses.iter().all(|c| !c.is_tautology() && !c.has_duplicates())
    }

    /// Clauses as raw DIMACS codes.
    pub fn to_codes(&self) -> Vec<Vec<i32>> {
        self.clauses.iter().map(|c| c.iter().map(|l| l.code()).collect()).collect()
    }
}

/// Value of `lit` under `tau`. Panics if the literal's variable is outside
/// `tau`.
pub fn literal_value(tau: &PartialAssignment, lit: Lit) -> TruthValue {
    let var = lit.var();
    assert!(var.index() < tau.len(), "literal {lit} out of range for an assignment of {} variables", tau.len());
    let value = tau.get(var);
    if lit.is_positive() {
        value
    } else {
        !value
    }
}

pub fn count_true_literals(tau: &PartialAssignment, clause: &Clause) -> usize {
    clause.iter().filter(|&&l| literal_value(tau, l) == TruthValue::True).count()
}

pub fn count_false_literals(tau: &PartialAssignment, clause: &Clause) -> usize {
    clause.iter().filter(|&&l| literal_value(tau, l) == TruthValue::False).count()
}

pub fn count_unset_variables(tau: &PartialAssignment) -> usize {
    tau.values().iter().filter(|v| !v.is_assigned()).count()
}

/// Three-valued evaluation: True if every clause has a true literal, False
/// if some clause has only false literals, Unassigned otherwise.
pub fn evaluate(cnf: &Cnf, model: &PartialAssignment) -> TruthValue {
    assert_eq!(model.len(), cnf.var_count(), "assignment length does not match the formula");
    let mut result = TruthValue::True;
    for clause in cnf.clauses() {
        if count_true_literals(model, clause) > 0 {
            continue;
        }
        if count_false_literals(model, clause) == clause.len() {
            return TruthValue::False;
        }
        result = TruthValue::Unassigned;
    }
    result
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// The seven-variable, five-clause walkthrough formula.
    pub fn example_one() -> Cnf {
        Cnf::new(7, [vec![1, 2, 3], vec![-1, -2], vec![2, -3], vec![2, 4, 5], vec![5, 6, 7]]).unwrap()
    }

    pub fn witness() -> PartialAssignment {
        PartialAssignment::from_bools(&[true, false, false, true, true, false, true])
    }

    /// x1=T, x2=F, x3=F, rest unassigned.
    pub fn first_layer() -> PartialAssignment {
        let mut tau = PartialAssignment::unassigned(7);
        tau.set(Var::new(0), TruthValue::True);
        tau.set(Var::new(1), TruthValue::False);
        tau.set(Var::new(2), TruthValue::False);
        tau
    }

    pub fn clause(codes: &[i32]) -> Clause {
        Clause::new(codes.iter().map(|&c| Lit::from_code(c).unwrap()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    fn lit(code: i32) -> Lit {
        Lit::from_code(code).unwrap()
    }

    #[test]
    fn literal_encoding() {
        assert_eq!(lit(3).var(), Var::new(2));
        assert!(lit(3).is_positive());
        assert_eq!((!lit(3)).code(), -3);
        assert_eq!(Var::new(4).lit(false).code(), -5);
        assert_eq!(Lit::from_code(0), None);
    }

    #[test]
    fn truth_value_codes() {
        assert_eq!(TruthValue::Unassigned.code(), -1);
        assert_eq!(TruthValue::False.code(), 0);
        assert_eq!(TruthValue::True.code(), 1);
        assert_eq!(TruthValue::from_code(2), None);
        assert_eq!(!TruthValue::Unassigned, TruthValue::Unassigned);
    }

    #[test]
    fn literal_value_examples() {
        let tau = PartialAssignment::unassigned(7);
        assert_eq!(literal_value(&tau, lit(1)), TruthValue::Unassigned);
        let mut tau = PartialAssignment::unassigned(1);
        tau.set(Var::new(0), TruthValue::True);
        assert_eq!(literal_value(&tau, lit(-1)), TruthValue::False);
        assert_eq!(literal_value(&first_layer(), lit(2)), TruthValue::False);
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn literal_value_out_of_range() {
        literal_value(&PartialAssignment::unassigned(2), lit(3));
    }

    #[test]
    fn counting_examples() {
        let l1 = first_layer();
        assert_eq!(count_true_literals(&l1, &clause(&[1, 2, 3])), 1);
        assert_eq!(count_true_literals(&PartialAssignment::unassigned(7), &clause(&[1, 2, 3])), 0);
        assert_eq!(count_true_literals(&witness(), &clause(&[5, 6, 7])), 2);

        assert_eq!(count_false_literals(&l1, &clause(&[-1, -2])), 1);
        assert_eq!(count_false_literals(&PartialAssignment::unassigned(7), &clause(&[-1, -2])), 0);
        assert_eq!(count_false_literals(&l1, &clause(&[1, 2, 3])), 2);
    }

    #[test]
    fn unset_variable_examples() {
        assert_eq!(count_unset_variables(&PartialAssignment::unassigned(7)), 7);
        let mut full_trace = first_layer();
        full_trace.set(Var::new(3), TruthValue::True);
        full_trace.set(Var::new(4), TruthValue::True);
        assert_eq!(count_unset_variables(&full_trace), 2);
        assert_eq!(count_unset_variables(&witness()), 0);
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(evaluate(&example_one(), &witness()), TruthValue::True);
        let empty = Cnf::new(3, Vec::<Vec<i32>>::new()).unwrap();
        assert_eq!(evaluate(&empty, &PartialAssignment::unassigned(3)), TruthValue::True);
        let contradiction = Cnf::new(1, [vec![1], vec![-1]]).unwrap();
        assert_eq!(evaluate(&contradiction, &PartialAssignment::from_bools(&[true])), TruthValue::False);
        assert_eq!(evaluate(&example_one(), &first_layer()), TruthValue::Unassigned);
    }

    #[test]
    fn construction_rejects_bad_literals() {
        assert_eq!(Cnf::new(2, [vec![1, 0]]), Err(CnfError::ZeroLiteral { clause: 0 }));
        assert!(matches!(Cnf::new(2, [vec![3]]), Err(CnfError::LiteralOutOfRange { clause: 0, .. })));
        let empty = Cnf::new(0, Vec::<Vec<i32>>::new()).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn normalization() {
        let raw = Cnf::new(3, [vec![1, 1, -2, 1], vec![2, -2, 3], vec![]]).unwrap();
        let norm = raw.normalized();
        assert_eq!(norm.to_codes(), vec![vec![1, -2], vec![]]);
        assert!(norm.is_normalized());
        assert!(!raw.is_normalized());
    }

    fn arb_tau(vars: usize) -> impl Strategy<Value = PartialAssignment> {
        prop::collection::vec(
            prop_oneof![Just(TruthValue::Unassigned), Just(TruthValue::False), Just(TruthValue::True)],
            vars,
        )
        .prop_map(PartialAssignment::from_values)
    }

    fn arb_clause(vars: i32) -> impl Strategy<Value = Clause> {
        prop::collection::vec((1..=vars, any::<bool>()), 0..8)
            .prop_map(|v| Clause::new(v.into_iter().map(|(c, s)| lit(if s { c } else { -c })).collect()))
    }

    proptest! {
        #[test]
        fn counts_partition_the_clause(tau in arb_tau(6), clause in arb_clause(6)) {
            let t = count_true_literals(&tau, &clause);
            let f = count_false_literals(&tau, &clause);
            let unassigned = clause.iter().filter(|&&l| literal_value(&tau, l) == TruthValue::Unassigned).count();
            prop_assert!(t + f <= clause.len());
            prop_assert_eq!(t + f + unassigned, clause.len());
            prop_assert_eq!(t + f == clause.len(), unassigned == 0);
        }

        #[test]
        fn negation_commutes_with_value(tau in arb_tau(5), code in 1i32..=5, positive: bool) {
            let l = lit(if positive { code } else { -code });
            prop_assert_eq!(literal_value(&tau, !l), !literal_value(&tau, l));
        }

        #[test]
        fn total_assignments_evaluate_definitely(
            bools in prop::collection::vec(any::<bool>(), 5),
            clauses in prop::collection::vec(arb_clause(5), 0..10),
        ) {
            let cnf = Cnf::new(5, clauses.iter().map(|c| c.iter().map(|l| l.code()).collect::<Vec<_>>())).unwrap();
            prop_assert_ne!(evaluate(&cnf, &PartialAssignment::from_bools(&bools)), TruthValue::Unassigned);
        }

        #[test]
        fn unset_count_complements_assigned(tau in arb_tau(9)) {
            let assigned = tau.values().iter().filter(|v| v.is_assigned()).count();
            prop_assert_eq!(count_unset_variables(&tau), tau.len() - assigned);
        }
    }
}
