//! Brute-force satisfiability by enumeration.
//!
//! Shares no code with the solver state or its counters: clauses are
//! compiled to a pair of bitmasks and checked directly against each
//! candidate assignment.

use thiserror::Error;

use crate::cnf::{Cnf, PartialAssignment, TruthValue};
use crate::dpll::SatResult;

/// Default bound on the number of enumerated variables.
pub const DEFAULT_LIMIT: usize = 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{free} free variables exceeds the enumeration limit of {limit}")]
    TooManyVariables { free: usize, limit: usize },
    #[error("model is not total: variable x{0} is unassigned")]
    NotTotal(usize),
    #[error("model has {actual} values, formula has {expected} variables")]
    LengthMismatch { expected: usize, actual: usize },
}

/// A clause as masks over bit positions: satisfied by `bits` iff some
/// positive variable's bit is set or some negative variable's bit is clear.
struct MaskClause {
    positive: u64,
    negative: u64,
}

impl MaskClause {
    fn satisfied_by(&self, bits: u64) -> bool {
        bits & self.positive != 0 || !bits & self.negative != 0
    }
}

/// Compiles `cnf` restricted to the variables in `free` (which receive bit
/// positions in order); clauses satisfied by the fixed part of `tau` are
/// dropped and fixed-false literals vanish.
fn compile(cnf: &Cnf, tau: &PartialAssignment, free: &[usize]) -> Vec<MaskClause> {
    let mut position = vec![usize::MAX; cnf.var_count()];
    for (bit, &v) in free.iter().enumerate() {
        position[v] = bit;
    }
    let mut out = Vec::with_capacity(cnf.len());
    'clauses: for clause in cnf.clauses() {
        let mut mask = MaskClause { positive: 0, negative: 0 };
        for lit in clause {
            let v = lit.var().index();
            match tau.values()[v] {
                TruthValue::Unassigned => {
                    let bit = 1u64 << position[v];
                    if lit.is_positive() {
                        mask.positive |= bit;
                    } else {
                        mask.negative |= bit;
                    }
                }
                value => {
                    if (value == TruthValue::True) == lit.is_positive() {
                        continue 'clauses;
                    }
                }
            }
        }
        out.push(mask);
    }
    out
}

/// First satisfying extension of `tau` in lexicographic order (lowest free
/// variable least significant, False before True).
fn first_extension(cnf: &Cnf, tau: &PartialAssignment, limit: usize) -> Result<Option<PartialAssignment>, OracleError> {
    if tau.len() != cnf.var_count() {
        return Err(OracleError::LengthMismatch { expected: cnf.var_count(), actual: tau.len() });
    }
    let free: Vec<usize> = (0..tau.len()).filter(|&v| !tau.values()[v].is_assigned()).collect();
    if free.len() > limit.min(63) {
        return Err(OracleError::TooManyVariables { free: free.len(), limit });
    }
    let clauses = compile(cnf, tau, &free);
    for bits in 0u64..(1u64 << free.len()) {
        if clauses.iter().all(|c| c.satisfied_by(bits)) {
            let mut model = tau.clone();
            for (bit, &v) in free.iter().enumerate() {
                model.set(crate::cnf::Var::new(v as u32), (bits >> bit & 1 == 1).into());
            }
            return Ok(Some(model));
        }
    }
    Ok(None)
}

pub fn brute_force_sat(cnf: &Cnf) -> Result<SatResult, OracleError> {
    brute_force_sat_with_limit(cnf, DEFAULT_LIMIT)
}

pub fn brute_force_sat_with_limit(cnf: &Cnf, limit: usize) -> Result<SatResult, OracleError> {
    let tau = PartialAssignment::unassigned(cnf.var_count());
    Ok(match first_extension(cnf, &tau, limit)? {
        Some(model) => SatResult::Sat(model),
        None => SatResult::Unsat,
    })
}

/// Whether some total extension of `tau` satisfies `cnf`.
pub fn is_satisfiable_extend(cnf: &Cnf, tau: &PartialAssignment) -> Result<bool, OracleError> {
    Ok(first_extension(cnf, tau, DEFAULT_LIMIT)?.is_some())
}

/// Checks a total model clause by clause.
pub fn check_model(cnf: &Cnf, model: &PartialAssignment) -> Result<bool, OracleError> {
    if model.len() != cnf.var_count() {
        return Err(OracleError::LengthMismatch { expected: cnf.var_count(), actual: model.len() });
    }
    if let Some(v) = model.values().iter().position(|v| !v.is_assigned()) {
        return Err(OracleError::NotTotal(v + 1));
    }
    let values = model.values();
    Ok(cnf
        .clauses()
        .iter()
        .all(|clause| clause.iter().any(|lit| (values[lit.var().index()] == TruthValue::True) == lit.is_positive())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::fixtures::{example_one, first_layer, witness};
    use crate::cnf::{evaluate, Var};
    use proptest::prelude::*;

    #[test]
    fn brute_force_examples() {
        let result = brute_force_sat(&example_one()).unwrap();
        let model = result.model().expect("walkthrough formula is satisfiable");
        assert_eq!(evaluate(&example_one(), model), TruthValue::True);
        assert!(check_model(&example_one(), &witness()).unwrap());

        assert_eq!(brute_force_sat(&Cnf::new(1, [vec![1], vec![-1]]).unwrap()).unwrap(), SatResult::Unsat);
        let all_four = Cnf::new(2, [vec![1, 2], vec![-1, 2], vec![1, -2], vec![-1, -2]]).unwrap();
        assert_eq!(brute_force_sat(&all_four).unwrap(), SatResult::Unsat);
    }

    #[test]
    fn lexicographic_first_model() {
        // x1 ∨ x2: 00 fails, then x1=T,x2=F (x1 least significant)
        let cnf = Cnf::new(2, [vec![1, 2]]).unwrap();
        let model = brute_force_sat(&cnf).unwrap().model().unwrap().clone();
        assert_eq!(model, PartialAssignment::from_bools(&[true, false]));
        let zero = Cnf::new(3, Vec::<Vec<i32>>::new()).unwrap();
        assert_eq!(brute_force_sat(&zero).unwrap().model().unwrap(), &PartialAssignment::from_bools(&[false; 3]));
    }

    #[test]
    fn guard_refuses_large_instances() {
        let cnf = Cnf::new(30, [vec![1]]).unwrap();
        assert_eq!(brute_force_sat(&cnf), Err(OracleError::TooManyVariables { free: 30, limit: 26 }));
        assert!(brute_force_sat_with_limit(&Cnf::new(4, [vec![1]]).unwrap(), 3).is_err());
    }

    #[test]
    fn extension_examples() {
        assert!(is_satisfiable_extend(&example_one(), &first_layer()).unwrap());
        assert!(is_satisfiable_extend(&example_one(), &witness()).unwrap());
        let mut tau = PartialAssignment::unassigned(1);
        tau.set(Var::new(0), TruthValue::False);
        assert!(!is_satisfiable_extend(&Cnf::new(1, [vec![1]]).unwrap(), &tau).unwrap());
    }

    #[test]
    fn model_check_examples() {
        assert!(check_model(&example_one(), &witness()).unwrap());
        assert!(!check_model(&example_one(), &PartialAssignment::from_bools(&[false; 7])).unwrap());
        let zero = Cnf::new(2, Vec::<Vec<i32>>::new()).unwrap();
        assert!(check_model(&zero, &PartialAssignment::from_bools(&[true, false])).unwrap());
        assert_eq!(check_model(&example_one(), &first_layer()), Err(OracleError::NotTotal(4)));
    }

    fn arb_cnf() -> impl Strategy<Value = Cnf> {
        (1u32..8).prop_flat_map(|vars| {
            prop::collection::vec(prop::collection::vec((1..=vars as i32, any::<bool>()), 0..4), 0..14).prop_map(
                move |raw| {
                    Cnf::new(
                        vars,
                        raw.into_iter().map(|c| c.into_iter().map(|(v, s)| if s { v } else { -v }).collect::<Vec<_>>()),
                    )
                    .unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn empty_extension_matches_brute_force(cnf in arb_cnf()) {
            let tau = PartialAssignment::unassigned(cnf.var_count());
            prop_assert_eq!(is_satisfiable_extend(&cnf, &tau).unwrap(), brute_force_sat(&cnf).unwrap().is_sat());
        }

        #[test]
        fn models_agree_with_evaluate(cnf in arb_cnf(), bits in any::<u8>()) {
            let model = PartialAssignment::from_bools(&(0..cnf.var_count()).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>());
            prop_assert_eq!(check_model(&cnf, &model).unwrap(), evaluate(&cnf, &model) == TruthValue::True);
        }

        #[test]
        fn unsatisfiability_is_monotone(cnf in arb_cnf(), order in prop::collection::vec((0usize..8, any::<bool>()), 0..8)) {
            let mut tau = PartialAssignment::unassigned(cnf.var_count());
            let mut was_extendable = true;
            for (v, value) in order {
                if v >= cnf.var_count() || tau.get(Var::new(v as u32)).is_assigned() { continue; }
                tau.set(Var::new(v as u32), value.into());
                let now = is_satisfiable_extend(&cnf, &tau).unwrap();
                prop_assert!(was_extendable || !now);
                was_extendable = now;
            }
        }
    }
}
