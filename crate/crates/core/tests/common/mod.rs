#![allow(dead_code)]

use dispenser_core::{Clause, CnfFormula, Literal};
use proptest::prelude::*;

/// CNFs over 1..=max_vars variables with up to max_clauses non-empty clauses.
pub fn cnf(max_vars: u32, max_clauses: usize) -> impl Strategy<Value = CnfFormula> {
    (1..=max_vars).prop_flat_map(move |n| {
        let lit = (1..=i64::from(n), any::<bool>())
            .prop_map(|(v, neg)| Literal::from_dimacs(if neg { -v } else { v }).unwrap());
        prop::collection::vec(prop::collection::vec(lit, 1..=4), 0..=max_clauses).prop_map(
            move |cs| CnfFormula::new(n, cs.into_iter().map(Clause::new).collect()).unwrap(),
        )
    })
}

/// Brute-force truth table of a predicate over n variables, as a list of masks.
pub fn masks(n: u32) -> impl Iterator<Item = u64> {
    0..1u64 << n
}
