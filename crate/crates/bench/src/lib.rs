//! Workload generators shared by the benchmarks.

use dispenser_core::{Clause, CnfFormula, Literal};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Uniform random CNF: `num_clauses` clauses of 1 to `max_len` distinct-variable literals.
pub fn random_cnf(seed: u64, num_vars: u32, num_clauses: usize, max_len: usize) -> CnfFormula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clauses = (0..num_clauses)
        .map(|_| {
            let len = rng.gen_range(1..=max_len.min(num_vars as usize));
            let mut vars: Vec<i64> = Vec::with_capacity(len);
            while vars.len() < len {
                let v = rng.gen_range(1..=i64::from(num_vars));
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
            Clause::new(vars.into_iter().map(|v| {
                let lit = if rng.gen_bool(0.5) { v } else { -v };
                Literal::from_dimacs(lit).unwrap()
            }))
        })
        .collect();
    CnfFormula::new(num_vars, clauses).expect("variables drawn in range")
}
