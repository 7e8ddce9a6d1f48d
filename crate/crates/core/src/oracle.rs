//! Exhaustive reference semantics.
//!
//! Everything here enumerates all `2^n` assignments and is meant as ground
//! truth for tests, not for real workloads. A variable guard (24 by default)
//! turns oversized inputs into an error instead of a hang.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::formula::{Assignment, CnfFormula, Status, Variable};

/// Set of total assignments, iterated in lexicographic order (v1 most significant).
pub type ModelSet = BTreeSet<Assignment>;

pub const DEFAULT_VAR_LIMIT: u32 = 24;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("formula has {num_vars} variables; the exhaustive oracle is limited to {limit}")]
    TooManyVariables { num_vars: u32, limit: u32 },
}

#[derive(Copy, Clone, Debug)]
pub struct Oracle {
    limit: u32,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            limit: DEFAULT_VAR_LIMIT,
        }
    }
}

impl Oracle {
    /// Limits above 30 are clamped; the truth table would not fit in memory anyway.
    pub fn with_limit(limit: u32) -> Self {
        Oracle {
            limit: limit.min(30),
        }
    }

    pub fn limit(&self) -> u32 {
        self.limit
    }

    fn check(&self, f: &CnfFormula) -> Result<(), OracleError> {
        if f.num_vars() > self.limit {
            return Err(OracleError::TooManyVariables {
                num_vars: f.num_vars(),
                limit: self.limit,
            });
        }
        Ok(())
    }

    /// Truth table indexed by mask (bit `i` = variable `i + 1`).
    fn truth_table(&self, f: &CnfFormula) -> Result<Vec<bool>, OracleError> {
        self.check(f)?;
        let n = f.num_vars();
        Ok((0..1u64 << n)
            .map(|m| f.evaluate(&Assignment::from_mask(n, m)))
            .collect())
    }

    pub fn all_models(&self, f: &CnfFormula) -> Result<ModelSet, OracleError> {
        let n = f.num_vars();
        let table = self.truth_table(f)?;
        Ok(collect(n, &table))
    }

    /// Models with no strictly smaller (pointwise) model.
    pub fn subset_minimal_models(&self, f: &CnfFormula) -> Result<ModelSet, OracleError> {
        let n = f.num_vars();
        let table = self.truth_table(f)?;
        // below[m]: some model lies pointwise at or below m
        let mut below = table.clone();
        for i in 0..n {
            let bit = 1usize << i;
            for m in 0..below.len() {
                if m & bit != 0 && below[m ^ bit] {
                    below[m] = true;
                }
            }
        }
        let minimal: Vec<bool> = (0..table.len())
            .map(|m| table[m] && (0..n).all(|i| m & (1 << i) == 0 || !below[m ^ (1 << i)]))
            .collect();
        Ok(collect(n, &minimal))
    }

    /// Models where lowering any single 1 to 0 gives a non-model.
    pub fn flip_minimal_models(&self, f: &CnfFormula) -> Result<ModelSet, OracleError> {
        let n = f.num_vars();
        let table = self.truth_table(f)?;
        let minimal: Vec<bool> = (0..table.len())
            .map(|m| table[m] && (0..n).all(|i| m & (1 << i) == 0 || !table[m ^ (1 << i)]))
            .collect();
        Ok(collect(n, &minimal))
    }

    /// Variables valued 0 in every subset-minimal model. Unsatisfiable
    /// formulas report every variable, vacuously.
    pub fn dispensable(&self, f: &CnfFormula) -> Result<(Status, BTreeSet<Variable>), OracleError> {
        let minimal = self.subset_minimal_models(f)?;
        if minimal.is_empty() {
            return Ok((Status::Unsat, f.variables().collect()));
        }
        let used: BTreeSet<Variable> = minimal.iter().flat_map(|m| m.ones()).collect();
        Ok((
            Status::Sat,
            f.variables().filter(|v| !used.contains(v)).collect(),
        ))
    }

    /// Fewest 1s over all models; `None` when unsatisfiable.
    pub fn min_ones_count(&self, f: &CnfFormula) -> Result<Option<usize>, OracleError> {
        Ok(self.all_models(f)?.iter().map(Assignment::count_ones).min())
    }
}

fn collect(n: u32, table: &[bool]) -> ModelSet {
    table
        .iter()
        .enumerate()
        .filter(|(_, &t)| t)
        .map(|(m, _)| Assignment::from_mask(n, m as u64))
        .collect()
}

pub fn all_models(f: &CnfFormula) -> Result<ModelSet, OracleError> {
    Oracle::default().all_models(f)
}

pub fn subset_minimal_models(f: &CnfFormula) -> Result<ModelSet, OracleError> {
    Oracle::default().subset_minimal_models(f)
}

pub fn flip_minimal_models(f: &CnfFormula) -> Result<ModelSet, OracleError> {
    Oracle::default().flip_minimal_models(f)
}

pub fn dispensable_oracle(f: &CnfFormula) -> Result<(Status, BTreeSet<Variable>), OracleError> {
    Oracle::default().dispensable(f)
}

pub fn min_ones_count(f: &CnfFormula) -> Result<Option<usize>, OracleError> {
    Oracle::default().min_ones_count(f)
}

/// Smallest superset of `s` closed under raising any variable from 0 to 1.
pub fn upward_closure(s: &ModelSet, num_vars: u32) -> ModelSet {
    let mut out = s.clone();
    let mut work: Vec<Assignment> = s.iter().cloned().collect();
    while let Some(m) = work.pop() {
        debug_assert_eq!(m.len(), num_vars as usize);
        for i in 1..=num_vars {
            let v = Variable::new(i);
            if !m.get(v) {
                let mut up = m.clone();
                up.set(v, true);
                if out.insert(up.clone()) {
                    work.push(up);
                }
            }
        }
    }
    out
}
