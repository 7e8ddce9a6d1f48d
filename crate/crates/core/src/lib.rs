//! Dispensable variables of CNF formulas.
//!
//! A variable is *dispensable* when it takes value 0 in every subset-minimal
//! model of the formula. Three engines compute the set:
//!
//! * `maxsat-enum`: enumerate minimal models with a min-ones MaxSAT solver and
//!   blocking clauses,
//! * `bdd-enum`: the same loop with lexicographically least models of a BDD,
//! * `bdd-direct`: build the BDD of all minimal models and read the variables
//!   off its nodes.
//!
//! The [`oracle`] module provides brute-force reference semantics for testing.
//!
//! ```
//! use dispenser_core::{dispensable, CnfFormula, Engine, EngineOptions, Status};
//!
//! let f: CnfFormula = "p cnf 3 1\n1 2 0\n".parse().unwrap();
//! let report = dispensable(&f, Engine::BddDirect, &EngineOptions::default()).unwrap();
//! assert_eq!(report.status, Status::Sat);
//! assert_eq!(report.dispensable.iter().map(|v| v.index()).collect::<Vec<_>>(), [3]);
//! ```

pub mod bdd;
pub mod engines;
pub mod formula;
pub mod maxsat;
pub mod oracle;

pub use bdd::{dispensable_via_bdd, BddError, BddManager, BinOp, NodeRef, VarOrder};
pub use engines::{
    blocking_clause, cross_check, dispensable, format_vars, generate_minimal_models, BddProvider,
    CrossCheckReport, DispensableReport, Engine, EngineError, EngineOptions, EngineStats,
    EnumerationSummary, MaxSatProvider, MinimalModelProvider, DEFAULT_MODEL_CAP,
};
pub use formula::{
    parse_dimacs, render_dimacs, Assignment, Clause, CnfFormula, FormulaError, Literal, ParseError,
    Status, Variable,
};
pub use maxsat::{
    cardinality_minimum_model, encode_min_ones, export_wcnf, parse_wcnf, solve, MaxSatError,
    MaxSatOutcome, MaxSatResult, WeightedInstance,
};
pub use oracle::{ModelSet, Oracle, OracleError};
