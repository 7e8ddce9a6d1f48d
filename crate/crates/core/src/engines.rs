//! Minimal-model enumeration and the dispensable-variable engines.
//!
//! Enumeration repeatedly asks a [`MinimalModelProvider`] for one minimal
//! model of the working formula, visits it, and strengthens the working
//! formula with the clause `OR { -v : model(v) = 1 }`. That clause removes the
//! model and everything above it while keeping every other minimal model of
//! the original formula, so each minimal model is visited exactly once.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::bdd::{BddManager, NodeRef, VarOrder};
use crate::formula::{Assignment, Clause, CnfFormula, Status, Variable};
use crate::maxsat::{self, MaxSatError};
use crate::oracle::{Oracle, OracleError};

pub const DEFAULT_MODEL_CAP: usize = 1_000_000;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    MaxSat(#[from] MaxSatError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("variable order covers {order} variables, formula has {formula}")]
    OrderMismatch { order: u32, formula: u32 },
    #[error("enumeration stopped after {0} models")]
    ModelCapExceeded(usize),
    #[error("engines disagree:\n{0}")]
    EngineDisagreement(String),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Engine {
    MaxSatEnum,
    BddEnum,
    BddDirect,
    Oracle,
}

impl Engine {
    pub const ALL: [Engine; 4] = [
        Engine::MaxSatEnum,
        Engine::BddEnum,
        Engine::BddDirect,
        Engine::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Engine::MaxSatEnum => "maxsat-enum",
            Engine::BddEnum => "bdd-enum",
            Engine::BddDirect => "bdd-direct",
            Engine::Oracle => "oracle",
        }
    }

    pub fn enumerates(self) -> bool {
        matches!(self, Engine::MaxSatEnum | Engine::BddEnum)
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("unknown engine {0:?}")]
pub struct UnknownEngine(String);

impl FromStr for Engine {
    type Err = UnknownEngine;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Engine::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| UnknownEngine(s.to_string()))
    }
}

/// Blocking clause for a visited model: the negation of each 1-valued variable.
pub fn blocking_clause(model: &Assignment) -> Clause {
    model.ones().map(Variable::negative).collect()
}

/// Source of one minimal model of a working formula that is strengthened
/// with blocking clauses between calls.
pub trait MinimalModelProvider {
    fn next_model(&mut self) -> Result<Option<Assignment>, EngineError>;

    fn block(&mut self, clause: &Clause) -> Result<(), EngineError>;

    fn decisions(&self) -> Option<u64> {
        None
    }

    fn bdd_size(&self) -> Option<usize> {
        None
    }
}

/// Cardinality-minimum models from the branch-and-bound MaxSAT solver.
pub struct MaxSatProvider {
    working: CnfFormula,
    decisions: u64,
}

impl MaxSatProvider {
    pub fn new(f: &CnfFormula) -> Self {
        MaxSatProvider {
            working: f.clone(),
            decisions: 0,
        }
    }
}

impl MinimalModelProvider for MaxSatProvider {
    fn next_model(&mut self) -> Result<Option<Assignment>, EngineError> {
        let r = maxsat::cardinality_minimum_model_with_stats(&self.working)?;
        self.decisions += r.decisions;
        Ok(r.model().cloned())
    }

    fn block(&mut self, clause: &Clause) -> Result<(), EngineError> {
        self.working.push(clause.clone());
        Ok(())
    }

    fn decisions(&self) -> Option<u64> {
        Some(self.decisions)
    }
}

/// Lexicographically least models of a BDD that is conjoined with each
/// blocking clause.
pub struct BddProvider {
    manager: BddManager,
    root: NodeRef,
    initial_size: usize,
}

impl BddProvider {
    pub fn new(f: &CnfFormula, order: Option<&VarOrder>) -> Result<Self, EngineError> {
        let mut manager = manager_for(f, order)?;
        let root = manager.compile_cnf(f);
        let initial_size = manager.size(root);
        Ok(BddProvider {
            manager,
            root,
            initial_size,
        })
    }
}

impl MinimalModelProvider for BddProvider {
    fn next_model(&mut self) -> Result<Option<Assignment>, EngineError> {
        Ok(self.manager.lex_min_model(self.root))
    }

    fn block(&mut self, clause: &Clause) -> Result<(), EngineError> {
        let c = self.manager.from_clause(clause);
        self.root = self.manager.and(self.root, c);
        Ok(())
    }

    fn bdd_size(&self) -> Option<usize> {
        Some(self.initial_size)
    }
}

fn manager_for(f: &CnfFormula, order: Option<&VarOrder>) -> Result<BddManager, EngineError> {
    match order {
        None => Ok(BddManager::new(f.num_vars())),
        Some(o) if o.num_vars() == f.num_vars() => Ok(BddManager::with_order(o.clone())),
        Some(o) => Err(EngineError::OrderMismatch {
            order: o.num_vars(),
            formula: f.num_vars(),
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerationSummary {
    pub visited: usize,
    /// The cap was reached while further minimal models remained.
    pub truncated: bool,
    /// The visitor asked to stop.
    pub stopped: bool,
}

impl EnumerationSummary {
    /// Turns truncation into [`EngineError::ModelCapExceeded`].
    pub fn strict(self) -> Result<Self, EngineError> {
        if self.truncated {
            Err(EngineError::ModelCapExceeded(self.visited))
        } else {
            Ok(self)
        }
    }

    pub fn complete(&self) -> bool {
        !self.truncated && !self.stopped
    }
}

/// Visits every subset-minimal model of the provider's formula once, in
/// provider order, until none remain, `cap` models have been visited, or
/// `visit` breaks.
pub fn generate_minimal_models<P, V>(
    provider: &mut P,
    cap: Option<usize>,
    mut visit: V,
) -> Result<EnumerationSummary, EngineError>
where
    P: MinimalModelProvider + ?Sized,
    V: FnMut(&Assignment) -> ControlFlow<()>,
{
    let mut summary = EnumerationSummary {
        visited: 0,
        truncated: false,
        stopped: false,
    };
    while let Some(model) = provider.next_model()? {
        if cap.is_some_and(|c| summary.visited >= c) {
            summary.truncated = true;
            break;
        }
        summary.visited += 1;
        if visit(&model).is_break() {
            summary.stopped = true;
            break;
        }
        provider.block(&blocking_clause(&model))?;
    }
    Ok(summary)
}

#[derive(Clone, Debug)]
pub struct EngineOptions {
    pub max_models: usize,
    /// Stop enumerating once every variable has been seen at 1.
    pub early_stop: bool,
    /// Keep the visited models in the report.
    pub collect_models: bool,
    pub order: Option<VarOrder>,
    pub oracle: Oracle,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            max_models: DEFAULT_MODEL_CAP,
            early_stop: true,
            collect_models: false,
            order: None,
            oracle: Oracle::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EngineStats {
    pub elapsed: Duration,
    pub bdd_size: Option<usize>,
    pub solver_decisions: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DispensableReport {
    pub engine: Engine,
    pub status: Status,
    pub dispensable: BTreeSet<Variable>,
    pub models_visited: usize,
    /// Number of minimal models, when the engine saw all of them.
    pub num_minimal_models: Option<usize>,
    /// The model cap cut enumeration short; `dispensable` may then be too large.
    pub truncated: bool,
    /// Visited models, in visit order, when requested.
    pub models: Option<Vec<Assignment>>,
    pub stats: EngineStats,
}

/// Dispensable variables of `f` computed by `engine`.
pub fn dispensable(
    f: &CnfFormula,
    engine: Engine,
    opts: &EngineOptions,
) -> Result<DispensableReport, EngineError> {
    let start = Instant::now();
    let mut report = match engine {
        Engine::MaxSatEnum => {
            let mut p = MaxSatProvider::new(f);
            enumerate_report(f, engine, &mut p, opts)?
        }
        Engine::BddEnum => {
            let mut p = BddProvider::new(f, opts.order.as_ref())?;
            enumerate_report(f, engine, &mut p, opts)?
        }
        Engine::BddDirect => {
            let mut m = manager_for(f, opts.order.as_ref())?;
            let root = m.compile_cnf(f);
            let (status, dispensable) = m.dispensable_from_root(f, root);
            let models = opts.collect_models.then(|| {
                let min = m.minimal(root);
                m.models(min)
            });
            let count = models.as_ref().map(Vec::len);
            DispensableReport {
                engine,
                status,
                dispensable,
                models_visited: count.unwrap_or(0),
                num_minimal_models: count,
                truncated: false,
                models,
                stats: EngineStats {
                    bdd_size: Some(m.size(root)),
                    ..Default::default()
                },
            }
        }
        Engine::Oracle => {
            let minimal = opts.oracle.subset_minimal_models(f)?;
            let (status, dispensable) = opts.oracle.dispensable(f)?;
            DispensableReport {
                engine,
                status,
                dispensable,
                models_visited: minimal.len(),
                num_minimal_models: Some(minimal.len()),
                truncated: false,
                models: opts.collect_models.then(|| minimal.into_iter().collect()),
                stats: EngineStats::default(),
            }
        }
    };
    report.stats.elapsed = start.elapsed();
    Ok(report)
}

fn enumerate_report<P: MinimalModelProvider>(
    f: &CnfFormula,
    engine: Engine,
    provider: &mut P,
    opts: &EngineOptions,
) -> Result<DispensableReport, EngineError> {
    let n = f.num_vars() as usize;
    let mut used: BTreeSet<Variable> = BTreeSet::new();
    let mut models = Vec::new();
    let summary = generate_minimal_models(provider, Some(opts.max_models), |m| {
        used.extend(m.ones());
        if opts.collect_models {
            models.push(m.clone());
        }
        if opts.early_stop && used.len() == n {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    let status = if summary.visited == 0 {
        Status::Unsat
    } else {
        Status::Sat
    };
    Ok(DispensableReport {
        engine,
        status,
        dispensable: f.variables().filter(|v| !used.contains(v)).collect(),
        models_visited: summary.visited,
        num_minimal_models: summary.complete().then_some(summary.visited),
        truncated: summary.truncated,
        models: opts.collect_models.then_some(models),
        stats: EngineStats {
            elapsed: Duration::ZERO,
            bdd_size: provider.bdd_size(),
            solver_decisions: provider.decisions(),
        },
    })
}

/// Outcome of running every engine on one formula.
#[derive(Clone, Debug)]
pub struct CrossCheckReport {
    pub reports: Vec<DispensableReport>,
}

impl CrossCheckReport {
    pub fn status(&self) -> Status {
        self.reports[0].status
    }

    pub fn dispensable(&self) -> &BTreeSet<Variable> {
        &self.reports[0].dispensable
    }

    pub fn num_minimal_models(&self) -> Option<usize> {
        self.reports.iter().find_map(|r| r.num_minimal_models)
    }
}

/// Runs all engines concurrently (the oracle only when `f` is within its
/// guard) with full enumeration, and requires identical statuses,
/// dispensable sets and minimal-model sets.
pub fn cross_check(f: &CnfFormula, opts: &EngineOptions) -> Result<CrossCheckReport, EngineError> {
    let opts = EngineOptions {
        early_stop: false,
        collect_models: true,
        ..opts.clone()
    };
    let engines: Vec<Engine> = Engine::ALL
        .into_iter()
        .filter(|&e| e != Engine::Oracle || f.num_vars() <= opts.oracle.limit())
        .collect();
    let results: Vec<Result<DispensableReport, EngineError>> = std::thread::scope(|s| {
        let handles: Vec<_> = engines
            .iter()
            .map(|&e| {
                let opts = &opts;
                s.spawn(move || dispensable(f, e, opts))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("engine thread panicked"))
            .collect()
    });
    let reports = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut problems = Vec::new();
    let base = &reports[0];
    for r in &reports[1..] {
        if r.status != base.status || r.dispensable != base.dispensable {
            problems.push(format!(
                "{}: status={} dispensable={} vs {}: status={} dispensable={}",
                base.engine,
                base.status,
                format_vars(&base.dispensable),
                r.engine,
                r.status,
                format_vars(&r.dispensable)
            ));
        }
    }
    let model_sets: Vec<(Engine, BTreeSet<Assignment>)> = reports
        .iter()
        .filter(|r| !r.truncated)
        .map(|r| {
            let set = r.models.iter().flatten().cloned().collect();
            (r.engine, set)
        })
        .collect();
    for pair in model_sets.windows(2) {
        let ((ea, a), (eb, b)) = (&pair[0], &pair[1]);
        if a != b {
            problems.push(format!(
                "{ea} found {} minimal models, {eb} found {}",
                a.len(),
                b.len()
            ));
        }
    }
    if !problems.is_empty() {
        return Err(EngineError::EngineDisagreement(problems.join("\n")));
    }
    Ok(CrossCheckReport { reports })
}

/// `{1,3}` style listing of variable indices.
pub fn format_vars(vars: &BTreeSet<Variable>) -> String {
    let items: Vec<String> = vars.iter().map(|v| v.index().to_string()).collect();
    format!("{{{}}}", items.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> Assignment {
        s.parse().unwrap()
    }

    fn collect<P: MinimalModelProvider>(p: &mut P) -> Vec<String> {
        let mut out = Vec::new();
        generate_minimal_models(p, None, |m| {
            out.push(m.to_string());
            ControlFlow::Continue(())
        })
        .unwrap();
        out
    }

    #[test]
    fn blocking_clauses() {
        assert_eq!(blocking_clause(&a("101")), Clause::from_dimacs(&[-1, -3]));
        assert_eq!(blocking_clause(&a("000")), Clause::empty());
        assert_eq!(blocking_clause(&a("11")), Clause::from_dimacs(&[-1, -2]));
    }

    #[test]
    fn enumerates_xor_chain() {
        let f = CnfFormula::xor_chain(3);
        let mut p = MaxSatProvider::new(&f);
        let ms = collect(&mut p);
        assert_eq!(ms.len(), 8);
        assert_eq!(ms.iter().collect::<BTreeSet<_>>().len(), 8);
        let mut b = BddProvider::new(&f, None).unwrap();
        let mut bs = collect(&mut b);
        // BDD provider visits in lexicographic order
        let sorted = {
            let mut s = bs.clone();
            s.sort();
            s
        };
        assert_eq!(bs, sorted);
        bs.sort();
        let mut ms = ms;
        ms.sort();
        assert_eq!(ms, bs);
    }

    #[test]
    fn unsat_and_constant_true() {
        let bad = CnfFormula::from_dimacs_clauses(1, &[&[1], &[-1]]);
        assert!(collect(&mut MaxSatProvider::new(&bad)).is_empty());
        assert!(collect(&mut BddProvider::new(&bad, None).unwrap()).is_empty());
        let top = CnfFormula::new(2, vec![]).unwrap();
        assert_eq!(collect(&mut MaxSatProvider::new(&top)), ["00"]);
        assert_eq!(collect(&mut BddProvider::new(&top, None).unwrap()), ["00"]);
    }

    #[test]
    fn cap_truncates() {
        let f = CnfFormula::xor_chain(3);
        let mut p = MaxSatProvider::new(&f);
        let s = generate_minimal_models(&mut p, Some(3), |_| ControlFlow::Continue(())).unwrap();
        assert_eq!((s.visited, s.truncated), (3, true));
        assert_eq!(s.strict(), Err(EngineError::ModelCapExceeded(3)));
        // exactly at the count is not truncation
        let mut p = MaxSatProvider::new(&f);
        let s = generate_minimal_models(&mut p, Some(8), |_| ControlFlow::Continue(())).unwrap();
        assert!(!s.truncated);
        assert!(s.strict().is_ok());
    }

    #[test]
    fn all_engines_on_examples() {
        let cases: Vec<(CnfFormula, Status, Vec<u32>)> = vec![
            (CnfFormula::xor_chain(1), Status::Sat, vec![]),
            (
                CnfFormula::from_dimacs_clauses(2, &[&[1]]),
                Status::Sat,
                vec![2],
            ),
            (
                CnfFormula::from_dimacs_clauses(1, &[&[1], &[-1]]),
                Status::Unsat,
                vec![1],
            ),
        ];
        for (f, status, vars) in cases {
            let expect: BTreeSet<Variable> = vars.into_iter().map(Variable::new).collect();
            for e in Engine::ALL {
                let r = dispensable(&f, e, &EngineOptions::default()).unwrap();
                assert_eq!(r.status, status, "{e}");
                assert_eq!(r.dispensable, expect, "{e}");
            }
        }
    }

    #[test]
    fn early_stop_saturates() {
        let f = CnfFormula::xor_chain(3);
        let r = dispensable(&f, Engine::MaxSatEnum, &EngineOptions::default()).unwrap();
        assert!(r.dispensable.is_empty());
        assert!(r.models_visited < 8);
        assert_eq!(r.num_minimal_models, None);
        let full = EngineOptions {
            early_stop: false,
            ..Default::default()
        };
        let r = dispensable(&f, Engine::BddEnum, &full).unwrap();
        assert_eq!(r.num_minimal_models, Some(8));
    }

    #[test]
    fn cross_check_agrees() {
        let r = cross_check(&CnfFormula::xor_chain(2), &EngineOptions::default()).unwrap();
        assert_eq!(r.reports.len(), 4);
        assert_eq!(r.num_minimal_models(), Some(4));
        assert!(r.dispensable().is_empty());
        let bad = CnfFormula::from_dimacs_clauses(1, &[&[1], &[-1]]);
        let r = cross_check(&bad, &EngineOptions::default()).unwrap();
        assert_eq!(r.status(), Status::Unsat);
    }

    #[test]
    fn order_must_match() {
        let opts = EngineOptions {
            order: Some(VarOrder::identity(3)),
            ..Default::default()
        };
        assert!(matches!(
            dispensable(&CnfFormula::xor_chain(1), Engine::BddDirect, &opts),
            Err(EngineError::OrderMismatch { .. })
        ));
    }

    #[test]
    fn engine_names_round_trip() {
        for e in Engine::ALL {
            assert_eq!(e.name().parse::<Engine>().unwrap(), e);
        }
        assert!("sat4j".parse::<Engine>().is_err());
    }
}
