//! Weighted partial MaxSAT.
//!
//! The solver is a depth-first branch and bound: unit propagation over the
//! hard clauses, lowest-index unassigned variable first, value 0 before 1,
//! and a subtree is cut as soon as the weight of already-falsified soft
//! clauses reaches the incumbent cost. Leaves are therefore reached in
//! lexicographic order, so among equal-cost optima the lexicographically
//! smallest assignment is returned.

use thiserror::Error;

use crate::formula::{
    parse_clause_body, parse_int, write_clause, Assignment, Clause, CnfFormula, Literal,
    ParseError, Tokens, Variable,
};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum MaxSatError {
    #[error("total soft weight overflows 64-bit arithmetic")]
    WeightOverflow,
    #[error("soft clause weights must be at least 1")]
    ZeroWeight,
    #[error("clause mentions variable {0} beyond the instance's variable count")]
    VariableOutOfRange(Variable),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoftClause {
    pub clause: Clause,
    pub weight: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WeightedInstance {
    num_vars: u32,
    hard: Vec<Clause>,
    soft: Vec<SoftClause>,
}

impl WeightedInstance {
    pub fn new(num_vars: u32) -> Self {
        WeightedInstance {
            num_vars,
            ..Default::default()
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn hard(&self) -> &[Clause] {
        &self.hard
    }

    pub fn soft(&self) -> &[SoftClause] {
        &self.soft
    }

    fn check_vars(&self, c: &Clause) -> Result<(), MaxSatError> {
        match c
            .literals()
            .iter()
            .find(|l| l.var().index() > self.num_vars)
        {
            Some(l) => Err(MaxSatError::VariableOutOfRange(l.var())),
            None => Ok(()),
        }
    }

    pub fn add_hard(&mut self, clause: Clause) -> Result<(), MaxSatError> {
        self.check_vars(&clause)?;
        self.hard.push(clause);
        Ok(())
    }

    pub fn add_soft(&mut self, clause: Clause, weight: u64) -> Result<(), MaxSatError> {
        self.check_vars(&clause)?;
        if weight == 0 {
            return Err(MaxSatError::ZeroWeight);
        }
        self.soft.push(SoftClause { clause, weight });
        Ok(())
    }

    pub fn total_soft_weight(&self) -> Result<u64, MaxSatError> {
        self.soft.iter().try_fold(0u64, |acc, s| {
            acc.checked_add(s.weight).ok_or(MaxSatError::WeightOverflow)
        })
    }

    /// The WDIMACS "top" weight: one more than the total soft weight.
    pub fn top(&self) -> Result<u64, MaxSatError> {
        self.total_soft_weight()?
            .checked_add(1)
            .ok_or(MaxSatError::WeightOverflow)
    }

    /// Same optimisation problem with every hard clause turned into a soft
    /// clause of weight [`top`](Self::top). For the min-ones encoding this is
    /// weight `n + 1` per original clause.
    pub fn to_pure_weighted(&self) -> Result<WeightedInstance, MaxSatError> {
        let top = self.top()?;
        let mut soft: Vec<SoftClause> = self
            .hard
            .iter()
            .map(|c| SoftClause {
                clause: c.clone(),
                weight: top,
            })
            .collect();
        soft.extend(self.soft.iter().cloned());
        // total weight must stay representable for the solver
        let out = WeightedInstance {
            num_vars: self.num_vars,
            hard: Vec::new(),
            soft,
        };
        out.total_soft_weight()?;
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MaxSatOutcome {
    Optimal { model: Assignment, cost: u64 },
    HardUnsat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxSatResult {
    pub outcome: MaxSatOutcome,
    /// Branching decisions taken during the search.
    pub decisions: u64,
}

impl MaxSatResult {
    pub fn model(&self) -> Option<&Assignment> {
        match &self.outcome {
            MaxSatOutcome::Optimal { model, .. } => Some(model),
            MaxSatOutcome::HardUnsat => None,
        }
    }

    pub fn cost(&self) -> Option<u64> {
        match &self.outcome {
            MaxSatOutcome::Optimal { cost, .. } => Some(*cost),
            MaxSatOutcome::HardUnsat => None,
        }
    }
}

struct Search<'a> {
    inst: &'a WeightedInstance,
    values: Vec<Option<bool>>,
    trail: Vec<usize>,
    best: Option<(u64, Vec<bool>)>,
    decisions: u64,
}

enum Propagation {
    Conflict,
    Fixpoint,
}

impl<'a> Search<'a> {
    fn lit_value(&self, l: Literal) -> Option<bool> {
        self.values[l.var().position()].map(|v| v != l.is_negated())
    }

    fn assign(&mut self, pos: usize, value: bool) {
        debug_assert!(self.values[pos].is_none());
        self.values[pos] = Some(value);
        self.trail.push(pos);
    }

    fn undo_to(&mut self, mark: usize) {
        for pos in self.trail.drain(mark..) {
            self.values[pos] = None;
        }
    }

    fn propagate(&mut self) -> Propagation {
        let inst = self.inst;
        loop {
            let mut changed = false;
            for c in &inst.hard {
                let mut unassigned = None;
                let mut open = 0;
                let mut satisfied = false;
                for &l in c.literals() {
                    match self.lit_value(l) {
                        Some(true) => {
                            satisfied = true;
                            break;
                        }
                        Some(false) => {}
                        None => {
                            open += 1;
                            unassigned = Some(l);
                        }
                    }
                }
                if satisfied {
                    continue;
                }
                match (open, unassigned) {
                    (0, _) => return Propagation::Conflict,
                    (1, Some(l)) => {
                        self.assign(l.var().position(), !l.is_negated());
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return Propagation::Fixpoint;
            }
        }
    }

    fn falsified_soft_weight(&self) -> u64 {
        self.inst
            .soft
            .iter()
            .filter(|s| {
                s.clause
                    .literals()
                    .iter()
                    .all(|&l| self.lit_value(l) == Some(false))
            })
            .map(|s| s.weight)
            .sum()
    }

    fn run(&mut self) {
        let mark = self.trail.len();
        if let Propagation::Fixpoint = self.propagate() {
            let cost = self.falsified_soft_weight();
            let pruned = matches!(&self.best, Some((best, _)) if cost >= *best);
            if !pruned {
                match self.values.iter().position(Option::is_none) {
                    None => {
                        let model = self.values.iter().map(|v| v.unwrap()).collect();
                        self.best = Some((cost, model));
                    }
                    Some(pos) => {
                        for value in [false, true] {
                            self.decisions += 1;
                            let branch = self.trail.len();
                            self.assign(pos, value);
                            self.run();
                            self.undo_to(branch);
                        }
                    }
                }
            }
        }
        self.undo_to(mark);
    }
}

/// Finds a model of the hard clauses minimising the total weight of
/// falsified soft clauses.
pub fn solve(inst: &WeightedInstance) -> Result<MaxSatResult, MaxSatError> {
    inst.total_soft_weight()?;
    let mut search = Search {
        inst,
        values: vec![None; inst.num_vars as usize],
        trail: Vec::new(),
        best: None,
        decisions: 0,
    };
    search.run();
    let outcome = match search.best {
        Some((cost, bits)) => MaxSatOutcome::Optimal {
            model: Assignment::from_bits(bits),
            cost,
        },
        None => MaxSatOutcome::HardUnsat,
    };
    Ok(MaxSatResult {
        outcome,
        decisions: search.decisions,
    })
}

/// Min-ones encoding: original clauses hard, one unit soft clause `-v` of
/// weight 1 per variable.
pub fn encode_min_ones(f: &CnfFormula) -> WeightedInstance {
    WeightedInstance {
        num_vars: f.num_vars(),
        hard: f.clauses().to_vec(),
        soft: f
            .variables()
            .map(|v| SoftClause {
                clause: Clause::new([v.negative()]),
                weight: 1,
            })
            .collect(),
    }
}

/// A model of `f` with as few 1s as possible, or `None` when `f` is
/// unsatisfiable. Such a model is always subset-minimal.
pub fn cardinality_minimum_model(f: &CnfFormula) -> Result<Option<Assignment>, MaxSatError> {
    Ok(cardinality_minimum_model_with_stats(f)?.model().cloned())
}

pub fn cardinality_minimum_model_with_stats(f: &CnfFormula) -> Result<MaxSatResult, MaxSatError> {
    solve(&encode_min_ones(f))
}

/// Classic WDIMACS: hard clauses carry the top weight.
pub fn export_wcnf(inst: &WeightedInstance) -> Result<String, MaxSatError> {
    let top = inst.top()?;
    let mut out = format!(
        "p wcnf {} {} {}\n",
        inst.num_vars,
        inst.hard.len() + inst.soft.len(),
        top
    );
    for (w, c) in inst
        .hard
        .iter()
        .map(|c| (top, c))
        .chain(inst.soft.iter().map(|s| (s.weight, &s.clause)))
    {
        out.push_str(&w.to_string());
        out.push(' ');
        write_clause(&mut out, c);
    }
    Ok(out)
}

/// Parses classic WDIMACS; clauses whose weight reaches `top` are hard.
pub fn parse_wcnf(text: &str) -> Result<WeightedInstance, ParseError> {
    let mut tokens = Tokens::new(text);
    let (line, header) = tokens.header().ok_or_else(|| ParseError::MalformedHeader {
        line: 0,
        reason: "no `p wcnf` line".into(),
    })?;
    let malformed = |reason: &str| ParseError::MalformedHeader {
        line,
        reason: reason.to_string(),
    };
    if header.len() != 5 || header[0] != "p" || header[1] != "wcnf" {
        return Err(malformed("expected `p wcnf <vars> <clauses> <top>`"));
    }
    let num_vars: u32 = header[2]
        .parse()
        .map_err(|_| malformed("bad variable count"))?;
    let expected: usize = header[3]
        .parse()
        .map_err(|_| malformed("bad clause count"))?;
    let top: u64 = header[4].parse().map_err(|_| malformed("bad top weight"))?;

    let body = parse_clause_body(&mut tokens, num_vars, parse_int::<u64>, true)?;
    if body.len() != expected {
        return Err(ParseError::ClauseCountMismatch {
            expected,
            found: body.len(),
        });
    }
    let mut inst = WeightedInstance::new(num_vars);
    for (weight, clause) in body {
        if weight >= top {
            inst.hard.push(clause);
        } else if weight == 0 {
            return Err(ParseError::InvalidToken {
                line,
                token: "0 (weight)".into(),
            });
        } else {
            inst.soft.push(SoftClause { clause, weight });
        }
    }
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn or2() -> CnfFormula {
        CnfFormula::from_dimacs_clauses(2, &[&[1, 2]])
    }

    #[test]
    fn solves_or_with_min_ones() {
        let mut inst = WeightedInstance::new(2);
        inst.add_hard(Clause::from_dimacs(&[1, 2])).unwrap();
        inst.add_soft(Clause::from_dimacs(&[-1]), 1).unwrap();
        inst.add_soft(Clause::from_dimacs(&[-2]), 1).unwrap();
        assert_eq!(inst, encode_min_ones(&or2()));
        let r = solve(&inst).unwrap();
        assert_eq!(r.cost(), Some(1));
        assert_eq!(r.model().unwrap().to_string(), "01");
    }

    #[test]
    fn hard_unsat() {
        let mut inst = WeightedInstance::new(1);
        inst.add_hard(Clause::from_dimacs(&[1])).unwrap();
        inst.add_hard(Clause::from_dimacs(&[-1])).unwrap();
        inst.add_soft(Clause::from_dimacs(&[1]), 5).unwrap();
        assert_eq!(solve(&inst).unwrap().outcome, MaxSatOutcome::HardUnsat);
        let mut empty = WeightedInstance::new(2);
        empty.add_hard(Clause::empty()).unwrap();
        assert_eq!(solve(&empty).unwrap().outcome, MaxSatOutcome::HardUnsat);
    }

    #[test]
    fn no_soft_clauses_costs_nothing() {
        let mut inst = WeightedInstance::new(3);
        inst.add_hard(Clause::from_dimacs(&[2, 3])).unwrap();
        let r = solve(&inst).unwrap();
        assert_eq!(r.cost(), Some(0));
        assert_eq!(r.model().unwrap().to_string(), "001");
    }

    #[test]
    fn rejects_bad_weights() {
        let mut inst = WeightedInstance::new(1);
        assert_eq!(
            inst.add_soft(Clause::from_dimacs(&[1]), 0),
            Err(MaxSatError::ZeroWeight)
        );
        inst.add_soft(Clause::from_dimacs(&[1]), u64::MAX).unwrap();
        inst.add_soft(Clause::from_dimacs(&[-1]), 1).unwrap();
        assert_eq!(solve(&inst), Err(MaxSatError::WeightOverflow));
        assert_eq!(export_wcnf(&inst), Err(MaxSatError::WeightOverflow));
        assert!(matches!(
            inst.add_hard(Clause::from_dimacs(&[2])),
            Err(MaxSatError::VariableOutOfRange(_))
        ));
    }

    #[test]
    fn encoding_examples() {
        let e = encode_min_ones(&CnfFormula::new(2, vec![]).unwrap());
        assert!(e.hard().is_empty());
        assert_eq!(e.soft().len(), 2);
        let x = encode_min_ones(&CnfFormula::xor_chain(1));
        assert_eq!(x.hard(), CnfFormula::xor_chain(1).clauses());
        assert!(x
            .soft()
            .iter()
            .all(|s| s.weight == 1 && s.clause.len() == 1));

        let pure = encode_min_ones(&or2()).to_pure_weighted().unwrap();
        assert!(pure.hard().is_empty());
        assert_eq!(pure.soft()[0].weight, 3);
        assert_eq!(pure.soft()[0].clause, Clause::from_dimacs(&[1, 2]));
    }

    #[test]
    fn cardinality_minimum() {
        assert_eq!(
            cardinality_minimum_model(&or2())
                .unwrap()
                .unwrap()
                .to_string(),
            "01"
        );
        let top = CnfFormula::new(3, vec![]).unwrap();
        assert_eq!(
            cardinality_minimum_model(&top)
                .unwrap()
                .unwrap()
                .to_string(),
            "000"
        );
        let bad = CnfFormula::from_dimacs_clauses(1, &[&[1], &[-1]]);
        assert_eq!(cardinality_minimum_model(&bad).unwrap(), None);
    }

    #[test]
    fn wcnf_export() {
        let inst = encode_min_ones(&or2());
        let text = export_wcnf(&inst).unwrap();
        assert_eq!(text, "p wcnf 2 3 3\n3 1 2 0\n1 -1 0\n1 -2 0\n");
        assert_eq!(parse_wcnf(&text).unwrap(), inst);

        assert_eq!(
            export_wcnf(&WeightedInstance::new(0)).unwrap(),
            "p wcnf 0 0 1\n"
        );

        let mut hard_only = WeightedInstance::new(1);
        hard_only.add_hard(Clause::from_dimacs(&[1])).unwrap();
        assert_eq!(export_wcnf(&hard_only).unwrap(), "p wcnf 1 1 1\n1 1 0\n");
    }

    #[test]
    fn wcnf_parse_errors() {
        assert!(matches!(
            parse_wcnf("p cnf 1 1\n1 0"),
            Err(ParseError::MalformedHeader { .. })
        ));
        assert_eq!(
            parse_wcnf("p wcnf 1 1 2\n1 1"),
            Err(ParseError::UnterminatedClause)
        );
        assert!(matches!(
            parse_wcnf("p wcnf 1 1 2\n1 2 0"),
            Err(ParseError::LiteralOutOfRange { .. })
        ));
    }
}
