//! CNF data model and DIMACS input/output.
//!
//! Variables are 1-indexed as in DIMACS. An [`Assignment`] is a dense vector
//! of values where position `i - 1` holds the value of variable `i`; its
//! derived ordering is lexicographic with variable 1 most significant and
//! `0 < 1`, which is the order every oracle listing uses.

use std::fmt;
use std::ops::Not;
use std::str::FromStr;

use thiserror::Error;

/// A variable, numbered from 1 as in DIMACS.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(u32);

impl Variable {
    /// Panics if `index` is 0.
    pub fn new(index: u32) -> Self {
        assert!(index >= 1, "variables are numbered from 1");
        Variable(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }

    /// Zero-based position of this variable in an [`Assignment`].
    pub fn position(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn positive(self) -> Literal {
        Literal {
            var: self,
            negated: false,
        }
    }

    pub fn negative(self) -> Literal {
        Literal {
            var: self,
            negated: true,
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    var: Variable,
    negated: bool,
}

impl Literal {
    /// Builds a literal from a non-zero DIMACS integer.
    pub fn from_dimacs(value: i64) -> Option<Self> {
        if value == 0 {
            return None;
        }
        let index = u32::try_from(value.unsigned_abs()).ok()?;
        Some(Literal {
            var: Variable(index),
            negated: value < 0,
        })
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var.0);
        if self.negated {
            -v
        } else {
            v
        }
    }

    pub fn var(self) -> Variable {
        self.var
    }

    pub fn is_negated(self) -> bool {
        self.negated
    }

    /// True iff the literal holds under `a`.
    pub fn holds(self, a: &Assignment) -> bool {
        a.get(self.var) != self.negated
    }
}

impl Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        Literal {
            var: self.var,
            negated: !self.negated,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals. Duplicates are removed on construction, first
/// occurrence wins; complementary pairs are kept.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    pub fn new<I: IntoIterator<Item = Literal>>(literals: I) -> Self {
        let mut out: Vec<Literal> = Vec::new();
        for lit in literals {
            if !out.contains(&lit) {
                out.push(lit);
            }
        }
        Clause { literals: out }
    }

    /// Clause from DIMACS integers. Panics on 0.
    pub fn from_dimacs(values: &[i64]) -> Self {
        Clause::new(
            values
                .iter()
                .map(|&v| Literal::from_dimacs(v).expect("0 is not a literal")),
        )
    }

    pub fn empty() -> Self {
        Clause::default()
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn is_tautology(&self) -> bool {
        self.literals.iter().any(|&l| self.literals.contains(&!l))
    }

    pub fn is_satisfied(&self, a: &Assignment) -> bool {
        self.literals.iter().any(|l| l.holds(a))
    }

    pub fn max_var(&self) -> u32 {
        self.literals.iter().map(|l| l.var.0).max().unwrap_or(0)
    }
}

impl FromIterator<Literal> for Clause {
    fn from_iter<T: IntoIterator<Item = Literal>>(iter: T) -> Self {
        Clause::new(iter)
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("clause {clause} mentions {var}, but the formula has {num_vars} variables")]
    VariableOutOfRange {
        clause: usize,
        var: Variable,
        num_vars: u32,
    },
}

/// A conjunction of clauses over variables `1..=num_vars`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(num_vars: u32, clauses: Vec<Clause>) -> Result<Self, FormulaError> {
        for (i, c) in clauses.iter().enumerate() {
            if let Some(l) = c.literals.iter().find(|l| l.var.0 > num_vars) {
                return Err(FormulaError::VariableOutOfRange {
                    clause: i,
                    var: l.var,
                    num_vars,
                });
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    /// Convenience constructor from DIMACS integer clauses; panics on range errors.
    pub fn from_dimacs_clauses(num_vars: u32, clauses: &[&[i64]]) -> Self {
        CnfFormula::new(
            num_vars,
            clauses.iter().map(|c| Clause::from_dimacs(c)).collect(),
        )
        .expect("literal out of range")
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn variables(&self) -> impl Iterator<Item = Variable> {
        (1..=self.num_vars).map(Variable)
    }

    /// Appends a clause; panics if it mentions a variable beyond `num_vars`.
    pub fn push(&mut self, clause: Clause) {
        assert!(clause.max_var() <= self.num_vars, "literal out of range");
        self.clauses.push(clause);
    }

    /// True iff every clause holds under `a`. `a` must cover `num_vars`.
    pub fn evaluate(&self, a: &Assignment) -> bool {
        debug_assert!(a.len() >= self.num_vars as usize);
        self.clauses.iter().all(|c| c.is_satisfied(a))
    }

    /// The family `(v1 xor v2) and (v3 xor v4) and ...` with `k` blocks,
    /// written as `2k` binary clauses. It has exactly `2^k` minimal models.
    pub fn xor_chain(k: u32) -> Self {
        assert!(k >= 1, "xor_chain needs at least one block");
        let mut clauses = Vec::with_capacity(2 * k as usize);
        for j in 1..=k {
            let a = Variable(2 * j - 1);
            let b = Variable(2 * j);
            clauses.push(Clause::new([a.positive(), b.positive()]));
            clauses.push(Clause::new([a.negative(), b.negative()]));
        }
        CnfFormula {
            num_vars: 2 * k,
            clauses,
        }
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            write_clause(&mut out, c);
        }
        out
    }
}

pub(crate) fn write_clause(out: &mut String, c: &Clause) {
    for l in &c.literals {
        out.push_str(&l.to_dimacs().to_string());
        out.push(' ');
    }
    out.push_str("0\n");
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dimacs())
    }
}

impl FromStr for CnfFormula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_dimacs(s)
    }
}

/// Total assignment of values to variables `1..=len`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn zeros(num_vars: u32) -> Self {
        Assignment(vec![false; num_vars as usize])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Assignment(bits)
    }

    /// Assignment whose bit `i` (least significant first) is the value of variable `i + 1`.
    pub fn from_mask(num_vars: u32, mask: u64) -> Self {
        Assignment((0..num_vars).map(|i| (mask >> i) & 1 == 1).collect())
    }

    pub fn to_mask(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0, |m, (i, &b)| if b { m | (1 << i) } else { m })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, v: Variable) -> bool {
        self.0[v.position()]
    }

    pub fn set(&mut self, v: Variable, value: bool) {
        self.0[v.position()] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Variables valued 1, ascending.
    pub fn ones(&self) -> impl Iterator<Item = Variable> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| Variable(i as u32 + 1))
    }

    /// Pointwise `self <= other`.
    pub fn le_pointwise(&self, other: &Assignment) -> bool {
        self.0.iter().zip(&other.0).all(|(&a, &b)| !a || b)
    }
}

/// Renders as a bit-string, variable 1 leftmost.
impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("invalid bit-string character {0:?}")]
pub struct BitStringError(char);

impl FromStr for Assignment {
    type Err = BitStringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(BitStringError(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Assignment)
    }
}

/// Satisfiability verdict attached to analysis results.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Sat,
    Unsat,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Sat => "sat",
            Status::Unsat => "unsat",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: malformed or missing problem line: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: literal {literal} exceeds the declared {num_vars} variables")]
    LiteralOutOfRange {
        line: usize,
        literal: i64,
        num_vars: u32,
    },
    #[error("line {line}: invalid token {token:?}")]
    InvalidToken { line: usize, token: String },
    #[error("last clause is missing its terminating 0")]
    UnterminatedClause,
    #[error("header declares {expected} clauses, found {found}")]
    ClauseCountMismatch { expected: usize, found: usize },
}

/// Token stream over a DIMACS-family body, skipping comment lines.
pub(crate) struct Tokens<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    current: Option<(usize, std::str::SplitWhitespace<'a>)>,
}

impl<'a> Tokens<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Tokens {
            lines: text.lines().enumerate(),
            current: None,
        }
    }

    /// Next non-comment line's tokens, as a header candidate.
    pub(crate) fn header(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.lines.by_ref() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('c') {
                continue;
            }
            return Some((i + 1, t.split_whitespace().collect()));
        }
        None
    }

    pub(crate) fn next_token(&mut self) -> Option<(usize, &'a str)> {
        loop {
            if let Some((line, it)) = self.current.as_mut() {
                if let Some(tok) = it.next() {
                    return Some((*line, tok));
                }
            }
            let (i, line) = self.lines.next()?;
            let t = line.trim_start();
            if t.starts_with('c') || t.starts_with('%') {
                self.current = None;
                continue;
            }
            self.current = Some((i + 1, line.split_whitespace()));
        }
    }
}

pub(crate) fn parse_int<T: FromStr>(line: usize, tok: &str) -> Result<T, ParseError> {
    tok.parse().map_err(|_| ParseError::InvalidToken {
        line,
        token: tok.to_string(),
    })
}

/// Reads clauses until the token stream ends. `prefix` returns an optional
/// per-clause leading value (the weight, for WDIMACS).
pub(crate) fn parse_clause_body<W>(
    tokens: &mut Tokens<'_>,
    num_vars: u32,
    mut prefix: impl FnMut(usize, &str) -> Result<W, ParseError>,
    weighted: bool,
) -> Result<Vec<(W, Clause)>, ParseError> {
    let mut out = Vec::new();
    let mut lits: Vec<Literal> = Vec::new();
    let mut weight: Option<W> = None;
    let mut open = false;
    while let Some((line, tok)) = tokens.next_token() {
        if weighted && weight.is_none() {
            weight = Some(prefix(line, tok)?);
            open = true;
            continue;
        }
        let v: i64 = parse_int(line, tok)?;
        if v == 0 {
            let w = match weight.take() {
                Some(w) => w,
                None => prefix(line, tok)?,
            };
            out.push((w, Clause::new(lits.drain(..))));
            open = false;
            continue;
        }
        if v.unsigned_abs() > u64::from(num_vars) {
            return Err(ParseError::LiteralOutOfRange {
                line,
                literal: v,
                num_vars,
            });
        }
        open = true;
        lits.push(Literal::from_dimacs(v).expect("non-zero"));
    }
    if open {
        return Err(ParseError::UnterminatedClause);
    }
    Ok(out)
}

/// Parses a DIMACS CNF document.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, ParseError> {
    let mut tokens = Tokens::new(text);
    let (line, header) = tokens.header().ok_or_else(|| ParseError::MalformedHeader {
        line: 0,
        reason: "no `p cnf` line".into(),
    })?;
    let malformed = |reason: &str| ParseError::MalformedHeader {
        line,
        reason: reason.to_string(),
    };
    if header.len() != 4 || header[0] != "p" || header[1] != "cnf" {
        return Err(malformed("expected `p cnf <vars> <clauses>`"));
    }
    let num_vars: u32 = header[2]
        .parse()
        .map_err(|_| malformed("bad variable count"))?;
    let expected: usize = header[3]
        .parse()
        .map_err(|_| malformed("bad clause count"))?;

    let clauses: Vec<Clause> = parse_clause_body(&mut tokens, num_vars, |_, _| Ok(()), false)?
        .into_iter()
        .map(|(_, c)| c)
        .collect();
    if clauses.len() != expected {
        return Err(ParseError::ClauseCountMismatch {
            expected,
            found: clauses.len(),
        });
    }
    Ok(CnfFormula { num_vars, clauses })
}

/// Renders `formula` in DIMACS CNF.
pub fn render_dimacs(formula: &CnfFormula) -> String {
    formula.to_dimacs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> Assignment {
        s.parse().unwrap()
    }

    #[test]
    fn parses_two_clause_xor() {
        let f = parse_dimacs("p cnf 2 2\n1 2 0\n-1 -2 0").unwrap();
        assert_eq!(f, CnfFormula::xor_chain(1));
        assert_eq!(f.num_vars(), 2);
        assert_eq!(
            f.clauses()[1].literals(),
            &[Variable(1).negative(), Variable(2).negative()]
        );
    }

    #[test]
    fn parses_empty_conjunction() {
        let f = parse_dimacs("p cnf 1 0\n").unwrap();
        assert_eq!(f.num_vars(), 1);
        assert_eq!(f.num_clauses(), 0);
        assert!(f.evaluate(&a("0")));
        assert!(f.evaluate(&a("1")));
    }

    #[test]
    fn rejects_out_of_range_literal() {
        assert_eq!(
            parse_dimacs("p cnf 2 1\n3 0"),
            Err(ParseError::LiteralOutOfRange {
                line: 2,
                literal: 3,
                num_vars: 2
            })
        );
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_dimacs(""),
            Err(ParseError::MalformedHeader { .. })
        ));
        assert!(matches!(
            parse_dimacs("1 2 0\n"),
            Err(ParseError::MalformedHeader { .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf x 1\n"),
            Err(ParseError::MalformedHeader { .. })
        ));
        assert!(matches!(
            parse_dimacs("p wcnf 2 1\n1 0"),
            Err(ParseError::MalformedHeader { .. })
        ));
        assert_eq!(
            parse_dimacs("p cnf 2 1\n1 2"),
            Err(ParseError::UnterminatedClause)
        );
        assert_eq!(
            parse_dimacs("p cnf 2 2\n1 2 0\n"),
            Err(ParseError::ClauseCountMismatch {
                expected: 2,
                found: 1
            })
        );
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 x 0"),
            Err(ParseError::InvalidToken { .. })
        ));
    }

    #[test]
    fn comments_duplicates_and_multiline_clauses() {
        let f = parse_dimacs("c hello\np cnf 3 2\n1 1 -2\n c mid\n 0 3 -3 0\n").unwrap();
        assert_eq!(f.clauses()[0], Clause::from_dimacs(&[1, -2]));
        // complementary literals stay
        assert_eq!(f.clauses()[1].len(), 2);
        assert!(f.clauses()[1].is_tautology());
    }

    #[test]
    fn renders() {
        assert_eq!(
            CnfFormula::xor_chain(1).to_dimacs(),
            "p cnf 2 2\n1 2 0\n-1 -2 0\n"
        );
        assert_eq!(CnfFormula::default().to_dimacs(), "p cnf 0 0\n");
        let f = CnfFormula::new(1, vec![Clause::empty()]).unwrap();
        assert_eq!(render_dimacs(&f), "p cnf 1 1\n0\n");
        assert_eq!(parse_dimacs("p cnf 1 1\n0\n").unwrap(), f);
    }

    #[test]
    fn evaluates() {
        let f = CnfFormula::xor_chain(1);
        assert!(f.evaluate(&a("01")));
        assert!(f.evaluate(&a("10")));
        assert!(!f.evaluate(&a("11")));
        assert!(!f.evaluate(&a("00")));
        let g = CnfFormula::new(1, vec![Clause::empty()]).unwrap();
        assert!(!g.evaluate(&a("1")));
    }

    #[test]
    fn xor_chain_shape() {
        let f = CnfFormula::xor_chain(2);
        assert_eq!(
            f,
            CnfFormula::from_dimacs_clauses(4, &[&[1, 2], &[-1, -2], &[3, 4], &[-3, -4]])
        );
    }

    #[test]
    fn literal_negation_is_involution() {
        for v in [-3i64, -1, 1, 7] {
            let l = Literal::from_dimacs(v).unwrap();
            assert_eq!(!!l, l);
            assert_eq!((!l).to_dimacs(), -v);
        }
    }

    #[test]
    fn assignment_ordering_is_v1_most_significant() {
        let mut v = [a("10"), a("01"), a("11"), a("00")];
        v.sort();
        let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        assert_eq!(s, ["00", "01", "10", "11"]);
        assert_eq!(Assignment::from_mask(3, 0b101).to_string(), "101");
        assert_eq!(a("011").to_mask(), 0b110);
    }

    #[test]
    fn new_checks_range() {
        assert!(CnfFormula::new(1, vec![Clause::from_dimacs(&[2])]).is_err());
    }
}
