//! Reduced ordered binary decision diagrams.
//!
//! A [`BddManager`] owns a hash-consed node store for a fixed number of
//! variables and a fixed variable order. Level `k` of the order holds one
//! variable; with the identity order, level `k` is variable `k + 1`. Handles
//! ([`NodeRef`]) are canonical within their manager: two handles are equal iff
//! they denote the same boolean function.
//!
//! Besides the usual `apply` machinery the manager provides the operators used
//! for minimal-model reasoning:
//!
//! * [`monotone`](BddManager::monotone): upward closure of the model set,
//! * [`minimal`](BddManager::minimal): the subset-minimal models,
//! * [`extract`](BddManager::extract): variables that take value 1 on some path,
//! * [`lex_min_model`](BddManager::lex_min_model): the lexicographically least model.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::formula::{Assignment, Clause, CnfFormula, Status, Variable};

/// Handle to a node of a particular [`BddManager`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeRef(u32);

impl NodeRef {
    pub const ZERO: NodeRef = NodeRef(0);
    pub const ONE: NodeRef = NodeRef(1);

    pub fn id(self) -> u32 {
        self.0
    }

    pub fn is_terminal(self) -> bool {
        self.0 <= 1
    }
}

/// Level stored on terminals; compares greater than every variable level.
const TERMINAL_LEVEL: u32 = u32::MAX;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct BddNode {
    pub level: u32,
    pub low: NodeRef,
    pub high: NodeRef,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    And,
    Or,
    Xor,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum BddError {
    #[error("level {level} is out of range for {num_vars} variables, or not above its children")]
    LevelOutOfRange { level: u32, num_vars: u32 },
    #[error("node handle {0} does not belong to this manager")]
    ManagerMismatch(u32),
    #[error("variable order must be a permutation of 1..={0}")]
    InvalidOrder(u32),
}

/// Assignment of variables to levels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarOrder {
    level_to_var: Vec<Variable>,
    var_to_level: Vec<u32>,
}

impl VarOrder {
    pub fn identity(num_vars: u32) -> Self {
        VarOrder {
            level_to_var: (1..=num_vars).map(Variable::new).collect(),
            var_to_level: (0..num_vars).collect(),
        }
    }

    /// `vars[k]` is the variable tested at level `k`.
    pub fn new(vars: &[u32]) -> Result<Self, BddError> {
        let n = vars.len() as u32;
        let mut var_to_level = vec![u32::MAX; vars.len()];
        for (level, &v) in vars.iter().enumerate() {
            if v == 0 || v > n || var_to_level[(v - 1) as usize] != u32::MAX {
                return Err(BddError::InvalidOrder(n));
            }
            var_to_level[(v - 1) as usize] = level as u32;
        }
        Ok(VarOrder {
            level_to_var: vars.iter().map(|&v| Variable::new(v)).collect(),
            var_to_level,
        })
    }

    pub fn num_vars(&self) -> u32 {
        self.level_to_var.len() as u32
    }

    pub fn var_at(&self, level: u32) -> Variable {
        self.level_to_var[level as usize]
    }

    pub fn level_of(&self, v: Variable) -> u32 {
        self.var_to_level[v.position()]
    }
}

#[derive(Clone, Debug)]
pub struct BddManager {
    order: VarOrder,
    nodes: Vec<BddNode>,
    unique: HashMap<BddNode, NodeRef>,
    apply_memo: HashMap<(BinOp, NodeRef, NodeRef), NodeRef>,
    not_memo: HashMap<NodeRef, NodeRef>,
    monotone_memo: HashMap<NodeRef, NodeRef>,
    minimal_memo: HashMap<(NodeRef, u32), NodeRef>,
}

impl BddManager {
    pub fn new(num_vars: u32) -> Self {
        Self::with_order(VarOrder::identity(num_vars))
    }

    pub fn with_order(order: VarOrder) -> Self {
        let terminal = |v: u32| BddNode {
            level: TERMINAL_LEVEL,
            low: NodeRef(v),
            high: NodeRef(v),
        };
        BddManager {
            order,
            nodes: vec![terminal(0), terminal(1)],
            unique: HashMap::new(),
            apply_memo: HashMap::new(),
            not_memo: HashMap::new(),
            monotone_memo: HashMap::new(),
            minimal_memo: HashMap::new(),
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.order.num_vars()
    }

    pub fn order(&self) -> &VarOrder {
        &self.order
    }

    /// Nodes allocated so far, terminals included.
    pub fn allocated(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, f: NodeRef) -> BddNode {
        self.nodes[f.0 as usize]
    }

    pub fn level(&self, f: NodeRef) -> u32 {
        self.nodes[f.0 as usize].level
    }

    fn owns(&self, f: NodeRef) -> Result<(), BddError> {
        if (f.0 as usize) < self.nodes.len() {
            Ok(())
        } else {
            Err(BddError::ManagerMismatch(f.0))
        }
    }

    pub fn constant(&self, value: bool) -> NodeRef {
        if value {
            NodeRef::ONE
        } else {
            NodeRef::ZERO
        }
    }

    /// The function `v`.
    pub fn var(&mut self, v: Variable) -> NodeRef {
        let level = self.order.level_of(v);
        self.mk(level, NodeRef::ZERO, NodeRef::ONE)
    }

    /// Checked node constructor.
    pub fn mk_node(
        &mut self,
        level: u32,
        low: NodeRef,
        high: NodeRef,
    ) -> Result<NodeRef, BddError> {
        self.owns(low)?;
        self.owns(high)?;
        if level >= self.num_vars() || self.level(low) <= level || self.level(high) <= level {
            return Err(BddError::LevelOutOfRange {
                level,
                num_vars: self.num_vars(),
            });
        }
        Ok(self.mk(level, low, high))
    }

    fn mk(&mut self, level: u32, low: NodeRef, high: NodeRef) -> NodeRef {
        if low == high {
            return low;
        }
        debug_assert!(level < self.level(low) && level < self.level(high));
        let node = BddNode { level, low, high };
        if let Some(&r) = self.unique.get(&node) {
            return r;
        }
        let r = NodeRef(u32::try_from(self.nodes.len()).expect("node store exhausted"));
        self.nodes.push(node);
        self.unique.insert(node, r);
        r
    }

    /// Cofactors of `f` with respect to `level`; `f` itself when it does not test it.
    fn cofactors(&self, f: NodeRef, level: u32) -> (NodeRef, NodeRef) {
        let n = self.node(f);
        if n.level == level {
            (n.low, n.high)
        } else {
            (f, f)
        }
    }

    pub fn apply(&mut self, op: BinOp, f: NodeRef, g: NodeRef) -> Result<NodeRef, BddError> {
        self.owns(f)?;
        self.owns(g)?;
        Ok(self.apply_rec(op, f, g))
    }

    pub fn and(&mut self, f: NodeRef, g: NodeRef) -> NodeRef {
        self.apply_rec(BinOp::And, f, g)
    }

    pub fn or(&mut self, f: NodeRef, g: NodeRef) -> NodeRef {
        self.apply_rec(BinOp::Or, f, g)
    }

    pub fn xor(&mut self, f: NodeRef, g: NodeRef) -> NodeRef {
        self.apply_rec(BinOp::Xor, f, g)
    }

    fn apply_rec(&mut self, op: BinOp, f: NodeRef, g: NodeRef) -> NodeRef {
        const ZERO: NodeRef = NodeRef::ZERO;
        const ONE: NodeRef = NodeRef::ONE;
        match op {
            BinOp::And => {
                if f == ZERO || g == ZERO {
                    return ZERO;
                }
                if f == ONE || f == g {
                    return g;
                }
                if g == ONE {
                    return f;
                }
            }
            BinOp::Or => {
                if f == ONE || g == ONE {
                    return ONE;
                }
                if f == ZERO || f == g {
                    return g;
                }
                if g == ZERO {
                    return f;
                }
            }
            BinOp::Xor => {
                if f == g {
                    return ZERO;
                }
                if f == ZERO {
                    return g;
                }
                if g == ZERO {
                    return f;
                }
                if f == ONE {
                    return self.negate(g);
                }
                if g == ONE {
                    return self.negate(f);
                }
            }
        }
        // all three operators are commutative
        let key = (op, f.min(g), f.max(g));
        if let Some(&r) = self.apply_memo.get(&key) {
            return r;
        }
        let level = self.level(f).min(self.level(g));
        let (fl, fh) = self.cofactors(f, level);
        let (gl, gh) = self.cofactors(g, level);
        let low = self.apply_rec(op, fl, gl);
        let high = self.apply_rec(op, fh, gh);
        let r = self.mk(level, low, high);
        self.apply_memo.insert(key, r);
        r
    }

    /// Complement of `f`.
    pub fn negate(&mut self, f: NodeRef) -> NodeRef {
        if f == NodeRef::ZERO {
            return NodeRef::ONE;
        }
        if f == NodeRef::ONE {
            return NodeRef::ZERO;
        }
        if let Some(&r) = self.not_memo.get(&f) {
            return r;
        }
        let n = self.node(f);
        let low = self.negate(n.low);
        let high = self.negate(n.high);
        let r = self.mk(n.level, low, high);
        self.not_memo.insert(f, r);
        r
    }

    /// Disjunction of the clause's literals, built bottom-up along the
    /// variable order with at most one node per literal.
    pub fn from_clause(&mut self, c: &Clause) -> NodeRef {
        if c.is_tautology() {
            return NodeRef::ONE;
        }
        let mut lits: Vec<(u32, bool)> = c
            .literals()
            .iter()
            .map(|l| (self.order.level_of(l.var()), l.is_negated()))
            .collect();
        lits.sort_unstable_by_key(|&(level, _)| Reverse(level));
        lits.into_iter()
            .fold(NodeRef::ZERO, |acc, (level, negated)| {
                if negated {
                    self.mk(level, NodeRef::ONE, acc)
                } else {
                    self.mk(level, acc, NodeRef::ONE)
                }
            })
    }

    /// Conjunction of all clauses. Clause BDDs sit in a min-priority queue
    /// keyed on size (ties: earlier insertion first) and the two smallest are
    /// conjoined until one remains.
    pub fn compile_cnf(&mut self, f: &CnfFormula) -> NodeRef {
        let mut queue = BinaryHeap::new();
        let mut seq = 0usize;
        for c in f.clauses() {
            let b = self.from_clause(c);
            if b == NodeRef::ZERO {
                return NodeRef::ZERO;
            }
            queue.push(Reverse((self.size(b), seq, b)));
            seq += 1;
        }
        loop {
            let Some(Reverse((_, _, a))) = queue.pop() else {
                return NodeRef::ONE;
            };
            let Some(Reverse((_, _, b))) = queue.pop() else {
                return a;
            };
            let r = self.and(a, b);
            if r == NodeRef::ZERO {
                return r;
            }
            queue.push(Reverse((self.size(r), seq, r)));
            seq += 1;
        }
    }

    fn reachable(&self, f: NodeRef) -> Vec<NodeRef> {
        let mut seen = HashSet::new();
        let mut stack = vec![f];
        let mut out = Vec::new();
        while let Some(r) = stack.pop() {
            if !seen.insert(r) {
                continue;
            }
            out.push(r);
            if !r.is_terminal() {
                let n = self.node(r);
                stack.push(n.high);
                stack.push(n.low);
            }
        }
        out
    }

    /// Number of distinct nodes reachable from `f`, terminals included.
    pub fn size(&self, f: NodeRef) -> usize {
        self.reachable(f).len()
    }

    pub fn eval(&self, f: NodeRef, a: &Assignment) -> bool {
        let mut r = f;
        while !r.is_terminal() {
            let n = self.node(r);
            r = if a.get(self.order.var_at(n.level)) {
                n.high
            } else {
                n.low
            };
        }
        r == NodeRef::ONE
    }

    /// Number of satisfying assignments over all `num_vars` variables.
    pub fn sat_count(&self, f: NodeRef) -> u128 {
        fn go(m: &BddManager, f: NodeRef, memo: &mut HashMap<NodeRef, u128>) -> u128 {
            // count over the variables from f's level down
            if f == NodeRef::ZERO {
                return 0;
            }
            if f == NodeRef::ONE {
                return 1;
            }
            if let Some(&c) = memo.get(&f) {
                return c;
            }
            let n = m.node(f);
            let gap = |child: NodeRef| {
                let below = m.level(child).min(m.num_vars());
                below - n.level - 1
            };
            let c = (go(m, n.low, memo) << gap(n.low)) + (go(m, n.high, memo) << gap(n.high));
            memo.insert(f, c);
            c
        }
        let top = self.level(f).min(self.num_vars());
        go(self, f, &mut HashMap::new()) << top
    }

    /// Every model of `f` over all `num_vars` variables, in lexicographic
    /// order along the variable order. Exponential in general.
    pub fn models(&self, f: NodeRef) -> Vec<Assignment> {
        fn go(
            m: &BddManager,
            level: u32,
            r: NodeRef,
            cur: &mut Assignment,
            out: &mut Vec<Assignment>,
        ) {
            if r == NodeRef::ZERO {
                return;
            }
            if level == m.num_vars() {
                out.push(cur.clone());
                return;
            }
            let n = m.node(r);
            let (low, high) = if n.level == level {
                (n.low, n.high)
            } else {
                (r, r)
            };
            let v = m.order.var_at(level);
            go(m, level + 1, low, cur, out);
            cur.set(v, true);
            go(m, level + 1, high, cur, out);
            cur.set(v, false);
        }
        let mut out = Vec::new();
        go(
            self,
            0,
            f,
            &mut Assignment::zeros(self.num_vars()),
            &mut out,
        );
        out
    }

    /// Lexicographically least model (first variable of the order most
    /// significant, 0 before 1); variables not tested on the path are 0.
    pub fn lex_min_model(&self, f: NodeRef) -> Option<Assignment> {
        if f == NodeRef::ZERO {
            return None;
        }
        let mut model = Assignment::zeros(self.num_vars());
        let mut r = f;
        while !r.is_terminal() {
            let n = self.node(r);
            if n.low != NodeRef::ZERO {
                r = n.low;
            } else {
                model.set(self.order.var_at(n.level), true);
                r = n.high;
            }
        }
        debug_assert_eq!(r, NodeRef::ONE);
        Some(model)
    }

    /// Upward closure: `monotone(v ? h : l) = (v and monotone(h)) or monotone(l)`.
    pub fn monotone(&mut self, f: NodeRef) -> NodeRef {
        if f.is_terminal() {
            return f;
        }
        if let Some(&r) = self.monotone_memo.get(&f) {
            return r;
        }
        let n = self.node(f);
        let low = self.monotone(n.low);
        let high = self.monotone(n.high);
        let high = self.or(high, low);
        let r = self.mk(n.level, low, high);
        self.monotone_memo.insert(f, r);
        r
    }

    /// BDD whose models are exactly the subset-minimal models of `f` over
    /// all `num_vars` variables.
    pub fn minimal(&mut self, f: NodeRef) -> NodeRef {
        self.minimal_at(f, 0)
    }

    fn minimal_at(&mut self, f: NodeRef, level: u32) -> NodeRef {
        if level >= self.num_vars() {
            debug_assert!(f.is_terminal());
            return f;
        }
        if f == NodeRef::ZERO {
            return f;
        }
        if let Some(&r) = self.minimal_memo.get(&(f, level)) {
            return r;
        }
        let n = self.node(f);
        let r = if n.level > level {
            // f does not depend on this variable, so a minimal model has it at 0
            let low = self.minimal_at(f, level + 1);
            self.mk(level, low, NodeRef::ZERO)
        } else {
            // v = 1 is minimal iff the rest is minimal in h and no smaller
            // assignment satisfies the v = 0 branch
            let low = self.minimal_at(n.low, level + 1);
            let high_min = self.minimal_at(n.high, level + 1);
            let low_up = self.monotone(n.low);
            let blocked = self.negate(low_up);
            let high = self.and(high_min, blocked);
            self.mk(level, low, high)
        };
        self.minimal_memo.insert((f, level), r);
        r
    }

    /// Variables labelling a reachable node whose high branch is not ZERO.
    /// On a [`minimal`](Self::minimal) image these are exactly the variables
    /// valued 1 in some minimal model.
    pub fn extract(&self, f: NodeRef) -> BTreeSet<Variable> {
        self.reachable(f)
            .into_iter()
            .filter(|r| !r.is_terminal())
            .map(|r| self.node(r))
            .filter(|n| n.high != NodeRef::ZERO)
            .map(|n| self.order.var_at(n.level))
            .collect()
    }

    /// Variables valued 0 in every minimal model of the formula.
    pub fn dispensable(&mut self, f: &CnfFormula) -> (Status, BTreeSet<Variable>) {
        let root = self.compile_cnf(f);
        self.dispensable_from_root(f, root)
    }

    pub(crate) fn dispensable_from_root(
        &mut self,
        f: &CnfFormula,
        root: NodeRef,
    ) -> (Status, BTreeSet<Variable>) {
        if root == NodeRef::ZERO {
            return (Status::Unsat, f.variables().collect());
        }
        let min = self.minimal(root);
        let used = self.extract(min);
        (
            Status::Sat,
            f.variables().filter(|v| !used.contains(v)).collect(),
        )
    }

    /// Line-oriented dump, one `node <id> <level> <lowId> <highId>` line per
    /// reachable internal node in ascending id order. Terminals are ids 0 and 1.
    pub fn dump(&self, f: NodeRef) -> String {
        let mut ids: Vec<NodeRef> = self
            .reachable(f)
            .into_iter()
            .filter(|r| !r.is_terminal())
            .collect();
        ids.sort();
        let mut out = String::new();
        for r in ids {
            let n = self.node(r);
            writeln!(out, "node {} {} {} {}", r.0, n.level, n.low.0, n.high.0).unwrap();
        }
        out
    }
}

/// Dispensable variables via the minimal-model BDD, identity order.
pub fn dispensable_via_bdd(f: &CnfFormula) -> (Status, BTreeSet<Variable>) {
    BddManager::new(f.num_vars()).dispensable(f)
}
