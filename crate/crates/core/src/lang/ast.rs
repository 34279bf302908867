use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::Pos;
use crate::name::{Loc, Name, Reg, Tid, Val};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

/// Expressions. Program expressions only use `Val`, `Reg` and the operators;
/// `Loc` and `IsR` leaves appear inside the brackets of interval assertions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Val(Val),
    Reg(Reg),
    /// Value of a location in the current potential store.
    Loc(Loc),
    /// `R(x)`: the RMW flag of `x` in the current store is `R`.
    IsR(Loc),
    Un(UnOp, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

/// What an expression can look up.
pub trait Env {
    fn reg(&self, r: Reg) -> Val;
    fn loc(&self, _x: Loc) -> Val {
        0
    }
    fn is_r(&self, _x: Loc) -> bool {
        false
    }
}

pub fn truth(b: bool) -> Val {
    b as Val
}

impl Expr {
    pub fn tt() -> Expr {
        Expr::Val(1)
    }
    pub fn ff() -> Expr {
        Expr::Val(0)
    }
    pub fn reg(r: &str) -> Expr {
        Expr::Reg(Name::new(r))
    }
    pub fn loc(x: &str) -> Expr {
        Expr::Loc(Name::new(x))
    }
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }
    pub fn eq(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Eq, a, b)
    }
    pub fn ne(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Ne, a, b)
    }
    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::And, a, b)
    }
    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Or, a, b)
    }
    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Expr) -> Expr {
        Expr::Un(UnOp::Not, Box::new(a))
    }

    pub fn eval(&self, env: &impl Env) -> Val {
        match self {
            Expr::Val(v) => *v,
            Expr::Reg(r) => env.reg(*r),
            Expr::Loc(x) => env.loc(*x),
            Expr::IsR(x) => truth(env.is_r(*x)),
            Expr::Un(UnOp::Not, e) => truth(e.eval(env) == 0),
            Expr::Un(UnOp::Neg, e) => e.eval(env).wrapping_neg(),
            Expr::Bin(op, a, b) => {
                let x = a.eval(env);
                // Short-circuit keeps evaluation cheap; results are the same.
                match op {
                    BinOp::And if x == 0 => return 0,
                    BinOp::Or if x != 0 => return 1,
                    _ => {}
                }
                let y = b.eval(env);
                match op {
                    BinOp::Add => x.wrapping_add(y),
                    BinOp::Sub => x.wrapping_sub(y),
                    BinOp::Mul => x.wrapping_mul(y),
                    BinOp::Eq => truth(x == y),
                    BinOp::Ne => truth(x != y),
                    BinOp::Lt => truth(x < y),
                    BinOp::Le => truth(x <= y),
                    BinOp::Gt => truth(x > y),
                    BinOp::Ge => truth(x >= y),
                    BinOp::And | BinOp::Or => truth(y != 0),
                }
            }
        }
    }

    pub fn holds(&self, env: &impl Env) -> bool {
        self.eval(env) != 0
    }

    /// No location or flag leaves.
    pub fn is_simple(&self) -> bool {
        match self {
            Expr::Val(_) | Expr::Reg(_) => true,
            Expr::Loc(_) | Expr::IsR(_) => false,
            Expr::Un(_, e) => e.is_simple(),
            Expr::Bin(_, a, b) => a.is_simple() && b.is_simple(),
        }
    }

    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Un(_, e) => e.visit(f),
            Expr::Bin(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    pub fn regs(&self, out: &mut BTreeSet<Reg>) {
        self.visit(&mut |e| {
            if let Expr::Reg(r) = e {
                out.insert(*r);
            }
        });
    }

    pub fn locs(&self, out: &mut BTreeSet<Loc>) {
        self.visit(&mut |e| {
            if let Expr::Loc(x) | Expr::IsR(x) = e {
                out.insert(*x);
            }
        });
    }

    pub fn mentions_reg(&self, r: Reg) -> bool {
        let mut hit = false;
        self.visit(&mut |e| hit |= *e == Expr::Reg(r));
        hit
    }

    pub fn mentions_loc(&self, x: Loc) -> bool {
        let mut hit = false;
        self.visit(&mut |e| hit |= matches!(e, Expr::Loc(y) | Expr::IsR(y) if *y == x));
        hit
    }

    pub fn has_flag_atom(&self, x: Loc) -> bool {
        let mut hit = false;
        self.visit(&mut |e| hit |= *e == Expr::IsR(x));
        hit
    }

    pub fn literals(&self, out: &mut BTreeSet<Val>) {
        self.visit(&mut |e| {
            if let Expr::Val(v) = e {
                out.insert(*v);
            }
        });
    }

    /// Replace every leaf matching `hit` by `with`.
    pub fn replace(&self, hit: &impl Fn(&Expr) -> bool, with: &Expr) -> Expr {
        if hit(self) {
            return with.clone();
        }
        match self {
            Expr::Un(op, e) => Expr::Un(*op, Box::new(e.replace(hit, with))),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.replace(hit, with)), Box::new(b.replace(hit, with))),
            other => other.clone(),
        }
    }

    pub fn subst_reg(&self, r: Reg, with: &Expr) -> Expr {
        self.replace(&|e| *e == Expr::Reg(r), with)
    }

    /// Flatten a tree of `op` into its operands.
    pub fn flatten(&self, op: BinOp) -> Vec<&Expr> {
        let mut out = Vec::new();
        fn go<'a>(e: &'a Expr, op: BinOp, out: &mut Vec<&'a Expr>) {
            match e {
                Expr::Bin(o, a, b) if *o == op => {
                    go(a, op, out);
                    go(b, op, out);
                }
                _ => out.push(e),
            }
        }
        go(self, op, &mut out);
        out
    }

    pub fn conj(parts: Vec<Expr>) -> Expr {
        parts.into_iter().reduce(Expr::and).unwrap_or(Expr::tt())
    }
}

/// Primitive commands.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prim {
    Assign(Reg, Expr),
    Store(Loc, Expr),
    Load(Reg, Loc),
    Swap(Loc, Expr),
}

impl Prim {
    pub fn written_loc(&self) -> Option<Loc> {
        match self {
            Prim::Store(x, _) | Prim::Swap(x, _) => Some(*x),
            _ => None,
        }
    }
    pub fn accessed_loc(&self) -> Option<Loc> {
        match self {
            Prim::Store(x, _) | Prim::Swap(x, _) | Prim::Load(_, x) => Some(*x),
            Prim::Assign(..) => None,
        }
    }
}

/// Instrumented primitive command `<| c, r1 := e1, ... |>`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Instr {
    pub prim: Prim,
    pub aux: Vec<(Reg, Expr)>,
}

impl Instr {
    pub fn plain(prim: Prim) -> Instr {
        Instr { prim, aux: Vec::new() }
    }

    pub fn is_memory(&self) -> bool {
        self.prim.accessed_loc().is_some()
    }

    /// Registers written by the command, primitive part first.
    pub fn written_regs(&self) -> Vec<Reg> {
        let mut out = Vec::new();
        if let Prim::Assign(r, _) | Prim::Load(r, _) = &self.prim {
            out.push(*r);
        }
        out.extend(self.aux.iter().map(|(r, _)| *r));
        out
    }

    pub fn regs(&self, out: &mut BTreeSet<Reg>) {
        match &self.prim {
            Prim::Assign(r, e) => {
                out.insert(*r);
                e.regs(out);
            }
            Prim::Store(_, e) | Prim::Swap(_, e) => e.regs(out),
            Prim::Load(r, _) => {
                out.insert(*r);
            }
        }
        for (r, e) in &self.aux {
            out.insert(*r);
            e.regs(out);
        }
    }

    pub fn literals(&self, out: &mut BTreeSet<Val>) {
        if let Prim::Assign(_, e) | Prim::Store(_, e) | Prim::Swap(_, e) = &self.prim {
            e.literals(out);
        }
        for (_, e) in &self.aux {
            e.literals(out);
        }
    }
}

/// Commands. Children are shared so that stepping only rebuilds the spine.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cmd {
    Skip,
    Instr(Instr),
    Seq(Arc<Cmd>, Arc<Cmd>),
    If(Expr, Arc<Cmd>, Arc<Cmd>),
    While(Expr, Arc<Cmd>),
    Par(Tid, Arc<Cmd>, Tid, Arc<Cmd>),
    /// Marker left by loop unrolling where the bound was hit. It has no steps.
    Cutoff,
}

impl Cmd {
    pub fn seq(a: Cmd, b: Cmd) -> Cmd {
        Cmd::Seq(Arc::new(a), Arc::new(b))
    }

    /// Right-nested sequence; the empty list is `skip`.
    pub fn seq_all(mut cmds: Vec<Cmd>) -> Cmd {
        let mut acc = match cmds.pop() {
            Some(c) => c,
            None => return Cmd::Skip,
        };
        while let Some(c) = cmds.pop() {
            acc = Cmd::seq(c, acc);
        }
        acc
    }

    pub fn instr(p: Prim) -> Cmd {
        Cmd::Instr(Instr::plain(p))
    }

    pub fn if_(e: Expr, a: Cmd, b: Cmd) -> Cmd {
        Cmd::If(e, Arc::new(a), Arc::new(b))
    }

    pub fn while_(e: Expr, body: Cmd) -> Cmd {
        Cmd::While(e, Arc::new(body))
    }

    pub fn par(t1: Tid, c1: Cmd, t2: Tid, c2: Cmd) -> Cmd {
        Cmd::Par(t1, Arc::new(c1), t2, Arc::new(c2))
    }

    pub fn visit_instrs(&self, f: &mut impl FnMut(&Instr)) {
        match self {
            Cmd::Instr(i) => f(i),
            Cmd::Seq(a, b) | Cmd::Par(_, a, _, b) | Cmd::If(_, a, b) => {
                a.visit_instrs(f);
                b.visit_instrs(f);
            }
            Cmd::While(_, b) => b.visit_instrs(f),
            Cmd::Skip | Cmd::Cutoff => {}
        }
    }

    pub fn visit_conds(&self, f: &mut impl FnMut(&Expr)) {
        match self {
            Cmd::If(e, a, b) => {
                f(e);
                a.visit_conds(f);
                b.visit_conds(f);
            }
            Cmd::While(e, b) => {
                f(e);
                b.visit_conds(f);
            }
            Cmd::Seq(a, b) | Cmd::Par(_, a, _, b) => {
                a.visit_conds(f);
                b.visit_conds(f);
            }
            _ => {}
        }
    }

    pub fn has_loops(&self) -> bool {
        match self {
            Cmd::While(..) => true,
            Cmd::Seq(a, b) | Cmd::Par(_, a, _, b) | Cmd::If(_, a, b) => a.has_loops() || b.has_loops(),
            _ => false,
        }
    }

    pub fn regs(&self) -> BTreeSet<Reg> {
        let mut out = BTreeSet::new();
        self.visit_instrs(&mut |i| i.regs(&mut out));
        self.visit_conds(&mut |e| e.regs(&mut out));
        out
    }

    pub fn locs(&self) -> BTreeSet<Loc> {
        let mut out = BTreeSet::new();
        self.visit_instrs(&mut |i| {
            if let Some(x) = i.prim.accessed_loc() {
                out.insert(x);
            }
        });
        out
    }

    pub fn literals(&self, out: &mut BTreeSet<Val>) {
        self.visit_instrs(&mut |i| i.literals(out));
        self.visit_conds(&mut |e| e.literals(out));
    }

    /// Number of store and swap instructions, counting loop bodies once.
    pub fn write_count(&self) -> usize {
        let mut n = 0;
        self.visit_instrs(&mut |i| n += i.prim.written_loc().is_some() as usize);
        n
    }

    pub fn is_skip(&self) -> bool {
        matches!(self, Cmd::Skip)
    }
}

/// Command pool: a non-empty finite map from thread ids to commands.
pub type CommandPool = BTreeMap<Tid, Arc<Cmd>>;

/// Interval assertions over a (possibly empty) sequence of stores.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Interval {
    /// `[E]`: `E` holds in every store.
    Atom(Expr),
    Chop(Box<Interval>, Box<Interval>),
    And(Box<Interval>, Box<Interval>),
    Or(Box<Interval>, Box<Interval>),
}

impl Interval {
    pub fn atom(e: Expr) -> Interval {
        Interval::Atom(e)
    }
    pub fn chop(a: Interval, b: Interval) -> Interval {
        Interval::Chop(Box::new(a), Box::new(b))
    }
    pub fn and(a: Interval, b: Interval) -> Interval {
        Interval::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Interval, b: Interval) -> Interval {
        Interval::Or(Box::new(a), Box::new(b))
    }

    /// `[x = v1] ; ... ; [x = vn]`, left-nested.
    pub fn values(x: Loc, vs: &[Val]) -> Interval {
        vs.iter()
            .map(|v| Interval::Atom(Expr::eq(Expr::Loc(x), Expr::Val(*v))))
            .reduce(Interval::chop)
            .unwrap_or(Interval::Atom(Expr::tt()))
    }

    pub fn visit_exprs(&self, f: &mut impl FnMut(&Expr)) {
        match self {
            Interval::Atom(e) => f(e),
            Interval::Chop(a, b) | Interval::And(a, b) | Interval::Or(a, b) => {
                a.visit_exprs(f);
                b.visit_exprs(f);
            }
        }
    }

    pub fn map_exprs(&self, f: &impl Fn(&Expr) -> Expr) -> Interval {
        match self {
            Interval::Atom(e) => Interval::Atom(f(e)),
            Interval::Chop(a, b) => Interval::chop(a.map_exprs(f), b.map_exprs(f)),
            Interval::And(a, b) => Interval::and(a.map_exprs(f), b.map_exprs(f)),
            Interval::Or(a, b) => Interval::or(a.map_exprs(f), b.map_exprs(f)),
        }
    }

    pub fn mentions_loc(&self, x: Loc) -> bool {
        let mut hit = false;
        self.visit_exprs(&mut |e| hit |= e.mentions_loc(x));
        hit
    }

    /// Whether `R(x)` occurs anywhere in the interval.
    pub fn has_rmw_atom(&self, x: Loc) -> bool {
        let mut hit = false;
        self.visit_exprs(&mut |e| hit |= e.has_flag_atom(x));
        hit
    }

    /// Locations whose flag is observed through `R(x)`.
    pub fn flag_locs(&self, out: &mut BTreeSet<Loc>) {
        self.visit_exprs(&mut |e| {
            e.visit(&mut |l| {
                if let Expr::IsR(x) = l {
                    out.insert(*x);
                }
            })
        });
    }
}

/// Assertions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Assertion {
    /// `pot(τ, I)`, written `τ |= I`.
    Pot(Tid, Interval),
    Expr(Expr),
    And(Box<Assertion>, Box<Assertion>),
    Or(Box<Assertion>, Box<Assertion>),
}

/// Free variables of assertions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Reg(Reg),
    Loc(Loc),
    Tid(Tid),
}

impl Assertion {
    pub fn tt() -> Assertion {
        Assertion::Expr(Expr::tt())
    }
    pub fn ff() -> Assertion {
        Assertion::Expr(Expr::ff())
    }
    pub fn pot(t: &str, i: Interval) -> Assertion {
        Assertion::Pot(Name::new(t), i)
    }
    pub fn and(a: Assertion, b: Assertion) -> Assertion {
        Assertion::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Assertion, b: Assertion) -> Assertion {
        Assertion::Or(Box::new(a), Box::new(b))
    }
    /// `e => φ`, sugar for `¬e ∨ φ`.
    pub fn implies(e: Expr, phi: Assertion) -> Assertion {
        Assertion::or(Assertion::Expr(Expr::not(e)), phi)
    }
    pub fn conj(parts: Vec<Assertion>) -> Assertion {
        parts.into_iter().reduce(Assertion::and).unwrap_or(Assertion::tt())
    }
    pub fn disj(parts: Vec<Assertion>) -> Assertion {
        parts.into_iter().reduce(Assertion::or).unwrap_or(Assertion::ff())
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Assertion::Expr(Expr::Val(v)) if *v != 0)
    }

    pub fn conjuncts(&self) -> Vec<&Assertion> {
        let mut out = Vec::new();
        fn go<'a>(a: &'a Assertion, out: &mut Vec<&'a Assertion>) {
            match a {
                Assertion::And(x, y) => {
                    go(x, out);
                    go(y, out);
                }
                _ => out.push(a),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn disjuncts(&self) -> Vec<&Assertion> {
        let mut out = Vec::new();
        fn go<'a>(a: &'a Assertion, out: &mut Vec<&'a Assertion>) {
            match a {
                Assertion::Or(x, y) => {
                    go(x, out);
                    go(y, out);
                }
                _ => out.push(a),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn visit_exprs(&self, f: &mut impl FnMut(&Expr)) {
        match self {
            Assertion::Pot(_, i) => i.visit_exprs(f),
            Assertion::Expr(e) => f(e),
            Assertion::And(a, b) | Assertion::Or(a, b) => {
                a.visit_exprs(f);
                b.visit_exprs(f);
            }
        }
    }

    pub fn visit_pots(&self, f: &mut impl FnMut(Tid, &Interval)) {
        match self {
            Assertion::Pot(t, i) => f(*t, i),
            Assertion::Expr(_) => {}
            Assertion::And(a, b) | Assertion::Or(a, b) => {
                a.visit_pots(f);
                b.visit_pots(f);
            }
        }
    }

    pub fn fv(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit_exprs(&mut |e| {
            e.visit(&mut |l| match l {
                Expr::Reg(r) => {
                    out.insert(Var::Reg(*r));
                }
                Expr::Loc(x) | Expr::IsR(x) => {
                    out.insert(Var::Loc(*x));
                }
                _ => {}
            })
        });
        self.visit_pots(&mut |t, _| {
            out.insert(Var::Tid(t));
        });
        out
    }

    pub fn regs(&self) -> BTreeSet<Reg> {
        let mut out = BTreeSet::new();
        self.visit_exprs(&mut |e| e.regs(&mut out));
        out
    }

    pub fn locs(&self) -> BTreeSet<Loc> {
        let mut out = BTreeSet::new();
        self.visit_exprs(&mut |e| e.locs(&mut out));
        out
    }

    pub fn tids(&self) -> BTreeSet<Tid> {
        let mut out = BTreeSet::new();
        self.visit_pots(&mut |t, _| {
            out.insert(t);
        });
        out
    }

    pub fn flag_locs(&self) -> BTreeSet<Loc> {
        let mut out = BTreeSet::new();
        self.visit_pots(&mut |_, i| i.flag_locs(&mut out));
        out
    }

    pub fn literals(&self, out: &mut BTreeSet<Val>) {
        self.visit_exprs(&mut |e| e.literals(out));
    }

    pub fn has_pot(&self) -> bool {
        let mut hit = false;
        self.visit_pots(&mut |_, _| hit = true);
        hit
    }

    /// Apply `f` to every expression, inside intervals as well.
    pub fn map_exprs(&self, f: &impl Fn(&Expr) -> Expr) -> Assertion {
        match self {
            Assertion::Pot(t, i) => Assertion::Pot(*t, i.map_exprs(f)),
            Assertion::Expr(e) => Assertion::Expr(f(e)),
            Assertion::And(a, b) => Assertion::and(a.map_exprs(f), b.map_exprs(f)),
            Assertion::Or(a, b) => Assertion::or(a.map_exprs(f), b.map_exprs(f)),
        }
    }

    /// `φ[r/e]`: replace register `r` by `e` everywhere.
    pub fn subst_reg(&self, r: Reg, e: &Expr) -> Assertion {
        self.map_exprs(&|x| x.subst_reg(r, e))
    }

    pub fn map_tids(&self, f: &impl Fn(Tid) -> Tid) -> Assertion {
        match self {
            Assertion::Pot(t, i) => Assertion::Pot(f(*t), i.clone()),
            Assertion::Expr(e) => Assertion::Expr(e.clone()),
            Assertion::And(a, b) => Assertion::and(a.map_tids(f), b.map_tids(f)),
            Assertion::Or(a, b) => Assertion::or(a.map_tids(f), b.map_tids(f)),
        }
    }
}

/// Which identifiers are locations and which are registers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Classes {
    pub locs: BTreeSet<Loc>,
    pub regs: BTreeSet<Reg>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClauseKind {
    Allow,
    Forbid,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub kind: ClauseKind,
    pub expr: Expr,
}

/// A program plus initial values and outcome clauses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LitmusSpec {
    pub name: Option<String>,
    pub pool: CommandPool,
    /// Initial values; locations not listed start at 0.
    pub init: BTreeMap<Loc, Val>,
    pub clauses: Vec<Clause>,
    pub classes: Classes,
}

impl LitmusSpec {
    pub fn from_pool(pool: CommandPool) -> LitmusSpec {
        let mut classes = Classes::default();
        for c in pool.values() {
            classes.locs.extend(c.locs());
            classes.regs.extend(c.regs());
        }
        LitmusSpec { name: None, pool, init: BTreeMap::new(), clauses: Vec::new(), classes }
    }

    pub fn locs(&self) -> Vec<Loc> {
        self.classes.locs.iter().copied().collect()
    }

    /// Registers mentioned by the clauses, or every register when there are none.
    pub fn observed_regs(&self) -> Vec<Reg> {
        let mut out = BTreeSet::new();
        for c in &self.clauses {
            c.expr.regs(&mut out);
        }
        if out.is_empty() {
            out = self.classes.regs.clone();
        }
        out.into_iter().collect()
    }

    pub fn init_of(&self, x: Loc) -> Val {
        self.init.get(&x).copied().unwrap_or(0)
    }

    /// Program literals together with initial values and 0.
    pub fn literals(&self) -> BTreeSet<Val> {
        let mut out = BTreeSet::from([0]);
        for c in self.pool.values() {
            c.literals(&mut out);
        }
        out.extend(self.init.values().copied());
        out
    }
}

/// Statements of an annotated thread body.
#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Skip,
    Instr(Instr),
    If(Expr, Block, Block),
    While(Expr, Block),
    DoUntil(Block, Expr),
    /// Nested parallel composition (litmus files only).
    Par(Tid, Block, Tid, Block),
    /// Parenthesized sequence.
    Group(Block),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Assert(Assertion, Pos),
    Stmt(Stmt, Pos),
}

pub type Block = Vec<Item>;

/// An annotated program with optional rely/guarantee overrides.
#[derive(Clone, Debug, PartialEq)]
pub struct Outline {
    pub name: Option<String>,
    /// Thread that forks the annotated threads and joins them at the end.
    pub parent: Tid,
    pub aux: BTreeSet<Reg>,
    pub pre: Assertion,
    pub post: Assertion,
    pub threads: Vec<(Tid, Block)>,
    pub rely: BTreeMap<Tid, Vec<Assertion>>,
    pub guarantee: BTreeMap<Tid, Vec<(Assertion, Instr)>>,
    pub init: BTreeMap<Loc, Val>,
    pub classes: Classes,
}

/// Strip the annotations from a block.
pub fn block_cmd(b: &Block) -> Cmd {
    let mut cmds = Vec::new();
    for item in b {
        if let Item::Stmt(s, _) = item {
            cmds.push(stmt_cmd(s));
        }
    }
    Cmd::seq_all(cmds)
}

pub fn stmt_cmd(s: &Stmt) -> Cmd {
    match s {
        Stmt::Skip => Cmd::Skip,
        Stmt::Instr(i) => Cmd::Instr(i.clone()),
        Stmt::If(e, a, b) => Cmd::if_(e.clone(), block_cmd(a), block_cmd(b)),
        Stmt::While(e, b) => Cmd::while_(e.clone(), block_cmd(b)),
        Stmt::DoUntil(b, e) => super::desugar_do_until(block_cmd(b), e.clone()),
        Stmt::Par(t1, a, t2, b) => Cmd::par(*t1, block_cmd(a), *t2, block_cmd(b)),
        Stmt::Group(b) => block_cmd(b),
    }
}

impl Outline {
    pub fn pool(&self) -> CommandPool {
        self.threads.iter().map(|(t, b)| (*t, Arc::new(block_cmd(b)))).collect()
    }

    pub fn litmus(&self) -> LitmusSpec {
        LitmusSpec {
            name: self.name.clone(),
            pool: self.pool(),
            init: self.init.clone(),
            clauses: Vec::new(),
            classes: self.classes.clone(),
        }
    }
}
