//! Small-step semantics of primitive commands, commands and command pools.
//!
//! Steps are memory-agnostic: loads and swaps produce one successor per
//! candidate read value, and the memory layer decides which are feasible.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::lang::{Cmd, CommandPool, Env, Expr, Instr, Prim};
use crate::name::{Loc, Reg, Tid, Val};

/// Transition labels. `None` in an `Option<Label>` is the silent step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    R(Loc, Val),
    W(Loc, Val),
    U(Loc, Val, Val),
    Fork(Tid, Tid),
    Join(Tid, Tid),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::R(x, v) => write!(f, "R({x},{v})"),
            Label::W(x, v) => write!(f, "W({x},{v})"),
            Label::U(x, r, w) => write!(f, "U({x},{r},{w})"),
            Label::Fork(a, b) => write!(f, "FORK({a},{b})"),
            Label::Join(a, b) => write!(f, "JOIN({a},{b})"),
        }
    }
}

/// Register store. Registers not listed hold 0; zero entries are never stored,
/// so equal stores compare equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegStore(Vec<(Reg, Val)>);

impl RegStore {
    pub fn new() -> RegStore {
        RegStore(Vec::new())
    }

    pub fn get(&self, r: Reg) -> Val {
        match self.0.binary_search_by(|(k, _)| k.cmp(&r)) {
            Ok(i) => self.0[i].1,
            Err(_) => 0,
        }
    }

    pub fn set(&mut self, r: Reg, v: Val) {
        match self.0.binary_search_by(|(k, _)| k.cmp(&r)) {
            Ok(i) if v == 0 => {
                self.0.remove(i);
            }
            Ok(i) => self.0[i].1 = v,
            Err(_) if v == 0 => {}
            Err(i) => self.0.insert(i, (r, v)),
        }
    }

    pub fn with(&self, r: Reg, v: Val) -> RegStore {
        let mut g = self.clone();
        g.set(r, v);
        g
    }

    /// Non-zero entries in register order.
    pub fn iter(&self) -> impl Iterator<Item = (Reg, Val)> + '_ {
        self.0.iter().copied()
    }

    /// Values of `regs`, in the given order.
    pub fn project(&self, regs: &[Reg]) -> Vec<(Reg, Val)> {
        regs.iter().map(|r| (*r, self.get(*r))).collect()
    }

    /// Keep only the registers in `keep`.
    pub fn restrict(&self, keep: &BTreeSet<Reg>) -> RegStore {
        RegStore(self.0.iter().filter(|(r, _)| keep.contains(r)).copied().collect())
    }
}

impl FromIterator<(Reg, Val)> for RegStore {
    fn from_iter<I: IntoIterator<Item = (Reg, Val)>>(it: I) -> RegStore {
        let mut g = RegStore::new();
        for (r, v) in it {
            g.set(r, v);
        }
        g
    }
}

impl Env for RegStore {
    fn reg(&self, r: Reg) -> Val {
        self.get(r)
    }
}

impl fmt::Display for RegStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (r, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}={v}")?;
        }
        write!(f, "}}")
    }
}

pub fn eval_expr(g: &RegStore, e: &Expr) -> Val {
    e.eval(g)
}

/// Apply the instrumentation assignments in order.
pub fn apply_aux(i: &Instr, mut g: RegStore) -> RegStore {
    for (r, e) in &i.aux {
        let v = e.eval(&g);
        g.set(*r, v);
    }
    g
}

/// Effect of an instruction once the memory has supplied the read value
/// (ignored by stores and assignments).
pub fn instr_effect(i: &Instr, g: &RegStore, read: Val) -> (Option<Label>, RegStore) {
    let (label, g0) = match &i.prim {
        Prim::Assign(r, e) => (None, g.with(*r, e.eval(g))),
        Prim::Store(x, e) => (Some(Label::W(*x, e.eval(g))), g.clone()),
        Prim::Load(r, x) => (Some(Label::R(*x, read)), g.with(*r, read)),
        Prim::Swap(x, e) => (Some(Label::U(*x, read, e.eval(g))), g.clone()),
    };
    (label, apply_aux(i, g0))
}

/// Steps of an instrumented primitive command. Reads range over `values`.
pub fn prim_step(i: &Instr, g: &RegStore, values: &[Val]) -> Vec<(Option<Label>, RegStore)> {
    match i.prim {
        Prim::Load(..) | Prim::Swap(..) => values.iter().map(|v| instr_effect(i, g, *v)).collect(),
        _ => vec![instr_effect(i, g, 0)],
    }
}

/// The sub-command that performs the next step of `c`: follow the left spine
/// of sequences until reaching something that is not `C1 ; C2` with `C1 ≠ skip`.
pub fn redex(c: &Cmd) -> &Cmd {
    match c {
        Cmd::Seq(a, _) if !a.is_skip() => redex(a),
        _ => c,
    }
}

/// Replace the redex of `c` by `new`.
pub fn plug(c: &Arc<Cmd>, new: Arc<Cmd>) -> Arc<Cmd> {
    match &**c {
        Cmd::Seq(a, b) if !a.is_skip() => Arc::new(Cmd::Seq(plug(a, new), b.clone())),
        _ => new,
    }
}

/// Silent control step of the redex, if it is one.
pub fn control_step(c: &Arc<Cmd>, g: &RegStore) -> Option<Arc<Cmd>> {
    let next = match redex(c) {
        Cmd::Seq(_, b) => b.clone(),
        Cmd::If(e, a, b) => {
            if e.holds(g) {
                a.clone()
            } else {
                b.clone()
            }
        }
        Cmd::While(e, body) => {
            let again = Arc::new(Cmd::Seq(body.clone(), Arc::new(redex(c).clone())));
            Arc::new(Cmd::If(e.clone(), again, Arc::new(Cmd::Skip)))
        }
        _ => return None,
    };
    Some(plug(c, next))
}

/// Command steps.
pub fn cmd_step(c: &Arc<Cmd>, g: &RegStore, values: &[Val]) -> Vec<(Option<Label>, Arc<Cmd>, RegStore)> {
    if let Some(c2) = control_step(c, g) {
        return vec![(None, c2, g.clone())];
    }
    match redex(c) {
        Cmd::Instr(i) => prim_step(i, g, values)
            .into_iter()
            .map(|(l, g2)| (l, plug(c, Arc::new(Cmd::Skip)), g2))
            .collect(),
        _ => Vec::new(),
    }
}

/// What a thread can do next in a pool.
#[derive(Clone, Debug)]
pub enum ThreadMove<'a> {
    /// Silent control step to the given command.
    Control(Arc<Cmd>),
    /// Execute the instruction; the continuation is `plug(c, skip)`.
    Instr(&'a Instr),
    Fork(Tid, Arc<Cmd>, Tid, Arc<Cmd>),
    Join(Tid, Tid),
    /// Reached a loop-unrolling cutoff.
    Cutoff,
    Done,
}

/// Next move of thread `t` in `pool`.
pub fn thread_move<'a>(pool: &'a CommandPool, t: Tid, g: &RegStore) -> ThreadMove<'a> {
    let c = &pool[&t];
    if let Some(c2) = control_step(c, g) {
        return ThreadMove::Control(c2);
    }
    match redex(c) {
        Cmd::Instr(i) => ThreadMove::Instr(i),
        Cmd::Cutoff => ThreadMove::Cutoff,
        // Fork and join only apply when the composition is the whole command.
        Cmd::Par(t1, c1, t2, c2) if matches!(&**c, Cmd::Par(..)) => {
            match (pool.get(t1), pool.get(t2)) {
                (None, None) => ThreadMove::Fork(*t1, c1.clone(), *t2, c2.clone()),
                (Some(a), Some(b)) if a.is_skip() && b.is_skip() => ThreadMove::Join(*t1, *t2),
                _ => ThreadMove::Done,
            }
        }
        _ => ThreadMove::Done,
    }
}

/// Pool after forking `t` into `t1, t2`.
pub fn pool_fork(pool: &CommandPool, t1: Tid, c1: Arc<Cmd>, t2: Tid, c2: Arc<Cmd>) -> CommandPool {
    let mut p = pool.clone();
    p.insert(t1, c1);
    p.insert(t2, c2);
    p
}

/// Pool after `t` joins `t1, t2`.
pub fn pool_join(pool: &CommandPool, t: Tid, t1: Tid, t2: Tid) -> CommandPool {
    let mut p = pool.clone();
    p.remove(&t1);
    p.remove(&t2);
    p.insert(t, Arc::new(Cmd::Skip));
    p
}

/// Command-pool steps, with reads ranging over `values`.
pub fn pool_step(pool: &CommandPool, g: &RegStore, values: &[Val]) -> Vec<((Tid, Option<Label>), CommandPool, RegStore)> {
    let mut out = Vec::new();
    for &t in pool.keys() {
        match thread_move(pool, t, g) {
            ThreadMove::Control(c2) => {
                let mut p = pool.clone();
                p.insert(t, c2);
                out.push(((t, None), p, g.clone()));
            }
            ThreadMove::Instr(i) => {
                let cont = plug(&pool[&t], Arc::new(Cmd::Skip));
                for (l, g2) in prim_step(i, g, values) {
                    let mut p = pool.clone();
                    p.insert(t, cont.clone());
                    out.push(((t, l), p, g2));
                }
            }
            ThreadMove::Fork(t1, c1, t2, c2) => {
                out.push(((t, Some(Label::Fork(t1, t2))), pool_fork(pool, t1, c1, t2, c2), g.clone()));
            }
            ThreadMove::Join(t1, t2) => {
                out.push(((t, Some(Label::Join(t1, t2))), pool_join(pool, t, t1, t2), g.clone()));
            }
            ThreadMove::Cutoff | ThreadMove::Done => {}
        }
    }
    out
}

/// Every thread has terminated.
pub fn is_final(pool: &CommandPool) -> bool {
    pool.values().all(|c| c.is_skip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{well_formed_pool, BinOp};
    use crate::name::Name;

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    #[test]
    fn eval_examples() {
        let g: RegStore = [(n("a"), 1)].into_iter().collect();
        assert!(Expr::eq(Expr::reg("a"), Expr::Val(1)).holds(&g));
        let g: RegStore = [(n("a"), 2), (n("b"), 3)].into_iter().collect();
        assert_eq!(eval_expr(&g, &Expr::bin(BinOp::Add, Expr::reg("a"), Expr::reg("b"))), 5);
        assert_eq!(eval_expr(&RegStore::new(), &Expr::Val(7)), 7);
    }

    #[test]
    fn prim_examples() {
        let g = RegStore::new();
        let st = Instr::plain(Prim::Store(n("x"), Expr::Val(1)));
        assert_eq!(prim_step(&st, &g, &[0, 1]), vec![(Some(Label::W(n("x"), 1)), g.clone())]);
        let ld = Instr { prim: Prim::Load(n("a"), n("x")), aux: vec![(n("c"), Expr::Val(1))] };
        let steps = prim_step(&ld, &g, &[0, 1]);
        assert_eq!(steps.len(), 2);
        assert_eq!(steps[1].0, Some(Label::R(n("x"), 1)));
        assert_eq!(steps[1].1.get(n("a")), 1);
        assert_eq!(steps[1].1.get(n("c")), 1);
        assert_eq!(steps[0].1.get(n("a")), 0);
        let id = Instr::plain(Prim::Assign(n("a"), Expr::reg("a")));
        assert_eq!(prim_step(&id, &g, &[0]), vec![(None, g.clone())]);
    }

    #[test]
    fn cmd_examples() {
        let g = RegStore::new();
        let c = Cmd::instr(Prim::Assign(n("a"), Expr::Val(1)));
        let s = Arc::new(Cmd::seq(Cmd::Skip, c.clone()));
        assert_eq!(cmd_step(&s, &g, &[0]), vec![(None, Arc::new(c.clone()), g.clone())]);

        let w = Arc::new(Cmd::while_(Expr::ff(), c.clone()));
        let (l, c1, _) = cmd_step(&w, &g, &[0]).remove(0);
        assert_eq!(l, None);
        assert!(matches!(&*c1, Cmd::If(..)));
        let (_, c2, _) = cmd_step(&c1, &g, &[0]).remove(0);
        assert!(c2.is_skip());

        let i = Arc::new(Cmd::if_(Expr::eq(Expr::Val(1), Expr::Val(1)), c.clone(), Cmd::Skip));
        assert_eq!(cmd_step(&i, &g, &[0])[0].1, Arc::new(c));
    }

    #[test]
    fn pool_fork_join() {
        let g = RegStore::new();
        let par = Arc::new(Cmd::par(n("t1"), Cmd::Skip, n("t2"), Cmd::Skip));
        let pool: CommandPool = [(n("t0"), par)].into_iter().collect();
        let steps = pool_step(&pool, &g, &[0]);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].0, (n("t0"), Some(Label::Fork(n("t1"), n("t2")))));
        let forked = &steps[0].1;
        assert_eq!(forked.len(), 3);
        assert!(well_formed_pool(forked).is_ok());
        let steps = pool_step(forked, &g, &[0]);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].0 .1, Some(Label::Join(n("t1"), n("t2"))));
        assert_eq!(steps[0].1.len(), 1);
        assert!(is_final(&steps[0].1));

        let done: CommandPool = [(n("t1"), Arc::new(Cmd::Skip))].into_iter().collect();
        assert!(pool_step(&done, &g, &[0]).is_empty());
    }
}
