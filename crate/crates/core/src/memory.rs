//! Memory systems and the concurrent system that synchronizes a command pool
//! with one of them.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::hash::Hash;
use std::sync::Arc;

use crate::lang::{Cmd, CommandPool};
use crate::name::{Loc, Tid, Val};
use crate::opsem::{instr_effect, plug, pool_fork, pool_join, thread_move, Label, RegStore, ThreadMove};
use crate::lang::Prim;

/// A labeled transition system over memory states.
///
/// Reads are queried rather than guessed: `read` returns every value the
/// thread may read together with the resulting state, so exploration never
/// enumerates a value domain.
pub trait MemoryModel: Sync {
    type State: Clone + Eq + Hash + Debug + Send + Sync;

    fn name(&self) -> &'static str;

    /// Initial state for the given live threads and initial values.
    fn initial(&self, tids: &[Tid], init: &BTreeMap<Loc, Val>) -> Self::State;

    fn read(&self, m: &Self::State, t: Tid, x: Loc) -> Vec<(Val, Self::State)>;

    fn write(&self, m: &Self::State, t: Tid, x: Loc, v: Val) -> Vec<Self::State>;

    /// Atomic read-modify-write writing `v`; returns the value read.
    fn rmw(&self, m: &Self::State, t: Tid, x: Loc, v: Val) -> Vec<(Val, Self::State)>;

    fn fork(&self, m: &Self::State, t: Tid, t1: Tid, t2: Tid) -> Option<Self::State>;

    fn join(&self, m: &Self::State, t: Tid, t1: Tid, t2: Tid) -> Option<Self::State>;

    /// Internal steps (the set Θ). Empty by default.
    fn internal(&self, _m: &Self::State) -> Vec<Self::State> {
        Vec::new()
    }

    /// Labeled step in the generic form `m --t:l--> m'`.
    fn step(&self, m: &Self::State, t: Tid, l: Label) -> Vec<Self::State> {
        match l {
            Label::R(x, v) => self.read(m, t, x).into_iter().filter(|(w, _)| *w == v).map(|p| p.1).collect(),
            Label::W(x, v) => self.write(m, t, x, v),
            Label::U(x, r, w) => self.rmw(m, t, x, w).into_iter().filter(|(u, _)| *u == r).map(|p| p.1).collect(),
            Label::Fork(a, b) => self.fork(m, t, a, b).into_iter().collect(),
            Label::Join(a, b) => self.join(m, t, a, b).into_iter().collect(),
        }
    }
}

/// Sequential consistency: one value per location, no internal steps.
#[derive(Clone, Debug, Default)]
pub struct ScModel;

/// SC memory: location values in location order.
pub type ScState = BTreeMap<Loc, Val>;

pub fn sc_step(m: &ScState, l: Label) -> Vec<ScState> {
    let get = |x: Loc| m.get(&x).copied().unwrap_or(0);
    match l {
        Label::R(x, v) if get(x) == v => vec![m.clone()],
        Label::W(x, v) => vec![sc_set(m, x, v)],
        Label::U(x, r, w) if get(x) == r => vec![sc_set(m, x, w)],
        Label::R(..) | Label::U(..) => Vec::new(),
        Label::Fork(..) | Label::Join(..) => vec![m.clone()],
    }
}

/// Zero values are not stored, so equal memories compare equal.
fn sc_set(m: &ScState, x: Loc, v: Val) -> ScState {
    let mut m2 = m.clone();
    if v == 0 {
        m2.remove(&x);
    } else {
        m2.insert(x, v);
    }
    m2
}

impl MemoryModel for ScModel {
    type State = ScState;

    fn name(&self) -> &'static str {
        "sc"
    }

    fn initial(&self, _tids: &[Tid], init: &BTreeMap<Loc, Val>) -> ScState {
        init.iter().filter(|(_, v)| **v != 0).map(|(x, v)| (*x, *v)).collect()
    }

    fn read(&self, m: &ScState, _t: Tid, x: Loc) -> Vec<(Val, ScState)> {
        vec![(m.get(&x).copied().unwrap_or(0), m.clone())]
    }

    fn write(&self, m: &ScState, _t: Tid, x: Loc, v: Val) -> Vec<ScState> {
        vec![sc_set(m, x, v)]
    }

    fn rmw(&self, m: &ScState, t: Tid, x: Loc, v: Val) -> Vec<(Val, ScState)> {
        let r = m.get(&x).copied().unwrap_or(0);
        self.write(m, t, x, v).into_iter().map(|m2| (r, m2)).collect()
    }

    fn fork(&self, m: &ScState, _t: Tid, _a: Tid, _b: Tid) -> Option<ScState> {
        Some(m.clone())
    }

    fn join(&self, m: &ScState, _t: Tid, _a: Tid, _b: Tid) -> Option<ScState> {
        Some(m.clone())
    }
}

/// A configuration of the concurrent system.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Config<S> {
    pub pool: CommandPool,
    pub regs: RegStore,
    pub mem: S,
}

/// Transition labels of the concurrent system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SysLabel {
    /// Component step `t : l` (silent when `None`).
    Cmp(Tid, Option<Label>),
    /// Internal memory step.
    Mem,
}

impl std::fmt::Display for SysLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SysLabel::Cmp(t, Some(l)) => write!(f, "{t}:{l}"),
            SysLabel::Cmp(t, None) => write!(f, "{t}:eps"),
            SysLabel::Mem => write!(f, "mem"),
        }
    }
}

/// What `system_step` noticed besides successors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepInfo {
    /// Some thread sits at a loop-unrolling cutoff.
    pub cutoff: bool,
}

/// All successors of a configuration: synchronized program/memory steps,
/// silent program steps, and internal memory steps.
pub fn system_step<M: MemoryModel>(model: &M, s: &Config<M::State>) -> (Vec<(SysLabel, Config<M::State>)>, StepInfo) {
    let mut out = Vec::new();
    let mut info = StepInfo::default();
    for &t in s.pool.keys() {
        match thread_move(&s.pool, t, &s.regs) {
            ThreadMove::Control(c2) => {
                let mut pool = s.pool.clone();
                pool.insert(t, c2);
                out.push((SysLabel::Cmp(t, None), Config { pool, regs: s.regs.clone(), mem: s.mem.clone() }));
            }
            ThreadMove::Instr(i) => {
                let mut pool = s.pool.clone();
                pool.insert(t, plug(&s.pool[&t], Arc::new(Cmd::Skip)));
                let mut push = |read: Val, mem: M::State| {
                    let (l, regs) = instr_effect(i, &s.regs, read);
                    out.push((SysLabel::Cmp(t, l), Config { pool: pool.clone(), regs, mem }));
                };
                match &i.prim {
                    Prim::Assign(..) => push(0, s.mem.clone()),
                    Prim::Store(x, e) => {
                        for m2 in model.write(&s.mem, t, *x, e.eval(&s.regs)) {
                            push(0, m2);
                        }
                    }
                    Prim::Load(_, x) => {
                        for (v, m2) in model.read(&s.mem, t, *x) {
                            push(v, m2);
                        }
                    }
                    Prim::Swap(x, e) => {
                        for (v, m2) in model.rmw(&s.mem, t, *x, e.eval(&s.regs)) {
                            push(v, m2);
                        }
                    }
                }
            }
            ThreadMove::Fork(t1, c1, t2, c2) => {
                if let Some(mem) = model.fork(&s.mem, t, t1, t2) {
                    let pool = pool_fork(&s.pool, t1, c1, t2, c2);
                    out.push((SysLabel::Cmp(t, Some(Label::Fork(t1, t2))), Config { pool, regs: s.regs.clone(), mem }));
                }
            }
            ThreadMove::Join(t1, t2) => {
                if let Some(mem) = model.join(&s.mem, t, t1, t2) {
                    let pool = pool_join(&s.pool, t, t1, t2);
                    out.push((SysLabel::Cmp(t, Some(Label::Join(t1, t2))), Config { pool, regs: s.regs.clone(), mem }));
                }
            }
            ThreadMove::Cutoff => info.cutoff = true,
            ThreadMove::Done => {}
        }
    }
    for mem in model.internal(&s.mem) {
        out.push((SysLabel::Mem, Config { pool: s.pool.clone(), regs: s.regs.clone(), mem }));
    }
    (out, info)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::name::Name;

    #[test]
    fn sc_examples() {
        let x = Name::new("x");
        let m: ScState = BTreeMap::new();
        assert_eq!(sc_step(&m, Label::R(x, 0)), vec![m.clone()]);
        assert!(sc_step(&m, Label::U(x, 1, 2)).is_empty());
        assert_eq!(sc_step(&m, Label::W(x, 5)), vec![BTreeMap::from([(x, 5)])]);
    }

    #[test]
    fn skip_pool_has_only_internal_steps() {
        let pool: CommandPool = [(Name::new("t1"), Arc::new(Cmd::Skip))].into_iter().collect();
        let s = Config { pool, regs: RegStore::new(), mem: ScState::new() };
        assert!(system_step(&ScModel, &s).0.is_empty());
    }
}
