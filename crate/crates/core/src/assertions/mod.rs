//! Satisfaction of Piccolo assertions, bounded enumeration of SRA states and
//! bounded implication checking.

mod space;

pub use space::{dnf, implies, minimize, pots_to_mapping, sat_pots, CheckParams, Counterexample, Pots, Space};

use std::collections::BTreeSet;

use serde::Serialize;

use crate::lang::{Assertion, Env, Expr, Interval, Var};
use crate::name::{Loc, Reg, Tid, Val};
use crate::opsem::RegStore;
use crate::sra::{valid_list, Cell, Flag, Mapping, Potential, Store, StoreList};

/// Environment of an extended expression: registers from `regs`, locations
/// and flags from one potential store.
pub struct StoreEnv<'a> {
    pub regs: &'a RegStore,
    pub store: &'a Store,
}

impl Env for StoreEnv<'_> {
    fn reg(&self, r: Reg) -> Val {
        self.regs.get(r)
    }
    fn loc(&self, x: Loc) -> Val {
        self.store.get(x).val
    }
    fn is_r(&self, x: Loc) -> bool {
        self.store.get(x).flag == Flag::R
    }
}

pub fn eval_ext(g: &RegStore, d: &Store, e: &Expr) -> Val {
    e.eval(&StoreEnv { regs: g, store: d })
}

/// `L ⊨ I` for a possibly empty store sequence.
pub fn sat_interval(g: &RegStore, l: &[Store], i: &Interval) -> bool {
    match i {
        Interval::Atom(e) => l.iter().all(|s| e.holds(&StoreEnv { regs: g, store: s })),
        Interval::Chop(a, b) => (0..=l.len()).any(|k| sat_interval(g, &l[..k], a) && sat_interval(g, &l[k..], b)),
        Interval::And(a, b) => sat_interval(g, l, a) && sat_interval(g, l, b),
        Interval::Or(a, b) => sat_interval(g, l, a) || sat_interval(g, l, b),
    }
}

/// Satisfaction with potential atoms decided by `pot`.
pub fn sat_with(g: &RegStore, a: &Assertion, pot: &mut impl FnMut(Tid, &Interval) -> bool) -> bool {
    match a {
        Assertion::Pot(t, i) => pot(*t, i),
        Assertion::Expr(e) => e.holds(g),
        Assertion::And(x, y) => sat_with(g, x, pot) && sat_with(g, y, pot),
        Assertion::Or(x, y) => sat_with(g, x, pot) || sat_with(g, y, pot),
    }
}

/// `γ, 𝒟 ⊨ φ`. `pot(τ, I)` is false when `τ` has no potential.
pub fn sat_assertion(g: &RegStore, m: &Mapping, a: &Assertion) -> bool {
    sat_with(g, a, &mut |t, i| m.get(t).is_some_and(|d| d.iter().all(|l| sat_interval(g, l, i))))
}

pub fn fv(a: &Assertion) -> BTreeSet<Var> {
    a.fv()
}

pub fn has_rmw_atom(i: &Interval, x: Loc) -> bool {
    i.has_rmw_atom(x)
}

/// Bounds of an explicitly enumerated state universe.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UniverseParams {
    pub values: Vec<Val>,
    pub locs: Vec<Loc>,
    pub regs: Vec<Reg>,
    pub tids: Vec<Tid>,
    /// Thread ids that may appear as writers in cells.
    pub writers: Vec<Tid>,
    pub max_list_len: usize,
    pub max_pot_size: usize,
}

impl UniverseParams {
    pub fn new(values: &[Val], locs: &[Loc], regs: &[Reg], tids: &[Tid]) -> UniverseParams {
        UniverseParams {
            values: values.to_vec(),
            locs: locs.to_vec(),
            regs: regs.to_vec(),
            tids: tids.to_vec(),
            writers: vec![crate::name::t0()],
            max_list_len: 3,
            max_pot_size: 2,
        }
    }
}

/// Cartesian product of `choices`, in lexicographic order.
pub fn product<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for c in choices {
        let mut next = Vec::with_capacity(out.len() * c.len());
        for prefix in &out {
            for x in c {
                let mut p = prefix.clone();
                p.push(x.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Non-empty subsets of `items` with at most `max` elements.
fn subsets<T: Clone + Ord>(items: &[T], max: usize) -> Vec<BTreeSet<T>> {
    let mut out: Vec<BTreeSet<T>> = Vec::new();
    fn go<T: Clone + Ord>(items: &[T], start: usize, max: usize, cur: &mut Vec<T>, out: &mut Vec<BTreeSet<T>>) {
        if !cur.is_empty() {
            out.push(cur.iter().cloned().collect());
        }
        if cur.len() == max {
            return;
        }
        for i in start..items.len() {
            cur.push(items[i].clone());
            go(items, i + 1, max, cur, out);
            cur.pop();
        }
    }
    go(items, 0, max, &mut Vec::new(), &mut out);
    out
}

/// Every potential store over the universe's locations.
pub fn all_stores(p: &UniverseParams) -> Vec<Store> {
    let mut cells = Vec::new();
    for v in &p.values {
        for flag in [Flag::R, Flag::Rmw] {
            for t in &p.writers {
                cells.push(Cell { val: *v, flag, tid: *t });
            }
        }
    }
    let per_loc: Vec<Vec<Cell>> = p.locs.iter().map(|_| cells.clone()).collect();
    product(&per_loc).into_iter().map(|cs| Store::new(p.locs.iter().copied().zip(cs))).collect()
}

/// Every valid state of the universe, each exactly once: lists of length at
/// most B, potentials of at most S lists, one shared final store.
pub fn enumerate_states(p: &UniverseParams) -> Vec<(RegStore, Mapping)> {
    let stores = all_stores(p);
    let finals: Vec<&Store> = stores.iter().filter(|s| s.cells().iter().all(|(_, c)| c.flag == Flag::Rmw)).collect();
    let mut mappings = Vec::new();
    for f in finals {
        let mut lists: Vec<StoreList> = Vec::new();
        let mut frontier: Vec<StoreList> = vec![vec![f.clone()]];
        for _ in 0..p.max_list_len {
            let mut next = Vec::new();
            for l in frontier {
                if valid_list(&l) {
                    for s in &stores {
                        let mut l2 = vec![s.clone()];
                        l2.extend(l.iter().cloned());
                        next.push(l2);
                    }
                    lists.push(l);
                }
            }
            frontier = next;
        }
        let pots: Vec<Potential> = subsets(&lists, p.max_pot_size);
        let per_tid: Vec<Vec<Potential>> = p.tids.iter().map(|_| pots.clone()).collect();
        for choice in product(&per_tid) {
            let mut m = Mapping::default();
            for (t, d) in p.tids.iter().zip(choice) {
                m.insert(*t, d);
            }
            mappings.push(m);
        }
    }
    let reg_choices: Vec<Vec<Val>> = p.regs.iter().map(|_| p.values.clone()).collect();
    let mut out = Vec::new();
    for vals in product(&reg_choices) {
        let g: RegStore = p.regs.iter().copied().zip(vals).collect();
        for m in &mappings {
            out.push((g.clone(), m.clone()));
        }
    }
    out
}
