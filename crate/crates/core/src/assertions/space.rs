//! Saturated bounded checking.
//!
//! Assertions are antitone in potentials: dropping lists never falsifies
//! `pot(τ, I)`. For a fixed register store, final store and conjunction of
//! potential atoms, the satisfying states therefore have a largest element
//! (every thread gets every list that satisfies its atoms), and any antitone
//! property holds of all of them iff it holds of that one.
//!
//! Assertions cannot observe writer thread ids, nor the flag of a location
//! without an `R(x)` atom. Both are normalized away: every cell is written
//! by `t0`, and such flags are fixed to RMW.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::{product, sat_interval, sat_with};
use crate::lang::{Assertion, Expr, Instr, Interval, Prim, UnOp, BinOp};
use crate::name::{t0, Loc, Reg, Tid, Val};
use crate::opsem::RegStore;
use crate::sra::{Cell, Flag, Mapping, Store, StoreList};

/// Bounds of the saturated checker.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckParams {
    /// Base value domain; literals of the checked formulas are added per
    /// group of related variables.
    pub values: Vec<Val>,
    pub max_list_len: usize,
}

impl Default for CheckParams {
    fn default() -> CheckParams {
        CheckParams { values: vec![0, 1, 2], max_list_len: 3 }
    }
}

/// Potentials as plain list vectors.
pub type Pots = BTreeMap<Tid, Vec<StoreList>>;

pub fn pots_to_mapping(p: &Pots) -> Mapping {
    Mapping(p.iter().map(|(t, ls)| (*t, Arc::new(ls.iter().cloned().collect()))).collect())
}

pub fn sat_pots(g: &RegStore, p: &Pots, a: &Assertion) -> bool {
    sat_with(g, a, &mut |t, i| p.get(&t).is_some_and(|ls| ls.iter().all(|l| sat_interval(g, l, i))))
}

/// A state refuting a check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub regs: RegStore,
    pub state: Mapping,
    /// What went wrong, for triples the step taken.
    pub note: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "registers {}", self.regs)?;
        write!(f, "{}", self.state.dump())?;
        if !self.note.is_empty() {
            writeln!(f, "{}", self.note)?;
        }
        Ok(())
    }
}

/// Split an expression into its comparison-level atoms.
fn expr_atoms<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    match e {
        Expr::Bin(BinOp::And | BinOp::Or, a, b) => {
            expr_atoms(a, out);
            expr_atoms(b, out);
        }
        Expr::Un(UnOp::Not, a) => expr_atoms(a, out),
        _ => out.push(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Reg(Reg),
    Loc(Loc),
}

/// Groups of variables that meet in some atom, with the literals they meet.
#[derive(Default)]
struct Groups(Vec<(BTreeSet<Key>, BTreeSet<Val>)>);

impl Groups {
    fn add(&mut self, keys: BTreeSet<Key>, lits: BTreeSet<Val>) {
        let mut keys = keys;
        let mut lits = lits;
        let mut rest = Vec::new();
        for (k, l) in self.0.drain(..) {
            if k.is_disjoint(&keys) {
                rest.push((k, l));
            } else {
                keys.extend(k);
                lits.extend(l);
            }
        }
        rest.push((keys, lits));
        self.0 = rest;
    }

    fn add_expr(&mut self, extra: Option<Key>, e: &Expr) {
        let mut keys = BTreeSet::new();
        let mut lits = BTreeSet::new();
        keys.extend(extra);
        e.visit(&mut |l| match l {
            Expr::Reg(r) => {
                keys.insert(Key::Reg(*r));
            }
            Expr::Loc(x) | Expr::IsR(x) => {
                keys.insert(Key::Loc(*x));
            }
            Expr::Val(v) => {
                lits.insert(*v);
            }
            _ => {}
        });
        self.add(keys, lits);
    }

    fn lits(&self, k: Key) -> BTreeSet<Val> {
        self.0.iter().find(|(ks, _)| ks.contains(&k)).map(|(_, l)| l.clone()).unwrap_or_default()
    }
}

/// The bounded universe of one check: which locations and registers matter,
/// their value domains, and which flags vary.
#[derive(Clone, Debug)]
pub struct Space {
    locs: Vec<(Loc, Vec<Val>, bool)>,
    regs: Vec<(Reg, Vec<Val>)>,
    max_len: usize,
}

impl Space {
    pub fn new(params: &CheckParams, formulas: &[&Assertion], instrs: &[&Instr]) -> Space {
        let mut groups = Groups::default();
        let mut flag_locs = BTreeSet::new();
        let mut locs = BTreeSet::new();
        let mut regs = BTreeSet::new();
        for a in formulas {
            a.visit_exprs(&mut |e| {
                let mut atoms = Vec::new();
                expr_atoms(e, &mut atoms);
                for at in atoms {
                    groups.add_expr(None, at);
                }
            });
            flag_locs.extend(a.flag_locs());
            locs.extend(a.locs());
            regs.extend(a.regs());
        }
        for i in instrs {
            match &i.prim {
                Prim::Assign(r, e) => {
                    groups.add_expr(Some(Key::Reg(*r)), e);
                    e.regs(&mut regs);
                }
                Prim::Store(x, e) | Prim::Swap(x, e) => {
                    groups.add_expr(Some(Key::Loc(*x)), e);
                    e.regs(&mut regs);
                    locs.insert(*x);
                }
                Prim::Load(r, x) => {
                    groups.add(BTreeSet::from([Key::Reg(*r), Key::Loc(*x)]), BTreeSet::new());
                    locs.insert(*x);
                }
            }
            for (r, e) in &i.aux {
                groups.add_expr(Some(Key::Reg(*r)), e);
                e.regs(&mut regs);
            }
        }
        let domain = |k: Key| -> Vec<Val> {
            let mut d: BTreeSet<Val> = params.values.iter().copied().collect();
            d.extend(groups.lits(k));
            d.into_iter().collect()
        };
        Space {
            locs: locs.into_iter().map(|x| (x, domain(Key::Loc(x)), flag_locs.contains(&x))).collect(),
            regs: regs.into_iter().map(|r| (r, domain(Key::Reg(r)))).collect(),
            max_len: params.max_list_len.max(1),
        }
    }

    pub fn locs(&self) -> impl Iterator<Item = Loc> + '_ {
        self.locs.iter().map(|p| p.0)
    }

    pub fn flag_varies(&self, x: Loc) -> bool {
        self.locs.iter().any(|(y, _, f)| *y == x && *f)
    }

    /// Values `x` ranges over.
    pub fn loc_values(&self, x: Loc) -> &[Val] {
        self.locs.iter().find(|p| p.0 == x).map(|p| &p.1[..]).unwrap_or(&[])
    }

    /// Normalized cell.
    pub fn cell(&self, x: Loc, val: Val, flag: Flag) -> Cell {
        let flag = if self.flag_varies(x) { flag } else { Flag::Rmw };
        Cell { val, flag, tid: t0() }
    }

    pub fn stores(&self) -> Vec<Store> {
        let per_loc: Vec<Vec<Cell>> = self
            .locs
            .iter()
            .map(|(_, vals, varies)| {
                let flags: &[Flag] = if *varies { &[Flag::R, Flag::Rmw] } else { &[Flag::Rmw] };
                vals.iter().flat_map(|v| flags.iter().map(|f| Cell { val: *v, flag: *f, tid: t0() })).collect()
            })
            .collect();
        let names: Vec<Loc> = self.locs().collect();
        product(&per_loc).into_iter().map(|cs| Store::new(names.iter().copied().zip(cs))).collect()
    }

    /// Valid lists of length at most B ending in `f`.
    pub fn lists_ending(&self, stores: &[Store], f: &Store) -> Vec<StoreList> {
        let mut out = Vec::new();
        let mut frontier: Vec<StoreList> = vec![vec![f.clone()]];
        for len in 1..=self.max_len {
            let mut next = Vec::new();
            for l in frontier {
                if len < self.max_len {
                    for s in stores {
                        // Flags are monotone: an R flag must be preceded by R.
                        let ok = s.cells().iter().zip(l[0].cells()).all(|((_, a), (_, b))| a.flag == Flag::R || b.flag == Flag::Rmw);
                        if ok {
                            let mut l2 = Vec::with_capacity(l.len() + 1);
                            l2.push(s.clone());
                            l2.extend(l.iter().cloned());
                            next.push(l2);
                        }
                    }
                }
                out.push(l);
            }
            frontier = next;
        }
        out
    }

    pub fn reg_stores(&self) -> Vec<RegStore> {
        let choices: Vec<Vec<Val>> = self.regs.iter().map(|p| p.1.clone()).collect();
        product(&choices)
            .into_iter()
            .map(|vals| self.regs.iter().map(|p| p.0).zip(vals).collect())
            .collect()
    }

    /// Visit the largest states satisfying `phi` with potentials for exactly
    /// the threads in `dom`. Stops when `visit` returns false; returns
    /// whether it ran to the end.
    pub fn for_each_max_state(&self, phi: &Assertion, dom: &[Tid], mut visit: impl FnMut(&RegStore, &Pots) -> bool) -> bool {
        let stores = self.stores();
        let regs = self.reg_stores();
        for f in stores.iter().filter(|s| s.cells().iter().all(|(_, c)| c.flag == Flag::Rmw)) {
            let lists = self.lists_ending(&stores, f);
            for g in &regs {
                for conj in dnf(phi, g) {
                    if conj.iter().any(|(t, _)| !dom.contains(t)) {
                        continue;
                    }
                    let mut pots = Pots::new();
                    let mut empty = false;
                    for t in dom {
                        let ints: Vec<&Interval> = conj.iter().filter(|(u, _)| u == t).map(|p| p.1).collect();
                        let ls: Vec<StoreList> =
                            lists.iter().filter(|l| ints.iter().all(|i| sat_interval(g, l, i))).cloned().collect();
                        if ls.is_empty() {
                            empty = true;
                            break;
                        }
                        pots.insert(*t, ls);
                    }
                    if !empty && !visit(g, &pots) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

type Conj<'a> = Vec<(Tid, &'a Interval)>;

/// Disjunctive normal form of the potential atoms of `a` once its register
/// expressions are evaluated in `g`. Subsumed disjuncts are dropped.
pub fn dnf<'a>(a: &'a Assertion, g: &RegStore) -> Vec<Conj<'a>> {
    let raw: Vec<Conj<'a>> = match a {
        Assertion::Expr(e) => {
            if e.holds(g) {
                vec![Vec::new()]
            } else {
                Vec::new()
            }
        }
        Assertion::Pot(t, i) => vec![vec![(*t, i)]],
        Assertion::Or(x, y) => {
            let mut v = dnf(x, g);
            v.extend(dnf(y, g));
            v
        }
        Assertion::And(x, y) => {
            let (l, r) = (dnf(x, g), dnf(y, g));
            let mut v = Vec::with_capacity(l.len() * r.len());
            for a in &l {
                for b in &r {
                    let mut c = a.clone();
                    c.extend(b.iter().cloned());
                    v.push(c);
                }
            }
            v
        }
    };
    let mut sets: Vec<Conj<'a>> = raw
        .into_iter()
        .map(|mut c| {
            c.sort();
            c.dedup();
            c
        })
        .collect();
    sets.sort_by_key(|c| c.len());
    sets.dedup();
    let mut out: Vec<Conj<'a>> = Vec::new();
    for c in sets {
        if !out.iter().any(|o| o.iter().all(|p| c.contains(p))) {
            out.push(c);
        }
    }
    out
}

/// Drop lists one at a time while `still_bad` keeps holding.
pub fn minimize(pots: &mut Pots, still_bad: impl Fn(&Pots) -> bool) {
    let tids: Vec<Tid> = pots.keys().copied().collect();
    for t in tids {
        let mut i = 0;
        while i < pots[&t].len() {
            if pots[&t].len() == 1 {
                break;
            }
            let mut trial = pots.clone();
            trial.get_mut(&t).unwrap().remove(i);
            if still_bad(&trial) {
                *pots = trial;
            } else {
                i += 1;
            }
        }
    }
}

/// Whether every bounded state satisfying `phi` satisfies `psi`. `dom` is
/// the set of live threads; by default the threads of both formulas.
pub fn implies(phi: &Assertion, psi: &Assertion, dom: Option<&[Tid]>, params: &CheckParams) -> Result<(), Counterexample> {
    let dom: Vec<Tid> = match dom {
        Some(d) => d.to_vec(),
        None => phi.tids().union(&psi.tids()).copied().collect(),
    };
    let space = Space::new(params, &[phi, psi], &[]);
    let mut cex = None;
    space.for_each_max_state(phi, &dom, |g, pots| {
        if sat_pots(g, pots, psi) {
            return true;
        }
        let mut p = pots.clone();
        minimize(&mut p, |q| !sat_pots(g, q, psi));
        cex = Some(Counterexample { regs: g.clone(), state: pots_to_mapping(&p), note: String::new() });
        false
    });
    match cex {
        None => Ok(()),
        Some(c) => Err(c),
    }
}
