//! The step rules on explicit potential mappings, and their canonical
//! counterparts used for exploration.
//!
//! A canonical state stands for everything it reaches by lose and dup steps.
//! Each potential is an antichain of destuttered lists, and every list keeps
//! the shared final store. Canonical steps return the ⊑-largest successor
//! among all states reachable by lose and dup followed by the step.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::store::*;
use crate::name::{t0, Loc, Tid, Val};

/// Exploration bounds.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SraBounds {
    /// Maximum store-list length.
    pub max_list_len: usize,
    /// Maximum number of lists in one potential.
    pub max_pot_size: usize,
}

impl Default for SraBounds {
    fn default() -> SraBounds {
        SraBounds { max_list_len: usize::MAX, max_pot_size: 8 }
    }
}

/// Which premise set the write rule uses. The mutation exists to show that
/// the corpus detects a weaker rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WriteRule {
    #[default]
    Standard,
    /// Drop `L1 ∈ 𝒟(τ)`: other threads may take any suffix of their own list.
    DropWriterSuffixPremise,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SraError {
    #[error("initial state needs at least one thread")]
    NoThreads,
}

/// `λτ. {⟨λx. (init(x), RMW, t0)⟩}`.
pub fn initial_sra(tids: &[Tid], init: &BTreeMap<Loc, Val>) -> Result<Mapping, SraError> {
    if tids.is_empty() {
        return Err(SraError::NoThreads);
    }
    let store = Store::new(init.iter().map(|(x, v)| (*x, Cell { val: *v, flag: Flag::Rmw, tid: t0() })));
    let d: Potential = BTreeSet::from([vec![store]]);
    let mut m = Mapping::default();
    for t in tids {
        m.insert(*t, d.clone());
    }
    Ok(m)
}

/// Values (and writer threads) the read rule allows without losing.
pub fn sra_read(m: &Mapping, t: Tid, x: Loc) -> BTreeSet<(Val, Tid)> {
    let Some(d) = m.get(t) else { return BTreeSet::new() };
    let firsts: BTreeSet<(Val, Tid)> = d.iter().map(|l| l[0].get(x)).map(|c| (c.val, c.tid)).collect();
    if firsts.len() == 1 {
        firsts
    } else {
        BTreeSet::new()
    }
}

/// Read values for an RMW: as `sra_read`, also requiring RMW flags.
pub fn sra_rmw_read(m: &Mapping, t: Tid, x: Loc) -> BTreeSet<(Val, Tid)> {
    let Some(d) = m.get(t) else { return BTreeSet::new() };
    if d.iter().any(|l| l[0].get(x).flag != Flag::Rmw) {
        return BTreeSet::new();
    }
    sra_read(m, t, x)
}

pub fn sra_fork(m: &Mapping, t: Tid, t1: Tid, t2: Tid) -> Option<Mapping> {
    let d = m.0.get(&t)?.clone();
    if m.0.contains_key(&t1) || m.0.contains_key(&t2) {
        return None;
    }
    let mut out = m.clone();
    out.0.remove(&t);
    out.0.insert(t1, d.clone());
    out.0.insert(t2, d);
    Some(out)
}

/// Join by set intersection. Disabled when the intersection is empty.
pub fn sra_join(m: &Mapping, t: Tid, t1: Tid, t2: Tid) -> Option<Mapping> {
    let d: Potential = m.get(t1)?.intersection(m.get(t2)?).cloned().collect();
    if d.is_empty() {
        return None;
    }
    let mut out = m.clone();
    out.0.remove(&t1);
    out.0.remove(&t2);
    out.insert(t, d);
    Some(out)
}

/// Whether `after` is a write successor of `before` for `t: W(x, v)`,
/// checking the rule premises literally against explicit sets.
pub fn write_rule_holds(before: &Mapping, t: Tid, x: Loc, v: Val, after: &Mapping) -> bool {
    let new = Cell { val: v, flag: Flag::Rmw, tid: t };
    let (Some(dt), Some(dt2)) = (before.get(t), after.get(t)) else { return false };
    if before.0.len() != after.0.len() || dt2.is_empty() {
        return false;
    }
    let overwrite = |l: &[Store]| -> StoreList { l.iter().map(|s| s.set(x, new)).collect() };
    if !dt2.iter().all(|l2| dt.iter().any(|l| overwrite(l) == *l2)) {
        return false;
    }
    for (p, d2) in &after.0 {
        if *p == t {
            continue;
        }
        let Some(d) = before.get(*p) else { return false };
        if d2.is_empty() {
            return false;
        }
        let ok = d2.iter().all(|l2| {
            d.iter().any(|l| {
                (0..l.len()).any(|k| {
                    let (l0, l1) = l.split_at(k);
                    dt.iter().any(|n| n.as_slice() == l1)
                        && l2.len() == l.len()
                        && l0.iter().zip(l2.iter()).all(|(a, b)| a.set_r(x) == *b)
                        && l1.iter().zip(&l2[k..]).all(|(a, b)| a.set(x, new) == *b)
                })
            })
        });
        if !ok {
            return false;
        }
    }
    true
}

/// Immediate lose steps: the state itself, and every state obtained by
/// dropping one list or one store, as long as the result is well formed.
pub fn lose_successors(m: &Mapping) -> Vec<Mapping> {
    let mut out = vec![m.clone()];
    for (t, d) in &m.0 {
        for l in d.iter() {
            if d.len() > 1 {
                let mut d2 = (**d).clone();
                d2.remove(l);
                let mut m2 = m.clone();
                m2.insert(*t, d2);
                out.push(m2);
            }
            for i in 0..l.len() {
                if l.len() == 1 {
                    break;
                }
                let mut l2 = l.clone();
                l2.remove(i);
                let mut d2 = (**d).clone();
                d2.remove(l);
                d2.insert(l2);
                let mut m2 = m.clone();
                m2.insert(*t, d2);
                if validate_state(&m2) {
                    out.push(m2);
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Every way to duplicate one store of a list, within the length bound.
pub fn dup_list(l: &[Store], max_len: usize) -> Vec<StoreList> {
    if l.len() >= max_len {
        return Vec::new();
    }
    (0..l.len())
        .map(|i| {
            let mut l2 = l.to_vec();
            l2.insert(i, l[i].clone());
            l2
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Immediate dup steps: replace one list of one thread by a duplication of it.
pub fn dup_expand(m: &Mapping, max_len: usize) -> Vec<Mapping> {
    let mut out = Vec::new();
    for (t, d) in &m.0 {
        for l in d.iter() {
            for l2 in dup_list(l, max_len) {
                let mut d2 = (**d).clone();
                d2.remove(l);
                d2.insert(l2);
                let mut m2 = m.clone();
                m2.insert(*t, d2);
                out.push(m2);
            }
        }
    }
    out
}

/// Result of a canonical step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Canon {
    pub state: Mapping,
    /// Some potential was cut down to `max_pot_size` lists.
    pub truncated: bool,
}

fn bounded(lists: Vec<StoreList>, bounds: &SraBounds, truncated: &mut bool) -> Potential {
    let d = antichain(lists);
    if d.len() <= bounds.max_pot_size {
        return d;
    }
    *truncated = true;
    let mut v: Vec<StoreList> = d.into_iter().collect();
    v.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    v.truncate(bounds.max_pot_size);
    v.into_iter().collect()
}

/// Canonical read: for each `(v, π)` some list can start with at `x`, lose
/// every list down to the suffix starting at its first such store.
pub fn canon_read(m: &Mapping, t: Tid, x: Loc, need_rmw: bool) -> Vec<(Val, Tid, Mapping)> {
    let Some(d) = m.get(t) else { return Vec::new() };
    let mut opts: BTreeMap<(Val, Tid), Vec<StoreList>> = BTreeMap::new();
    for l in d {
        let mut seen = BTreeSet::new();
        for (i, s) in l.iter().enumerate() {
            let c = s.get(x);
            if need_rmw && c.flag != Flag::Rmw {
                continue;
            }
            if seen.insert((c.val, c.tid)) {
                opts.entry((c.val, c.tid)).or_default().push(l[i..].to_vec());
            }
        }
    }
    opts.into_iter()
        .map(|((v, p), lists)| {
            let mut m2 = m.clone();
            m2.insert(t, antichain(lists));
            (v, p, m2)
        })
        .collect()
}

/// Canonical write of `v` to `x` by `t`.
pub fn canon_write(m: &Mapping, t: Tid, x: Loc, v: Val, rule: WriteRule, bounds: &SraBounds) -> Canon {
    let new = Cell { val: v, flag: Flag::Rmw, tid: t };
    let mut truncated = false;
    let dt = m.get(t).expect("writer has a potential");
    let written: RefCell<HashMap<Store, Store>> = RefCell::default();
    let flagged: RefCell<HashMap<Store, Store>> = RefCell::default();
    let memo = |cache: &RefCell<HashMap<Store, Store>>, s: &Store, f: &dyn Fn(&Store) -> Store| -> Store {
        if let Some(r) = cache.borrow().get(s) {
            return r.clone();
        }
        let r = f(s);
        cache.borrow_mut().insert(s.clone(), r.clone());
        r
    };
    let overwrite = |l: &[Store]| -> StoreList { l.iter().map(|s| memo(&written, s, &|s| s.set(x, new))).collect() };
    let set_r = |s: &Store| memo(&flagged, s, &|s| s.set_r(x));
    let mut out = Mapping::default();
    for (p, d) in &m.0 {
        let lists: Vec<StoreList> = if *p == t {
            dt.iter().map(|l| overwrite(l)).collect()
        } else {
            let mut acc = Vec::new();
            for l in d.iter() {
                let common: Vec<Vec<Vec<StoreList>>> = match rule {
                    WriteRule::Standard => dt.iter().map(|n| maximal_common_suffixes(l, n)).collect(),
                    WriteRule::DropWriterSuffixPremise => Vec::new(),
                };
                for k in 0..=l.len() {
                    let head: StoreList = l[..k].iter().map(set_r).collect();
                    let from = k.saturating_sub(1);
                    let tails: Vec<StoreList> = match rule {
                        WriteRule::Standard => common.iter().flat_map(|c| c[from].iter().cloned()).collect(),
                        WriteRule::DropWriterSuffixPremise => vec![l[from..].to_vec()],
                    };
                    for tail in tails {
                        let mut l2 = head.clone();
                        l2.extend(overwrite(&tail));
                        acc.push(l2);
                    }
                }
            }
            acc
        };
        let lists = lists.into_iter().filter(|l| l.len() <= bounds.max_list_len || {
            truncated = true;
            false
        });
        out.insert(*p, bounded(lists.collect(), bounds, &mut truncated));
    }
    Canon { state: out, truncated }
}

/// Canonical RMW: the canonical read with RMW flags, then the write on the
/// resulting state.
pub fn canon_rmw(m: &Mapping, t: Tid, x: Loc, v: Val, rule: WriteRule, bounds: &SraBounds) -> Vec<(Val, Canon)> {
    canon_read(m, t, x, true)
        .into_iter()
        .map(|(r, _, m2)| (r, canon_write(&m2, t, x, v, rule, bounds)))
        .collect()
}

/// Canonical join: the largest common lower bounds of the two potentials.
/// Never empty, since every list ends in the shared final store.
pub fn canon_join(m: &Mapping, t: Tid, t1: Tid, t2: Tid, bounds: &SraBounds) -> Option<Canon> {
    let (d1, d2) = (m.get(t1)?, m.get(t2)?);
    let mut lists = Vec::new();
    for a in d1 {
        for b in d2 {
            lists.extend(maximal_common(a, b));
        }
    }
    let mut truncated = false;
    let d = bounded(lists, bounds, &mut truncated);
    let mut out = m.clone();
    out.0.remove(&t1);
    out.0.remove(&t2);
    out.insert(t, d);
    Some(Canon { state: out, truncated })
}
