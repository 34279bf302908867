//! Potential stores, store lists, potentials and potential mappings, with
//! the orders ⊑ (lose) and ≼ (duplicate) and the well-formedness checks.

use std::collections::{BTreeMap, BTreeSet};
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::name::{Loc, Tid, Val};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flag {
    R,
    Rmw,
}

/// One location entry of a potential store.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub val: Val,
    pub flag: Flag,
    pub tid: Tid,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flag = match self.flag {
            Flag::R => "R",
            Flag::Rmw => "RMW",
        };
        write!(f, "{}@{}:{}", self.val, self.tid, flag)
    }
}

/// Potential store: a total map from the program's locations to cells,
/// sorted by location. Cheap to clone; the hash is computed once.
#[derive(Clone, Debug)]
pub struct Store(Arc<[(Loc, Cell)]>, u64);

impl PartialEq for Store {
    fn eq(&self, other: &Store) -> bool {
        self.1 == other.1 && (Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0)
    }
}

impl Eq for Store {}

impl Hash for Store {
    fn hash<H: Hasher>(&self, h: &mut H) {
        h.write_u64(self.1);
    }
}

impl PartialOrd for Store {
    fn partial_cmp(&self, other: &Store) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Store {
    fn cmp(&self, other: &Store) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        self.0.cmp(&other.0)
    }
}

impl Store {
    pub fn new(cells: impl IntoIterator<Item = (Loc, Cell)>) -> Store {
        let mut v: Vec<(Loc, Cell)> = cells.into_iter().collect();
        v.sort_by_key(|p| p.0);
        v.dedup_by_key(|p| p.0);
        Store::from_sorted(v)
    }

    fn from_sorted(v: Vec<(Loc, Cell)>) -> Store {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        v.hash(&mut h);
        Store(v.into(), h.finish())
    }

    pub fn cells(&self) -> &[(Loc, Cell)] {
        &self.0
    }

    /// Cell of `x`. Panics when `x` is not a location of the store.
    pub fn get(&self, x: Loc) -> Cell {
        match self.0.binary_search_by(|p| p.0.cmp(&x)) {
            Ok(i) => self.0[i].1,
            Err(_) => panic!("location `{x}` is not part of the potential store"),
        }
    }

    pub fn has(&self, x: Loc) -> bool {
        self.0.binary_search_by(|p| p.0.cmp(&x)).is_ok()
    }

    pub fn set(&self, x: Loc, c: Cell) -> Store {
        if self.get(x) == c {
            return self.clone();
        }
        let mut v = self.0.to_vec();
        let i = v.binary_search_by(|p| p.0.cmp(&x)).unwrap_or_else(|_| panic!("unknown location `{x}`"));
        v[i].1 = c;
        Store::from_sorted(v)
    }

    /// `δ[x ↦ R]`.
    pub fn set_r(&self, x: Loc) -> Store {
        let c = self.get(x);
        if c.flag == Flag::R {
            return self.clone();
        }
        self.set(x, Cell { flag: Flag::R, ..c })
    }
}

impl fmt::Display for Store {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (x, c)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}={c}")?;
        }
        write!(f, "]")
    }
}

pub type StoreList = Vec<Store>;
pub type Potential = BTreeSet<StoreList>;

/// Potential mapping: live threads to their potentials.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mapping(pub BTreeMap<Tid, Arc<Potential>>);

impl Mapping {
    pub fn get(&self, t: Tid) -> Option<&Potential> {
        self.0.get(&t).map(|p| &**p)
    }

    pub fn insert(&mut self, t: Tid, d: Potential) {
        self.0.insert(t, Arc::new(d));
    }

    pub fn tids(&self) -> impl Iterator<Item = Tid> + '_ {
        self.0.keys().copied()
    }

    /// Total number of lists over all threads.
    pub fn list_count(&self) -> usize {
        self.0.values().map(|d| d.len()).sum()
    }

    /// Debug dump, one line per list: `tid: [x=0@t0:RMW] | [x=1@t1:RMW]`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (t, d) in &self.0 {
            for l in d.iter() {
                out.push_str(&format!("{t}: {}\n", list_string(l)));
            }
        }
        out
    }
}

pub fn list_string(l: &[Store]) -> String {
    l.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" | ")
}

/// `L' ⊑ L`: `L'` is a non-empty subsequence of `L`.
pub fn list_leq(small: &[Store], big: &[Store]) -> bool {
    if small.is_empty() {
        return false;
    }
    let mut it = big.iter();
    small.iter().all(|s| it.any(|b| b == s))
}

pub fn pot_leq(small: &Potential, big: &Potential) -> bool {
    small.iter().all(|l| big.iter().any(|b| list_leq(l, b)))
}

/// `𝒟' ⊑ 𝒟`, quantifying over the domain of `𝒟`; the domains must agree.
pub fn map_leq(small: &Mapping, big: &Mapping) -> bool {
    small.0.len() == big.0.len()
        && big.0.iter().all(|(t, d)| small.0.get(t).is_some_and(|s| pot_leq(s, d)))
}

/// `L ≼ L'`: `L'` arises from `L` by duplicating elements in place.
pub fn dup_leq(l: &[Store], l2: &[Store]) -> bool {
    if l.is_empty() || l2.len() < l.len() || l[0] != l2[0] {
        return false;
    }
    // reach[j]: l2[..=i] can be produced from l[..=j].
    let mut reach = vec![false; l.len()];
    reach[0] = true;
    for s in &l2[1..] {
        let mut next = vec![false; l.len()];
        for j in 0..l.len() {
            if reach[j] {
                if l[j] == *s {
                    next[j] = true;
                }
                if j + 1 < l.len() && l[j + 1] == *s {
                    next[j + 1] = true;
                }
            }
        }
        reach = next;
    }
    reach[l.len() - 1]
}

/// Collapse adjacent duplicates. A list and its destuttered form reach each
/// other by lose and dup steps.
pub fn destutter(mut l: StoreList) -> StoreList {
    l.dedup();
    l
}

/// Whether `small` is obtainable from `big` by duplications and losses.
pub fn closure_leq(small: &[Store], big: &[Store]) -> bool {
    let mut d = small.to_vec();
    d.dedup();
    list_leq(&d, big)
}

/// ⊑-maximal elements of a set of lists, modulo duplication.
pub fn antichain(lists: impl IntoIterator<Item = StoreList>) -> Potential {
    let mut all: Vec<StoreList> = lists.into_iter().map(destutter).collect::<BTreeSet<_>>().into_iter().collect();
    all.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    let mut keep: Vec<StoreList> = Vec::new();
    for l in all {
        if !keep.iter().any(|k| list_leq(&l, k)) {
            keep.push(l);
        }
    }
    keep.into_iter().collect()
}

/// A store list is well formed: non-empty, RMW flags monotone, last store
/// all RMW.
pub fn valid_list(l: &[Store]) -> bool {
    let Some(last) = l.last() else { return false };
    if last.cells().iter().any(|(_, c)| c.flag != Flag::Rmw) {
        return false;
    }
    let locs: Vec<Loc> = last.cells().iter().map(|p| p.0).collect();
    l.iter().all(|s| s.cells().iter().map(|p| p.0).eq(locs.iter().copied()))
        && l.windows(2).all(|w| {
            w[0].cells().iter().zip(w[1].cells()).all(|((_, a), (_, b))| a.flag == Flag::R || b.flag == Flag::Rmw)
        })
}

/// All lists well formed, potentials non-empty, and one shared final store.
pub fn validate_state(m: &Mapping) -> bool {
    let mut last: Option<&Store> = None;
    for d in m.0.values() {
        if d.is_empty() {
            return false;
        }
        for l in d.iter() {
            if !valid_list(l) {
                return false;
            }
            let f = l.last().unwrap();
            match last {
                None => last = Some(f),
                Some(g) if g != f => return false,
                _ => {}
            }
        }
    }
    true
}

/// Maximal common subsequences of `a` and `b`.
pub fn maximal_common(a: &[Store], b: &[Store]) -> Vec<StoreList> {
    maximal_common_suffixes(a, b).swap_remove(0)
}

/// `maximal_common(&a[i..], b)` for every `i` in `0..=a.len()`.
pub fn maximal_common_suffixes(a: &[Store], b: &[Store]) -> Vec<Vec<StoreList>> {
    let (n, m) = (a.len(), b.len());
    if list_leq(a, b) {
        let mut out: Vec<Vec<StoreList>> = (0..n).map(|i| vec![a[i..].to_vec()]).collect();
        out.push(Vec::new());
        return out;
    }
    // table[i][j]: maximal common subsequences of a[i..] and b[j..].
    let mut table: Vec<Vec<Vec<StoreList>>> = vec![vec![Vec::new(); m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            let mut cand: Vec<StoreList> = Vec::new();
            if a[i] == b[j] {
                if table[i + 1][j + 1].is_empty() {
                    cand.push(vec![a[i].clone()]);
                } else {
                    for t in &table[i + 1][j + 1] {
                        let mut l = Vec::with_capacity(t.len() + 1);
                        l.push(a[i].clone());
                        l.extend(t.iter().cloned());
                        cand.push(l);
                    }
                }
            }
            cand.extend(table[i + 1][j].iter().cloned());
            cand.extend(table[i][j + 1].iter().cloned());
            table[i][j] = maximal_only(cand);
        }
    }
    table.into_iter().map(|mut row| std::mem::take(&mut row[0])).collect()
}

fn maximal_only(mut cand: Vec<StoreList>) -> Vec<StoreList> {
    cand.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    cand.dedup();
    let mut keep: Vec<StoreList> = Vec::new();
    for l in cand {
        if !keep.iter().any(|k| list_leq(&l, k)) {
            keep.push(l);
        }
    }
    keep
}
