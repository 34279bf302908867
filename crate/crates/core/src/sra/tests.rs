use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use super::*;
use crate::name::{t0, Name};

fn n(s: &str) -> Name {
    Name::new(s)
}

fn cell(v: Val, flag: Flag, t: &str) -> Cell {
    Cell { val: v, flag, tid: n(t) }
}

/// Store over x and y.
fn st(x: Cell, y: Cell) -> Store {
    Store::new([(n("x"), x), (n("y"), y)])
}

fn rmw(v: Val, t: &str) -> Cell {
    cell(v, Flag::Rmw, t)
}

fn r(v: Val, t: &str) -> Cell {
    cell(v, Flag::R, t)
}

fn pot(lists: Vec<StoreList>) -> Potential {
    lists.into_iter().collect()
}

fn mapping(entries: Vec<(&str, Potential)>) -> Mapping {
    let mut m = Mapping::default();
    for (t, d) in entries {
        m.insert(n(t), d);
    }
    m
}

fn init_xy() -> BTreeMap<Name, Val> {
    BTreeMap::from([(n("x"), 0), (n("y"), 0)])
}

// The message-passing walk-through: lists L, L1, L2, L1', L2', L2''.
fn mp_lists() -> (StoreList, StoreList, StoreList, StoreList, StoreList, StoreList) {
    let d0 = st(rmw(0, "t0"), rmw(0, "t0"));
    let l = vec![d0.clone(), d0.clone(), d0.clone()];
    let a = st(rmw(1, "t1"), rmw(0, "t0"));
    let l1 = vec![a.clone(), a.clone(), a.clone()];
    let l2 = vec![st(r(0, "t0"), rmw(0, "t0")), a.clone(), a.clone()];
    let b = st(rmw(1, "t1"), rmw(1, "t1"));
    let l1p = vec![b.clone(), b.clone(), b.clone()];
    let l2p = vec![st(r(0, "t0"), r(0, "t0")), st(rmw(1, "t1"), r(0, "t0")), b.clone()];
    let l2pp = vec![st(r(0, "t0"), rmw(1, "t1")), b.clone(), b.clone()];
    (l, l1, l2, l1p, l2p, l2pp)
}

#[test]
fn mp_walkthrough_follows_write_rule() {
    let (l, l1, l2, l1p, l2p, l2pp) = mp_lists();
    let (x, y) = (n("x"), n("y"));
    let s0 = mapping(vec![("t1", pot(vec![l.clone()])), ("t2", pot(vec![l.clone()]))]);
    let s1 = mapping(vec![("t1", pot(vec![l1.clone()])), ("t2", pot(vec![l2.clone()]))]);
    assert!(!write_rule_holds(&s0, n("t1"), x, 1, &s1));
    // Each write needs the writer to hold the new suffix as a list of its
    // own, which a lose step provides.
    let s0b = mapping(vec![("t1", pot(vec![l.clone(), l[1..].to_vec()])), ("t2", pot(vec![l.clone()]))]);
    assert!(map_leq(&s0b, &s0));
    assert!(write_rule_holds(&s0b, n("t1"), x, 1, &s1));
    let s1b = mapping(vec![("t1", pot(vec![l1.clone(), l1[2..].to_vec()])), ("t2", pot(vec![l2.clone()]))]);
    assert!(map_leq(&s1b, &s1));
    let s2 = mapping(vec![("t1", pot(vec![l1p.clone()])), ("t2", pot(vec![l2p.clone()]))]);
    assert!(!write_rule_holds(&s1, n("t1"), y, 1, &s2));
    assert!(write_rule_holds(&s1b, n("t1"), y, 1, &s2));
    let bad = mapping(vec![("t1", pot(vec![l1p])), ("t2", pot(vec![l2pp]))]);
    assert!(!write_rule_holds(&s1b, n("t1"), y, 1, &bad));
    for s in [&s0, &s1, &s2] {
        assert!(validate_state(s));
    }
}

#[test]
fn mp_walkthrough_canonical() {
    let (_, l1, l2, l1p, l2p, l2pp) = mp_lists();
    let (x, y, t1, t2) = (n("x"), n("y"), n("t1"), n("t2"));
    let b = SraBounds::default();
    let s0 = initial_sra(&[t1, t2], &init_xy()).unwrap();
    let s1 = canon_write(&s0, t1, x, 1, WriteRule::Standard, &b).state;
    assert!(s1.get(t1).unwrap().iter().any(|c| closure_leq(&l1, c)));
    assert!(s1.get(t2).unwrap().iter().any(|c| closure_leq(&l2, c)));
    let s2 = canon_write(&s1, t1, y, 1, WriteRule::Standard, &b).state;
    assert!(s2.get(t1).unwrap().iter().any(|c| closure_leq(&l1p, c)));
    assert!(s2.get(t2).unwrap().iter().any(|c| closure_leq(&l2p, c)));
    assert!(!s2.get(t2).unwrap().iter().any(|c| closure_leq(&l2pp, c)));
    // t2 can read y = 1 only after losing the stores where x is still 0.
    let reads = canon_read(&s2, t2, y, false);
    let (_, _, after) = reads.iter().find(|(v, _, _)| *v == 1).unwrap();
    assert_eq!(canon_read(after, t2, x, false).iter().map(|p| p.0).collect::<Vec<_>>(), vec![1]);
}

#[test]
fn order_examples() {
    let d1 = st(rmw(1, "t0"), rmw(0, "t0"));
    let d2 = st(rmw(2, "t0"), rmw(0, "t0"));
    let d3 = st(rmw(3, "t0"), rmw(0, "t0"));
    assert!(list_leq(&[d1.clone(), d3.clone()], &[d1.clone(), d2.clone(), d3.clone()]));
    assert!(list_leq(&[d1.clone(), d2.clone()], &[d1.clone(), d2.clone()]));
    assert!(!list_leq(&[d2.clone(), d1.clone()], &[d1.clone(), d2.clone()]));
    assert!(!list_leq(&[], &[d1.clone()]));
    assert!(pot_leq(&pot(vec![vec![d1.clone(), d3.clone()]]), &pot(vec![vec![d1.clone(), d2.clone(), d3.clone()]])));
    assert!(pot_leq(&pot(vec![vec![d1.clone()]]), &pot(vec![vec![d1.clone()], vec![d2.clone()]])));
    assert!(dup_leq(&[d1.clone(), d2.clone(), d3.clone()], &[d1.clone(), d2.clone(), d2.clone(), d3.clone()]));
    assert!(dup_leq(&[d1.clone(), d2.clone()], &[d1.clone(), d2.clone()]));
    assert!(!dup_leq(&[d1.clone(), d2.clone()], &[d2.clone(), d1.clone(), d2.clone()]));
    assert!(dup_list(&[d1.clone(), d2.clone()], 9).contains(&vec![d1.clone(), d1.clone(), d2.clone()]));
}

#[test]
fn initial_and_validation() {
    let s = initial_sra(&[n("t1")], &BTreeMap::from([(n("x"), 0)])).unwrap();
    assert_eq!(s.dump(), "t1: [x=0@t0:RMW]\n");
    assert!(validate_state(&s));
    assert_eq!(initial_sra(&[], &init_xy()), Err(SraError::NoThreads));
    let bad_last = mapping(vec![("t1", pot(vec![vec![st(r(0, "t0"), rmw(0, "t0"))]]))]);
    assert!(!validate_state(&bad_last));
    let f1 = st(rmw(0, "t0"), rmw(0, "t0"));
    let f2 = st(rmw(1, "t1"), rmw(0, "t0"));
    let split = mapping(vec![("t1", pot(vec![vec![f1]])), ("t2", pot(vec![vec![f2]]))]);
    assert!(!validate_state(&split));
    let (l, l1, l2, l1p, l2p, _) = mp_lists();
    for list in [l, l1, l2, l1p, l2p] {
        assert!(valid_list(&list));
    }
}

#[test]
fn read_examples() {
    let (x, t1) = (n("x"), n("t1"));
    let s = initial_sra(&[t1], &init_xy()).unwrap();
    assert_eq!(sra_read(&s, t1, x), BTreeSet::from([(0, t0())]));
    let f = st(rmw(1, "t1"), rmw(0, "t0"));
    let disagree = mapping(vec![("t1", pot(vec![vec![st(r(0, "t0"), rmw(0, "t0")), f.clone()], vec![f.clone()]]))]);
    assert!(sra_read(&disagree, t1, x).is_empty());
    let single = mapping(vec![("t1", pot(vec![vec![f.clone()]]))]);
    assert_eq!(sra_read(&single, t1, x), BTreeSet::from([(1, t1)]));
    assert_eq!(sra_rmw_read(&single, t1, x), BTreeSet::from([(1, t1)]));
    let flagged = mapping(vec![("t1", pot(vec![vec![st(r(0, "t0"), rmw(0, "t0")), f]]))]);
    assert!(sra_rmw_read(&flagged, t1, x).is_empty());
}

#[test]
fn rmw_serializes() {
    let (f, t1, t2) = (n("x"), n("t1"), n("t2"));
    let b = SraBounds::default();
    let s = initial_sra(&[t1, t2], &init_xy()).unwrap();
    let after = canon_rmw(&s, t1, f, 2, WriteRule::Standard, &b);
    assert_eq!(after.len(), 1);
    assert_eq!(after[0].0, 0);
    // The other thread can no longer swap reading the initial value.
    let second = canon_rmw(&after[0].1.state, t2, f, 3, WriteRule::Standard, &b);
    assert_eq!(second.iter().map(|p| p.0).collect::<Vec<_>>(), vec![2]);
}

#[test]
fn fork_and_join() {
    let (t0, t1, t2) = (t0(), n("t1"), n("t2"));
    let s = initial_sra(&[t0], &init_xy()).unwrap();
    let f = sra_fork(&s, t0, t1, t2).unwrap();
    assert_eq!(f.tids().collect::<Vec<_>>(), vec![t1, t2]);
    assert_eq!(f.get(t1), s.get(t0));
    let j = sra_join(&f, t0, t1, t2).unwrap();
    assert_eq!(j, s);
    let a = st(rmw(1, "t1"), rmw(0, "t0"));
    let b = st(rmw(2, "t1"), rmw(0, "t0"));
    let disjoint = mapping(vec![("t1", pot(vec![vec![st(r(0, "t0"), rmw(2, "t1")), b.clone()]])), ("t2", pot(vec![vec![b.clone()]]))]);
    assert!(sra_join(&disjoint, t0, t1, t2).is_none());
    assert_eq!(canon_join(&disjoint, t0, t1, t2, &SraBounds::default()).unwrap().state.get(t0), Some(&pot(vec![vec![b]])));
    let _ = a;
}

#[test]
fn lose_and_dup_examples() {
    let s = initial_sra(&[n("t1")], &init_xy()).unwrap();
    assert!(lose_successors(&s).contains(&s));
    let d1 = st(rmw(1, "t0"), rmw(0, "t0"));
    let d2 = st(rmw(2, "t0"), rmw(0, "t0"));
    assert!(dup_list(&[d1.clone(), d2.clone()], 8).contains(&vec![d1.clone(), d1.clone(), d2.clone()]));
    let m = mapping(vec![("t1", pot(vec![vec![d1.clone(), d2.clone()]]))]);
    let losses = lose_successors(&m);
    assert!(losses.contains(&mapping(vec![("t1", pot(vec![vec![d2.clone()]]))])));
    assert!(dup_expand(&m, 8).iter().all(|m2| m2.get(n("t1")).unwrap().iter().all(|l| dup_leq(&[d1.clone(), d2.clone()], l))));
}

// Oracles.

/// Lists obtainable from `l` by duplication and losing, up to length `max`.
fn closure_lists(l: &[Store], max: usize) -> BTreeSet<StoreList> {
    let mut out = BTreeSet::new();
    fn go(l: &[Store], from: usize, cur: &mut StoreList, max: usize, out: &mut BTreeSet<StoreList>) {
        if !cur.is_empty() {
            out.insert(cur.clone());
        }
        if cur.len() == max {
            return;
        }
        for i in from..l.len() {
            cur.push(l[i].clone());
            go(l, i, cur, max, out);
            cur.pop();
        }
    }
    go(l, 0, &mut Vec::new(), max, &mut out);
    out
}

/// The write rule applied to every lose/dup variant, keeping maximal results.
fn brute_write(m: &Mapping, t: Tid, x: Loc, v: Val) -> Mapping {
    let new = Cell { val: v, flag: Flag::Rmw, tid: t };
    let dt = m.get(t).unwrap();
    let max = m.0.values().flat_map(|d| d.iter().map(|l| l.len())).max().unwrap() * 2;
    let writer: BTreeSet<StoreList> = dt.iter().flat_map(|l| closure_lists(l, max)).collect();
    let f = dt.iter().next().unwrap().last().unwrap().clone();
    let mut out = Mapping::default();
    for (p, d) in &m.0 {
        let mut lists = Vec::new();
        if *p == t {
            lists.extend(writer.iter().map(|l| l.iter().map(|s| s.set(x, new)).collect::<StoreList>()));
        } else {
            for l in d.iter().flat_map(|l| closure_lists(l, max)) {
                for k in 0..l.len() {
                    let (l0, l1) = l.split_at(k);
                    if writer.contains(l1) {
                        let mut l2: StoreList = l0.iter().map(|s| s.set_r(x)).collect();
                        l2.extend(l1.iter().map(|s| s.set(x, new)));
                        lists.push(l2);
                    }
                }
            }
        }
        let f2 = f.set(x, new);
        out.insert(*p, antichain(lists.into_iter().filter(|l| *l.last().unwrap() == f2)));
    }
    out
}

fn brute_common(a: &[Store], b: &[Store]) -> Potential {
    let cb = closure_lists(b, b.len());
    antichain(closure_lists(a, a.len()).into_iter().filter(|l| cb.contains(l)))
}

#[derive(Clone, Debug)]
enum Op {
    Write(usize, usize, Val),
    Swap(usize, usize, Val),
    Read(usize, usize, usize),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0..3usize, 0..2usize, 1..3 as Val).prop_map(|(t, x, v)| Op::Write(t, x, v)),
        (0..3usize, 0..2usize, 1..3 as Val).prop_map(|(t, x, v)| Op::Swap(t, x, v)),
        (0..3usize, 0..2usize, 0..4usize).prop_map(|(t, x, k)| Op::Read(t, x, k)),
    ]
}

fn tids() -> [Tid; 3] {
    [n("t1"), n("t2"), n("t3")]
}

fn locs() -> [Loc; 2] {
    [n("x"), n("y")]
}

fn run(ops: &[Op]) -> Vec<Mapping> {
    let b = SraBounds { max_list_len: usize::MAX, max_pot_size: usize::MAX };
    let mut s = initial_sra(&tids(), &init_xy()).unwrap();
    let mut trace = vec![s.clone()];
    for o in ops {
        match *o {
            Op::Write(t, x, v) => s = canon_write(&s, tids()[t], locs()[x], v, WriteRule::Standard, &b).state,
            Op::Swap(t, x, v) => {
                let opts = canon_rmw(&s, tids()[t], locs()[x], v, WriteRule::Standard, &b);
                if let Some((_, c)) = opts.into_iter().next() {
                    s = c.state;
                }
            }
            Op::Read(t, x, k) => {
                let opts = canon_read(&s, tids()[t], locs()[x], false);
                s = opts[k % opts.len()].2.clone();
            }
        }
        trace.push(s.clone());
    }
    trace
}

#[test]
fn maximal_common_examples() {
    let d = |v| st(rmw(v, "t0"), rmw(0, "t0"));
    let got = maximal_common(&[d(1), d(2), d(3)], &[d(2), d(1), d(3)]);
    let want: BTreeSet<StoreList> = BTreeSet::from([vec![d(1), d(3)], vec![d(2), d(3)]]);
    assert_eq!(got.into_iter().collect::<BTreeSet<_>>(), want);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_steps_stay_valid(ops in prop::collection::vec(op(), 0..6)) {
        for s in run(&ops) {
            prop_assert!(validate_state(&s), "{}", s.dump());
        }
    }

    #[test]
    fn canonical_write_matches_bruteforce(ops in prop::collection::vec(op(), 0..4), t in 0..3usize, x in 0..2usize, v in 1..3 as Val) {
        let s = run(&ops).pop().unwrap();
        let b = SraBounds { max_list_len: usize::MAX, max_pot_size: usize::MAX };
        let got = canon_write(&s, tids()[t], locs()[x], v, WriteRule::Standard, &b).state;
        prop_assert_eq!(got, brute_write(&s, tids()[t], locs()[x], v));
    }

    #[test]
    fn maximal_common_matches_bruteforce(ops in prop::collection::vec(op(), 0..5)) {
        let s = run(&ops).pop().unwrap();
        let lists: Vec<StoreList> = s.0.values().flat_map(|d| d.iter().cloned()).collect();
        for a in &lists {
            for b in &lists {
                prop_assert_eq!(antichain(maximal_common(a, b)), brute_common(a, b));
            }
        }
    }

    #[test]
    fn write_changes_final_store_at_x_only(ops in prop::collection::vec(op(), 0..5), t in 0..3usize, x in 0..2usize, v in 1..3 as Val) {
        let s = run(&ops).pop().unwrap();
        let b = SraBounds::default();
        let s2 = canon_write(&s, tids()[t], locs()[x], v, WriteRule::Standard, &b).state;
        let last = |m: &Mapping| m.0.values().next().unwrap().iter().next().unwrap().last().unwrap().clone();
        let (f, f2) = (last(&s), last(&s2));
        prop_assert_eq!(f2.get(locs()[x]), Cell { val: v, flag: Flag::Rmw, tid: tids()[t] });
        prop_assert_eq!(f2.get(locs()[1 - x]), f.get(locs()[1 - x]));
        // Reads leave the state alone apart from losing.
        for (_, _, m2) in canon_read(&s, tids()[t], locs()[x], false) {
            prop_assert!(map_leq(&m2, &s));
        }
    }

    #[test]
    fn lossy_compatibility(ops in prop::collection::vec(op(), 0..4), pick in 0..64usize, t in 0..3usize, x in 0..2usize, v in 1..3 as Val) {
        let s = run(&ops).pop().unwrap();
        let losses = lose_successors(&s);
        let small = &losses[pick % losses.len()];
        prop_assert!(map_leq(small, &s));
        let b = SraBounds { max_list_len: usize::MAX, max_pot_size: usize::MAX };
        let covers = |lo: &Mapping, hi: &Mapping| lo.0.iter().all(|(t, d)| {
            d.iter().all(|l| hi.get(*t).unwrap().iter().any(|h| closure_leq(l, h)))
        });
        let (tt, xx) = (tids()[t], locs()[x]);
        let w_small = canon_write(small, tt, xx, v, WriteRule::Standard, &b).state;
        let w_big = canon_write(&s, tt, xx, v, WriteRule::Standard, &b).state;
        prop_assert!(covers(&w_small, &w_big));
        let big_reads = canon_read(&s, tt, xx, false);
        for (val, _, m2) in canon_read(small, tt, xx, false) {
            prop_assert!(big_reads.iter().any(|(w, _, m3)| *w == val && covers(&m2, m3)));
        }
    }
}
