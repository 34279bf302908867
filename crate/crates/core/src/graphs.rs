//! Declarative execution-graph oracle for SRA and SC on loop-free programs.
//!
//! Graphs are built by running the threads in every interleaving, where each
//! read picks its rf source among the writes already present. Every graph
//! with acyclic `po ∪ rf` arises this way, which covers all SRA-consistent
//! graphs. Complete graphs are then checked against every modification
//! order.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use crate::explore::{initial_memory, project_regs, unrolled_pool, ExploreOptions, OutcomeSet};
use crate::lang::{Cmd, CommandPool, LitmusSpec, Prim};
use crate::name::{t0, Loc, Reg, Tid, Val};
use crate::opsem::{control_step, instr_effect, plug, redex, RegStore};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    W,
    R,
    U,
}

/// Position of an event: thread and index in that thread's program order.
/// Initialization writes belong to `t0`, one per location in location order.
pub type EventId = (Tid, usize);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    pub kind: EventKind,
    pub loc: Loc,
    /// Value read (reads and updates).
    pub vr: Val,
    /// Value written (writes and updates).
    pub vw: Val,
    pub rf: Option<EventId>,
}

impl Event {
    pub fn writes(&self) -> bool {
        self.kind != EventKind::R
    }
    pub fn reads(&self) -> bool {
        self.kind != EventKind::W
    }
}

/// Events per thread in program order, with rf edges; `mo` lists the writes
/// of each location, initialization first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExecutionGraph {
    pub threads: BTreeMap<Tid, Vec<Event>>,
    pub mo: BTreeMap<Loc, Vec<EventId>>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("the graph oracle needs top-level threads only; `{0}` forks")]
    NestedPar(Tid),
    #[error("register `{0}` is used by more than one thread")]
    SharedRegister(Reg),
}

impl ExecutionGraph {
    pub fn event(&self, id: EventId) -> &Event {
        &self.threads[&id.0][id.1]
    }

    pub fn ids(&self) -> Vec<EventId> {
        self.threads.iter().flat_map(|(t, evs)| (0..evs.len()).map(move |i| (*t, i))).collect()
    }

    /// DOT rendering for debugging.
    pub fn dot(&self) -> String {
        let mut s = String::from("digraph G {\n");
        let name = |id: EventId| format!("\"{}_{}\"", id.0, id.1);
        for (t, evs) in &self.threads {
            for (i, e) in evs.iter().enumerate() {
                let label = match e.kind {
                    EventKind::W => format!("W({},{})", e.loc, e.vw),
                    EventKind::R => format!("R({},{})", e.loc, e.vr),
                    EventKind::U => format!("U({},{},{})", e.loc, e.vr, e.vw),
                };
                let _ = writeln!(s, "  {} [label=\"{t}: {label}\"];", name((*t, i)));
                if i > 0 {
                    let _ = writeln!(s, "  {} -> {} [label=po];", name((*t, i - 1)), name((*t, i)));
                }
                if let Some(src) = e.rf {
                    let _ = writeln!(s, "  {} -> {} [label=rf, color=green];", name(src), name((*t, i)));
                }
            }
        }
        for ws in self.mo.values() {
            for w in ws.windows(2) {
                let _ = writeln!(s, "  {} -> {} [label=mo, color=red];", name(w[0]), name(w[1]));
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Boolean relation on event indices with transitive closure.
struct Rel {
    n: usize,
    m: Vec<bool>,
}

impl Rel {
    fn new(n: usize) -> Rel {
        Rel { n, m: vec![false; n * n] }
    }
    fn add(&mut self, a: usize, b: usize) {
        self.m[a * self.n + b] = true;
    }
    fn get(&self, a: usize, b: usize) -> bool {
        self.m[a * self.n + b]
    }
    fn closure(&mut self) {
        let n = self.n;
        for k in 0..n {
            for i in 0..n {
                if self.m[i * n + k] {
                    for j in 0..n {
                        if self.m[k * n + j] {
                            self.m[i * n + j] = true;
                        }
                    }
                }
            }
        }
    }
    fn acyclic(&self) -> bool {
        (0..self.n).all(|i| !self.get(i, i))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axioms {
    Sra,
    Sc,
}

fn check(g: &ExecutionGraph, ax: Axioms) -> bool {
    let ids = g.ids();
    let index: BTreeMap<EventId, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let n = ids.len();
    let mut po_rf = Rel::new(n);
    let init = t0();
    for (i, a) in ids.iter().enumerate() {
        for (j, b) in ids.iter().enumerate() {
            let po = (a.0 == b.0 && a.1 < b.1 && a.0 != init) || (a.0 == init && b.0 != init);
            if po {
                po_rf.add(i, j);
            }
        }
        if let Some(src) = g.event(*a).rf {
            po_rf.add(index[&src], i);
        }
    }
    // mo position of each write.
    let mut mo_pos: BTreeMap<EventId, usize> = BTreeMap::new();
    for ws in g.mo.values() {
        for (k, w) in ws.iter().enumerate() {
            mo_pos.insert(*w, k);
        }
    }
    let mut all = Rel { n, m: po_rf.m.clone() };
    for ws in g.mo.values() {
        for (k, a) in ws.iter().enumerate() {
            for b in &ws[k + 1..] {
                all.add(index[a], index[b]);
            }
        }
    }
    // fr: reads to writes mo-after their source.
    let mut fr: Vec<(usize, usize)> = Vec::new();
    for (i, id) in ids.iter().enumerate() {
        let e = g.event(*id);
        if let Some(src) = e.rf {
            let ws = &g.mo[&e.loc];
            let k = mo_pos[&src];
            for w in &ws[k + 1..] {
                if w != id {
                    fr.push((i, index[w]));
                }
            }
            // Updates read their immediate mo predecessor.
            if e.kind == EventKind::U && ws.get(k + 1) != Some(id) {
                return false;
            }
        }
    }
    match ax {
        Axioms::Sra => {
            all.closure();
            if !all.acyclic() {
                return false;
            }
            po_rf.closure();
            fr.iter().all(|(r, w)| !po_rf.get(*w, *r))
        }
        Axioms::Sc => {
            for (r, w) in fr {
                all.add(r, w);
            }
            all.closure();
            all.acyclic()
        }
    }
}

fn permutations(items: &[EventId]) -> Vec<Vec<EventId>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// A modification order making `g` consistent, if there is one.
pub fn find_mo(g: &ExecutionGraph, ax: Axioms) -> Option<BTreeMap<Loc, Vec<EventId>>> {
    let mut writes: BTreeMap<Loc, (EventId, Vec<EventId>)> = BTreeMap::new();
    let init = t0();
    for id in g.ids() {
        let e = g.event(id);
        if e.writes() {
            let entry = writes.entry(e.loc).or_insert(((init, usize::MAX), Vec::new()));
            if id.0 == init {
                entry.0 = id;
            } else {
                entry.1.push(id);
            }
        }
    }
    let locs: Vec<Loc> = writes.keys().copied().collect();
    let choices: Vec<Vec<Vec<EventId>>> = locs
        .iter()
        .map(|x| {
            let (i, rest) = &writes[x];
            permutations(rest).into_iter().map(|mut p| {
                p.insert(0, *i);
                p
            }).collect()
        })
        .collect();
    let mut pick = vec![0usize; locs.len()];
    loop {
        let mut h = g.clone();
        h.mo = locs.iter().zip(&pick).map(|(x, k)| (*x, choices[locs.iter().position(|y| y == x).unwrap()][*k].clone())).collect();
        if check(&h, ax) {
            return Some(h.mo);
        }
        // Next combination.
        let mut i = 0;
        loop {
            if i == pick.len() {
                return None;
            }
            pick[i] += 1;
            if pick[i] < choices[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

pub fn sra_consistent(g: &ExecutionGraph) -> bool {
    find_mo(g, Axioms::Sra).is_some()
}

pub fn sc_consistent(g: &ExecutionGraph) -> bool {
    find_mo(g, Axioms::Sc).is_some()
}

/// Check `g` with its own `mo`.
pub fn consistent_with_mo(g: &ExecutionGraph, ax: Axioms) -> bool {
    check(g, ax)
}

/// Candidate graphs of complete runs with their final registers.
#[derive(Clone, Debug, Default)]
pub struct Candidates {
    pub graphs: Vec<(ExecutionGraph, RegStore)>,
    pub cutoff: bool,
    pub budget_exceeded: bool,
}

fn check_shape(pool: &CommandPool) -> Result<(), GraphError> {
    let mut owner: BTreeMap<Reg, Tid> = BTreeMap::new();
    for (t, c) in pool {
        if !crate::lang::tids_of(c).is_empty() {
            return Err(GraphError::NestedPar(*t));
        }
        for r in c.regs() {
            if let Some(u) = owner.insert(r, *t) {
                if u != *t {
                    return Err(GraphError::SharedRegister(r));
                }
            }
        }
    }
    Ok(())
}

/// Every complete candidate graph (rf chosen, mo empty) of the program.
pub fn enumerate_executions(spec: &LitmusSpec, opts: &ExploreOptions) -> Result<Candidates, GraphError> {
    let pool = unrolled_pool(&spec.pool, opts.unroll);
    check_shape(&pool)?;
    let mem = initial_memory(spec);
    let mut g = ExecutionGraph::default();
    g.threads.insert(
        t0(),
        mem.iter().map(|(x, v)| Event { kind: EventKind::W, loc: *x, vr: 0, vw: *v, rf: None }).collect(),
    );
    for t in pool.keys() {
        g.threads.insert(*t, Vec::new());
    }
    type Node = (CommandPool, RegStore, ExecutionGraph);
    let mut seen: HashSet<Node> = HashSet::new();
    let mut stack: Vec<Node> = vec![(pool, RegStore::new(), g)];
    let mut out = Candidates::default();
    let mut done: BTreeSet<(ExecutionGraph, RegStore)> = BTreeSet::new();
    while let Some((pool, regs, g)) = stack.pop() {
        if !seen.insert((pool.clone(), regs.clone(), g.clone())) {
            continue;
        }
        if seen.len() > opts.max_states {
            out.budget_exceeded = true;
            break;
        }
        if pool.values().all(|c| c.is_skip()) {
            done.insert((g, regs));
            continue;
        }
        for (t, c) in &pool {
            if let Some(c2) = control_step(c, &regs) {
                let mut p = pool.clone();
                p.insert(*t, c2);
                stack.push((p, regs.clone(), g.clone()));
                continue;
            }
            let i = match redex(c) {
                Cmd::Instr(i) => i,
                Cmd::Cutoff => {
                    out.cutoff = true;
                    continue;
                }
                _ => continue,
            };
            let mut p = pool.clone();
            p.insert(*t, plug(c, Arc::new(Cmd::Skip)));
            let writes_to = |x: Loc| -> Vec<(EventId, Val)> {
                g.ids().into_iter().filter(|id| g.event(*id).writes() && g.event(*id).loc == x).map(|id| (id, g.event(id).vw)).collect()
            };
            let push_event = |e: Event| -> ExecutionGraph {
                let mut h = g.clone();
                h.threads.get_mut(t).unwrap().push(e);
                h
            };
            match &i.prim {
                Prim::Assign(..) => {
                    let (_, r2) = instr_effect(i, &regs, 0);
                    stack.push((p, r2, g.clone()));
                }
                Prim::Store(x, e) => {
                    let v = e.eval(&regs);
                    let (_, r2) = instr_effect(i, &regs, 0);
                    stack.push((p, r2, push_event(Event { kind: EventKind::W, loc: *x, vr: 0, vw: v, rf: None })));
                }
                Prim::Load(_, x) => {
                    for (src, v) in writes_to(*x) {
                        let (_, r2) = instr_effect(i, &regs, v);
                        stack.push((p.clone(), r2, push_event(Event { kind: EventKind::R, loc: *x, vr: v, vw: 0, rf: Some(src) })));
                    }
                }
                Prim::Swap(x, e) => {
                    let w = e.eval(&regs);
                    for (src, v) in writes_to(*x) {
                        let (_, r2) = instr_effect(i, &regs, v);
                        stack.push((p.clone(), r2, push_event(Event { kind: EventKind::U, loc: *x, vr: v, vw: w, rf: Some(src) })));
                    }
                }
            }
        }
    }
    out.graphs = done.into_iter().collect();
    Ok(out)
}

/// Final observed registers of the consistent complete executions.
pub fn oracle_finals_with(spec: &LitmusSpec, opts: &ExploreOptions, ax: Axioms) -> Result<OutcomeSet, GraphError> {
    let start = Instant::now();
    let cands = enumerate_executions(spec, opts)?;
    let regs = spec.observed_regs();
    let mut out = OutcomeSet { regs: regs.clone(), cutoff: cands.cutoff, budget_exceeded: cands.budget_exceeded, ..OutcomeSet::default() };
    out.stats.states = cands.graphs.len();
    let results = crate::par::map(opts.mode, &cands.graphs, |(g, r)| find_mo(g, ax).map(|_| project_regs(&regs, r)));
    out.outcomes = results.into_iter().flatten().collect();
    out.stats.millis = start.elapsed().as_millis();
    Ok(out)
}

pub fn oracle_finals(spec: &LitmusSpec, opts: &ExploreOptions) -> Result<OutcomeSet, GraphError> {
    oracle_finals_with(spec, opts, Axioms::Sra)
}
