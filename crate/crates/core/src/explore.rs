//! Bounded exhaustive exploration of the concurrent system, litmus verdicts
//! and model comparison.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use indexmap::IndexMap;
use serde::Serialize;

use crate::lang::{unroll, ClauseKind, CommandPool, Env, Expr, LitmusSpec};
use crate::memory::{system_step, Config, MemoryModel, ScModel, SysLabel};
use crate::name::{Loc, Reg, Tid, Val};
use crate::opsem::{is_final, Label, RegStore};
use crate::par::{self, Mode};
use crate::sra::{SraBounds, SraModel};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExploreOptions {
    /// Loop unrolling depth.
    pub unroll: usize,
    /// Stop after this many distinct configurations.
    pub max_states: usize,
    #[serde(skip)]
    pub mode: Mode,
}

impl Default for ExploreOptions {
    fn default() -> ExploreOptions {
        ExploreOptions { unroll: 2, max_states: 2_000_000, mode: Mode::Parallel }
    }
}

/// Final values of the observed registers, in register order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Outcome(pub Vec<(Reg, Val)>);

impl Env for Outcome {
    fn reg(&self, r: Reg) -> Val {
        self.0.iter().find(|p| p.0 == r).map_or(0, |p| p.1)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(r, v)| format!("{r}={v}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl Serialize for Outcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (r, v) in &self.0 {
            m.serialize_entry(r.as_str(), v)?;
        }
        m.end()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub states: usize,
    pub transitions: usize,
    pub millis: u128,
}

/// Labeled steps of a run; silent steps are left out.
pub type Witness = Vec<(Tid, Label)>;

pub fn witness_strings(w: &Witness) -> Vec<String> {
    w.iter().map(|(t, l)| format!("{t}:{l}")).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OutcomeSet {
    pub regs: Vec<Reg>,
    pub outcomes: BTreeSet<Outcome>,
    /// Some potential was cut to the list bound.
    pub truncated: bool,
    /// Some run reached the loop unrolling bound.
    pub cutoff: bool,
    pub budget_exceeded: bool,
    pub stats: Stats,
    /// A shortest run to each outcome.
    pub witnesses: BTreeMap<Outcome, Witness>,
}

impl OutcomeSet {
    /// No bound influenced the result.
    pub fn exact(&self) -> bool {
        !self.truncated && !self.cutoff && !self.budget_exceeded
    }

    pub fn contains(&self, o: &Outcome) -> bool {
        self.outcomes.contains(o)
    }

    pub fn satisfying(&self, e: &Expr) -> Option<&Outcome> {
        self.outcomes.iter().find(|o| e.holds(*o))
    }
}

/// Every location of the program and its initial value.
pub fn initial_memory(spec: &LitmusSpec) -> BTreeMap<Loc, Val> {
    let mut locs: BTreeSet<Loc> = spec.classes.locs.clone();
    for c in spec.pool.values() {
        locs.extend(c.locs());
    }
    locs.into_iter().map(|x| (x, spec.init_of(x))).collect()
}

pub fn unrolled_pool(pool: &CommandPool, k: usize) -> CommandPool {
    pool.iter().map(|(t, c)| (*t, if c.has_loops() { unroll(c, k) } else { c.clone() })).collect()
}

/// Default SRA bounds: list length one above the number of writes in the
/// unrolled program (never reached), eight lists per potential.
pub fn default_bounds(spec: &LitmusSpec, k: usize) -> SraBounds {
    let writes: usize = unrolled_pool(&spec.pool, k).values().map(|c| c.write_count()).sum();
    SraBounds { max_list_len: writes + 2, max_pot_size: 8 }
}

pub fn initial_config<M: MemoryModel>(spec: &LitmusSpec, model: &M, k: usize) -> Config<M::State> {
    let pool = unrolled_pool(&spec.pool, k);
    let tids: Vec<Tid> = pool.keys().copied().collect();
    let mem = model.initial(&tids, &initial_memory(spec));
    Config { pool, regs: RegStore::new(), mem }
}

pub fn project_regs(regs: &[Reg], g: &RegStore) -> Outcome {
    Outcome(g.project(regs))
}

/// All observed final register stores.
pub fn reachable_finals<M: MemoryModel>(spec: &LitmusSpec, model: &M, opts: &ExploreOptions) -> OutcomeSet {
    let start = Instant::now();
    let regs = spec.observed_regs();
    let mut out = OutcomeSet { regs: regs.clone(), ..OutcomeSet::default() };
    let init = initial_config(spec, model, opts.unroll);
    let mut seen: IndexMap<Config<M::State>, (usize, Option<SysLabel>)> = IndexMap::new();
    seen.insert(init, (usize::MAX, None));
    let mut frontier: Vec<usize> = vec![0];
    let mut final_at: BTreeMap<Outcome, usize> = BTreeMap::new();
    'search: while !frontier.is_empty() {
        let configs: Vec<Config<M::State>> = frontier.iter().map(|i| seen.get_index(*i).unwrap().0.clone()).collect();
        let succs = par::map(opts.mode, &configs, |c| system_step(model, c));
        let mut next = Vec::new();
        for ((idx, cfg), (steps, info)) in frontier.iter().zip(&configs).zip(succs) {
            out.cutoff |= info.cutoff;
            if is_final(&cfg.pool) {
                final_at.entry(project_regs(&regs, &cfg.regs)).or_insert(*idx);
            }
            out.stats.transitions += steps.len();
            for (l, c2) in steps {
                if seen.contains_key(&c2) {
                    continue;
                }
                if seen.len() >= opts.max_states {
                    out.budget_exceeded = true;
                    break 'search;
                }
                let (j, _) = seen.insert_full(c2, (*idx, Some(l)));
                next.push(j);
            }
        }
        frontier = next;
    }
    for (o, idx) in final_at {
        let mut w = Vec::new();
        let mut i = idx;
        while let Some((_, (parent, label))) = seen.get_index(i) {
            if let Some(SysLabel::Cmp(t, Some(l))) = label {
                w.push((*t, *l));
            }
            i = *parent;
        }
        w.reverse();
        out.outcomes.insert(o.clone());
        out.witnesses.insert(o, w);
    }
    out.stats.states = seen.len();
    out.stats.millis = start.elapsed().as_millis();
    out
}

/// Run `model` on `spec` and also report whether it truncated anything.
pub fn reachable_finals_sra(spec: &LitmusSpec, model: &SraModel, opts: &ExploreOptions) -> OutcomeSet {
    model.reset_truncation();
    let mut out = reachable_finals(spec, model, opts);
    out.truncated = model.truncated();
    out
}

/// Whether `w` replays through `system_step` to a final configuration whose
/// observed registers are `expect`. Silent and internal steps are searched.
pub fn replay<M: MemoryModel>(spec: &LitmusSpec, model: &M, k: usize, w: &Witness, expect: &Outcome) -> bool {
    let regs = spec.observed_regs();
    let closure = |start: Vec<Config<M::State>>| -> Vec<Config<M::State>> {
        let mut seen: IndexMap<Config<M::State>, ()> = start.into_iter().map(|c| (c, ())).collect();
        let mut i = 0;
        while i < seen.len() {
            let c = seen.get_index(i).unwrap().0.clone();
            for (l, c2) in system_step(model, &c).0 {
                if matches!(l, SysLabel::Cmp(_, None) | SysLabel::Mem) {
                    seen.insert(c2, ());
                }
            }
            i += 1;
        }
        seen.into_keys().collect()
    };
    let mut cur = closure(vec![initial_config(spec, model, k)]);
    for (t, l) in w {
        let want = SysLabel::Cmp(*t, Some(*l));
        let next: Vec<Config<M::State>> =
            cur.iter().flat_map(|c| system_step(model, c).0).filter(|(l2, _)| *l2 == want).map(|p| p.1).collect();
        if next.is_empty() {
            return false;
        }
        cur = closure(next);
    }
    cur.iter().any(|c| is_final(&c.pool) && project_regs(&regs, &c.regs) == *expect)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub kind: ClauseKind,
    pub clause: String,
    pub holds: bool,
    /// `allowed`, `forbidden`, `forbidden within bounds`, `violated`, or
    /// `not found within bounds`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
}

/// Evaluate the clauses against an outcome set.
pub fn verdicts(spec: &LitmusSpec, out: &OutcomeSet) -> Vec<Verdict> {
    spec.clauses
        .iter()
        .map(|c| {
            let hit = out.satisfying(&c.expr).cloned();
            let (holds, status) = match (c.kind, &hit, out.exact()) {
                (ClauseKind::Forbid, None, true) => (true, "forbidden"),
                (ClauseKind::Forbid, None, false) => (true, "forbidden within bounds"),
                (ClauseKind::Forbid, Some(_), _) => (false, "violated"),
                (ClauseKind::Allow, Some(_), _) => (true, "allowed"),
                (ClauseKind::Allow, None, true) => (false, "violated"),
                (ClauseKind::Allow, None, false) => (false, "not found within bounds"),
            };
            let witness = hit.as_ref().and_then(|o| out.witnesses.get(o)).map(witness_strings);
            Verdict { kind: c.kind, clause: c.expr.to_string(), holds, status: status.into(), outcome: hit, witness }
        })
        .collect()
}

/// Outcome set plus clause verdicts.
#[derive(Clone, Debug)]
pub struct LitmusResult {
    pub model: &'static str,
    pub outcomes: OutcomeSet,
    pub verdicts: Vec<Verdict>,
}

impl LitmusResult {
    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(|v| v.holds)
    }
}

pub fn check_litmus<M: MemoryModel>(spec: &LitmusSpec, model: &M, opts: &ExploreOptions) -> LitmusResult {
    let outcomes = reachable_finals(spec, model, opts);
    LitmusResult { model: model.name(), verdicts: verdicts(spec, &outcomes), outcomes }
}

pub fn check_litmus_sra(spec: &LitmusSpec, model: &SraModel, opts: &ExploreOptions) -> LitmusResult {
    let outcomes = reachable_finals_sra(spec, model, opts);
    LitmusResult { model: model.name(), verdicts: verdicts(spec, &outcomes), outcomes }
}

/// Outcome sets of SC, SRA and (when it applies) the execution-graph oracle.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub sc: OutcomeSet,
    pub sra: OutcomeSet,
    pub oracle: Option<OutcomeSet>,
}

impl Comparison {
    pub fn sra_only(&self) -> Vec<&Outcome> {
        self.sra.outcomes.difference(&self.sc.outcomes).collect()
    }

    pub fn sc_only(&self) -> Vec<&Outcome> {
        self.sc.outcomes.difference(&self.sra.outcomes).collect()
    }

    /// SRA and the oracle agree, or there is no oracle column.
    pub fn oracle_agrees(&self) -> bool {
        self.oracle.as_ref().is_none_or(|o| o.outcomes == self.sra.outcomes)
    }
}

pub fn compare_models(spec: &LitmusSpec, bounds: &SraBounds, opts: &ExploreOptions) -> Comparison {
    let sc = reachable_finals(spec, &ScModel, opts);
    let sra = reachable_finals_sra(spec, &SraModel::new(bounds.clone()), opts);
    let oracle = crate::graphs::oracle_finals(spec, opts).ok();
    Comparison { sc, sra, oracle }
}

/// Convenience for tests and tools: a pool with one thread per command.
pub fn pool_of(threads: Vec<(Tid, crate::lang::Cmd)>) -> CommandPool {
    threads.into_iter().map(|(t, c)| (t, Arc::new(c))).collect()
}
