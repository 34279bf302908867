//! Rely-guarantee proof outlines: obligation generation for the structured
//! rules, non-interference, the auxiliary-variable rule, and discharge of the
//! obligations through memory triples and bounded implication.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::assertions::{implies, CheckParams, Counterexample};
use crate::explore::{reachable_finals_sra, ExploreOptions};
use crate::lang::{remove_aux, stmt_cmd, Assertion, Block, Clause, ClauseKind, Expr, Item, Outline, Pos, Stmt};
use crate::name::{Reg, Tid, Val};
use crate::par::{self, Mode};
use crate::sra::SraModel;
use crate::triples::{canon, check_triple, Derivation, MemoryTriple, Subject, TripleStatus};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {msg}")]
pub struct StructureError {
    pub pos: Pos,
    pub msg: String,
}

fn structure(pos: Pos, msg: impl Into<String>) -> StructureError {
    StructureError { pos, msg: msg.into() }
}

/// `{guard} τ ↦ α`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuardedCommand {
    pub guard: Assertion,
    pub tid: Tid,
    pub subject: Subject,
}

impl fmt::Display for GuardedCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}} {} ↦ {}", self.guard, self.tid, self.subject)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObligationKind {
    LocalTriple,
    Stability,
    Implication,
    LoopExit,
    ForkTriple,
    JoinTriple,
    MemStability,
    AuxSideCondition,
}

impl ObligationKind {
    pub fn name(self) -> &'static str {
        match self {
            ObligationKind::LocalTriple => "local-triple",
            ObligationKind::Stability => "stability",
            ObligationKind::Implication => "implication",
            ObligationKind::LoopExit => "loop-exit",
            ObligationKind::ForkTriple => "fork-triple",
            ObligationKind::JoinTriple => "join-triple",
            ObligationKind::MemStability => "mem-stability",
            ObligationKind::AuxSideCondition => "aux-side-condition",
        }
    }
}

/// Side conditions of the auxiliary-variable rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AuxCheck {
    /// `remove_aux` is defined on every thread.
    Removal,
    /// The assertion's truth does not depend on the values of `Z`.
    Independent(Assertion),
    /// Every state of `P` extends to a state of `P'` by choosing `Z`.
    Existence { p: Assertion, p_aux: Assertion },
    /// A premise rely assertion is lifted to its `Z`-closure.
    RelyLifting(Assertion),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Triple(MemoryTriple),
    Implication { lhs: Assertion, rhs: Assertion },
    Stable(Assertion),
    Aux(AuxCheck),
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::Triple(t) => write!(f, "{t}"),
            Payload::Implication { lhs, rhs } => write!(f, "{lhs}  ⊢  {rhs}"),
            Payload::Stable(a) => write!(f, "{a} stable under lose and dup"),
            Payload::Aux(AuxCheck::Removal) => write!(f, "auxiliary registers occur only as instrumentation"),
            Payload::Aux(AuxCheck::Independent(a)) => write!(f, "{a} independent of the auxiliary registers"),
            Payload::Aux(AuxCheck::Existence { p, p_aux }) => write!(f, "{p}  ⊢  ∃Z. {p_aux}"),
            Payload::Aux(AuxCheck::RelyLifting(a)) => write!(f, "rely {a} lifted to its Z-closure"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obligation {
    pub id: usize,
    pub kind: ObligationKind,
    pub payload: Payload,
    /// Program point and rule that produced the obligation.
    pub origin: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Proved,
    ValidBounded,
    Refuted,
    Unproved,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Proved => "proved",
            Status::ValidBounded => "valid_bounded",
            Status::Refuted => "refuted",
            Status::Unproved => "unproved",
        }
    }

    pub fn ok(self) -> bool {
        matches!(self, Status::Proved | Status::ValidBounded)
    }
}

/// A discharged obligation.
#[derive(Clone, Debug, Serialize)]
pub struct Entry {
    pub id: usize,
    pub kind: ObligationKind,
    pub origin: String,
    pub obligation: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rules: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivation: Option<Derivation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Entry {
    /// Derivation tree or counterexample, for `--explain`.
    pub fn explain(&self) -> String {
        let mut out = format!("#{} {} [{}] from {}\n  {}\n", self.id, self.status.name(), self.kind.name(), self.origin, self.obligation);
        if let Some(n) = &self.note {
            out.push_str(&format!("  {n}\n"));
        }
        if let Some(d) = &self.derivation {
            out.push_str(&d.render());
        }
        if let Some(w) = &self.witness {
            out.push_str("counterexample:\n");
            out.push_str(w);
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Totals {
    pub obligations: usize,
    pub proved: usize,
    pub valid_bounded: usize,
    pub refuted: usize,
    pub unproved: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub name: Option<String>,
    pub bounds: CheckParams,
    pub accepted: bool,
    pub totals: Totals,
    pub entries: Vec<Entry>,
}

impl Report {
    fn new(name: Option<String>, bounds: CheckParams, entries: Vec<Entry>) -> Report {
        let mut totals = Totals { obligations: entries.len(), ..Totals::default() };
        for e in &entries {
            match e.status {
                Status::Proved => totals.proved += 1,
                Status::ValidBounded => totals.valid_bounded += 1,
                Status::Refuted => totals.refuted += 1,
                Status::Unproved => totals.unproved += 1,
            }
        }
        Report { name, bounds, accepted: totals.refuted + totals.unproved == 0, totals, entries }
    }

    /// Entries that keep the outline from being accepted.
    pub fn failures(&self) -> Vec<&Entry> {
        self.entries.iter().filter(|e| !e.status.ok()).collect()
    }

    pub fn entry(&self, id: usize) -> Option<&Entry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn summary(&self) -> String {
        let t = &self.totals;
        format!(
            "{}: {} obligations, {} proved, {} valid_bounded, {} refuted, {} unproved: {}",
            self.name.as_deref().unwrap_or("outline"),
            t.obligations,
            t.proved,
            t.valid_bounded,
            t.refuted,
            t.unproved,
            if self.accepted { "accepted" } else { "rejected" }
        )
    }
}

#[derive(Clone, Debug)]
pub struct RgOptions {
    pub params: CheckParams,
    /// Put assertions that only feed a consequence step into the rely set.
    pub consequence_relies: bool,
    pub mode: Mode,
}

impl Default for RgOptions {
    fn default() -> RgOptions {
        RgOptions { params: CheckParams::default(), consequence_relies: true, mode: Mode::Parallel }
    }
}

/// Rely and guarantee sets of one thread.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RelyGuarantee {
    pub rely: Vec<Assertion>,
    pub guarantee: Vec<GuardedCommand>,
}

fn push_unique(v: &mut Vec<Assertion>, a: &Assertion) {
    let c = canon(a);
    if !v.iter().any(|b| canon(b) == c) {
        v.push(a.clone());
    }
}

fn and(a: &Assertion, e: Expr) -> Assertion {
    Assertion::and(a.clone(), Assertion::Expr(e))
}

/// Walks one thread's annotated body.
struct ThreadWalk<'a> {
    tid: Tid,
    opts: &'a RgOptions,
    out: Vec<(ObligationKind, Payload, String)>,
    rg: RelyGuarantee,
}

impl ThreadWalk<'_> {
    fn emit(&mut self, kind: ObligationKind, payload: Payload, pos: Pos, rule: &str) {
        self.out.push((kind, payload, format!("{} {pos} ({rule})", self.tid)));
    }

    fn rely(&mut self, a: &Assertion) {
        push_unique(&mut self.rg.rely, a);
    }

    fn implication(&mut self, lhs: &Assertion, rhs: &Assertion, pos: Pos, rule: &str, kind: ObligationKind) {
        if canon(lhs) != canon(rhs) {
            self.emit(kind, Payload::Implication { lhs: lhs.clone(), rhs: rhs.clone() }, pos, rule);
        }
    }

    /// Check `items` from `pre`; a trailing statement ends in `post`.
    /// Returns the assertion holding at the end.
    fn block(&mut self, pre: &Assertion, items: &Block, post: Option<&Assertion>, end: Pos) -> Result<Assertion, StructureError> {
        let mut cur = pre.clone();
        for (k, item) in items.iter().enumerate() {
            match item {
                Item::Assert(a, pos) => {
                    let feeds_consequence = matches!(items.get(k + 1), Some(Item::Assert(..)));
                    self.implication(&cur, a, *pos, "consequence", ObligationKind::Implication);
                    if !feeds_consequence || self.opts.consequence_relies {
                        self.rely(a);
                    }
                    cur = a.clone();
                }
                Item::Stmt(s, pos) => {
                    let next = match items.get(k + 1) {
                        Some(Item::Assert(a, _)) => a.clone(),
                        Some(Item::Stmt(s2, p2)) => leading_assert(s2).ok_or_else(|| structure(*p2, "missing assertion before this statement"))?,
                        None => post.cloned().ok_or_else(|| structure(end, "block must end with an assertion"))?,
                    };
                    self.stmt(&cur, s, &next, *pos)?;
                    cur = next;
                }
            }
        }
        Ok(cur)
    }

    fn stmt(&mut self, pre: &Assertion, s: &Stmt, post: &Assertion, pos: Pos) -> Result<(), StructureError> {
        match s {
            Stmt::Skip => {
                self.rely(pre);
                self.implication(pre, post, pos, "skip", ObligationKind::Implication);
            }
            Stmt::Instr(i) => {
                self.rely(pre);
                self.rely(post);
                let t = MemoryTriple::instr(pre.clone(), self.tid, i.clone(), post.clone());
                self.emit(ObligationKind::LocalTriple, Payload::Triple(t), pos, "com");
                self.rg.guarantee.push(GuardedCommand { guard: pre.clone(), tid: self.tid, subject: Subject::Instr(i.clone()) });
            }
            Stmt::If(e, a, b) => {
                self.rely(pre);
                let then_end = self.block(&and(pre, e.clone()), a, Some(post), pos)?;
                self.implication(&then_end, post, pos, "if", ObligationKind::Implication);
                let else_end = self.block(&and(pre, Expr::not(e.clone())), b, Some(post), pos)?;
                self.implication(&else_end, post, pos, "if", ObligationKind::Implication);
            }
            Stmt::While(e, body) => {
                self.rely(pre);
                self.rely(post);
                self.implication(&and(pre, Expr::not(e.clone())), post, pos, "while exit", ObligationKind::LoopExit);
                let end = self.block(&and(pre, e.clone()), body, Some(pre), pos)?;
                self.implication(&end, pre, pos, "while invariant", ObligationKind::Implication);
            }
            Stmt::DoUntil(body, e) => {
                // `C ; while ¬e do C` with the end of the body as invariant.
                self.rely(pre);
                self.rely(post);
                let end = self.block(pre, body, None, pos)?;
                self.implication(&and(&end, Expr::not(e.clone())), pre, pos, "do-until re-entry", ObligationKind::Implication);
                self.implication(&and(&end, e.clone()), post, pos, "do-until exit", ObligationKind::LoopExit);
            }
            Stmt::Group(b) => {
                let end = self.block(pre, b, Some(post), pos)?;
                self.implication(&end, post, pos, "seq", ObligationKind::Implication);
            }
            Stmt::Par(..) => return Err(structure(pos, "nested parallel composition inside an outline thread")),
        }
        Ok(())
    }
}

fn leading_assert(s: &Stmt) -> Option<Assertion> {
    match s {
        Stmt::DoUntil(b, _) | Stmt::Group(b) => match b.first() {
            Some(Item::Assert(a, _)) => Some(a.clone()),
            _ => None,
        },
        _ => None,
    }
}

fn first_assert(b: &Block) -> Option<Assertion> {
    match b.first() {
        Some(Item::Assert(a, _)) => Some(a.clone()),
        _ => None,
    }
}

fn last_assert(b: &Block) -> Option<Assertion> {
    match b.last() {
        Some(Item::Assert(a, _)) => Some(a.clone()),
        _ => None,
    }
}

fn block_pos(b: &Block) -> Pos {
    match b.first() {
        Some(Item::Assert(_, p) | Item::Stmt(_, p)) => *p,
        None => Pos::default(),
    }
}

/// Everything collected from an outline before discharge.
#[derive(Clone, Debug)]
pub struct Collected {
    pub obligations: Vec<Obligation>,
    pub rg: BTreeMap<Tid, RelyGuarantee>,
}

/// Default rely and guarantee sets: every assertion used in a thread's
/// proof, and every instruction guarded by its precondition.
pub fn extract_rely_guarantee(o: &Outline, opts: &RgOptions) -> Result<BTreeMap<Tid, RelyGuarantee>, StructureError> {
    let mut out = BTreeMap::new();
    for (t, b) in &o.threads {
        let w = walk_thread(*t, b, opts)?;
        out.insert(*t, w.rg);
    }
    Ok(out)
}

fn walk_thread<'a>(t: Tid, b: &Block, opts: &'a RgOptions) -> Result<ThreadWalk<'a>, StructureError> {
    let pos = block_pos(b);
    let pre = first_assert(b).ok_or_else(|| structure(pos, format!("thread {t} must start with its precondition")))?;
    last_assert(b).ok_or_else(|| structure(pos, format!("thread {t} must end with its postcondition")))?;
    let mut w = ThreadWalk { tid: t, opts, out: Vec::new(), rg: RelyGuarantee::default() };
    w.block(&pre, b, None, pos)?;
    Ok(w)
}

/// All obligations of an outline, in a fixed order.
pub fn collect_obligations(o: &Outline, opts: &RgOptions) -> Result<Collected, StructureError> {
    let mut raw: Vec<(ObligationKind, Payload, String)> = Vec::new();
    let mut rg = BTreeMap::new();
    let tids: Vec<Tid> = o.threads.iter().map(|p| p.0).collect();
    let mut pres = Vec::new();
    let mut posts = Vec::new();
    for (t, b) in &o.threads {
        let w = walk_thread(*t, b, opts)?;
        pres.push(first_assert(b).unwrap());
        posts.push(last_assert(b).unwrap());
        raw.extend(w.out);
        rg.insert(*t, w.rg);
    }
    apply_overrides(o, &mut rg, &mut raw)?;

    let fork = MemoryTriple::new(o.pre.clone(), o.parent, Subject::Fork(tids.clone()), Assertion::conj(pres));
    raw.push((ObligationKind::ForkTriple, Payload::Triple(fork), format!("{} (fork-join)", o.parent)));
    let join = MemoryTriple::new(Assertion::conj(posts), o.parent, Subject::Join(tids.clone()), o.post.clone());
    raw.push((ObligationKind::JoinTriple, Payload::Triple(join), format!("{} (fork-join)", o.parent)));

    // Non-interference: every rely of one thread against every guarantee of another.
    for (ti, rgi) in &rg {
        for (tj, rgj) in &rg {
            if ti == tj {
                continue;
            }
            for r in &rgi.rely {
                if canon(r).is_true() {
                    continue;
                }
                for g in &rgj.guarantee {
                    let t = MemoryTriple::new(Assertion::and(r.clone(), g.guard.clone()), g.tid, g.subject.clone(), r.clone());
                    raw.push((ObligationKind::Stability, Payload::Triple(t), format!("rely of {ti} vs guarantee of {tj} (par)")));
                }
            }
        }
    }

    // Condition (mem) on every rely assertion.
    let mut seen = Vec::new();
    for rgi in rg.values() {
        for r in &rgi.rely {
            push_unique(&mut seen, r);
        }
    }
    for r in seen {
        raw.push((ObligationKind::MemStability, Payload::Stable(r), "rely (mem)".into()));
    }

    if !o.aux.is_empty() {
        raw.extend(aux_obligations(o, &rg)?);
    }

    let obligations =
        raw.into_iter().enumerate().map(|(id, (kind, payload, origin))| Obligation { id: id + 1, kind, payload, origin }).collect();
    Ok(Collected { obligations, rg })
}

/// Explicit `rely`/`guarantee` sections replace the defaults. The derived
/// sets must then be covered: each derived rely is listed, and each executed
/// command has a listed guard implied by its precondition.
fn apply_overrides(
    o: &Outline,
    rg: &mut BTreeMap<Tid, RelyGuarantee>,
    raw: &mut Vec<(ObligationKind, Payload, String)>,
) -> Result<(), StructureError> {
    for (t, rs) in &o.rely {
        let Some(cur) = rg.get_mut(t) else {
            return Err(structure(Pos::default(), format!("rely for unknown thread {t}")));
        };
        for r in &cur.rely {
            if !rs.iter().any(|x| canon(x) == canon(r)) {
                return Err(structure(Pos::default(), format!("rely of {t} does not list {r}")));
            }
        }
        cur.rely = rs.clone();
    }
    for (t, gs) in &o.guarantee {
        let Some(cur) = rg.get_mut(t) else {
            return Err(structure(Pos::default(), format!("guarantee for unknown thread {t}")));
        };
        for g in &cur.guarantee {
            let Subject::Instr(i) = &g.subject else { continue };
            let Some((guard, _)) = gs.iter().find(|(_, j)| j == i) else {
                return Err(structure(Pos::default(), format!("guarantee of {t} has no entry for {i}")));
            };
            let payload = Payload::Implication { lhs: g.guard.clone(), rhs: guard.clone() };
            if canon(&g.guard) != canon(guard) {
                raw.push((ObligationKind::Implication, payload, format!("{t} guarantee of {i} (consequence)")));
            }
        }
        cur.guarantee = gs.iter().map(|(g, i)| GuardedCommand { guard: g.clone(), tid: *t, subject: Subject::Instr(i.clone()) }).collect();
    }
    Ok(())
}

/// Registers of `z` replaced by every combination of `values`.
fn z_instances(a: &Assertion, z: &[Reg], values: &[Val]) -> Vec<Assertion> {
    let mut out = vec![a.clone()];
    for r in z {
        out = out.iter().flat_map(|b| values.iter().map(move |v| b.subst_reg(*r, &Expr::Val(*v)))).collect();
    }
    out
}

fn aux_obligations(o: &Outline, rg: &BTreeMap<Tid, RelyGuarantee>) -> Result<Vec<(ObligationKind, Payload, String)>, StructureError> {
    let mut out = Vec::new();
    let mut push = |c: AuxCheck| out.push((ObligationKind::AuxSideCondition, Payload::Aux(c), "program (aux)".to_string()));
    push(AuxCheck::Removal);
    let z = &o.aux;
    let mentions_z = |a: &Assertion| a.regs().iter().any(|r| z.contains(r));
    let (zparts, free): (Vec<Assertion>, Vec<Assertion>) = o.pre.conjuncts().into_iter().cloned().partition(|c| mentions_z(c));
    let p = Assertion::conj(free);
    push(AuxCheck::Independent(p.clone()));
    if !zparts.is_empty() {
        push(AuxCheck::Existence { p, p_aux: o.pre.clone() });
    }
    push(AuxCheck::Independent(o.post.clone()));
    let mut lifted = Vec::new();
    for r in rg.values().flat_map(|x| x.rely.iter()) {
        if mentions_z(r) {
            push_unique(&mut lifted, r);
        }
    }
    for r in lifted {
        push(AuxCheck::RelyLifting(r));
    }
    Ok(out)
}

fn entry(o: &Obligation, status: Status) -> Entry {
    Entry {
        id: o.id,
        kind: o.kind,
        origin: o.origin.clone(),
        obligation: o.payload.to_string(),
        status,
        rules: Vec::new(),
        derivation: None,
        witness: None,
        note: None,
    }
}

fn refuted(o: &Obligation, c: &Counterexample) -> Entry {
    Entry { witness: Some(c.to_string()), ..entry(o, Status::Refuted) }
}

/// Live threads while the annotated threads run.
fn live(outline: &Outline) -> Vec<Tid> {
    outline.threads.iter().map(|p| p.0).collect()
}

fn discharge(outline: &Outline, o: &Obligation, params: &CheckParams) -> Entry {
    match &o.payload {
        Payload::Triple(t) => match check_triple(t, params) {
            TripleStatus::Proved(d) => {
                Entry { rules: d.rules().into_iter().map(|r| r.name().to_string()).collect(), derivation: Some(d), ..entry(o, Status::Proved) }
            }
            TripleStatus::ValidBounded => entry(o, Status::ValidBounded),
            TripleStatus::Refuted(c) => refuted(o, &c),
        },
        Payload::Implication { lhs, rhs } => {
            let dom = live(outline);
            match implies(lhs, rhs, Some(&dom), params) {
                Ok(()) => entry(o, Status::ValidBounded),
                Err(c) => refuted(o, &c),
            }
        }
        Payload::Stable(a) => {
            let (status, note) = check_mem_stability(a);
            Entry { note: Some(note), ..entry(o, status) }
        }
        Payload::Aux(c) => check_aux(outline, o, c, params),
    }
}

/// Condition (mem). Every assertion of the grammar is preserved by lose and
/// dup, so this holds by construction; the stability proptests back it.
pub fn check_mem_stability(a: &Assertion) -> (Status, String) {
    let _ = a;
    (Status::Proved, "potential assertions are closed under lose and dup".into())
}

fn z_values(params: &CheckParams, a: &[&Assertion]) -> Vec<Val> {
    let mut vs: BTreeSet<Val> = params.values.iter().copied().collect();
    for x in a {
        x.literals(&mut vs);
    }
    vs.into_iter().collect()
}

fn check_aux(outline: &Outline, o: &Obligation, c: &AuxCheck, params: &CheckParams) -> Entry {
    let z: Vec<Reg> = outline.aux.iter().copied().collect();
    let dom = live(outline);
    match c {
        AuxCheck::Removal => {
            for (t, b) in &outline.threads {
                let cmd = crate::lang::block_cmd(b);
                if let Err(e) = remove_aux(&cmd, &outline.aux) {
                    return Entry { note: Some(format!("thread {t}: {e}")), ..entry(o, Status::Refuted) };
                }
            }
            entry(o, Status::Proved)
        }
        AuxCheck::Independent(a) => {
            if !a.regs().iter().any(|r| outline.aux.contains(r)) {
                return Entry { note: Some("no auxiliary register occurs".into()), ..entry(o, Status::Proved) };
            }
            // Truth must not change when only Z changes.
            let used: Vec<Reg> = z.iter().copied().filter(|r| a.regs().contains(r)).collect();
            let insts = z_instances(a, &used, &z_values(params, &[a]));
            for x in &insts {
                for y in &insts {
                    if x != y {
                        if let Err(c) = implies(x, y, Some(&dom), params) {
                            return Entry { note: Some(format!("{x} does not imply {y}")), ..refuted(o, &c) };
                        }
                    }
                }
            }
            entry(o, Status::ValidBounded)
        }
        AuxCheck::Existence { p, p_aux } => {
            let closure = Assertion::disj(z_instances(p_aux, &z, &z_values(params, &[p_aux])));
            let dom = outline.pre.tids().into_iter().collect::<Vec<_>>();
            match implies(p, &closure, Some(&dom), params) {
                Ok(()) => entry(o, Status::ValidBounded),
                Err(c) => refuted(o, &c),
            }
        }
        AuxCheck::RelyLifting(_) => Entry {
            note: Some("the conclusion's rely holds the Z-closure, which is Z-independent and preserved exactly when the rely is".into()),
            ..entry(o, Status::Proved)
        },
    }
}

/// Discharge every obligation of the outline.
pub fn check_outline(o: &Outline, opts: &RgOptions) -> Result<Report, StructureError> {
    let collected = collect_obligations(o, opts)?;
    let entries = par::map(opts.mode, &collected.obligations, |ob| discharge(o, ob, &opts.params));
    Ok(Report::new(o.name.clone(), opts.params.clone(), entries))
}

/// Non-interference of rely assertions `rs` with guarded commands `gs`.
pub fn check_noninterference(rs: &[Assertion], gs: &[GuardedCommand], params: &CheckParams) -> Vec<(MemoryTriple, TripleStatus)> {
    let mut out = Vec::new();
    for r in rs {
        for g in gs {
            let t = MemoryTriple::new(Assertion::and(r.clone(), g.guard.clone()), g.tid, g.subject.clone(), r.clone());
            let s = check_triple(&t, params);
            out.push((t, s));
        }
    }
    out
}

/// Status of the auxiliary-variable rule alone.
pub fn check_aux_rule(o: &Outline, opts: &RgOptions) -> Result<Vec<Entry>, StructureError> {
    let c = collect_obligations(o, opts)?;
    Ok(c.obligations.iter().filter(|ob| ob.kind == ObligationKind::AuxSideCondition).map(|ob| discharge(o, ob, &opts.params)).collect())
}

/// Register-only form of a pot-free assertion.
pub fn assertion_expr(a: &Assertion) -> Option<Expr> {
    match a {
        Assertion::Pot(..) => None,
        Assertion::Expr(e) => Some(e.clone()),
        Assertion::And(x, y) => Some(Expr::and(assertion_expr(x)?, assertion_expr(y)?)),
        Assertion::Or(x, y) => Some(Expr::or(assertion_expr(x)?, assertion_expr(y)?)),
    }
}

/// Explore the program of an outline and check its postcondition on every
/// final state. Returns the violating outcome if there is one, and `None`
/// when the postcondition mentions potentials.
pub fn spot_check(o: &Outline, opts: &ExploreOptions) -> Option<Result<usize, String>> {
    let post = assertion_expr(&o.post)?;
    let mut spec = o.litmus();
    spec.clauses.push(Clause { kind: ClauseKind::Forbid, expr: Expr::not(post) });
    let regs: BTreeSet<Reg> = o.pool().values().flat_map(|c| c.regs()).collect();
    // Observe every register, not just those of the clauses.
    spec.clauses.push(Clause { kind: ClauseKind::Allow, expr: regs.iter().fold(Expr::tt(), |acc, r| Expr::or(acc, Expr::eq(Expr::Reg(*r), Expr::Reg(*r)))) });
    let bounds = crate::explore::default_bounds(&spec, opts.unroll);
    let out = reachable_finals_sra(&spec, &SraModel::new(bounds), opts);
    match out.satisfying(&spec.clauses[0].expr) {
        Some(bad) => Some(Err(bad.to_string())),
        None => Some(Ok(out.outcomes.len())),
    }
}

/// Program text of one annotated thread, annotations stripped.
pub fn thread_program(b: &Block) -> String {
    b.iter()
        .filter_map(|i| match i {
            Item::Stmt(s, _) => Some(stmt_cmd(s).to_string()),
            _ => None,
        })
        .collect::<Vec<_>>()
        .join("; ")
}

#[cfg(test)]
mod tests;
