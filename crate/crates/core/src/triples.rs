//! Memory triples `{φ} τ ↦ α {ψ}` for SRA: the axiom schemas, the load
//! shift rule, the rule for instrumented commands, the structural rules, and
//! a bounded semantic check of triple validity.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

use crate::assertions::{implies, minimize, pots_to_mapping, sat_pots, CheckParams, Counterexample, Pots, Space};
use crate::lang::{Assertion, Expr, Instr, Interval, Prim};
use crate::name::{Loc, Tid, Val};
use crate::opsem::{apply_aux, instr_effect, RegStore};
use crate::sra::{Flag, StoreList};

/// What a triple talks about: one step of thread `τ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Subject {
    Instr(Instr),
    Fork(Vec<Tid>),
    Join(Vec<Tid>),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |ts: &[Tid]| ts.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",");
        match self {
            Subject::Instr(i) => write!(f, "{i}"),
            Subject::Fork(ts) => write!(f, "FORK({})", names(ts)),
            Subject::Join(ts) => write!(f, "JOIN({})", names(ts)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MemoryTriple {
    pub pre: Assertion,
    pub tid: Tid,
    pub subject: Subject,
    pub post: Assertion,
}

impl MemoryTriple {
    pub fn new(pre: Assertion, tid: Tid, subject: Subject, post: Assertion) -> MemoryTriple {
        MemoryTriple { pre, tid, subject, post }
    }

    pub fn instr(pre: Assertion, tid: Tid, i: Instr, post: Assertion) -> MemoryTriple {
        MemoryTriple::new(pre, tid, Subject::Instr(i), post)
    }

    fn with(&self, pre: Assertion, post: Assertion) -> MemoryTriple {
        MemoryTriple { pre, tid: self.tid, subject: self.subject.clone(), post }
    }

    /// Threads with a potential before the step.
    pub fn dom_before(&self) -> Vec<Tid> {
        let mut d = self.others();
        match &self.subject {
            Subject::Join(ch) => d.extend(ch.iter().copied()),
            _ => {
                d.insert(self.tid);
            }
        }
        d.into_iter().collect()
    }

    /// Threads mentioned by the triple other than the subject's.
    fn others(&self) -> BTreeSet<Tid> {
        let mut all: BTreeSet<Tid> = self.pre.tids().union(&self.post.tids()).copied().collect();
        all.remove(&self.tid);
        if let Subject::Fork(ch) | Subject::Join(ch) = &self.subject {
            for c in ch {
                all.remove(c);
            }
        }
        all
    }
}

impl fmt::Display for MemoryTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}} {} ↦ {} {{{}}}", self.pre, self.tid, self.subject, self.post)
    }
}

/// Rules of the triple calculus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Rule {
    #[serde(rename = "Subst-asgn")]
    SubstAsgn,
    #[serde(rename = "Stable-wr")]
    StableWr,
    #[serde(rename = "Stable-ld")]
    StableLd,
    #[serde(rename = "Stable-fork")]
    StableFork,
    #[serde(rename = "Stable-join")]
    StableJoin,
    Fork,
    Join,
    #[serde(rename = "Wr-own")]
    WrOwn,
    #[serde(rename = "Wr-other-1")]
    WrOther1,
    #[serde(rename = "Wr-other-2")]
    WrOther2,
    #[serde(rename = "Wr-other-3")]
    WrOther3,
    #[serde(rename = "Swap-skip")]
    SwapSkip,
    #[serde(rename = "Ld-shift")]
    LdShift,
    Instr,
    Conj,
    Disj,
    Consequence,
    Semantic,
}

impl Rule {
    /// Axiom rows, in table order.
    pub const AXIOMS: [Rule; 12] = [
        Rule::SubstAsgn,
        Rule::StableWr,
        Rule::StableLd,
        Rule::StableFork,
        Rule::StableJoin,
        Rule::Fork,
        Rule::Join,
        Rule::WrOwn,
        Rule::WrOther1,
        Rule::WrOther2,
        Rule::WrOther3,
        Rule::SwapSkip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::SubstAsgn => "Subst-asgn",
            Rule::StableWr => "Stable-wr",
            Rule::StableLd => "Stable-ld",
            Rule::StableFork => "Stable-fork",
            Rule::StableJoin => "Stable-join",
            Rule::Fork => "Fork",
            Rule::Join => "Join",
            Rule::WrOwn => "Wr-own",
            Rule::WrOther1 => "Wr-other-1",
            Rule::WrOther2 => "Wr-other-2",
            Rule::WrOther3 => "Wr-other-3",
            Rule::SwapSkip => "Swap-skip",
            Rule::LdShift => "Ld-shift",
            Rule::Instr => "Instr",
            Rule::Conj => "Conj",
            Rule::Disj => "Disj",
            Rule::Consequence => "Consequence",
            Rule::Semantic => "Semantic",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A derivation tree. `triple` is the conclusion, `evidence` records the
/// instantiation and the side conditions that were checked.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Derivation {
    pub rule: Rule,
    pub triple: String,
    pub evidence: Vec<String>,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    fn leaf(rule: Rule, t: &MemoryTriple, evidence: Vec<String>) -> Derivation {
        Derivation { rule, triple: t.to_string(), evidence, premises: Vec::new() }
    }

    fn node(rule: Rule, t: &MemoryTriple, evidence: Vec<String>, premises: Vec<Derivation>) -> Derivation {
        Derivation { rule, triple: t.to_string(), evidence, premises }
    }

    /// Rules used anywhere in the tree.
    pub fn rules(&self) -> BTreeSet<Rule> {
        let mut out = BTreeSet::from([self.rule]);
        for p in &self.premises {
            out.extend(p.rules());
        }
        out
    }

    /// Indented tree, one node per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(0, &mut out);
        out
    }

    fn render_into(&self, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        out.push_str(&format!("{pad}[{}] {}\n", self.rule, self.triple));
        for e in &self.evidence {
            out.push_str(&format!("{pad}    where {e}\n"));
        }
        for p in &self.premises {
            p.render_into(depth + 1, out);
        }
    }
}

/// Outcome of checking one triple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TripleStatus {
    Proved(Derivation),
    ValidBounded,
    Refuted(Counterexample),
}

impl TripleStatus {
    pub fn name(&self) -> &'static str {
        match self {
            TripleStatus::Proved(_) => "proved",
            TripleStatus::ValidBounded => "valid_bounded",
            TripleStatus::Refuted(_) => "refuted",
        }
    }

    pub fn is_ok(&self) -> bool {
        !matches!(self, TripleStatus::Refuted(_))
    }
}

/// Normal form modulo associativity, commutativity and idempotence of ∧ and
/// ∨, with `True` conjuncts dropped.
pub fn canon(a: &Assertion) -> Assertion {
    match a {
        Assertion::And(..) => {
            let mut parts: Vec<Assertion> =
                a.conjuncts().into_iter().map(canon).flat_map(|c| c.conjuncts().into_iter().cloned().collect::<Vec<_>>()).collect();
            parts.retain(|p| !p.is_true());
            parts.sort();
            parts.dedup();
            Assertion::conj(parts)
        }
        Assertion::Or(..) => {
            let mut parts: Vec<Assertion> =
                a.disjuncts().into_iter().map(canon).flat_map(|c| c.disjuncts().into_iter().cloned().collect::<Vec<_>>()).collect();
            if parts.iter().any(|p| p.is_true()) {
                return Assertion::tt();
            }
            parts.sort();
            parts.dedup();
            Assertion::disj(parts)
        }
        Assertion::Expr(e) if closed(e) => Assertion::Expr(Expr::Val(e.eval(&RegStore::new()))),
        _ => a.clone(),
    }
}

/// No registers, locations or flags: the value is fixed.
fn closed(e: &Expr) -> bool {
    let mut regs = BTreeSet::new();
    e.regs(&mut regs);
    e.is_simple() && regs.is_empty()
}

fn conj_set(a: &Assertion) -> Vec<Assertion> {
    canon(a).conjuncts().into_iter().filter(|c| !c.is_true()).cloned().collect()
}

/// Every conjunct of `want` is a conjunct of `pre`.
fn covers(pre: &[Assertion], want: &Assertion) -> bool {
    conj_set(want).iter().all(|w| pre.contains(w))
}

fn has_pot(pre: &[Assertion], t: Tid, i: &Interval) -> bool {
    pre.iter().any(|p| matches!(p, Assertion::Pot(u, j) if *u == t && j == i))
}

fn is_eq_atom(i: &Interval, x: Loc, e: &Expr) -> bool {
    let want1 = Expr::eq(Expr::Loc(x), e.clone());
    let want2 = Expr::eq(e.clone(), Expr::Loc(x));
    matches!(i, Interval::Atom(a) if *a == want1 || *a == want2)
}

fn is_flag_atom(i: &Interval, x: Loc) -> bool {
    matches!(i, Interval::Atom(Expr::IsR(y)) if *y == x)
}

fn written(p: &Prim) -> Option<(Loc, &Expr)> {
    match p {
        Prim::Store(x, e) | Prim::Swap(x, e) => Some((*x, e)),
        _ => None,
    }
}

/// The first axiom row, in table order, of which `t` is an instance up to
/// strengthening the precondition.
pub fn match_axiom(t: &MemoryTriple) -> Option<Derivation> {
    Rule::AXIOMS.iter().find_map(|r| match_row(*r, t))
}

/// Whether `t` is an instance of the row `rule`.
pub fn match_row(rule: Rule, t: &MemoryTriple) -> Option<Derivation> {
    let pre = conj_set(&t.pre);
    let post = canon(&t.post);
    let tau = t.tid;
    let leaf = |ev: Vec<String>| Some(Derivation::leaf(rule, t, ev));
    let prim = match &t.subject {
        Subject::Instr(i) if i.aux.is_empty() => Some(&i.prim),
        _ => None,
    };
    match rule {
        Rule::SubstAsgn => {
            let Some(Prim::Assign(r, e)) = prim else { return None };
            let want = post.subst_reg(*r, e);
            covers(&pre, &want).then(|| ())?;
            leaf(vec![format!("pre covers post[{r}/{e}]")])
        }
        Rule::StableWr => {
            let (x, _) = written(prim?)?;
            (!post.locs().contains(&x) && covers(&pre, &post)).then(|| ())?;
            leaf(vec![format!("{x} ∉ fv(post)")])
        }
        Rule::StableLd => {
            let Some(Prim::Load(r, _)) = prim else { return None };
            (!post.regs().contains(r) && covers(&pre, &post)).then(|| ())?;
            leaf(vec![format!("{r} ∉ fv(post)")])
        }
        Rule::StableFork | Rule::StableJoin => {
            let ok_kind = match &t.subject {
                Subject::Fork(_) => rule == Rule::StableFork,
                Subject::Join(_) => rule == Rule::StableJoin,
                _ => false,
            };
            // Joined children lose their potentials, so they must not occur either.
            let children_free = match &t.subject {
                Subject::Join(ch) => ch.iter().all(|c| !post.tids().contains(c)),
                _ => true,
            };
            (ok_kind && children_free && !post.tids().contains(&tau) && covers(&pre, &post)).then(|| ())?;
            leaf(vec![format!("{tau} ∉ fv(post)")])
        }
        Rule::Fork | Rule::Join => {
            let ch = match (&t.subject, rule) {
                (Subject::Fork(ch), Rule::Fork) | (Subject::Join(ch), Rule::Join) => ch,
                _ => return None,
            };
            let mut interval: Option<&Interval> = None;
            let conjs = post.conjuncts();
            for c in &conjs {
                match c {
                    Assertion::Pot(u, i) => {
                        let target_ok = if rule == Rule::Fork { ch.contains(u) } else { *u == tau };
                        if !target_ok || interval.is_some_and(|j| j != i) {
                            return None;
                        }
                        interval = Some(i);
                    }
                    Assertion::Expr(_) if pre.contains(c) => {}
                    _ => return None,
                }
            }
            let i = interval?;
            let sources: Vec<Tid> = if rule == Rule::Fork { vec![tau] } else { ch.clone() };
            sources.iter().all(|s| has_pot(&pre, *s, i)).then(|| ())?;
            leaf(vec![format!("I = {i}")])
        }
        Rule::WrOwn => {
            let (x, e) = written(prim?)?;
            let Assertion::Pot(u, i) = &post else { return None };
            (*u == tau && is_eq_atom(i, x, e)).then(|| ())?;
            leaf(Vec::new())
        }
        Rule::WrOther1 => {
            let (x, e) = written(prim?)?;
            let Assertion::Pot(pi, Interval::Chop(l, r)) = &post else { return None };
            if *pi == tau || !is_eq_atom(r, x, e) {
                return None;
            }
            let Interval::And(a, b) = &**l else { return None };
            let i = if is_flag_atom(b, x) {
                a
            } else if is_flag_atom(a, x) {
                b
            } else {
                return None;
            };
            (!i.has_rmw_atom(x) && has_pot(&pre, *pi, i)).then(|| ())?;
            leaf(vec![format!("π = {pi}"), format!("I = {i}"), format!("R({x}) ∉ I")])
        }
        Rule::WrOther2 => {
            let (x, _) = written(prim?)?;
            let Assertion::Pot(pi, whole @ Interval::Chop(i, it)) = &post else { return None };
            let ok = *pi != tau
                && !it.mentions_loc(x)
                && !i.has_rmw_atom(x)
                && has_pot(&pre, tau, it)
                && has_pot(&pre, *pi, whole);
            ok.then(|| ())?;
            leaf(vec![format!("π = {pi}"), format!("I = {i}"), format!("I_τ = {it}"), format!("{x} ∉ fv(I_τ), R({x}) ∉ I")])
        }
        Rule::WrOther3 => {
            let (x, _) = written(prim?)?;
            let Assertion::Pot(pi, Interval::Chop(l, it)) = &post else { return None };
            (*pi != tau && is_flag_atom(l, x) && !it.mentions_loc(x) && has_pot(&pre, tau, it)).then(|| ())?;
            leaf(vec![format!("π = {pi}"), format!("I_τ = {it}"), format!("{x} ∉ fv(I_τ)")])
        }
        Rule::SwapSkip => {
            let Some(Prim::Swap(x, _)) = prim else { return None };
            let Assertion::Pot(u, i) = &post else { return None };
            let want = Interval::chop(Interval::Atom(Expr::IsR(*x)), i.clone());
            (*u == tau && !i.mentions_loc(*x) && has_pot(&pre, tau, &want)).then(|| ())?;
            leaf(vec![format!("I = {i}"), format!("{x} ∉ fv(I)")])
        }
        _ => None,
    }
}

/// Sub-goals of the rule for instrumented commands: the primitive command
/// followed by one assignment per auxiliary update. Intermediate assertions
/// are obtained by backward substitution through the assignments.
pub fn apply_instr(t: &MemoryTriple) -> Option<Vec<MemoryTriple>> {
    let Subject::Instr(i) = &t.subject else { return None };
    let mut mids = vec![t.post.clone()];
    for (r, e) in i.aux.iter().rev() {
        let next = mids.last().unwrap().subst_reg(*r, e);
        mids.push(next);
    }
    mids.reverse();
    // mids[k] is the assertion before aux assignment k; mids[n] is the post.
    let mut goals = vec![MemoryTriple::instr(t.pre.clone(), t.tid, Instr::plain(i.prim.clone()), mids[0].clone())];
    for (k, (r, e)) in i.aux.iter().enumerate() {
        goals.push(MemoryTriple::instr(
            mids[k].clone(),
            t.tid,
            Instr::plain(Prim::Assign(*r, e.clone())),
            mids[k + 1].clone(),
        ));
    }
    Some(goals)
}

/// Split a store-level atom `A` read through `load r := x` into the register
/// part `e` (with `x` renamed to `r`) and the rest `E`, so that
/// `A = (e ∧ E){x/r}`.
fn split_shift_atom(a: &Expr, r: crate::name::Reg, x: Loc) -> Option<(Expr, Expr)> {
    if a.mentions_reg(r) {
        return None;
    }
    let mut e_parts = Vec::new();
    let mut rest = Vec::new();
    for c in a.flatten(crate::lang::BinOp::And) {
        let mut locs = BTreeSet::new();
        c.locs(&mut locs);
        let only_x = locs.iter().all(|l| *l == x) && !c.has_flag_atom(x);
        if only_x && !locs.is_empty() {
            e_parts.push(c.replace(&|l| *l == Expr::Loc(x), &Expr::Reg(r)));
        } else {
            rest.push(c.clone());
        }
    }
    Some((Expr::conj(e_parts), Expr::conj(rest)))
}

/// One application of the load shift rule, backwards from `t`: the premise
/// goal and the consequence that closes the gap to `t`'s postcondition.
pub fn apply_ld_shift(t: &MemoryTriple) -> Option<(MemoryTriple, Assertion)> {
    let Subject::Instr(ins) = &t.subject else { return None };
    let Prim::Load(r, x) = ins.prim else { return None };
    if !ins.aux.is_empty() {
        return None;
    }
    let pre = conj_set(&t.pre);
    for c in &pre {
        let Assertion::Pot(u, Interval::Chop(head, rest)) = c else { continue };
        if *u != t.tid {
            continue;
        }
        let Interval::Atom(a) = &**head else { continue };
        let Some((e, big_e)) = split_shift_atom(a, r, x) else { continue };
        let premise = t.with(Assertion::Pot(t.tid, (**rest).clone()), t.post.clone());
        // (e ∧ pot(τ, [E] ; I)) ∨ ψ with ψ the goal's post.
        let shifted = Assertion::and(
            Assertion::Expr(e),
            Assertion::Pot(t.tid, Interval::chop(Interval::Atom(big_e), (**rest).clone())),
        );
        return Some((premise, shifted));
    }
    None
}

const MAX_DEPTH: usize = 8;

/// Syntactic proof search.
pub fn derive(t: &MemoryTriple, params: &CheckParams) -> Option<Derivation> {
    derive_at(t, params, 0)
}

fn derive_at(t: &MemoryTriple, params: &CheckParams, depth: usize) -> Option<Derivation> {
    if depth > MAX_DEPTH {
        return None;
    }
    let post = canon(&t.post);
    if post.is_true() {
        return Some(Derivation::leaf(Rule::Consequence, t, vec!["post is True".into()]));
    }
    if let Subject::Instr(i) = &t.subject {
        if !i.aux.is_empty() {
            let goals = apply_instr(t)?;
            let mut prems = Vec::new();
            for g in &goals {
                prems.push(derive_at(g, params, depth + 1)?);
            }
            return Some(Derivation::node(Rule::Instr, t, Vec::new(), prems));
        }
    }
    let pre = canon(&t.pre);
    if let Assertion::Or(..) = pre {
        let mut prems = Vec::new();
        for d in pre.disjuncts() {
            prems.push(derive_at(&t.with(d.clone(), t.post.clone()), params, depth + 1)?);
        }
        return Some(Derivation::node(Rule::Disj, t, Vec::new(), prems));
    }
    if let Some(d) = match_axiom(t) {
        return Some(d);
    }
    let conjs = post.conjuncts();
    if conjs.len() > 1 {
        let prems: Option<Vec<Derivation>> =
            conjs.iter().map(|q| derive_at(&t.with(t.pre.clone(), (*q).clone()), params, depth + 1)).collect();
        if let Some(prems) = prems {
            return Some(Derivation::node(Rule::Conj, t, Vec::new(), prems));
        }
    }
    // Case split on a disjunctive conjunct of the precondition.
    let pre_conjs = conj_set(&t.pre);
    if let Some(k) = pre_conjs.iter().position(|c| matches!(c, Assertion::Or(..))) {
        let mut prems = Vec::new();
        let mut ok = true;
        for d in pre_conjs[k].disjuncts() {
            let mut parts = pre_conjs.clone();
            parts[k] = d.clone();
            match derive_at(&t.with(Assertion::conj(parts), t.post.clone()), params, depth + 1) {
                Some(p) => prems.push(p),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Some(Derivation::node(Rule::Disj, t, vec!["case split on the precondition".into()], prems));
        }
    }
    if let Assertion::Or(..) = post {
        for d in post.disjuncts() {
            if let Some(p) = derive_at(&t.with(t.pre.clone(), d.clone()), params, depth + 1) {
                return Some(Derivation::node(Rule::Consequence, t, vec![format!("post weakened from {d}")], vec![p]));
            }
        }
    }
    if let Some((premise, shifted)) = apply_ld_shift(t) {
        if implies(&shifted, &t.post, None, params).is_ok() {
            if let Some(p) = derive_at(&premise, params, depth + 1) {
                let ev = vec![format!("shifted disjunct {shifted} implies post (bounded)")];
                return Some(Derivation::node(Rule::LdShift, t, ev, vec![p]));
            }
        }
    }
    None
}

/// Normalized write of `v` to `x` by `tau`, or `None` when some other thread
/// is left without lists.
fn write_pots(space: &Space, pots: &Pots, tau: Tid, x: Loc, v: Val) -> Option<Pots> {
    let new = space.cell(x, v, Flag::Rmw);
    let own: HashSet<&[crate::sra::Store]> = pots[&tau].iter().map(|l| &l[..]).collect();
    let mut out = Pots::new();
    for (t, lists) in pots {
        let mut next: Vec<StoreList> = Vec::new();
        if *t == tau {
            next = lists.iter().map(|l| l.iter().map(|s| s.set(x, new)).collect()).collect();
        } else {
            for l in lists {
                for k in 0..l.len() {
                    if own.contains(&l[k..]) {
                        let mut l2: StoreList = l[..k].iter().map(|s| s.set(x, space.cell(x, s.get(x).val, Flag::R))).collect();
                        l2.extend(l[k..].iter().map(|s| s.set(x, new)));
                        next.push(l2);
                    }
                }
            }
            if next.is_empty() {
                return None;
            }
        }
        next.sort();
        next.dedup();
        out.insert(*t, next);
    }
    Some(out)
}

/// First-store values of `x` in `tau`'s lists, optionally only RMW-flagged.
fn first_values(pots: &Pots, tau: Tid, x: Loc, need_rmw: bool) -> Vec<Val> {
    let mut vs: Vec<Val> = pots[&tau]
        .iter()
        .map(|l| l[0].get(x))
        .filter(|c| !need_rmw || c.flag == Flag::Rmw)
        .map(|c| c.val)
        .collect();
    vs.sort();
    vs.dedup();
    vs
}

fn restrict_first(pots: &Pots, tau: Tid, x: Loc, v: Val, need_rmw: bool) -> Pots {
    let mut p = pots.clone();
    p.get_mut(&tau).unwrap().retain(|l| {
        let c = l[0].get(x);
        c.val == v && (!need_rmw || c.flag == Flag::Rmw)
    });
    p
}

/// Every successor of one step of the subject from a normalized state.
fn successors(space: &Space, t: &MemoryTriple, g: &RegStore, pots: &Pots) -> Vec<(RegStore, Pots, String)> {
    let tau = t.tid;
    match &t.subject {
        Subject::Fork(ch) => {
            let mut p = pots.clone();
            let Some(d) = p.remove(&tau) else { return Vec::new() };
            for c in ch {
                p.insert(*c, d.clone());
            }
            vec![(g.clone(), p, "FORK".into())]
        }
        Subject::Join(ch) => {
            let mut p = pots.clone();
            let mut inter: Option<Vec<StoreList>> = None;
            for c in ch {
                let Some(d) = p.remove(c) else { return Vec::new() };
                inter = Some(match inter {
                    None => d,
                    Some(acc) => acc.into_iter().filter(|l| d.contains(l)).collect(),
                });
            }
            let inter = inter.unwrap_or_default();
            if inter.is_empty() {
                return Vec::new();
            }
            p.insert(tau, inter);
            vec![(g.clone(), p, "JOIN".into())]
        }
        Subject::Instr(i) => match &i.prim {
            Prim::Assign(..) => vec![(instr_effect(i, g, 0).1, pots.clone(), "assignment".into())],
            Prim::Load(_, x) => first_values(pots, tau, *x, false)
                .into_iter()
                .map(|v| (instr_effect(i, g, v).1, restrict_first(pots, tau, *x, v, false), format!("reads {x} = {v}")))
                .collect(),
            Prim::Store(x, e) => {
                let v = e.eval(g);
                match write_pots(space, pots, tau, *x, v) {
                    Some(p) => vec![(apply_aux(i, g.clone()), p, format!("writes {x} = {v}"))],
                    None => Vec::new(),
                }
            }
            Prim::Swap(x, e) => {
                let w = e.eval(g);
                let need = space.flag_varies(*x);
                first_values(pots, tau, *x, need)
                    .into_iter()
                    .filter_map(|v| {
                        let p = restrict_first(pots, tau, *x, v, need);
                        let p = write_pots(space, &p, tau, *x, w)?;
                        Some((instr_effect(i, g, v).1, p, format!("swaps {x}: reads {v}, writes {w}")))
                    })
                    .collect()
            }
        },
    }
}

/// Bounded semantic validity: from every largest state satisfying the
/// precondition, every step of the subject satisfies the postcondition.
/// Postconditions are antitone and successors monotone in the state, so
/// largest states suffice.
pub fn semantic_check(t: &MemoryTriple, params: &CheckParams) -> Result<(), Counterexample> {
    let instrs: Vec<&Instr> = match &t.subject {
        Subject::Instr(i) => vec![i],
        _ => Vec::new(),
    };
    let space = Space::new(params, &[&t.pre, &t.post], &instrs);
    let dom = t.dom_before();
    let bad_step = |g: &RegStore, pots: &Pots| -> Option<(RegStore, Pots, String)> {
        successors(&space, t, g, pots).into_iter().find(|(g2, p2, _)| !sat_pots(g2, p2, &t.post))
    };
    let mut cex = None;
    space.for_each_max_state(&t.pre, &dom, |g, pots| {
        if bad_step(g, pots).is_none() {
            return true;
        }
        let mut p = pots.clone();
        minimize(&mut p, |q| bad_step(g, q).is_some());
        let (g2, p2, what) = bad_step(g, &p).expect("minimization keeps the violation");
        let note = format!("{} {what}; post fails with registers {g2} in\n{}", t.tid, pots_to_mapping(&p2).dump());
        cex = Some(Counterexample { regs: g.clone(), state: pots_to_mapping(&p), note });
        false
    });
    match cex {
        None => Ok(()),
        Some(c) => Err(c),
    }
}

/// Syntactic derivation first, the bounded semantic check otherwise.
pub fn check_triple(t: &MemoryTriple, params: &CheckParams) -> TripleStatus {
    if let Some(d) = derive(t, params) {
        return TripleStatus::Proved(d);
    }
    match semantic_check(t, params) {
        Ok(()) => TripleStatus::ValidBounded,
        Err(c) => TripleStatus::Refuted(c),
    }
}


/// A random instance of an axiom row over locations `x, y`, registers
/// `a, b`, subject thread `t1`, other thread `t2` and children `t3, t4`.
/// Side conditions are met by construction or by resampling.
pub fn row_instance(rule: Rule, seed: u64) -> MemoryTriple {
    use crate::gen::{rng, AssertGen};
    use crate::name::Name;
    use rand::seq::SliceRandom;
    use rand::Rng;

    let mut r = rng(seed);
    let (tau, pi) = (Name::new("t1"), Name::new("t2"));
    let children = vec![Name::new("t3"), Name::new("t4")];
    let gen = AssertGen::new(&["x", "y"], &["a", "b"], &["t1", "t2"], 2);
    let x = *gen.locs.choose(&mut r).unwrap();
    let reg = *gen.regs.choose(&mut r).unwrap();
    let expr = |r: &mut rand_chacha::ChaCha8Rng| -> Expr {
        if r.gen_bool(0.3) {
            Expr::Reg(*gen.regs.choose(r).unwrap())
        } else {
            Expr::Val(r.gen_range(0..=2))
        }
    };
    let write = |r: &mut rand_chacha::ChaCha8Rng, e: Expr| -> Instr {
        if r.gen_bool(0.5) {
            Instr::plain(Prim::Store(x, e))
        } else {
            Instr::plain(Prim::Swap(x, e))
        }
    };
    let assertion_where = |r: &mut rand_chacha::ChaCha8Rng, g: &AssertGen, ok: &dyn Fn(&Assertion) -> bool| loop {
        let a = g.assertion(r, 2);
        if ok(&a) {
            break a;
        }
    };
    let interval_where = |r: &mut rand_chacha::ChaCha8Rng, ok: &dyn Fn(&Interval) -> bool| loop {
        let d = r.gen_range(0..=2);
        let i = gen.interval(r, d);
        if ok(&i) {
            break i;
        }
    };
    let reg_expr = |r: &mut rand_chacha::ChaCha8Rng| -> Assertion {
        let op = if r.gen_bool(0.5) { Expr::eq } else { Expr::ne };
        Assertion::Expr(op(Expr::Reg(*gen.regs.choose(r).unwrap()), Expr::Val(r.gen_range(0..=2))))
    };
    let pot = |t: Tid, i: &Interval| Assertion::Pot(t, i.clone());
    match rule {
        Rule::SubstAsgn => {
            let phi = gen.assertion(&mut r, 2);
            let e = if r.gen_bool(0.5) {
                expr(&mut r)
            } else {
                Expr::bin(crate::lang::BinOp::Add, Expr::Reg(*gen.regs.choose(&mut r).unwrap()), Expr::Val(1))
            };
            MemoryTriple::instr(phi.subst_reg(reg, &e), tau, Instr::plain(Prim::Assign(reg, e)), phi)
        }
        Rule::StableWr => {
            let phi = assertion_where(&mut r, &gen, &|a| !a.locs().contains(&x));
            let e = expr(&mut r);
            MemoryTriple::instr(phi.clone(), tau, write(&mut r, e), phi)
        }
        Rule::StableLd => {
            let phi = assertion_where(&mut r, &gen, &|a| !a.regs().contains(&reg));
            MemoryTriple::instr(phi.clone(), tau, Instr::plain(Prim::Load(reg, x)), phi)
        }
        Rule::StableFork => {
            let g2 = AssertGen { tids: vec![pi, children[0]], ..gen.clone() };
            let phi = g2.assertion(&mut r, 2);
            MemoryTriple::new(phi.clone(), tau, Subject::Fork(children), phi)
        }
        Rule::StableJoin => {
            let g2 = AssertGen { tids: vec![pi], ..gen.clone() };
            let phi = g2.assertion(&mut r, 2);
            MemoryTriple::new(phi.clone(), tau, Subject::Join(children), phi)
        }
        Rule::Fork => {
            let e = reg_expr(&mut r);
            let i = interval_where(&mut r, &|_| true);
            let pre = Assertion::and(e.clone(), pot(tau, &i));
            let post = Assertion::conj(vec![e, pot(children[0], &i), pot(children[1], &i)]);
            MemoryTriple::new(pre, tau, Subject::Fork(children), post)
        }
        Rule::Join => {
            let e = reg_expr(&mut r);
            let i = interval_where(&mut r, &|_| true);
            let pre = Assertion::conj(vec![e.clone(), pot(children[0], &i), pot(children[1], &i)]);
            let post = Assertion::and(e, pot(tau, &i));
            MemoryTriple::new(pre, tau, Subject::Join(children), post)
        }
        Rule::WrOwn => {
            let e = expr(&mut r);
            let post = pot(tau, &Interval::Atom(Expr::eq(Expr::Loc(x), e.clone())));
            MemoryTriple::instr(Assertion::tt(), tau, write(&mut r, e), post)
        }
        Rule::WrOther1 => {
            let i = interval_where(&mut r, &|i| !i.has_rmw_atom(x));
            let e = expr(&mut r);
            let post = pot(
                pi,
                &Interval::chop(
                    Interval::and(i.clone(), Interval::Atom(Expr::IsR(x))),
                    Interval::Atom(Expr::eq(Expr::Loc(x), e.clone())),
                ),
            );
            MemoryTriple::instr(pot(pi, &i), tau, write(&mut r, e), post)
        }
        Rule::WrOther2 => {
            let it = interval_where(&mut r, &|i| !i.mentions_loc(x));
            let i = interval_where(&mut r, &|i| !i.has_rmw_atom(x));
            let whole = Interval::chop(i, it.clone());
            let pre = Assertion::and(pot(tau, &it), pot(pi, &whole));
            let e = expr(&mut r);
            MemoryTriple::instr(pre, tau, write(&mut r, e), pot(pi, &whole))
        }
        Rule::WrOther3 => {
            let it = interval_where(&mut r, &|i| !i.mentions_loc(x));
            let post = pot(pi, &Interval::chop(Interval::Atom(Expr::IsR(x)), it.clone()));
            let e = expr(&mut r);
            MemoryTriple::instr(pot(tau, &it), tau, write(&mut r, e), post)
        }
        Rule::SwapSkip => {
            let i = interval_where(&mut r, &|i| !i.mentions_loc(x));
            let pre = pot(tau, &Interval::chop(Interval::Atom(Expr::IsR(x)), i.clone()));
            let e = expr(&mut r);
            MemoryTriple::instr(pre, tau, Instr::plain(Prim::Swap(x, e)), pot(tau, &i))
        }
        other => panic!("{other} is not an axiom row"),
    }
}
