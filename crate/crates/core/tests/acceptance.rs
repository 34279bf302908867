//! Acceptance criteria 1 to 12. Each prints one PASS/FAIL line with its
//! wall-clock time; the test fails if any criterion does.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use indexmap::IndexSet;
use rand::seq::SliceRandom;
use rand::Rng;

use piccolo::assertions::{enumerate_states, sat_assertion, CheckParams, UniverseParams};
use piccolo::explore::*;
use piccolo::gen::{random_litmus, rng, AssertGen, GenConfig};
use piccolo::graphs::{oracle_finals, oracle_finals_with, Axioms};
use piccolo::lang::{parse_assertion_in, parse_outline, parse_program, Assertion, Cmd, Expr, LitmusSpec, Outline};
use piccolo::memory::{system_step, ScModel};
use piccolo::name::{Name, Val};
use piccolo::opsem::RegStore;
use piccolo::rg::{check_outline, extract_rely_guarantee, RgOptions};
use piccolo::sra::*;
use piccolo::triples::{row_instance, semantic_check, Rule};

type Check = Result<String, String>;

fn path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn program(name: &str) -> LitmusSpec {
    parse_program(&std::fs::read_to_string(path(name)).unwrap()).unwrap()
}

fn outline(name: &str) -> Outline {
    parse_outline(&std::fs::read_to_string(path(name)).unwrap()).unwrap()
}

fn sra(spec: &LitmusSpec, opts: &ExploreOptions) -> OutcomeSet {
    reachable_finals_sra(spec, &SraModel::new(default_bounds(spec, opts.unroll)), opts)
}

fn outcome(pairs: &[(&str, Val)]) -> Outcome {
    let mut v: Vec<_> = pairs.iter().map(|(r, x)| (Name::new(r), *x)).collect();
    v.sort();
    Outcome(v)
}

fn expr(spec: &LitmusSpec, src: &str) -> Expr {
    fn flat(a: Assertion) -> Expr {
        match a {
            Assertion::Expr(e) => e,
            Assertion::And(a, b) => Expr::and(flat(*a), flat(*b)),
            Assertion::Or(a, b) => Expr::or(flat(*a), flat(*b)),
            Assertion::Pot(..) => panic!("potential assertion in an outcome filter"),
        }
    }
    flat(parse_assertion_in(src, &spec.classes).unwrap())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Instant, limit: Duration) -> Result<(), String> {
    ensure(t.elapsed() < limit, || format!("took {:?}, limit {limit:?}", t.elapsed()))
}

fn c1_mp() -> Check {
    let t = Instant::now();
    let spec = program("mp.lit");
    let opts = ExploreOptions::default();
    let s = sra(&spec, &opts);
    let o = oracle_finals(&spec, &opts).map_err(|e| e.to_string())?;
    let bad = expr(&spec, "a = 1 && b != 1");
    ensure(s.exact(), || "SRA result not exact".into())?;
    ensure(s.satisfying(&bad).is_none(), || "SRA reaches a=1, b!=1".into())?;
    ensure(o.satisfying(&bad).is_none(), || "oracle reaches a=1, b!=1".into())?;
    ensure(s.outcomes == o.outcomes, || format!("SRA {:?} vs oracle {:?}", s.outcomes, o.outcomes))?;
    within(t, Duration::from_secs(1))?;
    Ok(format!("{} outcomes, engines agree", s.outcomes.len()))
}

fn c2_corr0() -> Check {
    let t = Instant::now();
    let spec = program("corr0.lit");
    let opts = ExploreOptions::default();
    let bounds = default_bounds(&spec, opts.unroll);
    let hit = outcome(&[("a", 2), ("b", 1)]);
    let good = reachable_finals_sra(&spec, &SraModel::new(bounds.clone()), &opts);
    let broken = reachable_finals_sra(&spec, &SraModel::new(bounds).with_rule(WriteRule::DropWriterSuffixPremise), &opts);
    ensure(!good.contains(&hit), || "(2,1) reachable under SRA".into())?;
    ensure(broken.contains(&hit), || format!("mutation does not flip the verdict: {:?}", broken.outcomes))?;
    within(t, Duration::from_secs(1))?;
    Ok("(2,1) absent; present once L1 ∈ D(τ) is dropped".into())
}

fn c3_corr2() -> Check {
    let t = Instant::now();
    let spec = program("corr2.lit");
    let opts = ExploreOptions::default();
    let hit = outcome(&[("a", 2), ("b", 1), ("c", 1), ("d", 2)]);
    let s = sra(&spec, &opts);
    let o = oracle_finals(&spec, &opts).map_err(|e| e.to_string())?;
    ensure(!s.contains(&hit), || "(2,1,1,2) reachable under SRA".into())?;
    ensure(!o.contains(&hit), || "(2,1,1,2) consistent in the oracle".into())?;
    ensure(s.outcomes == o.outcomes, || "engines disagree".into())?;
    within(t, Duration::from_secs(10))?;
    Ok(format!("{} outcomes, engines agree", s.outcomes.len()))
}

fn forbid_only(file: &str, bad: &str, limit: u64) -> Check {
    let t = Instant::now();
    let spec = program(file);
    let opts = ExploreOptions::default();
    let s = sra(&spec, &opts);
    let e = expr(&spec, bad);
    ensure(s.exact(), || "SRA result not exact".into())?;
    ensure(s.satisfying(&e).is_none(), || format!("reaches {}", s.satisfying(&e).unwrap()))?;
    within(t, Duration::from_secs(limit))?;
    Ok(format!("{} outcomes, none with {bad}", s.outcomes.len()))
}

fn c6_sb() -> Check {
    let t = Instant::now();
    let opts = ExploreOptions::default();
    let zero = outcome(&[("a", 0), ("b", 0)]);
    let fenced = program("sb-fence.lit");
    ensure(!sra(&fenced, &opts).contains(&zero), || "SB-fence reaches (0,0)".into())?;
    let plain = program("sb-plain.lit");
    let s = sra(&plain, &opts);
    let sc = reachable_finals(&plain, &ScModel, &opts);
    let o = oracle_finals(&plain, &opts).map_err(|e| e.to_string())?;
    let osc = oracle_finals_with(&plain, &opts, Axioms::Sc).map_err(|e| e.to_string())?;
    ensure(s.contains(&zero), || "SB reaches no (0,0) under SRA".into())?;
    ensure(!sc.contains(&zero), || "SB reaches (0,0) under SC".into())?;
    ensure(o.outcomes == s.outcomes && osc.outcomes == sc.outcomes, || "engines disagree".into())?;
    within(t, Duration::from_secs(2))?;
    Ok("fenced forbids (0,0); plain allows it under SRA only".into())
}

fn c7_peterson() -> Check {
    let t = Instant::now();
    let spec = program("peterson.lit");
    let opts = ExploreOptions { unroll: 2, ..ExploreOptions::default() };
    let s = sra(&spec, &opts);
    ensure(!s.budget_exceeded, || "state budget exceeded".into())?;
    ensure(!s.outcomes.is_empty(), || "no final states".into())?;
    let bad = expr(&spec, "mx1 != 0 || mx2 != 0");
    ensure(s.satisfying(&bad).is_none(), || format!("mutual exclusion violated: {}", s.satisfying(&bad).unwrap()))?;
    within(t, Duration::from_secs(60))?;
    Ok(format!("{} states, finals {:?}", s.stats.states, s.outcomes.iter().map(|o| o.to_string()).collect::<Vec<_>>()))
}

fn c8_outlines() -> Check {
    let opts = RgOptions { params: CheckParams { values: vec![0, 1, 2], max_list_len: 3 }, ..RgOptions::default() };
    let mut parts = Vec::new();
    for f in ["mp.pic", "corr0.pic", "corr2.pic", "lb.pic", "w2p2.pic", "sb-fence.pic", "peterson.pic"] {
        let t = Instant::now();
        let o = outline(f);
        let r = check_outline(&o, &opts).map_err(|e| format!("{f}: {e}"))?;
        ensure(r.accepted, || format!("{f}: {}\n{}", r.summary(), r.failures().iter().map(|e| e.explain()).collect::<String>()))?;
        within(t, Duration::from_secs(300)).map_err(|e| format!("{f}: {e}"))?;
        parts.push(format!("{} {}/{}", f.trim_end_matches(".pic"), r.totals.obligations, r.totals.obligations));
    }
    // Default extraction on MP gives the rely and guarantee sets of the
    // walk-through.
    let o = outline("mp.pic");
    let rg = extract_rely_guarantee(&o, &RgOptions::default()).map_err(|e| e.to_string())?;
    let show = |t: &str| {
        let r = &rg[&Name::new(t)];
        (r.rely.iter().map(|a| a.to_string()).collect::<Vec<_>>(), r.guarantee.iter().map(|g| g.to_string()).collect::<Vec<_>>())
    };
    let (r1, g1) = show("t1");
    let (r2, g2) = show("t2");
    ensure(r1 == ["true", "t1 |= [x = 1]"], || format!("R1 = {r1:?}"))?;
    ensure(g1 == ["{true} t1 ↦ x := 1", "{t1 |= [x = 1]} t1 ↦ y := 1"], || format!("G1 = {g1:?}"))?;
    ensure(r2 == ["t2 |= [y != 1] ; [x = 1]", "a = 1 => t2 |= [x = 1]", "a = 1 => b = 1"], || format!("R2 = {r2:?}"))?;
    ensure(
        g2 == ["{t2 |= [y != 1] ; [x = 1]} t2 ↦ load a := y", "{a = 1 => t2 |= [x = 1]} t2 ↦ load b := x"],
        || format!("G2 = {g2:?}"),
    )?;
    Ok(format!("accepted: {}; MP rely/guarantee reproduced", parts.join(", ")))
}

fn mem_ops(c: &Cmd) -> usize {
    match c {
        Cmd::Instr(i) => usize::from(i.is_memory()),
        Cmd::Seq(a, b) | Cmd::If(_, a, b) => mem_ops(a) + mem_ops(b),
        Cmd::While(_, b) => mem_ops(b),
        Cmd::Par(_, a, _, b) => mem_ops(a) + mem_ops(b),
        Cmd::Skip | Cmd::Cutoff => 0,
    }
}

fn c9_equivalence() -> Check {
    let t = Instant::now();
    let opts = ExploreOptions::default();
    let cfg = GenConfig { threads: 3, max_instrs: 2, locs: 2, max_val: 2, branches: true };
    for seed in 0..200 {
        let spec = random_litmus(seed, &cfg);
        let ops: usize = spec.pool.values().map(|c| mem_ops(c)).sum();
        ensure(ops <= 6, || format!("seed {seed}: {ops} memory operations"))?;
        let s = sra(&spec, &opts);
        let o = oracle_finals(&spec, &opts).map_err(|e| e.to_string())?;
        ensure(s.exact(), || format!("seed {seed}: SRA result not exact"))?;
        ensure(s.outcomes == o.outcomes, || format!("seed {seed}: SRA {:?} vs oracle {:?}\n{spec}", s.outcomes, o.outcomes))?;
    }
    within(t, Duration::from_secs(600))?;
    Ok("200 programs, identical outcome sets".into())
}

fn c10_stability() -> Check {
    let t = Instant::now();
    let n = |s: &str| Name::new(s);
    let mut p = UniverseParams::new(&[0, 1], &[n("x"), n("y")], &[n("a")], &[n("t1"), n("t2")]);
    p.max_list_len = 2;
    p.max_pot_size = 2;
    let states = enumerate_states(&p);
    let gen = AssertGen::new(&["x", "y"], &["a"], &["t1", "t2"], 1);
    let mut r = rng(10);
    let (mut samples, mut relevant) = (0, 0);
    while samples < 10_000 {
        let phi = gen.assertion(&mut r, 3);
        let (g, m) = states.choose(&mut r).unwrap();
        let mut steps = lose_successors(m);
        steps.extend(dup_expand(m, 4));
        let m2 = steps.choose(&mut r).unwrap();
        samples += 1;
        if sat_assertion(g, m, &phi) {
            relevant += 1;
            ensure(sat_assertion(g, m2, &phi), || format!("{phi} flips on\n{}to\n{}", m.dump(), m2.dump()))?;
        }
    }
    within(t, Duration::from_secs(120))?;
    Ok(format!("{samples} samples ({relevant} with the assertion true), no flips"))
}

fn c11_axioms() -> Check {
    let t = Instant::now();
    let params = CheckParams::default();
    for rule in Rule::AXIOMS {
        for seed in 0..1000 {
            let tr = row_instance(rule, seed);
            if let Err(c) = semantic_check(&tr, &params) {
                return Err(format!("{rule} seed {seed}: {tr}\n{c}"));
            }
        }
    }
    within(t, Duration::from_secs(300))?;
    Ok(format!("{} rows x 1000 instances", Rule::AXIOMS.len()))
}

/// Visit every configuration reachable under SRA and check each memory state.
fn all_states_valid(spec: &LitmusSpec, unroll: usize) -> Result<usize, String> {
    let model = SraModel::new(default_bounds(spec, unroll));
    let mut seen = IndexSet::new();
    seen.insert(initial_config(spec, &model, unroll));
    let mut i = 0;
    while i < seen.len() {
        let c = seen.get_index(i).unwrap().clone();
        for (_, c2) in system_step(&model, &c).0 {
            if !validate_state(&c2.mem) {
                return Err(format!("invalid successor\n{}", c2.mem.dump()));
            }
            seen.insert(c2);
        }
        i += 1;
    }
    Ok(seen.len())
}

/// Generate-and-filter: every tuple of store sequences, kept when valid.
fn filtered_count(values: &[Val], b: usize, s: usize, regs: usize, tids: usize) -> usize {
    let x = Name::new("x");
    let mut stores = Vec::new();
    for v in values {
        for flag in [Flag::R, Flag::Rmw] {
            stores.push(Store::new([(x, Cell { val: *v, flag, tid: Name::new("t0") })]));
        }
    }
    let mut seqs: Vec<StoreList> = Vec::new();
    let mut layer: Vec<StoreList> = vec![Vec::new()];
    for _ in 0..b {
        layer = layer.iter().flat_map(|l| stores.iter().map(move |st| [l.clone(), vec![st.clone()]].concat())).collect();
        seqs.extend(layer.iter().cloned());
    }
    let mut pots: Vec<Potential> = Vec::new();
    for mask in 1u64..(1 << seqs.len()) {
        if mask.count_ones() as usize <= s {
            pots.push((0..seqs.len()).filter(|i| mask >> i & 1 == 1).map(|i| seqs[i].clone()).collect());
        }
    }
    let mut maps: Vec<Mapping> = vec![Mapping::default()];
    for k in 0..tids {
        let t = Name::new(&format!("t{}", k + 1));
        maps = maps
            .iter()
            .flat_map(|m| {
                pots.iter().map(move |d| {
                    let mut m2 = m.clone();
                    m2.insert(t, d.clone());
                    m2
                })
            })
            .collect();
    }
    let valid = maps.iter().filter(|m| validate_state(m)).count();
    valid * values.len().pow(regs as u32)
}

fn c12_invariants() -> Check {
    let mut visited = 0;
    for f in ["mp.lit", "corr0.lit", "corr2.lit", "lb.lit", "w2p2.lit", "sb-fence.lit", "sb-plain.lit"] {
        visited += all_states_valid(&program(f), 2).map_err(|e| format!("{f}: {e}"))?;
    }
    visited += all_states_valid(&program("peterson.lit"), 1).map_err(|e| format!("peterson: {e}"))?;
    let cfg = GenConfig::default();
    for seed in 0..100 {
        visited += all_states_valid(&random_litmus(seed, &cfg), 2).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    let n = |s: &str| Name::new(s);
    let mut counts = Vec::new();
    for (values, b, s, regs, tids) in [(vec![0], 1, 1, 0, 1), (vec![0, 1], 2, 1, 0, 1), (vec![0, 1], 2, 2, 1, 2)] {
        let reg_names: Vec<Name> = (0..regs).map(|i| n(&format!("r{i}"))).collect();
        let tid_names: Vec<Name> = (0..tids).map(|i| n(&format!("t{}", i + 1))).collect();
        let mut p = UniverseParams::new(&values, &[n("x")], &reg_names, &tid_names);
        p.max_list_len = b;
        p.max_pot_size = s;
        let got = enumerate_states(&p);
        let distinct: BTreeSet<(RegStore, Mapping)> = got.iter().cloned().collect();
        let want = filtered_count(&values, b, s, regs, tids);
        ensure(distinct.len() == got.len(), || "enumeration repeats states".into())?;
        ensure(got.len() == want, || format!("V={values:?} B={b} S={s}: enumerated {} vs filtered {want}", got.len()))?;
        counts.push(got.len());
    }
    ensure(counts[0] == 1, || format!("smallest universe has {} states", counts[0]))?;
    Ok(format!("{visited} configurations valid; universe counts {counts:?} match the filter"))
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> Check)> = vec![
        ("MP", c1_mp),
        ("CoRR0 and write-rule mutation", c2_corr0),
        ("CoRR2", c3_corr2),
        ("LB", || forbid_only("lb.lit", "a = 1 && b = 1", 1)),
        ("2+2W", || forbid_only("w2p2.lit", "a = 1 && b != 2", 1)),
        ("SB with and without fences", c6_sb),
        ("Peterson", c7_peterson),
        ("proof outlines", c8_outlines),
        ("equivalence fuzz", c9_equivalence),
        ("stability fuzz", c10_stability),
        ("axiom soundness fuzz", c11_axioms),
        ("state invariants", c12_invariants),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = f();
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL {name} ({secs:.2}s): {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn random_generator_is_seeded() {
    let cfg = GenConfig::default();
    assert_eq!(random_litmus(3, &cfg), random_litmus(3, &cfg));
    let mut a = rng(1);
    let mut b = rng(1);
    assert_eq!(a.gen::<u64>(), b.gen::<u64>());
}
