use std::path::PathBuf;

use piccolo::explore::*;
use piccolo::graphs::{oracle_finals, oracle_finals_with, Axioms};
use piccolo::lang::{parse_program, LitmusSpec};
use piccolo::memory::ScModel;
use piccolo::par::Mode;
use piccolo::sra::{SraModel, WriteRule};

fn corpus(name: &str) -> LitmusSpec {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    parse_program(&std::fs::read_to_string(&p).unwrap()).unwrap()
}

const LOOP_FREE: [&str; 7] = ["mp.lit", "corr0.lit", "corr2.lit", "lb.lit", "w2p2.lit", "sb-fence.lit", "sb-plain.lit"];

fn sra(spec: &LitmusSpec, opts: &ExploreOptions) -> LitmusResult {
    check_litmus_sra(spec, &SraModel::new(default_bounds(spec, opts.unroll)), opts)
}

#[test]
fn clauses_hold_under_sra() {
    let opts = ExploreOptions::default();
    for f in LOOP_FREE {
        let spec = corpus(f);
        let r = sra(&spec, &opts);
        assert!(r.outcomes.exact(), "{f}");
        for v in &r.verdicts {
            assert!(v.holds, "{f}: {} {:?}", v.clause, r.outcomes.outcomes);
        }
    }
}

#[test]
fn sra_agrees_with_graph_oracle() {
    let opts = ExploreOptions::default();
    for f in LOOP_FREE {
        let spec = corpus(f);
        let r = sra(&spec, &opts);
        let o = oracle_finals(&spec, &opts).unwrap();
        assert_eq!(r.outcomes.outcomes, o.outcomes, "{f}");
    }
}

#[test]
fn sc_agrees_with_sc_axioms_and_is_contained_in_sra() {
    let opts = ExploreOptions::default();
    for f in LOOP_FREE {
        let spec = corpus(f);
        let sc = reachable_finals(&spec, &ScModel, &opts);
        let o = oracle_finals_with(&spec, &opts, Axioms::Sc).unwrap();
        assert_eq!(sc.outcomes, o.outcomes, "{f}");
        let r = sra(&spec, &opts);
        assert!(sc.outcomes.is_subset(&r.outcomes.outcomes), "{f}");
    }
}

#[test]
fn sb_plain_separates_sc_from_sra() {
    let spec = corpus("sb-plain.lit");
    let c = compare_models(&spec, &default_bounds(&spec, 2), &ExploreOptions::default());
    assert_eq!(c.sra_only().len(), 1);
    assert!(c.sc_only().is_empty());
    assert!(c.oracle_agrees());
    let r = check_litmus(&spec, &ScModel, &ExploreOptions::default());
    assert!(!r.all_hold());
}

#[test]
fn witnesses_replay() {
    let opts = ExploreOptions::default();
    for f in LOOP_FREE {
        let spec = corpus(f);
        let model = SraModel::new(default_bounds(&spec, 2));
        let r = reachable_finals_sra(&spec, &model, &opts);
        for (o, w) in &r.witnesses {
            assert!(replay(&spec, &model, 2, w, o), "{f}: {o}");
        }
    }
}

#[test]
fn parallel_and_sequential_agree() {
    for f in LOOP_FREE {
        let spec = corpus(f);
        let par = sra(&spec, &ExploreOptions { mode: Mode::Parallel, ..ExploreOptions::default() });
        let seq = sra(&spec, &ExploreOptions { mode: Mode::Sequential, ..ExploreOptions::default() });
        assert_eq!(par.outcomes.outcomes, seq.outcomes.outcomes);
        assert_eq!(par.outcomes.witnesses, seq.outcomes.witnesses);
        assert_eq!(par.outcomes.stats.states, seq.outcomes.stats.states);
    }
}

#[test]
fn random_programs_sra_matches_oracle() {
    let opts = ExploreOptions::default();
    let cfg = piccolo::gen::GenConfig::default();
    for seed in 0..150 {
        let spec = piccolo::gen::random_litmus(seed, &cfg);
        let r = sra(&spec, &opts);
        let o = oracle_finals(&spec, &opts).unwrap();
        assert_eq!(r.outcomes.outcomes, o.outcomes, "seed {seed}:\n{spec}");
        let sc = reachable_finals(&spec, &ScModel, &opts);
        let osc = oracle_finals_with(&spec, &opts, Axioms::Sc).unwrap();
        assert_eq!(sc.outcomes, osc.outcomes, "seed {seed}:\n{spec}");
    }
}

#[test]
fn peterson_mutual_exclusion() {
    let spec = corpus("peterson.lit");
    let opts = ExploreOptions { unroll: 2, ..ExploreOptions::default() };
    let r = sra(&spec, &opts);
    assert!(!r.outcomes.outcomes.is_empty());
    assert!(r.all_hold(), "{:?}", r.verdicts);
}

#[test]
#[ignore]
fn peterson_stats() {
    let spec = corpus("peterson.lit");
    let opts = ExploreOptions { unroll: std::env::var("UNROLL").map_or(2, |v| v.parse().unwrap()), ..ExploreOptions::default() };
    let r = sra(&spec, &opts);
    eprintln!("{:?} exact={} outcomes={}", r.outcomes.stats, r.outcomes.exact(), r.outcomes.outcomes.len());
}

fn mutated(spec: &LitmusSpec, opts: &ExploreOptions) -> OutcomeSet {
    let model = SraModel::new(default_bounds(spec, opts.unroll)).with_rule(WriteRule::DropWriterSuffixPremise);
    reachable_finals_sra(spec, &model, opts)
}

// Without `L1 ∈ 𝒟(τ)` another thread may see y = 1 over a store that
// predates x := 1.
#[test]
fn weak_write_rule_breaks_mp() {
    let spec = corpus("mp.lit");
    let out = mutated(&spec, &ExploreOptions::default());
    assert!(out.contains(&Outcome(vec![("a".into(), 1), ("b".into(), 0)])), "{:?}", out.outcomes);
}

// A single writer still appends at the end of every list, so the weak rule
// cannot reorder its two writes.
#[test]
fn weak_write_rule_keeps_single_writer_coherence() {
    let spec = corpus("corr0.lit");
    let out = mutated(&spec, &ExploreOptions::default());
    assert!(!out.contains(&Outcome(vec![("a".into(), 2), ("b".into(), 1)])), "{:?}", out.outcomes);
}
