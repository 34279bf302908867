use super::*;
use crate::lang::{parse_assertion_in, parse_outline, Instr};

fn corpus(name: &str) -> Outline {
    let path = format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_outline(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn a(o: &Outline, s: &str) -> Assertion {
    parse_assertion_in(s, &o.classes).unwrap()
}

#[test]
fn mp_default_rely_guarantee() {
    let o = corpus("mp.pic");
    let rg = extract_rely_guarantee(&o, &RgOptions::default()).unwrap();
    let t1 = &rg[&Tid::new("t1")];
    assert_eq!(t1.rely, vec![a(&o, "true"), a(&o, "t1 |= [x = 1]")]);
    let g1: Vec<String> = t1.guarantee.iter().map(|g| g.to_string()).collect();
    assert_eq!(g1, vec!["{true} t1 ↦ x := 1", "{t1 |= [x = 1]} t1 ↦ y := 1"]);
    let t2 = &rg[&Tid::new("t2")];
    assert_eq!(t2.rely, vec![a(&o, "t2 |= [y != 1] ; [x = 1]"), a(&o, "a = 1 => t2 |= [x = 1]"), a(&o, "a = 1 => b = 1")]);
    let g2: Vec<(Assertion, String)> = t2.guarantee.iter().map(|g| (g.guard.clone(), g.subject.to_string())).collect();
    assert_eq!(
        g2,
        vec![(a(&o, "t2 |= [y != 1] ; [x = 1]"), "load a := y".to_string()), (a(&o, "a = 1 => t2 |= [x = 1]"), "load b := x".to_string())]
    );
}

#[test]
fn mp_obligations() {
    let o = corpus("mp.pic");
    let c = collect_obligations(&o, &RgOptions::default()).unwrap();
    let count = |k: ObligationKind| c.obligations.iter().filter(|ob| ob.kind == k).count();
    assert_eq!(count(ObligationKind::LocalTriple), 4);
    assert_eq!(count(ObligationKind::Stability), 8);
    assert_eq!(count(ObligationKind::ForkTriple), 1);
    assert_eq!(count(ObligationKind::JoinTriple), 1);
    let want = "{(a = 1 => t2 |= [x = 1]) && t1 |= [x = 1]} t1 ↦ y := 1 {a = 1 => t2 |= [x = 1]}";
    let all: Vec<String> = c.obligations.iter().map(|ob| ob.payload.to_string()).collect();
    assert!(all.iter().any(|s| s == want), "missing {want} in {all:#?}");
}

#[test]
fn mp_outline_accepted() {
    let o = corpus("mp.pic");
    let r = check_outline(&o, &RgOptions::default()).unwrap();
    for e in r.failures() {
        eprintln!("{}", e.explain());
    }
    assert!(r.accepted, "{}", r.summary());
    let wr = r.entries.iter().find(|e| e.obligation.starts_with("{t2 |= [y != 1] ; [x = 1] && t1 |= [x = 1]} t1 ↦ y := 1")).unwrap();
    assert_eq!(wr.rules, vec!["Wr-other-2"]);
}

#[test]
fn mp_swapped_assertions_rejected() {
    let src = std::fs::read_to_string(format!("{}/../../corpus/mp.pic", env!("CARGO_MANIFEST_DIR"))).unwrap();
    let bad = src.replace("{a = 1 => t2 |= [x = 1]}", "{TMP}").replace("{t2 |= [y != 1] ; [x = 1]}", "{a = 1 => t2 |= [x = 1]}").replace("{TMP}", "{t2 |= [y != 1] ; [x = 1]}");
    let o = parse_outline(&bad).unwrap();
    let r = check_outline(&o, &RgOptions::default()).unwrap();
    assert!(!r.accepted);
    assert!(r.failures().iter().any(|e| e.kind == ObligationKind::LocalTriple && e.status == Status::Refuted));
}

#[test]
fn structural_errors() {
    let no_inv = "outline: W\nthread t1 { {true} while a = 0 do load a := x od }";
    assert!(collect_obligations(&parse_outline(no_inv).unwrap(), &RgOptions::default()).is_err());
    let gap = "outline: G\ninit: x = 0\nthread t1 { {true} x := 1; x := 2; {true} }";
    let e = collect_obligations(&parse_outline(gap).unwrap(), &RgOptions::default()).unwrap_err();
    assert!(e.msg.contains("missing assertion"));
}

#[test]
fn skip_thread_has_only_trivia() {
    let o = parse_outline("outline: S\nthread t1 { {true} skip; {true} }").unwrap();
    let c = collect_obligations(&o, &RgOptions::default()).unwrap();
    assert!(c.obligations.iter().all(|ob| !matches!(ob.kind, ObligationKind::LocalTriple | ObligationKind::Stability)));
    assert!(check_outline(&o, &RgOptions::default()).unwrap().accepted);
}

#[test]
fn noninterference_examples() {
    let o = corpus("mp.pic");
    let p = CheckParams::default();
    let g = GuardedCommand { guard: a(&o, "t1 |= [x = 1]"), tid: Tid::new("t1"), subject: Subject::Instr(Instr::plain(crate::lang::Prim::Store(Tid::new("y"), Expr::Val(1)))) };
    let res = check_noninterference(&[a(&o, "t2 |= [y != 1] ; [x = 1]")], &[g], &p);
    assert!(matches!(&res[0].1, TripleStatus::Proved(d) if d.rule == crate::triples::Rule::WrOther2));
    let ld = GuardedCommand { guard: Assertion::tt(), tid: Tid::new("t2"), subject: Subject::Instr(Instr::plain(crate::lang::Prim::Load(Tid::new("b"), Tid::new("x")))) };
    let res = check_noninterference(&[a(&o, "b = 0")], &[ld], &p);
    assert!(matches!(res[0].1, TripleStatus::Refuted(_)));
}

#[test]
fn mem_stability_by_construction() {
    let o = corpus("mp.pic");
    assert_eq!(check_mem_stability(&a(&o, "t2 |= [y != 1] ; [x = 1]")).0, Status::Proved);
    assert_eq!(check_mem_stability(&a(&o, "a = 1")).0, Status::Proved);
}

#[test]
fn mp_spot_check() {
    let o = corpus("mp.pic");
    assert!(matches!(spot_check(&o, &ExploreOptions::default()), Some(Ok(_))));
}

#[test]
#[ignore]
fn corpus_report() {
    let name = std::env::var("PIC").unwrap();
    let o = corpus(&name);
    let t = std::time::Instant::now();
    let r = check_outline(&o, &RgOptions::default()).unwrap();
    for e in &r.entries {
        eprintln!("#{} {} {} {}", e.id, e.status.name(), e.kind.name(), e.obligation);
    }
    for e in r.failures() {
        eprintln!("{}", e.explain());
    }
    eprintln!("{} in {:?}", r.summary(), t.elapsed());
}
