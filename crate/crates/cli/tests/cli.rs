use std::process::{Command, Output};

fn piccolo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_piccolo"))
        .args(args)
        .current_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    piccolo(args).status.code().expect("exit code")
}

#[test]
fn litmus_exit_codes() {
    assert_eq!(code(&["litmus", "corpus/mp.lit", "--model", "sra"]), 0);
    assert_eq!(code(&["litmus", "corpus/mp.lit", "--model", "sra", "--max-list-len", "0"]), 2);
    // SB without fences allows (0,0), which SC rules out.
    assert_eq!(code(&["litmus", "corpus/sb-plain.lit", "--model", "sc"]), 1);
    assert_eq!(code(&["litmus", "corpus/sb-plain.lit", "--model", "graph"]), 0);
    assert_eq!(code(&["litmus", "corpus/peterson.lit", "--max-states", "500"]), 3);
    assert_eq!(code(&["litmus", "corpus/does-not-exist.lit"]), 2);
    assert_eq!(code(&["litmus"]), 2);
}

#[test]
fn check_proof_mp() {
    let o = piccolo(&["check-proof", "corpus/mp.pic"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("0 refuted, 0 unproved: accepted"), "{text}");
    assert_eq!(code(&["check-proof", "corpus/mp.pic", "--explain", "3"]), 0);
    assert_eq!(code(&["check-proof", "corpus/mp.pic", "--explain", "999"]), 2);
}

#[test]
fn json_reports_are_reproducible() {
    for args in [
        vec!["litmus", "corpus/corr2.lit", "--json"],
        vec!["compare", "corpus/sb-plain.lit", "--json"],
        vec!["check-proof", "corpus/lb.pic", "--json"],
        vec!["equiv-fuzz", "--n", "5", "--seed", "7", "--json"],
    ] {
        let a = piccolo(&args).stdout;
        let b = piccolo(&args).stdout;
        assert_eq!(a, b, "{args:?}");
        let mut seq = args.clone();
        seq.extend(["--jobs", "1"]);
        assert_eq!(a, piccolo(&seq).stdout, "{args:?}");
        let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
        assert!(v.is_object());
    }
}

#[test]
fn litmus_json_shape() {
    let o = piccolo(&["litmus", "corpus/mp.lit", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["model"], "sra");
    assert_eq!(v["exact"], true);
    assert_eq!(v["holds"], true);
    assert_eq!(v["outcomes"].as_array().unwrap().len(), 3);
    assert_eq!(v["verdicts"][0]["status"], "forbidden");
}

#[test]
fn triple_subcommand() {
    let args = |post: &'static str| {
        vec![
            "triple", "--locations", "x,y", "--registers", "a", "--tid", "t1", "--cmd", "y := 1",
            "--pre", "t2 |= [y != 1] ; [x = 1] && t1 |= [x = 1]", "--post", post,
        ]
    };
    assert_eq!(code(&args("t2 |= [y != 1] ; [x = 1]")), 0);
    assert_eq!(code(&args("t2 |= [y != 1]")), 1);
    assert_eq!(code(&["triple", "--tid", "t1", "--cmd", "x := 1; x := 2", "--locations", "x", "--pre", "true", "--post", "true"]), 2);
}

#[test]
fn parse_prints_parsable_text() {
    let o = piccolo(&["parse", "corpus/corr0.lit"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let again = piccolo::lang::parse_program(&text).unwrap();
    let orig = piccolo::lang::parse_program(&std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus/corr0.lit")).unwrap()).unwrap();
    assert_eq!(again.pool, orig.pool);
    assert_eq!(code(&["parse", "corpus/peterson.pic"]), 0);
}
