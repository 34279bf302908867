//! `piccolo`: parse, explore and compare litmus programs, and check proof
//! outlines.
//!
//! Exit codes: 0 when every verdict holds, 1 on a verification failure,
//! 2 on usage or parse errors, 3 when the state budget ran out.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use piccolo::assertions::CheckParams;
use piccolo::explore::{
    default_bounds, reachable_finals, reachable_finals_sra, verdicts, witness_strings, ExploreOptions, OutcomeSet,
    Verdict,
};
use piccolo::gen::{random_litmus, GenConfig};
use piccolo::graphs::oracle_finals;
use piccolo::lang::{block_cmd, parse_assertion_in, parse_cmd_in, parse_outline, parse_program, Classes, Cmd, LitmusSpec};
use piccolo::memory::ScModel;
use piccolo::name::{Name, Val};
use piccolo::par::Mode;
use piccolo::rg::{check_outline, spot_check, RgOptions};
use piccolo::sra::{SraBounds, SraModel};
use piccolo::triples::{check_triple, MemoryTriple, TripleStatus};

const OK: u8 = 0;
const FAILED: u8 = 1;
const USAGE: u8 = 2;
const BUDGET: u8 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Model {
    Sra,
    Sc,
    Graph,
}

#[derive(Parser, Debug)]
#[command(name = "piccolo", version, about = "Potential-based SRA exploration and rely-guarantee outline checking")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
    #[arg(long, value_enum, default_value = "sra", global = true)]
    model: Model,
    /// SRA store-list bound B (exploration and checking).
    #[arg(long, global = true)]
    max_list_len: Option<usize>,
    /// SRA potential-size bound S (exploration).
    #[arg(long, global = true)]
    max_pot_size: Option<usize>,
    /// Base value domain of the checker, e.g. `0,1,2`.
    #[arg(long, value_delimiter = ',', global = true)]
    values: Option<Vec<Val>>,
    #[arg(long, default_value_t = 2, global = true)]
    unroll: usize,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Distinct configurations to visit before giving up.
    #[arg(long, default_value_t = 2_000_000, global = true)]
    max_states: usize,
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a program or outline and print it back.
    Parse { file: PathBuf },
    /// Reachable final register values.
    Explore { file: PathBuf },
    /// Check the forbid/allow clauses of a litmus file.
    Litmus { file: PathBuf },
    /// SC, SRA and graph-oracle outcome sets side by side.
    Compare { file: PathBuf },
    /// Random loop-free programs: SRA exploration against the graph oracle.
    EquivFuzz {
        #[arg(long, default_value_t = 200)]
        n: u64,
    },
    /// Check a proof outline.
    CheckProof {
        file: PathBuf,
        /// Print one obligation with its derivation or counterexample.
        #[arg(long)]
        explain: Option<usize>,
        /// Leave assertions that only feed a consequence step out of the relies.
        #[arg(long)]
        no_consequence_relies: bool,
        /// Also explore the program and check the postcondition on every final state.
        #[arg(long)]
        spot_check: bool,
    },
    /// Check one memory triple `{pre} tid ↦ cmd {post}`.
    Triple {
        #[arg(long, value_delimiter = ',')]
        locations: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        registers: Vec<String>,
        #[arg(long)]
        pre: String,
        #[arg(long)]
        tid: String,
        #[arg(long)]
        cmd: String,
        #[arg(long)]
        post: String,
    },
}

struct Failure(u8, String);

fn usage(msg: impl Into<String>) -> Failure {
    Failure(USAGE, msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    if cli.max_list_len == Some(0) {
        return Err(usage("--max-list-len must be at least 1"));
    }
    if cli.max_pot_size == Some(0) {
        return Err(usage("--max-pot-size must be at least 1"));
    }
    if cli.max_states == 0 {
        return Err(usage("--max-states must be at least 1"));
    }
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        // Fails only when a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    match &cli.cmd {
        Command::Parse { file } => parse_cmd(cli, file),
        Command::Explore { file } => {
            let spec = load_program(file)?;
            let out = explore(cli, &spec, cli.model)?;
            emit(cli, report_json(cli, &spec, &out, None), || outcome_text(&out));
            Ok(if out.budget_exceeded { BUDGET } else { OK })
        }
        Command::Litmus { file } => {
            let spec = load_program(file)?;
            let out = explore(cli, &spec, cli.model)?;
            let vs = verdicts(&spec, &out);
            emit(cli, report_json(cli, &spec, &out, Some(&vs)), || {
                let mut s = outcome_text(&out);
                for v in &vs {
                    s.push_str(&format!("{} {}: {}\n", kind_word(v), v.clause, v.status));
                    if let (false, Some(o), Some(w)) = (v.holds, &v.outcome, &v.witness) {
                        s.push_str(&format!("  outcome {o}\n  witness {}\n", w.join(" ")));
                    }
                }
                s
            });
            Ok(if !vs.iter().all(|v| v.holds) {
                FAILED
            } else if out.budget_exceeded {
                BUDGET
            } else {
                OK
            })
        }
        Command::Compare { file } => compare_cmd(cli, file),
        Command::EquivFuzz { n } => equiv_fuzz(cli, *n),
        Command::CheckProof { file, explain, no_consequence_relies, spot_check } => {
            check_proof(cli, file, *explain, !*no_consequence_relies, *spot_check)
        }
        Command::Triple { locations, registers, pre, tid, cmd, post } => {
            triple_cmd(cli, locations, registers, pre, tid, cmd, post)
        }
    }
}

fn read(file: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(file).map_err(|e| usage(format!("{}: {e}", file.display())))
}

fn load_program(file: &Path) -> Result<LitmusSpec, Failure> {
    parse_program(&read(file)?).map_err(|e| usage(format!("{}:{e}", file.display())))
}

fn mode(cli: &Cli) -> Mode {
    if cli.jobs == Some(1) {
        Mode::Sequential
    } else {
        Mode::Parallel
    }
}

fn explore_options(cli: &Cli) -> ExploreOptions {
    ExploreOptions { unroll: cli.unroll, max_states: cli.max_states, mode: mode(cli) }
}

fn sra_bounds(cli: &Cli, spec: &LitmusSpec) -> SraBounds {
    let d = default_bounds(spec, cli.unroll);
    SraBounds {
        max_list_len: cli.max_list_len.unwrap_or(d.max_list_len),
        max_pot_size: cli.max_pot_size.unwrap_or(d.max_pot_size),
    }
}

fn check_params(cli: &Cli) -> CheckParams {
    let d = CheckParams::default();
    CheckParams {
        values: cli.values.clone().unwrap_or(d.values),
        max_list_len: cli.max_list_len.unwrap_or(d.max_list_len),
    }
}

fn explore(cli: &Cli, spec: &LitmusSpec, model: Model) -> Result<OutcomeSet, Failure> {
    let opts = explore_options(cli);
    Ok(match model {
        Model::Sra => reachable_finals_sra(spec, &SraModel::new(sra_bounds(cli, spec)), &opts),
        Model::Sc => reachable_finals(spec, &ScModel, &opts),
        Model::Graph => oracle_finals(spec, &opts).map_err(|e| usage(e.to_string()))?,
    })
}

fn model_name(m: Model) -> &'static str {
    match m {
        Model::Sra => "sra",
        Model::Sc => "sc",
        Model::Graph => "graph",
    }
}

fn kind_word(v: &Verdict) -> &'static str {
    match v.kind {
        piccolo::lang::ClauseKind::Allow => "allow",
        piccolo::lang::ClauseKind::Forbid => "forbid",
    }
}

fn outcomes_json(out: &OutcomeSet) -> Value {
    Value::Array(out.outcomes.iter().map(|o| serde_json::to_value(o).expect("outcomes serialize")).collect())
}

/// Structured report shared by `explore` and `litmus`. Timing is left out
/// so that equal inputs give byte-identical output.
fn report_json(cli: &Cli, spec: &LitmusSpec, out: &OutcomeSet, vs: Option<&[Verdict]>) -> Value {
    let bounds = match cli.model {
        Model::Sra => {
            let b = sra_bounds(cli, spec);
            json!({"unroll": cli.unroll, "max_list_len": b.max_list_len, "max_pot_size": b.max_pot_size, "max_states": cli.max_states})
        }
        _ => json!({"unroll": cli.unroll, "max_states": cli.max_states}),
    };
    let witness: serde_json::Map<String, Value> =
        out.witnesses.iter().map(|(o, w)| (o.to_string(), json!(witness_strings(w)))).collect();
    let mut r = json!({
        "name": spec.name,
        "model": model_name(cli.model),
        "bounds": bounds,
        "exact": out.exact(),
        "truncated": out.truncated,
        "cutoff": out.cutoff,
        "budget_exceeded": out.budget_exceeded,
        "states": out.stats.states,
        "outcomes": outcomes_json(out),
        "witness": witness,
    });
    if let Some(vs) = vs {
        r["verdicts"] = serde_json::to_value(vs).expect("verdicts serialize");
        r["holds"] = json!(vs.iter().all(|v| v.holds));
    }
    r
}

fn outcome_text(out: &OutcomeSet) -> String {
    let mut s = String::new();
    for o in &out.outcomes {
        s.push_str(&format!("{o}\n"));
    }
    let mut flags = Vec::new();
    if out.truncated {
        flags.push("potentials truncated");
    }
    if out.cutoff {
        flags.push("loop unrolling cut off runs");
    }
    if out.budget_exceeded {
        flags.push("state budget exceeded");
    }
    s.push_str(&format!(
        "{} outcomes, {} states{}\n",
        out.outcomes.len(),
        out.stats.states,
        if flags.is_empty() { String::new() } else { format!(" ({})", flags.join(", ")) }
    ));
    s
}

/// Write to stdout, ignoring a closed pipe.
fn out(s: &str) {
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn emit(cli: &Cli, v: Value, text: impl FnOnce() -> String) {
    if cli.json {
        out(&format!("{}\n", serde_json::to_string_pretty(&v).expect("json")));
    } else {
        out(&text());
    }
}

fn parse_cmd(cli: &Cli, file: &Path) -> Result<u8, Failure> {
    let src = read(file)?;
    let is_outline = src.lines().any(|l| l.trim_start().starts_with("outline"));
    if is_outline {
        let o = parse_outline(&src).map_err(|e| usage(format!("{}:{e}", file.display())))?;
        let threads: serde_json::Map<String, Value> =
            o.threads.iter().map(|(t, b)| (t.to_string(), json!(block_cmd(b).to_string()))).collect();
        let v = json!({
            "kind": "outline",
            "name": o.name,
            "parent": o.parent.to_string(),
            "aux": o.aux.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
            "pre": o.pre.to_string(),
            "post": o.post.to_string(),
            "threads": threads,
        });
        emit(cli, v, || {
            let mut s = format!("outline {}\npre: {{ {} }}\n", o.name.as_deref().unwrap_or("-"), o.pre);
            for (t, b) in &o.threads {
                s.push_str(&format!("thread {t} {{ {} }}\n", block_cmd(b)));
            }
            s.push_str(&format!("post: {{ {} }}\n", o.post));
            s
        });
    } else {
        let spec = parse_program(&src).map_err(|e| usage(format!("{}:{e}", file.display())))?;
        let threads: serde_json::Map<String, Value> =
            spec.pool.iter().map(|(t, c)| (t.to_string(), json!(c.to_string()))).collect();
        let v = json!({
            "kind": "program",
            "name": spec.name,
            "init": spec.init.iter().map(|(x, v)| (x.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
            "threads": threads,
            "clauses": spec.clauses.iter().map(|c| json!({"kind": format!("{:?}", c.kind).to_lowercase(), "expr": c.expr.to_string()})).collect::<Vec<_>>(),
        });
        emit(cli, v, || spec.to_string());
    }
    Ok(OK)
}

fn compare_cmd(cli: &Cli, file: &Path) -> Result<u8, Failure> {
    let spec = load_program(file)?;
    let sc = explore(cli, &spec, Model::Sc)?;
    let sra = explore(cli, &spec, Model::Sra)?;
    let oracle = oracle_finals(&spec, &explore_options(cli)).ok();
    let agrees = oracle.as_ref().is_none_or(|o| o.outcomes == sra.outcomes);
    let budget = sc.budget_exceeded || sra.budget_exceeded;
    let v = json!({
        "name": spec.name,
        "sc": outcomes_json(&sc),
        "sra": outcomes_json(&sra),
        "graph": oracle.as_ref().map(outcomes_json),
        "sra_only": sra.outcomes.difference(&sc.outcomes).map(|o| o.to_string()).collect::<Vec<_>>(),
        "oracle_agrees": agrees,
    });
    emit(cli, v, || {
        let mut all: Vec<_> = sc.outcomes.union(&sra.outcomes).cloned().collect();
        if let Some(o) = &oracle {
            all.extend(o.outcomes.iter().cloned());
        }
        all.sort();
        all.dedup();
        let mark = |b: bool| if b { "x" } else { "." };
        let mut s = String::from("sc sra graph  outcome\n");
        for o in &all {
            let g = oracle.as_ref().map_or("-", |g| mark(g.contains(o)));
            s.push_str(&format!("{:>2} {:>3} {:>5}  {o}\n", mark(sc.contains(o)), mark(sra.contains(o)), g));
        }
        s.push_str(if agrees { "sra and graph oracle agree\n" } else { "sra and graph oracle DISAGREE\n" });
        s
    });
    Ok(if !agrees {
        FAILED
    } else if budget {
        BUDGET
    } else {
        OK
    })
}

fn equiv_fuzz(cli: &Cli, n: u64) -> Result<u8, Failure> {
    let opts = explore_options(cli);
    let cfg = GenConfig::default();
    let mut mismatches = Vec::new();
    for i in 0..n {
        let seed = cli.seed.wrapping_add(i);
        let spec = random_litmus(seed, &cfg);
        let sra = reachable_finals_sra(&spec, &SraModel::new(sra_bounds(cli, &spec)), &opts);
        let oracle = oracle_finals(&spec, &opts).map_err(|e| usage(e.to_string()))?;
        if sra.outcomes != oracle.outcomes {
            mismatches.push((seed, spec.to_string()));
        }
    }
    let v = json!({
        "programs": n,
        "seed": cli.seed,
        "mismatches": mismatches.iter().map(|(s, p)| json!({"seed": s, "program": p})).collect::<Vec<_>>(),
    });
    emit(cli, v, || {
        let mut s = String::new();
        for (seed, p) in &mismatches {
            s.push_str(&format!("mismatch at seed {seed}:\n{p}\n"));
        }
        s.push_str(&format!("{n} programs from seed {}, {} mismatches\n", cli.seed, mismatches.len()));
        s
    });
    Ok(if mismatches.is_empty() { OK } else { FAILED })
}

fn check_proof(cli: &Cli, file: &Path, explain: Option<usize>, consequence_relies: bool, spot: bool) -> Result<u8, Failure> {
    let o = parse_outline(&read(file)?).map_err(|e| usage(format!("{}:{e}", file.display())))?;
    let opts = RgOptions { params: check_params(cli), consequence_relies, mode: mode(cli) };
    let report = check_outline(&o, &opts).map_err(|e| usage(format!("{}: {e}", file.display())))?;
    if let Some(id) = explain {
        let e = report.entry(id).ok_or_else(|| usage(format!("no obligation #{id}")))?;
        if cli.json {
            out(&format!("{}\n", serde_json::to_string_pretty(e).expect("json")));
        } else {
            out(&e.explain());
        }
        return Ok(if e.status.ok() { OK } else { FAILED });
    }
    let spot_result = if spot { spot_check(&o, &explore_options(cli)) } else { None };
    let mut v = serde_json::to_value(&report).expect("json");
    if let Some(r) = &spot_result {
        v["spot_check"] = match r {
            Ok(n) => json!({"holds": true, "outcomes": n}),
            Err(msg) => json!({"holds": false, "violation": msg}),
        };
    }
    emit(cli, v, || {
        let mut s = String::new();
        for e in &report.entries {
            s.push_str(&format!("#{:<4} {:<13} {:<18} {}\n", e.id, e.status.name(), e.kind.name(), e.obligation));
        }
        for e in report.failures() {
            s.push('\n');
            s.push_str(&e.explain());
        }
        match &spot_result {
            Some(Ok(n)) => s.push_str(&format!("spot check: postcondition holds on {n} final outcomes\n")),
            Some(Err(msg)) => s.push_str(&format!("spot check FAILED: {msg}\n")),
            None => {}
        }
        s.push_str(&report.summary());
        s.push('\n');
        s
    });
    let spot_ok = !matches!(spot_result, Some(Err(_)));
    Ok(if report.accepted && spot_ok { OK } else { FAILED })
}

fn triple_cmd(
    cli: &Cli,
    locations: &[String],
    registers: &[String],
    pre: &str,
    tid: &str,
    cmd: &str,
    post: &str,
) -> Result<u8, Failure> {
    let classes = Classes {
        locs: locations.iter().map(|s| Name::new(s)).collect(),
        regs: registers.iter().map(|s| Name::new(s)).collect(),
    };
    let pre = parse_assertion_in(pre, &classes).map_err(|e| usage(format!("pre: {e}")))?;
    let post = parse_assertion_in(post, &classes).map_err(|e| usage(format!("post: {e}")))?;
    let instr = match parse_cmd_in(cmd, &classes).map_err(|e| usage(format!("cmd: {e}")))? {
        Cmd::Instr(i) => i,
        c => return Err(usage(format!("cmd: `{c}` is not a single instruction"))),
    };
    let t = MemoryTriple::instr(pre, Name::new(tid), instr, post);
    let status = check_triple(&t, &check_params(cli));
    let (detail, ok) = match &status {
        TripleStatus::Proved(d) => (d.render(), true),
        TripleStatus::ValidBounded => (String::new(), true),
        TripleStatus::Refuted(c) => (c.to_string(), false),
    };
    let v = json!({"triple": t.to_string(), "status": status.name(), "detail": detail});
    emit(cli, v, || format!("{t}\n{}\n{detail}", status.name()));
    Ok(if ok { OK } else { FAILED })
}
