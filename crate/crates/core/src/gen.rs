//! Random small programs for differential testing and fuzzing.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lang::{Assertion, Classes, Cmd, CommandPool, Expr, Instr, Interval, LitmusSpec, Prim};
use crate::name::{Loc, Name, Reg, Tid, Val};

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub threads: usize,
    pub max_instrs: usize,
    pub locs: usize,
    pub max_val: Val,
    /// Allow `if` on a previously loaded register.
    pub branches: bool,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        GenConfig { threads: 3, max_instrs: 3, locs: 2, max_val: 2, branches: true }
    }
}

/// A random loop-free litmus program with thread-private registers and no
/// clauses, so every register is observed.
pub fn random_litmus(seed: u64, cfg: &GenConfig) -> LitmusSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let locs: Vec<Name> = ["x", "y", "z", "w"].iter().take(cfg.locs.clamp(1, 4)).map(|s| Name::new(s)).collect();
    let mut pool = CommandPool::new();
    let mut classes = Classes::default();
    classes.locs.extend(locs.iter().copied());
    for t in 1..=cfg.threads.max(1) {
        let tid = Name::new(&format!("t{t}"));
        let n = rng.gen_range(1..=cfg.max_instrs.max(1));
        let mut loaded: Vec<Name> = Vec::new();
        let mut cmds = Vec::new();
        for k in 0..n {
            let x = *locs.choose(&mut rng).unwrap();
            let v = rng.gen_range(1..=cfg.max_val.max(1));
            let c = match rng.gen_range(0..10) {
                0..=3 => Cmd::Instr(Instr::plain(Prim::Store(x, Expr::Val(v)))),
                4..=7 => {
                    let r = Name::new(&format!("r{t}{k}"));
                    classes.regs.insert(r);
                    loaded.push(r);
                    Cmd::Instr(Instr::plain(Prim::Load(r, x)))
                }
                8 => Cmd::Instr(Instr::plain(Prim::Swap(x, Expr::Val(v)))),
                _ if cfg.branches && !loaded.is_empty() => {
                    let r = *loaded.choose(&mut rng).unwrap();
                    let y = *locs.choose(&mut rng).unwrap();
                    Cmd::if_(
                        Expr::eq(Expr::Reg(r), Expr::Val(rng.gen_range(0..=cfg.max_val))),
                        Cmd::Instr(Instr::plain(Prim::Store(y, Expr::Val(v)))),
                        Cmd::Skip,
                    )
                }
                _ => Cmd::Instr(Instr::plain(Prim::Store(x, Expr::Val(v)))),
            };
            cmds.push(c);
        }
        pool.insert(tid, Arc::new(Cmd::seq_all(cmds)));
    }
    LitmusSpec { name: Some(format!("random-s{seed}")), pool, init: BTreeMap::new(), clauses: Vec::new(), classes }
}

/// Vocabulary of random assertions.
#[derive(Clone, Debug)]
pub struct AssertGen {
    pub locs: Vec<Loc>,
    pub regs: Vec<Reg>,
    pub tids: Vec<Tid>,
    pub max_val: Val,
    /// Allow `R(x)` atoms.
    pub flags: bool,
}

impl AssertGen {
    pub fn new(locs: &[&str], regs: &[&str], tids: &[&str], max_val: Val) -> AssertGen {
        AssertGen {
            locs: locs.iter().map(|s| Name::new(s)).collect(),
            regs: regs.iter().map(|s| Name::new(s)).collect(),
            tids: tids.iter().map(|s| Name::new(s)).collect(),
            max_val,
            flags: true,
        }
    }

    fn val(&self, rng: &mut impl Rng) -> Expr {
        Expr::Val(rng.gen_range(0..=self.max_val))
    }

    fn store_expr(&self, rng: &mut impl Rng) -> Expr {
        let x = *self.locs.choose(rng).expect("no locations");
        match rng.gen_range(0..6) {
            0 if self.flags => Expr::IsR(x),
            1 if !self.regs.is_empty() => Expr::eq(Expr::Loc(x), Expr::Reg(*self.regs.choose(rng).unwrap())),
            2 => Expr::ne(Expr::Loc(x), self.val(rng)),
            3 => Expr::and(Expr::eq(Expr::Loc(x), self.val(rng)), self.store_expr(rng)),
            _ => Expr::eq(Expr::Loc(x), self.val(rng)),
        }
    }

    pub fn interval(&self, rng: &mut impl Rng, depth: usize) -> Interval {
        if depth == 0 {
            return Interval::Atom(self.store_expr(rng));
        }
        match rng.gen_range(0..5) {
            0 | 1 => Interval::chop(self.interval(rng, depth - 1), self.interval(rng, depth - 1)),
            2 => Interval::and(self.interval(rng, depth - 1), self.interval(rng, depth - 1)),
            3 => Interval::or(self.interval(rng, depth - 1), self.interval(rng, depth - 1)),
            _ => Interval::Atom(self.store_expr(rng)),
        }
    }

    fn leaf(&self, rng: &mut impl Rng) -> Assertion {
        if !self.regs.is_empty() && rng.gen_bool(0.3) {
            let r = *self.regs.choose(rng).unwrap();
            let op = if rng.gen_bool(0.5) { Expr::eq } else { Expr::ne };
            Assertion::Expr(op(Expr::Reg(r), Expr::Val(rng.gen_range(0..=self.max_val))))
        } else {
            let t = *self.tids.choose(rng).expect("no threads");
            let d = rng.gen_range(0..=2);
            Assertion::Pot(t, self.interval(rng, d))
        }
    }

    pub fn assertion(&self, rng: &mut impl Rng, depth: usize) -> Assertion {
        if depth == 0 {
            return self.leaf(rng);
        }
        match rng.gen_range(0..4) {
            0 => Assertion::and(self.assertion(rng, depth - 1), self.assertion(rng, depth - 1)),
            1 => Assertion::or(self.assertion(rng, depth - 1), self.assertion(rng, depth - 1)),
            _ => self.leaf(rng),
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
