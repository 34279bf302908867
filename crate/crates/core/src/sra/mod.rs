//! Potential-based strong release-acquire memory.

mod rules;
mod store;

pub use rules::*;
pub use store::*;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};

use crate::memory::MemoryModel;
use crate::name::{Loc, Tid, Val};

/// SRA as a memory model for exploration, working on canonical states.
#[derive(Debug, Default)]
pub struct SraModel {
    pub bounds: SraBounds,
    pub rule: WriteRule,
    truncated: AtomicBool,
}

impl SraModel {
    pub fn new(bounds: SraBounds) -> SraModel {
        SraModel { bounds, rule: WriteRule::Standard, truncated: AtomicBool::new(false) }
    }

    pub fn with_rule(mut self, rule: WriteRule) -> SraModel {
        self.rule = rule;
        self
    }

    /// Some step since the last reset dropped lists to stay within bounds.
    pub fn truncated(&self) -> bool {
        self.truncated.load(Ordering::Relaxed)
    }

    pub fn reset_truncation(&self) {
        self.truncated.store(false, Ordering::Relaxed);
    }

    fn note(&self, c: Canon) -> Mapping {
        if c.truncated {
            self.truncated.store(true, Ordering::Relaxed);
        }
        c.state
    }
}

impl MemoryModel for SraModel {
    type State = Mapping;

    fn name(&self) -> &'static str {
        "sra"
    }

    fn initial(&self, tids: &[Tid], init: &BTreeMap<Loc, Val>) -> Mapping {
        initial_sra(tids, init).expect("program has threads")
    }

    fn read(&self, m: &Mapping, t: Tid, x: Loc) -> Vec<(Val, Mapping)> {
        canon_read(m, t, x, false).into_iter().map(|(v, _, m2)| (v, m2)).collect()
    }

    fn write(&self, m: &Mapping, t: Tid, x: Loc, v: Val) -> Vec<Mapping> {
        vec![self.note(canon_write(m, t, x, v, self.rule, &self.bounds))]
    }

    fn rmw(&self, m: &Mapping, t: Tid, x: Loc, v: Val) -> Vec<(Val, Mapping)> {
        canon_rmw(m, t, x, v, self.rule, &self.bounds).into_iter().map(|(r, c)| (r, self.note(c))).collect()
    }

    fn fork(&self, m: &Mapping, t: Tid, t1: Tid, t2: Tid) -> Option<Mapping> {
        sra_fork(m, t, t1, t2)
    }

    fn join(&self, m: &Mapping, t: Tid, t1: Tid, t2: Tid) -> Option<Mapping> {
        canon_join(m, t, t1, t2, &self.bounds).map(|c| self.note(c))
    }
}

#[cfg(test)]
mod tests;
