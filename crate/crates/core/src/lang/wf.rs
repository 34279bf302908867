//! Static well-formedness, auxiliary-register removal and loop unrolling.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::ast::*;
use crate::name::{Reg, Tid};

/// Thread ids bound by parallel compositions inside `c`.
pub fn tids_of(c: &Cmd) -> BTreeSet<Tid> {
    let mut out = BTreeSet::new();
    fn go(c: &Cmd, out: &mut BTreeSet<Tid>) {
        match c {
            Cmd::Par(t1, a, t2, b) => {
                out.insert(*t1);
                out.insert(*t2);
                go(a, out);
                go(b, out);
            }
            Cmd::Seq(a, b) | Cmd::If(_, a, b) => {
                go(a, out);
                go(b, out);
            }
            Cmd::While(_, b) => go(b, out),
            _ => {}
        }
    }
    go(c, &mut out);
    out
}

fn check(c: &Cmd) -> Result<(), String> {
    match c {
        Cmd::Par(t1, a, t2, b) => {
            if t1 == t2 {
                return Err(format!("parallel composition uses `{t1}` twice"));
            }
            check(a)?;
            check(b)?;
            let (ta, tb) = (tids_of(a), tids_of(b));
            for t in [t1, t2] {
                if ta.contains(t) || tb.contains(t) {
                    return Err(format!("thread id `{t}` reused inside its own composition"));
                }
            }
            if let Some(t) = ta.intersection(&tb).next() {
                return Err(format!("thread id `{t}` used in both branches"));
            }
            Ok(())
        }
        Cmd::Seq(a, b) | Cmd::If(_, a, b) => {
            check(a)?;
            check(b)
        }
        Cmd::While(_, b) => check(b),
        _ => Ok(()),
    }
}

pub fn well_formed(c: &Cmd) -> bool {
    check(c).is_ok()
}

/// Well-formedness of a pool: each command is well formed, and no thread id
/// occurs in two entries or inside its own command.
pub fn well_formed_pool(pool: &CommandPool) -> Result<(), String> {
    if pool.is_empty() {
        return Err("empty command pool".into());
    }
    let mut seen: BTreeSet<Tid> = BTreeSet::new();
    for (t, c) in pool {
        check(c)?;
        for u in tids_of(c) {
            if u == *t {
                return Err(format!("thread `{t}` occurs inside its own command"));
            }
            if !seen.insert(u) {
                return Err(format!("thread id `{u}` occurs in two pool entries"));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("auxiliary register `{reg}` is used outside instrumentation in `{at}`")]
pub struct AuxError {
    pub reg: Reg,
    pub at: String,
}

/// Delete assignments to `z` from every instrumentation list.
pub fn remove_aux(c: &Cmd, z: &BTreeSet<Reg>) -> Result<Cmd, AuxError> {
    let leak = |regs: BTreeSet<Reg>, at: &dyn std::fmt::Display| -> Result<(), AuxError> {
        match regs.intersection(z).next() {
            Some(r) => Err(AuxError { reg: *r, at: at.to_string() }),
            None => Ok(()),
        }
    };
    Ok(match c {
        Cmd::Instr(i) => {
            let mut retained = BTreeSet::new();
            match &i.prim {
                Prim::Assign(r, e) => {
                    retained.insert(*r);
                    e.regs(&mut retained);
                }
                Prim::Load(r, _) => {
                    retained.insert(*r);
                }
                Prim::Store(_, e) | Prim::Swap(_, e) => e.regs(&mut retained),
            }
            for (r, e) in &i.aux {
                if !z.contains(r) {
                    retained.insert(*r);
                    e.regs(&mut retained);
                }
            }
            leak(retained, i)?;
            let aux = i.aux.iter().filter(|(r, _)| !z.contains(r)).cloned().collect();
            Cmd::Instr(Instr { prim: i.prim.clone(), aux })
        }
        Cmd::Seq(a, b) => Cmd::seq(remove_aux(a, z)?, remove_aux(b, z)?),
        Cmd::If(e, a, b) => {
            let mut rs = BTreeSet::new();
            e.regs(&mut rs);
            leak(rs, e)?;
            Cmd::if_(e.clone(), remove_aux(a, z)?, remove_aux(b, z)?)
        }
        Cmd::While(e, b) => {
            let mut rs = BTreeSet::new();
            e.regs(&mut rs);
            leak(rs, e)?;
            Cmd::while_(e.clone(), remove_aux(b, z)?)
        }
        Cmd::Par(t1, a, t2, b) => Cmd::par(*t1, remove_aux(a, z)?, *t2, remove_aux(b, z)?),
        Cmd::Skip | Cmd::Cutoff => c.clone(),
    })
}

/// `do C until e` is `C ; while ¬e do C`.
pub fn desugar_do_until(body: Cmd, e: Expr) -> Cmd {
    Cmd::seq(body.clone(), Cmd::while_(Expr::not(e), body))
}

/// Replace every loop by `k` guarded copies of its body. A run that would need
/// iteration `k + 1` ends in `Cmd::Cutoff`, which has no steps.
pub fn unroll(c: &Arc<Cmd>, k: usize) -> Arc<Cmd> {
    if !c.has_loops() {
        return c.clone();
    }
    Arc::new(match &**c {
        Cmd::Seq(a, b) => Cmd::Seq(unroll(a, k), unroll(b, k)),
        Cmd::If(e, a, b) => Cmd::If(e.clone(), unroll(a, k), unroll(b, k)),
        Cmd::Par(t1, a, t2, b) => Cmd::Par(*t1, unroll(a, k), *t2, unroll(b, k)),
        Cmd::While(e, body) => {
            let body = unroll(body, k);
            let mut acc = Cmd::if_(e.clone(), Cmd::Cutoff, Cmd::Skip);
            for _ in 0..k {
                acc = Cmd::If(e.clone(), Arc::new(Cmd::Seq(body.clone(), Arc::new(acc))), Arc::new(Cmd::Skip));
            }
            acc
        }
        other => other.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::name::Name;

    fn par(a: &str, c1: Cmd, b: &str, c2: Cmd) -> Cmd {
        Cmd::par(Name::new(a), c1, Name::new(b), c2)
    }

    #[test]
    fn well_formedness_examples() {
        assert!(well_formed(&par("t1", Cmd::Skip, "t2", Cmd::Skip)));
        assert!(!well_formed(&par("t1", Cmd::Skip, "t1", Cmd::Skip)));
        let inner = par("t2", Cmd::Skip, "t3", Cmd::Skip);
        assert!(!well_formed(&par("t1", inner, "t2", Cmd::Skip)));
    }

    #[test]
    fn remove_aux_examples() {
        let c = Name::new("c^");
        let z = BTreeSet::from([c]);
        let ld = Cmd::Instr(Instr {
            prim: Prim::Load(Name::new("a"), Name::new("x")),
            aux: vec![(c, Expr::Val(1))],
        });
        assert_eq!(remove_aux(&ld, &z).unwrap(), Cmd::instr(Prim::Load(Name::new("a"), Name::new("x"))));
        assert_eq!(remove_aux(&ld, &BTreeSet::new()).unwrap(), ld);
        let bad = Cmd::Instr(Instr {
            prim: Prim::Store(Name::new("x"), Expr::Val(1)),
            aux: vec![(Name::new("a"), Expr::Reg(c))],
        });
        let err = remove_aux(&bad, &z).unwrap_err();
        assert_eq!(err.reg, c);
    }

    #[test]
    fn unroll_leaves_no_loops() {
        let w = Arc::new(Cmd::while_(Expr::reg("a"), Cmd::instr(Prim::Assign(Name::new("a"), Expr::Val(0)))));
        let u = unroll(&w, 2);
        assert!(!u.has_loops());
        assert_eq!(u.write_count(), 0);
    }
}
