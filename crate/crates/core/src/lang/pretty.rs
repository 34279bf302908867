//! Printers that produce the concrete syntax accepted by the parser.

use std::fmt::{self, Display, Formatter};

use super::ast::*;

fn bin_prec(op: BinOp) -> u8 {
    match op {
        BinOp::Or => 1,
        BinOp::And => 2,
        BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
        BinOp::Add | BinOp::Sub => 5,
        BinOp::Mul => 6,
    }
}

fn bin_sym(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Eq => "=",
        BinOp::Ne => "!=",
        BinOp::Lt => "<",
        BinOp::Le => "<=",
        BinOp::Gt => ">",
        BinOp::Ge => ">=",
        BinOp::And => "&&",
        BinOp::Or => "||",
    }
}

fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(op, ..) => bin_prec(*op),
        _ => 9,
    }
}

fn write_expr(f: &mut Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    let p = expr_prec(e);
    if p < min {
        write!(f, "(")?;
        write_expr(f, e, 0)?;
        return write!(f, ")");
    }
    match e {
        Expr::Val(v) => write!(f, "{v}"),
        Expr::Reg(r) | Expr::Loc(r) => write!(f, "{r}"),
        Expr::IsR(x) => write!(f, "R({x})"),
        Expr::Un(UnOp::Not, a) => {
            write!(f, "!")?;
            write_expr(f, a, 9)
        }
        Expr::Un(UnOp::Neg, a) => {
            write!(f, "-(")?;
            write_expr(f, a, 0)?;
            write!(f, ")")
        }
        Expr::Bin(op, a, b) => {
            // Comparisons do not associate; everything else is left-associative.
            let cmp = p == 4;
            write_expr(f, a, if cmp { p + 1 } else { p })?;
            write!(f, " {} ", bin_sym(*op))?;
            write_expr(f, b, p + 1)
        }
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

impl Display for Prim {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Prim::Assign(r, e) => write!(f, "{r} := {e}"),
            Prim::Store(x, e) => write!(f, "{x} := {e}"),
            Prim::Load(r, x) => write!(f, "load {r} := {x}"),
            Prim::Swap(x, e) => write!(f, "swap {x} := {e}"),
        }
    }
}

impl Display for Instr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if self.aux.is_empty() {
            return write!(f, "{}", self.prim);
        }
        write!(f, "<| {}", self.prim)?;
        for (r, e) in &self.aux {
            write!(f, ", {r} := {e}")?;
        }
        write!(f, " |>")
    }
}

impl Display for Cmd {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Cmd::Skip => write!(f, "skip"),
            Cmd::Instr(i) => write!(f, "{i}"),
            Cmd::Seq(a, b) => {
                if matches!(**a, Cmd::Seq(..)) {
                    write!(f, "({a}); {b}")
                } else {
                    write!(f, "{a}; {b}")
                }
            }
            Cmd::If(e, a, b) => write!(f, "if {e} then {a} else {b} fi"),
            Cmd::While(e, b) => write!(f, "while {e} do {b} od"),
            Cmd::Par(t1, a, t2, b) => write!(f, "thread {t1} {{ {a} }} || thread {t2} {{ {b} }}"),
            Cmd::Cutoff => write!(f, "cutoff"),
        }
    }
}

fn interval_prec(i: &Interval) -> u8 {
    match i {
        Interval::Or(..) => 1,
        Interval::And(..) => 2,
        Interval::Chop(..) => 3,
        Interval::Atom(_) => 4,
    }
}

fn write_interval(f: &mut Formatter<'_>, i: &Interval, min: u8) -> fmt::Result {
    let p = interval_prec(i);
    if p < min {
        write!(f, "(")?;
        write_interval(f, i, 0)?;
        return write!(f, ")");
    }
    match i {
        Interval::Atom(e) => write!(f, "[{e}]"),
        Interval::Chop(a, b) | Interval::And(a, b) | Interval::Or(a, b) => {
            let sym = match i {
                Interval::Chop(..) => " ; ",
                Interval::And(..) => " && ",
                _ => " || ",
            };
            write_interval(f, a, p)?;
            f.write_str(sym)?;
            write_interval(f, b, p + 1)
        }
    }
}

impl Display for Interval {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_interval(f, self, 0)
    }
}

/// `e => φ` is stored as `¬e ∨ φ`.
fn as_implication(a: &Assertion) -> Option<(&Expr, &Assertion)> {
    match a {
        Assertion::Or(l, r) => match &**l {
            Assertion::Expr(Expr::Un(UnOp::Not, e)) => Some((e, r)),
            _ => None,
        },
        _ => None,
    }
}

fn assertion_prec(a: &Assertion) -> u8 {
    if as_implication(a).is_some() {
        return 0;
    }
    match a {
        Assertion::Or(..) => 1,
        Assertion::And(..) => 2,
        // A bare expression with a top-level `&&`/`||` would be split by the parser.
        Assertion::Expr(Expr::Bin(BinOp::And | BinOp::Or, ..)) => 3,
        _ => 4,
    }
}

fn write_assertion(f: &mut Formatter<'_>, a: &Assertion, min: u8) -> fmt::Result {
    let p = assertion_prec(a);
    if p < min {
        write!(f, "(")?;
        write_assertion(f, a, 0)?;
        return write!(f, ")");
    }
    if let Some((e, rhs)) = as_implication(a) {
        write_expr(f, e, 1)?;
        write!(f, " => ")?;
        return write_assertion(f, rhs, 0);
    }
    match a {
        Assertion::Pot(t, i) => {
            write!(f, "{t} |= ")?;
            write_interval(f, i, 3)
        }
        Assertion::Expr(Expr::Val(1)) => write!(f, "true"),
        Assertion::Expr(Expr::Val(0)) => write!(f, "false"),
        Assertion::Expr(e) => write_expr(f, e, 0),
        Assertion::And(x, y) => {
            write_assertion(f, x, 2)?;
            write!(f, " && ")?;
            write_assertion(f, y, 3)
        }
        Assertion::Or(x, y) => {
            write_assertion(f, x, 1)?;
            write!(f, " || ")?;
            write_assertion(f, y, 2)
        }
    }
}

impl Display for Assertion {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_assertion(f, self, 0)
    }
}

impl Display for LitmusSpec {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if let Some(n) = &self.name {
            writeln!(f, "name {n}")?;
        }
        if !self.init.is_empty() {
            let parts: Vec<String> = self.init.iter().map(|(x, v)| format!("{x} = {v}")).collect();
            writeln!(f, "init: {}", parts.join("; "))?;
        }
        let undeclared: Vec<String> = self
            .classes
            .locs
            .iter()
            .filter(|x| !self.init.contains_key(x))
            .map(|x| x.to_string())
            .collect();
        if !undeclared.is_empty() {
            writeln!(f, "locations {}", undeclared.join(", "))?;
        }
        if !self.classes.regs.is_empty() {
            let rs: Vec<String> = self.classes.regs.iter().map(|r| r.to_string()).collect();
            writeln!(f, "registers {}", rs.join(", "))?;
        }
        for (t, c) in &self.pool {
            writeln!(f, "thread {t} {{ {c} }}")?;
        }
        for c in &self.clauses {
            let kw = match c.kind {
                ClauseKind::Allow => "allow",
                ClauseKind::Forbid => "forbid",
            };
            writeln!(f, "{kw}: {}", c.expr)?;
        }
        Ok(())
    }
}
