use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::ast::*;
use super::lexer::{lex, Tok};
use super::{ParseError, Pos};
use crate::name::{t0, Loc, Name, Reg, Tid, Val};

type PResult<T> = Result<T, ParseError>;

/// Raw formula: expressions and potential atoms before the assertion/expression split.
#[derive(Clone, Debug)]
enum F {
    Val(Val),
    Ident(Name),
    IsR(Name),
    Pot(Name, Interval),
    Un(UnOp, Box<F>),
    Bin(BinOp, Box<F>, Box<F>),
    Imp(Box<F>, Box<F>),
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
}

fn unexpected(t: &Tok, pos: Pos, what: &str) -> ParseError {
    ParseError::new(pos, format!("syntax error at {t}: expected {what}"))
}

impl Parser {
    fn new(src: &str) -> PResult<Parser> {
        Ok(Parser { toks: lex(src)?, i: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Kw(x) if *x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(unexpected(self.peek(), self.pos(), &format!("`{s}`")))
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.eat_kw(s) {
            Ok(())
        } else {
            Err(unexpected(self.peek(), self.pos(), &format!("`{s}`")))
        }
    }

    fn ident(&mut self) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(Name::new(&s))
            }
            t => Err(unexpected(&t, self.pos(), "an identifier")),
        }
    }

    fn int(&mut self) -> PResult<Val> {
        let neg = self.eat_sym("-");
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(if neg { -v } else { v })
            }
            t => Err(unexpected(&t, self.pos(), "an integer")),
        }
    }

    // ---- formulas -------------------------------------------------------

    fn formula(&mut self) -> PResult<F> {
        let lhs = self.disj()?;
        if self.eat_sym("=>") {
            let rhs = self.formula()?;
            return Ok(F::Imp(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disj(&mut self) -> PResult<F> {
        let mut acc = self.conj()?;
        while self.is_sym("||") && !matches!(self.peek_at(1), Tok::Kw("thread")) {
            self.bump();
            let rhs = self.conj()?;
            acc = F::Bin(BinOp::Or, Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn conj(&mut self) -> PResult<F> {
        let mut acc = self.unary()?;
        while self.eat_sym("&&") {
            let rhs = self.unary()?;
            acc = F::Bin(BinOp::And, Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn unary(&mut self) -> PResult<F> {
        if self.eat_sym("!") {
            let e = self.unary()?;
            return Ok(F::Un(UnOp::Not, Box::new(e)));
        }
        self.cmp()
    }

    fn cmp(&mut self) -> PResult<F> {
        let lhs = self.sum()?;
        let op = match self.peek() {
            Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.sum()?;
        Ok(F::Bin(op, Box::new(lhs), Box::new(rhs)))
    }

    fn sum(&mut self) -> PResult<F> {
        let mut acc = self.prod()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                _ => return Ok(acc),
            };
            self.bump();
            let rhs = self.prod()?;
            acc = F::Bin(op, Box::new(acc), Box::new(rhs));
        }
    }

    fn prod(&mut self) -> PResult<F> {
        let mut acc = self.neg()?;
        while self.eat_sym("*") {
            let rhs = self.neg()?;
            acc = F::Bin(BinOp::Mul, Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn neg(&mut self) -> PResult<F> {
        if self.is_sym("-") {
            if let Tok::Int(v) = self.peek_at(1).clone() {
                self.bump();
                self.bump();
                return Ok(F::Val(-v));
            }
            self.bump();
            let e = self.neg()?;
            return Ok(F::Un(UnOp::Neg, Box::new(e)));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<F> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(F::Val(v))
            }
            Tok::Kw("true") => {
                self.bump();
                Ok(F::Val(1))
            }
            Tok::Kw("false") => {
                self.bump();
                Ok(F::Val(0))
            }
            Tok::Sym("(") => {
                self.bump();
                let f = self.formula()?;
                self.expect_sym(")")?;
                Ok(f)
            }
            Tok::Ident(s) => {
                if s == "R" && self.peek_at(1) == &Tok::Sym("(") {
                    self.bump();
                    self.bump();
                    let x = self.ident()?;
                    self.expect_sym(")")?;
                    return Ok(F::IsR(x));
                }
                self.bump();
                let n = Name::new(&s);
                if self.eat_sym("|=") {
                    let i = self.chop()?;
                    return Ok(F::Pot(n, i));
                }
                Ok(F::Ident(n))
            }
            t => Err(unexpected(&t, pos, "an expression")),
        }
    }

    fn interval(&mut self) -> PResult<Interval> {
        let mut acc = self.interval_and()?;
        while self.eat_sym("||") {
            let rhs = self.interval_and()?;
            acc = Interval::or(acc, rhs);
        }
        Ok(acc)
    }

    fn interval_and(&mut self) -> PResult<Interval> {
        let mut acc = self.chop()?;
        while self.eat_sym("&&") {
            let rhs = self.chop()?;
            acc = Interval::and(acc, rhs);
        }
        Ok(acc)
    }

    fn chop(&mut self) -> PResult<Interval> {
        let mut acc = self.interval_prim()?;
        while self.eat_sym(";") {
            let rhs = self.interval_prim()?;
            acc = Interval::chop(acc, rhs);
        }
        Ok(acc)
    }

    fn interval_prim(&mut self) -> PResult<Interval> {
        let pos = self.pos();
        if self.eat_sym("[") {
            let f = self.formula()?;
            self.expect_sym("]")?;
            return Ok(Interval::Atom(to_expr(f, pos)?));
        }
        if self.eat_sym("(") {
            let i = self.interval()?;
            self.expect_sym(")")?;
            return Ok(i);
        }
        Err(unexpected(self.peek(), pos, "`[` or `(` starting an interval"))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        let f = self.formula()?;
        to_expr(f, pos)
    }

    fn assertion(&mut self) -> PResult<Assertion> {
        let pos = self.pos();
        let f = self.formula()?;
        to_assertion(f, pos)
    }

    // ---- statements -----------------------------------------------------

    fn prim(&mut self) -> PResult<Prim> {
        let pos = self.pos();
        if self.eat_kw("load") {
            let r = self.ident()?;
            self.expect_sym(":=")?;
            let x = self.ident()?;
            return Ok(Prim::Load(r, x));
        }
        if self.eat_kw("swap") {
            let x = self.ident()?;
            self.expect_sym(":=")?;
            let e = self.expr()?;
            return Ok(Prim::Swap(x, e));
        }
        if let Tok::Ident(_) = self.peek() {
            let lhs = self.ident()?;
            self.expect_sym(":=")?;
            let e = self.expr()?;
            // Provisional: resolved to a store if `lhs` turns out to be a location.
            return Ok(Prim::Assign(lhs, e));
        }
        Err(unexpected(self.peek(), pos, "a command"))
    }

    fn instr(&mut self) -> PResult<Instr> {
        if self.eat_sym("<|") {
            let prim = self.prim()?;
            let mut aux = Vec::new();
            while self.eat_sym(",") {
                let r = self.ident()?;
                self.expect_sym(":=")?;
                aux.push((r, self.expr()?));
            }
            self.expect_sym("|>")?;
            return Ok(Instr { prim, aux });
        }
        Ok(Instr::plain(self.prim()?))
    }

    fn at_block_end(&self) -> bool {
        matches!(self.peek(), Tok::Sym("}") | Tok::Sym(")") | Tok::Eof)
            || ["fi", "else", "od", "until"].iter().any(|k| self.is_kw(k))
    }

    fn items(&mut self) -> PResult<Block> {
        let mut out = Vec::new();
        while !self.at_block_end() {
            let pos = self.pos();
            if self.eat_sym("{") {
                let a = self.assertion()?;
                self.expect_sym("}")?;
                out.push(Item::Assert(a, pos));
            } else {
                let s = self.stmt()?;
                out.push(Item::Stmt(s, pos));
            }
            self.eat_sym(";");
        }
        Ok(out)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        if self.eat_kw("skip") {
            return Ok(Stmt::Skip);
        }
        if self.eat_kw("if") {
            let e = self.expr()?;
            self.expect_kw("then")?;
            let a = self.items()?;
            let b = if self.eat_kw("else") { self.items()? } else { Vec::new() };
            self.expect_kw("fi")?;
            return Ok(Stmt::If(e, a, b));
        }
        if self.eat_kw("while") {
            let e = self.expr()?;
            self.expect_kw("do")?;
            let b = self.items()?;
            self.expect_kw("od")?;
            return Ok(Stmt::While(e, b));
        }
        if self.eat_kw("do") {
            let b = self.items()?;
            self.expect_kw("until")?;
            let e = self.expr()?;
            return Ok(Stmt::DoUntil(b, e));
        }
        if self.eat_kw("thread") {
            let t1 = self.ident()?;
            let a = self.braced_items()?;
            self.expect_sym("||")?;
            self.expect_kw("thread")?;
            let t2 = self.ident()?;
            let b = self.braced_items()?;
            return Ok(Stmt::Par(t1, a, t2, b));
        }
        if self.eat_sym("(") {
            let b = self.items()?;
            self.expect_sym(")")?;
            return Ok(Stmt::Group(b));
        }
        if self.is_kw("cutoff") {
            return Err(ParseError::new(self.pos(), "`cutoff` is internal and cannot be written"));
        }
        Ok(Stmt::Instr(self.instr()?))
    }

    fn braced_items(&mut self) -> PResult<Block> {
        self.expect_sym("{")?;
        let b = self.items()?;
        self.expect_sym("}")?;
        Ok(b)
    }

    fn ident_list(&mut self) -> PResult<Vec<Name>> {
        let mut out = vec![self.ident()?];
        while self.eat_sym(",") || matches!(self.peek(), Tok::Ident(_)) {
            out.push(self.ident()?);
        }
        Ok(out)
    }
}

fn to_expr(f: F, pos: Pos) -> PResult<Expr> {
    Ok(match f {
        F::Val(v) => Expr::Val(v),
        F::Ident(n) => Expr::Reg(n),
        F::IsR(x) => Expr::IsR(x),
        F::Pot(t, _) => return Err(ParseError::new(pos, format!("potential assertion `{t} |= ...` not allowed inside an expression"))),
        F::Un(op, e) => Expr::Un(op, Box::new(to_expr(*e, pos)?)),
        F::Bin(op, a, b) => Expr::bin(op, to_expr(*a, pos)?, to_expr(*b, pos)?),
        F::Imp(..) => return Err(ParseError::new(pos, "`=>` is only allowed at assertion level")),
    })
}

fn to_assertion(f: F, pos: Pos) -> PResult<Assertion> {
    Ok(match f {
        F::Pot(t, i) => Assertion::Pot(t, i),
        F::Bin(BinOp::And, a, b) => Assertion::and(to_assertion(*a, pos)?, to_assertion(*b, pos)?),
        F::Bin(BinOp::Or, a, b) => Assertion::or(to_assertion(*a, pos)?, to_assertion(*b, pos)?),
        F::Imp(a, b) => Assertion::implies(to_expr(*a, pos)?, to_assertion(*b, pos)?),
        other => Assertion::Expr(to_expr(other, pos)?),
    })
}

// ---- documents ----------------------------------------------------------

#[derive(Default)]
struct Doc {
    name: Option<String>,
    init: BTreeMap<Loc, Val>,
    decl_locs: BTreeSet<Loc>,
    decl_regs: BTreeSet<Reg>,
    threads: Vec<(Tid, Block, Pos)>,
    clauses: Vec<(ClauseKind, Expr, Pos)>,
    outline: bool,
    parent: Option<Tid>,
    aux: BTreeSet<Reg>,
    pre: Option<(Assertion, Pos)>,
    post: Option<(Assertion, Pos)>,
    rely: Vec<(Tid, Vec<(Assertion, Pos)>)>,
    guarantee: Vec<(Tid, Block, Pos)>,
}

fn parse_doc(src: &str) -> PResult<Doc> {
    let mut p = Parser::new(src)?;
    let mut d = Doc::default();
    loop {
        let pos = p.pos();
        let tok = p.peek().clone();
        match tok {
            Tok::Eof => break,
            Tok::Kw("name") | Tok::Kw("outline") => {
                if tok == Tok::Kw("outline") {
                    d.outline = true;
                }
                p.bump();
                p.eat_sym(":");
                // Names may contain `-` and `+` between words and digits.
                let mut name = String::new();
                loop {
                    match p.peek().clone() {
                        Tok::Ident(s) => name.push_str(s.as_str()),
                        Tok::Int(v) => name.push_str(&v.to_string()),
                        Tok::Sym(s @ ("-" | "+")) if !name.is_empty() => name.push_str(s),
                        _ => break,
                    }
                    p.bump();
                }
                if !name.is_empty() {
                    d.name = Some(name);
                }
            }
            Tok::Kw("init") => {
                p.bump();
                p.eat_sym(":");
                while let (Tok::Ident(_), Tok::Sym("=")) = (p.peek().clone(), p.peek_at(1).clone()) {
                    let x = p.ident()?;
                    p.expect_sym("=")?;
                    let v = p.int()?;
                    if d.init.insert(x, v).is_some() {
                        return Err(ParseError::new(pos, format!("location `{x}` initialized twice")));
                    }
                    if !(p.eat_sym(";") || p.eat_sym(",")) {
                        break;
                    }
                }
            }
            Tok::Kw("locations") => {
                p.bump();
                p.eat_sym(":");
                d.decl_locs.extend(p.ident_list()?);
            }
            Tok::Kw("registers") => {
                p.bump();
                p.eat_sym(":");
                d.decl_regs.extend(p.ident_list()?);
            }
            Tok::Kw("aux") => {
                p.bump();
                p.eat_sym(":");
                d.aux.extend(p.ident_list()?);
                d.outline = true;
            }
            Tok::Kw("parent") => {
                p.bump();
                p.eat_sym(":");
                d.parent = Some(p.ident()?);
                d.outline = true;
            }
            Tok::Kw("thread") => {
                p.bump();
                let t = p.ident()?;
                if d.threads.iter().any(|(u, _, _)| *u == t) {
                    return Err(ParseError::new(pos, format!("duplicate thread id `{t}`")));
                }
                let b = p.braced_items()?;
                d.threads.push((t, b, pos));
            }
            Tok::Kw("allow") | Tok::Kw("forbid") => {
                p.bump();
                let kind = if tok == Tok::Kw("allow") { ClauseKind::Allow } else { ClauseKind::Forbid };
                p.eat_sym(":");
                let e = p.expr()?;
                d.clauses.push((kind, e, pos));
            }
            Tok::Kw("pre") | Tok::Kw("post") => {
                p.bump();
                p.eat_sym(":");
                p.expect_sym("{")?;
                let a = p.assertion()?;
                p.expect_sym("}")?;
                d.outline = true;
                if tok == Tok::Kw("pre") {
                    d.pre = Some((a, pos));
                } else {
                    d.post = Some((a, pos));
                }
            }
            Tok::Kw("rely") => {
                p.bump();
                let t = p.ident()?;
                let mut rs = Vec::new();
                p.expect_sym("{")?;
                while p.is_sym("{") {
                    let apos = p.pos();
                    p.bump();
                    rs.push((p.assertion()?, apos));
                    p.expect_sym("}")?;
                    p.eat_sym(";");
                }
                p.expect_sym("}")?;
                d.rely.push((t, rs));
                d.outline = true;
            }
            Tok::Kw("guarantee") => {
                p.bump();
                let t = p.ident()?;
                let b = p.braced_items()?;
                d.guarantee.push((t, b, pos));
                d.outline = true;
            }
            other => return Err(unexpected(&other, pos, "a top-level item")),
        }
    }
    Ok(d)
}

// ---- identifier classes ---------------------------------------------------

fn collect_block(b: &Block, locs: &mut BTreeSet<Loc>, regs: &mut BTreeSet<Reg>) {
    for item in b {
        match item {
            Item::Assert(a, _) => {
                a.visit_exprs(&mut |e| {
                    e.visit(&mut |l| {
                        if let Expr::IsR(x) = l {
                            locs.insert(*x);
                        }
                    })
                });
            }
            Item::Stmt(s, _) => collect_stmt(s, locs, regs),
        }
    }
}

fn collect_expr(e: &Expr, regs: &mut BTreeSet<Reg>) {
    e.regs(regs);
}

fn collect_stmt(s: &Stmt, locs: &mut BTreeSet<Loc>, regs: &mut BTreeSet<Reg>) {
    match s {
        Stmt::Skip => {}
        Stmt::Instr(i) => {
            match &i.prim {
                Prim::Load(r, x) => {
                    regs.insert(*r);
                    locs.insert(*x);
                }
                Prim::Swap(x, e) => {
                    locs.insert(*x);
                    collect_expr(e, regs);
                }
                Prim::Assign(_, e) | Prim::Store(_, e) => collect_expr(e, regs),
            }
            for (r, e) in &i.aux {
                regs.insert(*r);
                collect_expr(e, regs);
            }
        }
        Stmt::If(e, a, b) => {
            collect_expr(e, regs);
            collect_block(a, locs, regs);
            collect_block(b, locs, regs);
        }
        Stmt::While(e, b) | Stmt::DoUntil(b, e) => {
            collect_expr(e, regs);
            collect_block(b, locs, regs);
        }
        Stmt::Par(_, a, _, b) => {
            collect_block(a, locs, regs);
            collect_block(b, locs, regs);
        }
        Stmt::Group(b) => collect_block(b, locs, regs),
    }
}

struct Resolver<'a> {
    classes: &'a Classes,
}

impl Resolver<'_> {
    fn program_expr(&self, e: &Expr, pos: Pos) -> PResult<Expr> {
        let mut err = None;
        e.visit(&mut |l| match l {
            Expr::Reg(n) if self.classes.locs.contains(n) => {
                err.get_or_insert_with(|| ParseError::new(pos, format!("location `{n}` used in a register expression")));
            }
            Expr::IsR(x) => {
                err.get_or_insert_with(|| ParseError::new(pos, format!("flag atom R({x}) outside an interval")));
            }
            _ => {}
        });
        match err {
            Some(e) => Err(e),
            None => Ok(e.clone()),
        }
    }

    fn ext_expr(&self, e: &Expr, pos: Pos) -> PResult<Expr> {
        let mut err = None;
        fn go(e: &Expr, c: &Classes, pos: Pos, err: &mut Option<ParseError>) -> Expr {
            match e {
                Expr::Reg(n) if c.locs.contains(n) => Expr::Loc(*n),
                Expr::Reg(n) if !c.regs.contains(n) => {
                    err.get_or_insert_with(|| ParseError::new(pos, format!("unknown identifier class for `{n}`")));
                    e.clone()
                }
                Expr::IsR(x) if !c.locs.contains(x) => {
                    err.get_or_insert_with(|| ParseError::new(pos, format!("`{x}` in R({x}) is not a location")));
                    e.clone()
                }
                Expr::Un(op, a) => Expr::Un(*op, Box::new(go(a, c, pos, err))),
                Expr::Bin(op, a, b) => Expr::bin(*op, go(a, c, pos, err), go(b, c, pos, err)),
                other => other.clone(),
            }
        }
        let r = go(e, self.classes, pos, &mut err);
        match err {
            Some(e) => Err(e),
            None => Ok(r),
        }
    }

    fn assertion(&self, a: &Assertion, pos: Pos) -> PResult<Assertion> {
        Ok(match a {
            Assertion::Pot(t, i) => Assertion::Pot(*t, self.interval(i, pos)?),
            Assertion::Expr(e) => {
                let mut bad = None;
                e.visit(&mut |l| {
                    if let Expr::Reg(n) = l {
                        if self.classes.locs.contains(n) {
                            bad.get_or_insert(*n);
                        } else if !self.classes.regs.contains(n) {
                            bad.get_or_insert(*n);
                        }
                    }
                });
                if let Some(n) = bad {
                    let msg = if self.classes.locs.contains(&n) {
                        format!("location `{n}` outside an interval; write `t |= [{n} ...]`")
                    } else {
                        format!("unknown identifier class for `{n}`")
                    };
                    return Err(ParseError::new(pos, msg));
                }
                Assertion::Expr(self.program_expr(e, pos)?)
            }
            Assertion::And(x, y) => Assertion::and(self.assertion(x, pos)?, self.assertion(y, pos)?),
            Assertion::Or(x, y) => Assertion::or(self.assertion(x, pos)?, self.assertion(y, pos)?),
        })
    }

    fn interval(&self, i: &Interval, pos: Pos) -> PResult<Interval> {
        Ok(match i {
            Interval::Atom(e) => Interval::Atom(self.ext_expr(e, pos)?),
            Interval::Chop(a, b) => Interval::chop(self.interval(a, pos)?, self.interval(b, pos)?),
            Interval::And(a, b) => Interval::and(self.interval(a, pos)?, self.interval(b, pos)?),
            Interval::Or(a, b) => Interval::or(self.interval(a, pos)?, self.interval(b, pos)?),
        })
    }

    fn reg(&self, r: Reg, pos: Pos) -> PResult<Reg> {
        if self.classes.locs.contains(&r) {
            return Err(ParseError::new(pos, format!("`{r}` is a location but is used as a register")));
        }
        Ok(r)
    }

    fn loc(&self, x: Loc, pos: Pos) -> PResult<Loc> {
        if !self.classes.locs.contains(&x) {
            return Err(ParseError::new(pos, format!("`{x}` is a register but is used as a location")));
        }
        Ok(x)
    }

    fn instr(&self, i: &Instr, pos: Pos) -> PResult<Instr> {
        let prim = match &i.prim {
            Prim::Assign(lhs, e) => {
                let e = self.program_expr(e, pos)?;
                if self.classes.locs.contains(lhs) {
                    Prim::Store(*lhs, e)
                } else if self.classes.regs.contains(lhs) {
                    Prim::Assign(*lhs, e)
                } else {
                    return Err(ParseError::new(
                        pos,
                        format!("unknown identifier class for `{lhs}`: declare it with `locations` or `registers`"),
                    ));
                }
            }
            Prim::Store(x, e) => Prim::Store(self.loc(*x, pos)?, self.program_expr(e, pos)?),
            Prim::Load(r, x) => Prim::Load(self.reg(*r, pos)?, self.loc(*x, pos)?),
            Prim::Swap(x, e) => Prim::Swap(self.loc(*x, pos)?, self.program_expr(e, pos)?),
        };
        let mut aux = Vec::new();
        let mut seen = BTreeSet::new();
        for (r, e) in &i.aux {
            if !seen.insert(*r) {
                return Err(ParseError::new(pos, format!("auxiliary register `{r}` assigned twice")));
            }
            aux.push((self.reg(*r, pos)?, self.program_expr(e, pos)?));
        }
        Ok(Instr { prim, aux })
    }

    fn block(&self, b: &Block) -> PResult<Block> {
        b.iter()
            .map(|item| {
                Ok(match item {
                    Item::Assert(a, pos) => Item::Assert(self.assertion(a, *pos)?, *pos),
                    Item::Stmt(s, pos) => Item::Stmt(self.stmt(s, *pos)?, *pos),
                })
            })
            .collect()
    }

    fn stmt(&self, s: &Stmt, pos: Pos) -> PResult<Stmt> {
        Ok(match s {
            Stmt::Skip => Stmt::Skip,
            Stmt::Instr(i) => Stmt::Instr(self.instr(i, pos)?),
            Stmt::If(e, a, b) => Stmt::If(self.program_expr(e, pos)?, self.block(a)?, self.block(b)?),
            Stmt::While(e, b) => Stmt::While(self.program_expr(e, pos)?, self.block(b)?),
            Stmt::DoUntil(b, e) => Stmt::DoUntil(self.block(b)?, self.program_expr(e, pos)?),
            Stmt::Par(t1, a, t2, b) => Stmt::Par(*t1, self.block(a)?, *t2, self.block(b)?),
            Stmt::Group(b) => Stmt::Group(self.block(b)?),
        })
    }
}

fn classes_of(d: &Doc) -> PResult<Classes> {
    let mut locs: BTreeSet<Loc> = d.init.keys().copied().collect();
    locs.extend(d.decl_locs.iter().copied());
    let mut regs: BTreeSet<Reg> = d.decl_regs.clone();
    regs.extend(d.aux.iter().copied());
    for (_, b, _) in &d.threads {
        collect_block(b, &mut locs, &mut regs);
    }
    for (_, b, _) in &d.guarantee {
        collect_block(b, &mut locs, &mut regs);
    }
    for (_, e, _) in &d.clauses {
        e.regs(&mut regs);
    }
    if let Some(n) = locs.intersection(&regs).next() {
        let pos = d.threads.first().map(|t| t.2).unwrap_or_default();
        return Err(ParseError::new(pos, format!("`{n}` is used both as a location and as a register")));
    }
    Ok(Classes { locs, regs })
}

fn block_has_asserts(b: &Block) -> Option<Pos> {
    for item in b {
        match item {
            Item::Assert(_, p) => return Some(*p),
            Item::Stmt(Stmt::If(_, a, c) | Stmt::Par(_, a, _, c), _) => {
                if let Some(p) = block_has_asserts(a).or_else(|| block_has_asserts(c)) {
                    return Some(p);
                }
            }
            Item::Stmt(Stmt::While(_, b) | Stmt::DoUntil(b, _) | Stmt::Group(b), _) => {
                if let Some(p) = block_has_asserts(b) {
                    return Some(p);
                }
            }
            _ => {}
        }
    }
    None
}

/// Parse a litmus file (or a bare list of thread blocks).
pub fn parse_program(src: &str) -> PResult<LitmusSpec> {
    let d = parse_doc(src)?;
    if d.outline {
        return Err(ParseError::new(Pos { line: 1, col: 1 }, "proof-outline items in a program file; use the outline parser"));
    }
    if d.threads.is_empty() {
        return Err(ParseError::new(Pos { line: 1, col: 1 }, "program has no threads"));
    }
    let classes = classes_of(&d)?;
    let res = Resolver { classes: &classes };
    let mut pool = BTreeMap::new();
    for (t, b, _) in &d.threads {
        if let Some(p) = block_has_asserts(b) {
            return Err(ParseError::new(p, "assertions are only allowed in proof outlines"));
        }
        pool.insert(*t, Arc::new(block_cmd(&res.block(b)?)));
    }
    let mut clauses = Vec::new();
    for (kind, e, pos) in &d.clauses {
        clauses.push(Clause { kind: *kind, expr: res.program_expr(e, *pos)? });
    }
    let spec = LitmusSpec { name: d.name, pool, init: d.init, clauses, classes };
    if let Err(msg) = super::well_formed_pool(&spec.pool) {
        return Err(ParseError::new(d.threads[0].2, msg));
    }
    Ok(spec)
}

/// Parse a proof outline.
pub fn parse_outline(src: &str) -> PResult<Outline> {
    let d = parse_doc(src)?;
    let first = Pos { line: 1, col: 1 };
    if d.threads.is_empty() {
        return Err(ParseError::new(first, "outline has no threads"));
    }
    if !d.clauses.is_empty() {
        return Err(ParseError::new(d.clauses[0].2, "allow/forbid clauses belong in litmus files"));
    }
    let classes = classes_of(&d)?;
    let res = Resolver { classes: &classes };
    let parent = d.parent.unwrap_or_else(t0);
    let (pre, pre_pos) = d.pre.clone().unwrap_or((Assertion::tt(), first));
    let (post, post_pos) = d.post.clone().unwrap_or((Assertion::tt(), first));
    let mut threads = Vec::new();
    for (t, b, _) in &d.threads {
        threads.push((*t, res.block(b)?));
    }
    let mut rely = BTreeMap::new();
    for (t, rs) in &d.rely {
        let v = rs.iter().map(|(a, p)| res.assertion(a, *p)).collect::<PResult<Vec<_>>>()?;
        rely.insert(*t, v);
    }
    let mut guarantee = BTreeMap::new();
    for (t, b, pos) in &d.guarantee {
        let b = res.block(b)?;
        let mut gs = Vec::new();
        let mut guard: Option<Assertion> = None;
        for item in &b {
            match item {
                Item::Assert(a, _) => guard = Some(a.clone()),
                Item::Stmt(Stmt::Instr(i), p) => {
                    let g = guard.take().ok_or_else(|| ParseError::new(*p, "guarantee entry without a guard"))?;
                    gs.push((g, i.clone()));
                }
                Item::Stmt(_, p) => return Err(ParseError::new(*p, "guarantee entries are `{guard} instruction`")),
            }
        }
        if gs.is_empty() {
            return Err(ParseError::new(*pos, "empty guarantee"));
        }
        guarantee.insert(*t, gs);
    }
    let o = Outline {
        name: d.name.clone(),
        parent,
        aux: d.aux.clone(),
        pre: res.assertion(&pre, pre_pos)?,
        post: res.assertion(&post, post_pos)?,
        threads,
        rely,
        guarantee,
        init: d.init.clone(),
        classes,
    };
    if let Err(msg) = super::well_formed_pool(&o.pool()) {
        return Err(ParseError::new(d.threads[0].2, msg));
    }
    if o.threads.iter().any(|(t, _)| *t == parent) {
        return Err(ParseError::new(d.threads[0].2, format!("parent `{parent}` is also an annotated thread")));
    }
    Ok(o)
}

/// Parse a command given the identifier classes (used for round-trip tests and the CLI).
pub fn parse_cmd_in(src: &str, classes: &Classes) -> PResult<Cmd> {
    let mut p = Parser::new(src)?;
    let b = p.items()?;
    if p.peek() != &Tok::Eof {
        return Err(unexpected(p.peek(), p.pos(), "end of input"));
    }
    let res = Resolver { classes };
    Ok(block_cmd(&res.block(&b)?))
}

/// Parse an assertion given the identifier classes.
pub fn parse_assertion_in(src: &str, classes: &Classes) -> PResult<Assertion> {
    let mut p = Parser::new(src)?;
    let pos = p.pos();
    let a = p.assertion()?;
    if p.peek() != &Tok::Eof {
        return Err(unexpected(p.peek(), p.pos(), "end of input"));
    }
    Resolver { classes }.assertion(&a, pos)
}
