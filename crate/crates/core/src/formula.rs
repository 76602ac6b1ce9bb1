//! Formula ASTs for MILL1 and the Displacement calculus, their concrete
//! syntax, and the sort function.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::syntax::{Cursor, Dir, SyntaxError, Tok};
use crate::term::{display_var_name, Substitution, Term, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }

    pub fn sign(self) -> char {
        match self {
            Polarity::Positive => '+',
            Polarity::Negative => '-',
        }
    }
}

/// A MILL1 formula. Binders carry their own variable, and every binder in a
/// formula uses a distinct id.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum MillFormula {
    Atom(Arc<str>, Vec<Term>),
    Tensor(Box<MillFormula>, Box<MillFormula>),
    Lolli(Box<MillFormula>, Box<MillFormula>),
    Forall(Var, Box<MillFormula>),
    Exists(Var, Box<MillFormula>),
}

impl MillFormula {
    pub fn atom(pred: &str, args: Vec<Term>) -> MillFormula {
        MillFormula::Atom(Arc::from(pred), args)
    }

    pub fn tensor(a: MillFormula, b: MillFormula) -> MillFormula {
        MillFormula::Tensor(Box::new(a), Box::new(b))
    }

    pub fn lolli(a: MillFormula, b: MillFormula) -> MillFormula {
        MillFormula::Lolli(Box::new(a), Box::new(b))
    }

    pub fn forall(v: Var, body: MillFormula) -> MillFormula {
        MillFormula::Forall(v, Box::new(body))
    }

    pub fn exists(v: Var, body: MillFormula) -> MillFormula {
        MillFormula::Exists(v, Box::new(body))
    }

    /// `∀v1 … vn. body`, with `v1` outermost.
    pub fn forall_all(vars: impl IntoIterator<Item = Var, IntoIter: DoubleEndedIterator>, body: MillFormula) -> MillFormula {
        vars.into_iter().rev().fold(body, |acc, v| MillFormula::forall(v, acc))
    }

    pub fn exists_all(vars: impl IntoIterator<Item = Var, IntoIter: DoubleEndedIterator>, body: MillFormula) -> MillFormula {
        vars.into_iter().rev().fold(body, |acc, v| MillFormula::exists(v, acc))
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, MillFormula::Atom(..))
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        fn go(f: &MillFormula, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
            match f {
                MillFormula::Atom(_, args) => {
                    for a in args {
                        for v in a.vars() {
                            if !bound.contains(&v) {
                                out.insert(v);
                            }
                        }
                    }
                }
                MillFormula::Tensor(a, b) | MillFormula::Lolli(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                MillFormula::Forall(v, b) | MillFormula::Exists(v, b) => {
                    bound.push(v.clone());
                    go(b, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// All binder variables in document order.
    pub fn binders(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let MillFormula::Forall(v, _) | MillFormula::Exists(v, _) = f {
                out.push(v.clone());
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit(&self, k: &mut dyn FnMut(&MillFormula)) {
        k(self);
        match self {
            MillFormula::Atom(..) => {}
            MillFormula::Tensor(a, b) | MillFormula::Lolli(a, b) => {
                a.visit(k);
                b.visit(k);
            }
            MillFormula::Forall(_, b) | MillFormula::Exists(_, b) => b.visit(k),
        }
    }

    /// Atoms in document order.
    pub fn atoms(&self) -> Vec<(Arc<str>, Vec<Term>)> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let MillFormula::Atom(p, args) = f {
                out.push((p.clone(), args.clone()));
            }
        });
        out
    }

    /// Applies a substitution to the atom arguments. Bound variables are
    /// never in the domain of the substitutions we build, so no capture
    /// handling is needed.
    pub fn apply(&self, s: &Substitution) -> MillFormula {
        if s.is_empty() {
            return self.clone();
        }
        self.map_terms(&|t| s.apply(t))
    }

    pub fn replace_var(&self, v: &Var, t: &Term) -> MillFormula {
        self.map_terms(&|u| u.replace_var(v, t))
    }

    pub fn map_terms(&self, g: &dyn Fn(&Term) -> Term) -> MillFormula {
        match self {
            MillFormula::Atom(p, args) => MillFormula::Atom(p.clone(), args.iter().map(g).collect()),
            MillFormula::Tensor(a, b) => MillFormula::tensor(a.map_terms(g), b.map_terms(g)),
            MillFormula::Lolli(a, b) => MillFormula::lolli(a.map_terms(g), b.map_terms(g)),
            MillFormula::Forall(v, b) => MillFormula::forall(v.clone(), b.map_terms(g)),
            MillFormula::Exists(v, b) => MillFormula::exists(v.clone(), b.map_terms(g)),
        }
    }

    /// Renames every binder to a fresh variable, so that several copies of
    /// one formula can coexist in a sequent.
    pub fn refresh_binders(&self) -> MillFormula {
        match self {
            MillFormula::Atom(..) => self.clone(),
            MillFormula::Tensor(a, b) => MillFormula::tensor(a.refresh_binders(), b.refresh_binders()),
            MillFormula::Lolli(a, b) => MillFormula::lolli(a.refresh_binders(), b.refresh_binders()),
            MillFormula::Forall(v, b) | MillFormula::Exists(v, b) => {
                let w = Var::fresh(v.hint());
                let body = b.replace_var(v, &Term::Var(w.clone())).refresh_binders();
                match self {
                    MillFormula::Forall(..) => MillFormula::forall(w, body),
                    _ => MillFormula::exists(w, body),
                }
            }
        }
    }

    /// Drops quantifiers whose variable does not occur in their body.
    pub fn remove_vacuous(&self) -> MillFormula {
        match self {
            MillFormula::Atom(..) => self.clone(),
            MillFormula::Tensor(a, b) => MillFormula::tensor(a.remove_vacuous(), b.remove_vacuous()),
            MillFormula::Lolli(a, b) => MillFormula::lolli(a.remove_vacuous(), b.remove_vacuous()),
            MillFormula::Forall(v, b) | MillFormula::Exists(v, b) => {
                let body = b.remove_vacuous();
                if !body.free_vars().contains(v) {
                    body
                } else if matches!(self, MillFormula::Forall(..)) {
                    MillFormula::forall(v.clone(), body)
                } else {
                    MillFormula::exists(v.clone(), body)
                }
            }
        }
    }

    pub fn literal_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |f| {
            if f.is_atom() {
                n += 1
            }
        });
        n
    }

    /// Alpha-equivalence: bound variables up to consistent renaming, free
    /// variables by identity.
    pub fn alpha_eq(&self, other: &MillFormula) -> bool {
        aeq(self, other, &mut Vec::new(), &mut None)
    }

    /// Equality up to a consistent renaming of all variables, free ones
    /// included. Used to compare a formula with its reparsed printout.
    pub fn variant_eq(&self, other: &MillFormula) -> bool {
        aeq(self, other, &mut Vec::new(), &mut Some(Bijection::default()))
    }

    pub fn unicode(&self) -> String {
        let mut namer = Namer::default();
        self.render(&mut namer, true)
    }

    pub fn render(&self, namer: &mut Namer, unicode: bool) -> String {
        let mut out = String::new();
        render_mill(self, namer, unicode, 0, true, &mut out);
        out
    }
}

#[derive(Default)]
struct Bijection {
    fwd: HashMap<Var, Var>,
    bwd: HashMap<Var, Var>,
}

fn var_eq(x: &Var, y: &Var, bound: &[(Var, Var)], free: &mut Option<Bijection>) -> bool {
    for (a, b) in bound.iter().rev() {
        if a == x || b == y {
            return a == x && b == y;
        }
    }
    match free {
        None => x == y,
        Some(bij) => match (bij.fwd.get(x), bij.bwd.get(y)) {
            (Some(y2), Some(x2)) => y2 == y && x2 == x,
            (None, None) => {
                bij.fwd.insert(x.clone(), y.clone());
                bij.bwd.insert(y.clone(), x.clone());
                true
            }
            _ => false,
        },
    }
}

fn term_eq(s: &Term, t: &Term, bound: &[(Var, Var)], free: &mut Option<Bijection>) -> bool {
    match (s, t) {
        (Term::Var(x), Term::Var(y)) => var_eq(x, y, bound, free),
        (Term::Const(a), Term::Const(b)) => a == b,
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| term_eq(x, y, bound, free))
        }
        _ => false,
    }
}

fn aeq(a: &MillFormula, b: &MillFormula, bound: &mut Vec<(Var, Var)>, free: &mut Option<Bijection>) -> bool {
    use MillFormula::*;
    match (a, b) {
        (Atom(p, xs), Atom(q, ys)) => {
            p == q && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| term_eq(x, y, bound, free))
        }
        (Tensor(a1, a2), Tensor(b1, b2)) | (Lolli(a1, a2), Lolli(b1, b2)) => {
            aeq(a1, b1, bound, free) && aeq(a2, b2, bound, free)
        }
        (Forall(v, x), Forall(w, y)) | (Exists(v, x), Exists(w, y)) => {
            bound.push((v.clone(), w.clone()));
            let r = aeq(x, y, bound, free);
            bound.pop();
            r
        }
        _ => false,
    }
}

/// Assigns distinct printable names to variables. One namer can be shared by
/// all formulas of a sequent so that names agree across them.
#[derive(Default)]
pub struct Namer {
    names: HashMap<u64, String>,
    used: HashSet<String>,
}

impl Namer {
    pub fn name(&mut self, v: &Var) -> String {
        if let Some(n) = self.names.get(&v.id()) {
            return n.clone();
        }
        let base = if v.is_rigid() {
            let h = v.hint();
            if h.is_empty() {
                "e".to_string()
            } else {
                h.to_lowercase()
            }
        } else {
            display_var_name(v.hint())
        };
        let mut name = base.clone();
        let mut k = 1;
        while self.used.contains(&name) {
            name = format!("{}_{}", base, k);
            k += 1;
        }
        self.used.insert(name.clone());
        self.names.insert(v.id(), name.clone());
        name
    }

    /// Like `name`, but a lowercase hint is kept bare: the binder already
    /// marks it as a variable.
    pub fn bound_name(&mut self, v: &Var) -> String {
        let h = v.hint();
        let bare = !v.is_rigid()
            && h.starts_with(|c: char| c.is_ascii_lowercase())
            && h.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !bare || self.names.contains_key(&v.id()) || self.used.contains(h) {
            return self.name(v);
        }
        self.used.insert(h.to_string());
        self.names.insert(v.id(), h.to_string());
        h.to_string()
    }

    pub fn term(&mut self, t: &Term) -> String {
        struct Show<'a>(&'a Term, &'a HashMap<u64, String>);
        impl fmt::Display for Show<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt_with(f, &|v| self.1[&v.id()].clone())
            }
        }
        for v in t.vars() {
            self.name(&v);
        }
        Show(t, &self.names).to_string()
    }
}

fn render_atom(p: &str, args: &[Term], namer: &mut Namer, out: &mut String) {
    out.push_str(p);
    if !args.is_empty() {
        out.push('(');
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let s = namer.term(a);
            out.push_str(&s);
        }
        out.push(')');
    }
}

// prec: 0 anything, 1 needs lolli-or-tighter, 2 needs tensor-or-tighter, 3 atomic.
// tail: nothing follows this subformula inside the enclosing group.
fn render_mill(f: &MillFormula, namer: &mut Namer, uni: bool, prec: u8, tail: bool, out: &mut String) {
    match f {
        MillFormula::Atom(p, args) => render_atom(p, args, namer, out),
        MillFormula::Lolli(a, b) => {
            let paren = prec > 1;
            if paren {
                out.push('[');
            }
            render_mill(a, namer, uni, 2, false, out);
            out.push_str(if uni { " ⊸ " } else { " -o " });
            render_mill(b, namer, uni, 1, paren || tail, out);
            if paren {
                out.push(']');
            }
        }
        MillFormula::Tensor(a, b) => {
            let paren = prec > 2;
            if paren {
                out.push('[');
            }
            render_mill(a, namer, uni, 2, false, out);
            out.push_str(if uni { " ⊗ " } else { " * " });
            render_mill(b, namer, uni, 3, paren || tail, out);
            if paren {
                out.push(']');
            }
        }
        MillFormula::Forall(..) | MillFormula::Exists(..) => {
            let paren = !tail;
            if paren {
                out.push('[');
            }
            let is_forall = matches!(f, MillFormula::Forall(..));
            out.push_str(match (is_forall, uni) {
                (true, true) => "∀",
                (true, false) => "forall ",
                (false, true) => "∃",
                (false, false) => "exists ",
            });
            let mut cur = f;
            let mut first = true;
            loop {
                match (cur, is_forall) {
                    (MillFormula::Forall(v, b), true) | (MillFormula::Exists(v, b), false) => {
                        if !first {
                            out.push(' ');
                        }
                        first = false;
                        let n = namer.bound_name(v);
                        out.push_str(&n);
                        cur = b;
                    }
                    _ => break,
                }
            }
            out.push_str(". ");
            render_mill(cur, namer, uni, 0, true, out);
            if paren {
                out.push(']');
            }
        }
    }
}

impl fmt::Display for MillFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&mut Namer::default(), false))
    }
}

impl fmt::Debug for MillFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// `Γ ⊢ C`
#[derive(Clone, Debug)]
pub struct Sequent {
    pub antecedent: Vec<MillFormula>,
    pub succedent: MillFormula,
}

impl Sequent {
    pub fn new(antecedent: Vec<MillFormula>, succedent: MillFormula) -> Sequent {
        Sequent {
            antecedent,
            succedent,
        }
    }

    pub fn render(&self, unicode: bool) -> String {
        let mut namer = Namer::default();
        let ants: Vec<String> = self.antecedent.iter().map(|a| a.render(&mut namer, unicode)).collect();
        let c = self.succedent.render(&mut namer, unicode);
        format!("{}{}{} {}", ants.join(", "), if ants.is_empty() { "" } else { " " }, if unicode { "⊢" } else { "|-" }, c)
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
}

// ---------------------------------------------------------------------------
// MILL1 / term parsing

/// Variable scopes for one parse: binders in scope plus free variables,
/// which are shared across all formulas parsed with the same context.
#[derive(Default)]
pub struct ParseCtx {
    bound: Vec<(String, Var)>,
    free: Vec<(String, Var)>,
}

impl ParseCtx {
    /// The free variables encountered so far, in order of first occurrence.
    pub fn free_vars(&self) -> &[(String, Var)] {
        &self.free
    }

    fn lookup(&mut self, name: &str, force_var: bool) -> Option<Var> {
        if let Some((_, v)) = self.bound.iter().rev().find(|(n, _)| n == name) {
            return Some(v.clone());
        }
        let is_var = force_var || name.chars().next().is_some_and(char::is_uppercase);
        if !is_var {
            return None;
        }
        if let Some((_, v)) = self.free.iter().find(|(n, _)| n == name) {
            return Some(v.clone());
        }
        let v = Var::fresh(name.trim_start_matches('?'));
        self.free.push((name.to_string(), v.clone()));
        Some(v)
    }
}

fn parse_term_in(cur: &mut Cursor, ctx: &mut ParseCtx) -> Result<Term, SyntaxError> {
    match cur.next() {
        Tok::Int(n) => Ok(Term::int(n)),
        Tok::QVar(name) => Ok(Term::Var(ctx.lookup(&format!("?{}", name), true).expect("forced"))),
        Tok::Ident(name) => {
            if *cur.peek() == Tok::LParen {
                cur.next();
                let args = parse_term_list(cur, ctx)?;
                return Ok(Term::app(&name, args));
            }
            Ok(match ctx.lookup(&name, false) {
                Some(v) => Term::Var(v),
                None => Term::constant(&name),
            })
        }
        t => Err(cur.error(format!("expected a term, found {}", t))),
    }
}

/// Parses `t1, ..., tn )` after an opening parenthesis.
fn parse_term_list(cur: &mut Cursor, ctx: &mut ParseCtx) -> Result<Vec<Term>, SyntaxError> {
    let mut args = vec![parse_term_in(cur, ctx)?];
    while cur.eat(&Tok::Comma) {
        args.push(parse_term_in(cur, ctx)?);
    }
    cur.expect(&Tok::RParen)?;
    Ok(args)
}

fn parse_quant(cur: &mut Cursor, ctx: &mut ParseCtx) -> Result<MillFormula, SyntaxError> {
    let is_forall = cur.next() == Tok::Forall;
    let mut vars = Vec::new();
    loop {
        match cur.peek().clone() {
            Tok::Ident(n) => {
                cur.next();
                vars.push((n.clone(), Var::fresh(&n)));
            }
            Tok::QVar(n) => {
                cur.next();
                vars.push((format!("?{}", n), Var::fresh(&n)));
            }
            _ => break,
        }
    }
    if vars.is_empty() {
        return Err(cur.error("expected a bound variable"));
    }
    if !cur.eat(&Tok::Dot) && !matches!(cur.peek(), Tok::LBrack | Tok::LParen) {
        return Err(cur.error(format!("expected '.' after quantifier prefix, found {}", cur.peek())));
    }
    let depth = ctx.bound.len();
    ctx.bound.extend(vars.iter().cloned());
    let body = parse_mill_in(cur, ctx);
    ctx.bound.truncate(depth);
    let vs = vars.into_iter().map(|(_, v)| v).collect::<Vec<_>>();
    Ok(if is_forall {
        MillFormula::forall_all(vs, body?)
    } else {
        MillFormula::exists_all(vs, body?)
    })
}

fn parse_mill_in(cur: &mut Cursor, ctx: &mut ParseCtx) -> Result<MillFormula, SyntaxError> {
    if matches!(cur.peek(), Tok::Forall | Tok::Exists) {
        return parse_quant(cur, ctx);
    }
    let lhs = parse_tensor(cur, ctx)?;
    if cur.eat(&Tok::Lolli) {
        let rhs = parse_mill_in(cur, ctx)?;
        return Ok(MillFormula::lolli(lhs, rhs));
    }
    Ok(lhs)
}

fn parse_tensor(cur: &mut Cursor, ctx: &mut ParseCtx) -> Result<MillFormula, SyntaxError> {
    let mut lhs = parse_unary(cur, ctx)?;
    while cur.eat(&Tok::Star) {
        let rhs = parse_unary(cur, ctx)?;
        lhs = MillFormula::tensor(lhs, rhs);
    }
    Ok(lhs)
}

fn parse_unary(cur: &mut Cursor, ctx: &mut ParseCtx) -> Result<MillFormula, SyntaxError> {
    match cur.peek().clone() {
        Tok::Forall | Tok::Exists => parse_quant(cur, ctx),
        Tok::LParen | Tok::LBrack => {
            let close = if cur.next() == Tok::LParen { Tok::RParen } else { Tok::RBrack };
            let f = parse_mill_in(cur, ctx)?;
            cur.expect(&close)?;
            Ok(f)
        }
        Tok::Ident(p) => {
            cur.next();
            let args = if cur.eat(&Tok::LParen) { parse_term_list(cur, ctx)? } else { Vec::new() };
            Ok(MillFormula::atom(&p, args))
        }
        t => Err(cur.error(format!("expected a formula, found {}", t))),
    }
}

pub fn parse_mill(text: &str) -> Result<MillFormula, SyntaxError> {
    parse_mill_with(text, &mut ParseCtx::default())
}

/// Parses a formula, sharing free variables through `ctx`.
pub fn parse_mill_with(text: &str, ctx: &mut ParseCtx) -> Result<MillFormula, SyntaxError> {
    let mut cur = Cursor::new(text)?;
    let f = parse_mill_in(&mut cur, ctx)?;
    cur.expect_eof()?;
    Ok(f)
}

pub fn parse_term(text: &str) -> Result<Term, SyntaxError> {
    let mut cur = Cursor::new(text)?;
    let t = parse_term_in(&mut cur, &mut ParseCtx::default())?;
    cur.expect_eof()?;
    Ok(t)
}

/// Parses `A1, ..., An |- C`. Free variables are shared across the sequent.
pub fn parse_sequent(text: &str) -> Result<Sequent, SyntaxError> {
    let mut cur = Cursor::new(text)?;
    let mut ctx = ParseCtx::default();
    let mut antecedent = Vec::new();
    if !cur.eat(&Tok::Turnstile) {
        loop {
            antecedent.push(parse_mill_in(&mut cur, &mut ctx)?);
            if cur.eat(&Tok::Turnstile) {
                break;
            }
            if !cur.eat(&Tok::Comma) {
                return Err(cur.error(format!("expected ',' or '|-', found {}", cur.peek())));
            }
        }
    }
    let succedent = parse_mill_in(&mut cur, &mut ctx)?;
    cur.expect_eof()?;
    Ok(Sequent::new(antecedent, succedent))
}

// ---------------------------------------------------------------------------
// Displacement calculus

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DOp {
    /// `A • B`
    Bullet,
    /// `A \ C`
    Under,
    /// `C / B`
    Over,
    /// `A ⊙> B`
    OdotGt,
    /// `C ↑> B`
    UpGt,
    /// `A ↓> C`
    DownGt,
    /// `A ⊙< B`
    OdotLt,
    /// `C ↑< B`
    UpLt,
    /// `A ↓< C`
    DownLt,
}

impl DOp {
    pub fn ascii(self) -> &'static str {
        match self {
            DOp::Bullet => "*",
            DOp::Under => "\\",
            DOp::Over => "/",
            DOp::OdotGt => "o>",
            DOp::UpGt => "^>",
            DOp::DownGt => "!>",
            DOp::OdotLt => "o<",
            DOp::UpLt => "^<",
            DOp::DownLt => "!<",
        }
    }

    pub fn unicode(self) -> &'static str {
        match self {
            DOp::Bullet => "•",
            DOp::Under => "\\",
            DOp::Over => "/",
            DOp::OdotGt => "⊙>",
            DOp::UpGt => "↑>",
            DOp::DownGt => "↓>",
            DOp::OdotLt => "⊙<",
            DOp::UpLt => "↑<",
            DOp::DownLt => "↓<",
        }
    }

    pub fn is_wrap_family(self) -> bool {
        !matches!(self, DOp::Bullet | DOp::Under | DOp::Over)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SynOp {
    /// `ˇA`, split
    Check,
    /// `ˆA`, bridge
    Hat,
    /// `⊳⁻¹A`
    RProj,
    /// `⊳A`
    RInj,
    /// `⊲⁻¹A`
    LProj,
    /// `⊲A`
    LInj,
}

impl SynOp {
    pub fn name(self) -> &'static str {
        match self {
            SynOp::Check => "check",
            SynOp::Hat => "hat",
            SynOp::RProj => "rproj",
            SynOp::RInj => "rinj",
            SynOp::LProj => "lproj",
            SynOp::LInj => "linj",
        }
    }

    fn from_name(s: &str) -> Option<SynOp> {
        Some(match s {
            "check" => SynOp::Check,
            "hat" => SynOp::Hat,
            "rproj" => SynOp::RProj,
            "rinj" => SynOp::RInj,
            "lproj" => SynOp::LProj,
            "linj" => SynOp::LInj,
            _ => return None,
        })
    }
}

/// A Displacement-calculus formula. Atoms may carry feature arguments, which
/// are appended after the position arguments on translation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum DFormula {
    Atom(Arc<str>, Vec<Term>),
    Bin(DOp, Box<DFormula>, Box<DFormula>),
    Syn(SynOp, Box<DFormula>),
    UnitI,
    UnitJ,
}

impl DFormula {
    pub fn atom(name: &str) -> DFormula {
        DFormula::Atom(Arc::from(name), Vec::new())
    }

    pub fn bin(op: DOp, a: DFormula, b: DFormula) -> DFormula {
        DFormula::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn syn(op: SynOp, a: DFormula) -> DFormula {
        DFormula::Syn(op, Box::new(a))
    }

    /// Pre-order traversal.
    pub fn visit(&self, k: &mut dyn FnMut(&DFormula)) {
        k(self);
        match self {
            DFormula::Bin(_, a, b) => {
                a.visit(k);
                b.visit(k);
            }
            DFormula::Syn(_, a) => a.visit(k),
            _ => {}
        }
    }

    pub fn atom_names(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let DFormula::Atom(n, _) = f {
                out.insert(n.clone());
            }
        });
        out
    }

    pub fn unicode(&self) -> String {
        let mut s = String::new();
        render_d(self, true, &mut s);
        s
    }
}

fn render_d(f: &DFormula, uni: bool, out: &mut String) {
    match f {
        DFormula::Atom(n, feats) => {
            let mut namer = Namer::default();
            render_atom(n, feats, &mut namer, out);
        }
        DFormula::UnitI => out.push('I'),
        DFormula::UnitJ => out.push('J'),
        DFormula::Syn(op, a) => {
            out.push_str(op.name());
            out.push('(');
            render_d(a, uni, out);
            out.push(')');
        }
        DFormula::Bin(op, a, b) => {
            for (i, child) in [a, b].into_iter().enumerate() {
                if i == 1 {
                    out.push(' ');
                    out.push_str(if uni { op.unicode() } else { op.ascii() });
                    out.push(' ');
                }
                let wrap = matches!(**child, DFormula::Bin(..));
                if wrap {
                    out.push('(');
                }
                render_d(child, uni, out);
                if wrap {
                    out.push(')');
                }
            }
        }
    }
}

impl fmt::Display for DFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        render_d(self, false, &mut s);
        f.write_str(&s)
    }
}

impl fmt::Debug for DFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

fn product_op(t: &Tok) -> Option<DOp> {
    match t {
        Tok::Star => Some(DOp::Bullet),
        Tok::Wrap(Dir::Lt) => Some(DOp::OdotLt),
        Tok::Wrap(_) => Some(DOp::OdotGt),
        _ => None,
    }
}

fn under_op(t: &Tok) -> Option<DOp> {
    match t {
        Tok::Backslash => Some(DOp::Under),
        Tok::Down(Dir::Lt) => Some(DOp::DownLt),
        Tok::Down(_) => Some(DOp::DownGt),
        _ => None,
    }
}

fn over_op(t: &Tok) -> Option<DOp> {
    match t {
        Tok::Slash => Some(DOp::Over),
        Tok::Up(Dir::Lt) => Some(DOp::UpLt),
        Tok::Up(_) => Some(DOp::UpGt),
        _ => None,
    }
}

fn parse_d_product(cur: &mut Cursor, ctx: &mut ParseCtx) -> Result<DFormula, SyntaxError> {
    let mut lhs = parse_d_under(cur, ctx)?;
    while let Some(op) = product_op(cur.peek()) {
        cur.next();
        let rhs = parse_d_under(cur, ctx)?;
        lhs = DFormula::bin(op, lhs, rhs);
    }
    Ok(lhs)
}

fn parse_d_under(cur: &mut Cursor, ctx: &mut ParseCtx) -> Result<DFormula, SyntaxError> {
    let lhs = parse_d_over(cur, ctx)?;
    if let Some(op) = under_op(cur.peek()) {
        cur.next();
        let rhs = parse_d_under(cur, ctx)?;
        return Ok(DFormula::bin(op, lhs, rhs));
    }
    Ok(lhs)
}

fn parse_d_over(cur: &mut Cursor, ctx: &mut ParseCtx) -> Result<DFormula, SyntaxError> {
    let mut lhs = parse_d_unary(cur, ctx)?;
    while let Some(op) = over_op(cur.peek()) {
        cur.next();
        let rhs = parse_d_unary(cur, ctx)?;
        lhs = DFormula::bin(op, lhs, rhs);
    }
    Ok(lhs)
}

fn parse_d_unary(cur: &mut Cursor, ctx: &mut ParseCtx) -> Result<DFormula, SyntaxError> {
    match cur.next() {
        Tok::LParen => {
            let f = parse_d_product(cur, ctx)?;
            cur.expect(&Tok::RParen)?;
            Ok(f)
        }
        Tok::Ident(n) if n == "I" => Ok(DFormula::UnitI),
        Tok::Ident(n) if n == "J" => Ok(DFormula::UnitJ),
        Tok::Ident(n) => {
            if let Some(op) = SynOp::from_name(&n) {
                if *cur.peek() == Tok::LParen {
                    cur.next();
                    let f = parse_d_product(cur, ctx)?;
                    cur.expect(&Tok::RParen)?;
                    return Ok(DFormula::syn(op, f));
                }
            }
            let feats = if cur.eat(&Tok::LParen) { parse_term_list(cur, ctx)? } else { Vec::new() };
            Ok(DFormula::Atom(Arc::from(n.as_str()), feats))
        }
        t => Err(cur.error(format!("expected a D formula, found {}", t))),
    }
}

pub fn parse_d(text: &str) -> Result<DFormula, SyntaxError> {
    parse_d_with(text, &mut ParseCtx::default())
}

pub fn parse_d_with(text: &str, ctx: &mut ParseCtx) -> Result<DFormula, SyntaxError> {
    let mut cur = Cursor::new(text)?;
    let f = parse_d_product(&mut cur, ctx)?;
    cur.expect_eof()?;
    Ok(f)
}

// ---------------------------------------------------------------------------
// Sorts

/// Sorts of atomic D formulas; atoms not listed have sort 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AtomSortTable {
    sorts: BTreeMap<String, u32>,
}

impl AtomSortTable {
    pub fn new() -> AtomSortTable {
        AtomSortTable::default()
    }

    pub fn with(mut self, atom: &str, sort: u32) -> AtomSortTable {
        self.set(atom, sort);
        self
    }

    pub fn set(&mut self, atom: &str, sort: u32) {
        self.sorts.insert(atom.to_string(), sort);
    }

    pub fn get(&self, atom: &str) -> u32 {
        self.sorts.get(atom).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.sorts.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SortError {
    #[error("subformula {formula} has negative sort {sort}")]
    NegativeSort { formula: String, sort: i64 },
    /// Wrapping needs a discontinuous operand (sort ≥ 1), otherwise there is
    /// no separator to wrap around.
    #[error("subformula {formula} wraps around a sort-0 formula")]
    WrapOfContinuous { formula: String },
}

/// The sort (number of separators) of a D formula.
pub fn sort(f: &DFormula, st: &AtomSortTable) -> Result<u32, SortError> {
    let s = sort_i(f, st)?;
    Ok(s as u32)
}

fn sort_i(f: &DFormula, st: &AtomSortTable) -> Result<i64, SortError> {
    let s = match f {
        DFormula::Atom(n, _) => st.get(n) as i64,
        DFormula::UnitI => 0,
        DFormula::UnitJ => 1,
        DFormula::Syn(op, a) => {
            let sa = sort_i(a, st)?;
            match op {
                SynOp::Check | SynOp::RInj | SynOp::LInj => sa + 1,
                SynOp::Hat | SynOp::RProj | SynOp::LProj => sa - 1,
            }
        }
        DFormula::Bin(op, a, b) => {
            let (sa, sb) = (sort_i(a, st)?, sort_i(b, st)?);
            let s = match op {
                DOp::Bullet => sa + sb,
                DOp::Under => sb - sa,
                DOp::Over => sa - sb,
                DOp::OdotGt | DOp::OdotLt => sa + sb - 1,
                DOp::DownGt | DOp::DownLt => sb + 1 - sa,
                DOp::UpGt | DOp::UpLt => sa + 1 - sb,
            };
            // The discontinuous member: the wrapping operand of ⊙ and ↓, the
            // result of ↑.
            let outer = match op {
                DOp::OdotGt | DOp::OdotLt | DOp::DownGt | DOp::DownLt => sa,
                DOp::UpGt | DOp::UpLt => s,
                _ => 1,
            };
            if s >= 0 && outer < 1 {
                return Err(SortError::WrapOfContinuous { formula: f.to_string() });
            }
            s
        }
    };
    if s < 0 {
        return Err(SortError::NegativeSort {
            formula: f.to_string(),
            sort: s,
        });
    }
    Ok(s)
}

/// Number of string positions of a formula: `2·(sort+1)`.
pub fn position_arity(f: &DFormula, st: &AtomSortTable) -> Result<usize, SortError> {
    Ok(2 * (sort(f, st)? as usize + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_de_entry() {
        let f = parse_mill("forall X. n(5,X) -o np(4,X)").unwrap();
        match &f {
            MillFormula::Forall(v, body) => match &**body {
                MillFormula::Lolli(a, b) => {
                    assert_eq!(**a, MillFormula::atom("n", vec![Term::int(5), Term::Var(v.clone())]));
                    assert_eq!(**b, MillFormula::atom("np", vec![Term::int(4), Term::Var(v.clone())]));
                }
                _ => panic!("{}", f),
            },
            _ => panic!("{}", f),
        }
        assert_eq!(f.to_string(), "forall X. n(5,X) -o np(4,X)");
        assert_eq!(f.unicode(), "∀X. n(5,X) ⊸ np(4,X)");
    }

    #[test]
    fn parses_lowercase_binders() {
        let f = parse_mill("∀x. n(5,x) ⊸ np(4,x)").unwrap();
        let g = parse_mill("forall X. n(5,X) -o np(4,X)").unwrap();
        assert!(f.variant_eq(&g));
        assert!(f.free_vars().is_empty());
    }

    #[test]
    fn lolli_is_right_associative_and_tensor_binds_tighter() {
        let f = parse_mill("a * b -o c -o d").unwrap();
        let g = MillFormula::lolli(
            MillFormula::tensor(MillFormula::atom("a", vec![]), MillFormula::atom("b", vec![])),
            MillFormula::lolli(MillFormula::atom("c", vec![]), MillFormula::atom("d", vec![])),
        );
        assert_eq!(f, g);
        assert_eq!(f.to_string(), "a * b -o c -o d");
    }

    #[test]
    fn quantifier_in_antecedent_position_is_bracketed() {
        let f = parse_mill("forall X Y. [forall Z. vp(4,Z) -o vp(X,Z)] -o vp(Y,5)").unwrap();
        let printed = f.to_string();
        assert_eq!(printed, "forall X Y. [forall Z. vp(4,Z) -o vp(X,Z)] -o vp(Y,5)");
        assert!(parse_mill(&printed).unwrap().variant_eq(&f));
    }

    #[test]
    fn free_variables_shared_in_sequent() {
        let s = parse_sequent("a(X), b(X) |- c(X, ?y)").unwrap();
        let v0 = s.antecedent[0].free_vars();
        assert_eq!(v0, s.antecedent[1].free_vars());
        assert_eq!(s.succedent.free_vars().len(), 2);
        assert!(parse_sequent("|- a").unwrap().antecedent.is_empty());
    }

    #[test]
    fn syntax_errors_have_positions() {
        let e = parse_mill("a -o").unwrap_err();
        assert_eq!(e.line, 1);
        assert!(parse_mill("forall . a").is_err());
        assert!(parse_mill("a b").is_err());
        assert!(parse_sequent("a, |- b").is_err());
    }

    #[test]
    fn alpha_equivalence() {
        let f = parse_mill("forall X. p(X)").unwrap();
        let g = parse_mill("forall Y. p(Y)").unwrap();
        let h = parse_mill("exists Y. p(Y)").unwrap();
        assert!(f.alpha_eq(&g));
        assert!(!f.alpha_eq(&h));
        let free1 = parse_mill("p(X)").unwrap();
        let free2 = parse_mill("p(X)").unwrap();
        assert!(!free1.alpha_eq(&free2));
        assert!(free1.variant_eq(&free2));
    }

    #[test]
    fn vacuous_quantifiers_removed() {
        let f = parse_mill("forall X Y. exists Z. p(X)").unwrap();
        assert_eq!(f.remove_vacuous().to_string(), "forall X. p(X)");
    }

    #[test]
    fn printer_disambiguates_equal_hints() {
        let (x1, x2) = (Var::fresh("X"), Var::fresh("X"));
        let f = MillFormula::forall(
            x1.clone(),
            MillFormula::forall(x2.clone(), MillFormula::atom("p", vec![Term::Var(x1), Term::Var(x2)])),
        );
        assert_eq!(f.to_string(), "forall X X_1. p(X,X_1)");
    }

    #[test]
    fn d_parsing_and_printing() {
        let did = parse_d("((vp ^> vp) / vp) \\ (vp ^> vp)").unwrap();
        assert_eq!(
            did,
            DFormula::bin(
                DOp::Under,
                DFormula::bin(
                    DOp::Over,
                    DFormula::bin(DOp::UpGt, DFormula::atom("vp"), DFormula::atom("vp")),
                    DFormula::atom("vp")
                ),
                DFormula::bin(DOp::UpGt, DFormula::atom("vp"), DFormula::atom("vp"))
            )
        );
        assert_eq!(parse_d(&did.to_string()).unwrap(), did);
        assert_eq!(parse_d("a").unwrap(), DFormula::atom("a"));
        assert_eq!(parse_d("vp ^ vp").unwrap(), parse_d("vp ^> vp").unwrap());
        assert_eq!(parse_d("a / b / c").unwrap(), parse_d("(a / b) / c").unwrap());
        assert_eq!(parse_d("a \\ b \\ c").unwrap(), parse_d("a \\ (b \\ c)").unwrap());
        assert_eq!(parse_d("a * b \\ c / d").unwrap(), parse_d("a * (b \\ (c / d))").unwrap());
        let f = parse_d("rproj(np \\ (np \\ si))").unwrap();
        assert!(matches!(f, DFormula::Syn(SynOp::RProj, _)));
        assert!(matches!(parse_d("I").unwrap(), DFormula::UnitI));
        let np = parse_d("np(nom)").unwrap();
        assert_eq!(np, DFormula::Atom(Arc::from("np"), vec![Term::constant("nom")]));
    }

    #[test]
    fn sorts_from_the_worked_examples() {
        let st = AtomSortTable::new();
        assert_eq!(sort(&parse_d("vp ^> vp").unwrap(), &st), Ok(1));
        assert_eq!(sort(&parse_d("((vp ^ vp) / vp) \\ (vp ^ vp)").unwrap(), &st), Ok(0));
        assert_eq!(sort(&parse_d("hat(a ^ b)").unwrap(), &st), Ok(0));
        let refl = parse_d("((vp ^> np) ^< np) !< (vp ^> np)").unwrap();
        assert_eq!(sort(&parse_d("(vp ^> np) ^< np").unwrap(), &st), Ok(2));
        assert_eq!(position_arity(&parse_d("(vp ^> np) ^< np").unwrap(), &st), Ok(6));
        assert_eq!(sort(&refl, &st), Ok(0));
        assert_eq!(position_arity(&parse_d("a").unwrap(), &st), Ok(2));
        assert_eq!(position_arity(&parse_d("vp ^> vp").unwrap(), &st), Ok(4));
        let odd = AtomSortTable::new().with("np", 1);
        assert_eq!(sort(&parse_d("np \\ np").unwrap(), &odd), Ok(0));
    }

    #[test]
    fn sort_errors() {
        let st = AtomSortTable::new();
        assert!(matches!(sort(&parse_d("hat(a)").unwrap(), &st), Err(SortError::NegativeSort { .. })));
        assert!(matches!(sort(&parse_d("(a \\ b) \\ c").unwrap(), &st), Ok(0)));
        assert!(matches!(sort(&parse_d("a o> check(b)").unwrap(), &st), Err(SortError::WrapOfContinuous { .. })));
        assert!(matches!(sort(&parse_d("a ^> (b * J * J)").unwrap(), &st), Err(SortError::NegativeSort { .. })));
        let st1 = AtomSortTable::new().with("si", 1);
        assert_eq!(sort(&parse_d("(np \\ si) ! (np \\ s)").unwrap(), &st1), Ok(0));
        assert_eq!(sort(&parse_d("rproj((np \\ si) ! (np \\ si))").unwrap(), &st1), Ok(0));
    }

    // -- properties ---------------------------------------------------------

    fn arb_d() -> impl Strategy<Value = DFormula> {
        let leaf = prop_oneof![
            4 => prop::sample::select(vec!["a", "b", "c", "d"]).prop_map(DFormula::atom),
            1 => Just(DFormula::UnitI),
            1 => Just(DFormula::UnitJ),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            let ops = vec![
                DOp::Bullet,
                DOp::Under,
                DOp::Over,
                DOp::OdotGt,
                DOp::UpGt,
                DOp::DownGt,
                DOp::OdotLt,
                DOp::UpLt,
                DOp::DownLt,
            ];
            let syn = vec![SynOp::Check, SynOp::Hat, SynOp::RProj, SynOp::RInj, SynOp::LProj, SynOp::LInj];
            prop_oneof![
                3 => (prop::sample::select(ops), inner.clone(), inner.clone()).prop_map(|(op, a, b)| DFormula::bin(op, a, b)),
                1 => (prop::sample::select(syn), inner).prop_map(|(op, a)| DFormula::syn(op, a)),
            ]
        })
    }

    /// Tuple lengths through the string operations: concatenation of an
    /// m-tuple and an n-tuple is an (m+n-1)-tuple, wrapping an (i+1)-tuple
    /// around a j-tuple gives an (i+j)-tuple, and residuals are solved for
    /// the missing operand. Units: I is the empty 1-tuple, J the 2-tuple of
    /// empty strings.
    fn tuple_len(f: &DFormula, st: &AtomSortTable) -> Option<i64> {
        let concat = |m: i64, n: i64| m + n - 1;
        let wrap = |outer: i64, inner: i64| if outer >= 2 { Some(outer - 1 + inner - 1) } else { None };
        let l = match f {
            DFormula::Atom(n, _) => st.get(n) as i64 + 1,
            DFormula::UnitI => 1,
            DFormula::UnitJ => 2,
            DFormula::Syn(op, a) => {
                let la = tuple_len(a, st)?;
                match op {
                    // ˇA = A↑I: X wrapped around I gives A.
                    SynOp::Check => la + 1,
                    // ˆA = A⊙I
                    SynOp::Hat => wrap(la, 1)?,
                    // ⊳A = J•A, ⊲A = A•J
                    SynOp::RInj | SynOp::LInj => concat(2, la),
                    // ⊳⁻¹A = J\A, ⊲⁻¹A = A/J
                    SynOp::RProj | SynOp::LProj => la - 2 + 1,
                }
            }
            DFormula::Bin(op, a, b) => {
                let (la, lb) = (tuple_len(a, st)?, tuple_len(b, st)?);
                match op {
                    DOp::Bullet => concat(la, lb),
                    DOp::Under => lb - la + 1,
                    DOp::Over => la - lb + 1,
                    DOp::OdotGt | DOp::OdotLt => wrap(la, lb)?,
                    // X wrapped around... A wrapped around X gives C: la - 1 + lx - 1 = lc
                    DOp::DownGt | DOp::DownLt => {
                        if la < 2 {
                            return None;
                        }
                        lb - la + 2
                    }
                    // X wrapped around B gives C
                    DOp::UpGt | DOp::UpLt => {
                        let lx = la - lb + 2;
                        if lx < 2 {
                            return None;
                        }
                        lx
                    }
                }
            }
        };
        if l < 1 {
            None
        } else {
            Some(l)
        }
    }

    proptest! {
        #[test]
        fn sort_agrees_with_tuple_length_model(f in arb_d(), sa in 0u32..3, sb in 0u32..3) {
            let st = AtomSortTable::new().with("a", sa).with("b", sb).with("c", 1);
            match (sort(&f, &st), tuple_len(&f, &st)) {
                (Ok(s), Some(l)) => prop_assert_eq!(s as i64 + 1, l),
                (Err(_), None) => {}
                (x, y) => prop_assert!(false, "sort {:?} vs model {:?} for {}", x, y, f),
            }
        }

        #[test]
        fn d_print_parse_roundtrip(f in arb_d()) {
            prop_assert_eq!(parse_d(&f.to_string()).unwrap(), f.clone());
            prop_assert_eq!(parse_d(&f.unicode()).unwrap(), f);
        }

        #[test]
        fn mill_print_parse_roundtrip(f in arb_mill()) {
            let printed = f.to_string();
            let back = parse_mill(&printed).unwrap();
            prop_assert!(back.variant_eq(&f), "{} reparsed as {}", printed, back);
            let uni = parse_mill(&f.unicode()).unwrap();
            prop_assert!(uni.variant_eq(&f));
            let binders = f.binders();
            let distinct: BTreeSet<_> = binders.iter().collect();
            prop_assert_eq!(distinct.len(), binders.len());
        }
    }

    pub(crate) fn arb_mill() -> impl Strategy<Value = MillFormula> {
        #[derive(Debug, Clone)]
        enum S {
            At(u8, u8),
            T(Box<S>, Box<S>),
            L(Box<S>, Box<S>),
            A(Box<S>),
            E(Box<S>),
        }
        let leaf = (0u8..3, 0u8..4).prop_map(|(p, a)| S::At(p, a));
        let shape = leaf.prop_recursive(4, 20, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| S::T(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| S::L(Box::new(a), Box::new(b))),
                inner.clone().prop_map(|a| S::A(Box::new(a))),
                inner.prop_map(|a| S::E(Box::new(a))),
            ]
        });
        shape.prop_map(|s| {
            fn build(s: &S, scope: &mut Vec<Var>, free: &Var) -> MillFormula {
                match s {
                    S::At(p, a) => {
                        let arg = match *a as usize {
                            0 => Term::int(3),
                            1 => Term::Var(free.clone()),
                            k => scope.iter().rev().nth(k - 2).map(|v| Term::Var(v.clone())).unwrap_or(Term::constant("c")),
                        };
                        MillFormula::atom(["p", "q", "r"][*p as usize], vec![arg])
                    }
                    S::T(a, b) => MillFormula::tensor(build(a, scope, free), build(b, scope, free)),
                    S::L(a, b) => MillFormula::lolli(build(a, scope, free), build(b, scope, free)),
                    S::A(b) | S::E(b) => {
                        let v = Var::fresh("X");
                        scope.push(v.clone());
                        let body = build(b, scope, free);
                        scope.pop();
                        if matches!(s, S::A(_)) {
                            MillFormula::forall(v, body)
                        } else {
                            MillFormula::exists(v, body)
                        }
                    }
                }
            }
            build(&s, &mut Vec::new(), &Var::fresh("F"))
        })
    }
}
