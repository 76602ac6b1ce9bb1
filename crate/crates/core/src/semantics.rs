//! Reading a natural-deduction proof, and its linear lambda term, off a
//! proof net. Quantifiers are dropped: the result is a proof in
//! propositional MILL.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::formula::{MillFormula, Polarity};
use crate::proofnet::{LinkKind, LinkId, NodeId, ProofStructure};
use crate::translate::drop_quantifiers;

/// Natural-deduction proof over quantifier-free formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NDProof {
    /// A lexical hypothesis (an antecedent formula of the sequent).
    Lex { name: String, formula: MillFormula },
    /// A hypothesis discharged by ⊸I or ⊗E.
    Hyp { index: usize, formula: MillFormula },
    LolliI { hyp: usize, arg: MillFormula, body: Box<NDProof> },
    LolliE { fun: Box<NDProof>, arg: Box<NDProof> },
    TensorI(Box<NDProof>, Box<NDProof>),
    TensorE { left: usize, right: usize, pair: Box<NDProof>, body: Box<NDProof> },
}

impl NDProof {
    /// The formula this proof concludes.
    pub fn formula(&self) -> MillFormula {
        match self {
            NDProof::Lex { formula, .. } | NDProof::Hyp { formula, .. } => formula.clone(),
            NDProof::LolliI { arg, body, .. } => MillFormula::lolli(arg.clone(), body.formula()),
            NDProof::LolliE { fun, .. } => match fun.formula() {
                MillFormula::Lolli(_, b) => *b,
                other => panic!("⊸E on {}", other),
            },
            NDProof::TensorI(a, b) => MillFormula::tensor(a.formula(), b.formula()),
            NDProof::TensorE { body, .. } => body.formula(),
        }
    }

    /// Number of rule applications, axioms and hypotheses included.
    pub fn size(&self) -> usize {
        match self {
            NDProof::Lex { .. } | NDProof::Hyp { .. } => 1,
            NDProof::LolliI { body, .. } => 1 + body.size(),
            NDProof::LolliE { fun, arg } => 1 + fun.size() + arg.size(),
            NDProof::TensorI(a, b) => 1 + a.size() + b.size(),
            NDProof::TensorE { pair, body, .. } => 1 + pair.size() + body.size(),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SeqError {
    #[error("no splitting link found; the structure is not a net")]
    NoSplit,
    #[error("expected {0} lexical names, got {1}")]
    LexCount(usize, usize),
}

struct Seq<'a> {
    ps: &'a ProofStructure,
    partner: BTreeMap<NodeId, NodeId>,
    consumed: BTreeSet<NodeId>,
    next_hyp: usize,
}

impl Seq<'_> {
    fn kind(&self, n: NodeId) -> Option<&LinkKind> {
        self.ps.frame.nodes[n].link.map(|l| &self.ps.frame.links[l].kind)
    }

    fn premisses(&self, n: NodeId) -> Vec<NodeId> {
        self.ps.frame.nodes[n].link.map(|l| self.ps.frame.links[l].premisses.clone()).unwrap_or_default()
    }

    fn plain(&self, n: NodeId) -> MillFormula {
        drop_quantifiers(&self.ps.frame.nodes[n].formula)
    }

    fn is_quantifier(&self, n: NodeId) -> bool {
        matches!(self.kind(n), Some(LinkKind::UniversalL(_)) | Some(LinkKind::ExistentialL(_)))
    }

    /// Component labels of the nodes above the current conclusions, with
    /// the link concluding `cut` removed.
    fn components(&self, starts: &[NodeId], cut: NodeId) -> BTreeMap<NodeId, usize> {
        let frame = &self.ps.frame;
        let removed: Option<LinkId> = frame.nodes[cut].link;
        let mut comp = BTreeMap::new();
        let mut next = 0;
        let mut seeds: Vec<NodeId> = starts.to_vec();
        seeds.extend(self.premisses(cut));
        for s in seeds {
            if s == cut || comp.contains_key(&s) {
                continue;
            }
            let mut queue = VecDeque::from([s]);
            comp.insert(s, next);
            while let Some(u) = queue.pop_front() {
                let node = &frame.nodes[u];
                let mut nbrs = Vec::new();
                if let Some(l) = node.link.filter(|&l| Some(l) != removed) {
                    nbrs.extend(frame.links[l].premisses.iter().copied());
                }
                if let Some(l) = node.parent.filter(|&l| Some(l) != removed) {
                    if let Some(&c) = frame.links[l].conclusions.first() {
                        nbrs.push(c);
                    }
                }
                if let Some(&p) = self.partner.get(&u) {
                    nbrs.push(p);
                }
                for v in nbrs {
                    if v != cut && !self.consumed.contains(&v) && !comp.contains_key(&v) {
                        comp.insert(v, next);
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    fn fresh(&mut self) -> usize {
        self.next_hyp += 1;
        self.next_hyp - 1
    }

    fn go(&mut self, mut hyps: Vec<(NodeId, NDProof)>, mut goal: NodeId) -> Result<NDProof, SeqError> {
        // Asynchronous phase; quantifier links are transparent.
        loop {
            if self.is_quantifier(goal) {
                self.consumed.insert(goal);
                goal = self.premisses(goal)[0];
                continue;
            }
            if let Some(i) = hyps.iter().position(|(n, _)| self.is_quantifier(*n)) {
                let (n, p) = hyps.remove(i);
                self.consumed.insert(n);
                hyps.insert(i, (self.premisses(n)[0], p));
                continue;
            }
            if self.kind(goal) == Some(&LinkKind::Par) {
                self.consumed.insert(goal);
                let [a, b] = self.premisses(goal)[..] else { unreachable!() };
                let k = self.fresh();
                let arg = self.plain(a);
                hyps.push((a, NDProof::Hyp { index: k, formula: arg.clone() }));
                let body = self.go(hyps, b)?;
                return Ok(NDProof::LolliI { hyp: k, arg, body: Box::new(body) });
            }
            if let Some(i) = hyps.iter().position(|(n, _)| self.kind(*n) == Some(&LinkKind::Par)) {
                let (n, pair) = hyps.remove(i);
                self.consumed.insert(n);
                let [a, b] = self.premisses(n)[..] else { unreachable!() };
                let (l, r) = (self.fresh(), self.fresh());
                hyps.push((a, NDProof::Hyp { index: l, formula: self.plain(a) }));
                hyps.push((b, NDProof::Hyp { index: r, formula: self.plain(b) }));
                let body = self.go(hyps, goal)?;
                return Ok(NDProof::TensorE {
                    left: l,
                    right: r,
                    pair: Box::new(pair),
                    body: Box::new(body),
                });
            }
            break;
        }
        if hyps.len() == 1 && self.partner.get(&goal) == Some(&hyps[0].0) {
            return Ok(hyps.pop().expect("one hypothesis").1);
        }
        // Synchronous phase: find a splitting tensor link.
        let mut terminal: Vec<NodeId> = hyps.iter().map(|(n, _)| *n).filter(|&n| self.kind(n) == Some(&LinkKind::TensorL)).collect();
        if self.kind(goal) == Some(&LinkKind::TensorL) {
            terminal.push(goal);
        }
        terminal.sort();
        let mut starts: Vec<NodeId> = hyps.iter().map(|(n, _)| *n).collect();
        starts.push(goal);
        for c in terminal {
            let comp = self.components(&starts, c);
            let [a, b] = self.premisses(c)[..] else { unreachable!() };
            let (ca, cb) = (comp[&a], comp[&b]);
            if ca == cb {
                continue;
            }
            let others: Vec<&(NodeId, NDProof)> = hyps.iter().filter(|(n, _)| *n != c).collect();
            if !others.iter().all(|(n, _)| comp[n] == ca || comp[n] == cb) {
                continue;
            }
            if c == goal {
                self.consumed.insert(c);
                let (ha, hb): (Vec<_>, Vec<_>) = hyps.into_iter().partition(|(n, _)| comp[n] == ca);
                let pa = self.go(ha, a)?;
                let pb = self.go(hb, b)?;
                return Ok(NDProof::TensorI(Box::new(pa), Box::new(pb)));
            }
            // c = A ⊸ B in the antecedent: A is proved from one side, B
            // becomes a hypothesis of the other.
            if comp.get(&goal) != Some(&cb) {
                continue;
            }
            self.consumed.insert(c);
            let i = hyps.iter().position(|(n, _)| *n == c).expect("terminal hypothesis");
            let (_, fun) = hyps.remove(i);
            let (ha, mut hb): (Vec<_>, Vec<_>) = hyps.into_iter().partition(|(n, _)| comp[n] == ca);
            let arg = self.go(ha, a)?;
            hb.push((
                b,
                NDProof::LolliE {
                    fun: Box::new(fun),
                    arg: Box::new(arg),
                },
            ));
            return self.go(hb, goal);
        }
        Err(SeqError::NoSplit)
    }
}

/// Sequentializes a cut-free net into a natural-deduction proof of the
/// quantifier-dropped sequent. `lex` names the antecedent formulas.
pub fn sequentialize(ps: &ProofStructure, lex: &[String]) -> Result<NDProof, SeqError> {
    let frame = &ps.frame;
    let ante: Vec<NodeId> = frame.conclusions.iter().copied().filter(|&c| frame.nodes[c].polarity == Polarity::Negative).collect();
    let goal = *frame.conclusions.iter().find(|&&c| frame.nodes[c].polarity == Polarity::Positive).expect("succedent");
    if ante.len() != lex.len() {
        return Err(SeqError::LexCount(ante.len(), lex.len()));
    }
    let mut partner = BTreeMap::new();
    for &(a, b) in &ps.axioms {
        partner.insert(a, b);
        partner.insert(b, a);
    }
    let mut seq = Seq {
        ps,
        partner,
        consumed: BTreeSet::new(),
        next_hyp: 0,
    };
    let hyps = ante
        .iter()
        .zip(lex)
        .map(|(&n, name)| {
            (
                n,
                NDProof::Lex {
                    name: name.clone(),
                    formula: drop_quantifiers(&frame.nodes[n].formula),
                },
            )
        })
        .collect();
    seq.go(hyps, goal)
}

/// Default lexical names `c0, c1, …` for bare sequents.
pub fn default_names(ps: &ProofStructure) -> Vec<String> {
    let n = ps.frame.conclusions.len() - 1;
    (0..n).map(|i| format!("c{}", i)).collect()
}

/// Linear lambda terms with typed binders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LTerm {
    Const(String),
    Var(String),
    Lam(String, MillFormula, Box<LTerm>),
    App(Box<LTerm>, Box<LTerm>),
    Pair(Box<LTerm>, Box<LTerm>),
    LetPair(String, String, Box<LTerm>, Box<LTerm>),
}

fn var_name(i: usize) -> String {
    format!("x{}", i)
}

/// The Curry-Howard image of a natural-deduction proof.
pub fn lambda_term(nd: &NDProof) -> LTerm {
    match nd {
        NDProof::Lex { name, .. } => LTerm::Const(name.clone()),
        NDProof::Hyp { index, .. } => LTerm::Var(var_name(*index)),
        NDProof::LolliI { hyp, arg, body } => LTerm::Lam(var_name(*hyp), arg.clone(), Box::new(lambda_term(body))),
        NDProof::LolliE { fun, arg } => LTerm::App(Box::new(lambda_term(fun)), Box::new(lambda_term(arg))),
        NDProof::TensorI(a, b) => LTerm::Pair(Box::new(lambda_term(a)), Box::new(lambda_term(b))),
        NDProof::TensorE { left, right, pair, body } => {
            LTerm::LetPair(var_name(*left), var_name(*right), Box::new(lambda_term(pair)), Box::new(lambda_term(body)))
        }
    }
}

impl LTerm {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            LTerm::Const(c) | LTerm::Var(c) => f.write_str(c),
            LTerm::Lam(x, _, b) => {
                if prec > 0 {
                    f.write_str("(")?;
                }
                write!(f, "λ{}. ", x)?;
                b.fmt_prec(f, 0)?;
                if prec > 0 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            LTerm::App(a, b) => {
                if prec > 1 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 1)?;
                f.write_str(" ")?;
                b.fmt_prec(f, 2)?;
                if prec > 1 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            LTerm::Pair(a, b) => {
                f.write_str("⟨")?;
                a.fmt_prec(f, 0)?;
                f.write_str(", ")?;
                b.fmt_prec(f, 0)?;
                f.write_str("⟩")
            }
            LTerm::LetPair(x, y, p, b) => {
                if prec > 0 {
                    f.write_str("(")?;
                }
                write!(f, "let ⟨{}, {}⟩ = ", x, y)?;
                p.fmt_prec(f, 0)?;
                f.write_str(" in ")?;
                b.fmt_prec(f, 0)?;
                if prec > 0 {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }

    /// Like Display, with binder types: `λx0:np. …`.
    pub fn annotated(&self) -> String {
        match self {
            LTerm::Const(c) | LTerm::Var(c) => c.clone(),
            LTerm::Lam(x, t, b) => format!("(λ{}:{}. {})", x, t, b.annotated()),
            LTerm::App(a, b) => format!("({} {})", a.annotated(), b.annotated()),
            LTerm::Pair(a, b) => format!("⟨{}, {}⟩", a.annotated(), b.annotated()),
            LTerm::LetPair(x, y, p, b) => format!("(let ⟨{}, {}⟩ = {} in {})", x, y, p.annotated(), b.annotated()),
        }
    }
}

impl fmt::Display for LTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("unknown constant {0}")]
    UnknownConst(String),
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("variable {0} used {1} times")]
    NonLinear(String, usize),
    #[error("constant {0} used {1} times")]
    ConstUse(String, usize),
    #[error("cannot apply {0} to {1}")]
    BadApp(String, String),
    #[error("let-pair on non-product {0}")]
    NotAPair(String),
}

struct Checker<'a> {
    consts: &'a BTreeMap<String, MillFormula>,
    scope: Vec<(String, MillFormula, usize)>,
    const_uses: BTreeMap<String, usize>,
}

impl Checker<'_> {
    fn bind<T>(&mut self, vars: &[(String, MillFormula)], k: impl FnOnce(&mut Self) -> Result<T, TypeError>) -> Result<T, TypeError> {
        let depth = self.scope.len();
        for (x, t) in vars {
            self.scope.push((x.clone(), t.clone(), 0));
        }
        let r = k(self)?;
        for (x, _, uses) in self.scope.drain(depth..) {
            if uses != 1 {
                return Err(TypeError::NonLinear(x, uses));
            }
        }
        Ok(r)
    }

    fn infer(&mut self, t: &LTerm) -> Result<MillFormula, TypeError> {
        match t {
            LTerm::Const(c) => {
                *self.const_uses.entry(c.clone()).or_insert(0) += 1;
                self.consts.get(c).cloned().ok_or_else(|| TypeError::UnknownConst(c.clone()))
            }
            LTerm::Var(x) => match self.scope.iter_mut().rev().find(|(y, _, _)| y == x) {
                Some((_, ty, uses)) => {
                    *uses += 1;
                    Ok(ty.clone())
                }
                None => Err(TypeError::Unbound(x.clone())),
            },
            LTerm::Lam(x, ty, body) => {
                let b = self.bind(&[(x.clone(), ty.clone())], |c| c.infer(body))?;
                Ok(MillFormula::lolli(ty.clone(), b))
            }
            LTerm::App(f, a) => {
                let (tf, ta) = (self.infer(f)?, self.infer(a)?);
                match tf {
                    MillFormula::Lolli(x, y) if *x == ta => Ok(*y),
                    other => Err(TypeError::BadApp(other.to_string(), ta.to_string())),
                }
            }
            LTerm::Pair(a, b) => Ok(MillFormula::tensor(self.infer(a)?, self.infer(b)?)),
            LTerm::LetPair(x, y, p, body) => match self.infer(p)? {
                MillFormula::Tensor(a, b) => self.bind(&[(x.clone(), *a), (y.clone(), *b)], |c| c.infer(body)),
                other => Err(TypeError::NotAPair(other.to_string())),
            },
        }
    }
}

/// Linear type checking: every bound variable and every constant is used
/// exactly once. Returns the type of the term.
pub fn type_check(t: &LTerm, consts: &BTreeMap<String, MillFormula>) -> Result<MillFormula, TypeError> {
    let mut c = Checker {
        consts,
        scope: Vec::new(),
        const_uses: BTreeMap::new(),
    };
    let ty = c.infer(t)?;
    for name in consts.keys() {
        let n = c.const_uses.get(name).copied().unwrap_or(0);
        if n != 1 {
            return Err(TypeError::ConstUse(name.clone(), n));
        }
    }
    Ok(ty)
}

/// The constant typing for a net: quantifier-dropped antecedent formulas.
pub fn lexical_types(ps: &ProofStructure, lex: &[String]) -> BTreeMap<String, MillFormula> {
    let frame = &ps.frame;
    frame
        .conclusions
        .iter()
        .filter(|&&c| frame.nodes[c].polarity == Polarity::Negative)
        .zip(lex)
        .map(|(&c, name)| (name.clone(), drop_quantifiers(&frame.nodes[c].formula)))
        .collect()
}

/// Sequentializes, extracts the term and type-checks it against the
/// quantifier-dropped goal.
pub fn extract(ps: &ProofStructure, lex: &[String]) -> Result<(NDProof, LTerm), String> {
    let nd = sequentialize(ps, lex).map_err(|e| e.to_string())?;
    let term = lambda_term(&nd);
    let ty = type_check(&term, &lexical_types(ps, lex)).map_err(|e| e.to_string())?;
    let frame = &ps.frame;
    let goal = frame.conclusions.iter().find(|&&c| frame.nodes[c].polarity == Polarity::Positive).expect("succedent");
    let want = drop_quantifiers(&frame.nodes[*goal].formula);
    if ty != want {
        return Err(format!("term has type {}, expected {}", ty, want));
    }
    Ok((nd, term))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_sequent;
    use crate::prover::prove_sequent;

    fn terms(seq: &str) -> Vec<String> {
        let s = parse_sequent(seq).unwrap();
        prove_sequent(&s, None)
            .unwrap()
            .iter()
            .map(|ps| extract(ps, &default_names(ps)).unwrap().1.to_string())
            .collect()
    }

    #[test]
    fn axiom() {
        assert_eq!(terms("a |- a"), vec!["c0"]);
    }

    #[test]
    fn application() {
        assert_eq!(terms("forall X. b(X) -o a(X), b(1) |- a(1)"), vec!["c0 c1"]);
        assert_eq!(terms("a -o b -o c, a, b |- c"), vec!["c0 c1 c2"]);
    }

    #[test]
    fn abstraction_and_pairs() {
        assert_eq!(terms("|- a -o a"), vec!["λx0. x0"]);
        assert_eq!(terms("a * b |- b * a"), vec!["let ⟨x0, x1⟩ = c0 in ⟨x1, x0⟩"]);
        assert_eq!(terms("a -o b, b -o c |- a -o c"), vec!["λx0. c1 (c0 x0)"]);
        assert_eq!(terms("(a -o b) -o c |- (a -o b) -o c"), vec!["λx0. c0 (λx1. x0 x1)"]);
    }

    #[test]
    fn quantifiers_are_transparent() {
        let t = terms("exists x. forall y. f(x,y) |- forall v. exists w. f(w,v)");
        assert_eq!(t, vec!["c0"]);
    }

    #[test]
    fn checker_rejects_non_linear_terms() {
        let a = MillFormula::atom("a", vec![]);
        let consts = BTreeMap::new();
        let dup = LTerm::Lam("x".into(), a.clone(), Box::new(LTerm::Pair(Box::new(LTerm::Var("x".into())), Box::new(LTerm::Var("x".into())))));
        assert_eq!(type_check(&dup, &consts), Err(TypeError::NonLinear("x".into(), 2)));
        let unused = LTerm::Lam("x".into(), a.clone(), Box::new(LTerm::Const("k".into())));
        let consts = BTreeMap::from([("k".to_string(), a.clone())]);
        assert_eq!(type_check(&unused, &consts), Err(TypeError::NonLinear("x".into(), 0)));
        let ok = LTerm::Lam("x".into(), a.clone(), Box::new(LTerm::Var("x".into())));
        assert_eq!(type_check(&ok, &BTreeMap::new()).unwrap(), MillFormula::lolli(a.clone(), a));
    }
}
