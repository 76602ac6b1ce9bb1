//! First-order terms over string positions and feature symbols.
//!
//! Terms are built from variables, constants (position integers such as `5`
//! and feature atoms such as `nom`) and functor applications such as the
//! successor term `s(X)`. Substitutions are kept idempotent: every binding is
//! fully applied when it is inserted, so [`Substitution::apply`] is a single
//! pass over the term.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use thiserror::Error;

/// Functor used for the unary successor encoding `s(T)`.
pub const SUCC: &str = "s";

static NEXT_VAR_ID: AtomicU64 = AtomicU64::new(1);

fn next_id() -> u64 {
    NEXT_VAR_ID.fetch_add(1, Ordering::Relaxed)
}

/// A variable. Identity is the numeric id; the hint is only used for display.
///
/// Rigid variables are eigenvariables: they behave like constants during
/// unification and can never be bound.
#[derive(Clone)]
pub struct Var {
    id: u64,
    hint: Arc<str>,
    rigid: bool,
}

impl Var {
    /// A fresh metavariable (bindable by unification).
    pub fn fresh(hint: &str) -> Var {
        Var {
            id: next_id(),
            hint: Arc::from(hint),
            rigid: false,
        }
    }

    /// A fresh eigenvariable.
    pub fn fresh_rigid(hint: &str) -> Var {
        Var {
            id: next_id(),
            hint: Arc::from(hint),
            rigid: true,
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn hint(&self) -> &str {
        &self.hint
    }

    pub fn is_rigid(&self) -> bool {
        self.rigid
    }

    /// The name used when the variable is printed on its own: capitalized
    /// hints print as-is, anything else gets the `?` prefix.
    pub fn display_name(&self) -> String {
        display_var_name(&self.hint)
    }
}

pub(crate) fn display_var_name(hint: &str) -> String {
    let mut chars = hint.chars();
    match chars.next() {
        Some(c) if c.is_uppercase() && hint.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'') => {
            hint.to_string()
        }
        _ => format!("?{}", hint),
    }
}

impl PartialEq for Var {
    fn eq(&self, other: &Var) -> bool {
        self.id == other.id
    }
}

impl Eq for Var {}

impl Hash for Var {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Var) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Var {
    fn cmp(&self, other: &Var) -> std::cmp::Ordering {
        self.id.cmp(&other.id)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}{}", self.hint, self.id, if self.rigid { "!" } else { "" })
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_name())
    }
}

/// A first-order term.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Const(Arc<str>),
    App(Arc<str>, Vec<Term>),
}

/// Returns a term holding a fresh metavariable.
pub fn fresh_var(hint: &str) -> Term {
    Term::Var(Var::fresh(hint))
}

impl Term {
    pub fn constant(name: &str) -> Term {
        Term::Const(Arc::from(name))
    }

    pub fn int(n: u32) -> Term {
        Term::Const(Arc::from(n.to_string()))
    }

    pub fn app(functor: &str, args: Vec<Term>) -> Term {
        assert!(!args.is_empty(), "functor applications need at least one argument");
        Term::App(Arc::from(functor), args)
    }

    /// `s(t)`
    pub fn succ(t: Term) -> Term {
        Term::app(SUCC, vec![t])
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    /// The integer value of a position constant.
    pub fn as_int(&self) -> Option<u32> {
        match self {
            Term::Const(c) => c.parse().ok(),
            _ => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) => true,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn occurs(&self, v: &Var) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::Const(_) => false,
            Term::App(_, args) => args.iter().any(|a| a.occurs(v)),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    /// Replaces every occurrence of `v` by `t`.
    pub fn replace_var(&self, v: &Var, t: &Term) -> Term {
        match self {
            Term::Var(w) if w == v => t.clone(),
            Term::Var(_) | Term::Const(_) => self.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.replace_var(v, t)).collect()),
        }
    }

    /// Every constant symbol occurring in the term.
    pub fn constants(&self, out: &mut BTreeSet<Arc<str>>) {
        match self {
            Term::Var(_) => {}
            Term::Const(c) => {
                out.insert(c.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.constants(out)),
        }
    }

    pub(crate) fn fmt_with(&self, f: &mut fmt::Formatter<'_>, name: &dyn Fn(&Var) -> String) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(&name(v)),
            Term::Const(c) => f.write_str(c),
            Term::App(g, args) => {
                write!(f, "{}(", g)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    a.fmt_with(f, name)?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, &|v| v.display_name())
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, &|v| format!("{:?}", v))
    }
}

impl From<Var> for Term {
    fn from(v: Var) -> Term {
        Term::Var(v)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum UnifyError {
    #[error("cannot unify {0} with {1}")]
    Clash(Term, Term),
    #[error("occurs check: {0} occurs in {1}")]
    Occurs(Var, Term),
}

/// An idempotent substitution from variables to terms.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    /// Builds a substitution from arbitrary (possibly chained) bindings and
    /// closes it to its idempotent form, e.g. `{X↦Y, Y↦3}` becomes
    /// `{X↦3, Y↦3}`. Cyclic bindings are rejected.
    pub fn from_bindings<I>(bindings: I) -> Result<Substitution, UnifyError>
    where
        I: IntoIterator<Item = (Var, Term)>,
    {
        let mut s = Substitution::new();
        for (v, t) in bindings {
            let t = s.apply(&t);
            match s.bindings.get(&v).cloned() {
                Some(existing) => s = s.unify(&existing, &t)?,
                None => s.bind_unchecked(v, t)?,
            }
        }
        Ok(s)
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.bindings.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.bindings.iter()
    }

    /// Applies the substitution. Because bindings are idempotent a single
    /// traversal suffices.
    pub fn apply(&self, t: &Term) -> Term {
        if self.bindings.is_empty() {
            return t.clone();
        }
        match t {
            Term::Var(v) => self.bindings.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Const(_) => t.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| self.apply(a)).collect()),
        }
    }

    /// Most general unifier of `t1` and `t2` extending `self`. The receiver is
    /// left untouched.
    pub fn unify(&self, t1: &Term, t2: &Term) -> Result<Substitution, UnifyError> {
        let mut s = self.clone();
        s.unify_in_place(t1, t2)?;
        Ok(s)
    }

    /// Unifies the argument lists pairwise.
    pub fn unify_all(&self, a: &[Term], b: &[Term]) -> Result<Substitution, UnifyError> {
        if a.len() != b.len() {
            return Err(UnifyError::Clash(
                Term::app("arity", vec![Term::int(a.len() as u32)]),
                Term::app("arity", vec![Term::int(b.len() as u32)]),
            ));
        }
        let mut s = self.clone();
        for (x, y) in a.iter().zip(b) {
            s.unify_in_place(x, y)?;
        }
        Ok(s)
    }

    fn unify_in_place(&mut self, t1: &Term, t2: &Term) -> Result<(), UnifyError> {
        let a = self.apply(t1);
        let b = self.apply(t2);
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => Ok(()),
            (Term::Var(x), _) if !x.rigid => self.bind_unchecked(x.clone(), b),
            (_, Term::Var(y)) if !y.rigid => self.bind_unchecked(y.clone(), a),
            (Term::Const(c), Term::Const(d)) if c == d => Ok(()),
            (Term::App(f, xs), Term::App(g, ys)) if f == g && xs.len() == ys.len() => {
                for (x, y) in xs.iter().zip(ys) {
                    self.unify_in_place(x, y)?;
                }
                Ok(())
            }
            _ => Err(UnifyError::Clash(a, b)),
        }
    }

    /// Inserts `v ↦ t` where `t` is already fully applied, compressing
    /// existing bindings that mention `v`.
    fn bind_unchecked(&mut self, v: Var, t: Term) -> Result<(), UnifyError> {
        if let Term::Var(w) = &t {
            if *w == v {
                return Ok(());
            }
        }
        if t.occurs(&v) {
            return Err(UnifyError::Occurs(v, t));
        }
        for rhs in self.bindings.values_mut() {
            if rhs.occurs(&v) {
                *rhs = rhs.replace_var(&v, &t);
            }
        }
        self.bindings.insert(v, t);
        Ok(())
    }

    /// Binds an eigenvariable to a witness term. Used by cut elimination,
    /// where the eigenvariable is replaced throughout by the witness.
    pub fn instantiate_rigid(&self, v: &Var, t: &Term) -> Result<Substitution, UnifyError> {
        let mut s = self.clone();
        let t = s.apply(t);
        s.bind_unchecked(v.clone(), t)?;
        Ok(s)
    }

    /// Merges two substitutions over disjoint sets of variables.
    pub fn union(&self, other: &Substitution) -> Result<Substitution, UnifyError> {
        let mut s = self.clone();
        for (v, t) in other.iter() {
            s = s.unify(&Term::Var(v.clone()), t)?;
        }
        Ok(s)
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.bindings.iter()).finish()
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}↦{}", v, t)?;
        }
        f.write_str("}")
    }
}
