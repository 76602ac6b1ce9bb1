//! Translation of Displacement-calculus formulas into MILL1, plus the
//! successor-term encodings for non-associativity and scope levels.
//!
//! A formula of sort `s` is translated at a vector of `2(s+1)` string
//! positions. Each binary connective splits the slots `x0 … x(n+m)` into the
//! ones supplied from outside and the ones it quantifies over itself.

use thiserror::Error;

use crate::formula::{sort, AtomSortTable, DFormula, DOp, MillFormula, SortError, SynOp};
use crate::term::{Substitution, Term, Var, SUCC};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TranslateError {
    #[error("{formula} needs {expected} positions, got {got}")]
    ArityMismatch { formula: String, expected: usize, got: usize },
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("{formula} forces positions {a} and {b} to coincide")]
    IdentityConstraint { formula: String, a: Term, b: Term },
    #[error("unit {0} only occurs as part of a synthetic connective")]
    StandaloneUnit(String),
    #[error("connective not supported in this mode: {0}")]
    UnsupportedConnective(String),
}

/// Translates `f` at positions `p`. Vacuous quantifiers are removed.
pub fn translate_d(f: &DFormula, p: &[Term], st: &AtomSortTable) -> Result<MillFormula, TranslateError> {
    let f = desugar_units(f)?;
    let expected = 2 * (sort(&f, st)? as usize + 1);
    if expected != p.len() {
        return Err(TranslateError::ArityMismatch {
            formula: f.to_string(),
            expected,
            got: p.len(),
        });
    }
    let mut tr = Translator {
        st,
        counter: 0,
        sub: Substitution::new(),
    };
    let out = tr.go(&f, p)?;
    Ok(out.apply(&tr.sub).remove_vacuous())
}

/// Rewrites unit patterns into the synthetic connectives they define:
/// `C↑>I = ˇC`, `A⊙>I = ˆA`, `J•A = ⊳A`, `J\A = ⊳⁻¹A`, `A•J = ⊲A`,
/// `A/J = ⊲⁻¹A`. Any other unit occurrence is rejected.
pub fn desugar_units(f: &DFormula) -> Result<DFormula, TranslateError> {
    use DFormula::*;
    Ok(match f {
        Atom(..) => f.clone(),
        UnitI => return Err(TranslateError::StandaloneUnit("I".into())),
        UnitJ => return Err(TranslateError::StandaloneUnit("J".into())),
        Syn(op, a) => DFormula::syn(*op, desugar_units(a)?),
        Bin(op, a, b) => match (op, &**a, &**b) {
            (DOp::UpGt, c, UnitI) => DFormula::syn(SynOp::Check, desugar_units(c)?),
            (DOp::OdotGt, a, UnitI) => DFormula::syn(SynOp::Hat, desugar_units(a)?),
            (DOp::Bullet, UnitJ, a) => DFormula::syn(SynOp::RInj, desugar_units(a)?),
            (DOp::Under, UnitJ, a) => DFormula::syn(SynOp::RProj, desugar_units(a)?),
            (DOp::Bullet, a, UnitJ) => DFormula::syn(SynOp::LInj, desugar_units(a)?),
            (DOp::Over, a, UnitJ) => DFormula::syn(SynOp::LProj, desugar_units(a)?),
            _ => DFormula::bin(*op, desugar_units(a)?, desugar_units(b)?),
        },
    })
}

struct Translator<'a> {
    st: &'a AtomSortTable,
    counter: usize,
    sub: Substitution,
}

/// Inclusive index range, empty when `b < a`.
fn r(a: usize, b: isize) -> Vec<usize> {
    if (b) < a as isize {
        Vec::new()
    } else {
        (a..=b as usize).collect()
    }
}

fn cat(parts: &[Vec<usize>]) -> Vec<usize> {
    parts.concat()
}

#[derive(Clone, Copy)]
enum Body {
    Tensor,
    Lolli,
}

struct Layout {
    n: usize,
    m: usize,
    inputs: Vec<usize>,
    quantified: Vec<usize>,
    left: Vec<usize>,
    right: Vec<usize>,
    body: Body,
}

impl Translator<'_> {
    fn fresh(&mut self) -> Term {
        let v = Var::fresh(&format!("X{}", self.counter));
        self.counter += 1;
        Term::Var(v)
    }

    fn sort_of(&self, f: &DFormula) -> Result<usize, TranslateError> {
        Ok(sort(f, self.st)? as usize)
    }

    /// Forces two positions to be equal. Two distinct constants are an
    /// error; otherwise the more recently created variable is bound.
    fn identify(&mut self, f: &DFormula, a: &Term, b: &Term) -> Result<(), TranslateError> {
        let (a, b) = (self.sub.apply(a), self.sub.apply(b));
        if a == b {
            return Ok(());
        }
        let err = || TranslateError::IdentityConstraint {
            formula: f.to_string(),
            a: a.clone(),
            b: b.clone(),
        };
        let (x, y) = match (&a, &b) {
            (Term::Var(v), Term::Var(w)) if v.id() > w.id() => (a.clone(), b.clone()),
            (Term::Var(_), Term::Var(_)) => (b.clone(), a.clone()),
            (Term::Var(_), _) => (a.clone(), b.clone()),
            (_, Term::Var(_)) => (b.clone(), a.clone()),
            _ => return Err(err()),
        };
        self.sub = self.sub.unify(&x, &y).map_err(|_| err())?;
        Ok(())
    }

    fn go(&mut self, f: &DFormula, p: &[Term]) -> Result<MillFormula, TranslateError> {
        match f {
            DFormula::Atom(name, feats) => {
                let mut args = p.to_vec();
                args.extend(feats.iter().cloned());
                Ok(MillFormula::atom(name, args))
            }
            DFormula::UnitI | DFormula::UnitJ => Err(TranslateError::StandaloneUnit(f.to_string())),
            DFormula::Syn(op, a) => self.synthetic(f, *op, a, p),
            DFormula::Bin(op, a, b) => self.binary(f, *op, a, b, p),
        }
    }

    fn synthetic(&mut self, f: &DFormula, op: SynOp, a: &DFormula, p: &[Term]) -> Result<MillFormula, TranslateError> {
        let k = p.len();
        match op {
            SynOp::Check => {
                self.identify(f, &p[1], &p[2])?;
                let q: Vec<Term> = std::iter::once(p[0].clone()).chain(p[3..].iter().cloned()).collect();
                self.go(a, &q)
            }
            SynOp::Hat => {
                let x1 = self.fresh();
                let mut q = vec![p[0].clone(), x1.clone(), x1.clone()];
                q.extend(p[1..].iter().cloned());
                let body = self.go(a, &q)?;
                Ok(MillFormula::exists(x1.as_var().unwrap().clone(), body))
            }
            SynOp::RInj => {
                self.identify(f, &p[0], &p[1])?;
                self.go(a, &p[2..])
            }
            SynOp::RProj => {
                let x0 = self.fresh();
                let mut q = vec![x0.clone(), x0.clone()];
                q.extend(p.iter().cloned());
                let body = self.go(a, &q)?;
                Ok(MillFormula::forall(x0.as_var().unwrap().clone(), body))
            }
            SynOp::LInj => {
                self.identify(f, &p[k - 2], &p[k - 1])?;
                self.go(a, &p[..k - 2])
            }
            SynOp::LProj => {
                let x = self.fresh();
                let mut q = p.to_vec();
                q.push(x.clone());
                q.push(x.clone());
                let body = self.go(a, &q)?;
                Ok(MillFormula::forall(x.as_var().unwrap().clone(), body))
            }
        }
    }

    fn layout(&self, f: &DFormula, op: DOp, a: &DFormula, b: &DFormula) -> Result<Layout, TranslateError> {
        let s = self.sort_of(f)?;
        let (sa, sb) = (self.sort_of(a)?, self.sort_of(b)?);
        let l = |n: usize, m: usize, inputs: Vec<usize>, quantified: Vec<usize>, left: Vec<usize>, right: Vec<usize>, body: Body| Layout {
            n,
            m,
            inputs,
            quantified,
            left,
            right,
            body,
        };
        Ok(match op {
            DOp::Bullet => {
                let (n, m) = (2 * sa + 1, 2 * sb + 1);
                let (ni, mi) = (n as isize, m as isize);
                l(n, m, cat(&[r(0, ni - 1), r(n + 1, ni + mi)]), vec![n], r(0, ni), r(n, ni + mi), Body::Tensor)
            }
            DOp::Over => {
                let (n, m) = (2 * s + 1, 2 * sb + 1);
                let (ni, mi) = (n as isize, m as isize);
                l(n, m, r(0, ni), r(n + 1, ni + mi), r(n, ni + mi), cat(&[r(0, ni - 1), r(n + 1, ni + mi)]), Body::Lolli)
            }
            DOp::Under => {
                let (n, m) = (2 * sa + 1, 2 * s + 1);
                let (ni, mi) = (n as isize, m as isize);
                l(n, m, r(n, ni + mi), r(0, ni - 1), r(0, ni), cat(&[r(0, ni - 1), r(n + 1, ni + mi)]), Body::Lolli)
            }
            DOp::OdotGt => {
                let (n, m) = (2 * sb + 2, 2 * sa - 1);
                let (ni, mi) = (n as isize, m as isize);
                l(
                    n,
                    m,
                    cat(&[vec![0], r(2, ni - 1), r(n + 1, ni + mi)]),
                    vec![1, n],
                    cat(&[vec![0, 1], r(n, ni + mi)]),
                    r(1, ni),
                    Body::Tensor,
                )
            }
            DOp::UpGt => {
                let (n, m) = (2 * sb + 2, 2 * s - 1);
                let (ni, mi) = (n as isize, m as isize);
                l(
                    n,
                    m,
                    cat(&[vec![0, 1], r(n, ni + mi)]),
                    r(2, ni - 1),
                    r(1, ni),
                    cat(&[vec![0], r(2, ni - 1), r(n + 1, ni + mi)]),
                    Body::Lolli,
                )
            }
            DOp::DownGt => {
                let (n, m) = (2 * s + 2, 2 * sa - 1);
                let (ni, mi) = (n as isize, m as isize);
                l(
                    n,
                    m,
                    r(1, ni),
                    cat(&[vec![0], r(n + 1, ni + mi)]),
                    cat(&[vec![0, 1], r(n, ni + mi)]),
                    cat(&[vec![0], r(2, ni - 1), r(n + 1, ni + mi)]),
                    Body::Lolli,
                )
            }
            DOp::OdotLt => {
                let (n, m) = (2 * sa - 1, 2 * sb + 2);
                let (ni, mi) = (n as isize, m as isize);
                l(
                    n,
                    m,
                    cat(&[r(0, ni - 1), r(n + 1, ni + mi - 2), vec![n + m]]),
                    vec![n, n + m - 1],
                    cat(&[r(0, ni), vec![n + m - 1, n + m]]),
                    r(n, ni + mi - 1),
                    Body::Tensor,
                )
            }
            DOp::UpLt => {
                let (n, m) = (2 * s - 1, 2 * sb + 2);
                let (ni, mi) = (n as isize, m as isize);
                l(
                    n,
                    m,
                    cat(&[r(0, ni), vec![n + m - 1, n + m]]),
                    r(n + 1, ni + mi - 2),
                    r(n, ni + mi - 1),
                    cat(&[r(0, ni - 1), r(n + 1, ni + mi - 2), vec![n + m]]),
                    Body::Lolli,
                )
            }
            DOp::DownLt => {
                let (n, m) = (2 * sa - 1, 2 * s + 2);
                let (ni, mi) = (n as isize, m as isize);
                l(
                    n,
                    m,
                    r(n, ni + mi - 1),
                    cat(&[r(0, ni - 1), vec![n + m]]),
                    cat(&[r(0, ni), vec![n + m - 1, n + m]]),
                    cat(&[r(0, ni - 1), r(n + 1, ni + mi - 2), vec![n + m]]),
                    Body::Lolli,
                )
            }
        })
    }

    fn binary(&mut self, f: &DFormula, op: DOp, a: &DFormula, b: &DFormula, p: &[Term]) -> Result<MillFormula, TranslateError> {
        let lay = self.layout(f, op, a, b)?;
        debug_assert_eq!(lay.inputs.len(), p.len());
        let mut slots: Vec<Option<Term>> = vec![None; lay.n + lay.m + 1];
        for (i, t) in lay.inputs.iter().zip(p) {
            slots[*i] = Some(t.clone());
        }
        let mut bound = Vec::new();
        for &i in &lay.quantified {
            let v = self.fresh();
            bound.push(v.as_var().unwrap().clone());
            slots[i] = Some(v);
        }
        let pick = |ix: &[usize]| -> Vec<Term> { ix.iter().map(|&i| slots[i].clone().expect("slot assigned")).collect() };
        let (pl, pr) = (pick(&lay.left), pick(&lay.right));
        // `left` holds the slots of the first formula in the body: A for
        // products and downward/under, B (the argument) for over/up.
        let body = match (op, lay.body) {
            (DOp::Bullet | DOp::OdotGt | DOp::OdotLt, Body::Tensor) => {
                MillFormula::tensor(self.go(a, &pl)?, self.go(b, &pr)?)
            }
            (DOp::Under | DOp::DownGt | DOp::DownLt, Body::Lolli) => MillFormula::lolli(self.go(a, &pl)?, self.go(b, &pr)?),
            (DOp::Over | DOp::UpGt | DOp::UpLt, Body::Lolli) => MillFormula::lolli(self.go(b, &pl)?, self.go(a, &pr)?),
            _ => unreachable!("layout body matches connective"),
        };
        Ok(match lay.body {
            Body::Tensor => MillFormula::exists_all(bound, body),
            Body::Lolli => MillFormula::forall_all(bound, body),
        })
    }
}

/// Non-associative translation at depth `t`: `A•B` at `t` is
/// `A^{s(t)} ⊗ B^{s(t)}`, `C/B` at `s(t)` is `B^{s(t)} ⊸ C^{t}` and `A\C` at
/// `s(t)` is `A^{s(t)} ⊸ C^{t}`. The result is closed by one outermost
/// universal quantifier over the depth variable.
pub fn translate_nonassoc(f: &DFormula) -> Result<MillFormula, TranslateError> {
    let x = Var::fresh("X");
    let mut sub = Substitution::new();
    let body = nonassoc(f, &Term::Var(x), &mut sub)?.apply(&sub);
    let vars: Vec<Var> = body.free_vars().into_iter().collect();
    debug_assert!(vars.len() <= 1);
    Ok(MillFormula::forall_all(vars, body))
}

/// The open translation at depth `t`, returning the formula with all depth
/// instantiations applied.
pub fn translate_nonassoc_at(f: &DFormula, t: &Term) -> Result<MillFormula, TranslateError> {
    let mut sub = Substitution::new();
    Ok(nonassoc(f, t, &mut sub)?.apply(&sub))
}

fn predecessor(t: &Term, sub: &mut Substitution) -> Term {
    match sub.apply(t) {
        Term::App(f, args) if &*f == SUCC => args[0].clone(),
        other => {
            let u = Term::Var(Var::fresh("X"));
            match sub.unify(&other, &Term::succ(u.clone())) {
                Ok(s) => {
                    *sub = s;
                    u
                }
                // A constant depth has no predecessor; fall back to a
                // functor that can never match.
                Err(_) => Term::app("pred", vec![other]),
            }
        }
    }
}

fn nonassoc(f: &DFormula, t: &Term, sub: &mut Substitution) -> Result<MillFormula, TranslateError> {
    match f {
        DFormula::Atom(name, feats) => {
            let mut args = vec![t.clone()];
            args.extend(feats.iter().cloned());
            Ok(MillFormula::atom(name, args))
        }
        DFormula::Bin(DOp::Bullet, a, b) => {
            let st = Term::succ(t.clone());
            Ok(MillFormula::tensor(nonassoc(a, &st, sub)?, nonassoc(b, &st, sub)?))
        }
        DFormula::Bin(DOp::Over, c, b) => {
            let u = predecessor(t, sub);
            let arg = nonassoc(b, t, sub)?;
            Ok(MillFormula::lolli(arg, nonassoc(c, &u, sub)?))
        }
        DFormula::Bin(DOp::Under, a, c) => {
            let u = predecessor(t, sub);
            let arg = nonassoc(a, t, sub)?;
            Ok(MillFormula::lolli(arg, nonassoc(c, &u, sub)?))
        }
        other => Err(TranslateError::UnsupportedConnective(other.to_string())),
    }
}

/// Scope level `k` of the sentence category: `∀X. s(p0, p1, s^k(X))`.
/// Level `i` derives level `j` exactly when `i ≤ j`.
pub fn translate_scope(level: u32, positions: (Term, Term)) -> MillFormula {
    translate_scope_named("s", level, positions)
}

pub fn translate_scope_named(pred: &str, level: u32, positions: (Term, Term)) -> MillFormula {
    assert!(level >= 1, "scope levels start at 1");
    let x = Var::fresh("X");
    let mut t = Term::Var(x.clone());
    for _ in 0..level {
        t = Term::succ(t);
    }
    MillFormula::forall(x, MillFormula::atom(pred, vec![positions.0, positions.1, t]))
}

/// Erases quantifiers and atom arguments, leaving a propositional MILL
/// formula.
pub fn drop_quantifiers(f: &MillFormula) -> MillFormula {
    match f {
        MillFormula::Atom(p, _) => MillFormula::Atom(p.clone(), Vec::new()),
        MillFormula::Tensor(a, b) => MillFormula::tensor(drop_quantifiers(a), drop_quantifiers(b)),
        MillFormula::Lolli(a, b) => MillFormula::lolli(drop_quantifiers(a), drop_quantifiers(b)),
        MillFormula::Forall(_, b) | MillFormula::Exists(_, b) => drop_quantifiers(b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_d, parse_mill};
    use proptest::prelude::*;

    fn ints(xs: &[u32]) -> Vec<Term> {
        xs.iter().map(|&i| Term::int(i)).collect()
    }

    fn check(d: &str, at: &[u32], expected: &str) {
        let st = AtomSortTable::new();
        let got = translate_d(&parse_d(d).unwrap(), &ints(at), &st).unwrap();
        let want = parse_mill(expected).unwrap();
        assert!(got.alpha_eq(&want), "{} at {:?}:\n got  {}\n want {}", d, at, got, want);
    }

    #[test]
    fn determiner() {
        check("np / n", &[4, 5], "forall X. n(5,X) -o np(4,X)");
    }

    #[test]
    fn did() {
        check(
            "((vp ^ vp) / vp) \\ (vp ^ vp)",
            &[4, 5],
            "forall X0 X1 X2. [forall X3. vp(4,X3) -o vp(X1,X2) -o vp(X0,X3)] -o vp(X1,X2) -o vp(X0,5)",
        );
    }

    #[test]
    fn reflexive() {
        check(
            "((vp ^> np) ^< np) !< (vp ^> np)",
            &[3, 4],
            "forall X0 X1 X2 X5. [np(3,4) -o np(X1,X2) -o vp(X0,X5)] -o np(X1,X2) -o vp(X0,X5)",
        );
    }

    #[test]
    fn lambek_under() {
        check("a \\ c", &[1, 2], "forall X0. a(X0,1) -o c(X0,2)");
    }

    #[test]
    fn bridge_of_extraction() {
        let st = AtomSortTable::new();
        let (x0, x2) = (Term::Var(Var::fresh("x0")), Term::Var(Var::fresh("x2")));
        let got = translate_d(&parse_d("hat(a ^ b)").unwrap(), &[x0.clone(), x2.clone()], &st).unwrap();
        let v = Var::fresh("X1");
        let want = MillFormula::exists(
            v.clone(),
            MillFormula::lolli(
                MillFormula::atom("b", vec![Term::Var(v.clone()), Term::Var(v)]),
                MillFormula::atom("a", vec![x0, x2]),
            ),
        );
        assert!(got.alpha_eq(&want), "{}", got);
    }

    #[test]
    fn split_then_wrap_is_lp_implication() {
        let st = AtomSortTable::new();
        let xi = Term::Var(Var::fresh("xi"));
        let got = translate_d(&parse_d("check(a) ! b").unwrap(), &[xi.clone(), xi], &st).unwrap();
        let want = parse_mill("forall X0 X2. a(X0,X2) -o b(X0,X2)").unwrap();
        assert!(got.alpha_eq(&want), "{}", got);
    }

    #[test]
    fn units_desugar_to_synthetic_connectives() {
        assert_eq!(desugar_units(&parse_d("a ^> I").unwrap()).unwrap(), parse_d("check(a)").unwrap());
        assert_eq!(desugar_units(&parse_d("J \\ a").unwrap()).unwrap(), parse_d("rproj(a)").unwrap());
        assert_eq!(desugar_units(&parse_d("a / J").unwrap()).unwrap(), parse_d("lproj(a)").unwrap());
        assert!(matches!(desugar_units(&parse_d("a * I").unwrap()), Err(TranslateError::StandaloneUnit(_))));
    }

    #[test]
    fn identity_constraint_on_distinct_constants() {
        let st = AtomSortTable::new();
        let err = translate_d(&parse_d("check(a)").unwrap(), &ints(&[0, 1, 2, 3]), &st).unwrap_err();
        assert!(matches!(err, TranslateError::IdentityConstraint { .. }));
        let ok = translate_d(&parse_d("rinj(a)").unwrap(), &ints(&[1, 1, 2, 3]), &st).unwrap();
        assert_eq!(ok.to_string(), "a(2,3)");
    }

    #[test]
    fn arity_mismatch() {
        let st = AtomSortTable::new();
        assert!(matches!(
            translate_d(&parse_d("a").unwrap(), &ints(&[1, 2, 3, 4]), &st),
            Err(TranslateError::ArityMismatch { expected: 2, got: 4, .. })
        ));
    }

    #[test]
    fn features_follow_positions() {
        let st = AtomSortTable::new();
        let f = translate_d(&parse_d("np(nom)").unwrap(), &ints(&[1, 2]), &st).unwrap();
        assert_eq!(f.to_string(), "np(1,2,nom)");
    }

    #[test]
    fn nonassoc_examples() {
        let f = translate_nonassoc(&parse_d("a / b").unwrap()).unwrap();
        assert!(f.alpha_eq(&parse_mill("forall X. b(s(X)) -o a(X)").unwrap()), "{}", f);
        let g = translate_nonassoc(&parse_d("a").unwrap()).unwrap();
        assert!(g.alpha_eq(&parse_mill("forall X. a(X)").unwrap()));
        let h = translate_nonassoc(&parse_d("(a / b) / c").unwrap()).unwrap();
        assert!(h.alpha_eq(&parse_mill("forall X. c(s(s(X))) -o b(s(X)) -o a(X)").unwrap()), "{}", h);
        assert!(matches!(
            translate_nonassoc(&parse_d("a ^ b").unwrap()),
            Err(TranslateError::UnsupportedConnective(_))
        ));
    }

    #[test]
    fn scope_levels() {
        let f = translate_scope(3, (Term::int(0), Term::int(1)));
        assert!(f.alpha_eq(&parse_mill("forall X. s(0,1,s(s(s(X))))").unwrap()));
    }

    #[test]
    fn dropping_quantifiers() {
        let f = parse_mill("forall X. n(5,X) -o np(4,X)").unwrap();
        assert_eq!(drop_quantifiers(&f).to_string(), "n -o np");
        let st = AtomSortTable::new();
        let did = translate_d(&parse_d("((vp ^ vp) / vp) \\ (vp ^ vp)").unwrap(), &ints(&[4, 5]), &st).unwrap();
        assert_eq!(drop_quantifiers(&did).to_string(), "[vp -o vp -o vp] -o vp -o vp");
        assert_eq!(drop_quantifiers(&parse_mill("a").unwrap()).to_string(), "a");
    }

    fn lambek() -> impl Strategy<Value = DFormula> {
        let leaf = prop::sample::select(vec!["a", "b", "c"]).prop_map(DFormula::atom);
        leaf.prop_recursive(4, 16, 2, |inner| {
            (prop::sample::select(vec![DOp::Bullet, DOp::Under, DOp::Over]), inner.clone(), inner)
                .prop_map(|(op, a, b)| DFormula::bin(op, a, b))
        })
    }

    /// Two-position Lambek translation written out directly.
    fn lambek_oracle(f: &DFormula, x: Term, y: Term) -> MillFormula {
        match f {
            DFormula::Atom(n, _) => MillFormula::atom(n, vec![x, y]),
            DFormula::Bin(DOp::Bullet, a, b) => {
                let m = Var::fresh("m");
                let mt = Term::Var(m.clone());
                MillFormula::exists(m, MillFormula::tensor(lambek_oracle(a, x, mt.clone()), lambek_oracle(b, mt, y)))
            }
            DFormula::Bin(DOp::Over, c, b) => {
                let z = Var::fresh("z");
                let zt = Term::Var(z.clone());
                MillFormula::forall(z, MillFormula::lolli(lambek_oracle(b, y, zt.clone()), lambek_oracle(c, x, zt)))
            }
            DFormula::Bin(DOp::Under, a, c) => {
                let z = Var::fresh("z");
                let zt = Term::Var(z.clone());
                MillFormula::forall(z, MillFormula::lolli(lambek_oracle(a, zt.clone(), x), lambek_oracle(c, zt, y)))
            }
            _ => unreachable!(),
        }
    }

    pub(crate) fn arb_d_no_units() -> impl Strategy<Value = DFormula> {
        let leaf = prop::sample::select(vec!["a", "b", "c"]).prop_map(DFormula::atom);
        leaf.prop_recursive(4, 20, 2, |inner| {
            let ops = vec![
                DOp::Bullet, DOp::Under, DOp::Over, DOp::OdotGt, DOp::UpGt,
                DOp::DownGt, DOp::OdotLt, DOp::UpLt, DOp::DownLt,
            ];
            let syn = vec![SynOp::Check, SynOp::Hat, SynOp::RProj, SynOp::RInj, SynOp::LProj, SynOp::LInj];
            prop_oneof![
                3 => (prop::sample::select(ops), inner.clone(), inner.clone()).prop_map(|(op, a, b)| DFormula::bin(op, a, b)),
                1 => (prop::sample::select(syn), inner).prop_map(|(op, a)| DFormula::syn(op, a)),
            ]
        })
    }

    fn sort0(f: &DFormula) -> bool {
        sort(f, &AtomSortTable::new()) == Ok(0)
    }

    proptest! {
        #[test]
        fn lambek_fidelity(f in lambek()) {
            let st = AtomSortTable::new();
            let got = translate_d(&f, &ints(&[1, 2]), &st).unwrap();
            prop_assert!(got.alpha_eq(&lambek_oracle(&f, Term::int(1), Term::int(2))), "{}", got);
        }

        #[test]
        fn left_and_right_variants_coincide_at_sort_zero(c in lambek(), b in lambek()) {
            let st = AtomSortTable::new();
            prop_assume!(sort0(&c) && sort0(&b));
            let p = ints(&[1, 2, 3, 4]);
            let up_gt = translate_d(&DFormula::bin(DOp::UpGt, c.clone(), b.clone()), &p, &st).unwrap();
            let up_lt = translate_d(&DFormula::bin(DOp::UpLt, c.clone(), b.clone()), &p, &st).unwrap();
            prop_assert!(up_gt.alpha_eq(&up_lt));
            let a = DFormula::bin(DOp::UpGt, c.clone(), b.clone());
            let q = ints(&[1, 2]);
            let down_gt = translate_d(&DFormula::bin(DOp::DownGt, a.clone(), b.clone()), &q, &st).unwrap();
            let down_lt = translate_d(&DFormula::bin(DOp::DownLt, a, b), &q, &st).unwrap();
            prop_assert!(down_gt.alpha_eq(&down_lt));
        }

        #[test]
        fn free_variables_come_from_positions(f in arb_d_no_units(), seed in 0u32..5) {
            let st = AtomSortTable::new().with("c", 1);
            if let Ok(k) = crate::formula::position_arity(&f, &st) {
                let vars: Vec<Var> = (0..k).map(|i| Var::fresh(&format!("p{}", i))).collect();
                let p: Vec<Term> = vars.iter().enumerate()
                    .map(|(i, v)| if (i as u32 + seed).is_multiple_of(2) { Term::Var(v.clone()) } else { Term::int(i as u32) })
                    .collect();
                if let Ok(g) = translate_d(&f, &p, &st) {
                    for v in g.free_vars() {
                        prop_assert!(vars.contains(&v));
                    }
                    let binders = g.binders();
                    let distinct: std::collections::BTreeSet<_> = binders.iter().collect();
                    prop_assert_eq!(distinct.len(), binders.len());
                }
            }
        }
    }
}
