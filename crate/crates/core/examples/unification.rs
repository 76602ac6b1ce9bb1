//! First-order unification over position terms, with the occurs check and
//! rigid eigenvariables.

use mill1::term::{Substitution, Term, Var};

fn show(label: &str, s: &Substitution, a: &Term, b: &Term) {
    match s.unify(a, b) {
        Ok(u) => println!("{label}: {a} = {b}  ~>  {u}"),
        Err(e) => println!("{label}: {a} = {b}  fails: {e}"),
    }
}

fn main() {
    let x = Term::Var(Var::fresh("X"));
    let y = Term::Var(Var::fresh("Y"));
    let w = Term::Var(Var::fresh_rigid("w"));
    let empty = Substitution::new();

    show("positions", &empty, &Term::app("p", vec![x.clone(), Term::int(3)]), &Term::app("p", vec![Term::int(1), y.clone()]));
    show("clash", &empty, &Term::int(1), &Term::int(2));
    show("occurs", &empty, &x, &Term::succ(x.clone()));
    show("meta to eigen", &empty, &x, &w);
    show("eigen is rigid", &empty, &w, &Term::int(0));

    // Bindings accumulate; later unifications see earlier ones.
    let s = empty.unify(&x, &Term::succ(y.clone())).unwrap();
    show("chained", &s, &x, &Term::succ(Term::int(4)));
}
