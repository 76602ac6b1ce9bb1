//! Two uses of first-order variables beyond string positions: scope levels
//! on the sentence category and a depth counter that makes composition
//! non-associative.

use mill1::formula::{parse_d, AtomSortTable};
use mill1::prover::prove;
use mill1::term::Term;
use mill1::translate::{translate_d, translate_nonassoc, translate_scope};

fn main() {
    let pos = || (Term::int(0), Term::int(1));
    for i in 1..=3 {
        let row: Vec<&str> = (1..=3)
            .map(|j| {
                let ok = !prove(&[translate_scope(i, pos())], &translate_scope(j, pos()), None).unwrap().is_empty();
                if ok {
                    "yes"
                } else {
                    "no"
                }
            })
            .collect();
        println!("s{i} |- s1 s2 s3: {}", row.join(" "));
    }

    let d = |s: &str| parse_d(s).unwrap();
    let st = AtomSortTable::new();
    let at = |s: &str, l, r| translate_d(&d(s), &[Term::int(l), Term::int(r)], &st).unwrap();
    let assoc = prove(&[at("a / b", 0, 1), at("b / c", 1, 2)], &at("a / c", 0, 2), None).unwrap();
    println!("positions:  a/b, b/c |- a/c  {} proof(s)", assoc.len());

    let na: Vec<_> = ["a / b", "b / c", "a / c"].iter().map(|s| translate_nonassoc(&d(s)).unwrap()).collect();
    for f in &na {
        println!("  {}", f.unicode());
    }
    let strict = prove(&na[..2], &na[2], None).unwrap();
    println!("depth:      a/b, b/c |- a/c  {} proof(s)", strict.len());
}
