//! Natural deduction proofs and linear lambda terms read off proof nets.

use mill1::formula::parse_sequent;
use mill1::prover::prove_sequent;
use mill1::semantics::{default_names, extract};

fn main() {
    for text in [
        "a -o b, b -o c |- a -o c",
        "a * b |- b * a",
        "a |- (a -o b) -o b",
        "forall x. p(x) -o q(x), p(0) |- q(0)",
    ] {
        let seq = parse_sequent(text).unwrap();
        println!("{}", seq.render(true));
        for ps in prove_sequent(&seq, None).unwrap() {
            let names = default_names(&ps);
            match extract(&ps, &names) {
                Ok((nd, term)) => println!("  {}   ({} rules)", term.annotated(), nd.size()),
                Err(e) => println!("  {e}"),
            }
        }
    }
}
