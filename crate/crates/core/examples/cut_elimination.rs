//! Composing two nets with a cut and eliminating it.

use std::sync::Arc;

use mill1::formula::{parse_sequent, Polarity};
use mill1::proofnet::{compose_cut, eliminate_cut_traced, unfold_sequent};
use mill1::prover::prove_frame;

fn only_proof(text: &str) -> mill1::proofnet::ProofStructure {
    let frame = Arc::new(unfold_sequent(&parse_sequent(text).unwrap()));
    prove_frame(frame, &Default::default()).unwrap().proofs.remove(0)
}

fn main() {
    // a, b |- a * b   cut against   a * b, (a * b) -o c |- c
    let left = only_proof("a, b |- a * b");
    let right = only_proof("a * b, (a * b) -o c |- c");
    let a_pos = left.frame.conclusions.iter().copied().find(|&c| left.frame.nodes[c].polarity == Polarity::Positive).unwrap();
    let a_neg = right.frame.conclusions[0];
    let cut = compose_cut(&left, a_pos, &right, a_neg).unwrap();
    println!("with cut:    net={} cuts={}", cut.is_net(), cut.has_cuts());

    let (free, cases) = eliminate_cut_traced(&cut);
    println!("eliminated:  net={} cuts={}", free.is_net(), free.has_cuts());
    println!("cases: {:?}", cases);
    println!("axioms: {}", free.describe_axioms().join(", "));
}
