//! VP ellipsis with a discontinuous auxiliary: parse, sequentialize and read
//! off the lambda term.

use std::path::Path;

use mill1::formula::parse_d;
use mill1::grammar::{load_lexicon, parse, Sentence};
use mill1::prover::ProverConfig;

fn main() {
    let lex = load_lexicon(Path::new(env!("CARGO_MANIFEST_DIR")).join("lexicons/ellipsis.lex"), false).unwrap();
    let sentence = Sentence::new("John left before Mary did", lex.base);
    let out = parse(&lex, &sentence, &parse_d("s").unwrap(), &ProverConfig::default()).unwrap();

    println!("{} reading(s) from {} lexical choice(s)", out.readings.len(), out.sequents);
    for r in &out.readings {
        println!("{}", r.built.sequent.render(true));
        println!("  axioms: {}", r.proof.describe_axioms().join(", "));
        match &r.term {
            Ok(t) => println!("  term:   {}\n  typed:  {}", t, t.annotated()),
            Err(e) => println!("  no term: {e}"),
        }
    }
    for s in &out.stats {
        println!("{s}");
    }
}
