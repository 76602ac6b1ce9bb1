//! A verb cluster built with split-wrap and right projection, derived as a
//! VP spanning positions 1 to 5.

use std::path::Path;

use mill1::formula::parse_d;
use mill1::grammar::{load_lexicon, parse, Sentence};
use mill1::prover::ProverConfig;

fn main() {
    let lex = load_lexicon(Path::new(env!("CARGO_MANIFEST_DIR")).join("lexicons/verb_cluster.lex"), false).unwrap();
    let goal = parse_d("np \\ s").unwrap();
    let sentence = Sentence::new("boeken wil kunnen lezen", lex.base);
    println!("goal: {}", lex.goal(&goal, sentence.first(), sentence.last()).unwrap().unicode());

    let out = parse(&lex, &sentence, &goal, &ProverConfig::default()).unwrap();
    for r in &out.readings {
        for (name, f) in r.built.names.iter().zip(&r.built.sequent.antecedent) {
            println!("  {name}: {}", f.unicode());
        }
        println!("  term: {}", r.term.as_ref().map(|t| t.to_string()).unwrap_or_default());
    }
}
