//! Dutch cross-serial dependencies with hand-written first-order entries.
//! Every search step has exactly one surviving candidate.

use std::path::Path;

use mill1::formula::parse_d;
use mill1::grammar::{load_lexicon, parse, Sentence};
use mill1::prover::ProverConfig;

fn main() {
    let lex = load_lexicon(Path::new(env!("CARGO_MANIFEST_DIR")).join("lexicons/nijlpaarden.lex"), false).unwrap();
    let sentence = Sentence::new("Jan Henk Cecilia de nijlpaarden zag helpen voeren", lex.base);
    let out = parse(&lex, &sentence, &parse_d("s").unwrap(), &ProverConfig::default()).unwrap();

    for r in &out.readings {
        println!("{}", r.built.sequent.render(true));
        println!("  term: {}", r.term.as_ref().map(|t| t.to_string()).unwrap_or_default());
    }
    let stats = &out.stats[0];
    for s in &stats.steps {
        println!("  depth {:>2}  literal {:>2}  candidates {}  survivors {}", s.depth, s.literal, s.candidates, s.survivors);
    }
    println!("deterministic: {}", stats.deterministic());
}
