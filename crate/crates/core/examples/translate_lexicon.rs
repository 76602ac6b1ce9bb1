//! Translating Displacement-calculus lexical entries into MILL1 formulas at
//! their string positions.

use std::path::Path;

use mill1::grammar::{load_lexicon, EntryBody, Sentence};

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("lexicons/ellipsis.lex");
    let lex = load_lexicon(&path, false).expect("lexicon");
    let sentence = Sentence::new("John left before Mary did", lex.base);

    for (i, word) in sentence.words.iter().enumerate() {
        let (l, r) = sentence.span(i);
        for entry in lex.lookup(word).expect("known word") {
            let f = lex.instantiate(entry, l, r).expect("translation");
            println!("{}  [{l},{r}]", entry.constant());
            match &entry.body {
                EntryBody::D(d) => println!("    D:     {}", d.unicode()),
                EntryBody::Schema { formula, .. } => println!("    schema: {}", formula.unicode()),
            }
            println!("    MILL1: {}", f.unicode());
        }
    }

    let goal = lex.goal(&mill1::formula::parse_d("s").unwrap(), sentence.first(), sentence.last()).unwrap();
    println!("goal: {}", goal.unicode());
}
