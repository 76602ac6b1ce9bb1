use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use mill1::formula::{parse_d, parse_sequent, AtomSortTable, MillFormula};
use mill1::grammar::{load_lexicon, parse, ParseOutcome, Sentence};
use mill1::oracle::{
    all_structures, brute_force_nets, confluence_check, criterion_check, cut_elimination_check, random_cut_pair, random_sequent, random_structure, GenConfig,
};
use mill1::proofnet::{unfold_sequent, Contracted, EdgeKind};
use mill1::prover::{prove_frame, prove_sequent, prove_with, ProverConfig};
use mill1::semantics::{lexical_types, type_check};
use mill1::term::Term;
use mill1::translate::{translate_d, translate_nonassoc, translate_scope};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FORALL_EXISTS: &str = "forall x. exists y. f(x,y) |- exists v. forall w. f(w,v)";
const EXISTS_FORALL: &str = "exists x. forall y. f(x,y) |- forall v. exists w. f(w,v)";

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Instant, limit: Duration) -> Result<(), String> {
    let e = t.elapsed();
    ensure(e < limit, || format!("took {:.2?}, limit {:?}", e, limit))
}

fn lexicon(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("lexicons").join(name)
}

fn count_proofs(seq: &str) -> Result<usize, String> {
    let s = parse_sequent(seq).map_err(|e| e.to_string())?;
    prove_sequent(&s, None).map(|p| p.len()).map_err(|e| e.to_string())
}

fn quantifier_swaps() -> Check {
    let t = Instant::now();
    let (n1, n2) = (count_proofs(FORALL_EXISTS)?, count_proofs(EXISTS_FORALL)?);
    ensure(n1 == 0, || format!("underivable swap has {} proofs", n1))?;
    ensure(n2 == 1, || format!("derivable swap has {} proofs", n2))?;
    within(t, Duration::from_secs(1))?;
    Ok("0 and 1 proofs".into())
}

fn hints(set: &BTreeSet<mill1::term::Var>) -> BTreeSet<String> {
    set.iter().map(|v| v.hint().to_string()).collect()
}

fn only_structure(seq: &str) -> Result<mill1::proofnet::ProofStructure, String> {
    let frame = Arc::new(unfold_sequent(&parse_sequent(seq).map_err(|e| e.to_string())?));
    let mut all = all_structures(&frame);
    ensure(all.len() == 1, || format!("{} structures for {}", all.len(), seq))?;
    Ok(all.remove(0))
}

fn traces() -> Check {
    let stuck = match only_structure(FORALL_EXISTS)?.contraction_graph().contract() {
        Contracted::Stuck(g) => g,
        Contracted::Net(_) => return Err("underivable swap contracted to a net".into()),
    };
    let wy: BTreeSet<String> = ["w", "y"].iter().map(|s| s.to_string()).collect();
    let eig: BTreeSet<String> = stuck
        .live_edges()
        .iter()
        .filter_map(|(_, e)| match &e.kind {
            EdgeKind::Universal(x) => Some(x.hint().to_string()),
            _ => None,
        })
        .collect();
    ensure(eig == wy, || format!("remaining universal edges carry {:?}", eig))?;
    ensure(stuck.labels().iter().any(|l| hints(l) == wy), || "no vertex labelled {w,y}".into())?;
    let net = only_structure(EXISTS_FORALL)?.contraction_graph().contract();
    ensure(net.is_net() && net.graph().vertex_count() == 1, || "derivable swap did not reach one vertex".into())?;
    Ok(format!("stuck with {} vertices; net in {} steps", stuck.vertex_count(), net.graph().trace.len()))
}

fn golden(lex: &str, words: &str, goal: &str) -> Result<ParseOutcome, String> {
    let lex = load_lexicon(lexicon(lex), false).map_err(|e| e.to_string())?;
    let sentence = Sentence::new(words, lex.base);
    let goal = parse_d(goal).map_err(|e| e.to_string())?;
    parse(&lex, &sentence, &goal, &ProverConfig::default()).map_err(|e| e.to_string())
}

fn golden_a() -> Check {
    let t = Instant::now();
    let out = golden("ellipsis.lex", "John left before Mary did", "s")?;
    ensure(out.readings.len() == 1, || format!("{} readings", out.readings.len()))?;
    let r = &out.readings[0];
    let goal = r.built.sequent.succedent.to_string();
    ensure(goal == "s(0,5)", || format!("goal {}", goal))?;
    let term = r.term.clone().map_err(|e| format!("term extraction: {}", e))?;
    let ty = type_check(&term, &lexical_types(&r.proof, &r.built.names)).map_err(|e| e.to_string())?;
    ensure(ty.to_string() == "s", || format!("term has type {}", ty))?;
    within(t, Duration::from_secs(5))?;
    Ok(format!("{} : {}", term, ty))
}

fn golden_b() -> Check {
    let t = Instant::now();
    let out = golden("nijlpaarden.lex", "Jan Henk Cecilia de nijlpaarden zag helpen voeren", "s")?;
    ensure(out.readings.len() == 1, || format!("{} readings", out.readings.len()))?;
    let goal = out.readings[0].built.sequent.succedent.to_string();
    ensure(goal == "s(1,9)", || format!("goal {}", goal))?;
    let steps: Vec<_> = out.stats.iter().flat_map(|s| s.steps.iter()).collect();
    ensure(steps.iter().all(|s| s.survivors == 1), || {
        let bad: Vec<String> = steps.iter().filter(|s| s.survivors != 1).map(|s| format!("depth {}: {} survivors", s.depth, s.survivors)).collect();
        format!("nondeterministic steps: {}", bad.join(", "))
    })?;
    within(t, Duration::from_secs(5))?;
    Ok(format!("{} steps, each with one survivor", steps.len()))
}

fn verb_cluster() -> Check {
    let out = golden("verb_cluster.lex", "boeken wil kunnen lezen", "np \\ s")?;
    ensure(!out.readings.is_empty(), || "no derivation".into())?;
    let r = &out.readings[0];
    Ok(format!("{} reading(s); {}", out.readings.len(), r.term.clone().map(|t| t.to_string()).unwrap_or_default()))
}

fn scope_ladder() -> Check {
    let pos = || (Term::int(0), Term::int(1));
    for i in 1..=3 {
        for j in 1..=3 {
            let t = Instant::now();
            let out = prove_with(&[translate_scope(i, pos())], &translate_scope(j, pos()), &ProverConfig::default()).map_err(|e| e.to_string())?;
            let derivable = !out.proofs.is_empty();
            ensure(derivable == (i <= j), || format!("s{} ⊢ s{}: derivable = {}", i, j, derivable))?;
            within(t, Duration::from_secs(1))?;
        }
    }
    Ok("9 calls".into())
}

fn nonassoc() -> Check {
    let st = AtomSortTable::new();
    let d = |s: &str| parse_d(s).map_err(|e| e.to_string());
    let at = |f: &str, l: u32, r: u32| -> Result<MillFormula, String> { translate_d(&d(f)?, &[Term::int(l), Term::int(r)], &st).map_err(|e| e.to_string()) };
    let assoc = prove_with(&[at("a / b", 0, 1)?, at("b / c", 1, 2)?], &at("a / c", 0, 2)?, &ProverConfig::default()).map_err(|e| e.to_string())?;
    ensure(!assoc.proofs.is_empty(), || "associative translation does not derive a/b, b/c ⊢ a/c".into())?;
    let na = |f: &str| -> Result<MillFormula, String> { translate_nonassoc(&d(f)?).map_err(|e| e.to_string()) };
    let strict = prove_with(&[na("a / b")?, na("b / c")?], &na("a / c")?, &ProverConfig::default()).map_err(|e| e.to_string())?;
    ensure(strict.proofs.is_empty(), || "non-associative translation derives a/b, b/c ⊢ a/c".into())?;
    Ok("associative: derivable; successor encoding: underivable".into())
}

fn criterion_equivalence() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cfg = GenConfig {
        max_async: 4,
        preds: 3,
        ..GenConfig::default()
    };
    let mut nets = 0;
    for i in 0..10_000 {
        let ps = random_structure(&mut rng, &cfg);
        match criterion_check(&ps) {
            Ok(net) => nets += net as usize,
            Err(d) => return Err(format!("structure {}: {:?}", i, d)),
        }
    }
    within(t, Duration::from_secs(60))?;
    Ok(format!("10000 structures, {} nets, in {:.1?}", nets, t.elapsed()))
}

fn confluence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let cfg = GenConfig::default();
    for i in 0..1000 {
        let ps = random_structure(&mut rng, &cfg);
        ensure(confluence_check(&ps.contraction_graph(), 20, &mut rng), || format!("graph {} of {}", i, mill1::oracle::structure_sequent(&ps)))?;
    }
    Ok("1000 graphs × 20 orders".into())
}

fn cut_elimination() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = GenConfig::default();
    for i in 0..100 {
        let ps = random_cut_pair(&mut rng, &cfg);
        ensure(ps.has_cuts(), || format!("pair {} has no cut", i))?;
        cut_elimination_check(&ps).map_err(|e| format!("pair {}: {}", i, e))?;
    }
    Ok("100 pairs".into())
}

fn completeness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = GenConfig {
        max_literals: 8,
        max_async: 6,
        ..GenConfig::default()
    };
    let mut provable = 0;
    for i in 0..2000 {
        let seq = random_sequent(&mut rng, &cfg);
        let frame = Arc::new(unfold_sequent(&seq));
        let expected: BTreeSet<_> = brute_force_nets(&frame).iter().map(|p| p.matching_key()).collect();
        let found = prove_frame(frame, &ProverConfig::default()).map_err(|e| e.to_string())?;
        let got: BTreeSet<_> = found.proofs.iter().map(|p| p.matching_key()).collect();
        ensure(got == expected, || format!("sequent {} ({}): prover {:?}, brute force {:?}", i, seq, got, expected))?;
        provable += !got.is_empty() as usize;
    }
    Ok(format!("2000 sequents, {} provable", provable))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("quantifier swaps", quantifier_swaps),
        ("contraction trace fidelity", traces),
        ("golden parse: ellipsis", golden_a),
        ("golden parse: cross-serial", golden_b),
        ("verb cluster", verb_cluster),
        ("scope ladder", scope_ladder),
        ("non-associativity", nonassoc),
        ("criterion equivalence", criterion_equivalence),
        ("confluence", confluence),
        ("cut elimination", cut_elimination),
        ("search completeness", completeness),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = check();
        let took = t.elapsed();
        match res {
            Ok(note) => println!("PASS {:>2} {:<28} {:>9.2?}  {}", i + 1, name, took, note),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {:<28} {:>9.2?}  {}", i + 1, name, took, why);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
