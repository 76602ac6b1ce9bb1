//! The `mill1` command line.
//!
//! Exit codes: 0 success, 1 unprovable, 2 syntax, 3 resources, 4 lexicon,
//! 5 property failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::formula::{parse_d, parse_sequent, Sequent};
use crate::grammar::{load_lexicon, parse, GrammarError, Lexicon, ParseError, Sentence};
use crate::oracle::{confluence_check, criterion_check, cut_elimination_check, random_cut_pair, random_structure, GenConfig};
use crate::proofnet::{render_dot, render_graph_dot, unfold_sequent, ProofStructure};
use crate::prover::{prove_frame, ProveError, ProverConfig, Stats};
use crate::semantics::{default_names, extract};
use crate::syntax::SyntaxError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNPROVABLE: i32 = 1;
pub const EXIT_SYNTAX: i32 = 2;
pub const EXIT_RESOURCES: i32 = 3;
pub const EXIT_LEXICON: i32 = 4;
pub const EXIT_PROPERTY: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "mill1", version, about = "Proof-net theorem prover for first-order multiplicative intuitionistic linear logic")]
pub struct Cli {
    /// Emit line-oriented key=value records.
    #[arg(long, global = true)]
    pub machine: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct SearchOpts {
    /// Stop after N proofs.
    #[arg(long)]
    pub limit: Option<usize>,
    /// Print search statistics.
    #[arg(long)]
    pub stats: bool,
    /// Worker threads for the root of the search.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Write one DOT file per proof into this directory.
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Prove a sequent `A1, ..., An |- C`.
    Prove {
        /// The sequent, inline.
        sequent: Option<String>,
        /// Read the sequent from a file instead.
        #[arg(long)]
        file: Option<PathBuf>,
        #[command(flatten)]
        search: SearchOpts,
    },
    /// Parse a sentence with a lexicon.
    Parse {
        #[arg(long)]
        lexicon: PathBuf,
        /// Goal category (a D formula of sort 0).
        #[arg(long, default_value = "s")]
        goal: String,
        /// Override the lexicon's position base.
        #[arg(long)]
        base: Option<u32>,
        #[arg(long)]
        allow_nonsimple: bool,
        #[command(flatten)]
        search: SearchOpts,
        #[arg(required = true)]
        words: Vec<String>,
    },
    /// Print the MILL1 translation of a lexical entry.
    Translate {
        #[arg(long)]
        lexicon: PathBuf,
        word: String,
        /// Span of the word.
        #[arg(long, num_args = 2, value_names = ["I", "J"])]
        pos: Vec<u32>,
        #[arg(long)]
        allow_nonsimple: bool,
    },
    /// DOT for every proof structure of a sequent, nets or not.
    Render {
        sequent: String,
        /// Render the contraction normal form instead of the structure.
        #[arg(long)]
        graph: bool,
        /// Write files into this directory instead of stdout.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Randomized check of the contraction criterion against switchings.
    Oracle {
        #[arg(long, default_value_t = 4)]
        max_async: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random contraction orders tried per structure.
        #[arg(long, default_value_t = 20)]
        orders: usize,
    },
    /// Cut elimination on randomly composed nets.
    Cutelim {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    machine: bool,
}

fn quote(v: &str) -> String {
    if v.is_empty() || v.contains(char::is_whitespace) || v.contains('"') {
        format!("\"{}\"", v.replace('\\', "\\\\").replace('"', "\\\""))
    } else {
        v.to_string()
    }
}

impl Io<'_> {
    fn record(&mut self, fields: &[(&str, String)]) {
        let line: Vec<String> = fields.iter().map(|(k, v)| format!("{}={}", k, quote(v))).collect();
        let _ = writeln!(self.out, "{}", line.join(" "));
    }

    fn say(&mut self, text: impl AsRef<str>) {
        let _ = writeln!(self.out, "{}", text.as_ref());
    }

    fn fail(&mut self, code: i32, msg: impl AsRef<str>) -> i32 {
        if self.machine {
            self.record(&[("error", msg.as_ref().to_string()), ("exit", code.to_string())]);
        } else {
            let _ = writeln!(self.err, "error: {}", msg.as_ref());
        }
        code
    }

    fn stats(&mut self, s: &Stats) {
        if self.machine {
            let mut f = vec![("stats", "search".to_string()), ("expansions", s.expansions.to_string())];
            for (r, n) in &s.prunes {
                f.push((r.name(), n.to_string()));
            }
            f.push(("proofs", s.proofs.to_string()));
            f.push(("wall_ms", format!("{:.3}", s.wall.as_secs_f64() * 1e3)));
            self.record(&f);
        } else {
            self.say(s.to_string());
        }
    }
}

fn syntax_code(_: &SyntaxError) -> i32 {
    EXIT_SYNTAX
}

fn grammar_code(_: &GrammarError) -> i32 {
    EXIT_LEXICON
}

fn write_dots(dir: &Path, stem: &str, proofs: &[ProofStructure]) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (i, p) in proofs.iter().enumerate() {
        let path = dir.join(format!("{}_{}.dot", stem, i));
        std::fs::write(&path, render_dot(p))?;
        paths.push(path);
    }
    Ok(paths)
}

fn prover_config(s: &SearchOpts) -> ProverConfig {
    ProverConfig {
        limit: s.limit,
        jobs: s.jobs.max(1),
        ..ProverConfig::default()
    }
}

fn cmd_prove(io: &mut Io, seq: &Sequent, search: &SearchOpts) -> i32 {
    let frame = Arc::new(unfold_sequent(seq));
    let out = match prove_frame(frame, &prover_config(search)) {
        Ok(o) => o,
        Err(e @ ProveError::ResourceLimit { .. }) => return io.fail(EXIT_RESOURCES, e.to_string()),
    };
    let n = out.proofs.len();
    if io.machine {
        io.record(&[("sequent", seq.to_string()), ("proofs", n.to_string())]);
    } else {
        io.say(format!("{}\n{} proof{}", seq.render(true), n, if n == 1 { "" } else { "s" }));
    }
    for (i, p) in out.proofs.iter().enumerate() {
        let term = extract(p, &default_names(p)).map(|(_, t)| t.to_string()).unwrap_or_else(|e| format!("<{}>", e));
        if io.machine {
            io.record(&[("proof", i.to_string()), ("axioms", p.describe_axioms().join("; ")), ("term", term)]);
        } else {
            io.say(format!("proof {}: {}", i, p.describe_axioms().join(", ")));
            io.say(format!("  term: {}", term));
        }
    }
    if search.stats {
        io.stats(&out.stats);
    }
    if let Some(dir) = &search.dot {
        if let Err(e) = write_dots(dir, "proof", &out.proofs) {
            return io.fail(EXIT_RESOURCES, e.to_string());
        }
    }
    if n > 0 {
        EXIT_OK
    } else {
        EXIT_UNPROVABLE
    }
}

fn load(io: &mut Io, path: &Path, allow_nonsimple: bool) -> Result<Lexicon, i32> {
    let lex = load_lexicon(path, allow_nonsimple).map_err(|e| io.fail(grammar_code(&e), e.to_string()))?;
    for w in &lex.warnings {
        let _ = writeln!(io.err, "warning: {}", w);
    }
    Ok(lex)
}

fn cmd_parse(io: &mut Io, lexicon: &Path, goal: &str, base: Option<u32>, allow: bool, search: &SearchOpts, words: &[String]) -> i32 {
    let lex = match load(io, lexicon, allow) {
        Ok(l) => l,
        Err(c) => return c,
    };
    let goal_f = match parse_d(goal) {
        Ok(g) => g,
        Err(e) => return io.fail(syntax_code(&e), format!("goal: {}", e)),
    };
    let sentence = Sentence::new(&words.join(" "), base.unwrap_or(lex.base));
    let out = match parse(&lex, &sentence, &goal_f, &prover_config(search)) {
        Ok(o) => o,
        Err(ParseError::Grammar(e)) => return io.fail(grammar_code(&e), e.to_string()),
        Err(ParseError::Prove(e)) => return io.fail(EXIT_RESOURCES, e.to_string()),
    };
    let n = out.readings.len();
    let goal_text = if goal_f.to_string().contains(' ') {
        format!("({})({},{})", goal_f, sentence.first(), sentence.last())
    } else {
        format!("{}({},{})", goal_f, sentence.first(), sentence.last())
    };
    if io.machine {
        io.record(&[("sentence", sentence.words.join(" ")), ("goal", goal_text), ("parses", n.to_string())]);
    } else {
        io.say(format!("{}  ⊢ {}\n{} parse{}", sentence.words.join(" "), goal_text, n, if n == 1 { "" } else { "s" }));
    }
    for (i, r) in out.readings.iter().enumerate() {
        let term = r.term.clone().map(|t| t.to_string()).unwrap_or_else(|e| format!("<{}>", e));
        let entries = r.built.names.join(" ");
        if io.machine {
            io.record(&[("parse", i.to_string()), ("entries", entries), ("term", term), ("axioms", r.proof.describe_axioms().join("; "))]);
        } else {
            io.say(format!("parse {}: {}", i, entries));
            io.say(format!("  goal: {}", r.built.sequent.succedent.render(&mut Default::default(), true)));
            io.say(format!("  term: {}", term));
        }
    }
    if search.stats {
        for s in &out.stats {
            io.stats(s);
        }
    }
    if let Some(dir) = &search.dot {
        let proofs: Vec<ProofStructure> = out.readings.iter().map(|r| r.proof.clone()).collect();
        if let Err(e) = write_dots(dir, "parse", &proofs) {
            return io.fail(EXIT_RESOURCES, e.to_string());
        }
    }
    if n > 0 {
        EXIT_OK
    } else {
        EXIT_UNPROVABLE
    }
}

fn cmd_translate(io: &mut Io, lexicon: &Path, word: &str, pos: &[u32], allow: bool) -> i32 {
    let lex = match load(io, lexicon, allow) {
        Ok(l) => l,
        Err(c) => return c,
    };
    let Some(entries) = lex.lookup(word) else {
        return io.fail(EXIT_LEXICON, GrammarError::UnknownWord(word.to_string()).to_string());
    };
    let (l, r) = match pos {
        [l, r] => (*l, *r),
        _ => (lex.base, lex.base + 1),
    };
    for e in entries {
        match lex.instantiate(e, l, r) {
            Ok(f) => {
                if io.machine {
                    io.record(&[("word", e.word.clone()), ("entry", e.index.to_string()), ("formula", f.to_string())]);
                } else {
                    io.say(format!("{}_{} @ ({},{}): {}", e.word, e.index, l, r, f.unicode()));
                }
            }
            Err(err) => return io.fail(EXIT_LEXICON, err.to_string()),
        }
    }
    EXIT_OK
}

fn cmd_render(io: &mut Io, seq: &Sequent, graph: bool, dir: Option<&Path>) -> i32 {
    let frame = Arc::new(unfold_sequent(seq));
    let all = crate::oracle::all_structures(&frame);
    if all.is_empty() {
        return io.fail(EXIT_UNPROVABLE, "no proof structure: the literals cannot be matched");
    }
    for (i, ps) in all.iter().enumerate() {
        let contracted = ps.contraction_graph().contract();
        let dot = if graph { render_graph_dot(contracted.graph()) } else { render_dot(ps) };
        match dir {
            Some(d) => {
                let path = d.join(format!("structure_{}.dot", i));
                if let Err(e) = std::fs::create_dir_all(d).and_then(|_| std::fs::write(&path, &dot)) {
                    return io.fail(EXIT_RESOURCES, e.to_string());
                }
                io.record(&[("structure", i.to_string()), ("net", contracted.is_net().to_string()), ("file", path.display().to_string())]);
            }
            None => {
                io.say(format!("// structure {} ({})", i, if contracted.is_net() { "net" } else { "not a net" }));
                io.say(dot);
            }
        }
    }
    EXIT_OK
}

fn cmd_oracle(io: &mut Io, max_async: usize, trials: usize, seed: u64, orders: usize) -> i32 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = GenConfig {
        max_async,
        ..GenConfig::default()
    };
    let (mut nets, mut disagreements, mut confluence_failures) = (0usize, 0usize, 0usize);
    for i in 0..trials {
        let ps = random_structure(&mut rng, &cfg);
        match criterion_check(&ps) {
            Ok(net) => nets += net as usize,
            Err(d) => {
                disagreements += 1;
                io.record(&[
                    ("disagreement", i.to_string()),
                    ("sequent", d.sequent),
                    ("axioms", d.axioms.join("; ")),
                    ("contraction", d.contraction.to_string()),
                    ("switching", d.switching.to_string()),
                ]);
            }
        }
        if !confluence_check(&ps.contraction_graph(), orders, &mut rng) {
            confluence_failures += 1;
            io.record(&[("confluence_failure", i.to_string()), ("sequent", crate::oracle::structure_sequent(&ps).to_string())]);
        }
    }
    if io.machine {
        io.record(&[
            ("trials", trials.to_string()),
            ("nets", nets.to_string()),
            ("disagreements", disagreements.to_string()),
            ("confluence_failures", confluence_failures.to_string()),
            ("seed", seed.to_string()),
        ]);
    } else {
        io.say(format!(
            "{} structures (seed {}, at most {} asynchronous links): {} nets, {} disagreements, {} confluence failures",
            trials, seed, max_async, nets, disagreements, confluence_failures
        ));
    }
    if disagreements + confluence_failures == 0 {
        EXIT_OK
    } else {
        EXIT_PROPERTY
    }
}

fn cmd_cutelim(io: &mut Io, trials: usize, seed: u64) -> i32 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = GenConfig::default();
    let mut failures = 0;
    for i in 0..trials {
        let ps = random_cut_pair(&mut rng, &cfg);
        if let Err(e) = cut_elimination_check(&ps) {
            failures += 1;
            io.record(&[("failure", i.to_string()), ("reason", e), ("sequent", crate::oracle::structure_sequent(&ps).to_string())]);
        }
    }
    if io.machine {
        io.record(&[("trials", trials.to_string()), ("failures", failures.to_string()), ("seed", seed.to_string())]);
    } else {
        io.say(format!("{} cut pairs (seed {}): {} failures", trials, seed, failures));
    }
    if failures == 0 {
        EXIT_OK
    } else {
        EXIT_PROPERTY
    }
}

fn read_sequent(io: &mut Io, inline: Option<&str>, file: Option<&Path>) -> Result<Sequent, i32> {
    let text = match (inline, file) {
        (Some(t), None) => t.to_string(),
        (None, Some(p)) => std::fs::read_to_string(p).map_err(|e| io.fail(EXIT_SYNTAX, format!("{}: {}", p.display(), e)))?,
        _ => return Err(io.fail(EXIT_SYNTAX, "give a sequent inline or with --file")),
    };
    parse_sequent(&text).map_err(|e| io.fail(EXIT_SYNTAX, e.to_string()))
}

/// Runs the command line with explicit output streams; returns the exit
/// code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_SYNTAX } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{}", e.render()) } else { write!(out, "{}", e.render()) };
            return code;
        }
    };
    let mut io = Io {
        out,
        err,
        machine: cli.machine,
    };
    match &cli.command {
        Command::Prove { sequent, file, search } => match read_sequent(&mut io, sequent.as_deref(), file.as_deref()) {
            Ok(s) => cmd_prove(&mut io, &s, search),
            Err(c) => c,
        },
        Command::Parse {
            lexicon,
            goal,
            base,
            allow_nonsimple,
            search,
            words,
        } => cmd_parse(&mut io, lexicon, goal, *base, *allow_nonsimple, search, words),
        Command::Translate {
            lexicon,
            word,
            pos,
            allow_nonsimple,
        } => cmd_translate(&mut io, lexicon, word, pos, *allow_nonsimple),
        Command::Render { sequent, graph, dot } => match read_sequent(&mut io, Some(sequent), None) {
            Ok(s) => cmd_render(&mut io, &s, *graph, dot.as_deref()),
            Err(c) => c,
        },
        Command::Oracle {
            max_async,
            trials,
            seed,
            orders,
        } => cmd_oracle(&mut io, *max_async, *trials, *seed, *orders),
        Command::Cutelim { trials, seed } => cmd_cutelim(&mut io, *trials, *seed),
    }
}

/// Runs against the process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr().lock());
    run_with(args, &mut out, &mut err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["mill1"];
        full.extend_from_slice(args);
        let code = run_with(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn prove_exit_codes() {
        let (c, out, _) = call(&["prove", "exists x. forall y. f(x,y) |- forall v. exists w. f(w,v)"]);
        assert_eq!(c, EXIT_OK);
        assert!(out.contains("1 proof"));
        let (c, out, _) = call(&["prove", "forall x. exists y. f(x,y) |- exists v. forall w. f(w,v)"]);
        assert_eq!(c, EXIT_UNPROVABLE);
        assert!(out.contains("0 proofs"));
        assert_eq!(call(&["prove", "a |- (a"]).0, EXIT_SYNTAX);
        assert_eq!(call(&["frobnicate"]).0, EXIT_SYNTAX);
    }

    #[test]
    fn machine_records() {
        let (c, out, _) = call(&["--machine", "prove", "a, b |- a * b", "--stats"]);
        assert_eq!(c, EXIT_OK);
        let first = out.lines().next().unwrap();
        assert!(first.contains("proofs=1"), "{}", first);
        assert!(out.lines().any(|l| l.starts_with("stats=search expansions=")));
    }

    #[test]
    fn oracle_is_reproducible() {
        let a = call(&["--machine", "oracle", "--trials", "50", "--seed", "9", "--orders", "3"]);
        let b = call(&["--machine", "oracle", "--trials", "50", "--seed", "9", "--orders", "3"]);
        assert_eq!(a.0, EXIT_OK);
        assert_eq!(a.1, b.1);
        let zero = call(&["oracle", "--max-async", "0", "--trials", "20"]);
        assert_eq!(zero.0, EXIT_OK);
    }
}
