//! Lexicons, sentence-to-sequent construction and parsing.
//!
//! Lexicon files are line oriented:
//!
//! ```text
//! # comment
//! base 0                      # position of the first word (default 1)
//! sort si 1                   # atom sort, default 0
//! features np 1               # feature arguments after the positions
//! john :: np                  # Displacement-calculus entry
//! zag :- forall X0 X1. ...    # MILL1 schema; L and R are the word's span
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::formula::{parse_d_with, parse_mill_with, sort, AtomSortTable, DFormula, MillFormula, ParseCtx, Sequent, SortError, SynOp};
use crate::proofnet::{render_dot, ProofStructure};
use crate::prover::{prove_frame, ProveError, ProverConfig, Stats};
use crate::semantics::{extract, LTerm, NDProof};
use crate::syntax::SyntaxError;
use crate::term::{Term, Var};
use crate::translate::{desugar_units, translate_d, TranslateError};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GrammarError {
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("line {line}: {err}")]
    Syntax { line: usize, err: SyntaxError },
    #[error("line {line}: {msg}")]
    Header { line: usize, msg: String },
    #[error("entry for '{word}': {err}")]
    Sort { word: String, err: SortError },
    #[error("entry for '{word}' has sort {sort}; words are continuous (sort 0)")]
    EntrySort { word: String, sort: u32 },
    #[error("'{atom}' takes {declared} feature arguments, got {got}")]
    FeatureArity { atom: String, declared: usize, got: usize },
    #[error("entry for '{word}': {err}")]
    Translate { word: String, err: TranslateError },
    #[error("entry for '{word}' is not simple: {}", warnings.join("; "))]
    NonSimple { word: String, warnings: Vec<String> },
    #[error("unknown word '{0}'")]
    UnknownWord(String),
    #[error("empty sentence")]
    EmptySentence,
}

#[derive(Debug, Clone)]
pub enum EntryBody {
    D(DFormula),
    /// A MILL1 schema with the span parameters `L` and `R`.
    Schema { formula: MillFormula, left: Option<Var>, right: Option<Var> },
}

#[derive(Debug, Clone)]
pub struct Entry {
    pub word: String,
    /// Position among the word's entries.
    pub index: usize,
    pub body: EntryBody,
    pub line: usize,
    pub warnings: Vec<String>,
}

impl Entry {
    /// Name of the lexical constant in extracted terms.
    pub fn constant(&self) -> String {
        format!("{}_{}", self.word, self.index)
    }
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    pub base: u32,
    pub sorts: AtomSortTable,
    pub features: BTreeMap<String, usize>,
    pub entries: BTreeMap<String, Vec<Entry>>,
    /// Lint and ambiguity warnings collected while loading.
    pub warnings: Vec<String>,
}

impl Default for Lexicon {
    fn default() -> Lexicon {
        Lexicon {
            base: 1,
            sorts: AtomSortTable::new(),
            features: BTreeMap::new(),
            entries: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }
}

/// Warnings for connectives outside the simple fragment: split, the
/// injections and unit occurrences not part of a synthetic connective.
pub fn simplicity_lint(f: &DFormula) -> Vec<String> {
    let g = match desugar_units(f) {
        Ok(g) => g,
        Err(e) => return vec![e.to_string()],
    };
    let mut out = Vec::new();
    g.visit(&mut |h| {
        if let DFormula::Syn(op @ (SynOp::Check | SynOp::RInj | SynOp::LInj), _) = h {
            out.push(format!("{} is outside the simple fragment", op.name()));
        }
    });
    out
}

impl Lexicon {
    pub fn parse(text: &str, allow_nonsimple: bool) -> Result<Lexicon, GrammarError> {
        let mut lex = Lexicon::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some((word, rest)) = content.split_once("::") {
                let mut ctx = ParseCtx::default();
                let f = parse_d_with(rest, &mut ctx).map_err(|err| GrammarError::Syntax { line, err: shift(err, line) })?;
                lex.add(word, EntryBody::D(f), line, allow_nonsimple)?;
            } else if let Some((word, rest)) = content.split_once(":-") {
                let mut ctx = ParseCtx::default();
                let f = parse_mill_with(rest, &mut ctx).map_err(|err| GrammarError::Syntax { line, err: shift(err, line) })?;
                let find = |n: &str| ctx.free_vars().iter().find(|(name, _)| name == n).map(|(_, v)| v.clone());
                let (left, right) = (find("L"), find("R"));
                let others: Vec<Var> = f.free_vars().into_iter().filter(|v| Some(v) != left.as_ref() && Some(v) != right.as_ref()).collect();
                let formula = MillFormula::forall_all(others, f);
                lex.add(word, EntryBody::Schema { formula, left, right }, line, allow_nonsimple)?;
            } else {
                lex.header(content, line)?;
            }
        }
        for (w, es) in &lex.entries {
            if es.len() > 1 {
                lex.warnings.push(format!("'{}' has {} entries", w, es.len()));
            }
        }
        Ok(lex)
    }

    fn header(&mut self, content: &str, line: usize) -> Result<(), GrammarError> {
        let parts: Vec<&str> = content.split_whitespace().collect();
        let bad = |msg: &str| GrammarError::Header { line, msg: msg.to_string() };
        match parts[..] {
            ["base", b] => {
                self.base = match b {
                    "0" => 0,
                    "1" => 1,
                    _ => return Err(bad("base must be 0 or 1")),
                }
            }
            ["sort", atom, n] => {
                let n: u32 = n.parse().map_err(|_| bad("sort must be a natural number"))?;
                self.sorts.set(atom, n);
            }
            ["features", atom, k] => {
                let k: usize = k.parse().map_err(|_| bad("feature count must be a natural number"))?;
                self.features.insert(atom.to_string(), k);
            }
            _ => return Err(bad(&format!("expected a header or an entry, found '{}'", content))),
        }
        Ok(())
    }

    fn add(&mut self, word: &str, body: EntryBody, line: usize, allow_nonsimple: bool) -> Result<(), GrammarError> {
        let word = word.trim().to_lowercase();
        if word.is_empty() || word.contains(char::is_whitespace) {
            return Err(GrammarError::Header {
                line,
                msg: format!("bad word '{}'", word),
            });
        }
        let mut warnings = Vec::new();
        if let EntryBody::D(f) = &body {
            self.check_features(f)?;
            let s = desugar_units(f)
                .map_err(|err| GrammarError::Translate { word: word.clone(), err })
                .and_then(|g| sort(&g, &self.sorts).map_err(|err| GrammarError::Sort { word: word.clone(), err }))?;
            if s != 0 {
                return Err(GrammarError::EntrySort { word, sort: s });
            }
            warnings = simplicity_lint(f);
            if !warnings.is_empty() {
                if !allow_nonsimple {
                    return Err(GrammarError::NonSimple { word, warnings });
                }
                self.warnings.extend(warnings.iter().map(|w| format!("line {}: '{}': {}", line, word, w)));
            }
        }
        let list = self.entries.entry(word.clone()).or_default();
        list.push(Entry {
            index: list.len(),
            word,
            body,
            line,
            warnings,
        });
        Ok(())
    }

    fn check_features(&self, f: &DFormula) -> Result<(), GrammarError> {
        let mut err = None;
        f.visit(&mut |g| {
            if let DFormula::Atom(a, args) = g {
                let declared = self.features.get(&**a).copied().unwrap_or(0);
                if args.len() > declared && err.is_none() {
                    err = Some(GrammarError::FeatureArity {
                        atom: a.to_string(),
                        declared,
                        got: args.len(),
                    });
                }
            }
        });
        err.map_or(Ok(()), Err)
    }

    /// Pads atoms with fresh feature variables up to the declared arity.
    pub fn complete_features(&self, f: &DFormula) -> DFormula {
        match f {
            DFormula::Atom(a, args) => {
                let declared = self.features.get(&**a).copied().unwrap_or(0);
                let mut args = args.clone();
                while args.len() < declared {
                    args.push(Term::Var(Var::fresh("F")));
                }
                DFormula::Atom(a.clone(), args)
            }
            DFormula::Bin(op, a, b) => DFormula::bin(*op, self.complete_features(a), self.complete_features(b)),
            DFormula::Syn(op, a) => DFormula::syn(*op, self.complete_features(a)),
            other => other.clone(),
        }
    }

    pub fn word_count(&self) -> usize {
        self.entries.len()
    }

    pub fn lookup(&self, word: &str) -> Option<&[Entry]> {
        self.entries.get(&word.to_lowercase()).map(Vec::as_slice)
    }

    /// The MILL1 formula of an entry at span `(l, r)`, universally closed.
    pub fn instantiate(&self, e: &Entry, l: u32, r: u32) -> Result<MillFormula, GrammarError> {
        let (lt, rt) = (Term::int(l), Term::int(r));
        match &e.body {
            EntryBody::D(f) => {
                let f = self.complete_features(f);
                let m = translate_d(&f, &[lt, rt], &self.sorts).map_err(|err| GrammarError::Translate { word: e.word.clone(), err })?;
                let free: Vec<Var> = m.free_vars().into_iter().collect();
                Ok(MillFormula::forall_all(free, m))
            }
            EntryBody::Schema { formula, left, right } => {
                let mut m = formula.clone();
                if let Some(v) = left {
                    m = m.replace_var(v, &lt);
                }
                if let Some(v) = right {
                    m = m.replace_var(v, &rt);
                }
                Ok(m.refresh_binders())
            }
        }
    }

    /// The goal formula at `(l, r)`; missing features are existentially
    /// closed.
    pub fn goal(&self, goal: &DFormula, l: u32, r: u32) -> Result<MillFormula, GrammarError> {
        self.check_features(goal)?;
        let f = self.complete_features(goal);
        let m = translate_d(&f, &[Term::int(l), Term::int(r)], &self.sorts).map_err(|err| GrammarError::Translate {
            word: "<goal>".into(),
            err,
        })?;
        let free: Vec<Var> = m.free_vars().into_iter().collect();
        Ok(MillFormula::exists_all(free, m))
    }
}

fn shift(err: SyntaxError, line: usize) -> SyntaxError {
    err.at_line(line)
}

pub fn load_lexicon(path: impl AsRef<Path>, allow_nonsimple: bool) -> Result<Lexicon, GrammarError> {
    let p = path.as_ref();
    let text = std::fs::read_to_string(p).map_err(|e| GrammarError::Io {
        path: p.display().to_string(),
        msg: e.to_string(),
    })?;
    Lexicon::parse(&text, allow_nonsimple)
}

/// Whitespace-tokenized words; word `i` spans `(base+i, base+i+1)`.
#[derive(Debug, Clone)]
pub struct Sentence {
    pub words: Vec<String>,
    pub base: u32,
}

impl Sentence {
    pub fn new(text: &str, base: u32) -> Sentence {
        Sentence {
            words: text.split_whitespace().map(str::to_lowercase).collect(),
            base,
        }
    }

    pub fn span(&self, i: usize) -> (u32, u32) {
        let l = self.base + i as u32;
        (l, l + 1)
    }

    pub fn first(&self) -> u32 {
        self.base
    }

    pub fn last(&self) -> u32 {
        self.base + self.words.len() as u32
    }
}

/// One sequent for one choice of lexical entries.
#[derive(Debug, Clone)]
pub struct BuiltSequent {
    pub sequent: Sequent,
    /// Lexical constant per antecedent formula.
    pub names: Vec<String>,
    /// Entry index chosen for each word.
    pub choice: Vec<usize>,
}

/// Enumerates the sequents of a sentence, one per combination of entries,
/// in entry-declaration order (last word varies fastest).
pub struct Sequents<'a> {
    lex: &'a Lexicon,
    sentence: Sentence,
    entries: Vec<&'a [Entry]>,
    goal: DFormula,
    next: Option<Vec<usize>>,
}

impl Iterator for Sequents<'_> {
    type Item = Result<BuiltSequent, GrammarError>;

    fn next(&mut self) -> Option<Self::Item> {
        let choice = self.next.take()?;
        let mut succ = choice.clone();
        let mut k = succ.len();
        self.next = loop {
            if k == 0 {
                break None;
            }
            k -= 1;
            succ[k] += 1;
            if succ[k] < self.entries[k].len() {
                break Some(succ);
            }
            succ[k] = 0;
        };
        Some(self.build(&choice))
    }
}

impl Sequents<'_> {
    fn build(&self, choice: &[usize]) -> Result<BuiltSequent, GrammarError> {
        let mut antecedent = Vec::new();
        let mut names = Vec::new();
        for (i, &c) in choice.iter().enumerate() {
            let e = &self.entries[i][c];
            let (l, r) = self.sentence.span(i);
            antecedent.push(self.lex.instantiate(e, l, r)?);
            // Repeated words need distinct constants for the linear term.
            let mut name = e.constant();
            while names.contains(&name) {
                name.push('\'');
            }
            names.push(name);
        }
        let succedent = self.lex.goal(&self.goal, self.sentence.first(), self.sentence.last())?;
        Ok(BuiltSequent {
            sequent: Sequent::new(antecedent, succedent),
            names,
            choice: choice.to_vec(),
        })
    }
}

pub fn build_sequents<'a>(lex: &'a Lexicon, sentence: &Sentence, goal: &DFormula) -> Result<Sequents<'a>, GrammarError> {
    if sentence.words.is_empty() {
        return Err(GrammarError::EmptySentence);
    }
    let mut entries = Vec::new();
    for w in &sentence.words {
        match lex.lookup(w) {
            Some(es) if !es.is_empty() => entries.push(es),
            _ => return Err(GrammarError::UnknownWord(w.clone())),
        }
    }
    Ok(Sequents {
        lex,
        sentence: sentence.clone(),
        next: Some(vec![0; entries.len()]),
        entries,
        goal: goal.clone(),
    })
}

/// The first sequent of a sentence (all first entries).
pub fn build_sequent(lex: &Lexicon, sentence: &Sentence, goal: &DFormula) -> Result<BuiltSequent, GrammarError> {
    build_sequents(lex, sentence, goal)?.next().expect("at least one combination")
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error(transparent)]
    Prove(#[from] ProveError),
}

/// A reading: a proof net for one lexical choice, with its term.
#[derive(Debug, Clone)]
pub struct Reading {
    pub built: BuiltSequent,
    pub proof: ProofStructure,
    pub nd: Option<NDProof>,
    pub term: Result<LTerm, String>,
    pub dot: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParseOutcome {
    pub readings: Vec<Reading>,
    /// Statistics per lexical combination, in enumeration order.
    pub stats: Vec<Stats>,
    pub sequents: usize,
}

/// Parses a sentence: every lexical combination is handed to the prover.
pub fn parse(lex: &Lexicon, sentence: &Sentence, goal: &DFormula, cfg: &ProverConfig) -> Result<ParseOutcome, ParseError> {
    let mut out = ParseOutcome::default();
    for built in build_sequents(lex, sentence, goal)? {
        let built = built?;
        out.sequents += 1;
        let remaining = cfg.limit.map(|n| n.saturating_sub(out.readings.len()));
        if remaining == Some(0) {
            break;
        }
        let pc = ProverConfig {
            limit: remaining,
            ..cfg.clone()
        };
        let frame = std::sync::Arc::new(crate::proofnet::unfold_sequent(&built.sequent));
        let res = prove_frame(frame, &pc)?;
        for proof in res.proofs {
            let (nd, term) = match extract(&proof, &built.names) {
                Ok((nd, t)) => (Some(nd), Ok(t)),
                Err(e) => (None, Err(e)),
            };
            out.readings.push(Reading {
                dot: render_dot(&proof),
                built: built.clone(),
                proof,
                nd,
                term,
            });
        }
        out.stats.push(res.stats);
    }
    Ok(out)
}
