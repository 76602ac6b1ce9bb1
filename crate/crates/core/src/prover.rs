//! Depth-first search over axiom matchings, pruned by contracting the
//! partial proof structure after every axiom link.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::formula::{MillFormula, Sequent};
use crate::proofnet::{axiom_match, conjugate, unfold, unify_literals, ContractionGraph, EdgeKind, NodeId, ProofFrame, ProofStructure};
use crate::term::Substitution;

pub const DEFAULT_BUDGET: u64 = 1_000_000;
pub const BUDGET_ENV: &str = "MILL1_NODE_BUDGET";

/// The node budget, overridable through `MILL1_NODE_BUDGET`.
pub fn default_budget() -> u64 {
    std::env::var(BUDGET_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_BUDGET)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PruneReason {
    CycleRisk,
    DisconnectRisk,
    IsolatedEmpty,
    Unification,
    NoCandidates,
}

impl PruneReason {
    pub fn name(self) -> &'static str {
        match self {
            PruneReason::CycleRisk => "cycle",
            PruneReason::DisconnectRisk => "disconnect",
            PruneReason::IsolatedEmpty => "isolated",
            PruneReason::Unification => "unification",
            PruneReason::NoCandidates => "no_candidates",
        }
    }
}

/// One expanded search state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub depth: usize,
    pub literal: NodeId,
    /// Unifiable conjugates on other vertices.
    pub candidates: usize,
    /// Candidates that passed the eager filters.
    pub survivors: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Stats {
    pub expansions: u64,
    pub prunes: BTreeMap<PruneReason, u64>,
    pub proofs: usize,
    pub wall: Duration,
    pub steps: Vec<StepRecord>,
}

impl Stats {
    fn prune(&mut self, r: PruneReason) {
        *self.prunes.entry(r).or_insert(0) += 1;
    }

    fn absorb(&mut self, other: Stats) {
        self.expansions += other.expansions;
        for (r, n) in other.prunes {
            *self.prunes.entry(r).or_insert(0) += n;
        }
        self.steps.extend(other.steps);
    }

    pub fn total_prunes(&self) -> u64 {
        self.prunes.values().sum()
    }

    /// Whether every expanded state had exactly one surviving candidate.
    pub fn deterministic(&self) -> bool {
        self.steps.iter().all(|s| s.survivors == 1)
    }
}

impl fmt::Display for Stats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "expansions: {}\nprunes:", self.expansions)?;
        for r in [PruneReason::CycleRisk, PruneReason::DisconnectRisk, PruneReason::IsolatedEmpty, PruneReason::Unification, PruneReason::NoCandidates] {
            write!(f, " {}={}", r.name(), self.prunes.get(&r).copied().unwrap_or(0))?;
        }
        write!(f, "\nproofs: {}\nwall time: {:.3}ms", self.proofs, self.wall.as_secs_f64() * 1e3)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ProveError {
    #[error("node budget of {budget} expansions exhausted")]
    ResourceLimit { budget: u64 },
}

#[derive(Debug, Clone)]
pub struct ProverConfig {
    /// Stop after this many proofs.
    pub limit: Option<usize>,
    pub budget: u64,
    pub jobs: usize,
}

impl Default for ProverConfig {
    fn default() -> ProverConfig {
        ProverConfig {
            limit: None,
            budget: default_budget(),
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub proofs: Vec<ProofStructure>,
    pub stats: Stats,
}

/// Partial structure: a matching so far, its unifier and the normalized
/// contraction graph.
#[derive(Clone)]
pub struct SearchState {
    pub matching: Vec<(NodeId, NodeId)>,
    pub subst: Substitution,
    pub graph: ContractionGraph,
    pub pending: Vec<NodeId>,
}

/// Builds and normalizes the partial graph, then applies the eager filters.
pub fn evaluate(frame: &ProofFrame, matching: Vec<(NodeId, NodeId)>, subst: Substitution) -> Result<SearchState, PruneReason> {
    let pending: Vec<NodeId> = frame.literals.iter().copied().filter(|l| !matching.iter().any(|&(a, b)| a == *l || b == *l)).collect();
    let graph = ContractionGraph::build(frame, &matching, &subst, Some(&pending)).contract().graph().clone();
    eager_filters(&graph)?;
    Ok(SearchState {
        matching,
        subst,
        graph,
        pending,
    })
}

/// Rejects partial graphs that can no longer contract to a single vertex.
pub fn eager_filters(g: &ContractionGraph) -> Result<(), PruneReason> {
    let edges = g.live_edges();
    let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
    for (_, e) in &edges {
        if e.from == e.to {
            return Err(PruneReason::CycleRisk);
        }
        *degree.entry(e.from).or_insert(0) += 1;
        *degree.entry(e.to).or_insert(0) += 1;
    }
    let ids = g.vertex_ids();
    for &v in &ids {
        let vx = g.vertex(v);
        if !vx.literals.is_empty() {
            continue;
        }
        match degree.get(&v).copied().unwrap_or(0) {
            0 if ids.len() > 1 => return Err(PruneReason::IsolatedEmpty),
            1 => {
                let (_, e) = edges.iter().find(|(_, e)| e.to == v || e.from == v).expect("edge");
                if e.to == v {
                    match &e.kind {
                        EdgeKind::Par(_) => return Err(PruneReason::DisconnectRisk),
                        EdgeKind::Universal(x) if g.occurs_outside(x, v) => return Err(PruneReason::DisconnectRisk),
                        _ => {}
                    }
                }
            }
            _ => {}
        }
    }
    Ok(())
}

/// Unifiable conjugates of `lit` lying on another vertex, in document order.
pub fn candidates(frame: &ProofFrame, st: &SearchState, lit: NodeId) -> Vec<(NodeId, Substitution)> {
    let home = st.graph.find(lit);
    st.pending
        .iter()
        .copied()
        .filter(|&o| o != lit && conjugate(frame, lit, o) && st.graph.find(o) != home)
        .filter_map(|o| unify_literals(frame, lit, o, &st.subst).ok().map(|s| (o, s)))
        .collect()
}

/// The pending literal with the fewest candidates; ties go to document
/// order.
pub fn select_literal(frame: &ProofFrame, st: &SearchState) -> Option<(NodeId, Vec<(NodeId, Substitution)>)> {
    let mut best: Option<(NodeId, Vec<(NodeId, Substitution)>)> = None;
    for &l in &st.pending {
        let c = candidates(frame, st, l);
        let better = match &best {
            None => true,
            Some((_, b)) => c.len() < b.len(),
        };
        if better {
            let done = c.is_empty();
            best = Some((l, c));
            if done {
                break;
            }
        }
    }
    best
}

struct Search<'a> {
    frame: &'a ProofFrame,
    frame_arc: Arc<ProofFrame>,
    limit: Option<usize>,
    budget: u64,
    spent: &'a AtomicU64,
    stats: Stats,
    proofs: Vec<ProofStructure>,
}

impl Search<'_> {
    fn full(&self) -> bool {
        self.limit.is_some_and(|n| self.proofs.len() >= n)
    }

    fn finish(&mut self, st: &SearchState) {
        if let Ok(ps) = axiom_match(self.frame_arc.clone(), &st.matching) {
            if ps.is_net() {
                self.proofs.push(ps);
            }
        }
    }

    fn children(&mut self, st: &SearchState, depth: usize) -> Result<Vec<SearchState>, ProveError> {
        let Some((lit, cands)) = select_literal(self.frame, st) else {
            return Ok(Vec::new());
        };
        let home = st.graph.find(lit);
        let clashes = st
            .pending
            .iter()
            .filter(|&&o| o != lit && conjugate(self.frame, lit, o) && st.graph.find(o) != home)
            .count()
            - cands.len();
        for _ in 0..clashes {
            self.stats.prune(PruneReason::Unification);
        }
        if cands.is_empty() {
            self.stats.prune(PruneReason::NoCandidates);
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let total = cands.len();
        for (other, subst) in cands {
            if self.spent.fetch_add(1, Ordering::Relaxed) >= self.budget {
                return Err(ProveError::ResourceLimit { budget: self.budget });
            }
            self.stats.expansions += 1;
            let mut matching = st.matching.clone();
            matching.push((lit, other));
            match evaluate(self.frame, matching, subst) {
                Ok(child) => out.push(child),
                Err(r) => self.stats.prune(r),
            }
        }
        self.stats.steps.push(StepRecord {
            depth,
            literal: lit,
            candidates: total,
            survivors: out.len(),
        });
        Ok(out)
    }

    fn dfs(&mut self, st: SearchState, depth: usize) -> Result<(), ProveError> {
        if self.full() {
            return Ok(());
        }
        if st.pending.is_empty() {
            self.finish(&st);
            return Ok(());
        }
        for child in self.children(&st, depth)? {
            self.dfs(child, depth + 1)?;
            if self.full() {
                break;
            }
        }
        Ok(())
    }
}

type PartResult = Result<(Vec<ProofStructure>, Stats), ProveError>;

/// Searches the frame for all proof nets, up to `cfg.limit`.
pub fn prove_frame(frame: Arc<ProofFrame>, cfg: &ProverConfig) -> Result<Outcome, ProveError> {
    let start = Instant::now();
    let spent = AtomicU64::new(0);
    let mut search = Search {
        frame: &frame,
        frame_arc: frame.clone(),
        limit: cfg.limit,
        budget: cfg.budget,
        spent: &spent,
        stats: Stats::default(),
        proofs: Vec::new(),
    };
    let root = match evaluate(&frame, Vec::new(), Substitution::new()) {
        Ok(st) => st,
        Err(r) => {
            search.stats.prune(r);
            search.stats.wall = start.elapsed();
            return Ok(Outcome {
                proofs: Vec::new(),
                stats: search.stats,
            });
        }
    };
    if cfg.jobs <= 1 || root.pending.is_empty() {
        search.dfs(root, 0)?;
    } else {
        let kids = search.children(&root, 0)?;
        let jobs = cfg.jobs.min(kids.len()).max(1);
        let mut parts: Vec<(usize, PartResult)> = Vec::new();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..jobs)
                .map(|w| {
                    let kids: Vec<(usize, SearchState)> = kids.iter().cloned().enumerate().filter(|(i, _)| i % jobs == w).collect();
                    let (frame, spent) = (&frame, &spent);
                    scope.spawn(move || {
                        kids.into_iter()
                            .map(|(i, kid)| {
                                let mut s = Search {
                                    frame,
                                    frame_arc: frame.clone(),
                                    limit: cfg.limit,
                                    budget: cfg.budget,
                                    spent,
                                    stats: Stats::default(),
                                    proofs: Vec::new(),
                                };
                                let r = s.dfs(kid, 1).map(|()| (s.proofs, s.stats));
                                (i, r)
                            })
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                parts.extend(h.join().expect("worker panicked"));
            }
        });
        parts.sort_by_key(|(i, _)| *i);
        for (_, r) in parts {
            let (proofs, stats) = r?;
            search.proofs.extend(proofs);
            search.stats.absorb(stats);
        }
        if let Some(n) = cfg.limit {
            search.proofs.truncate(n);
        }
        search.stats.steps.sort_by_key(|s| s.depth);
    }
    search.stats.proofs = search.proofs.len();
    search.stats.wall = start.elapsed();
    Ok(Outcome {
        proofs: search.proofs,
        stats: search.stats,
    })
}

pub fn prove_with(antecedent: &[MillFormula], succedent: &MillFormula, cfg: &ProverConfig) -> Result<Outcome, ProveError> {
    prove_frame(Arc::new(unfold(antecedent, succedent)), cfg)
}

/// All proof nets of the sequent, at most `limit` of them.
pub fn prove(antecedent: &[MillFormula], succedent: &MillFormula, limit: Option<usize>) -> Result<Vec<ProofStructure>, ProveError> {
    let cfg = ProverConfig {
        limit,
        ..ProverConfig::default()
    };
    Ok(prove_with(antecedent, succedent, &cfg)?.proofs)
}

pub fn prove_sequent(s: &Sequent, limit: Option<usize>) -> Result<Vec<ProofStructure>, ProveError> {
    prove(&s.antecedent, &s.succedent, limit)
}
