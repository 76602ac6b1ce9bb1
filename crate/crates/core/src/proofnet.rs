//! Proof frames and proof structures, the switching oracle, the first-order
//! contraction criterion and cut elimination.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::Rng;
use thiserror::Error;

use crate::formula::{MillFormula, Namer, Polarity, Sequent};
use crate::term::{Substitution, Term, UnifyError, Var};

pub type NodeId = usize;
pub type LinkId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinkKind {
    Axiom,
    Cut,
    Par,
    TensorL,
    /// Carries the eigenvariable of the link.
    UniversalL(Var),
    /// Carries the metavariable instantiating the quantifier.
    ExistentialL(Var),
}

impl LinkKind {
    /// Par and universal links are asynchronous and drawn dotted.
    pub fn is_dotted(&self) -> bool {
        matches!(self, LinkKind::Par | LinkKind::UniversalL(_))
    }
}

#[derive(Debug, Clone)]
pub struct Link {
    pub kind: LinkKind,
    pub premisses: Vec<NodeId>,
    pub conclusions: Vec<NodeId>,
}

/// A polarized formula occurrence.
#[derive(Debug, Clone)]
pub struct Node {
    pub formula: MillFormula,
    pub polarity: Polarity,
    /// The logical link this node is the conclusion of (`None` for literals).
    pub link: Option<LinkId>,
    /// The link this node is a premiss of (`None` for conclusions).
    pub parent: Option<LinkId>,
}

impl Node {
    pub fn is_literal(&self) -> bool {
        self.formula.is_atom()
    }

    pub fn atom(&self) -> Option<(&str, &[Term])> {
        match &self.formula {
            MillFormula::Atom(p, args) => Some((p, args)),
            _ => None,
        }
    }
}

/// An unfolded sequent: formula occurrences connected by logical links, with
/// the literals still waiting for axiom links.
#[derive(Debug, Clone)]
pub struct ProofFrame {
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    /// Literal nodes in document order.
    pub literals: Vec<NodeId>,
    /// The roots: antecedent formulas (negative) then the succedent.
    pub conclusions: Vec<NodeId>,
}

impl ProofFrame {
    fn push_node(&mut self, formula: MillFormula, polarity: Polarity) -> NodeId {
        self.nodes.push(Node {
            formula,
            polarity,
            link: None,
            parent: None,
        });
        self.nodes.len() - 1
    }

    fn push_link(&mut self, kind: LinkKind, premisses: Vec<NodeId>, conclusions: Vec<NodeId>) -> LinkId {
        let id = self.links.len();
        for &p in &premisses {
            self.nodes[p].parent = Some(id);
        }
        if kind != LinkKind::Cut {
            for &c in &conclusions {
                self.nodes[c].link = Some(id);
            }
        }
        self.links.push(Link {
            kind,
            premisses,
            conclusions,
        });
        id
    }

    fn unfold_node(&mut self, f: &MillFormula, pol: Polarity) -> NodeId {
        let node = self.push_node(f.clone(), pol);
        let (kind, premisses) = match (f, pol) {
            (MillFormula::Atom(..), _) => {
                self.literals.push(node);
                return node;
            }
            (MillFormula::Tensor(a, b), _) => {
                let pa = self.unfold_node(a, pol);
                let pb = self.unfold_node(b, pol);
                (if pol == Polarity::Positive { LinkKind::TensorL } else { LinkKind::Par }, vec![pa, pb])
            }
            (MillFormula::Lolli(a, b), _) => {
                let pa = self.unfold_node(a, pol.flip());
                let pb = self.unfold_node(b, pol);
                (if pol == Polarity::Negative { LinkKind::TensorL } else { LinkKind::Par }, vec![pa, pb])
            }
            (MillFormula::Forall(x, body), _) | (MillFormula::Exists(x, body), _) => {
                let universal = matches!(
                    (f, pol),
                    (MillFormula::Forall(..), Polarity::Positive) | (MillFormula::Exists(..), Polarity::Negative)
                );
                let v = if universal { Var::fresh_rigid(x.hint()) } else { Var::fresh(x.hint()) };
                let inst = body.replace_var(x, &Term::Var(v.clone()));
                let p = self.unfold_node(&inst, pol);
                (if universal { LinkKind::UniversalL(v) } else { LinkKind::ExistentialL(v) }, vec![p])
            }
        };
        self.push_link(kind, premisses, vec![node]);
        node
    }

    pub fn is_root(&self, n: NodeId) -> bool {
        self.nodes[n].parent.is_none()
    }

    /// Metavariables introduced by existential links, in link order.
    pub fn metavariables(&self) -> Vec<Var> {
        self.links
            .iter()
            .filter_map(|l| match &l.kind {
                LinkKind::ExistentialL(v) => Some(v.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn eigenvariables(&self) -> Vec<Var> {
        self.links
            .iter()
            .filter_map(|l| match &l.kind {
                LinkKind::UniversalL(v) => Some(v.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn async_link_count(&self) -> usize {
        self.links.iter().filter(|l| l.kind.is_dotted()).count()
    }

    /// Renders a literal with its polarity, e.g. `-np(1,2)`.
    pub fn literal_text(&self, n: NodeId, s: &Substitution) -> String {
        let node = &self.nodes[n];
        format!("{}{}", node.polarity.sign(), node.formula.apply(s))
    }
}

/// Unfolds the antecedent negatively and the succedent positively.
pub fn unfold(antecedent: &[MillFormula], succedent: &MillFormula) -> ProofFrame {
    let mut frame = ProofFrame {
        nodes: Vec::new(),
        links: Vec::new(),
        literals: Vec::new(),
        conclusions: Vec::new(),
    };
    for a in antecedent {
        let n = frame.unfold_node(a, Polarity::Negative);
        frame.conclusions.push(n);
    }
    let n = frame.unfold_node(succedent, Polarity::Positive);
    frame.conclusions.push(n);
    frame
}

pub fn unfold_sequent(s: &Sequent) -> ProofFrame {
    unfold(&s.antecedent, &s.succedent)
}

/// A frame together with axiom links and the substitution unifying them.
#[derive(Debug, Clone)]
pub struct ProofStructure {
    pub frame: Arc<ProofFrame>,
    /// Axiom links as (positive literal, negative literal), sorted.
    pub axioms: Vec<(NodeId, NodeId)>,
    pub subst: Substitution,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MatchError {
    #[error("literal {0} is not matched exactly once")]
    NotPerfect(NodeId),
    #[error("literals {0} and {1} are not conjugate")]
    NotConjugate(NodeId, NodeId),
    #[error("unification failed: {0}")]
    Unification(#[from] UnifyError),
    #[error("an existential witness uses an eigenvariable unnecessarily")]
    StrictnessViolation,
}

/// Checks that two literal nodes can be linked: opposite polarity, same
/// predicate and arity.
pub fn conjugate(frame: &ProofFrame, a: NodeId, b: NodeId) -> bool {
    let (na, nb) = (&frame.nodes[a], &frame.nodes[b]);
    match (na.atom(), nb.atom()) {
        (Some((p, xs)), Some((q, ys))) => na.polarity != nb.polarity && p == q && xs.len() == ys.len(),
        _ => false,
    }
}

/// Unifies the arguments of two literal nodes under `s`.
pub fn unify_literals(frame: &ProofFrame, a: NodeId, b: NodeId, s: &Substitution) -> Result<Substitution, UnifyError> {
    let (_, xs) = frame.nodes[a].atom().expect("literal");
    let (_, ys) = frame.nodes[b].atom().expect("literal");
    s.unify_all(xs, ys)
}

fn orient(frame: &ProofFrame, a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if frame.nodes[a].polarity == Polarity::Positive {
        (a, b)
    } else {
        (b, a)
    }
}

/// Builds a proof structure from a complete pairing of the frame's literals.
pub fn axiom_match(frame: Arc<ProofFrame>, pairing: &[(NodeId, NodeId)]) -> Result<ProofStructure, MatchError> {
    let mut seen = BTreeMap::new();
    for &(a, b) in pairing {
        for x in [a, b] {
            *seen.entry(x).or_insert(0) += 1;
        }
    }
    for &l in &frame.literals {
        if seen.get(&l) != Some(&1) {
            return Err(MatchError::NotPerfect(l));
        }
    }
    if seen.len() != frame.literals.len() {
        let stray = *seen.keys().find(|k| !frame.literals.contains(k)).expect("extra node");
        return Err(MatchError::NotPerfect(stray));
    }
    let mut subst = Substitution::new();
    let mut axioms = Vec::new();
    for &(a, b) in pairing {
        if !conjugate(&frame, a, b) {
            return Err(MatchError::NotConjugate(a, b));
        }
        subst = unify_literals(&frame, a, b, &subst)?;
        axioms.push(orient(&frame, a, b));
    }
    axioms.sort();
    let ps = ProofStructure { frame, axioms, subst };
    if !ps.is_strict() {
        return Err(MatchError::StrictnessViolation);
    }
    Ok(ps)
}

impl ProofStructure {
    pub fn contraction_graph(&self) -> ContractionGraph {
        ContractionGraph::build(&self.frame, &self.axioms, &self.subst, None)
    }

    pub fn is_net(&self) -> bool {
        self.contraction_graph().contract().is_net()
    }

    /// Every axiom link joins literals that are equal under the substitution.
    pub fn axioms_hold(&self) -> bool {
        self.axioms_hold_under(&self.subst)
    }

    fn axioms_hold_under(&self, s: &Substitution) -> bool {
        self.axioms.iter().all(|&(a, b)| {
            let (fa, fb) = (self.frame.nodes[a].formula.apply(s), self.frame.nodes[b].formula.apply(s));
            fa == fb
        })
    }

    /// Strictness: for each existential metavariable whose witness mentions
    /// eigenvariables, replacing those eigenvariables by an unused constant
    /// must not still give a proof net.
    pub fn is_strict(&self) -> bool {
        let reserved = Term::constant("⊥");
        for x in self.frame.metavariables() {
            let witness = self.subst.apply(&Term::Var(x.clone()));
            let eigen: Vec<Var> = witness.vars().into_iter().filter(Var::is_rigid).collect();
            if eigen.is_empty() {
                continue;
            }
            let mut cleaned = witness.clone();
            for e in &eigen {
                cleaned = cleaned.replace_var(e, &reserved);
            }
            let mut bindings: Vec<(Var, Term)> =
                self.subst.iter().filter(|(v, _)| **v != x).map(|(v, t)| (v.clone(), t.clone())).collect();
            bindings.push((x.clone(), cleaned));
            let alt = match Substitution::from_bindings(bindings) {
                Ok(s) => s,
                Err(_) => continue,
            };
            if self.axioms_hold_under(&alt) && ContractionGraph::build(&self.frame, &self.axioms, &alt, None).contract().is_net() {
                return false;
            }
        }
        true
    }

    /// The conclusion formulas (roots), antecedent first.
    pub fn conclusions(&self) -> Vec<(MillFormula, Polarity)> {
        self.frame
            .conclusions
            .iter()
            .map(|&n| (self.frame.nodes[n].formula.clone(), self.frame.nodes[n].polarity))
            .collect()
    }

    pub fn has_cuts(&self) -> bool {
        self.frame.links.iter().any(|l| l.kind == LinkKind::Cut)
    }

    /// The matching as a set of literal-index pairs, the canonical identity
    /// of a proof.
    pub fn matching_key(&self) -> Vec<(usize, usize)> {
        let idx = |n: NodeId| self.frame.literals.iter().position(|&l| l == n).expect("literal");
        let mut key: Vec<(usize, usize)> = self.axioms.iter().map(|&(a, b)| (idx(a), idx(b))).collect();
        key.sort();
        key
    }

    pub fn describe_axioms(&self) -> Vec<String> {
        self.axioms
            .iter()
            .map(|&(p, n)| format!("{} ~ {}", self.frame.literal_text(p, &self.subst), self.frame.literal_text(n, &self.subst)))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Switching oracle

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[rb.max(ra)] = ra.min(rb);
        true
    }
}

fn contains_free(f: &MillFormula, s: &Substitution, v: &Var) -> bool {
    f.apply(s).free_vars().contains(v)
}

/// The exhaustive correctness check: every switching must give a tree.
/// Exponential in the number of asynchronous links.
pub fn check_switchings(ps: &ProofStructure) -> bool {
    let frame = &ps.frame;
    let n = frame.nodes.len();
    let mut fixed = Vec::new();
    let mut choices: Vec<(NodeId, Vec<NodeId>)> = Vec::new();
    for &(a, b) in &ps.axioms {
        fixed.push((a, b));
    }
    for link in &frame.links {
        match &link.kind {
            LinkKind::Axiom => fixed.push((link.conclusions[0], link.conclusions[1])),
            LinkKind::Cut => fixed.push((link.premisses[0], link.premisses[1])),
            LinkKind::TensorL | LinkKind::ExistentialL(_) => {
                for &p in &link.premisses {
                    fixed.push((link.conclusions[0], p));
                }
            }
            LinkKind::Par => choices.push((link.conclusions[0], link.premisses.clone())),
            LinkKind::UniversalL(e) => {
                let mut targets = vec![link.premisses[0]];
                for (i, node) in frame.nodes.iter().enumerate() {
                    if i != link.premisses[0] && contains_free(&node.formula, &ps.subst, e) {
                        targets.push(i);
                    }
                }
                choices.push((link.conclusions[0], targets));
            }
        }
    }
    if fixed.len() + choices.len() + 1 != n {
        return false;
    }
    let mut idx = vec![0usize; choices.len()];
    loop {
        let mut uf = UnionFind::new(n);
        let mut ok = fixed.iter().all(|&(a, b)| uf.union(a, b));
        if ok {
            ok = choices.iter().zip(&idx).all(|((c, ts), &i)| uf.union(*c, ts[i]));
        }
        if !ok {
            return false;
        }
        // n-1 edges and acyclic means connected.
        let mut k = 0;
        loop {
            if k == idx.len() {
                return true;
            }
            idx[k] += 1;
            if idx[k] < choices[k].1.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Number of correction graphs `check_switchings` would examine.
pub fn switching_count(ps: &ProofStructure) -> u128 {
    let mut total: u128 = 1;
    for link in &ps.frame.links {
        match &link.kind {
            LinkKind::Par => total *= 2,
            LinkKind::UniversalL(e) => {
                let k = ps
                    .frame
                    .nodes
                    .iter()
                    .enumerate()
                    .filter(|(i, nd)| *i != link.premisses[0] && contains_free(&nd.formula, &ps.subst, e))
                    .count();
                total *= k as u128 + 1;
            }
            _ => {}
        }
    }
    total
}

// ---------------------------------------------------------------------------
// Contraction criterion

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeKind {
    Solid,
    /// One half of a par pair; the payload is the pair id.
    Par(usize),
    Universal(Var),
}

/// An edge. For dotted edges `from` is the conclusion side and `to` the
/// premiss side.
#[derive(Debug, Clone)]
pub struct CEdge {
    pub kind: EdgeKind,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, Default)]
pub struct CVertex {
    /// Eigenvariables occurring in the merged formulas.
    pub eigen: BTreeSet<Var>,
    /// Pending literals (partial structures only).
    pub literals: Vec<NodeId>,
    /// Unbound metavariables occurring in the merged formulas.
    pub metas: BTreeSet<Var>,
    /// Frame nodes merged into this vertex.
    pub members: Vec<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    C(usize),
    P(usize),
    U(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub mv: Move,
    pub vertices_before: usize,
    pub edges_before: usize,
}

/// The typed multigraph rewritten by the p, u and c contractions.
#[derive(Debug, Clone)]
pub struct ContractionGraph {
    parent: Vec<usize>,
    vertices: Vec<CVertex>,
    edges: Vec<Option<CEdge>>,
    pairs: Vec<[usize; 2]>,
    eigen_count: BTreeMap<Var, usize>,
    /// Metavariables that still occur in pending literals. Non-empty only
    /// for partial structures.
    live: BTreeSet<Var>,
    partial: bool,
    alive_vertices: usize,
    alive_edges: usize,
    pub trace: Vec<Step>,
}

pub enum Verdict {
    Net,
    Stuck,
}

impl ContractionGraph {
    /// One vertex per frame node, one edge per link connection. With
    /// `pending` given, the structure is partial: those literals are not yet
    /// axiom-linked and are recorded in their vertices.
    pub fn build(frame: &ProofFrame, axioms: &[(NodeId, NodeId)], subst: &Substitution, pending: Option<&[NodeId]>) -> ContractionGraph {
        let mut g = ContractionGraph {
            parent: (0..frame.nodes.len()).collect(),
            vertices: Vec::with_capacity(frame.nodes.len()),
            edges: Vec::new(),
            pairs: Vec::new(),
            eigen_count: BTreeMap::new(),
            live: BTreeSet::new(),
            partial: pending.is_some(),
            alive_vertices: frame.nodes.len(),
            alive_edges: 0,
            trace: Vec::new(),
        };
        for (i, node) in frame.nodes.iter().enumerate() {
            let mut v = CVertex {
                members: vec![i],
                ..CVertex::default()
            };
            for x in node.formula.apply(subst).free_vars() {
                if x.is_rigid() {
                    *g.eigen_count.entry(x.clone()).or_insert(0) += 1;
                    v.eigen.insert(x);
                } else if g.partial {
                    v.metas.insert(x);
                }
            }
            g.vertices.push(v);
        }
        if let Some(pending) = pending {
            for &l in pending {
                g.vertices[l].literals.push(l);
                for x in frame.nodes[l].formula.apply(subst).free_vars() {
                    if !x.is_rigid() {
                        g.live.insert(x);
                    }
                }
            }
        }
        for &(a, b) in axioms {
            g.add_edge(EdgeKind::Solid, a, b);
        }
        for link in &frame.links {
            match &link.kind {
                LinkKind::Axiom => {
                    g.add_edge(EdgeKind::Solid, link.conclusions[0], link.conclusions[1]);
                }
                LinkKind::Cut => {
                    g.add_edge(EdgeKind::Solid, link.premisses[0], link.premisses[1]);
                }
                LinkKind::TensorL | LinkKind::ExistentialL(_) => {
                    for &p in &link.premisses {
                        g.add_edge(EdgeKind::Solid, link.conclusions[0], p);
                    }
                }
                LinkKind::Par => {
                    let id = g.pairs.len();
                    let e1 = g.add_edge(EdgeKind::Par(id), link.conclusions[0], link.premisses[0]);
                    let e2 = g.add_edge(EdgeKind::Par(id), link.conclusions[0], link.premisses[1]);
                    g.pairs.push([e1, e2]);
                }
                LinkKind::UniversalL(e) => {
                    g.add_edge(EdgeKind::Universal(e.clone()), link.conclusions[0], link.premisses[0]);
                }
            }
        }
        g
    }

    fn add_edge(&mut self, kind: EdgeKind, from: usize, to: usize) -> usize {
        self.edges.push(Some(CEdge { kind, from, to }));
        self.alive_edges += 1;
        self.edges.len() - 1
    }

    fn remove_edge(&mut self, e: usize) {
        if self.edges[e].take().is_some() {
            self.alive_edges -= 1;
        }
    }

    pub fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn ends(&self, e: &CEdge) -> (usize, usize) {
        (self.find(e.from), self.find(e.to))
    }

    fn merge(&mut self, a: usize, b: usize) -> usize {
        let (keep, gone) = (a.min(b), a.max(b));
        self.parent[gone] = keep;
        let v = std::mem::take(&mut self.vertices[gone]);
        for x in v.eigen {
            if !self.vertices[keep].eigen.insert(x.clone()) {
                *self.eigen_count.get_mut(&x).expect("counted") -= 1;
            }
        }
        let kv = &mut self.vertices[keep];
        kv.literals.extend(v.literals);
        kv.literals.sort();
        kv.metas.extend(v.metas);
        kv.members.extend(v.members);
        kv.members.sort();
        self.alive_vertices -= 1;
        keep
    }

    pub fn vertex_count(&self) -> usize {
        self.alive_vertices
    }

    pub fn edge_count(&self) -> usize {
        self.alive_edges
    }

    /// Representatives of the remaining vertices, in document order.
    pub fn vertex_ids(&self) -> Vec<usize> {
        (0..self.parent.len()).filter(|&i| self.parent[i] == i).collect()
    }

    pub fn vertex(&self, id: usize) -> &CVertex {
        &self.vertices[self.find(id)]
    }

    /// Remaining edges with endpoints resolved to representatives.
    pub fn live_edges(&self) -> Vec<(usize, CEdge)> {
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(i, e)| {
                e.as_ref().map(|e| {
                    let (a, b) = self.ends(e);
                    (
                        i,
                        CEdge {
                            kind: e.kind.clone(),
                            from: a,
                            to: b,
                        },
                    )
                })
            })
            .collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        let v = self.find(v);
        self.live_edges().iter().map(|(_, e)| (e.from == v) as usize + (e.to == v) as usize).sum()
    }

    /// Whether eigenvariable `e` occurs in some vertex other than `v`.
    pub fn occurs_outside(&self, e: &Var, v: usize) -> bool {
        let v = self.find(v);
        let total = self.eigen_count.get(e).copied().unwrap_or(0);
        total > self.vertices[v].eigen.contains(e) as usize
    }

    fn u_allowed(&self, e: &Var, from: usize, to: usize) -> bool {
        if from == to || self.occurs_outside(e, to) {
            return false;
        }
        if self.partial && !self.live.is_empty() {
            // A pending axiom link could still bind one of these
            // metavariables to e somewhere else.
            for w in self.vertex_ids() {
                if w != to && self.vertices[w].metas.iter().any(|m| self.live.contains(m)) {
                    return false;
                }
            }
        }
        true
    }

    /// All contractions applicable right now.
    pub fn applicable(&self) -> Vec<Move> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            let Some(e) = e else { continue };
            let (a, b) = self.ends(e);
            match &e.kind {
                EdgeKind::Solid if a != b => out.push(Move::C(i)),
                EdgeKind::Universal(x) if self.u_allowed(x, a, b) => out.push(Move::U(i)),
                _ => {}
            }
        }
        for (p, &[e1, e2]) in self.pairs.iter().enumerate() {
            if let (Some(x), Some(y)) = (&self.edges[e1], &self.edges[e2]) {
                let ((a1, b1), (a2, b2)) = (self.ends(x), self.ends(y));
                if a1 == a2 && b1 == b2 && a1 != b1 {
                    out.push(Move::P(p));
                }
            }
        }
        out
    }

    pub fn apply(&mut self, mv: Move) {
        self.trace.push(Step {
            mv,
            vertices_before: self.alive_vertices,
            edges_before: self.alive_edges,
        });
        match mv {
            Move::C(i) => {
                let e = self.edges[i].clone().expect("live edge");
                let (a, b) = self.ends(&e);
                self.remove_edge(i);
                self.merge(a, b);
            }
            Move::P(p) => {
                let [e1, e2] = self.pairs[p];
                let e = self.edges[e1].clone().expect("live edge");
                self.remove_edge(e1);
                self.remove_edge(e2);
                self.add_edge(EdgeKind::Solid, e.from, e.to);
            }
            Move::U(i) => {
                let e = self.edges[i].clone().expect("live edge");
                let EdgeKind::Universal(x) = &e.kind else { unreachable!() };
                let (a, b) = self.ends(&e);
                self.remove_edge(i);
                let k = self.merge(a, b);
                if self.vertices[k].eigen.remove(x) {
                    *self.eigen_count.get_mut(x).expect("counted") -= 1;
                }
            }
        }
    }

    /// Eager normalization: c first, then p, then u.
    pub fn contract(mut self) -> Contracted {
        loop {
            let moves = self.applicable();
            let pick = moves
                .iter()
                .find(|m| matches!(m, Move::C(_)))
                .or_else(|| moves.iter().find(|m| matches!(m, Move::P(_))))
                .or_else(|| moves.first());
            match pick {
                Some(&m) => self.apply(m),
                None => break,
            }
        }
        Contracted::from(self)
    }

    /// Normalization choosing uniformly among applicable contractions.
    pub fn contract_random<R: Rng + ?Sized>(mut self, rng: &mut R) -> Contracted {
        loop {
            let moves = self.applicable();
            match moves.choose(rng) {
                Some(&m) => self.apply(m),
                None => break,
            }
        }
        Contracted::from(self)
    }

    pub fn is_single_vertex(&self) -> bool {
        self.alive_vertices == 1 && self.alive_edges == 0
    }

    /// Eigenvariable sets of the remaining vertices, in document order.
    pub fn labels(&self) -> Vec<BTreeSet<Var>> {
        self.vertex_ids().into_iter().map(|v| self.vertices[v].eigen.clone()).collect()
    }
}

/// Result of normalizing a contraction graph.
#[derive(Debug, Clone)]
pub enum Contracted {
    Net(ContractionGraph),
    Stuck(ContractionGraph),
}

impl From<ContractionGraph> for Contracted {
    fn from(g: ContractionGraph) -> Contracted {
        if g.is_single_vertex() {
            Contracted::Net(g)
        } else {
            Contracted::Stuck(g)
        }
    }
}

impl Contracted {
    pub fn is_net(&self) -> bool {
        matches!(self, Contracted::Net(_))
    }

    pub fn graph(&self) -> &ContractionGraph {
        match self {
            Contracted::Net(g) | Contracted::Stuck(g) => g,
        }
    }

    pub fn verdict(&self) -> Verdict {
        if self.is_net() {
            Verdict::Net
        } else {
            Verdict::Stuck
        }
    }
}

// ---------------------------------------------------------------------------
// Cut composition and elimination

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CutError {
    #[error("cut formulas differ: {0} vs {1}")]
    Mismatch(String, String),
    #[error("node {0} is not a conclusion of the right polarity")]
    NotAConclusion(NodeId),
    #[error(transparent)]
    Unify(#[from] UnifyError),
}

/// Composes `left` (with positive conclusion `a_pos`) and `right` (with
/// negative conclusion `a_neg`) by a cut on those two formulas.
pub fn compose_cut(left: &ProofStructure, a_pos: NodeId, right: &ProofStructure, a_neg: NodeId) -> Result<ProofStructure, CutError> {
    let (fl, fr) = (&left.frame, &right.frame);
    if !fl.is_root(a_pos) || fl.nodes[a_pos].polarity != Polarity::Positive {
        return Err(CutError::NotAConclusion(a_pos));
    }
    if !fr.is_root(a_neg) || fr.nodes[a_neg].polarity != Polarity::Negative {
        return Err(CutError::NotAConclusion(a_neg));
    }
    let (ta, tb) = (fl.nodes[a_pos].formula.apply(&left.subst), fr.nodes[a_neg].formula.apply(&right.subst));
    if !ta.alpha_eq(&tb) {
        return Err(CutError::Mismatch(ta.to_string(), tb.to_string()));
    }
    let off_n = fl.nodes.len();
    let off_l = fl.links.len();
    let mut frame = (**fl).clone();
    for n in &fr.nodes {
        let mut n = n.clone();
        n.link = n.link.map(|l| l + off_l);
        n.parent = n.parent.map(|l| l + off_l);
        frame.nodes.push(n);
    }
    for l in &fr.links {
        frame.links.push(Link {
            kind: l.kind.clone(),
            premisses: l.premisses.iter().map(|p| p + off_n).collect(),
            conclusions: l.conclusions.iter().map(|p| p + off_n).collect(),
        });
    }
    frame.literals.extend(fr.literals.iter().map(|l| l + off_n));
    let a_neg = a_neg + off_n;
    frame.conclusions = fl
        .conclusions
        .iter()
        .copied()
        .filter(|&c| c != a_pos)
        .chain(fr.conclusions.iter().map(|c| c + off_n).filter(|&c| c != a_neg))
        .collect();
    // Keep the order antecedent first, succedent last.
    frame.conclusions.sort_by_key(|&c| (frame.nodes[c].polarity == Polarity::Positive, c));
    frame.push_link(LinkKind::Cut, vec![a_pos, a_neg], vec![]);
    let mut axioms = left.axioms.clone();
    axioms.extend(right.axioms.iter().map(|&(a, b)| (a + off_n, b + off_n)));
    axioms.sort();
    let subst = left.subst.union(&right.subst)?;
    Ok(ProofStructure {
        frame: Arc::new(frame),
        axioms,
        subst,
    })
}

/// Which conversion a cut-elimination step performed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutCase {
    Axiom,
    TensorPar,
    Quantifier,
}

/// Eliminates all cuts by local conversions. The input must be a net.
pub fn eliminate_cut(ps: &ProofStructure) -> ProofStructure {
    eliminate_cut_traced(ps).0
}

pub fn eliminate_cut_traced(ps: &ProofStructure) -> (ProofStructure, Vec<CutCase>) {
    let mut frame = (*ps.frame).clone();
    let mut axioms = ps.axioms.clone();
    let mut subst = ps.subst.clone();
    let mut dead_nodes = BTreeSet::new();
    let mut dead_links = BTreeSet::new();
    let mut cases = Vec::new();
    while let Some(cut) = (0..frame.links.len()).find(|l| !dead_links.contains(l) && frame.links[*l].kind == LinkKind::Cut) {
        dead_links.insert(cut);
        let [p, q] = [frame.links[cut].premisses[0], frame.links[cut].premisses[1]];
        let (p, q) = if frame.nodes[p].polarity == Polarity::Positive { (p, q) } else { (q, p) };
        dead_nodes.insert(p);
        dead_nodes.insert(q);
        if frame.nodes[p].is_literal() {
            // Splice: r ~ p, cut(p, q), q ~ s  becomes  r ~ s.
            let ap = axioms.iter().position(|&(x, y)| x == p || y == p).expect("axiom on p");
            let (_, r) = axioms.remove(ap);
            let aq = axioms.iter().position(|&(x, y)| x == q || y == q).expect("axiom on q");
            let (s, _) = axioms.remove(aq);
            axioms.push((s, r));
            cases.push(CutCase::Axiom);
            continue;
        }
        let (lp, lq) = (frame.nodes[p].link.expect("compound"), frame.nodes[q].link.expect("compound"));
        dead_links.insert(lp);
        dead_links.insert(lq);
        let (pp, qp) = (frame.links[lp].premisses.clone(), frame.links[lq].premisses.clone());
        let new_cuts: Vec<(NodeId, NodeId)> = match (&frame.links[lp].kind, &frame.links[lq].kind) {
            (LinkKind::TensorL, LinkKind::Par) | (LinkKind::Par, LinkKind::TensorL) => {
                cases.push(CutCase::TensorPar);
                match &frame.nodes[p].formula {
                    // A⊗B⁺ has premisses A⁺,B⁺; A⊗B⁻ has A⁻,B⁻.
                    MillFormula::Tensor(..) => vec![(pp[0], qp[0]), (pp[1], qp[1])],
                    // A⊸B⁺ has A⁻,B⁺; A⊸B⁻ has A⁺,B⁻.
                    _ => vec![(qp[0], pp[0]), (pp[1], qp[1])],
                }
            }
            (LinkKind::UniversalL(e), LinkKind::ExistentialL(x)) | (LinkKind::ExistentialL(x), LinkKind::UniversalL(e)) => {
                cases.push(CutCase::Quantifier);
                let witness = subst.apply(&Term::Var(x.clone()));
                subst = subst.instantiate_rigid(e, &witness).expect("eigenvariable cannot occur in its witness");
                vec![(pp[0], qp[0])]
            }
            (a, b) => panic!("cut between incompatible links {:?} and {:?}", a, b),
        };
        for (a, b) in new_cuts {
            frame.nodes[a].parent = None;
            frame.nodes[b].parent = None;
            frame.push_link(LinkKind::Cut, vec![a, b], vec![]);
        }
    }
    // Compact.
    let mut node_map = vec![usize::MAX; frame.nodes.len()];
    let mut nodes = Vec::new();
    for (i, n) in frame.nodes.iter().enumerate() {
        if !dead_nodes.contains(&i) {
            node_map[i] = nodes.len();
            nodes.push(n.clone());
        }
    }
    let mut link_map = vec![usize::MAX; frame.links.len()];
    let mut links = Vec::new();
    for (i, l) in frame.links.iter().enumerate() {
        if !dead_links.contains(&i) {
            link_map[i] = links.len();
            links.push(Link {
                kind: l.kind.clone(),
                premisses: l.premisses.iter().map(|&p| node_map[p]).collect(),
                conclusions: l.conclusions.iter().map(|&p| node_map[p]).collect(),
            });
        }
    }
    for n in &mut nodes {
        n.link = n.link.and_then(|l| if dead_links.contains(&l) { None } else { Some(link_map[l]) });
        n.parent = n.parent.and_then(|l| if dead_links.contains(&l) { None } else { Some(link_map[l]) });
    }
    let literals = frame.literals.iter().filter(|l| !dead_nodes.contains(l)).map(|&l| node_map[l]).collect();
    let conclusions = frame.conclusions.iter().map(|&c| node_map[c]).collect();
    let mut axioms: Vec<(NodeId, NodeId)> = axioms.into_iter().map(|(a, b)| (node_map[a], node_map[b])).collect();
    axioms.sort();
    let out = ProofStructure {
        frame: Arc::new(ProofFrame {
            nodes,
            links,
            literals,
            conclusions,
        }),
        axioms,
        subst,
    };
    (out, cases)
}

// ---------------------------------------------------------------------------
// DOT output

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// DOT rendering of a proof structure: solid edges for synchronous links,
/// dotted edges for asynchronous ones, eigenvariables on universal links.
pub fn render_dot(ps: &ProofStructure) -> String {
    let frame = &ps.frame;
    let mut namer = Namer::default();
    let mut out = String::from("digraph proof {\n  rankdir=BT;\n  node [shape=plaintext];\n");
    for (i, n) in frame.nodes.iter().enumerate() {
        let text = n.formula.apply(&ps.subst).render(&mut namer, true);
        let _ = writeln!(out, "  n{} [label=\"{}{}\"];", i, n.polarity.sign(), dot_escape(&text));
    }
    for (a, b) in &ps.axioms {
        let _ = writeln!(out, "  n{} -> n{} [dir=none, constraint=false];", a, b);
    }
    for l in &frame.links {
        let style = if l.kind.is_dotted() { ", style=dotted" } else { "" };
        match &l.kind {
            LinkKind::Cut | LinkKind::Axiom => {
                let ends = if l.kind == LinkKind::Cut { &l.premisses } else { &l.conclusions };
                let _ = writeln!(out, "  n{} -> n{} [dir=none, constraint=false];", ends[0], ends[1]);
            }
            _ => {
                let label = match &l.kind {
                    LinkKind::UniversalL(e) => format!(", label=\"{}\"", dot_escape(&namer.name(e))),
                    _ => String::new(),
                };
                for &p in &l.premisses {
                    let _ = writeln!(out, "  n{} -> n{} [dir=none{}{}];", l.conclusions[0], p, style, label);
                }
            }
        }
    }
    out.push_str("}\n");
    out
}

/// DOT rendering of a contraction graph, vertices labelled by their
/// eigenvariable sets.
pub fn render_graph_dot(g: &ContractionGraph) -> String {
    let mut namer = Namer::default();
    let mut out = String::from("graph contraction {\n  node [shape=ellipse];\n");
    for v in g.vertex_ids() {
        let names: Vec<String> = g.vertices[v].eigen.iter().map(|e| namer.name(e)).collect();
        let _ = writeln!(out, "  v{} [label=\"{{{}}}\"];", v, dot_escape(&names.join(",")));
    }
    for (_, e) in g.live_edges() {
        let attrs = match &e.kind {
            EdgeKind::Solid => String::new(),
            EdgeKind::Par(_) => " [style=dotted]".to_string(),
            EdgeKind::Universal(x) => format!(" [style=dotted, label=\"{}\"]", dot_escape(&namer.name(x))),
        };
        let _ = writeln!(out, "  v{} -- v{}{};", e.from, e.to, attrs);
    }
    out.push_str("}\n");
    out
}

/// Enumerates every perfect matching of conjugate literals (no
/// unification check). Used as the brute-force reference.
pub fn all_matchings(frame: &ProofFrame) -> Vec<Vec<(NodeId, NodeId)>> {
    fn go(frame: &ProofFrame, rest: &[NodeId], acc: &mut Vec<(NodeId, NodeId)>, out: &mut Vec<Vec<(NodeId, NodeId)>>) {
        let Some((&first, tail)) = rest.split_first() else {
            out.push(acc.clone());
            return;
        };
        for (i, &other) in tail.iter().enumerate() {
            if conjugate(frame, first, other) {
                let mut remaining = tail.to_vec();
                remaining.remove(i);
                acc.push((first, other));
                go(frame, &remaining, acc, out);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(frame, &frame.literals, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_mill, parse_sequent};

    pub(crate) fn structure(seq: &str) -> Vec<ProofStructure> {
        let s = parse_sequent(seq).unwrap();
        let frame = Arc::new(unfold_sequent(&s));
        all_matchings(&frame).into_iter().filter_map(|m| axiom_match(frame.clone(), &m).ok()).collect()
    }

    fn names(set: &BTreeSet<Var>) -> BTreeSet<String> {
        set.iter().map(|v| v.hint().to_string()).collect()
    }

    fn label_names(g: &ContractionGraph) -> Vec<BTreeSet<String>> {
        g.labels().iter().map(names).collect()
    }

    fn sets(xs: &[&[&str]]) -> Vec<BTreeSet<String>> {
        xs.iter().map(|s| s.iter().map(|x| x.to_string()).collect()).collect()
    }

    const FORALL_EXISTS: &str = "forall x. exists y. f(x,y) |- exists v. forall w. f(w,v)";
    const EXISTS_FORALL: &str = "exists x. forall y. f(x,y) |- forall v. exists w. f(w,v)";

    #[test]
    fn forall_exists_unfolding() {
        let s = parse_sequent(FORALL_EXISTS).unwrap();
        let frame = unfold_sequent(&s);
        assert_eq!(frame.nodes.len(), 6);
        assert_eq!(frame.literals.len(), 2);
        let eig: BTreeSet<String> = frame.eigenvariables().iter().map(|v| v.hint().to_string()).collect();
        assert_eq!(eig, ["w", "y"].iter().map(|s| s.to_string()).collect());
        assert_eq!(frame.metavariables().len(), 2);
    }

    #[test]
    fn forall_exists_structure_is_not_a_net() {
        let ps = structure(FORALL_EXISTS);
        assert_eq!(ps.len(), 1);
        let ps = &ps[0];
        let g = ps.contraction_graph();
        assert_eq!(label_names(&g), sets(&[&[], &["w"], &["w", "y"], &[], &["y"], &["w", "y"]]));
        assert!(!check_switchings(ps));
        let out = g.contract();
        assert!(!out.is_net());
        let g = out.graph();
        let mut labels = label_names(g);
        labels.sort();
        assert_eq!(labels, sets(&[&["w"], &["w", "y"], &["y"]]));
        let mut eig: Vec<String> = g
            .live_edges()
            .iter()
            .filter_map(|(_, e)| match &e.kind {
                EdgeKind::Universal(x) => Some(x.hint().to_string()),
                _ => None,
            })
            .collect();
        eig.sort();
        assert_eq!(eig, vec!["w", "y"]);
    }

    #[test]
    fn exists_forall_structure_is_a_net() {
        let ps = structure(EXISTS_FORALL);
        assert_eq!(ps.len(), 1);
        let ps = &ps[0];
        let g = ps.contraction_graph();
        let mut labels = label_names(&g);
        labels.sort();
        let mut want = sets(&[&[], &["x"], &["x", "v"], &["x", "v"], &["v"], &[]]);
        want.sort();
        assert_eq!(labels, want);
        assert!(check_switchings(ps));
        let out = g.contract();
        assert!(out.is_net());
        let us = out.graph().trace.iter().filter(|s| matches!(s.mv, Move::U(_))).count();
        assert_eq!(us, 2);
    }

    #[test]
    fn identity_axiom() {
        let ps = structure("a |- a");
        assert_eq!(ps.len(), 1);
        assert!(check_switchings(&ps[0]));
        assert!(ps[0].is_net());
        let g = ContractionGraph::build(&ps[0].frame, &[], &Substitution::new(), None);
        assert_eq!(g.vertex_count(), 2);
        let single = structure("|- a");
        assert!(single.is_empty());
        let frame = unfold(&[], &parse_mill("a").unwrap());
        let g = ContractionGraph::build(&frame, &[], &Substitution::new(), None);
        assert!(g.contract().is_net());
    }

    #[test]
    fn mismatched_predicates_fail() {
        let s = parse_sequent("np |- s").unwrap();
        let frame = Arc::new(unfold_sequent(&s));
        let (a, b) = (frame.literals[0], frame.literals[1]);
        assert!(matches!(axiom_match(frame, &[(a, b)]), Err(MatchError::NotConjugate(..))));
    }

    #[test]
    fn forall_exists_match_binds_metavariables_to_eigenvariables() {
        let ps = &structure(FORALL_EXISTS)[0];
        let bound: BTreeSet<String> = ps
            .frame
            .metavariables()
            .iter()
            .map(|m| {
                let t = ps.subst.apply(&Term::Var(m.clone()));
                format!("{}={}", m.hint(), t.as_var().unwrap().hint())
            })
            .collect();
        assert_eq!(bound, ["v=y", "x=w"].iter().map(|s| s.to_string()).collect());
    }

    #[test]
    fn lolli_and_tensor_links() {
        let s = parse_sequent("a -o b, a |- b").unwrap();
        let frame = unfold_sequent(&s);
        assert_eq!(frame.links[0].kind, LinkKind::TensorL);
        let s = parse_sequent("|- a -o a").unwrap();
        let frame = unfold_sequent(&s);
        assert_eq!(frame.links[0].kind, LinkKind::Par);
        assert_eq!(frame.nodes[frame.literals[0]].polarity, Polarity::Negative);
        let ps = structure("|- a -o a");
        assert!(ps[0].is_net() && check_switchings(&ps[0]));
        let bad = structure("a * b |- b * a");
        assert_eq!(bad.len(), 1);
        assert!(bad[0].is_net());
        let nonlinear = structure("a -o a |- a");
        assert!(nonlinear.is_empty());
    }

    #[test]
    fn conservation_counts() {
        for seq in [FORALL_EXISTS, EXISTS_FORALL, "a -o b, b -o c |- a -o c", "a * b |- b * a"] {
            for ps in structure(seq) {
                let v0 = ps.contraction_graph().vertex_count();
                let out = ps.contraction_graph().contract();
                let g = out.graph();
                let mut merges = 0;
                for st in &g.trace {
                    match st.mv {
                        Move::C(_) | Move::U(_) => merges += 1,
                        Move::P(_) => {}
                    }
                }
                for w in g.trace.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    match a.mv {
                        Move::C(_) | Move::U(_) => {
                            assert_eq!(b.vertices_before + 1, a.vertices_before);
                            assert_eq!(b.edges_before + 1, a.edges_before);
                        }
                        Move::P(_) => {
                            assert_eq!(b.vertices_before, a.vertices_before);
                            assert_eq!(b.edges_before + 1, a.edges_before);
                        }
                    }
                }
                if out.is_net() {
                    assert_eq!(merges, v0 - 1);
                }
            }
        }
    }

    #[test]
    fn cut_elimination_cases() {
        let left = &structure("a, b |- a * b")[0];
        let right = &structure("a * b |- b * a")[0];
        let a_pos = *left.frame.conclusions.last().unwrap();
        let a_neg = right.frame.conclusions[0];
        let cut = compose_cut(left, a_pos, right, a_neg).unwrap();
        assert!(cut.is_net());
        assert!(check_switchings(&cut));
        let (out, cases) = eliminate_cut_traced(&cut);
        assert!(!out.has_cuts());
        assert!(cases.contains(&CutCase::TensorPar) && cases.contains(&CutCase::Axiom));
        assert!(out.is_net());
        assert!(out.axioms_hold());
        let direct = &structure("a, b |- b * a")[0];
        assert_eq!(out.matching_key(), direct.matching_key());

        let left = &structure("a(1) |- exists X. a(X)")[0];
        let right = &structure("exists X. a(X) |- exists Y. a(Y)")[0];
        let cut = compose_cut(left, *left.frame.conclusions.last().unwrap(), right, right.frame.conclusions[0]).unwrap();
        let (out, cases) = eliminate_cut_traced(&cut);
        assert!(cases.contains(&CutCase::Quantifier));
        assert!(out.is_net() && out.axioms_hold());
        let concl: Vec<String> = out.conclusions().iter().map(|(f, _)| f.to_string()).collect();
        assert_eq!(concl, vec!["a(1)", "exists Y. a(Y)"]);
    }

    #[test]
    fn dot_output_is_deterministic() {
        let ps = &structure(EXISTS_FORALL)[0];
        let d = render_dot(ps);
        assert_eq!(d, render_dot(ps));
        assert!(d.contains("style=dotted"));
        assert!(d.contains("label=\"v\"") || d.contains("label=\"y\""));
        let g = render_graph_dot(&ps.contraction_graph());
        assert!(g.starts_with("graph contraction"));
    }
}
