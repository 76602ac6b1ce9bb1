//! Random sequents and structures for the property harnesses, and the
//! brute-force reference search.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, RngExt};

use crate::formula::{MillFormula, Polarity, Sequent};
use crate::proofnet::{
    all_matchings, axiom_match, check_switchings, compose_cut, eliminate_cut, unfold_sequent, ContractionGraph, ProofFrame,
    ProofStructure,
};
use crate::prover::{prove_frame, ProverConfig};
use crate::term::{Term, Var};

/// Predicates and their arities.
const PREDS: [(&str, usize); 3] = [("p", 1), ("q", 2), ("r", 0)];
const CONSTS: [&str; 2] = ["a", "b"];

#[derive(Debug, Clone)]
pub struct GenConfig {
    /// Upper bound on the number of literals (even).
    pub max_literals: usize,
    /// Upper bound on par plus universal links.
    pub max_async: usize,
    /// Number of predicates used, 1 to 3.
    pub preds: usize,
    pub quantifiers: bool,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        GenConfig {
            max_literals: 6,
            max_async: 4,
            preds: 3,
            quantifiers: true,
        }
    }
}

enum Shape {
    Leaf(usize),
    Tensor(Box<Shape>, Box<Shape>),
    Lolli(Box<Shape>, Box<Shape>),
    Forall(Box<Shape>),
    Exists(Box<Shape>),
}

struct ShapeGen<'a, R: Rng + ?Sized> {
    rng: &'a mut R,
    quantifiers: bool,
    /// Polarity of each leaf, by leaf index.
    leaves: Vec<Polarity>,
}

impl<R: Rng + ?Sized> ShapeGen<'_, R> {
    fn shape(&mut self, size: usize, pol: Polarity) -> Shape {
        if self.quantifiers && self.rng.random_bool(0.3) {
            let inner = Box::new(self.shape(size, pol));
            return if self.rng.random_bool(0.5) { Shape::Forall(inner) } else { Shape::Exists(inner) };
        }
        if size <= 1 {
            self.leaves.push(pol);
            return Shape::Leaf(self.leaves.len() - 1);
        }
        let left = self.rng.random_range(1..size);
        if self.rng.random_bool(0.5) {
            let a = self.shape(left, pol);
            let b = self.shape(size - left, pol);
            Shape::Tensor(Box::new(a), Box::new(b))
        } else {
            let a = self.shape(left, pol.flip());
            let b = self.shape(size - left, pol);
            Shape::Lolli(Box::new(a), Box::new(b))
        }
    }
}

fn realize<R: Rng + ?Sized>(s: &Shape, preds: &[usize], scope: &mut Vec<Var>, rng: &mut R) -> MillFormula {
    match s {
        Shape::Leaf(i) => {
            let (name, arity) = PREDS[preds[*i]];
            let args = (0..arity)
                .map(|_| {
                    if !scope.is_empty() && rng.random_bool(0.7) {
                        Term::Var(scope[rng.random_range(0..scope.len())].clone())
                    } else {
                        Term::constant(CONSTS[rng.random_range(0..CONSTS.len())])
                    }
                })
                .collect();
            MillFormula::atom(name, args)
        }
        Shape::Tensor(a, b) => MillFormula::tensor(realize(a, preds, scope, rng), realize(b, preds, scope, rng)),
        Shape::Lolli(a, b) => MillFormula::lolli(realize(a, preds, scope, rng), realize(b, preds, scope, rng)),
        Shape::Forall(a) | Shape::Exists(a) => {
            let v = Var::fresh(["x", "y", "z"][scope.len() % 3]);
            scope.push(v.clone());
            let body = realize(a, preds, scope, rng);
            scope.pop();
            if matches!(s, Shape::Forall(_)) {
                MillFormula::forall(v, body)
            } else {
                MillFormula::exists(v, body)
            }
        }
    }
}

/// A random closed sequent whose literals can be perfectly paired by
/// polarity and predicate.
pub fn random_sequent<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig) -> Sequent {
    loop {
        let most = (cfg.max_literals / 2).max(1);
        // Favour the largest size: small sequents are nearly always nets.
        let pairs = if rng.random_bool(0.5) { most } else { rng.random_range(1..=most) };
        let total = 2 * pairs;
        let nformulas = rng.random_range(1..=3.min(total));
        let mut sizes = vec![1usize; nformulas];
        for _ in nformulas..total {
            let k = rng.random_range(0..nformulas);
            sizes[k] += 1;
        }
        let mut gen = ShapeGen {
            rng: &mut *rng,
            quantifiers: cfg.quantifiers,
            leaves: Vec::new(),
        };
        let mut shapes = Vec::new();
        for (i, &n) in sizes.iter().enumerate() {
            let pol = if i + 1 == nformulas { Polarity::Positive } else { Polarity::Negative };
            shapes.push(gen.shape(n, pol));
        }
        let leaves = gen.leaves;
        let mut pos: Vec<usize> = (0..leaves.len()).filter(|&i| leaves[i] == Polarity::Positive).collect();
        let neg: Vec<usize> = (0..leaves.len()).filter(|&i| leaves[i] == Polarity::Negative).collect();
        if pos.len() != neg.len() {
            continue;
        }
        pos.shuffle(rng);
        let mut preds = vec![0; leaves.len()];
        for (&p, &n) in pos.iter().zip(&neg) {
            let k = rng.random_range(0..cfg.preds.clamp(1, PREDS.len()));
            preds[p] = k;
            preds[n] = k;
        }
        let mut formulas: Vec<MillFormula> = shapes.iter().map(|s| realize(s, &preds, &mut Vec::new(), rng)).collect();
        let succedent = formulas.pop().expect("succedent");
        let seq = Sequent::new(formulas, succedent);
        if unfold_sequent(&seq).async_link_count() <= cfg.max_async {
            return seq;
        }
    }
}

/// Every matching of the frame that yields a proof structure.
pub fn all_structures(frame: &Arc<ProofFrame>) -> Vec<ProofStructure> {
    all_matchings(frame).into_iter().filter_map(|m| axiom_match(frame.clone(), &m).ok()).collect()
}

/// A random proof structure (net or not) over a random sequent.
pub fn random_structure<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig) -> ProofStructure {
    loop {
        let frame = Arc::new(unfold_sequent(&random_sequent(rng, cfg)));
        let all = all_structures(&frame);
        if !all.is_empty() {
            let i = rng.random_range(0..all.len());
            return all.into_iter().nth(i).expect("index in range");
        }
    }
}

/// Nets found by enumerating all matchings and running the switching check.
pub fn brute_force_nets(frame: &Arc<ProofFrame>) -> Vec<ProofStructure> {
    all_structures(frame).into_iter().filter(check_switchings).collect()
}

#[derive(Debug, Clone)]
pub struct Disagreement {
    pub sequent: String,
    pub axioms: Vec<String>,
    pub contraction: bool,
    pub switching: bool,
}

/// Compares the contraction verdict with the exhaustive switching verdict.
pub fn criterion_check(ps: &ProofStructure) -> Result<bool, Disagreement> {
    let c = ps.is_net();
    let s = check_switchings(ps);
    if c == s {
        Ok(c)
    } else {
        Err(Disagreement {
            sequent: structure_sequent(ps).to_string(),
            axioms: ps.describe_axioms(),
            contraction: c,
            switching: s,
        })
    }
}

/// Whether `orders` random contraction orders agree with eager contraction.
pub fn confluence_check<R: Rng + ?Sized>(g: &ContractionGraph, orders: usize, rng: &mut R) -> bool {
    let want = g.clone().contract().is_net();
    (0..orders).all(|_| g.clone().contract_random(rng).is_net() == want)
}

/// The sequent whose unfolding gave this structure.
pub fn structure_sequent(ps: &ProofStructure) -> Sequent {
    let f = &ps.frame;
    let mut ante = Vec::new();
    let mut succ = None;
    for &c in &f.conclusions {
        match f.nodes[c].polarity {
            Polarity::Negative => ante.push(f.nodes[c].formula.clone()),
            Polarity::Positive => succ = Some(f.nodes[c].formula.clone()),
        }
    }
    Sequent::new(ante, succ.expect("succedent"))
}

/// A random derivable sequent together with its first proof.
pub fn random_derivable<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig) -> (Sequent, ProofStructure) {
    loop {
        let seq = random_sequent(rng, cfg);
        let frame = Arc::new(unfold_sequent(&seq));
        let pc = ProverConfig {
            limit: Some(1),
            budget: 100_000,
            jobs: 1,
        };
        if let Ok(out) = prove_frame(frame, &pc) {
            if let Some(ps) = out.proofs.into_iter().next() {
                return (seq, ps);
            }
        }
    }
}

fn first_proof(seq: &Sequent) -> Option<ProofStructure> {
    let pc = ProverConfig {
        limit: Some(1),
        budget: 100_000,
        jobs: 1,
    };
    prove_frame(Arc::new(unfold_sequent(seq)), &pc).ok()?.proofs.into_iter().next()
}

/// A cut between a random derivable `Γ ⊢ A` and one of `A ⊢ A`,
/// `A, A ⊸ B ⊢ B` or `A ⊗ B ⊢ A ⊗ B`-style consumers of `A`.
pub fn random_cut_pair<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig) -> ProofStructure {
    loop {
        let (left_seq, left) = random_derivable(rng, cfg);
        let a = left_seq.succedent.clone();
        let b = random_sequent(rng, &GenConfig { max_literals: 2, ..cfg.clone() }).succedent;
        let right_seq = match rng.random_range(0..3) {
            0 => Sequent::new(vec![a.clone()], a.clone()),
            1 => Sequent::new(vec![a.clone(), MillFormula::lolli(a.clone(), b.clone())], b),
            _ => Sequent::new(vec![b.clone(), a.clone()], MillFormula::tensor(b, a.clone())),
        };
        let Some(right) = first_proof(&right_seq) else { continue };
        let a_pos = *left.frame.conclusions.last().expect("succedent");
        let a_neg = *right
            .frame
            .conclusions
            .iter()
            .find(|&&c| right.frame.nodes[c].polarity == Polarity::Negative && right.frame.nodes[c].formula.alpha_eq(&a))
            .expect("cut formula");
        if let Ok(ps) = compose_cut(&left, a_pos, &right, a_neg) {
            return ps;
        }
    }
}

/// Eliminates the cuts of `ps` and checks the result.
pub fn cut_elimination_check(ps: &ProofStructure) -> Result<ProofStructure, String> {
    if !ps.is_net() {
        return Err("input is not a net".into());
    }
    let out = eliminate_cut(ps);
    if out.has_cuts() {
        return Err("cuts remain".into());
    }
    let (mut before, mut after) = (ps.conclusions(), out.conclusions());
    if before.len() != after.len() {
        return Err("conclusion count changed".into());
    }
    for (f, p) in before.drain(..) {
        match after.iter().position(|(g, q)| *q == p && g.alpha_eq(&f)) {
            Some(i) => {
                after.remove(i);
            }
            None => return Err(format!("conclusion {} lost", f)),
        }
    }
    if !out.axioms_hold() {
        return Err("axiom links no longer unify".into());
    }
    if !out.is_net() {
        return Err("result is not a net".into());
    }
    Ok(out)
}
