//! The contraction criterion on the two quantifier-swap sequents: one is
//! derivable, the other gets stuck on eigenvariable conditions.

use std::sync::Arc;

use mill1::formula::parse_sequent;
use mill1::oracle::all_structures;
use mill1::proofnet::{check_switchings, render_graph_dot, unfold_sequent, Move};

fn run(text: &str) {
    let seq = parse_sequent(text).unwrap();
    println!("{}", seq.render(true));
    let frame = Arc::new(unfold_sequent(&seq));
    for ps in all_structures(&frame) {
        println!("  axioms: {}", ps.describe_axioms().join(", "));
        let out = ps.contraction_graph().contract();
        for step in &out.graph().trace {
            let name = match step.mv {
                Move::C(_) => "c",
                Move::P(_) => "p",
                Move::U(_) => "u",
            };
            println!("  {name}  ({} vertices, {} edges before)", step.vertices_before, step.edges_before);
        }
        println!("  contraction: {}   switchings: {}", if out.is_net() { "net" } else { "stuck" }, check_switchings(&ps));
        if !out.is_net() {
            print!("{}", render_graph_dot(out.graph()));
        }
    }
}

fn main() {
    run("forall x. exists y. f(x,y) |- exists v. forall w. f(w,v)");
    println!();
    run("exists x. forall y. f(x,y) |- forall v. exists w. f(w,v)");
}
