//! Proof-net theorem proving for first-order multiplicative intuitionistic
//! linear logic (MILL1), with a Displacement-calculus grammar front end.

pub mod cli;
pub mod formula;
pub mod grammar;
pub mod oracle;
pub mod proofnet;
pub mod prover;
pub mod semantics;
pub mod syntax;
pub mod term;
pub mod translate;
