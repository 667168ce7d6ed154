//! Checker for Kaisar proofs of constructive hybrid-game strategies.

pub mod arith;
pub mod check;
pub mod ast;
pub mod defs;
pub mod driver;
pub mod elab;
pub mod lexer;
pub mod metrics;
pub mod ode;
pub mod parser;
pub mod printer;
pub mod refine;
pub mod reify;
pub mod span;
pub mod vars;
