//! Real arithmetic: normal forms and decision procedures.

pub mod poly;
pub mod ratfun;
pub mod eval;
pub mod linear;
pub mod simplex;
pub mod prop;
pub mod smt;
pub mod valid;
pub mod lie;
