//! A typed choreographic lambda calculus: syntax, masking, type checking,
//! central evaluation, endpoint projection, and a simulator for the
//! projected process network.

pub mod ast;
pub mod central;
pub mod frontend;
pub mod harness;
pub mod mask;
mod print;
pub mod project;
pub mod runtime;
pub mod span;
pub mod typecheck;

pub use ast::{Behavior, DataType, Expr, LocalValue, Party, PartySet, StepLabel, Type, Value, Var};
