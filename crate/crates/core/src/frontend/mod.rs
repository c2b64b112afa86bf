//! Source text to core terms: lexing, parsing, desugaring, and binder
//! renaming.
//!
//! `let x : T = M; N` becomes `(fn x: T. N)@Θ M` where `Θ` is the party
//! set in scope. Without an annotation the bound term is typed first and
//! its type is used. Constructor arguments that are not values are bound
//! to fresh variables the same way.

mod desugar;
mod lexer;
mod parser;
mod print;
mod surface;
mod uniquify;

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::ast::{Expr, PartySet};
use crate::span::SourceSpan;
use crate::typecheck::{typecheck, TypeEnv, TypeError};
use crate::Type;

pub use desugar::desugar;
pub use lexer::{lex, Tok, Token};
pub use parser::parse;
pub use print::print_expr;
pub use surface::{Alias, SData, SExpr, SExprKind, SType, SurfaceProgram};
pub use uniquify::uniquify;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: expected {expected}, found {found}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub expected: String,
    pub found: String,
}

impl ParseError {
    pub fn new(span: SourceSpan, expected: &str, found: &str) -> Self {
        ParseError {
            span,
            expected: expected.to_owned(),
            found: found.to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DesugarError {
    #[error("{span}: unknown type alias `{name}`")]
    UnknownAlias { name: String, span: SourceSpan },
    #[error("{span}: cannot infer a type for `{var}` ({reason}); add an annotation")]
    NeedsAnnotation {
        var: String,
        span: SourceSpan,
        reason: String,
    },
    #[error("the program names no parties; pass a party set explicitly")]
    NoParties,
    #[error("{0}")]
    Type(TypeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Desugar(#[from] DesugarError),
    #[error("type error at {at}: {err}", at = location(&.0.span), err = .0)]
    Type(TypeError),
}

fn location(span: &Option<SourceSpan>) -> String {
    span.map_or_else(|| "?".to_owned(), |s| s.to_string())
}

/// A compiled program plus the source location of every core node.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub expr: Expr,
    pub theta: PartySet,
    pub spans: HashMap<Vec<u32>, SourceSpan>,
}

impl Compiled {
    /// The span of the node at `path`, or of its nearest located ancestor.
    pub fn span_of(&self, path: &[u32]) -> Option<SourceSpan> {
        (0..=path.len())
            .rev()
            .find_map(|n| self.spans.get(&path[..n]).copied())
    }

    /// Attaches a source span to an error found in `self.expr`.
    pub fn locate(&self, mut err: TypeError) -> TypeError {
        if err.span.is_none() {
            err.span = self.span_of(&err.path);
        }
        err
    }

    pub fn env(&self) -> TypeEnv {
        TypeEnv::new(self.theta.clone())
    }
}

/// Parses and desugars `src`. The top-level party set is `theta` when
/// given and otherwise every party the program names.
pub fn compile(src: &str, theta: Option<&PartySet>) -> Result<Compiled, FrontendError> {
    let program = parse(src)?;
    let theta = match theta {
        Some(t) => t.clone(),
        None => {
            let mut ps = BTreeSet::new();
            program.body.parties(&mut ps);
            PartySet::new(ps).map_err(|_| DesugarError::NoParties)?
        }
    };
    let (expr, spans) = desugar(&program, &theta)?;
    Ok(Compiled {
        expr: uniquify(&expr),
        theta,
        spans,
    })
}

/// Parses the canonical rendering of a core term, so that
/// `parse_core(&e.to_string()) == Ok(e)`. Unlike [`compile`], binders are
/// not renamed.
pub fn parse_core(src: &str) -> Result<Expr, FrontendError> {
    let program = parse(src)?;
    let mut ps = BTreeSet::new();
    program.body.parties(&mut ps);
    let theta = PartySet::new(ps).map_err(|_| DesugarError::NoParties)?;
    Ok(desugar(&program, &theta)?.0)
}

/// Compiles and type checks `src`.
pub fn check(src: &str, theta: Option<&PartySet>) -> Result<(Compiled, Type), FrontendError> {
    let compiled = compile(src, theta)?;
    match typecheck(&compiled.env(), &compiled.expr) {
        Ok(t) => Ok((compiled, t)),
        Err(e) => Err(FrontendError::Type(compiled.locate(e))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typecheck::TypeErrorKind;

    #[test]
    fn compiles_a_simple_message() {
        let (c, t) = check("com[s][r] ()@[s]", None).unwrap();
        assert_eq!(c.theta, PartySet::of(&["r", "s"]));
        assert_eq!(t.to_string(), "()@[r]");
    }

    #[test]
    fn lets_become_applications() {
        let (c, _) = check("let x = ()@[p]; x", None).unwrap();
        assert_eq!(c.expr.to_string(), "(fn x: ()@[p]. x)@[p] ()@[p]");
    }

    #[test]
    fn type_errors_carry_locations() {
        let err = check("let x = ()@[p];\n  fst[p] x", None).unwrap_err();
        let FrontendError::Type(e) = err else {
            panic!("{err}")
        };
        assert_eq!(e.kind, TypeErrorKind::ArgMismatch);
        assert_eq!(e.span.unwrap().line, 2);
    }

    #[test]
    fn core_terms_parse_back() {
        let src = "(fn x$1: (() + ())@[p]. case[p] x$1 of Inl a => a; Inr b => b)@[p] (Inl ()@[p])";
        assert_eq!(parse_core(src).unwrap().to_string(), src);
    }

    #[test]
    fn explicit_theta_is_used() {
        let theta = PartySet::of(&["p", "q"]);
        let c = compile("()@[p]", Some(&theta)).unwrap();
        assert_eq!(c.theta, theta);
        assert!(matches!(
            compile("x", None),
            Err(FrontendError::Desugar(DesugarError::NoParties))
        ));
    }
}
