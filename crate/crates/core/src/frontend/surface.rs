//! The surface syntax tree, before desugaring.

use crate::ast::{Party, PartySet};
use crate::span::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceProgram {
    pub aliases: Vec<Alias>,
    pub body: SExpr,
}

/// `type Name = data;`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alias {
    pub name: String,
    pub data: SData,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SData {
    Unit,
    Named(String, SourceSpan),
    Sum(Box<SData>, Box<SData>),
    Prod(Box<SData>, Box<SData>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SType {
    Data(SData, PartySet),
    Fun(Box<SType>, Box<SType>, PartySet),
    Tuple(Vec<SType>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SExpr {
    pub kind: SExprKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExprKind {
    Var(String),
    Unit(PartySet),
    Lambda {
        param: String,
        param_type: SType,
        body: Box<SExpr>,
        owners: PartySet,
    },
    Inl(Box<SExpr>),
    Inr(Box<SExpr>),
    Pair(Box<SExpr>, Box<SExpr>),
    Tuple(Vec<SExpr>),
    Fst(PartySet),
    Snd(PartySet),
    Lookup(usize, PartySet),
    Com(Party, PartySet),
    App(Box<SExpr>, Box<SExpr>),
    Case {
        guards: PartySet,
        scrutinee: Box<SExpr>,
        left_var: String,
        left: Box<SExpr>,
        right_var: String,
        right: Box<SExpr>,
    },
    Let {
        var: String,
        annotation: Option<SType>,
        bound: Box<SExpr>,
        body: Box<SExpr>,
    },
}

impl SExpr {
    /// Every identifier used anywhere, bound or free.
    pub fn identifiers(&self, out: &mut std::collections::BTreeSet<String>) {
        match &self.kind {
            SExprKind::Var(x) => {
                out.insert(x.clone());
            }
            SExprKind::Lambda { param, body, .. } => {
                out.insert(param.clone());
                body.identifiers(out);
            }
            SExprKind::Inl(e) | SExprKind::Inr(e) => e.identifiers(out),
            SExprKind::Pair(a, b) | SExprKind::App(a, b) => {
                a.identifiers(out);
                b.identifiers(out);
            }
            SExprKind::Tuple(es) => es.iter().for_each(|e| e.identifiers(out)),
            SExprKind::Case {
                scrutinee,
                left_var,
                left,
                right_var,
                right,
                ..
            } => {
                out.insert(left_var.clone());
                out.insert(right_var.clone());
                scrutinee.identifiers(out);
                left.identifiers(out);
                right.identifiers(out);
            }
            SExprKind::Let {
                var, bound, body, ..
            } => {
                out.insert(var.clone());
                bound.identifiers(out);
                body.identifiers(out);
            }
            SExprKind::Unit(_)
            | SExprKind::Fst(_)
            | SExprKind::Snd(_)
            | SExprKind::Lookup(..)
            | SExprKind::Com(..) => {}
        }
    }

    /// Every party named in the expression, including type annotations.
    pub fn parties(&self, out: &mut std::collections::BTreeSet<Party>) {
        let set = |out: &mut std::collections::BTreeSet<Party>, ps: &PartySet| {
            out.extend(ps.iter().cloned())
        };
        match &self.kind {
            SExprKind::Var(_) => {}
            SExprKind::Unit(o)
            | SExprKind::Fst(o)
            | SExprKind::Snd(o)
            | SExprKind::Lookup(_, o) => set(out, o),
            SExprKind::Com(s, r) => {
                out.insert(s.clone());
                set(out, r);
            }
            SExprKind::Lambda {
                param_type,
                body,
                owners,
                ..
            } => {
                set(out, owners);
                param_type.parties(out);
                body.parties(out);
            }
            SExprKind::Inl(e) | SExprKind::Inr(e) => e.parties(out),
            SExprKind::Pair(a, b) | SExprKind::App(a, b) => {
                a.parties(out);
                b.parties(out);
            }
            SExprKind::Tuple(es) => es.iter().for_each(|e| e.parties(out)),
            SExprKind::Case {
                guards,
                scrutinee,
                left,
                right,
                ..
            } => {
                set(out, guards);
                scrutinee.parties(out);
                left.parties(out);
                right.parties(out);
            }
            SExprKind::Let {
                annotation,
                bound,
                body,
                ..
            } => {
                if let Some(t) = annotation {
                    t.parties(out);
                }
                bound.parties(out);
                body.parties(out);
            }
        }
    }
}

impl SType {
    pub fn parties(&self, out: &mut std::collections::BTreeSet<Party>) {
        match self {
            SType::Data(_, o) => out.extend(o.iter().cloned()),
            SType::Fun(a, r, o) => {
                out.extend(o.iter().cloned());
                a.parties(out);
                r.parties(out);
            }
            SType::Tuple(ts) => ts.iter().for_each(|t| t.parties(out)),
        }
    }
}

impl SurfaceProgram {
    /// The same program with every source span zeroed, for comparing trees
    /// that came from different text.
    pub fn without_spans(&self) -> SurfaceProgram {
        SurfaceProgram {
            aliases: self
                .aliases
                .iter()
                .map(|a| Alias {
                    name: a.name.clone(),
                    data: a.data.without_spans(),
                    span: SourceSpan::default(),
                })
                .collect(),
            body: self.body.without_spans(),
        }
    }
}

impl SData {
    pub fn without_spans(&self) -> SData {
        match self {
            SData::Unit => SData::Unit,
            SData::Named(n, _) => SData::Named(n.clone(), SourceSpan::default()),
            SData::Sum(l, r) => {
                SData::Sum(Box::new(l.without_spans()), Box::new(r.without_spans()))
            }
            SData::Prod(l, r) => {
                SData::Prod(Box::new(l.without_spans()), Box::new(r.without_spans()))
            }
        }
    }
}

impl SType {
    pub fn without_spans(&self) -> SType {
        match self {
            SType::Data(d, o) => SType::Data(d.without_spans(), o.clone()),
            SType::Fun(a, r, o) => SType::Fun(
                Box::new(a.without_spans()),
                Box::new(r.without_spans()),
                o.clone(),
            ),
            SType::Tuple(ts) => SType::Tuple(ts.iter().map(SType::without_spans).collect()),
        }
    }
}

impl SExpr {
    pub fn without_spans(&self) -> SExpr {
        let b = |e: &SExpr| Box::new(e.without_spans());
        let kind = match &self.kind {
            SExprKind::Lambda {
                param,
                param_type,
                body,
                owners,
            } => SExprKind::Lambda {
                param: param.clone(),
                param_type: param_type.without_spans(),
                body: b(body),
                owners: owners.clone(),
            },
            SExprKind::Inl(e) => SExprKind::Inl(b(e)),
            SExprKind::Inr(e) => SExprKind::Inr(b(e)),
            SExprKind::Pair(x, y) => SExprKind::Pair(b(x), b(y)),
            SExprKind::App(x, y) => SExprKind::App(b(x), b(y)),
            SExprKind::Tuple(es) => SExprKind::Tuple(es.iter().map(SExpr::without_spans).collect()),
            SExprKind::Case {
                guards,
                scrutinee,
                left_var,
                left,
                right_var,
                right,
            } => SExprKind::Case {
                guards: guards.clone(),
                scrutinee: b(scrutinee),
                left_var: left_var.clone(),
                left: b(left),
                right_var: right_var.clone(),
                right: b(right),
            },
            SExprKind::Let {
                var,
                annotation,
                bound,
                body,
            } => SExprKind::Let {
                var: var.clone(),
                annotation: annotation.as_ref().map(SType::without_spans),
                bound: b(bound),
                body: b(body),
            },
            other => other.clone(),
        };
        SExpr {
            kind,
            span: SourceSpan::default(),
        }
    }
}
