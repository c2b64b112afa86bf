//! Endpoint projection and the `⊥`-floor normalizer.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ast::{Behavior, Expr, LocalValue, Party, PartySet, Value, Var};
use crate::runtime::Network;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProjectError {
    #[error("the program mentions no parties")]
    EmptyRoles,
}

/// Every party named anywhere in `e`, including inside type annotations.
pub fn roles(e: &Expr) -> Option<PartySet> {
    let mut out = BTreeSet::new();
    roles_expr(e, &mut out);
    PartySet::new(out).ok()
}

fn roles_expr(e: &Expr, out: &mut BTreeSet<Party>) {
    match e {
        Expr::Val(v) => roles_value(v, out),
        Expr::App(f, a) => {
            roles_expr(f, out);
            roles_expr(a, out);
        }
        Expr::Case {
            guards,
            scrutinee,
            left,
            right,
            ..
        } => {
            out.extend(guards.iter().cloned());
            roles_expr(scrutinee, out);
            roles_expr(left, out);
            roles_expr(right, out);
        }
    }
}

fn roles_value(v: &Value, out: &mut BTreeSet<Party>) {
    match v {
        Value::Var(_) => {}
        Value::Lambda {
            param_type,
            body,
            owners,
            ..
        } => {
            out.extend(owners.iter().cloned());
            out.extend(param_type.parties());
            roles_expr(body, out);
        }
        Value::Unit(o) | Value::Fst(o) | Value::Snd(o) | Value::Lookup(_, o) => {
            out.extend(o.iter().cloned())
        }
        Value::Com(s, r) => {
            out.insert(s.clone());
            out.extend(r.iter().cloned());
        }
        Value::Inl(v) | Value::Inr(v) => roles_value(v, out),
        Value::Pair(a, b) => {
            roles_value(a, out);
            roles_value(b, out);
        }
        Value::Tuple(vs) => vs.iter().for_each(|v| roles_value(v, out)),
    }
}

/// Collapses `⊥`-equivalent forms at the root only, assuming the children
/// are already normal.
fn floor_local_node(l: LocalValue) -> LocalValue {
    let collapses = match &l {
        LocalValue::Inl(x) | LocalValue::Inr(x) => **x == LocalValue::Bottom,
        LocalValue::Pair(a, b) => **a == LocalValue::Bottom && **b == LocalValue::Bottom,
        LocalValue::Tuple(ls) => ls.iter().all(|x| *x == LocalValue::Bottom),
        _ => false,
    };
    if collapses {
        LocalValue::Bottom
    } else {
        l
    }
}

pub(crate) fn floor_node(b: Behavior) -> Behavior {
    match b {
        Behavior::Val(l) => Behavior::Val(floor_local_node(l)),
        Behavior::App(f, a) if f.is_bottom() && a.is_value() => Behavior::BOTTOM,
        Behavior::Case {
            scrutinee,
            left,
            right,
            ..
        } if scrutinee.is_bottom() && left.is_bottom() && right.is_bottom() => Behavior::BOTTOM,
        other => other,
    }
}

/// The `⊥`-floor of a behavior, computed bottom-up.
pub fn floor(b: &Behavior) -> Behavior {
    let b = match b {
        Behavior::Val(l) => Behavior::Val(floor_local(l)),
        Behavior::App(f, a) => Behavior::app(floor(f), floor(a)),
        Behavior::Case {
            scrutinee,
            left_var,
            left,
            right_var,
            right,
        } => Behavior::Case {
            scrutinee: Box::new(floor(scrutinee)),
            left_var: left_var.clone(),
            left: Box::new(floor(left)),
            right_var: right_var.clone(),
            right: Box::new(floor(right)),
        },
    };
    floor_node(b)
}

pub fn floor_local(l: &LocalValue) -> LocalValue {
    let l = match l {
        LocalValue::Lambda { param, body } => LocalValue::Lambda {
            param: param.clone(),
            body: Box::new(floor(body)),
        },
        LocalValue::Inl(x) => LocalValue::inl(floor_local(x)),
        LocalValue::Inr(x) => LocalValue::inr(floor_local(x)),
        LocalValue::Pair(a, b) => LocalValue::pair(floor_local(a), floor_local(b)),
        LocalValue::Tuple(ls) => LocalValue::Tuple(ls.iter().map(floor_local).collect()),
        other => other.clone(),
    };
    floor_local_node(l)
}

/// `b[x := l]` in the local language. No masking happens here; callers
/// floor the result.
pub fn local_subst(b: &Behavior, x: &Var, l: &LocalValue) -> Behavior {
    match b {
        Behavior::Val(v) => Behavior::Val(local_subst_value(v, x, l)),
        Behavior::App(f, a) => Behavior::app(local_subst(f, x, l), local_subst(a, x, l)),
        Behavior::Case {
            scrutinee,
            left_var,
            left,
            right_var,
            right,
        } => {
            let branch = |var: &Var, body: &Behavior| {
                if var == x {
                    body.clone()
                } else {
                    local_subst(body, x, l)
                }
            };
            Behavior::Case {
                scrutinee: Box::new(local_subst(scrutinee, x, l)),
                left_var: left_var.clone(),
                left: Box::new(branch(left_var, left)),
                right_var: right_var.clone(),
                right: Box::new(branch(right_var, right)),
            }
        }
    }
}

pub fn local_subst_value(v: &LocalValue, x: &Var, l: &LocalValue) -> LocalValue {
    match v {
        LocalValue::Var(y) if y == x => l.clone(),
        LocalValue::Lambda { param, body } if param != x => LocalValue::Lambda {
            param: param.clone(),
            body: Box::new(local_subst(body, x, l)),
        },
        LocalValue::Inl(a) => LocalValue::inl(local_subst_value(a, x, l)),
        LocalValue::Inr(a) => LocalValue::inr(local_subst_value(a, x, l)),
        LocalValue::Pair(a, b) => {
            LocalValue::pair(local_subst_value(a, x, l), local_subst_value(b, x, l))
        }
        LocalValue::Tuple(ls) => {
            LocalValue::Tuple(ls.iter().map(|v| local_subst_value(v, x, l)).collect())
        }
        other => other.clone(),
    }
}

/// The projection of `e` to party `p`. The result is always floor-normal.
pub fn project(e: &Expr, p: &Party) -> Behavior {
    match e {
        Expr::Val(v) => Behavior::Val(project_value(v, p)),
        Expr::App(f, a) => floor_node(Behavior::app(project(f, p), project(a, p))),
        Expr::Case {
            guards,
            scrutinee,
            left_var,
            left,
            right_var,
            right,
        } => {
            let (l, r) = if guards.contains(p) {
                (project(left, p), project(right, p))
            } else {
                (Behavior::BOTTOM, Behavior::BOTTOM)
            };
            floor_node(Behavior::Case {
                scrutinee: Box::new(project(scrutinee, p)),
                left_var: left_var.clone(),
                left: Box::new(l),
                right_var: right_var.clone(),
                right: Box::new(r),
            })
        }
    }
}

pub fn project_value(v: &Value, p: &Party) -> LocalValue {
    let owned = |o: &PartySet, l: LocalValue| if o.contains(p) { l } else { LocalValue::Bottom };
    match v {
        Value::Var(x) => LocalValue::Var(x.clone()),
        Value::Unit(o) => owned(o, LocalValue::Unit),
        Value::Lambda {
            param,
            body,
            owners,
            ..
        } => {
            if owners.contains(p) {
                LocalValue::Lambda {
                    param: param.clone(),
                    body: Box::new(project(body, p)),
                }
            } else {
                LocalValue::Bottom
            }
        }
        Value::Inl(x) => floor_local_node(LocalValue::inl(project_value(x, p))),
        Value::Inr(x) => floor_local_node(LocalValue::inr(project_value(x, p))),
        Value::Pair(a, b) => {
            floor_local_node(LocalValue::pair(project_value(a, p), project_value(b, p)))
        }
        Value::Tuple(vs) => floor_local_node(LocalValue::Tuple(
            vs.iter().map(|v| project_value(v, p)).collect(),
        )),
        Value::Fst(o) => owned(o, LocalValue::Fst),
        Value::Snd(o) => owned(o, LocalValue::Snd),
        Value::Lookup(i, o) => owned(o, LocalValue::Lookup(*i)),
        Value::Com(s, r) => match (s == p, r.contains(p)) {
            (true, true) => LocalValue::SendSelf(r.without(p)),
            (true, false) => LocalValue::Send(r.as_set().clone()),
            (false, true) => LocalValue::Recv(s.clone()),
            (false, false) => LocalValue::Bottom,
        },
    }
}

/// The network running every role's projection.
pub fn project_all(e: &Expr) -> Result<Network, ProjectError> {
    let parties = roles(e).ok_or(ProjectError::EmptyRoles)?;
    Ok(Network::new(
        parties.iter().map(|p| (p.clone(), project(e, p))),
    ))
}
