//! Location-aware substitution and the centralized small-step semantics.
//!
//! Evaluation is leftmost: the function position of an application steps
//! first, then the argument, then the redex itself.

use thiserror::Error;

use crate::ast::{Expr, Value, Var};
use crate::mask::mask_value;

/// `m[x := v]`. Under a lambda or case branches the substituted value is
/// masked to their parties; when that mask is undefined the body is left
/// alone, since `x` cannot occur there in a well-typed term. Substitution
/// also stops at a binder that shadows `x`.
pub fn subst(m: &Expr, x: &Var, v: &Value) -> Expr {
    match m {
        Expr::Val(w) => Expr::Val(subst_value(w, x, v)),
        Expr::App(f, a) => Expr::app(subst(f, x, v), subst(a, x, v)),
        Expr::Case {
            guards,
            scrutinee,
            left_var,
            left,
            right_var,
            right,
        } => {
            let masked = mask_value(v, guards);
            let branch = |var: &Var, body: &Expr| match &masked {
                Some(v2) if var != x => subst(body, x, v2),
                _ => body.clone(),
            };
            Expr::Case {
                guards: guards.clone(),
                scrutinee: Box::new(subst(scrutinee, x, v)),
                left_var: left_var.clone(),
                left: Box::new(branch(left_var, left)),
                right_var: right_var.clone(),
                right: Box::new(branch(right_var, right)),
            }
        }
    }
}

pub fn subst_value(w: &Value, x: &Var, v: &Value) -> Value {
    match w {
        Value::Var(y) if y == x => v.clone(),
        Value::Lambda {
            param,
            param_type,
            body,
            owners,
        } if param != x => match mask_value(v, owners) {
            Some(v2) => Value::Lambda {
                param: param.clone(),
                param_type: param_type.clone(),
                body: Box::new(subst(body, x, &v2)),
                owners: owners.clone(),
            },
            None => w.clone(),
        },
        Value::Inl(a) => Value::inl(subst_value(a, x, v)),
        Value::Inr(a) => Value::inr(subst_value(a, x, v)),
        Value::Pair(a, b) => Value::pair(subst_value(a, x, v), subst_value(b, x, v)),
        Value::Tuple(vs) => Value::Tuple(vs.iter().map(|w| subst_value(w, x, v)).collect()),
        _ => w.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    Stepped {
        next: Expr,
        /// The rule applied at the redex (congruence rules are not named).
        rule: &'static str,
        redex: Expr,
    },
    IsValue,
    Stuck(String),
}

/// One step of the centralized semantics.
pub fn step(e: &Expr) -> StepResult {
    match e {
        Expr::Val(_) => StepResult::IsValue,
        Expr::App(f, a) => {
            if !f.is_value() {
                return congruence(step(f), |f2| Expr::App(Box::new(f2), a.clone()));
            }
            if !a.is_value() {
                return congruence(step(a), |a2| Expr::App(f.clone(), Box::new(a2)));
            }
            let (Expr::Val(fv), Expr::Val(av)) = (&**f, &**a) else {
                unreachable!()
            };
            match apply(fv, av) {
                Ok((next, rule)) => StepResult::Stepped {
                    next,
                    rule,
                    redex: e.clone(),
                },
                Err(reason) => StepResult::Stuck(reason),
            }
        }
        Expr::Case {
            guards,
            scrutinee,
            left_var,
            left,
            right_var,
            right,
        } => {
            let Expr::Val(sv) = &**scrutinee else {
                return congruence(step(scrutinee), |s2| Expr::Case {
                    guards: guards.clone(),
                    scrutinee: Box::new(s2),
                    left_var: left_var.clone(),
                    left: left.clone(),
                    right_var: right_var.clone(),
                    right: right.clone(),
                });
            };
            let (payload, var, body, rule) = match sv {
                Value::Inl(v) => (v, left_var, left, "CASEL"),
                Value::Inr(v) => (v, right_var, right, "CASER"),
                other => return StepResult::Stuck(format!("case on non-injection {other}")),
            };
            match mask_value(payload, guards) {
                Some(v2) => StepResult::Stepped {
                    next: subst(body, var, &v2),
                    rule,
                    redex: e.clone(),
                },
                None => StepResult::Stuck(format!(
                    "case payload {payload} is not available at {guards}"
                )),
            }
        }
    }
}

fn congruence(inner: StepResult, wrap: impl FnOnce(Expr) -> Expr) -> StepResult {
    match inner {
        StepResult::Stepped { next, rule, redex } => StepResult::Stepped {
            next: wrap(next),
            rule,
            redex,
        },
        other => other,
    }
}

fn apply(f: &Value, a: &Value) -> Result<(Expr, &'static str), String> {
    let unavailable = |v: &Value, at| format!("{v} is not available at {at}");
    match f {
        Value::Lambda {
            param,
            body,
            owners,
            ..
        } => {
            let v = mask_value(a, owners).ok_or_else(|| unavailable(a, owners))?;
            Ok((subst(body, param, &v), "APPABS"))
        }
        Value::Fst(o) | Value::Snd(o) => {
            let Value::Pair(v1, v2) = a else {
                return Err(format!("{f} applied to non-pair {a}"));
            };
            let (v, rule) = match f {
                Value::Fst(_) => (v1, "PROJ1"),
                _ => (v2, "PROJ2"),
            };
            let v = mask_value(v, o).ok_or_else(|| unavailable(v, o))?;
            Ok((Expr::Val(v), rule))
        }
        Value::Lookup(i, o) => {
            let Value::Tuple(vs) = a else {
                return Err(format!("{f} applied to non-tuple {a}"));
            };
            let v = i
                .checked_sub(1)
                .and_then(|k| vs.get(k))
                .ok_or_else(|| format!("{f} applied to a tuple of length {}", vs.len()))?;
            let v = mask_value(v, o).ok_or_else(|| unavailable(v, o))?;
            Ok((Expr::Val(v), "PROJN"))
        }
        Value::Com(s, r) => {
            let rule = match a {
                Value::Unit(_) => "COM1",
                Value::Pair(..) => "COMPAIR",
                Value::Inl(_) => "COMINL",
                Value::Inr(_) => "COMINR",
                _ => return Err(format!("{f} cannot send non-data {a}")),
            };
            let v = communicate(s, r, a).ok_or_else(|| format!("{s} does not own all of {a}"))?;
            Ok((Expr::Val(v), rule))
        }
        _ => Err(format!("{f} is not a function")),
    }
}

/// The value `com[s][r] a` evaluates to, if `a` is data owned by `s`.
fn communicate(s: &crate::ast::Party, r: &crate::ast::PartySet, a: &Value) -> Option<Value> {
    match a {
        Value::Unit(o) if o.contains(s) => Some(Value::Unit(r.clone())),
        Value::Pair(a, b) => Some(Value::pair(communicate(s, r, a)?, communicate(s, r, b)?)),
        Value::Inl(v) => Some(Value::inl(communicate(s, r, v)?)),
        Value::Inr(v) => Some(Value::inr(communicate(s, r, v)?)),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("ran out of fuel after {0} steps")]
    FuelExhausted(usize),
    #[error("stuck after {steps} steps: {reason}")]
    Stuck { steps: usize, reason: String },
}

/// One entry of a central evaluation trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CentralStep {
    pub rule: &'static str,
    pub redex: Expr,
    pub result: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub value: Value,
    /// Every intermediate term, starting with the input and ending with the
    /// value.
    pub terms: Vec<Expr>,
    pub steps: Vec<CentralStep>,
}

/// Fuel that always suffices: the language has no recursion.
pub fn default_fuel(e: &Expr) -> usize {
    10 * e.size()
}

/// Steps `e` until it is a value.
pub fn run(e: &Expr, fuel: usize) -> Result<Run, RunError> {
    let mut terms = vec![e.clone()];
    let mut steps = Vec::new();
    loop {
        let cur = terms.last().expect("nonempty");
        match step(cur) {
            StepResult::IsValue => {
                let Expr::Val(value) = cur.clone() else {
                    unreachable!()
                };
                return Ok(Run {
                    value,
                    terms,
                    steps,
                });
            }
            StepResult::Stuck(reason) => {
                return Err(RunError::Stuck {
                    steps: steps.len(),
                    reason,
                })
            }
            StepResult::Stepped { next, rule, redex } => {
                if steps.len() == fuel {
                    return Err(RunError::FuelExhausted(fuel));
                }
                steps.push(CentralStep {
                    rule,
                    redex,
                    result: next.clone(),
                });
                terms.push(next);
            }
        }
    }
}
