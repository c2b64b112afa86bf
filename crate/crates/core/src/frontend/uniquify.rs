//! Renames binders so that no two bind the same name and none captures a
//! free variable.

use std::collections::{BTreeSet, HashMap};

use crate::ast::{Expr, Value, Var};

/// Renames every binder to the smallest `base$k` not yet taken, visiting
/// binders in pre-order. A binder keeps its name when that name is free.
pub fn uniquify(e: &Expr) -> Expr {
    let mut taken: BTreeSet<String> = e
        .free_vars()
        .into_iter()
        .map(|v| v.as_str().to_owned())
        .collect();
    expr(e, &mut taken, &mut HashMap::new())
}

fn base(name: &str) -> &str {
    match name.rfind('$') {
        Some(i) if i > 0 && name[i + 1..].chars().all(|c| c.is_ascii_digit()) => &name[..i],
        _ => name,
    }
}

fn fresh(x: &Var, taken: &mut BTreeSet<String>) -> Var {
    let name = x.as_str();
    if taken.insert(name.to_owned()) {
        return x.clone();
    }
    let b = base(name);
    (1..)
        .map(|k| format!("{b}${k}"))
        .find(|n| taken.insert(n.clone()))
        .map(Var::new)
        .expect("unbounded")
}

fn binder<T>(
    x: &Var,
    taken: &mut BTreeSet<String>,
    renames: &mut HashMap<Var, Vec<Var>>,
    f: impl FnOnce(&mut BTreeSet<String>, &mut HashMap<Var, Vec<Var>>) -> T,
) -> (Var, T) {
    let y = fresh(x, taken);
    renames.entry(x.clone()).or_default().push(y.clone());
    let out = f(taken, renames);
    renames.get_mut(x).expect("pushed").pop();
    (y, out)
}

fn expr(e: &Expr, taken: &mut BTreeSet<String>, renames: &mut HashMap<Var, Vec<Var>>) -> Expr {
    match e {
        Expr::Val(v) => Expr::Val(value(v, taken, renames)),
        Expr::App(f, a) => {
            let f = expr(f, taken, renames);
            Expr::app(f, expr(a, taken, renames))
        }
        Expr::Case {
            guards,
            scrutinee,
            left_var,
            left,
            right_var,
            right,
        } => {
            let s = expr(scrutinee, taken, renames);
            let (lv, l) = binder(left_var, taken, renames, |t, r| expr(left, t, r));
            let (rv, r) = binder(right_var, taken, renames, |t, r| expr(right, t, r));
            Expr::Case {
                guards: guards.clone(),
                scrutinee: Box::new(s),
                left_var: lv,
                left: Box::new(l),
                right_var: rv,
                right: Box::new(r),
            }
        }
    }
}

fn value(v: &Value, taken: &mut BTreeSet<String>, renames: &mut HashMap<Var, Vec<Var>>) -> Value {
    match v {
        Value::Var(x) => Value::Var(
            renames
                .get(x)
                .and_then(|s| s.last())
                .cloned()
                .unwrap_or_else(|| x.clone()),
        ),
        Value::Lambda {
            param,
            param_type,
            body,
            owners,
        } => {
            let (p, b) = binder(param, taken, renames, |t, r| expr(body, t, r));
            Value::Lambda {
                param: p,
                param_type: param_type.clone(),
                body: Box::new(b),
                owners: owners.clone(),
            }
        }
        Value::Inl(a) => Value::inl(value(a, taken, renames)),
        Value::Inr(a) => Value::inr(value(a, taken, renames)),
        Value::Pair(a, b) => {
            let a = value(a, taken, renames);
            Value::pair(a, value(b, taken, renames))
        }
        Value::Tuple(vs) => Value::Tuple(vs.iter().map(|v| value(v, taken, renames)).collect()),
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{PartySet, Type};

    fn unit_ty() -> Type {
        Type::data(crate::ast::DataType::Unit, PartySet::of(&["p"]))
    }

    #[test]
    fn renames_repeated_binders() {
        let inner = Value::lambda("x", unit_ty(), Value::var("x").into(), PartySet::of(&["p"]));
        let outer = Value::lambda(
            "x",
            unit_ty(),
            Expr::app(inner, Value::var("x")),
            PartySet::of(&["p"]),
        );
        assert_eq!(
            uniquify(&outer.into()).to_string(),
            "(fn x: ()@[p]. (fn x$1: ()@[p]. x$1)@[p] x)@[p]"
        );
    }

    #[test]
    fn free_variables_are_reserved() {
        let lam = Value::lambda("y", unit_ty(), Value::var("y").into(), PartySet::of(&["p"]));
        let e = Expr::app(lam, Value::var("y"));
        assert_eq!(uniquify(&e).to_string(), "(fn y$1: ()@[p]. y$1)@[p] y");
    }

    #[test]
    fn is_idempotent() {
        let lam = Value::lambda(
            "x$1",
            unit_ty(),
            Value::var("x$1").into(),
            PartySet::of(&["p"]),
        );
        let e: Expr = lam.into();
        assert_eq!(uniquify(&uniquify(&e)), uniquify(&e));
        assert_eq!(uniquify(&e), e);
    }
}
