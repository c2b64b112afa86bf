//! Canonical text rendering.
//!
//! Choreographies print in the surface syntax accepted by the frontend
//! parser, so `parse(print(e)) == e`. Local behaviors print in a similar
//! style but have no parser; the text is for humans and golden files.

use std::fmt::{self, Display, Formatter, Write};

use crate::ast::{Behavior, DataType, Expr, LocalValue, PartySet, StepLabel, Type, Value};

impl Display for PartySet {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_char('[')?;
        for (i, p) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_char(']')
    }
}

fn write_party_list<'a>(
    f: &mut Formatter<'_>,
    parties: impl IntoIterator<Item = &'a crate::ast::Party>,
) -> fmt::Result {
    f.write_char('[')?;
    for (i, p) in parties.into_iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{p}")?;
    }
    f.write_char(']')
}

fn write_data_operand(f: &mut Formatter<'_>, d: &DataType) -> fmt::Result {
    match d {
        DataType::Unit => f.write_str("()"),
        _ => write!(f, "({d})"),
    }
}

impl Display for DataType {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            DataType::Unit => f.write_str("()"),
            DataType::Sum(l, r) => {
                write_data_operand(f, l)?;
                f.write_str(" + ")?;
                write_data_operand(f, r)
            }
            DataType::Prod(l, r) => {
                write_data_operand(f, l)?;
                f.write_str(" * ")?;
                write_data_operand(f, r)
            }
        }
    }
}

impl Display for Type {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Type::Data(d, o) => {
                write_data_operand(f, d)?;
                write!(f, "@{o}")
            }
            Type::Fun(a, r, o) => write!(f, "({a} -> {r})@{o}"),
            Type::Tuple(ts) => {
                f.write_char('(')?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                if ts.len() == 1 {
                    f.write_char(',')?;
                }
                f.write_char(')')
            }
        }
    }
}

/// Where an expression sits, which decides whether it needs parentheses.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Top,
    Operand,
}

fn write_value(f: &mut Formatter<'_>, v: &Value, ctx: Ctx) -> fmt::Result {
    let wrap = ctx == Ctx::Operand && matches!(v, Value::Inl(_) | Value::Inr(_) | Value::Pair(..));
    if wrap {
        f.write_char('(')?;
    }
    match v {
        Value::Var(x) => write!(f, "{x}")?,
        Value::Lambda {
            param,
            param_type,
            body,
            owners,
        } => {
            write!(f, "(fn {param}: {param_type}. ")?;
            write_expr(f, body, Ctx::Top)?;
            write!(f, ")@{owners}")?;
        }
        Value::Unit(o) => write!(f, "()@{o}")?,
        Value::Inl(v) => {
            f.write_str("Inl ")?;
            write_value(f, v, Ctx::Operand)?;
        }
        Value::Inr(v) => {
            f.write_str("Inr ")?;
            write_value(f, v, Ctx::Operand)?;
        }
        Value::Pair(a, b) => {
            f.write_str("Pair ")?;
            write_value(f, a, Ctx::Operand)?;
            f.write_char(' ')?;
            write_value(f, b, Ctx::Operand)?;
        }
        Value::Tuple(vs) => {
            f.write_char('(')?;
            for (i, v) in vs.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_value(f, v, Ctx::Top)?;
            }
            if vs.len() == 1 {
                f.write_char(',')?;
            }
            f.write_char(')')?;
        }
        Value::Fst(o) => write!(f, "fst{o}")?,
        Value::Snd(o) => write!(f, "snd{o}")?,
        Value::Lookup(i, o) => write!(f, "lookup[{i}]{o}")?,
        Value::Com(s, r) => write!(f, "com[{s}]{r}")?,
    }
    if wrap {
        f.write_char(')')?;
    }
    Ok(())
}

fn write_expr(f: &mut Formatter<'_>, e: &Expr, ctx: Ctx) -> fmt::Result {
    match e {
        Expr::Val(v) => write_value(f, v, ctx),
        Expr::App(fun, arg) => {
            if ctx == Ctx::Operand {
                f.write_char('(')?;
            }
            // Application is left-associative, so only a nested application
            // in function position can go bare.
            match &**fun {
                Expr::App(..) => write_expr(f, fun, Ctx::Top)?,
                _ => write_expr(f, fun, Ctx::Operand)?,
            }
            f.write_char(' ')?;
            write_expr(f, arg, Ctx::Operand)?;
            if ctx == Ctx::Operand {
                f.write_char(')')?;
            }
            Ok(())
        }
        Expr::Case {
            guards,
            scrutinee,
            left_var,
            left,
            right_var,
            right,
        } => {
            if ctx == Ctx::Operand {
                f.write_char('(')?;
            }
            write!(f, "case{guards} ")?;
            match &**scrutinee {
                Expr::Case { .. } => write_expr(f, scrutinee, Ctx::Operand)?,
                _ => write_expr(f, scrutinee, Ctx::Top)?,
            }
            write!(f, " of Inl {left_var} => ")?;
            // A case in the left branch would swallow our `; Inr` arm.
            match &**left {
                Expr::Case { .. } => write_expr(f, left, Ctx::Operand)?,
                _ => write_expr(f, left, Ctx::Top)?,
            }
            write!(f, "; Inr {right_var} => ")?;
            write_expr(f, right, Ctx::Top)?;
            if ctx == Ctx::Operand {
                f.write_char(')')?;
            }
            Ok(())
        }
    }
}

impl Display for Value {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_value(f, self, Ctx::Top)
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_expr(f, self, Ctx::Top)
    }
}

fn write_local(f: &mut Formatter<'_>, l: &LocalValue, ctx: Ctx) -> fmt::Result {
    let wrap = ctx == Ctx::Operand
        && matches!(
            l,
            LocalValue::Inl(_) | LocalValue::Inr(_) | LocalValue::Pair(..)
        );
    if wrap {
        f.write_char('(')?;
    }
    match l {
        LocalValue::Var(x) => write!(f, "{x}")?,
        LocalValue::Unit => f.write_str("()")?,
        LocalValue::Lambda { param, body } => {
            write!(f, "(fn {param}. ")?;
            write_behavior(f, body, Ctx::Top)?;
            f.write_char(')')?;
        }
        LocalValue::Inl(l) => {
            f.write_str("Inl ")?;
            write_local(f, l, Ctx::Operand)?;
        }
        LocalValue::Inr(l) => {
            f.write_str("Inr ")?;
            write_local(f, l, Ctx::Operand)?;
        }
        LocalValue::Pair(a, b) => {
            f.write_str("Pair ")?;
            write_local(f, a, Ctx::Operand)?;
            f.write_char(' ')?;
            write_local(f, b, Ctx::Operand)?;
        }
        LocalValue::Tuple(ls) => {
            f.write_char('(')?;
            for (i, l) in ls.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_local(f, l, Ctx::Top)?;
            }
            if ls.len() == 1 {
                f.write_char(',')?;
            }
            f.write_char(')')?;
        }
        LocalValue::Fst => f.write_str("fst")?,
        LocalValue::Snd => f.write_str("snd")?,
        LocalValue::Lookup(i) => write!(f, "lookup[{i}]")?,
        LocalValue::Recv(s) => write!(f, "recv_{s}")?,
        LocalValue::Send(r) => {
            f.write_str("send_")?;
            write_party_list(f, r)?;
        }
        LocalValue::SendSelf(r) => {
            f.write_str("send*_")?;
            write_party_list(f, r)?;
        }
        LocalValue::Bottom => f.write_str("⊥")?,
    }
    if wrap {
        f.write_char(')')?;
    }
    Ok(())
}

fn write_behavior(f: &mut Formatter<'_>, b: &Behavior, ctx: Ctx) -> fmt::Result {
    match b {
        Behavior::Val(l) => write_local(f, l, ctx),
        Behavior::App(fun, arg) => {
            if ctx == Ctx::Operand {
                f.write_char('(')?;
            }
            match &**fun {
                Behavior::App(..) => write_behavior(f, fun, Ctx::Top)?,
                _ => write_behavior(f, fun, Ctx::Operand)?,
            }
            f.write_char(' ')?;
            write_behavior(f, arg, Ctx::Operand)?;
            if ctx == Ctx::Operand {
                f.write_char(')')?;
            }
            Ok(())
        }
        Behavior::Case {
            scrutinee,
            left_var,
            left,
            right_var,
            right,
        } => {
            if ctx == Ctx::Operand {
                f.write_char('(')?;
            }
            f.write_str("case ")?;
            match &**scrutinee {
                Behavior::Case { .. } => write_behavior(f, scrutinee, Ctx::Operand)?,
                _ => write_behavior(f, scrutinee, Ctx::Top)?,
            }
            write!(f, " of Inl {left_var} => ")?;
            match &**left {
                Behavior::Case { .. } => write_behavior(f, left, Ctx::Operand)?,
                _ => write_behavior(f, left, Ctx::Top)?,
            }
            write!(f, "; Inr {right_var} => ")?;
            write_behavior(f, right, Ctx::Top)?;
            if ctx == Ctx::Operand {
                f.write_char(')')?;
            }
            Ok(())
        }
    }
}

impl Display for LocalValue {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_local(f, self, Ctx::Top)
    }
}

impl Display for Behavior {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_behavior(f, self, Ctx::Top)
    }
}

impl Display for StepLabel {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let write_set = |f: &mut Formatter<'_>, set: &std::collections::BTreeSet<_>| {
            f.write_char('{')?;
            for (i, (p, l)) in set.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "({p}, {l})")?;
            }
            f.write_char('}')
        };
        f.write_str("⊕")?;
        write_set(f, &self.sends)?;
        f.write_str(";⊖")?;
        write_set(f, &self.receives)
    }
}

#[cfg(test)]
mod tests {
    use crate::ast::*;

    fn ps(names: &[&str]) -> PartySet {
        PartySet::of(names)
    }

    fn party(n: &str) -> Party {
        Party::new(n).unwrap()
    }

    #[test]
    fn prints_located_unit() {
        assert_eq!(Value::Unit(ps(&["q", "p"])).to_string(), "()@[p, q]");
    }

    #[test]
    fn prints_com_keyword() {
        assert_eq!(
            Value::Com(party("s"), ps(&["r1"])).to_string(),
            "com[s][r1]"
        );
        assert_eq!(
            Value::Lookup(2, ps(&["p_1", "p_2", "q"])).to_string(),
            "lookup[2][p_1, p_2, q]"
        );
    }

    #[test]
    fn prints_function_type() {
        let unit_p = Type::data(DataType::Unit, ps(&["p"]));
        let t = Type::fun(unit_p.clone(), unit_p, ps(&["p"]));
        assert_eq!(t.to_string(), "(()@[p] -> ()@[p])@[p]");
    }

    #[test]
    fn prints_compound_data_types() {
        let d = DataType::sum(
            DataType::Unit,
            DataType::prod(DataType::Unit, DataType::Unit),
        );
        assert_eq!(
            Type::data(d, ps(&["p"])).to_string(),
            "(() + (() * ()))@[p]"
        );
        let one = Type::Tuple(vec![Type::data(DataType::Unit, ps(&["p"]))]);
        assert_eq!(one.to_string(), "(()@[p],)");
    }

    #[test]
    fn prints_applications_left_associatively() {
        let e = Expr::app(
            Expr::app(Value::var("f"), Value::var("x")),
            Expr::app(Value::var("g"), Value::inl(Value::var("y"))),
        );
        assert_eq!(e.to_string(), "f x (g (Inl y))");
    }

    #[test]
    fn prints_nested_case_in_left_branch_with_parens() {
        let inner = Expr::case(
            ps(&["p"]),
            Value::var("a"),
            "b",
            Value::var("b"),
            "c",
            Value::var("c"),
        );
        let e = Expr::case(
            ps(&["p"]),
            Value::var("s"),
            "x",
            inner,
            "y",
            Value::var("y"),
        );
        assert_eq!(
            e.to_string(),
            "case[p] s of Inl x => (case[p] a of Inl b => b; Inr c => c); Inr y => y"
        );
    }

    #[test]
    fn prints_local_behaviors() {
        let b = Behavior::app(
            LocalValue::Send(std::collections::BTreeSet::from([party("p"), party("q")])),
            LocalValue::Unit,
        );
        assert_eq!(b.to_string(), "send_[p, q] ()");
        let r = Behavior::app(LocalValue::Recv(party("s")), LocalValue::Bottom);
        assert_eq!(r.to_string(), "recv_s ⊥");
        assert_eq!(
            LocalValue::SendSelf(Default::default()).to_string(),
            "send*_[]"
        );
    }
}
