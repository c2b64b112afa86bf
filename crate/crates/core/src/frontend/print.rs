//! Canonical rendering of surface programs, as used by `helam fmt`.
//!
//! The output parses back to the same tree up to source spans. Lets and
//! case arms go on their own lines; everything else stays on one line.

use std::fmt::{self, Display, Formatter, Write};

use super::surface::{SData, SExpr, SExprKind, SType, SurfaceProgram};

const INDENT: &str = "  ";

impl Display for SData {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_data(f, self, Prec::Sum)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Sum,
    Prod,
    Atom,
}

fn write_data(f: &mut Formatter<'_>, d: &SData, min: Prec) -> fmt::Result {
    let (prec, l, r, op) = match d {
        SData::Unit => return f.write_str("()"),
        SData::Named(n, _) => return f.write_str(n),
        SData::Sum(l, r) => (Prec::Sum, l, r, " + "),
        SData::Prod(l, r) => (Prec::Prod, l, r, " * "),
    };
    let wrap = prec < min;
    if wrap {
        f.write_char('(')?;
    }
    // Both operators are left-associative.
    write_data(f, l, prec)?;
    f.write_str(op)?;
    write_data(
        f,
        r,
        if prec == Prec::Sum {
            Prec::Prod
        } else {
            Prec::Atom
        },
    )?;
    if wrap {
        f.write_char(')')?;
    }
    Ok(())
}

impl Display for SType {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            SType::Data(d, o) => {
                write_data(f, d, Prec::Atom)?;
                write!(f, "@{o}")
            }
            SType::Fun(a, r, o) => write!(f, "({a} -> {r})@{o}"),
            SType::Tuple(ts) => {
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

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Top,
    Operand,
}

struct Printer {
    out: String,
    depth: usize,
}

impl Printer {
    fn newline(&mut self) {
        self.out.push('\n');
        for _ in 0..self.depth {
            self.out.push_str(INDENT);
        }
    }

    fn expr(&mut self, e: &SExpr, ctx: Ctx) {
        let compound = matches!(
            e.kind,
            SExprKind::App(..)
                | SExprKind::Case { .. }
                | SExprKind::Let { .. }
                | SExprKind::Inl(_)
                | SExprKind::Inr(_)
                | SExprKind::Pair(..)
        );
        let wrap = ctx == Ctx::Operand && compound;
        if wrap {
            self.out.push('(');
        }
        match &e.kind {
            SExprKind::Var(x) => self.out.push_str(x),
            SExprKind::Unit(o) => self.out.push_str(&format!("()@{o}")),
            SExprKind::Fst(o) => self.out.push_str(&format!("fst{o}")),
            SExprKind::Snd(o) => self.out.push_str(&format!("snd{o}")),
            SExprKind::Lookup(i, o) => self.out.push_str(&format!("lookup[{i}]{o}")),
            SExprKind::Com(s, r) => self.out.push_str(&format!("com[{s}]{r}")),
            SExprKind::Lambda {
                param,
                param_type,
                body,
                owners,
            } => {
                self.out.push_str(&format!("(fn {param} : {param_type} ."));
                if multiline(body) {
                    self.depth += 1;
                    self.newline();
                    self.expr(body, Ctx::Top);
                    self.depth -= 1;
                    self.newline();
                } else {
                    self.out.push(' ');
                    self.expr(body, Ctx::Top);
                }
                self.out.push_str(&format!(")@{owners}"));
            }
            SExprKind::Inl(a) | SExprKind::Inr(a) => {
                self.out.push_str(if matches!(e.kind, SExprKind::Inl(_)) {
                    "Inl "
                } else {
                    "Inr "
                });
                self.expr(a, Ctx::Operand);
            }
            SExprKind::Pair(a, b) => {
                self.out.push_str("Pair ");
                self.expr(a, Ctx::Operand);
                self.out.push(' ');
                self.expr(b, Ctx::Operand);
            }
            SExprKind::Tuple(es) => {
                self.out.push('(');
                for (i, x) in es.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str(", ");
                    }
                    self.expr(x, Ctx::Top);
                }
                if es.len() == 1 {
                    self.out.push(',');
                }
                self.out.push(')');
            }
            SExprKind::App(fun, arg) => {
                let fctx = if matches!(fun.kind, SExprKind::App(..)) {
                    Ctx::Top
                } else {
                    Ctx::Operand
                };
                self.expr(fun, fctx);
                self.out.push(' ');
                self.expr(arg, Ctx::Operand);
            }
            SExprKind::Case {
                guards,
                scrutinee,
                left_var,
                left,
                right_var,
                right,
            } => {
                self.out.push_str(&format!("case{guards} "));
                let sctx = if matches!(scrutinee.kind, SExprKind::Case { .. }) {
                    Ctx::Operand
                } else {
                    Ctx::Top
                };
                self.expr(scrutinee, sctx);
                self.out.push_str(" of");
                self.depth += 1;
                self.newline();
                self.out.push_str(&format!("Inl {left_var} =>"));
                self.arm(left, true);
                self.out.push(';');
                self.newline();
                self.out.push_str(&format!("Inr {right_var} =>"));
                self.arm(right, false);
                self.depth -= 1;
            }
            SExprKind::Let {
                var,
                annotation,
                bound,
                body,
            } => {
                self.out.push_str(&format!("let {var}"));
                if let Some(t) = annotation {
                    self.out.push_str(&format!(" : {t}"));
                }
                self.out.push_str(" =");
                self.arm(bound, false);
                self.out.push(';');
                if wrap {
                    self.depth += 1;
                }
                self.newline();
                self.expr(body, Ctx::Top);
                if wrap {
                    self.depth -= 1;
                    self.newline();
                }
            }
        }
        if wrap {
            self.out.push(')');
        }
    }

    /// A case arm or a let-bound term, on the same line when it is short.
    fn arm(&mut self, e: &SExpr, left_arm: bool) {
        let ctx = if left_arm && matches!(e.kind, SExprKind::Case { .. }) {
            Ctx::Operand
        } else {
            Ctx::Top
        };
        if multiline(e) && ctx == Ctx::Top {
            self.depth += 1;
            self.newline();
            self.expr(e, ctx);
            self.depth -= 1;
        } else {
            self.out.push(' ');
            self.expr(e, ctx);
        }
    }
}

/// Whether `e` prints over several lines at the top level.
fn multiline(e: &SExpr) -> bool {
    matches!(e.kind, SExprKind::Let { .. } | SExprKind::Case { .. })
}

/// Renders a single expression.
pub fn print_expr(e: &SExpr) -> String {
    let mut p = Printer {
        out: String::new(),
        depth: 0,
    };
    p.expr(e, Ctx::Top);
    p.out
}

impl Display for SExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&print_expr(self))
    }
}

impl Display for SurfaceProgram {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        for a in &self.aliases {
            writeln!(f, "type {} = {};", a.name, a.data)?;
        }
        if !self.aliases.is_empty() {
            writeln!(f)?;
        }
        writeln!(f, "{}", print_expr(&self.body))
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;

    fn roundtrip(src: &str) -> String {
        let p = parse(src).unwrap();
        let printed = p.to_string();
        let again = parse(&printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
        assert_eq!(again.without_spans(), p.without_spans(), "{printed}");
        assert_eq!(again.to_string(), printed);
        printed
    }

    #[test]
    fn data_types_print_with_minimal_parentheses() {
        let out = roundtrip(
            "type A = () + () * ();\ntype B = (() + ()) * ();\ntype C = () + (() + ());\n()@[p]",
        );
        assert!(out.starts_with(
            "type A = () + () * ();\ntype B = (() + ()) * ();\ntype C = () + (() + ());"
        ));
    }

    #[test]
    fn lets_and_cases_go_on_their_own_lines() {
        let out = roundtrip("let x : ()@[p] = ()@[p]; case[p] Inl x of Inl a => a; Inr b => b");
        assert_eq!(
            out,
            "let x : ()@[p] = ()@[p];\ncase[p] Inl x of\n  Inl a => a;\n  Inr b => b\n"
        );
    }

    #[test]
    fn nested_forms_survive() {
        roundtrip("f (let x = a; x) (case[p] y of Inl a => (case[p] a of Inl c => c; Inr d => d); Inr b => b)");
        roundtrip("(fn x : (()@[p], (() + ())@[q],) . let y = lookup[1][p] x; y)@[p, q]");
        roundtrip("Inl (Pair (Inr ()@[p]) (com[p][q] ()@[p]))");
        roundtrip("(fn f : (()@[p] -> ()@[p])@[p] . f ()@[p])@[p]");
    }
}
