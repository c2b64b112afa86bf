//! Surface syntax to core terms.

use std::collections::{BTreeSet, HashMap};

use crate::ast::{DataType, Expr, PartySet, Type, Value, Var};
use crate::mask::mask_type;
use crate::span::SourceSpan;
use crate::typecheck::{typecheck, TypeEnv, TypeErrorKind};

use super::surface::{SData, SExpr, SExprKind, SType, SurfaceProgram};
use super::DesugarError;

/// Spans of a core term, shaped like its child paths.
#[derive(Debug, Clone)]
struct SpanTree {
    span: SourceSpan,
    kids: Vec<SpanTree>,
}

impl SpanTree {
    fn leaf(span: SourceSpan) -> Self {
        SpanTree {
            span,
            kids: Vec::new(),
        }
    }

    fn node(span: SourceSpan, kids: Vec<SpanTree>) -> Self {
        SpanTree { span, kids }
    }

    fn flatten(&self, path: &mut Vec<u32>, out: &mut HashMap<Vec<u32>, SourceSpan>) {
        out.insert(path.clone(), self.span);
        for (i, k) in self.kids.iter().enumerate() {
            path.push(i as u32);
            k.flatten(path, out);
            path.pop();
        }
    }

    fn get(&self, path: &[u32]) -> SourceSpan {
        let mut t = self;
        for &i in path {
            match t.kids.get(i as usize) {
                Some(k) => t = k,
                None => break,
            }
        }
        t.span
    }
}

/// Desugars a parsed program under the top-level party set `theta`.
pub fn desugar(
    program: &SurfaceProgram,
    theta: &PartySet,
) -> Result<(Expr, HashMap<Vec<u32>, SourceSpan>), DesugarError> {
    let mut aliases: HashMap<String, DataType> = HashMap::new();
    for a in &program.aliases {
        let d = resolve_data(&a.data, &aliases)?;
        aliases.insert(a.name.clone(), d);
    }
    let mut used = BTreeSet::new();
    program.body.identifiers(&mut used);
    let mut d = Desugarer {
        aliases,
        used,
        next_tmp: 0,
        scope: Vec::new(),
    };
    let (e, tree) = d.expr(&program.body, theta)?;
    let mut spans = HashMap::new();
    tree.flatten(&mut Vec::new(), &mut spans);
    Ok((e, spans))
}

fn resolve_data(d: &SData, aliases: &HashMap<String, DataType>) -> Result<DataType, DesugarError> {
    Ok(match d {
        SData::Unit => DataType::Unit,
        SData::Named(name, span) => {
            aliases
                .get(name)
                .cloned()
                .ok_or_else(|| DesugarError::UnknownAlias {
                    name: name.clone(),
                    span: *span,
                })?
        }
        SData::Sum(l, r) => DataType::sum(resolve_data(l, aliases)?, resolve_data(r, aliases)?),
        SData::Prod(l, r) => DataType::prod(resolve_data(l, aliases)?, resolve_data(r, aliases)?),
    })
}

struct Desugarer {
    aliases: HashMap<String, DataType>,
    used: BTreeSet<String>,
    next_tmp: usize,
    /// Variables in scope with their types when known.
    scope: Vec<(Var, Option<Type>)>,
}

impl Desugarer {
    fn ty(&self, t: &SType) -> Result<Type, DesugarError> {
        Ok(match t {
            SType::Data(d, o) => Type::data(resolve_data(d, &self.aliases)?, o.clone()),
            SType::Fun(a, r, o) => Type::fun(self.ty(a)?, self.ty(r)?, o.clone()),
            SType::Tuple(ts) => {
                Type::Tuple(ts.iter().map(|t| self.ty(t)).collect::<Result<_, _>>()?)
            }
        })
    }

    fn fresh(&mut self) -> Var {
        loop {
            let name = format!("_tmp{}", self.next_tmp);
            self.next_tmp += 1;
            if self.used.insert(name.clone()) {
                return Var::new(name);
            }
        }
    }

    fn lookup(&self, x: &Var) -> Option<&Option<Type>> {
        self.scope
            .iter()
            .rev()
            .find(|(y, _)| y == x)
            .map(|(_, t)| t)
    }

    fn scoped<T>(&mut self, x: Var, t: Option<Type>, f: impl FnOnce(&mut Self) -> T) -> T {
        self.scope.push((x, t));
        let out = f(self);
        self.scope.pop();
        out
    }

    /// Types `e` in the current scope. `Ok(None)` means the type depends on
    /// something not yet known, or on context.
    fn pretype(
        &self,
        e: &Expr,
        tree: &SpanTree,
        theta: &PartySet,
    ) -> Result<Result<Type, String>, DesugarError> {
        let mut env = TypeEnv::new(theta.clone());
        for x in e.free_vars() {
            match self.lookup(&x) {
                Some(Some(t)) => env = env.bind(x, t.clone()),
                Some(None) => return Ok(Err(format!("the type of `{x}` is not known"))),
                None => {}
            }
        }
        match typecheck(&env, e) {
            Ok(t) => Ok(Ok(t)),
            Err(err)
                if matches!(
                    err.kind,
                    TypeErrorKind::AmbiguousSum | TypeErrorKind::AmbiguousKeyword
                ) =>
            {
                Ok(Err(err.detail))
            }
            Err(mut err) => {
                err.span = Some(tree.get(&err.path));
                Err(DesugarError::Type(err))
            }
        }
    }

    /// `(fn x: t. body)@theta bound`
    fn bind(
        x: Var,
        t: Type,
        body: (Expr, SpanTree),
        bound: (Expr, SpanTree),
        theta: &PartySet,
        span: SourceSpan,
    ) -> (Expr, SpanTree) {
        let lam = Value::Lambda {
            param: x,
            param_type: t,
            body: Box::new(body.0),
            owners: theta.clone(),
        };
        let lam_tree = SpanTree::node(span, vec![body.1]);
        (
            Expr::app(lam, bound.0),
            SpanTree::node(span, vec![lam_tree, bound.1]),
        )
    }

    fn expr(&mut self, e: &SExpr, theta: &PartySet) -> Result<(Expr, SpanTree), DesugarError> {
        let span = e.span;
        let leaf = |v: Value| Ok((Expr::Val(v), SpanTree::leaf(span)));
        match &e.kind {
            SExprKind::Var(x) => leaf(Value::var(x)),
            SExprKind::Unit(o) => leaf(Value::Unit(o.clone())),
            SExprKind::Fst(o) => leaf(Value::Fst(o.clone())),
            SExprKind::Snd(o) => leaf(Value::Snd(o.clone())),
            SExprKind::Lookup(i, o) => leaf(Value::Lookup(*i, o.clone())),
            SExprKind::Com(s, r) => leaf(Value::Com(s.clone(), r.clone())),
            SExprKind::Lambda {
                param,
                param_type,
                body,
                owners,
            } => {
                let t = self.ty(param_type)?;
                let (b, bt) = self.scoped(Var::from(param.as_str()), Some(t.clone()), |d| {
                    d.expr(body, owners)
                })?;
                let v = Value::Lambda {
                    param: Var::from(param.as_str()),
                    param_type: t,
                    body: Box::new(b),
                    owners: owners.clone(),
                };
                Ok((Expr::Val(v), SpanTree::node(span, vec![bt])))
            }
            SExprKind::Inl(a) | SExprKind::Inr(a) => {
                let left = matches!(e.kind, SExprKind::Inl(_));
                self.construct(std::slice::from_ref(a.as_ref()), theta, span, |mut vs| {
                    let v = vs.pop().expect("one component");
                    if left {
                        Value::inl(v)
                    } else {
                        Value::inr(v)
                    }
                })
            }
            SExprKind::Pair(a, b) => {
                let parts = [a.as_ref().clone(), b.as_ref().clone()];
                self.construct(&parts, theta, span, |mut vs| {
                    let b = vs.pop().expect("two components");
                    let a = vs.pop().expect("two components");
                    Value::pair(a, b)
                })
            }
            SExprKind::Tuple(es) => self.construct(es, theta, span, Value::Tuple),
            SExprKind::App(f, a) => {
                let (f, ft) = self.expr(f, theta)?;
                let (a, at) = self.expr(a, theta)?;
                Ok((Expr::app(f, a), SpanTree::node(span, vec![ft, at])))
            }
            SExprKind::Case {
                guards,
                scrutinee,
                left_var,
                left,
                right_var,
                right,
            } => {
                let (s, st) = self.expr(scrutinee, theta)?;
                let (lt_ty, rt_ty) = match self.pretype(&s, &st, theta)? {
                    Ok(t) => match mask_type(&t, guards) {
                        Some(Type::Data(DataType::Sum(l, r), o)) if o == *guards => {
                            (Some(Type::data(*l, o.clone())), Some(Type::data(*r, o)))
                        }
                        _ => (None, None),
                    },
                    Err(_) => (None, None),
                };
                let (l, lt) = self.scoped(Var::from(left_var.as_str()), lt_ty, |d| {
                    d.expr(left, guards)
                })?;
                let (r, rt) = self.scoped(Var::from(right_var.as_str()), rt_ty, |d| {
                    d.expr(right, guards)
                })?;
                Ok((
                    Expr::case(guards.clone(), s, left_var, l, right_var, r),
                    SpanTree::node(span, vec![st, lt, rt]),
                ))
            }
            SExprKind::Let {
                var,
                annotation,
                bound,
                body,
            } => {
                let (m, mt) = self.expr(bound, theta)?;
                let t = match annotation {
                    Some(t) => self.ty(t)?,
                    None => match self.pretype(&m, &mt, theta)? {
                        Ok(t) => t,
                        Err(reason) => {
                            return Err(DesugarError::NeedsAnnotation {
                                var: var.clone(),
                                span,
                                reason,
                            })
                        }
                    },
                };
                let x = Var::from(var.as_str());
                let b = self.scoped(x.clone(), Some(t.clone()), |d| d.expr(body, theta))?;
                Ok(Self::bind(x, t, b, (m, mt), theta, span))
            }
        }
    }

    /// Builds a constructor from its components. Components that are not
    /// values, at any depth of nested constructors, are bound to fresh
    /// variables around the whole constructor.
    fn construct(
        &mut self,
        parts: &[SExpr],
        theta: &PartySet,
        span: SourceSpan,
        build: impl FnOnce(Vec<Value>) -> Value,
    ) -> Result<(Expr, SpanTree), DesugarError> {
        let depth = self.scope.len();
        let mut lets = Vec::new();
        let built = self
            .components(parts, theta, &mut lets)
            .map(|(vs, ts)| (Expr::Val(build(vs)), SpanTree::node(span, ts)));
        self.scope.truncate(depth);
        let mut out = built?;
        for (x, ty, bound, bt, s) in lets.into_iter().rev() {
            out = Self::bind(x, ty, out, (bound, bt), theta, s);
        }
        Ok(out)
    }

    fn components(
        &mut self,
        parts: &[SExpr],
        theta: &PartySet,
        lets: &mut Vec<Hoisted>,
    ) -> Result<(Vec<Value>, Vec<SpanTree>), DesugarError> {
        let mut values = Vec::new();
        let mut trees = Vec::new();
        for part in parts {
            let (v, t) = self.component(part, theta, lets)?;
            values.push(v);
            trees.push(t);
        }
        Ok((values, trees))
    }

    fn component(
        &mut self,
        part: &SExpr,
        theta: &PartySet,
        lets: &mut Vec<Hoisted>,
    ) -> Result<(Value, SpanTree), DesugarError> {
        let span = part.span;
        let nested = match &part.kind {
            SExprKind::Inl(a) => Some((vec![a.as_ref().clone()], 0)),
            SExprKind::Inr(a) => Some((vec![a.as_ref().clone()], 1)),
            SExprKind::Pair(a, b) => Some((vec![a.as_ref().clone(), b.as_ref().clone()], 2)),
            SExprKind::Tuple(es) => Some((es.clone(), 3)),
            _ => None,
        };
        if let Some((parts, tag)) = nested {
            let (mut vs, ts) = self.components(&parts, theta, lets)?;
            let v = match tag {
                0 => Value::inl(vs.pop().expect("one component")),
                1 => Value::inr(vs.pop().expect("one component")),
                2 => {
                    let b = vs.pop().expect("two components");
                    Value::pair(vs.pop().expect("two components"), b)
                }
                _ => Value::Tuple(vs),
            };
            return Ok((v, SpanTree::node(span, ts)));
        }
        let (e, t) = self.expr(part, theta)?;
        if let Expr::Val(v) = e {
            return Ok((v, t));
        }
        let ty = match self.pretype(&e, &t, theta)? {
            Ok(ty) => ty,
            Err(reason) => {
                return Err(DesugarError::NeedsAnnotation {
                    var: "a constructor argument".to_owned(),
                    span,
                    reason,
                })
            }
        };
        let x = self.fresh();
        self.scope.push((x.clone(), Some(ty.clone())));
        lets.push((x.clone(), ty, e, t, span));
        Ok((Value::Var(x), SpanTree::leaf(span)))
    }
}

/// A constructor argument bound to a fresh variable.
type Hoisted = (Var, Type, Expr, SpanTree, SourceSpan);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    fn run(src: &str) -> Result<(Expr, HashMap<Vec<u32>, SourceSpan>), DesugarError> {
        let p = parse(src).unwrap();
        let mut ps = BTreeSet::new();
        p.body.parties(&mut ps);
        desugar(&p, &PartySet::new(ps).unwrap())
    }

    #[test]
    fn aliases_are_inlined() {
        let (e, _) = run("type B = () + ();\nlet b : B@[p] = Inl ()@[p]; b").unwrap();
        assert_eq!(e.to_string(), "(fn b: (() + ())@[p]. b)@[p] (Inl ()@[p])");
    }

    #[test]
    fn unknown_alias_is_reported() {
        let err = run("let b : Bool@[p] = ()@[p]; b").unwrap_err();
        assert!(matches!(err, DesugarError::UnknownAlias { ref name, .. } if name == "Bool"));
    }

    #[test]
    fn non_value_constructor_arguments_are_bound() {
        let (e, spans) = run("Inl (com[s][r] ()@[s])").unwrap();
        assert_eq!(
            e.to_string(),
            "(fn _tmp0: ()@[r]. Inl _tmp0)@[r, s] (com[s][r] ()@[s])"
        );
        assert_eq!(spans[&vec![1]].start, 4);
    }

    #[test]
    fn ambiguous_lets_need_annotations() {
        let err = run("let x = Inl ()@[p]; x").unwrap_err();
        assert!(matches!(err, DesugarError::NeedsAnnotation { ref var, .. } if var == "x"));
        assert!(run("let x : (() + ())@[p] = Inl ()@[p]; x").is_ok());
    }

    #[test]
    fn case_branches_know_their_variables() {
        let src = "let c : (() + ())@[p] = Inl ()@[p];\n\
                   case[p] c of Inl a => let b = a; b; Inr a => a";
        assert!(run(src).is_ok());
    }

    #[test]
    fn lets_inside_lambdas_use_the_lambda_owners() {
        let (e, _) = run("(fn x: ()@[p]. let y = x; y)@[p]").unwrap();
        assert_eq!(e.to_string(), "(fn x: ()@[p]. (fn y: ()@[p]. y)@[p] x)@[p]");
    }
}
