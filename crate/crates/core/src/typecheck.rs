//! The type checker.
//!
//! Owner sets are always known from annotations, so they are computed bottom
//! up. The data shape of an injection is not (`Inl ()@[p]` has type
//! `(() + d)@[p]` for any `d`), so data types may contain metavariables that
//! are solved by unification. Keywords whose type depends on context
//! (`com`, `lookup`) are typed from their argument when applied and from the
//! expected type otherwise.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::ast::{DataType, Expr, PartySet, Type, Value, Var};
use crate::mask::is_noop;
use crate::span::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TypeErrorKind {
    UnboundVar,
    MaskUndefined,
    NotAFunction,
    ArgMismatch,
    GuardNotSum,
    BranchMismatch,
    PartiesNotSubset,
    SenderNotOwner,
    PairComponentsDisjoint,
    IndexOutOfRange,
    NoopViolation,
    /// An injection whose other side is never constrained.
    AmbiguousSum,
    /// An unapplied `com` or `lookup` with no expected type.
    AmbiguousKeyword,
}

impl fmt::Display for TypeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind}: {detail}")]
pub struct TypeError {
    pub kind: TypeErrorKind,
    /// Child-index path to the offending subterm.
    pub path: Vec<u32>,
    /// Filled in by the frontend when the term came from source text.
    pub span: Option<SourceSpan>,
    pub detail: String,
}

/// Variable bindings and the set of parties present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeEnv {
    pub bindings: Vec<(Var, Type)>,
    pub theta: PartySet,
}

impl TypeEnv {
    pub fn new(theta: PartySet) -> Self {
        TypeEnv {
            bindings: Vec::new(),
            theta,
        }
    }

    pub fn bind(mut self, x: impl Into<Var>, t: Type) -> Self {
        self.bindings.push((x.into(), t));
        self
    }
}

/// How often each typing rule fired.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleCoverage(pub BTreeMap<&'static str, usize>);

impl RuleCoverage {
    pub const RULES: [&'static str; 13] = [
        "TVAR", "TLAMBDA", "TAPP", "TCASE", "TUNIT", "TPAIR", "TVEC", "TINL", "TINR", "TPROJ1",
        "TPROJ2", "TPROJN", "TCOM",
    ];

    fn hit(&mut self, rule: &'static str) {
        *self.0.entry(rule).or_default() += 1;
    }

    pub fn merge(&mut self, other: &RuleCoverage) {
        for (rule, n) in &other.0 {
            *self.0.entry(rule).or_default() += n;
        }
    }

    pub fn missing(&self) -> Vec<&'static str> {
        Self::RULES
            .into_iter()
            .filter(|r| self.0.get(r).copied().unwrap_or(0) == 0)
            .collect()
    }
}

/// Result of [`typecheck_detailed`].
#[derive(Debug, Clone)]
pub struct Checked {
    pub ty: Type,
    /// The type of every node, keyed by path. Unconstrained sum components
    /// default to `()`.
    pub node_types: HashMap<Vec<u32>, Type>,
    /// The party set each node was checked under.
    pub node_theta: HashMap<Vec<u32>, PartySet>,
    pub coverage: RuleCoverage,
}

/// Synthesizes the type of `e`.
pub fn typecheck(env: &TypeEnv, e: &Expr) -> Result<Type, TypeError> {
    let mut c = Checker::new(false);
    let t = c.top(env, e, None)?;
    c.finish(&t)
}

/// Checks `e` against a known type. Unlike [`typecheck`], injections whose
/// other side is fixed only by `expected` are accepted.
pub fn check_against(env: &TypeEnv, e: &Expr, expected: &Type) -> Result<(), TypeError> {
    let mut c = Checker::new(false);
    c.top(env, e, Some(expected)).map(|_| ())
}

/// Like [`typecheck`] (or [`check_against`] when `expected` is given), also
/// recording rule coverage and per-node types.
pub fn typecheck_detailed(
    env: &TypeEnv,
    e: &Expr,
    expected: Option<&Type>,
) -> Result<Checked, TypeError> {
    let mut c = Checker::new(true);
    let t = c.top(env, e, expected)?;
    let ty = match expected {
        Some(t) => t.clone(),
        None => c.finish(&t)?,
    };
    let node_types = c
        .node_types
        .iter()
        .map(|(p, t)| (p.clone(), c.zonk_default(t)))
        .collect();
    Ok(Checked {
        ty,
        node_types,
        node_theta: c.node_theta,
        coverage: c.coverage,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Dt {
    Unit,
    Sum(Box<Dt>, Box<Dt>),
    Prod(Box<Dt>, Box<Dt>),
    Meta(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Ty {
    Data(Dt, PartySet),
    Fun(Box<Ty>, Box<Ty>, PartySet),
    Tuple(Vec<Ty>),
}

impl From<&DataType> for Dt {
    fn from(d: &DataType) -> Self {
        match d {
            DataType::Unit => Dt::Unit,
            DataType::Sum(l, r) => Dt::Sum(Box::new((&**l).into()), Box::new((&**r).into())),
            DataType::Prod(l, r) => Dt::Prod(Box::new((&**l).into()), Box::new((&**r).into())),
        }
    }
}

impl From<&Type> for Ty {
    fn from(t: &Type) -> Self {
        match t {
            Type::Data(d, o) => Ty::Data(d.into(), o.clone()),
            Type::Fun(a, r, o) => {
                Ty::Fun(Box::new((&**a).into()), Box::new((&**r).into()), o.clone())
            }
            Type::Tuple(ts) => Ty::Tuple(ts.iter().map(Ty::from).collect()),
        }
    }
}

fn mask_ty(t: &Ty, theta: &PartySet) -> Option<Ty> {
    match t {
        Ty::Data(d, o) => Some(Ty::Data(d.clone(), o.intersection(theta)?)),
        Ty::Fun(_, _, o) => o.is_subset(theta).then(|| t.clone()),
        Ty::Tuple(ts) => ts
            .iter()
            .map(|t| mask_ty(t, theta))
            .collect::<Option<Vec<_>>>()
            .map(Ty::Tuple),
    }
}

#[derive(Clone)]
struct Checker {
    metas: Vec<Option<Dt>>,
    /// Metavariables standing for the payload of an unapplied `com`.
    keyword_metas: Vec<usize>,
    detailed: bool,
    path: Vec<u32>,
    node_types: HashMap<Vec<u32>, Ty>,
    node_theta: HashMap<Vec<u32>, PartySet>,
    coverage: RuleCoverage,
}

type Gamma = Vec<(Var, Ty)>;

/// Child index, bound variable, body, and payload type of a case branch.
type Branch<'a> = (u32, &'a Var, &'a Expr, Dt);

impl Checker {
    fn new(detailed: bool) -> Self {
        Checker {
            metas: Vec::new(),
            keyword_metas: Vec::new(),
            detailed,
            path: Vec::new(),
            node_types: HashMap::new(),
            node_theta: HashMap::new(),
            coverage: RuleCoverage::default(),
        }
    }

    fn top(&mut self, env: &TypeEnv, e: &Expr, expected: Option<&Type>) -> Result<Ty, TypeError> {
        let mut gamma: Gamma = env
            .bindings
            .iter()
            .map(|(x, t)| (x.clone(), Ty::from(t)))
            .collect();
        let expected = expected.map(Ty::from);
        let t = self.expr(&env.theta, &mut gamma, e, expected.as_ref())?;
        if let Some(want) = &expected {
            if !self.unify(&t, want) {
                return Err(self.err(
                    TypeErrorKind::ArgMismatch,
                    format!("expected {}, found {}", self.show(want), self.show(&t)),
                ));
            }
        }
        Ok(t)
    }

    fn finish(&self, t: &Ty) -> Result<Type, TypeError> {
        self.zonk(t).ok_or_else(|| {
            let mut open = Vec::new();
            self.open_metas(t, &mut open);
            if open.iter().any(|m| self.keyword_metas.contains(m)) {
                TypeError {
                    kind: TypeErrorKind::AmbiguousKeyword,
                    path: Vec::new(),
                    span: None,
                    detail: format!(
                        "the payload of a communication in {} is not determined; apply it or annotate the binding",
                        self.show(t)
                    ),
                }
            } else {
                TypeError {
                    kind: TypeErrorKind::AmbiguousSum,
                    path: Vec::new(),
                    span: None,
                    detail: format!(
                        "the type {} is not fully determined; add a type annotation",
                        self.show(t)
                    ),
                }
            }
        })
    }

    fn open_metas(&self, t: &Ty, out: &mut Vec<usize>) {
        fn dt(c: &Checker, d: &Dt, out: &mut Vec<usize>) {
            match c.resolve(d) {
                Dt::Meta(m) => out.push(m),
                Dt::Unit => {}
                Dt::Sum(l, r) | Dt::Prod(l, r) => {
                    dt(c, &l, out);
                    dt(c, &r, out);
                }
            }
        }
        match t {
            Ty::Data(d, _) => dt(self, d, out),
            Ty::Fun(a, r, _) => {
                self.open_metas(a, out);
                self.open_metas(r, out);
            }
            Ty::Tuple(ts) => ts.iter().for_each(|t| self.open_metas(t, out)),
        }
    }

    fn err(&self, kind: TypeErrorKind, detail: String) -> TypeError {
        TypeError {
            kind,
            path: self.path.clone(),
            span: None,
            detail,
        }
    }

    fn fresh(&mut self) -> Dt {
        self.metas.push(None);
        Dt::Meta(self.metas.len() - 1)
    }

    fn resolve(&self, d: &Dt) -> Dt {
        match d {
            Dt::Meta(m) => match &self.metas[*m] {
                Some(d) => self.resolve(d),
                None => d.clone(),
            },
            _ => d.clone(),
        }
    }

    fn occurs(&self, m: usize, d: &Dt) -> bool {
        match self.resolve(d) {
            Dt::Meta(n) => n == m,
            Dt::Unit => false,
            Dt::Sum(l, r) | Dt::Prod(l, r) => self.occurs(m, &l) || self.occurs(m, &r),
        }
    }

    fn unify_dt(&mut self, a: &Dt, b: &Dt) -> bool {
        let (a, b) = (self.resolve(a), self.resolve(b));
        match (&a, &b) {
            (Dt::Meta(m), Dt::Meta(n)) if m == n => true,
            (Dt::Meta(m), other) | (other, Dt::Meta(m)) => {
                if self.occurs(*m, other) {
                    return false;
                }
                self.metas[*m] = Some(other.clone());
                true
            }
            (Dt::Unit, Dt::Unit) => true,
            (Dt::Sum(a1, a2), Dt::Sum(b1, b2)) | (Dt::Prod(a1, a2), Dt::Prod(b1, b2)) => {
                self.unify_dt(a1, b1) && self.unify_dt(a2, b2)
            }
            _ => false,
        }
    }

    /// Unification may bind metavariables even when it ultimately fails; a
    /// failure always aborts checking, so that is harmless.
    fn unify(&mut self, a: &Ty, b: &Ty) -> bool {
        match (a, b) {
            (Ty::Data(d1, o1), Ty::Data(d2, o2)) => o1 == o2 && self.unify_dt(d1, d2),
            (Ty::Fun(a1, r1, o1), Ty::Fun(a2, r2, o2)) => {
                o1 == o2 && self.unify(a1, a2) && self.unify(r1, r2)
            }
            (Ty::Tuple(ts), Ty::Tuple(us)) => {
                ts.len() == us.len() && ts.iter().zip(us).all(|(t, u)| self.unify(t, u))
            }
            _ => false,
        }
    }

    fn zonk_dt(&self, d: &Dt) -> Option<DataType> {
        Some(match self.resolve(d) {
            Dt::Unit => DataType::Unit,
            Dt::Sum(l, r) => DataType::sum(self.zonk_dt(&l)?, self.zonk_dt(&r)?),
            Dt::Prod(l, r) => DataType::prod(self.zonk_dt(&l)?, self.zonk_dt(&r)?),
            Dt::Meta(_) => return None,
        })
    }

    fn zonk(&self, t: &Ty) -> Option<Type> {
        Some(match t {
            Ty::Data(d, o) => Type::Data(self.zonk_dt(d)?, o.clone()),
            Ty::Fun(a, r, o) => Type::fun(self.zonk(a)?, self.zonk(r)?, o.clone()),
            Ty::Tuple(ts) => Type::Tuple(ts.iter().map(|t| self.zonk(t)).collect::<Option<_>>()?),
        })
    }

    fn default_dt(&self, d: &Dt) -> DataType {
        match self.resolve(d) {
            Dt::Unit | Dt::Meta(_) => DataType::Unit,
            Dt::Sum(l, r) => DataType::sum(self.default_dt(&l), self.default_dt(&r)),
            Dt::Prod(l, r) => DataType::prod(self.default_dt(&l), self.default_dt(&r)),
        }
    }

    fn zonk_default(&self, t: &Ty) -> Type {
        match t {
            Ty::Data(d, o) => Type::Data(self.default_dt(d), o.clone()),
            Ty::Fun(a, r, o) => Type::fun(self.zonk_default(a), self.zonk_default(r), o.clone()),
            Ty::Tuple(ts) => Type::Tuple(ts.iter().map(|t| self.zonk_default(t)).collect()),
        }
    }

    fn show_dt(&self, d: &Dt) -> String {
        match self.resolve(d) {
            Dt::Unit => "()".into(),
            Dt::Meta(m) => format!("?{m}"),
            Dt::Sum(l, r) => format!("{} + {}", self.show_operand(&l), self.show_operand(&r)),
            Dt::Prod(l, r) => format!("{} * {}", self.show_operand(&l), self.show_operand(&r)),
        }
    }

    fn show_operand(&self, d: &Dt) -> String {
        match self.resolve(d) {
            Dt::Sum(..) | Dt::Prod(..) => format!("({})", self.show_dt(d)),
            _ => self.show_dt(d),
        }
    }

    fn show(&self, t: &Ty) -> String {
        match t {
            Ty::Data(d, o) => format!("{}@{o}", self.show_operand(d)),
            Ty::Fun(a, r, o) => format!("({} -> {})@{o}", self.show(a), self.show(r)),
            Ty::Tuple(ts) => {
                let parts: Vec<String> = ts.iter().map(|t| self.show(t)).collect();
                if parts.len() == 1 {
                    format!("({},)", parts[0])
                } else {
                    format!("({})", parts.join(", "))
                }
            }
        }
    }

    fn hit(&mut self, rule: &'static str) {
        if self.detailed {
            self.coverage.hit(rule);
        }
    }

    fn record(&mut self, theta: &PartySet, t: &Ty) {
        if self.detailed {
            self.node_types.insert(self.path.clone(), t.clone());
            self.node_theta.insert(self.path.clone(), theta.clone());
        }
    }

    fn child<T>(&mut self, i: u32, f: impl FnOnce(&mut Self) -> T) -> T {
        self.path.push(i);
        let out = f(self);
        self.path.pop();
        out
    }

    fn require_subset(
        &self,
        inner: &PartySet,
        theta: &PartySet,
        what: &str,
    ) -> Result<(), TypeError> {
        if inner.is_subset(theta) {
            Ok(())
        } else {
            Err(self.err(
                TypeErrorKind::PartiesNotSubset,
                format!("{what} {inner} is not within the present parties {theta}"),
            ))
        }
    }

    fn expr(
        &mut self,
        theta: &PartySet,
        gamma: &mut Gamma,
        e: &Expr,
        expected: Option<&Ty>,
    ) -> Result<Ty, TypeError> {
        let t = match e {
            Expr::Val(v) => return self.value(theta, gamma, v, expected),
            Expr::App(f, a) => match &**f {
                Expr::Val(kw) if kw.is_keyword() => self.keyword_app(theta, gamma, kw, a)?,
                _ => self.app(theta, gamma, f, a)?,
            },
            Expr::Case {
                guards,
                scrutinee,
                left_var,
                left,
                right_var,
                right,
            } => {
                let tn = self.child(0, |c| c.expr(theta, gamma, scrutinee, None))?;
                let (dl, dr) = self.child(0, |c| c.guard_sides(&tn, guards))?;
                self.require_subset(guards, theta, "case guards")?;
                let l = (1, left_var, &**left, dl);
                let r = (2, right_var, &**right, dr);
                let tl = if expected.is_some() {
                    self.branches(guards, gamma, expected, l, r)?
                } else {
                    // Either branch may be the one that fixes the type of
                    // the other, so try both orders.
                    let saved = self.clone();
                    match self.branches(guards, gamma, None, l.clone(), r.clone()) {
                        Ok(t) => t,
                        Err(first) => {
                            *self = saved;
                            self.branches(guards, gamma, None, r, l)
                                .map_err(|_| first)?
                        }
                    }
                };
                self.hit("TCASE");
                tl
            }
        };
        self.record(theta, &t);
        Ok(t)
    }

    /// Types two case branches, the second against the first unless an
    /// expected type is known, and unifies them.
    fn branches(
        &mut self,
        guards: &PartySet,
        gamma: &mut Gamma,
        expected: Option<&Ty>,
        first: Branch<'_>,
        second: Branch<'_>,
    ) -> Result<Ty, TypeError> {
        let (i, x, body, d) = first;
        gamma.push((x.clone(), Ty::Data(d, guards.clone())));
        let t1 = self.child(i, |c| c.expr(guards, gamma, body, expected));
        gamma.pop();
        let t1 = t1?;
        let (j, y, body, d) = second;
        gamma.push((y.clone(), Ty::Data(d, guards.clone())));
        let hint = expected.cloned().unwrap_or_else(|| t1.clone());
        let t2 = self.child(j, |c| c.expr(guards, gamma, body, Some(&hint)));
        gamma.pop();
        let t2 = t2?;
        if !self.unify(&t1, &t2) {
            let (tl, tr) = if i == 1 { (&t1, &t2) } else { (&t2, &t1) };
            return Err(self.err(
                TypeErrorKind::BranchMismatch,
                format!(
                    "branches have types {} and {}",
                    self.show(tl),
                    self.show(tr)
                ),
            ));
        }
        Ok(if i == 1 { t1 } else { t2 })
    }

    fn guard_sides(&mut self, tn: &Ty, guards: &PartySet) -> Result<(Dt, Dt), TypeError> {
        let Some(masked) = mask_ty(tn, guards) else {
            return Err(self.err(
                TypeErrorKind::MaskUndefined,
                format!(
                    "the guard has type {} which cannot be masked to the case parties {guards}",
                    self.show(tn)
                ),
            ));
        };
        let Ty::Data(d, owners) = &masked else {
            return Err(self.err(
                TypeErrorKind::GuardNotSum,
                format!("the guard has type {}, which is not a sum", self.show(tn)),
            ));
        };
        if owners != guards {
            return Err(self.err(
                TypeErrorKind::MaskUndefined,
                format!(
                    "the guard is located at {owners} but every case party {guards} must own it"
                ),
            ));
        }
        let (l, r) = (self.fresh(), self.fresh());
        let sum = Dt::Sum(Box::new(l.clone()), Box::new(r.clone()));
        if !self.unify_dt(d, &sum) {
            return Err(self.err(
                TypeErrorKind::GuardNotSum,
                format!("the guard has type {}, which is not a sum", self.show(tn)),
            ));
        }
        Ok((l, r))
    }

    fn app(
        &mut self,
        theta: &PartySet,
        gamma: &mut Gamma,
        f: &Expr,
        a: &Expr,
    ) -> Result<Ty, TypeError> {
        let tf = self.child(0, |c| c.expr(theta, gamma, f, None))?;
        let Ty::Fun(ta, tr, owners) = tf else {
            return Err(self.child(0, |c| {
                c.err(
                    TypeErrorKind::NotAFunction,
                    format!("applied a value of type {}", c.show(&tf)),
                )
            }));
        };
        let targ = self.child(1, |c| c.expr(theta, gamma, a, Some(&ta)))?;
        let Some(masked) = mask_ty(&targ, &owners) else {
            return Err(self.child(1, |c| {
                c.err(
                    TypeErrorKind::MaskUndefined,
                    format!(
                        "argument of type {} cannot be masked to the function's parties {owners}",
                        c.show(&targ)
                    ),
                )
            }));
        };
        if !self.unify(&masked, &ta) {
            return Err(self.child(1, |c| {
                c.err(
                    TypeErrorKind::ArgMismatch,
                    format!(
                        "expected an argument of type {}, found {}",
                        c.show(&ta),
                        c.show(&targ)
                    ),
                )
            }));
        }
        self.hit("TAPP");
        Ok(*tr)
    }

    /// Applications of `fst`, `snd`, `lookup` and `com`, typed from the
    /// argument.
    fn keyword_app(
        &mut self,
        theta: &PartySet,
        gamma: &mut Gamma,
        kw: &Value,
        a: &Expr,
    ) -> Result<Ty, TypeError> {
        let targ = self.child(1, |c| c.expr(theta, gamma, a, None))?;
        let (fun_ty, result) = self.child(0, |c| c.keyword_from_arg(theta, kw, &targ))?;
        self.child(0, |c| c.record(theta, &fun_ty));
        self.hit("TAPP");
        Ok(result)
    }

    fn keyword_from_arg(
        &mut self,
        theta: &PartySet,
        kw: &Value,
        targ: &Ty,
    ) -> Result<(Ty, Ty), TypeError> {
        let mismatch = |c: &Self, want: &str| {
            c.err(
                TypeErrorKind::ArgMismatch,
                format!("{kw} expects {want}, found {}", c.show(targ)),
            )
        };
        let masked = |c: &Self, owners: &PartySet| {
            mask_ty(targ, owners).ok_or_else(|| {
                c.err(
                    TypeErrorKind::MaskUndefined,
                    format!(
                        "argument of type {} cannot be masked to {owners}",
                        c.show(targ)
                    ),
                )
            })
        };
        match kw {
            Value::Fst(o) | Value::Snd(o) => {
                self.require_subset(o, theta, "keyword parties")?;
                let Ty::Data(d, owners) = masked(self, o)? else {
                    return Err(mismatch(self, "a pair"));
                };
                if &owners != o {
                    return Err(self.err(
                        TypeErrorKind::ArgMismatch,
                        format!("{kw} needs a pair owned by {o}, found one owned by {owners}"),
                    ));
                }
                let (d1, d2) = (self.fresh(), self.fresh());
                if !self.unify_dt(&d, &Dt::Prod(Box::new(d1.clone()), Box::new(d2.clone()))) {
                    return Err(mismatch(self, "a pair"));
                }
                let (rule, out) = match kw {
                    Value::Fst(_) => ("TPROJ1", d1.clone()),
                    _ => ("TPROJ2", d2.clone()),
                };
                self.hit(rule);
                let arg = Ty::Data(Dt::Prod(Box::new(d1), Box::new(d2)), o.clone());
                let res = Ty::Data(out, o.clone());
                Ok((
                    Ty::Fun(Box::new(arg), Box::new(res.clone()), o.clone()),
                    res,
                ))
            }
            Value::Lookup(i, o) => {
                self.require_subset(o, theta, "keyword parties")?;
                let Ty::Tuple(ts) = masked(self, o)? else {
                    return Err(mismatch(self, "a tuple"));
                };
                let res = self.tuple_index(*i, &ts)?;
                self.hit("TPROJN");
                Ok((
                    Ty::Fun(Box::new(Ty::Tuple(ts)), Box::new(res.clone()), o.clone()),
                    res,
                ))
            }
            Value::Com(s, r) => {
                let all = r.with(s.clone());
                self.require_subset(&all, theta, "communication parties")?;
                let Ty::Data(d, owners) = targ else {
                    return Err(mismatch(self, "data"));
                };
                let Some(senders) = owners.intersection(&all) else {
                    return Err(self.err(
                        TypeErrorKind::MaskUndefined,
                        format!("argument located at {owners} cannot be masked to {}", all),
                    ));
                };
                if !senders.contains(s) {
                    return Err(self.err(
                        TypeErrorKind::SenderNotOwner,
                        format!("sender {s} does not own the argument, which is at {owners}"),
                    ));
                }
                self.hit("TCOM");
                let res = Ty::Data(d.clone(), r.clone());
                let arg = Ty::Data(d.clone(), senders);
                Ok((Ty::Fun(Box::new(arg), Box::new(res.clone()), all), res))
            }
            _ => unreachable!("keyword_from_arg called on a non-keyword"),
        }
    }

    fn tuple_index(&self, i: usize, ts: &[Ty]) -> Result<Ty, TypeError> {
        if i == 0 || i > ts.len() {
            return Err(self.err(
                TypeErrorKind::IndexOutOfRange,
                format!(
                    "index {i} is out of range for a tuple of length {}",
                    ts.len()
                ),
            ));
        }
        Ok(ts[i - 1].clone())
    }

    fn value(
        &mut self,
        theta: &PartySet,
        gamma: &mut Gamma,
        v: &Value,
        expected: Option<&Ty>,
    ) -> Result<Ty, TypeError> {
        let t = match v {
            Value::Var(x) => {
                let Some((_, t)) = gamma.iter().rev().find(|(y, _)| y == x) else {
                    return Err(
                        self.err(TypeErrorKind::UnboundVar, format!("unbound variable `{x}`"))
                    );
                };
                let Some(t) = mask_ty(t, theta) else {
                    return Err(self.err(
                        TypeErrorKind::MaskUndefined,
                        format!(
                            "`{x}` has type {} which is not available at {theta}",
                            self.show(t)
                        ),
                    ));
                };
                self.hit("TVAR");
                t
            }
            Value::Lambda {
                param,
                param_type,
                body,
                owners,
            } => {
                self.require_subset(owners, theta, "function parties")?;
                if !is_noop(param_type, owners) {
                    return Err(self.err(
                        TypeErrorKind::NoopViolation,
                        format!("parameter type {param_type} mentions parties outside {owners}"),
                    ));
                }
                let ta = Ty::from(param_type);
                let hint = match expected {
                    Some(Ty::Fun(_, r, _)) => Some((**r).clone()),
                    _ => None,
                };
                gamma.push((param.clone(), ta.clone()));
                let tr = self.child(0, |c| c.expr(owners, gamma, body, hint.as_ref()));
                gamma.pop();
                self.hit("TLAMBDA");
                Ty::Fun(Box::new(ta), Box::new(tr?), owners.clone())
            }
            Value::Unit(o) => {
                self.require_subset(o, theta, "unit owners")?;
                self.hit("TUNIT");
                Ty::Data(Dt::Unit, o.clone())
            }
            Value::Inl(inner) | Value::Inr(inner) => {
                let is_left = matches!(v, Value::Inl(_));
                let hint = match expected {
                    Some(Ty::Data(d, o)) => match self.resolve(d) {
                        Dt::Sum(l, r) => Some(Ty::Data(if is_left { *l } else { *r }, o.clone())),
                        _ => None,
                    },
                    _ => None,
                };
                let ti = self.child(0, |c| c.value(theta, gamma, inner, hint.as_ref()))?;
                let Ty::Data(d, o) = &ti else {
                    return Err(self.err(
                        TypeErrorKind::ArgMismatch,
                        format!("injections hold data, found {}", self.show(&ti)),
                    ));
                };
                let other = self.fresh();
                let d = d.clone();
                let (l, r, rule) = if is_left {
                    (d, other, "TINL")
                } else {
                    (other, d, "TINR")
                };
                self.hit(rule);
                Ty::Data(Dt::Sum(Box::new(l), Box::new(r)), o.clone())
            }
            Value::Pair(a, b) => {
                let (ha, hb) = match expected {
                    Some(Ty::Data(d, o)) => match self.resolve(d) {
                        Dt::Prod(l, r) => {
                            (Some(Ty::Data(*l, o.clone())), Some(Ty::Data(*r, o.clone())))
                        }
                        _ => (None, None),
                    },
                    _ => (None, None),
                };
                let ta = self.child(0, |c| c.value(theta, gamma, a, ha.as_ref()))?;
                let tb = self.child(1, |c| c.value(theta, gamma, b, hb.as_ref()))?;
                let (Ty::Data(d1, o1), Ty::Data(d2, o2)) = (&ta, &tb) else {
                    return Err(self.err(
                        TypeErrorKind::ArgMismatch,
                        format!(
                            "pairs hold data, found {} and {}",
                            self.show(&ta),
                            self.show(&tb)
                        ),
                    ));
                };
                let Some(o) = o1.intersection(o2) else {
                    return Err(self.err(
                        TypeErrorKind::PairComponentsDisjoint,
                        format!("pair components are located at disjoint {o1} and {o2}"),
                    ));
                };
                self.hit("TPAIR");
                Ty::Data(Dt::Prod(Box::new(d1.clone()), Box::new(d2.clone())), o)
            }
            Value::Tuple(vs) => {
                let hints: Vec<Option<Ty>> = match expected {
                    Some(Ty::Tuple(ts)) if ts.len() == vs.len() => {
                        ts.iter().cloned().map(Some).collect()
                    }
                    _ => vec![None; vs.len()],
                };
                let mut ts = Vec::with_capacity(vs.len());
                for (i, (v, h)) in vs.iter().zip(&hints).enumerate() {
                    ts.push(self.child(i as u32, |c| c.value(theta, gamma, v, h.as_ref()))?);
                }
                self.hit("TVEC");
                Ty::Tuple(ts)
            }
            Value::Fst(o) | Value::Snd(o) => {
                self.require_subset(o, theta, "keyword parties")?;
                let (d1, d2) = (self.fresh(), self.fresh());
                let arg = Ty::Data(
                    Dt::Prod(Box::new(d1.clone()), Box::new(d2.clone())),
                    o.clone(),
                );
                let (rule, out) = match v {
                    Value::Fst(_) => ("TPROJ1", d1),
                    _ => ("TPROJ2", d2),
                };
                self.hit(rule);
                Ty::Fun(Box::new(arg), Box::new(Ty::Data(out, o.clone())), o.clone())
            }
            Value::Lookup(i, o) => {
                self.require_subset(o, theta, "keyword parties")?;
                let Some(Ty::Fun(arg, _, _)) = expected else {
                    return Err(self.ambiguous(v));
                };
                let Ty::Tuple(ts) = &**arg else {
                    return Err(self.ambiguous(v));
                };
                if !mask_ty(arg, o).is_some_and(|m| self.same(&m, arg)) {
                    return Err(self.err(
                        TypeErrorKind::NoopViolation,
                        format!("tuple type {} mentions parties outside {o}", self.show(arg)),
                    ));
                }
                let res = self.tuple_index(*i, ts)?;
                self.hit("TPROJN");
                Ty::Fun(arg.clone(), Box::new(res), o.clone())
            }
            Value::Com(s, r) => {
                let all = r.with(s.clone());
                self.require_subset(&all, theta, "communication parties")?;
                // Without context the payload type is left open and the
                // sender alone owns the argument.
                let arg = match expected {
                    Some(Ty::Fun(arg, _, _)) => (**arg).clone(),
                    _ => {
                        let d = self.fresh();
                        if let Dt::Meta(m) = d {
                            self.keyword_metas.push(m);
                        }
                        Ty::Data(d, PartySet::singleton(s.clone()))
                    }
                };
                let Ty::Data(d, senders) = &arg else {
                    return Err(self.err(
                        TypeErrorKind::ArgMismatch,
                        format!("{v} sends data, not {}", self.show(&arg)),
                    ));
                };
                if !senders.contains(s) {
                    return Err(self.err(
                        TypeErrorKind::SenderNotOwner,
                        format!("sender {s} is not among the argument owners {senders}"),
                    ));
                }
                self.require_subset(senders, theta, "sender owners")?;
                self.hit("TCOM");
                Ty::Fun(
                    Box::new(arg.clone()),
                    Box::new(Ty::Data(d.clone(), r.clone())),
                    all,
                )
            }
        };
        self.record(theta, &t);
        Ok(t)
    }

    /// Structural equality after resolving solved metavariables.
    fn same(&self, a: &Ty, b: &Ty) -> bool {
        self.show(a) == self.show(b)
    }

    fn ambiguous(&self, kw: &Value) -> TypeError {
        self.err(
            TypeErrorKind::AmbiguousKeyword,
            format!(
                "cannot determine the type of unapplied {kw}; apply it or annotate the binding"
            ),
        )
    }
}
