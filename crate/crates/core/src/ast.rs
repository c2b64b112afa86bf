//! Syntax trees for choreographies and for the local process language.
//!
//! Choreographic terms ([`Expr`], [`Value`], [`Type`]) carry explicit party
//! annotations. Local terms ([`Behavior`], [`LocalValue`]) are what endpoint
//! projection produces: untyped, mostly location-free, with `⊥` standing in
//! for computation that happens somewhere else.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AstError {
    #[error("invalid party name `{0}`")]
    InvalidParty(String),
    #[error("party sets may not be empty")]
    EmptyPartySet,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
}

/// A single party (location).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Party(String);

impl Party {
    pub fn new(name: impl Into<String>) -> Result<Self, AstError> {
        let name = name.into();
        if is_identifier(&name) && !name.contains('$') {
            Ok(Party(name))
        } else {
            Err(AstError::InvalidParty(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Party {
    type Error = AstError;
    fn try_from(s: String) -> Result<Self, AstError> {
        Party::new(s)
    }
}

impl From<Party> for String {
    fn from(p: Party) -> String {
        p.0
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A nonempty set of parties, kept sorted so that every traversal is
/// deterministic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartySet(BTreeSet<Party>);

impl PartySet {
    pub fn new(parties: impl IntoIterator<Item = Party>) -> Result<Self, AstError> {
        let set: BTreeSet<Party> = parties.into_iter().collect();
        if set.is_empty() {
            Err(AstError::EmptyPartySet)
        } else {
            Ok(PartySet(set))
        }
    }

    /// Builds a set from party names. Panics on an invalid name or an empty
    /// list, so it is meant for literals in tests and fixtures.
    pub fn of(names: &[&str]) -> Self {
        let parties = names
            .iter()
            .map(|n| Party::new(*n).expect("valid party name"));
        PartySet::new(parties).expect("nonempty party set")
    }

    pub fn singleton(p: Party) -> Self {
        PartySet(BTreeSet::from([p]))
    }

    pub fn contains(&self, p: &Party) -> bool {
        self.0.contains(p)
    }

    pub fn is_subset(&self, other: &PartySet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &PartySet) -> PartySet {
        PartySet(self.0.union(&other.0).cloned().collect())
    }

    /// `None` when the intersection is empty.
    pub fn intersection(&self, other: &PartySet) -> Option<PartySet> {
        let set: BTreeSet<Party> = self.0.intersection(&other.0).cloned().collect();
        (!set.is_empty()).then_some(PartySet(set))
    }

    pub fn with(&self, p: Party) -> PartySet {
        let mut set = self.0.clone();
        set.insert(p);
        PartySet(set)
    }

    /// The members other than `p`; possibly empty.
    pub fn without(&self, p: &Party) -> BTreeSet<Party> {
        self.0.iter().filter(|q| *q != p).cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Party> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_set(&self) -> &BTreeSet<Party> {
        &self.0
    }
}

impl<'a> IntoIterator for &'a PartySet {
    type Item = &'a Party;
    type IntoIter = std::collections::btree_set::Iter<'a, Party>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// A term variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(String);

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        Var(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var(s.to_owned())
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The shape of sendable data.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DataType {
    Unit,
    Sum(Box<DataType>, Box<DataType>),
    Prod(Box<DataType>, Box<DataType>),
}

impl DataType {
    pub fn sum(l: DataType, r: DataType) -> Self {
        DataType::Sum(Box::new(l), Box::new(r))
    }

    pub fn prod(l: DataType, r: DataType) -> Self {
        DataType::Prod(Box::new(l), Box::new(r))
    }

    pub fn bool() -> Self {
        DataType::sum(DataType::Unit, DataType::Unit)
    }

    pub fn depth(&self) -> usize {
        match self {
            DataType::Unit => 0,
            DataType::Sum(l, r) | DataType::Prod(l, r) => 1 + l.depth().max(r.depth()),
        }
    }
}

/// A located type.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Type {
    Data(DataType, PartySet),
    Fun(Box<Type>, Box<Type>, PartySet),
    /// Never empty.
    Tuple(Vec<Type>),
}

impl Type {
    pub fn data(d: DataType, owners: PartySet) -> Self {
        Type::Data(d, owners)
    }

    pub fn fun(arg: Type, ret: Type, owners: PartySet) -> Self {
        Type::Fun(Box::new(arg), Box::new(ret), owners)
    }

    /// Every party named anywhere in the type.
    pub fn parties(&self) -> BTreeSet<Party> {
        let mut out = BTreeSet::new();
        self.collect_parties(&mut out);
        out
    }

    fn collect_parties(&self, out: &mut BTreeSet<Party>) {
        match self {
            Type::Data(_, o) => out.extend(o.iter().cloned()),
            Type::Fun(a, r, o) => {
                out.extend(o.iter().cloned());
                a.collect_parties(out);
                r.collect_parties(out);
            }
            Type::Tuple(ts) => ts.iter().for_each(|t| t.collect_parties(out)),
        }
    }
}

/// Choreographic values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Var(Var),
    Lambda {
        param: Var,
        param_type: Type,
        body: Box<Expr>,
        owners: PartySet,
    },
    Unit(PartySet),
    Inl(Box<Value>),
    Inr(Box<Value>),
    Pair(Box<Value>, Box<Value>),
    /// Heterogeneous tuple; never empty.
    Tuple(Vec<Value>),
    Fst(PartySet),
    Snd(PartySet),
    /// 1-based index.
    Lookup(usize, PartySet),
    Com(Party, PartySet),
}

impl Value {
    pub fn var(name: &str) -> Self {
        Value::Var(Var::from(name))
    }

    pub fn lambda(param: &str, param_type: Type, body: Expr, owners: PartySet) -> Self {
        Value::Lambda {
            param: Var::from(param),
            param_type,
            body: Box::new(body),
            owners,
        }
    }

    pub fn inl(v: Value) -> Self {
        Value::Inl(Box::new(v))
    }

    pub fn inr(v: Value) -> Self {
        Value::Inr(Box::new(v))
    }

    pub fn pair(a: Value, b: Value) -> Self {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn is_keyword(&self) -> bool {
        matches!(
            self,
            Value::Fst(_) | Value::Snd(_) | Value::Lookup(..) | Value::Com(..)
        )
    }
}

/// Choreographic expressions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Val(Value),
    App(Box<Expr>, Box<Expr>),
    Case {
        guards: PartySet,
        scrutinee: Box<Expr>,
        left_var: Var,
        left: Box<Expr>,
        right_var: Var,
        right: Box<Expr>,
    },
}

impl From<Value> for Expr {
    fn from(v: Value) -> Self {
        Expr::Val(v)
    }
}

impl Expr {
    pub fn app(f: impl Into<Expr>, a: impl Into<Expr>) -> Self {
        Expr::App(Box::new(f.into()), Box::new(a.into()))
    }

    pub fn case(
        guards: PartySet,
        scrutinee: impl Into<Expr>,
        left_var: &str,
        left: impl Into<Expr>,
        right_var: &str,
        right: impl Into<Expr>,
    ) -> Self {
        Expr::Case {
            guards,
            scrutinee: Box::new(scrutinee.into()),
            left_var: Var::from(left_var),
            left: Box::new(left.into()),
            right_var: Var::from(right_var),
            right: Box::new(right.into()),
        }
    }

    pub fn as_value(&self) -> Option<&Value> {
        match self {
            Expr::Val(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_value(&self) -> bool {
        matches!(self, Expr::Val(_))
    }

    /// Number of syntax nodes, counting values and their parts.
    pub fn size(&self) -> usize {
        match self {
            Expr::Val(v) => v.size(),
            Expr::App(f, a) => 1 + f.size() + a.size(),
            Expr::Case {
                scrutinee,
                left,
                right,
                ..
            } => 1 + scrutinee.size() + left.size() + right.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Val(v) => v.depth(),
            Expr::App(f, a) => 1 + f.depth().max(a.depth()),
            Expr::Case {
                scrutinee,
                left,
                right,
                ..
            } => 1 + scrutinee.depth().max(left.depth()).max(right.depth()),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        free_vars_expr(self, &mut Vec::new(), &mut out);
        out
    }

    /// The subterm at `path`, if any.
    pub fn at(&self, path: &[u32]) -> Option<Node<'_>> {
        let Some((&first, rest)) = path.split_first() else {
            return Some(Node::Expr(self));
        };
        match (self, first) {
            (Expr::Val(v), _) => Node::Value(v).child(first)?.descend(rest),
            (Expr::App(f, _), 0) => f.at(rest),
            (Expr::App(_, a), 1) => a.at(rest),
            (Expr::Case { scrutinee, .. }, 0) => scrutinee.at(rest),
            (Expr::Case { left, .. }, 1) => left.at(rest),
            (Expr::Case { right, .. }, 2) => right.at(rest),
            _ => None,
        }
    }

    /// Replaces the subterm at `path` with `value`. Returns `None` when the
    /// path does not exist.
    pub fn replace_at(&self, path: &[u32], value: &Value) -> Option<Expr> {
        self.replace_expr_at(path, &Expr::Val(value.clone()))
    }

    /// Replaces the subterm at `path` with `new`. Returns `None` when the
    /// path does not exist, or when it points inside a value at a position
    /// that only holds values and `new` is not one.
    pub fn replace_expr_at(&self, path: &[u32], new: &Expr) -> Option<Expr> {
        let Some((&first, rest)) = path.split_first() else {
            return Some(new.clone());
        };
        Some(match self {
            Expr::Val(v) => Expr::Val(v.replace_child(first, rest, new)?),
            Expr::App(f, a) => match first {
                0 => Expr::App(Box::new(f.replace_expr_at(rest, new)?), a.clone()),
                1 => Expr::App(f.clone(), Box::new(a.replace_expr_at(rest, new)?)),
                _ => return None,
            },
            Expr::Case {
                guards,
                scrutinee,
                left_var,
                left,
                right_var,
                right,
            } => {
                let (mut s, mut l, mut r) = (scrutinee.clone(), left.clone(), right.clone());
                match first {
                    0 => s = Box::new(scrutinee.replace_expr_at(rest, new)?),
                    1 => l = Box::new(left.replace_expr_at(rest, new)?),
                    2 => r = Box::new(right.replace_expr_at(rest, new)?),
                    _ => return None,
                }
                Expr::Case {
                    guards: guards.clone(),
                    scrutinee: s,
                    left_var: left_var.clone(),
                    left: l,
                    right_var: right_var.clone(),
                    right: r,
                }
            }
        })
    }

    /// Paths of every node, parents before children.
    pub fn paths(&self) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        collect_paths(Node::Expr(self), &mut Vec::new(), &mut out);
        out
    }
}

impl Value {
    pub fn size(&self) -> usize {
        match self {
            Value::Lambda { body, .. } => 1 + body.size(),
            Value::Inl(v) | Value::Inr(v) => 1 + v.size(),
            Value::Pair(a, b) => 1 + a.size() + b.size(),
            Value::Tuple(vs) => 1 + vs.iter().map(Value::size).sum::<usize>(),
            _ => 1,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Value::Lambda { body, .. } => 1 + body.depth(),
            Value::Inl(v) | Value::Inr(v) => 1 + v.depth(),
            Value::Pair(a, b) => 1 + a.depth().max(b.depth()),
            Value::Tuple(vs) => 1 + vs.iter().map(Value::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    fn replace_child(&self, index: u32, rest: &[u32], new: &Expr) -> Option<Value> {
        Some(match (self, index) {
            (
                Value::Lambda {
                    param,
                    param_type,
                    body,
                    owners,
                },
                0,
            ) => Value::Lambda {
                param: param.clone(),
                param_type: param_type.clone(),
                body: Box::new(body.replace_expr_at(rest, new)?),
                owners: owners.clone(),
            },
            (Value::Inl(v), 0) => Value::Inl(Box::new(v.replace_at(rest, new)?)),
            (Value::Inr(v), 0) => Value::Inr(Box::new(v.replace_at(rest, new)?)),
            (Value::Pair(a, b), 0) => Value::Pair(Box::new(a.replace_at(rest, new)?), b.clone()),
            (Value::Pair(a, b), 1) => Value::Pair(a.clone(), Box::new(b.replace_at(rest, new)?)),
            (Value::Tuple(vs), i) if (i as usize) < vs.len() => {
                let mut vs = vs.clone();
                vs[i as usize] = vs[i as usize].replace_at(rest, new)?;
                Value::Tuple(vs)
            }
            _ => return None,
        })
    }

    fn replace_at(&self, path: &[u32], new: &Expr) -> Option<Value> {
        match path.split_first() {
            None => new.as_value().cloned(),
            Some((&first, rest)) => self.replace_child(first, rest, new),
        }
    }
}

/// A borrowed view of a subterm.
#[derive(Debug, Clone, Copy)]
pub enum Node<'a> {
    Expr(&'a Expr),
    Value(&'a Value),
}

impl<'a> Node<'a> {
    /// The value at this node, looking through `Expr::Val`.
    pub fn as_value(self) -> Option<&'a Value> {
        match self {
            Node::Expr(Expr::Val(v)) | Node::Value(v) => Some(v),
            Node::Expr(_) => None,
        }
    }

    fn child(self, index: u32) -> Option<Node<'a>> {
        let v = match self {
            Node::Expr(e) => return e.at(&[index]),
            Node::Value(v) => v,
        };
        match (v, index) {
            (Value::Lambda { body, .. }, 0) => Some(Node::Expr(body)),
            (Value::Inl(v) | Value::Inr(v), 0) => Some(Node::Value(v)),
            (Value::Pair(a, _), 0) => Some(Node::Value(a)),
            (Value::Pair(_, b), 1) => Some(Node::Value(b)),
            (Value::Tuple(vs), i) => vs.get(i as usize).map(Node::Value),
            _ => None,
        }
    }

    fn descend(self, path: &[u32]) -> Option<Node<'a>> {
        path.iter().try_fold(self, |n, &i| n.child(i))
    }

    fn arity(self) -> u32 {
        match self.as_value() {
            Some(Value::Lambda { .. } | Value::Inl(_) | Value::Inr(_)) => 1,
            Some(Value::Pair(..)) => 2,
            Some(Value::Tuple(vs)) => vs.len() as u32,
            Some(_) => 0,
            None => match self {
                Node::Expr(Expr::App(..)) => 2,
                Node::Expr(Expr::Case { .. }) => 3,
                _ => 0,
            },
        }
    }
}

fn collect_paths(node: Node<'_>, path: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    out.push(path.clone());
    for i in 0..node.arity() {
        if let Some(child) = node.child(i) {
            path.push(i);
            collect_paths(child, path, out);
            path.pop();
        }
    }
}

fn free_vars_expr(e: &Expr, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
    match e {
        Expr::Val(v) => free_vars_value(v, bound, out),
        Expr::App(f, a) => {
            free_vars_expr(f, bound, out);
            free_vars_expr(a, bound, out);
        }
        Expr::Case {
            scrutinee,
            left_var,
            left,
            right_var,
            right,
            ..
        } => {
            free_vars_expr(scrutinee, bound, out);
            bound.push(left_var.clone());
            free_vars_expr(left, bound, out);
            bound.pop();
            bound.push(right_var.clone());
            free_vars_expr(right, bound, out);
            bound.pop();
        }
    }
}

fn free_vars_value(v: &Value, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
    match v {
        Value::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Value::Lambda { param, body, .. } => {
            bound.push(param.clone());
            free_vars_expr(body, bound, out);
            bound.pop();
        }
        Value::Inl(v) | Value::Inr(v) => free_vars_value(v, bound, out),
        Value::Pair(a, b) => {
            free_vars_value(a, bound, out);
            free_vars_value(b, bound, out);
        }
        Value::Tuple(vs) => vs.iter().for_each(|v| free_vars_value(v, bound, out)),
        Value::Unit(_) | Value::Fst(_) | Value::Snd(_) | Value::Lookup(..) | Value::Com(..) => {}
    }
}

/// Local process expressions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Behavior {
    Val(LocalValue),
    App(Box<Behavior>, Box<Behavior>),
    Case {
        scrutinee: Box<Behavior>,
        left_var: Var,
        left: Box<Behavior>,
        right_var: Var,
        right: Box<Behavior>,
    },
}

/// Local process values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LocalValue {
    Var(Var),
    Unit,
    Lambda {
        param: Var,
        body: Box<Behavior>,
    },
    Inl(Box<LocalValue>),
    Inr(Box<LocalValue>),
    Pair(Box<LocalValue>, Box<LocalValue>),
    Tuple(Vec<LocalValue>),
    Fst,
    Snd,
    Lookup(usize),
    Recv(Party),
    /// Recipients never include the sending party; the set may be empty.
    Send(BTreeSet<Party>),
    /// Like `Send`, but the sender keeps the value.
    SendSelf(BTreeSet<Party>),
    Bottom,
}

impl From<LocalValue> for Behavior {
    fn from(l: LocalValue) -> Self {
        Behavior::Val(l)
    }
}

impl Behavior {
    pub const BOTTOM: Behavior = Behavior::Val(LocalValue::Bottom);

    pub fn app(f: impl Into<Behavior>, a: impl Into<Behavior>) -> Self {
        Behavior::App(Box::new(f.into()), Box::new(a.into()))
    }

    pub fn is_value(&self) -> bool {
        matches!(self, Behavior::Val(_))
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Behavior::Val(LocalValue::Bottom))
    }

    pub fn as_value(&self) -> Option<&LocalValue> {
        match self {
            Behavior::Val(l) => Some(l),
            _ => None,
        }
    }
}

impl LocalValue {
    pub fn inl(l: LocalValue) -> Self {
        LocalValue::Inl(Box::new(l))
    }

    pub fn inr(l: LocalValue) -> Self {
        LocalValue::Inr(Box::new(l))
    }

    pub fn pair(a: LocalValue, b: LocalValue) -> Self {
        LocalValue::Pair(Box::new(a), Box::new(b))
    }

    /// True for the sendable fragment: unit, injections and pairs.
    pub fn is_data(&self) -> bool {
        match self {
            LocalValue::Unit => true,
            LocalValue::Inl(l) | LocalValue::Inr(l) => l.is_data(),
            LocalValue::Pair(a, b) => a.is_data() && b.is_data(),
            _ => false,
        }
    }
}

/// Send (`⊕`) and receive (`⊖`) annotations on a local step.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct StepLabel {
    pub sends: BTreeSet<(Party, LocalValue)>,
    pub receives: BTreeSet<(Party, LocalValue)>,
}

impl StepLabel {
    pub fn silent() -> Self {
        StepLabel::default()
    }

    pub fn is_silent(&self) -> bool {
        self.sends.is_empty() && self.receives.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(names: &[&str]) -> Value {
        Value::Unit(PartySet::of(names))
    }

    #[test]
    fn party_set_sorts_and_dedups() {
        let ps = PartySet::new(["q", "p", "q"].map(|n| Party::new(n).unwrap())).unwrap();
        let names: Vec<_> = ps.iter().map(Party::as_str).collect();
        assert_eq!(names, ["p", "q"]);
        assert_eq!(PartySet::new(Vec::new()), Err(AstError::EmptyPartySet));
    }

    #[test]
    fn party_names_are_identifiers() {
        assert!(Party::new("r_1").is_ok());
        assert!(Party::new("1r").is_err());
        assert!(Party::new("").is_err());
        assert!(Party::new("a$1").is_err());
    }

    #[test]
    fn free_vars_respect_binders() {
        let p = PartySet::of(&["p"]);
        let unit_p = Type::data(DataType::Unit, p.clone());
        assert_eq!(
            Expr::Val(Value::var("x")).free_vars(),
            BTreeSet::from([Var::from("x")])
        );
        let closed = Value::lambda("x", unit_p.clone(), Value::var("x").into(), p.clone());
        assert!(Expr::Val(closed).free_vars().is_empty());
        let open = Value::lambda("x", unit_p, Value::var("y").into(), p);
        assert_eq!(
            Expr::Val(open).free_vars(),
            BTreeSet::from([Var::from("y")])
        );
    }

    #[test]
    fn case_branches_bind_their_variables() {
        let e = Expr::case(
            PartySet::of(&["p"]),
            Value::var("s"),
            "a",
            Value::var("a"),
            "b",
            Value::var("a"),
        );
        assert_eq!(
            e.free_vars(),
            BTreeSet::from([Var::from("a"), Var::from("s")])
        );
    }

    #[test]
    fn paths_address_subterms() {
        let e = Expr::app(
            Value::Com(Party::new("s").unwrap(), PartySet::of(&["r"])),
            Value::pair(unit(&["s"]), Value::inl(unit(&["s"]))),
        );
        assert_eq!(e.paths().len(), 6);
        let inner = e.at(&[1, 1, 0]).and_then(Node::as_value).unwrap();
        assert_eq!(inner, &unit(&["s"]));
        let replaced = e.replace_at(&[1, 1], &unit(&["s"])).unwrap();
        assert_eq!(
            replaced,
            Expr::app(
                Value::Com(Party::new("s").unwrap(), PartySet::of(&["r"])),
                Value::pair(unit(&["s"]), unit(&["s"])),
            )
        );
        assert!(e.replace_at(&[2], &unit(&["s"])).is_none());
    }

    #[test]
    fn data_detection() {
        let l = LocalValue::pair(LocalValue::Unit, LocalValue::inl(LocalValue::Unit));
        assert!(l.is_data());
        assert!(!LocalValue::pair(LocalValue::Unit, LocalValue::Bottom).is_data());
        assert!(!LocalValue::Fst.is_data());
    }
}
