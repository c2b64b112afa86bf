//! Type-directed generation of well-typed closed choreographies.
//!
//! Each production inverts one typing rule: to build a term of type `T`
//! the generator picks a rule whose conclusion can be `T` and generates the
//! premises. Terms are meant to be checked against their target with
//! [`check_against`](crate::typecheck::check_against); in positions the
//! checker types without an expected type, keywords whose type depends on
//! context (`com`, `lookup`) are not emitted as bare values.

use std::collections::BTreeSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{DataType, Expr, Party, PartySet, Type, Value, Var};
use crate::mask::mask_type;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("no term of the target type fits in the depth bound")]
    Exhausted,
    #[error("invalid generator configuration: {0}")]
    Config(String),
}

/// Relative weights of the productions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Weights {
    pub value: u32,
    pub var: u32,
    pub app: u32,
    pub com: u32,
    pub proj: u32,
    pub lookup: u32,
    pub case: u32,
    pub keyword_value: u32,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            value: 3,
            var: 4,
            app: 3,
            com: 4,
            proj: 2,
            lookup: 2,
            case: 3,
            keyword_value: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    /// At least 2 and at most 4.
    pub max_parties: usize,
    pub max_depth: usize,
    /// At least 1 and at most 3.
    pub max_tuple_len: usize,
    pub seed: u64,
    pub weights: Weights,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_parties: 4,
            max_depth: 6,
            max_tuple_len: 3,
            seed: 0,
            weights: Weights::default(),
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        if !(2..=4).contains(&self.max_parties) {
            return Err(GenError::Config(format!(
                "max_parties must be between 2 and 4, got {}",
                self.max_parties
            )));
        }
        if self.max_depth == 0 {
            return Err(GenError::Config("max_depth must be positive".into()));
        }
        if !(1..=3).contains(&self.max_tuple_len) {
            return Err(GenError::Config(format!(
                "max_tuple_len must be between 1 and 3, got {}",
                self.max_tuple_len
            )));
        }
        let w = self.weights;
        if w.value + w.var + w.app + w.com + w.proj + w.lookup + w.case + w.keyword_value == 0 {
            return Err(GenError::Config("all weights are zero".into()));
        }
        Ok(())
    }
}

const PARTY_NAMES: [&str; 4] = ["p", "q", "r", "s"];

/// The first `n` of `p, q, r, s`.
pub fn parties(n: usize) -> PartySet {
    PartySet::of(&PARTY_NAMES[..n.clamp(1, PARTY_NAMES.len())])
}

/// A generated closed term together with what it was generated against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub seed: u64,
    pub theta: PartySet,
    pub target: Type,
    pub expr: Expr,
}

/// Generates the instance for `seed`. The same configuration and seed
/// always give the same instance.
pub fn gen_instance(cfg: &GenConfig, seed: u64) -> Result<Instance, GenError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..64 {
        let n = rng.gen_range(2..=cfg.max_parties);
        let theta = parties(n);
        let target = {
            let mut g = Gen::new(cfg, &mut rng);
            g.ty(&theta, 2, 3)
        };
        if let Ok(expr) = gen_well_typed(cfg, &mut rng, &theta, &target) {
            return Ok(Instance {
                seed,
                theta,
                target,
                expr,
            });
        }
    }
    Err(GenError::Exhausted)
}

/// A closed expression with type `target` under `theta`.
pub fn gen_well_typed(
    cfg: &GenConfig,
    rng: &mut ChaCha8Rng,
    theta: &PartySet,
    target: &Type,
) -> Result<Expr, GenError> {
    let mut g = Gen::new(cfg, rng);
    g.expr(theta, &mut Vec::new(), target, cfg.max_depth, true)
        .ok_or(GenError::Exhausted)
}

/// An expression of type `target` under `theta` with the variables of
/// `gamma` in scope.
pub fn gen_open(
    cfg: &GenConfig,
    rng: &mut ChaCha8Rng,
    theta: &PartySet,
    gamma: &[(Var, Type)],
    target: &Type,
) -> Result<Expr, GenError> {
    let mut g = Gen::new(cfg, rng);
    g.next_var = 1000;
    let mut gamma = gamma.to_vec();
    g.expr(theta, &mut gamma, target, cfg.max_depth, true)
        .ok_or(GenError::Exhausted)
}

/// A closed value of type `target` under `theta`.
pub fn gen_value(
    cfg: &GenConfig,
    rng: &mut ChaCha8Rng,
    theta: &PartySet,
    target: &Type,
) -> Result<Value, GenError> {
    let mut g = Gen::new(cfg, rng);
    g.value(theta, &mut Vec::new(), target, cfg.max_depth, true)
        .ok_or(GenError::Exhausted)
}

/// A type over `theta` with nesting at most `depth` and data depth at most
/// `data_depth`.
pub fn gen_type(
    cfg: &GenConfig,
    rng: &mut ChaCha8Rng,
    theta: &PartySet,
    depth: usize,
    data_depth: usize,
) -> Type {
    Gen::new(cfg, rng).ty(theta, depth, data_depth)
}

/// A random nonempty subset of `of`.
pub fn gen_subset(rng: &mut ChaCha8Rng, of: &PartySet) -> PartySet {
    loop {
        let picked: Vec<Party> = of.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        if let Ok(s) = PartySet::new(picked) {
            return s;
        }
    }
}

/// The least value depth of any value of type `t`.
fn min_value_depth(t: &Type) -> usize {
    match t {
        Type::Data(d, _) => d.depth(),
        Type::Fun(_, r, _) => 1 + min_value_depth(r),
        Type::Tuple(ts) => 1 + ts.iter().map(min_value_depth).max().unwrap_or(0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Production {
    Value,
    App,
    Com,
    Proj,
    Lookup,
    Case,
}

struct Gen<'a> {
    cfg: &'a GenConfig,
    rng: &'a mut ChaCha8Rng,
    next_var: usize,
}

impl<'a> Gen<'a> {
    fn new(cfg: &'a GenConfig, rng: &'a mut ChaCha8Rng) -> Self {
        Gen {
            cfg,
            rng,
            next_var: 0,
        }
    }

    fn fresh(&mut self) -> Var {
        self.next_var += 1;
        Var::new(format!("x{}", self.next_var))
    }

    fn subset(&mut self, of: &PartySet) -> PartySet {
        gen_subset(self.rng, of)
    }

    /// `base` plus a random part of `theta`.
    fn widen(&mut self, base: &PartySet, theta: &PartySet) -> PartySet {
        let extra: Vec<Party> = theta
            .iter()
            .filter(|p| !base.contains(p))
            .filter(|_| self.rng.gen_bool(0.3))
            .cloned()
            .collect();
        base.union(&PartySet::new(base.iter().cloned().chain(extra)).expect("nonempty"))
    }

    fn data(&mut self, depth: usize) -> DataType {
        if depth == 0 || self.rng.gen_bool(0.35) {
            return DataType::Unit;
        }
        let l = self.data(depth - 1);
        let r = self.data(depth - 1);
        if self.rng.gen_bool(0.6) {
            DataType::sum(l, r)
        } else {
            DataType::prod(l, r)
        }
    }

    fn ty(&mut self, theta: &PartySet, depth: usize, data_depth: usize) -> Type {
        let roll = self.rng.gen_range(0..10);
        if depth == 0 || roll < 7 {
            let d = self.data(data_depth);
            return Type::Data(d, self.subset(theta));
        }
        if roll < 9 {
            let o = self.subset(theta);
            let a = self.ty(&o, depth - 1, data_depth.min(2));
            let r = self.ty(&o, depth - 1, data_depth.min(2));
            return Type::fun(a, r, o);
        }
        let n = self.rng.gen_range(1..=self.cfg.max_tuple_len);
        Type::Tuple(
            (0..n)
                .map(|_| self.ty(theta, depth - 1, data_depth.min(2)))
                .collect(),
        )
    }

    /// Widens the owners of a data type with parties of `theta` outside
    /// `keep`, so that masking back to `keep` recovers `t`.
    fn widen_outside(&mut self, t: &Type, keep: &PartySet, theta: &PartySet) -> Type {
        match t {
            Type::Data(d, o) => {
                let extra: Vec<Party> = theta
                    .iter()
                    .filter(|p| !keep.contains(p) && self.rng.gen_bool(0.4))
                    .cloned()
                    .collect();
                Type::Data(
                    d.clone(),
                    o.union(&PartySet::new(o.iter().cloned().chain(extra)).expect("nonempty")),
                )
            }
            Type::Tuple(ts) => Type::Tuple(
                ts.iter()
                    .map(|t| self.widen_outside(t, keep, theta))
                    .collect(),
            ),
            Type::Fun(..) => t.clone(),
        }
    }

    fn weight(&self, p: Production) -> u32 {
        let w = self.cfg.weights;
        match p {
            Production::Value => w.value + w.var,
            Production::App => w.app,
            Production::Com => w.com,
            Production::Proj => w.proj,
            Production::Lookup => w.lookup,
            Production::Case => w.case,
        }
    }

    fn expr(
        &mut self,
        theta: &PartySet,
        gamma: &mut Vec<(Var, Type)>,
        target: &Type,
        budget: usize,
        checked: bool,
    ) -> Option<Expr> {
        let need = min_value_depth(target);
        let mut options: Vec<Production> = Vec::new();
        if budget >= need || self.var_candidates(theta, gamma, target).next().is_some() {
            options.push(Production::Value);
        }
        if budget >= need + 2 {
            options.push(Production::App);
            options.push(Production::Lookup);
        }
        if budget > need {
            options.push(Production::Case);
            if matches!(target, Type::Data(..)) {
                options.push(Production::Com);
                options.push(Production::Proj);
            }
        }
        while !options.is_empty() {
            let weights: Vec<u32> = options.iter().map(|p| self.weight(*p).max(1)).collect();
            let i = WeightedIndex::new(&weights).ok()?.sample(self.rng);
            let pick = options[i];
            options.retain(|p| *p != pick);
            let e = match pick {
                Production::Value => self
                    .value(theta, gamma, target, budget, checked)
                    .map(Expr::Val),
                Production::App => self.app(theta, gamma, target, budget),
                Production::Com => self.com(theta, gamma, target, budget),
                Production::Proj => self.proj(theta, gamma, target, budget),
                Production::Lookup => self.lookup(theta, gamma, target, budget),
                Production::Case => self.case(theta, gamma, target, budget, checked),
            };
            if e.is_some() {
                return e;
            }
        }
        None
    }

    fn var_candidates<'g>(
        &self,
        theta: &'g PartySet,
        gamma: &'g [(Var, Type)],
        target: &'g Type,
    ) -> impl Iterator<Item = &'g Var> + 'g {
        // Later bindings shadow earlier ones.
        let mut seen = BTreeSet::new();
        gamma
            .iter()
            .rev()
            .filter(move |(x, _)| seen.insert(x.clone()))
            .filter(move |(_, t)| mask_type(t, theta).as_ref() == Some(target))
            .map(|(x, _)| x)
    }

    /// `(fn x: A. M)@o N`
    fn app(
        &mut self,
        theta: &PartySet,
        gamma: &mut Vec<(Var, Type)>,
        target: &Type,
        budget: usize,
    ) -> Option<Expr> {
        let o = self.widen(&PartySet::new(target.parties()).ok()?, theta);
        let a = self.ty(&o, 1, 2);
        if min_value_depth(&a) + 1 > budget {
            return None;
        }
        let x = self.fresh();
        gamma.push((x.clone(), a.clone()));
        let body = self.expr(&o, gamma, target, budget - 2, false);
        gamma.pop();
        let body = body?;
        let arg_ty = self.widen_outside(&a, &o, theta);
        let arg = self.expr(theta, gamma, &arg_ty, budget - 1, true)?;
        let lam = Value::Lambda {
            param: x,
            param_type: a,
            body: Box::new(body),
            owners: o,
        };
        Some(Expr::app(lam, arg))
    }

    /// `com[s][r] N`
    fn com(
        &mut self,
        theta: &PartySet,
        gamma: &mut Vec<(Var, Type)>,
        target: &Type,
        budget: usize,
    ) -> Option<Expr> {
        let Type::Data(d, r) = target else {
            return None;
        };
        let all: Vec<Party> = theta.iter().cloned().collect();
        let s = all.choose(self.rng)?.clone();
        let senders = self.widen(&PartySet::singleton(s.clone()), theta);
        let arg = self.expr(
            theta,
            gamma,
            &Type::Data(d.clone(), senders),
            budget - 1,
            false,
        )?;
        Some(Expr::app(Value::Com(s, r.clone()), arg))
    }

    /// `fst[o] N` or `snd[o] N`
    fn proj(
        &mut self,
        theta: &PartySet,
        gamma: &mut Vec<(Var, Type)>,
        target: &Type,
        budget: usize,
    ) -> Option<Expr> {
        let Type::Data(d, o) = target else {
            return None;
        };
        let other = self.data(2.min(budget - 1));
        let first = self.rng.gen_bool(0.5);
        let pair = if first {
            DataType::prod(d.clone(), other)
        } else {
            DataType::prod(other, d.clone())
        };
        if pair.depth() > budget - 1 {
            return None;
        }
        let owners = self.widen(o, theta);
        let arg = self.expr(theta, gamma, &Type::Data(pair, owners), budget - 1, false)?;
        let kw = if first {
            Value::Fst(o.clone())
        } else {
            Value::Snd(o.clone())
        };
        Some(Expr::app(kw, arg))
    }

    /// `lookup[i][o] N`
    fn lookup(
        &mut self,
        theta: &PartySet,
        gamma: &mut Vec<(Var, Type)>,
        target: &Type,
        budget: usize,
    ) -> Option<Expr> {
        let o = self.widen(&PartySet::new(target.parties()).ok()?, theta);
        let n = self.rng.gen_range(1..=self.cfg.max_tuple_len);
        let i = self.rng.gen_range(0..n);
        let ts: Vec<Type> = (0..n)
            .map(|k| {
                if k == i {
                    target.clone()
                } else {
                    self.ty(&o, 1, 1)
                }
            })
            .collect();
        let tuple = Type::Tuple(ts);
        if min_value_depth(&tuple) > budget - 1 {
            return None;
        }
        let arg = self.expr(theta, gamma, &tuple, budget - 1, false)?;
        Some(Expr::app(Value::Lookup(i + 1, o), arg))
    }

    /// `case[g] N of Inl x => M1; Inr y => M2`
    fn case(
        &mut self,
        theta: &PartySet,
        gamma: &mut Vec<(Var, Type)>,
        target: &Type,
        budget: usize,
        checked: bool,
    ) -> Option<Expr> {
        let g = self.widen(&PartySet::new(target.parties()).ok()?, theta);
        let dl = self.data(2.min(budget - 1));
        let dr = self.data(2.min(budget - 1));
        let sum = DataType::sum(dl.clone(), dr.clone());
        if sum.depth() > budget - 1 {
            return None;
        }
        let owners = self.widen(&g, theta);
        let scrutinee = self.expr(theta, gamma, &Type::Data(sum, owners), budget - 1, false)?;
        let (x, y) = (self.fresh(), self.fresh());
        gamma.push((x.clone(), Type::Data(dl, g.clone())));
        let left = self.expr(&g, gamma, target, budget - 1, checked);
        gamma.pop();
        let left = left?;
        gamma.push((y.clone(), Type::Data(dr, g.clone())));
        let right = self.expr(&g, gamma, target, budget - 1, true);
        gamma.pop();
        let right = right?;
        Some(Expr::Case {
            guards: g,
            scrutinee: Box::new(scrutinee),
            left_var: x,
            left: Box::new(left),
            right_var: y,
            right: Box::new(right),
        })
    }

    fn value(
        &mut self,
        theta: &PartySet,
        gamma: &mut Vec<(Var, Type)>,
        target: &Type,
        budget: usize,
        checked: bool,
    ) -> Option<Value> {
        let vars: Vec<Var> = self.var_candidates(theta, gamma, target).cloned().collect();
        let w = self.cfg.weights;
        let fits = budget >= min_value_depth(target);
        if !vars.is_empty() && (!fits || self.rng.gen_ratio(w.var, (w.var + w.value).max(1))) {
            return vars.choose(self.rng).cloned().map(Value::Var);
        }
        if !fits {
            return None;
        }
        match target {
            Type::Data(d, o) => Some(self.data_value(theta, d, o)),
            Type::Fun(a, r, o) => {
                if self
                    .rng
                    .gen_ratio(w.keyword_value, (w.keyword_value + w.value).max(1))
                {
                    if let Some(kw) = self.keyword_value(theta, a, r, o, checked) {
                        return Some(kw);
                    }
                }
                let x = self.fresh();
                gamma.push((x.clone(), (**a).clone()));
                let body = self.expr(o, gamma, r, budget - 1, checked);
                gamma.pop();
                Some(Value::Lambda {
                    param: x,
                    param_type: (**a).clone(),
                    body: Box::new(body?),
                    owners: o.clone(),
                })
            }
            Type::Tuple(ts) => ts
                .iter()
                .map(|t| self.value(theta, gamma, t, budget - 1, checked))
                .collect::<Option<Vec<_>>>()
                .map(Value::Tuple),
        }
    }

    fn data_value(&mut self, theta: &PartySet, d: &DataType, o: &PartySet) -> Value {
        match d {
            DataType::Unit => Value::Unit(o.clone()),
            DataType::Sum(l, r) => {
                if self.rng.gen_bool(0.5) {
                    Value::inl(self.data_value(theta, l, o))
                } else {
                    Value::inr(self.data_value(theta, r, o))
                }
            }
            DataType::Prod(l, r) => {
                // Owners whose intersection is exactly `o`.
                let mut left = o.clone();
                let mut right = o.clone();
                for p in theta.iter().filter(|p| !o.contains(p)) {
                    match self.rng.gen_range(0..4) {
                        0 => left = left.with(p.clone()),
                        1 => right = right.with(p.clone()),
                        _ => {}
                    }
                }
                Value::pair(
                    self.data_value(theta, l, &left),
                    self.data_value(theta, r, &right),
                )
            }
        }
    }

    /// A keyword whose type is exactly `(a -> r)@o`, if one exists.
    fn keyword_value(
        &mut self,
        theta: &PartySet,
        a: &Type,
        r: &Type,
        o: &PartySet,
        checked: bool,
    ) -> Option<Value> {
        let mut options = Vec::new();
        if let (Type::Data(DataType::Prod(d1, d2), ao), Type::Data(dr, ro)) = (a, r) {
            if ao == o && ro == o {
                if **d1 == *dr {
                    options.push(Value::Fst(o.clone()));
                }
                if **d2 == *dr {
                    options.push(Value::Snd(o.clone()));
                }
            }
        }
        if checked {
            if let (Type::Data(da, senders), Type::Data(dr, recipients)) = (a, r) {
                if da == dr && senders.is_subset(theta) {
                    for s in senders.iter() {
                        if recipients.with(s.clone()) == *o {
                            options.push(Value::Com(s.clone(), recipients.clone()));
                        }
                    }
                }
            }
            if let Type::Tuple(ts) = a {
                if mask_type(a, o).as_ref() == Some(a) {
                    for (i, t) in ts.iter().enumerate() {
                        if t == r {
                            options.push(Value::Lookup(i + 1, o.clone()));
                        }
                    }
                }
            }
        }
        options.choose(self.rng).cloned()
    }
}

/// The leftmost-`Inl` inhabitant of `t`.
pub fn canonical_value(t: &Type) -> Value {
    match t {
        Type::Data(d, o) => canonical_data(d, o),
        Type::Fun(a, r, o) => Value::Lambda {
            param: Var::from("c"),
            param_type: (**a).clone(),
            body: Box::new(Expr::Val(canonical_value(r))),
            owners: o.clone(),
        },
        Type::Tuple(ts) => Value::Tuple(ts.iter().map(canonical_value).collect()),
    }
}

fn canonical_data(d: &DataType, o: &PartySet) -> Value {
    match d {
        DataType::Unit => Value::Unit(o.clone()),
        DataType::Sum(l, _) => Value::inl(canonical_data(l, o)),
        DataType::Prod(l, r) => Value::pair(canonical_data(l, o), canonical_data(r, o)),
    }
}
