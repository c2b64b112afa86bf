//! Property checks on one generated instance or one network.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ast::{Behavior, Expr, LocalValue, Party, PartySet, Type, Value, Var};
use crate::central::{default_fuel, run, subst};
use crate::harness::gen::{
    gen_open, gen_subset, gen_type, gen_value, parties, GenConfig, Instance,
};
use crate::mask::mask_value;
use crate::project::{floor, local_subst, project, project_value, roles};
use crate::runtime::{enumerate_net_steps, explore, simulate_seeded, NetStep, Network, SimOutcome};
use crate::typecheck::{check_against, typecheck_detailed, RuleCoverage, TypeEnv};

/// The verdict of one property on one input. `None` means the property did
/// not apply.
pub type Outcome = (&'static str, Option<Result<(), String>>);

/// Bounds on the network checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetLimits {
    pub seeds: usize,
    /// Instances whose sampled runs take at most this many network steps
    /// are also explored exhaustively.
    pub exhaustive_step_limit: usize,
    pub state_budget: usize,
    /// States visited when searching for the projection of the next
    /// central term.
    pub completeness_budget: usize,
    pub fuel: usize,
}

impl Default for NetLimits {
    fn default() -> Self {
        NetLimits {
            seeds: 100,
            exhaustive_step_limit: 12,
            state_budget: 20_000,
            completeness_budget: 5_000,
            fuel: 10_000,
        }
    }
}

/// A party that no generated program names.
pub fn outsider() -> Party {
    Party::new("z").expect("valid name")
}

fn ok(name: &'static str) -> Outcome {
    (name, Some(Ok(())))
}

fn fail(name: &'static str, why: impl Into<String>) -> Outcome {
    (name, Some(Err(why.into())))
}

fn verdict(name: &'static str, r: Result<(), String>) -> Outcome {
    (name, Some(r))
}

/// The projection of `e` to each of `parties`.
pub fn network_of(e: &Expr, parties: &PartySet) -> Network {
    Network::new(parties.iter().map(|p| (p.clone(), project(e, p))))
}

/// Every property that takes a closed instance as input.
pub fn check_instance(
    inst: &Instance,
    lim: &NetLimits,
    coverage: &mut RuleCoverage,
) -> Vec<Outcome> {
    let mut out = Vec::new();
    let env = TypeEnv::new(inst.theta.clone());
    match typecheck_detailed(&env, &inst.expr, Some(&inst.target)) {
        Ok(c) => {
            coverage.merge(&c.coverage);
            out.push(ok("generator-soundness"));
        }
        Err(e) => {
            out.push(fail("generator-soundness", e.to_string()));
            return out;
        }
    }

    let wide = inst.theta.union(&parties(4)).with(outsider());
    out.push(verdict(
        "exclave",
        check_against(&TypeEnv::new(wide), &inst.expr, &inst.target).map_err(|e| e.to_string()),
    ));

    let r = match run(&inst.expr, default_fuel(&inst.expr)) {
        Ok(r) => {
            out.push(ok("progress"));
            r
        }
        Err(e) => {
            out.push(fail("progress", e.to_string()));
            return out;
        }
    };
    out.push(verdict(
        "preservation",
        preservation(&env, &inst.target, &r.terms, &r.steps),
    ));

    let Some(roles) = roles(&inst.expr) else {
        out.push(fail("cruft", "closed program names no parties"));
        return out;
    };
    out.push(verdict("cruft", cruft(&r.terms)));
    out.push(verdict("floor-fixpoint", floor_fixpoint(&r.terms, &roles)));
    out.push(verdict(
        "bottom-preservation",
        bottom_preservation(&r.terms, &roles),
    ));
    out.push(("existence", existence(&r.value, &inst.target)));
    out.push(verdict(
        "masked-projection",
        masked_projection(&r.value, &inst.theta),
    ));
    out.push(verdict(
        "epp-completeness",
        completeness(&r.terms, &roles, lim.completeness_budget),
    ));

    let start = network_of(&inst.expr, &roles);
    let expected = network_of(&Expr::Val(r.value.clone()), &roles);
    out.extend(check_network(&start, &expected, lim));
    out
}

fn preservation(
    env: &TypeEnv,
    target: &Type,
    terms: &[Expr],
    steps: &[crate::central::CentralStep],
) -> Result<(), String> {
    for (i, t) in terms.iter().enumerate().skip(1) {
        check_against(env, t, target)
            .map_err(|e| format!("after step {i} ({}): {t}: {e}", steps[i - 1].rule))?;
    }
    Ok(())
}

fn cruft(terms: &[Expr]) -> Result<(), String> {
    let z = outsider();
    for t in terms {
        let b = project(t, &z);
        if !b.is_bottom() {
            return Err(format!("{t} projects to {b} at {z}"));
        }
    }
    Ok(())
}

fn floor_fixpoint(terms: &[Expr], roles: &PartySet) -> Result<(), String> {
    for t in terms {
        for p in roles {
            let b = project(t, p);
            if floor(&b) != b {
                return Err(format!("projection of {t} to {p} is not floor-normal: {b}"));
            }
        }
    }
    Ok(())
}

fn bottom_preservation(terms: &[Expr], roles: &PartySet) -> Result<(), String> {
    for w in terms.windows(2) {
        for p in roles {
            if project(&w[0], p).is_bottom() {
                let b = project(&w[1], p);
                if !b.is_bottom() {
                    return Err(format!(
                        "{} projects to ⊥ at {p} but {} projects to {b}",
                        w[0], w[1]
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Data values project identically and non-trivially at every owner.
fn existence(v: &Value, t: &Type) -> Option<Result<(), String>> {
    let Type::Data(_, owners) = t else {
        return None;
    };
    let mut views = owners.iter().map(|p| (p, project_value(v, p)));
    let (p0, l0) = views.next()?;
    if l0 == LocalValue::Bottom {
        return Some(Err(format!("{v} projects to ⊥ at owner {p0}")));
    }
    for (p, l) in views {
        if l != l0 {
            return Some(Err(format!("{v} projects to {l0} at {p0} but {l} at {p}")));
        }
    }
    Some(Ok(()))
}

fn subsets(theta: &PartySet) -> Vec<PartySet> {
    let all: Vec<&Party> = theta.iter().collect();
    (1u32..(1 << all.len()))
        .map(|bits| {
            PartySet::new(
                (0..all.len())
                    .filter(|i| bits & (1 << i) != 0)
                    .map(|i| all[i].clone()),
            )
            .expect("nonempty")
        })
        .collect()
}

fn masked_projection(v: &Value, theta: &PartySet) -> Result<(), String> {
    for s in subsets(theta) {
        let Some(m) = mask_value(v, &s) else { continue };
        for p in &s {
            let (a, b) = (project_value(v, p), project_value(&m, p));
            if a != b {
                return Err(format!(
                    "{v} masked to {s} is {m}; at {p} they project to {a} and {b}"
                ));
            }
        }
    }
    Ok(())
}

/// Whether `goal` is reachable from `from`, visiting at most `budget`
/// states.
pub fn reaches(from: &Network, goal: &Network, budget: usize) -> bool {
    let mut seen = HashSet::from([from.clone()]);
    let mut queue = VecDeque::from([from.clone()]);
    while let Some(n) = queue.pop_front() {
        if n == *goal {
            return true;
        }
        for (next, _) in enumerate_net_steps(&n) {
            if seen.len() >= budget {
                return false;
            }
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    false
}

fn completeness(terms: &[Expr], roles: &PartySet, budget: usize) -> Result<(), String> {
    for w in terms.windows(2) {
        let (a, b) = (network_of(&w[0], roles), network_of(&w[1], roles));
        if !reaches(&a, &b, budget) {
            return Err(format!(
                "central step {} -> {}\nnetwork\n{a}\ndoes not reach\n{b}",
                w[0], w[1]
            ));
        }
    }
    Ok(())
}

/// Agreement, deadlock freedom, soundness, determinism and parallelism of
/// `start` against the expected final network.
pub fn check_network(start: &Network, expected: &Network, lim: &NetLimits) -> Vec<Outcome> {
    let mut agreement = Ok(());
    let mut deadlock = Ok(());
    let mut longest = 0;
    for seed in 0..lim.seeds as u64 {
        let sim = simulate_seeded(start, seed, lim.fuel);
        longest = longest.max(sim.trace.0.len());
        match sim.outcome {
            SimOutcome::Finished(n) if n == *expected => {}
            SimOutcome::Finished(n) => {
                agreement = agreement.and(Err(format!(
                    "seed {seed} finished at\n{n}\nexpected\n{expected}"
                )));
            }
            SimOutcome::Deadlock(report) => {
                deadlock = deadlock.and(Err(format!("seed {seed}: {report}")));
                agreement = agreement.and(Err(format!("seed {seed} deadlocked")));
            }
            SimOutcome::FuelExhausted(_) => {
                agreement = agreement.and(Err(format!("seed {seed} ran out of fuel")));
            }
        }
    }
    let mut out = vec![verdict("agreement", agreement)];
    if longest > lim.exhaustive_step_limit {
        out.push(verdict("deadlock-freedom", deadlock));
        out.extend(
            [
                "exhaustive-agreement",
                "epp-soundness",
                "determinism",
                "parallelism",
            ]
            .map(|p| (p, None)),
        );
        return out;
    }
    let ex = explore(start, lim.state_budget);
    if !ex.complete {
        out.push(verdict("deadlock-freedom", deadlock));
        out.push(fail(
            "exhaustive-agreement",
            format!("state budget {} exceeded", lim.state_budget),
        ));
        return out;
    }
    if let Some(report) = ex.deadlocks.first() {
        deadlock = deadlock.and(Err(format!("exhaustive: {report}")));
    }
    out.push(verdict("deadlock-freedom", deadlock));
    let finals: Vec<&Network> = ex.finals.iter().collect();
    out.push(verdict(
        "exhaustive-agreement",
        if finals == [expected] {
            Ok(())
        } else {
            Err(format!(
                "{} final states, expected only\n{expected}",
                finals.len()
            ))
        },
    ));
    let reaching = ex.can_reach(|n| n == expected);
    out.push(verdict(
        "epp-soundness",
        match ex.edges.keys().find(|n| !reaching.contains(n)) {
            None => Ok(()),
            Some(n) => Err(format!("cannot reach the expected network from\n{n}")),
        },
    ));
    out.push(verdict("determinism", determinism(&ex.edges)));
    out.push(verdict("parallelism", parallelism(&ex.edges)));
    out
}

fn participants(s: &NetStep) -> BTreeSet<&Party> {
    s.recipients.iter().chain([&s.origin]).collect()
}

/// For each party, its next behavior depends only on its current behavior
/// and the value it receives.
fn determinism(edges: &HashMap<Network, Vec<(NetStep, Network)>>) -> Result<(), String> {
    let mut seen: HashMap<(&Party, &Behavior, Option<&LocalValue>), &Behavior> = HashMap::new();
    for (n, succs) in edges {
        for (s, m) in succs {
            for p in participants(s) {
                let received = (p != &s.origin).then_some(s.payload.as_ref()).flatten();
                let key = (p, &n.procs[p], received);
                let after = &m.procs[p];
                if let Some(prev) = seen.insert(key, after) {
                    if prev != after {
                        return Err(format!(
                            "{p} at {} steps to both {prev} and {after}",
                            n.procs[p]
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Steps of disjoint parties commute.
fn parallelism(edges: &HashMap<Network, Vec<(NetStep, Network)>>) -> Result<(), String> {
    let then = |n: &Network, s: &NetStep| -> Option<Network> {
        edges
            .get(n)?
            .iter()
            .find(|(t, _)| t == s)
            .map(|(_, m)| m.clone())
    };
    for (n, succs) in edges {
        for (i, (s1, n1)) in succs.iter().enumerate() {
            for (s2, n2) in &succs[i + 1..] {
                if !participants(s1).is_disjoint(&participants(s2)) {
                    continue;
                }
                let (a, b) = (then(n1, s2), then(n2, s1));
                if a.is_none() || a != b {
                    return Err(format!("steps {s1} and {s2} do not commute from\n{n}"));
                }
            }
        }
    }
    Ok(())
}

/// A generated open term, its variable, and a closed value to substitute.
#[derive(Debug, Clone)]
pub struct SubstTriple {
    pub theta: PartySet,
    pub var: Var,
    pub var_type: Type,
    pub body: Expr,
    pub body_type: Type,
    pub value: Value,
}

pub fn gen_triple(cfg: &GenConfig, seed: u64) -> Option<SubstTriple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..16 {
        let theta = gen_subset(&mut rng, &parties(cfg.max_parties));
        let var = Var::from("v");
        let var_type = gen_type(cfg, &mut rng, &theta, 1, 2);
        let body_type = gen_type(cfg, &mut rng, &theta, 2, 3);
        let gamma = [(var.clone(), var_type.clone())];
        let Ok(body) = gen_open(cfg, &mut rng, &theta, &gamma, &body_type) else {
            continue;
        };
        let Ok(value) = gen_value(cfg, &mut rng, &theta, &var_type) else {
            continue;
        };
        return Some(SubstTriple {
            theta,
            var,
            var_type,
            body,
            body_type,
            value,
        });
    }
    None
}

/// Substitution preserves typing and commutes with projection.
pub fn check_triple(t: &SubstTriple) -> Vec<Outcome> {
    let env = TypeEnv::new(t.theta.clone());
    let open = env.clone().bind(t.var.clone(), t.var_type.clone());
    if let Err(e) = check_against(&open, &t.body, &t.body_type) {
        return vec![fail("generator-soundness", format!("open term: {e}"))];
    }
    if let Err(e) = check_against(&env, &Expr::Val(t.value.clone()), &t.var_type) {
        return vec![fail(
            "generator-soundness",
            format!("substituted value: {e}"),
        )];
    }
    let result = subst(&t.body, &t.var, &t.value);
    let typed = check_against(&env, &result, &t.body_type).map_err(|e| format!("{result}: {e}"));
    let mut distributive = Ok(());
    for p in &t.theta {
        let lhs = project(&result, p);
        let rhs = floor(&local_subst(
            &project(&t.body, p),
            &t.var,
            &project_value(&t.value, p),
        ));
        if lhs != rhs {
            distributive = Err(format!(
                "at {p}: projecting after substitution gives {lhs}, before gives {rhs}"
            ));
            break;
        }
    }
    vec![
        verdict("substitution", typed),
        verdict("distributive-substitution", distributive),
    ]
}

impl std::fmt::Display for SubstTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} ⊢ {} [{} : {} := {}]",
            self.theta, self.body, self.var, self.var_type, self.value
        )
    }
}
