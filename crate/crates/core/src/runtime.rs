//! Local process semantics and the network simulator.
//!
//! Each party runs its behavior with the same leftmost strategy as the
//! central semantics, so a party has at most one pending action at a time.
//! Communication is a rendezvous: a multicast send happens in a single
//! network step together with the receives of all its recipients, and only
//! when every recipient is waiting to receive from the sender.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::{Behavior, LocalValue, Party, StepLabel, Var};
use crate::project::{floor, floor_node, local_subst};

/// One party's next action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalStep {
    /// A step whose outcome is fixed; `label` is empty for silent steps.
    Step {
        next: Behavior,
        label: StepLabel,
        rule: &'static str,
    },
    /// A receive from `from`; its outcome depends on the value delivered,
    /// see [`receive`].
    Receive { from: Party },
}

enum Focus<'a> {
    App(&'a LocalValue, &'a LocalValue),
    Case(&'a LocalValue, &'a Var, &'a Behavior, &'a Var, &'a Behavior),
}

/// The leftmost redex of `b`.
fn focus(b: &Behavior) -> Option<Focus<'_>> {
    match b {
        Behavior::Val(_) => None,
        Behavior::App(f, a) => match (&**f, &**a) {
            (Behavior::Val(fv), Behavior::Val(av)) => Some(Focus::App(fv, av)),
            (Behavior::Val(_), a) => focus(a),
            (f, _) => focus(f),
        },
        Behavior::Case {
            scrutinee,
            left_var,
            left,
            right_var,
            right,
        } => match &**scrutinee {
            Behavior::Val(sv) => Some(Focus::Case(sv, left_var, left, right_var, right)),
            s => focus(s),
        },
    }
}

/// Replaces the leftmost redex of `b` with `with`, flooring every node
/// rebuilt on the way out.
fn plug(b: &Behavior, with: Behavior) -> Behavior {
    match b {
        Behavior::Val(_) => with,
        Behavior::App(f, a) => {
            if !f.is_value() {
                floor_node(Behavior::App(Box::new(plug(f, with)), a.clone()))
            } else if !a.is_value() {
                floor_node(Behavior::App(f.clone(), Box::new(plug(a, with))))
            } else {
                with
            }
        }
        Behavior::Case {
            scrutinee,
            left_var,
            left,
            right_var,
            right,
        } => {
            if scrutinee.is_value() {
                with
            } else {
                floor_node(Behavior::Case {
                    scrutinee: Box::new(plug(scrutinee, with)),
                    left_var: left_var.clone(),
                    left: left.clone(),
                    right_var: right_var.clone(),
                    right: right.clone(),
                })
            }
        }
    }
}

fn sends(to: &BTreeSet<Party>, payload: &LocalValue) -> StepLabel {
    StepLabel {
        sends: to.iter().map(|q| (q.clone(), payload.clone())).collect(),
        receives: BTreeSet::new(),
    }
}

/// The steps `b` can take. Values and stuck behaviors return nothing.
pub fn local_step(b: &Behavior) -> Vec<LocalStep> {
    let Some(f) = focus(b) else {
        return Vec::new();
    };
    let silent = |reduct: Behavior, rule| LocalStep::Step {
        next: plug(b, reduct),
        label: StepLabel::silent(),
        rule,
    };
    let step = match f {
        Focus::App(fv, av) => match (fv, av) {
            (LocalValue::Lambda { param, body }, _) => {
                silent(floor(&local_subst(body, param, av)), "LABSAPP")
            }
            (LocalValue::Fst, LocalValue::Pair(a, _)) => {
                silent(Behavior::Val((**a).clone()), "LPROJ1")
            }
            (LocalValue::Snd, LocalValue::Pair(_, b)) => {
                silent(Behavior::Val((**b).clone()), "LPROJ2")
            }
            (LocalValue::Lookup(i), LocalValue::Tuple(ls)) => {
                match i.checked_sub(1).and_then(|k| ls.get(k)) {
                    Some(l) => silent(Behavior::Val(l.clone()), "LPROJN"),
                    None => return Vec::new(),
                }
            }
            // `⊥` is the floor of a pair or tuple held entirely elsewhere.
            (LocalValue::Fst, LocalValue::Bottom) => silent(Behavior::BOTTOM, "LPROJ1"),
            (LocalValue::Snd, LocalValue::Bottom) => silent(Behavior::BOTTOM, "LPROJ2"),
            (LocalValue::Lookup(_), LocalValue::Bottom) => silent(Behavior::BOTTOM, "LPROJN"),
            (LocalValue::Send(to), l) if l.is_data() => LocalStep::Step {
                next: plug(b, Behavior::BOTTOM),
                label: sends(to, l),
                rule: "LSEND",
            },
            (LocalValue::SendSelf(to), l) if l.is_data() => LocalStep::Step {
                next: plug(b, Behavior::Val(l.clone())),
                label: sends(to, l),
                rule: "LSENDSELF",
            },
            (LocalValue::Recv(from), _) => LocalStep::Receive { from: from.clone() },
            _ => return Vec::new(),
        },
        Focus::Case(sv, lx, lb, rx, rb) => match sv {
            LocalValue::Inl(l) => silent(floor(&local_subst(lb, lx, l)), "LCASEL"),
            LocalValue::Inr(l) => silent(floor(&local_subst(rb, rx, l)), "LCASER"),
            _ => return Vec::new(),
        },
    };
    vec![step]
}

/// Completes a pending receive of `b` with `value`.
pub fn receive(b: &Behavior, value: &LocalValue) -> Behavior {
    plug(b, Behavior::Val(value.clone()))
}

/// Why `b` cannot step, for deadlock reports. `None` for values.
pub fn stuck_reason(b: &Behavior) -> Option<String> {
    let f = focus(b)?;
    Some(match f {
        Focus::App(LocalValue::Recv(s), _) => format!("waiting to receive from {s}"),
        Focus::App(LocalValue::Send(to) | LocalValue::SendSelf(to), l) if l.is_data() => {
            let to: Vec<String> = to.iter().map(|p| p.to_string()).collect();
            format!("waiting to send {l} to [{}]", to.join(", "))
        }
        Focus::App(LocalValue::Send(_) | LocalValue::SendSelf(_), l) => {
            format!("cannot send non-data value {l}")
        }
        Focus::App(f, a) => format!("cannot apply {f} to {a}"),
        Focus::Case(s, ..) => format!("cannot branch on {s}"),
    })
}

/// A party-indexed collection of behaviors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Network {
    pub procs: BTreeMap<Party, Behavior>,
}

impl Network {
    pub fn new(procs: impl IntoIterator<Item = (Party, Behavior)>) -> Self {
        Network {
            procs: procs.into_iter().collect(),
        }
    }

    pub fn get(&self, p: &Party) -> Option<&Behavior> {
        self.procs.get(p)
    }

    /// True when every party holds a value.
    pub fn is_final(&self) -> bool {
        self.procs.values().all(Behavior::is_value)
    }
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (p, b)) in self.procs.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{p}: {b}")?;
        }
        Ok(())
    }
}

/// One `∅`-annotated network step.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NetStep {
    pub origin: Party,
    /// Parties whose receives were matched; empty for silent steps.
    pub recipients: BTreeSet<Party>,
    /// The value sent, if this step communicated.
    pub payload: Option<LocalValue>,
    /// Always empty for steps produced by [`enumerate_net_steps`].
    pub unmatched_sends: BTreeSet<(Party, LocalValue)>,
    /// `NPRO` for a silent local step, `NCOM` for a rendezvous.
    pub rule: &'static str,
    /// The local rule the origin applied.
    pub local_rule: &'static str,
}

impl NetStep {
    pub fn is_rendezvous(&self) -> bool {
        self.rule == "NCOM"
    }

    /// Point-to-point messages delivered by this step.
    pub fn messages(&self) -> usize {
        self.recipients.len()
    }
}

impl fmt::Display for NetStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let to: Vec<String> = self.recipients.iter().map(|p| p.to_string()).collect();
        write!(f, "{} -> [{}] : ", self.origin, to.join(", "))?;
        match &self.payload {
            Some(l) => write!(f, "{l}"),
            None => f.write_str("τ"),
        }
    }
}

/// Every `∅`-annotated step of `n`, in party order.
pub fn enumerate_net_steps(n: &Network) -> Vec<(Network, NetStep)> {
    let mut out = Vec::new();
    for (p, b) in &n.procs {
        for s in local_step(b) {
            let LocalStep::Step { next, label, rule } = s else {
                continue;
            };
            let mut procs = n.procs.clone();
            procs.insert(p.clone(), next);
            let mut step = NetStep {
                origin: p.clone(),
                recipients: BTreeSet::new(),
                payload: None,
                unmatched_sends: BTreeSet::new(),
                rule: "NPRO",
                local_rule: rule,
            };
            if !label.sends.is_empty() {
                let ready = label.sends.iter().all(|(q, _)| {
                    q != p
                        && n.procs.get(q).is_some_and(|qb| {
                            local_step(qb)
                                .iter()
                                .any(|s| matches!(s, LocalStep::Receive { from } if from == p))
                        })
                });
                if !ready {
                    continue;
                }
                for (q, l) in &label.sends {
                    let qb = receive(&n.procs[q], l);
                    procs.insert(q.clone(), qb);
                    step.recipients.insert(q.clone());
                    step.payload = Some(l.clone());
                }
                step.rule = "NCOM";
            }
            out.push((Network { procs }, step));
        }
    }
    out
}

/// Counts over a sequence of network steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TraceStats {
    pub network_steps: usize,
    /// `NCOM` steps; a multicast to several parties counts once.
    pub rendezvous_steps: usize,
    /// Point-to-point messages; a multicast to `k` parties counts `k`.
    pub messages: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace(pub Vec<NetStep>);

impl Trace {
    pub fn stats(&self) -> TraceStats {
        TraceStats {
            network_steps: self.0.len(),
            rendezvous_steps: self.0.iter().filter(|s| s.is_rendezvous()).count(),
            messages: self.0.iter().map(NetStep::messages).sum(),
        }
    }

    /// Only the steps that communicated.
    pub fn rendezvous(&self) -> impl Iterator<Item = &NetStep> {
        self.0.iter().filter(|s| s.is_rendezvous())
    }

    /// The trace with silent steps dropped, one line per step.
    pub fn render_communication(&self) -> String {
        render(self.rendezvous())
    }
}

fn render<'a>(steps: impl Iterator<Item = &'a NetStep>) -> String {
    let mut out = String::new();
    for (i, s) in steps.enumerate() {
        out.push_str(&format!("step {}: {s}\n", i + 1));
    }
    out
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self.0.iter()))
    }
}

/// Parties left holding a non-value when no step is possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeadlockReport {
    pub network: Network,
    pub stuck: Vec<(Party, Behavior, String)>,
}

impl fmt::Display for DeadlockReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "deadlock:")?;
        for (p, b, why) in &self.stuck {
            write!(f, "\n  {p}: {b} ({why})")?;
        }
        Ok(())
    }
}

fn deadlock(n: &Network) -> Option<DeadlockReport> {
    let stuck: Vec<_> = n
        .procs
        .iter()
        .filter_map(|(p, b)| stuck_reason(b).map(|why| (p.clone(), b.clone(), why)))
        .collect();
    (!stuck.is_empty()).then(|| DeadlockReport {
        network: n.clone(),
        stuck,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimOutcome {
    Finished(Network),
    Deadlock(DeadlockReport),
    FuelExhausted(Network),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simulation {
    pub outcome: SimOutcome,
    pub trace: Trace,
}

/// Runs `n` to completion, picking uniformly among enabled steps with a
/// generator seeded by `seed`. `fuel` bounds the number of network steps.
pub fn simulate_seeded(n: &Network, seed: u64, fuel: usize) -> Simulation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = n.clone();
    let mut trace = Vec::new();
    loop {
        let mut steps = enumerate_net_steps(&cur);
        if steps.is_empty() {
            let outcome = match deadlock(&cur) {
                Some(report) => SimOutcome::Deadlock(report),
                None => SimOutcome::Finished(cur),
            };
            return Simulation {
                outcome,
                trace: Trace(trace),
            };
        }
        if trace.len() == fuel {
            return Simulation {
                outcome: SimOutcome::FuelExhausted(cur),
                trace: Trace(trace),
            };
        }
        let pick = rng.gen_range(0..steps.len());
        let (next, step) = steps.swap_remove(pick);
        trace.push(step);
        cur = next;
    }
}

pub const DEFAULT_STATE_BUDGET: usize = 100_000;

/// The reachable state graph of a network.
#[derive(Debug, Clone)]
pub struct Exploration {
    pub start: Network,
    /// Successors of every explored state.
    pub edges: HashMap<Network, Vec<(NetStep, Network)>>,
    /// Terminal states where every party holds a value.
    pub finals: BTreeSet<Network>,
    pub deadlocks: Vec<DeadlockReport>,
    /// False when the state budget ran out before the graph was closed.
    pub complete: bool,
    /// Length of the longest path from the start, when complete.
    pub longest_path: usize,
}

impl Exploration {
    pub fn states(&self) -> usize {
        self.edges.len()
    }

    /// States from which some state satisfying `goal` is reachable.
    pub fn can_reach(&self, goal: impl Fn(&Network) -> bool) -> BTreeSet<&Network> {
        let mut preds: HashMap<&Network, Vec<&Network>> = HashMap::new();
        for (src, succs) in &self.edges {
            for (_, dst) in succs {
                preds.entry(dst).or_default().push(src);
            }
        }
        let mut seen: BTreeSet<&Network> = self.edges.keys().filter(|n| goal(n)).collect();
        let mut queue: VecDeque<&Network> = seen.iter().copied().collect();
        while let Some(n) = queue.pop_front() {
            for &p in preds.get(n).map(Vec::as_slice).unwrap_or(&[]) {
                if seen.insert(p) {
                    queue.push_back(p);
                }
            }
        }
        seen
    }
}

/// Explores every interleaving of `n`, visiting at most `budget` states.
pub fn explore(n: &Network, budget: usize) -> Exploration {
    let mut edges: HashMap<Network, Vec<(NetStep, Network)>> = HashMap::new();
    let mut finals = BTreeSet::new();
    let mut deadlocks = Vec::new();
    let mut queue = VecDeque::from([n.clone()]);
    let mut complete = true;
    while let Some(cur) = queue.pop_front() {
        if edges.contains_key(&cur) {
            continue;
        }
        if edges.len() == budget {
            complete = false;
            break;
        }
        let succs = enumerate_net_steps(&cur);
        if succs.is_empty() {
            match deadlock(&cur) {
                Some(report) => deadlocks.push(report),
                None => {
                    finals.insert(cur.clone());
                }
            }
        }
        for (next, _) in &succs {
            if !edges.contains_key(next) {
                queue.push_back(next.clone());
            }
        }
        edges.insert(cur, succs.into_iter().map(|(n, s)| (s, n)).collect());
    }
    let longest_path = if complete { longest(n, &edges) } else { 0 };
    Exploration {
        start: n.clone(),
        edges,
        finals,
        deadlocks,
        complete,
        longest_path,
    }
}

/// Longest path in the (acyclic) state graph.
fn longest(start: &Network, edges: &HashMap<Network, Vec<(NetStep, Network)>>) -> usize {
    fn go<'a>(
        n: &'a Network,
        edges: &'a HashMap<Network, Vec<(NetStep, Network)>>,
        memo: &mut HashMap<&'a Network, usize>,
    ) -> usize {
        if let Some(&d) = memo.get(n) {
            return d;
        }
        let d = edges
            .get(n)
            .map(|succs| {
                succs
                    .iter()
                    .map(|(_, m)| 1 + go(m, edges, memo))
                    .max()
                    .unwrap_or(0)
            })
            .unwrap_or(0);
        memo.insert(n, d);
        d
    }
    go(start, edges, &mut HashMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::*;
    use crate::project::project_all;

    fn party(n: &str) -> Party {
        Party::new(n).unwrap()
    }

    fn multicast() -> Network {
        let e = Expr::app(
            Value::Com(party("s"), PartySet::of(&["p", "q"])),
            Value::Unit(PartySet::of(&["s"])),
        );
        project_all(&e).unwrap()
    }

    #[test]
    fn send_labels_each_recipient() {
        let b = Behavior::app(
            LocalValue::Send(BTreeSet::from([party("p"), party("q")])),
            LocalValue::Unit,
        );
        let steps = local_step(&b);
        let [LocalStep::Step { next, label, .. }] = steps.as_slice() else {
            panic!("{steps:?}")
        };
        assert_eq!(next, &Behavior::BOTTOM);
        assert_eq!(label.to_string(), "⊕{(p, ()), (q, ())};⊖{}");
    }

    #[test]
    fn self_send_to_nobody_is_identity() {
        let b = Behavior::app(LocalValue::SendSelf(BTreeSet::new()), LocalValue::Unit);
        let steps = local_step(&b);
        let [LocalStep::Step { next, label, .. }] = steps.as_slice() else {
            panic!("{steps:?}")
        };
        assert_eq!(next, &Behavior::Val(LocalValue::Unit));
        assert!(label.is_silent());
    }

    #[test]
    fn receive_returns_the_delivered_value() {
        let b = Behavior::app(LocalValue::Recv(party("s")), LocalValue::Bottom);
        assert_eq!(
            local_step(&b),
            vec![LocalStep::Receive { from: party("s") }]
        );
        assert_eq!(
            receive(&b, &LocalValue::Unit),
            Behavior::Val(LocalValue::Unit)
        );
    }

    #[test]
    fn multicast_is_a_single_step() {
        let n = multicast();
        let steps = enumerate_net_steps(&n);
        assert_eq!(steps.len(), 1);
        let (next, step) = &steps[0];
        assert_eq!(next.to_string(), "p: ()\nq: ()\ns: ⊥");
        assert_eq!(step.to_string(), "s -> [p, q] : ()");
        assert!(step.unmatched_sends.is_empty());
        assert!(enumerate_net_steps(next).is_empty());
    }

    #[test]
    fn values_do_not_step() {
        let n = project_all(&Value::Unit(PartySet::of(&["p"])).into()).unwrap();
        assert!(enumerate_net_steps(&n).is_empty());
    }

    #[test]
    fn independent_silent_steps_both_enabled() {
        let id = LocalValue::Lambda {
            param: Var::from("x"),
            body: Box::new(Behavior::Val(LocalValue::Var(Var::from("x")))),
        };
        let b = Behavior::app(id, LocalValue::Unit);
        let n = Network::new([(party("p"), b.clone()), (party("q"), b)]);
        assert_eq!(enumerate_net_steps(&n).len(), 2);
        let ex = explore(&n, 100);
        assert_eq!(ex.finals.len(), 1);
        assert_eq!(ex.longest_path, 2);
    }

    #[test]
    fn mutual_receive_deadlocks() {
        let n = Network::new([
            (
                party("p"),
                Behavior::app(LocalValue::Recv(party("q")), LocalValue::Bottom),
            ),
            (
                party("q"),
                Behavior::app(LocalValue::Recv(party("p")), LocalValue::Bottom),
            ),
        ]);
        let sim = simulate_seeded(&n, 0, 100);
        let SimOutcome::Deadlock(report) = sim.outcome else {
            panic!("{:?}", sim.outcome)
        };
        assert_eq!(report.stuck.len(), 2);
        assert_eq!(explore(&n, 100).deadlocks.len(), 1);
    }

    #[test]
    fn send_waits_for_every_recipient() {
        let n = Network::new([
            (
                party("s"),
                Behavior::app(
                    LocalValue::Send(BTreeSet::from([party("p"), party("q")])),
                    LocalValue::Unit,
                ),
            ),
            (
                party("p"),
                Behavior::app(LocalValue::Recv(party("s")), LocalValue::Bottom),
            ),
            (party("q"), Behavior::Val(LocalValue::Unit)),
        ]);
        assert!(enumerate_net_steps(&n).is_empty());
    }

    #[test]
    fn trace_rendering_and_stats() {
        let sim = simulate_seeded(&multicast(), 7, 10);
        assert!(matches!(sim.outcome, SimOutcome::Finished(_)));
        assert_eq!(sim.trace.to_string(), "step 1: s -> [p, q] : ()\n");
        let stats = sim.trace.stats();
        assert_eq!(
            (stats.network_steps, stats.rendezvous_steps, stats.messages),
            (1, 1, 2)
        );
    }

    #[test]
    fn fuel_bounds_simulation() {
        let sim = simulate_seeded(&multicast(), 0, 0);
        assert!(matches!(sim.outcome, SimOutcome::FuelExhausted(_)));
    }

    #[test]
    fn nonsendable_values_are_reported() {
        let id = LocalValue::Lambda {
            param: Var::from("x"),
            body: Box::new(Behavior::Val(LocalValue::Var(Var::from("x")))),
        };
        let b = Behavior::app(LocalValue::Send(BTreeSet::from([party("p")])), id);
        assert!(local_step(&b).is_empty());
        assert!(stuck_reason(&b).unwrap().contains("non-data"));
    }
}
