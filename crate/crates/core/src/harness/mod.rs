//! Randomized checking of the metatheory: a type-directed generator of
//! well-typed programs, property drivers over typing, evaluation,
//! projection and the network semantics, and a shrinker that minimizes
//! counterexamples.

pub mod gen;
pub mod masking;
pub mod props;
pub mod shrink;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ast::{Behavior, Expr, LocalValue, Party, PartySet, Value};
use crate::runtime::Network;
use crate::typecheck::{RuleCoverage, TypeEnv};
use gen::{gen_instance, GenConfig, GenError, Instance};
use props::{check_instance, check_triple, gen_triple, NetLimits, Outcome};

/// Properties checked per generated instance, in report order.
pub const PROPERTIES: [&str; 18] = [
    "generator-soundness",
    "exclave",
    "progress",
    "preservation",
    "substitution",
    "distributive-substitution",
    "cruft",
    "floor-fixpoint",
    "bottom-preservation",
    "existence",
    "masked-projection",
    "epp-completeness",
    "agreement",
    "exhaustive-agreement",
    "epp-soundness",
    "deadlock-freedom",
    "determinism",
    "parallelism",
];

/// Failures kept per property; the rest are only counted.
pub const MAX_RECORDED_FAILURES: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    /// Regenerating with this seed reproduces the failure.
    pub seed: u64,
    pub counterexample: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: String,
    /// Inputs the property applied to.
    pub checked: usize,
    pub passed: usize,
    pub failures: Vec<Failure>,
}

impl PropertyReport {
    pub fn failed(&self) -> usize {
        self.checked - self.passed
    }

    pub fn ok(&self) -> bool {
        self.checked == self.passed
    }
}

/// Accumulates verdicts into per-property reports.
pub(crate) struct Tally(Vec<PropertyReport>);

impl Tally {
    pub(crate) fn new(names: &[&str]) -> Self {
        Tally(
            names
                .iter()
                .map(|n| PropertyReport {
                    property: (*n).to_owned(),
                    checked: 0,
                    passed: 0,
                    failures: Vec::new(),
                })
                .collect(),
        )
    }

    pub(crate) fn record(
        &mut self,
        name: &str,
        verdict: Option<Result<(), String>>,
        failure: impl FnOnce() -> Failure,
    ) {
        let Some(verdict) = verdict else { return };
        let r = self
            .0
            .iter_mut()
            .find(|r| r.property == name)
            .unwrap_or_else(|| panic!("unknown property {name}"));
        r.checked += 1;
        match verdict {
            Ok(()) => r.passed += 1,
            Err(detail) => {
                if r.failures.len() < MAX_RECORDED_FAILURES {
                    r.failures.push(Failure {
                        detail,
                        ..failure()
                    });
                }
            }
        }
    }

    pub(crate) fn finish(self) -> Vec<PropertyReport> {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaConfig {
    pub gen: GenConfig,
    pub instances: usize,
    /// Instance `i` is generated from seed `seed + i`.
    pub seed: u64,
    pub limits: NetLimits,
    /// Worker threads; 0 means one per available core.
    pub threads: usize,
    /// Shrink counterexamples before reporting them.
    pub shrink: bool,
}

impl Default for MetaConfig {
    fn default() -> Self {
        MetaConfig {
            gen: GenConfig::default(),
            instances: 1000,
            seed: 0,
            limits: NetLimits::default(),
            threads: 0,
            shrink: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetaReport {
    pub config: MetaConfig,
    pub reports: Vec<PropertyReport>,
    /// How often each typing rule fired across all instances.
    pub coverage: BTreeMap<String, usize>,
    pub missing_rules: Vec<String>,
    pub elapsed_ms: u128,
}

impl MetaReport {
    pub fn get(&self, property: &str) -> Option<&PropertyReport> {
        self.reports.iter().find(|r| r.property == property)
    }

    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(PropertyReport::ok) && self.missing_rules.is_empty()
    }
}

struct InstanceResult {
    seed: u64,
    counterexample: String,
    outcomes: Vec<Outcome>,
    shrunk: BTreeMap<&'static str, String>,
    triple: Option<(String, Vec<Outcome>)>,
    coverage: RuleCoverage,
}

fn run_one(cfg: &MetaConfig, seed: u64) -> InstanceResult {
    let mut coverage = RuleCoverage::default();
    let triple = gen_triple(&cfg.gen, seed).map(|t| (t.to_string(), check_triple(&t)));
    let inst = match gen_instance(&cfg.gen, seed) {
        Ok(inst) => inst,
        Err(e) => {
            return InstanceResult {
                seed,
                counterexample: String::new(),
                outcomes: vec![("generator-soundness", Some(Err(e.to_string())))],
                shrunk: BTreeMap::new(),
                triple,
                coverage,
            }
        }
    };
    let outcomes = check_instance(&inst, &cfg.limits, &mut coverage);
    let mut shrunk = BTreeMap::new();
    if cfg.shrink {
        for (name, verdict) in &outcomes {
            if matches!(verdict, Some(Err(_))) && *name != "generator-soundness" {
                shrunk.insert(*name, shrink_failure(&inst, name, &cfg.limits).to_string());
            }
        }
    }
    InstanceResult {
        seed,
        counterexample: format!("{} ⊢ {} : {}", inst.theta, inst.expr, inst.target),
        outcomes,
        shrunk,
        triple,
        coverage,
    }
}

/// The smallest variant of `inst` that still fails `property`.
pub fn shrink_failure(inst: &Instance, property: &str, lim: &NetLimits) -> Expr {
    let env = TypeEnv::new(inst.theta.clone());
    shrink::shrink(&env, &inst.target, &inst.expr, |e| {
        let candidate = Instance {
            expr: e.clone(),
            ..inst.clone()
        };
        check_instance(&candidate, lim, &mut RuleCoverage::default())
            .iter()
            .any(|(p, v)| *p == property && matches!(v, Some(Err(_))))
    })
}

/// Generates `cfg.instances` programs and checks every property on each.
pub fn check_metatheory(cfg: &MetaConfig) -> Result<MetaReport, GenError> {
    cfg.gen.validate()?;
    let started = Instant::now();
    let threads = match cfg.threads {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
    .min(cfg.instances.max(1));
    let mut results: Vec<Option<InstanceResult>> = (0..cfg.instances).map(|_| None).collect();
    std::thread::scope(|scope| {
        let workers: Vec<_> = (0..threads)
            .map(|t| {
                scope.spawn(move || {
                    (t..cfg.instances)
                        .step_by(threads)
                        .map(|i| (i, run_one(cfg, cfg.seed.wrapping_add(i as u64))))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for w in workers {
            for (i, r) in w.join().expect("worker panicked") {
                results[i] = Some(r);
            }
        }
    });

    let mut tally = Tally::new(&PROPERTIES);
    let mut coverage = RuleCoverage::default();
    for r in results.into_iter().flatten() {
        coverage.merge(&r.coverage);
        for (name, verdict) in r.outcomes {
            tally.record(name, verdict, || Failure {
                seed: r.seed,
                counterexample: r
                    .shrunk
                    .get(name)
                    .cloned()
                    .unwrap_or_else(|| r.counterexample.clone()),
                detail: String::new(),
            });
        }
        if let Some((text, outcomes)) = r.triple {
            for (name, verdict) in outcomes {
                tally.record(name, verdict, || Failure {
                    seed: r.seed,
                    counterexample: text.clone(),
                    detail: String::new(),
                });
            }
        }
    }
    Ok(MetaReport {
        config: cfg.clone(),
        reports: tally.finish(),
        coverage: coverage
            .0
            .iter()
            .map(|(k, v)| ((*k).to_owned(), *v))
            .collect(),
        missing_rules: coverage.missing().into_iter().map(str::to_owned).collect(),
        elapsed_ms: started.elapsed().as_millis(),
    })
}

/// The projection of `com[s][p, q] ()@[s]` with `q`'s receive replaced by
/// `⊥`, paired with the network the intact program ends in.
pub fn mutation_fixture() -> (Network, Network) {
    let party = |n: &str| Party::new(n).expect("valid name");
    let (p, q, s) = (party("p"), party("q"), party("s"));
    let broken = Network::new([
        (
            p.clone(),
            Behavior::app(LocalValue::Recv(s.clone()), LocalValue::Bottom),
        ),
        (q.clone(), Behavior::BOTTOM),
        (
            s.clone(),
            Behavior::app(
                LocalValue::Send([p.clone(), q.clone()].into()),
                LocalValue::Unit,
            ),
        ),
    ]);
    let done = Network::new([
        (p, Behavior::Val(LocalValue::Unit)),
        (q, Behavior::Val(LocalValue::Unit)),
        (s, Behavior::BOTTOM),
    ]);
    (broken, done)
}

/// Runs the network properties on a hand-built network.
pub fn check_fixture(start: &Network, expected: &Network, lim: &NetLimits) -> Vec<PropertyReport> {
    let names = [
        "agreement",
        "exhaustive-agreement",
        "epp-soundness",
        "deadlock-freedom",
        "determinism",
        "parallelism",
    ];
    let mut tally = Tally::new(&names);
    for (name, verdict) in props::check_network(start, expected, lim) {
        tally.record(name, verdict, || Failure {
            seed: 0,
            counterexample: start.to_string(),
            detail: String::new(),
        });
    }
    tally.finish()
}

/// The multicast example as a value, for fixtures and tests.
pub fn multicast() -> Expr {
    Expr::app(
        Value::Com(
            Party::new("s").expect("valid name"),
            PartySet::of(&["p", "q"]),
        ),
        Value::Unit(PartySet::of(&["s"])),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::project::project_all;

    #[test]
    fn fixture_matches_the_intact_projection() {
        let intact = project_all(&multicast()).unwrap();
        let (broken, done) = mutation_fixture();
        assert_ne!(intact, broken);
        assert_eq!(
            intact.procs.keys().collect::<Vec<_>>(),
            broken.procs.keys().collect::<Vec<_>>()
        );
        let reports = check_fixture(&intact, &done, &NetLimits::default());
        assert!(reports.iter().all(PropertyReport::ok), "{reports:?}");
    }

    #[test]
    fn mutation_is_detected() {
        let (broken, done) = mutation_fixture();
        let reports = check_fixture(&broken, &done, &NetLimits::default());
        let dl = reports
            .iter()
            .find(|r| r.property == "deadlock-freedom")
            .unwrap();
        assert!(!dl.ok());
        assert!(dl.failures[0].detail.contains("deadlock"));
    }

    #[test]
    fn small_run_passes() {
        let cfg = MetaConfig {
            instances: 60,
            limits: NetLimits {
                seeds: 10,
                ..NetLimits::default()
            },
            ..MetaConfig::default()
        };
        let report = check_metatheory(&cfg).unwrap();
        for r in &report.reports {
            assert!(r.ok(), "{}: {:#?}", r.property, r.failures);
        }
        assert_eq!(report.get("progress").unwrap().checked, 60);
    }
}
