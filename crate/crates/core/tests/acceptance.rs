//! Acceptance suite. Prints one PASS or FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run with `cargo test -p helam-core --test acceptance`.

use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use helam::ast::Party;
use helam::central::{default_fuel, run};
use helam::frontend::{check, compile, parse, parse_core, FrontendError};
use helam::harness::gen::{gen_instance, GenConfig};
use helam::harness::masking::check_masking;
use helam::harness::props::{network_of, NetLimits};
use helam::harness::{check_fixture, check_metatheory, mutation_fixture, MetaConfig, MetaReport};
use helam::project::project_all;
use helam::runtime::{
    enumerate_net_steps, explore, simulate_seeded, Network, SimOutcome, DEFAULT_STATE_BUDGET,
};
use helam::typecheck::TypeErrorKind;
use helam::{Behavior, Expr, LocalValue};

const INSTANCES: usize = 1000;
const MAX_PARTIES: usize = 4;
const MAX_DEPTH: usize = 6;
const SEEDS_PER_INSTANCE: usize = 100;
const EXHAUSTIVE_STEP_LIMIT: usize = 12;
const METATHEORY_TIME_LIMIT: Duration = Duration::from_secs(60);
const MASK_PAIRS: usize = 10_000;
const MASK_TIME_LIMIT: Duration = Duration::from_secs(10);
const CORPUS_SEEDS: u64 = 100;
const ROUNDTRIP_TERMS: u64 = 1000;

/// The six transcribed case studies.
const CASE_STUDIES: [&str; 6] = [
    "kvs.hll",
    "kvs_replicated.hll",
    "bookseller.hll",
    "delegation.hll",
    "asymmetric.hll",
    "asymmetric_mechanical.hll",
];

type Verdict = Result<String, String>;

fn corpus(name: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn party(n: &str) -> Party {
    Party::new(n).unwrap()
}

fn tally(report: &MetaReport, property: &str) -> Result<String, String> {
    let r = report
        .get(property)
        .ok_or_else(|| format!("no report for {property}"))?;
    let line = format!("{property} {}/{}", r.passed, r.checked);
    if r.ok() {
        Ok(line)
    } else {
        let first = &r.failures[0];
        Err(format!(
            "{line}; first failure at seed {}: {} ({})",
            first.seed, first.detail, first.counterexample
        ))
    }
}

fn all_of(report: &MetaReport, properties: &[&str], min_checked: usize) -> Verdict {
    let mut parts = Vec::new();
    for p in properties {
        let line = tally(report, p)?;
        let checked = report.get(p).map_or(0, |r| r.checked);
        if checked < min_checked {
            return Err(format!("{line}: expected at least {min_checked} checks"));
        }
        parts.push(line);
    }
    Ok(parts.join(", "))
}

fn criterion_1(report: &MetaReport, elapsed: Duration) -> Verdict {
    let g = &report.config.gen;
    if g.max_parties > MAX_PARTIES || g.max_depth > MAX_DEPTH {
        return Err(format!(
            "generator bounds {} parties, depth {}",
            g.max_parties, g.max_depth
        ));
    }
    let props = all_of(
        report,
        &[
            "generator-soundness",
            "preservation",
            "progress",
            "substitution",
        ],
        INSTANCES,
    )?;
    if elapsed > METATHEORY_TIME_LIMIT {
        return Err(format!(
            "{props}; took {elapsed:.1?}, limit {METATHEORY_TIME_LIMIT:?}"
        ));
    }
    Ok(format!(
        "{props}; {elapsed:.1?} (limit {METATHEORY_TIME_LIMIT:?})"
    ))
}

fn criterion_2(report: &MetaReport) -> Verdict {
    let sampled = all_of(report, &["agreement", "epp-completeness"], INSTANCES)?;
    let exhaustive = all_of(report, &["exhaustive-agreement", "epp-soundness"], 1)?;
    Ok(format!(
        "{SEEDS_PER_INSTANCE} seeds per instance: {sampled}; exhaustive up to {EXHAUSTIVE_STEP_LIMIT} steps: {exhaustive}"
    ))
}

fn criterion_3(report: &MetaReport) -> Verdict {
    let clean = all_of(report, &["deadlock-freedom"], INSTANCES)?;
    let (broken, expected) = mutation_fixture();
    let reports = check_fixture(&broken, &expected, &NetLimits::default());
    let dl = reports
        .iter()
        .find(|r| r.property == "deadlock-freedom")
        .expect("reported");
    match dl.failures.first() {
        Some(f) if f.detail.contains("deadlock") => Ok(format!(
            "{clean}; mutation fixture reported: {}",
            f.detail.split_whitespace().collect::<Vec<_>>().join(" ")
        )),
        _ => Err(format!(
            "{clean}; the mutation fixture was not reported as a deadlock"
        )),
    }
}

/// Checks, runs, and simulates `src`, returning the point-to-point message
/// count of every sampled run (they must all agree).
fn simulate_corpus(name: &str, src: &str) -> Result<usize, String> {
    let (compiled, _) = check(src, None).map_err(|e| format!("{name}: {e}"))?;
    let e = &compiled.expr;
    let result = run(e, default_fuel(e)).map_err(|err| format!("{name}: {err}"))?;
    let network = project_all(e).map_err(|err| format!("{name}: {err}"))?;
    let roles = helam::project::roles(e).expect("nonempty");
    let expected = network_of(&Expr::Val(result.value), &roles);
    let mut messages = None;
    for seed in 0..CORPUS_SEEDS {
        let sim = simulate_seeded(&network, seed, 100_000);
        match sim.outcome {
            SimOutcome::Finished(n) if n == expected => {}
            other => return Err(format!("{name} seed {seed}: {other:?}")),
        }
        let m = sim.trace.stats().messages;
        if messages.is_some_and(|prev| prev != m) {
            return Err(format!("{name}: message counts differ between runs"));
        }
        messages = Some(m);
    }
    let ex = explore(&network, DEFAULT_STATE_BUDGET);
    if !ex.complete || !ex.deadlocks.is_empty() || ex.finals.len() != 1 {
        return Err(format!(
            "{name}: exhaustive exploration complete={} deadlocks={} finals={}",
            ex.complete,
            ex.deadlocks.len(),
            ex.finals.len()
        ));
    }
    Ok(messages.unwrap_or(0))
}

fn sends_from(src: &str, from: &str, to: &str) -> Result<bool, String> {
    let (compiled, _) = check(src, None).map_err(|e| e.to_string())?;
    let network = project_all(&compiled.expr).map_err(|e| e.to_string())?;
    let sim = simulate_seeded(&network, 0, 100_000);
    let found = sim
        .trace
        .rendezvous()
        .any(|s| s.origin == party(from) && s.recipients.contains(&party(to)));
    Ok(found)
}

fn criterion_4() -> Verdict {
    for name in CASE_STUDIES {
        simulate_corpus(name, &corpus(name))?;
    }
    let expect = |what: &str, got: usize, want: usize| {
        if got == want {
            Ok(format!("{what} {got}"))
        } else {
            Err(format!("{what}: {got} messages, expected {want}"))
        }
    };
    let kvs = corpus("kvs.hll");
    let rep = corpus("kvs_replicated.hll");
    if !kvs.contains("kvs (Inl ()@[client])") || !rep.contains("kvs (Inl ()@[client])") {
        return Err("the KVS programs no longer end with the expected request".into());
    }
    let kvs_get = kvs.replace("kvs (Inl ()@[client])", "kvs (Inr ()@[client])");
    let rep_get = rep.replace("kvs (Inl ()@[client])", "kvs (Inr ()@[client])");
    let counts = [
        expect("KVS put", simulate_corpus("kvs put", &kvs)?, 4)?,
        expect("KVS get", simulate_corpus("kvs get", &kvs_get)?, 3)?,
        expect(
            "replicated put",
            simulate_corpus("replicated put", &rep)?,
            3,
        )?,
        expect(
            "replicated get",
            simulate_corpus("replicated get", &rep_get)?,
            3,
        )?,
    ];
    let del = corpus("delegation.hll");
    let inl = "let alices_choice : (() + ())@[alice] = Inl ()@[alice];";
    if !del.contains(inl) {
        return Err("delegation.hll no longer has the expected choice line".into());
    }
    let del_inr = del.replace(
        inl,
        "let alices_choice : (() + ())@[alice] = Inr ()@[alice];",
    );
    simulate_corpus("delegation inr", &del_inr)?;
    let (with, without) = (
        sends_from(&del, "bob", "alice")?,
        sends_from(&del_inr, "bob", "alice")?,
    );
    if !with || without {
        return Err(format!(
            "bob -> alice message: Inl choice {with}, Inr choice {without}"
        ));
    }
    Ok(format!(
        "{} case studies deadlock-free; messages: {}; bob -> alice only on Inl",
        CASE_STUDIES.len(),
        counts.join(", ")
    ))
}

fn criterion_5() -> Verdict {
    let bad = corpus("bad_koc.hll");
    let err = match check(&bad, None) {
        Ok(_) => return Err("bad_koc.hll was accepted".into()),
        Err(FrontendError::Type(e)) => e,
        Err(e) => return Err(format!("bad_koc.hll: {e}")),
    };
    if err.kind != TypeErrorKind::MaskUndefined {
        return Err(format!("bad_koc.hll rejected with {err}"));
    }
    let span = err.span.ok_or("no source location")?;
    let guard_line = bad
        .lines()
        .position(|l| l.trim_start().starts_with("case["))
        .map(|i| i + 1)
        .ok_or("bad_koc.hll has no case")?;
    if span.line != guard_line {
        return Err(format!(
            "diagnostic at line {}, guard at line {guard_line}",
            span.line
        ));
    }
    check(&corpus("good_koc.hll"), None).map_err(|e| format!("good_koc.hll: {e}"))?;
    Ok(format!(
        "bad_koc.hll: {} at {span}; good_koc.hll accepted",
        err.kind
    ))
}

fn criterion_6() -> Verdict {
    let (compiled, _) = check(&corpus("multicast.hll"), None).map_err(|e| e.to_string())?;
    let network = project_all(&compiled.expr).map_err(|e| e.to_string())?;
    let (p, q, s) = (party("p"), party("q"), party("s"));
    let recv = Behavior::app(LocalValue::Recv(s.clone()), LocalValue::Bottom);
    let golden = Network::new([
        (p.clone(), recv.clone()),
        (q.clone(), recv),
        (
            s.clone(),
            Behavior::app(
                LocalValue::Send([p.clone(), q.clone()].into()),
                LocalValue::Unit,
            ),
        ),
    ]);
    if network != golden {
        return Err(format!("projection\n{network}\ndiffers from\n{golden}"));
    }
    let steps = enumerate_net_steps(&network);
    let [(next, step)] = steps.as_slice() else {
        return Err(format!("{} enabled steps, expected 1", steps.len()));
    };
    let done = Network::new([
        (p, Behavior::Val(LocalValue::Unit)),
        (q, Behavior::Val(LocalValue::Unit)),
        (s, Behavior::BOTTOM),
    ]);
    if step.rule != "NCOM"
        || *next != done
        || !next.is_final()
        || !enumerate_net_steps(next).is_empty()
    {
        return Err(format!("step {step} ({}) reached\n{next}", step.rule));
    }
    Ok(format!(
        "one NCOM step {step} reaches the all-values network"
    ))
}

fn criterion_7() -> Verdict {
    let started = Instant::now();
    let reports = check_masking(&GenConfig::default(), MASK_PAIRS, 0);
    let elapsed = started.elapsed();
    let mut parts = Vec::new();
    for r in &reports {
        if !r.ok() {
            let f = &r.failures[0];
            return Err(format!(
                "{} {}/{}: seed {}: {}",
                r.property, r.passed, r.checked, f.seed, f.detail
            ));
        }
        parts.push(format!("{} {}/{}", r.property, r.passed, r.checked));
    }
    for law in ["mask-idempotence", "sub-mask"] {
        if reports
            .iter()
            .any(|r| r.property == law && r.checked < MASK_PAIRS)
        {
            return Err(format!("{law} checked fewer than {MASK_PAIRS} pairs"));
        }
    }
    if elapsed > MASK_TIME_LIMIT {
        return Err(format!(
            "{}; took {elapsed:.1?}, limit {MASK_TIME_LIMIT:?}",
            parts.join(", ")
        ));
    }
    Ok(format!(
        "{}; {elapsed:.1?} (limit {MASK_TIME_LIMIT:?})",
        parts.join(", ")
    ))
}

fn criterion_8() -> Verdict {
    let mut files = 0;
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut names: Vec<_> = fs::read_dir(&dir)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".hll"))
        .collect();
    names.sort();
    for name in &names {
        let src = corpus(name);
        let tree = parse(&src).map_err(|e| format!("{name}: {e}"))?;
        let printed = tree.to_string();
        let again = parse(&printed).map_err(|e| format!("{name} reprinted: {e}"))?;
        if again.without_spans() != tree.without_spans() || again.to_string() != printed {
            return Err(format!("{name}: reprinting changed the program"));
        }
        if let (Ok(a), Ok(b)) = (compile(&src, None), compile(&printed, None)) {
            if a.expr != b.expr {
                return Err(format!("{name}: reprinting changed the core term"));
            }
        }
        files += 1;
    }
    let cfg = GenConfig::default();
    for seed in 0..ROUNDTRIP_TERMS {
        let inst = gen_instance(&cfg, seed).map_err(|e| format!("seed {seed}: {e}"))?;
        let text = inst.expr.to_string();
        match parse_core(&text) {
            Ok(e) if e == inst.expr => {}
            Ok(e) => return Err(format!("seed {seed}: {text} parsed back as {e}")),
            Err(err) => return Err(format!("seed {seed}: {text}: {err}")),
        }
    }
    Ok(format!(
        "{files} corpus files and {ROUNDTRIP_TERMS} generated terms round-trip"
    ))
}

fn main() {
    let cfg = MetaConfig {
        gen: GenConfig {
            max_parties: MAX_PARTIES,
            max_depth: MAX_DEPTH,
            ..GenConfig::default()
        },
        instances: INSTANCES,
        limits: NetLimits {
            seeds: SEEDS_PER_INSTANCE,
            exhaustive_step_limit: EXHAUSTIVE_STEP_LIMIT,
            ..NetLimits::default()
        },
        ..MetaConfig::default()
    };
    let started = Instant::now();
    let meta = check_metatheory(&cfg);
    let elapsed = started.elapsed();

    let results: Vec<(&str, Verdict)> = match &meta {
        Ok(report) => vec![
            ("metatheory", criterion_1(report, elapsed)),
            ("EPP agreement", criterion_2(report)),
            ("deadlock freedom", criterion_3(report)),
            ("corpus", criterion_4()),
            ("KoC rejection", criterion_5()),
            ("single-step multicast", criterion_6()),
            ("masking laws", criterion_7()),
            ("round-trip", criterion_8()),
        ],
        Err(e) => {
            let mut v: Vec<(&str, Verdict)> = vec![
                ("metatheory", Err(e.to_string())),
                ("EPP agreement", Err(e.to_string())),
                ("deadlock freedom", Err(e.to_string())),
            ];
            v.extend([
                ("corpus", criterion_4()),
                ("KoC rejection", criterion_5()),
                ("single-step multicast", criterion_6()),
                ("masking laws", criterion_7()),
                ("round-trip", criterion_8()),
            ]);
            v
        }
    };

    let mut failed = 0;
    for (i, (title, verdict)) in results.iter().enumerate() {
        let (tag, detail) = match verdict {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {} {tag} {title}: {detail}", i + 1);
    }
    if let Ok(report) = &meta {
        if !report.missing_rules.is_empty() {
            println!(
                "note: typing rules never exercised: {:?}",
                report.missing_rules
            );
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", results.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", results.len());
}
