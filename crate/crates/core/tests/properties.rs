//! Property tests over generated programs.

use proptest::prelude::*;

use helam::central::{default_fuel, run};
use helam::frontend::{check, parse, parse_core, uniquify};
use helam::harness::gen::{canonical_value, gen_instance, parties, GenConfig};
use helam::harness::shrink::shrink;
use helam::mask::{mask_type, mask_value};
use helam::project::project_all;
use helam::runtime::simulate_seeded;
use helam::typecheck::{check_against, TypeEnv};
use helam::{Expr, PartySet, Type, Value};

fn cfg() -> GenConfig {
    GenConfig::default()
}

fn subset_of_four() -> impl Strategy<Value = PartySet> {
    (1u8..16).prop_map(|bits| {
        let all = ["p", "q", "r", "s"];
        let names: Vec<&str> = (0..4)
            .filter(|i| bits & (1 << i) != 0)
            .map(|i| all[i])
            .collect();
        PartySet::of(&names)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn uniquify_preserves_typing_and_results(seed in any::<u64>()) {
        let inst = gen_instance(&cfg(), seed).unwrap();
        let renamed = uniquify(&inst.expr);
        let env = TypeEnv::new(inst.theta.clone());
        prop_assert!(check_against(&env, &renamed, &inst.target).is_ok());
        let a = run(&inst.expr, default_fuel(&inst.expr)).unwrap().value;
        let b = run(&renamed, default_fuel(&renamed)).unwrap().value;
        prop_assert_eq!(uniquify(&a.into()), uniquify(&b.into()));
    }

    #[test]
    fn uniquify_leaves_no_repeated_binders(seed in any::<u64>()) {
        let inst = gen_instance(&cfg(), seed).unwrap();
        let renamed = uniquify(&inst.expr);
        let mut seen = std::collections::BTreeSet::new();
        for path in renamed.paths() {
            let binders: Vec<String> = match renamed.at(&path).unwrap() {
                helam::ast::Node::Expr(Expr::Case { left_var, right_var, .. }) => {
                    vec![left_var.to_string(), right_var.to_string()]
                }
                node => match node.as_value() {
                    Some(Value::Lambda { param, .. }) => vec![param.to_string()],
                    _ => vec![],
                },
            };
            for b in binders {
                prop_assert!(seen.insert(b.clone()), "{} bound twice in {}", b, renamed);
            }
        }
    }

    #[test]
    fn core_printing_round_trips(seed in any::<u64>()) {
        let inst = gen_instance(&cfg(), seed).unwrap();
        prop_assert_eq!(parse_core(&inst.expr.to_string()).unwrap(), inst.expr);
    }

    #[test]
    fn simulation_is_reproducible(seed in any::<u64>(), sched in any::<u64>()) {
        let inst = gen_instance(&cfg(), seed).unwrap();
        let net = project_all(&inst.expr).unwrap();
        prop_assert_eq!(simulate_seeded(&net, sched, 10_000), simulate_seeded(&net, sched, 10_000));
    }

    #[test]
    fn masking_to_a_superset_of_the_owners_is_the_identity(seed in any::<u64>(), extra in subset_of_four()) {
        let inst = gen_instance(&cfg(), seed).unwrap();
        let t = &inst.target;
        let owners = PartySet::new(t.parties()).unwrap().union(&extra);
        let masked = mask_type(t, &owners);
        prop_assert_eq!(masked.as_ref(), Some(t));
        let v = canonical_value(t);
        prop_assert_eq!(mask_value(&v, &owners), Some(v));
    }

    #[test]
    fn shrinking_keeps_terms_well_typed(seed in any::<u64>()) {
        let inst = gen_instance(&cfg(), seed).unwrap();
        let env = TypeEnv::new(inst.theta.clone());
        let uses_case = |e: &Expr| e.to_string().contains("case[");
        let small = shrink(&env, &inst.target, &inst.expr, uses_case);
        prop_assert!(check_against(&env, &small, &inst.target).is_ok());
        prop_assert!(small.size() <= inst.expr.size());
        prop_assert_eq!(uses_case(&small), uses_case(&inst.expr));
    }
}

/// Desugaring never lets a temporary capture a user variable, even when the
/// user picked the temporary's name.
#[test]
fn desugar_temporaries_are_hygienic() {
    let src = "let _tmp0 : ()@[r] = ()@[r];\n\
               let y : (() + ())@[r] = Inl (com[s][r] ()@[s]);\n\
               case[r] y of Inl a => _tmp0; Inr b => b";
    let (compiled, t) = check(src, None).unwrap();
    assert_eq!(t.to_string(), "()@[r]");
    let v = run(&compiled.expr, 1000).unwrap().value;
    assert_eq!(v, Value::Unit(PartySet::of(&["r"])));
    assert!(parse(src).is_ok());
}

#[test]
fn generated_targets_use_only_the_generated_parties() {
    for seed in 0..200 {
        let inst = gen_instance(&cfg(), seed).unwrap();
        assert!(inst.theta.is_subset(&parties(4)));
        let Ok(owners) = PartySet::new(inst.target.parties()) else {
            panic!("target without parties")
        };
        assert!(owners.is_subset(&inst.theta), "{}", inst.target);
        assert!(!matches!(inst.target, Type::Tuple(ref ts) if ts.is_empty()));
    }
}
