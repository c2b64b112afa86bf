//! Laws of the mask operator on generated types and values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::{Expr, PartySet, Type, Value};
use crate::harness::gen::{gen_subset, gen_type, gen_value, parties, GenConfig};
use crate::harness::props::Outcome;
use crate::harness::{Failure, PropertyReport, Tally};
use crate::mask::{mask_type, mask_value};
use crate::typecheck::{check_against, TypeEnv};

pub const MASK_PROPERTIES: [&str; 4] = ["mask-idempotence", "sub-mask", "maskable", "enclave"];

/// One generated input: a type, one of its values, and a party set to mask
/// to. `data` is a data type with a value of it, for the sub-mask law.
#[derive(Debug, Clone)]
pub struct MaskCase {
    pub theta: PartySet,
    pub ty: Type,
    pub value: Value,
    pub mask: PartySet,
    pub data: (Type, Value, PartySet),
}

pub fn gen_mask_case(cfg: &GenConfig, seed: u64) -> MaskCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = parties(cfg.max_parties);
    loop {
        let ty = gen_type(cfg, &mut rng, &theta, 2, 3);
        let Ok(value) = gen_value(cfg, &mut rng, &theta, &ty) else {
            continue;
        };
        let mask = gen_subset(&mut rng, &theta);
        let depth = rng.gen_range(0..=3);
        let owners = gen_subset(&mut rng, &theta);
        let d = gen_type(cfg, &mut rng, &owners, 0, depth);
        let Type::Data(dt, _) = d else {
            unreachable!("depth 0 types are data")
        };
        let dty = Type::Data(dt, owners.clone());
        let Ok(dv) = gen_value(cfg, &mut rng, &theta, &dty) else {
            continue;
        };
        let sub = gen_subset(&mut rng, &owners);
        return MaskCase {
            theta,
            ty,
            value,
            mask,
            data: (dty, dv, sub),
        };
    }
}

fn checks_at(theta: &PartySet, v: &Value, t: &Type) -> Result<(), String> {
    check_against(&TypeEnv::new(theta.clone()), &Expr::Val(v.clone()), t)
        .map_err(|e| format!("{v} does not check at {t} under {theta}: {e}"))
}

pub fn check_mask_case(c: &MaskCase) -> Vec<Outcome> {
    let s = &c.mask;
    let mt = mask_type(&c.ty, s);
    let mv = mask_value(&c.value, s);

    let idem = match (&mt, &mv) {
        (Some(t), _) if mask_type(t, s).as_ref() != Some(t) => Err(format!(
            "{} masked to {s} is {t}, which masks again to {:?}",
            c.ty,
            mask_type(t, s)
        )),
        (_, Some(v)) if mask_value(v, s).as_ref() != Some(v) => Err(format!(
            "{} masked to {s} is {v}, which is not stable",
            c.value
        )),
        _ => Ok(()),
    };

    let (maskable, enclave) = match (&mt, &mv) {
        (None, _) => (None, None),
        (Some(t), None) => {
            let e = Err(format!(
                "{} : {} masks to {t} at {s} but the value does not mask",
                c.value, c.ty
            ));
            (Some(e.clone()), Some(e))
        }
        (Some(t), Some(v)) => (Some(checks_at(&c.theta, v, t)), Some(checks_at(s, v, t))),
    };

    let (dty, dv, sub) = &c.data;
    let Type::Data(d, _) = dty else {
        unreachable!()
    };
    let sub_masked = Type::Data(d.clone(), sub.clone());
    let sub_mask = match mask_value(dv, sub) {
        None => Err(format!("{dv} : {dty} does not mask to {sub}")),
        Some(v) => checks_at(&c.theta, &v, &sub_masked),
    };

    vec![
        ("mask-idempotence", Some(idem)),
        ("sub-mask", Some(sub_mask)),
        ("maskable", maskable),
        ("enclave", enclave),
    ]
}

/// Checks the mask laws on `pairs` generated inputs, seeded `seed`,
/// `seed + 1`, and so on.
pub fn check_masking(cfg: &GenConfig, pairs: usize, seed: u64) -> Vec<PropertyReport> {
    let mut tally = Tally::new(&MASK_PROPERTIES);
    for i in 0..pairs as u64 {
        let s = seed.wrapping_add(i);
        let c = gen_mask_case(cfg, s);
        for (name, r) in check_mask_case(&c) {
            tally.record(name, r, || Failure {
                seed: s,
                counterexample: format!("{} : {} at {}", c.value, c.ty, c.mask),
                detail: String::new(),
            });
        }
    }
    tally.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_data_generation_respects_owners() {
        let cfg = GenConfig::default();
        for seed in 0..200 {
            let c = gen_mask_case(&cfg, seed);
            let (Type::Data(d, o), _, sub) = &c.data else {
                panic!()
            };
            assert!(d.depth() <= 3);
            assert!(sub.is_subset(o));
        }
    }

    #[test]
    fn laws_hold_on_a_small_sample() {
        for r in check_masking(&GenConfig::default(), 300, 0) {
            assert!(r.failures.is_empty(), "{}: {:?}", r.property, r.failures);
            assert!(r.checked > 0, "{} never applied", r.property);
        }
    }
}
