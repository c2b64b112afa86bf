//! Greedy shrinking of failing well-typed terms.

use crate::ast::{Expr, Type};
use crate::harness::gen::canonical_value;
use crate::typecheck::{check_against, typecheck_detailed, TypeEnv};

/// Repeatedly replaces a subterm with the canonical inhabitant of its type,
/// or with a descendant of the same type, keeping the first change that
/// makes the term smaller, still checks against `target`, and still
/// satisfies `failing`. Returns a local minimum.
pub fn shrink(env: &TypeEnv, target: &Type, e: &Expr, failing: impl Fn(&Expr) -> bool) -> Expr {
    let mut cur = e.clone();
    'outer: loop {
        let Ok(checked) = typecheck_detailed(env, &cur, Some(target)) else {
            return cur;
        };
        let size = cur.size();
        let accept = |cand: &Expr| {
            cand.size() < size && check_against(env, cand, target).is_ok() && failing(cand)
        };
        let paths = cur.paths();
        for path in &paths {
            let Some(t) = checked.node_types.get(path) else {
                continue;
            };
            if let Some(cand) = cur.replace_at(path, &canonical_value(t)) {
                if accept(&cand) {
                    cur = cand;
                    continue 'outer;
                }
            }
            for sub in paths
                .iter()
                .filter(|q| q.len() > path.len() && q.starts_with(path))
            {
                if checked.node_types.get(sub) != Some(t) {
                    continue;
                }
                let Some(node) = cur.at(sub) else { continue };
                let replacement = match node {
                    crate::ast::Node::Expr(x) => x.clone(),
                    crate::ast::Node::Value(v) => Expr::Val(v.clone()),
                };
                if let Some(cand) = cur.replace_expr_at(path, &replacement) {
                    if accept(&cand) {
                        cur = cand;
                        continue 'outer;
                    }
                }
            }
        }
        return cur;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::gen::{gen_instance, GenConfig};

    fn uses_com(e: &Expr) -> bool {
        e.to_string().contains("com[")
    }

    #[test]
    fn shrinks_to_a_small_communication() {
        let cfg = GenConfig::default();
        let inst = (0..)
            .map(|s| gen_instance(&cfg, s).unwrap())
            .find(|i| uses_com(&i.expr) && i.expr.size() > 15)
            .unwrap();
        let env = TypeEnv::new(inst.theta.clone());
        let small = shrink(&env, &inst.target, &inst.expr, uses_com);
        assert!(uses_com(&small));
        assert!(small.size() < inst.expr.size(), "{small}");
        check_against(&env, &small, &inst.target).unwrap();
    }

    #[test]
    fn minimal_input_is_unchanged() {
        let cfg = GenConfig::default();
        for seed in 0..50 {
            let inst = gen_instance(&cfg, seed).unwrap();
            let env = TypeEnv::new(inst.theta.clone());
            let once = shrink(&env, &inst.target, &inst.expr, |_| true);
            check_against(&env, &once, &inst.target).unwrap();
            assert_eq!(shrink(&env, &inst.target, &once, |_| true), once);
        }
    }
}
