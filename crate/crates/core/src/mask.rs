//! The partial masking operator `▷` on types and values.
//!
//! Masking restricts a type or value to a party set. It is undefined when
//! data would be left with no owner or when a function (or keyword) involves
//! parties outside the set; `None` represents that outcome.

use crate::ast::{PartySet, Type, Value};

pub fn mask_type(t: &Type, theta: &PartySet) -> Option<Type> {
    match t {
        Type::Data(d, owners) => Some(Type::Data(d.clone(), owners.intersection(theta)?)),
        Type::Fun(_, _, owners) => owners.is_subset(theta).then(|| t.clone()),
        Type::Tuple(ts) => ts
            .iter()
            .map(|t| mask_type(t, theta))
            .collect::<Option<Vec<_>>>()
            .map(Type::Tuple),
    }
}

pub fn mask_value(v: &Value, theta: &PartySet) -> Option<Value> {
    match v {
        Value::Var(_) => Some(v.clone()),
        Value::Lambda { owners, .. }
        | Value::Fst(owners)
        | Value::Snd(owners)
        | Value::Lookup(_, owners) => owners.is_subset(theta).then(|| v.clone()),
        Value::Com(s, r) => (theta.contains(s) && r.is_subset(theta)).then(|| v.clone()),
        Value::Unit(owners) => Some(Value::Unit(owners.intersection(theta)?)),
        Value::Inl(inner) => Some(Value::inl(mask_value(inner, theta)?)),
        Value::Inr(inner) => Some(Value::inr(mask_value(inner, theta)?)),
        Value::Pair(a, b) => Some(Value::pair(mask_value(a, theta)?, mask_value(b, theta)?)),
        Value::Tuple(vs) => vs
            .iter()
            .map(|v| mask_value(v, theta))
            .collect::<Option<Vec<_>>>()
            .map(Value::Tuple),
    }
}

/// True when masking `t` to `theta` leaves it unchanged.
pub fn is_noop(t: &Type, theta: &PartySet) -> bool {
    mask_type(t, theta).as_ref() == Some(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::*;

    fn ps(names: &[&str]) -> PartySet {
        PartySet::of(names)
    }

    fn unit_t(names: &[&str]) -> Type {
        Type::data(DataType::Unit, ps(names))
    }

    #[test]
    fn data_type_intersects_owners() {
        assert_eq!(
            mask_type(&unit_t(&["p", "q"]), &ps(&["p"])),
            Some(unit_t(&["p"]))
        );
        assert_eq!(
            mask_type(&unit_t(&["p"]), &ps(&["p"])),
            Some(unit_t(&["p"]))
        );
        assert_eq!(mask_type(&unit_t(&["p"]), &ps(&["q"])), None);
    }

    #[test]
    fn function_type_needs_all_owners() {
        let f = Type::fun(unit_t(&["p"]), unit_t(&["p"]), ps(&["p"]));
        assert_eq!(mask_type(&f, &ps(&["q"])), None);
        assert_eq!(mask_type(&f, &ps(&["p", "q"])), Some(f.clone()));
    }

    #[test]
    fn tuple_type_masks_elementwise() {
        let t = Type::Tuple(vec![unit_t(&["p", "q"]), unit_t(&["q"])]);
        assert_eq!(
            mask_type(&t, &ps(&["q"])),
            Some(Type::Tuple(vec![unit_t(&["q"]), unit_t(&["q"])]))
        );
        assert_eq!(mask_type(&t, &ps(&["p"])), None);
    }

    #[test]
    fn unit_value_intersects_owners() {
        assert_eq!(
            mask_value(&Value::Unit(ps(&["p", "q"])), &ps(&["q"])),
            Some(Value::Unit(ps(&["q"])))
        );
    }

    #[test]
    fn com_needs_sender_and_recipients() {
        let com = Value::Com(Party::new("s").unwrap(), ps(&["r"]));
        assert_eq!(mask_value(&com, &ps(&["s", "r"])), Some(com.clone()));
        assert_eq!(mask_value(&com, &ps(&["r"])), None);
        assert_eq!(mask_value(&com, &ps(&["s"])), None);
    }

    #[test]
    fn pair_fails_when_a_component_fails() {
        let v = Value::pair(Value::Unit(ps(&["p"])), Value::Unit(ps(&["q"])));
        assert_eq!(mask_value(&v, &ps(&["p"])), None);
    }

    #[test]
    fn variables_pass_through() {
        assert_eq!(
            mask_value(&Value::var("x"), &ps(&["z"])),
            Some(Value::var("x"))
        );
    }

    #[test]
    fn noop_is_literal_equality() {
        assert!(is_noop(&unit_t(&["p"]), &ps(&["p", "q"])));
        assert!(!is_noop(&unit_t(&["p", "q"]), &ps(&["p"])));
    }
}
