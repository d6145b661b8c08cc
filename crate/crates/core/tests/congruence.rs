mod common;

use std::sync::Arc;

use proptest::prelude::*;

use csn::congruence::{
    canonical_network, congruent, normalize_module, normalize_program, programs_congruent, stable_hash, substitute,
    Subst,
};
use csn::engine::EnergyConfig;
use csn::field::FieldSpec;
use csn::network::{Network, Sensor};
use csn::num::Amount;
use csn::syntax::ast::{Module, Pos, Program, Value, Var};
use csn::syntax::names::free_vars;
use csn::syntax::{parse_module, parse_program};

use common::{arb_ground_value, arb_module, arb_program};

fn prog(src: &str) -> Program {
    parse_program(src).unwrap()
}

fn field() -> Arc<FieldSpec> {
    Arc::new(FieldSpec::constant(vec![0.0]).unwrap())
}

fn sensor(id: &str, p: Program, x: f64, battery: Amount) -> Sensor {
    Sensor::new(id, p, Module::new(), Pos::new(x, 0.0), 3.0, battery)
}

fn energy() -> EnergyConfig {
    EnergyConfig::default()
}

fn subst(pairs: &[(&str, Value)]) -> Subst {
    pairs.iter().map(|(k, v)| (Var::new(*k), v.clone())).collect()
}

#[test]
fn idle_is_the_unit() {
    let a = prog("this.a[]");
    assert_eq!(normalize_program(&Program::par(Program::Idle, a.clone())).threads, vec![vec![a]]);
    let idles = Program::seq(Program::Idle, Program::seq(Program::Idle, Program::Idle));
    assert!(normalize_program(&idles).is_idle());
}

#[test]
fn parallel_reassociation_is_identified() {
    let (a, b, c) = (prog("this.a[]"), prog("net.f[1]"), prog("install x"));
    let left = Program::par(a.clone(), Program::par(b.clone(), c.clone()));
    let right = Program::par(Program::par(c, a), b);
    assert_eq!(normalize_program(&left), normalize_program(&right));
}

#[test]
fn an_off_sensor_is_the_network_unit() {
    let e = EnergyConfig::new(Amount::from_units(1), Amount::from_units(2)).unwrap();
    let live = sensor("s", prog("this.a[]"), 0.0, Amount::from_units(50));
    let weak = sensor("w", prog("this.a[]"), 1.0, "0.1".parse().unwrap());
    let with = Network::new(vec![live.clone(), weak.clone()], field());
    let without = Network::new(vec![live], field());
    assert!(congruent(&with, &without, &e));
    assert!(congruent(&Network::new(vec![weak], field()), &Network::new(vec![], field()), &e));
    assert_eq!(canonical_network(&Network::new(vec![], field()), &e), "off");
}

#[test]
fn listing_order_does_not_matter() {
    let s = [
        sensor("a", prog("this.a[]"), 0.0, Amount::from_units(20)),
        sensor("b", prog("net.f[]"), 1.0, Amount::from_units(20)),
        sensor("c", Program::Idle, 2.0, Amount::from_units(20)),
    ];
    let n1 = Network::new(s.to_vec(), field());
    let n2 = Network::new(vec![s[2].clone(), s[0].clone(), s[1].clone()], field());
    assert!(congruent(&n1, &n2, &energy()));
}

#[test]
fn different_terms_are_not_congruent() {
    let n1 = Network::new(vec![sensor("a", prog("this.a[]"), 0.0, Amount::from_units(20))], field());
    let n2 = Network::new(vec![sensor("a", prog("this.c[]"), 0.0, Amount::from_units(20))], field());
    let n3 = Network::new(vec![sensor("a", prog("this.a[]"), 0.0, Amount::from_units(21))], field());
    assert!(!congruent(&n1, &n2, &energy()));
    assert!(!congruent(&n1, &n3, &energy()));
}

#[test]
fn substitution_examples() {
    let p = prog("net.forward[x, y]");
    let s = subst(&[("x", Value::Position(Pos::new(1.0, 2.0))), ("y", Value::measure(3.0))]);
    assert_eq!(substitute(&p, &s), prog("net.forward[(1, 2), 3]"));

    let p = prog("sense x in net.f[x, y]");
    let s = subst(&[("x", Value::measure(9.0)), ("y", Value::measure(7.0))]);
    assert_eq!(substitute(&p, &s), prog("sense x in net.f[x, 7]"));

    let m = parse_module("{ a = () idle }").unwrap();
    let s = subst(&[("x", Value::Module(m.clone()))]);
    assert_eq!(substitute(&prog("install x"), &s), Program::Install(Value::Module(m)));
}

#[test]
fn substitution_avoids_capture() {
    let p = prog("sense x in net.f[x, y]");
    let out = substitute(&p, &subst(&[("y", Value::var("x"))]));
    // the free `x` must stay free and the binder must not catch it
    assert_eq!(free_vars(&out).into_iter().collect::<Vec<_>>(), vec![Var::new("x")]);
    match out {
        Program::Sense { binders, body } => {
            assert_ne!(binders[0], Var::new("x"));
            assert_eq!(*body, Program::net("f", vec![Value::Var(binders[0].clone()), Value::var("x")]));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn fnv_reference_vectors() {
    assert_eq!(stable_hash(b""), 0xcbf2_9ce4_8422_2325);
    assert_eq!(stable_hash(b"a"), 0xaf63_dc4c_8601_ec8c);
    assert_eq!(stable_hash(b"foobar"), 0x8594_4171_f739_67e8);
}

fn arb_sensors() -> impl Strategy<Value = Vec<Sensor>> {
    prop::collection::vec((arb_program(), arb_module(), 0u8..40), 0..4).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (p, m, b))| {
                Sensor::new(&format!("s{i}"), p, m, Pos::new(i as f64, 0.0), 2.0, Amount::from_units(i64::from(b)))
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn parallel_laws(p in arb_program(), q in arb_program(), r in arb_program()) {
        prop_assert!(programs_congruent(&Program::par(p.clone(), q.clone()), &Program::par(q.clone(), p.clone())));
        prop_assert!(programs_congruent(
            &Program::par(Program::par(p.clone(), q.clone()), r.clone()),
            &Program::par(p.clone(), Program::par(q, r)),
        ));
        prop_assert!(programs_congruent(&Program::par(p.clone(), Program::Idle), &p));
    }

    #[test]
    fn sequence_laws(p in arb_program(), q in arb_program(), r in arb_program()) {
        prop_assert!(programs_congruent(&Program::seq(Program::Idle, p.clone()), &p));
        if !p.ends_in_parallel() {
            prop_assert!(programs_congruent(&Program::seq(p.clone(), Program::Idle), &p));
        }
        if !p.ends_in_parallel() && !q.ends_in_parallel() {
            prop_assert!(programs_congruent(
                &Program::seq(Program::seq(p.clone(), q.clone()), r.clone()),
                &Program::seq(p, Program::seq(q, r)),
            ));
        }
    }

    #[test]
    fn normalize_is_idempotent(p in arb_program()) {
        let once = normalize_program(&p);
        prop_assert_eq!(normalize_program(&once.to_program()), once.clone());
        prop_assert!(programs_congruent(&once.to_program(), &p));
    }

    #[test]
    fn module_normalization_is_idempotent(m in arb_module()) {
        let once = normalize_module(&m);
        prop_assert_eq!(normalize_module(&once), once);
    }

    #[test]
    fn sensor_composition_laws(sensors in arb_sensors(), rot in 0usize..4) {
        let e = energy();
        let n = Network::new(sensors.clone(), field());
        let mut shuffled = sensors.clone();
        if !shuffled.is_empty() {
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
        }
        prop_assert!(congruent(&n, &Network::new(shuffled, field()), &e));
        let mut padded = sensors;
        padded.push(sensor("gone", prog("this.a[]"), 9.0, Amount::from_units(3)));
        prop_assert!(congruent(&n, &Network::new(padded, field()), &e));
    }

    #[test]
    fn closing_substitution_leaves_no_free_vars(p in arb_program(), vals in prop::collection::vec(arb_ground_value(), 3)) {
        let s = subst(&[("x", vals[0].clone()), ("y", vals[1].clone()), ("z", vals[2].clone())]);
        prop_assert!(free_vars(&substitute(&p, &s)).is_empty());
        prop_assert_eq!(substitute(&p, &Subst::new()), p);
    }

    #[test]
    fn substitution_preserves_other_free_vars(p in arb_program()) {
        // renaming x to a fresh w neither loses nor captures anything
        let s = subst(&[("x", Value::var("w"))]);
        let expected: Vec<Var> = free_vars(&p)
            .into_iter()
            .map(|v| if v == Var::new("x") { Var::new("w") } else { v })
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        prop_assert_eq!(free_vars(&substitute(&p, &s)).into_iter().collect::<Vec<_>>(), expected);
    }
}
