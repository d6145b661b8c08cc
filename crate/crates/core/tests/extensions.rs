use std::collections::HashSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use csn::extensions::{eval_builtin, eval_expr, hash_key, ExtError, Extensions, Heap, HeapCtx};
use csn::num::Amount;
use csn::syntax::ast::{Builtin, CmpOp, Expr, Key, Pos, Value};

fn state(nonce: bool) -> Extensions {
    Extensions { state: true, events: false, nonce }
}

fn key_of(v: Value) -> Key {
    match v {
        Value::Key(k) => k,
        other => panic!("not a key: {other:?}"),
    }
}

#[test]
fn heap_put_lookup_get() {
    let mut h = Heap::default();
    let (k1, k2) = (Key(1), Key(2));
    assert!(!h.lookup(&k1));
    h.put(k1, Value::Unit);
    assert!(h.lookup(&k1));
    assert!(!h.lookup(&k2));
    h.put(k1, Value::measure(3.0));
    h.put(k1, Value::measure(4.0));
    assert_eq!(h.get(&k1), Some(&Value::measure(4.0)));
    assert_eq!(h.len(), 1);
}

#[test]
fn builtins_read_the_heap() {
    let mut h = Heap::default();
    h.put(Key(7), Value::Bool(true));
    let mut nonce = 0;
    let mut ctx = HeapCtx { heap: &h, nonce: &mut nonce, ext: state(false) };
    assert_eq!(eval_builtin(Builtin::Lookup, &[Value::Key(Key(7))], &mut ctx), Ok(Value::Bool(true)));
    assert_eq!(eval_builtin(Builtin::Lookup, &[Value::Key(Key(8))], &mut ctx), Ok(Value::Bool(false)));
    assert_eq!(eval_builtin(Builtin::Get, &[Value::Key(Key(7))], &mut ctx), Ok(Value::Bool(true)));
    assert!(matches!(eval_builtin(Builtin::Get, &[Value::Key(Key(8))], &mut ctx), Err(ExtError::MissingKey(_))));
    assert!(matches!(eval_builtin(Builtin::Lookup, &[Value::measure(1.0)], &mut ctx), Err(ExtError::NotAKey(_))));
    assert!(matches!(eval_builtin(Builtin::Lookup, &[Value::var("k")], &mut ctx), Err(ExtError::NotGround(_))));
}

#[test]
fn builtins_need_the_state_extension() {
    let h = Heap::default();
    let mut nonce = 0;
    let mut ctx = HeapCtx { heap: &h, nonce: &mut nonce, ext: Extensions::default() };
    assert_eq!(eval_builtin(Builtin::Hash, &[Value::Unit], &mut ctx), Err(ExtError::Disabled("hash")));
    let not = Expr::Not(Box::new(Expr::Value(Value::Bool(true))));
    assert!(eval_expr(&not, &mut ctx).is_err());
    assert_eq!(eval_expr(&Expr::Value(Value::Bool(true)), &mut ctx), Ok(Value::Bool(true)));
}

#[test]
fn hash_of_position_and_battery_is_deterministic() {
    let args = [Value::Position(Pos::new(1.0, 2.0)), Value::Battery(Amount::from_units(5))];
    let h = Heap::default();
    let mut nonce = 0;
    let mut ctx = HeapCtx { heap: &h, nonce: &mut nonce, ext: state(false) };
    let a = eval_builtin(Builtin::Hash, &args, &mut ctx).unwrap();
    let b = eval_builtin(Builtin::Hash, &args, &mut ctx).unwrap();
    assert_eq!(a, b);
    assert_eq!(key_of(a), hash_key(&args, None));
}

#[test]
fn nonce_salts_repeated_hashes() {
    let args = [Value::Position(Pos::new(1.0, 2.0)), Value::Battery(Amount::from_units(5))];
    let h = Heap::default();
    let mut nonce = 0;
    let mut ctx = HeapCtx { heap: &h, nonce: &mut nonce, ext: state(true) };
    let a = eval_builtin(Builtin::Hash, &args, &mut ctx).unwrap();
    let b = eval_builtin(Builtin::Hash, &args, &mut ctx).unwrap();
    assert_ne!(a, b);
    assert_eq!(nonce, 2);
}

#[test]
fn comparisons() {
    let h = Heap::default();
    let mut nonce = 0;
    let mut ctx = HeapCtx { heap: &h, nonce: &mut nonce, ext: state(false) };
    let cmp = |op, a: Value, b: Value| Expr::Compare(op, Box::new(Expr::Value(a)), Box::new(Expr::Value(b)));
    let battery = Value::Battery(Amount::from_units(3));
    assert_eq!(eval_expr(&cmp(CmpOp::Lt, Value::measure(2.0), battery.clone()), &mut ctx), Ok(Value::Bool(true)));
    assert_eq!(eval_expr(&cmp(CmpOp::Ge, Value::measure(2.0), battery), &mut ctx), Ok(Value::Bool(false)));
    assert_eq!(eval_expr(&cmp(CmpOp::Eq, Value::Unit, Value::Unit), &mut ctx), Ok(Value::Bool(true)));
    assert!(eval_expr(&cmp(CmpOp::Lt, Value::Bool(true), Value::measure(1.0)), &mut ctx).is_err());
}

#[test]
fn extension_lists_parse() {
    assert_eq!(Extensions::parse_list("state, events").unwrap(), Extensions::all());
    assert!(Extensions::parse_list("state,teleport").is_err());
    assert_eq!(Extensions::parse_list("").unwrap(), Extensions::default());
}

/// 10^5 random argument lists with distinct printed forms yield 10^5
/// distinct keys.
#[test]
fn hash_collision_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut seen_args = HashSet::new();
    let mut seen_keys = HashSet::new();
    while seen_args.len() < 100_000 {
        let args = vec![
            Value::Position(Pos::new(f64::from(rng.random_range(-500..500)), f64::from(rng.random_range(-500..500)))),
            Value::Battery(Amount::from_micros(rng.random_range(0..1_000_000_000))),
        ];
        if seen_args.insert(args.clone()) {
            assert!(seen_keys.insert(hash_key(&args, None)), "collision on {args:?}");
        }
    }
}

proptest! {
    #[test]
    fn put_is_last_write_wins(writes in prop::collection::vec((0u64..8, -5i32..5), 1..30)) {
        let mut h = Heap::default();
        let mut oracle = std::collections::HashMap::new();
        for (k, v) in &writes {
            h.put(Key(*k), Value::measure(f64::from(*v)));
            oracle.insert(*k, f64::from(*v));
        }
        for k in 0..8u64 {
            prop_assert_eq!(h.lookup(&Key(k)), oracle.contains_key(&k));
            prop_assert_eq!(h.get(&Key(k)).cloned(), oracle.get(&k).map(|v| Value::measure(*v)));
        }
    }
}
