//! Term generators shared by the property tests.
#![allow(dead_code)]

use proptest::prelude::*;

use csn::syntax::ast::{Attr, Builtin, Expr, Module, Pos, Program, Target, Value, Var};

pub fn arb_ground_value() -> impl Strategy<Value = Value> {
    prop_oneof![
        (-40i32..40).prop_map(|n| Value::measure(f64::from(n) / 4.0)),
        (-9i32..9, -9i32..9).prop_map(|(x, y)| Value::Position(Pos::new(f64::from(x), f64::from(y)))),
        any::<bool>().prop_map(Value::Bool),
        Just(Value::Unit),
    ]
}

pub fn arb_value() -> impl Strategy<Value = Value> {
    prop_oneof![
        3 => arb_ground_value(),
        2 => prop::sample::select(vec!["x", "y", "z"]).prop_map(Value::var),
        1 => prop::sample::select(vec!["p", "r", "b"]).prop_map(|n| Value::SelfAttr(Attr::from_name(n).unwrap())),
    ]
}

fn arb_args() -> impl Strategy<Value = Vec<Value>> {
    prop::collection::vec(arb_value(), 0..3)
}

/// Invocations, `idle` and `install` of a variable.
pub fn arb_atom() -> impl Strategy<Value = Program> {
    prop_oneof![
        1 => Just(Program::Idle),
        3 => (prop::sample::select(vec!["a", "c", "d"]), arb_args())
            .prop_map(|(l, args)| Program::invoke(Target::This, l, args)),
        3 => (prop::sample::select(vec!["f", "g"]), arb_args())
            .prop_map(|(l, args)| Program::invoke(Target::Net, l, args)),
        1 => prop::sample::select(vec!["x", "y"]).prop_map(|x| Program::Install(Value::var(x))),
    ]
}

/// Small programs over `|`, `;`, `sense` and `if`. A sequence never has a
/// forking left side, so every generated term is also printable and
/// parseable.
pub fn arb_program() -> impl Strategy<Value = Program> {
    arb_atom().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Program::par(a, b)),
            (inner.clone(), inner.clone())
                .prop_filter("left side of `;` may not fork", |(a, _)| !a.ends_in_parallel())
                .prop_map(|(a, b)| Program::seq(a, b)),
            (prop::sample::select(vec!["x", "y", "z"]), inner.clone())
                .prop_map(|(x, body)| Program::sense(&[x], body)),
            (arb_value(), inner.clone(), inner).prop_map(|(v, t, e)| Program::If {
                cond: Expr::Value(v),
                then: Box::new(t),
                otherwise: Box::new(e),
            }),
        ]
    })
}

/// Programs including `let` and builtin conditions.
pub fn arb_program_ext() -> impl Strategy<Value = Program> {
    (arb_program(), arb_program(), prop::sample::select(vec!["x", "k"])).prop_map(|(a, b, v)| {
        Program::seq(
            Program::Let {
                var: Var::new(v),
                builtin: Builtin::Hash,
                args: vec![Value::SelfAttr(Attr::Position), Value::SelfAttr(Attr::Battery)],
                body: Box::new(Program::If {
                    cond: Expr::Not(Box::new(Expr::Builtin(Builtin::Lookup, vec![Value::var(v)]))),
                    then: Box::new(a),
                    otherwise: Box::new(Program::Idle),
                }),
            },
            b,
        )
    })
    .prop_filter("left side of `;` may not fork", |p| match p {
        Program::Seq(a, _) => !a.ends_in_parallel(),
        _ => true,
    })
}

pub fn label_set() -> Vec<&'static str> {
    vec!["a", "b", "c", "d", "e", "f"]
}

pub fn arb_module() -> impl Strategy<Value = Module> {
    prop::collection::btree_map(prop::sample::select(label_set()), (0usize..3, arb_atom()), 0..5).prop_map(|entries| {
        entries.into_iter().fold(Module::new(), |m, (l, (n, body))| {
            let params: Vec<&str> = ["x", "y", "z"][..n].to_vec();
            m.with(l, &params, body)
        })
    })
}
