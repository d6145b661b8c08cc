//! Free variables.

use std::collections::BTreeSet;

use super::ast::*;
use crate::network::Sensor;

pub type VarSet = BTreeSet<Var>;

/// Free names of a sensor: variables of its program, its module and any
/// captured sensors that are not bound by a `sense`, `let` or parameter list.
pub fn free_names(s: &Sensor) -> VarSet {
    let mut out = VarSet::new();
    for thread in &s.threads {
        for atom in thread {
            program_into(atom, &mut out);
        }
    }
    module_into(&s.module, &mut out);
    for inner in s.bag_sensors() {
        out.extend(free_names(inner));
    }
    out
}

pub fn free_vars(p: &Program) -> VarSet {
    let mut out = VarSet::new();
    program_into(p, &mut out);
    out
}

pub fn free_vars_value(v: &Value) -> VarSet {
    let mut out = VarSet::new();
    value_into(v, &mut out);
    out
}

pub fn free_vars_module(m: &Module) -> VarSet {
    let mut out = VarSet::new();
    module_into(m, &mut out);
    out
}

fn bound_into(inner: VarSet, bound: &[Var], out: &mut VarSet) {
    out.extend(inner.into_iter().filter(|v| !bound.contains(v)));
}

pub(crate) fn program_into(p: &Program, out: &mut VarSet) {
    match p {
        Program::Idle => {}
        Program::Par(a, b) | Program::Seq(a, b) => {
            program_into(a, out);
            program_into(b, out);
        }
        Program::Invoke { method, args, .. } => {
            value_into(method, out);
            args.iter().for_each(|a| value_into(a, out));
        }
        Program::Install(v) => value_into(v, out),
        Program::Sense { binders, body } => bound_into(free_vars(body), binders, out),
        Program::If {
            cond,
            then,
            otherwise,
        } => {
            expr_into(cond, out);
            program_into(then, out);
            program_into(otherwise, out);
        }
        Program::Let {
            var, args, body, ..
        } => {
            args.iter().for_each(|a| value_into(a, out));
            bound_into(free_vars(body), std::slice::from_ref(var), out);
        }
    }
}

pub(crate) fn expr_into(e: &Expr, out: &mut VarSet) {
    match e {
        Expr::Value(v) => value_into(v, out),
        Expr::Not(inner) => expr_into(inner, out),
        Expr::Builtin(_, args) => args.iter().for_each(|a| value_into(a, out)),
        Expr::Compare(_, a, b) => {
            expr_into(a, out);
            expr_into(b, out);
        }
    }
}

pub(crate) fn value_into(v: &Value, out: &mut VarSet) {
    match v {
        Value::Var(x) => {
            out.insert(x.clone());
        }
        Value::Module(m) => module_into(m, out),
        _ => {}
    }
}

fn module_into(m: &Module, out: &mut VarSet) {
    for (_, method) in m.iter() {
        bound_into(free_vars(&method.body), &method.params, out);
    }
}
