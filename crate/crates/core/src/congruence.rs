//! Structural congruence and substitution.
//!
//! Programs are kept as a multiset of sequential threads. Each thread is a
//! list of atoms; a thread may end in a fork atom (a parallel composition
//! reached after its prefix has run).

use std::collections::BTreeMap;

use crate::engine::EnergyConfig;
use crate::network::{Network, Sensor};
use crate::syntax::ast::*;
use crate::syntax::names::{free_vars, free_vars_value, VarSet};
use crate::syntax::pretty;

/// A sequential thread: atoms executed left to right.
pub type Thread = Vec<Program>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CanonicalProgram {
    /// Sorted; empty for `idle`.
    pub threads: Vec<Thread>,
}

impl CanonicalProgram {
    pub fn is_idle(&self) -> bool {
        self.threads.is_empty()
    }

    pub fn to_program(&self) -> Program {
        Program::par_all(self.threads.iter().map(|t| thread_program(t)).collect())
    }
}

pub(crate) fn thread_program(thread: &[Program]) -> Program {
    Program::seq_all(thread.to_vec())
}

pub fn normalize_program(p: &Program) -> CanonicalProgram {
    let mut threads = threads_of(p);
    threads.sort();
    CanonicalProgram { threads }
}

/// Re-sorts a list of threads after a step, splitting any thread reduced to a
/// bare fork.
pub(crate) fn normalize_threads(threads: Vec<Thread>) -> Vec<Thread> {
    let mut out = Vec::with_capacity(threads.len());
    for t in threads {
        if t.len() == 1 && matches!(t[0], Program::Par(..)) {
            out.extend(threads_of(&t[0]));
        } else if !t.is_empty() {
            out.push(t);
        }
    }
    out.sort();
    out
}

fn threads_of(p: &Program) -> Vec<Thread> {
    match p {
        Program::Idle => Vec::new(),
        Program::Par(a, b) => {
            let mut ts = threads_of(a);
            ts.extend(threads_of(b));
            ts
        }
        Program::Seq(a, b) => {
            let left = threads_of(a);
            let mut right = threads_of(b);
            if left.is_empty() {
                return right;
            }
            if right.is_empty() {
                return left;
            }
            let ends_in_fork = left.len() == 1 && matches!(left[0].last(), Some(Program::Par(..)));
            if left.len() == 1 && !ends_in_fork {
                let mut thread = left.into_iter().next().unwrap();
                if right.len() == 1 {
                    thread.extend(right.pop().unwrap());
                } else {
                    right.sort();
                    thread.push(fork(right));
                }
                vec![thread]
            } else {
                // A parallel left operand of `;` has no reduction rule. It is
                // kept as one opaque atom that the engine refuses to step.
                let mut left = left;
                left.sort();
                right.sort();
                vec![vec![Program::seq(
                    CanonicalProgram { threads: left }.to_program(),
                    CanonicalProgram { threads: right }.to_program(),
                )]]
            }
        }
        atom => vec![vec![normalize_atom(atom)]],
    }
}

fn fork(threads: Vec<Thread>) -> Program {
    CanonicalProgram { threads }.to_program()
}

fn normalize_body(p: &Program) -> Program {
    normalize_program(p).to_program()
}

fn normalize_atom(p: &Program) -> Program {
    match p {
        Program::Invoke {
            target,
            method,
            args,
        } => Program::Invoke {
            target: *target,
            method: normalize_value(method),
            args: args.iter().map(normalize_value).collect(),
        },
        Program::Install(v) => Program::Install(normalize_value(v)),
        Program::Sense { binders, body } => Program::Sense {
            binders: binders.clone(),
            body: Box::new(normalize_body(body)),
        },
        Program::If {
            cond,
            then,
            otherwise,
        } => Program::If {
            cond: normalize_expr(cond),
            then: Box::new(normalize_body(then)),
            otherwise: Box::new(normalize_body(otherwise)),
        },
        Program::Let {
            var,
            builtin,
            args,
            body,
        } => Program::Let {
            var: var.clone(),
            builtin: *builtin,
            args: args.iter().map(normalize_value).collect(),
            body: Box::new(normalize_body(body)),
        },
        other => normalize_body(other),
    }
}

fn normalize_expr(e: &Expr) -> Expr {
    match e {
        Expr::Value(v) => Expr::Value(normalize_value(v)),
        Expr::Not(inner) => Expr::Not(Box::new(normalize_expr(inner))),
        Expr::Builtin(b, args) => Expr::Builtin(*b, args.iter().map(normalize_value).collect()),
        Expr::Compare(op, a, b) => Expr::Compare(
            *op,
            Box::new(normalize_expr(a)),
            Box::new(normalize_expr(b)),
        ),
    }
}

fn normalize_value(v: &Value) -> Value {
    match v {
        Value::Module(m) => Value::Module(normalize_module(m)),
        other => other.clone(),
    }
}

/// Normalizes every method body of a module.
pub fn normalize_module(m: &Module) -> Module {
    m.iter()
        .map(|(l, method)| (l.clone(), Method::new(method.params.clone(), normalize_body(&method.body))))
        .collect()
}

pub fn programs_congruent(a: &Program, b: &Program) -> bool {
    normalize_program(a) == normalize_program(b)
}

// ---- sensors and networks ----

/// Printed canonical form of a sensor, without its name.
pub fn canonical_sensor(s: &Sensor, energy: &EnergyConfig) -> String {
    let mut out = String::from("[");
    let threads: Vec<String> = s.threads.iter().map(|t| pretty::program(&thread_program(t))).collect();
    if threads.is_empty() {
        out.push_str("idle");
    } else {
        out.push_str(&threads.join(" | "));
    }
    out.push_str(", ");
    out.push_str(&pretty::module(&normalize_module(&s.module)));
    out.push_str(&format!("] @({}, {}) r={} b={}", s.position.x, s.position.y, s.radius, s.battery));
    if !s.heap.is_empty() {
        out.push_str(" heap");
        out.push_str(&s.heap.to_string());
    }
    let mut bag: Vec<String> = s
        .bag_sensors()
        .iter()
        .filter(|inner| !inner.is_exhausted(energy))
        .map(|inner| canonical_sensor(inner, energy))
        .collect();
    if !bag.is_empty() {
        bag.sort();
        let thread = s.bag.as_ref().map(|b| b.thread).unwrap_or(0);
        out.push_str(&format!(" bag#{thread}{{{}}}", bag.join(" | ")));
    }
    out
}

/// Canonical form of a network: sorted live sensors, exhausted ones dropped.
pub fn canonical_network(n: &Network, energy: &EnergyConfig) -> String {
    let mut sensors: Vec<String> = n
        .sensors
        .iter()
        .filter(|s| !(s.bag.is_none() && s.is_exhausted(energy)))
        .map(|s| canonical_sensor(s, energy))
        .collect();
    sensors.sort();
    if sensors.is_empty() {
        "off".to_string()
    } else {
        sensors.join(" ||\n")
    }
}

pub fn canonical_hash(n: &Network, energy: &EnergyConfig) -> u64 {
    stable_hash(canonical_network(n, energy).as_bytes())
}

/// Structural congruence of two networks over the same field.
pub fn congruent(a: &Network, b: &Network, energy: &EnergyConfig) -> bool {
    a.field == b.field && canonical_network(a, energy) == canonical_network(b, energy)
}

/// 64-bit FNV-1a. Stable across runs and platforms.
pub fn stable_hash(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

// ---- substitution ----

pub type Subst = BTreeMap<Var, Value>;

/// Capture-avoiding simultaneous substitution.
pub fn substitute(p: &Program, sigma: &Subst) -> Program {
    if sigma.is_empty() {
        return p.clone();
    }
    match p {
        Program::Idle => Program::Idle,
        Program::Par(a, b) => Program::par(substitute(a, sigma), substitute(b, sigma)),
        Program::Seq(a, b) => Program::seq(substitute(a, sigma), substitute(b, sigma)),
        Program::Invoke {
            target,
            method,
            args,
        } => Program::Invoke {
            target: *target,
            method: substitute_value(method, sigma),
            args: args.iter().map(|a| substitute_value(a, sigma)).collect(),
        },
        Program::Install(v) => Program::Install(substitute_value(v, sigma)),
        Program::Sense { binders, body } => {
            let (binders, body) = under_binders(binders, body, sigma);
            Program::Sense {
                binders,
                body: Box::new(body),
            }
        }
        Program::If {
            cond,
            then,
            otherwise,
        } => Program::If {
            cond: substitute_expr(cond, sigma),
            then: Box::new(substitute(then, sigma)),
            otherwise: Box::new(substitute(otherwise, sigma)),
        },
        Program::Let {
            var,
            builtin,
            args,
            body,
        } => {
            let args = args.iter().map(|a| substitute_value(a, sigma)).collect();
            let (mut vars, body) = under_binders(std::slice::from_ref(var), body, sigma);
            Program::Let {
                var: vars.pop().unwrap(),
                builtin: *builtin,
                args,
                body: Box::new(body),
            }
        }
    }
}

pub fn substitute_value(v: &Value, sigma: &Subst) -> Value {
    match v {
        Value::Var(x) => sigma.get(x).cloned().unwrap_or_else(|| v.clone()),
        Value::Module(m) => Value::Module(substitute_module(m, sigma)),
        other => other.clone(),
    }
}

pub fn substitute_expr(e: &Expr, sigma: &Subst) -> Expr {
    match e {
        Expr::Value(v) => Expr::Value(substitute_value(v, sigma)),
        Expr::Not(inner) => Expr::Not(Box::new(substitute_expr(inner, sigma))),
        Expr::Builtin(b, args) => Expr::Builtin(*b, args.iter().map(|a| substitute_value(a, sigma)).collect()),
        Expr::Compare(op, a, b) => Expr::Compare(
            *op,
            Box::new(substitute_expr(a, sigma)),
            Box::new(substitute_expr(b, sigma)),
        ),
    }
}

pub fn substitute_module(m: &Module, sigma: &Subst) -> Module {
    m.iter()
        .map(|(l, method)| {
            let (params, body) = under_binders(&method.params, &method.body, sigma);
            (l.clone(), Method::new(params, body))
        })
        .collect()
}

/// Pushes a substitution under a list of binders, dropping shadowed entries
/// and renaming binders that would capture a free variable of the range.
fn under_binders(binders: &[Var], body: &Program, sigma: &Subst) -> (Vec<Var>, Program) {
    let body_free = free_vars(body);
    let inner: Subst = sigma
        .iter()
        .filter(|(x, _)| !binders.contains(x) && body_free.contains(*x))
        .map(|(x, v)| (x.clone(), v.clone()))
        .collect();
    if inner.is_empty() {
        return (binders.to_vec(), body.clone());
    }
    let range_free: VarSet = inner.values().flat_map(free_vars_value).collect();
    let mut avoid: VarSet = body_free.clone();
    avoid.extend(range_free.iter().cloned());
    avoid.extend(inner.keys().cloned());
    avoid.extend(binders.iter().cloned());

    let mut renamed = inner;
    let mut new_binders = Vec::with_capacity(binders.len());
    for x in binders {
        if range_free.contains(x) {
            let fresh = fresh_var(x, &avoid);
            avoid.insert(fresh.clone());
            renamed.insert(x.clone(), Value::Var(fresh.clone()));
            new_binders.push(fresh);
        } else {
            new_binders.push(x.clone());
        }
    }
    (new_binders, substitute(body, &renamed))
}

fn fresh_var(base: &Var, avoid: &VarSet) -> Var {
    (1u64..)
        .map(|i| Var::new(format!("{}_{i}", base.as_str())))
        .find(|v| !avoid.contains(v))
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parser::parse_program;

    fn prog(src: &str) -> Program {
        parse_program(src).unwrap()
    }

    fn sigma(pairs: &[(&str, Value)]) -> Subst {
        pairs.iter().map(|(k, v)| (Var::new(*k), v.clone())).collect()
    }

    #[test]
    fn idle_is_unit() {
        let a = Program::this("a", vec![]);
        assert_eq!(
            normalize_program(&Program::par(Program::Idle, a.clone())).threads,
            vec![vec![a]]
        );
        let idles = Program::seq(Program::Idle, Program::seq(Program::Idle, Program::Idle));
        assert!(normalize_program(&idles).is_idle());
    }

    #[test]
    fn par_is_commutative_and_associative() {
        let (a, b, c) = (prog("this.a[]"), prog("this.b[]"), prog("this.c[]"));
        let left = Program::par(a.clone(), Program::par(b.clone(), c.clone()));
        let right = Program::par(Program::par(c, a), b);
        assert!(programs_congruent(&left, &right));
    }

    #[test]
    fn seq_is_associative_and_forks_split() {
        assert!(programs_congruent(&prog("(this.a[]; this.b[]); this.c[]"), &prog("this.a[]; this.b[]; this.c[]")));
        let p = normalize_program(&prog("this.a[]; (this.b[] | this.c[])"));
        assert_eq!(p.threads.len(), 1);
        let rest = normalize_threads(vec![p.threads[0][1..].to_vec()]);
        assert_eq!(rest, vec![vec![prog("this.b[]")], vec![prog("this.c[]")]]);
    }

    #[test]
    fn normalizes_nested_bodies() {
        assert!(programs_congruent(
            &prog("sense x in (idle | net.f[x] | this.a[])"),
            &prog("sense x in (this.a[] | net.f[x])")
        ));
        assert!(programs_congruent(
            &prog("install { a = () idle; this.b[] }"),
            &prog("install { a = () this.b[] }")
        ));
    }

    #[test]
    fn normalize_is_idempotent_on_forks() {
        let p = prog("this.a[]; (this.b[]; (this.c[] | this.d[]) | idle)");
        let once = normalize_program(&p);
        assert_eq!(normalize_program(&once.to_program()), once);
    }

    #[test]
    fn substitution_examples() {
        let s = sigma(&[("x", Value::Position(Pos::new(1.0, 2.0))), ("y", Value::measure(3.0))]);
        assert_eq!(pretty::program(&substitute(&prog("net.forward[x, y]"), &s)), "net.forward[(1, 2), 3]");

        let s = sigma(&[("x", Value::measure(9.0)), ("y", Value::measure(7.0))]);
        assert_eq!(pretty::program(&substitute(&prog("sense x in net.f[x, y]"), &s)), "sense x in net.f[x, 7]");

        let m = Module::new().with("a", &[], Program::Idle);
        let s = sigma(&[("x", Value::Module(m.clone()))]);
        assert_eq!(substitute(&prog("install x"), &s), Program::Install(Value::Module(m)));
    }

    #[test]
    fn substitution_avoids_capture() {
        let s = sigma(&[("y", Value::var("x"))]);
        let out = substitute(&prog("sense x in net.f[x, y]"), &s);
        assert_eq!(pretty::program(&out), "sense x_1 in net.f[x_1, x]");
    }

    #[test]
    fn substitution_reaches_module_bodies() {
        let s = sigma(&[("z", Value::measure(1.0))]);
        let out = substitute(&prog("install { f = (x) net.f[x, z]  g = (z) net.g[z] }"), &s);
        assert_eq!(pretty::program(&out), "install { f = (x) net.f[x, 1]  g = (z) net.g[z] }");
    }

    #[test]
    fn empty_substitution_is_identity() {
        let p = prog("sense x in if x < 3 then net.f[x, y] else idle");
        assert_eq!(substitute(&p, &Subst::new()), p);
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(stable_hash(b""), 0xcbf29ce484222325);
        assert_eq!(stable_hash(b"a"), 0xaf63dc4c8601ec8c);
    }
}
