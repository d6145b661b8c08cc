//! Optional features: per-sensor heap, key hashing, boolean conditions and
//! event handlers.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::congruence::stable_hash;
use crate::syntax::ast::{Builtin, CmpOp, Expr, Key, Value};
use crate::syntax::pretty;

/// Intrinsics that append to the network log when invoked on `this`.
pub const LOG_INTRINSICS: [&str; 3] = ["log_position_and_value", "log_position_and_power", "sing_bell"];

/// Heap write, available with the `state` feature.
pub const PUT: &str = "put";

/// Handler invoked by events.
pub const HANDLE: &str = "handle";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Extensions {
    /// Heap builtins, `let`, and boolean operators.
    pub state: bool,
    /// The event rule.
    pub events: bool,
    /// Salt `hash` results with a per-sensor counter.
    pub nonce: bool,
}

impl Extensions {
    pub fn all() -> Self {
        Extensions {
            state: true,
            events: true,
            nonce: false,
        }
    }

    /// Parses a comma-separated feature list such as `state,events`.
    pub fn parse_list(list: &str) -> Result<Self, String> {
        let mut ext = Extensions::default();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "state" => ext.state = true,
                "events" => ext.events = true,
                "nonce" => ext.nonce = true,
                other => return Err(format!("unknown extension `{other}` (expected state, events, nonce)")),
            }
        }
        Ok(ext)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtError {
    #[error("`{0}` requires the `state` extension")]
    Disabled(&'static str),
    #[error("condition is not a boolean: {0}")]
    NotBool(String),
    #[error("cannot compare {0} with {1}")]
    Incomparable(String, String),
    #[error("no heap entry for key {0}")]
    MissingKey(String),
    #[error("not a key: {0}")]
    NotAKey(String),
    #[error("`{name}` expects {expected} argument(s), got {got}")]
    Arity {
        name: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("unresolved value {0} in a builtin")]
    NotGround(String),
}

/// Per-sensor map from keys to values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Heap {
    entries: BTreeMap<Key, Value>,
}

impl Heap {
    pub fn put(&mut self, k: Key, v: Value) {
        self.entries.insert(k, v);
    }

    pub fn get(&self, k: &Key) -> Option<&Value> {
        self.entries.get(k)
    }

    pub fn lookup(&self, k: &Key) -> bool {
        self.entries.contains_key(k)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Key, &Value)> {
        self.entries.iter()
    }
}

impl fmt::Display for Heap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "#{:016x}={}", k.0, pretty::value(v))?;
        }
        f.write_str("}")
    }
}

/// Deterministic key for a list of ground values, optionally salted.
pub fn hash_key(args: &[Value], salt: Option<u64>) -> Key {
    let mut text = pretty::values(args);
    if let Some(n) = salt {
        text.push_str(&format!("#{n}"));
    }
    Key(stable_hash(text.as_bytes()))
}

/// Mutable view of a sensor used while evaluating builtins.
pub struct HeapCtx<'a> {
    pub heap: &'a Heap,
    pub nonce: &'a mut u64,
    pub ext: Extensions,
}

fn key_arg(name: &'static str, args: &[Value]) -> Result<Key, ExtError> {
    if args.len() != 1 {
        return Err(ExtError::Arity {
            name,
            expected: 1,
            got: args.len(),
        });
    }
    match &args[0] {
        Value::Key(k) => Ok(*k),
        other => Err(ExtError::NotAKey(pretty::value(other))),
    }
}

/// Evaluates `lookup`, `get` or `hash` on ground arguments.
pub fn eval_builtin(b: Builtin, args: &[Value], ctx: &mut HeapCtx<'_>) -> Result<Value, ExtError> {
    if !ctx.ext.state {
        return Err(ExtError::Disabled(b.name()));
    }
    if let Some(v) = args.iter().find(|v| !v.is_ground()) {
        return Err(ExtError::NotGround(pretty::value(v)));
    }
    match b {
        Builtin::Lookup => Ok(Value::Bool(ctx.heap.lookup(&key_arg("lookup", args)?))),
        Builtin::Get => {
            let k = key_arg("get", args)?;
            ctx.heap
                .get(&k)
                .cloned()
                .ok_or_else(|| ExtError::MissingKey(format!("#{:016x}", k.0)))
        }
        Builtin::Hash => {
            let salt = if ctx.ext.nonce {
                *ctx.nonce += 1;
                Some(*ctx.nonce)
            } else {
                None
            };
            Ok(Value::Key(hash_key(args, salt)))
        }
    }
}

fn as_number(v: &Value) -> Option<f64> {
    match v {
        Value::Measure(n) => Some(n.get()),
        Value::Battery(a) => Some(a.to_f64()),
        _ => None,
    }
}

pub fn compare(op: CmpOp, a: &Value, b: &Value) -> Result<bool, ExtError> {
    if let (Value::Battery(x), Value::Battery(y)) = (a, b) {
        return Ok(cmp_holds(op, x.cmp(y)));
    }
    if let (Some(x), Some(y)) = (as_number(a), as_number(b)) {
        return Ok(cmp_holds(op, x.total_cmp(&y)));
    }
    match op {
        CmpOp::Eq => Ok(a == b),
        CmpOp::Ne => Ok(a != b),
        _ => Err(ExtError::Incomparable(pretty::value(a), pretty::value(b))),
    }
}

fn cmp_holds(op: CmpOp, ord: std::cmp::Ordering) -> bool {
    use std::cmp::Ordering::*;
    match op {
        CmpOp::Lt => ord == Less,
        CmpOp::Le => ord != Greater,
        CmpOp::Gt => ord == Greater,
        CmpOp::Ge => ord != Less,
        CmpOp::Eq => ord == Equal,
        CmpOp::Ne => ord != Equal,
    }
}

/// Evaluates a condition whose values are already resolved. A bare value
/// needs no extension; operators and builtins need `state`.
pub fn eval_expr(e: &Expr, ctx: &mut HeapCtx<'_>) -> Result<Value, ExtError> {
    match e {
        Expr::Value(v) if v.is_ground() => Ok(v.clone()),
        Expr::Value(v) => Err(ExtError::NotGround(pretty::value(v))),
        Expr::Not(inner) => {
            if !ctx.ext.state {
                return Err(ExtError::Disabled("!"));
            }
            match eval_expr(inner, ctx)? {
                Value::Bool(b) => Ok(Value::Bool(!b)),
                other => Err(ExtError::NotBool(pretty::value(&other))),
            }
        }
        Expr::Builtin(b, args) => eval_builtin(*b, args, ctx),
        Expr::Compare(op, a, b) => {
            if !ctx.ext.state {
                return Err(ExtError::Disabled(op.symbol()));
            }
            let a = eval_expr(a, ctx)?;
            let b = eval_expr(b, ctx)?;
            Ok(Value::Bool(compare(*op, &a, &b)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Amount;
    use crate::syntax::ast::Pos;

    fn ctx<'a>(heap: &'a Heap, nonce: &'a mut u64, ext: Extensions) -> HeapCtx<'a> {
        HeapCtx { heap, nonce, ext }
    }

    #[test]
    fn put_lookup_get() {
        let mut heap = Heap::default();
        let (k1, k2) = (Key(1), Key(2));
        assert!(!heap.lookup(&k1));
        heap.put(k1, Value::Unit);
        assert!(heap.lookup(&k1));
        assert!(!heap.lookup(&k2));
        heap.put(k1, Value::measure(2.0));
        assert_eq!(heap.get(&k1), Some(&Value::measure(2.0)));
    }

    #[test]
    fn hash_is_deterministic_without_nonce() {
        let args = [Value::Position(Pos::new(1.0, 2.0)), Value::Battery(Amount::from_units(5))];
        let heap = Heap::default();
        let mut n = 0;
        let mut c = ctx(&heap, &mut n, Extensions::all());
        let a = eval_builtin(Builtin::Hash, &args, &mut c).unwrap();
        let b = eval_builtin(Builtin::Hash, &args, &mut c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nonce_separates_repeated_calls() {
        let args = [Value::measure(1.0)];
        let heap = Heap::default();
        let mut n = 0;
        let ext = Extensions {
            nonce: true,
            ..Extensions::all()
        };
        let mut c = ctx(&heap, &mut n, ext);
        let a = eval_builtin(Builtin::Hash, &args, &mut c).unwrap();
        let b = eval_builtin(Builtin::Hash, &args, &mut c).unwrap();
        assert_ne!(a, b);
        assert_eq!(n, 2);
    }

    #[test]
    fn builtins_need_the_state_flag() {
        let heap = Heap::default();
        let mut n = 0;
        let mut c = ctx(&heap, &mut n, Extensions::default());
        assert_eq!(
            eval_builtin(Builtin::Lookup, &[Value::Key(Key(3))], &mut c),
            Err(ExtError::Disabled("lookup"))
        );
        let e = Expr::Not(Box::new(Expr::Value(Value::Bool(true))));
        assert_eq!(eval_expr(&e, &mut c), Err(ExtError::Disabled("!")));
        assert_eq!(eval_expr(&Expr::Value(Value::Bool(true)), &mut c), Ok(Value::Bool(true)));
    }

    #[test]
    fn numeric_comparison_mixes_measures_and_batteries() {
        let b = Value::Battery(Amount::from_units(3));
        assert!(compare(CmpOp::Lt, &Value::measure(2.5), &b).unwrap());
        assert!(compare(CmpOp::Eq, &Value::measure(3.0), &b).unwrap());
        assert!(compare(CmpOp::Lt, &Value::Unit, &b).is_err());
        assert!(compare(CmpOp::Ne, &Value::Unit, &b).unwrap());
    }

    #[test]
    fn parses_feature_lists() {
        let e = Extensions::parse_list("state, events").unwrap();
        assert!(e.state && e.events && !e.nonce);
        assert!(Extensions::parse_list("membranes").is_err());
    }
}
