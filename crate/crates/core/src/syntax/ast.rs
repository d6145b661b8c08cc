//! Abstract syntax of programs, values and modules.

use std::collections::BTreeMap;
use std::fmt;

use crate::num::{Amount, Num};

/// Method name. Labels live in a namespace disjoint from variables: they only
/// occur in method position of an invocation or as definition heads.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub String);

impl Label {
    pub fn new(name: impl Into<String>) -> Self {
        Label(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub String);

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        Var(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Identifiers that can never be bound by a program.
pub const RESERVED: [&str; 3] = ["p", "r", "b"];

/// An attribute of the executing sensor, read through `p`, `r` or `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Attr {
    Position,
    Radius,
    Battery,
}

impl Attr {
    pub fn from_name(name: &str) -> Option<Attr> {
        match name {
            "p" => Some(Attr::Position),
            "r" => Some(Attr::Radius),
            "b" => Some(Attr::Battery),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Attr::Position => "p",
            Attr::Radius => "r",
            Attr::Battery => "b",
        }
    }
}

/// A point in the 2D deployment plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub x: Num,
    pub y: Num,
}

impl Pos {
    pub fn new(x: f64, y: f64) -> Self {
        Pos {
            x: Num::new(x),
            y: Num::new(y),
        }
    }

    pub fn distance(&self, other: &Pos) -> f64 {
        (self.x.get() - other.x.get()).hypot(self.y.get() - other.y.get())
    }
}

/// Opaque heap key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key(pub u64);

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Var(Var),
    /// Only meaningful in method position.
    Label(Label),
    SelfAttr(Attr),
    Measure(Num),
    Position(Pos),
    Battery(Amount),
    Module(Module),
    Bool(bool),
    Key(Key),
    /// The `_` placeholder.
    Unit,
}

impl Value {
    pub fn measure(v: f64) -> Value {
        Value::Measure(Num::new(v))
    }

    pub fn var(name: &str) -> Value {
        Value::Var(Var::new(name))
    }

    pub fn label(name: &str) -> Value {
        Value::Label(Label::new(name))
    }

    /// True when the value contains no variables and no unresolved attributes
    /// at top level. Module bodies are not inspected.
    pub fn is_ground(&self) -> bool {
        !matches!(self, Value::Var(_) | Value::SelfAttr(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    This,
    Net,
}

/// Parameterized abstraction `(x1, ..., xn) P`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Method {
    pub params: Vec<Var>,
    pub body: Program,
}

impl Method {
    pub fn new(params: Vec<Var>, body: Program) -> Self {
        Method { params, body }
    }
}

/// A finite map from labels to abstractions.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Module {
    methods: BTreeMap<Label, Method>,
}

impl Module {
    pub fn new() -> Self {
        Module::default()
    }

    /// Adds a method, returning the previous definition if the label was taken.
    pub fn insert(&mut self, label: Label, method: Method) -> Option<Method> {
        self.methods.insert(label, method)
    }

    pub fn with(mut self, label: &str, params: &[&str], body: Program) -> Self {
        self.insert(
            Label::new(label),
            Method::new(params.iter().map(|p| Var::new(*p)).collect(), body),
        );
        self
    }

    pub fn get(&self, label: &Label) -> Option<&Method> {
        self.methods.get(label)
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.methods.contains_key(label)
    }

    pub fn len(&self) -> usize {
        self.methods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.methods.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Label, &Method)> {
        self.methods.iter()
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.methods.keys()
    }

    /// `self + other`: methods of `other` are added, replacing the ones with
    /// the same label.
    pub fn install(&mut self, other: &Module) {
        for (label, method) in other.iter() {
            self.methods.insert(label.clone(), method.clone());
        }
    }

    pub fn merged(&self, other: &Module) -> Module {
        let mut m = self.clone();
        m.install(other);
        m
    }
}

impl FromIterator<(Label, Method)> for Module {
    fn from_iter<I: IntoIterator<Item = (Label, Method)>>(iter: I) -> Self {
        Module {
            methods: iter.into_iter().collect(),
        }
    }
}

/// Heap and key builtins usable as expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Builtin {
    Lookup,
    Get,
    Hash,
}

impl Builtin {
    pub fn from_name(name: &str) -> Option<Builtin> {
        match name {
            "lookup" => Some(Builtin::Lookup),
            "get" => Some(Builtin::Get),
            "hash" => Some(Builtin::Hash),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Lookup => "lookup",
            Builtin::Get => "get",
            Builtin::Hash => "hash",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }
}

/// Condition of an `if`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Value(Value),
    Not(Box<Expr>),
    Builtin(Builtin, Vec<Value>),
    Compare(CmpOp, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Program {
    Idle,
    Par(Box<Program>, Box<Program>),
    Seq(Box<Program>, Box<Program>),
    Invoke {
        target: Target,
        method: Value,
        args: Vec<Value>,
    },
    Install(Value),
    Sense {
        binders: Vec<Var>,
        body: Box<Program>,
    },
    If {
        cond: Expr,
        then: Box<Program>,
        otherwise: Box<Program>,
    },
    Let {
        var: Var,
        builtin: Builtin,
        args: Vec<Value>,
        body: Box<Program>,
    },
}

impl Program {
    pub fn par(a: Program, b: Program) -> Program {
        Program::Par(Box::new(a), Box::new(b))
    }

    pub fn seq(a: Program, b: Program) -> Program {
        Program::Seq(Box::new(a), Box::new(b))
    }

    pub fn invoke(target: Target, label: &str, args: Vec<Value>) -> Program {
        Program::Invoke {
            target,
            method: Value::label(label),
            args,
        }
    }

    pub fn this(label: &str, args: Vec<Value>) -> Program {
        Program::invoke(Target::This, label, args)
    }

    pub fn net(label: &str, args: Vec<Value>) -> Program {
        Program::invoke(Target::Net, label, args)
    }

    pub fn sense(binders: &[&str], body: Program) -> Program {
        Program::Sense {
            binders: binders.iter().map(|b| Var::new(*b)).collect(),
            body: Box::new(body),
        }
    }

    /// Folds a list of programs into a right-nested parallel composition.
    pub fn par_all(mut parts: Vec<Program>) -> Program {
        match parts.pop() {
            None => Program::Idle,
            Some(last) => parts
                .into_iter()
                .rev()
                .fold(last, |acc, p| Program::par(p, acc)),
        }
    }

    /// Folds a list of programs into a right-nested sequence.
    pub fn seq_all(mut parts: Vec<Program>) -> Program {
        match parts.pop() {
            None => Program::Idle,
            Some(last) => parts
                .into_iter()
                .rev()
                .fold(last, |acc, p| Program::seq(p, acc)),
        }
    }

    /// True if the program can fork at its end: a parallel composition in
    /// tail position, possibly under `sense`, `if` or `let`.
    pub fn ends_in_parallel(&self) -> bool {
        match self {
            Program::Par(a, b) => match (is_idle_like(a), is_idle_like(b)) {
                (true, true) => false,
                (true, false) => b.ends_in_parallel(),
                (false, true) => a.ends_in_parallel(),
                (false, false) => true,
            },
            Program::Seq(_, b) => b.ends_in_parallel(),
            Program::Sense { body, .. } | Program::Let { body, .. } => body.ends_in_parallel(),
            Program::If {
                then, otherwise, ..
            } => then.ends_in_parallel() || otherwise.ends_in_parallel(),
            _ => false,
        }
    }
}

fn is_idle_like(p: &Program) -> bool {
    match p {
        Program::Idle => true,
        Program::Par(a, b) | Program::Seq(a, b) => is_idle_like(a) && is_idle_like(b),
        _ => false,
    }
}
