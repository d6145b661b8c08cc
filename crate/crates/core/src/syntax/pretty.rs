//! Pretty-printer producing the concrete syntax accepted by the parser.

use std::fmt::Write;

use super::ast::*;
use crate::network::{Network, Sensor};

pub fn program(p: &Program) -> String {
    let mut out = String::new();
    write_program(&mut out, p);
    out
}

pub fn value(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v);
    out
}

pub fn module(m: &Module) -> String {
    let mut out = String::new();
    write_module(&mut out, m);
    out
}

pub fn expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

pub fn values(vs: &[Value]) -> String {
    let mut out = String::new();
    write_args(&mut out, vs);
    out
}

/// Whether the printed form ends in a construct that extends to the right.
fn ends_open(p: &Program) -> bool {
    match p {
        Program::Sense { .. } | Program::If { .. } | Program::Let { .. } => true,
        Program::Seq(_, b) | Program::Par(_, b) => ends_open(b),
        _ => false,
    }
}

fn write_parens(out: &mut String, p: &Program, parens: bool) {
    if parens {
        out.push('(');
        write_program(out, p);
        out.push(')');
    } else {
        write_program(out, p);
    }
}

pub(crate) fn write_program(out: &mut String, p: &Program) {
    match p {
        Program::Idle => out.push_str("idle"),
        Program::Par(a, b) => {
            write_parens(out, a, matches!(**a, Program::Par(..)) || ends_open(a));
            out.push_str(" | ");
            write_program(out, b);
        }
        Program::Seq(a, b) => {
            write_parens(
                out,
                a,
                matches!(**a, Program::Par(..) | Program::Seq(..)) || ends_open(a),
            );
            out.push_str("; ");
            write_parens(out, b, matches!(**b, Program::Par(..)));
        }
        Program::Invoke {
            target,
            method,
            args,
        } => {
            out.push_str(match target {
                Target::This => "this.",
                Target::Net => "net.",
            });
            write_value(out, method);
            write_args(out, args);
        }
        Program::Install(v) => {
            out.push_str("install ");
            write_value(out, v);
        }
        Program::Sense { binders, body } => {
            out.push_str("sense ");
            if binders.len() == 1 {
                out.push_str(binders[0].as_str());
            } else {
                out.push('(');
                out.push_str(&binders.iter().map(Var::as_str).collect::<Vec<_>>().join(", "));
                out.push(')');
            }
            out.push_str(" in ");
            write_program(out, body);
        }
        Program::If {
            cond,
            then,
            otherwise,
        } => {
            out.push_str("if ");
            write_expr(out, cond);
            out.push_str(" then ");
            write_program(out, then);
            out.push_str(" else ");
            write_program(out, otherwise);
        }
        Program::Let {
            var,
            builtin,
            args,
            body,
        } => {
            let _ = write!(out, "let {var} = {}", builtin.name());
            write_args(out, args);
            out.push_str(" in ");
            write_program(out, body);
        }
    }
}

fn write_args(out: &mut String, args: &[Value]) {
    out.push('[');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_value(out, a);
    }
    out.push(']');
}

pub(crate) fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Var(x) => out.push_str(x.as_str()),
        Value::Label(l) => out.push_str(l.as_str()),
        Value::SelfAttr(a) => out.push_str(a.name()),
        Value::Measure(n) => {
            let _ = write!(out, "{n}");
        }
        Value::Position(p) => {
            let _ = write!(out, "({}, {})", p.x, p.y);
        }
        Value::Battery(b) => {
            let _ = write!(out, "{b}");
        }
        Value::Module(m) => write_module(out, m),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Key(k) => {
            let _ = write!(out, "#{:016x}", k.0);
        }
        Value::Unit => out.push('_'),
    }
}

fn write_method(out: &mut String, label: &Label, m: &Method) {
    let params: Vec<&str> = m.params.iter().map(Var::as_str).collect();
    let _ = write!(out, "{label} = ({}) ", params.join(", "));
    write_program(out, &m.body);
}

pub(crate) fn write_module(out: &mut String, m: &Module) {
    if m.is_empty() {
        out.push_str("{}");
        return;
    }
    out.push_str("{ ");
    for (i, (label, method)) in m.iter().enumerate() {
        if i > 0 {
            out.push_str("  ");
        }
        write_method(out, label, method);
    }
    out.push_str(" }");
}

/// Module literal with one method per line.
pub fn module_block(m: &Module, indent: usize) -> String {
    if m.is_empty() {
        return "{}".to_string();
    }
    let pad = " ".repeat(indent + 2);
    let mut out = String::from("{\n");
    for (label, method) in m.iter() {
        out.push_str(&pad);
        write_method(&mut out, label, method);
        out.push('\n');
    }
    out.push_str(&" ".repeat(indent));
    out.push('}');
    out
}

pub(crate) fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Value(v) => write_value(out, v),
        Expr::Not(inner) => {
            out.push('!');
            if matches!(**inner, Expr::Compare(..)) {
                out.push('(');
                write_expr(out, inner);
                out.push(')');
            } else {
                write_expr(out, inner);
            }
        }
        Expr::Builtin(b, args) => {
            out.push_str(b.name());
            write_args(out, args);
        }
        Expr::Compare(op, a, b) => {
            for (i, side) in [a, b].into_iter().enumerate() {
                if i == 1 {
                    let _ = write!(out, " {} ", op.symbol());
                }
                if matches!(**side, Expr::Compare(..)) {
                    out.push('(');
                    write_expr(out, side);
                    out.push(')');
                } else {
                    write_expr(out, side);
                }
            }
        }
    }
}

fn write_sensor(out: &mut String, s: &Sensor) {
    out.push('[');
    write_program(out, &s.program());
    out.push_str(", ");
    out.push_str(&module_block(&s.module, 0));
    let _ = write!(out, "] {}", s.id);
    if let Some(bag) = &s.bag {
        out.push_str(" {");
        for (i, inner) in bag.sensors.iter().enumerate() {
            if i > 0 {
                out.push_str(" | ");
            }
            write_sensor(out, inner);
        }
        out.push('}');
    }
}

/// A self-contained network file: field, attribute table, then sensors with
/// their modules inlined. Heaps are runtime state and are not printed.
pub fn network(net: &Network) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "@field {}", net.field);
    for s in net.all_sensors() {
        let _ = writeln!(
            out,
            "@{} position=({}, {}) radius={} battery={}",
            s.id, s.position.x, s.position.y, s.radius, s.battery
        );
    }
    out.push('\n');
    for (i, s) in net.sensors.iter().enumerate() {
        if i > 0 {
            out.push_str(" |\n");
        }
        write_sensor(&mut out, s);
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parser::{parse_module, parse_program};

    #[test]
    fn basic_forms() {
        assert_eq!(program(&Program::Idle), "idle");
        assert_eq!(program(&Program::this("sample", vec![])), "this.sample[]");
        assert_eq!(
            program(&parse_program("net.sample[]; sense x in net.forward[p,x]").unwrap()),
            "net.sample[]; sense x in net.forward[p, x]"
        );
    }

    #[test]
    fn parenthesizes_where_needed() {
        let cases = [
            "(sense x in this.a[x]); this.b[]",
            "(sense x in this.a[x]) | this.b[]",
            "this.a[] | this.b[] | this.c[]",
            "(this.a[] | this.b[]) | this.c[]",
            "this.a[]; (this.b[] | this.c[])",
            "(this.a[]; this.b[]); this.c[]",
            "if !(x < 2) then idle else net.f[]",
            "if lookup[k] == true then (if x then idle else idle); this.z[] else idle",
        ];
        for src in cases {
            let p = parse_program(src).unwrap();
            assert_eq!(program(&p), src);
        }
    }

    #[test]
    fn module_round_trip() {
        let m = parse_module("{ a = (x) install x; net.a[x]  b = () idle }").unwrap();
        assert_eq!(module(&m), "{ a = (x) install x; net.a[x]  b = () idle }");
        assert_eq!(parse_module(&module_block(&m, 2)).unwrap(), m);
    }
}
