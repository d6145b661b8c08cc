//! Recursive descent parser for `.csn` sources.
//!
//! Precedence, loosest first: `|`, `;`, then atoms. `sense`, `if` and `let`
//! extend as far right as possible. A parallel composition may not be the
//! left operand of `;`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use crate::field::{FieldError, FieldSpec};
use crate::network::{Network, NetworkError, Sensor};
use crate::num::{Amount, Num};

const KEYWORDS: [&str; 12] = [
    "idle", "this", "net", "install", "sense", "in", "if", "then", "else", "let", "true", "false",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("{0}")]
    Lex(String),
    #[error("method `{0}` is defined twice in the same module")]
    DuplicateMethod(String),
    #[error("`{0}` is reserved for the executing sensor's attributes and cannot be bound")]
    ReservedName(String),
    #[error("`{0}` is a keyword")]
    Keyword(String),
    #[error("`{0}` is bound twice in the same binder list")]
    DuplicateBinder(String),
    #[error("a parallel composition cannot be the left operand of `;`")]
    ParallelBeforeSequence,
    #[error("unknown module `{0}`")]
    UnknownModule(String),
    #[error("module `{0}` is defined twice")]
    DuplicateModule(String),
    #[error("module parameters may only name sensor attributes p, r, b (found `{0}`)")]
    ModuleParam(String),
    #[error("sensor `{0}` is declared twice")]
    DuplicateSensor(String),
    #[error("sensor `{sensor}` has no `{attr}` attribute")]
    MissingAttribute { sensor: String, attr: String },
    #[error("attributes given for undeclared sensor `{0}`")]
    UnknownSensor(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("invalid number: {0}")]
    BadNumber(String),
    #[error("field: {0}")]
    Field(#[from] FieldError),
    #[error("invalid network: {0}")]
    Network(#[from] NetworkError),
    #[error("a broadcasting sensor needs a thread headed by a `net` invocation")]
    BadBag,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub col: usize,
}

type PResult<T> = Result<T, ParseError>;

/// Parses a standalone program. Module names cannot be referenced.
pub fn parse_program(src: &str) -> PResult<Program> {
    let mut p = Parser::new(src)?;
    let prog = p.program()?;
    p.expect_eof()?;
    Ok(prog)
}

/// Parses a standalone module literal `{ l = (x) P ... }`.
pub fn parse_module(src: &str) -> PResult<Module> {
    let mut p = Parser::new(src)?;
    let m = p.module_literal()?;
    p.expect_eof()?;
    Ok(m)
}

pub fn parse_value(src: &str) -> PResult<Value> {
    let mut p = Parser::new(src)?;
    let v = p.value()?;
    p.expect_eof()?;
    Ok(v)
}

/// Parses a network configuration file.
pub fn parse_network(src: &str) -> PResult<Network> {
    parse_network_in(src, None)
}

/// Like [`parse_network`], resolving grid field files relative to `base`.
pub fn parse_network_in(src: &str, base: Option<&Path>) -> PResult<Network> {
    // `@field` directives take the rest of the line verbatim.
    let mut field_text = None;
    let mut cleaned = String::with_capacity(src.len());
    for (n, line) in src.lines().enumerate() {
        let trimmed = line.trim_start();
        if let Some(rest) = trimmed.strip_prefix("@field") {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                let rest = rest.split("//").next().unwrap_or("");
                field_text = Some((rest.trim().to_string(), n + 1));
                cleaned.push('\n');
                continue;
            }
        }
        cleaned.push_str(line);
        cleaned.push('\n');
    }
    let field = match field_text {
        Some((text, line)) => FieldSpec::parse(&text, base).map_err(|e| ParseError {
            kind: e.into(),
            line,
            col: 1,
        })?,
        None => FieldSpec::constant(vec![0.0]).expect("nonempty"),
    };
    let mut p = Parser::new(&cleaned)?;
    p.network(field)
}

#[derive(Default, Clone)]
struct Attrs {
    position: Option<Pos>,
    radius: Option<Num>,
    battery: Option<Amount>,
}

struct RawSensor {
    name: String,
    program: Program,
    module: Module,
    bag: Vec<RawSensor>,
    line: usize,
    col: usize,
}

struct ModuleDef {
    params: Vec<String>,
    module: Module,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    scope: Vec<Var>,
    modules: HashMap<String, ModuleDef>,
}

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        let toks = tokenize(src).map_err(|e| ParseError {
            kind: ParseErrorKind::Lex(e.message),
            line: e.line,
            col: e.col,
        })?;
        Ok(Parser {
            toks,
            pos: 0,
            scope: Vec::new(),
            modules: HashMap::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, kind: ParseErrorKind) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError {
            kind,
            line: t.line,
            col: t.col,
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        self.err_here(ParseErrorKind::Unexpected {
            expected: expected.to_string(),
            found: self.peek().to_string(),
        })
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> PResult<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    fn expect_eof(&self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    /// A non-keyword lowercase identifier.
    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => {
                Err(self.err_here(ParseErrorKind::Keyword(s)))
            }
            Tok::Ident(s) if s != "_" => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn binder(&mut self) -> PResult<Var> {
        if let Tok::Ident(s) = self.peek() {
            if RESERVED.contains(&s.as_str()) {
                let s = s.clone();
                return Err(self.err_here(ParseErrorKind::ReservedName(s)));
            }
        }
        Ok(Var(self.ident("a variable name")?))
    }

    fn binder_list(&mut self, close: Option<&Tok>) -> PResult<Vec<Var>> {
        let mut vars: Vec<Var> = Vec::new();
        let at_end = |p: &Parser| match close {
            Some(c) => p.peek() == c,
            None => false,
        };
        if at_end(self) {
            return Ok(vars);
        }
        loop {
            let v = self.binder()?;
            if vars.contains(&v) {
                self.pos -= 1;
                return Err(self.err_here(ParseErrorKind::DuplicateBinder(v.0)));
            }
            vars.push(v);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(vars)
    }

    fn with_scope<T>(&mut self, vars: &[Var], f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        let depth = self.scope.len();
        self.scope.extend(vars.iter().cloned());
        let r = f(self);
        self.scope.truncate(depth);
        r
    }

    fn in_scope(&self, name: &str) -> bool {
        self.scope.iter().any(|v| v.0 == name)
    }

    // ---- programs ----

    fn program(&mut self) -> PResult<Program> {
        let first = self.sequence()?;
        if self.eat(&Tok::Pipe) {
            let rest = self.program()?;
            Ok(Program::par(first, rest))
        } else {
            Ok(first)
        }
    }

    fn sequence(&mut self) -> PResult<Program> {
        let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
        let first = self.atom()?;
        if *self.peek() == Tok::Semi {
            if first.ends_in_parallel() {
                return Err(ParseError {
                    kind: ParseErrorKind::ParallelBeforeSequence,
                    line,
                    col,
                });
            }
            self.bump();
            let rest = self.sequence()?;
            Ok(Program::seq(first, rest))
        } else {
            Ok(first)
        }
    }

    fn atom(&mut self) -> PResult<Program> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let p = self.program()?;
                self.expect(&Tok::RParen)?;
                Ok(p)
            }
            Tok::Ident(kw) => match kw.as_str() {
                "idle" => {
                    self.bump();
                    Ok(Program::Idle)
                }
                "this" | "net" => {
                    self.bump();
                    let target = if kw == "this" { Target::This } else { Target::Net };
                    self.expect(&Tok::Dot)?;
                    self.invocation(target)
                }
                "install" => {
                    self.bump();
                    Ok(Program::Install(self.value()?))
                }
                "sense" => {
                    self.bump();
                    let binders = if self.eat(&Tok::LParen) {
                        let b = self.binder_list(Some(&Tok::RParen))?;
                        self.expect(&Tok::RParen)?;
                        b
                    } else {
                        self.binder_list(None)?
                    };
                    if binders.is_empty() {
                        return Err(self.unexpected("at least one sense binder"));
                    }
                    self.expect_kw("in")?;
                    let body = self.with_scope(&binders, |p| p.program())?;
                    Ok(Program::Sense {
                        binders,
                        body: Box::new(body),
                    })
                }
                "if" => {
                    self.bump();
                    let cond = self.expr()?;
                    self.expect_kw("then")?;
                    let then = self.program()?;
                    let otherwise = if self.is_kw("else") {
                        self.bump();
                        self.program()?
                    } else {
                        Program::Idle
                    };
                    Ok(Program::If {
                        cond,
                        then: Box::new(then),
                        otherwise: Box::new(otherwise),
                    })
                }
                "let" => {
                    self.bump();
                    let var = self.binder()?;
                    self.expect(&Tok::Assign)?;
                    let builtin = match self.peek() {
                        Tok::Ident(s) => Builtin::from_name(s),
                        _ => None,
                    }
                    .ok_or_else(|| self.unexpected("`hash`, `get` or `lookup`"))?;
                    self.bump();
                    let args = self.arg_list()?;
                    self.expect_kw("in")?;
                    let body = self.with_scope(std::slice::from_ref(&var), |p| p.program())?;
                    Ok(Program::Let {
                        var,
                        builtin,
                        args,
                        body: Box::new(body),
                    })
                }
                _ if KEYWORDS.contains(&kw.as_str()) => Err(self.unexpected("a program")),
                _ if *self.peek_at(1) == Tok::LBracket => self.invocation(Target::This),
                _ => Err(self.unexpected("a program")),
            },
            _ => Err(self.unexpected("a program")),
        }
    }

    fn invocation(&mut self, target: Target) -> PResult<Program> {
        let name = self.ident("a method name")?;
        let method = if self.in_scope(&name) {
            Value::Var(Var(name))
        } else {
            Value::Label(Label(name))
        };
        let args = self.arg_list()?;
        Ok(Program::Invoke {
            target,
            method,
            args,
        })
    }

    fn arg_list(&mut self) -> PResult<Vec<Value>> {
        self.expect(&Tok::LBracket)?;
        let mut args = Vec::new();
        if self.eat(&Tok::RBracket) {
            return Ok(args);
        }
        loop {
            args.push(self.value()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(&Tok::RBracket)?;
        Ok(args)
    }

    // ---- conditions ----

    fn expr(&mut self) -> PResult<Expr> {
        let lhs = self.unary()?;
        let op = match self.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            Tok::EqEq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.unary()?;
        Ok(Expr::Compare(op, Box::new(lhs), Box::new(rhs)))
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat(&Tok::Bang) {
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        if *self.peek() == Tok::LParen && !self.at_position_literal() {
            self.bump();
            let e = self.expr()?;
            self.expect(&Tok::RParen)?;
            return Ok(e);
        }
        if let Tok::Ident(s) = self.peek() {
            if let Some(b) = Builtin::from_name(s) {
                if *self.peek_at(1) == Tok::LBracket && !self.in_scope(s) {
                    self.bump();
                    let args = self.arg_list()?;
                    return Ok(Expr::Builtin(b, args));
                }
            }
        }
        Ok(Expr::Value(self.value()?))
    }

    fn at_position_literal(&self) -> bool {
        let mut i = 1;
        if *self.peek_at(i) == Tok::Minus {
            i += 1;
        }
        matches!(self.peek_at(i), Tok::Number(_)) && *self.peek_at(i + 1) == Tok::Comma
    }

    // ---- values ----

    fn number(&mut self) -> PResult<(String, f64)> {
        let neg = self.eat(&Tok::Minus);
        match self.bump() {
            Tok::Number(s) => {
                let text = if neg { format!("-{s}") } else { s };
                let v: f64 = text
                    .parse()
                    .map_err(|_| self.err_here(ParseErrorKind::BadNumber(text.clone())))?;
                Ok((text, v))
            }
            _ => {
                self.pos -= 1;
                Err(self.unexpected("a number"))
            }
        }
    }

    fn position(&mut self) -> PResult<Pos> {
        self.expect(&Tok::LParen)?;
        let (_, x) = self.number()?;
        self.expect(&Tok::Comma)?;
        let (_, y) = self.number()?;
        self.expect(&Tok::RParen)?;
        Ok(Pos::new(x, y))
    }

    fn value(&mut self) -> PResult<Value> {
        match self.peek().clone() {
            Tok::Number(_) | Tok::Minus => Ok(Value::Measure(Num::new(self.number()?.1))),
            Tok::LParen => Ok(Value::Position(self.position()?)),
            Tok::LBrace => Ok(Value::Module(self.module_literal()?)),
            Tok::Key(k) => {
                self.bump();
                Ok(Value::Key(Key(k)))
            }
            Tok::UIdent(_) => Ok(Value::Module(self.module_ref()?)),
            Tok::Ident(s) => {
                let v = match s.as_str() {
                    "true" => Value::Bool(true),
                    "false" => Value::Bool(false),
                    "_" => Value::Unit,
                    name => match Attr::from_name(name) {
                        Some(a) => Value::SelfAttr(a),
                        None if KEYWORDS.contains(&name) => return Err(self.unexpected("a value")),
                        None => Value::Var(Var(s.clone())),
                    },
                };
                self.bump();
                Ok(v)
            }
            _ => Err(self.unexpected("a value")),
        }
    }

    // ---- modules ----

    fn module_literal(&mut self) -> PResult<Module> {
        self.expect(&Tok::LBrace)?;
        let mut module = Module::new();
        while *self.peek() != Tok::RBrace {
            let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
            let label = self.ident("a method name or `}`")?;
            self.expect(&Tok::Assign)?;
            self.expect(&Tok::LParen)?;
            let params = self.binder_list(Some(&Tok::RParen))?;
            self.expect(&Tok::RParen)?;
            let body = self.with_scope(&params, |p| p.program())?;
            if module
                .insert(Label(label.clone()), Method::new(params, body))
                .is_some()
            {
                return Err(ParseError {
                    kind: ParseErrorKind::DuplicateMethod(label),
                    line,
                    col,
                });
            }
        }
        self.expect(&Tok::RBrace)?;
        Ok(module)
    }

    /// `Name`, `Name(args)`, a literal, or a `+`-merge of those. Instantiation
    /// arguments only document which attributes the module reads.
    fn module_expr(&mut self) -> PResult<Module> {
        let mut m = self.module_atom()?;
        while self.eat(&Tok::Plus) {
            let next = self.module_atom()?;
            m.install(&next);
        }
        Ok(m)
    }

    fn module_atom(&mut self) -> PResult<Module> {
        match self.peek() {
            Tok::LBrace => self.module_literal(),
            Tok::UIdent(_) => self.module_ref(),
            _ => Err(self.unexpected("a module")),
        }
    }

    fn module_ref(&mut self) -> PResult<Module> {
        let name = match self.peek().clone() {
            Tok::UIdent(n) => n,
            _ => return Err(self.unexpected("a module name")),
        };
        let def = self
            .modules
            .get(&name)
            .ok_or_else(|| self.err_here(ParseErrorKind::UnknownModule(name.clone())))?;
        let module = def.module.clone();
        let arity = def.params.len();
        self.bump();
        if self.eat(&Tok::LParen) {
            let mut n = 0;
            if *self.peek() != Tok::RParen {
                loop {
                    self.value()?;
                    n += 1;
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(&Tok::RParen)?;
            if n != arity && arity != 0 {
                return Err(self.unexpected(&format!("{arity} module arguments")));
            }
        }
        Ok(module)
    }

    fn module_def(&mut self) -> PResult<()> {
        let name = match self.bump() {
            Tok::UIdent(n) => n,
            _ => unreachable!("caller checked"),
        };
        if self.modules.contains_key(&name) {
            self.pos -= 1;
            return Err(self.err_here(ParseErrorKind::DuplicateModule(name)));
        }
        let mut params = Vec::new();
        if self.eat(&Tok::LParen) {
            while *self.peek() != Tok::RParen {
                match self.bump() {
                    Tok::Ident(s) if Attr::from_name(&s).is_some() => params.push(s),
                    Tok::Ident(s) => {
                        self.pos -= 1;
                        return Err(self.err_here(ParseErrorKind::ModuleParam(s)));
                    }
                    _ => {
                        self.pos -= 1;
                        return Err(self.unexpected("p, r or b"));
                    }
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::RParen)?;
        }
        self.expect(&Tok::Assign)?;
        let module = self.module_expr()?;
        self.modules.insert(name, ModuleDef { params, module });
        Ok(())
    }

    // ---- networks ----

    fn sensor(&mut self) -> PResult<RawSensor> {
        let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
        self.expect(&Tok::LBracket)?;
        let program = self.program()?;
        self.expect(&Tok::Comma)?;
        let module = self.module_expr()?;
        self.expect(&Tok::RBracket)?;
        let name = self.ident("a sensor name")?;
        let mut bag = Vec::new();
        if self.eat(&Tok::LBrace) {
            if self.is_kw_off() {
                self.bump();
            } else {
                loop {
                    bag.push(self.sensor()?);
                    if !self.eat(&Tok::Pipe) {
                        break;
                    }
                }
            }
            self.expect(&Tok::RBrace)?;
        }
        Ok(RawSensor {
            name,
            program,
            module,
            bag,
            line,
            col,
        })
    }

    fn is_kw_off(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == "off")
    }

    fn attr_line(&mut self, table: &mut BTreeMap<String, (Attrs, usize, usize)>) -> PResult<()> {
        let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
        self.expect(&Tok::At)?;
        let name = self.ident("a sensor name or `default`")?;
        let entry = table
            .entry(name)
            .or_insert_with(|| (Attrs::default(), line, col));
        while matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Assign {
            let key = match self.bump() {
                Tok::Ident(k) => k,
                _ => unreachable!(),
            };
            self.bump();
            match key.as_str() {
                "position" => entry.0.position = Some(self.position()?),
                "radius" => {
                    let (_, v) = self.number()?;
                    entry.0.radius = Some(Num::new(v));
                }
                "battery" => {
                    let (text, _) = self.number()?;
                    let amount: Amount = text
                        .parse()
                        .map_err(|e: crate::num::AmountError| self.err_here(ParseErrorKind::BadNumber(e.to_string())))?;
                    entry.0.battery = Some(amount);
                }
                other => return Err(self.err_here(ParseErrorKind::UnknownAttribute(other.to_string()))),
            }
        }
        Ok(())
    }

    fn network(&mut self, field: FieldSpec) -> PResult<Network> {
        let mut raw: Vec<RawSensor> = Vec::new();
        let mut attrs: BTreeMap<String, (Attrs, usize, usize)> = BTreeMap::new();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::UIdent(_) => self.module_def()?,
                Tok::At => self.attr_line(&mut attrs)?,
                Tok::LBracket => loop {
                    raw.push(self.sensor()?);
                    if !self.eat(&Tok::Pipe) {
                        break;
                    }
                },
                _ => return Err(self.unexpected("a module definition, sensor, or `@` directive")),
            }
        }

        let defaults = attrs.remove("default").map(|a| a.0).unwrap_or_default();
        let mut seen = HashSet::new();
        fn collect_names<'a>(s: &'a RawSensor, out: &mut Vec<&'a RawSensor>) {
            out.push(s);
            for b in &s.bag {
                collect_names(b, out);
            }
        }
        let mut all = Vec::new();
        for s in &raw {
            collect_names(s, &mut all);
        }
        for s in &all {
            if !seen.insert(s.name.clone()) {
                return Err(ParseError {
                    kind: ParseErrorKind::DuplicateSensor(s.name.clone()),
                    line: s.line,
                    col: s.col,
                });
            }
        }
        if let Some((name, (_, line, col))) = attrs.iter().find(|(n, _)| !seen.contains(*n)) {
            return Err(ParseError {
                kind: ParseErrorKind::UnknownSensor(name.clone()),
                line: *line,
                col: *col,
            });
        }

        fn build(
            s: RawSensor,
            attrs: &BTreeMap<String, (Attrs, usize, usize)>,
            defaults: &Attrs,
        ) -> PResult<Sensor> {
            let own = attrs.get(&s.name).map(|a| a.0.clone()).unwrap_or_default();
            let missing = |attr: &str| ParseError {
                kind: ParseErrorKind::MissingAttribute {
                    sensor: s.name.clone(),
                    attr: attr.to_string(),
                },
                line: s.line,
                col: s.col,
            };
            let position = own.position.or(defaults.position).ok_or_else(|| missing("position"))?;
            let radius = own.radius.or(defaults.radius).ok_or_else(|| missing("radius"))?;
            let battery = own.battery.or(defaults.battery).ok_or_else(|| missing("battery"))?;
            let (line, col) = (s.line, s.col);
            let wrap = |e: NetworkError| ParseError {
                kind: ParseErrorKind::Network(e),
                line,
                col,
            };
            let mut sensor = Sensor::try_new(&s.name, s.program, s.module, position, radius.get(), battery)
                .map_err(wrap)?;
            if !s.bag.is_empty() {
                let bag = s
                    .bag
                    .into_iter()
                    .map(|b| build(b, attrs, defaults))
                    .collect::<PResult<Vec<_>>>()?;
                sensor.start_bag(bag).map_err(|_| ParseError {
                    kind: ParseErrorKind::BadBag,
                    line,
                    col,
                })?;
            }
            Ok(sensor)
        }

        let sensors = raw
            .into_iter()
            .map(|s| build(s, &attrs, &defaults))
            .collect::<PResult<Vec<_>>>()?;
        Ok(Network::new(sensors, Arc::new(field)))
    }
}
