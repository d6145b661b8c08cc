use super::*;
use crate::congruence::{normalize_program, normalize_threads, substitute, Subst, Thread};
use crate::extensions::{eval_builtin, eval_expr, ExtError, HeapCtx, HANDLE};
use crate::network::{Bag, LogEntry};
use crate::syntax::ast::{Attr, Expr, Var};

/// Reads `p`, `r` and `b` against the executing sensor.
pub fn resolve_value(v: &Value, s: &Sensor) -> Value {
    match v {
        Value::SelfAttr(Attr::Position) => Value::Position(s.position),
        Value::SelfAttr(Attr::Radius) => Value::Measure(s.radius),
        Value::SelfAttr(Attr::Battery) => Value::Battery(s.battery),
        other => other.clone(),
    }
}

fn resolve_all(vs: &[Value], s: &Sensor) -> Vec<Value> {
    vs.iter().map(|v| resolve_value(v, s)).collect()
}

fn resolve_expr(e: &Expr, s: &Sensor) -> Expr {
    match e {
        Expr::Value(v) => Expr::Value(resolve_value(v, s)),
        Expr::Not(inner) => Expr::Not(Box::new(resolve_expr(inner, s))),
        Expr::Builtin(b, args) => Expr::Builtin(*b, resolve_all(args, s)),
        Expr::Compare(op, a, b) => Expr::Compare(*op, Box::new(resolve_expr(a, s)), Box::new(resolve_expr(b, s))),
    }
}

fn bind(params: &[Var], args: Vec<Value>) -> Subst {
    params.iter().cloned().zip(args).collect()
}

/// Replaces the head of thread `t` with `body`.
fn splice(s: &mut Sensor, t: usize, body: &Program) -> Result<(), EngineError> {
    let mut threads = std::mem::take(&mut s.threads);
    let rest: Thread = threads[t][1..].to_vec();
    let mut parts = normalize_program(body).threads;
    match parts.len() {
        0 => threads[t] = rest,
        1 => {
            let mut thread = parts.pop().unwrap();
            thread.extend(rest);
            threads[t] = thread;
        }
        _ if rest.is_empty() => {
            threads.remove(t);
            threads.extend(parts);
        }
        _ => {
            s.threads = threads;
            return Err(EngineError::ForkJoin {
                sensor: s.id.clone(),
                rest: pretty::program(&crate::congruence::thread_program(&rest)),
            });
        }
    }
    s.threads = normalize_threads(threads);
    Ok(())
}

fn pop_head(s: &mut Sensor, t: usize) {
    let mut threads = std::mem::take(&mut s.threads);
    threads[t].remove(0);
    s.threads = normalize_threads(threads);
}

fn ext_err(s: &Sensor) -> impl Fn(ExtError) -> EngineError + '_ {
    move |source| EngineError::Extension {
        sensor: s.id.clone(),
        source,
    }
}

/// Applies a redex after checking that it is enabled.
pub fn apply(net: &Network, redex: &Redex, cfg: &Config) -> Result<(Network, StepLabel), EngineError> {
    if !enabled_redexes(net, cfg)?.contains(redex) {
        return Err(EngineError::NotEnabled(redex.clone()));
    }
    let mut next = net.clone();
    let label = step(&mut next, redex, cfg)?;
    Ok((next, label))
}

/// Applies a redex in place without checking that it is enabled. On error
/// the network may be partially updated.
pub fn step(net: &mut Network, redex: &Redex, cfg: &Config) -> Result<StepLabel, EngineError> {
    let si = net
        .sensor_index(&redex.subject)
        .ok_or_else(|| EngineError::UnknownSensor(redex.subject.clone()))?;
    let t = redex.thread;
    let field = net.field.clone();
    let clock = net.clock;
    let mut message = None;

    let head = net.sensors[si]
        .threads
        .get(t)
        .and_then(|th| th.first())
        .cloned()
        .ok_or_else(|| EngineError::NotEnabled(redex.clone()))?;
    let description = pretty::program(&head);

    match redex.rule {
        Rule::NoMethod | Rule::Event => {}
        Rule::Method => {
            let s = &mut net.sensors[si];
            let Program::Invoke { method, args, .. } = &head else {
                return Err(EngineError::NotEnabled(redex.clone()));
            };
            let l = method_label(s, method)?;
            let args = resolve_all(args, s);
            if let Some(m) = s.module.get(&l).cloned() {
                if m.params.len() != args.len() {
                    return Err(EngineError::ArityMismatch {
                        sensor: s.id.clone(),
                        what: format!("method `{l}`"),
                        expected: m.params.len(),
                        got: args.len(),
                    });
                }
                let body = substitute(&m.body, &bind(&m.params, args.clone()));
                splice(s, t, &body)?;
            } else if LOG_INTRINSICS.contains(&l.as_str()) {
                net.log.push(LogEntry {
                    step: clock,
                    sensor: s.id.clone(),
                    intrinsic: l.0.clone(),
                    args: args.clone(),
                });
                pop_head(s, t);
            } else if l.as_str() == PUT && cfg.extensions.state {
                match args.as_slice() {
                    [Value::Key(k), v] => s.heap.put(*k, v.clone()),
                    [other, _] => return Err(ext_err(s)(ExtError::NotAKey(pretty::value(other)))),
                    _ => {
                        return Err(ext_err(s)(ExtError::Arity {
                            name: "put",
                            expected: 2,
                            got: args.len(),
                        }))
                    }
                }
                pop_head(s, t);
            } else {
                return Err(EngineError::NotEnabled(redex.clone()));
            }
            message = Some((l, args));
        }
        Rule::Deliver => {
            let object = redex.object.as_ref().ok_or_else(|| EngineError::NotEnabled(redex.clone()))?;
            let oi = net
                .sensor_index(object)
                .ok_or_else(|| EngineError::UnknownSensor(object.clone()))?;
            let Program::Invoke { method, args, .. } = &head else {
                return Err(EngineError::NotEnabled(redex.clone()));
            };
            let sender = &net.sensors[si];
            let l = method_label(sender, method)?;
            let args = resolve_all(args, sender);
            let mut receiver = net.sensors.remove(oi);
            let si = if oi < si { si - 1 } else { si };
            let mut threads = std::mem::take(&mut receiver.threads);
            threads.push(vec![Program::Invoke {
                target: Target::This,
                method: Value::Label(l.clone()),
                args: args.clone(),
            }]);
            receiver.threads = normalize_threads(threads);
            let s = &mut net.sensors[si];
            match &mut s.bag {
                Some(bag) => bag.sensors.push(receiver),
                None => {
                    s.bag = Some(Bag {
                        thread: t,
                        sensors: vec![receiver],
                    })
                }
            }
            message = Some((l, args));
        }
        Rule::Release => {
            let s = &mut net.sensors[si];
            let returned = s.bag.take().map(|b| b.sensors).unwrap_or_default();
            pop_head(s, t);
            if let Program::Invoke { method, args, .. } = &head {
                message = Some((method_label(s, method)?, resolve_all(args, s)));
            }
            net.sensors.extend(returned);
            net.sensors.sort_by(|a, b| a.id.cmp(&b.id));
        }
        Rule::Install => {
            let s = &mut net.sensors[si];
            let Program::Install(v) = &head else {
                return Err(EngineError::NotEnabled(redex.clone()));
            };
            match resolve_value(v, s) {
                Value::Module(m) => s.module.install(&m),
                other => {
                    return Err(EngineError::NotAModule {
                        sensor: s.id.clone(),
                        value: pretty::value(&other),
                    })
                }
            }
            pop_head(s, t);
        }
        Rule::Sense => {
            let s = &mut net.sensors[si];
            let Program::Sense { binders, body } = &head else {
                return Err(EngineError::NotEnabled(redex.clone()));
            };
            if binders.len() != field.arity() {
                return Err(EngineError::ArityMismatch {
                    sensor: s.id.clone(),
                    what: "sense".into(),
                    expected: field.arity(),
                    got: binders.len(),
                });
            }
            let sample: Vec<Value> = field.at(&s.position).into_iter().map(Value::Measure).collect();
            let body = substitute(body, &bind(binders, sample));
            splice(s, t, &body)?;
        }
        Rule::Cond => {
            let s = &mut net.sensors[si];
            let Program::If {
                cond,
                then,
                otherwise,
            } = &head
            else {
                return Err(EngineError::NotEnabled(redex.clone()));
            };
            let cond = resolve_expr(cond, s);
            let value = {
                let mut nonce = s.nonce;
                let mut ctx = HeapCtx {
                    heap: &s.heap,
                    nonce: &mut nonce,
                    ext: cfg.extensions,
                };
                let v = eval_expr(&cond, &mut ctx).map_err(ext_err(s))?;
                s.nonce = nonce;
                v
            };
            let branch = match value {
                Value::Bool(true) => then,
                Value::Bool(false) => otherwise,
                other => return Err(ext_err(s)(ExtError::NotBool(pretty::value(&other)))),
            };
            splice(s, t, branch)?;
        }
        Rule::Let => {
            let s = &mut net.sensors[si];
            let Program::Let {
                var,
                builtin,
                args,
                body,
            } = &head
            else {
                return Err(EngineError::NotEnabled(redex.clone()));
            };
            let args = resolve_all(args, s);
            let value = {
                let mut nonce = s.nonce;
                let mut ctx = HeapCtx {
                    heap: &s.heap,
                    nonce: &mut nonce,
                    ext: cfg.extensions,
                };
                let v = eval_builtin(*builtin, &args, &mut ctx).map_err(ext_err(s))?;
                s.nonce = nonce;
                v
            };
            let body = substitute(body, &bind(std::slice::from_ref(var), vec![value]));
            splice(s, t, &body)?;
        }
    }

    let energy = redex.rule.cost(&cfg.energy);
    if let Some(s) = net.sensors.iter_mut().find(|s| s.id == redex.subject) {
        s.battery = s.battery - energy;
    }
    net.clock += 1;
    net.expire_exhausted(&cfg.energy);
    Ok(StepLabel {
        redex: redex.clone(),
        energy,
        description,
        message,
    })
}

/// Composes `this.handle[F(p)]` with the program of a top-level sensor.
pub fn fire_event(net: &Network, id: &SensorId, cfg: &Config) -> Result<(Network, StepLabel), EngineError> {
    if !cfg.extensions.events {
        return Err(EngineError::EventsDisabled);
    }
    let Some(si) = net.sensor_index(id) else {
        return Err(match net.find(id) {
            Some(_) => EngineError::Frozen(id.clone()),
            None => EngineError::UnknownSensor(id.clone()),
        });
    };
    if net.sensors[si].bag.is_some() {
        return Err(EngineError::Frozen(id.clone()));
    }
    let mut next = net.clone();
    let s = &mut next.sensors[si];
    let sample: Vec<Value> = next.field.at(&s.position).into_iter().map(Value::Measure).collect();
    let call = Program::Invoke {
        target: Target::This,
        method: Value::label(HANDLE),
        args: sample.clone(),
    };
    let mut threads = std::mem::take(&mut s.threads);
    threads.push(vec![call.clone()]);
    s.threads = normalize_threads(threads);
    let thread = s.threads.iter().position(|t| t.len() == 1 && t[0] == call).unwrap_or(0);
    next.clock += 1;
    Ok((
        next,
        StepLabel {
            redex: Redex {
                rule: Rule::Event,
                subject: id.clone(),
                thread,
                object: None,
            },
            energy: Amount::ZERO,
            description: pretty::program(&call),
            message: Some((Label::new(HANDLE), sample)),
        },
    ))
}
