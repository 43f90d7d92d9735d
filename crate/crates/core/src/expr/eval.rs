use std::collections::{BTreeMap, HashMap};

use super::ast::{BinaryOp, Expr, UnaryOp};
use super::value::{Location, Value};
use super::ExprError;

pub const BUILTINS: [&str; 4] = ["dtt", "stops", "len", "set"];

/// Name of the binding `stops` reads its walking budget from.
pub const MAX_WALKING: &str = "max_walking";
/// Name of the binding `stops` reads the pedestrian speed from.
pub const WALK_SPEED: &str = "walk_speed";
pub const DEFAULT_WALK_SPEED: f64 = 1.4;

/// Network services reachable from expressions.
pub trait EvalContext {
    /// Shortest drive travel time in seconds, `None` when unreachable.
    fn drive_travel_time(&self, from: &Location, to: &Location) -> Option<f64>;
    /// Station ids strictly within `max_walk` seconds of `at`.
    fn stations_within_walk(&self, at: &Location, max_walk: f64, walk_speed: f64) -> Vec<String>;
}

/// Context for expressions that never touch the network.
pub struct NoNetwork;

impl EvalContext for NoNetwork {
    fn drive_travel_time(&self, _: &Location, _: &Location) -> Option<f64> {
        None
    }

    fn stations_within_walk(&self, _: &Location, _: f64, _: f64) -> Vec<String> {
        Vec::new()
    }
}

pub trait Bindings {
    fn lookup(&self, name: &str) -> Option<&Value>;
}

impl Bindings for BTreeMap<String, Value> {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.get(name)
    }
}

impl Bindings for HashMap<String, Value> {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.get(name)
    }
}

/// Looks names up in `first`, then `second`.
pub struct Layered<'a, A: ?Sized, B: ?Sized> {
    pub first: &'a A,
    pub second: &'a B,
}

impl<A: Bindings + ?Sized, B: Bindings + ?Sized> Bindings for Layered<'_, A, B> {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.first.lookup(name).or_else(|| self.second.lookup(name))
    }
}

fn type_error(msg: impl Into<String>) -> ExprError {
    ExprError::Type(msg.into())
}

fn finite(x: f64) -> Result<Value, ExprError> {
    if x.is_finite() {
        Ok(Value::Real(x))
    } else {
        Err(ExprError::Overflow)
    }
}

pub fn evaluate(expr: &Expr, env: &dyn Bindings, ctx: &dyn EvalContext) -> Result<Value, ExprError> {
    match expr {
        Expr::Int(v) => Ok(Value::Int(*v)),
        Expr::Real(v) => Ok(Value::Real(*v)),
        Expr::Bool(b) => Ok(Value::Bool(*b)),
        Expr::Str(s) => Ok(Value::Str(s.clone())),
        Expr::Ident(name) => env
            .lookup(name)
            .cloned()
            .ok_or_else(|| ExprError::UnboundIdentifier(name.clone())),
        Expr::Unary(UnaryOp::Not, e) => Ok(Value::Bool(!evaluate(e, env, ctx)?.truthy())),
        Expr::Unary(UnaryOp::Neg, e) => match evaluate(e, env, ctx)? {
            Value::Int(v) => v.checked_neg().map(Value::Int).ok_or(ExprError::Overflow),
            Value::Real(v) => Ok(Value::Real(-v)),
            other => Err(type_error(format!("cannot negate {}", other.type_name()))),
        },
        Expr::Binary(BinaryOp::And, l, r) => {
            let lhs = evaluate(l, env, ctx)?;
            if !lhs.truthy() {
                return Ok(lhs);
            }
            evaluate(r, env, ctx)
        }
        Expr::Binary(BinaryOp::Or, l, r) => {
            let lhs = evaluate(l, env, ctx)?;
            if lhs.truthy() {
                return Ok(lhs);
            }
            evaluate(r, env, ctx)
        }
        Expr::Binary(op, l, r) => {
            let lhs = evaluate(l, env, ctx)?;
            let rhs = evaluate(r, env, ctx)?;
            binary(*op, lhs, rhs)
        }
        Expr::Call(name, args) => call(name, args, env, ctx),
    }
}

fn binary(op: BinaryOp, lhs: Value, rhs: Value) -> Result<Value, ExprError> {
    use BinaryOp::*;
    match op {
        Add | Sub | Mul | Div => arithmetic(op, &lhs, &rhs),
        Eq => Ok(Value::Bool(lhs.loose_eq(&rhs))),
        Ne => Ok(Value::Bool(!lhs.loose_eq(&rhs))),
        Lt | Le | Gt | Ge => {
            let ord = match (&lhs, &rhs) {
                (a, b) if a.is_numeric() && b.is_numeric() => a.as_f64().unwrap().partial_cmp(&b.as_f64().unwrap()),
                (Value::Str(a), Value::Str(b)) => Some(a.cmp(b)),
                _ => {
                    return Err(type_error(format!(
                        "cannot compare {} with {}",
                        lhs.type_name(),
                        rhs.type_name()
                    )))
                }
            };
            let Some(ord) = ord else {
                return Ok(Value::Bool(false));
            };
            Ok(Value::Bool(match op {
                Lt => ord.is_lt(),
                Le => ord.is_le(),
                Gt => ord.is_gt(),
                _ => ord.is_ge(),
            }))
        }
        Intersect => match (lhs, rhs) {
            (Value::Set(a), Value::Set(b)) => Ok(Value::Set(
                a.into_iter().filter(|x| b.iter().any(|y| x.loose_eq(y))).collect(),
            )),
            (a, b) => Err(type_error(format!(
                "`&` needs two sets, got {} and {}",
                a.type_name(),
                b.type_name()
            ))),
        },
        And | Or => unreachable!("handled lazily"),
    }
}

fn arithmetic(op: BinaryOp, lhs: &Value, rhs: &Value) -> Result<Value, ExprError> {
    if !lhs.is_numeric() || !rhs.is_numeric() {
        return Err(type_error(format!(
            "`{}` needs numbers, got {} and {}",
            op.symbol(),
            lhs.type_name(),
            rhs.type_name()
        )));
    }
    if op == BinaryOp::Div {
        let d = rhs.as_f64().unwrap();
        if d == 0.0 {
            return Err(ExprError::DivisionByZero);
        }
        return finite(lhs.as_f64().unwrap() / d);
    }
    if let (Value::Int(a), Value::Int(b)) = (lhs, rhs) {
        let r = match op {
            BinaryOp::Add => a.checked_add(*b),
            BinaryOp::Sub => a.checked_sub(*b),
            _ => a.checked_mul(*b),
        };
        return r.map(Value::Int).ok_or(ExprError::Overflow);
    }
    let (a, b) = (lhs.as_f64().unwrap(), rhs.as_f64().unwrap());
    finite(match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a - b,
        _ => a * b,
    })
}

fn arity(name: &str, args: &[Expr], n: usize) -> Result<(), ExprError> {
    if args.len() == n {
        Ok(())
    } else {
        Err(type_error(format!("{name}() takes {n} argument(s), got {}", args.len())))
    }
}

fn location_arg(name: &str, v: &Value) -> Result<Location, ExprError> {
    v.as_location()
        .copied()
        .ok_or_else(|| type_error(format!("{name}() needs a location, got {}", v.type_name())))
}

fn call(name: &str, args: &[Expr], env: &dyn Bindings, ctx: &dyn EvalContext) -> Result<Value, ExprError> {
    if !BUILTINS.contains(&name) {
        return Err(ExprError::UnknownFunction(name.to_string()));
    }
    let vals = args
        .iter()
        .map(|a| evaluate(a, env, ctx))
        .collect::<Result<Vec<_>, _>>()?;
    match name {
        "dtt" => {
            arity(name, args, 2)?;
            let a = location_arg(name, &vals[0])?;
            let b = location_arg(name, &vals[1])?;
            ctx.drive_travel_time(&a, &b)
                .map(Value::Real)
                .ok_or(ExprError::Unreachable { from: a.node, to: b.node })
        }
        "stops" => {
            arity(name, args, 1)?;
            let at = location_arg(name, &vals[0])?;
            let max_walk = env
                .lookup(MAX_WALKING)
                .ok_or_else(|| ExprError::UnboundIdentifier(MAX_WALKING.into()))?
                .as_f64()
                .ok_or_else(|| type_error("max_walking must be numeric"))?;
            let speed = match env.lookup(WALK_SPEED) {
                Some(v) => v.as_f64().ok_or_else(|| type_error("walk_speed must be numeric"))?,
                None => DEFAULT_WALK_SPEED,
            };
            if speed <= 0.0 {
                return Err(type_error("walk_speed must be positive"));
            }
            let ids = ctx.stations_within_walk(&at, max_walk, speed);
            Ok(Value::set_from(ids.into_iter().map(Value::Str).collect()))
        }
        "len" => {
            arity(name, args, 1)?;
            match &vals[0] {
                Value::Array(v) | Value::Set(v) => Ok(Value::Int(v.len() as i64)),
                Value::Str(s) => Ok(Value::Int(s.chars().count() as i64)),
                other => Err(type_error(format!("len() of {}", other.type_name()))),
            }
        }
        _ => {
            arity(name, args, 1)?;
            match vals.into_iter().next().unwrap() {
                Value::Array(v) | Value::Set(v) => Ok(Value::set_from(v)),
                other => Err(type_error(format!("set() of {}", other.type_name()))),
            }
        }
    }
}
