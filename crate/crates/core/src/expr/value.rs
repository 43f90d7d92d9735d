use std::cmp::Ordering;
use std::fmt;

/// A location resolved to a drive-network node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub node: usize,
    pub lon: f64,
    pub lat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Bool(bool),
    Str(String),
    Location(Location),
    Array(Vec<Value>),
    /// Sorted and free of duplicates; build with [`Value::set_from`].
    Set(Vec<Value>),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "integer",
            Value::Real(_) => "real",
            Value::Bool(_) => "boolean",
            Value::Str(_) => "string",
            Value::Location(_) => "location",
            Value::Array(_) => "array",
            Value::Set(_) => "set",
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(v) => Some(*v as f64),
            Value::Real(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_location(&self) -> Option<&Location> {
        match self {
            Value::Location(l) => Some(l),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Value::Int(_) | Value::Real(_))
    }

    /// Python truthiness.
    pub fn truthy(&self) -> bool {
        match self {
            Value::Int(v) => *v != 0,
            Value::Real(v) => *v != 0.0,
            Value::Bool(b) => *b,
            Value::Str(s) => !s.is_empty(),
            Value::Location(_) => true,
            Value::Array(v) | Value::Set(v) => !v.is_empty(),
        }
    }

    pub fn set_from(mut items: Vec<Value>) -> Value {
        items.sort_by(total_cmp);
        items.dedup_by(|a, b| total_cmp(a, b) == Ordering::Equal);
        Value::Set(items)
    }

    /// Equality as the language sees it: numbers compare by value,
    /// values of unrelated types are simply unequal.
    pub fn loose_eq(&self, other: &Value) -> bool {
        match (self, other) {
            (a, b) if a.is_numeric() && b.is_numeric() => a.as_f64() == b.as_f64(),
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Location(a), Value::Location(b)) => a.node == b.node,
            (Value::Array(a), Value::Array(b)) | (Value::Set(a), Value::Set(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.loose_eq(y))
            }
            _ => false,
        }
    }
}

fn rank(v: &Value) -> u8 {
    match v {
        Value::Bool(_) => 0,
        Value::Int(_) | Value::Real(_) => 1,
        Value::Str(_) => 2,
        Value::Location(_) => 3,
        Value::Array(_) => 4,
        Value::Set(_) => 5,
    }
}

/// Total order used to keep sets canonical.
pub fn total_cmp(a: &Value, b: &Value) -> Ordering {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => x.cmp(y),
        (x, y) if x.is_numeric() && y.is_numeric() => x.as_f64().unwrap().total_cmp(&y.as_f64().unwrap()),
        (Value::Bool(x), Value::Bool(y)) => x.cmp(y),
        (Value::Str(x), Value::Str(y)) => x.cmp(y),
        (Value::Location(x), Value::Location(y)) => x.node.cmp(&y.node),
        (Value::Array(x), Value::Array(y)) | (Value::Set(x), Value::Set(y)) => {
            for (p, q) in x.iter().zip(y) {
                let o = total_cmp(p, q);
                if o != Ordering::Equal {
                    return o;
                }
            }
            x.len().cmp(&y.len())
        }
        _ => rank(a).cmp(&rank(b)),
    }
}

/// Rounds half-up, the rule for integer-typed attributes.
pub fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Real(v) => write!(f, "{v}"),
            Value::Bool(true) => f.write_str("True"),
            Value::Bool(false) => f.write_str("False"),
            Value::Str(s) => f.write_str(s),
            Value::Location(l) => write!(f, "{}", l.node),
            Value::Array(items) | Value::Set(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sets_are_sorted_and_deduped() {
        let s = Value::set_from(vec![Value::Int(3), Value::Int(1), Value::Int(3), Value::Real(1.0)]);
        assert_eq!(s, Value::Set(vec![Value::Int(1), Value::Int(3)]));
    }

    #[test]
    fn half_up() {
        assert_eq!(round_half_up(2.5), 3.0);
        assert_eq!(round_half_up(-2.5), -2.0);
        assert_eq!(round_half_up(2.49), 2.0);
    }

    #[test]
    fn loose_equality_across_types() {
        assert!(Value::Int(2).loose_eq(&Value::Real(2.0)));
        assert!(!Value::Int(1).loose_eq(&Value::Bool(true)));
        assert!(!Value::Str("1".into()).loose_eq(&Value::Int(1)));
    }
}
