//! Expression language for attribute values and constraints.

pub mod ast;
pub mod eval;
pub mod parser;
pub mod value;

use thiserror::Error;

pub use ast::{BinaryOp, Expr, UnaryOp};
pub use eval::{evaluate, Bindings, EvalContext, Layered, NoNetwork, BUILTINS};
pub use parser::parse_expression;
pub use value::{round_half_up, Location, Value};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unbound identifier `{0}`")]
    UnboundIdentifier(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("arithmetic overflow")]
    Overflow,
    #[error("node {to} is unreachable from node {from}")]
    Unreachable { from: usize, to: usize },
}

/// Free identifiers of `expr`.
pub fn dependencies(expr: &Expr) -> std::collections::BTreeSet<String> {
    expr.dependencies()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deps(src: &str) -> Vec<String> {
        dependencies(&parse_expression(src).unwrap()).into_iter().collect()
    }

    #[test]
    fn dependency_sets() {
        assert_eq!(deps("a + b*c"), ["a", "b", "c"]);
        assert_eq!(deps("dtt(origin,destination)"), ["destination", "origin"]);
        assert!(deps("5 < 6").is_empty());
    }
}
