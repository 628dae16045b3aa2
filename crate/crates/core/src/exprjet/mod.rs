//! Coordinate expressions and their truncated jets.

mod eval;
mod expr;
mod jet;
mod parse;

pub use eval::{eval_jet, eval_value, fd_crosscheck, DomainError, DomainKind};
pub use expr::{add, call, div, linear_combination, mul, neg, pow, sub, Expr, Func, Rendered};
pub use jet::{sum, Jet, MAX_ORDER};
pub use parse::{parse_expr, ParseError};
