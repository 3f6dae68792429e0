//! FICP instances, the function expression language and linearity extraction.

mod expr;
mod instance;
mod linear;

pub use expr::{parse_expr, Expr, ParseContext, ParseError, ParseErrorKind};
pub use instance::{FicpInstance, FuncDef, Receiver, ValidationReport, ValueTable};
pub use linear::{extract_linear, LinearForm, Linearity, EXHAUSTIVE_LINEARITY_LIMIT};
