//! Scalar-field expressions and the line-oriented model file format.

mod expr;
mod model_file;

pub use expr::{parse_expr, EvalError, ExprDisplay, ExprError, Func, ScalarExpr, FUNCTIONS};
pub use model_file::{
    parse_model, Expectation, ExpectationKind, ModelError, ModelSpec, CENTER_COND_BOUND,
};

/// Source text of the built-in `example25` model.
pub const EXAMPLE25_SOURCE: &str = include_str!("../../models/example25.model");
/// Source text of the built-in `flat3` model.
pub const FLAT3_SOURCE: &str = include_str!("../../models/flat3.model");

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 2] = ["example25", "flat3"];

/// Parses a built-in model by name.
pub fn builtin(name: &str) -> Option<ModelSpec> {
    let source = match name {
        "example25" => EXAMPLE25_SOURCE,
        "flat3" => FLAT3_SOURCE,
        _ => return None,
    };
    Some(parse_model(source).expect("built-in models are valid"))
}
