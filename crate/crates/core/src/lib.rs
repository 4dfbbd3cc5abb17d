//! Core Control Network Programming: the cinnamon model, its textual
//! language, a backtracking interpreter, and a compiler from while-programs.

pub mod dsl;
pub mod interp;
pub mod macros;
pub mod model;
pub mod normalize;
pub mod validate;
pub mod value;
pub mod whilec;

pub use dsl::{export_dot, parse, parse_named, print, ParseDiagnostic};
pub use interp::{compute, run, Computed, Environment, Outcome, RunOptions, UndoMode};
pub use macros::{expand_macros, MacroError};
pub use model::{Cinnamon, NodeRef, Primitive, Subnet};
pub use normalize::normalize;
pub use validate::{validate, validate_strict, ValidationReport};
pub use value::{Mode, Value};
