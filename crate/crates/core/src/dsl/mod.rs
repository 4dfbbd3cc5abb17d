//! Textual representation of cinnamons (`.cin` files).
//!
//! ```text
//! file     = "cinnamon" IDENT "mode" ("nat"|"str") macro* subnet+ ;
//! macro    = "macro" IDENT "(" [params] ")" "=" item {"," item} ;
//! subnet   = ["main"] "subnet" IDENT "(" [params] ")" "{" ["vars" params] "init" IDENT arrow* "}" ;
//! params   = IDENT {"," IDENT} ;
//! arrow    = IDENT "->" target ":" [item {"," item}] ;
//! target   = IDENT | "FINISH" | "RETURN" ;
//! item     = prim | "call" IDENT "(" [actual {"," actual}] ")" | IDENT "(" [actual {"," actual}] ")" ;
//! actual   = IDENT | NAT | SYMLIT | STRLIT ;
//! ```
//!
//! Keywords are case-sensitive and `#` comments run to end of line. Arrow
//! order within `out(s)` is the textual order of the arrows leaving `s`.

mod dot;
pub(crate) mod lexer;
mod parser;
mod printer;

use std::fmt;

use crate::model::{Cinnamon, SourceSpan};

pub use dot::export_dot;
pub use printer::print;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub span: SourceSpan,
    pub message: String,
    pub rule: &'static str,
}

impl ParseDiagnostic {
    pub(crate) fn error(span: SourceSpan, rule: &'static str, message: impl Into<String>) -> Self {
        ParseDiagnostic {
            severity: Severity::Error,
            span,
            message: message.into(),
            rule,
        }
    }
}

/// `file:line:col: rule: message`
impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.span, self.rule, self.message)
    }
}

pub fn parse(text: &str) -> Result<Cinnamon, Vec<ParseDiagnostic>> {
    parser::parse_named(text, "<input>")
}

/// Like [`parse`], with `file` recorded in every span.
pub fn parse_named(text: &str, file: &str) -> Result<Cinnamon, Vec<ParseDiagnostic>> {
    parser::parse_named(text, file)
}
