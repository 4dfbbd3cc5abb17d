//! While-programs: syntax, a reference interpreter, a compiler to cinnamons
//! and differential fuzzing of that compiler.
//!
//! ```text
//! prog = "x" NAT ":=" "0"
//!      | "x" NAT ":=" "x" NAT ["+" "1"]
//!      | "{" prog ";" prog "}"
//!      | "if" "x" NAT "<" "x" NAT "then" prog "else" prog
//!      | "for" "x" NAT "do" prog
//!      | "while" "x" NAT "<" "x" NAT "do" prog ;
//! ```

mod ast;
mod compile;
mod diff;
mod eval;
mod gen;

pub use ast::{parse_while, parse_while_named, WVar, WhileProgram};
pub use compile::{build_subtr, compile_while, subtr_program, SUBTR};
pub use diff::{
    differential_check, fuzz, fuzz_cases, CaseReport, FuzzCase, FuzzConfig, FuzzReport, Verdict, STEP_FACTOR,
};
pub use eval::{eval_while, WhileResult};
pub use gen::{gen_random, GEN_VARS};
