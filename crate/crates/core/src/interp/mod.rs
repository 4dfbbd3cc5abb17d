//! The backtracking interpreter.
//!
//! [`Program::load`] validates, expands and normalizes a cinnamon once; any
//! number of [`Machine`]s can then run over the shared program. [`run`] and
//! [`compute`] wrap the whole pipeline.

mod env;
mod machine;
mod prim;
mod program;
mod trace;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use thiserror::Error;

use crate::model::Cinnamon;
use crate::value::{Mode, Value};

pub use env::Environment;
pub use machine::{
    ArrStEntry, CallSep, Frame, JournalRec, Machine, Outcome, RetMark, RunOptions, RuntimeError, RuntimeErrorKind,
    UndoMode, DEFAULT_STEP_LIMIT,
};
pub use prim::{exec_backward_prim, exec_forward_prim, PrimError};
pub use program::{LoadError, Program, Target};
pub use trace::{from_jsonl, to_jsonl, Direction, EventKind, JsonlSink, NoTrace, TraceEvent, TraceSink, Write3};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RunError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("`{0}` is not a variable of this cinnamon")]
    UnknownVariable(String),
    #[error("`{var}` expects a {expected} value")]
    ValueMode { var: String, expected: Mode },
    #[error("compute requires a nat-mode cinnamon")]
    NotNatMode,
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

/// Result of a complete run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub outcome: Outcome,
    pub steps: u64,
    pub trace: Vec<TraceEvent>,
}

/// Defaults overridden by `initial`.
pub fn initial_env(program: &Program, initial: &[(String, Value)]) -> Result<Environment, RunError> {
    let mut env = program.initial_env();
    for (name, value) in initial {
        if value.mode() != program.mode() {
            return Err(RunError::ValueMode {
                var: name.clone(),
                expected: program.mode(),
            });
        }
        if env.set(name, value.clone()).is_none() {
            return Err(RunError::UnknownVariable(name.clone()));
        }
    }
    Ok(env)
}

/// Runs `c` from the main subnet's initial state and streams every event
/// into `sink`. Returns the outcome and the number of steps taken.
pub fn run_with_sink<S: TraceSink + ?Sized>(
    c: &Cinnamon,
    initial: &[(String, Value)],
    options: RunOptions,
    sink: &mut S,
) -> Result<(Outcome, u64), RunError> {
    let program = Arc::new(Program::load(c)?);
    let env = initial_env(&program, initial)?;
    let mut m = Machine::new(program, env, options);
    let outcome = m.run(sink).clone();
    Ok((outcome, m.steps()))
}

/// Runs `c` and collects the full trace.
pub fn run(c: &Cinnamon, initial: &[(String, Value)], options: RunOptions) -> Result<Run, RunError> {
    let mut trace = Vec::new();
    let (outcome, steps) = run_with_sink(c, initial, options, &mut trace)?;
    Ok(Run { outcome, steps, trace })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Undefined {
    StepLimit,
    Failure,
}

/// Value of the j-ary function computed by a cinnamon.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Computed {
    Value(BigUint),
    Undefined(Undefined),
}

impl Computed {
    pub fn value(&self) -> Option<&BigUint> {
        match self {
            Computed::Value(v) => Some(v),
            Computed::Undefined(_) => None,
        }
    }
}

impl fmt::Display for Computed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Computed::Value(v) => write!(f, "{v}"),
            Computed::Undefined(Undefined::StepLimit) => f.write_str("undefined (step limit)"),
            Computed::Undefined(Undefined::Failure) => f.write_str("undefined (failure)"),
        }
    }
}

/// Binds `x_i = args[i-1]` for `1 <= i <= min(j, n-1)` over the variable
/// order, runs, and reads `x_0`. Arguments beyond `n-1` are ignored.
pub fn compute_program(program: &Arc<Program>, args: &[BigUint], options: RunOptions) -> Result<Computed, RunError> {
    if program.mode() != Mode::Nat {
        return Err(RunError::NotNatMode);
    }
    let mut env = program.initial_env();
    let n = env.len();
    for (i, a) in args.iter().enumerate().take(n.saturating_sub(1)) {
        *env.at_mut(i + 1) = Value::Nat(a.clone());
    }
    let mut m = Machine::new(Arc::clone(program), env, options);
    match m.run(&mut NoTrace) {
        Outcome::Success(env) => Ok(Computed::Value(
            env.values()
                .first()
                .and_then(Value::as_nat)
                .cloned()
                .unwrap_or_default(),
        )),
        Outcome::Failure => Ok(Computed::Undefined(Undefined::Failure)),
        Outcome::StepLimit => Ok(Computed::Undefined(Undefined::StepLimit)),
        Outcome::RuntimeError(e) => Err(RunError::Runtime(e.clone())),
    }
}

pub fn compute(c: &Cinnamon, args: &[BigUint], options: RunOptions) -> Result<Computed, RunError> {
    if c.mode != Mode::Nat {
        return Err(RunError::NotNatMode);
    }
    compute_program(&Arc::new(Program::load(c)?), args, options)
}
