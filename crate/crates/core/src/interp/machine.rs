use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::value::Value;

use super::env::Environment;
use super::prim::{self, PrimError};
use super::program::{Arg, Item, Program, Target};
use super::trace::{Direction, EventKind, TraceEvent, TraceSink, Write3};

pub const DEFAULT_STEP_LIMIT: u64 = 1_000_000;

/// How backward traversal undoes action primitives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UndoMode {
    /// Backward actions: `inc` decrements, everything else is the identity.
    #[default]
    Paper,
    /// Exact restoration of the prior values logged by each action arrow.
    Journal,
}

impl fmt::Display for UndoMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UndoMode::Paper => "paper",
            UndoMode::Journal => "journal",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub step_limit: u64,
    pub undo: UndoMode,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            step_limit: DEFAULT_STEP_LIMIT,
            undo: UndoMode::Paper,
        }
    }
}

impl RunOptions {
    pub fn journal() -> Self {
        RunOptions {
            undo: UndoMode::Journal,
            ..Self::default()
        }
    }

    pub fn with_limit(mut self, step_limit: u64) -> Self {
        self.step_limit = step_limit;
        self
    }
}

/// A suspended caller, pushed on `subnet_ST` at call time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub return_to: Target,
    /// Index into `out(source)` of the first unattempted arrow when the call
    /// was made. Kept for completeness; the paired arrow record is what
    /// backtracking consults.
    pub remaining_at_call: usize,
    pub caller: usize,
    pub caller_params: Vec<(usize, Value)>,
    pub call_arrow: usize,
}

/// One entry of `arr_ST`. Arrow and slot fields are indices into the
/// machine's [`Program`]; `remaining` is the index into `out(source)` of the
/// first arrow not yet attempted. Rare entries are boxed to keep the common
/// arrow record small, since forward runs push one per step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArrStEntry {
    ArrowRec { arrow: usize, remaining: usize },
    CallSep(Box<CallSep>),
    RetMark(Box<RetMark>),
    Journal(Box<JournalRec>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CallSep {
    pub call_arrow: usize,
    pub callee: usize,
    /// Callee formals as they were before binding.
    pub prebind: Vec<(usize, Value)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RetMark {
    pub frame: Frame,
    pub callee: usize,
    /// Prior values of everything the return step wrote.
    pub undo: Vec<(usize, Value)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JournalRec {
    pub arrow: usize,
    pub remaining: usize,
    pub writes: Vec<(usize, Value)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuntimeErrorKind {
    IrreversibleHistory,
    TopLevelReturn,
    ConsNonSymbolHead,
    ModeMismatch,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuntimeError {
    pub kind: RuntimeErrorKind,
    pub subnet: String,
    pub state: String,
    pub arrow: Option<String>,
    pub message: String,
}

impl fmt::Display for RuntimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in subnet {} at {}", self.message, self.subnet, self.state)?;
        if let Some(a) = &self.arrow {
            write!(f, " (arrow {a})")?;
        }
        Ok(())
    }
}

impl std::error::Error for RuntimeError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success(Environment),
    Failure,
    StepLimit,
    RuntimeError(RuntimeError),
}

impl Outcome {
    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Success(_))
    }

    pub fn env(&self) -> Option<&Environment> {
        match self {
            Outcome::Success(env) => Some(env),
            _ => None,
        }
    }
}

struct Fault {
    kind: RuntimeErrorKind,
    arrow: Option<usize>,
    message: String,
}

impl Fault {
    fn prim(e: PrimError, arrow: usize) -> Fault {
        let kind = match &e {
            PrimError::ConsNonSymbolHead { .. } => RuntimeErrorKind::ConsNonSymbolHead,
            PrimError::IrreversibleHistory { .. } => RuntimeErrorKind::IrreversibleHistory,
            PrimError::ModeMismatch { .. } | PrimError::UnknownVariable(_) => RuntimeErrorKind::ModeMismatch,
        };
        Fault {
            kind,
            arrow: Some(arrow),
            message: e.to_string(),
        }
    }
}

/// The backtracking interpreter's full state between steps.
#[derive(Clone, Debug)]
pub struct Machine {
    program: Arc<Program>,
    subnet: usize,
    position: Target,
    remaining: usize,
    env: Environment,
    arr_st: Vec<ArrStEntry>,
    subnet_st: Vec<Frame>,
    steps: u64,
    options: RunOptions,
    outcome: Option<Outcome>,
    separators: usize,
    marks: usize,
}

impl Machine {
    /// Starting configuration: main subnet, its initial state, FORW = 1.
    /// `env` must be an environment over `program`'s variables.
    pub fn new(program: Arc<Program>, mut env: Environment, options: RunOptions) -> Machine {
        assert_eq!(env.names(), program.variables(), "environment does not match program");
        env.forw = true;
        env.failure = false;
        let subnet = program.main;
        let init = program.subnets[subnet].init;
        Machine {
            program,
            subnet,
            position: Target::State(init),
            remaining: 0,
            env,
            arr_st: Vec::new(),
            subnet_st: Vec::new(),
            steps: 0,
            options,
            outcome: None,
            separators: 0,
            marks: 0,
        }
    }

    pub fn program(&self) -> &Arc<Program> {
        &self.program
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn outcome(&self) -> Option<&Outcome> {
        self.outcome.as_ref()
    }

    pub fn is_halted(&self) -> bool {
        self.outcome.is_some()
    }

    pub fn current_subnet(&self) -> &str {
        self.program.subnet_name(self.subnet)
    }

    /// Current state id, or `RETURN`/`FINISH` for the system nodes.
    pub fn state(&self) -> &str {
        match self.position {
            Target::State(s) => self.program.state_id(s),
            Target::Return => "RETURN",
            Target::Finish => "FINISH",
        }
    }

    /// Ids of the arrows still in REMAINING.
    pub fn remaining(&self) -> Vec<&str> {
        self.out()[self.remaining.min(self.out().len())..]
            .iter()
            .map(|&a| self.program.arrow_id(a))
            .collect()
    }

    pub fn arr_stack(&self) -> &[ArrStEntry] {
        &self.arr_st
    }

    pub fn subnet_stack(&self) -> &[Frame] {
        &self.subnet_st
    }

    /// Recounts the stacks: `|subnet_ST| = #CallSep − #RetMark`.
    pub fn check_stack_discipline(&self) -> bool {
        let (mut seps, mut marks) = (0usize, 0usize);
        for e in &self.arr_st {
            match e {
                ArrStEntry::CallSep(_) => seps += 1,
                ArrStEntry::RetMark(_) => marks += 1,
                _ => {}
            }
        }
        seps >= marks && self.subnet_st.len() == seps - marks
    }

    fn out(&self) -> &[usize] {
        match self.position {
            Target::State(s) => &self.program.states[s].out,
            _ => &[],
        }
    }

    fn place(&self, t: Target) -> String {
        match t {
            Target::State(s) => self.program.state_id(s).to_string(),
            Target::Return => "RETURN".to_string(),
            Target::Finish => "FINISH".to_string(),
        }
    }

    /// Runs until halted.
    pub fn run<S: TraceSink + ?Sized>(&mut self, sink: &mut S) -> &Outcome {
        while self.outcome.is_none() {
            self.step(sink);
        }
        self.outcome.as_ref().unwrap()
    }

    /// Performs one transition. Returns the outcome once the machine halts;
    /// stepping a halted machine does nothing.
    pub fn step<S: TraceSink + ?Sized>(&mut self, sink: &mut S) -> Option<&Outcome> {
        if self.outcome.is_some() {
            return self.outcome.as_ref();
        }
        self.steps += 1;
        let mut ev = Emit {
            step: self.steps,
            mode: if self.env.forw { Direction::Fwd } else { Direction::Bwd },
            sink,
        };
        let result = if self.env.forw {
            self.forward(&mut ev)
        } else {
            self.backward(&mut ev)
        };
        if let Err(fault) = result {
            let err = RuntimeError {
                kind: fault.kind,
                subnet: self.current_subnet().to_string(),
                state: self.state().to_string(),
                arrow: fault.arrow.map(|a| self.program.arrow_id(a).to_string()),
                message: fault.message,
            };
            self.emit(&mut ev, EventKind::RuntimeError, fault.arrow, self.position, None, &[]);
            self.outcome = Some(Outcome::RuntimeError(err));
        } else if self.outcome.is_none() && self.steps >= self.options.step_limit {
            self.emit(&mut ev, EventKind::HaltLimit, None, self.position, None, &[]);
            self.outcome = Some(Outcome::StepLimit);
        }
        debug_assert_eq!(self.subnet_st.len() + self.marks, self.separators);
        debug_assert!(!self.env.failure);
        self.outcome.as_ref()
    }

    #[allow(clippy::too_many_arguments)]
    fn emit<S: TraceSink + ?Sized>(
        &self,
        ev: &mut Emit<'_, S>,
        kind: EventKind,
        arrow: Option<usize>,
        from: Target,
        to: Option<Target>,
        writes: &[(usize, Value)],
    ) {
        if !ev.sink.enabled() {
            return;
        }
        let subnet = match arrow {
            Some(a) => self.program.arrows[a].subnet,
            None => self.subnet,
        };
        let writes = writes
            .iter()
            .map(|(s, old)| Write3(self.env.name(*s).to_string(), render(old), render(self.env.at(*s))))
            .collect();
        ev.sink.record(TraceEvent {
            step: ev.step,
            mode: ev.mode,
            kind,
            subnet: self.program.subnet_name(subnet).to_string(),
            arrow: arrow.map(|a| self.program.arrow_id(a).to_string()),
            from: self.place(from),
            to: to.map(|t| self.place(t)),
            writes,
        });
    }

    fn forward<S: TraceSink + ?Sized>(&mut self, ev: &mut Emit<'_, S>) -> Result<(), Fault> {
        let Some(&a) = self.out().get(self.remaining) else {
            // F1
            self.env.forw = false;
            return Ok(());
        };
        let rest = self.remaining + 1;
        let program = Arc::clone(&self.program);
        let arrow = &program.arrows[a];
        let here = self.position;
        self.emit(ev, EventKind::TryArrow, Some(a), here, Some(arrow.target), &[]);
        match &arrow.item {
            None => {
                self.arr_st.push(ArrStEntry::ArrowRec {
                    arrow: a,
                    remaining: rest,
                });
                self.emit(ev, EventKind::PrimFwd, Some(a), here, Some(arrow.target), &[]);
                self.enter(arrow.target, ev)
            }
            Some(Item::Prim(p)) => {
                let journal = self.options.undo == UndoMode::Journal && p.is_action();
                let mut undo = Vec::new();
                let log = (journal || ev.sink.enabled()).then_some(&mut undo);
                prim::forward(p, &mut self.env, log).map_err(|e| Fault::prim(e, a))?;
                let record = if journal {
                    ArrStEntry::Journal(Box::new(JournalRec {
                        arrow: a,
                        remaining: rest,
                        writes: if ev.sink.enabled() {
                            undo.clone()
                        } else {
                            std::mem::take(&mut undo)
                        },
                    }))
                } else {
                    ArrStEntry::ArrowRec {
                        arrow: a,
                        remaining: rest,
                    }
                };
                self.arr_st.push(record);
                if self.env.failure {
                    // REMAINING empties so the next backward step consumes
                    // this record before any alternative is tried.
                    self.env.failure = false;
                    self.remaining = program.states[arrow.source].out.len();
                    self.emit(ev, EventKind::PrimFail, Some(a), here, Some(arrow.target), &undo);
                    self.env.forw = false;
                    Ok(())
                } else {
                    self.emit(ev, EventKind::PrimFwd, Some(a), here, Some(arrow.target), &undo);
                    self.enter(arrow.target, ev)
                }
            }
            Some(Item::Call { callee, actuals }) => {
                let callee_info = &program.subnets[*callee];
                let values: Vec<Value> = actuals
                    .iter()
                    .map(|x| match x {
                        Arg::Var(s) => self.env.at(*s).clone(),
                        Arg::Const(v) => v.clone(),
                    })
                    .collect();
                let caller_params = program.subnets[self.subnet]
                    .formals
                    .iter()
                    .map(|&s| (s, self.env.at(s).clone()))
                    .collect();
                let mut prebind = Vec::with_capacity(values.len());
                for (&f, v) in callee_info.formals.iter().zip(values) {
                    prebind.push((f, self.env.replace(f, v)));
                }
                self.arr_st.push(ArrStEntry::ArrowRec {
                    arrow: a,
                    remaining: rest,
                });
                self.subnet_st.push(Frame {
                    return_to: arrow.target,
                    remaining_at_call: rest,
                    caller: self.subnet,
                    caller_params,
                    call_arrow: a,
                });
                self.subnet = *callee;
                self.position = Target::State(callee_info.init);
                self.remaining = 0;
                self.emit(ev, EventKind::Call, Some(a), here, Some(self.position), &prebind);
                self.arr_st.push(ArrStEntry::CallSep(Box::new(CallSep {
                    call_arrow: a,
                    callee: *callee,
                    prebind,
                })));
                self.separators += 1;
                Ok(())
            }
        }
    }

    fn enter<S: TraceSink + ?Sized>(&mut self, target: Target, ev: &mut Emit<'_, S>) -> Result<(), Fault> {
        match target {
            Target::State(_) => {
                self.position = target;
                self.remaining = 0;
                Ok(())
            }
            Target::Finish => {
                let from = self.position;
                self.position = Target::Finish;
                self.remaining = 0;
                self.emit(ev, EventKind::HaltSuccess, None, from, Some(Target::Finish), &[]);
                self.outcome = Some(Outcome::Success(self.env.clone()));
                Ok(())
            }
            Target::Return => self.return_step(ev),
        }
    }

    fn return_step<S: TraceSink + ?Sized>(&mut self, ev: &mut Emit<'_, S>) -> Result<(), Fault> {
        let Some(frame) = self.subnet_st.pop() else {
            self.position = Target::Return;
            return Err(Fault {
                kind: RuntimeErrorKind::TopLevelReturn,
                arrow: None,
                message: "RETURN reached in the main subnet with no active call".into(),
            });
        };
        let program = Arc::clone(&self.program);
        let callee = self.subnet;
        let Some(Item::Call { actuals, .. }) = &program.arrows[frame.call_arrow].item else {
            unreachable!("frame does not point at a call arrow");
        };
        let results: Vec<Value> = program.subnets[callee]
            .formals
            .iter()
            .map(|&s| self.env.at(s).clone())
            .collect();
        let mut undo = Vec::new();
        for (s, v) in &frame.caller_params {
            undo.push((*s, self.env.replace(*s, v.clone())));
        }
        for (x, v) in actuals.iter().zip(results) {
            if let Arg::Var(s) = x {
                undo.push((*s, self.env.replace(*s, v)));
            }
        }
        self.subnet = frame.caller;
        let return_to = frame.return_to;
        self.emit(
            ev,
            EventKind::Return,
            Some(frame.call_arrow),
            Target::Return,
            Some(return_to),
            &undo,
        );
        self.arr_st
            .push(ArrStEntry::RetMark(Box::new(RetMark { frame, callee, undo })));
        self.marks += 1;
        self.enter(return_to, ev)
    }

    fn backward<S: TraceSink + ?Sized>(&mut self, ev: &mut Emit<'_, S>) -> Result<(), Fault> {
        if self.remaining < self.out().len() {
            // B1
            self.env.forw = true;
            return Ok(());
        }
        let Some(entry) = self.arr_st.pop() else {
            // B2
            debug_assert_eq!(self.subnet, self.program.main);
            debug_assert_eq!(
                self.position,
                Target::State(self.program.subnets[self.program.main].init)
            );
            self.emit(ev, EventKind::HaltFailure, None, self.position, None, &[]);
            self.outcome = Some(Outcome::Failure);
            return Ok(());
        };
        match entry {
            ArrStEntry::ArrowRec { arrow, remaining } => self.back_over(arrow, remaining, None, ev),
            ArrStEntry::Journal(j) => {
                let JournalRec {
                    arrow,
                    remaining,
                    writes,
                } = *j;
                self.back_over(arrow, remaining, Some(writes), ev)
            }
            ArrStEntry::CallSep(sep) => {
                let CallSep {
                    call_arrow, prebind, ..
                } = *sep;
                let restored = self.restore(prebind);
                let frame = self.subnet_st.pop().expect("call separator without frame");
                self.separators -= 1;
                self.subnet = frame.caller;
                let from = self.position;
                match self.arr_st.pop() {
                    Some(ArrStEntry::ArrowRec { arrow, remaining }) if arrow == call_arrow => {
                        let source = Target::State(self.program.arrows[arrow].source);
                        self.emit(ev, EventKind::UncallBwd, Some(arrow), from, Some(source), &restored);
                        self.position = source;
                        self.remaining = remaining;
                        Ok(())
                    }
                    other => unreachable!("call separator not preceded by its call arrow: {other:?}"),
                }
            }
            ArrStEntry::RetMark(mark) => {
                let RetMark { frame, callee, undo } = *mark;
                let restored = self.restore(undo);
                let call_arrow = frame.call_arrow;
                let from = self.position;
                self.subnet_st.push(frame);
                self.marks -= 1;
                self.subnet = callee;
                self.position = Target::Return;
                self.remaining = 0;
                self.emit(
                    ev,
                    EventKind::ReenterBwd,
                    Some(call_arrow),
                    from,
                    Some(Target::Return),
                    &restored,
                );
                Ok(())
            }
        }
    }

    /// Writes back logged prior values, newest first. Returns the overwritten
    /// values in the same form for tracing.
    fn restore(&mut self, log: Vec<(usize, Value)>) -> Vec<(usize, Value)> {
        let mut replaced = Vec::with_capacity(log.len());
        for (s, v) in log.into_iter().rev() {
            replaced.push((s, self.env.replace(s, v)));
        }
        replaced
    }

    fn back_over<S: TraceSink + ?Sized>(
        &mut self,
        arrow: usize,
        remaining: usize,
        journal: Option<Vec<(usize, Value)>>,
        ev: &mut Emit<'_, S>,
    ) -> Result<(), Fault> {
        let program = Arc::clone(&self.program);
        let info = &program.arrows[arrow];
        let from = self.position;
        let source = Target::State(info.source);
        let kind = match &info.item {
            Some(Item::Call { .. }) => EventKind::UncallBwd,
            _ => EventKind::PrimBwd,
        };
        let writes = match (journal, &info.item) {
            (Some(log), _) => self.restore(log),
            (None, Some(Item::Prim(p))) => {
                let mut undo = Vec::new();
                let log = ev.sink.enabled().then_some(&mut undo);
                prim::backward(p, &mut self.env, log).map_err(|e| Fault::prim(e, arrow))?;
                undo
            }
            (None, _) => Vec::new(),
        };
        self.subnet = info.subnet;
        self.emit(ev, kind, Some(arrow), from, Some(source), &writes);
        self.position = source;
        self.remaining = remaining;
        Ok(())
    }
}

struct Emit<'s, S: TraceSink + ?Sized> {
    step: u64,
    mode: Direction,
    sink: &'s mut S,
}

fn render(v: &Value) -> String {
    match v {
        Value::Nat(n) => n.to_string(),
        Value::Str(s) => s.clone(),
    }
}
