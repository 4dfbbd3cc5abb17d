use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Fwd,
    Bwd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    TryArrow,
    PrimFwd,
    PrimBwd,
    PrimFail,
    Call,
    Return,
    ReenterBwd,
    UncallBwd,
    HaltSuccess,
    HaltFailure,
    HaltLimit,
    RuntimeError,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::TryArrow => "try_arrow",
            EventKind::PrimFwd => "prim_fwd",
            EventKind::PrimBwd => "prim_bwd",
            EventKind::PrimFail => "prim_fail",
            EventKind::Call => "call",
            EventKind::Return => "return",
            EventKind::ReenterBwd => "reenter_bwd",
            EventKind::UncallBwd => "uncall_bwd",
            EventKind::HaltSuccess => "halt_success",
            EventKind::HaltFailure => "halt_failure",
            EventKind::HaltLimit => "halt_limit",
            EventKind::RuntimeError => "runtime_error",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One variable update: name, old value, new value. Values are rendered as
/// decimal naturals or raw string contents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Write3(pub String, pub String, pub String);

/// One line of a `.trace.jsonl` file. Field order is part of the format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub step: u64,
    pub mode: Direction,
    pub kind: EventKind,
    pub subnet: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrow: Option<String>,
    pub from: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<String>,
    pub writes: Vec<Write3>,
}

impl TraceEvent {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace events always serialize")
    }
}

/// Receives events as the machine produces them. Sinks that report
/// `enabled() == false` let the machine skip building events entirely.
pub trait TraceSink {
    fn record(&mut self, event: TraceEvent);

    fn enabled(&self) -> bool {
        true
    }
}

impl TraceSink for Vec<TraceEvent> {
    fn record(&mut self, event: TraceEvent) {
        self.push(event);
    }
}

/// Discards everything.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoTrace;

impl TraceSink for NoTrace {
    fn record(&mut self, _: TraceEvent) {}

    fn enabled(&self) -> bool {
        false
    }
}

/// Streams events as JSON lines. The first I/O error is kept and later
/// events are dropped.
pub struct JsonlSink<W: Write> {
    out: W,
    error: Option<io::Error>,
}

impl<W: Write> JsonlSink<W> {
    pub fn new(out: W) -> Self {
        JsonlSink { out, error: None }
    }

    pub fn finish(mut self) -> io::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> TraceSink for JsonlSink<W> {
    fn record(&mut self, event: TraceEvent) {
        if self.error.is_some() {
            return;
        }
        if let Err(e) = writeln!(self.out, "{}", event.to_json()) {
            self.error = Some(e);
        }
    }
}

pub fn to_jsonl(events: &[TraceEvent]) -> String {
    let mut s = String::new();
    for e in events {
        s.push_str(&e.to_json());
        s.push('\n');
    }
    s
}

pub fn from_jsonl(text: &str) -> serde_json::Result<Vec<TraceEvent>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}
