//! Shared test support: a proptest generator of random cinnamons and a
//! reference search that interprets multi-item labels directly.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use cinnamon::interp::{exec_forward_prim, Environment, EventKind, Machine, Outcome, Program, RunOptions, TraceEvent};
use cinnamon::model::{Actual, LabelItem, Macro, NodeRef, Operand, Primitive, Subnet};
use cinnamon::{expand_macros, parse_named, Cinnamon, Mode, Value};
use proptest::prelude::*;

pub fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

pub fn load(name: &str) -> Cinnamon {
    let text = fs::read_to_string(examples().join(name)).unwrap();
    parse_named(&text, name).unwrap_or_else(|d| panic!("{name}: {d:?}"))
}

pub const FIXTURES: &[&str] = &["fig1.cin", "fig3.cin", "fig4.cin", "fig5.cin", "fig7.cin"];

/// Which primitives the generator may draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    /// `inc`, `if nonEq`, calls and λ: fully reversible under paper undo.
    IncOnly,
    /// Every nat primitive.
    Nat,
    /// Every str primitive.
    Str,
}

type RawItem = (u8, u8, u8, u8);
type RawArrow = (u8, u8, Vec<RawItem>);

#[derive(Clone, Debug)]
struct RawSubnet {
    formals: usize,
    locals: usize,
    states: usize,
    arrows: Vec<RawArrow>,
}

fn raw_subnet() -> impl Strategy<Value = RawSubnet> {
    let item = (any::<u8>(), any::<u8>(), any::<u8>(), any::<u8>());
    let arrow = (any::<u8>(), any::<u8>(), prop::collection::vec(item, 0..=3));
    (0..=2usize, 1..=3usize, 2..=4usize, prop::collection::vec(arrow, 1..=7)).prop_map(
        |(formals, locals, states, arrows)| RawSubnet {
            formals,
            locals,
            states,
            arrows,
        },
    )
}

fn pick<T: Clone>(xs: &[T], k: u8) -> T {
    xs[k as usize % xs.len()].clone()
}

const SYMBOLS: [char; 3] = ['a', 'b', '+'];

struct Build<'a> {
    flavor: Flavor,
    names: &'a [String],
    arities: &'a [usize],
    macro_arity: Option<usize>,
}

impl Build<'_> {
    fn item(&self, index: usize, vars: &[String], raw: RawItem) -> LabelItem {
        let (kind, a, b, c) = raw;
        let v = |k: u8| pick(vars, k);
        let callees = index + 1..self.names.len();
        if kind % 8 == 7 && !callees.is_empty() {
            let callee = callees.start + a as usize % callees.len();
            let actuals = (0..self.arities[callee])
                .map(|i| {
                    let k = b.wrapping_add(i as u8 * 31);
                    if k % 5 == 0 {
                        Actual::Const(match self.flavor {
                            Flavor::Str => Value::str(["", "a", "ab+"][k as usize % 3]),
                            _ => Value::nat(u64::from(c % 3)),
                        })
                    } else {
                        Actual::Var(v(k))
                    }
                })
                .collect();
            return LabelItem::call(self.names[callee].clone(), actuals);
        }
        if kind % 8 == 6 {
            if let Some(n) = self.macro_arity {
                let args = (0..n).map(|i| Actual::Var(v(a.wrapping_add(i as u8 * 7)))).collect();
                return LabelItem::Macro { name: "m".into(), args };
            }
        }
        LabelItem::Prim(self.prim(vars, kind, a, b, c))
    }

    fn prim(&self, vars: &[String], kind: u8, a: u8, b: u8, c: u8) -> Primitive {
        let v = |k: u8| pick(vars, k);
        match self.flavor {
            Flavor::IncOnly => match kind % 3 {
                0 | 1 => Primitive::Inc(v(a)),
                _ => Primitive::IfNonEq(v(a), v(b)),
            },
            Flavor::Nat => match kind % 5 {
                0 => Primitive::Clear(v(a)),
                1 => Primitive::Copy(v(a), v(b)),
                2 | 3 => Primitive::Inc(v(a)),
                _ => Primitive::IfNonEq(v(a), v(b)),
            },
            Flavor::Str => {
                let operand = |k: u8| {
                    if k.is_multiple_of(3) {
                        Operand::Sym(pick(&SYMBOLS, k / 3))
                    } else {
                        Operand::Var(v(k))
                    }
                };
                match kind % 6 {
                    0 => Primitive::Sep(v(a), v(b), v(c)),
                    1 => Primitive::Cons(v(a), v(b), v(c)),
                    2 => Primitive::Clear(v(a)),
                    3 => Primitive::Copy(v(a), v(b)),
                    4 => Primitive::IfEq(operand(a), operand(b)),
                    _ => Primitive::IfEmpty(v(a)),
                }
            }
        }
    }
}

/// Random well-formed cinnamons: up to three subnets, calls only to later
/// subnets, optionally one macro. State graphs may loop, so runs need a
/// step limit.
pub fn arb_cinnamon(flavor: Flavor) -> impl Strategy<Value = Cinnamon> {
    let with_macro = flavor != Flavor::IncOnly;
    (
        prop::collection::vec(raw_subnet(), 1..=3),
        prop::collection::vec((any::<u8>(), any::<u8>(), any::<u8>(), any::<u8>()), 1..=3),
        any::<bool>(),
    )
        .prop_map(move |(raws, macro_body, use_macro)| build(flavor, raws, macro_body, with_macro && use_macro))
}

fn build(flavor: Flavor, raws: Vec<RawSubnet>, macro_body: Vec<RawItem>, use_macro: bool) -> Cinnamon {
    let mode = if flavor == Flavor::Str { Mode::Str } else { Mode::Nat };
    let names: Vec<String> = (0..raws.len()).map(|i| format!("N{i}")).collect();
    let arities: Vec<usize> = raws.iter().map(|r| r.formals).collect();
    let mut c = Cinnamon::new("Gen", mode, names[0].clone());

    let macro_arity = use_macro.then_some(2);
    if use_macro {
        let params = vec!["p".to_string(), "q".to_string()];
        let b = Build {
            flavor,
            names: &[],
            arities: &[],
            macro_arity: None,
        };
        let body = macro_body
            .into_iter()
            .map(|(kind, x, y, z)| LabelItem::Prim(b.prim(&params, kind, x, y, z)))
            .collect();
        c.macros.push(Macro {
            name: "m".into(),
            params,
            body,
            span: None,
        });
    }

    let b = Build {
        flavor,
        names: &names,
        arities: &arities,
        macro_arity,
    };
    for (i, raw) in raws.iter().enumerate() {
        let formals: Vec<String> = (0..raw.formals).map(|k| format!("f{i}_{k}")).collect();
        let locals: Vec<String> = (0..raw.locals).map(|k| format!("v{i}_{k}")).collect();
        let vars: Vec<String> = formals.iter().chain(&locals).cloned().collect();
        let states: Vec<String> = (0..raw.states).map(|k| format!("s{i}_{k}")).collect();
        let mut s = Subnet::new(names[i].clone(), formals, locals, NodeRef::state(states[0].clone()));
        for (src, tgt, items) in &raw.arrows {
            let source = pick(&states, *src);
            let target = match tgt % 8 {
                0 if i == 0 => NodeRef::Finish,
                0 | 1 if i > 0 => NodeRef::Return,
                1 => NodeRef::Finish,
                k => NodeRef::state(states[k as usize % states.len()].clone()),
            };
            let label = items.iter().map(|&r| b.item(i, &vars, r)).collect();
            s.push_arrow(source, target, label);
        }
        c.subnets.push(s);
    }
    c
}

/// Terminal result of the reference search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefOutcome {
    Success(Environment),
    Failure,
    TopLevelReturn,
    /// The search budget ran out; the case proves nothing.
    Exhausted,
}

#[derive(Clone)]
struct RefFrame<'c> {
    caller: &'c Subnet,
    callee: &'c Subnet,
    items: &'c [LabelItem],
    next: usize,
    target: &'c NodeRef,
    actuals: &'c [Actual],
    snapshot: Vec<Value>,
}

struct Search<'c> {
    c: &'c Cinnamon,
    budget: u64,
}

enum Step {
    Halt(RefOutcome),
    DeadEnd,
}

impl<'c> Search<'c> {
    fn state(&mut self, subnet: &'c Subnet, state: &str, env: &Environment, frames: &[RefFrame<'c>]) -> Step {
        for arrow in subnet.arrows.iter().filter(|a| a.source == state) {
            if self.budget == 0 {
                return Step::Halt(RefOutcome::Exhausted);
            }
            self.budget -= 1;
            let r = self.items(subnet, &arrow.label, 0, &arrow.target, env.clone(), frames.to_vec());
            if let Step::Halt(o) = r {
                return Step::Halt(o);
            }
        }
        Step::DeadEnd
    }

    fn items(
        &mut self,
        subnet: &'c Subnet,
        items: &'c [LabelItem],
        next: usize,
        target: &'c NodeRef,
        mut env: Environment,
        mut frames: Vec<RefFrame<'c>>,
    ) -> Step {
        let Some(item) = items.get(next) else {
            return self.enter(subnet, target, env, frames);
        };
        match item {
            LabelItem::Prim(p) => {
                env.forw = true;
                if exec_forward_prim(p, &mut env).is_err() {
                    // Errors of the str primitives are not modelled here.
                    return Step::Halt(RefOutcome::Exhausted);
                }
                if env.failure {
                    return Step::DeadEnd;
                }
                self.items(subnet, items, next + 1, target, env, frames)
            }
            LabelItem::Call { subnet: name, actuals } => {
                let callee = self.c.subnet(name).unwrap();
                let snapshot = subnet.formals.iter().map(|f| env.get(f).unwrap().clone()).collect();
                let bound: Vec<Value> = actuals
                    .iter()
                    .map(|a| match a {
                        Actual::Var(v) => env.get(v).unwrap().clone(),
                        Actual::Const(k) => k.clone(),
                    })
                    .collect();
                for (f, v) in callee.formals.iter().zip(bound) {
                    env.set(f, v);
                }
                frames.push(RefFrame {
                    caller: subnet,
                    callee,
                    items,
                    next: next + 1,
                    target,
                    actuals,
                    snapshot,
                });
                let init = callee.init.as_state().unwrap();
                self.state(callee, init, &env, &frames)
            }
            LabelItem::Macro { .. } => unreachable!("macros are expanded first"),
        }
    }

    fn enter(
        &mut self,
        subnet: &'c Subnet,
        target: &'c NodeRef,
        mut env: Environment,
        mut frames: Vec<RefFrame<'c>>,
    ) -> Step {
        match target {
            NodeRef::Finish => Step::Halt(RefOutcome::Success(env)),
            NodeRef::State(s) => self.state(subnet, s, &env, &frames),
            NodeRef::Return => {
                let Some(frame) = frames.pop() else {
                    return Step::Halt(RefOutcome::TopLevelReturn);
                };
                let results: Vec<Value> = frame
                    .callee
                    .formals
                    .iter()
                    .map(|f| env.get(f).unwrap().clone())
                    .collect();
                for (f, v) in frame.caller.formals.iter().zip(&frame.snapshot) {
                    env.set(f, v.clone());
                }
                for (a, v) in frame.actuals.iter().zip(results) {
                    if let Actual::Var(x) = a {
                        env.set(x, v);
                    }
                }
                self.items(frame.caller, frame.items, frame.next, frame.target, env, frames)
            }
        }
    }
}

/// Depth-first search for the first solution, with exact restoration on
/// backtracking. This is the meaning of a cinnamon under journal undo.
/// `budget` bounds the number of arrows tried.
pub fn reference_run(c: &Cinnamon, env: &Environment, budget: u64) -> RefOutcome {
    let c = expand_macros(c).unwrap();
    let mut search = Search { c: &c, budget };
    let main = c.main_subnet().unwrap();
    match search.state(main, main.init.as_state().unwrap(), env, &[]) {
        Step::Halt(o) => o,
        Step::DeadEnd => RefOutcome::Failure,
    }
}

/// Default environment over the variables of `c`.
pub fn default_env(c: &Cinnamon) -> Environment {
    Environment::new(c.variable_order(), c.mode)
}

/// Runs step by step, checking the stack discipline at every boundary.
pub fn run_checked(c: &Cinnamon, options: RunOptions) -> (Outcome, Vec<TraceEvent>) {
    let program = Arc::new(Program::load(c).unwrap());
    let env = program.initial_env();
    let mut m = Machine::new(program, env, options);
    let mut trace = Vec::new();
    assert!(m.check_stack_discipline());
    while m.step(&mut trace).is_none() {
        assert!(
            m.check_stack_discipline(),
            "stack discipline broken at step {}",
            m.steps()
        );
    }
    (m.outcome().unwrap().clone(), trace)
}

pub fn kinds(trace: &[TraceEvent]) -> Vec<(EventKind, Option<String>)> {
    trace.iter().map(|e| (e.kind, e.arrow.clone())).collect()
}
