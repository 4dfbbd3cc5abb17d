//! Property tests of the interpreter against a reference search, and of the
//! invariants that tie the two undo modes together.

mod common;

use std::sync::Arc;

use cinnamon::interp::{run, Direction, EventKind, Machine, Outcome, Program, RunOptions, TraceEvent};
use cinnamon::{normalize, parse, print, validate, Computed, Value};
use common::{arb_cinnamon, default_env, kinds, load, reference_run, run_checked, Flavor, RefOutcome, FIXTURES};
use num_bigint::BigUint;
use proptest::prelude::*;

const LIMIT: u64 = 4_000;

fn opts(journal: bool) -> RunOptions {
    let o = if journal {
        RunOptions::journal()
    } else {
        RunOptions::default()
    };
    o.with_limit(LIMIT)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_cinnamons_validate(c in arb_cinnamon(Flavor::Nat)) {
        prop_assert!(validate(&c).is_ok(), "{}", validate(&c));
    }

    #[test]
    fn journal_mode_matches_reference_search(c in arb_cinnamon(Flavor::Nat)) {
        let reference = reference_run(&c, &default_env(&c), 300);
        prop_assume!(reference != RefOutcome::Exhausted);
        let (outcome, _) = run_checked(&c, RunOptions::journal().with_limit(50_000));
        match (&reference, &outcome) {
            (RefOutcome::Success(a), Outcome::Success(b)) => prop_assert_eq!(a.values(), b.values()),
            (RefOutcome::Failure, Outcome::Failure) => {}
            (RefOutcome::TopLevelReturn, Outcome::RuntimeError(_)) => {}
            _ => prop_assert!(false, "reference {:?} vs machine {:?}\n{}", reference, outcome, print(&c)),
        }
    }

    #[test]
    fn normalization_preserves_outcomes(c in arb_cinnamon(Flavor::Nat), journal in any::<bool>()) {
        let n = normalize(&cinnamon::expand_macros(&c).unwrap());
        prop_assert!(validate(&n).is_ok());
        let a = run(&c, &[], opts(journal)).unwrap();
        let b = run(&n, &[], opts(journal)).unwrap();
        prop_assert_eq!(a.outcome, b.outcome);
        prop_assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn paper_and_journal_agree_on_inc_programs(c in arb_cinnamon(Flavor::IncOnly)) {
        let (paper, pt) = run_checked(&c, opts(false));
        let (journal, jt) = run_checked(&c, opts(true));
        prop_assert_eq!(&paper, &journal);
        prop_assert_eq!(kinds(&pt), kinds(&jt));
        prop_assert!(!matches!(paper, Outcome::RuntimeError(ref e) if e.kind == cinnamon::interp::RuntimeErrorKind::IrreversibleHistory));
    }

    #[test]
    fn stack_discipline_holds_everywhere(c in arb_cinnamon(Flavor::Nat), journal in any::<bool>()) {
        run_checked(&c, opts(journal));
    }

    #[test]
    fn stack_discipline_holds_in_str_mode(c in arb_cinnamon(Flavor::Str)) {
        run_checked(&c, opts(true));
    }

    /// Each backward `inc` restores exactly the value its forward execution
    /// overwrote, replayed from the trace's writes.
    #[test]
    fn backward_inc_is_local_inverse(c in arb_cinnamon(Flavor::IncOnly)) {
        let (_, trace) = run_checked(&c, opts(false));
        let mut open: Vec<&TraceEvent> = Vec::new();
        for e in &trace {
            match e.kind {
                EventKind::PrimFwd | EventKind::PrimFail => open.push(e),
                EventKind::PrimBwd => {
                    let fwd = open.pop().expect("backward step without forward");
                    prop_assert_eq!(&fwd.arrow, &e.arrow);
                    prop_assert_eq!(e.mode, Direction::Bwd);
                    for (w_fwd, w_bwd) in fwd.writes.iter().zip(&e.writes) {
                        prop_assert_eq!(&w_fwd.0, &w_bwd.0);
                        prop_assert_eq!(&w_bwd.2, &w_fwd.1);
                    }
                    prop_assert_eq!(fwd.writes.len(), e.writes.len());
                }
                _ => {}
            }
        }
    }

    /// Journal mode: backing out of a call leaves the environment exactly as
    /// it was before the call arrow was tried.
    #[test]
    fn journal_restores_environment_around_calls(c in arb_cinnamon(Flavor::Nat)) {
        let program = Arc::new(Program::load(&c).unwrap());
        let env = program.initial_env();
        let mut m = Machine::new(program, env, opts(true));
        let mut open: Vec<(String, Vec<Value>)> = Vec::new();
        loop {
            let before = m.env().values().to_vec();
            let mut events = Vec::new();
            let done = m.step(&mut events).is_some();
            for e in &events {
                match e.kind {
                    EventKind::Call => open.push((e.arrow.clone().unwrap(), before.clone())),
                    EventKind::UncallBwd => {
                        let (arrow, snapshot) = open.pop().expect("uncall without call");
                        prop_assert_eq!(Some(&arrow), e.arrow.as_ref());
                        prop_assert_eq!(m.env().values(), &snapshot[..]);
                    }
                    _ => {}
                }
            }
            if done {
                break;
            }
        }
    }

    #[test]
    fn backward_steps_never_fail_and_failures_unwind(c in arb_cinnamon(Flavor::Nat), journal in any::<bool>()) {
        let (_, trace) = run_checked(&c, opts(journal));
        for (i, e) in trace.iter().enumerate() {
            if e.kind == EventKind::PrimFail {
                prop_assert_eq!(e.mode, Direction::Fwd);
                let next = trace[i + 1..].iter().find(|n| n.kind != EventKind::TryArrow);
                if let Some(n) = next {
                    if !matches!(n.kind, EventKind::HaltLimit) {
                        prop_assert_eq!(n.kind, EventKind::PrimBwd);
                        prop_assert_eq!(&n.arrow, &e.arrow);
                    }
                }
            }
        }
    }

    #[test]
    fn runs_are_deterministic(c in arb_cinnamon(Flavor::Nat)) {
        let a = run(&c, &[], opts(false)).unwrap();
        let b = run(&c, &[], opts(false)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn halting_states_match_outcomes(c in arb_cinnamon(Flavor::Nat), journal in any::<bool>()) {
        let program = Arc::new(Program::load(&c).unwrap());
        let env = program.initial_env();
        let mut m = Machine::new(program, env, opts(journal));
        let mut trace = Vec::new();
        let outcome = m.run(&mut trace).clone();
        let last = trace.last().unwrap().kind;
        prop_assert_eq!(outcome.is_success(), last == EventKind::HaltSuccess);
        if outcome == Outcome::Failure {
            prop_assert!(m.arr_stack().is_empty());
            prop_assert!(m.remaining().is_empty());
            let main = c.main_subnet().unwrap();
            prop_assert_eq!(m.state(), main.init.as_state().unwrap());
        }
    }

    #[test]
    fn arguments_beyond_the_inputs_are_ignored(
        x in 0u64..10,
        y in 0u64..10,
        extra in prop::collection::vec(0u64..10, 0..5),
    ) {
        let c = load("fig3.cin");
        let nats = |xs: &[u64]| xs.iter().map(|&v| BigUint::from(v)).collect::<Vec<_>>();
        let base = cinnamon::compute(&c, &nats(&[x, y]), RunOptions::default()).unwrap();
        prop_assert_eq!(&base, &Computed::Value(BigUint::from(x.saturating_sub(y))));
        let mut args = vec![x, y];
        args.extend(&extra);
        prop_assert_eq!(cinnamon::compute(&c, &nats(&args), RunOptions::default()).unwrap(), base);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn print_then_parse_is_identity(c in prop_oneof![
        arb_cinnamon(Flavor::Nat),
        arb_cinnamon(Flavor::Str),
        arb_cinnamon(Flavor::IncOnly),
    ]) {
        let text = print(&c);
        let back = parse(&text).unwrap_or_else(|d| panic!("{d:?}\n{text}"));
        prop_assert_eq!(back, c);
    }

    #[test]
    fn normalize_is_idempotent(c in arb_cinnamon(Flavor::Nat)) {
        let once = normalize(&cinnamon::expand_macros(&c).unwrap());
        prop_assert_eq!(normalize(&once), once.clone());
        prop_assert!(cinnamon::normalize::is_normalized(&once));
    }
}

#[test]
fn fixtures_keep_the_stack_discipline_and_normalize_faithfully() {
    for name in FIXTURES {
        let c = load(name);
        for journal in [false, true] {
            let (a, ta) = run_checked(&c, opts(journal));
            let (b, tb) = run_checked(&normalize(&cinnamon::expand_macros(&c).unwrap()), opts(journal));
            assert_eq!(a, b, "{name}");
            assert_eq!(ta, tb, "{name}");
        }
    }
}
