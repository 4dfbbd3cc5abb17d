//! The acceptance suite: eight criteria, one PASS/FAIL line each. Run with
//! `cargo test --test acceptance -- --nocapture` to see the report.

mod common;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use cinnamon::interp::{run, to_jsonl, EventKind, Outcome, RunOptions};
use cinnamon::whilec::{build_subtr, fuzz, subtr_program, FuzzConfig};
use cinnamon::{compute, expand_macros, normalize, parse, print, Computed, Value};
use common::{arb_cinnamon, default_env, kinds, load, reference_run, run_checked, Flavor, RefOutcome, FIXTURES};
use num_bigint::BigUint;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

type Check = Result<String, String>;

/// Name, time budget and check.
type Criterion = (&'static str, Duration, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn nats(xs: &[u64]) -> Vec<BigUint> {
    xs.iter().map(|&x| BigUint::from(x)).collect()
}

fn val(n: u64) -> Computed {
    Computed::Value(BigUint::from(n))
}

fn samples(strategy: impl Strategy<Value = cinnamon::Cinnamon>, n: usize) -> Vec<cinnamon::Cinnamon> {
    let mut runner = TestRunner::deterministic();
    (0..n)
        .map(|_| strategy.new_tree(&mut runner).unwrap().current())
        .collect()
}

fn worked_values() -> Check {
    let c = load("fig3.cin");
    let cases: &[(&[u64], u64)] = &[
        (&[7, 3], 4),
        (&[7, 7], 0),
        (&[7, 0], 7),
        (&[3, 7], 0),
        (&[7], 7),
        (&[], 0),
        (&[7, 3, 8], 4),
        (&[7, 3, 8, 2], 4),
    ];
    for (args, want) in cases {
        let got = compute(&c, &nats(args), RunOptions::default()).map_err(|e| e.to_string())?;
        ensure(got == val(*want), || format!("f{args:?} = {got}, expected {want}"))?;
    }
    Ok(format!("{} values", cases.len()))
}

fn golden_trace() -> Check {
    use EventKind::*;
    let c = load("fig7.cin");
    let r = run(&c, &[], RunOptions::default()).map_err(|e| e.to_string())?;
    let narrated: Vec<(EventKind, &str)> = vec![
        (PrimFwd, "I/1"),
        (PrimFwd, "2/1"),
        (Call, "3/1"),
        (PrimFwd, "10/1"),
        (PrimBwd, "10/1"),
        (PrimFwd, "10/2"),
        (PrimFwd, "12/1"),
        (Return, "3/1"),
        (PrimFail, "4/1"),
        (PrimBwd, "4/1"),
        (ReenterBwd, "3/1"),
        (PrimBwd, "12/1"),
        (PrimBwd, "10/2"),
        (PrimFwd, "10/3"),
        (PrimFwd, "13/1"),
        (PrimFwd, "12/1"),
        (Return, "3/1"),
        (PrimFwd, "4/1"),
        (HaltSuccess, ""),
    ];
    let seen: Vec<(EventKind, String)> = r
        .trace
        .iter()
        .filter(|e| e.kind != TryArrow)
        .map(|e| (e.kind, e.arrow.clone().unwrap_or_default()))
        .collect();
    let want: Vec<(EventKind, String)> = narrated.iter().map(|(k, a)| (*k, a.to_string())).collect();
    ensure(seen == want, || format!("event order differs: {seen:?}"))?;
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("golden/fig7.trace.jsonl");
    let expected = fs::read_to_string(&golden).map_err(|e| format!("{}: {e}", golden.display()))?;
    ensure(to_jsonl(&r.trace) == expected, || {
        "trace differs from the golden file".into()
    })?;
    Ok(format!("{} events, golden file identical", r.trace.len()))
}

fn monus_grid() -> Check {
    let c = subtr_program();
    ensure(c.subnets[1] == build_subtr(), || {
        "monus program does not use build_subtr".into()
    })?;
    for x in 0..=12u64 {
        for y in 0..=12u64 {
            let got = compute(&c, &nats(&[x, y]), RunOptions::default()).map_err(|e| e.to_string())?;
            ensure(got == val(x.saturating_sub(y)), || format!("{x} monus {y} = {got}"))?;
        }
    }
    Ok("169 points".into())
}

fn differential_campaign() -> Check {
    let report = fuzz(FuzzConfig::default());
    let verdicts = report.verdicts().count();
    ensure(verdicts == 600, || format!("{verdicts} verdicts, expected 600"))?;
    ensure(report.disagree() == 0, || report.reproducers().join("\n"))?;
    ensure(report.failures() == 0, || {
        format!("{} compiled runs ended in Failure", report.failures())
    })?;
    Ok(format!("agree={} disagree=0 failures=0", report.agree()))
}

fn composed_sum() -> Check {
    let c = load("fig4.cin");
    for (x, y) in [(2u64, 3u64), (2, 2), (0, 4)] {
        let oracle = if x != y { x + y } else { 0 };
        let got = compute(&c, &nats(&[x, y]), RunOptions::default()).map_err(|e| e.to_string())?;
        ensure(got == val(oracle), || format!("({x}, {y}) -> {got}, expected {oracle}"))?;
    }
    Ok("3 spot checks".into())
}

/// Sentences of `E -> E + E | E * E | a | b | c` with exactly `n` symbols,
/// by splitting at every operator position.
fn sentences(n: usize, memo: &mut Vec<Option<Vec<String>>>) -> Vec<String> {
    if let Some(Some(s)) = memo.get(n) {
        return s.clone();
    }
    let mut out = Vec::new();
    if n == 1 {
        out.extend(["a", "b", "c"].map(String::from));
    }
    for left in 1..n.saturating_sub(1) {
        let right = n - 1 - left;
        for l in sentences(left, memo) {
            for r in sentences(right, memo) {
                for op in ['+', '*'] {
                    out.push(format!("{l}{op}{r}"));
                }
            }
        }
    }
    out.sort();
    out.dedup();
    if memo.len() <= n {
        memo.resize(n + 1, None);
    }
    memo[n] = Some(out.clone());
    out
}

fn recognizer() -> Check {
    let c = load("fig5.cin");
    let accepts = |s: &str| -> Result<bool, String> {
        let r = run(&c, &[("input".into(), Value::str(s))], RunOptions::journal()).map_err(|e| e.to_string())?;
        match r.outcome {
            Outcome::Success(_) => Ok(true),
            Outcome::Failure => Ok(false),
            other => Err(format!("{s:?}: {other:?}")),
        }
    };
    let mut memo = Vec::new();
    let language: Vec<String> = (1..=7).flat_map(|n| sentences(n, &mut memo)).collect();
    ensure(language.iter().any(|s| s == "a+b*c"), || "oracle misses a+b*c".into())?;
    for s in &language {
        ensure(accepts(s)?, || format!("rejected {s:?}"))?;
    }
    for s in ["", "+", "a+", "ab", "a**b"] {
        ensure(!accepts(s)?, || format!("accepted {s:?}"))?;
    }
    Ok(format!(
        "{} sentences accepted, 5 non-sentences rejected",
        language.len()
    ))
}

fn semantics_preservation() -> Check {
    let mut checked = 0;
    for name in FIXTURES {
        let c = load(name);
        let n = normalize(&expand_macros(&c).map_err(|e| e.to_string())?);
        for opts in [RunOptions::default(), RunOptions::journal()] {
            let a = run_checked(&c, opts);
            let b = run_checked(&n, opts);
            ensure(a == b, || format!("{name}: normalized run differs"))?;
            checked += 2;
        }
    }

    let limit = 4_000;
    for c in samples(arb_cinnamon(Flavor::Nat), 200) {
        run_checked(&c, RunOptions::default().with_limit(limit));
        checked += 1;
        let reference = reference_run(&c, &default_env(&c), 300);
        if reference == RefOutcome::Exhausted {
            continue;
        }
        let (outcome, _) = run_checked(&c, RunOptions::journal().with_limit(50_000));
        let agree = match (reference, &outcome) {
            (RefOutcome::Success(a), Outcome::Success(b)) => a.values() == b.values(),
            (RefOutcome::Failure, Outcome::Failure) => true,
            (RefOutcome::TopLevelReturn, Outcome::RuntimeError(_)) => true,
            _ => false,
        };
        ensure(agree, || {
            format!("normalized run differs from reference search:\n{}", print(&c))
        })?;
        checked += 1;
    }

    for c in samples(arb_cinnamon(Flavor::IncOnly), 200) {
        let (paper, pt) = run_checked(&c, RunOptions::default().with_limit(limit));
        let (journal, jt) = run_checked(&c, RunOptions::journal().with_limit(limit));
        ensure(paper == journal && kinds(&pt) == kinds(&jt), || {
            format!("paper and journal undo differ:\n{}", print(&c))
        })?;
        checked += 2;
    }
    Ok(format!("{checked} runs, stack discipline checked on every step"))
}

fn round_trip() -> Check {
    let mut programs: Vec<cinnamon::Cinnamon> = FIXTURES.iter().map(|n| load(n)).collect();
    programs.extend(samples(arb_cinnamon(Flavor::Nat), 40));
    programs.extend(samples(arb_cinnamon(Flavor::Str), 30));
    programs.extend(samples(arb_cinnamon(Flavor::IncOnly), 30));
    for c in &programs {
        let text = print(c);
        let back = parse(&text).map_err(|d| format!("{d:?}\n{text}"))?;
        ensure(&back == c, || format!("round trip changed:\n{text}"))?;
    }
    Ok(format!("{} fixtures + 100 generated", FIXTURES.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        (
            "worked values of the subtraction cinnamon",
            Duration::from_secs(1),
            worked_values,
        ),
        ("technical example golden trace", Duration::from_secs(1), golden_trace),
        ("monus subnet on [0,12]^2", Duration::from_secs(1), monus_grid),
        (
            "while-program differential campaign",
            Duration::from_secs(30),
            differential_campaign,
        ),
        ("composed sum behaviour", Duration::from_secs(1), composed_sum),
        (
            "expression recognizer in journal mode",
            Duration::from_secs(5),
            recognizer,
        ),
        (
            "semantics-preservation properties",
            Duration::from_secs(120),
            semantics_preservation,
        ),
        ("print/parse round trip", Duration::from_secs(5), round_trip),
    ];
    let mut failed = Vec::new();
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let elapsed = start.elapsed();
        let verdict = match &result {
            Ok(_) if elapsed >= budget => Err(format!("took {elapsed:.2?}, budget {budget:?}")),
            Ok(detail) => Ok(detail.clone()),
            Err(e) => Err(e.clone()),
        };
        match verdict {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail}; {elapsed:.2?})", i + 1),
            Err(why) => {
                println!("criterion {}: FAIL {name} ({elapsed:.2?}): {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
