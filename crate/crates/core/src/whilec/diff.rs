use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::interp::{compute_program, Computed, Program, RunError, RunOptions, Undefined, UndoMode};

use super::ast::WhileProgram;
use super::compile::compile_while;
use super::eval::{eval_while, WhileResult};
use super::gen::gen_random;

/// Compiled runs get this many interpreter steps per unit of oracle fuel.
pub const STEP_FACTOR: u64 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub program: WhileProgram,
    pub inputs: Vec<BigUint>,
    pub oracle: WhileResult,
    pub compiled: Result<Computed, RunError>,
    pub agree: bool,
}

fn agrees(oracle: &WhileResult, compiled: &Result<Computed, RunError>) -> bool {
    match (oracle, compiled) {
        (WhileResult::Value(a), Ok(Computed::Value(b))) => a == b,
        (WhileResult::Diverged(_), Ok(Computed::Undefined(Undefined::StepLimit))) => true,
        _ => false,
    }
}

fn options(fuel: u64) -> RunOptions {
    RunOptions {
        step_limit: fuel.saturating_mul(STEP_FACTOR).max(1),
        undo: UndoMode::Paper,
    }
}

fn check_loaded(p: &WhileProgram, program: &Arc<Program>, inputs: &[BigUint], fuel: u64) -> Verdict {
    let oracle = eval_while(p, inputs, fuel);
    let compiled = compute_program(program, inputs, options(fuel));
    Verdict {
        program: p.clone(),
        inputs: inputs.to_vec(),
        agree: agrees(&oracle, &compiled),
        oracle,
        compiled,
    }
}

/// Runs `p` through the reference interpreter with `fuel` and its compiled
/// cinnamon with a step limit of `64 * fuel`. They agree when both produce
/// the same value or both run out.
pub fn differential_check(p: &WhileProgram, inputs: &[BigUint], fuel: u64) -> Verdict {
    let program = Arc::new(Program::load(&compile_while(p)).expect("compiled programs are valid"));
    check_loaded(p, &program, inputs, fuel)
}

/// One fuzzed program with its input vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzCase {
    pub index: usize,
    pub program_seed: u64,
    pub program: WhileProgram,
    pub inputs: Vec<Vec<BigUint>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FuzzConfig {
    pub seed: u64,
    pub count: usize,
    pub max_size: usize,
    pub fuel: u64,
    pub vectors: usize,
    pub arity: usize,
    pub max_input: u64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            seed: 42,
            count: 200,
            max_size: 12,
            fuel: 100_000,
            vectors: 3,
            arity: 4,
            max_input: 5,
        }
    }
}

/// The deterministic case list of a campaign: a master generator seeded by
/// `config.seed` yields each program's seed, then its input vectors.
pub fn fuzz_cases(config: &FuzzConfig) -> Vec<FuzzCase> {
    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.count)
        .map(|index| {
            let program_seed = master.next_u64();
            let inputs = (0..config.vectors)
                .map(|_| {
                    (0..config.arity)
                        .map(|_| BigUint::from(master.gen_range(0..=config.max_input)))
                        .collect()
                })
                .collect();
            FuzzCase {
                index,
                program_seed,
                program: gen_random(program_seed, config.max_size),
                inputs,
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct CaseReport {
    pub case: FuzzCase,
    pub verdicts: Vec<Verdict>,
}

#[derive(Clone, Debug)]
pub struct FuzzReport {
    pub config: FuzzConfig,
    pub cases: Vec<CaseReport>,
}

impl FuzzReport {
    pub fn verdicts(&self) -> impl Iterator<Item = (&FuzzCase, &Verdict)> {
        self.cases
            .iter()
            .flat_map(|c| c.verdicts.iter().map(move |v| (&c.case, v)))
    }

    pub fn agree(&self) -> usize {
        self.verdicts().filter(|(_, v)| v.agree).count()
    }

    pub fn disagree(&self) -> usize {
        self.verdicts().filter(|(_, v)| !v.agree).count()
    }

    /// Programs all of whose verdicts agree.
    pub fn agreeing_programs(&self) -> usize {
        self.cases.iter().filter(|c| c.verdicts.iter().all(|v| v.agree)).count()
    }

    /// Compiled runs that ended in Failure (which compiled code never should).
    pub fn failures(&self) -> usize {
        self.verdicts()
            .filter(|(_, v)| matches!(v.compiled, Ok(Computed::Undefined(Undefined::Failure))))
            .count()
    }

    /// One reproducer line per disagreeing verdict.
    pub fn reproducers(&self) -> Vec<String> {
        self.verdicts()
            .filter(|(_, v)| !v.agree)
            .map(|(c, v)| {
                Reproducer {
                    seed: self.config.seed,
                    case: c,
                    verdict: v,
                }
                .to_string()
            })
            .collect()
    }
}

struct Reproducer<'a> {
    seed: u64,
    case: &'a FuzzCase,
    verdict: &'a Verdict,
}

impl fmt::Display for Reproducer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inputs: Vec<String> = self.verdict.inputs.iter().map(|i| i.to_string()).collect();
        let compiled = match &self.verdict.compiled {
            Ok(c) => c.to_string(),
            Err(e) => format!("error: {e}"),
        };
        write!(
            f,
            "seed={} index={} program_seed={} inputs={} oracle={} compiled={} program={}",
            self.seed,
            self.case.index,
            self.case.program_seed,
            inputs.join(","),
            self.verdict.oracle,
            compiled,
            self.verdict.program
        )
    }
}

/// Runs the differential campaign; programs are checked in parallel.
pub fn fuzz(config: FuzzConfig) -> FuzzReport {
    let cases = fuzz_cases(&config)
        .into_par_iter()
        .map(|case| {
            let program = Arc::new(Program::load(&compile_while(&case.program)).expect("compiled programs are valid"));
            let verdicts = case
                .inputs
                .iter()
                .map(|inputs| check_loaded(&case.program, &program, inputs, config.fuel))
                .collect();
            CaseReport { case, verdicts }
        })
        .collect();
    FuzzReport { config, cases }
}
