use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ast::{WVar, WhileProgram};

/// Variables drawn by the generator: `x0` through `x4`.
pub const GEN_VARS: WVar = 5;

fn var(rng: &mut ChaCha8Rng) -> WVar {
    rng.gen_range(0..GEN_VARS)
}

fn atomic(rng: &mut ChaCha8Rng) -> WhileProgram {
    match rng.gen_range(0..3) {
        0 => WhileProgram::AssignZero(var(rng)),
        1 => WhileProgram::AssignSucc(var(rng), var(rng)),
        _ => WhileProgram::AssignCopy(var(rng), var(rng)),
    }
}

fn program(rng: &mut ChaCha8Rng, budget: usize) -> WhileProgram {
    if budget < 2 {
        return atomic(rng);
    }
    // Weights: atomic 4, seq 3, if 1, for 2, while 2. Constructs that do not
    // fit the budget fall back to an atomic statement.
    let pick = rng.gen_range(0..12);
    match pick {
        4..=6 if budget >= 3 => {
            let left = rng.gen_range(1..=budget - 2);
            let right = rng.gen_range(1..=budget - 1 - left);
            WhileProgram::seq(program(rng, left), program(rng, right))
        }
        7 if budget >= 3 => {
            let (x, y) = (var(rng), var(rng));
            let then_budget = rng.gen_range(1..=budget - 2);
            let else_budget = rng.gen_range(1..=budget - 1 - then_budget);
            WhileProgram::if_less(x, y, program(rng, then_budget), program(rng, else_budget))
        }
        8 | 9 => {
            let y = var(rng);
            let body = rng.gen_range(1..=budget - 1);
            WhileProgram::for_loop(y, program(rng, body))
        }
        10 | 11 => {
            let (x, y) = (var(rng), var(rng));
            WhileProgram::while_less(x, y, while_body(rng, x, budget - 1))
        }
        _ => atomic(rng),
    }
}

/// With probability 3/4 the body ends with `x := x + 1` on the loop's left
/// variable, which usually drives the loop to termination.
fn while_body(rng: &mut ChaCha8Rng, x: WVar, budget: usize) -> WhileProgram {
    let step = WhileProgram::AssignSucc(x, x);
    if !rng.gen_bool(0.75) {
        return program(rng, budget);
    }
    if budget >= 3 && rng.gen_bool(0.5) {
        let rest = rng.gen_range(1..=budget - 2);
        WhileProgram::seq(program(rng, rest), step)
    } else {
        step
    }
}

/// A pseudo-random while-program with at most `max_size` AST nodes over
/// `x0..x4`, fully determined by `seed`.
pub fn gen_random(seed: u64, max_size: usize) -> WhileProgram {
    assert!(max_size >= 1, "max_size must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = rng.gen_range(1..=max_size);
    program(&mut rng, budget)
}
