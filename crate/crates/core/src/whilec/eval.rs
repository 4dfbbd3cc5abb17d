use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::ast::WhileProgram;

/// Outcome of the reference interpreter.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum WhileResult {
    Value(BigUint),
    /// The run needed more than this much fuel.
    Diverged(u64),
}

impl fmt::Display for WhileResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WhileResult::Value(v) => write!(f, "{v}"),
            WhileResult::Diverged(fuel) => write!(f, "diverged (fuel {fuel})"),
        }
    }
}

struct OutOfFuel;

struct Eval {
    vars: Vec<BigUint>,
    fuel: u64,
}

impl Eval {
    fn tick(&mut self) -> Result<(), OutOfFuel> {
        if self.fuel == 0 {
            return Err(OutOfFuel);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn exec(&mut self, p: &WhileProgram) -> Result<(), OutOfFuel> {
        use WhileProgram::*;
        match p {
            AssignZero(x) => {
                self.tick()?;
                self.vars[*x as usize] = BigUint::zero();
            }
            AssignSucc(x, y) => {
                self.tick()?;
                self.vars[*x as usize] = &self.vars[*y as usize] + 1u32;
            }
            AssignCopy(x, y) => {
                self.tick()?;
                self.vars[*x as usize] = self.vars[*y as usize].clone();
            }
            Seq(p, q) => {
                self.exec(p)?;
                self.exec(q)?;
            }
            If(x, y, p, q) => {
                if self.vars[*x as usize] < self.vars[*y as usize] {
                    self.exec(p)?;
                } else {
                    self.exec(q)?;
                }
            }
            For(y, p) => {
                // Each trip costs fuel, so a trip count beyond the remaining
                // fuel cannot complete.
                let trips = self.vars[*y as usize].to_u64().unwrap_or(u64::MAX);
                for _ in 0..trips {
                    self.tick()?;
                    self.exec(p)?;
                }
            }
            While(x, y, p) => {
                // Charging the test keeps bodies that assign nothing finite.
                loop {
                    self.tick()?;
                    if self.vars[*x as usize] >= self.vars[*y as usize] {
                        break;
                    }
                    self.exec(p)?;
                }
            }
        }
        Ok(())
    }
}

/// Runs `p` with `x_i = args[i-1]` for every variable `x_i` (`i >= 1`) the
/// program mentions; other variables start at 0. One unit of `fuel` pays for
/// an assignment, a for-loop trip or a while-loop test.
pub fn eval_while(p: &WhileProgram, args: &[BigUint], fuel: u64) -> WhileResult {
    let n = p.max_var() as usize + 1;
    let mut vars = vec![BigUint::zero(); n];
    for (i, a) in args.iter().enumerate().take(n - 1) {
        vars[i + 1] = a.clone();
    }
    let mut e = Eval { vars, fuel };
    match e.exec(p) {
        Ok(()) => WhileResult::Value(e.vars.swap_remove(0)),
        Err(OutOfFuel) => WhileResult::Diverged(fuel),
    }
}
