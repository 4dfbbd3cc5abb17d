use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use crate::model::{Operand, Primitive};
use crate::value::{Mode, Value};

use super::env::Environment;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PrimError {
    #[error("cons head `{var}` must be a single symbol, found length {len}")]
    ConsNonSymbolHead { var: String, len: usize },
    #[error("backward inc of `{var}` at 0: history was destroyed by an earlier clear or copy")]
    IrreversibleHistory { var: String },
    #[error("variable `{var}` holds a {found} value where {expected} was required")]
    ModeMismatch { var: String, expected: Mode, found: Mode },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

fn mismatch(env: &Environment, slot: usize, expected: Mode) -> PrimError {
    PrimError::ModeMismatch {
        var: env.name(slot).to_string(),
        expected,
        found: env.at(slot).mode(),
    }
}

fn nat_mut(env: &mut Environment, slot: usize) -> Result<&mut BigUint, PrimError> {
    match env.at(slot) {
        Value::Nat(_) => match env.at_mut(slot) {
            Value::Nat(n) => Ok(n),
            Value::Str(_) => unreachable!(),
        },
        Value::Str(_) => Err(mismatch(env, slot, Mode::Nat)),
    }
}

fn str_at(env: &Environment, slot: usize) -> Result<&str, PrimError> {
    env.at(slot).as_str().ok_or_else(|| mismatch(env, slot, Mode::Str))
}

/// Prior values of written slots, kept only when someone will read them.
pub(crate) type Undo<'a> = Option<&'a mut Vec<(usize, Value)>>;

fn write(env: &mut Environment, slot: usize, value: Value, undo: &mut Undo<'_>) {
    match undo {
        Some(log) => log.push((slot, env.replace(slot, value))),
        None => *env.at_mut(slot) = value,
    }
}

fn operand_value(env: &Environment, op: &Operand<usize>) -> Result<String, PrimError> {
    match op {
        Operand::Var(s) => str_at(env, *s).map(str::to_string),
        Operand::Sym(c) => Ok(c.to_string()),
    }
}

/// Forward action over slot-resolved operands. Prior values of written slots
/// are appended to `undo` in write order; a failing test sets `env.failure`.
pub(crate) fn forward(p: &Primitive<usize>, env: &mut Environment, mut undo: Undo<'_>) -> Result<(), PrimError> {
    let undo = &mut undo;
    match p {
        Primitive::Clear(x) => {
            let zero = Value::default_for(env.at(*x).mode());
            write(env, *x, zero, undo);
        }
        Primitive::Copy(x, y) if undo.is_none() && x != y => {
            let (src, dst) = env.pair_mut(*x, *y);
            dst.clone_from(src);
        }
        Primitive::Copy(x, y) => {
            let v = env.at(*x).clone();
            write(env, *y, v, undo);
        }
        Primitive::Inc(x) => {
            let n = nat_mut(env, *x)?;
            if let Some(log) = undo {
                log.push((*x, Value::Nat(n.clone())));
            }
            *n += 1u32;
        }
        Primitive::IfNonEq(x, y) => {
            if env.at(*x) == env.at(*y) {
                env.failure = true;
            }
        }
        Primitive::Sep(l, h, t) => {
            let s = str_at(env, *l)?;
            let mut chars = s.chars();
            match chars.next() {
                None => env.failure = true,
                Some(c) => {
                    let tail = chars.as_str().to_string();
                    // Type-check the destinations before writing anything.
                    str_at(env, *h)?;
                    str_at(env, *t)?;
                    write(env, *h, Value::Str(c.to_string()), undo);
                    write(env, *t, Value::Str(tail), undo);
                }
            }
        }
        Primitive::Cons(h, t, l) => {
            let head = str_at(env, *h)?;
            let len = head.chars().count();
            if len != 1 {
                return Err(PrimError::ConsNonSymbolHead {
                    var: env.name(*h).to_string(),
                    len,
                });
            }
            let joined = format!("{head}{}", str_at(env, *t)?);
            str_at(env, *l)?;
            write(env, *l, Value::Str(joined), undo);
        }
        Primitive::IfEq(a, b) => {
            if operand_value(env, a)? != operand_value(env, b)? {
                env.failure = true;
            }
        }
        Primitive::IfEmpty(l) => {
            if !str_at(env, *l)?.is_empty() {
                env.failure = true;
            }
        }
    }
    Ok(())
}

/// Backward action: `inc` decrements, everything else is the identity. The
/// decremented slot's prior value is appended to `undo`.
pub(crate) fn backward(p: &Primitive<usize>, env: &mut Environment, undo: Undo<'_>) -> Result<(), PrimError> {
    if let Primitive::Inc(x) = p {
        let n = nat_mut(env, *x)?;
        if n.is_zero() {
            return Err(PrimError::IrreversibleHistory {
                var: env.name(*x).to_string(),
            });
        }
        if let Some(log) = undo {
            log.push((*x, Value::Nat(n.clone())));
        }
        *n -= 1u32;
    }
    Ok(())
}

fn resolve(p: &Primitive, env: &Environment) -> Result<Primitive<usize>, PrimError> {
    let mut missing = None;
    let resolved = p.map_vars(|v| {
        env.slot(v).unwrap_or_else(|| {
            missing.get_or_insert_with(|| v.clone());
            0
        })
    });
    match missing {
        Some(v) => Err(PrimError::UnknownVariable(v)),
        None => Ok(resolved),
    }
}

/// Applies `p` forward to `env` (which must have FORW = 1). Test failure is
/// reported through `env.failure`, which this function never clears.
pub fn exec_forward_prim(p: &Primitive, env: &mut Environment) -> Result<(), PrimError> {
    debug_assert!(env.forw);
    let p = resolve(p, env)?;
    forward(&p, env, None)
}

/// Applies `p` backward to `env` (which must have FORW = 0).
pub fn exec_backward_prim(p: &Primitive, env: &mut Environment) -> Result<(), PrimError> {
    debug_assert!(!env.forw);
    let p = resolve(p, env)?;
    backward(&p, env, None)
}
