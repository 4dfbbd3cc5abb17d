//! Macro statement expansion.

use std::collections::HashMap;

use thiserror::Error;

use crate::model::{Actual, Cinnamon, LabelItem, Operand, Primitive, VarName};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MacroError {
    #[error("unknown macro `{name}`")]
    UnknownMacro { name: String },
    #[error("macro `{name}` takes {expected} argument(s), {found} given")]
    MacroArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("macro `{name}` expands to itself (via {})", cycle.join(" -> "))]
    RecursiveMacro { name: String, cycle: Vec<String> },
    #[error("macro `{name}` contains a subnet call")]
    CallInMacro { name: String },
    #[error("argument `{arg}` cannot stand for parameter `{param}` of macro `{name}`")]
    BadMacroArgument { name: String, param: String, arg: String },
}

impl MacroError {
    /// Name of the macro the error is about.
    pub fn macro_name(&self) -> &str {
        match self {
            MacroError::UnknownMacro { name }
            | MacroError::MacroArityMismatch { name, .. }
            | MacroError::RecursiveMacro { name, .. }
            | MacroError::CallInMacro { name }
            | MacroError::BadMacroArgument { name, .. } => name,
        }
    }
}

/// Replaces every macro use in every arrow label by the macro body, with
/// parameters substituted by the use's arguments. Macro definitions are kept;
/// nothing else changes.
pub fn expand_macros(c: &Cinnamon) -> Result<Cinnamon, MacroError> {
    let mut out = c.clone();
    for subnet in &mut out.subnets {
        for arrow in &mut subnet.arrows {
            if arrow.label.iter().any(|i| matches!(i, LabelItem::Macro { .. })) {
                arrow.label = expand_label(c, &arrow.label)?;
            }
        }
    }
    Ok(out)
}

/// Expands one label.
pub fn expand_label(c: &Cinnamon, label: &[LabelItem]) -> Result<Vec<LabelItem>, MacroError> {
    let mut out = Vec::with_capacity(label.len());
    let mut active = Vec::new();
    for item in label {
        expand_item(c, item, &mut active, &mut out)?;
    }
    Ok(out)
}

/// Checks every macro definition on its own: each body must expand (with the
/// parameters standing for themselves) without recursion, calls, unknown
/// macros or arity mismatches.
pub fn check_definitions(c: &Cinnamon) -> Vec<MacroError> {
    let mut errors = Vec::new();
    for m in &c.macros {
        let identity = LabelItem::Macro {
            name: m.name.clone(),
            args: m.params.iter().cloned().map(Actual::Var).collect(),
        };
        let mut sink = Vec::new();
        if let Err(e) = expand_item(c, &identity, &mut Vec::new(), &mut sink) {
            if !errors.contains(&e) {
                errors.push(e);
            }
        }
    }
    errors
}

fn expand_item(
    c: &Cinnamon,
    item: &LabelItem,
    active: &mut Vec<String>,
    out: &mut Vec<LabelItem>,
) -> Result<(), MacroError> {
    let LabelItem::Macro { name, args } = item else {
        out.push(item.clone());
        return Ok(());
    };
    let def = c
        .macro_def(name)
        .ok_or_else(|| MacroError::UnknownMacro { name: name.clone() })?;
    if def.params.len() != args.len() {
        return Err(MacroError::MacroArityMismatch {
            name: name.clone(),
            expected: def.params.len(),
            found: args.len(),
        });
    }
    if let Some(pos) = active.iter().position(|a| a == name) {
        let mut cycle = active[pos..].to_vec();
        cycle.push(name.clone());
        return Err(MacroError::RecursiveMacro {
            name: name.clone(),
            cycle,
        });
    }
    let binding: HashMap<&str, &Actual> = def.params.iter().map(String::as_str).zip(args.iter()).collect();
    active.push(name.clone());
    for body_item in &def.body {
        match body_item {
            LabelItem::Prim(p) => out.push(LabelItem::Prim(substitute_prim(name, p, &binding)?)),
            LabelItem::Call { .. } => {
                return Err(MacroError::CallInMacro { name: name.clone() });
            }
            LabelItem::Macro {
                name: inner,
                args: inner_args,
            } => {
                let args = inner_args
                    .iter()
                    .map(|a| match a {
                        Actual::Var(v) => binding.get(v.as_str()).map_or(a.clone(), |b| (*b).clone()),
                        Actual::Const(_) => a.clone(),
                    })
                    .collect();
                let nested = LabelItem::Macro {
                    name: inner.clone(),
                    args,
                };
                expand_item(c, &nested, active, out)?;
            }
        }
    }
    active.pop();
    Ok(())
}

fn substitute_prim(name: &str, p: &Primitive, binding: &HashMap<&str, &Actual>) -> Result<Primitive, MacroError> {
    let bad = |param: &str, arg: &Actual| MacroError::BadMacroArgument {
        name: name.to_string(),
        param: param.to_string(),
        arg: arg.to_string(),
    };
    let var = |v: &VarName| -> Result<VarName, MacroError> {
        match binding.get(v.as_str()) {
            None => Ok(v.clone()),
            Some(Actual::Var(w)) => Ok(w.clone()),
            Some(a @ Actual::Const(_)) => Err(bad(v, a)),
        }
    };
    let operand = |o: &Operand| -> Result<Operand, MacroError> {
        match o {
            Operand::Sym(c) => Ok(Operand::Sym(*c)),
            Operand::Var(v) => match binding.get(v.as_str()) {
                None => Ok(Operand::Var(v.clone())),
                Some(Actual::Var(w)) => Ok(Operand::Var(w.clone())),
                Some(a @ Actual::Const(Value::Str(s))) => {
                    let mut chars = s.chars();
                    match (chars.next(), chars.next()) {
                        (Some(c), None) => Ok(Operand::Sym(c)),
                        _ => Err(bad(v, a)),
                    }
                }
                Some(a) => Err(bad(v, a)),
            },
        }
    };
    Ok(match p {
        Primitive::Clear(x) => Primitive::Clear(var(x)?),
        Primitive::Copy(x, y) => Primitive::Copy(var(x)?, var(y)?),
        Primitive::Inc(x) => Primitive::Inc(var(x)?),
        Primitive::IfNonEq(x, y) => Primitive::IfNonEq(var(x)?, var(y)?),
        Primitive::Sep(l, h, t) => Primitive::Sep(var(l)?, var(h)?, var(t)?),
        Primitive::Cons(h, t, l) => Primitive::Cons(var(h)?, var(t)?, var(l)?),
        Primitive::IfEq(a, b) => Primitive::IfEq(operand(a)?, operand(b)?),
        Primitive::IfEmpty(l) => Primitive::IfEmpty(var(l)?),
    })
}
