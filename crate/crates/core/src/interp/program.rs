use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::macros::{expand_macros, MacroError};
use crate::model::{Actual, Cinnamon, LabelItem, NodeRef, Primitive, VarName};
use crate::normalize::normalize;
use crate::validate::{validate, ValidationReport};
use crate::value::{Mode, Value};

use super::env::Environment;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("invalid cinnamon:\n{0}")]
    Invalid(ValidationReport),
    #[error(transparent)]
    Macro(#[from] MacroError),
}

/// Where an arrow leads, with ordinary states resolved to indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    State(usize),
    Finish,
    Return,
}

#[derive(Clone, Debug)]
pub(crate) enum Arg {
    Var(usize),
    Const(Value),
}

#[derive(Clone, Debug)]
pub(crate) enum Item {
    Prim(Primitive<usize>),
    Call { callee: usize, actuals: Vec<Arg> },
}

#[derive(Clone, Debug)]
pub(crate) struct ArrowInfo {
    pub id: String,
    pub subnet: usize,
    pub source: usize,
    pub target: Target,
    /// `None` is λ.
    pub item: Option<Item>,
}

#[derive(Clone, Debug)]
pub(crate) struct StateInfo {
    pub id: String,
    pub out: Vec<usize>,
}

#[derive(Clone, Debug)]
pub(crate) struct SubnetInfo {
    pub name: String,
    pub formals: Vec<usize>,
    pub init: usize,
}

/// A validated, macro-expanded, normalized cinnamon with every name resolved
/// to an index. Immutable and shareable between machines.
#[derive(Clone, Debug)]
pub struct Program {
    source: Cinnamon,
    vars: Vec<VarName>,
    pub(crate) subnets: Vec<SubnetInfo>,
    pub(crate) states: Vec<StateInfo>,
    pub(crate) arrows: Vec<ArrowInfo>,
    pub(crate) main: usize,
}

impl Program {
    /// Validates, expands macros, normalizes and resolves `c`.
    pub fn load(c: &Cinnamon) -> Result<Program, LoadError> {
        let report = validate(c);
        if !report.is_ok() {
            return Err(LoadError::Invalid(report));
        }
        let expanded = expand_macros(c)?;
        Ok(Program::resolve(normalize(&expanded)))
    }

    fn resolve(c: Cinnamon) -> Program {
        let vars = c.variable_order();
        let var_index: HashMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let subnet_index: HashMap<&str, usize> = c
            .subnets
            .iter()
            .enumerate()
            .map(|(i, s)| (s.name.as_str(), i))
            .collect();

        let mut states = Vec::new();
        let mut subnets = Vec::new();
        let mut arrows = Vec::new();
        for (si, s) in c.subnets.iter().enumerate() {
            let mut local: HashMap<String, usize> = HashMap::new();
            for st in s.states() {
                local.insert(st.clone(), states.len());
                states.push(StateInfo {
                    id: st,
                    out: Vec::new(),
                });
            }
            let slot = |v: &VarName| var_index[v.as_str()];
            for a in &s.arrows {
                let source = local[&a.source];
                let target = match &a.target {
                    NodeRef::State(t) => Target::State(local[t]),
                    NodeRef::Finish => Target::Finish,
                    NodeRef::Return => Target::Return,
                };
                let item = match a.label.as_slice() {
                    [] => None,
                    [LabelItem::Prim(p)] => Some(Item::Prim(p.map_vars(slot))),
                    [LabelItem::Call { subnet, actuals }] => Some(Item::Call {
                        callee: subnet_index[subnet.as_str()],
                        actuals: actuals
                            .iter()
                            .map(|x| match x {
                                Actual::Var(v) => Arg::Var(slot(v)),
                                Actual::Const(k) => Arg::Const(k.clone()),
                            })
                            .collect(),
                    }),
                    other => unreachable!("label {other:?} survived normalization"),
                };
                states[source].out.push(arrows.len());
                arrows.push(ArrowInfo {
                    id: a.id.clone(),
                    subnet: si,
                    source,
                    target,
                    item,
                });
            }
            let init = s.init.as_state().expect("validated init is ordinary");
            subnets.push(SubnetInfo {
                name: s.name.clone(),
                formals: s.formals.iter().map(slot).collect(),
                init: local[init],
            });
        }
        let main = subnet_index[c.main.as_str()];
        Program {
            source: c,
            vars,
            subnets,
            states,
            arrows,
            main,
        }
    }

    /// The normalized cinnamon this program was built from.
    pub fn cinnamon(&self) -> &Cinnamon {
        &self.source
    }

    pub fn mode(&self) -> Mode {
        self.source.mode
    }

    /// Variables in the cinnamon's variable order.
    pub fn variables(&self) -> &[VarName] {
        &self.vars
    }

    /// All variables at their defaults.
    pub fn initial_env(&self) -> Environment {
        Environment::new(self.vars.clone(), self.mode())
    }

    pub fn arrow_id(&self, arrow: usize) -> &str {
        &self.arrows[arrow].id
    }

    pub fn subnet_name(&self, subnet: usize) -> &str {
        &self.subnets[subnet].name
    }

    pub fn state_id(&self, state: usize) -> &str {
        &self.states[state].id
    }

    pub fn main_subnet(&self) -> usize {
        self.main
    }

    pub fn shared(self) -> Arc<Program> {
        Arc::new(self)
    }
}
