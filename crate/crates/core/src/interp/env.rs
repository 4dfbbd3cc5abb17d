use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::model::VarName;
use crate::value::{Mode, Value};

/// Variable store plus the FORW/FAILURE system flags.
///
/// Total over the declared variables of one cinnamon: every variable always
/// has a value. Slots follow the cinnamon's variable order, so slot `i` holds
/// `x_i`.
#[derive(Clone, Debug)]
pub struct Environment {
    names: Arc<[VarName]>,
    index: Arc<HashMap<VarName, usize>>,
    values: Vec<Value>,
    pub forw: bool,
    pub failure: bool,
}

impl PartialEq for Environment {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
            && self.values == other.values
            && self.forw == other.forw
            && self.failure == other.failure
    }
}

impl Eq for Environment {}

impl Environment {
    /// Every variable at its default (`0` or the empty string), FORW = 1,
    /// FAILURE = 0.
    pub fn new(vars: Vec<VarName>, mode: Mode) -> Self {
        let index = vars.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let values = vec![Value::default_for(mode); vars.len()];
        Environment {
            names: vars.into(),
            index: Arc::new(index),
            values,
            forw: true,
            failure: false,
        }
    }

    /// Builds an environment from explicit bindings; later bindings win.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, Value)>, mode: Mode) -> Self {
        let pairs: Vec<_> = pairs.into_iter().collect();
        let mut names: Vec<VarName> = Vec::new();
        for (n, _) in &pairs {
            if !names.iter().any(|x| x == n) {
                names.push(n.to_string());
            }
        }
        let mut env = Environment::new(names, mode);
        for (n, v) in pairs {
            env.set(n, v);
        }
        env
    }

    pub fn slot(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.slot(name).map(|s| &self.values[s])
    }

    /// Returns the previous value, or `None` if `name` is not a variable of
    /// this environment (nothing is written then).
    pub fn set(&mut self, name: &str, value: Value) -> Option<Value> {
        let s = self.slot(name)?;
        Some(std::mem::replace(&mut self.values[s], value))
    }

    pub fn name(&self, slot: usize) -> &str {
        &self.names[slot]
    }

    pub fn names(&self) -> &[VarName] {
        &self.names
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    /// Shared access to slot `a` alongside mutable access to a different
    /// slot `b`.
    pub(crate) fn pair_mut(&mut self, a: usize, b: usize) -> (&Value, &mut Value) {
        assert_ne!(a, b);
        if a < b {
            let (lo, hi) = self.values.split_at_mut(b);
            (&lo[a], &mut hi[0])
        } else {
            let (lo, hi) = self.values.split_at_mut(a);
            (&hi[0], &mut lo[b])
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.names.iter().map(String::as_str).zip(self.values.iter())
    }

    pub(crate) fn at(&self, slot: usize) -> &Value {
        &self.values[slot]
    }

    pub(crate) fn at_mut(&mut self, slot: usize) -> &mut Value {
        &mut self.values[slot]
    }

    pub(crate) fn replace(&mut self, slot: usize, value: Value) -> Value {
        std::mem::replace(&mut self.values[slot], value)
    }
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (n, v)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{n}: {v}")?;
        }
        f.write_str("}")
    }
}
