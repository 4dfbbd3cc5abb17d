//! The static cinnamon model: subnets as ordered initialized graphs whose
//! arrows carry primitives, subnet calls or macro uses.

use std::fmt;
use std::sync::Arc;

use crate::value::{quote_sym, Mode, Value};

pub type VarName = String;
pub type SubnetName = String;
pub type StateId = String;
pub type ArrowId = String;

/// Position of a parsed element in its source text.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub file: Arc<str>,
    /// 1-based.
    pub line: usize,
    /// 1-based, counted in characters.
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NodeRef {
    State(StateId),
    Finish,
    Return,
}

impl NodeRef {
    pub fn state(id: impl Into<StateId>) -> Self {
        NodeRef::State(id.into())
    }

    pub fn as_state(&self) -> Option<&str> {
        match self {
            NodeRef::State(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::State(s) => f.write_str(s),
            NodeRef::Finish => f.write_str("FINISH"),
            NodeRef::Return => f.write_str("RETURN"),
        }
    }
}

/// Operand of the string-mode `if eq` test.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Operand<V = VarName> {
    Var(V),
    Sym(char),
}

impl<V> Operand<V> {
    pub fn map_var<W>(&self, f: &mut impl FnMut(&V) -> W) -> Operand<W> {
        match self {
            Operand::Var(v) => Operand::Var(f(v)),
            Operand::Sym(c) => Operand::Sym(*c),
        }
    }
}

/// Elementary primitives. `V` is the variable representation: names in the
/// model, slot indices inside the interpreter.
///
/// Operand order follows the surface syntax: `Copy(x, y)` is `y := x`,
/// `Sep(l, h, t)` splits `l` into head `h` and tail `t`, `Cons(h, t, l)`
/// builds `l := h·t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Primitive<V = VarName> {
    Clear(V),
    Copy(V, V),
    Inc(V),
    IfNonEq(V, V),
    Sep(V, V, V),
    Cons(V, V, V),
    IfEq(Operand<V>, Operand<V>),
    IfEmpty(V),
}

impl<V> Primitive<V> {
    pub fn is_test(&self) -> bool {
        matches!(
            self,
            Primitive::IfNonEq(..) | Primitive::IfEq(..) | Primitive::IfEmpty(_)
        )
    }

    pub fn is_action(&self) -> bool {
        !self.is_test()
    }

    /// The mode this primitive is restricted to, or `None` for the ones
    /// available in both (`clear`, `copy`).
    pub fn mode(&self) -> Option<Mode> {
        match self {
            Primitive::Clear(_) | Primitive::Copy(..) => None,
            Primitive::Inc(_) | Primitive::IfNonEq(..) => Some(Mode::Nat),
            _ => Some(Mode::Str),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Primitive::Clear(_) => "clear",
            Primitive::Copy(..) => "copy",
            Primitive::Inc(_) => "inc",
            Primitive::IfNonEq(..) => "if nonEq",
            Primitive::Sep(..) => "sep",
            Primitive::Cons(..) => "cons",
            Primitive::IfEq(..) => "if eq",
            Primitive::IfEmpty(_) => "if empty",
        }
    }

    /// Every variable operand, in textual order.
    pub fn vars(&self) -> Vec<&V> {
        match self {
            Primitive::Clear(x) | Primitive::Inc(x) | Primitive::IfEmpty(x) => vec![x],
            Primitive::Copy(x, y) | Primitive::IfNonEq(x, y) => vec![x, y],
            Primitive::Sep(a, b, c) | Primitive::Cons(a, b, c) => vec![a, b, c],
            Primitive::IfEq(a, b) => [a, b]
                .into_iter()
                .filter_map(|o| match o {
                    Operand::Var(v) => Some(v),
                    Operand::Sym(_) => None,
                })
                .collect(),
        }
    }

    /// Variables the forward action may write.
    pub fn written(&self) -> Vec<&V> {
        match self {
            Primitive::Clear(x) | Primitive::Inc(x) => vec![x],
            Primitive::Copy(_, y) => vec![y],
            Primitive::Sep(_, h, t) => vec![h, t],
            Primitive::Cons(_, _, l) => vec![l],
            _ => vec![],
        }
    }

    pub fn map_vars<W>(&self, mut f: impl FnMut(&V) -> W) -> Primitive<W> {
        match self {
            Primitive::Clear(x) => Primitive::Clear(f(x)),
            Primitive::Copy(x, y) => Primitive::Copy(f(x), f(y)),
            Primitive::Inc(x) => Primitive::Inc(f(x)),
            Primitive::IfNonEq(x, y) => Primitive::IfNonEq(f(x), f(y)),
            Primitive::Sep(l, h, t) => Primitive::Sep(f(l), f(h), f(t)),
            Primitive::Cons(h, t, l) => Primitive::Cons(f(h), f(t), f(l)),
            Primitive::IfEq(a, b) => Primitive::IfEq(a.map_var(&mut f), b.map_var(&mut f)),
            Primitive::IfEmpty(l) => Primitive::IfEmpty(f(l)),
        }
    }
}

impl<V: fmt::Display> fmt::Display for Operand<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Var(v) => write!(f, "{v}"),
            Operand::Sym(c) => f.write_str(&quote_sym(*c)),
        }
    }
}

impl<V: fmt::Display> fmt::Display for Primitive<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Primitive::Clear(x) => write!(f, "clear({x})"),
            Primitive::Copy(x, y) => write!(f, "copy({x}, {y})"),
            Primitive::Inc(x) => write!(f, "inc({x})"),
            Primitive::IfNonEq(x, y) => write!(f, "if nonEq({x}, {y})"),
            Primitive::Sep(l, h, t) => write!(f, "sep({l}, {h}, {t})"),
            Primitive::Cons(h, t, l) => write!(f, "cons({h}, {t}, {l})"),
            Primitive::IfEq(a, b) => write!(f, "if eq({a}, {b})"),
            Primitive::IfEmpty(l) => write!(f, "if empty({l})"),
        }
    }
}

/// Actual parameter of a subnet call or macro use.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Actual {
    Var(VarName),
    Const(Value),
}

impl fmt::Display for Actual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Actual::Var(v) => f.write_str(v),
            Actual::Const(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LabelItem {
    Prim(Primitive),
    Call {
        subnet: SubnetName,
        actuals: Vec<Actual>,
    },
    /// Use of a macro statement; gone after macro expansion.
    Macro {
        name: String,
        args: Vec<Actual>,
    },
}

impl LabelItem {
    pub fn call(subnet: impl Into<SubnetName>, actuals: Vec<Actual>) -> Self {
        LabelItem::Call {
            subnet: subnet.into(),
            actuals,
        }
    }
}

impl From<Primitive> for LabelItem {
    fn from(p: Primitive) -> Self {
        LabelItem::Prim(p)
    }
}

fn write_actuals(f: &mut fmt::Formatter<'_>, actuals: &[Actual]) -> fmt::Result {
    f.write_str("(")?;
    for (i, a) in actuals.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str(")")
}

impl fmt::Display for LabelItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelItem::Prim(p) => write!(f, "{p}"),
            LabelItem::Call { subnet, actuals } => {
                write!(f, "call {subnet}")?;
                write_actuals(f, actuals)
            }
            LabelItem::Macro { name, args } => {
                f.write_str(name)?;
                write_actuals(f, args)
            }
        }
    }
}

/// Comma-separated label text; empty for λ.
pub fn label_text(label: &[LabelItem]) -> String {
    label.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

#[derive(Clone, Debug)]
pub struct Arrow {
    pub id: ArrowId,
    pub source: StateId,
    pub target: NodeRef,
    /// Empty label is λ.
    pub label: Vec<LabelItem>,
    pub span: Option<SourceSpan>,
}

// Structural equality: spans are ignored.
impl PartialEq for Arrow {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.source == other.source && self.target == other.target && self.label == other.label
    }
}

impl Eq for Arrow {}

/// Canonical id of the `position`-th (1-based) arrow leaving `source`.
pub fn arrow_id(source: &str, position: usize) -> ArrowId {
    format!("{source}/{position}")
}

#[derive(Clone, Debug)]
pub struct Subnet {
    pub name: SubnetName,
    pub formals: Vec<VarName>,
    pub locals: Vec<VarName>,
    pub init: NodeRef,
    /// Declaration order; `out(s)` is this list filtered by source.
    pub arrows: Vec<Arrow>,
    pub span: Option<SourceSpan>,
}

impl PartialEq for Subnet {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.formals == other.formals
            && self.locals == other.locals
            && self.init == other.init
            && self.arrows == other.arrows
    }
}

impl Eq for Subnet {}

impl Subnet {
    pub fn new(name: impl Into<SubnetName>, formals: Vec<VarName>, locals: Vec<VarName>, init: NodeRef) -> Self {
        Subnet {
            name: name.into(),
            formals,
            locals,
            init,
            arrows: Vec::new(),
            span: None,
        }
    }

    /// Appends an arrow at the end of `out(source)` and returns its id.
    pub fn push_arrow(&mut self, source: impl Into<StateId>, target: NodeRef, label: Vec<LabelItem>) -> ArrowId {
        let source = source.into();
        let position = self.out(&source).count() + 1;
        let id = arrow_id(&source, position);
        self.arrows.push(Arrow {
            id: id.clone(),
            source,
            target,
            label,
            span: None,
        });
        id
    }

    pub fn out<'a>(&'a self, state: &'a str) -> impl Iterator<Item = &'a Arrow> + 'a {
        self.arrows.iter().filter(move |a| a.source == state)
    }

    /// Ordinary states in order of first appearance: the initial state, then
    /// arrow sources and ordinary targets.
    pub fn states(&self) -> Vec<StateId> {
        let mut seen = std::collections::HashSet::new();
        let mut states = Vec::new();
        let mut add = |s: &str| {
            if seen.insert(s.to_string()) {
                states.push(s.to_string());
            }
        };
        if let NodeRef::State(s) = &self.init {
            add(s);
        }
        for a in &self.arrows {
            add(&a.source);
            if let NodeRef::State(t) = &a.target {
                add(t);
            }
        }
        states
    }

    /// Formals followed by locals.
    pub fn vars(&self) -> impl Iterator<Item = &VarName> {
        self.formals.iter().chain(self.locals.iter())
    }

    pub fn declares(&self, var: &str) -> bool {
        self.vars().any(|v| v == var)
    }
}

/// A named sequence of items that abbreviates a label fragment.
#[derive(Clone, Debug)]
pub struct Macro {
    pub name: String,
    pub params: Vec<VarName>,
    pub body: Vec<LabelItem>,
    pub span: Option<SourceSpan>,
}

impl PartialEq for Macro {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.params == other.params && self.body == other.body
    }
}

impl Eq for Macro {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cinnamon {
    pub name: String,
    pub mode: Mode,
    pub macros: Vec<Macro>,
    /// File order.
    pub subnets: Vec<Subnet>,
    pub main: SubnetName,
}

impl Cinnamon {
    pub fn new(name: impl Into<String>, mode: Mode, main: impl Into<SubnetName>) -> Self {
        Cinnamon {
            name: name.into(),
            mode,
            macros: Vec::new(),
            subnets: Vec::new(),
            main: main.into(),
        }
    }

    pub fn subnet(&self, name: &str) -> Option<&Subnet> {
        self.subnets.iter().find(|s| s.name == name)
    }

    pub fn main_subnet(&self) -> Option<&Subnet> {
        self.subnet(&self.main)
    }

    pub fn macro_def(&self, name: &str) -> Option<&Macro> {
        self.macros.iter().find(|m| m.name == name)
    }

    pub fn arrows(&self) -> impl Iterator<Item = (&Subnet, &Arrow)> {
        self.subnets.iter().flat_map(|s| s.arrows.iter().map(move |a| (s, a)))
    }

    pub fn find_arrow(&self, id: &str) -> Option<(&Subnet, &Arrow)> {
        self.arrows().find(|(_, a)| a.id == id)
    }

    /// The enumeration x0, x1, … of the cinnamon's variables: the main
    /// subnet's formals and locals, then every other subnet in file order.
    /// Position 0 is the output variable.
    pub fn variable_order(&self) -> Vec<VarName> {
        let main = self.subnets.iter().filter(|s| s.name == self.main);
        let rest = self.subnets.iter().filter(|s| s.name != self.main);
        main.chain(rest).flat_map(|s| s.vars().cloned()).collect()
    }
}
