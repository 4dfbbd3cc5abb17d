//! Well-formedness of cinnamons. Violations are data: `validate` never fails.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::macros::{check_definitions, expand_label, MacroError};
use crate::model::{Actual, ArrowId, Cinnamon, LabelItem, NodeRef, SourceSpan, SubnetName, VarName};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    MainMissing,
    DuplicateSubnet,
    DuplicateMacro,
    DuplicateVar,
    DuplicateArrow,
    DisjointStates,
    DisjointVars,
    InitOrdinary,
    UnknownSubnet,
    Arity,
    UndeclaredVar,
    ModeMismatch,
    UnknownMacro,
    MacroArity,
    MacroRecursive,
    MacroCall,
    MacroArgument,
    CoreLocals,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::MainMissing => "main-missing",
            Rule::DuplicateSubnet => "duplicate-subnet",
            Rule::DuplicateMacro => "duplicate-macro",
            Rule::DuplicateVar => "duplicate-var",
            Rule::DuplicateArrow => "duplicate-arrow",
            Rule::DisjointStates => "disjoint-states",
            Rule::DisjointVars => "disjoint-vars",
            Rule::InitOrdinary => "init-ordinary",
            Rule::UnknownSubnet => "unknown-subnet",
            Rule::Arity => "arity",
            Rule::UndeclaredVar => "undeclared-var",
            Rule::ModeMismatch => "mode-mismatch",
            Rule::UnknownMacro => "unknown-macro",
            Rule::MacroArity => "macro-arity",
            Rule::MacroRecursive => "macro-recursive",
            Rule::MacroCall => "macro-call",
            Rule::MacroArgument => "macro-argument",
            Rule::CoreLocals => "core-locals",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl From<&MacroError> for Rule {
    fn from(e: &MacroError) -> Self {
        match e {
            MacroError::UnknownMacro { .. } => Rule::UnknownMacro,
            MacroError::MacroArityMismatch { .. } => Rule::MacroArity,
            MacroError::RecursiveMacro { .. } => Rule::MacroRecursive,
            MacroError::CallInMacro { .. } => Rule::MacroCall,
            MacroError::BadMacroArgument { .. } => Rule::MacroArgument,
        }
    }
}

/// Where a violation was found. Fields narrow down from subnet to variable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Location {
    pub subnet: Option<SubnetName>,
    pub macro_name: Option<String>,
    pub arrow: Option<ArrowId>,
    pub var: Option<VarName>,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(s) = &self.subnet {
            parts.push(format!("subnet {s}"));
        }
        if let Some(m) = &self.macro_name {
            parts.push(format!("macro {m}"));
        }
        if let Some(a) = &self.arrow {
            parts.push(format!("arrow {a}"));
        }
        if let Some(v) = &self.var {
            parts.push(format!("variable {v}"));
        }
        f.write_str(&parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub location: Location,
    pub message: String,
    /// Best available source position (arrow, else subnet or macro header).
    pub span: Option<SourceSpan>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.rule, self.message, self.location)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn rules(&self) -> Vec<Rule> {
        self.violations.iter().map(|v| v.rule).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

struct Checker<'c> {
    c: &'c Cinnamon,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn report(&mut self, rule: Rule, location: Location, span: Option<&SourceSpan>, message: String) {
        self.out.push(Violation {
            rule,
            location,
            message,
            span: span.cloned(),
        });
    }
}

pub fn validate(c: &Cinnamon) -> ValidationReport {
    let mut ck = Checker { c, out: Vec::new() };

    if c.main_subnet().is_none() {
        ck.report(
            Rule::MainMissing,
            Location::default(),
            None,
            format!("main subnet `{}` is not defined", c.main),
        );
    }

    let mut names = HashSet::new();
    for s in &c.subnets {
        if !names.insert(s.name.as_str()) {
            ck.report(
                Rule::DuplicateSubnet,
                loc_subnet(&s.name),
                s.span.as_ref(),
                format!("subnet `{}` is defined more than once", s.name),
            );
        }
    }

    let mut macro_names = HashSet::new();
    for m in &c.macros {
        if !macro_names.insert(m.name.as_str()) {
            ck.report(
                Rule::DuplicateMacro,
                Location {
                    macro_name: Some(m.name.clone()),
                    ..Default::default()
                },
                m.span.as_ref(),
                format!("macro `{}` is defined more than once", m.name),
            );
        }
    }
    let broken_macros = check_macro_definitions(&mut ck);

    let mut var_owner: HashMap<&str, &str> = HashMap::new();
    let mut state_owner: HashMap<String, &str> = HashMap::new();
    for s in &c.subnets {
        // Arrow ids derive from state ids, so cross-subnet clashes are
        // already reported as shared states.
        let mut arrow_ids = HashSet::new();
        let mut local = HashSet::new();
        for v in s.vars() {
            if !local.insert(v.as_str()) {
                ck.report(
                    Rule::DuplicateVar,
                    loc_var(&s.name, v),
                    s.span.as_ref(),
                    format!("variable `{v}` is declared twice in subnet `{}`", s.name),
                );
                continue;
            }
            match var_owner.get(v.as_str()) {
                Some(owner) if *owner != s.name => ck.report(
                    Rule::DisjointVars,
                    loc_var(&s.name, v),
                    s.span.as_ref(),
                    format!("variable `{v}` is also declared in subnet `{owner}`"),
                ),
                _ => {
                    var_owner.insert(v, &s.name);
                }
            }
        }

        for state in s.states() {
            match state_owner.get(&state) {
                Some(owner) if *owner != s.name => ck.report(
                    Rule::DisjointStates,
                    loc_subnet(&s.name),
                    s.span.as_ref(),
                    format!("state `{state}` also belongs to subnet `{owner}`"),
                ),
                _ => {
                    state_owner.insert(state, &s.name);
                }
            }
        }

        if !matches!(s.init, NodeRef::State(_)) {
            ck.report(
                Rule::InitOrdinary,
                loc_subnet(&s.name),
                s.span.as_ref(),
                format!(
                    "initial state of `{}` must be an ordinary state, not {}",
                    s.name, s.init
                ),
            );
        }

        for a in &s.arrows {
            if !arrow_ids.insert(a.id.as_str()) {
                ck.report(
                    Rule::DuplicateArrow,
                    loc_arrow(&s.name, &a.id),
                    a.span.as_ref(),
                    format!("arrow id `{}` is not unique", a.id),
                );
            }
            let label = match expand_label(c, &a.label) {
                Ok(l) => l,
                Err(e) => {
                    if !broken_macros.contains(e.macro_name()) {
                        ck.report(
                            Rule::from(&e),
                            loc_arrow(&s.name, &a.id),
                            a.span.as_ref(),
                            e.to_string(),
                        );
                    }
                    continue;
                }
            };
            for item in &label {
                check_item(&mut ck, s, a, item);
            }
        }
    }

    ValidationReport { violations: ck.out }
}

/// [`validate`] plus the strict core rule that no subnet declares locals.
/// Library subnets such as the monus helper need scratch variables that the
/// caller never sees, so the default check accepts them.
pub fn validate_strict(c: &Cinnamon) -> ValidationReport {
    let mut report = validate(c);
    for s in &c.subnets {
        for v in &s.locals {
            report.violations.push(Violation {
                rule: Rule::CoreLocals,
                location: loc_var(&s.name, v),
                message: format!("local `{v}` of subnet `{}` is not allowed in strict core mode", s.name),
                span: s.span.clone(),
            });
        }
    }
    report
}

fn check_macro_definitions<'c>(ck: &mut Checker<'c>) -> HashSet<&'c str> {
    let mut broken = HashSet::new();
    for e in check_definitions(ck.c) {
        let def = ck.c.macro_def(e.macro_name());
        if let Some(d) = def {
            broken.insert(d.name.as_str());
        }
        ck.report(
            Rule::from(&e),
            Location {
                macro_name: Some(e.macro_name().to_string()),
                ..Default::default()
            },
            def.and_then(|d| d.span.as_ref()),
            e.to_string(),
        );
    }
    broken
}

fn check_item(ck: &mut Checker<'_>, s: &crate::model::Subnet, a: &crate::model::Arrow, item: &LabelItem) {
    let mode = ck.c.mode;
    match item {
        LabelItem::Prim(p) => {
            if let Some(m) = p.mode() {
                if m != mode {
                    ck.report(
                        Rule::ModeMismatch,
                        loc_arrow(&s.name, &a.id),
                        a.span.as_ref(),
                        format!("`{}` is a {m}-mode primitive in a {mode}-mode cinnamon", p.name()),
                    );
                }
            }
            for v in p.vars() {
                if !s.declares(v) {
                    ck.report(
                        Rule::UndeclaredVar,
                        Location {
                            var: Some(v.clone()),
                            ..loc_arrow(&s.name, &a.id)
                        },
                        a.span.as_ref(),
                        format!("variable `{v}` is not declared in subnet `{}`", s.name),
                    );
                }
            }
        }
        LabelItem::Call { subnet, actuals } => {
            match ck.c.subnet(subnet) {
                None => ck.report(
                    Rule::UnknownSubnet,
                    loc_arrow(&s.name, &a.id),
                    a.span.as_ref(),
                    format!("call of unknown subnet `{subnet}`"),
                ),
                Some(callee) if callee.formals.len() != actuals.len() => ck.report(
                    Rule::Arity,
                    loc_arrow(&s.name, &a.id),
                    a.span.as_ref(),
                    format!(
                        "`{subnet}` has {} formal parameter(s) but is called with {}",
                        callee.formals.len(),
                        actuals.len()
                    ),
                ),
                Some(_) => {}
            }
            for act in actuals {
                match act {
                    Actual::Var(v) if !s.declares(v) => ck.report(
                        Rule::UndeclaredVar,
                        Location {
                            var: Some(v.clone()),
                            ..loc_arrow(&s.name, &a.id)
                        },
                        a.span.as_ref(),
                        format!("variable `{v}` is not declared in subnet `{}`", s.name),
                    ),
                    Actual::Const(c) if c.mode() != mode => ck.report(
                        Rule::ModeMismatch,
                        loc_arrow(&s.name, &a.id),
                        a.span.as_ref(),
                        format!("constant {c} in a {mode}-mode cinnamon"),
                    ),
                    _ => {}
                }
            }
        }
        // expand_label leaves no macro uses behind
        LabelItem::Macro { .. } => unreachable!("macro use after expansion"),
    }
}

fn loc_subnet(s: &str) -> Location {
    Location {
        subnet: Some(s.to_string()),
        ..Default::default()
    }
}

fn loc_var(s: &str, v: &str) -> Location {
    Location {
        subnet: Some(s.to_string()),
        var: Some(v.to_string()),
        ..Default::default()
    }
}

fn loc_arrow(s: &str, a: &str) -> Location {
    Location {
        subnet: Some(s.to_string()),
        arrow: Some(a.to_string()),
        ..Default::default()
    }
}
