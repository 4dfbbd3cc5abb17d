use std::fmt::Write;

use crate::model::{label_text, Cinnamon};

/// Canonical text of `c`; parsing it yields a structurally identical
/// cinnamon.
pub fn print(c: &Cinnamon) -> String {
    let mut out = String::new();
    writeln!(out, "cinnamon {} mode {}", c.name, c.mode).unwrap();
    if !c.macros.is_empty() {
        out.push('\n');
    }
    for m in &c.macros {
        writeln!(
            out,
            "macro {}({}) = {}",
            m.name,
            m.params.join(", "),
            label_text(&m.body)
        )
        .unwrap();
    }
    for s in &c.subnets {
        out.push('\n');
        if s.name == c.main {
            out.push_str("main ");
        }
        writeln!(out, "subnet {}({}) {{", s.name, s.formals.join(", ")).unwrap();
        if !s.locals.is_empty() {
            writeln!(out, "  vars {}", s.locals.join(", ")).unwrap();
        }
        writeln!(out, "  init {}", s.init).unwrap();
        for a in &s.arrows {
            let label = label_text(&a.label);
            if label.is_empty() {
                writeln!(out, "  {} -> {} :", a.source, a.target).unwrap();
            } else {
                writeln!(out, "  {} -> {} : {}", a.source, a.target, label).unwrap();
            }
        }
        out.push_str("}\n");
    }
    out
}
