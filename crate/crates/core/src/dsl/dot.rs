use std::fmt::Write;

use crate::model::{label_text, Cinnamon, NodeRef};

fn quoted(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Graphviz rendering: one cluster per subnet, ordinary states as circles
/// (the initial one doubled), and a separate box for every arrow ending in
/// FINISH (`box`) or RETURN (`box3d`). Edges are labeled `k: label` with `k`
/// the arrow's 1-based position in `out(source)`.
pub fn export_dot(c: &Cinnamon) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quoted(&c.name)).unwrap();
    for s in &c.subnets {
        writeln!(out, "  subgraph {} {{", quoted(&format!("cluster_{}", s.name))).unwrap();
        let title = if s.name == c.main {
            format!("{} (main)", s.name)
        } else {
            s.name.clone()
        };
        let params = s.formals.join(", ");
        writeln!(out, "    label={};", quoted(&format!("{title}({params})"))).unwrap();
        let node = |state: &str| quoted(&format!("{}:{}", s.name, state));
        for st in s.states() {
            let shape = if s.init.as_state() == Some(st.as_str()) {
                "doublecircle"
            } else {
                "circle"
            };
            writeln!(out, "    {} [label={}, shape={shape}];", node(&st), quoted(&st)).unwrap();
        }
        let mut system_nodes = 0;
        for a in &s.arrows {
            let position = s.out(&a.source).position(|b| b.id == a.id).map_or(0, |p| p + 1);
            let target = match &a.target {
                NodeRef::State(t) => node(t),
                sys => {
                    system_nodes += 1;
                    let id = node(&format!("{sys}#{system_nodes}"));
                    let shape = if *sys == NodeRef::Finish { "box" } else { "box3d" };
                    writeln!(out, "    {id} [label={}, shape={shape}];", quoted(&sys.to_string())).unwrap();
                    id
                }
            };
            let text = label_text(&a.label);
            let edge_label = if text.is_empty() {
                format!("{position}:")
            } else {
                format!("{position}: {text}")
            };
            writeln!(
                out,
                "    {} -> {target} [label={}];",
                node(&a.source),
                quoted(&edge_label)
            )
            .unwrap();
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}
