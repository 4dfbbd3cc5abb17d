//! Rewrites multi-item arrow labels into chains of single-item arrows.

use std::collections::HashSet;

use crate::model::{Arrow, Cinnamon, NodeRef};

/// Every arrow `s -> t : i1, …, ik` with `k >= 2` becomes
/// `s -> m1 : i1`, `m1 -> m2 : i2`, …, `m(k-1) -> t : ik` through fresh
/// ordinary states. The head of the chain keeps the arrow's position in
/// `out(s)`. Fresh states are named `<source>__<position>_<i>` after the
/// original arrow; chain arrows get ids `<original id>.<i>`.
pub fn normalize(c: &Cinnamon) -> Cinnamon {
    let mut taken: HashSet<String> = c.subnets.iter().flat_map(|s| s.states()).collect();
    let mut out = c.clone();
    for subnet in &mut out.subnets {
        if subnet.arrows.iter().all(|a| a.label.len() <= 1) {
            continue;
        }
        let mut arrows = Vec::with_capacity(subnet.arrows.len());
        for arrow in subnet.arrows.drain(..) {
            if arrow.label.len() <= 1 {
                arrows.push(arrow);
                continue;
            }
            let k = arrow.label.len();
            let stem = arrow.id.replace('/', "__");
            let fresh: Vec<String> = (1..k)
                .map(|i| {
                    let mut id = format!("{stem}_{i}");
                    while taken.contains(&id) {
                        id.push('_');
                    }
                    taken.insert(id.clone());
                    id
                })
                .collect();
            for (i, item) in arrow.label.iter().enumerate() {
                let source = if i == 0 {
                    arrow.source.clone()
                } else {
                    fresh[i - 1].clone()
                };
                let target = if i + 1 == k {
                    arrow.target.clone()
                } else {
                    NodeRef::State(fresh[i].clone())
                };
                arrows.push(Arrow {
                    id: format!("{}.{}", arrow.id, i + 1),
                    source,
                    target,
                    label: vec![item.clone()],
                    span: arrow.span.clone(),
                });
            }
        }
        subnet.arrows = arrows;
    }
    out
}

pub fn is_normalized(c: &Cinnamon) -> bool {
    c.arrows().all(|(_, a)| a.label.len() <= 1)
}
