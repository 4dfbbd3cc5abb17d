use crate::model::{Actual, Cinnamon, LabelItem, NodeRef, Primitive, StateId, Subnet, VarName};
use crate::value::Mode;

use super::ast::{WVar, WhileProgram};

pub const SUBTR: &str = "subtr";
const MAIN: &str = "P";

fn v(name: &str) -> VarName {
    name.to_string()
}

fn prim(p: Primitive) -> LabelItem {
    LabelItem::Prim(p)
}

/// `subtr(sx, sy, sz)` sets `sz` to `sx ∸ sy`: it counts `si` up to `sx`,
/// bumping `sj` until it reaches `sy` and `sz` after that. Every scratch
/// variable is cleared on entry, so repeated calls never see stale values.
pub fn build_subtr() -> Subnet {
    let mut s = Subnet::new(
        SUBTR,
        vec![v("sx"), v("sy"), v("sz")],
        vec![v("si"), v("sj")],
        NodeRef::state("sub0"),
    );
    s.push_arrow(
        "sub0",
        NodeRef::state("sub1"),
        vec![
            prim(Primitive::Clear(v("sz"))),
            prim(Primitive::Clear(v("si"))),
            prim(Primitive::Clear(v("sj"))),
        ],
    );
    s.push_arrow(
        "sub1",
        NodeRef::state("sub2"),
        vec![
            prim(Primitive::IfNonEq(v("si"), v("sx"))),
            prim(Primitive::Inc(v("si"))),
        ],
    );
    s.push_arrow("sub1", NodeRef::Return, vec![]);
    s.push_arrow(
        "sub2",
        NodeRef::state("sub1"),
        vec![
            prim(Primitive::IfNonEq(v("sj"), v("sy"))),
            prim(Primitive::Inc(v("sj"))),
        ],
    );
    s.push_arrow("sub2", NodeRef::state("sub1"), vec![prim(Primitive::Inc(v("sz")))]);
    s
}

/// A complete cinnamon computing `f(x, y) = x ∸ y`: its main subnet
/// `Monus(mz, mx, my)` calls [`build_subtr`].
pub fn subtr_program() -> Cinnamon {
    let mut c = Cinnamon::new("Monus", Mode::Nat, "Monus");
    let mut main = Subnet::new("Monus", vec![v("mz"), v("mx"), v("my")], vec![], NodeRef::state("m0"));
    main.push_arrow(
        "m0",
        NodeRef::Finish,
        vec![LabelItem::call(
            SUBTR,
            vec![Actual::Var(v("mx")), Actual::Var(v("my")), Actual::Var(v("mz"))],
        )],
    );
    c.subnets = vec![main, build_subtr()];
    c
}

struct Builder {
    main: Subnet,
    states: usize,
    temps: usize,
}

fn xv(i: WVar) -> VarName {
    format!("x{i}")
}

impl Builder {
    fn state(&mut self) -> StateId {
        self.states += 1;
        format!("q{}", self.states)
    }

    fn temp(&mut self, kind: &str) -> VarName {
        let name = format!("_{kind}{}", self.temps);
        self.main.locals.push(name.clone());
        name
    }

    fn next_temp_group(&mut self) {
        self.temps += 1;
    }

    /// `x < y` as `subtr(y, x, r) != 0`. Emits `entry -> b` materializing the
    /// condition; returns `b` and the test arrow's label.
    fn less_than(&mut self, entry: &str, x: WVar, y: WVar) -> (StateId, LabelItem) {
        let r = self.temp("r");
        let z = self.temp("z");
        self.next_temp_group();
        let b = self.state();
        self.main.push_arrow(
            entry,
            NodeRef::state(b.clone()),
            vec![
                LabelItem::call(
                    SUBTR,
                    vec![Actual::Var(xv(y)), Actual::Var(xv(x)), Actual::Var(r.clone())],
                ),
                prim(Primitive::Clear(z.clone())),
            ],
        );
        (b, prim(Primitive::IfNonEq(r, z)))
    }

    fn fragment(&mut self, p: &WhileProgram, entry: &str, exit: &NodeRef) {
        use WhileProgram::*;
        match p {
            AssignZero(x) => {
                self.main
                    .push_arrow(entry, exit.clone(), vec![prim(Primitive::Clear(xv(*x)))]);
            }
            AssignCopy(x, y) => {
                self.main
                    .push_arrow(entry, exit.clone(), vec![prim(Primitive::Copy(xv(*y), xv(*x)))]);
            }
            AssignSucc(x, y) => {
                self.main.push_arrow(
                    entry,
                    exit.clone(),
                    vec![prim(Primitive::Copy(xv(*y), xv(*x))), prim(Primitive::Inc(xv(*x)))],
                );
            }
            Seq(p, q) => {
                let mid = self.state();
                self.fragment(p, entry, &NodeRef::state(mid.clone()));
                self.fragment(q, &mid, exit);
            }
            If(x, y, p, q) => {
                let (b, test) = self.less_than(entry, *x, *y);
                let then_entry = self.state();
                let else_entry = self.state();
                self.main
                    .push_arrow(&*b, NodeRef::state(then_entry.clone()), vec![test]);
                self.main.push_arrow(&*b, NodeRef::state(else_entry.clone()), vec![]);
                self.fragment(p, &then_entry, exit);
                self.fragment(q, &else_entry, exit);
            }
            While(x, y, p) => {
                // Entry states are fresh, so the entry doubles as loop head.
                let (b, test) = self.less_than(entry, *x, *y);
                let body = self.state();
                self.main.push_arrow(&*b, NodeRef::state(body.clone()), vec![test]);
                self.main.push_arrow(&*b, exit.clone(), vec![]);
                self.fragment(p, &body, &NodeRef::state(entry));
            }
            For(y, p) => {
                let t = self.temp("t");
                let c = self.temp("c");
                self.next_temp_group();
                let w = self.state();
                let body = self.state();
                self.main.push_arrow(
                    entry,
                    NodeRef::state(w.clone()),
                    vec![
                        prim(Primitive::Copy(xv(*y), t.clone())),
                        prim(Primitive::Clear(c.clone())),
                    ],
                );
                self.main.push_arrow(
                    &*w,
                    NodeRef::state(body.clone()),
                    vec![prim(Primitive::IfNonEq(c.clone(), t)), prim(Primitive::Inc(c))],
                );
                self.main.push_arrow(&*w, exit.clone(), vec![]);
                self.fragment(p, &body, &NodeRef::state(w));
            }
        }
    }
}

/// Translates `p` into a nat-mode cinnamon with main subnet `P(x0, …, xk)`
/// (`k` the largest variable index in `p`) plus the [`build_subtr`] library
/// subnet. Temporaries are locals of `P` named `_r`, `_z`, `_t`, `_c` plus a
/// counter, so `x_i` keeps position `i` in the variable order.
pub fn compile_while(p: &WhileProgram) -> Cinnamon {
    let formals = (0..=p.max_var()).map(xv).collect();
    let mut b = Builder {
        main: Subnet::new(MAIN, formals, vec![], NodeRef::state("q0")),
        states: 0,
        temps: 0,
    };
    b.fragment(p, "q0", &NodeRef::Finish);
    let mut c = Cinnamon::new("While", Mode::Nat, MAIN);
    c.subnets = vec![b.main, build_subtr()];
    c
}

#[cfg(test)]
mod tests {
    use num_bigint::BigUint;

    use super::super::ast::parse_while;
    use super::*;
    use crate::interp::{compute, Computed, RunOptions};
    use crate::validate::validate;

    fn run(c: &Cinnamon, args: &[u64]) -> Computed {
        let args: Vec<BigUint> = args.iter().map(|&a| a.into()).collect();
        compute(c, &args, RunOptions::default()).unwrap()
    }

    fn val(n: u64) -> Computed {
        Computed::Value(n.into())
    }

    #[test]
    fn monus_worked_values() {
        let c = subtr_program();
        assert!(validate(&c).is_ok());
        assert_eq!(run(&c, &[7, 3]), val(4));
        assert_eq!(run(&c, &[3, 7]), val(0));
    }

    #[test]
    fn compiled_programs_validate() {
        let p = parse_while("{ if x1 < x2 then x0 := x1 else for x2 do x0 := x0 + 1 ; while x0 < x3 do x0 := x0 + 1 }")
            .unwrap();
        let c = compile_while(&p);
        assert_eq!(validate(&c).violations, vec![]);
        assert_eq!(&c.variable_order()[..4], &["x0", "x1", "x2", "x3"]);
    }

    #[test]
    fn compiled_examples() {
        let identity = compile_while(&parse_while("x0 := x1").unwrap());
        assert_eq!(run(&identity, &[9]), val(9));
        let add = compile_while(&parse_while("{ x0 := x1 ; for x2 do x0 := x0 + 1 }").unwrap());
        assert_eq!(run(&add, &[3, 4]), val(7));
        let count = compile_while(&parse_while("{ x0 := 0 ; while x0 < x1 do x0 := x0 + 1 }").unwrap());
        assert_eq!(run(&count, &[5]), val(5));
        let max = compile_while(&parse_while("if x1 < x2 then x0 := x2 else x0 := x1").unwrap());
        assert_eq!(run(&max, &[2, 6]), val(6));
        assert_eq!(run(&max, &[6, 2]), val(6));
    }

    #[test]
    fn self_successor() {
        let c = compile_while(&parse_while("x1 := x1 + 1").unwrap());
        assert_eq!(run(&c, &[4]), val(0));
        let c = compile_while(&parse_while("{ x1 := x1 + 1 ; x0 := x1 }").unwrap());
        assert_eq!(run(&c, &[4]), val(5));
    }
}
