//! Bounded-integer constraint solving behind a small backend interface.
//!
//! Formulas are boolean combinations of boolean variables, difference atoms
//! `a <= b` / `a = b` over terms `var + const`, and cardinality `AtLeast`.

mod enumerate;
mod sat;

use std::collections::BTreeSet;
use std::ops::Not;
use std::time::Instant;

pub use enumerate::EnumerationBackend;
pub use sat::SatBackend;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntVar(pub(crate) u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoolVar(pub(crate) u32);

impl IntVar {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl BoolVar {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// `var + offset`, or a bare constant when `var` is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Term {
    pub var: Option<IntVar>,
    pub offset: i64,
}

impl Term {
    pub fn constant(c: i64) -> Self {
        Term { var: None, offset: c }
    }

    pub fn plus(self, d: i64) -> Self {
        Term {
            offset: self.offset + d,
            ..self
        }
    }
}

impl From<IntVar> for Term {
    fn from(v: IntVar) -> Self {
        Term { var: Some(v), offset: 0 }
    }
}

impl From<i64> for Term {
    fn from(c: i64) -> Self {
        Term::constant(c)
    }
}

impl From<i32> for Term {
    fn from(c: i32) -> Self {
        Term::constant(c as i64)
    }
}

impl From<usize> for Term {
    fn from(c: usize) -> Self {
        Term::constant(c as i64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    False,
    Bool(BoolVar),
    Le(Term, Term),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    AtLeast(usize, Vec<Formula>),
}

impl Formula {
    pub fn le(a: impl Into<Term>, b: impl Into<Term>) -> Self {
        Formula::Le(a.into(), b.into())
    }

    pub fn lt(a: impl Into<Term>, b: impl Into<Term>) -> Self {
        Formula::Le(a.into(), b.into().plus(-1))
    }

    pub fn ge(a: impl Into<Term>, b: impl Into<Term>) -> Self {
        Formula::le(b, a)
    }

    pub fn gt(a: impl Into<Term>, b: impl Into<Term>) -> Self {
        Formula::lt(b, a)
    }

    pub fn eq(a: impl Into<Term>, b: impl Into<Term>) -> Self {
        Formula::Eq(a.into(), b.into())
    }

    pub fn ne(a: impl Into<Term>, b: impl Into<Term>) -> Self {
        !Formula::eq(a, b)
    }

    pub fn var(b: BoolVar) -> Self {
        Formula::Bool(b)
    }

    pub fn and(fs: Vec<Formula>) -> Self {
        Formula::And(fs)
    }

    pub fn or(fs: Vec<Formula>) -> Self {
        Formula::Or(fs)
    }

    pub fn implies(self, then: Formula) -> Self {
        Formula::Implies(Box::new(self), Box::new(then))
    }

    pub fn iff(self, other: Formula) -> Self {
        Formula::Iff(Box::new(self), Box::new(other))
    }

    pub fn at_least(k: usize, fs: Vec<Formula>) -> Self {
        Formula::AtLeast(k, fs)
    }

    /// Integer and boolean variables mentioned anywhere in the formula.
    pub fn variables(&self) -> (BTreeSet<IntVar>, BTreeSet<BoolVar>) {
        let mut ints = BTreeSet::new();
        let mut bools = BTreeSet::new();
        self.collect(&mut ints, &mut bools);
        (ints, bools)
    }

    fn collect(&self, ints: &mut BTreeSet<IntVar>, bools: &mut BTreeSet<BoolVar>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Bool(b) => {
                bools.insert(*b);
            }
            Formula::Le(a, b) | Formula::Eq(a, b) => {
                ints.extend(a.var);
                ints.extend(b.var);
            }
            Formula::Not(f) => f.collect(ints, bools),
            Formula::And(fs) | Formula::Or(fs) | Formula::AtLeast(_, fs) => {
                fs.iter().for_each(|f| f.collect(ints, bools))
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect(ints, bools);
                b.collect(ints, bools);
            }
        }
    }
}

impl Not for Formula {
    type Output = Formula;

    fn not(self) -> Formula {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(f) => *f,
            f => Formula::Not(Box::new(f)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntDecl {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
}

/// Variable declarations, numbered in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Declarations {
    pub ints: Vec<IntDecl>,
    pub bools: Vec<String>,
}

impl Declarations {
    pub fn int(&mut self, name: impl Into<String>, lo: i64, hi: i64) -> IntVar {
        assert!(lo <= hi, "empty domain");
        self.ints.push(IntDecl {
            name: name.into(),
            lo,
            hi,
        });
        IntVar(self.ints.len() as u32 - 1)
    }

    pub fn boolean(&mut self, name: impl Into<String>) -> BoolVar {
        self.bools.push(name.into());
        BoolVar(self.bools.len() as u32 - 1)
    }

    pub fn domain(&self, v: IntVar) -> (i64, i64) {
        let d = &self.ints[v.index()];
        (d.lo, d.hi)
    }
}

/// A full assignment to the declared variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub ints: Vec<i64>,
    pub bools: Vec<bool>,
}

impl Model {
    pub fn int(&self, v: IntVar) -> Option<i64> {
        self.ints.get(v.index()).copied()
    }

    pub fn boolean(&self, b: BoolVar) -> Option<bool> {
        self.bools.get(b.index()).copied()
    }

    fn term(&self, t: &Term) -> i64 {
        t.var.map_or(0, |v| self.ints[v.index()]) + t.offset
    }

    /// Truth value of `f`; panics if `f` mentions a variable outside the model.
    pub fn eval(&self, f: &Formula) -> bool {
        match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Bool(b) => self.bools[b.index()],
            Formula::Le(a, b) => self.term(a) <= self.term(b),
            Formula::Eq(a, b) => self.term(a) == self.term(b),
            Formula::Not(f) => !self.eval(f),
            Formula::And(fs) => fs.iter().all(|f| self.eval(f)),
            Formula::Or(fs) => fs.iter().any(|f| self.eval(f)),
            Formula::Implies(a, b) => !self.eval(a) || self.eval(b),
            Formula::Iff(a, b) => self.eval(a) == self.eval(b),
            Formula::AtLeast(k, fs) => fs.iter().filter(|f| self.eval(f)).count() >= *k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckResult {
    Sat,
    Unsat,
    /// The deadline passed before an answer was found.
    Unknown,
}

/// Incremental satisfiability over bounded integers and booleans.
///
/// Variables are numbered densely in declaration order, so a [`Declarations`]
/// replayed into a fresh backend yields the same handles.
pub trait Backend {
    fn declare_int(&mut self, name: &str, lo: i64, hi: i64) -> IntVar;
    fn declare_bool(&mut self, name: &str) -> BoolVar;
    fn assert(&mut self, formula: &Formula);
    fn push(&mut self);
    fn pop(&mut self);
    fn check(&mut self, deadline: Option<Instant>) -> CheckResult;
    /// Model of the last satisfiable `check`.
    fn model(&self) -> Option<Model>;

    /// Declares everything in `decls`; the backend must be fresh.
    fn declare_all(&mut self, decls: &Declarations) {
        for (i, d) in decls.ints.iter().enumerate() {
            let v = self.declare_int(&d.name, d.lo, d.hi);
            assert_eq!(v.index(), i, "backend was not fresh");
        }
        for (i, name) in decls.bools.iter().enumerate() {
            let b = self.declare_bool(name);
            assert_eq!(b.index(), i, "backend was not fresh");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_problem() -> (Declarations, Vec<Formula>) {
        let mut d = Declarations::default();
        let x = d.int("x", 0, 4);
        let y = d.int("y", 1, 3);
        let b = d.boolean("b");
        let fs = vec![
            Formula::lt(x, y),
            Formula::var(b).implies(Formula::eq(x, 2)),
            Formula::var(b),
        ];
        (d, fs)
    }

    fn run(backend: &mut dyn Backend, d: &Declarations, fs: &[Formula]) -> CheckResult {
        backend.declare_all(d);
        for f in fs {
            backend.assert(f);
        }
        backend.check(None)
    }

    #[test]
    fn both_backends_agree_on_small_problem() {
        let (d, fs) = small_problem();
        for backend in [
            &mut SatBackend::new(1) as &mut dyn Backend,
            &mut EnumerationBackend::new(),
        ] {
            assert_eq!(run(backend, &d, &fs), CheckResult::Sat);
            let m = backend.model().unwrap();
            assert!(fs.iter().all(|f| m.eval(f)));
            assert_eq!(m.int(IntVar(0)), Some(2));
            backend.push();
            backend.assert(&Formula::eq(IntVar(1), 2));
            assert_eq!(backend.check(None), CheckResult::Unsat);
            backend.pop();
            assert_eq!(backend.check(None), CheckResult::Sat);
        }
    }

    #[test]
    fn not_of_not_collapses() {
        let f = Formula::var(BoolVar(0));
        assert_eq!(!!f.clone(), f);
    }

    #[derive(Debug, Clone)]
    enum Shape {
        Le(usize, usize, i64),
        EqC(usize, i64),
        B(usize),
        Not(Box<Shape>),
        And(Vec<Shape>),
        Or(Vec<Shape>),
        Iff(Box<Shape>, Box<Shape>),
        AtLeast(usize, Vec<Shape>),
    }

    fn arb_shape() -> impl Strategy<Value = Shape> {
        let leaf = prop_oneof![
            (0usize..3, 0usize..3, -2i64..3).prop_map(|(a, b, d)| Shape::Le(a, b, d)),
            (0usize..3, -1i64..5).prop_map(|(a, c)| Shape::EqC(a, c)),
            (0usize..2).prop_map(Shape::B),
        ];
        leaf.prop_recursive(3, 16, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|s| Shape::Not(Box::new(s))),
                prop::collection::vec(inner.clone(), 0..3).prop_map(Shape::And),
                prop::collection::vec(inner.clone(), 0..3).prop_map(Shape::Or),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Shape::Iff(Box::new(a), Box::new(b))),
                (0usize..4, prop::collection::vec(inner, 0..4)).prop_map(|(k, v)| Shape::AtLeast(k, v)),
            ]
        })
    }

    fn build(s: &Shape) -> Formula {
        let iv = |i: usize| IntVar(i as u32);
        match s {
            Shape::Le(a, b, d) => Formula::le(iv(*a), Term::from(iv(*b)).plus(*d)),
            Shape::EqC(a, c) => Formula::eq(iv(*a), *c),
            Shape::B(i) => Formula::var(BoolVar(*i as u32)),
            Shape::Not(s) => !build(s),
            Shape::And(v) => Formula::and(v.iter().map(build).collect()),
            Shape::Or(v) => Formula::or(v.iter().map(build).collect()),
            Shape::Iff(a, b) => build(a).iff(build(b)),
            Shape::AtLeast(k, v) => Formula::at_least(*k, v.iter().map(build).collect()),
        }
    }

    proptest! {
        #[test]
        fn sat_backend_matches_enumeration(
            shapes in prop::collection::vec(arb_shape(), 1..4),
            extra in prop::option::of(arb_shape()),
        ) {
            let mut d = Declarations::default();
            d.int("a", 0, 3);
            d.int("b", -1, 2);
            d.int("c", 1, 4);
            d.boolean("p");
            d.boolean("q");
            let fs: Vec<Formula> = shapes.iter().map(build).collect();
            let mut sat = SatBackend::new(7);
            let mut en = EnumerationBackend::new();
            let r1 = run(&mut sat, &d, &fs);
            let r2 = run(&mut en, &d, &fs);
            prop_assert_eq!(r1, r2);
            if r1 == CheckResult::Sat {
                let m = sat.model().unwrap();
                prop_assert!(fs.iter().all(|f| m.eval(f)));
                for (i, decl) in d.ints.iter().enumerate() {
                    let v = m.ints[i];
                    prop_assert!(decl.lo <= v && v <= decl.hi);
                }
            }
            if let Some(e) = extra {
                let f = build(&e);
                sat.push();
                en.push();
                sat.assert(&f);
                en.assert(&f);
                prop_assert_eq!(sat.check(None), en.check(None));
                sat.pop();
                en.pop();
                prop_assert_eq!(sat.check(None), r1);
            }
        }
    }
}
