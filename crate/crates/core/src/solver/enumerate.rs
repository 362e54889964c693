//! Exhaustive backend for tiny instances and cross-checking.

use std::time::Instant;

use super::{Backend, BoolVar, CheckResult, Declarations, Formula, IntVar, Model};

/// Depth-first enumeration over all variables, checking each formula as soon
/// as its last variable is assigned.
#[derive(Debug, Default)]
pub struct EnumerationBackend {
    decls: Declarations,
    /// Formulas per push level; level 0 is the base.
    levels: Vec<Vec<Formula>>,
    model: Option<Model>,
}

impl EnumerationBackend {
    pub fn new() -> Self {
        EnumerationBackend {
            levels: vec![Vec::new()],
            ..Default::default()
        }
    }
}

struct Search<'a> {
    decls: &'a Declarations,
    /// Formulas whose last variable (in search order) sits at each depth.
    due: Vec<Vec<&'a Formula>>,
    model: Model,
    deadline: Option<Instant>,
    nodes: u64,
    timed_out: bool,
}

impl Search<'_> {
    fn depth_count(&self) -> usize {
        self.decls.ints.len() + self.decls.bools.len()
    }

    fn run(&mut self, depth: usize) -> bool {
        self.nodes += 1;
        if self.nodes.is_multiple_of(4096) && self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.timed_out = true;
        }
        if self.timed_out {
            return false;
        }
        if depth == self.depth_count() {
            return true;
        }
        let n_ints = self.decls.ints.len();
        let values: Vec<i64> = if depth < n_ints {
            let d = &self.decls.ints[depth];
            (d.lo..=d.hi).collect()
        } else {
            vec![0, 1]
        };
        for v in values {
            if depth < n_ints {
                self.model.ints[depth] = v;
            } else {
                self.model.bools[depth - n_ints] = v == 1;
            }
            if self.due[depth].iter().all(|f| self.model.eval(f)) && self.run(depth + 1) {
                return true;
            }
            if self.timed_out {
                return false;
            }
        }
        false
    }
}

impl Backend for EnumerationBackend {
    fn declare_int(&mut self, name: &str, lo: i64, hi: i64) -> IntVar {
        self.decls.int(name, lo, hi)
    }

    fn declare_bool(&mut self, name: &str) -> BoolVar {
        self.decls.boolean(name)
    }

    fn assert(&mut self, formula: &Formula) {
        self.levels
            .last_mut()
            .expect("base level always present")
            .push(formula.clone());
    }

    fn push(&mut self) {
        self.levels.push(Vec::new());
    }

    fn pop(&mut self) {
        if self.levels.len() > 1 {
            self.levels.pop();
        }
    }

    fn check(&mut self, deadline: Option<Instant>) -> CheckResult {
        self.model = None;
        let n_ints = self.decls.ints.len();
        let depth_count = n_ints + self.decls.bools.len();
        let mut due: Vec<Vec<&Formula>> = vec![Vec::new(); depth_count + 1];
        let mut constant: Vec<&Formula> = Vec::new();
        for f in self.levels.iter().flatten() {
            let (ints, bools) = f.variables();
            let last = bools
                .iter()
                .next_back()
                .map(|b| n_ints + b.index())
                .or_else(|| ints.iter().next_back().map(|v| v.index()));
            match last {
                Some(d) => due[d].push(f),
                None => constant.push(f),
            }
        }
        let mut search = Search {
            decls: &self.decls,
            due,
            model: Model {
                ints: self.decls.ints.iter().map(|d| d.lo).collect(),
                bools: vec![false; self.decls.bools.len()],
            },
            deadline,
            nodes: 0,
            timed_out: false,
        };
        if !constant.iter().all(|f| search.model.eval(f)) {
            return CheckResult::Unsat;
        }
        if search.run(0) {
            self.model = Some(search.model);
            CheckResult::Sat
        } else if search.timed_out {
            CheckResult::Unknown
        } else {
            CheckResult::Unsat
        }
    }

    fn model(&self) -> Option<Model> {
        self.model.clone()
    }
}
