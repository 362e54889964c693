//! CDCL backend: order-encoded integers and Tseitin-encoded formulas on batsat.

use std::collections::HashMap;
use std::time::Instant;

use batsat::{lbool, Callbacks, Lit, Solver, SolverInterface, SolverOpts};

use super::{Backend, BoolVar, CheckResult, Formula, IntVar, Model, Term};

struct Deadline {
    at: Option<Instant>,
}

impl Callbacks for Deadline {
    fn stop(&self) -> bool {
        self.at.is_some_and(|d| Instant::now() >= d)
    }
}

/// Literals `[x >= v]` for `v` in `lo+1..=hi`.
struct OrderInt {
    lo: i64,
    hi: i64,
    ge: Vec<Lit>,
}

pub struct SatBackend {
    solver: Solver<Deadline>,
    truth: Lit,
    ints: Vec<OrderInt>,
    bools: Vec<Lit>,
    /// `x <= y + d` keyed by (x, y, d).
    diffs: HashMap<(u32, u32, i64), Lit>,
    levels: Vec<Lit>,
    model: Option<Model>,
    clause: Vec<Lit>,
}

impl SatBackend {
    pub fn new(seed: u64) -> Self {
        let opts = SolverOpts {
            random_seed: (seed % 1_000_000_007) as f64 + 1.0,
            ..SolverOpts::default()
        };
        let mut solver = Solver::new(opts, Deadline { at: None });
        let truth = Lit::new(solver.new_var_default(), true);
        solver.add_clause_reuse(&mut vec![truth]);
        SatBackend {
            solver,
            truth,
            ints: Vec::new(),
            bools: Vec::new(),
            diffs: HashMap::new(),
            levels: Vec::new(),
            model: None,
            clause: Vec::new(),
        }
    }

    fn fresh(&mut self) -> Lit {
        Lit::new(self.solver.new_var_default(), true)
    }

    fn constant(&self, b: bool) -> Lit {
        if b {
            self.truth
        } else {
            !self.truth
        }
    }

    fn add(&mut self, lits: &[Lit]) {
        self.clause.clear();
        self.clause.extend_from_slice(lits);
        if let Some(&act) = self.levels.last() {
            self.clause.push(!act);
        }
        let mut c = std::mem::take(&mut self.clause);
        self.solver.add_clause_reuse(&mut c);
        self.clause = c;
    }

    /// Permanent clause, independent of the push level.
    fn define(&mut self, lits: &[Lit]) {
        let mut c = lits.to_vec();
        self.solver.add_clause_reuse(&mut c);
    }

    fn ge(&self, x: IntVar, v: i64) -> Lit {
        let o = &self.ints[x.index()];
        if v <= o.lo {
            self.truth
        } else if v > o.hi {
            !self.truth
        } else {
            o.ge[(v - o.lo - 1) as usize]
        }
    }

    fn diff(&mut self, x: IntVar, y: IntVar, d: i64) -> Lit {
        if let Some(&l) = self.diffs.get(&(x.0, y.0, d)) {
            return l;
        }
        let l = self.fresh();
        let (xlo, xhi) = (self.ints[x.index()].lo, self.ints[x.index()].hi);
        let (ylo, yhi) = (self.ints[y.index()].lo, self.ints[y.index()].hi);
        for v in xlo..=xhi {
            let c = [!l, !self.ge(x, v), self.ge(y, v - d)];
            self.define(&c);
        }
        for v in ylo..=yhi {
            let c = [l, !self.ge(y, v), self.ge(x, v + d + 1)];
            self.define(&c);
        }
        self.diffs.insert((x.0, y.0, d), l);
        l
    }

    fn le(&mut self, a: Term, b: Term) -> Lit {
        match (a.var, b.var) {
            (None, None) => self.constant(a.offset <= b.offset),
            (Some(x), None) => !self.ge(x, b.offset - a.offset + 1),
            (None, Some(y)) => self.ge(y, a.offset - b.offset),
            (Some(x), Some(y)) if x == y => self.constant(a.offset <= b.offset),
            (Some(x), Some(y)) => self.diff(x, y, b.offset - a.offset),
        }
    }

    fn and(&mut self, lits: Vec<Lit>) -> Lit {
        match lits.len() {
            0 => self.truth,
            1 => lits[0],
            _ => {
                let z = self.fresh();
                let mut long = vec![z];
                for &l in &lits {
                    self.define(&[!z, l]);
                    long.push(!l);
                }
                self.define(&long);
                z
            }
        }
    }

    fn or(&mut self, lits: Vec<Lit>) -> Lit {
        let negated = lits.into_iter().map(|l| !l).collect();
        !self.and(negated)
    }

    fn encode(&mut self, f: &Formula) -> Lit {
        match f {
            Formula::True => self.truth,
            Formula::False => !self.truth,
            Formula::Bool(b) => self.bools[b.index()],
            Formula::Le(a, b) => self.le(*a, *b),
            Formula::Eq(a, b) => {
                let l1 = self.le(*a, *b);
                let l2 = self.le(*b, *a);
                self.and(vec![l1, l2])
            }
            Formula::Not(g) => !self.encode(g),
            Formula::And(fs) => {
                let lits = fs.iter().map(|g| self.encode(g)).collect();
                self.and(lits)
            }
            Formula::Or(fs) => {
                let lits = fs.iter().map(|g| self.encode(g)).collect();
                self.or(lits)
            }
            Formula::Implies(a, b) => {
                let la = self.encode(a);
                let lb = self.encode(b);
                self.or(vec![!la, lb])
            }
            Formula::Iff(a, b) => {
                let la = self.encode(a);
                let lb = self.encode(b);
                let z = self.fresh();
                self.define(&[!z, !la, lb]);
                self.define(&[!z, la, !lb]);
                self.define(&[z, la, lb]);
                self.define(&[z, !la, !lb]);
                z
            }
            Formula::AtLeast(k, fs) => {
                let lits: Vec<Lit> = fs.iter().map(|g| self.encode(g)).collect();
                self.at_least(*k, &lits)
            }
        }
    }

    /// Sequential counter: `row[j]` holds "at least j+1 of the literals so far".
    fn at_least(&mut self, k: usize, lits: &[Lit]) -> Lit {
        if k == 0 {
            return self.truth;
        }
        if k > lits.len() {
            return !self.truth;
        }
        let mut row = vec![!self.truth; k];
        for &l in lits {
            let mut next = Vec::with_capacity(k);
            for j in 0..k {
                let carry = if j == 0 {
                    l
                } else {
                    self.and(vec![row[j - 1], l])
                };
                next.push(self.or(vec![row[j], carry]));
            }
            row = next;
        }
        row[k - 1]
    }

    fn assert_top(&mut self, f: &Formula) {
        match f {
            Formula::And(fs) => fs.iter().for_each(|g| self.assert_top(g)),
            Formula::Or(fs) => {
                let lits: Vec<Lit> = fs.iter().map(|g| self.encode(g)).collect();
                self.add(&lits);
            }
            Formula::Implies(a, b) => {
                let la = self.encode(a);
                let lb = self.encode(b);
                self.add(&[!la, lb]);
            }
            _ => {
                let l = self.encode(f);
                self.add(&[l]);
            }
        }
    }

    fn read_model(&self) -> Model {
        let value = |l: Lit| self.solver.value_lit(l) == lbool::TRUE;
        let ints = self
            .ints
            .iter()
            .map(|o| o.lo + o.ge.iter().take_while(|&&l| value(l)).count() as i64)
            .collect();
        let bools = self.bools.iter().map(|&l| value(l)).collect();
        Model { ints, bools }
    }
}

impl Backend for SatBackend {
    fn declare_int(&mut self, _name: &str, lo: i64, hi: i64) -> IntVar {
        let ge: Vec<Lit> = (lo + 1..=hi).map(|_| self.fresh()).collect();
        for w in ge.windows(2) {
            self.define(&[!w[1], w[0]]);
        }
        self.ints.push(OrderInt { lo, hi, ge });
        IntVar(self.ints.len() as u32 - 1)
    }

    fn declare_bool(&mut self, _name: &str) -> BoolVar {
        let l = self.fresh();
        self.bools.push(l);
        BoolVar(self.bools.len() as u32 - 1)
    }

    fn assert(&mut self, formula: &Formula) {
        self.assert_top(formula);
    }

    fn push(&mut self) {
        let act = self.fresh();
        self.levels.push(act);
    }

    fn pop(&mut self) {
        if let Some(act) = self.levels.pop() {
            self.define(&[!act]);
        }
    }

    fn check(&mut self, deadline: Option<Instant>) -> CheckResult {
        self.model = None;
        if deadline.is_some_and(|d| Instant::now() >= d) {
            return CheckResult::Unknown;
        }
        self.solver.cb_mut().at = deadline;
        let assumptions = self.levels.clone();
        let r = self.solver.solve_limited(&assumptions);
        self.solver.cb_mut().at = None;
        if r == lbool::TRUE {
            self.model = Some(self.read_model());
            CheckResult::Sat
        } else if r == lbool::FALSE {
            CheckResult::Unsat
        } else {
            CheckResult::Unknown
        }
    }

    fn model(&self) -> Option<Model> {
        self.model.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    #[test]
    fn difference_atoms_are_exact() {
        let mut s = SatBackend::new(3);
        let x = s.declare_int("x", 0, 5);
        let y = s.declare_int("y", 2, 4);
        s.assert(&Formula::le(x, Term::from(y).plus(-3)));
        s.assert(&Formula::ge(x, 1));
        assert_eq!(s.check(None), CheckResult::Sat);
        let m = s.model().unwrap();
        assert_eq!((m.int(x), m.int(y)), (Some(1), Some(4)));
    }

    #[test]
    fn at_least_counts() {
        let mut s = SatBackend::new(3);
        let bs: Vec<BoolVar> = (0..5).map(|i| s.declare_bool(&format!("b{i}"))).collect();
        let fs: Vec<Formula> = bs.iter().map(|&b| Formula::var(b)).collect();
        s.assert(&Formula::at_least(3, fs.clone()));
        s.assert(&!Formula::var(bs[0]));
        s.assert(&!Formula::var(bs[1]));
        assert_eq!(s.check(None), CheckResult::Sat);
        s.push();
        s.assert(&!Formula::var(bs[2]));
        assert_eq!(s.check(None), CheckResult::Unsat);
        s.pop();
        s.assert(&Formula::at_least(4, fs));
        assert_eq!(s.check(None), CheckResult::Unsat);
    }

    #[test]
    fn expired_deadline_is_unknown() {
        let mut s = SatBackend::new(3);
        s.declare_bool("b");
        let past = Instant::now() - Duration::from_millis(1);
        assert_eq!(s.check(Some(past)), CheckResult::Unknown);
    }
}
