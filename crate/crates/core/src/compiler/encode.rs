//! Constraint construction for one circuit over a window of stages.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use serde::Serialize;

use crate::array::{ArrayOccupancy, Exclusivity, GridSpec, QubitState, Site, Trap};
use crate::circuit::Circuit;
use crate::solver::{Backend, BoolVar, Declarations, Formula, IntVar, Model, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Bounds,
    Trap,
    AodOrder,
    GateExec,
    Exclusivity,
    Dependency,
    MultiprogramMovement,
    MultiprogramGates,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Bounds,
        Family::Trap,
        Family::AodOrder,
        Family::GateExec,
        Family::Exclusivity,
        Family::Dependency,
        Family::MultiprogramMovement,
        Family::MultiprogramGates,
    ];
}

/// Solver variables of one qubit at one stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubitVars {
    pub x: IntVar,
    pub y: IntVar,
    pub aod: BoolVar,
    pub col: IntVar,
    pub row: IntVar,
}

/// A qubit state pinned before the encoded window. `lines` holds its AOD
/// column and row when known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedQubit {
    pub state: QubitState,
    pub lines: Option<(usize, usize)>,
}

impl From<QubitState> for FixedQubit {
    fn from(state: QubitState) -> Self {
        FixedQubit { state, lines: None }
    }
}

#[derive(Debug, Clone)]
pub struct VariableSet {
    pub first_stage: usize,
    /// `qubits[k][q]` for absolute stage `first_stage + k`.
    pub qubits: Vec<Vec<QubitVars>>,
    pub gate_stage: Vec<Option<IntVar>>,
    /// Present for gates that may be left out of the window.
    pub gate_active: Vec<Option<BoolVar>>,
}

impl VariableSet {
    pub fn stages(&self) -> usize {
        self.qubits.len()
    }

    pub fn at(&self, qubit: usize, stage: usize) -> &QubitVars {
        &self.qubits[stage - self.first_stage][qubit]
    }

    pub fn stage_range(&self) -> std::ops::Range<usize> {
        self.first_stage..self.first_stage + self.stages()
    }
}

/// Which stages and gates to encode.
#[derive(Debug, Clone)]
pub struct WindowSpec<'a> {
    pub first_stage: usize,
    pub stages: usize,
    /// State of stage `first_stage - 1`, or the fixed initial layout.
    pub previous: Option<&'a [FixedQubit]>,
    pub gates: &'a [usize],
    pub optional: bool,
    pub earliest_gate_stage: usize,
}

#[derive(Debug, Clone)]
pub struct EncodedProblem {
    pub name: String,
    pub grid: GridSpec,
    pub num_qubits: usize,
    pub operands: Vec<(usize, usize)>,
    pub decls: Declarations,
    pub vars: VariableSet,
    pub previous: Option<Vec<FixedQubit>>,
    pub window_gates: Vec<usize>,
    pub exclusivity: Exclusivity,
    pub constraints: BTreeMap<Family, Vec<Formula>>,
}

#[derive(Clone, Copy)]
enum View<'a> {
    Var(&'a QubitVars),
    Fixed(&'a FixedQubit),
}

impl View<'_> {
    fn x(&self) -> Term {
        match self {
            View::Var(v) => v.x.into(),
            View::Fixed(f) => f.state.site.x.into(),
        }
    }

    fn y(&self) -> Term {
        match self {
            View::Var(v) => v.y.into(),
            View::Fixed(f) => f.state.site.y.into(),
        }
    }

    fn aod(&self) -> Formula {
        match self {
            View::Var(v) => Formula::var(v.aod),
            View::Fixed(f) if f.state.trap == Trap::Aod => Formula::True,
            View::Fixed(_) => Formula::False,
        }
    }

    fn lines(&self) -> Option<(Term, Term)> {
        match self {
            View::Var(v) => Some((v.col.into(), v.row.into())),
            View::Fixed(f) => f.lines.map(|(c, r)| (c.into(), r.into())),
        }
    }
}

fn same_site(a: &QubitVars, b: &QubitVars) -> Formula {
    Formula::and(vec![Formula::eq(a.x, b.x), Formula::eq(a.y, b.y)])
}

fn at_site(a: &QubitVars, s: Site) -> Formula {
    Formula::and(vec![Formula::eq(a.x, s.x), Formula::eq(a.y, s.y)])
}

/// `p < e0 -> c < e1`, `p > e0 -> c > e1`, `p = e0 -> c = e1` on one axis.
fn keeps_order(p: Term, c: Term, e0: usize, e1: usize) -> Formula {
    Formula::and(vec![
        Formula::lt(p, e0).implies(Formula::lt(c, e1)),
        Formula::gt(p, e0).implies(Formula::gt(c, e1)),
        Formula::eq(p, e0).implies(Formula::eq(c, e1)),
    ])
}

/// No strict swap between two lines held across one movement step.
fn no_swap(pi: Term, ci: Term, pj: Term, cj: Term) -> Formula {
    Formula::and(vec![
        Formula::lt(pi, pj).implies(Formula::le(ci, cj)),
        Formula::lt(pj, pi).implies(Formula::le(cj, ci)),
    ])
}

impl EncodedProblem {
    pub fn family(&self, f: Family) -> &[Formula] {
        self.constraints.get(&f).map_or(&[], Vec::as_slice)
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.constraints.values().flatten()
    }

    /// Declares and asserts everything; returns false if the deadline passed.
    pub fn load(&self, backend: &mut dyn Backend, deadline: Option<Instant>) -> bool {
        backend.declare_all(&self.decls);
        for (i, f) in self.formulas().enumerate() {
            if i % 512 == 0 && deadline.is_some_and(|d| Instant::now() >= d) {
                return false;
            }
            backend.assert(f);
        }
        true
    }

    /// "Gate j executes at stage s" (and is active, for optional gates).
    pub fn gate_at(&self, gate: usize, stage: usize) -> Formula {
        let t = self.vars.gate_stage[gate].expect("gate is not in the window");
        let at = Formula::eq(t, stage);
        match self.vars.gate_active[gate] {
            Some(u) => Formula::and(vec![Formula::var(u), at]),
            None => at,
        }
    }

    /// Activity literals of the optional window gates.
    pub fn active_gates(&self) -> Vec<Formula> {
        self.window_gates
            .iter()
            .filter_map(|&g| self.vars.gate_active[g].map(Formula::var))
            .collect()
    }

    pub fn gates_at(&self, stage: usize) -> Vec<Formula> {
        self.window_gates.iter().map(|&g| self.gate_at(g, stage)).collect()
    }

    /// Per qubit: SLM-trapped on both ends of the cycle into `stage`, so it
    /// holds no AOD line there.
    pub fn quiet_at(&self, stage: usize) -> Vec<Formula> {
        (0..self.num_qubits)
            .map(|q| {
                let here = !Formula::var(self.vars.at(q, stage).aod);
                match self.before(q, stage) {
                    Some(b) => Formula::and(vec![here, !b.aod()]),
                    None => here,
                }
            })
            .collect()
    }

    /// Per qubit: moves at most one site along each axis into `stage`.
    pub fn short_moves_at(&self, stage: usize) -> Vec<Formula> {
        (0..self.num_qubits)
            .filter_map(|q| {
                let b = self.before(q, stage)?;
                let v = self.vars.at(q, stage);
                let near = |prev: Term, cur: Term| {
                    Formula::and(vec![Formula::le(cur, prev.plus(1)), Formula::le(prev, cur.plus(1))])
                };
                Some(Formula::and(vec![near(b.x(), v.x.into()), near(b.y(), v.y.into())]))
            })
            .collect()
    }

    /// The qubit before stage `s`: the previous encoded stage, the pinned
    /// state, or `None` at an unpinned first stage.
    fn before(&self, q: usize, s: usize) -> Option<View<'_>> {
        if s > self.vars.first_stage {
            Some(View::Var(self.vars.at(q, s - 1)))
        } else {
            self.previous.as_ref().map(|p| View::Fixed(&p[q]))
        }
    }

    fn encode_bounds(&mut self, earliest: usize) {
        let g = self.grid;
        let mut fs = Vec::new();
        for stage in &self.vars.qubits {
            for v in stage {
                for (var, n) in [(v.x, g.x_sites), (v.y, g.y_sites), (v.col, g.aod_cols), (v.row, g.aod_rows)] {
                    fs.push(Formula::and(vec![Formula::ge(var, 0i64), Formula::lt(var, n)]));
                }
            }
        }
        let range = self.vars.stage_range();
        for &j in &self.window_gates {
            let t = self.vars.gate_stage[j].expect("window gate");
            let lo = range.start.max(earliest);
            let within = Formula::and(vec![Formula::ge(t, lo), Formula::lt(t, range.end)]);
            fs.push(match self.vars.gate_active[j] {
                Some(u) => Formula::var(u).implies(within),
                None => within,
            });
        }
        self.constraints.insert(Family::Bounds, fs);
    }

    fn encode_trap(&mut self) {
        let n = self.num_qubits;
        let mut fs = Vec::new();
        for s in self.vars.stage_range() {
            for q in 0..n {
                let cur = self.vars.at(q, s);
                if let Some(prev) = self.before(q, s) {
                    let both = Formula::and(vec![prev.aod(), Formula::var(cur.aod)]);
                    fs.push((!both).implies(Formula::and(vec![
                        Formula::eq(cur.x, prev.x()),
                        Formula::eq(cur.y, prev.y()),
                    ])));
                }
            }
            for i in 0..n {
                for j in i + 1..n {
                    let (a, b) = (self.vars.at(i, s), self.vars.at(j, s));
                    let slm = Formula::and(vec![!Formula::var(a.aod), !Formula::var(b.aod)]);
                    fs.push(slm.implies(!same_site(a, b)));
                    let aod = Formula::and(vec![Formula::var(a.aod), Formula::var(b.aod)]);
                    fs.push(aod.implies(Formula::or(vec![
                        Formula::ne(a.col, b.col),
                        Formula::ne(a.row, b.row),
                    ])));
                }
            }
        }
        self.constraints.insert(Family::Trap, fs);
    }

    fn encode_aod_order(&mut self) {
        let n = self.num_qubits;
        let mut fs = Vec::new();
        for s in self.vars.stage_range() {
            for i in 0..n {
                for j in i + 1..n {
                    let (a, b) = (self.vars.at(i, s), self.vars.at(j, s));
                    let both = Formula::and(vec![Formula::var(a.aod), Formula::var(b.aod)]);
                    let mut order = Vec::new();
                    for (la, lb, pa, pb) in [(a.col, b.col, a.x, b.x), (a.row, b.row, a.y, b.y)] {
                        order.push(Formula::lt(la, lb).implies(Formula::le(pa, pb)));
                        order.push(Formula::lt(lb, la).implies(Formula::le(pb, pa)));
                        order.push(Formula::eq(la, lb).implies(Formula::eq(pa, pb)));
                    }
                    fs.push(both.implies(Formula::and(order)));
                }
            }
            for q in 0..n {
                let cur = self.vars.at(q, s);
                if let Some(prev) = self.before(q, s) {
                    if let Some((pc, pr)) = prev.lines() {
                        let both = Formula::and(vec![prev.aod(), Formula::var(cur.aod)]);
                        fs.push(both.implies(Formula::and(vec![
                            Formula::eq(cur.col, pc),
                            Formula::eq(cur.row, pr),
                        ])));
                    }
                }
            }
            for i in 0..n {
                for j in i + 1..n {
                    let (Some(pi), Some(pj)) = (self.before(i, s), self.before(j, s)) else {
                        continue;
                    };
                    let (ci, cj) = (self.vars.at(i, s), self.vars.at(j, s));
                    let held = Formula::and(vec![
                        Formula::or(vec![pi.aod(), Formula::var(ci.aod)]),
                        Formula::or(vec![pj.aod(), Formula::var(cj.aod)]),
                    ]);
                    fs.push(held.implies(Formula::and(vec![
                        no_swap(pi.x(), ci.x.into(), pj.x(), cj.x.into()),
                        no_swap(pi.y(), ci.y.into(), pj.y(), cj.y.into()),
                    ])));
                }
            }
        }
        self.constraints.insert(Family::AodOrder, fs);
    }

    fn encode_gate_exec(&mut self) {
        let mut fs = Vec::new();
        let first = self.vars.first_stage;
        for &j in &self.window_gates {
            let (p, q) = self.operands[j];
            for s in self.vars.stage_range() {
                fs.push(self.gate_at(j, s).implies(same_site(self.vars.at(p, s), self.vars.at(q, s))));
            }
            if let Some(u) = self.vars.gate_active[j] {
                let t = self.vars.gate_stage[j].expect("window gate");
                fs.push((!Formula::var(u)).implies(Formula::eq(t, first)));
            }
        }
        self.constraints.insert(Family::GateExec, fs);
    }

    fn encode_exclusivity(&mut self) {
        let n = self.num_qubits;
        let mut fs = Vec::new();
        for &j in &self.window_gates {
            let (p, q) = self.operands[j];
            for s in self.vars.stage_range() {
                let site = self.vars.at(p, s);
                let others: Vec<Formula> = (0..n)
                    .filter(|&i| i != p && i != q)
                    .map(|i| !same_site(self.vars.at(i, s), site))
                    .collect();
                if !others.is_empty() {
                    fs.push(self.gate_at(j, s).implies(Formula::and(others)));
                }
            }
        }
        for s in self.vars.stage_range() {
            for i in 0..n {
                for j in i + 1..n {
                    for k in j + 1..n {
                        let (a, b, c) = (self.vars.at(i, s), self.vars.at(j, s), self.vars.at(k, s));
                        fs.push(Formula::or(vec![!same_site(a, b), !same_site(a, c)]));
                    }
                }
            }
        }
        self.constraints.insert(Family::Exclusivity, fs);
    }

    fn encode_dependency(&mut self, preds: &[Vec<usize>]) {
        let mut fs = Vec::new();
        for &j in &self.window_gates {
            let tj = self.vars.gate_stage[j].expect("window gate");
            for &p in &preds[j] {
                let Some(tp) = self.vars.gate_stage[p] else {
                    continue;
                };
                let mut then = vec![Formula::lt(tp, tj)];
                if let Some(up) = self.vars.gate_active[p] {
                    then.push(Formula::var(up));
                }
                let f = Formula::and(then);
                fs.push(match self.vars.gate_active[j] {
                    Some(uj) => Formula::var(uj).implies(f),
                    None => f,
                });
            }
        }
        self.constraints.insert(Family::Dependency, fs);
    }
}

/// Encodes stages `first_stage ..` of `circuit`. Gates outside `spec.gates`
/// get no variables; the caller guarantees their predecessors are either in
/// the window or already scheduled.
pub fn encode_window(circuit: &Circuit, grid: GridSpec, spec: &WindowSpec) -> EncodedProblem {
    let n = circuit.num_qubits;
    let mut decls = Declarations::default();
    let top = |k: usize| k.max(1) as i64 - 1;
    let last = spec.first_stage + spec.stages.max(1) - 1;
    let qubits = (spec.first_stage..=last)
        .map(|s| {
            (0..n)
                .map(|q| QubitVars {
                    x: decls.int(format!("x[{q},{s}]"), 0, top(grid.x_sites)),
                    y: decls.int(format!("y[{q},{s}]"), 0, top(grid.y_sites)),
                    aod: decls.boolean(format!("a[{q},{s}]")),
                    col: decls.int(format!("c[{q},{s}]"), 0, top(grid.aod_cols)),
                    row: decls.int(format!("r[{q},{s}]"), 0, top(grid.aod_rows)),
                })
                .collect()
        })
        .collect();
    let mut gate_stage = vec![None; circuit.len()];
    let mut gate_active = vec![None; circuit.len()];
    for &g in spec.gates {
        gate_stage[g] = Some(decls.int(format!("t[{g}]"), spec.first_stage as i64, last as i64));
        if spec.optional {
            gate_active[g] = Some(decls.boolean(format!("u[{g}]")));
        }
    }
    let mut p = EncodedProblem {
        name: circuit.name.clone(),
        grid,
        num_qubits: n,
        operands: circuit.operands(),
        decls,
        vars: VariableSet {
            first_stage: spec.first_stage,
            qubits,
            gate_stage,
            gate_active,
        },
        previous: spec.previous.map(<[FixedQubit]>::to_vec),
        window_gates: spec.gates.to_vec(),
        exclusivity: Exclusivity::default(),
        constraints: Family::ALL.iter().map(|&f| (f, Vec::new())).collect(),
    };
    p.encode_bounds(spec.earliest_gate_stage);
    p.encode_trap();
    p.encode_aod_order();
    p.encode_gate_exec();
    p.encode_exclusivity();
    p.encode_dependency(&circuit.predecessors());
    p
}

/// Single-circuit problem over stages `0..horizon` with every gate mandatory.
pub fn encode_base(circuit: &Circuit, grid: GridSpec, horizon: usize) -> EncodedProblem {
    let gates: Vec<usize> = (0..circuit.len()).collect();
    encode_window(
        circuit,
        grid,
        &WindowSpec {
            first_stage: 0,
            stages: horizon,
            previous: None,
            gates: &gates,
            optional: false,
            earliest_gate_stage: 0,
        },
    )
}

/// Adds the constraints that keep the encoded circuit clear of everything
/// already committed to `occ`. Replaces both multiprogram families.
pub fn encode_multiprogram(
    mut p: EncodedProblem,
    occ: &ArrayOccupancy,
    rule: Exclusivity,
) -> EncodedProblem {
    p.exclusivity = rule;
    let n = p.num_qubits;
    let mut movement = Vec::new();
    let mut gates = Vec::new();
    for s in p.vars.stage_range() {
        let tracks = occ.tracks(s);
        if tracks.is_empty() {
            continue;
        }
        // Order rules against every committed atom held by the AOD this cycle.
        for q in 0..n {
            let cur = *p.vars.at(q, s);
            let prev = p.before(q, s).unwrap_or(View::Var(p.vars.at(q, s)));
            let held = match p.before(q, s) {
                Some(b) => Formula::or(vec![b.aod(), Formula::var(cur.aod)]),
                None => Formula::var(cur.aod),
            };
            let rules: Vec<Formula> = tracks
                .iter()
                .filter(|t| t.held())
                .flat_map(|t| {
                    [
                        keeps_order(prev.x(), cur.x.into(), t.from.x, t.to.x),
                        keeps_order(prev.y(), cur.y.into(), t.from.y, t.to.y),
                    ]
                })
                .collect();
            if !rules.is_empty() {
                movement.push(held.implies(Formula::and(rules)));
            }
        }

        let committed_sites: Vec<Site> = occ.gate_events(s).map(|e| e.site).collect();
        for &site in &committed_sites {
            match rule {
                Exclusivity::Literal => {
                    for &j in &p.window_gates {
                        let (a, b) = p.operands[j];
                        gates.push(p.gate_at(j, s).implies(Formula::and(vec![
                            !at_site(p.vars.at(a, s), site),
                            !at_site(p.vars.at(b, s), site),
                        ])));
                    }
                }
                Exclusivity::Strengthened => {
                    for q in 0..n {
                        gates.push(!at_site(p.vars.at(q, s), site));
                    }
                }
            }
        }
        if rule == Exclusivity::Strengthened {
            for &j in &p.window_gates {
                let (a, _) = p.operands[j];
                let clear: Vec<Formula> = tracks
                    .iter()
                    .map(|t| !at_site(p.vars.at(a, s), t.to))
                    .collect();
                gates.push(p.gate_at(j, s).implies(Formula::and(clear)));
            }
        }

        // Site sharing with committed atoms: at most two atoms and one SLM trap per site.
        let mut by_site: HashMap<Site, (usize, bool)> = HashMap::new();
        for t in tracks {
            let e = by_site.entry(t.to).or_insert((0, false));
            e.0 += 1;
            e.1 |= t.trap_after == Trap::Slm;
        }
        let mut sites: Vec<(Site, (usize, bool))> = by_site.into_iter().collect();
        sites.sort();
        for (site, (count, slm)) in sites {
            for q in 0..n {
                let here = at_site(p.vars.at(q, s), site);
                if count >= 2 || s == 0 {
                    gates.push(!here);
                    continue;
                }
                let mut then: Vec<Formula> = (0..n)
                    .filter(|&o| o != q)
                    .map(|o| !at_site(p.vars.at(o, s), site))
                    .collect();
                if slm {
                    then.push(Formula::var(p.vars.at(q, s).aod));
                }
                gates.push(here.implies(Formula::and(then)));
            }
        }
        // Loading: an unpinned layout must also avoid committed initial sites.
        if s == 0 && p.previous.is_none() {
            for t in tracks {
                for q in 0..n {
                    gates.push(!at_site(p.vars.at(q, s), t.from));
                }
            }
        }
    }
    p.constraints.insert(Family::MultiprogramMovement, movement);
    p.constraints.insert(Family::MultiprogramGates, gates);
    p
}

/// Qubit states and AOD lines of stage `s` in a model.
pub(crate) fn read_stage(p: &EncodedProblem, m: &Model, s: usize) -> Option<Vec<FixedQubit>> {
    (0..p.num_qubits)
        .map(|q| {
            let v = p.vars.at(q, s);
            let aod = m.boolean(v.aod)?;
            let site = Site::new(m.int(v.x)? as usize, m.int(v.y)? as usize);
            let lines = if aod {
                Some((m.int(v.col)? as usize, m.int(v.row)? as usize))
            } else {
                None
            };
            Some(FixedQubit {
                state: QubitState {
                    site,
                    trap: if aod { Trap::Aod } else { Trap::Slm },
                },
                lines,
            })
        })
        .collect()
}
