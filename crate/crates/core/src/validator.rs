//! Brute-force checks of compiled schedules, one circuit at a time or every
//! circuit committed to an array together.
//!
//! Nothing here reuses the constraint encoder: each rule is re-stated over
//! concrete layouts, and every violation found is reported.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::array::{ArrayOccupancy, Exclusivity, ExecutionSequence, GridSpec, QubitState, Site, Trap};
use crate::compiler::CompiledSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ViolationKind {
    GateNotColocated,
    ExclusivityBreach,
    #[serde(rename = "AODCrossing")]
    AodCrossing,
    #[serde(rename = "SLMDrift")]
    SlmDrift,
    DependencyOrder,
    CrossCircuitMovement,
    CrossCircuitGateSite,
    OutOfBounds,
}

impl ViolationKind {
    pub const ALL: [ViolationKind; 8] = [
        ViolationKind::GateNotColocated,
        ViolationKind::ExclusivityBreach,
        ViolationKind::AodCrossing,
        ViolationKind::SlmDrift,
        ViolationKind::DependencyOrder,
        ViolationKind::CrossCircuitMovement,
        ViolationKind::CrossCircuitGateSite,
        ViolationKind::OutOfBounds,
    ];
}

/// A qubit or gate of one circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Entity {
    pub circuit: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<usize>,
}

impl Entity {
    pub fn qubit(circuit: usize, q: usize) -> Self {
        Entity {
            circuit,
            qubit: Some(q),
            gate: None,
        }
    }

    pub fn gate(circuit: usize, g: usize) -> Self {
        Entity {
            circuit,
            qubit: None,
            gate: Some(g),
        }
    }
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.qubit, self.gate) {
            (Some(q), _) => write!(f, "c{}.q{}", self.circuit, q),
            (None, Some(g)) => write!(f, "c{}.g{}", self.circuit, g),
            (None, None) => write!(f, "c{}", self.circuit),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Stage (equivalently cycle) index; `None` for the initial layout.
    pub stage: Option<usize>,
    pub entities: Vec<Entity>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    pub fn kinds(&self) -> BTreeSet<ViolationKind> {
        self.violations.iter().map(|v| v.kind).collect()
    }

    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        self.violations
            .iter()
            .map(|v| serde_json::to_string(v).expect("violations serialize") + "\n")
            .collect()
    }

    fn push(&mut self, kind: ViolationKind, stage: Option<usize>, entities: Vec<Entity>, detail: String) {
        self.violations.push(Violation {
            kind,
            stage,
            entities,
            detail,
        });
    }
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            let who: Vec<String> = v.entities.iter().map(Entity::to_string).collect();
            let at = v.stage.map_or("initial".to_string(), |s| format!("stage {s}"));
            writeln!(f, "{:?} at {at} [{}]: {}", v.kind, who.join(", "), v.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct GateAt {
    gate: usize,
    operands: (usize, usize),
    stage: usize,
    site: Site,
}

/// One circuit reduced to concrete layouts: `layouts[0]` is the initial
/// layout and `layouts[s + 1]` is stage `s`.
#[derive(Debug, Clone)]
struct Program {
    circuit: usize,
    num_qubits: usize,
    exclusivity: Exclusivity,
    layouts: Vec<Vec<QubitState>>,
    gates: Vec<GateAt>,
}

impl Program {
    fn stages(&self) -> usize {
        self.layouts.len() - 1
    }

    fn stage(&self, s: usize) -> &[QubitState] {
        &self.layouts[s + 1]
    }

    fn gates_at(&self, s: usize) -> impl Iterator<Item = &GateAt> {
        self.gates.iter().filter(move |g| g.stage == s)
    }

    fn from_schedule(sched: &CompiledSchedule, circuit: usize, report: &mut ViolationReport) -> Self {
        let mut layouts = Vec::with_capacity(sched.stages.len() + 1);
        layouts.push(sched.initial.clone());
        layouts.extend(sched.stages.iter().cloned());
        let mut gates = Vec::new();
        for (g, &operands) in sched.gates.iter().enumerate() {
            let Some(&stage) = sched.gate_stage.get(g) else {
                report.push(
                    ViolationKind::DependencyOrder,
                    None,
                    vec![Entity::gate(circuit, g)],
                    "gate is never executed".into(),
                );
                continue;
            };
            let Some(layout) = layouts.get(stage + 1) else {
                report.push(
                    ViolationKind::OutOfBounds,
                    Some(stage),
                    vec![Entity::gate(circuit, g)],
                    format!("gate stage {stage} is past the last stage {}", sched.stages.len()),
                );
                continue;
            };
            let Some(a) = layout.get(operands.0) else {
                continue;
            };
            gates.push(GateAt {
                gate: g,
                operands,
                stage,
                site: a.site,
            });
        }
        Program {
            circuit,
            num_qubits: sched.num_qubits,
            exclusivity: sched.exclusivity,
            layouts,
            gates,
        }
    }

    /// Replays `seq` without trusting recorded movement origins; any mismatch
    /// is reported as drift.
    fn from_sequence(seq: &ExecutionSequence, report: &mut ViolationReport) -> Self {
        let c = seq.circuit;
        let mut cur = seq.initial.clone();
        let mut layouts = vec![if seq.cycles.is_empty() { Vec::new() } else { cur.clone() }];
        let mut gates = Vec::new();
        for (k, cycle) in seq.cycles.iter().enumerate() {
            for m in &cycle.movements {
                match cur.get_mut(m.qubit) {
                    Some(q) => {
                        if q.site != m.from {
                            report.push(
                                ViolationKind::SlmDrift,
                                Some(k),
                                vec![Entity::qubit(c, m.qubit)],
                                format!("movement starts at {} but the qubit sits at {}", m.from, q.site),
                            );
                        }
                        q.site = m.to;
                    }
                    None => report.push(
                        ViolationKind::OutOfBounds,
                        Some(k),
                        vec![Entity::qubit(c, m.qubit)],
                        format!("movement of a qubit outside 0..{}", cur.len()),
                    ),
                }
            }
            for t in &cycle.transfers {
                match cur.get_mut(t.qubit) {
                    Some(q) => q.trap = t.to,
                    None => report.push(
                        ViolationKind::OutOfBounds,
                        Some(k),
                        vec![Entity::qubit(c, t.qubit)],
                        format!("transfer of a qubit outside 0..{}", cur.len()),
                    ),
                }
            }
            layouts.push(cur.clone());
            for e in &cycle.gate_events {
                gates.push(GateAt {
                    gate: e.gate,
                    operands: e.operands,
                    stage: k,
                    site: e.site,
                });
            }
        }
        Program {
            circuit: c,
            num_qubits: seq.num_qubits,
            exclusivity: seq.exclusivity,
            layouts,
            gates,
        }
    }
}

fn held(a: &QubitState, b: &QubitState) -> bool {
    a.trap == Trap::Aod || b.trap == Trap::Aod
}

/// Signs of `a - b` before and after differ in strict order.
fn swapped(a0: usize, b0: usize, a1: usize, b1: usize) -> bool {
    (a0 < b0 && a1 > b1) || (a0 > b0 && a1 < b1)
}

fn check_program(p: &Program, grid: GridSpec, report: &mut ViolationReport) {
    let c = p.circuit;
    let stage_of = |i: usize| i.checked_sub(1);

    for (i, layout) in p.layouts.iter().enumerate() {
        if layout.len() != p.num_qubits && !(i == 0 && p.stages() == 0) {
            report.push(
                ViolationKind::OutOfBounds,
                stage_of(i),
                vec![Entity { circuit: c, qubit: None, gate: None }],
                format!("layout lists {} qubits, expected {}", layout.len(), p.num_qubits),
            );
        }
        for (q, st) in layout.iter().enumerate() {
            if !grid.contains(st.site) {
                report.push(
                    ViolationKind::OutOfBounds,
                    stage_of(i),
                    vec![Entity::qubit(c, q)],
                    format!("site {} is outside the {grid} grid", st.site),
                );
            }
        }
    }

    for g in &p.gates {
        let layout = p.stage(g.stage);
        let (a, b) = g.operands;
        let (Some(sa), Some(sb)) = (layout.get(a), layout.get(b)) else {
            report.push(
                ViolationKind::OutOfBounds,
                Some(g.stage),
                vec![Entity::gate(c, g.gate)],
                format!("operands ({a}, {b}) outside 0..{}", layout.len()),
            );
            continue;
        };
        if sa.site != sb.site || sa.site != g.site {
            report.push(
                ViolationKind::GateNotColocated,
                Some(g.stage),
                vec![Entity::gate(c, g.gate), Entity::qubit(c, a), Entity::qubit(c, b)],
                format!("operands at {} and {}, gate recorded at {}", sa.site, sb.site, g.site),
            );
        }
    }

    for s in 0..p.stages() {
        let layout = p.stage(s);
        let mut by_site: BTreeMap<Site, Vec<usize>> = BTreeMap::new();
        for (q, st) in layout.iter().enumerate() {
            by_site.entry(st.site).or_default().push(q);
        }
        for (site, qs) in &by_site {
            if qs.len() > 2 {
                report.push(
                    ViolationKind::ExclusivityBreach,
                    Some(s),
                    qs.iter().map(|&q| Entity::qubit(c, q)).collect(),
                    format!("{} qubits share site {site}", qs.len()),
                );
            }
            let slm: Vec<usize> = qs.iter().copied().filter(|&q| layout[q].trap == Trap::Slm).collect();
            if slm.len() > 1 {
                report.push(
                    ViolationKind::ExclusivityBreach,
                    Some(s),
                    slm.iter().map(|&q| Entity::qubit(c, q)).collect(),
                    format!("{} SLM traps at site {site}", slm.len()),
                );
            }
        }
        for g in p.gates_at(s) {
            let (a, b) = g.operands;
            for &q in by_site.get(&g.site).into_iter().flatten() {
                if q != a && q != b {
                    report.push(
                        ViolationKind::ExclusivityBreach,
                        Some(s),
                        vec![Entity::gate(c, g.gate), Entity::qubit(c, q)],
                        format!("bystander at gate site {}", g.site),
                    );
                }
            }
        }

        let prev = &p.layouts[s];
        if prev.len() != layout.len() {
            continue;
        }
        for (q, (a, b)) in prev.iter().zip(layout).enumerate() {
            if a.site != b.site && !(a.trap == Trap::Aod && b.trap == Trap::Aod) {
                report.push(
                    ViolationKind::SlmDrift,
                    Some(s),
                    vec![Entity::qubit(c, q)],
                    format!("moves {} -> {} outside an AOD trap", a.site, b.site),
                );
            }
        }
        for i in 0..layout.len() {
            if !held(&prev[i], &layout[i]) {
                continue;
            }
            for j in i + 1..layout.len() {
                if !held(&prev[j], &layout[j]) {
                    continue;
                }
                let (pi, pj, ci, cj) = (prev[i].site, prev[j].site, layout[i].site, layout[j].site);
                for (axis, crossed) in [("column", swapped(pi.x, pj.x, ci.x, cj.x)), ("row", swapped(pi.y, pj.y, ci.y, cj.y))] {
                    if crossed {
                        report.push(
                            ViolationKind::AodCrossing,
                            Some(s),
                            vec![Entity::qubit(c, i), Entity::qubit(c, j)],
                            format!("AOD {axis} of q{i} crosses that of q{j}"),
                        );
                    }
                }
            }
        }
    }

    check_dependencies(p, report);
}

/// Consecutive gates on each qubit must run at strictly increasing stages,
/// and each gate runs once.
fn check_dependencies(p: &Program, report: &mut ViolationReport) {
    let c = p.circuit;
    let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
    for g in &p.gates {
        if let Some(first) = seen.insert(g.gate, g.stage) {
            report.push(
                ViolationKind::DependencyOrder,
                Some(g.stage),
                vec![Entity::gate(c, g.gate)],
                format!("gate also executes at stage {first}"),
            );
        }
    }
    let mut per_qubit: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (&gate, &stage) in &seen {
        let Some(g) = p.gates.iter().find(|x| x.gate == gate) else {
            continue;
        };
        for q in [g.operands.0, g.operands.1] {
            per_qubit.entry(q).or_default().push((gate, stage));
        }
    }
    let mut pairs = BTreeSet::new();
    for seq in per_qubit.values() {
        for w in seq.windows(2) {
            let ((g0, t0), (g1, t1)) = (w[0], w[1]);
            if t0 >= t1 && pairs.insert((g0, g1)) {
                report.push(
                    ViolationKind::DependencyOrder,
                    Some(t1),
                    vec![Entity::gate(c, g0), Entity::gate(c, g1)],
                    format!("gate {g1} at stage {t1} does not follow gate {g0} at stage {t0}"),
                );
            }
        }
    }
}

/// Checks every single-circuit rule on `sched`.
pub fn validate_single(sched: &CompiledSchedule, grid: GridSpec) -> ViolationReport {
    let mut report = ViolationReport::default();
    let p = Program::from_schedule(sched, 0, &mut report);
    check_program(&p, grid, &mut report);
    report
}

/// Strict order rule between held atoms of different circuits.
fn order_broken(p: usize, c: usize, e0: usize, e1: usize) -> bool {
    (p < e0 && c >= e1) || (p > e0 && c <= e1) || (p == e0 && c != e1)
}

fn check_pair(a: &Program, b: &Program, later: Exclusivity, report: &mut ViolationReport) {
    let stages = a.stages().min(b.stages());
    for s in 0..stages {
        let (pa, ca, pb, cb) = (&a.layouts[s], a.stage(s), &b.layouts[s], b.stage(s));
        if pa.len() != ca.len() || pb.len() != cb.len() {
            continue;
        }
        for (i, (ai0, ai1)) in pa.iter().zip(ca).enumerate() {
            if !held(ai0, ai1) {
                continue;
            }
            for (j, (bj0, bj1)) in pb.iter().zip(cb).enumerate() {
                if !held(bj0, bj1) {
                    continue;
                }
                let x = order_broken(ai0.site.x, ai1.site.x, bj0.site.x, bj1.site.x);
                let y = order_broken(ai0.site.y, ai1.site.y, bj0.site.y, bj1.site.y);
                if x || y {
                    let axes = match (x, y) {
                        (true, true) => "columns and rows",
                        (true, false) => "columns",
                        _ => "rows",
                    };
                    report.push(
                        ViolationKind::CrossCircuitMovement,
                        Some(s),
                        vec![Entity::qubit(a.circuit, i), Entity::qubit(b.circuit, j)],
                        format!(
                            "AOD {axes} reorder: {} -> {} against {} -> {}",
                            ai0.site, ai1.site, bj0.site, bj1.site
                        ),
                    );
                }
            }
        }

        for ga in a.gates_at(s) {
            for gb in b.gates_at(s) {
                if ga.site == gb.site {
                    report.push(
                        ViolationKind::CrossCircuitGateSite,
                        Some(s),
                        vec![Entity::gate(a.circuit, ga.gate), Entity::gate(b.circuit, gb.gate)],
                        format!("both gates execute at {}", ga.site),
                    );
                }
            }
        }
        if later == Exclusivity::Strengthened {
            for (x, y) in [(a, b), (b, a)] {
                for g in x.gates_at(s) {
                    for (q, st) in y.stage(s).iter().enumerate() {
                        if st.site == g.site {
                            report.push(
                                ViolationKind::CrossCircuitGateSite,
                                Some(s),
                                vec![Entity::gate(x.circuit, g.gate), Entity::qubit(y.circuit, q)],
                                format!("foreign atom at gate site {}", g.site),
                            );
                        }
                    }
                }
            }
        }
    }
}

/// Site capacity over all circuits present at each layout.
fn check_shared_sites(programs: &[Program], report: &mut ViolationReport) {
    let depth = programs.iter().map(|p| p.layouts.len()).max().unwrap_or(0);
    for i in 0..depth {
        let mut by_site: BTreeMap<Site, Vec<(usize, usize, Trap)>> = BTreeMap::new();
        for p in programs {
            if let Some(layout) = p.layouts.get(i) {
                for (q, st) in layout.iter().enumerate() {
                    by_site.entry(st.site).or_default().push((p.circuit, q, st.trap));
                }
            }
        }
        for (site, atoms) in by_site {
            let circuits: BTreeSet<usize> = atoms.iter().map(|a| a.0).collect();
            if circuits.len() < 2 {
                continue;
            }
            let slm = atoms.iter().filter(|a| a.2 == Trap::Slm).count();
            if atoms.len() > 2 || slm > 1 {
                report.push(
                    ViolationKind::ExclusivityBreach,
                    i.checked_sub(1),
                    atoms.iter().map(|a| Entity::qubit(a.0, a.1)).collect(),
                    format!("{} atoms ({slm} in SLM traps) from {} circuits share site {site}", atoms.len(), circuits.len()),
                );
            }
        }
    }
}

/// Checks every committed circuit on its own and every pair of circuits
/// against each other. Gate-site exclusivity between a pair follows the
/// rule recorded on the later-committed circuit.
pub fn validate_joint(occ: &ArrayOccupancy) -> ViolationReport {
    let mut report = ViolationReport::default();
    let programs: Vec<Program> = occ
        .committed
        .iter()
        .map(|seq| Program::from_sequence(seq, &mut report))
        .collect();
    for p in &programs {
        check_program(p, occ.grid, &mut report);
    }
    for (i, a) in programs.iter().enumerate() {
        for b in &programs[i + 1..] {
            check_pair(a, b, b.exclusivity, &mut report);
        }
    }
    check_shared_sites(&programs, &mut report);
    report
}

/// `1 + max gate stage`, or 0 without gates.
pub fn stage_count(sched: &CompiledSchedule) -> usize {
    sched.gate_stage.iter().map(|&t| t + 1).max().unwrap_or(0)
}

/// Largest stage count among the committed circuits.
pub fn joint_stage_count(occ: &ArrayOccupancy) -> usize {
    occ.committed
        .iter()
        .flat_map(|s| s.cycles.iter().enumerate())
        .filter(|(_, c)| !c.gate_events.is_empty())
        .map(|(k, _)| k + 1)
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::decompose_to_cycles;

    fn st(x: usize, y: usize, trap: Trap) -> QubitState {
        QubitState::new(x, y, trap)
    }

    fn one_gate() -> CompiledSchedule {
        let layout = vec![st(1, 1, Trap::Slm), st(1, 1, Trap::Aod)];
        CompiledSchedule {
            name: "g".into(),
            num_qubits: 2,
            gates: vec![(0, 1)],
            initial: layout.clone(),
            stages: vec![layout],
            gate_stage: vec![0],
            exclusivity: Exclusivity::Strengthened,
        }
    }

    #[test]
    fn colocated_gate_is_clean() {
        let r = validate_single(&one_gate(), GridSpec::new(3, 3));
        assert!(r.is_empty(), "{r}");
        assert_eq!(stage_count(&one_gate()), 1);
    }

    #[test]
    fn empty_schedule_has_no_stages() {
        let s = CompiledSchedule::empty("e", 0, Exclusivity::Literal);
        assert!(validate_single(&s, GridSpec::new(1, 1)).is_empty());
        assert_eq!(stage_count(&s), 0);
    }

    #[test]
    fn swapped_columns_cross_once() {
        let before = vec![st(0, 0, Trap::Aod), st(2, 0, Trap::Aod)];
        let after = vec![st(2, 0, Trap::Aod), st(0, 0, Trap::Aod)];
        let s = CompiledSchedule {
            name: "x".into(),
            num_qubits: 2,
            gates: vec![],
            initial: before,
            stages: vec![after],
            gate_stage: vec![],
            exclusivity: Exclusivity::Strengthened,
        };
        let r = validate_single(&s, GridSpec::new(3, 3));
        assert_eq!(r.len(), 1, "{r}");
        assert_eq!(r.violations[0].kind, ViolationKind::AodCrossing);
        assert_eq!(r.violations[0].stage, Some(0));
    }

    #[test]
    fn slm_qubit_may_not_move() {
        let mut s = one_gate();
        s.stages[0][0].site = Site::new(2, 2);
        s.stages[0][1].site = Site::new(2, 2);
        let r = validate_single(&s, GridSpec::new(3, 3));
        assert_eq!(r.kinds(), BTreeSet::from([ViolationKind::SlmDrift]));
    }

    #[test]
    fn json_lines_round_trip() {
        let mut s = one_gate();
        s.stages[0][1].site = Site::new(0, 0);
        s.stages[0][1].trap = Trap::Aod;
        let r = validate_single(&s, GridSpec::new(3, 3));
        let text = r.to_json_lines();
        assert_eq!(text.lines().count(), r.len());
        let back: Vec<Violation> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(back, r.violations);
        assert!(text.contains("\"GateNotColocated\""));
    }

    #[test]
    fn joint_matches_single_for_one_circuit() {
        let s = one_gate();
        let mut occ = ArrayOccupancy::new(GridSpec::new(3, 3));
        occ.commit(decompose_to_cycles(&s, 0).unwrap()).unwrap();
        assert_eq!(validate_joint(&occ), validate_single(&s, occ.grid));
        assert_eq!(joint_stage_count(&occ), 1);
    }

    #[test]
    fn gates_sharing_a_site_and_stage_collide() {
        let grid = GridSpec::new(3, 3);
        let mut occ = ArrayOccupancy::new(grid);
        let mut a = one_gate();
        let b_layout = vec![st(1, 1, Trap::Aod), st(1, 1, Trap::Aod)];
        a.initial = vec![st(0, 0, Trap::Slm), st(0, 0, Trap::Aod)];
        a.stages = vec![vec![st(0, 0, Trap::Slm), st(0, 0, Trap::Aod)]];
        let mut b = one_gate();
        b.initial = vec![st(2, 2, Trap::Aod), st(2, 1, Trap::Aod)];
        b.stages = vec![b_layout];
        occ.commit(decompose_to_cycles(&a, 0).unwrap()).unwrap();
        occ.commit(decompose_to_cycles(&b, 0).unwrap()).unwrap();
        assert!(validate_joint(&occ).is_empty());

        // Drag circuit b's gate onto circuit a's site (AOD atoms only).
        let mut bad = occ.clone();
        for m in &mut bad.committed[1].cycles[0].movements {
            m.to = Site::new(0, 0);
        }
        bad.committed[1].cycles[0].gate_events[0].site = Site::new(0, 0);
        let r = validate_joint(&bad);
        assert!(r.count(ViolationKind::CrossCircuitGateSite) >= 1, "{r}");
    }

    #[test]
    fn joint_count_is_max_not_sum() {
        let grid = GridSpec::new(4, 4);
        let mut occ = ArrayOccupancy::new(grid);
        let mut a = one_gate();
        a.initial = vec![st(0, 0, Trap::Slm), st(0, 0, Trap::Aod)];
        a.stages = vec![a.initial.clone(); 3];
        a.gate_stage = vec![2];
        let mut b = one_gate();
        b.initial = vec![st(3, 3, Trap::Slm), st(3, 3, Trap::Aod)];
        b.stages = vec![b.initial.clone(); 2];
        b.gate_stage = vec![1];
        occ.commit(decompose_to_cycles(&a, 0).unwrap()).unwrap();
        occ.commit(decompose_to_cycles(&b, 0).unwrap()).unwrap();
        assert_eq!(joint_stage_count(&occ), 3);
        assert!(validate_joint(&occ).is_empty());
    }
}
