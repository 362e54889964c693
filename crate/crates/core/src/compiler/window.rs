//! Stage-by-stage solving with a sliding lookahead window.

use std::time::{Duration, Instant};

use thiserror::Error;

use super::encode::{encode_multiprogram, encode_window, read_stage, EncodedProblem, FixedQubit, WindowSpec};
use super::CompiledSchedule;
use crate::array::{ArrayOccupancy, Exclusivity, GridSpec, QubitState, Trap};
use crate::circuit::Circuit;
use crate::solver::{Backend, CheckResult, Formula, Model, SatBackend};

/// Wall-clock budget shared by every solver call of a task.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Budget {
    deadline: Option<Instant>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget { deadline: None }
    }

    pub fn with_limit(limit: Duration) -> Self {
        Budget {
            deadline: Instant::now().checked_add(limit),
        }
    }

    pub fn deadline(&self) -> Option<Instant> {
        self.deadline
    }

    pub fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileOptions {
    /// Stages encoded per solver call.
    pub window: usize,
    pub exclusivity: Exclusivity,
    /// No gate may execute before this stage; earlier stages stay idle.
    pub start_offset: usize,
    /// Pinned layout before cycle 0. Without it the solver picks one and no
    /// atom moves in cycle 0.
    pub initial_layout: Option<Vec<QubitState>>,
    pub seed: u64,
    /// Consecutive gate-free stages tolerated before giving up.
    pub stall_limit: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            window: 2,
            exclusivity: Exclusivity::Strengthened,
            start_offset: 0,
            initial_layout: None,
            seed: 0,
            stall_limit: 8,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CompileError {
    #[error("`{circuit}` timed out after scheduling {scheduled} of {total} gates in {stages} stages")]
    Timeout {
        circuit: String,
        scheduled: usize,
        total: usize,
        stages: usize,
    },
    #[error("`{circuit}` needs {qubits} qubits but the {grid} grid cannot hold them")]
    GridTooSmall {
        circuit: String,
        qubits: usize,
        grid: GridSpec,
    },
    #[error("`{circuit}` cannot make progress at stage {stage}")]
    Unschedulable { circuit: String, stage: usize },
    #[error("invalid initial layout for `{circuit}`: {reason}")]
    InvalidInitialLayout { circuit: String, reason: String },
    #[error("model does not assign {0}")]
    Extraction(String),
    #[error("committing `{circuit}` failed: {reason}")]
    Commit { circuit: String, reason: String },
}

/// Most atoms a grid can hold: two per site, one SLM trap per site, and one
/// atom per AOD line crossing.
fn atom_capacity(grid: &GridSpec) -> usize {
    let sites = grid.sites();
    (2 * sites).min(sites + grid.aod_rows * grid.aod_cols)
}

fn check_initial(
    circuit: &Circuit,
    grid: &GridSpec,
    occ: &ArrayOccupancy,
    layout: &[QubitState],
) -> Result<(), CompileError> {
    let bad = |reason: String| CompileError::InvalidInitialLayout {
        circuit: circuit.name.clone(),
        reason,
    };
    if layout.len() != circuit.num_qubits {
        return Err(bad(format!("{} entries for {} qubits", layout.len(), circuit.num_qubits)));
    }
    for (q, s) in layout.iter().enumerate() {
        if !grid.contains(s.site) {
            return Err(bad(format!("qubit {q} at {} is off the grid", s.site)));
        }
        if occ.tracks(0).iter().any(|t| t.from == s.site) {
            return Err(bad(format!("qubit {q} at {} overlaps a committed atom", s.site)));
        }
        for (r, o) in layout.iter().enumerate().skip(q + 1) {
            if o.site == s.site && o.trap == Trap::Slm && s.trap == Trap::Slm {
                return Err(bad(format!("qubits {q} and {r} share the SLM trap at {}", s.site)));
            }
        }
    }
    Ok(())
}

/// Unscheduled gates that could still fit in a `window`-stage lookahead:
/// those with fewer than `window` unscheduled ancestors on their deepest chain.
fn window_candidates(preds: &[Vec<usize>], stage_of: &[Option<usize>], window: usize) -> Vec<usize> {
    let mut depth = vec![0usize; preds.len()];
    let mut out = Vec::new();
    for g in 0..preds.len() {
        if stage_of[g].is_some() {
            continue;
        }
        depth[g] = preds[g]
            .iter()
            .filter(|&&p| stage_of[p].is_none())
            .map(|&p| depth[p] + 1)
            .max()
            .unwrap_or(0);
        if depth[g] < window {
            out.push(g);
        }
    }
    out
}

enum WindowResult {
    Solved(Model),
    Infeasible,
    Timeout,
}

/// Most gates in the window, then most gates in its first stage, then fewest
/// AOD-held qubits and fewest long moves across the window.
fn optimize_window(p: &EncodedProblem, budget: &Budget, seed: u64) -> WindowResult {
    let deadline = budget.deadline();
    let mut b = SatBackend::new(seed);
    if !p.load(&mut b, deadline) {
        return WindowResult::Timeout;
    }
    let mut best = match b.check(deadline) {
        CheckResult::Sat => b.model().expect("sat has a model"),
        CheckResult::Unsat => return WindowResult::Infeasible,
        CheckResult::Unknown => return WindowResult::Timeout,
    };
    let stages = p.vars.stage_range();
    let objectives = [
        p.active_gates(),
        p.gates_at(p.vars.first_stage),
        stages.clone().flat_map(|s| p.quiet_at(s)).collect(),
        stages.flat_map(|s| p.short_moves_at(s)).collect(),
    ];
    for (i, goal) in objectives.iter().enumerate() {
        let count = |m: &Model| goal.iter().filter(|f| m.eval(f)).count();
        let mut k = count(&best);
        while k < goal.len() {
            b.push();
            b.assert(&Formula::at_least(k + 1, goal.clone()));
            let r = b.check(deadline);
            if r == CheckResult::Sat {
                best = b.model().expect("sat has a model");
                k = count(&best);
            }
            b.pop();
            match r {
                CheckResult::Sat => {}
                CheckResult::Unsat => break,
                CheckResult::Unknown => return WindowResult::Timeout,
            }
        }
        if i + 1 < objectives.len() {
            b.assert(&Formula::at_least(k, goal.clone()));
        }
    }
    WindowResult::Solved(best)
}

/// Compiles `circuit` onto an array that already holds `occ`, one stage at a
/// time: each step solves a `window`-stage problem that schedules as many
/// remaining gates as possible and keeps only its first stage.
pub fn solve_window(
    circuit: &Circuit,
    grid: GridSpec,
    occ: &ArrayOccupancy,
    budget: &Budget,
    opts: &CompileOptions,
) -> Result<CompiledSchedule, CompileError> {
    let total = circuit.len();
    let name = circuit.name.clone();
    if total == 0 {
        return Ok(CompiledSchedule::empty(&name, circuit.num_qubits, opts.exclusivity));
    }
    if grid.x_sites == 0
        || grid.y_sites == 0
        || grid.aod_rows == 0
        || grid.aod_cols == 0
        || circuit.num_qubits > atom_capacity(&grid)
    {
        return Err(CompileError::GridTooSmall {
            circuit: name,
            qubits: circuit.num_qubits,
            grid,
        });
    }
    if let Some(layout) = &opts.initial_layout {
        check_initial(circuit, &grid, occ, layout)?;
    }
    let window = opts.window.max(1);
    let preds = circuit.predecessors();
    let mut stage_of: Vec<Option<usize>> = vec![None; total];
    let mut scheduled = 0;
    let pinned: Option<Vec<FixedQubit>> = opts
        .initial_layout
        .as_ref()
        .map(|l| l.iter().copied().map(FixedQubit::from).collect());
    let mut frames: Vec<Vec<FixedQubit>> = Vec::new();
    let mut idle = 0;
    // Extra lookahead after a dead end, and how many times we backed up.
    let mut widen = 0;
    let mut backtracks = 0;
    let max_backtracks = 4 * total + 16;
    let timeout = |scheduled: usize, stages: usize| CompileError::Timeout {
        circuit: circuit.name.clone(),
        scheduled,
        total,
        stages,
    };
    while scheduled < total {
        let s = frames.len();
        if budget.expired() {
            return Err(timeout(scheduled, s));
        }
        let width = window + widen;
        let gates = window_candidates(&preds, &stage_of, width);
        let spec = WindowSpec {
            first_stage: s,
            stages: width,
            previous: frames.last().map(Vec::as_slice).or(pinned.as_deref()),
            gates: &gates,
            optional: true,
            earliest_gate_stage: opts.start_offset,
        };
        let p = encode_multiprogram(encode_window(circuit, grid, &spec), occ, opts.exclusivity);
        let model = match optimize_window(&p, budget, opts.seed) {
            WindowResult::Solved(m) => m,
            WindowResult::Timeout => return Err(timeout(scheduled, s)),
            WindowResult::Infeasible if s == 0 && occ.is_empty() && pinned.is_none() => {
                return Err(CompileError::GridTooSmall {
                    circuit: name,
                    qubits: circuit.num_qubits,
                    grid,
                })
            }
            WindowResult::Infeasible if s == 0 || backtracks >= max_backtracks => {
                return Err(CompileError::Unschedulable { circuit: name, stage: s })
            }
            WindowResult::Infeasible => {
                // Committed motion can corner the last stage; drop it and look
                // one stage further ahead from there.
                frames.pop();
                let mut undone = 0;
                for t in stage_of.iter_mut().filter(|t| **t == Some(s - 1)) {
                    *t = None;
                    undone += 1;
                }
                scheduled -= undone;
                if undone == 0 && idle > 0 {
                    idle -= 1;
                }
                widen += 1;
                backtracks += 1;
                continue;
            }
        };
        widen = widen.saturating_sub(1);
        let frame = read_stage(&p, &model, s).ok_or_else(|| CompileError::Extraction(format!("stage {s}")))?;
        let mut placed = 0;
        for &g in &gates {
            let active = p.vars.gate_active[g].and_then(|u| model.boolean(u));
            let t = p.vars.gate_stage[g].and_then(|t| model.int(t));
            if active == Some(true) && t == Some(s as i64) {
                stage_of[g] = Some(s);
                placed += 1;
            }
        }
        scheduled += placed;
        if placed == 0 && s >= opts.start_offset {
            idle += 1;
            if idle > opts.stall_limit {
                return Err(CompileError::Unschedulable { circuit: name, stage: s });
            }
        } else {
            idle = 0;
        }
        frames.push(frame);
    }
    let stages: Vec<Vec<QubitState>> = frames
        .iter()
        .map(|f| f.iter().map(|q| q.state).collect())
        .collect();
    let initial = opts.initial_layout.clone().unwrap_or_else(|| stages[0].clone());
    Ok(CompiledSchedule {
        name,
        num_qubits: circuit.num_qubits,
        gates: circuit.operands(),
        initial,
        stages,
        gate_stage: stage_of.into_iter().map(|t| t.expect("all gates scheduled")).collect(),
        exclusivity: opts.exclusivity,
    })
}

/// Reads a full-horizon model back into a schedule, trimmed to `1 + max t`.
pub fn extract_schedule(model: &Model, p: &EncodedProblem) -> Result<CompiledSchedule, CompileError> {
    let missing = |what: String| CompileError::Extraction(what);
    let mut gate_stage = Vec::with_capacity(p.operands.len());
    for (g, t) in p.vars.gate_stage.iter().enumerate() {
        let t = t.ok_or_else(|| missing(format!("a stage variable for gate {g}")))?;
        let v = model.int(t).ok_or_else(|| missing(format!("t[{g}]")))?;
        gate_stage.push(v as usize);
    }
    let len = gate_stage.iter().max().map_or(0, |&t| t + 1);
    let mut stages = Vec::with_capacity(len);
    for s in p.vars.stage_range().take(len) {
        let frame = read_stage(p, model, s).ok_or_else(|| missing(format!("stage {s}")))?;
        stages.push(frame.iter().map(|f| f.state).collect::<Vec<_>>());
    }
    let initial = match (&p.previous, stages.first()) {
        (_, None) => Vec::new(),
        (Some(prev), Some(_)) => prev.iter().map(|f| f.state).collect(),
        (None, Some(first)) => first.clone(),
    };
    Ok(CompiledSchedule {
        name: p.name.clone(),
        num_qubits: p.num_qubits,
        gates: p.operands.clone(),
        initial,
        stages,
        gate_stage,
        exclusivity: p.exclusivity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidates_are_limited_by_window_depth() {
        let c = Circuit::from_pairs("c", 3, &[(0, 1), (1, 2), (0, 1), (0, 2)]).unwrap();
        let preds = c.predecessors();
        let none = vec![None; 4];
        assert_eq!(window_candidates(&preds, &none, 1), vec![0]);
        assert_eq!(window_candidates(&preds, &none, 2), vec![0, 1]);
        let first_done = vec![Some(0), None, None, None];
        assert_eq!(window_candidates(&preds, &first_done, 1), vec![1]);
        assert_eq!(window_candidates(&preds, &first_done, 2), vec![1, 2]);
    }

    #[test]
    fn chain_on_empty_array() {
        let c = Circuit::from_pairs("chain", 3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let grid = GridSpec::new(3, 3);
        let occ = ArrayOccupancy::new(grid);
        let s = solve_window(&c, grid, &occ, &Budget::unlimited(), &CompileOptions::default()).unwrap();
        assert_eq!(s.stage_count(), 3);
        assert_eq!(s.stages.len(), 3);
        assert_eq!(s.gate_stage, vec![0, 1, 2]);
    }

    #[test]
    fn start_offset_pads_idle_stages() {
        let c = Circuit::from_pairs("pad", 2, &[(0, 1)]).unwrap();
        let grid = GridSpec::new(2, 2);
        let occ = ArrayOccupancy::new(grid);
        let opts = CompileOptions {
            start_offset: 3,
            ..CompileOptions::default()
        };
        let s = solve_window(&c, grid, &occ, &Budget::unlimited(), &opts).unwrap();
        assert_eq!(s.gate_stage, vec![3]);
        assert_eq!(s.stage_count(), 4);
    }

    #[test]
    fn too_many_qubits_for_grid() {
        let c = Circuit::from_pairs("big", 5, &[(0, 1)]).unwrap();
        let grid = GridSpec::new(2, 1);
        let occ = ArrayOccupancy::new(grid);
        let r = solve_window(&c, grid, &occ, &Budget::unlimited(), &CompileOptions::default());
        assert!(matches!(r, Err(CompileError::GridTooSmall { qubits: 5, .. })));
    }

    #[test]
    fn expired_budget_times_out() {
        let c = Circuit::from_pairs("t", 2, &[(0, 1), (0, 1)]).unwrap();
        let grid = GridSpec::new(2, 2);
        let occ = ArrayOccupancy::new(grid);
        let budget = Budget::with_limit(Duration::ZERO);
        let r = solve_window(&c, grid, &occ, &budget, &CompileOptions::default());
        assert_eq!(
            r,
            Err(CompileError::Timeout {
                circuit: "t".into(),
                scheduled: 0,
                total: 2,
                stages: 0
            })
        );
    }
}
