//! Single-program baselines and the comparison metrics.
//!
//! The sequential baseline compiles each circuit alone and runs them back to
//! back; the merged baseline relabels every circuit onto disjoint qubits and
//! compiles the union as one program.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::array::{ArrayOccupancy, GridSpec};
use crate::circuit::Circuit;
use crate::compiler::{solve_window, ArrayCompilation, Budget, CompileError, CompileOptions, CompiledSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum MetricError {
    #[error("baseline stage count is zero")]
    ZeroBaselineStages,
    #[error("solve time {0} s is not positive")]
    NonPositiveTime(f64),
}

/// Percentage change of the stage count relative to the baseline.
pub fn rpr(l_dynamo: usize, l_baseline: usize) -> Result<f64, MetricError> {
    if l_baseline == 0 {
        return Err(MetricError::ZeroBaselineStages);
    }
    Ok(100.0 * (l_dynamo as f64 - l_baseline as f64) / l_baseline as f64)
}

/// How many times faster the multi-program compile was: `t_baseline / t_dynamo`.
pub fn speedup(t_dynamo: f64, t_baseline: f64) -> Result<f64, MetricError> {
    if t_dynamo <= 0.0 || t_dynamo.is_nan() {
        return Err(MetricError::NonPositiveTime(t_dynamo));
    }
    Ok(t_baseline / t_dynamo)
}

/// `t_dynamo / t_baseline`, the inverse reading of [`speedup`].
pub fn speedup_reciprocal(t_dynamo: f64, t_baseline: f64) -> Result<f64, MetricError> {
    if t_baseline <= 0.0 || t_baseline.is_nan() {
        return Err(MetricError::NonPositiveTime(t_baseline));
    }
    Ok(t_dynamo / t_baseline)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Sequential,
    Merged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub workload: String,
    pub l_dynamo: usize,
    pub l_baseline: usize,
    pub t_dynamo: f64,
    pub t_baseline: f64,
    /// `None` when undefined for the stored values.
    pub rpr: Option<f64>,
    pub speedup: Option<f64>,
    pub baseline_kind: BaselineKind,
}

impl MetricRow {
    pub fn new(
        workload: impl Into<String>,
        kind: BaselineKind,
        (l_dynamo, t_dynamo): (usize, f64),
        (l_baseline, t_baseline): (usize, f64),
    ) -> Self {
        MetricRow {
            workload: workload.into(),
            l_dynamo,
            l_baseline,
            t_dynamo,
            t_baseline,
            rpr: rpr(l_dynamo, l_baseline).ok(),
            speedup: speedup(t_dynamo, t_baseline).ok(),
            baseline_kind: kind,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SequentialRun {
    pub schedules: Vec<CompiledSchedule>,
    pub solve_times: Vec<Duration>,
}

impl SequentialRun {
    pub fn stage_counts(&self) -> Vec<usize> {
        self.schedules.iter().map(CompiledSchedule::stage_count).collect()
    }

    /// Stages needed to run every circuit one after another.
    pub fn total_stages(&self) -> usize {
        self.stage_counts().iter().sum()
    }

    pub fn total_time(&self) -> Duration {
        self.solve_times.iter().sum()
    }
}

#[derive(Debug, Error)]
#[error("sequential baseline stopped at `{failed}`: {source}")]
pub struct SequentialError {
    /// Totals over the circuits compiled before the failure.
    pub partial: SequentialRun,
    pub failed: String,
    pub source: CompileError,
}

/// Compiles each circuit alone on an empty array.
pub fn compile_sequential(
    circuits: &[&Circuit],
    grid: GridSpec,
    budget: &Budget,
    opts: &CompileOptions,
) -> Result<SequentialRun, Box<SequentialError>> {
    let empty = ArrayOccupancy::new(grid);
    let mut run = SequentialRun {
        schedules: Vec::new(),
        solve_times: Vec::new(),
    };
    let opts = CompileOptions {
        start_offset: 0,
        ..opts.clone()
    };
    for c in circuits {
        let started = Instant::now();
        match solve_window(c, grid, &empty, budget, &opts) {
            Ok(s) => {
                run.solve_times.push(started.elapsed());
                run.schedules.push(s);
            }
            Err(source) => {
                return Err(Box::new(SequentialError {
                    partial: run,
                    failed: c.name.clone(),
                    source,
                }))
            }
        }
    }
    Ok(run)
}

/// Relabels circuit `m` onto qubits offset by the qubit counts of circuits
/// `0..m` and concatenates the gate lists in input order.
///
/// # Panics
/// If `circuits` is empty.
pub fn merge_circuits(circuits: &[&Circuit]) -> Circuit {
    assert!(!circuits.is_empty(), "nothing to merge");
    if let [only] = circuits {
        return (*only).clone();
    }
    let name = circuits.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join("+");
    let total = circuits.iter().map(|c| c.num_qubits).sum();
    let mut merged = Circuit::new(name, total);
    let mut offset = 0;
    for c in circuits {
        for g in &c.gates {
            merged
                .push(g.qubits.0 + offset, g.qubits.1 + offset, &g.label)
                .expect("offset operands stay in range");
        }
        offset += c.num_qubits;
    }
    merged
}

#[derive(Debug, Clone)]
pub struct MergedRun {
    pub schedule: CompiledSchedule,
    pub solve_time: Duration,
}

impl MergedRun {
    pub fn stages(&self) -> usize {
        self.schedule.stage_count()
    }
}

/// Compiles the merged circuit alone on an empty array.
pub fn compile_merged(
    circuits: &[&Circuit],
    grid: GridSpec,
    budget: &Budget,
    opts: &CompileOptions,
) -> Result<MergedRun, CompileError> {
    let merged = merge_circuits(circuits);
    let opts = CompileOptions {
        start_offset: 0,
        ..opts.clone()
    };
    let started = Instant::now();
    let schedule = solve_window(&merged, grid, &ArrayOccupancy::new(grid), budget, &opts)?;
    Ok(MergedRun {
        schedule,
        solve_time: started.elapsed(),
    })
}

/// Increase of the joint stage count contributed by each circuit, given the
/// joint count recorded after each commit.
pub fn delta_stages(horizons: &[usize]) -> Vec<usize> {
    let mut prev = 0;
    horizons
        .iter()
        .map(|&h| {
            let d = h.saturating_sub(prev);
            prev = prev.max(h);
            d
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircuitDelta {
    pub circuit: String,
    pub delta_l: usize,
    pub delta_t: f64,
}

/// Per-circuit stage and time increments of one array, in compile order.
pub fn delta_stage_accounting(run: &ArrayCompilation) -> Vec<CircuitDelta> {
    run.schedules
        .iter()
        .zip(delta_stages(&run.horizons))
        .zip(&run.solve_times)
        .map(|((s, delta_l), t)| CircuitDelta {
            circuit: s.name.clone(),
            delta_l,
            delta_t: t.as_secs_f64(),
        })
        .collect()
}
