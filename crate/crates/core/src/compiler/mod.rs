//! Constraint-based layout synthesis for one circuit, alone or against the
//! circuits already committed to an array.

mod encode;
mod schedule;
mod window;

use std::time::{Duration, Instant};

use thiserror::Error;

pub use encode::{
    encode_base, encode_multiprogram, encode_window, EncodedProblem, Family, FixedQubit, QubitVars,
    VariableSet, WindowSpec,
};
pub use schedule::CompiledSchedule;
pub use window::{extract_schedule, solve_window, Budget, CompileError, CompileOptions};

use crate::array::{decompose_to_cycles, ArrayOccupancy, GridSpec};
use crate::circuit::Circuit;

/// One circuit to compile onto an array, with its earliest gate stage.
#[derive(Debug, Clone, Copy)]
pub struct ArrayJob<'a> {
    pub circuit: &'a Circuit,
    pub start_offset: usize,
}

#[derive(Debug, Clone)]
pub struct ArrayCompilation {
    pub occupancy: ArrayOccupancy,
    pub schedules: Vec<CompiledSchedule>,
    pub solve_times: Vec<Duration>,
    /// Joint stage count after each commit.
    pub horizons: Vec<usize>,
}

impl ArrayCompilation {
    pub fn new(grid: GridSpec) -> Self {
        ArrayCompilation {
            occupancy: ArrayOccupancy::new(grid),
            schedules: Vec::new(),
            solve_times: Vec::new(),
            horizons: Vec::new(),
        }
    }

    pub fn stage_count(&self) -> usize {
        self.occupancy.stage_count()
    }

    pub fn total_time(&self) -> Duration {
        self.solve_times.iter().sum()
    }

    /// One `{"circuit","stages","solve_seconds"}` record per compiled circuit.
    pub fn summaries(&self) -> Vec<serde_json::Value> {
        self.schedules
            .iter()
            .zip(&self.solve_times)
            .map(|(s, t)| s.summary(t.as_secs_f64()))
            .collect()
    }
}

#[derive(Debug, Error)]
#[error("compiling `{failed}` failed: {source}")]
pub struct ArrayCompileError {
    /// Circuits compiled before the failure.
    pub completed: ArrayCompilation,
    pub failed: String,
    pub source: CompileError,
}

impl ArrayCompilation {
    /// Compiles one circuit against everything committed so far and commits
    /// it. On failure nothing is committed.
    pub fn compile_next(
        &mut self,
        job: &ArrayJob,
        budget: &Budget,
        opts: &CompileOptions,
    ) -> Result<(), CompileError> {
        let job_opts = CompileOptions {
            start_offset: job.start_offset,
            ..opts.clone()
        };
        let started = Instant::now();
        let schedule = solve_window(job.circuit, self.occupancy.grid, &self.occupancy, budget, &job_opts)?;
        let elapsed = started.elapsed();
        let id = self.schedules.len();
        decompose_to_cycles(&schedule, id)
            .map_err(|e| e.to_string())
            .and_then(|seq| self.occupancy.commit(seq).map_err(|e| e.to_string()))
            .map_err(|reason| CompileError::Commit {
                circuit: job.circuit.name.clone(),
                reason,
            })?;
        self.schedules.push(schedule);
        self.solve_times.push(elapsed);
        self.horizons.push(self.occupancy.stage_count());
        Ok(())
    }
}

/// Compiles the jobs in order, each against everything committed before it.
pub fn compile_on_array(
    jobs: &[ArrayJob],
    grid: GridSpec,
    budget: &Budget,
    opts: &CompileOptions,
) -> Result<ArrayCompilation, Box<ArrayCompileError>> {
    let mut out = ArrayCompilation::new(grid);
    for job in jobs {
        if let Err(source) = out.compile_next(job, budget, opts) {
            return Err(Box::new(ArrayCompileError {
                completed: out,
                failed: job.circuit.name.clone(),
                source,
            }));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn third_circuit_that_cannot_fit_is_named() {
        let grid = GridSpec::new(3, 1);
        let a = Circuit::from_pairs("a", 2, &[(0, 1)]).unwrap();
        let b = Circuit::from_pairs("b", 2, &[(0, 1)]).unwrap();
        let c = Circuit::from_pairs("c", 7, &[(0, 1)]).unwrap();
        let jobs: Vec<ArrayJob> = [&a, &b, &c]
            .into_iter()
            .map(|circuit| ArrayJob { circuit, start_offset: 0 })
            .collect();
        let err = compile_on_array(&jobs, grid, &Budget::unlimited(), &CompileOptions::default())
            .unwrap_err();
        assert_eq!(err.failed, "c");
        assert_eq!(err.completed.schedules.len(), 2);
        assert_eq!(err.completed.horizons.len(), 2);
    }

    #[test]
    fn summaries_report_stage_counts() {
        let grid = GridSpec::new(4, 4);
        let a = Circuit::from_pairs("a", 2, &[(0, 1), (0, 1)]).unwrap();
        let jobs = [ArrayJob { circuit: &a, start_offset: 0 }];
        let run = compile_on_array(&jobs, grid, &Budget::unlimited(), &CompileOptions::default()).unwrap();
        let s = &run.summaries()[0];
        assert_eq!(s["circuit"], "a");
        assert_eq!(s["stages"], 2);
        assert!(s["solve_seconds"].as_f64().unwrap() >= 0.0);
    }
}
