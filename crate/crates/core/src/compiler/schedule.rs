use serde::{Deserialize, Serialize};

use crate::array::{Exclusivity, QubitState};

/// A solved layout: every qubit's site and trap at every stage, and the stage
/// of every gate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompiledSchedule {
    pub name: String,
    pub num_qubits: usize,
    /// Operands of every gate, in program order.
    pub gates: Vec<(usize, usize)>,
    /// Layout before the first movement step. Empty when there are no stages.
    pub initial: Vec<QubitState>,
    /// `stages[s][q]`
    pub stages: Vec<Vec<QubitState>>,
    pub gate_stage: Vec<usize>,
    pub exclusivity: Exclusivity,
}

impl CompiledSchedule {
    pub fn empty(name: &str, num_qubits: usize, exclusivity: Exclusivity) -> Self {
        CompiledSchedule {
            name: name.to_string(),
            num_qubits,
            gates: Vec::new(),
            initial: Vec::new(),
            stages: Vec::new(),
            gate_stage: Vec::new(),
            exclusivity,
        }
    }

    /// `1 + max gate stage`, or 0 without gates.
    pub fn stage_count(&self) -> usize {
        self.gate_stage.iter().max().map_or(0, |&t| t + 1)
    }

    pub fn summary(&self, solve_seconds: f64) -> serde_json::Value {
        serde_json::json!({
            "circuit": self.name,
            "stages": self.stage_count(),
            "solve_seconds": solve_seconds,
        })
    }
}
