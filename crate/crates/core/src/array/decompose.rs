use thiserror::Error;

use super::{Cycle, ExecutionSequence, GateEvent, Movement, QubitState, Transfer, Trap};
use crate::compiler::CompiledSchedule;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecomposeError {
    #[error("qubit {qubit} changes site in cycle {stage} without being held by the AOD")]
    Teleport { qubit: usize, stage: usize },
    #[error("layout {stage} (0 is the initial layout) lists {found} qubits, expected {expected}")]
    Shape {
        stage: usize,
        found: usize,
        expected: usize,
    },
    #[error("gate {gate} is mapped to stage {stage} but the schedule has {stages} stages")]
    GateOutOfRange {
        gate: usize,
        stage: usize,
        stages: usize,
    },
}

/// Splits a schedule into cycles: the movement step of cycle k carries the
/// site changes of AOD-held qubits between stage k-1 (or the initial layout)
/// and stage k; the non-movement step carries trap transfers and the gates of
/// stage k.
pub fn decompose_to_cycles(
    schedule: &CompiledSchedule,
    circuit: usize,
) -> Result<ExecutionSequence, DecomposeError> {
    let n = schedule.num_qubits;
    let stages = schedule.stages.len();
    for (stage, layout) in std::iter::once(&schedule.initial)
        .chain(schedule.stages.iter())
        .enumerate()
    {
        if layout.len() != n && !(stage == 0 && stages == 0) {
            return Err(DecomposeError::Shape {
                stage,
                found: layout.len(),
                expected: n,
            });
        }
    }
    let mut by_stage: Vec<Vec<usize>> = vec![Vec::new(); stages];
    for (gate, &stage) in schedule.gate_stage.iter().enumerate() {
        by_stage
            .get_mut(stage)
            .ok_or(DecomposeError::GateOutOfRange { gate, stage, stages })?
            .push(gate);
    }
    let mut cycles = Vec::with_capacity(stages);
    for (k, cur) in schedule.stages.iter().enumerate() {
        let prev: &[QubitState] = if k == 0 {
            &schedule.initial
        } else {
            &schedule.stages[k - 1]
        };
        let mut cycle = Cycle {
            index: k,
            ..Cycle::default()
        };
        for (q, (p, c)) in prev.iter().zip(cur).enumerate() {
            if p.site != c.site {
                if p.trap != Trap::Aod || c.trap != Trap::Aod {
                    return Err(DecomposeError::Teleport { qubit: q, stage: k });
                }
                cycle.movements.push(Movement {
                    circuit,
                    cycle: k,
                    index: cycle.movements.len(),
                    qubit: q,
                    from: p.site,
                    to: c.site,
                });
            }
            if p.trap != c.trap {
                cycle.transfers.push(Transfer {
                    qubit: q,
                    to: c.trap,
                });
            }
        }
        for &g in &by_stage[k] {
            let operands = schedule.gates[g];
            cycle.gate_events.push(GateEvent {
                circuit,
                cycle: k,
                index: cycle.gate_events.len(),
                gate: g,
                site: cur[operands.0].site,
                operands,
            });
        }
        cycles.push(cycle);
    }
    Ok(ExecutionSequence {
        circuit,
        name: schedule.name.clone(),
        num_qubits: n,
        initial: schedule.initial.clone(),
        cycles,
        exclusivity: schedule.exclusivity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{Exclusivity, Site};
    use proptest::prelude::*;

    fn q(x: usize, y: usize, aod: bool) -> QubitState {
        QubitState::new(x, y, if aod { Trap::Aod } else { Trap::Slm })
    }

    fn two_gate_schedule() -> CompiledSchedule {
        // q0 stays in the SLM at (0,0); q1 flies in for g0, then q2 for g1.
        CompiledSchedule {
            name: "demo".into(),
            num_qubits: 3,
            gates: vec![(0, 1), (0, 2)],
            initial: vec![q(0, 0, false), q(1, 0, true), q(2, 1, true)],
            stages: vec![
                vec![q(0, 0, false), q(0, 0, true), q(2, 1, true)],
                vec![q(0, 0, false), q(1, 1, true), q(0, 0, true)],
            ],
            gate_stage: vec![0, 1],
            exclusivity: Exclusivity::Strengthened,
        }
    }

    #[test]
    fn gates_land_in_their_cycles() {
        let seq = decompose_to_cycles(&two_gate_schedule(), 4).unwrap();
        assert_eq!(seq.cycles.len(), 2);
        assert_eq!(seq.cycles[0].gate_events[0].gate, 0);
        assert_eq!(seq.cycles[1].gate_events[0].gate, 1);
        assert_eq!(seq.cycles[0].gate_events[0].site, Site::new(0, 0));
        assert_eq!(seq.cycles[0].movements.len(), 1);
        assert_eq!(seq.cycles[1].movements.len(), 2);
        assert!(seq.cycles.iter().all(|c| c.movements.iter().all(|m| m.circuit == 4)));
        assert_eq!(seq.stage_count(), 2);
    }

    #[test]
    fn slm_motion_is_rejected() {
        let mut s = two_gate_schedule();
        s.stages[1][0] = q(1, 0, false);
        assert_eq!(
            decompose_to_cycles(&s, 0),
            Err(DecomposeError::Teleport { qubit: 0, stage: 1 })
        );
        // Picking up and moving in the same step is also motion outside the AOD.
        let mut s = two_gate_schedule();
        s.initial[1].trap = Trap::Slm;
        assert_eq!(
            decompose_to_cycles(&s, 0),
            Err(DecomposeError::Teleport { qubit: 1, stage: 0 })
        );
    }

    #[test]
    fn transfers_are_recorded() {
        let mut s = two_gate_schedule();
        s.stages[1][1] = q(0, 0, false);
        s.stages[1][0] = q(0, 0, true);
        s.stages[1][2] = q(2, 1, true);
        s.gates = vec![(0, 1)];
        s.gate_stage = vec![0];
        let seq = decompose_to_cycles(&s, 0).unwrap();
        assert_eq!(seq.cycles[1].transfers.len(), 2);
    }

    #[test]
    fn json_round_trip() {
        let seq = decompose_to_cycles(&two_gate_schedule(), 2).unwrap();
        let v = seq.to_json();
        assert_eq!(v["circuit"], "demo");
        assert_eq!(v["cycles"][0]["k"], 0);
        assert_eq!(v["cycles"][0]["gates"][0]["site"], serde_json::json!([0, 0]));
        assert_eq!(v["cycles"][0]["gates"][0]["ops"], serde_json::json!([0, 1]));
        assert_eq!(v["cycles"][1]["movements"][0]["from"], serde_json::json!([0, 0]));
        let back = ExecutionSequence::from_json(&v, 2).unwrap();
        assert_eq!(back, seq);
    }

    /// Random walks where a qubit only changes site while held by the AOD.
    fn arb_schedule() -> impl Strategy<Value = CompiledSchedule> {
        let state = (0usize..4, 0usize..4, any::<bool>());
        (1usize..4, 1usize..5).prop_flat_map(move |(n, len)| {
            (
                prop::collection::vec(state.clone(), n),
                prop::collection::vec(prop::collection::vec(state.clone(), n), len),
            )
                .prop_map(move |(init, steps)| {
                    let initial: Vec<QubitState> = init.iter().map(|&(x, y, a)| q(x, y, a)).collect();
                    let mut stages = Vec::new();
                    let mut cur = initial.clone();
                    for step in steps {
                        for (i, &(x, y, a)) in step.iter().enumerate() {
                            let both_aod = cur[i].trap == Trap::Aod && a;
                            let site = if both_aod { Site::new(x, y) } else { cur[i].site };
                            cur[i] = QubitState { site, trap: if a { Trap::Aod } else { Trap::Slm } };
                        }
                        stages.push(cur.clone());
                    }
                    CompiledSchedule {
                        name: "walk".into(),
                        num_qubits: n,
                        gates: vec![],
                        initial,
                        stages,
                        gate_stage: vec![],
                        exclusivity: Exclusivity::Literal,
                    }
                })
        })
    }

    proptest! {
        #[test]
        fn replay_recovers_every_stage(s in arb_schedule()) {
            let seq = decompose_to_cycles(&s, 0).unwrap();
            prop_assert_eq!(seq.replay().unwrap(), s.stages.clone());
            for c in &seq.cycles {
                for m in &c.movements {
                    prop_assert_ne!(m.from, m.to);
                }
            }
        }
    }
}
