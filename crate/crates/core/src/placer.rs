//! Greedy assignment of circuits to arrays and start times under a per-timestep
//! qubit budget.
//!
//! Time here is measured in ASAP layers. Each array keeps an occupancy profile,
//! the number of qubits busy at every timestep, which never exceeds the
//! capacity `W_max`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::LayeredCircuit;

#[derive(Debug, Clone)]
pub struct PlacementRequest {
    pub circuits: Vec<LayeredCircuit>,
    pub num_arrays: usize,
    /// Maximum number of simultaneously active qubits per array and timestep.
    pub capacity: usize,
}

/// A circuit placed on an array. `feasible_start` is the start recorded when the
/// circuit was assigned; `start` may change when the array is re-timed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub circuit: usize,
    pub start: usize,
    pub feasible_start: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArrayTimeline {
    pub occupancy: Vec<usize>,
    pub assigned: Vec<Assignment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub array: usize,
    pub start: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub arrays: Vec<ArrayTimeline>,
    /// Per input circuit: where it landed, if placed yet.
    pub slots: Vec<Option<Slot>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlacementError {
    #[error("circuit `{name}` needs {width} simultaneous qubits but an array admits {capacity}")]
    Unplaceable {
        name: String,
        width: usize,
        capacity: usize,
    },
    #[error("at least one array is required")]
    NoArrays,
}

impl ArrayTimeline {
    /// Timesteps covered by the occupancy profile.
    pub fn span(&self) -> usize {
        self.occupancy.len()
    }

    pub fn fits(&self, widths: &[usize], start: usize, capacity: usize) -> bool {
        widths
            .iter()
            .enumerate()
            .all(|(k, &w)| self.occupancy.get(start + k).copied().unwrap_or(0) + w <= capacity)
    }

    fn add(&mut self, widths: &[usize], start: usize) {
        if self.occupancy.len() < start + widths.len() {
            self.occupancy.resize(start + widths.len(), 0);
        }
        for (k, &w) in widths.iter().enumerate() {
            self.occupancy[start + k] += w;
        }
    }

    /// Records a circuit at `start`; the caller has checked feasibility.
    pub fn insert(&mut self, circuit: usize, widths: &[usize], start: usize) {
        self.add(widths, start);
        self.assigned.push(Assignment {
            circuit,
            start,
            feasible_start: start,
        });
    }
}

impl Placement {
    fn empty(num_circuits: usize, num_arrays: usize) -> Self {
        Placement {
            arrays: vec![ArrayTimeline::default(); num_arrays],
            slots: vec![None; num_circuits],
        }
    }

    /// Circuit order on an array after refinement.
    pub fn order(&self, array: usize) -> Vec<usize> {
        self.arrays[array].assigned.iter().map(|a| a.circuit).collect()
    }

    pub fn to_json(&self, circuits: &[LayeredCircuit]) -> serde_json::Value {
        let arrays: Vec<serde_json::Value> = self
            .arrays
            .iter()
            .enumerate()
            .map(|(index, tl)| {
                let placed: Vec<serde_json::Value> = tl
                    .assigned
                    .iter()
                    .map(|a| {
                        serde_json::json!({
                            "name": circuits[a.circuit].name,
                            "start": a.start,
                            "length": circuits[a.circuit].length(),
                        })
                    })
                    .collect();
                serde_json::json!({ "index": index, "circuits": placed })
            })
            .collect();
        serde_json::json!({ "arrays": arrays })
    }
}

/// Circuit indices by ascending length, ties by input position.
pub fn sort_by_length(circuits: &[LayeredCircuit]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..circuits.len()).collect();
    order.sort_by_key(|&i| (circuits[i].length(), i));
    order
}

/// Seeds the shortest `min(M, N)` circuits at t = 0, one per array.
/// Returns the partial placement and the circuits still to place, shortest first.
pub fn initial_allocation(req: &PlacementRequest) -> (Placement, Vec<usize>) {
    let order = sort_by_length(&req.circuits);
    let mut placement = Placement::empty(req.circuits.len(), req.num_arrays);
    let seeded = req.num_arrays.min(order.len());
    for (array, &c) in order[..seeded].iter().enumerate() {
        placement.arrays[array].insert(c, &req.circuits[c].width_profile(), 0);
        placement.slots[c] = Some(Slot { array, start: 0 });
    }
    (placement, order[seeded..].to_vec())
}

/// Smallest t with `occupancy[t + k] + width[k] <= capacity` for every layer k.
///
/// Always terminates for circuits no wider than `capacity`: past the end of the
/// profile every timestep is free.
pub fn earliest_feasible_start(
    timeline: &ArrayTimeline,
    circuit: &LayeredCircuit,
    capacity: usize,
) -> usize {
    let widths = circuit.width_profile();
    (0..=timeline.span())
        .find(|&t| timeline.fits(&widths, t, capacity))
        .unwrap_or(timeline.span())
}

pub fn placement_cost(start: usize, circuit: &LayeredCircuit) -> usize {
    start + circuit.length()
}

fn check_width(circuit: &LayeredCircuit, capacity: usize) -> Result<(), PlacementError> {
    if circuit.max_width() > capacity {
        return Err(PlacementError::Unplaceable {
            name: circuit.name.clone(),
            width: circuit.max_width(),
            capacity,
        });
    }
    Ok(())
}

/// Places each remaining circuit on the array with the lowest completion time,
/// ties to the lowest array index.
pub fn incremental_place(
    mut placement: Placement,
    remaining: &[usize],
    req: &PlacementRequest,
) -> Result<Placement, PlacementError> {
    for &c in remaining {
        let circuit = &req.circuits[c];
        check_width(circuit, req.capacity)?;
        let (array, start) = placement
            .arrays
            .iter()
            .enumerate()
            .map(|(j, tl)| (j, earliest_feasible_start(tl, circuit, req.capacity)))
            .min_by_key(|&(j, t)| (placement_cost(t, circuit), j))
            .ok_or(PlacementError::NoArrays)?;
        placement.arrays[array].insert(c, &circuit.width_profile(), start);
        placement.slots[c] = Some(Slot { array, start });
    }
    Ok(placement)
}

/// Reorders an array by (recorded start, length) and re-times it: each circuit
/// in the new order goes to its earliest feasible start on a fresh profile.
pub fn refine_intra_array(
    timeline: &ArrayTimeline,
    circuits: &[LayeredCircuit],
    capacity: usize,
) -> ArrayTimeline {
    let mut order = timeline.assigned.clone();
    order.sort_by_key(|a| (a.feasible_start, circuits[a.circuit].length()));
    let mut out = ArrayTimeline::default();
    for a in order {
        let c = &circuits[a.circuit];
        let start = earliest_feasible_start(&out, c, capacity);
        out.add(&c.width_profile(), start);
        out.assigned.push(Assignment { start, ..a });
    }
    out
}

pub fn schedule_all(req: &PlacementRequest) -> Result<Placement, PlacementError> {
    if req.num_arrays == 0 {
        return Err(PlacementError::NoArrays);
    }
    for c in &req.circuits {
        check_width(c, req.capacity)?;
    }
    let (seeded, remaining) = initial_allocation(req);
    let mut placement = incremental_place(seeded, &remaining, req)?;
    for j in 0..placement.arrays.len() {
        let refined = refine_intra_array(&placement.arrays[j], &req.circuits, req.capacity);
        for a in &refined.assigned {
            placement.slots[a.circuit] = Some(Slot {
                array: j,
                start: a.start,
            });
        }
        placement.arrays[j] = refined;
    }
    Ok(placement)
}
