use std::collections::BTreeMap;

use thiserror::Error;

use super::{ExecutionSequence, GateEvent, GridSpec, Movement, SequenceError, Site, Trap};

/// Where one committed atom is during one cycle: its site before and after the
/// movement step and its trap before and after the transfers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AtomTrack {
    pub circuit: usize,
    pub qubit: usize,
    pub from: Site,
    pub to: Site,
    pub trap_before: Trap,
    pub trap_after: Trap,
}

impl AtomTrack {
    /// Held by an AOD line at some point of the cycle's movement step.
    pub fn held(&self) -> bool {
        self.trap_before == Trap::Aod || self.trap_after == Trap::Aod
    }

    pub fn moved(&self) -> bool {
        self.from != self.to
    }
}

#[derive(Debug, Error)]
pub enum CommitError {
    #[error("qubit {qubit} of `{name}` starts at {site}, already taken by qubit {other_qubit} of committed circuit {other}")]
    Collision {
        name: String,
        qubit: usize,
        site: Site,
        other: usize,
        other_qubit: usize,
    },
    #[error("qubit {qubit} of `{name}` leaves the {grid} grid at {site}")]
    OutOfGrid {
        name: String,
        qubit: usize,
        site: Site,
        grid: GridSpec,
    },
    #[error("`{name}` has {found} initial qubits, expected {expected}")]
    Shape {
        name: String,
        found: usize,
        expected: usize,
    },
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

/// Everything already compiled onto one array, indexed by cycle.
#[derive(Debug, Clone)]
pub struct ArrayOccupancy {
    pub grid: GridSpec,
    pub committed: Vec<ExecutionSequence>,
    /// Per cycle: SLM-trapped committed atoms after the cycle's transfers.
    pub static_atoms: Vec<BTreeMap<Site, Vec<(usize, usize)>>>,
    tracks: Vec<Vec<AtomTrack>>,
}

impl ArrayOccupancy {
    pub fn new(grid: GridSpec) -> Self {
        ArrayOccupancy {
            grid,
            committed: Vec::new(),
            static_atoms: Vec::new(),
            tracks: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.committed.iter().all(|s| s.cycles.is_empty())
    }

    /// Number of cycles any committed circuit spans.
    pub fn horizon(&self) -> usize {
        self.tracks.len()
    }

    /// Joint stage count: the latest gate stage of any committed circuit, plus one.
    pub fn stage_count(&self) -> usize {
        self.committed.iter().map(|s| s.stage_count()).max().unwrap_or(0)
    }

    pub fn tracks(&self, cycle: usize) -> &[AtomTrack] {
        self.tracks.get(cycle).map_or(&[], Vec::as_slice)
    }

    pub fn movements(&self, cycle: usize) -> impl Iterator<Item = &Movement> {
        self.committed
            .iter()
            .filter_map(move |s| s.cycles.get(cycle))
            .flat_map(|c| c.movements.iter())
    }

    pub fn gate_events(&self, cycle: usize) -> impl Iterator<Item = &GateEvent> {
        self.committed
            .iter()
            .filter_map(move |s| s.cycles.get(cycle))
            .flat_map(|c| c.gate_events.iter())
    }

    /// Appends a sequence, renumbering it to the next circuit id, and returns that id.
    pub fn commit(&mut self, mut seq: ExecutionSequence) -> Result<usize, CommitError> {
        let id = self.committed.len();
        seq.renumber(id);
        if seq.cycles.is_empty() {
            self.committed.push(seq);
            return Ok(id);
        }
        if seq.initial.len() != seq.num_qubits {
            return Err(CommitError::Shape {
                name: seq.name.clone(),
                found: seq.initial.len(),
                expected: seq.num_qubits,
            });
        }
        let stages = seq.replay()?;
        for layout in std::iter::once(&seq.initial).chain(stages.iter()) {
            if let Some((q, s)) = layout.iter().enumerate().find(|(_, s)| !self.grid.contains(s.site)) {
                return Err(CommitError::OutOfGrid {
                    name: seq.name.clone(),
                    qubit: q,
                    site: s.site,
                    grid: self.grid,
                });
            }
        }
        let first = self.tracks(0);
        for (q, (init, st0)) in seq.initial.iter().zip(&stages[0]).enumerate() {
            if let Some(t) = first.iter().find(|t| t.from == init.site || t.to == st0.site) {
                let site = if t.from == init.site { init.site } else { st0.site };
                return Err(CommitError::Collision {
                    name: seq.name.clone(),
                    qubit: q,
                    site,
                    other: t.circuit,
                    other_qubit: t.qubit,
                });
            }
        }
        if self.tracks.len() < stages.len() {
            self.tracks.resize(stages.len(), Vec::new());
            self.static_atoms.resize(stages.len(), BTreeMap::new());
        }
        for (k, cur) in stages.iter().enumerate() {
            let prev = if k == 0 { &seq.initial } else { &stages[k - 1] };
            for (q, (p, c)) in prev.iter().zip(cur).enumerate() {
                self.tracks[k].push(AtomTrack {
                    circuit: id,
                    qubit: q,
                    from: p.site,
                    to: c.site,
                    trap_before: p.trap,
                    trap_after: c.trap,
                });
                if c.trap == Trap::Slm {
                    self.static_atoms[k].entry(c.site).or_default().push((id, q));
                }
            }
        }
        self.committed.push(seq);
        Ok(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{decompose_to_cycles, Exclusivity, QubitState};
    use crate::compiler::CompiledSchedule;

    fn single(name: &str, x: usize, y: usize, stages: usize) -> ExecutionSequence {
        let a = QubitState::new(x, y, Trap::Slm);
        let b = QubitState::new(x, y, Trap::Aod);
        let s = CompiledSchedule {
            name: name.into(),
            num_qubits: 2,
            gates: vec![(0, 1)],
            initial: vec![a, b],
            stages: vec![vec![a, b]; stages],
            gate_stage: vec![stages - 1],
            exclusivity: Exclusivity::Strengthened,
        };
        decompose_to_cycles(&s, 99).unwrap()
    }

    #[test]
    fn commit_renumbers_and_tracks() {
        let mut occ = ArrayOccupancy::new(GridSpec::new(3, 3));
        assert_eq!(occ.commit(single("a", 0, 0, 2)).unwrap(), 0);
        assert_eq!(occ.commit(single("b", 2, 2, 3)).unwrap(), 1);
        assert_eq!(occ.horizon(), 3);
        assert_eq!(occ.stage_count(), 3);
        assert_eq!(occ.tracks(1).len(), 4);
        assert_eq!(occ.tracks(2).len(), 2);
        assert!(occ.gate_events(2).all(|g| g.circuit == 1));
        assert_eq!(occ.static_atoms[0][&Site::new(2, 2)], vec![(1, 0)]);
    }

    #[test]
    fn overlapping_start_site_is_rejected() {
        let mut occ = ArrayOccupancy::new(GridSpec::new(3, 3));
        occ.commit(single("a", 1, 1, 1)).unwrap();
        match occ.commit(single("b", 1, 1, 1)) {
            Err(CommitError::Collision { qubit: 0, site, other: 0, .. }) => {
                assert_eq!(site, Site::new(1, 1))
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(occ.committed.len(), 1);
    }

    #[test]
    fn out_of_grid_is_rejected() {
        let mut occ = ArrayOccupancy::new(GridSpec::new(2, 2));
        assert!(matches!(
            occ.commit(single("a", 2, 0, 1)),
            Err(CommitError::OutOfGrid { .. })
        ));
    }
}
