//! Grid geometry, cycle-level execution sequences, and the occupancy of an
//! array shared by several compiled circuits.

mod decompose;
mod occupancy;
mod zones;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use decompose::{decompose_to_cycles, DecomposeError};
pub use occupancy::{ArrayOccupancy, AtomTrack, CommitError};
pub use zones::{col_rule_ok, compute_zones, row_rule_ok, Zone, ZoneMap};

/// Interaction-site lattice plus the number of AOD rows and columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_sites: usize,
    pub y_sites: usize,
    pub aod_rows: usize,
    pub aod_cols: usize,
}

impl GridSpec {
    /// One AOD line per site row and column.
    pub fn new(x_sites: usize, y_sites: usize) -> Self {
        GridSpec {
            x_sites,
            y_sites,
            aod_rows: y_sites,
            aod_cols: x_sites,
        }
    }

    pub fn sites(&self) -> usize {
        self.x_sites * self.y_sites
    }

    pub fn contains(&self, s: Site) -> bool {
        s.x < self.x_sites && s.y < self.y_sites
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid grid `{0}`: expected XxY or XxY:RxC with positive sizes")]
pub struct GridParseError(String);

impl FromStr for GridSpec {
    type Err = GridParseError;

    /// `XxY` or `XxY:RxC` (AOD rows x columns).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || GridParseError(s.to_string());
        let pair = |p: &str| -> Result<(usize, usize), GridParseError> {
            let (a, b) = p.split_once(['x', 'X']).ok_or_else(err)?;
            let a: usize = a.trim().parse().map_err(|_| err())?;
            let b: usize = b.trim().parse().map_err(|_| err())?;
            if a == 0 || b == 0 {
                return Err(err());
            }
            Ok((a, b))
        };
        let (sites, aod) = match s.split_once(':') {
            Some((g, a)) => (g, Some(a)),
            None => (s, None),
        };
        let (x, y) = pair(sites)?;
        let mut grid = GridSpec::new(x, y);
        if let Some(a) = aod {
            let (rows, cols) = pair(a)?;
            grid.aod_rows = rows;
            grid.aod_cols = cols;
        }
        Ok(grid)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{}:{}x{}",
            self.x_sites, self.y_sites, self.aod_rows, self.aod_cols
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Site {
    pub x: usize,
    pub y: usize,
}

impl Site {
    pub fn new(x: usize, y: usize) -> Self {
        Site { x, y }
    }
}

impl From<[usize; 2]> for Site {
    fn from([x, y]: [usize; 2]) -> Self {
        Site { x, y }
    }
}

impl From<Site> for [usize; 2] {
    fn from(s: Site) -> Self {
        [s.x, s.y]
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trap {
    Slm,
    Aod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QubitState {
    pub site: Site,
    pub trap: Trap,
}

impl QubitState {
    pub fn new(x: usize, y: usize, trap: Trap) -> Self {
        QubitState {
            site: Site::new(x, y),
            trap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Movement {
    pub circuit: usize,
    pub cycle: usize,
    pub index: usize,
    pub qubit: usize,
    pub from: Site,
    pub to: Site,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateEvent {
    pub circuit: usize,
    pub cycle: usize,
    pub index: usize,
    pub gate: usize,
    pub site: Site,
    pub operands: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transfer {
    pub qubit: usize,
    pub to: Trap,
}

/// One movement step followed by one non-movement step (transfers, then gates).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cycle {
    pub index: usize,
    pub movements: Vec<Movement>,
    pub gate_events: Vec<GateEvent>,
    pub transfers: Vec<Transfer>,
}

/// Which cross-circuit gate-site rule a schedule was compiled under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exclusivity {
    /// Only the new circuit's gate operands avoid committed gate sites.
    Literal,
    /// Every new qubit avoids committed gate sites, and new gates avoid every
    /// committed atom.
    #[default]
    Strengthened,
}

/// A compiled circuit as a cycle list. `initial` is the layout before cycle 0's
/// movement step; replaying the cycles from it recovers every stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionSequence {
    pub circuit: usize,
    pub name: String,
    pub num_qubits: usize,
    pub initial: Vec<QubitState>,
    pub cycles: Vec<Cycle>,
    pub exclusivity: Exclusivity,
}

#[derive(Debug, Error)]
pub enum SequenceError {
    #[error("cycle {cycle}: qubit {qubit} moves from {from} but sits at {actual}")]
    WrongOrigin {
        cycle: usize,
        qubit: usize,
        from: Site,
        actual: Site,
    },
    #[error("cycle {cycle}: qubit {qubit} does not exist")]
    UnknownQubit { cycle: usize, qubit: usize },
    #[error("malformed sequence JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl ExecutionSequence {
    /// Per-stage qubit states obtained by applying each cycle's movements and
    /// transfers to the previous stage.
    pub fn replay(&self) -> Result<Vec<Vec<QubitState>>, SequenceError> {
        let mut cur = self.initial.clone();
        let mut stages = Vec::with_capacity(self.cycles.len());
        for c in &self.cycles {
            for m in &c.movements {
                let q = cur.get_mut(m.qubit).ok_or(SequenceError::UnknownQubit {
                    cycle: c.index,
                    qubit: m.qubit,
                })?;
                if q.site != m.from {
                    return Err(SequenceError::WrongOrigin {
                        cycle: c.index,
                        qubit: m.qubit,
                        from: m.from,
                        actual: q.site,
                    });
                }
                q.site = m.to;
            }
            for t in &c.transfers {
                let q = cur.get_mut(t.qubit).ok_or(SequenceError::UnknownQubit {
                    cycle: c.index,
                    qubit: t.qubit,
                })?;
                q.trap = t.to;
            }
            stages.push(cur.clone());
        }
        Ok(stages)
    }

    /// Stage count: one past the last cycle holding a gate.
    pub fn stage_count(&self) -> usize {
        self.cycles
            .iter()
            .filter(|c| !c.gate_events.is_empty())
            .map(|c| c.index + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn gate_events(&self) -> impl Iterator<Item = &GateEvent> {
        self.cycles.iter().flat_map(|c| c.gate_events.iter())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let json = SequenceJson {
            circuit: self.name.clone(),
            num_qubits: self.num_qubits,
            exclusivity: self.exclusivity,
            initial: self.initial.clone(),
            cycles: self
                .cycles
                .iter()
                .map(|c| CycleJson {
                    k: c.index,
                    movements: c
                        .movements
                        .iter()
                        .map(|m| MovementJson {
                            qubit: m.qubit,
                            from: m.from,
                            to: m.to,
                        })
                        .collect(),
                    gates: c
                        .gate_events
                        .iter()
                        .map(|g| GateJson {
                            gate: g.gate,
                            site: g.site,
                            ops: [g.operands.0, g.operands.1],
                        })
                        .collect(),
                    transfers: c.transfers.clone(),
                })
                .collect(),
        };
        serde_json::to_value(json).expect("sequence is always serializable")
    }

    pub fn from_json(value: &serde_json::Value, circuit: usize) -> Result<Self, SequenceError> {
        let json: SequenceJson = serde_json::from_value(value.clone())?;
        let cycles = json
            .cycles
            .into_iter()
            .map(|c| Cycle {
                index: c.k,
                movements: c
                    .movements
                    .into_iter()
                    .enumerate()
                    .map(|(index, m)| Movement {
                        circuit,
                        cycle: c.k,
                        index,
                        qubit: m.qubit,
                        from: m.from,
                        to: m.to,
                    })
                    .collect(),
                gate_events: c
                    .gates
                    .into_iter()
                    .enumerate()
                    .map(|(index, g)| GateEvent {
                        circuit,
                        cycle: c.k,
                        index,
                        gate: g.gate,
                        site: g.site,
                        operands: (g.ops[0], g.ops[1]),
                    })
                    .collect(),
                transfers: c.transfers,
            })
            .collect();
        Ok(ExecutionSequence {
            circuit,
            name: json.circuit,
            num_qubits: json.num_qubits,
            initial: json.initial,
            cycles,
            exclusivity: json.exclusivity,
        })
    }

    /// Rewrites the circuit id carried by every movement and gate event.
    pub(crate) fn renumber(&mut self, circuit: usize) {
        self.circuit = circuit;
        for c in &mut self.cycles {
            c.movements.iter_mut().for_each(|m| m.circuit = circuit);
            c.gate_events.iter_mut().for_each(|g| g.circuit = circuit);
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SequenceJson {
    circuit: String,
    num_qubits: usize,
    #[serde(default)]
    exclusivity: Exclusivity,
    initial: Vec<QubitState>,
    cycles: Vec<CycleJson>,
}

#[derive(Serialize, Deserialize)]
struct CycleJson {
    k: usize,
    movements: Vec<MovementJson>,
    gates: Vec<GateJson>,
    #[serde(default)]
    transfers: Vec<Transfer>,
}

#[derive(Serialize, Deserialize)]
struct MovementJson {
    qubit: usize,
    from: Site,
    to: Site,
}

#[derive(Serialize, Deserialize)]
struct GateJson {
    gate: usize,
    site: Site,
    ops: [usize; 2],
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!("6x4".parse::<GridSpec>().unwrap(), GridSpec::new(6, 4));
        let g: GridSpec = "6x4:2x3".parse().unwrap();
        assert_eq!((g.aod_rows, g.aod_cols), (2, 3));
        assert!("6x0".parse::<GridSpec>().is_err());
        assert!("6".parse::<GridSpec>().is_err());
        assert!("6x4:2".parse::<GridSpec>().is_err());
        assert_eq!(g.to_string().parse::<GridSpec>().unwrap(), g);
    }

    #[test]
    fn site_serializes_as_pair() {
        assert_eq!(serde_json::to_string(&Site::new(3, 1)).unwrap(), "[3,1]");
        let q: QubitState = serde_json::from_str(r#"{"site":[0,2],"trap":"aod"}"#).unwrap();
        assert_eq!(q, QubitState::new(0, 2, Trap::Aod));
    }
}
