//! Two-qubit gate lists, their loaders, and ASAP layering.

mod layers;
mod qasm;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use layers::{layer_dag, shape, LayeredCircuit};

/// A two-qubit gate; `id` is its position in the circuit's gate list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub id: usize,
    pub qubits: (usize, usize),
    pub label: String,
}

/// A quantum circuit reduced to its two-qubit gates, in program order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    pub name: String,
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("gate {gate} acts twice on qubit {qubit}")]
    RepeatedQubit { gate: usize, qubit: usize },
    #[error("gate {gate} references qubit {qubit} but the circuit has {num_qubits} qubits")]
    QubitOutOfRange {
        gate: usize,
        qubit: usize,
        num_qubits: usize,
    },
}

impl Circuit {
    pub fn new(name: impl Into<String>, num_qubits: usize) -> Self {
        Circuit {
            name: name.into(),
            num_qubits,
            gates: Vec::new(),
        }
    }

    /// Builds a circuit from operand pairs, labelling every gate `cz`.
    pub fn from_pairs(
        name: impl Into<String>,
        num_qubits: usize,
        pairs: &[(usize, usize)],
    ) -> Result<Self, CircuitError> {
        let mut c = Circuit::new(name, num_qubits);
        for &(a, b) in pairs {
            c.push(a, b, "cz")?;
        }
        Ok(c)
    }

    /// Appends a gate and returns its id.
    pub fn push(&mut self, q0: usize, q1: usize, label: &str) -> Result<usize, CircuitError> {
        let id = self.gates.len();
        for q in [q0, q1] {
            if q >= self.num_qubits {
                return Err(CircuitError::QubitOutOfRange {
                    gate: id,
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        if q0 == q1 {
            return Err(CircuitError::RepeatedQubit { gate: id, qubit: q0 });
        }
        self.gates.push(Gate {
            id,
            qubits: (q0, q1),
            label: label.to_string(),
        });
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn operands(&self) -> Vec<(usize, usize)> {
        self.gates.iter().map(|g| g.qubits).collect()
    }

    /// Immediate predecessors of every gate: the previous gate on each operand.
    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut last: Vec<Option<usize>> = vec![None; self.num_qubits];
        let mut preds = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let (a, b) = g.qubits;
            let mut p: Vec<usize> = [last[a], last[b]].into_iter().flatten().collect();
            p.sort_unstable();
            p.dedup();
            preds.push(p);
            last[a] = Some(g.id);
            last[b] = Some(g.id);
        }
        preds
    }

    /// Number of two-qubit layers.
    pub fn depth(&self) -> usize {
        layer_dag(self).length()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} qubits, {} gates)",
            self.name,
            self.num_qubits,
            self.gates.len()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircuitFormat {
    Qasm,
    JsonGateList,
}

impl CircuitFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "qasm" => Some(CircuitFormat::Qasm),
            "json" => Some(CircuitFormat::JsonGateList),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: qubit {register}[{index}] is not declared")]
    UndeclaredQubit {
        line: usize,
        col: usize,
        register: String,
        index: usize,
    },
    #[error("{line}:{col}: gate `{name}` acts on {arity} qubits; only one- and two-qubit gates are supported")]
    UnsupportedGate {
        line: usize,
        col: usize,
        name: String,
        arity: usize,
    },
    #[error("invalid gate list: {0}")]
    Json(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {error}")]
    Io {
        path: String,
        error: std::io::Error,
    },
    #[error("{path}: unknown circuit format (expected .qasm or .json)")]
    UnknownFormat { path: String },
    #[error("{path}: {error}")]
    Parse { path: String, error: ParseError },
}

#[derive(Deserialize)]
struct GateListFile {
    #[serde(default)]
    name: String,
    num_qubits: Option<usize>,
    gates: Vec<Vec<usize>>,
}

/// Either `{"name", "num_qubits", "gates"}` or a bare list of gates.
#[derive(Deserialize)]
#[serde(untagged)]
enum GateListInput {
    File(GateListFile),
    Bare(Vec<Vec<usize>>),
}

/// Parses circuit text. Unnamed input gets an empty name; [`load_circuit`] fills it in.
pub fn parse_circuit(text: &[u8], format: CircuitFormat) -> Result<Circuit, ParseError> {
    match format {
        CircuitFormat::Qasm => {
            let text = std::str::from_utf8(text).map_err(|e| ParseError::Syntax {
                line: 1,
                col: 1,
                message: format!("input is not UTF-8: {e}"),
            })?;
            qasm::parse(text)
        }
        CircuitFormat::JsonGateList => parse_gate_list(text),
    }
}

fn parse_gate_list(text: &[u8]) -> Result<Circuit, ParseError> {
    let input: GateListInput = serde_json::from_slice(text)
        .map_err(|_| ParseError::Json("expected a list of gates or an object with a `gates` list".into()))?;
    let file = match input {
        GateListInput::File(f) => f,
        GateListInput::Bare(gates) => GateListFile {
            name: String::new(),
            num_qubits: None,
            gates,
        },
    };
    // Without a declared count, the highest index used sets it.
    let num_qubits = file
        .num_qubits
        .unwrap_or_else(|| file.gates.iter().flatten().max().map_or(0, |&q| q + 1));
    let mut c = Circuit::new(file.name, num_qubits);
    for (i, g) in file.gates.iter().enumerate() {
        match g.as_slice() {
            [] => return Err(ParseError::Json(format!("gate entry {i} is empty"))),
            [_] => {}
            &[a, b] => {
                c.push(a, b, "cz")?;
            }
            _ => {
                return Err(ParseError::Json(format!(
                    "gate entry {i} acts on {} qubits; only two-qubit gates are supported",
                    g.len()
                )))
            }
        }
    }
    Ok(c)
}

/// Reads a `.qasm` or `.json` circuit; unnamed circuits take the file stem.
pub fn load_circuit(path: &Path) -> Result<Circuit, LoadError> {
    let shown = path.display().to_string();
    let format = CircuitFormat::from_path(path).ok_or_else(|| LoadError::UnknownFormat {
        path: shown.clone(),
    })?;
    let bytes = std::fs::read(path).map_err(|error| LoadError::Io {
        path: shown.clone(),
        error,
    })?;
    let mut c = parse_circuit(&bytes, format).map_err(|error| LoadError::Parse {
        path: shown,
        error,
    })?;
    if c.name.is_empty() {
        c.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    Ok(c)
}
