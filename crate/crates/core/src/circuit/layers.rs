use serde::{Deserialize, Serialize};

use super::Circuit;

/// ASAP layering of a circuit's gates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayeredCircuit {
    pub name: String,
    /// Gate ids per layer, in program order within each layer.
    pub layers: Vec<Vec<usize>>,
}

impl LayeredCircuit {
    /// A synthetic layering with the given per-layer widths, for placement-only use.
    pub fn from_widths(name: impl Into<String>, widths: &[usize]) -> Self {
        let mut next = 0;
        let layers = widths
            .iter()
            .map(|&w| {
                let layer: Vec<usize> = (next..next + w).collect();
                next += w;
                layer
            })
            .collect();
        LayeredCircuit {
            name: name.into(),
            layers,
        }
    }

    pub fn length(&self) -> usize {
        self.layers.len()
    }

    pub fn width_profile(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    pub fn max_width(&self) -> usize {
        self.layers.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Layer of a gate = 1 + the deepest earlier gate sharing a qubit, or 0.
pub fn layer_dag(circuit: &Circuit) -> LayeredCircuit {
    let mut depth = vec![0usize; circuit.num_qubits];
    let mut layers: Vec<Vec<usize>> = Vec::new();
    for g in &circuit.gates {
        let (a, b) = g.qubits;
        let layer = depth[a].max(depth[b]);
        if layer == layers.len() {
            layers.push(Vec::new());
        }
        layers[layer].push(g.id);
        depth[a] = layer + 1;
        depth[b] = layer + 1;
    }
    LayeredCircuit {
        name: circuit.name.clone(),
        layers,
    }
}

pub fn shape(layered: &LayeredCircuit) -> (usize, Vec<usize>) {
    (layered.length(), layered.width_profile())
}
