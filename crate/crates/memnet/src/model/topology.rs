//! Tree topologies: layer widths, per-cell fan-in, and wiring.

use super::{ModelError, MAX_FAN_IN};

/// Wiring of one layer.
///
/// Source indices address the previous layer's signals (the padded primary
/// inputs for layer 0). Indices at or beyond the real upstream signal count
/// refer to constant-0 pad lines, which exist so cell groups always fill
/// their fan-in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerSpec {
    /// Size of this layer's input signal domain, pad lines included.
    pub padded_inputs: usize,
    /// Per-cell source indices; the inner length is the cell's fan-in.
    pub cells: Vec<Vec<usize>>,
}

impl LayerSpec {
    pub fn width(&self) -> usize {
        self.cells.len()
    }
}

/// A layered tree of divider-inverter cells from `n_inputs` primary lines
/// down to `n_outputs` output cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeTopology {
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub layers: Vec<LayerSpec>,
}

impl TreeTopology {
    /// Builds a topology and checks its structural invariants.
    pub fn new(
        n_inputs: usize,
        n_outputs: usize,
        layers: Vec<LayerSpec>,
    ) -> Result<Self, ModelError> {
        let topology = TreeTopology {
            n_inputs,
            n_outputs,
            layers,
        };
        topology.validate()?;
        Ok(topology)
    }

    /// Primary input count after padding to the first layer's domain.
    pub fn n_padded_inputs(&self) -> usize {
        self.layers.first().map_or(self.n_inputs, |l| l.padded_inputs)
    }

    /// Total cell count (one inverter per cell).
    pub fn n_cells(&self) -> usize {
        self.layers.iter().map(LayerSpec::width).sum()
    }

    /// Total device count: per cell, one device per input plus the reference.
    pub fn n_device_bits(&self) -> usize {
        self.layers
            .iter()
            .flat_map(|l| l.cells.iter())
            .map(|sources| sources.len() + 1)
            .sum()
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layer_widths(&self) -> Vec<usize> {
        self.layers.iter().map(LayerSpec::width).collect()
    }

    /// Device-bit range occupied by each layer in the canonical chromosome
    /// layout (layer order, cell order, input devices then reference).
    pub fn layer_bit_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut ranges = Vec::with_capacity(self.layers.len());
        let mut offset = 0;
        for layer in &self.layers {
            let bits: usize = layer.cells.iter().map(|s| s.len() + 1).sum();
            ranges.push(offset..offset + bits);
            offset += bits;
        }
        ranges
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n_inputs == 0 {
            return Err(ModelError::EmptyTopology("n_inputs is 0".into()));
        }
        if self.n_outputs == 0 {
            return Err(ModelError::EmptyTopology("n_outputs is 0".into()));
        }
        if self.layers.is_empty() {
            return Err(ModelError::EmptyTopology("no layers".into()));
        }
        let last = self.layers.last().expect("non-empty");
        if last.width() != self.n_outputs {
            return Err(ModelError::BadWiring(format!(
                "final layer width {} != n_outputs {}",
                last.width(),
                self.n_outputs
            )));
        }
        if self.n_padded_inputs() < self.n_inputs {
            return Err(ModelError::BadWiring(format!(
                "padded input count {} < n_inputs {}",
                self.n_padded_inputs(),
                self.n_inputs
            )));
        }

        let mut upstream_real = self.n_inputs;
        for (layer_index, layer) in self.layers.iter().enumerate() {
            if layer.cells.is_empty() {
                return Err(ModelError::EmptyTopology(format!(
                    "layer {layer_index} has no cells"
                )));
            }
            if layer.padded_inputs < upstream_real {
                return Err(ModelError::BadWiring(format!(
                    "layer {layer_index} pads to {} but has {} upstream signals",
                    layer.padded_inputs, upstream_real
                )));
            }
            let mut used = vec![false; upstream_real];
            for (cell_index, sources) in layer.cells.iter().enumerate() {
                let fan_in = sources.len();
                if fan_in == 0 || fan_in > MAX_FAN_IN {
                    return Err(ModelError::FanInOutOfRange {
                        layer: layer_index,
                        cell: cell_index,
                        fan_in,
                    });
                }
                for &src in sources {
                    if src >= layer.padded_inputs {
                        return Err(ModelError::BadWiring(format!(
                            "layer {layer_index} cell {cell_index} reads signal {src} \
                             outside domain 0..{}",
                            layer.padded_inputs
                        )));
                    }
                    if src < upstream_real {
                        used[src] = true;
                    }
                }
            }
            if let Some(unused) = used.iter().position(|&u| !u) {
                return Err(ModelError::BadWiring(format!(
                    "signal {unused} feeding layer {layer_index} is never read"
                )));
            }
            upstream_real = layer.width();
        }
        Ok(())
    }
}

/// Builds the reduction-tree topology for `n_inputs` lines, cells of at most
/// `fan_in_max` inputs, and `n_outputs` output cells.
///
/// Reduction layers of full fan-in cells are added (padding each layer's
/// input domain to a multiple of `fan_in_max` with constant-0 lines) until
/// at most `fan_in_max * n_outputs` signals remain; a final layer of exactly
/// `n_outputs` cells then consumes the survivors round-robin, every signal
/// feeding either `ceil` or `floor` of the average number of slots.
pub fn build_tree_topology(
    n_inputs: usize,
    fan_in_max: usize,
    n_outputs: usize,
) -> Result<TreeTopology, ModelError> {
    if n_inputs == 0 {
        return Err(ModelError::EmptyTopology("n_inputs is 0".into()));
    }
    if n_outputs == 0 {
        return Err(ModelError::EmptyTopology("n_outputs is 0".into()));
    }
    if fan_in_max == 0 || fan_in_max > MAX_FAN_IN {
        return Err(ModelError::FanInOutOfRange {
            layer: 0,
            cell: 0,
            fan_in: fan_in_max,
        });
    }

    let mut layers = Vec::new();
    let mut signals = n_inputs;
    while signals > fan_in_max * n_outputs {
        let padded = signals.div_ceil(fan_in_max) * fan_in_max;
        let width = padded / fan_in_max;
        if width >= signals {
            // fan_in_max == 1 cannot reduce the signal count.
            return Err(ModelError::Infeasible(format!(
                "fan-in {fan_in_max} cannot reduce {signals} signals toward \
                 {n_outputs} outputs"
            )));
        }
        let cells = (0..width)
            .map(|cell| (cell * fan_in_max..(cell + 1) * fan_in_max).collect())
            .collect();
        layers.push(LayerSpec {
            padded_inputs: padded,
            cells,
        });
        signals = width;
    }

    let fan_in = signals.div_ceil(n_outputs);
    debug_assert!(fan_in <= fan_in_max);
    let cells = (0..n_outputs)
        .map(|cell| (0..fan_in).map(|slot| (cell * fan_in + slot) % signals).collect())
        .collect();
    layers.push(LayerSpec {
        padded_inputs: signals,
        cells,
    });

    TreeTopology::new(n_inputs, n_outputs, layers)
}
