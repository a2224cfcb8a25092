//! Cells, circuit parameters, and forward evaluation of memory networks.
//!
//! A cell's input devices form a resistive divider into a common node; the
//! reference device ties that node to ground; an inverter reads the node.
//! Digital evaluation propagates ideal rails through the layers, analog
//! evaluation propagates the configured inverter's continuous output.

mod topology;

pub use topology::{build_tree_topology, LayerSpec, TreeTopology};

use thiserror::Error;

/// Hardware limit on how many inputs one inverter cell can take.
pub const MAX_FAN_IN: usize = 6;

#[derive(Error, Debug)]
pub enum ModelError {
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("voltage {value} outside [0, {vdd}]")]
    VoltageOutOfRange { value: f64, vdd: f64 },
    #[error("non-finite voltage input")]
    NonFiniteVoltage,
    #[error("invalid circuit parameters: {0}")]
    BadParams(String),
    #[error("layer {layer} cell {cell} fan-in {fan_in} outside 1..={MAX_FAN_IN}")]
    FanInOutOfRange {
        layer: usize,
        cell: usize,
        fan_in: usize,
    },
    #[error("degenerate topology: {0}")]
    EmptyTopology(String),
    #[error("bad wiring: {0}")]
    BadWiring(String),
    #[error("infeasible topology: {0}")]
    Infeasible(String),
    #[error("non-positive sigmoid gain {0}")]
    BadGain(f64),
}

/// Supply, threshold, and ON/OFF conductances shared by every cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams {
    /// Supply rail (normalized).
    pub vdd: f64,
    /// Inverter switching threshold.
    pub vth: f64,
    /// ON-state device conductance.
    pub g_on: f64,
    /// OFF-state device conductance; strictly positive so the divider node
    /// is solvable for every state pattern.
    pub g_off: f64,
}

impl Default for CircuitParams {
    fn default() -> Self {
        CircuitParams {
            vdd: 1.0,
            vth: 0.5,
            g_on: 1.0,
            g_off: 0.01,
        }
    }
}

impl CircuitParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.vdd.is_finite() && self.vdd > 0.0) {
            return Err(ModelError::BadParams(format!("vdd = {}", self.vdd)));
        }
        if !(self.vth.is_finite() && self.vth > 0.0 && self.vth < self.vdd) {
            return Err(ModelError::BadParams(format!(
                "vth = {} outside (0, {})",
                self.vth, self.vdd
            )));
        }
        if !(self.g_on.is_finite() && self.g_off.is_finite() && self.g_on > self.g_off && self.g_off > 0.0)
        {
            return Err(ModelError::BadParams(format!(
                "need g_on > g_off > 0, got g_on = {}, g_off = {}",
                self.g_on, self.g_off
            )));
        }
        Ok(())
    }

    /// Conductance of a device in the given state.
    pub fn conductance(&self, state: DeviceState) -> f64 {
        match state {
            DeviceState::On => self.g_on,
            DeviceState::Off => self.g_off,
        }
    }
}

/// Binary state of one resistive memory device; one memory bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeviceState {
    Off,
    On,
}

impl DeviceState {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            DeviceState::On
        } else {
            DeviceState::Off
        }
    }

    pub fn bit(self) -> bool {
        self == DeviceState::On
    }
}

/// Inverter voltage transfer curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InverterModel {
    /// Step at `vth`: below threshold the output is `vdd`, else 0.
    Ideal,
    /// Finite-gain curve `vdd / (1 + exp(gain * (v - vth) / vdd))`;
    /// strictly decreasing and exactly `vdd/2` at `v = vth`.
    Sigmoid { gain: f64 },
}

impl InverterModel {
    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            InverterModel::Ideal => Ok(()),
            InverterModel::Sigmoid { gain } if gain.is_finite() && gain > 0.0 => Ok(()),
            InverterModel::Sigmoid { gain } => Err(ModelError::BadGain(gain)),
        }
    }
}

/// How the inverter stage is applied during a forward pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// Ideal transfer regardless of the configured model; rail outputs.
    Digital,
    /// The network's configured inverter model; continuous outputs.
    Analog,
}

/// A stuck-at fault forcing a cell's output to one rail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultKind {
    StuckHigh,
    StuckLow,
}

/// One divider-inverter cell: binary devices plus wiring into the previous
/// layer's signals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub input_devices: Vec<DeviceState>,
    pub reference_device: DeviceState,
    pub source_indices: Vec<usize>,
}

impl Cell {
    pub fn fan_in(&self) -> usize {
        self.input_devices.len()
    }
}

/// Common-node voltage of a divider with explicit conductances; the
/// reference conductance ties the node to ground.
fn millman(voltages: &[f64], conductances: &[f64], g_ref: f64) -> f64 {
    let mut num = 0.0;
    let mut den = g_ref;
    for (&v, &g) in voltages.iter().zip(conductances) {
        num += g * v;
        den += g;
    }
    num / den
}

/// Node voltage of a cell divider: conductance-weighted average of the input
/// voltages, loaded by the reference device to ground.
///
/// Returns `sum(g_i * v_i) / (sum(g_i) + g_ref)`, which lies in `[0, vdd]`
/// for inputs in `[0, vdd]` and is monotone in every input.
pub fn node_voltage(
    input_voltages: &[f64],
    input_devices: &[DeviceState],
    reference_device: DeviceState,
    params: &CircuitParams,
) -> Result<f64, ModelError> {
    if input_voltages.is_empty() {
        return Err(ModelError::LengthMismatch("no divider inputs".into()));
    }
    if input_voltages.len() != input_devices.len() {
        return Err(ModelError::LengthMismatch(format!(
            "{} voltages vs {} devices",
            input_voltages.len(),
            input_devices.len()
        )));
    }
    for &v in input_voltages {
        if !v.is_finite() {
            return Err(ModelError::NonFiniteVoltage);
        }
        if v < 0.0 || v > params.vdd {
            return Err(ModelError::VoltageOutOfRange {
                value: v,
                vdd: params.vdd,
            });
        }
    }
    let conductances: Vec<f64> = input_devices.iter().map(|&d| params.conductance(d)).collect();
    Ok(millman(
        input_voltages,
        &conductances,
        params.conductance(reference_device),
    ))
}

/// Inverter output for node voltage `v`.
pub fn inverter_transfer(
    v: f64,
    model: &InverterModel,
    params: &CircuitParams,
) -> Result<f64, ModelError> {
    if !v.is_finite() {
        return Err(ModelError::NonFiniteVoltage);
    }
    if v < 0.0 || v > params.vdd {
        return Err(ModelError::VoltageOutOfRange {
            value: v,
            vdd: params.vdd,
        });
    }
    Ok(transfer_unchecked(v, model, params))
}

fn transfer_unchecked(v: f64, model: &InverterModel, params: &CircuitParams) -> f64 {
    match *model {
        InverterModel::Ideal => {
            if v < params.vth {
                params.vdd
            } else {
                0.0
            }
        }
        InverterModel::Sigmoid { gain } => {
            params.vdd / (1.0 + (gain * (v - params.vth) / params.vdd).exp())
        }
    }
}

/// Single-cell forward pass: divider node then inverter.
///
/// `Digital` applies the ideal transfer regardless of `inverter`; `Analog`
/// applies the configured model.
pub fn cell_forward(
    cell: &Cell,
    upstream_voltages: &[f64],
    mode: EvalMode,
    params: &CircuitParams,
    inverter: &InverterModel,
) -> Result<f64, ModelError> {
    if cell.source_indices.len() != cell.fan_in() {
        return Err(ModelError::LengthMismatch(format!(
            "cell wires {} sources but has {} devices",
            cell.source_indices.len(),
            cell.fan_in()
        )));
    }
    let gathered: Vec<f64> = cell
        .source_indices
        .iter()
        .map(|&src| {
            upstream_voltages.get(src).copied().ok_or_else(|| {
                ModelError::LengthMismatch(format!(
                    "source {src} outside {} upstream signals",
                    upstream_voltages.len()
                ))
            })
        })
        .collect::<Result<_, _>>()?;
    let node = node_voltage(&gathered, &cell.input_devices, cell.reference_device, params)?;
    let model = match mode {
        EvalMode::Digital => &InverterModel::Ideal,
        EvalMode::Analog => inverter,
    };
    Ok(transfer_unchecked(node, model, params))
}

/// Per-cell record from a traced forward pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellTrace {
    /// Divider common-node voltage.
    pub node_voltage: f64,
    /// Post-inverter (or fault-forced) output voltage.
    pub output: f64,
}

/// Full forward pass record.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalTrace {
    /// One entry per cell, in canonical (layer, cell) order.
    pub cells: Vec<CellTrace>,
    /// Final-layer bits: output voltage compared against `vdd / 2`.
    pub output_bits: Vec<bool>,
}

/// Node voltage and signed threshold margin of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMargin {
    pub node_voltage: f64,
    /// `node_voltage - vth`; negative means the cell outputs bit 1.
    pub margin: f64,
}

/// A tree topology with one binary state per device: the trainable artifact.
///
/// `conductances`, when present, override the state-derived device
/// conductances (used for perturbed evaluation); `faults` pin individual
/// cell outputs to a rail. Both are evaluation-time state, not part of the
/// persisted network description, and both default to absent.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryNetwork {
    pub topology: TreeTopology,
    /// All cells in layer order; wiring mirrors the topology.
    pub cells: Vec<Cell>,
    pub params: CircuitParams,
    pub inverter: InverterModel,
    /// Optional per-device continuous conductances, canonical device order.
    pub conductances: Option<Vec<f64>>,
    /// Optional per-cell stuck-at faults.
    pub faults: Vec<Option<FaultKind>>,
}

impl MemoryNetwork {
    /// A network over `topology` with every device in the given state.
    pub fn uniform(
        topology: TreeTopology,
        state: DeviceState,
        params: CircuitParams,
        inverter: InverterModel,
    ) -> Result<Self, ModelError> {
        let bits = vec![state.bit(); topology.n_device_bits()];
        Self::from_bits(topology, &bits, params, inverter)
    }

    /// A network whose device states are taken from `bits` in canonical
    /// layout: layer order, cell order within the layer, input devices in
    /// source order, then the reference device.
    pub fn from_bits(
        topology: TreeTopology,
        bits: &[bool],
        params: CircuitParams,
        inverter: InverterModel,
    ) -> Result<Self, ModelError> {
        topology.validate()?;
        params.validate()?;
        inverter.validate()?;
        if bits.len() != topology.n_device_bits() {
            return Err(ModelError::LengthMismatch(format!(
                "{} state bits for a topology with {} devices",
                bits.len(),
                topology.n_device_bits()
            )));
        }
        let mut cells = Vec::with_capacity(topology.n_cells());
        let mut cursor = 0;
        for layer in &topology.layers {
            for sources in &layer.cells {
                let fan_in = sources.len();
                let input_devices = bits[cursor..cursor + fan_in]
                    .iter()
                    .map(|&b| DeviceState::from_bit(b))
                    .collect();
                let reference_device = DeviceState::from_bit(bits[cursor + fan_in]);
                cursor += fan_in + 1;
                cells.push(Cell {
                    input_devices,
                    reference_device,
                    source_indices: sources.clone(),
                });
            }
        }
        let n_cells = cells.len();
        Ok(MemoryNetwork {
            topology,
            cells,
            params,
            inverter,
            conductances: None,
            faults: vec![None; n_cells],
        })
    }

    /// Device state bits in canonical layout.
    pub fn state_bits(&self) -> Vec<bool> {
        let mut bits = Vec::with_capacity(self.topology.n_device_bits());
        for cell in &self.cells {
            bits.extend(cell.input_devices.iter().map(|d| d.bit()));
            bits.push(cell.reference_device.bit());
        }
        bits
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_devices(&self) -> usize {
        self.topology.n_device_bits()
    }

    /// Effective conductance of device `index` (canonical order): the
    /// override when present, otherwise the state conductance.
    pub fn device_conductance(&self, index: usize, state: DeviceState) -> f64 {
        match &self.conductances {
            Some(overrides) => overrides[index],
            None => self.params.conductance(state),
        }
    }

    /// State-derived conductances for every device in canonical order.
    pub fn nominal_conductances(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_devices());
        for cell in &self.cells {
            out.extend(cell.input_devices.iter().map(|&d| self.params.conductance(d)));
            out.push(self.params.conductance(cell.reference_device));
        }
        out
    }

    /// Effective conductances (overrides when present) in canonical order.
    pub fn effective_conductances(&self) -> Vec<f64> {
        match &self.conductances {
            Some(overrides) => overrides.clone(),
            None => self.nominal_conductances(),
        }
    }

    /// Evaluates the network bottom-up and returns the output bits.
    pub fn forward(&self, input_bits: &[bool], mode: EvalMode) -> Result<Vec<bool>, ModelError> {
        Ok(self.forward_trace(input_bits, mode)?.output_bits)
    }

    /// Evaluates the network bottom-up, recording every cell's node voltage
    /// and output.
    pub fn forward_trace(
        &self,
        input_bits: &[bool],
        mode: EvalMode,
    ) -> Result<EvalTrace, ModelError> {
        if input_bits.len() != self.topology.n_inputs {
            return Err(ModelError::LengthMismatch(format!(
                "{} input bits for a {}-input network",
                input_bits.len(),
                self.topology.n_inputs
            )));
        }
        let vdd = self.params.vdd;
        let mut traces = Vec::with_capacity(self.n_cells());
        let mut signals: Vec<f64> = Vec::with_capacity(self.topology.n_padded_inputs());
        signals.extend(input_bits.iter().map(|&b| if b { vdd } else { 0.0 }));

        let mut cell_index = 0;
        let mut device_index = 0;
        for layer in &self.topology.layers {
            // Constant-0 pad lines complete the layer's input domain.
            signals.resize(layer.padded_inputs, 0.0);
            let mut outputs = Vec::with_capacity(layer.width());
            for _ in 0..layer.width() {
                let cell = &self.cells[cell_index];
                let mut num = 0.0;
                let mut den = 0.0;
                for (slot, &src) in cell.source_indices.iter().enumerate() {
                    let g = self.device_conductance(device_index + slot, cell.input_devices[slot]);
                    num += g * signals[src];
                    den += g;
                }
                let g_ref =
                    self.device_conductance(device_index + cell.fan_in(), cell.reference_device);
                let node = num / (den + g_ref);
                let output = match self.faults[cell_index] {
                    Some(FaultKind::StuckHigh) => vdd,
                    Some(FaultKind::StuckLow) => 0.0,
                    None => {
                        let model = match mode {
                            EvalMode::Digital => &InverterModel::Ideal,
                            EvalMode::Analog => &self.inverter,
                        };
                        transfer_unchecked(node, model, &self.params)
                    }
                };
                traces.push(CellTrace {
                    node_voltage: node,
                    output,
                });
                outputs.push(output);
                cell_index += 1;
                device_index += cell.fan_in() + 1;
            }
            signals = outputs;
        }

        let half = vdd / 2.0;
        let output_bits = signals.iter().map(|&v| v > half).collect();
        Ok(EvalTrace {
            cells: traces,
            output_bits,
        })
    }

    /// Digital node voltage and signed margin `v - vth` for every cell.
    ///
    /// On fault-free networks the margins determine the bits exactly:
    /// a cell outputs bit 1 if and only if its margin is negative.
    pub fn margin_profile(&self, input_bits: &[bool]) -> Result<Vec<CellMargin>, ModelError> {
        let trace = self.forward_trace(input_bits, EvalMode::Digital)?;
        Ok(trace
            .cells
            .iter()
            .map(|c| CellMargin {
                node_voltage: c.node_voltage,
                margin: c.node_voltage - self.params.vth,
            })
            .collect())
    }

    /// Sum of final-layer absolute margins, the classifier tie-break signal.
    pub fn output_margin_sum(&self, input_bits: &[bool]) -> Result<f64, ModelError> {
        let margins = self.margin_profile(input_bits)?;
        let n_out = self.topology.n_outputs;
        Ok(margins[margins.len() - n_out..]
            .iter()
            .map(|m| m.margin.abs())
            .sum())
    }

    /// Layer index of each cell, canonical order.
    pub fn cell_layers(&self) -> Vec<usize> {
        let mut layers = Vec::with_capacity(self.n_cells());
        for (index, layer) in self.topology.layers.iter().enumerate() {
            layers.extend(std::iter::repeat(index).take(layer.width()));
        }
        layers
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> CircuitParams {
        CircuitParams::default()
    }

    fn single_cell_net(
        fan_in: usize,
        bits: &[bool],
        inverter: InverterModel,
    ) -> MemoryNetwork {
        let topology = build_tree_topology(fan_in, fan_in.max(1), 1).unwrap();
        MemoryNetwork::from_bits(topology, bits, params(), inverter).unwrap()
    }

    #[test]
    fn node_voltage_grounded_divider_is_zero() {
        let v = node_voltage(
            &[0.0, 0.0, 0.0],
            &[DeviceState::On, DeviceState::On, DeviceState::Off],
            DeviceState::On,
            &params(),
        )
        .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn node_voltage_symmetric_divider() {
        let v = node_voltage(&[1.0], &[DeviceState::On], DeviceState::On, &params()).unwrap();
        assert_relative_eq!(v, 0.5);
    }

    #[test]
    fn node_voltage_three_input_hand_value() {
        // (1*1 + 1*0 + 1*1) / (1 + 1 + 1 + 1) = 0.5 by nodal analysis.
        let v = node_voltage(
            &[1.0, 0.0, 1.0],
            &[DeviceState::On, DeviceState::On, DeviceState::On],
            DeviceState::On,
            &params(),
        )
        .unwrap();
        assert_relative_eq!(v, 0.5);
    }

    #[test]
    fn node_voltage_rejects_bad_inputs() {
        let p = params();
        assert!(matches!(
            node_voltage(&[0.0, 1.0], &[DeviceState::On], DeviceState::On, &p),
            Err(ModelError::LengthMismatch(_))
        ));
        assert!(matches!(
            node_voltage(&[1.5], &[DeviceState::On], DeviceState::On, &p),
            Err(ModelError::VoltageOutOfRange { .. })
        ));
        assert!(matches!(
            node_voltage(&[f64::NAN], &[DeviceState::On], DeviceState::On, &p),
            Err(ModelError::NonFiniteVoltage)
        ));
        assert!(matches!(
            node_voltage(&[], &[], DeviceState::On, &p),
            Err(ModelError::LengthMismatch(_))
        ));
    }

    #[test]
    fn ideal_inverter_rails() {
        let p = params();
        assert_eq!(inverter_transfer(0.3, &InverterModel::Ideal, &p).unwrap(), 1.0);
        assert_eq!(inverter_transfer(0.7, &InverterModel::Ideal, &p).unwrap(), 0.0);
    }

    #[test]
    fn sigmoid_midpoint_symmetry() {
        let p = params();
        for gain in [0.5, 2.0, 50.0, 1e6] {
            let out = inverter_transfer(p.vth, &InverterModel::Sigmoid { gain }, &p).unwrap();
            assert_relative_eq!(out, 0.5 * p.vdd);
        }
    }

    #[test]
    fn sigmoid_strictly_decreasing() {
        let p = params();
        let model = InverterModel::Sigmoid { gain: 7.0 };
        let mut last = f64::INFINITY;
        for step in 0..=20 {
            let v = p.vdd * step as f64 / 20.0;
            let out = inverter_transfer(v, &model, &p).unwrap();
            assert!(out < last);
            assert!((0.0..=p.vdd).contains(&out));
            last = out;
        }
    }

    #[test]
    fn inverter_rejects_out_of_range() {
        let p = params();
        assert!(matches!(
            inverter_transfer(-0.1, &InverterModel::Ideal, &p),
            Err(ModelError::VoltageOutOfRange { .. })
        ));
    }

    #[test]
    fn cell_forward_inverts_ground() {
        let net = single_cell_net(3, &[true, true, true, true], InverterModel::Ideal);
        let out = cell_forward(
            &net.cells[0],
            &[0.0, 0.0, 0.0],
            EvalMode::Digital,
            &net.params,
            &net.inverter,
        )
        .unwrap();
        assert_eq!(out, 1.0);
    }

    #[test]
    fn cell_forward_six_high_inputs() {
        // Node sits at 6/7 of vdd, above threshold, so the output is 0.
        let net = single_cell_net(6, &[true; 7], InverterModel::Ideal);
        let out = cell_forward(
            &net.cells[0],
            &[1.0; 6],
            EvalMode::Digital,
            &net.params,
            &net.inverter,
        )
        .unwrap();
        assert_eq!(out, 0.0);
    }

    #[test]
    fn digital_mode_ignores_configured_inverter() {
        let net = single_cell_net(2, &[true, true, true], InverterModel::Sigmoid { gain: 2.0 });
        let digital = cell_forward(
            &net.cells[0],
            &[0.0, 0.0],
            EvalMode::Digital,
            &net.params,
            &net.inverter,
        )
        .unwrap();
        assert_eq!(digital, 1.0);
        let analog = cell_forward(
            &net.cells[0],
            &[0.0, 0.0],
            EvalMode::Analog,
            &net.params,
            &net.inverter,
        )
        .unwrap();
        assert!(analog < 1.0 && analog > 0.5);
    }

    #[test]
    fn analog_threshold_matches_digital_per_cell() {
        // Exhaustive over states and input patterns for a 3-input cell.
        let p = params();
        for state_bits in 0..16u32 {
            let bits: Vec<bool> = (0..4).map(|b| state_bits >> b & 1 == 1).collect();
            let net = single_cell_net(3, &bits, InverterModel::Ideal);
            for pattern in 0..8u32 {
                let inputs: Vec<f64> =
                    (0..3).map(|b| if pattern >> b & 1 == 1 { 1.0 } else { 0.0 }).collect();
                let digital = cell_forward(
                    &net.cells[0],
                    &inputs,
                    EvalMode::Digital,
                    &p,
                    &InverterModel::Ideal,
                )
                .unwrap();
                for gain in [0.3, 1.0, 50.0, 1e6] {
                    let analog = cell_forward(
                        &net.cells[0],
                        &inputs,
                        EvalMode::Analog,
                        &p,
                        &InverterModel::Sigmoid { gain },
                    )
                    .unwrap();
                    assert_eq!(analog > 0.5, digital > 0.5, "gain {gain} pattern {pattern}");
                }
            }
        }
    }

    #[test]
    fn single_cell_net_inverts_all_zero_input() {
        let net = single_cell_net(6, &[true; 7], InverterModel::Ideal);
        let bits = net.forward(&[false; 6], EvalMode::Digital).unwrap();
        assert_eq!(bits, vec![true]);
    }

    #[test]
    fn forward_rejects_wrong_input_width() {
        let net = single_cell_net(6, &[true; 7], InverterModel::Ideal);
        assert!(matches!(
            net.forward(&[false; 5], EvalMode::Digital),
            Err(ModelError::LengthMismatch(_))
        ));
    }

    #[test]
    fn analog_high_gain_limit_matches_digital() {
        let topology = build_tree_topology(36, 6, 1).unwrap();
        let bits: Vec<bool> = (0..topology.n_device_bits()).map(|i| i % 3 != 1).collect();
        let net = MemoryNetwork::from_bits(
            topology,
            &bits,
            params(),
            InverterModel::Sigmoid { gain: 1e6 },
        )
        .unwrap();
        for pattern in 0..32u64 {
            let input: Vec<bool> = (0..36).map(|i| pattern >> (i % 6) & 1 == 1).collect();
            let digital = net.forward(&input, EvalMode::Digital).unwrap();
            let analog = net.forward(&input, EvalMode::Analog).unwrap();
            assert_eq!(digital, analog);
        }
    }

    #[test]
    fn margins_agree_with_bits() {
        let topology = build_tree_topology(36, 6, 1).unwrap();
        let bits: Vec<bool> = (0..topology.n_device_bits()).map(|i| i % 2 == 0).collect();
        let net =
            MemoryNetwork::from_bits(topology, &bits, params(), InverterModel::Ideal).unwrap();
        let input: Vec<bool> = (0..36).map(|i| i % 5 < 2).collect();
        let margins = net.margin_profile(&input).unwrap();
        let trace = net.forward_trace(&input, EvalMode::Digital).unwrap();
        assert_eq!(margins.len(), net.n_cells());
        for (margin, cell) in margins.iter().zip(&trace.cells) {
            let bit = cell.output > net.params.vdd / 2.0;
            assert_eq!(margin.margin < 0.0, bit);
            assert_relative_eq!(margin.node_voltage, cell.node_voltage);
        }
    }

    #[test]
    fn margin_of_first_layer_cell_on_zero_input_is_negative_vth() {
        let net = single_cell_net(6, &[true; 7], InverterModel::Ideal);
        let margins = net.margin_profile(&[false; 6]).unwrap();
        assert_eq!(margins[0].node_voltage, 0.0);
        assert_relative_eq!(margins[0].margin, -net.params.vth);
    }

    #[test]
    fn from_bits_rejects_wrong_length() {
        let topology = build_tree_topology(6, 6, 1).unwrap();
        let err = MemoryNetwork::from_bits(topology, &[true; 6], params(), InverterModel::Ideal);
        assert!(matches!(err, Err(ModelError::LengthMismatch(_))));
    }

    #[test]
    fn state_bits_round_trip() {
        let topology = build_tree_topology(36, 6, 1).unwrap();
        let bits: Vec<bool> = (0..topology.n_device_bits()).map(|i| i % 7 < 3).collect();
        let net =
            MemoryNetwork::from_bits(topology, &bits, params(), InverterModel::Ideal).unwrap();
        assert_eq!(net.state_bits(), bits);
    }

    #[test]
    fn digital_forward_is_pure_across_threads() {
        let topology = build_tree_topology(36, 6, 1).unwrap();
        let bits: Vec<bool> = (0..topology.n_device_bits()).map(|i| i % 3 == 0).collect();
        let net = std::sync::Arc::new(
            MemoryNetwork::from_bits(topology, &bits, params(), InverterModel::Ideal).unwrap(),
        );
        let input: Vec<bool> = (0..36).map(|i| i % 4 == 0).collect();
        let reference = net.forward(&input, EvalMode::Digital).unwrap();
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let net = net.clone();
                let input = input.clone();
                std::thread::spawn(move || net.forward(&input, EvalMode::Digital).unwrap())
            })
            .collect();
        for handle in handles {
            assert_eq!(handle.join().unwrap(), reference);
        }
    }

    #[test]
    fn params_validation() {
        assert!(params().validate().is_ok());
        let bad = CircuitParams {
            vth: 1.5,
            ..params()
        };
        assert!(bad.validate().is_err());
        let bad = CircuitParams {
            g_off: 0.0,
            ..params()
        };
        assert!(bad.validate().is_err());
    }
}
