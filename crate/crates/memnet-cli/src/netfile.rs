//! Network persistence: human-readable JSON, format_version 1.
//!
//! A file stores the tree-builder parameters (enough to reconstruct the
//! exact topology), the circuit parameters, the inverter model, the
//! canonical device-state bit string, and optionally per-device continuous
//! conductances for perturbed networks. Layer widths are stored redundantly
//! and checked on load. Serialization is canonical: saving the same
//! network twice yields byte-identical files. Injected faults are
//! transient and never persisted.

use crate::error::{data, internal, HarnessError};
use memnet::model::{
    build_tree_topology, CircuitParams, InverterModel, MemoryNetwork,
};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum InverterSpec {
    Ideal,
    Sigmoid { gain: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    format_version: u32,
    n_inputs: usize,
    fan_in_max: usize,
    n_outputs: usize,
    layer_widths: Vec<usize>,
    vdd: f64,
    vth: f64,
    g_on: f64,
    g_off: f64,
    inverter: InverterSpec,
    states: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    conductances: Option<Vec<f64>>,
}

/// `fan_in_max` is the builder parameter the topology was grown with; it
/// is not recoverable from the wiring alone.
pub fn save_network(
    net: &MemoryNetwork,
    fan_in_max: usize,
    path: &Path,
) -> Result<(), HarnessError> {
    if net.faults.iter().any(|f| f.is_some()) {
        return Err(internal("refusing to save a network with injected faults"));
    }
    let rebuilt = build_tree_topology(net.topology.n_inputs, fan_in_max, net.topology.n_outputs)
        .map_err(|e| internal(format!("network topology is not reproducible: {e}")))?;
    if rebuilt != net.topology {
        return Err(internal(format!(
            "fan_in_max {fan_in_max} does not reproduce the network's topology"
        )));
    }
    let file = NetworkFile {
        format_version: FORMAT_VERSION,
        n_inputs: net.topology.n_inputs,
        fan_in_max,
        n_outputs: net.topology.n_outputs,
        layer_widths: net.topology.layer_widths(),
        vdd: net.params.vdd,
        vth: net.params.vth,
        g_on: net.params.g_on,
        g_off: net.params.g_off,
        inverter: match net.inverter {
            InverterModel::Ideal => InverterSpec::Ideal,
            InverterModel::Sigmoid { gain } => InverterSpec::Sigmoid { gain },
        },
        states: net
            .state_bits()
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect(),
        conductances: net.conductances.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file)
        .map_err(|e| internal(format!("serialize network: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| internal(format!("write network {}: {e}", path.display())))
}

pub fn load_network(path: &Path) -> Result<MemoryNetwork, HarnessError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path)
        .map_err(|e| data(format!("network {name}: {e}")))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| data(format!("network {name}: {e}")))?;
    let version = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| data(format!("network {name}: missing format_version")))?;
    if version != FORMAT_VERSION as u64 {
        return Err(data(format!(
            "network {name}: unsupported format_version {version}, this build reads {FORMAT_VERSION}"
        )));
    }
    let file: NetworkFile = serde_json::from_value(value)
        .map_err(|e| data(format!("network {name}: {e}")))?;
    let topology = build_tree_topology(file.n_inputs, file.fan_in_max, file.n_outputs)
        .map_err(|e| data(format!("network {name}: bad topology parameters: {e}")))?;
    if topology.layer_widths() != file.layer_widths {
        return Err(data(format!(
            "network {name}: layer_widths {:?} do not match the rebuilt topology {:?}",
            file.layer_widths,
            topology.layer_widths()
        )));
    }
    let bits = file
        .states
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(data(format!(
                "network {name}: states contains '{other}', expected 0 or 1"
            ))),
        })
        .collect::<Result<Vec<bool>, _>>()?;
    if bits.len() != topology.n_device_bits() {
        return Err(data(format!(
            "network {name}: {} state bits, topology needs {}",
            bits.len(),
            topology.n_device_bits()
        )));
    }
    let params = CircuitParams {
        vdd: file.vdd,
        vth: file.vth,
        g_on: file.g_on,
        g_off: file.g_off,
    };
    let inverter = match file.inverter {
        InverterSpec::Ideal => InverterModel::Ideal,
        InverterSpec::Sigmoid { gain } => InverterModel::Sigmoid { gain },
    };
    let mut net = MemoryNetwork::from_bits(topology, &bits, params, inverter)
        .map_err(|e| data(format!("network {name}: {e}")))?;
    if let Some(conductances) = file.conductances {
        if conductances.len() != net.n_devices() {
            return Err(data(format!(
                "network {name}: {} conductances, topology has {} devices",
                conductances.len(),
                net.n_devices()
            )));
        }
        if let Some(bad) = conductances.iter().find(|g| !g.is_finite() || **g <= 0.0) {
            return Err(data(format!(
                "network {name}: conductance {bad} is not a positive finite number"
            )));
        }
        net.conductances = Some(conductances);
    }
    Ok(net)
}
