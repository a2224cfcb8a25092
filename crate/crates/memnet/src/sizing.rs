//! Hardware sizing arithmetic: inverter counts, memory-bit counts, input
//! resolution, and memory-to-capacity extrapolation.
//!
//! Bit accounting is one bit per device, where a cell with fan-in `f` has
//! `f` input devices plus one reference device. The canonical family is the
//! fan-in 6, 12-output tree; its closed forms live here next to the
//! topology-driven counters so they can check each other.

use crate::model::TreeTopology;
use std::fmt;
use thiserror::Error;

/// Fan-in of the canonical family.
const CANONICAL_FAN_IN: u64 = 6;
/// Output count of the canonical family.
const CANONICAL_OUTPUTS: u64 = 12;
/// Largest input count a single canonical layer handles (12 cells of
/// fan-in 6).
const SINGLE_LAYER_CAP: u64 = CANONICAL_FAN_IN * CANONICAL_OUTPUTS;
/// Exact bit cost of the smallest canonical network (L = 1, N = 36).
const MIN_CANONICAL_BITS: u64 = 48;
/// Bit cost of a single cell, the smallest sizable network.
const MIN_BITS: u64 = 7;

#[derive(Error, Debug)]
pub enum SizingError {
    #[error("input resolution needs at least 1 input")]
    ZeroInputs,
    #[error("memory_bits {0} is below one cell ({MIN_BITS} bits)")]
    BelowOneCell(u64),
    #[error("memory_bits {0} is below the smallest canonical network ({MIN_CANONICAL_BITS} bits)")]
    BelowCanonicalMinimum(u64),
    #[error("{0} is not a canonical input count 36 * 6^(L-1)")]
    NotCanonical(u64),
}

/// Exact rational `1/denominator`, the resolution of an n-input network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InputResolution {
    pub denominator: u64,
}

impl fmt::Display for InputResolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1/{}", self.denominator)
    }
}

/// How `extrapolate_capacity` converts memory bits to input capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityMode {
    /// Asymptotic 7/5 bits per input of the canonical family:
    /// `max_inputs = floor(5 * memory_bits / 7)`.
    PaperRatio,
    /// Largest canonical `N = 36 * 6^(L-1)` whose exact bit cost
    /// `(7N - 12) / 5` fits in the budget.
    Canonical,
}

/// Sizing figures for one concrete topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizingReport {
    pub n_inputs: usize,
    pub n_layers: usize,
    pub inverters: usize,
    pub memory_bits: usize,
    pub resolution: InputResolution,
}

/// Input capacity implied by a memory budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CapacityReport {
    pub memory_bits: u64,
    pub mode: CapacityMode,
    pub max_inputs: u64,
    pub layers: u32,
    pub resolution: InputResolution,
}

impl CapacityReport {
    /// Informational line making the layer requirement checkable: the
    /// capacity ceiling of a tree one layer shallower.
    pub fn layer_bound_note(&self) -> Option<String> {
        if self.layers < 2 {
            return None;
        }
        let shallower = self.layers - 1;
        let cap = if shallower == 1 {
            SINGLE_LAYER_CAP
        } else {
            canonical_inputs(shallower).expect("capacity fit in u64, so must its shallower cap")
        };
        Some(format!(
            "{} inputs exceed the {}-input cap of a {}-layer tree; {} layers required",
            self.max_inputs, cap, shallower, self.layers
        ))
    }
}

/// Total cell count: one inverter per cell.
pub fn count_inverters(topology: &TreeTopology) -> usize {
    topology.n_cells()
}

/// Total device count: per cell, one bit per input device plus one for the
/// reference device.
pub fn count_memory_bits(topology: &TreeTopology) -> usize {
    topology.n_device_bits()
}

/// Exact resolution `1/n_inputs`.
pub fn input_resolution(n_inputs: u64) -> Result<InputResolution, SizingError> {
    if n_inputs == 0 {
        return Err(SizingError::ZeroInputs);
    }
    Ok(InputResolution {
        denominator: n_inputs,
    })
}

/// All sizing figures for a topology.
pub fn sizing_report(topology: &TreeTopology) -> SizingReport {
    SizingReport {
        n_inputs: topology.n_inputs,
        n_layers: topology.n_layers(),
        inverters: count_inverters(topology),
        memory_bits: count_memory_bits(topology),
        resolution: InputResolution {
            denominator: topology.n_inputs as u64,
        },
    }
}

/// Layers a canonical (fan-in 6, 12-output) tree needs for `n_inputs`:
/// 1 through the single-layer cap of 72, else the smallest `L` with
/// `36 * 6^(L-1) >= n_inputs`.
pub fn layers_required(n_inputs: u64) -> u32 {
    if n_inputs <= SINGLE_LAYER_CAP {
        return 1;
    }
    let mut layers = 1u32;
    let mut width = 36u128;
    while width < n_inputs as u128 {
        width *= 6;
        layers += 1;
    }
    layers
}

/// Canonical input count `36 * 6^(L-1)`, `None` when it overflows `u64`.
pub fn canonical_inputs(layers: u32) -> Option<u64> {
    if layers == 0 {
        return None;
    }
    let mut n = 36u64;
    for _ in 1..layers {
        n = n.checked_mul(6)?;
    }
    Some(n)
}

fn is_canonical(n_inputs: u64) -> bool {
    let mut n = 36u64;
    loop {
        if n == n_inputs {
            return true;
        }
        n = match n.checked_mul(6) {
            Some(next) if next <= n_inputs => next,
            _ => return false,
        };
    }
}

/// Closed-form inverter count `(N + 24) / 5` of the canonical tree over
/// `n_inputs = N`, exact for every canonical `N`.
pub fn canonical_inverters(n_inputs: u64) -> Result<u64, SizingError> {
    if !is_canonical(n_inputs) {
        return Err(SizingError::NotCanonical(n_inputs));
    }
    Ok((n_inputs + 24) / 5)
}

/// Closed-form memory-bit count `(7N - 12) / 5` of the canonical tree over
/// `n_inputs = N`, exact for every canonical `N`.
pub fn canonical_memory_bits(n_inputs: u64) -> Result<u64, SizingError> {
    if !is_canonical(n_inputs) {
        return Err(SizingError::NotCanonical(n_inputs));
    }
    // Divide in u128: 7N can pass u64::MAX even when the bit count fits.
    Ok(((7 * n_inputs as u128 - 12) / 5) as u64)
}

/// Largest input count a memory budget supports.
pub fn extrapolate_capacity(
    memory_bits: u64,
    mode: CapacityMode,
) -> Result<CapacityReport, SizingError> {
    if memory_bits < MIN_BITS {
        return Err(SizingError::BelowOneCell(memory_bits));
    }
    let max_inputs = match mode {
        CapacityMode::PaperRatio => (5 * memory_bits as u128 / 7) as u64,
        CapacityMode::Canonical => {
            if memory_bits < MIN_CANONICAL_BITS {
                return Err(SizingError::BelowCanonicalMinimum(memory_bits));
            }
            // Largest canonical N with (7N - 12) / 5 <= memory_bits.
            let mut best = 36u64;
            let mut next = 36u128 * 6;
            while next <= u64::MAX as u128
                && (7 * next - 12) / 5 <= memory_bits as u128
            {
                best = next as u64;
                next *= 6;
            }
            best
        }
    };
    Ok(CapacityReport {
        memory_bits,
        mode,
        max_inputs,
        layers: layers_required(max_inputs),
        resolution: input_resolution(max_inputs)?,
    })
}
