//! Robustness analyses: conductance-tolerance stability, analog error
//! accumulation across layers, and stuck-at fault injection.
//!
//! Perturbation and fault injection return modified copies; the input
//! network is never touched. Monte Carlo trials derive their streams from
//! (master_seed, trial index), so sweeps are reproducible and
//! thread-count independent.

use crate::exec::map_indexed;
use crate::model::{EvalMode, FaultKind, InverterModel, MemoryNetwork, ModelError};
use crate::seeds::{derive_rng, tag};
use crate::trainer::{Dataset, TrainError};
use rand::distr::{Distribution, Uniform};
use thiserror::Error;

#[derive(Error, Debug)]
pub enum RobustnessError {
    #[error("epsilon {0} outside [0, 1)")]
    BadEpsilon(f64),
    #[error("fault rate {0} outside [0, 1]")]
    BadFaultRate(f64),
    #[error("no epsilon values given")]
    EmptyEpsilons,
    #[error("Monte Carlo needs at least 1 trial")]
    ZeroTrials,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] TrainError),
}

/// Multiplicative uniform conductance perturbation: each device conductance
/// is scaled by an independent draw from `[1 - epsilon, 1 + epsilon]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec {
    pub epsilon: f64,
}

impl PerturbationSpec {
    pub fn validate(&self) -> Result<(), RobustnessError> {
        if !(self.epsilon.is_finite() && (0.0..1.0).contains(&self.epsilon)) {
            return Err(RobustnessError::BadEpsilon(self.epsilon));
        }
        Ok(())
    }
}

/// Stuck-at faults on a fraction of cells, chosen uniformly without
/// replacement; every cell is eligible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultSpec {
    pub fault_rate: f64,
    pub kind: FaultKind,
}

impl FaultSpec {
    pub fn validate(&self) -> Result<(), RobustnessError> {
        if !(self.fault_rate.is_finite() && (0.0..=1.0).contains(&self.fault_rate)) {
            return Err(RobustnessError::BadFaultRate(self.fault_rate));
        }
        Ok(())
    }
}

/// Per-cell verdict of the analytic tolerance bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityFlag {
    GuaranteedStable,
    Uncertain,
}

/// A copy of `net` with every device conductance scaled by an independent
/// uniform draw from `[1 - epsilon, 1 + epsilon]`, stream derived from
/// `(master_seed, trial)`. Scaling applies to the current effective
/// conductances; states and topology are untouched. `epsilon = 0` returns
/// an identical network.
pub fn perturb(
    net: &MemoryNetwork,
    spec: &PerturbationSpec,
    master_seed: u64,
    trial: u64,
) -> Result<MemoryNetwork, RobustnessError> {
    spec.validate()?;
    let mut out = net.clone();
    if spec.epsilon == 0.0 {
        return Ok(out);
    }
    let mut rng = derive_rng(master_seed, &[tag::PERTURB_TRIAL, trial]);
    let factor = Uniform::new_inclusive(1.0 - spec.epsilon, 1.0 + spec.epsilon)
        .expect("validated epsilon gives a proper range");
    out.conductances = Some(
        net.effective_conductances()
            .into_iter()
            .map(|g| g * factor.sample(&mut rng))
            .collect(),
    );
    Ok(out)
}

/// Analytic per-cell stability verdict for one input pattern.
///
/// With every conductance scaled within `[1 - eps, 1 + eps]`, a cell's node
/// voltage `v` stays within `[v(1-eps)/(1+eps), v(1+eps)/(1-eps)]` as long
/// as its input voltages are unchanged. The cell is flagged
/// `GuaranteedStable` when that interval avoids `vth` AND every upstream
/// cell feeding it is itself guaranteed stable; the second condition is what
/// keeps the verdict sound, since an upstream flip moves this cell's inputs
/// by rail amounts the local interval does not cover. Primary inputs and
/// constant pad lines are exact, so first-layer cells need only the local
/// bound. `epsilon = 0` flags every cell.
pub fn stability_bound_check(
    net: &MemoryNetwork,
    input_bits: &[bool],
    epsilon: f64,
) -> Result<Vec<StabilityFlag>, RobustnessError> {
    PerturbationSpec { epsilon }.validate()?;
    let trace = net.forward_trace(input_bits, EvalMode::Digital)?;
    if epsilon == 0.0 {
        return Ok(vec![StabilityFlag::GuaranteedStable; net.n_cells()]);
    }
    let up = (1.0 + epsilon) / (1.0 - epsilon);
    let down = (1.0 - epsilon) / (1.0 + epsilon);
    let vth = net.params.vth;
    let mut flags = Vec::with_capacity(net.n_cells());
    let mut layer_base = 0;
    let mut prev_base = 0;
    let mut prev_width = 0;
    for layer in &net.topology.layers {
        for cell_offset in 0..layer.width() {
            let cell_index = layer_base + cell_offset;
            let v = trace.cells[cell_index].node_voltage;
            let local = v * up < vth || v * down > vth;
            let upstream_stable = net.cells[cell_index].source_indices.iter().all(|&src| {
                // Sources at or past the previous layer's width are primary
                // inputs or pad lines, exact under perturbation.
                prev_width == 0
                    || src >= prev_width
                    || flags[prev_base + src] == StabilityFlag::GuaranteedStable
            });
            flags.push(if local && upstream_stable {
                StabilityFlag::GuaranteedStable
            } else {
                StabilityFlag::Uncertain
            });
        }
        prev_base = layer_base;
        prev_width = layer.width();
        layer_base += layer.width();
    }
    Ok(flags)
}

/// One row of a sensitivity sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    /// Fraction of (trial, sample, output bit) triples differing from the
    /// nominal digital output.
    pub flip_rate: f64,
    /// Fraction of (trial, sample) pairs whose perturbed outputs match the
    /// dataset target exactly.
    pub accuracy: f64,
}

/// Monte Carlo conductance-tolerance sweep: for each epsilon, evaluates
/// `trials` perturbed copies on the whole dataset. Trial `t` of epsilon row
/// `e` uses the stream `(master_seed, e * trials + t)`; flip and match
/// counts aggregate as integers, so the result is reduction-order
/// independent.
pub fn sensitivity_sweep(
    net: &MemoryNetwork,
    data: &Dataset,
    epsilons: &[f64],
    trials: usize,
    master_seed: u64,
) -> Result<Vec<SweepRow>, RobustnessError> {
    if epsilons.is_empty() {
        return Err(RobustnessError::EmptyEpsilons);
    }
    if trials == 0 {
        return Err(RobustnessError::ZeroTrials);
    }
    data.check_against(&net.topology)?;
    for &epsilon in epsilons {
        PerturbationSpec { epsilon }.validate()?;
    }
    let nominal: Vec<Vec<bool>> = data
        .inputs
        .iter()
        .map(|input| net.forward(input, EvalMode::Digital))
        .collect::<Result<_, _>>()?;
    let n_outputs = net.topology.n_outputs;
    let mut rows = Vec::with_capacity(epsilons.len());
    for (eps_index, &epsilon) in epsilons.iter().enumerate() {
        let spec = PerturbationSpec { epsilon };
        let counts: Vec<Result<(u64, u64), RobustnessError>> = map_indexed(trials, |t| {
            let trial = (eps_index * trials + t) as u64;
            let perturbed = perturb(net, &spec, master_seed, trial)?;
            let mut flips = 0u64;
            let mut matches = 0u64;
            for (sample, input) in data.inputs.iter().enumerate() {
                let bits = perturbed.forward(input, EvalMode::Digital)?;
                flips += bits
                    .iter()
                    .zip(&nominal[sample])
                    .filter(|(a, b)| a != b)
                    .count() as u64;
                if bits == data.targets[sample] {
                    matches += 1;
                }
            }
            Ok((flips, matches))
        });
        let mut flips = 0u64;
        let mut matches = 0u64;
        for count in counts {
            let (f, m) = count?;
            flips += f;
            matches += m;
        }
        let pairs = (trials * data.len()) as f64;
        rows.push(SweepRow {
            epsilon,
            flip_rate: flips as f64 / (pairs * n_outputs as f64),
            accuracy: matches as f64 / pairs,
        });
    }
    Ok(rows)
}

/// A copy of `net` with `floor(fault_rate * cells)` distinct cells forced
/// to the spec's stuck rail, chosen uniformly from the stream derived from
/// `(master_seed, trial)`.
pub fn inject_faults(
    net: &MemoryNetwork,
    spec: &FaultSpec,
    master_seed: u64,
    trial: u64,
) -> Result<MemoryNetwork, RobustnessError> {
    spec.validate()?;
    let mut out = net.clone();
    let count = (spec.fault_rate * net.n_cells() as f64).floor() as usize;
    if count == 0 {
        return Ok(out);
    }
    let mut rng = derive_rng(master_seed, &[tag::FAULT_TRIAL, trial]);
    for index in rand::seq::index::sample(&mut rng, net.n_cells(), count) {
        out.faults[index] = Some(spec.kind);
    }
    Ok(out)
}

/// Analog-vs-digital mismatch rates for one inverter gain.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulationProfile {
    pub gain: f64,
    /// Mismatch rate per layer, in layer order.
    pub per_layer: Vec<f64>,
    /// Mismatch rate over all cells.
    pub overall: f64,
}

/// Bit mismatch between Analog evaluation at each gain and Digital
/// evaluation, per layer and overall. A cell's analog bit is its output
/// thresholded at `vdd / 2`; counts aggregate over all dataset samples.
pub fn accumulation_profile(
    net: &MemoryNetwork,
    data: &Dataset,
    gains: &[f64],
) -> Result<Vec<AccumulationProfile>, RobustnessError> {
    data.check_against(&net.topology)?;
    let half = net.params.vdd / 2.0;
    let widths: Vec<usize> = net.topology.layer_widths();
    let cell_layers = net.cell_layers();
    let mut profiles = Vec::with_capacity(gains.len());
    for &gain in gains {
        let mut analog_net = net.clone();
        analog_net.inverter = InverterModel::Sigmoid { gain };
        analog_net.inverter.validate()?;
        let per_sample: Vec<Result<Vec<u64>, RobustnessError>> =
            map_indexed(data.len(), |sample| {
                let digital = net.forward_trace(&data.inputs[sample], EvalMode::Digital)?;
                let analog = analog_net.forward_trace(&data.inputs[sample], EvalMode::Analog)?;
                let mut counts = vec![0u64; widths.len()];
                for (cell, (d, a)) in digital.cells.iter().zip(&analog.cells).enumerate() {
                    if (d.output > half) != (a.output > half) {
                        counts[cell_layers[cell]] += 1;
                    }
                }
                Ok(counts)
            });
        let mut totals = vec![0u64; widths.len()];
        for counts in per_sample {
            for (total, count) in totals.iter_mut().zip(counts?) {
                *total += count;
            }
        }
        let samples = data.len() as u64;
        let per_layer: Vec<f64> = totals
            .iter()
            .zip(&widths)
            .map(|(&mismatches, &width)| mismatches as f64 / (samples * width as u64) as f64)
            .collect();
        let overall =
            totals.iter().sum::<u64>() as f64 / (samples * net.n_cells() as u64) as f64;
        profiles.push(AccumulationProfile {
            gain,
            per_layer,
            overall,
        });
    }
    Ok(profiles)
}

/// Digital accuracy of a (possibly faulted or perturbed) network on a
/// dataset: fraction of samples whose outputs match the target exactly.
pub fn exact_match_accuracy(
    net: &MemoryNetwork,
    data: &Dataset,
) -> Result<f64, RobustnessError> {
    data.check_against(&net.topology)?;
    let mut matches = 0usize;
    for (input, target) in data.inputs.iter().zip(&data.targets) {
        if net.forward(input, EvalMode::Digital)? == *target {
            matches += 1;
        }
    }
    Ok(matches as f64 / data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_tree_topology, CircuitParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> CircuitParams {
        CircuitParams::default()
    }

    fn random_net(n_inputs: usize, n_outputs: usize, seed: u64) -> MemoryNetwork {
        let topology = build_tree_topology(n_inputs, 6, n_outputs).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits: Vec<bool> = (0..topology.n_device_bits())
            .map(|_| rng.random_bool(0.5))
            .collect();
        MemoryNetwork::from_bits(topology, &bits, params(), InverterModel::Ideal).unwrap()
    }

    fn random_inputs(n: usize, count: usize, seed: u64) -> Vec<Vec<bool>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| (0..n).map(|_| rng.random_bool(0.5)).collect())
            .collect()
    }

    #[test]
    fn perturb_zero_epsilon_is_identity() {
        let net = random_net(36, 1, 1);
        let out = perturb(&net, &PerturbationSpec { epsilon: 0.0 }, 9, 0).unwrap();
        assert_eq!(out, net);
    }

    #[test]
    fn perturb_stays_in_band_and_is_deterministic() {
        let net = random_net(36, 1, 2);
        let spec = PerturbationSpec { epsilon: 0.05 };
        let a = perturb(&net, &spec, 7, 3).unwrap();
        let b = perturb(&net, &spec, 7, 3).unwrap();
        assert_eq!(a, b);
        let c = perturb(&net, &spec, 7, 4).unwrap();
        assert_ne!(a.conductances, c.conductances);
        let nominal = net.nominal_conductances();
        let perturbed = a.conductances.as_ref().unwrap();
        assert_eq!(perturbed.len(), nominal.len());
        for (g, g0) in perturbed.iter().zip(&nominal) {
            let ratio = g / g0;
            assert!(ratio >= 0.95 && ratio <= 1.05, "ratio {ratio}");
        }
        // The source network is untouched.
        assert_eq!(net.conductances, None);
    }

    #[test]
    fn perturb_rejects_bad_epsilon() {
        let net = random_net(6, 1, 3);
        for epsilon in [-0.1, 1.0, 1.5, f64::NAN] {
            assert!(matches!(
                perturb(&net, &PerturbationSpec { epsilon }, 0, 0),
                Err(RobustnessError::BadEpsilon(_))
            ));
        }
    }

    #[test]
    fn zero_epsilon_flags_everything_stable() {
        let net = random_net(36, 1, 4);
        let input = vec![true; 36];
        let flags = stability_bound_check(&net, &input, 0.0).unwrap();
        assert!(flags
            .iter()
            .all(|&f| f == StabilityFlag::GuaranteedStable));
    }

    #[test]
    fn bound_arithmetic_on_known_node() {
        // Fan-in-1 cell with overrides g = 1.0, g_ref = 1.5: node is exactly
        // 0.4 for a high input. 0.4 * 1.05 / 0.95 < 0.5, so eps = 0.05 is
        // guaranteed; eps = 0.2 widens the interval past vth.
        let topology = build_tree_topology(1, 1, 1).unwrap();
        let mut net =
            MemoryNetwork::from_bits(topology, &[true, true], params(), InverterModel::Ideal)
                .unwrap();
        net.conductances = Some(vec![1.0, 1.5]);
        let trace = net.forward_trace(&[true], EvalMode::Digital).unwrap();
        assert!((trace.cells[0].node_voltage - 0.4).abs() < 1e-12);
        let flags = stability_bound_check(&net, &[true], 0.05).unwrap();
        assert_eq!(flags[0], StabilityFlag::GuaranteedStable);
        let flags = stability_bound_check(&net, &[true], 0.2).unwrap();
        assert_eq!(flags[0], StabilityFlag::Uncertain);
    }

    #[test]
    fn node_at_threshold_is_uncertain() {
        // Fan-in-1 cell, both devices ON: high input puts the node exactly
        // at vth.
        let topology = build_tree_topology(1, 1, 1).unwrap();
        let net =
            MemoryNetwork::from_bits(topology, &[true, true], params(), InverterModel::Ideal)
                .unwrap();
        let flags = stability_bound_check(&net, &[true], 0.01).unwrap();
        assert_eq!(flags[0], StabilityFlag::Uncertain);
    }

    #[test]
    fn uncertain_upstream_poisons_downstream() {
        // Two layers. The first-layer cell sits exactly at vth (uncertain
        // for any eps > 0); the final cell has a huge local margin but must
        // still be flagged uncertain because its input can flip by a rail.
        let topology = build_tree_topology(4, 2, 1).unwrap();
        assert_eq!(topology.layer_widths(), vec![2, 1]);
        let bits = vec![true; topology.n_device_bits()];
        let mut net =
            MemoryNetwork::from_bits(topology, &bits, params(), InverterModel::Ideal).unwrap();
        // Zeroing cell 0's reference conductance pins its node at exactly
        // 0.5 for input (1, 0): num = 1, den = 1 + 1 + 0.
        let mut overrides = net.nominal_conductances();
        overrides[2] = 0.0;
        net.conductances = Some(overrides);
        let input = vec![true, false, false, false];
        let trace = net.forward_trace(&input, EvalMode::Digital).unwrap();
        assert_eq!(trace.cells[0].node_voltage, 0.5);
        let flags = stability_bound_check(&net, &input, 0.05).unwrap();
        assert_eq!(flags[0], StabilityFlag::Uncertain);
        // Final cell margin is large, but upstream uncertainty wins.
        assert_eq!(flags[2], StabilityFlag::Uncertain);
    }

    #[test]
    fn guaranteed_stable_cells_never_flip() {
        // Bound soundness at unit scale; the acceptance suite scales the
        // same check past 1e5 triples.
        let mut checked = 0u64;
        for net_seed in 0..6 {
            let net = random_net(36, 2, 100 + net_seed);
            for (input_index, input) in random_inputs(36, 8, 200 + net_seed).iter().enumerate() {
                for (e, &epsilon) in [0.02, 0.05, 0.1].iter().enumerate() {
                    let flags = stability_bound_check(&net, input, epsilon).unwrap();
                    let nominal = net.forward_trace(input, EvalMode::Digital).unwrap();
                    let spec = PerturbationSpec { epsilon };
                    for trial in 0..10 {
                        let trial_tag = (input_index * 1000 + e * 100 + trial) as u64;
                        let perturbed = perturb(&net, &spec, net_seed, trial_tag).unwrap();
                        let trace = perturbed.forward_trace(input, EvalMode::Digital).unwrap();
                        let half = net.params.vdd / 2.0;
                        for (cell, flag) in flags.iter().enumerate() {
                            if *flag == StabilityFlag::GuaranteedStable {
                                assert_eq!(
                                    trace.cells[cell].output > half,
                                    nominal.cells[cell].output > half,
                                    "net {net_seed} input {input_index} eps {epsilon} cell {cell}"
                                );
                                checked += 1;
                            }
                        }
                    }
                }
            }
        }
        assert!(checked > 5_000, "only {checked} stable-cell checks ran");
    }

    #[test]
    fn sweep_zero_epsilon_has_zero_flips() {
        let net = random_net(36, 1, 5);
        let inputs = random_inputs(36, 16, 6);
        let targets = inputs
            .iter()
            .map(|input| net.forward(input, EvalMode::Digital).unwrap())
            .collect();
        let data = Dataset::new(inputs, targets).unwrap();
        let rows = sensitivity_sweep(&net, &data, &[0.0, 0.05], 20, 11).unwrap();
        assert_eq!(rows[0].flip_rate, 0.0);
        assert_eq!(rows[0].accuracy, 1.0);
        assert!(rows[1].flip_rate >= 0.0);
        let again = sensitivity_sweep(&net, &data, &[0.0, 0.05], 20, 11).unwrap();
        assert_eq!(rows, again);
    }

    #[test]
    fn sweep_input_validation() {
        let net = random_net(6, 1, 7);
        let data = Dataset::new(vec![vec![true; 6]], vec![vec![true]]).unwrap();
        assert!(matches!(
            sensitivity_sweep(&net, &data, &[], 5, 0),
            Err(RobustnessError::EmptyEpsilons)
        ));
        assert!(matches!(
            sensitivity_sweep(&net, &data, &[0.05], 0, 0),
            Err(RobustnessError::ZeroTrials)
        ));
    }

    #[test]
    fn fault_injection_counts_and_determinism() {
        let net = random_net(36, 1, 8);
        assert_eq!(net.n_cells(), 7);
        let spec = FaultSpec {
            fault_rate: 0.5,
            kind: FaultKind::StuckLow,
        };
        let faulted = inject_faults(&net, &spec, 3, 0).unwrap();
        assert_eq!(faulted.faults.iter().filter(|f| f.is_some()).count(), 3);
        let again = inject_faults(&net, &spec, 3, 0).unwrap();
        assert_eq!(faulted.faults, again.faults);
        let zero = inject_faults(
            &net,
            &FaultSpec {
                fault_rate: 0.0,
                kind: FaultKind::StuckLow,
            },
            3,
            0,
        )
        .unwrap();
        assert_eq!(zero, net);
        assert!(net.faults.iter().all(|f| f.is_none()));
    }

    #[test]
    fn full_fault_rate_pins_every_cell() {
        let net = random_net(36, 2, 9);
        let spec = FaultSpec {
            fault_rate: 1.0,
            kind: FaultKind::StuckHigh,
        };
        let faulted = inject_faults(&net, &spec, 1, 0).unwrap();
        assert!(faulted.faults.iter().all(|f| f == &Some(FaultKind::StuckHigh)));
        for input in random_inputs(36, 4, 10) {
            let trace = faulted.forward_trace(&input, EvalMode::Digital).unwrap();
            assert!(trace.cells.iter().all(|c| c.output == net.params.vdd));
            assert!(trace.output_bits.iter().all(|&b| b));
        }
    }

    #[test]
    fn stuck_low_final_cell_forces_zero_bit() {
        let topology = build_tree_topology(6, 6, 1).unwrap();
        let mut net = MemoryNetwork::from_bits(
            topology,
            &[true; 7],
            params(),
            InverterModel::Ideal,
        )
        .unwrap();
        net.faults[0] = Some(FaultKind::StuckLow);
        for pattern in 0..64u32 {
            let input: Vec<bool> = (0..6).map(|b| pattern >> b & 1 == 1).collect();
            assert_eq!(net.forward(&input, EvalMode::Digital).unwrap(), vec![false]);
        }
    }

    #[test]
    fn single_layer_accumulation_is_exactly_zero() {
        let net = random_net(36, 12, 12);
        assert_eq!(net.topology.n_layers(), 1);
        let inputs = random_inputs(36, 32, 13);
        let targets = inputs.iter().map(|_| vec![false; 12]).collect();
        let data = Dataset::new(inputs, targets).unwrap();
        let profiles = accumulation_profile(&net, &data, &[0.5, 2.0, 10.0, 50.0]).unwrap();
        for profile in &profiles {
            assert_eq!(profile.overall, 0.0, "gain {}", profile.gain);
            assert!(profile.per_layer.iter().all(|&r| r == 0.0));
        }
    }

    #[test]
    fn accumulation_vanishes_at_high_gain() {
        let net = random_net(100, 3, 14);
        assert!(net.topology.n_layers() > 1);
        let inputs = random_inputs(100, 24, 15);
        let targets = inputs.iter().map(|_| vec![false; 3]).collect();
        let data = Dataset::new(inputs, targets).unwrap();
        let profiles = accumulation_profile(&net, &data, &[1e6]).unwrap();
        assert_eq!(profiles[0].overall, 0.0);
        assert_eq!(profiles[0].per_layer.len(), net.topology.n_layers());
    }

    #[test]
    fn accumulation_rejects_bad_gain() {
        let net = random_net(6, 1, 16);
        let data = Dataset::new(vec![vec![true; 6]], vec![vec![true]]).unwrap();
        assert!(accumulation_profile(&net, &data, &[-2.0]).is_err());
        assert!(accumulation_profile(&net, &data, &[0.0]).is_err());
    }

    #[test]
    fn exact_match_accuracy_counts_whole_samples() {
        let net = random_net(6, 1, 17);
        let inputs = all_patterns_6();
        let outputs: Vec<Vec<bool>> = inputs
            .iter()
            .map(|i| net.forward(i, EvalMode::Digital).unwrap())
            .collect();
        let mut targets = outputs.clone();
        for target in targets.iter_mut().take(16) {
            target[0] = !target[0];
        }
        let data = Dataset::new(inputs, targets).unwrap();
        assert_eq!(exact_match_accuracy(&net, &data).unwrap(), 0.75);
    }

    fn all_patterns_6() -> Vec<Vec<bool>> {
        (0..64u32)
            .map(|p| (0..6).map(|b| p >> b & 1 == 1).collect())
            .collect()
    }
}
