//! Staged genetic training of device states, plus a brute-force oracle for
//! enumerable instances.
//!
//! A chromosome is the canonical-layout bit-string over all devices. Stages
//! restrict mutation to one layer's bit range (or all bits); on stage entry
//! every individual's non-target bits are rewritten to the incumbent elite's,
//! so a layer stage can never disturb the rest of the network. Offspring
//! randomness is derived from (master_seed, stage, generation, individual),
//! which makes results independent of evaluation order and thread count.

use crate::exec::map_indexed;
use crate::model::{
    CircuitParams, EvalMode, InverterModel, MemoryNetwork, ModelError, TreeTopology,
};
use crate::seeds::{derive_rng, tag};
use rand::Rng;
use std::ops::Range;
use thiserror::Error;

/// Enumeration guard for the brute-force oracle.
pub const BRUTE_FORCE_BIT_LIMIT: usize = 20;

#[derive(Error, Debug)]
pub enum TrainError {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("dataset mismatch: {0}")]
    DataMismatch(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("{bits} device bits exceed the {BRUTE_FORCE_BIT_LIMIT}-bit enumeration guard")]
    BitBudgetExceeded { bits: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Device-state bit-string in canonical layout (layer order, cell order
/// within layer, input devices then reference device).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chromosome {
    pub bits: Vec<bool>,
}

impl Chromosome {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Network state as a chromosome.
pub fn encode(net: &MemoryNetwork) -> Chromosome {
    Chromosome {
        bits: net.state_bits(),
    }
}

/// Network with device states taken from a chromosome.
pub fn decode(
    chromosome: &Chromosome,
    topology: &TreeTopology,
    params: CircuitParams,
    inverter: InverterModel,
) -> Result<MemoryNetwork, ModelError> {
    MemoryNetwork::from_bits(topology.clone(), &chromosome.bits, params, inverter)
}

/// Supervised samples: rail-valued inputs and target output bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub inputs: Vec<Vec<bool>>,
    pub targets: Vec<Vec<bool>>,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<bool>>, targets: Vec<Vec<bool>>) -> Result<Self, TrainError> {
        let data = Dataset { inputs, targets };
        data.check_uniform()?;
        Ok(data)
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    fn check_uniform(&self) -> Result<(), TrainError> {
        if self.inputs.is_empty() {
            return Err(TrainError::EmptyDataset);
        }
        if self.inputs.len() != self.targets.len() {
            return Err(TrainError::DataMismatch(format!(
                "{} inputs vs {} targets",
                self.inputs.len(),
                self.targets.len()
            )));
        }
        let in_len = self.inputs[0].len();
        let out_len = self.targets[0].len();
        for (index, (input, target)) in self.inputs.iter().zip(&self.targets).enumerate() {
            if input.len() != in_len || target.len() != out_len {
                return Err(TrainError::DataMismatch(format!(
                    "sample {index} has ragged length"
                )));
            }
        }
        Ok(())
    }

    /// Checks sample widths against a topology's input and output counts.
    pub fn check_against(&self, topology: &TreeTopology) -> Result<(), TrainError> {
        self.check_uniform()?;
        if self.inputs[0].len() != topology.n_inputs {
            return Err(TrainError::DataMismatch(format!(
                "{}-bit inputs for a {}-input topology",
                self.inputs[0].len(),
                topology.n_inputs
            )));
        }
        if self.targets[0].len() != topology.n_outputs {
            return Err(TrainError::DataMismatch(format!(
                "{}-bit targets for a {}-output topology",
                self.targets[0].len(),
                topology.n_outputs
            )));
        }
        Ok(())
    }
}

/// Fitness objective. `Accuracy` scores whole-sample exact matches;
/// `BitAccuracy` scores per-output-bit matches, the denser signal for
/// multi-output targets. The margin variants add `lambda` times the mean
/// normalized final-layer margin `|v - vth| / vdd`, rewarding states that
/// keep node voltages away from the threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    Accuracy,
    AccuracyPlusMargin { lambda: f64 },
    BitAccuracy,
    BitAccuracyPlusMargin { lambda: f64 },
}

impl Objective {
    fn lambda(&self) -> f64 {
        match *self {
            Objective::Accuracy | Objective::BitAccuracy => 0.0,
            Objective::AccuracyPlusMargin { lambda }
            | Objective::BitAccuracyPlusMargin { lambda } => lambda,
        }
    }

    fn per_bit(&self) -> bool {
        matches!(
            self,
            Objective::BitAccuracy | Objective::BitAccuracyPlusMargin { .. }
        )
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let lambda = self.lambda();
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(TrainError::InvalidSchedule(format!(
                "margin weight {lambda} must be finite and non-negative"
            )));
        }
        Ok(())
    }
}

/// Digital-mode fitness of a network on a dataset.
///
/// The score is the accuracy term plus `lambda` times the mean over samples
/// and final-layer cells of `|node - vth| / vdd`. Summation order is fixed
/// (samples outer, cells inner), so the result is bit-reproducible.
pub fn fitness(
    net: &MemoryNetwork,
    data: &Dataset,
    objective: Objective,
) -> Result<f64, TrainError> {
    objective.validate()?;
    data.check_against(&net.topology)?;
    let n_outputs = net.topology.n_outputs;
    let lambda = objective.lambda();
    let mut match_units = 0usize;
    let mut margin_sum = 0.0f64;
    for (input, target) in data.inputs.iter().zip(&data.targets) {
        let trace = net.forward_trace(input, EvalMode::Digital)?;
        if objective.per_bit() {
            match_units += trace
                .output_bits
                .iter()
                .zip(target)
                .filter(|(bit, want)| bit == want)
                .count();
        } else if trace.output_bits == *target {
            match_units += 1;
        }
        if lambda > 0.0 {
            let final_cells = &trace.cells[trace.cells.len() - n_outputs..];
            for cell in final_cells {
                margin_sum += (cell.node_voltage - net.params.vth).abs();
            }
        }
    }
    let denominator = if objective.per_bit() {
        data.len() * n_outputs
    } else {
        data.len()
    };
    let accuracy = match_units as f64 / denominator as f64;
    if lambda > 0.0 {
        let mean_margin = margin_sum / (data.len() * n_outputs) as f64 / net.params.vdd;
        Ok(accuracy + lambda * mean_margin)
    } else {
        Ok(accuracy)
    }
}

/// Which bits a stage may mutate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageTarget {
    Layer(usize),
    All,
}

impl StageTarget {
    /// Bit range this target covers in canonical layout.
    pub fn bit_range(&self, topology: &TreeTopology) -> Result<Range<usize>, TrainError> {
        match *self {
            StageTarget::All => Ok(0..topology.n_device_bits()),
            StageTarget::Layer(index) => topology
                .layer_bit_ranges()
                .get(index)
                .cloned()
                .ok_or_else(|| {
                    TrainError::InvalidSchedule(format!(
                        "stage targets layer {index} of a {}-layer topology",
                        topology.n_layers()
                    ))
                }),
        }
    }
}

/// One stage of the schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageConfig {
    pub target: StageTarget,
    pub generations: usize,
    /// Per-bit flip probability within the target range.
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub population: usize,
    pub elitism: usize,
}

impl StageConfig {
    fn validate(&self, topology: &TreeTopology) -> Result<(), TrainError> {
        self.target.bit_range(topology)?;
        if self.population < 2 {
            return Err(TrainError::InvalidSchedule(format!(
                "population {} is below 2",
                self.population
            )));
        }
        if self.elitism < 1 || self.elitism >= self.population {
            return Err(TrainError::InvalidSchedule(format!(
                "elitism {} outside 1..{}",
                self.elitism, self.population
            )));
        }
        if self.generations == 0 {
            return Err(TrainError::InvalidSchedule("stage has 0 generations".into()));
        }
        for (name, rate) in [
            ("mutation_rate", self.mutation_rate),
            ("crossover_rate", self.crossover_rate),
        ] {
            if !(rate.is_finite() && (0.0..=1.0).contains(&rate)) {
                return Err(TrainError::InvalidSchedule(format!(
                    "{name} {rate} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Full training schedule. `stop_at` ends training early once the best
/// fitness reaches the given score, for oracle-equivalence runs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSchedule {
    pub stages: Vec<StageConfig>,
    pub objective: Objective,
    pub master_seed: u64,
    pub stop_at: Option<f64>,
}

impl TrainSchedule {
    pub fn validate(&self, topology: &TreeTopology) -> Result<(), TrainError> {
        if self.stages.is_empty() {
            return Err(TrainError::InvalidSchedule("no stages".into()));
        }
        self.objective.validate()?;
        for stage in &self.stages {
            stage.validate(topology)?;
        }
        Ok(())
    }

    /// Bottom-up layer stages followed by a global polish stage.
    pub fn default_for(topology: &TreeTopology, master_seed: u64) -> Self {
        let total_bits = topology.n_device_bits();
        let mut stages: Vec<StageConfig> = topology
            .layer_bit_ranges()
            .iter()
            .enumerate()
            .map(|(index, range)| StageConfig {
                target: StageTarget::Layer(index),
                generations: 120,
                mutation_rate: stage_mutation_rate(range.len()),
                crossover_rate: 0.7,
                population: 48,
                elitism: 1,
            })
            .collect();
        stages.push(StageConfig {
            target: StageTarget::All,
            generations: 120,
            mutation_rate: stage_mutation_rate(total_bits),
            crossover_rate: 0.7,
            population: 48,
            elitism: 1,
        });
        TrainSchedule {
            stages,
            objective: Objective::Accuracy,
            master_seed,
            stop_at: None,
        }
    }
}

/// Two expected flips per offspring, capped for very small targets.
fn stage_mutation_rate(target_bits: usize) -> f64 {
    (2.0 / target_bits as f64).min(0.2)
}

/// Per-generation best fitness, in schedule order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationRecord {
    pub stage: usize,
    pub generation: usize,
    pub best_fitness: f64,
}

/// Result of a training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub network: MemoryNetwork,
    pub history: Vec<GenerationRecord>,
    pub best_fitness: f64,
}

/// Everything needed to score a chromosome.
pub struct FitnessContext<'a> {
    pub topology: &'a TreeTopology,
    pub data: &'a Dataset,
    pub objective: Objective,
    pub params: CircuitParams,
    pub inverter: InverterModel,
}

impl FitnessContext<'_> {
    pub fn evaluate(&self, chromosome: &Chromosome) -> Result<f64, TrainError> {
        let net = decode(chromosome, self.topology, self.params, self.inverter)?;
        fitness(&net, self.data, self.objective)
    }

    /// Scores a whole population, data-parallel over individuals.
    pub fn evaluate_population(&self, population: &[Chromosome]) -> Result<Vec<f64>, TrainError> {
        let scores = map_indexed(population.len(), |index| self.evaluate(&population[index]));
        scores.into_iter().collect()
    }
}

/// Index of the best individual: highest fitness, ties to the lowest index.
fn best_index(fitnesses: &[f64]) -> usize {
    let mut best = 0;
    for (index, score) in fitnesses.iter().enumerate().skip(1) {
        if score.total_cmp(&fitnesses[best]).is_gt() {
            best = index;
        }
    }
    best
}

/// Indices of the top `count` individuals, fitness descending, ties to the
/// lowest index.
fn elite_indices(fitnesses: &[f64], count: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitnesses.len()).collect();
    order.sort_by(|&a, &b| fitnesses[b].total_cmp(&fitnesses[a]).then(a.cmp(&b)));
    order.truncate(count);
    order
}

/// One generation step: elites survive unchanged, the rest are bred by
/// tournament-2 selection, single-point crossover, and per-bit mutation
/// masked to `target_range`. Offspring `i` draws from the stream derived
/// from `(master_seed, stage_index, generation, i)`.
pub fn evolve_generation(
    population: &[Chromosome],
    fitnesses: &[f64],
    stage: &StageConfig,
    target_range: Range<usize>,
    master_seed: u64,
    stage_index: usize,
    generation: usize,
) -> Result<Vec<Chromosome>, TrainError> {
    if population.is_empty() {
        return Err(TrainError::InvalidSchedule("empty population".into()));
    }
    if population.len() != fitnesses.len() {
        return Err(TrainError::InvalidSchedule(format!(
            "{} individuals vs {} fitness scores",
            population.len(),
            fitnesses.len()
        )));
    }
    let elites = elite_indices(fitnesses, stage.elitism.min(population.len()));
    let n_offspring = population.len() - elites.len();
    let offspring = map_indexed(n_offspring, |index| {
        let mut rng = derive_rng(
            master_seed,
            &[
                tag::OFFSPRING,
                stage_index as u64,
                generation as u64,
                index as u64,
            ],
        );
        let parent_a = tournament(&mut rng, fitnesses);
        let parent_b = tournament(&mut rng, fitnesses);
        let mut child = if rng.random_bool(stage.crossover_rate) {
            crossover(&population[parent_a], &population[parent_b], &mut rng)
        } else {
            population[parent_a].clone()
        };
        for bit in target_range.clone() {
            if rng.random_bool(stage.mutation_rate) {
                child.bits[bit] = !child.bits[bit];
            }
        }
        child
    });
    let mut next = Vec::with_capacity(population.len());
    next.extend(elites.iter().map(|&index| population[index].clone()));
    next.extend(offspring);
    Ok(next)
}

fn tournament<R: Rng>(rng: &mut R, fitnesses: &[f64]) -> usize {
    let first = rng.random_range(0..fitnesses.len());
    let second = rng.random_range(0..fitnesses.len());
    if fitnesses[second].total_cmp(&fitnesses[first]).is_gt() {
        second
    } else {
        first
    }
}

fn crossover<R: Rng>(a: &Chromosome, b: &Chromosome, rng: &mut R) -> Chromosome {
    let cut = rng.random_range(1..a.len());
    let mut bits = a.bits[..cut].to_vec();
    bits.extend_from_slice(&b.bits[cut..]);
    Chromosome { bits }
}

/// Runs the schedule's stages in order and returns the best network found.
///
/// Each stage first rewrites every individual's non-target bits to the
/// incumbent elite's, then evolves. History records the best fitness of each
/// evaluated generation; elitism makes it non-decreasing within a stage, and
/// the rewrite preserves the elite, so it is non-decreasing globally.
pub fn train(
    topology: &TreeTopology,
    data: &Dataset,
    schedule: &TrainSchedule,
    params: CircuitParams,
    inverter: InverterModel,
) -> Result<TrainOutcome, TrainError> {
    topology.validate()?;
    schedule.validate(topology)?;
    data.check_against(topology)?;
    let ctx = FitnessContext {
        topology,
        data,
        objective: schedule.objective,
        params,
        inverter,
    };
    let n_bits = topology.n_device_bits();
    let initial_size = schedule.stages[0].population;
    let mut population: Vec<Chromosome> = map_indexed(initial_size, |index| {
        let mut rng = derive_rng(schedule.master_seed, &[tag::POPULATION_INIT, index as u64]);
        Chromosome {
            bits: (0..n_bits).map(|_| rng.random_bool(0.5)).collect(),
        }
    });
    let mut fitnesses = ctx.evaluate_population(&population)?;

    let mut history = Vec::new();
    'stages: for (stage_index, stage) in schedule.stages.iter().enumerate() {
        let target_range = stage.target.bit_range(topology)?;

        // Population size may change between stages: clone the current best
        // to grow, drop the worst to shrink.
        if population.len() != stage.population {
            let order = elite_indices(&fitnesses, population.len());
            let mut resized: Vec<Chromosome> = order
                .iter()
                .take(stage.population)
                .map(|&index| population[index].clone())
                .collect();
            while resized.len() < stage.population {
                resized.push(resized[0].clone());
            }
            population = resized;
            fitnesses = ctx.evaluate_population(&population)?;
        }

        // Freeze non-target bits at the incumbent elite's values.
        let elite = population[best_index(&fitnesses)].clone();
        let mut rewrote = false;
        for individual in &mut population {
            for bit in 0..n_bits {
                if !target_range.contains(&bit) && individual.bits[bit] != elite.bits[bit] {
                    individual.bits[bit] = elite.bits[bit];
                    rewrote = true;
                }
            }
        }
        if rewrote {
            fitnesses = ctx.evaluate_population(&population)?;
        }

        for generation in 0..stage.generations {
            let best = best_index(&fitnesses);
            history.push(GenerationRecord {
                stage: stage_index,
                generation,
                best_fitness: fitnesses[best],
            });
            if let Some(target) = schedule.stop_at {
                if fitnesses[best] >= target {
                    break 'stages;
                }
            }
            if generation + 1 < stage.generations {
                population = evolve_generation(
                    &population,
                    &fitnesses,
                    stage,
                    target_range.clone(),
                    schedule.master_seed,
                    stage_index,
                    generation,
                )?;
                fitnesses = ctx.evaluate_population(&population)?;
            }
        }
    }

    let best = best_index(&fitnesses);
    let network = decode(&population[best], topology, params, inverter)?;
    Ok(TrainOutcome {
        network,
        best_fitness: fitnesses[best],
        history,
    })
}

/// Exhaustive maximum over all chromosomes; ties break to the
/// lexicographically smallest bit-string.
pub fn brute_force_best(ctx: &FitnessContext) -> Result<(f64, Chromosome), TrainError> {
    ctx.topology.validate()?;
    ctx.data.check_against(ctx.topology)?;
    let bits = ctx.topology.n_device_bits();
    if bits > BRUTE_FORCE_BIT_LIMIT {
        return Err(TrainError::BitBudgetExceeded { bits });
    }
    let scores = ctx.evaluate_population(
        &(0..1u64 << bits)
            .map(|value| chromosome_from_index(value, bits))
            .collect::<Vec<_>>(),
    )?;
    // Ascending index is lexicographic order on the bit-string, so the first
    // strict maximum is the smallest optimal chromosome.
    let best = best_index(&scores);
    Ok((scores[best], chromosome_from_index(best as u64, bits)))
}

/// Bit-string of `value` with bit 0 as the most significant digit, so that
/// integer order equals lexicographic order on the string.
fn chromosome_from_index(value: u64, bits: usize) -> Chromosome {
    Chromosome {
        bits: (0..bits).map(|i| value >> (bits - 1 - i) & 1 == 1).collect(),
    }
}
