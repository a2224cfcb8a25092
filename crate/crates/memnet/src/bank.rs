//! Multiclass classifier bank: one memory network per class and a
//! nearest-codeword decision stage.
//!
//! Every class owns an independently trained network over a shared topology
//! template. Classification scores each class by the negated Hamming
//! distance between its network's output and its codeword; ties fall back
//! to the larger summed final-layer margin, then the smaller class index.

use crate::model::{
    CircuitParams, DeviceState, EvalMode, InverterModel, MemoryNetwork, ModelError, TreeTopology,
};
use crate::robustness::{inject_faults, FaultSpec, RobustnessError};
use crate::seeds::{derive_rng, derive_seed, tag};
use crate::trainer::{train, Dataset, TrainError, TrainOutcome, TrainSchedule};
use rand::Rng;
use thiserror::Error;

/// Attempt budget for codeword rejection sampling.
const CODEBOOK_SAMPLING_BUDGET: usize = 100_000;
/// Feasibility guard on the class count.
const MAX_CLASSES: usize = 32;

#[derive(Error, Debug)]
pub enum BankError {
    #[error("bad codebook request: {0}")]
    BadCodebookRequest(String),
    #[error("codeword sampling budget of {CODEBOOK_SAMPLING_BUDGET} attempts exhausted")]
    SamplingExhausted,
    #[error("template has {template} outputs but the codebook has {codebook} bits")]
    WidthMismatch { template: usize, codebook: usize },
    #[error("bank was built for {bank} classes, codebook has {codebook}")]
    ClassCountMismatch { bank: usize, codebook: usize },
    #[error("sample {index} has label {label}, expected 0..{n_classes}")]
    BadLabel {
        index: usize,
        label: usize,
        n_classes: usize,
    },
    #[error("class dataset mismatch: {0}")]
    DataMismatch(String),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Robustness(#[from] RobustnessError),
}

/// One codeword per class, pairwise Hamming distance at least
/// `min_distance`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    pub n_classes: usize,
    pub n_bits: usize,
    pub codewords: Vec<Vec<bool>>,
    pub min_distance: usize,
}

fn hamming(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Seeded rejection sampling of a codebook: candidates are drawn uniformly
/// and kept when they clear `min_distance` against every accepted codeword.
pub fn make_codewords(
    n_classes: usize,
    n_bits: usize,
    min_distance: usize,
    master_seed: u64,
) -> Result<Codebook, BankError> {
    if n_classes == 0 || n_classes > MAX_CLASSES {
        return Err(BankError::BadCodebookRequest(format!(
            "n_classes {n_classes} outside 1..={MAX_CLASSES}"
        )));
    }
    if n_bits == 0 || min_distance > n_bits {
        return Err(BankError::BadCodebookRequest(format!(
            "min_distance {min_distance} does not fit in {n_bits} bits"
        )));
    }
    let mut rng = derive_rng(master_seed, &[tag::CODEBOOK]);
    let mut codewords: Vec<Vec<bool>> = Vec::with_capacity(n_classes);
    let mut attempts = 0;
    while codewords.len() < n_classes {
        if attempts >= CODEBOOK_SAMPLING_BUDGET {
            return Err(BankError::SamplingExhausted);
        }
        attempts += 1;
        let candidate: Vec<bool> = (0..n_bits).map(|_| rng.random_bool(0.5)).collect();
        if codewords
            .iter()
            .all(|cw| hamming(cw, &candidate) >= min_distance.max(1))
        {
            codewords.push(candidate);
        }
    }
    Ok(Codebook {
        n_classes,
        n_bits,
        codewords,
        min_distance,
    })
}

/// One network per class over a shared topology template.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierBank {
    pub networks: Vec<MemoryNetwork>,
    pub codebook: Codebook,
}

/// A bank of freshly initialized (all-OFF) networks.
pub fn build_bank(
    template: &TreeTopology,
    n_classes: usize,
    codebook: Codebook,
    params: CircuitParams,
    inverter: InverterModel,
) -> Result<ClassifierBank, BankError> {
    if template.n_outputs != codebook.n_bits {
        return Err(BankError::WidthMismatch {
            template: template.n_outputs,
            codebook: codebook.n_bits,
        });
    }
    if n_classes != codebook.n_classes {
        return Err(BankError::ClassCountMismatch {
            bank: n_classes,
            codebook: codebook.n_classes,
        });
    }
    let networks = (0..n_classes)
        .map(|_| MemoryNetwork::uniform(template.clone(), DeviceState::Off, params, inverter))
        .collect::<Result<_, _>>()?;
    Ok(ClassifierBank {
        networks,
        codebook,
    })
}

/// Labeled classification samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDataset {
    pub inputs: Vec<Vec<bool>>,
    pub labels: Vec<usize>,
}

impl ClassDataset {
    pub fn new(inputs: Vec<Vec<bool>>, labels: Vec<usize>) -> Result<Self, BankError> {
        if inputs.is_empty() {
            return Err(BankError::DataMismatch("no samples".into()));
        }
        if inputs.len() != labels.len() {
            return Err(BankError::DataMismatch(format!(
                "{} inputs vs {} labels",
                inputs.len(),
                labels.len()
            )));
        }
        let width = inputs[0].len();
        if let Some(index) = inputs.iter().position(|i| i.len() != width) {
            return Err(BankError::DataMismatch(format!(
                "sample {index} has ragged length"
            )));
        }
        Ok(ClassDataset { inputs, labels })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    fn check_labels(&self, n_classes: usize) -> Result<(), BankError> {
        for (index, &label) in self.labels.iter().enumerate() {
            if label >= n_classes {
                return Err(BankError::BadLabel {
                    index,
                    label,
                    n_classes,
                });
            }
        }
        Ok(())
    }
}

/// Training report: per-class outcomes, plus the classes that had no
/// samples and were left at initialization.
#[derive(Debug, Clone)]
pub struct BankTrainReport {
    pub outcomes: Vec<Option<TrainOutcome>>,
    pub missing_classes: Vec<usize>,
}

/// Trains each class network one-vs-rest: class `c` learns to emit
/// `codeword(c)` on its own samples and the complement on all others, so a
/// per-bit objective maximizes Hamming distance to the codeword on
/// negatives. Class `c` trains with master seed derived from
/// `(schedule.master_seed, c)`; training one class never touches another.
pub fn train_bank(
    bank: &ClassifierBank,
    data: &ClassDataset,
    schedule: &TrainSchedule,
) -> Result<(ClassifierBank, BankTrainReport), BankError> {
    data.check_labels(bank.codebook.n_classes)?;
    let mut trained = bank.clone();
    let mut outcomes = Vec::with_capacity(bank.networks.len());
    let mut missing_classes = Vec::new();
    for (class, net) in bank.networks.iter().enumerate() {
        if !data.labels.contains(&class) {
            missing_classes.push(class);
            outcomes.push(None);
            continue;
        }
        let codeword = &bank.codebook.codewords[class];
        let targets: Vec<Vec<bool>> = data
            .labels
            .iter()
            .map(|&label| {
                if label == class {
                    codeword.clone()
                } else {
                    codeword.iter().map(|&b| !b).collect()
                }
            })
            .collect();
        let class_data = Dataset::new(data.inputs.clone(), targets)?;
        let mut class_schedule = schedule.clone();
        class_schedule.master_seed =
            derive_seed(schedule.master_seed, &[tag::BANK_CLASS, class as u64]);
        let outcome = train(
            &net.topology,
            &class_data,
            &class_schedule,
            net.params,
            net.inverter,
        )?;
        trained.networks[class] = outcome.network.clone();
        outcomes.push(Some(outcome));
    }
    Ok((
        trained,
        BankTrainReport {
            outcomes,
            missing_classes,
        },
    ))
}

/// Classification result: the winning class and the per-class scores
/// (negated Hamming distance to each class's codeword).
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub class: usize,
    pub scores: Vec<f64>,
}

/// Nearest-codeword classification. The winner maximizes
/// `-hamming(output_c, codeword_c)`; ties break to the larger summed
/// final-layer `|node - vth|`, then to the smaller class index, so a valid
/// class is always returned.
pub fn classify(bank: &ClassifierBank, input_bits: &[bool]) -> Result<Classification, BankError> {
    let mut scores = Vec::with_capacity(bank.networks.len());
    let mut margins = Vec::with_capacity(bank.networks.len());
    for (net, codeword) in bank.networks.iter().zip(&bank.codebook.codewords) {
        let trace = net.forward_trace(input_bits, EvalMode::Digital)?;
        scores.push(-(hamming(&trace.output_bits, codeword) as f64));
        let n_outputs = net.topology.n_outputs;
        let margin: f64 = trace.cells[trace.cells.len() - n_outputs..]
            .iter()
            .map(|c| (c.node_voltage - net.params.vth).abs())
            .sum();
        margins.push(margin);
    }
    let mut class = 0;
    for candidate in 1..scores.len() {
        let better = scores[candidate].total_cmp(&scores[class]).then_with(|| {
            margins[candidate].total_cmp(&margins[class])
        });
        if better.is_gt() {
            class = candidate;
        }
    }
    Ok(Classification { class, scores })
}

/// Fraction of samples classify assigns to their labeled class.
pub fn bank_accuracy(bank: &ClassifierBank, data: &ClassDataset) -> Result<f64, BankError> {
    data.check_labels(bank.codebook.n_classes)?;
    let mut correct = 0usize;
    for (input, &label) in data.inputs.iter().zip(&data.labels) {
        if classify(bank, input)?.class == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

/// Injects the same fault spec into every class network; class `c` of
/// trial `t` uses the fault stream `(master_seed, t * n_classes + c)`.
pub fn inject_bank_faults(
    bank: &ClassifierBank,
    spec: &FaultSpec,
    master_seed: u64,
    trial: u64,
) -> Result<ClassifierBank, BankError> {
    let n = bank.networks.len() as u64;
    let networks = bank
        .networks
        .iter()
        .enumerate()
        .map(|(class, net)| inject_faults(net, spec, master_seed, trial * n + class as u64))
        .collect::<Result<_, _>>()?;
    Ok(ClassifierBank {
        networks,
        codebook: bank.codebook.clone(),
    })
}
