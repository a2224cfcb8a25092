//! Experiment orchestration: resolves a config into one task run, writes
//! the echoed config, the tabular reports, and a structured-text summary.
//!
//! Orchestration is single-threaded; parallelism lives inside the library.
//! Every output is a pure function of the resolved config, so reruns from
//! the echoed config are byte-identical.

use crate::config::{ResolvedConfig, TaskKind};
use crate::dataset::{load_pattern_text, load_pgm_directory, RawPatterns};
use crate::error::{data, internal, usage, HarnessError};
use crate::netfile::{load_network, save_network};
use memnet::bank::{
    bank_accuracy, build_bank, classify, make_codewords, train_bank, BankError, ClassDataset,
};
use memnet::model::{
    build_tree_topology, CircuitParams, EvalMode, FaultKind, InverterModel, MemoryNetwork,
    TreeTopology,
};
use memnet::robustness::{
    accumulation_profile, exact_match_accuracy, inject_faults, sensitivity_sweep, FaultSpec,
    RobustnessError,
};
use memnet::sizing::{extrapolate_capacity, sizing_report, CapacityMode};
use memnet::trainer::{train, Dataset, Objective, TrainError, TrainOutcome, TrainSchedule};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const ECHO_FILE: &str = "config_echo.cfg";

/// Ordered `key: value` lines; written to summary.txt and stdout.
#[derive(Debug, Default)]
pub struct Summary {
    lines: Vec<(String, String)>,
}

impl Summary {
    fn push(&mut self, key: &str, value: impl ToString) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.lines {
            let _ = writeln!(out, "{key}: {value}");
        }
        out
    }
}

fn write_text(path: &Path, content: &str) -> Result<(), HarnessError> {
    std::fs::write(path, content)
        .map_err(|e| internal(format!("write {}: {e}", path.display())))
}

fn train_error(e: TrainError) -> HarnessError {
    match e {
        TrainError::DataMismatch(_) | TrainError::EmptyDataset => data(e),
        TrainError::InvalidSchedule(_) | TrainError::BitBudgetExceeded { .. } => usage(e),
        TrainError::Model(_) => internal(e),
    }
}

fn robustness_error(e: RobustnessError) -> HarnessError {
    match e {
        RobustnessError::BadEpsilon(_)
        | RobustnessError::BadFaultRate(_)
        | RobustnessError::EmptyEpsilons
        | RobustnessError::ZeroTrials => usage(e),
        RobustnessError::Data(inner) => train_error(inner),
        RobustnessError::Model(_) => internal(e),
    }
}

fn bank_error(e: BankError) -> HarnessError {
    match e {
        BankError::BadCodebookRequest(_)
        | BankError::SamplingExhausted
        | BankError::WidthMismatch { .. }
        | BankError::ClassCountMismatch { .. } => usage(e),
        BankError::BadLabel { .. } | BankError::DataMismatch(_) => data(e),
        BankError::Train(inner) => train_error(inner),
        BankError::Model(_) | BankError::Robustness(_) => internal(e),
    }
}

fn topology_from(config: &ResolvedConfig) -> Result<TreeTopology, HarnessError> {
    build_tree_topology(
        config.usize_value("n_inputs"),
        config.usize_value("fan_in"),
        config.usize_value("n_outputs"),
    )
    .map_err(|e| usage(format!("infeasible topology: {e}")))
}

fn circuit_from(config: &ResolvedConfig) -> Result<CircuitParams, HarnessError> {
    let params = CircuitParams {
        vdd: config.f64_value("vdd"),
        vth: config.f64_value("vth"),
        g_on: config.f64_value("g_on"),
        g_off: config.f64_value("g_off"),
    };
    params.validate().map_err(usage)?;
    Ok(params)
}

fn inverter_from(config: &ResolvedConfig) -> Result<InverterModel, HarnessError> {
    let inverter = match config.str_value("inverter") {
        "ideal" => InverterModel::Ideal,
        "sigmoid" => InverterModel::Sigmoid {
            gain: config.f64_value("gain"),
        },
        other => return Err(internal(format!("unreachable inverter '{other}'"))),
    };
    inverter.validate().map_err(usage)?;
    Ok(inverter)
}

fn objective_from(config: &ResolvedConfig) -> Objective {
    match config.str_value("objective") {
        "accuracy" => Objective::Accuracy,
        "accuracy_margin" => Objective::AccuracyPlusMargin {
            lambda: config.f64_value("lambda"),
        },
        "bit_accuracy" => Objective::BitAccuracy,
        "bit_accuracy_margin" => Objective::BitAccuracyPlusMargin {
            lambda: config.f64_value("lambda"),
        },
        other => unreachable!("choice key validated: {other}"),
    }
}

fn schedule_from(
    config: &ResolvedConfig,
    topology: &TreeTopology,
) -> Result<TrainSchedule, HarnessError> {
    let mut schedule = TrainSchedule::default_for(topology, config.u64_value("master_seed"));
    if config.str_value("stage_plan") == "all" {
        let polish = schedule.stages.pop().expect("default schedule has stages");
        schedule.stages = vec![polish];
    }
    schedule.objective = objective_from(config);
    schedule.stop_at = config.opt_f64("stop_at");
    for stage in &mut schedule.stages {
        if let Some(generations) = config.opt_usize("generations") {
            stage.generations = generations;
        }
        if let Some(population) = config.opt_usize("population") {
            stage.population = population;
        }
        if let Some(rate) = config.opt_f64("mutation_rate") {
            stage.mutation_rate = rate;
        }
        if let Some(rate) = config.opt_f64("crossover_rate") {
            stage.crossover_rate = rate;
        }
        if let Some(elitism) = config.opt_usize("elitism") {
            stage.elitism = elitism;
        }
    }
    schedule.validate(topology).map_err(usage)?;
    Ok(schedule)
}

fn raw_patterns_from(config: &ResolvedConfig) -> Result<RawPatterns, HarnessError> {
    let path = Path::new(config.str_value("dataset"));
    match config.str_value("dataset_format") {
        "pattern" => load_pattern_text(path),
        "pgm" => load_pgm_directory(path, config.str_value("pgm_threshold").parse().unwrap()),
        other => Err(internal(format!("unreachable dataset format '{other}'"))),
    }
}

fn training_dataset_from(config: &ResolvedConfig) -> Result<Dataset, HarnessError> {
    raw_patterns_from(config)?.into_training()
}

/// Runs the configured task. Side effects: report files under
/// `output_dir` plus whatever the task itself persists.
pub fn run(config: &ResolvedConfig) -> Result<Summary, HarnessError> {
    let output_dir = PathBuf::from(config.str_value("output_dir"));
    std::fs::create_dir_all(&output_dir)
        .map_err(|e| usage(format!("output_dir {}: {e}", output_dir.display())))?;
    write_text(&output_dir.join(ECHO_FILE), &config.echo())?;
    let mut summary = Summary::default();
    summary.push("task", config.task.name());
    match config.task {
        TaskKind::Size => run_size(config, &output_dir, &mut summary)?,
        TaskKind::Capacity => run_capacity(config, &mut summary)?,
        TaskKind::Train => run_train(config, &output_dir, &mut summary)?,
        TaskKind::Eval => run_eval(config, &mut summary)?,
        TaskKind::Perturb => run_perturb(config, &output_dir, &mut summary)?,
        TaskKind::Faults => run_faults(config, &output_dir, &mut summary)?,
        TaskKind::Accumulate => run_accumulate(config, &output_dir, &mut summary)?,
        TaskKind::Classify => run_classify(config, &output_dir, &mut summary)?,
    }
    write_text(&output_dir.join("summary.txt"), &summary.render())?;
    Ok(summary)
}

fn run_size(
    config: &ResolvedConfig,
    output_dir: &Path,
    summary: &mut Summary,
) -> Result<(), HarnessError> {
    let topology = topology_from(config)?;
    let report = sizing_report(&topology);
    let mut csv = String::from("n_inputs,layers,inverters,memory_bits,resolution_denominator\n");
    let _ = writeln!(
        csv,
        "{},{},{},{},{}",
        report.n_inputs,
        report.n_layers,
        report.inverters,
        report.memory_bits,
        report.resolution.denominator
    );
    write_text(&output_dir.join("sizing.csv"), &csv)?;
    summary.push("n_inputs", report.n_inputs);
    summary.push("fan_in", config.usize_value("fan_in"));
    summary.push("n_outputs", config.usize_value("n_outputs"));
    summary.push("layers", report.n_layers);
    summary.push("inverters", report.inverters);
    summary.push("memory_bits", report.memory_bits);
    summary.push("resolution", report.resolution);
    Ok(())
}

fn run_capacity(config: &ResolvedConfig, summary: &mut Summary) -> Result<(), HarnessError> {
    let mode = match config.str_value("capacity_mode") {
        "paper" => CapacityMode::PaperRatio,
        "canonical" => CapacityMode::Canonical,
        other => unreachable!("choice key validated: {other}"),
    };
    let report = extrapolate_capacity(config.u64_value("memory_bits"), mode).map_err(usage)?;
    summary.push("memory_bits", report.memory_bits);
    summary.push("capacity_mode", config.str_value("capacity_mode"));
    summary.push("max_inputs", report.max_inputs);
    summary.push("layers", report.layers);
    summary.push("resolution", report.resolution);
    if let Some(note) = report.layer_bound_note() {
        summary.push("note", note);
    }
    Ok(())
}

fn history_csv(history: &[memnet::trainer::GenerationRecord]) -> String {
    let mut csv = String::from("stage,generation,best_fitness\n");
    for record in history {
        let _ = writeln!(
            csv,
            "{},{},{}",
            record.stage, record.generation, record.best_fitness
        );
    }
    csv
}

fn run_train(
    config: &ResolvedConfig,
    output_dir: &Path,
    summary: &mut Summary,
) -> Result<(), HarnessError> {
    let topology = topology_from(config)?;
    let params = circuit_from(config)?;
    let inverter = inverter_from(config)?;
    let dataset = training_dataset_from(config)?;
    let schedule = schedule_from(config, &topology)?;
    let outcome = train(&topology, &dataset, &schedule, params, inverter).map_err(train_error)?;
    write_text(&output_dir.join("history.csv"), &history_csv(&outcome.history))?;
    let network_out = PathBuf::from(config.str_value("network_out"));
    save_network(&outcome.network, config.usize_value("fan_in"), &network_out)?;
    let accuracy =
        exact_match_accuracy(&outcome.network, &dataset).map_err(robustness_error)?;
    summary.push("samples", dataset.len());
    summary.push("stages", schedule.stages.len());
    summary.push("best_fitness", outcome.best_fitness);
    summary.push("training_accuracy", accuracy);
    summary.push("network_out", network_out.display());
    Ok(())
}

fn bit_accuracy(net: &MemoryNetwork, dataset: &Dataset) -> Result<f64, HarnessError> {
    let mut matches = 0u64;
    let mut total = 0u64;
    for (input, target) in dataset.inputs.iter().zip(&dataset.targets) {
        let output = net
            .forward(input, EvalMode::Digital)
            .map_err(|e| data(format!("dataset mismatch: {e}")))?;
        if output.len() != target.len() {
            return Err(data(format!(
                "target width {} does not match the network's {} outputs",
                target.len(),
                output.len()
            )));
        }
        matches += output.iter().zip(target).filter(|(o, t)| o == t).count() as u64;
        total += output.len() as u64;
    }
    Ok(matches as f64 / total as f64)
}

fn run_eval(config: &ResolvedConfig, summary: &mut Summary) -> Result<(), HarnessError> {
    let net = load_network(Path::new(config.str_value("network_in")))?;
    let dataset = training_dataset_from(config)?;
    dataset.check_against(&net.topology).map_err(train_error)?;
    let exact = exact_match_accuracy(&net, &dataset).map_err(robustness_error)?;
    summary.push("samples", dataset.len());
    summary.push("exact_match_accuracy", exact);
    summary.push("bit_accuracy", bit_accuracy(&net, &dataset)?);
    Ok(())
}

fn run_perturb(
    config: &ResolvedConfig,
    output_dir: &Path,
    summary: &mut Summary,
) -> Result<(), HarnessError> {
    let net = load_network(Path::new(config.str_value("network_in")))?;
    let dataset = training_dataset_from(config)?;
    let epsilons = config.f64_list("epsilons");
    let trials = config.usize_value("trials");
    let rows = sensitivity_sweep(
        &net,
        &dataset,
        &epsilons,
        trials,
        config.u64_value("master_seed"),
    )
    .map_err(robustness_error)?;
    let mut csv = String::from("epsilon,flip_rate,accuracy\n");
    for row in &rows {
        let _ = writeln!(csv, "{},{},{}", row.epsilon, row.flip_rate, row.accuracy);
    }
    write_text(&output_dir.join("sweep.csv"), &csv)?;
    summary.push("samples", dataset.len());
    summary.push("trials_per_epsilon", trials);
    summary.push("epsilons", epsilons.len());
    let worst = rows.iter().map(|r| r.flip_rate).fold(0.0, f64::max);
    summary.push("worst_flip_rate", worst);
    Ok(())
}

fn run_faults(
    config: &ResolvedConfig,
    output_dir: &Path,
    summary: &mut Summary,
) -> Result<(), HarnessError> {
    let net = load_network(Path::new(config.str_value("network_in")))?;
    let dataset = training_dataset_from(config)?;
    dataset.check_against(&net.topology).map_err(train_error)?;
    let kind = match config.str_value("fault_kind") {
        "stuck_high" => FaultKind::StuckHigh,
        "stuck_low" => FaultKind::StuckLow,
        other => unreachable!("choice key validated: {other}"),
    };
    let rates = config.f64_list("fault_rates");
    let trials = config.usize_value("trials");
    if trials == 0 {
        return Err(usage("faults task needs at least 1 trial"));
    }
    let master_seed = config.u64_value("master_seed");
    let mut csv = String::from("fault_rate,accuracy\n");
    for (rate_index, &fault_rate) in rates.iter().enumerate() {
        let spec = FaultSpec { fault_rate, kind };
        spec.validate().map_err(robustness_error)?;
        // Integer match counts, so accuracy is exact and order-free.
        let mut matches = 0u64;
        for trial in 0..trials {
            let trial_id = (rate_index * trials + trial) as u64;
            let faulted =
                inject_faults(&net, &spec, master_seed, trial_id).map_err(robustness_error)?;
            for (input, target) in dataset.inputs.iter().zip(&dataset.targets) {
                let output = faulted
                    .forward(input, EvalMode::Digital)
                    .map_err(|e| internal(format!("faulted forward: {e}")))?;
                if output == *target {
                    matches += 1;
                }
            }
        }
        let accuracy = matches as f64 / (trials * dataset.len()) as f64;
        let _ = writeln!(csv, "{fault_rate},{accuracy}");
    }
    write_text(&output_dir.join("faults.csv"), &csv)?;
    summary.push("samples", dataset.len());
    summary.push("trials_per_rate", trials);
    summary.push("fault_kind", config.str_value("fault_kind"));
    summary.push("fault_rates", rates.len());
    Ok(())
}

fn run_accumulate(
    config: &ResolvedConfig,
    output_dir: &Path,
    summary: &mut Summary,
) -> Result<(), HarnessError> {
    let net = load_network(Path::new(config.str_value("network_in")))?;
    let dataset = training_dataset_from(config)?;
    let gains = config.f64_list("gains");
    let profiles = accumulation_profile(&net, &dataset, &gains).map_err(robustness_error)?;
    let mut csv = String::from("gain,layer,mismatch_rate\n");
    for profile in &profiles {
        for (layer, rate) in profile.per_layer.iter().enumerate() {
            let _ = writeln!(csv, "{},{layer},{rate}", profile.gain);
        }
    }
    write_text(&output_dir.join("accumulation.csv"), &csv)?;
    summary.push("samples", dataset.len());
    summary.push("layers", net.topology.n_layers());
    for profile in &profiles {
        summary.push(&format!("overall_mismatch_gain_{}", profile.gain), profile.overall);
    }
    Ok(())
}

fn run_classify(
    config: &ResolvedConfig,
    output_dir: &Path,
    summary: &mut Summary,
) -> Result<(), HarnessError> {
    let topology = topology_from(config)?;
    let params = circuit_from(config)?;
    let inverter = inverter_from(config)?;
    let (dataset, names) = raw_patterns_from(config)?.into_classes()?;
    check_class_inputs(&dataset, &topology)?;
    let n_classes = config.opt_usize("n_classes").unwrap_or(names.len());
    if n_classes < names.len() {
        return Err(data(format!(
            "dataset has {} distinct labels but n_classes = {n_classes}",
            names.len()
        )));
    }
    let codebook = make_codewords(
        n_classes,
        topology.n_outputs,
        config.usize_value("min_distance"),
        config.u64_value("codebook_seed"),
    )
    .map_err(bank_error)?;
    let bank =
        build_bank(&topology, n_classes, codebook, params, inverter).map_err(bank_error)?;
    let schedule = schedule_from(config, &topology)?;
    let (trained, report) = train_bank(&bank, &dataset, &schedule).map_err(bank_error)?;

    let bank_dir = PathBuf::from(config.str_value("bank_dir"));
    std::fs::create_dir_all(&bank_dir)
        .map_err(|e| usage(format!("bank_dir {}: {e}", bank_dir.display())))?;
    let fan_in = config.usize_value("fan_in");
    for (class, net) in trained.networks.iter().enumerate() {
        save_network(net, fan_in, &bank_dir.join(format!("class_{class}.json")))?;
    }
    let mut codebook_text = String::new();
    for codeword in &trained.codebook.codewords {
        let line: String = codeword.iter().map(|&b| if b { '1' } else { '0' }).collect();
        codebook_text.push_str(&line);
        codebook_text.push('\n');
    }
    write_text(&bank_dir.join("codebook.txt"), &codebook_text)?;
    for (class, outcome) in report.outcomes.iter().enumerate() {
        if let Some(TrainOutcome { history, .. }) = outcome {
            write_text(
                &output_dir.join(format!("history_class_{class}.csv")),
                &history_csv(history),
            )?;
        }
    }

    let mut confusion = vec![vec![0u64; n_classes]; n_classes];
    for (input, &label) in dataset.inputs.iter().zip(&dataset.labels) {
        let predicted = classify(&trained, input).map_err(bank_error)?.class;
        confusion[label][predicted] += 1;
    }
    let mut csv = String::from("actual,predicted,count\n");
    for (actual, row) in confusion.iter().enumerate() {
        for (predicted, &count) in row.iter().enumerate() {
            let _ = writeln!(csv, "{actual},{predicted},{count}");
        }
    }
    write_text(&output_dir.join("confusion.csv"), &csv)?;

    let accuracy = bank_accuracy(&trained, &dataset).map_err(bank_error)?;
    summary.push("samples", dataset.len());
    summary.push("n_classes", n_classes);
    for (index, name) in names.iter().enumerate() {
        summary.push(&format!("class_{index}"), name);
    }
    if !report.missing_classes.is_empty() {
        let missing: Vec<String> = report
            .missing_classes
            .iter()
            .map(|c| c.to_string())
            .collect();
        summary.push("classes_without_samples", missing.join(","));
    }
    summary.push("bank_accuracy", accuracy);
    summary.push("bank_dir", bank_dir.display());
    Ok(())
}

fn check_class_inputs(
    dataset: &ClassDataset,
    topology: &TreeTopology,
) -> Result<(), HarnessError> {
    let width = dataset.inputs[0].len();
    if width != topology.n_inputs {
        return Err(data(format!(
            "dataset has {width}-bit patterns, topology expects {}",
            topology.n_inputs
        )));
    }
    Ok(())
}
