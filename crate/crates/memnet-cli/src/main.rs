//! `memnet`: sizing, training, and robustness experiments for resistive
//! memory networks. Subcommands mirror experiment kinds; every flag
//! overrides the matching config key, and the merged config is echoed to
//! the output directory.

use clap::{Args, Parser, Subcommand};
use memnet_cli::config::{load_config_file, ResolvedConfig};
use memnet_cli::error::{usage, HarnessError};
use memnet_cli::experiment;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "memnet", version, about = "Resistive memory network experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inverter and memory-bit counts for a tree topology
    Size(SizeArgs),
    /// Input capacity implied by a memory budget
    Capacity(CapacityArgs),
    /// Train one network on a target-pattern dataset
    Train(TrainArgs),
    /// Accuracy of a saved network on a dataset
    Eval(EvalArgs),
    /// Monte Carlo conductance-tolerance sweep
    Perturb(PerturbArgs),
    /// Accuracy under stuck-cell fault injection
    Faults(FaultsArgs),
    /// Analog-vs-digital mismatch across inverter gains
    Accumulate(AccumulateArgs),
    /// Train and evaluate a multiclass classifier bank
    Classify(ClassifyArgs),
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines; flags override its keys
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<String>,
}

#[derive(Args)]
struct TopologyFlags {
    #[arg(long)]
    n_inputs: Option<usize>,
    #[arg(long)]
    fan_in: Option<usize>,
    #[arg(long)]
    n_outputs: Option<usize>,
}

#[derive(Args)]
struct DatasetFlags {
    #[arg(long)]
    dataset: Option<String>,
    /// pattern | pgm
    #[arg(long)]
    dataset_format: Option<String>,
    #[arg(long)]
    pgm_threshold: Option<u8>,
}

#[derive(Args)]
struct CircuitFlags {
    #[arg(long)]
    vdd: Option<f64>,
    #[arg(long)]
    vth: Option<f64>,
    #[arg(long)]
    g_on: Option<f64>,
    #[arg(long)]
    g_off: Option<f64>,
    /// ideal | sigmoid
    #[arg(long)]
    inverter: Option<String>,
    #[arg(long)]
    gain: Option<f64>,
}

#[derive(Args)]
struct ScheduleFlags {
    /// accuracy | accuracy_margin | bit_accuracy | bit_accuracy_margin
    #[arg(long)]
    objective: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    /// layers_then_all | all
    #[arg(long)]
    stage_plan: Option<String>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    mutation_rate: Option<f64>,
    #[arg(long)]
    crossover_rate: Option<f64>,
    #[arg(long)]
    elitism: Option<usize>,
    #[arg(long)]
    stop_at: Option<f64>,
}

#[derive(Args)]
struct SizeArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    topology: TopologyFlags,
}

#[derive(Args)]
struct CapacityArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    memory_bits: Option<u64>,
    /// paper | canonical
    #[arg(long)]
    capacity_mode: Option<String>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    topology: TopologyFlags,
    #[command(flatten)]
    dataset: DatasetFlags,
    #[command(flatten)]
    circuit: CircuitFlags,
    #[command(flatten)]
    schedule: ScheduleFlags,
    #[arg(long)]
    master_seed: Option<u64>,
    #[arg(long)]
    network_out: Option<String>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    network_in: Option<String>,
    #[command(flatten)]
    dataset: DatasetFlags,
}

#[derive(Args)]
struct PerturbArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    network_in: Option<String>,
    #[command(flatten)]
    dataset: DatasetFlags,
    /// Comma-separated epsilon list, e.g. 0.01,0.05
    #[arg(long)]
    epsilons: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    master_seed: Option<u64>,
}

#[derive(Args)]
struct FaultsArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    network_in: Option<String>,
    #[command(flatten)]
    dataset: DatasetFlags,
    /// Comma-separated fault-rate list, e.g. 0,0.02,0.05
    #[arg(long)]
    fault_rates: Option<String>,
    /// stuck_high | stuck_low
    #[arg(long)]
    fault_kind: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    master_seed: Option<u64>,
}

#[derive(Args)]
struct AccumulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    network_in: Option<String>,
    #[command(flatten)]
    dataset: DatasetFlags,
    /// Comma-separated gain list, e.g. 2,5,10,20,50
    #[arg(long)]
    gains: Option<String>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    topology: TopologyFlags,
    #[command(flatten)]
    dataset: DatasetFlags,
    #[command(flatten)]
    circuit: CircuitFlags,
    #[command(flatten)]
    schedule: ScheduleFlags,
    #[arg(long)]
    n_classes: Option<usize>,
    #[arg(long)]
    min_distance: Option<usize>,
    #[arg(long)]
    codebook_seed: Option<u64>,
    #[arg(long)]
    master_seed: Option<u64>,
    #[arg(long)]
    bank_dir: Option<String>,
}

type Overlay = Vec<(String, String)>;

fn push<T: ToString>(overlay: &mut Overlay, key: &str, value: &Option<T>) {
    if let Some(v) = value {
        overlay.push((key.to_string(), v.to_string()));
    }
}

impl TopologyFlags {
    fn collect(&self, overlay: &mut Overlay) {
        push(overlay, "n_inputs", &self.n_inputs);
        push(overlay, "fan_in", &self.fan_in);
        push(overlay, "n_outputs", &self.n_outputs);
    }
}

impl DatasetFlags {
    fn collect(&self, overlay: &mut Overlay) {
        push(overlay, "dataset", &self.dataset);
        push(overlay, "dataset_format", &self.dataset_format);
        push(overlay, "pgm_threshold", &self.pgm_threshold);
    }
}

impl CircuitFlags {
    fn collect(&self, overlay: &mut Overlay) {
        push(overlay, "vdd", &self.vdd);
        push(overlay, "vth", &self.vth);
        push(overlay, "g_on", &self.g_on);
        push(overlay, "g_off", &self.g_off);
        push(overlay, "inverter", &self.inverter);
        push(overlay, "gain", &self.gain);
    }
}

impl ScheduleFlags {
    fn collect(&self, overlay: &mut Overlay) {
        push(overlay, "objective", &self.objective);
        push(overlay, "lambda", &self.lambda);
        push(overlay, "stage_plan", &self.stage_plan);
        push(overlay, "generations", &self.generations);
        push(overlay, "population", &self.population);
        push(overlay, "mutation_rate", &self.mutation_rate);
        push(overlay, "crossover_rate", &self.crossover_rate);
        push(overlay, "elitism", &self.elitism);
        push(overlay, "stop_at", &self.stop_at);
    }
}

/// Config file first, then flags replace matching keys, then the
/// subcommand pins the task.
fn merge(common: &Common, task: &str, overlay: Overlay) -> Result<ResolvedConfig, HarnessError> {
    let mut entries = match &common.config {
        Some(path) => load_config_file(path)?,
        None => Vec::new(),
    };
    let mut overlay = overlay;
    push(&mut overlay, "output_dir", &common.output_dir);
    for (key, value) in overlay {
        entries.retain(|(k, _)| *k != key);
        entries.push((key, value));
    }
    if let Some((_, configured)) = entries.iter().find(|(k, _)| k == "task") {
        if configured != task {
            return Err(usage(format!(
                "config task '{configured}' does not match subcommand '{task}'"
            )));
        }
    } else {
        entries.push(("task".to_string(), task.to_string()));
    }
    ResolvedConfig::resolve(entries)
}

fn resolve(cli: &Command) -> Result<ResolvedConfig, HarnessError> {
    let mut overlay = Overlay::new();
    match cli {
        Command::Size(args) => {
            args.topology.collect(&mut overlay);
            merge(&args.common, "size", overlay)
        }
        Command::Capacity(args) => {
            push(&mut overlay, "memory_bits", &args.memory_bits);
            push(&mut overlay, "capacity_mode", &args.capacity_mode);
            merge(&args.common, "capacity", overlay)
        }
        Command::Train(args) => {
            args.topology.collect(&mut overlay);
            args.dataset.collect(&mut overlay);
            args.circuit.collect(&mut overlay);
            args.schedule.collect(&mut overlay);
            push(&mut overlay, "master_seed", &args.master_seed);
            push(&mut overlay, "network_out", &args.network_out);
            merge(&args.common, "train", overlay)
        }
        Command::Eval(args) => {
            push(&mut overlay, "network_in", &args.network_in);
            args.dataset.collect(&mut overlay);
            merge(&args.common, "eval", overlay)
        }
        Command::Perturb(args) => {
            push(&mut overlay, "network_in", &args.network_in);
            args.dataset.collect(&mut overlay);
            push(&mut overlay, "epsilons", &args.epsilons);
            push(&mut overlay, "trials", &args.trials);
            push(&mut overlay, "master_seed", &args.master_seed);
            merge(&args.common, "perturb", overlay)
        }
        Command::Faults(args) => {
            push(&mut overlay, "network_in", &args.network_in);
            args.dataset.collect(&mut overlay);
            push(&mut overlay, "fault_rates", &args.fault_rates);
            push(&mut overlay, "fault_kind", &args.fault_kind);
            push(&mut overlay, "trials", &args.trials);
            push(&mut overlay, "master_seed", &args.master_seed);
            merge(&args.common, "faults", overlay)
        }
        Command::Accumulate(args) => {
            push(&mut overlay, "network_in", &args.network_in);
            args.dataset.collect(&mut overlay);
            push(&mut overlay, "gains", &args.gains);
            merge(&args.common, "accumulate", overlay)
        }
        Command::Classify(args) => {
            args.topology.collect(&mut overlay);
            args.dataset.collect(&mut overlay);
            args.circuit.collect(&mut overlay);
            args.schedule.collect(&mut overlay);
            push(&mut overlay, "n_classes", &args.n_classes);
            push(&mut overlay, "min_distance", &args.min_distance);
            push(&mut overlay, "codebook_seed", &args.codebook_seed);
            push(&mut overlay, "master_seed", &args.master_seed);
            push(&mut overlay, "bank_dir", &args.bank_dir);
            merge(&args.common, "classify", overlay)
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    let outcome = resolve(&cli.command).and_then(|config| experiment::run(&config));
    match outcome {
        Ok(summary) => print!("{}", summary.render()),
        Err(err) => {
            eprintln!("{err}");
            std::process::exit(err.exit_code());
        }
    }
}
