//! Flat key-value experiment configs.
//!
//! A config is plain text, one `key = value` per line, `#` comments.
//! Every run resolves to an explicit key set: unknown keys are rejected,
//! static defaults are filled in, and the resolved config is echoed to the
//! output directory so the run is reproducible from that file alone. All
//! seeds are explicit; nothing reads the clock.

use crate::error::{usage, HarnessError};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Size,
    Capacity,
    Train,
    Eval,
    Perturb,
    Faults,
    Accumulate,
    Classify,
}

impl TaskKind {
    pub fn parse(value: &str) -> Result<Self, HarnessError> {
        match value {
            "size" => Ok(TaskKind::Size),
            "capacity" => Ok(TaskKind::Capacity),
            "train" => Ok(TaskKind::Train),
            "eval" => Ok(TaskKind::Eval),
            "perturb" => Ok(TaskKind::Perturb),
            "faults" => Ok(TaskKind::Faults),
            "accumulate" => Ok(TaskKind::Accumulate),
            "classify" => Ok(TaskKind::Classify),
            other => Err(usage(format!("unknown task '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::Size => "size",
            TaskKind::Capacity => "capacity",
            TaskKind::Train => "train",
            TaskKind::Eval => "eval",
            TaskKind::Perturb => "perturb",
            TaskKind::Faults => "faults",
            TaskKind::Accumulate => "accumulate",
            TaskKind::Classify => "classify",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a key's value must parse as.
#[derive(Debug, Clone, Copy)]
enum ValueKind {
    Str,
    Usize,
    U64,
    U8,
    F64,
    F64List,
    Choice(&'static [&'static str]),
}

const CAPACITY_MODES: &[&str] = &["paper", "canonical"];
const DATASET_FORMATS: &[&str] = &["pattern", "pgm"];
const INVERTERS: &[&str] = &["ideal", "sigmoid"];
const OBJECTIVES: &[&str] = &[
    "accuracy",
    "accuracy_margin",
    "bit_accuracy",
    "bit_accuracy_margin",
];
const STAGE_PLANS: &[&str] = &["layers_then_all", "all"];
const FAULT_KINDS: &[&str] = &["stuck_high", "stuck_low"];
const TASKS: &[&str] = &[
    "size",
    "capacity",
    "train",
    "eval",
    "perturb",
    "faults",
    "accumulate",
    "classify",
];

fn value_kind(key: &str) -> Option<ValueKind> {
    Some(match key {
        "task" => ValueKind::Choice(TASKS),
        "output_dir" | "dataset" | "network_in" | "network_out" | "bank_dir" => ValueKind::Str,
        "n_inputs" | "fan_in" | "n_outputs" | "generations" | "population" | "elitism"
        | "trials" | "n_classes" | "min_distance" => ValueKind::Usize,
        "memory_bits" | "master_seed" | "codebook_seed" => ValueKind::U64,
        "pgm_threshold" => ValueKind::U8,
        "vdd" | "vth" | "g_on" | "g_off" | "gain" | "lambda" | "stop_at" | "mutation_rate"
        | "crossover_rate" => ValueKind::F64,
        "epsilons" | "fault_rates" | "gains" => ValueKind::F64List,
        "capacity_mode" => ValueKind::Choice(CAPACITY_MODES),
        "dataset_format" => ValueKind::Choice(DATASET_FORMATS),
        "inverter" => ValueKind::Choice(INVERTERS),
        "objective" => ValueKind::Choice(OBJECTIVES),
        "stage_plan" => ValueKind::Choice(STAGE_PLANS),
        "fault_kind" => ValueKind::Choice(FAULT_KINDS),
        _ => return None,
    })
}

const DATASET_KEYS: &[&str] = &["dataset", "dataset_format", "pgm_threshold"];
const CIRCUIT_KEYS: &[&str] = &["vdd", "vth", "g_on", "g_off", "inverter", "gain"];
const SCHEDULE_KEYS: &[&str] = &[
    "objective",
    "lambda",
    "stage_plan",
    "generations",
    "population",
    "mutation_rate",
    "crossover_rate",
    "elitism",
    "stop_at",
];

/// (required, optional) key sets per task, beyond `task` and `output_dir`.
fn task_schema(task: TaskKind) -> (Vec<&'static str>, Vec<&'static str>) {
    let mut required: Vec<&str> = vec!["output_dir"];
    let mut optional: Vec<&str> = Vec::new();
    match task {
        TaskKind::Size => {
            required.extend(["n_inputs", "n_outputs"]);
            optional.push("fan_in");
        }
        TaskKind::Capacity => {
            required.push("memory_bits");
            optional.push("capacity_mode");
        }
        TaskKind::Train => {
            required.extend(["n_inputs", "n_outputs", "dataset", "master_seed"]);
            optional.extend(["fan_in", "network_out"]);
            optional.extend(&DATASET_KEYS[1..]);
            optional.extend(CIRCUIT_KEYS);
            optional.extend(SCHEDULE_KEYS);
        }
        TaskKind::Eval => {
            required.extend(["network_in", "dataset"]);
            optional.extend(&DATASET_KEYS[1..]);
        }
        TaskKind::Perturb => {
            required.extend(["network_in", "dataset", "epsilons", "trials", "master_seed"]);
            optional.extend(&DATASET_KEYS[1..]);
        }
        TaskKind::Faults => {
            required.extend([
                "network_in",
                "dataset",
                "fault_rates",
                "fault_kind",
                "trials",
                "master_seed",
            ]);
            optional.extend(&DATASET_KEYS[1..]);
        }
        TaskKind::Accumulate => {
            required.extend(["network_in", "dataset", "gains"]);
            optional.extend(&DATASET_KEYS[1..]);
        }
        TaskKind::Classify => {
            required.extend([
                "n_inputs",
                "n_outputs",
                "dataset",
                "codebook_seed",
                "master_seed",
            ]);
            optional.extend(["fan_in", "n_classes", "min_distance", "bank_dir"]);
            optional.extend(&DATASET_KEYS[1..]);
            optional.extend(CIRCUIT_KEYS);
            optional.extend(SCHEDULE_KEYS);
        }
    }
    (required, optional)
}

/// Parses `key = value` lines. Order is preserved; duplicates are
/// rejected here, before merge semantics can hide them.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, HarnessError> {
    let mut entries: Vec<(String, String)> = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected 'key = value'", index + 1)))?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(usage(format!(
                "config line {}: empty key or value",
                index + 1
            )));
        }
        if entries.iter().any(|(k, _)| k == key) {
            return Err(usage(format!("config line {}: duplicate key '{key}'", index + 1)));
        }
        entries.push((key.to_string(), value.to_string()));
    }
    Ok(entries)
}

pub fn load_config_file(path: &Path) -> Result<Vec<(String, String)>, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("config file {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// A validated config: task known, every key allowed for the task and
/// well-typed, required keys present, static defaults filled in.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub task: TaskKind,
    entries: BTreeMap<String, String>,
}

impl ResolvedConfig {
    pub fn resolve(entries: Vec<(String, String)>) -> Result<Self, HarnessError> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (key, value) in entries {
            if map.insert(key.clone(), value).is_some() {
                return Err(usage(format!("duplicate key '{key}'")));
            }
        }
        let task = TaskKind::parse(
            map.get("task")
                .ok_or_else(|| usage("missing required key 'task'"))?,
        )?;
        let (required, optional) = task_schema(task);
        for key in map.keys() {
            if key == "task" {
                continue;
            }
            if value_kind(key).is_none() {
                return Err(usage(format!("unknown key '{key}'")));
            }
            if !required.contains(&key.as_str()) && !optional.contains(&key.as_str()) {
                return Err(usage(format!("key '{key}' does not apply to task '{task}'")));
            }
        }
        for key in &required {
            if !map.contains_key(*key) {
                return Err(usage(format!("task '{task}' requires key '{key}'")));
            }
        }
        let config = ResolvedConfig { task, entries: map };
        config.check_values()?;
        Ok(config.with_defaults())
    }

    fn check_values(&self) -> Result<(), HarnessError> {
        for (key, value) in &self.entries {
            let kind = value_kind(key).expect("keys validated in resolve");
            let bad = |detail: &str| usage(format!("key '{key}': {detail} (got '{value}')"));
            match kind {
                ValueKind::Str => {}
                ValueKind::Usize => {
                    value.parse::<usize>().map_err(|_| bad("expected a non-negative integer"))?;
                }
                ValueKind::U64 => {
                    value.parse::<u64>().map_err(|_| bad("expected a non-negative integer"))?;
                }
                ValueKind::U8 => {
                    value.parse::<u8>().map_err(|_| bad("expected an integer in 0..=255"))?;
                }
                ValueKind::F64 => {
                    let parsed: f64 =
                        value.parse().map_err(|_| bad("expected a number"))?;
                    if !parsed.is_finite() {
                        return Err(bad("expected a finite number"));
                    }
                }
                ValueKind::F64List => {
                    for item in value.split(',') {
                        let parsed: f64 = item
                            .trim()
                            .parse()
                            .map_err(|_| bad("expected comma-separated numbers"))?;
                        if !parsed.is_finite() {
                            return Err(bad("expected finite numbers"));
                        }
                    }
                }
                ValueKind::Choice(choices) => {
                    if !choices.contains(&value.as_str()) {
                        return Err(bad(&format!("expected one of {}", choices.join(", "))));
                    }
                }
            }
        }
        match (self.get("inverter"), self.get("gain")) {
            (Some("sigmoid"), None) => {
                return Err(usage("inverter = sigmoid requires key 'gain'"))
            }
            (Some("ideal") | None, Some(_)) => {
                return Err(usage("key 'gain' requires inverter = sigmoid"))
            }
            _ => {}
        }
        let margin_objective = matches!(
            self.get("objective"),
            Some("accuracy_margin") | Some("bit_accuracy_margin")
        );
        if margin_objective && self.get("lambda").is_none() {
            return Err(usage("margin objectives require key 'lambda'"));
        }
        if !margin_objective && self.get("lambda").is_some() {
            return Err(usage("key 'lambda' requires a margin objective"));
        }
        Ok(())
    }

    /// Static defaults, materialized so the echoed config is complete.
    fn with_defaults(mut self) -> Self {
        let task = self.task;
        let mut default = |key: &str, value: String| {
            self.entries.entry(key.to_string()).or_insert(value);
        };
        match task {
            TaskKind::Size => default("fan_in", "6".into()),
            TaskKind::Capacity => default("capacity_mode", "paper".into()),
            TaskKind::Eval | TaskKind::Perturb | TaskKind::Faults | TaskKind::Accumulate => {
                default("dataset_format", "pattern".into());
            }
            TaskKind::Train | TaskKind::Classify => {
                default("fan_in", "6".into());
                default("dataset_format", "pattern".into());
                default("vdd", "1".into());
                default("vth", "0.5".into());
                default("g_on", "1".into());
                default("g_off", "0.01".into());
                default("inverter", "ideal".into());
                default("stage_plan", "layers_then_all".into());
                match task {
                    TaskKind::Train => default("objective", "accuracy".into()),
                    _ => default("objective", "bit_accuracy".into()),
                }
            }
        }
        if self.get("dataset_format") == Some("pgm") {
            let threshold = self.entries.get("pgm_threshold").cloned();
            self.entries
                .insert("pgm_threshold".into(), threshold.unwrap_or_else(|| "128".into()));
        }
        if self.task == TaskKind::Train && !self.entries.contains_key("network_out") {
            let path = Path::new(self.get("output_dir").expect("required"))
                .join("network.json");
            self.entries
                .insert("network_out".into(), path.to_string_lossy().into_owned());
        }
        if self.task == TaskKind::Classify {
            if !self.entries.contains_key("bank_dir") {
                let path = Path::new(self.get("output_dir").expect("required")).join("bank");
                self.entries
                    .insert("bank_dir".into(), path.to_string_lossy().into_owned());
            }
            self.entries
                .entry("min_distance".into())
                .or_insert_with(|| "4".into());
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn str_value(&self, key: &str) -> &str {
        self.get(key).unwrap_or_else(|| panic!("key '{key}' resolved"))
    }

    pub fn usize_value(&self, key: &str) -> usize {
        self.str_value(key).parse().expect("validated in resolve")
    }

    pub fn u64_value(&self, key: &str) -> u64 {
        self.str_value(key).parse().expect("validated in resolve")
    }

    pub fn f64_value(&self, key: &str) -> f64 {
        self.str_value(key).parse().expect("validated in resolve")
    }

    pub fn opt_usize(&self, key: &str) -> Option<usize> {
        self.get(key).map(|v| v.parse().expect("validated in resolve"))
    }

    pub fn opt_f64(&self, key: &str) -> Option<f64> {
        self.get(key).map(|v| v.parse().expect("validated in resolve"))
    }

    pub fn f64_list(&self, key: &str) -> Vec<f64> {
        self.str_value(key)
            .split(',')
            .map(|item| item.trim().parse().expect("validated in resolve"))
            .collect()
    }

    /// Canonical text form: sorted `key = value` lines. Reproducing the
    /// run needs nothing but this file.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.entries {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(value);
            out.push('\n');
        }
        out
    }
}
