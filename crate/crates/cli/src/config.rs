//! Scenario files: JSON documents describing one command and its inputs.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Measures,
    Campaign,
    Scan,
    Variance,
    Meiweitz,
    Verify,
    RandomSweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Measures => "measures",
            Command::Campaign => "campaign",
            Command::Scan => "scan",
            Command::Variance => "variance",
            Command::Meiweitz => "meiweitz",
            Command::Verify => "verify",
            Command::RandomSweep => "random-sweep",
        }
    }
}

/// A complex entry written either as a bare real number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    pub fn to_complex(self) -> Complex64 {
        match self {
            ComplexValue::Real(re) => Complex64::new(re, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

pub fn to_vector(v: &[ComplexValue]) -> Vec<Complex64> {
    v.iter().map(|z| z.to_complex()).collect()
}

pub fn to_rows(rows: &[Vec<ComplexValue>]) -> Vec<Vec<Complex64>> {
    rows.iter().map(|r| to_vector(r)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleMember {
    pub weight: f64,
    pub amplitudes: Vec<ComplexValue>,
}

/// Exactly one way of giving the quanton state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSource {
    Pure(Vec<ComplexValue>),
    Ensemble(Vec<EnsembleMember>),
    Density(Vec<Vec<ComplexValue>>),
    /// Path to a JSON file holding one of the other forms; relative paths
    /// resolve against the scenario file's directory.
    File(PathBuf),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DetectorSource {
    #[default]
    None,
    Gram(Vec<Vec<ComplexValue>>),
    Vectors(Vec<Vec<ComplexValue>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub amp2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Exact,
    MonteCarlo,
    Quadrature,
    Bruteforce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanName {
    LinearRamp,
    ReferenceArm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mixedness {
    Pure,
    Mixed,
    /// Even-indexed instances pure, odd-indexed mixed.
    Alternate,
}

/// Protocol parameters; every command reads the subset it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Protocol {
    pub grid: usize,
    pub method: MethodName,
    pub samples: usize,
    pub points: usize,
    pub seed: u64,
    pub paths: usize,
    pub flipped_path: usize,
    pub overlap: f64,
    /// Overlap sweep for `meiweitz`; replaces `overlap` when present.
    pub overlaps: Option<Vec<f64>>,
    /// Scan profile; `scan` defaults to the linear ramp, `meiweitz` to a reference arm.
    pub scan: Option<ScanName>,
    pub reference_path: Option<usize>,
    pub n_min: usize,
    pub n_max: usize,
    pub count: usize,
    pub mixedness: Mixedness,
    pub ancilla_dim: usize,
    pub detector_dim: usize,
    /// Per-phase grid of the tensor-grid variance oracle in `verify`.
    pub bruteforce_grid: usize,
}

impl Default for Protocol {
    fn default() -> Self {
        Self {
            grid: 1024,
            method: MethodName::Exact,
            samples: 100_000,
            points: 3,
            seed: 0,
            paths: 3,
            flipped_path: 2,
            overlap: 0.0,
            overlaps: None,
            scan: None,
            reference_path: None,
            n_min: 2,
            n_max: 8,
            count: 100,
            mixedness: Mixedness::Alternate,
            ancilla_dim: 2,
            detector_dim: 2,
            bruteforce_grid: 3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub command: Command,
    #[serde(default)]
    pub state: Option<StateSource>,
    #[serde(default)]
    pub detector: DetectorSource,
    #[serde(default)]
    pub phases_rad: Option<Vec<f64>>,
    #[serde(default)]
    pub channel: Option<ChannelConfig>,
    #[serde(default)]
    pub protocol: Protocol,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ScenarioConfig {
    pub fn from_value(value: Value, origin: &str) -> Result<Self, CliError> {
        serde_json::from_value(value).map_err(|e| CliError::Parse(format!("{origin}: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Command-line overrides applied on top of a scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub sets: Vec<String>,
    pub seed: Option<u64>,
    pub out_json: Option<PathBuf>,
    pub out_csv: Option<PathBuf>,
}

/// Sets `path` (dot separated) inside `root`, creating objects on the way.
pub fn set_dotted(root: &mut Value, path: &str, value: Value) -> Result<(), CliError> {
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Parse(format!("--set: malformed key '{path}'")));
    }
    let mut node = root;
    for (depth, key) in keys.iter().enumerate() {
        if !node.is_object() {
            if node.is_null() {
                *node = Value::Object(Default::default());
            } else {
                return Err(CliError::Parse(format!(
                    "--set {path}: '{}' is not an object",
                    keys[..depth].join(".")
                )));
            }
        }
        let map = node.as_object_mut().expect("checked above");
        if depth + 1 == keys.len() {
            map.insert((*key).to_string(), value);
            return Ok(());
        }
        node = map.entry((*key).to_string()).or_insert(Value::Null);
    }
    unreachable!("loop returns on the last key")
}

/// `KEY=VALUE` with VALUE read as JSON, or as a plain string when it is not JSON.
pub fn parse_assignment(text: &str) -> Result<(String, Value), CliError> {
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| CliError::Parse(format!("--set expects KEY=VALUE, got '{text}'")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.trim().to_string(), value))
}

/// Reads the scenario file (if any), applies overrides and the command name,
/// and deserializes the result.
pub fn resolve(command: Command, config_path: Option<&Path>, ov: &Overrides) -> Result<ScenarioConfig, CliError> {
    let (mut value, origin) = match config_path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Io(format!("{}: cannot read scenario file: {e}", p.display())))?;
            let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?;
            (v, p.display().to_string())
        }
        None => (Value::Object(Default::default()), "<command line>".to_string()),
    };
    if !value.is_object() {
        return Err(CliError::Parse(format!("{origin}: scenario must be a JSON object")));
    }
    match value.get("command") {
        Some(Value::String(c)) if c != command.name() => {
            return Err(CliError::Parse(format!(
                "{origin}: scenario is for command '{c}' but '{}' was requested",
                command.name()
            )))
        }
        Some(Value::String(_)) | None => {}
        Some(other) => return Err(CliError::Parse(format!("{origin}: 'command' must be a string, got {other}"))),
    }
    set_dotted(&mut value, "command", Value::String(command.name().to_string()))?;
    for s in &ov.sets {
        let (key, v) = parse_assignment(s)?;
        set_dotted(&mut value, &key, v)?;
    }
    if let Some(seed) = ov.seed {
        set_dotted(&mut value, "protocol.seed", Value::from(seed))?;
    }
    if let Some(p) = &ov.out_json {
        set_dotted(&mut value, "output.json", Value::String(p.display().to_string()))?;
    }
    if let Some(p) = &ov.out_csv {
        set_dotted(&mut value, "output.csv", Value::String(p.display().to_string()))?;
    }
    let mut config = ScenarioConfig::from_value(value, &origin)?;
    if let (Some(StateSource::File(p)), Some(dir)) = (&config.state, config_path.and_then(Path::parent)) {
        if p.is_relative() {
            config.state = Some(StateSource::File(dir.join(p)));
        }
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_set_creates_nested_objects() {
        let mut v = serde_json::json!({"command": "variance"});
        set_dotted(&mut v, "protocol.samples", Value::from(5000)).unwrap();
        set_dotted(&mut v, "protocol.method", Value::from("monte_carlo")).unwrap();
        assert_eq!(v["protocol"]["samples"], 5000);
        let c = ScenarioConfig::from_value(v, "test").unwrap();
        assert_eq!(c.protocol.samples, 5000);
        assert_eq!(c.protocol.method, MethodName::MonteCarlo);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let v = serde_json::json!({"command": "measures", "protocl": {}});
        assert!(matches!(ScenarioConfig::from_value(v, "t"), Err(CliError::Parse(_))));
        let v = serde_json::json!({"command": "measures", "protocol": {"sample": 3}});
        assert!(ScenarioConfig::from_value(v, "t").is_err());
    }

    #[test]
    fn exactly_one_state_source() {
        let v = serde_json::json!({"command": "measures", "state": {"pure": [1, 0], "density": [[1, 0], [0, 0]]}});
        assert!(ScenarioConfig::from_value(v, "t").is_err());
        let v = serde_json::json!({"command": "measures", "state": {"pure": [0.6, [0, 0.8]]}});
        let c = ScenarioConfig::from_value(v, "t").unwrap();
        match c.state {
            Some(StateSource::Pure(a)) => assert_eq!(a[1].to_complex(), Complex64::new(0.0, 0.8)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn assignment_values() {
        assert_eq!(parse_assignment("a.b=3").unwrap(), ("a.b".into(), Value::from(3)));
        assert_eq!(parse_assignment("a=linear_ramp").unwrap().1, Value::from("linear_ramp"));
        assert!(parse_assignment("novalue").is_err());
    }
}
