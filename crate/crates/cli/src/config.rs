//! Per-command JSON config schemas. Every rejection names the offending field.

use std::fs;
use std::path::{Path, PathBuf};

use djc::channel::DephasingSpec;
use djc::code::CodeDocument;
use djc::{build_code, CodeSpec, ControlModel, DjcError, LogicalGate, C64};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
#[error("config field `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

pub fn bad(field: impl Into<String>, message: impl ToString) -> ConfigError {
    ConfigError {
        field: field.into(),
        message: message.to_string(),
    }
}

/// Reads a JSON config; parse errors carry the JSON path of the bad value.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| bad("--config", format!("cannot read {}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let p = e.path().to_string();
        let field = if p == "." { "<root>".to_string() } else { p };
        bad(field, e.into_inner())
    })
}

fn default_model() -> ControlModel {
    ControlModel::XY
}

fn code_from(n_pairs: usize, signs: &Option<Vec<i8>>) -> Result<CodeSpec, ConfigError> {
    let signs = signs.clone().unwrap_or_else(|| vec![1; n_pairs]);
    build_code(n_pairs, &signs).map_err(|e| match e {
        DjcError::SignCount { .. } | DjcError::InvalidSign(_) => bad("pair_signs", e),
        _ => bad("n_pairs", e),
    })
}

fn check_circuit(circuit: &[LogicalGate], n_logical: usize) -> Result<(), ConfigError> {
    for (k, g) in circuit.iter().enumerate() {
        let fields: &[&str] = match g {
            LogicalGate::CP { .. } => &["control", "target"],
            _ => &["target"],
        };
        for (name, t) in fields.iter().zip(g.targets()) {
            if t == 0 || t > n_logical {
                return Err(bad(
                    format!("circuit[{k}].{name}"),
                    format!("logical qubit {t} out of range 1..={n_logical}"),
                ));
            }
        }
        if let LogicalGate::CP { control, target } = g {
            if control == target {
                return Err(bad(format!("circuit[{k}].target"), "equals control"));
            }
        }
    }
    Ok(())
}

/// `verify`: either `n_pairs` (+ optional `pair_signs`) or a `code_file`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub n_pairs: Option<usize>,
    pub pair_signs: Option<Vec<i8>>,
    /// Code document to check as written; relative to the config file.
    pub code_file: Option<PathBuf>,
}

impl VerifyConfig {
    pub fn code(&self, base: &Path) -> Result<CodeSpec, ConfigError> {
        match (&self.n_pairs, &self.code_file) {
            (Some(_), Some(_)) => Err(bad("code_file", "give either n_pairs or code_file, not both")),
            (None, None) => Err(bad("n_pairs", "missing (or give code_file)")),
            (Some(n), None) => code_from(*n, &self.pair_signs),
            (None, Some(p)) => {
                let doc: CodeDocument = load(&base.join(p)).map_err(|e| bad(format!("code_file: {}", e.field), e.message))?;
                CodeSpec::from_document(&doc).map_err(|e| bad("code_file", e))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompileConfig {
    pub n_pairs: usize,
    pub pair_signs: Option<Vec<i8>>,
    #[serde(default = "default_model")]
    pub model: ControlModel,
    pub circuit: Vec<LogicalGate>,
}

impl CompileConfig {
    pub fn code(&self) -> Result<CodeSpec, ConfigError> {
        let code = code_from(self.n_pairs, &self.pair_signs)?;
        if self.circuit.is_empty() {
            return Err(bad("circuit", "empty circuit"));
        }
        check_circuit(&self.circuit, code.n_logical())?;
        Ok(code)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegisterKind {
    Encoded,
    /// One unprotected physical qubit.
    Bare,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialConfig {
    /// Haar-random logical state per trajectory.
    Random,
    /// Fixed logical amplitudes as `[re, im]` pairs.
    Amplitudes(Vec<[f64; 2]>),
}

fn default_register() -> RegisterKind {
    RegisterKind::Encoded
}
fn default_initial() -> InitialConfig {
    InitialConfig::Random
}
fn default_tau() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default = "default_register")]
    pub register: RegisterKind,
    pub n_pairs: Option<usize>,
    pub pair_signs: Option<Vec<i8>>,
    #[serde(default = "default_model")]
    pub model: ControlModel,
    /// Uniform emission rate; exclusive with `rates`.
    pub kappa: Option<f64>,
    pub rates: Option<Vec<f64>>,
    pub dt: f64,
    /// Free decay after the circuit.
    #[serde(default)]
    pub time: f64,
    /// Time per radian of pulse rotation.
    #[serde(default = "default_tau")]
    pub tau: f64,
    pub n_trajectories: usize,
    /// Defaults to true for encoded registers; not allowed for bare ones.
    pub recovery: Option<bool>,
    #[serde(default = "default_initial")]
    pub initial: InitialConfig,
    #[serde(default)]
    pub circuit: Vec<LogicalGate>,
    pub dephasing: Option<DephasingSpec>,
    pub seed: Option<u64>,
}

pub struct SimulationPlan {
    pub register: djc::channel::Register,
    pub config: djc::channel::TrajectoryConfig,
    pub initial: djc::ensemble::InitialLogical,
    pub n_trajectories: usize,
}

impl SimulateConfig {
    pub fn plan(&self, seed: u64) -> Result<SimulationPlan, ConfigError> {
        use djc::channel::{Register, TrajectoryConfig};
        use djc::ensemble::InitialLogical;

        let (register, n) = match self.register {
            RegisterKind::Encoded => {
                let n_pairs = self.n_pairs.ok_or_else(|| bad("n_pairs", "required for an encoded register"))?;
                let code = code_from(n_pairs, &self.pair_signs)?;
                check_circuit(&self.circuit, code.n_logical())?;
                let n = code.n_physical();
                (Register::Encoded(code), n)
            }
            RegisterKind::Bare => {
                for (field, set) in [
                    ("n_pairs", self.n_pairs.is_some()),
                    ("pair_signs", self.pair_signs.is_some()),
                    ("circuit", !self.circuit.is_empty()),
                    ("recovery", self.recovery == Some(true)),
                ] {
                    if set {
                        return Err(bad(field, "not applicable to a bare register"));
                    }
                }
                (Register::Bare, 1)
            }
        };
        let rates = match (&self.kappa, &self.rates) {
            (Some(_), Some(_)) => return Err(bad("rates", "give either kappa or rates, not both")),
            (None, None) => return Err(bad("kappa", "missing (or give rates)")),
            (Some(k), None) => vec![*k; n],
            (None, Some(r)) => r.clone(),
        };
        let rate_field = if self.kappa.is_some() { "kappa" } else { "rates" };
        if self.n_trajectories == 0 {
            return Err(bad("n_trajectories", "must be at least 1"));
        }
        let schedule = match &register {
            Register::Encoded(code) if !self.circuit.is_empty() => {
                djc::logic::compile_circuit(&self.circuit, code, self.model).map_err(|e| bad("circuit", e))?
            }
            _ => djc::PulseSchedule::new(),
        };
        let config = TrajectoryConfig {
            rates,
            dt: self.dt,
            seed,
            recovery_enabled: self.recovery.unwrap_or(self.register == RegisterKind::Encoded),
            model: self.model,
            dephasing: self.dephasing.clone(),
            schedule,
            tau: self.tau,
            idle_time: self.time,
        };
        config.validate(n).map_err(|e| match &e {
            DjcError::NegativeRate(_) | DjcError::DimensionMismatch { .. } => bad(rate_field, e),
            DjcError::StepTooLarge { .. } => bad("dt", e),
            DjcError::InvalidConfig(m) if m.starts_with("dt") => bad("dt", e),
            DjcError::InvalidConfig(m) if m.starts_with("tau") => bad("tau", e),
            DjcError::InvalidConfig(m) if m.starts_with("idle_time") => bad("time", e),
            DjcError::InvalidConfig(m) if m.starts_with("dephasing") => bad("dephasing", e),
            _ => bad("circuit", e),
        })?;
        let initial = match &self.initial {
            InitialConfig::Random => InitialLogical::Random,
            InitialConfig::Amplitudes(a) => {
                let dim = register.logical_dim();
                if a.len() != dim {
                    return Err(bad("initial.amplitudes", format!("expected {dim} amplitudes, got {}", a.len())));
                }
                let v: Vec<C64> = a.iter().map(|[re, im]| C64::new(*re, *im)).collect();
                register.encode(&v).map_err(|e| bad("initial.amplitudes", e))?;
                InitialLogical::Fixed(v)
            }
        };
        Ok(SimulationPlan {
            register,
            config,
            initial,
            n_trajectories: self.n_trajectories,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrepCheckConfig {
    /// Pair couplings `J_{2i-1,2i}`; their signs fix the code.
    pub couplings: Vec<f64>,
    #[serde(default = "default_model")]
    pub model: ControlModel,
    /// Circuit applied to the prepared state before readout.
    #[serde(default)]
    pub circuit: Vec<LogicalGate>,
    /// Readout shots of every logical qubit; 0 skips readout.
    #[serde(default)]
    pub shots: usize,
    pub seed: Option<u64>,
}

impl PrepCheckConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.couplings.len() < 2 {
            return Err(bad("couplings", format!("need at least 2 pairs, got {}", self.couplings.len())));
        }
        for (k, j) in self.couplings.iter().enumerate() {
            if *j == 0.0 || !j.is_finite() {
                return Err(bad(format!("couplings[{k}]"), format!("coupling must be finite and nonzero, got {j}")));
            }
        }
        if 2 * self.couplings.len() > djc::operator::MAX_QUBITS {
            return Err(bad("couplings", DjcError::TooManyQubits(2 * self.couplings.len())));
        }
        check_circuit(&self.circuit, self.couplings.len() - 1)
    }
}
