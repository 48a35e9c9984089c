//! Run configuration: a single flat JSON document.
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `n_qubits` | register size, 1 or 2 | required |
//! | `lengths` | sequence lengths, an arithmetic progression | required |
//! | `sequences_per_length` | random sequences per length | required |
//! | `master_seed` | root of every derived seed | required |
//! | `shots` | finite-shot estimates instead of exact expectations | absent |
//! | `initial_state` | computational basis index of the initial state | 0 |
//! | `ideal_inverter` | skip the error after the inverting gate | false |
//! | `leakage_policy` | `identity`, `fixed_phases` or `random_phases` | `identity` |
//! | `leakage_phases` | per-qudit phases for `fixed_phases` | |
//! | `leakage_seed` | phase seed for `random_phases` | 0 |
//! | `entangler` | `diagonal` or `leak_mixing` | `diagonal` |
//! | `phase_masks` | include the leakage phase masks | true |
//! | `group_cache` | group cache path, built if missing | absent |
//! | `gate_dependent_spread` | per-Clifford unitary perturbation of the gate error | absent |
//! | `gate_dependent_seed` | seed of the perturbations | 0 |
//! | `interleaved_gate` | gate name or matrix of `[re, im]` rows | absent |
//! | `interleaved_gate_seed` | seed for the `haar` gate | 0 |
//! | `fit_max_order` | largest model order scanned by `fit` | 3 |
//! | `bootstrap_replicates` | bootstrap replicates of `fit` | 1000 |
//!
//! Channels are described by the keys `model`, `delta`, `infidelity`,
//! `env_dim`, `seed`, `p` and `file` under the prefixes `error_` (gate
//! error), `spam_` (preparation and measurement error) and
//! `interleaved_error_` (error of the interleaved gate). `model` is one of
//! `none`, `unitary`, `dilated`, `stochastic`, `depolarizing` or `file`;
//! `infidelity` tunes `delta` to the requested computational infidelity.

use std::path::{Path, PathBuf};

use leakrb_core::channel::{
    depolarizing_comp, dilated_error, perturbed_channels, stochastic_error, tune_delta,
    unitary_error, Channel, ErrorModel,
};
use leakrb_core::clifford::{
    embed_qutrit, generators, EntanglerVariant, ExtendedCliffordSet, LeakageAction, LeakagePolicy,
    QutritUnitary, SetConfig,
};
use leakrb_core::engine::{derive_seed, ProtocolSpec, SequenceOptions};
use leakrb_core::linalg::{haar_unitary, ComplexMatrix};
use leakrb_core::register::{qubit_dim, qutrit_dim};
use leakrb_core::{rng_from_seed, tol};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::io;

const BASE_KEYS: [&str; 19] = [
    "n_qubits",
    "lengths",
    "sequences_per_length",
    "master_seed",
    "shots",
    "initial_state",
    "ideal_inverter",
    "leakage_policy",
    "leakage_phases",
    "leakage_seed",
    "entangler",
    "phase_masks",
    "group_cache",
    "gate_dependent_spread",
    "gate_dependent_seed",
    "interleaved_gate",
    "interleaved_gate_seed",
    "fit_max_order",
    "bootstrap_replicates",
];

const CHANNEL_KEYS: [&str; 7] = [
    "model",
    "delta",
    "infidelity",
    "env_dim",
    "seed",
    "p",
    "file",
];

const CHANNEL_PREFIXES: [&str; 3] = ["error_", "spam_", "interleaved_error_"];

/// Command-line values that replace config entries before hashing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub shots: Option<u64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    #[default]
    Identity,
    FixedPhases,
    RandomPhases,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntanglerKind {
    #[default]
    Diagonal,
    LeakMixing,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    #[default]
    None,
    Unitary,
    Dilated,
    Stochastic,
    Depolarizing,
    File,
}

/// A channel descriptor read from one key prefix.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
pub struct ChannelSpec {
    #[serde(default)]
    pub model: ChannelKind,
    pub delta: Option<f64>,
    pub infidelity: Option<f64>,
    #[serde(default = "default_env_dim")]
    pub env_dim: usize,
    #[serde(default)]
    pub seed: u64,
    pub p: Option<f64>,
    pub file: Option<PathBuf>,
}

fn default_env_dim() -> usize {
    2
}

/// Interleaved gate: a name (`identity`, `haar` or a generator name such
/// as `h0` or `cx01`) or a matrix on the qubit or qutrit register.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GateSpec {
    Named(String),
    Matrix(Vec<Vec<[f64; 2]>>),
}

fn yes() -> bool {
    true
}

fn default_max_order() -> usize {
    3
}

fn default_replicates() -> usize {
    1000
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
struct Base {
    n_qubits: usize,
    lengths: Vec<usize>,
    sequences_per_length: usize,
    master_seed: u64,
    shots: Option<u64>,
    #[serde(default)]
    initial_state: usize,
    #[serde(default)]
    ideal_inverter: bool,
    #[serde(default)]
    leakage_policy: PolicyKind,
    leakage_phases: Option<Vec<f64>>,
    #[serde(default)]
    leakage_seed: u64,
    #[serde(default)]
    entangler: EntanglerKind,
    #[serde(default = "yes")]
    phase_masks: bool,
    group_cache: Option<PathBuf>,
    gate_dependent_spread: Option<f64>,
    #[serde(default)]
    gate_dependent_seed: u64,
    interleaved_gate: Option<GateSpec>,
    #[serde(default)]
    interleaved_gate_seed: u64,
    #[serde(default = "default_max_order")]
    fit_max_order: usize,
    #[serde(default = "default_replicates")]
    bootstrap_replicates: usize,
}

/// Parsed and validated configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RbConfig {
    pub n_qubits: usize,
    pub lengths: Vec<usize>,
    pub sequences_per_length: usize,
    pub master_seed: u64,
    pub shots: Option<u64>,
    pub initial_state: usize,
    pub ideal_inverter: bool,
    pub leakage_policy: PolicyKind,
    pub leakage_phases: Option<Vec<f64>>,
    pub leakage_seed: u64,
    pub entangler: EntanglerKind,
    pub phase_masks: bool,
    pub group_cache: Option<PathBuf>,
    pub gate_dependent_spread: Option<f64>,
    pub gate_dependent_seed: u64,
    pub interleaved_gate: Option<GateSpec>,
    pub interleaved_gate_seed: u64,
    pub fit_max_order: usize,
    pub bootstrap_replicates: usize,
    pub error: ChannelSpec,
    pub spam: ChannelSpec,
    pub interleaved_error: ChannelSpec,
    /// Effective document after overrides.
    pub document: Value,
    /// SHA-256 of the canonical document, hex encoded.
    pub hash: String,
    /// Directory against which relative paths are resolved.
    pub base_dir: PathBuf,
}

/// Serializes `value` with object keys sorted at every level.
pub fn canonical_json(value: &Value) -> String {
    fn sorted(v: &Value) -> Value {
        match v {
            Value::Object(m) => {
                let mut keys: Vec<&String> = m.keys().collect();
                keys.sort();
                let mut out = Map::new();
                for k in keys {
                    out.insert(k.clone(), sorted(&m[k]));
                }
                Value::Object(out)
            }
            Value::Array(a) => Value::Array(a.iter().map(sorted).collect()),
            other => other.clone(),
        }
    }
    sorted(value).to_string()
}

pub fn config_hash(value: &Value) -> String {
    hex::encode(Sha256::digest(canonical_json(value).as_bytes()))
}

fn config_err(e: serde_json::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn is_arithmetic(lengths: &[usize]) -> bool {
    lengths.windows(3).all(|w| w[1] - w[0] == w[2] - w[1])
}

impl RbConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::from_value(value, overrides, &dir)
    }

    pub fn from_value(value: Value, overrides: &Overrides, base_dir: &Path) -> Result<Self> {
        let Value::Object(mut map) = value else {
            return Err(CliError::Config("config must be a JSON object".into()));
        };
        if let Some(seed) = overrides.seed {
            map.insert("master_seed".into(), seed.into());
        }
        if let Some(shots) = overrides.shots {
            map.insert("shots".into(), shots.into());
        }
        let known = |k: &str| {
            BASE_KEYS.contains(&k)
                || CHANNEL_PREFIXES.iter().any(|p| {
                    k.strip_prefix(p)
                        .is_some_and(|rest| CHANNEL_KEYS.contains(&rest))
                })
        };
        let mut unknown: Vec<&String> = map.keys().filter(|k| !known(k)).collect();
        if !unknown.is_empty() {
            unknown.sort();
            let list: Vec<&str> = unknown.iter().map(|s| s.as_str()).collect();
            return Err(CliError::Config(format!(
                "unknown config keys: {}",
                list.join(", ")
            )));
        }

        let document = Value::Object(map.clone());
        let hash = config_hash(&document);
        let mut channels = CHANNEL_PREFIXES.map(|_| Map::new());
        let mut base = Map::new();
        for (k, v) in map {
            match CHANNEL_PREFIXES.iter().position(|p| k.starts_with(p)) {
                Some(i) => {
                    channels[i].insert(k[CHANNEL_PREFIXES[i].len()..].to_string(), v);
                }
                None => {
                    base.insert(k, v);
                }
            }
        }
        let base: Base = serde_json::from_value(Value::Object(base)).map_err(config_err)?;
        let [error, spam, interleaved_error] =
            channels.map(|m| serde_json::from_value::<ChannelSpec>(Value::Object(m)));
        let cfg = Self {
            n_qubits: base.n_qubits,
            lengths: base.lengths,
            sequences_per_length: base.sequences_per_length,
            master_seed: base.master_seed,
            shots: base.shots,
            initial_state: base.initial_state,
            ideal_inverter: base.ideal_inverter,
            leakage_policy: base.leakage_policy,
            leakage_phases: base.leakage_phases,
            leakage_seed: base.leakage_seed,
            entangler: base.entangler,
            phase_masks: base.phase_masks,
            group_cache: base.group_cache.map(|p| base_dir.join(p)),
            gate_dependent_spread: base.gate_dependent_spread,
            gate_dependent_seed: base.gate_dependent_seed,
            interleaved_gate: base.interleaved_gate,
            interleaved_gate_seed: base.interleaved_gate_seed,
            fit_max_order: base.fit_max_order,
            bootstrap_replicates: base.bootstrap_replicates,
            error: error.map_err(config_err)?,
            spam: spam.map_err(config_err)?,
            interleaved_error: interleaved_error.map_err(config_err)?,
            document,
            hash,
            base_dir: base_dir.to_path_buf(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(1..=2).contains(&self.n_qubits) {
            return bad(format!("n_qubits must be 1 or 2, got {}", self.n_qubits));
        }
        if self.lengths.is_empty()
            || self.lengths[0] < 1
            || self.lengths.windows(2).any(|w| w[1] <= w[0])
        {
            return bad("lengths must be non-empty, >= 1 and strictly increasing".into());
        }
        if !is_arithmetic(&self.lengths) {
            return bad("lengths must be uniformly spaced".into());
        }
        if self.sequences_per_length == 0 {
            return bad("sequences_per_length must be >= 1".into());
        }
        if self.shots == Some(0) {
            return bad("shots must be >= 1".into());
        }
        if self.initial_state >= qubit_dim(self.n_qubits) {
            return bad(format!(
                "initial_state {} outside the computational basis",
                self.initial_state
            ));
        }
        if self.leakage_policy == PolicyKind::FixedPhases
            && self.leakage_phases.as_ref().map(Vec::len) != Some(self.n_qubits)
        {
            return bad(format!(
                "fixed_phases needs {} leakage_phases",
                self.n_qubits
            ));
        }
        if self.fit_max_order == 0 {
            return bad("fit_max_order must be >= 1".into());
        }
        if self.error.model == ChannelKind::None && self.gate_dependent_spread.is_some() {
            return bad("gate_dependent_spread needs an error model".into());
        }
        for (prefix, spec) in
            CHANNEL_PREFIXES
                .iter()
                .zip([&self.error, &self.spam, &self.interleaved_error])
        {
            check_channel_spec(prefix, spec)?;
        }
        Ok(())
    }

    pub fn protocol_spec(&self) -> ProtocolSpec {
        ProtocolSpec {
            lengths: self.lengths.clone(),
            sequences_per_length: self.sequences_per_length,
            master_seed: self.master_seed,
            options: SequenceOptions {
                shots: self.shots,
                ideal_inverter: self.ideal_inverter,
                initial_state: self.initial_state,
            },
        }
    }

    pub fn set_config(&self) -> SetConfig {
        SetConfig {
            policy: match self.leakage_policy {
                PolicyKind::Identity => LeakagePolicy::Identity,
                PolicyKind::FixedPhases => {
                    LeakagePolicy::FixedPhases(self.leakage_phases.clone().unwrap_or_default())
                }
                PolicyKind::RandomPhases => LeakagePolicy::RandomPhases {
                    seed: self.leakage_seed,
                },
            },
            entangler: match self.entangler {
                EntanglerKind::Diagonal => EntanglerVariant::Diagonal,
                EntanglerKind::LeakMixing => EntanglerVariant::LeakMixing,
            },
            phase_masks: self.phase_masks,
        }
    }

    /// Loads the group cache (building and writing it when missing) and
    /// assembles the extended set.
    pub fn build_set(&self) -> Result<ExtendedCliffordSet> {
        let group = match &self.group_cache {
            Some(path) if path.exists() => {
                let g = io::read_group_cache(path)?;
                if g.n_qubits() != self.n_qubits {
                    return Err(CliError::Config(format!(
                        "group cache {} holds {} qubits, config asks for {}",
                        path.display(),
                        g.n_qubits(),
                        self.n_qubits
                    )));
                }
                g
            }
            Some(path) => {
                let g = leakrb_core::clifford::generate_clifford_group(self.n_qubits)?;
                io::write_group_cache(path, &g)?;
                g
            }
            None => leakrb_core::clifford::generate_clifford_group(self.n_qubits)?,
        };
        Ok(ExtendedCliffordSet::build(&group, &self.set_config())?)
    }

    fn dim(&self) -> usize {
        qutrit_dim(self.n_qubits)
    }

    /// The gate error channel, identity when no model is configured.
    pub fn gate_channel(&self) -> Result<Channel> {
        Ok(build_channel(&self.error, self.n_qubits, &self.base_dir)?
            .unwrap_or_else(|| Channel::identity(self.dim())))
    }

    pub fn error_model(&self, set: &ExtendedCliffordSet) -> Result<ErrorModel> {
        let base = self.gate_channel()?;
        let model = match self.gate_dependent_spread {
            Some(spread) => {
                let mut rng = rng_from_seed(self.gate_dependent_seed);
                let per = perturbed_channels(&base, set.cliffords().len(), spread, &mut rng)?;
                ErrorModel::gate_dependent(per, base)?
            }
            None => ErrorModel::gate_independent(base),
        };
        match build_spam(&self.spam, self.n_qubits, &self.base_dir)? {
            Some((prep, meas)) => Ok(model.with_spam(prep, meas)?),
            None => Ok(model),
        }
    }

    /// The interleaved gate and its error, if a gate is configured.
    pub fn interleaved(&self) -> Result<Option<(QutritUnitary, Channel)>> {
        let Some(spec) = &self.interleaved_gate else {
            return Ok(None);
        };
        let gate = build_gate(spec, self.n_qubits, self.interleaved_gate_seed)?;
        let error = build_channel(&self.interleaved_error, self.n_qubits, &self.base_dir)?
            .unwrap_or_else(|| Channel::identity(self.dim()));
        Ok(Some((gate, error)))
    }
}

fn check_channel_spec(prefix: &str, spec: &ChannelSpec) -> Result<()> {
    let bad = |m: &str| Err(CliError::Config(format!("{prefix}model: {m}")));
    match spec.model {
        ChannelKind::None => Ok(()),
        ChannelKind::Unitary | ChannelKind::Dilated | ChannelKind::Stochastic => {
            match (spec.delta, spec.infidelity) {
                (Some(d), None) if d >= 0.0 => Ok(()),
                (None, Some(f)) if f > 0.0 && f < 1.0 => Ok(()),
                (Some(_), Some(_)) => bad("give either delta or infidelity, not both"),
                _ => bad("needs a non-negative delta or an infidelity in (0, 1)"),
            }
        }
        ChannelKind::Depolarizing => match spec.p {
            Some(p) if (0.0..=1.0).contains(&p) => Ok(()),
            _ => bad("depolarizing needs p in [0, 1]"),
        },
        ChannelKind::File => match spec.file {
            Some(_) => Ok(()),
            None => bad("file model needs a file path"),
        },
    }
}

/// Builds the described channel on the `3^N` register (`None` for `none`).
pub fn build_channel(
    spec: &ChannelSpec,
    n_qubits: usize,
    base_dir: &Path,
) -> Result<Option<Channel>> {
    let dim = qutrit_dim(n_qubits);
    let seed = spec.seed;
    let env = spec.env_dim;
    let build = |delta: f64| match spec.model {
        ChannelKind::Unitary => unitary_error(dim, delta, &mut rng_from_seed(seed)),
        ChannelKind::Dilated => dilated_error(dim, env, delta, &mut rng_from_seed(seed)),
        _ => stochastic_error(dim, delta, &mut rng_from_seed(seed)),
    };
    let ch = match spec.model {
        ChannelKind::None => return Ok(None),
        ChannelKind::Unitary | ChannelKind::Dilated | ChannelKind::Stochastic => {
            match (spec.delta, spec.infidelity) {
                (Some(d), _) => build(d)?,
                (None, Some(target)) => tune_delta(target, 0.05, build)?.1,
                (None, None) => {
                    return Err(CliError::Config("channel needs delta or infidelity".into()))
                }
            }
        }
        ChannelKind::Depolarizing => depolarizing_comp(n_qubits, spec.p.unwrap_or(0.0))?,
        ChannelKind::File => {
            let path = base_dir.join(spec.file.as_ref().expect("validated"));
            let ch = io::read_channel(&path)?;
            if ch.dim() != dim {
                return Err(CliError::Config(format!(
                    "channel {} has dimension {}, register needs {dim}",
                    path.display(),
                    ch.dim()
                )));
            }
            ch
        }
    };
    Ok(Some(ch))
}

/// Preparation and measurement channels from one descriptor; the
/// measurement channel uses a seed derived from the preparation seed.
fn build_spam(
    spec: &ChannelSpec,
    n_qubits: usize,
    base_dir: &Path,
) -> Result<Option<(Channel, Channel)>> {
    let Some(prep) = build_channel(spec, n_qubits, base_dir)? else {
        return Ok(None);
    };
    let meas_spec = ChannelSpec {
        seed: derive_seed(spec.seed, 0, 1),
        ..spec.clone()
    };
    let meas = build_channel(&meas_spec, n_qubits, base_dir)?.expect("same model");
    Ok(Some((
        prep.with_label("spam_prep"),
        meas.with_label("spam_meas"),
    )))
}

/// Resolves a gate descriptor to a leakage-preserving register gate.
pub fn build_gate(spec: &GateSpec, n_qubits: usize, seed: u64) -> Result<QutritUnitary> {
    let dq = qubit_dim(n_qubits);
    match spec {
        GateSpec::Named(name) => {
            let u = match name.as_str() {
                "identity" => ComplexMatrix::identity(dq),
                "haar" => haar_unitary(dq, &mut rng_from_seed(seed)),
                other => {
                    let gens = generators(n_qubits)?;
                    match gens.iter().find(|(n, _)| *n == other) {
                        Some((_, g)) => g.clone(),
                        None => {
                            let names: Vec<&str> = gens.iter().map(|(n, _)| *n).collect();
                            return Err(CliError::Config(format!(
                                "unknown gate {other:?}; expected identity, haar or one of {}",
                                names.join(", ")
                            )));
                        }
                    }
                }
            };
            Ok(embed_qutrit(&u, &LeakageAction::Identity)?)
        }
        GateSpec::Matrix(rows) => {
            let m = io::matrix_from_rows(rows)?;
            let residual = m.unitarity_residual();
            if residual > tol::UNITARY {
                return Err(CliError::Integrity(format!(
                    "interleaved gate is not unitary: residual {residual:.3e}"
                )));
            }
            if m.rows() == dq {
                Ok(embed_qutrit(&m, &LeakageAction::Identity)?)
            } else if m.rows() == qutrit_dim(n_qubits) {
                Ok(QutritUnitary::from_full(m)?)
            } else {
                Err(CliError::Config(format!(
                    "interleaved gate is {}x{}, expected {dq} or {} rows",
                    m.rows(),
                    m.cols(),
                    qutrit_dim(n_qubits)
                )))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn minimal() -> Value {
        json!({"n_qubits": 1, "lengths": [1, 3, 5], "sequences_per_length": 2, "master_seed": 9})
    }

    fn parse(v: Value) -> Result<RbConfig> {
        RbConfig::from_value(v, &Overrides::default(), Path::new("."))
    }

    #[test]
    fn defaults_are_applied() {
        let c = parse(minimal()).unwrap();
        assert!(c.phase_masks && !c.ideal_inverter);
        assert_eq!(c.fit_max_order, 3);
        assert_eq!(c.bootstrap_replicates, 1000);
        assert_eq!(c.error.model, ChannelKind::None);
        assert_eq!(c.shots, None);
    }

    #[test]
    fn unknown_keys_are_all_listed() {
        let mut v = minimal();
        v["colour"] = json!(1);
        v["error_strength"] = json!(2);
        let e = parse(v).unwrap_err().to_string();
        assert!(e.contains("colour") && e.contains("error_strength"), "{e}");
    }

    #[test]
    fn hash_ignores_key_order() {
        let a: Value = serde_json::from_str(r#"{"a": 1, "b": {"x": 1, "y": [2, 3]}}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"b": {"y": [2, 3], "x": 1}, "a": 1}"#).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
        assert_ne!(config_hash(&a), config_hash(&json!({"a": 2})));
    }

    #[test]
    fn overrides_enter_the_hash() {
        let plain = parse(minimal()).unwrap();
        let o = Overrides {
            seed: Some(5),
            shots: Some(100),
        };
        let c = RbConfig::from_value(minimal(), &o, Path::new(".")).unwrap();
        assert_eq!((c.master_seed, c.shots), (5, Some(100)));
        assert_ne!(plain.hash, c.hash);
    }

    #[test]
    fn invalid_values_are_rejected() {
        for (k, v) in [
            ("n_qubits", json!(3)),
            ("lengths", json!([1, 2, 4])),
            ("lengths", json!([3, 2])),
            ("sequences_per_length", json!(0)),
            ("initial_state", json!(2)),
            ("leakage_policy", json!("fixed_phases")),
            ("error_model", json!("unitary")),
            ("error_model", json!("bogus")),
        ] {
            let mut c = minimal();
            c[k] = v;
            assert!(matches!(parse(c), Err(CliError::Config(_))), "{k}");
        }
    }

    #[test]
    fn channel_prefixes_are_separated() {
        let mut v = minimal();
        v["error_model"] = json!("unitary");
        v["error_delta"] = json!(0.1);
        v["interleaved_gate"] = json!("haar");
        v["interleaved_error_model"] = json!("depolarizing");
        v["interleaved_error_p"] = json!(0.02);
        let c = parse(v).unwrap();
        assert_eq!(c.error.delta, Some(0.1));
        assert_eq!(c.interleaved_error.model, ChannelKind::Depolarizing);
        assert_eq!(c.spam.model, ChannelKind::None);
        let (gate, err) = c.interleaved().unwrap().unwrap();
        assert_eq!(gate.dim(), 3);
        assert!(err.completeness_residual() < 1e-12);
    }

    #[test]
    fn infidelity_is_tuned() {
        let mut v = minimal();
        v["error_model"] = json!("dilated");
        v["error_infidelity"] = json!(1e-3);
        let ch = parse(v).unwrap().gate_channel().unwrap();
        let inf = leakrb_core::channel::infidelity_comp_exact(&ch);
        assert!((inf / 1e-3 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn gates_are_resolved() {
        assert!(build_gate(&GateSpec::Named("cx01".into()), 2, 0).is_ok());
        assert!(matches!(
            build_gate(&GateSpec::Named("cx01".into()), 1, 0),
            Err(CliError::Config(_))
        ));
        let skew = GateSpec::Matrix(vec![
            vec![[1.0, 0.0], [0.5, 0.0]],
            vec![[0.0, 0.0], [1.0, 0.0]],
        ]);
        let e = build_gate(&skew, 1, 0).unwrap_err();
        assert!(matches!(e, CliError::Integrity(_)));
        assert!(e.to_string().contains("residual"));
        let x = GateSpec::Matrix(vec![
            vec![[0.0, 0.0], [1.0, 0.0]],
            vec![[1.0, 0.0], [0.0, 0.0]],
        ]);
        assert_eq!(build_gate(&x, 1, 0).unwrap().dim(), 3);
    }

    #[test]
    fn gate_dependent_model_covers_the_set() {
        let mut v = minimal();
        v["error_model"] = json!("unitary");
        v["error_delta"] = json!(0.05);
        v["gate_dependent_spread"] = json!(0.001);
        v["spam_model"] = json!("dilated");
        v["spam_delta"] = json!(0.05);
        let c = parse(v).unwrap();
        let set = c.build_set().unwrap();
        let model = c.error_model(&set).unwrap();
        assert!(model.check_covers(&set).is_ok());
        let spam = model.spam().unwrap();
        assert_ne!(spam.prep.kraus(), spam.meas.kraus());
    }
}
