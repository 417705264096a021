use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use vlf::eval::GridSpec;
use vlf::features::{WINDOW_LEN_MAX, WINDOW_LEN_MIN};
use vlf::fed::FedConfig;
use vlf::ingest::{CleaningConfig, CsvSchema};
use vlf::nn::{ModelDims, TrainConfig};

use crate::error::CliError;

/// Everything a run can be told through JSON. Each subcommand reads the
/// sections it needs; flags (`--out-dir`, `--seed`) override after load.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Input for single-dataset commands: a raw AIS CSV for `preprocess`,
    /// a cleaned-trajectory NDJSON everywhere else.
    pub dataset: Option<PathBuf>,
    /// Column names of the raw CSV.
    pub schema: CsvSchema,
    /// Inputs for multi-silo commands; each silo is its own NDJSON file.
    pub silos: Vec<SiloSpec>,
    pub cleaning: CleaningConfig,
    pub windowing: WindowingConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub fed: FedConfig,
    /// Extra proximal weights for `federate` to sweep after the main run.
    pub mu_sweep: Vec<f64>,
    pub comm: CommConfig,
    pub kde: GridSpec,
    pub out_dir: PathBuf,
    /// Master seed; every random choice of a run derives from it.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: None,
            schema: CsvSchema::default(),
            silos: Vec::new(),
            cleaning: CleaningConfig::default(),
            windowing: WindowingConfig::default(),
            model: ModelConfig::default(),
            train: TrainConfig::default(),
            fed: FedConfig::default(),
            mu_sweep: Vec::new(),
            comm: CommConfig::default(),
            kde: GridSpec::default(),
            out_dir: PathBuf::from("vlf-out"),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiloSpec {
    pub id: String,
    pub dataset: PathBuf,
    /// Local shuffle seed; derived from the run seed and the id if unset.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowingConfig {
    pub len_min: usize,
    pub len_max: usize,
    pub train_frac: f64,
    pub val_frac: f64,
}

impl Default for WindowingConfig {
    fn default() -> Self {
        WindowingConfig {
            len_min: WINDOW_LEN_MIN,
            len_max: WINDOW_LEN_MAX,
            train_frac: 0.7,
            val_frac: 0.15,
        }
    }
}

/// Network shape. The embedding vocabulary is inferred from the data
/// (largest vessel type + 1) unless pinned here.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub hidden: usize,
    pub embed: usize,
    pub dense: usize,
    pub vocab: Option<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hidden: 350,
            embed: 6,
            dense: 150,
            vocab: None,
        }
    }
}

impl ModelConfig {
    pub fn dims(&self, inferred_vocab: usize) -> ModelDims {
        ModelDims {
            input: 6,
            hidden: self.hidden,
            embed: self.embed,
            dense: self.dense,
            output: 2,
            vocab: self.vocab.unwrap_or(inferred_vocab),
        }
    }
}

/// Inputs of the transfer-volume comparison; all sizes in bytes.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommConfig {
    pub dataset_bytes: u64,
    pub model_msg_bytes: u64,
    pub param_bytes: u64,
    pub n_silos: u64,
    pub rounds: u64,
}

pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Io(format!("reading {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("parsing {}: {e}", p.display())))
        }
    }
}

/// Provenance record written into every run directory. Deliberately free
/// of timestamps so reruns are byte-identical; the hash covers the
/// effective config except the output directory itself, so the same run
/// sent to two directories stays comparable.
pub fn write_manifest(command: &str, cfg: &RunConfig) -> Result<(), CliError> {
    let mut hashed = cfg.clone();
    hashed.out_dir = PathBuf::new();
    let canonical = serde_json::to_vec(&hashed)
        .map_err(|e| CliError::Io(format!("encoding config: {e}")))?;
    let digest = Sha256::digest(&canonical);
    let mut hash = String::with_capacity(64);
    for b in digest {
        hash.push_str(&format!("{b:02x}"));
    }
    let manifest = serde_json::json!({
        "command": command,
        "config_sha256": hash,
        "seed": cfg.seed,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Io(format!("encoding manifest: {e}")))?;
    fs::write(cfg.out_dir.join("manifest.json"), text + "\n")?;
    Ok(())
}

fn fnv1a64(s: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in s.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// A silo's shuffle seed: explicit if configured, otherwise a stable mix
/// of the run seed and the silo id (so adding a silo never reseeds the
/// others).
pub fn silo_seed(run_seed: u64, spec: &SiloSpec) -> u64 {
    spec.seed.unwrap_or(run_seed ^ fnv1a64(&spec.id))
}

/// Silo ids appear in output file names; anything outside [A-Za-z0-9._-]
/// becomes '_'.
pub fn safe_name(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect()
}
