use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::CliError;
use crate::attacks::{AttackKind, SelectionStrategy};
use crate::theory::{SyntheticTraceSpec, TheoryConfig};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "HTMIA_OUT_DIR";

/// Contents of a `--config` TOML file. Every key is optional; command-line
/// flags override whatever is set here.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub inputs: InputsSection,
    #[serde(default)]
    pub selection: SelectionSection,
    #[serde(default)]
    pub attacks: AttacksSection,
    #[serde(default)]
    pub metrics: MetricsSection,
    #[serde(default)]
    pub sweep: SweepSection,
    pub simulate: Option<SyntheticTraceSpec>,
    pub theory: Option<TheoryConfig>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputsSection {
    pub target: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    #[serde(default)]
    pub variants: Vec<PathBuf>,
    pub labels: Option<PathBuf>,
    pub texts: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub join_tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionSection {
    pub min_k: Option<usize>,
    pub max_k: Option<usize>,
    pub alpha: Option<f64>,
    pub strategy: Option<SelectionStrategy>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttacksSection {
    pub enabled: Option<Vec<AttackKind>>,
    pub min_k_pp_percent: Option<f64>,
    pub pac_k_tokens: Option<usize>,
    pub pac_n_aug: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    pub fpr_targets: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub alphas: Option<Vec<f64>>,
    pub min_ks: Option<Vec<usize>>,
    pub max_ks: Option<Vec<usize>>,
    pub strategies: Option<Vec<SelectionStrategy>>,
    pub margins: Option<Vec<f64>>,
}

impl FileConfig {
    /// Loads a config file. Relative paths inside it are resolved against
    /// the directory containing the file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: FileConfig = toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let inputs = &mut cfg.inputs;
        for p in [
            &mut inputs.target,
            &mut inputs.reference,
            &mut inputs.labels,
            &mut inputs.texts,
            &mut inputs.scores,
            &mut cfg.out_dir,
        ]
        .into_iter()
        .flatten()
        {
            rebase(p);
        }
        inputs.variants.iter_mut().for_each(rebase);
        Ok(cfg)
    }
}

/// Flag value if given, else the config value, else the default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Like [`pick`] for list-valued flags, where "not given" is an empty list.
pub fn pick_list<T>(flag: Vec<T>, file: Option<Vec<T>>, default: Vec<T>) -> Vec<T> {
    if flag.is_empty() {
        file.unwrap_or(default)
    } else {
        flag
    }
}

/// Output directory: flag, then environment, then config file, then `.`.
pub fn resolve_out_dir(flag: Option<PathBuf>, file: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    })
    .or(file)
    .unwrap_or_else(|| PathBuf::from("."))
}
