use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rspscrn_core::dsp::{AdmissionConfig, DspConfig};
use rspscrn_core::fusion::{FusionConfig, FusionError};
use rspscrn_core::pipeline::{load_model_dir, AudioFrontEnd, PipelineError, Screener};
use rspscrn_core::symptoms::{DecisionTree, SymptomError};

use crate::store::StoreError;

pub const CONFIG_ENV: &str = "RSPSCRN_CONFIG";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("no config given: pass --config or set {CONFIG_ENV}")]
    NoConfig,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("session_ttl_secs must be positive")]
    ZeroTtl,
    #[error("symptom tree: {0}")]
    Tree(#[from] SymptomError),
    #[error("fusion config: {0}")]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

fn default_listen() -> String {
    "127.0.0.1:8080".into()
}
fn default_ttl() -> u64 {
    24 * 3600
}
fn default_max_upload() -> usize {
    16 * 1024 * 1024
}
fn default_deadline() -> u64 {
    60
}

/// Service configuration, read from JSON. Relative paths are resolved
/// against the directory holding the config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_listen")]
    pub listen: String,
    pub model_dir: PathBuf,
    pub tree_path: PathBuf,
    /// Equal weights with renormalization when absent.
    #[serde(default)]
    pub fusion_path: Option<PathBuf>,
    #[serde(default)]
    pub dsp: DspConfig,
    #[serde(default)]
    pub admission: AdmissionConfig,
    #[serde(default = "default_ttl")]
    pub session_ttl_secs: u64,
    #[serde(default = "default_max_upload")]
    pub max_upload_bytes: usize,
    #[serde(default = "default_deadline")]
    pub score_deadline_secs: u64,
    pub storage_dir: PathBuf,
    /// Static web assets served at `/` when set.
    #[serde(default)]
    pub static_dir: Option<PathBuf>,
    /// Adds a permissive CORS layer, for a UI served from another origin.
    #[serde(default)]
    pub cors_any_origin: bool,
}

impl ServiceConfig {
    pub fn new(model_dir: PathBuf, tree_path: PathBuf, storage_dir: PathBuf) -> Self {
        ServiceConfig {
            listen: default_listen(),
            model_dir,
            tree_path,
            fusion_path: None,
            dsp: DspConfig::default(),
            admission: AdmissionConfig::default(),
            session_ttl_secs: default_ttl(),
            max_upload_bytes: default_max_upload(),
            score_deadline_secs: default_deadline(),
            storage_dir,
            static_dir: None,
            cors_any_origin: false,
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: ServiceConfig = serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.model_dir, &mut cfg.tree_path, &mut cfg.storage_dir] {
            rebase(p, base);
        }
        for p in [cfg.fusion_path.as_mut(), cfg.static_dir.as_mut()].into_iter().flatten() {
            rebase(p, base);
        }
        Ok(cfg)
    }

    /// `explicit` if given, else the path in `RSPSCRN_CONFIG`.
    pub fn locate(explicit: Option<PathBuf>) -> Result<PathBuf, ConfigError> {
        explicit
            .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from))
            .ok_or(ConfigError::NoConfig)
    }

    pub fn build_screener(&self) -> Result<Screener, ConfigError> {
        if self.session_ttl_secs == 0 {
            return Err(ConfigError::ZeroTtl);
        }
        let front_end = AudioFrontEnd::new(self.dsp.clone(), self.admission.clone()).map_err(PipelineError::from)?;
        let models = load_model_dir(&self.model_dir)?;
        let tree_text = read(&self.tree_path)?;
        let tree = DecisionTree::from_json(&tree_text)?;
        let fusion = match &self.fusion_path {
            Some(p) => FusionConfig::from_json(&read(p)?)?,
            None => FusionConfig::default(),
        };
        Ok(Screener::new(front_end, models, tree, fusion)?)
    }
}

fn rebase(p: &mut PathBuf, base: &Path) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_paths_follow_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("service.json");
        std::fs::write(
            &path,
            r#"{"model_dir":"models","tree_path":"/abs/tree.json","storage_dir":"data","session_ttl_secs":5}"#,
        )
        .unwrap();
        let cfg = ServiceConfig::from_path(&path).unwrap();
        assert_eq!(cfg.model_dir, dir.path().join("models"));
        assert_eq!(cfg.tree_path, PathBuf::from("/abs/tree.json"));
        assert_eq!(cfg.session_ttl_secs, 5);
        assert_eq!(cfg.dsp, DspConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"model_dir":"m","tree_path":"t","storage_dir":"s","ttl":1}"#).unwrap();
        assert!(matches!(ServiceConfig::from_path(&path), Err(ConfigError::Parse { .. })));
    }
}
