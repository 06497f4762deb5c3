//! Service configuration and index loading.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use semcomplete_core::atomic::{AtomModel, ScoringParams};
use semcomplete_core::bundle::DomainBundle;
use semcomplete_core::coordinator::{CoordinatorConfig, System};
use semcomplete_core::mpc::MpcIndex;
use semcomplete_core::querylog::{load_log, LogCorpus};
use semcomplete_core::snapshot;

use crate::ServiceError;

/// Environment variable overriding the configured bind address.
pub const BIND_ENV: &str = "SEMCOMPLETE_BIND";

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    /// Bundled domain name or a domain directory.
    pub domain: String,
    /// Training log (TSV). Falls back to the domain's sample log.
    pub log: Option<PathBuf>,
    /// Prebuilt indexes; each one replaces building from the log.
    pub mpc_snapshot: Option<PathBuf>,
    pub atom_snapshot: Option<PathBuf>,
    pub bind: String,
    /// Allowed browser origins. Empty allows any origin.
    pub cors_origins: Vec<String>,
    pub coordinator: CoordinatorConfig,
    pub scoring: ScoringParams,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            domain: "bonds".into(),
            log: None,
            mpc_snapshot: None,
            atom_snapshot: None,
            bind: DEFAULT_BIND.into(),
            cors_origins: Vec::new(),
            coordinator: CoordinatorConfig::default(),
            scoring: ScoringParams::default(),
        }
    }
}

impl ServiceConfig {
    pub fn from_toml(s: &str) -> Result<Self, ServiceError> {
        let cfg: ServiceConfig = toml::from_str(s).map_err(|e| ServiceError::Config(e.to_string()))?;
        cfg.coordinator.validate()?;
        Ok(cfg)
    }

    /// Reads a config file. Relative paths in it are taken relative to the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ServiceError> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.log, &mut cfg.mpc_snapshot, &mut cfg.atom_snapshot].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if !cfg.domain.is_empty() && semcomplete_core::bundle::bundled_source(&cfg.domain).is_none() {
            let d = Path::new(&cfg.domain);
            if d.is_relative() {
                cfg.domain = base.join(d).to_string_lossy().into_owned();
            }
        }
        Ok(cfg)
    }

    /// The bind address: the environment override, else the configured one.
    pub fn bind_addr(&self) -> String {
        std::env::var(BIND_ENV).ok().filter(|s| !s.trim().is_empty()).unwrap_or_else(|| self.bind.clone())
    }

    fn training_log(&self, bundle: &DomainBundle) -> Result<LogCorpus, ServiceError> {
        Ok(match &self.log {
            Some(p) => load_log(p)?,
            None => bundle.sample_log()?,
        })
    }
}

/// Loads the domain and its indexes, building whatever has no snapshot.
pub fn load_system(cfg: &ServiceConfig) -> Result<System, ServiceError> {
    let bundle = DomainBundle::open(&cfg.domain)?;
    let mut log = None;
    let mut train = || -> Result<LogCorpus, ServiceError> {
        if log.is_none() {
            log = Some(cfg.training_log(&bundle)?);
        }
        Ok(log.clone().expect("just set"))
    };
    let mpc = match &cfg.mpc_snapshot {
        Some(p) => snapshot::load::<MpcIndex>(p)?,
        None => MpcIndex::build(&train()?, &bundle.grammar),
    };
    let atoms = match &cfg.atom_snapshot {
        Some(p) => snapshot::load::<AtomModel>(p)?,
        None => AtomModel::build(&train()?, &bundle.grammar),
    };
    log::info!("domain {}: {} logged queries, {} atoms", bundle.domain.name, mpc.len(), atoms.len());
    Ok(System::from_parts(bundle, mpc, atoms, cfg.coordinator.clone(), cfg.scoring))
}
