//! Service configuration and engine loading.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use chairsearch_core::dataset::{build_dataset, load_manifest, reference_shapes};
use chairsearch_core::dictionary::Dictionary;
use chairsearch_core::engine::Engine;
use chairsearch_core::session::SESSION_BUDGET_MS;
use clap::Args;

use crate::error::{Result, ServiceError};

#[derive(Debug, Clone, Args)]
pub struct ServiceConfig {
    /// Address to listen on.
    #[arg(long, env = "CHAIRSEARCH_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,

    /// Dataset manifest; the reference set is generated when absent.
    #[arg(long, env = "CHAIRSEARCH_MANIFEST")]
    pub manifest: Option<PathBuf>,

    /// Dictionary document; the built-in vocabulary when absent.
    #[arg(long, env = "CHAIRSEARCH_DICTIONARY")]
    pub dictionary: Option<PathBuf>,

    /// Per-session time budget in milliseconds.
    #[arg(long, env = "CHAIRSEARCH_BUDGET_MS", default_value_t = SESSION_BUDGET_MS)]
    pub budget_ms: u64,

    /// Directory receiving one log file per session.
    #[arg(long, env = "CHAIRSEARCH_LOG_DIR", default_value = "session-logs")]
    pub log_dir: PathBuf,

    /// Static UI assets served under `/`.
    #[arg(long, env = "CHAIRSEARCH_STATIC_DIR")]
    pub static_dir: Option<PathBuf>,
}

impl ServiceConfig {
    /// Checks inputs and creates the log directory if needed.
    pub fn validate(&self) -> Result<()> {
        if self.budget_ms == 0 {
            return Err(ServiceError::Config("budget must be positive".into()));
        }
        for (what, path) in [("manifest", &self.manifest), ("dictionary", &self.dictionary)] {
            if let Some(p) = path {
                if !p.is_file() {
                    return Err(ServiceError::Config(format!("{what} {} does not exist", p.display())));
                }
            }
        }
        if let Some(p) = &self.static_dir {
            if !p.is_dir() {
                return Err(ServiceError::Config(format!("static dir {} does not exist", p.display())));
            }
        }
        std::fs::create_dir_all(&self.log_dir)
            .map_err(|e| ServiceError::Config(format!("log dir {}: {e}", self.log_dir.display())))?;
        Ok(())
    }
}

/// Loads the dictionary and manifest, generating the reference shapes
/// against the dictionary when no manifest is given, and builds the index.
pub fn load_engine(manifest: Option<&Path>, dictionary: Option<&Path>) -> Result<Engine> {
    let dictionary = match dictionary {
        Some(p) => Dictionary::load(p)?,
        None => Dictionary::builtin(),
    };
    let manifest = match manifest {
        Some(p) => load_manifest(p)?,
        None => build_dataset(reference_shapes()?, &dictionary.checksum)?,
    };
    Ok(Engine::new(manifest, dictionary)?)
}
