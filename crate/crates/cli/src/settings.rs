//! Run settings with precedence flags > config file > environment > defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const CACHE_ENV: &str = "EQLINES_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".cache";
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_EXPONENT: u32 = 5;

/// Optional overrides, as read from flags or from a TOML config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub cache_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub budget: Option<u64>,
    pub jobs: Option<usize>,
    pub search_limit: Option<u64>,
    pub depth: Option<u32>,
}

impl Overrides {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    fn or(self, other: Overrides) -> Overrides {
        Overrides {
            cache_dir: self.cache_dir.or(other.cache_dir),
            seed: self.seed.or(other.seed),
            budget: self.budget.or(other.budget),
            jobs: self.jobs.or(other.jobs),
            search_limit: self.search_limit.or(other.search_limit),
            depth: self.depth.or(other.depth),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Settings {
    pub cache_dir: PathBuf,
    pub seed: u64,
    pub budget: u64,
    /// Worker threads; `None` lets rayon decide.
    pub jobs: Option<usize>,
    pub search_limit: u64,
    pub depth: u32,
}

impl Settings {
    pub fn resolve(flags: Overrides, file: Option<Overrides>, env_cache: Option<PathBuf>) -> Settings {
        let o = flags.or(file.unwrap_or_default());
        Settings {
            cache_dir: o.cache_dir.or(env_cache).unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR)),
            seed: o.seed.unwrap_or(DEFAULT_SEED),
            budget: o.budget.unwrap_or(eqlines_core::classes::DEFAULT_BUDGET),
            jobs: o.jobs,
            search_limit: o.search_limit.unwrap_or(eqlines_core::nonexist::DEFAULT_SEARCH_LIMIT),
            depth: o.depth.unwrap_or(2),
        }
    }

    /// Digest of the settings that influence results (not the worker count).
    pub fn config_hash(&self) -> String {
        let key = serde_json::json!({
            "seed": self.seed,
            "budget": self.budget,
            "search_limit": self.search_limit,
            "depth": self.depth,
        });
        hex::encode(Sha256::digest(key.to_string().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let flags = Overrides { seed: Some(7), ..Default::default() };
        let file = Overrides { seed: Some(3), budget: Some(10), cache_dir: Some("a".into()), ..Default::default() };
        let s = Settings::resolve(flags, Some(file), Some("b".into()));
        assert_eq!((s.seed, s.budget), (7, 10));
        assert_eq!(s.cache_dir, PathBuf::from("a"));
        let s = Settings::resolve(Overrides::default(), None, Some("b".into()));
        assert_eq!(s.cache_dir, PathBuf::from("b"));
        let s = Settings::resolve(Overrides::default(), None, None);
        assert_eq!(s.cache_dir, PathBuf::from(DEFAULT_CACHE_DIR));
        assert_eq!(s.depth, 2);
    }

    #[test]
    fn hash_ignores_jobs() {
        let a = Settings::resolve(Overrides { jobs: Some(1), ..Default::default() }, None, None);
        let b = Settings::resolve(Overrides { jobs: Some(4), ..Default::default() }, None, None);
        assert_eq!(a.config_hash(), b.config_hash());
        let c = Settings::resolve(Overrides { seed: Some(9), ..Default::default() }, None, None);
        assert_ne!(a.config_hash(), c.config_hash());
    }

    #[test]
    fn config_file_rejects_unknown_keys() {
        assert!(toml::from_str::<Overrides>("seed = 4\nbudget = 9").is_ok());
        assert!(toml::from_str::<Overrides>("seeed = 4").is_err());
    }
}
