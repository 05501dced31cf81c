//! Digest-checked cache files and append-only run manifests.
//!
//! Every cache file `name` has a sidecar `name.sha256`; a file whose content
//! no longer matches its sidecar is reported as tampered.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use eqlines_core::classes::{discover_classes, ClassSet};
use eqlines_core::pipeline::{build_catalog_with, catalog_invariants_hold, FactorCatalog, SpectralBudget, Stratum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn digest_path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.sha256"))
    }

    /// Writes `name` and its digest sidecar; returns the digest.
    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<String, CliError> {
        std::fs::create_dir_all(&self.dir).map_err(CliError::io(&self.dir))?;
        let digest = sha256_hex(bytes);
        let path = self.path(name);
        std::fs::write(&path, bytes).map_err(CliError::io(&path))?;
        let dpath = self.digest_path(name);
        std::fs::write(&dpath, format!("{digest}\n")).map_err(CliError::io(&dpath))?;
        Ok(digest)
    }

    /// Reads `name` if present, checking it against its sidecar.
    pub fn read(&self, name: &str) -> Result<Option<(Vec<u8>, String)>, CliError> {
        let path = self.path(name);
        if !path.exists() {
            return Ok(None);
        }
        let bytes = std::fs::read(&path).map_err(CliError::io(&path))?;
        let tampered = || CliError::Tampered { path: path.display().to_string() };
        let recorded = std::fs::read_to_string(self.digest_path(name)).map_err(|_| tampered())?;
        let digest = sha256_hex(&bytes);
        if recorded.trim() != digest {
            return Err(tampered());
        }
        Ok(Some((bytes, digest)))
    }

    pub fn append_manifest(&self, m: &RunManifest) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.dir).map_err(CliError::io(&self.dir))?;
        let path = self.path("manifests.jsonl");
        let mut f = OpenOptions::new().create(true).append(true).open(&path).map_err(CliError::io(&path))?;
        writeln!(f, "{}", serde_json::to_string(m)?).map_err(CliError::io(&path))
    }

    pub fn catalog_name(budget: &SpectralBudget) -> String {
        format!("catalog-dim{}-slack{}.json", budget.dim, budget.slack)
    }

    /// Loads the cached catalog for `budget`, checking digest and shape.
    pub fn load_catalog(&self, budget: &SpectralBudget) -> Result<Option<(FactorCatalog, String)>, CliError> {
        let name = Self::catalog_name(budget);
        let Some((bytes, digest)) = self.read(&name)? else { return Ok(None) };
        let catalog: FactorCatalog = serde_json::from_slice(&bytes)?;
        if catalog.dim != budget.dim || catalog.slack != budget.slack || !catalog_invariants_hold(&catalog) {
            return Err(CliError::Mismatch(format!("cached catalog {name} fails its invariants")));
        }
        Ok(Some((catalog, digest)))
    }

    /// Builds the catalog from scratch and caches it.
    pub fn build_catalog(
        &self,
        budget: &SpectralBudget,
        progress: impl FnMut(&Stratum, Duration),
    ) -> Result<(FactorCatalog, String), CliError> {
        let catalog = build_catalog_with(budget, None, progress)?;
        let digest = self.write(&Self::catalog_name(budget), serde_json::to_string_pretty(&catalog)?.as_bytes())?;
        Ok((catalog, digest))
    }

    /// With `skip_slow`, requires a cached catalog; otherwise rebuilds.
    pub fn catalog(
        &self,
        budget: &SpectralBudget,
        skip_slow: bool,
        progress: impl FnMut(&Stratum, Duration),
    ) -> Result<(FactorCatalog, String), CliError> {
        if skip_slow {
            self.load_catalog(budget)?.ok_or_else(|| {
                CliError::Incomplete(format!(
                    "no cached catalog {} in {}; run once without --skip-slow",
                    Self::catalog_name(budget),
                    self.dir.display()
                ))
            })
        } else {
            self.build_catalog(budget, progress)
        }
    }

    pub fn classes_name(n: usize, e: u32) -> String {
        format!("classes-n{n}-e{e}.json")
    }

    /// Cached class set (witnesses re-verified on load) or a fresh search.
    pub fn classes(&self, n: usize, e: u32, seed: u64, budget: u64) -> Result<(ClassSet, String), CliError> {
        let name = Self::classes_name(n, e);
        if let Some((bytes, digest)) = self.read(&name)? {
            let text = String::from_utf8(bytes).map_err(|_| CliError::Tampered { path: name.clone() })?;
            let cs = ClassSet::from_json(&text)?;
            if cs.n == n && cs.e == e && cs.seed == seed && cs.budget == budget {
                return Ok((cs, digest));
            }
        }
        let cs = discover_classes(n, e, seed, budget)?;
        let digest = self.write(&name, cs.to_json().as_bytes())?;
        Ok((cs, digest))
    }
}

/// One line of `manifests.jsonl`.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub wall_time_secs: f64,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub counts: BTreeMap<String, serde_json::Value>,
}

impl RunManifest {
    pub fn new(command: Vec<String>, config_hash: String, seed: u64) -> Self {
        RunManifest {
            command,
            config_hash,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_secs: 0.0,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            counts: BTreeMap::new(),
        }
    }

    pub fn count(&mut self, key: &str, value: impl Serialize) {
        self.counts.insert(key.to_string(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_round_trip_and_tamper_detection() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        assert!(cache.read("x.json").unwrap().is_none());
        let d = cache.write("x.json", b"[1,2]").unwrap();
        assert_eq!(cache.read("x.json").unwrap().unwrap(), (b"[1,2]".to_vec(), d));
        std::fs::write(cache.path("x.json"), b"[1,3]").unwrap();
        assert!(matches!(cache.read("x.json"), Err(CliError::Tampered { .. })));
        std::fs::remove_file(dir.path().join("x.json.sha256")).unwrap();
        assert!(matches!(cache.read("x.json"), Err(CliError::Tampered { .. })));
    }

    #[test]
    fn class_cache_replays() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let (a, da) = cache.classes(5, 3, 1, 500).unwrap();
        let (b, db) = cache.classes(5, 3, 1, 500).unwrap();
        assert_eq!((a.classes, da), (b.classes, db));
    }

    #[test]
    fn manifests_append() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let mut m = RunManifest::new(vec!["eqlines".into()], "h".into(), 1);
        m.count("classes", 16);
        cache.append_manifest(&m).unwrap();
        cache.append_manifest(&m).unwrap();
        let text = std::fs::read_to_string(cache.path("manifests.jsonl")).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("\"classes\":16"));
    }
}
