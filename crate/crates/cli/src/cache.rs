//! Content-addressed store of finished sweep cells.
//!
//! Each record lives in `<dir>/<sha256 of key>.json` and is only returned
//! when both the key and the tool version match exactly.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use nni_validity::{AlphaCResult, CriterionKind};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::output::TOOL_VERSION;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellKey {
    pub command: String,
    pub n_spins: usize,
    pub target: CriterionKind,
    pub horizon: f64,
    pub epsilon: f64,
    pub tau_step: f64,
    pub alpha_step: f64,
}

impl CellKey {
    pub fn alpha_c(
        n_spins: usize,
        target: CriterionKind,
        horizon: f64,
        epsilon: f64,
        tau_step: f64,
        alpha_step: f64,
    ) -> Self {
        Self {
            command: "alpha_c".into(),
            n_spins,
            target,
            horizon,
            epsilon,
            tau_step,
            alpha_step,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Record<T> {
    key: CellKey,
    tool_version: String,
    payload: T,
}

#[derive(Clone, Debug, Default)]
pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Self { dir }
    }

    fn path(&self, key: &CellKey) -> Option<PathBuf> {
        let dir = self.dir.as_ref()?;
        let material = serde_json::to_vec(&(key, TOOL_VERSION)).expect("key serializes");
        let digest = hex::encode(Sha256::digest(material));
        Some(dir.join(format!("{digest}.json")))
    }

    pub fn load<T: DeserializeOwned>(&self, key: &CellKey) -> Option<T> {
        let bytes = fs::read(self.path(key)?).ok()?;
        let record: Record<T> = serde_json::from_slice(&bytes).ok()?;
        (record.key == *key && record.tool_version == TOOL_VERSION).then_some(record.payload)
    }

    pub fn store<T: Serialize>(&self, key: &CellKey, payload: &T) -> io::Result<()> {
        let (Some(dir), Some(path)) = (self.dir.as_ref(), self.path(key)) else {
            return Ok(());
        };
        fs::create_dir_all(dir)?;
        let record = Record {
            key: key.clone(),
            tool_version: TOOL_VERSION.to_string(),
            payload,
        };
        let mut file = tempfile::NamedTempFile::new_in(dir)?;
        serde_json::to_writer_pretty(&mut file, &record)?;
        file.write_all(b"\n")?;
        file.persist(path).map_err(|e| e.error)?;
        Ok(())
    }

    /// Looks the cell up, computing and storing it on a miss. Failed cells
    /// are never stored.
    pub fn alpha_c(
        &self,
        key: &CellKey,
        compute: impl FnOnce() -> nni_validity::Result<AlphaCResult>,
    ) -> nni_validity::Result<AlphaCResult> {
        if let Some(hit) = self.load(key) {
            return Ok(hit);
        }
        let result = compute()?;
        if let Err(err) = self.store(key, &result) {
            eprintln!("warning: could not write cache record: {err}");
        }
        Ok(result)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(n: usize) -> CellKey {
        CellKey::alpha_c(n, CriterionKind::EndToEnd, 2.0 * n as f64, 0.01, 0.05, 0.01)
    }

    #[test]
    fn round_trips_and_separates_keys() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(Some(dir.path().to_path_buf()));
        cache.store(&key(4), &vec![1.5f64, 2.5]).unwrap();
        assert_eq!(cache.load::<Vec<f64>>(&key(4)), Some(vec![1.5, 2.5]));
        assert_eq!(cache.load::<Vec<f64>>(&key(5)), None);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn rejects_records_from_other_versions() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(Some(dir.path().to_path_buf()));
        cache.store(&key(4), &1.0f64).unwrap();
        let path = cache.path(&key(4)).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, text.replace(TOOL_VERSION, "0.0.0-old")).unwrap();
        assert_eq!(cache.load::<f64>(&key(4)), None);
    }

    #[test]
    fn disabled_cache_is_inert() {
        let cache = Cache::default();
        cache.store(&key(3), &1.0f64).unwrap();
        assert_eq!(cache.load::<f64>(&key(3)), None);
    }
}
