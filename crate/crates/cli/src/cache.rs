//! Optional on-disk memo of coset tables, enabled by `CHAINLAB_CACHE_DIR`.
//!
//! Entries are keyed by a SHA-256 digest of the model, the subgroup's
//! canonical form and the generating slate. A stale or corrupt entry is
//! recomputed and overwritten.

use std::path::{Path, PathBuf};

use chainlab_core::{CosetTable, Elem, FiniteIndexSubgroup, Result as CoreResult};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::output::write_atomic;

pub const CACHE_ENV: &str = "CHAINLAB_CACHE_DIR";

#[derive(Serialize, Deserialize)]
struct Entry {
    subgroup: serde_json::Value,
    generators: Vec<Vec<i64>>,
    reps: Vec<Vec<i64>>,
}

#[derive(Debug, Clone)]
pub struct TableCache {
    dir: PathBuf,
}

impl TableCache {
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_ENV).map(|d| TableCache { dir: d.into() })
    }

    pub fn new(dir: impl Into<PathBuf>) -> Self {
        TableCache { dir: dir.into() }
    }

    fn key(subgroup: &FiniteIndexSubgroup, generators: &[Elem]) -> String {
        let gens: Vec<&[i64]> = generators.iter().map(Elem::coords).collect();
        let canonical = serde_json::json!({
            "model": subgroup.model(),
            "subgroup": subgroup,
            "generators": gens,
        });
        hex::encode(Sha256::digest(canonical.to_string().as_bytes()))
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    fn load(path: &Path, subgroup: &FiniteIndexSubgroup, generators: &[Elem]) -> Option<CosetTable> {
        let text = std::fs::read_to_string(path).ok()?;
        let entry: Entry = serde_json::from_str(&text).ok()?;
        let gens: Vec<Vec<i64>> = generators.iter().map(|g| g.coords().to_vec()).collect();
        if entry.subgroup != serde_json::to_value(subgroup).ok()? || entry.generators != gens {
            return None;
        }
        let model = subgroup.model();
        let reps = entry
            .reps
            .iter()
            .map(|c| model.elem(c))
            .collect::<CoreResult<Vec<_>>>()
            .ok()?;
        let table = CosetTable::from_reps(subgroup, reps).ok()?;
        // the stored reps must be closed under the slate
        for r in table.reps() {
            for g in generators {
                let moved = g.multiply(r).ok()?;
                table.position(&moved).ok()??;
            }
        }
        Some(table)
    }

    /// The cached table, or a fresh enumeration stored for next time.
    /// Failing to write the cache is not an error.
    pub fn table(
        &self,
        subgroup: &FiniteIndexSubgroup,
        generators: &[Elem],
        cap: usize,
    ) -> CoreResult<CosetTable> {
        let path = self.path(&Self::key(subgroup, generators));
        if let Some(t) = Self::load(&path, subgroup, generators) {
            return Ok(t);
        }
        let table = CosetTable::enumerate(subgroup, generators, cap)?;
        let Ok(value) = serde_json::to_value(subgroup) else {
            return Ok(table);
        };
        let entry = Entry {
            subgroup: value,
            generators: generators.iter().map(|g| g.coords().to_vec()).collect(),
            reps: table.reps().iter().map(|r| r.coords().to_vec()).collect(),
        };
        if std::fs::create_dir_all(&self.dir).is_ok() {
            if let Ok(bytes) = serde_json::to_vec(&entry) {
                let _ = write_atomic(&path, &bytes);
            }
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chainlab_core::GroupModel;

    #[test]
    fn round_trip_and_repair() {
        let dir = tempfile::tempdir().unwrap();
        let cache = TableCache::new(dir.path());
        let s = FiniteIndexSubgroup::heisenberg_diag(2, 3, 2).unwrap();
        let gens = GroupModel::Heisenberg.standard_generators();
        let first = cache.table(&s, &gens, 1000).unwrap();
        let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(files.len(), 1);
        let second = cache.table(&s, &gens, 1000).unwrap();
        assert_eq!(first.reps(), second.reps());

        let path = files[0].as_ref().unwrap().path();
        std::fs::write(&path, "{\"garbage\":true}").unwrap();
        let third = cache.table(&s, &gens, 1000).unwrap();
        assert_eq!(first.reps(), third.reps());
        assert!(std::fs::read_to_string(&path).unwrap().contains("reps"));
    }

    #[test]
    fn keys_separate_subgroups_and_slates() {
        let gens = GroupModel::Heisenberg.standard_generators();
        let a = FiniteIndexSubgroup::heisenberg_diag(2, 3, 2).unwrap();
        let b = FiniteIndexSubgroup::heisenberg_diag(3, 2, 2).unwrap();
        assert_ne!(TableCache::key(&a, &gens), TableCache::key(&b, &gens));
        assert_ne!(TableCache::key(&a, &gens), TableCache::key(&a, &gens[..2]));
        assert_eq!(TableCache::key(&a, &gens), TableCache::key(&a, &gens));
    }
}
