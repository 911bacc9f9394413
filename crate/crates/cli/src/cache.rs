//! Content-addressed on-disk store for serialized records.
//!
//! An entry lives at `<dir>/<sha256(key)>.json`. Its first line is
//! `<sha256(record)>\t<key>`; the rest of the file is the record, byte for
//! byte as stored.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub const CACHE_ENV: &str = "ATBENCH_CACHE_DIR";

/// Builds the lookup key from a schema version, an operation name and its
/// parameters. Parameter order is part of the key.
pub fn cache_key(schema_version: u32, op: &str, params: &[(&str, String)]) -> String {
    let mut key = format!("v{schema_version}|{op}");
    for (name, value) in params {
        key.push('|');
        key.push_str(name);
        key.push('=');
        key.push_str(value);
    }
    key
}

fn digest(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

/// Default location when neither a flag nor the environment names one.
pub fn default_dir() -> PathBuf {
    std::env::temp_dir().join("atbench-cache")
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lookup {
    Hit(String),
    Miss,
    /// The entry existed but failed its checks and was removed.
    Evicted,
}

impl Cache {
    pub fn new(dir: PathBuf) -> Self {
        Cache { dir: Some(dir) }
    }

    pub fn disabled() -> Self {
        Cache { dir: None }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn path_for(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{}.json", digest(key))))
    }

    pub fn load(&self, key: &str) -> Lookup {
        let Some(path) = self.path_for(key) else {
            return Lookup::Miss;
        };
        let Ok(bytes) = fs::read(&path) else {
            return Lookup::Miss;
        };
        let parsed = String::from_utf8(bytes).ok().and_then(|text| {
            let (header, record) = text.split_once('\n')?;
            let (sum, stored_key) = header.split_once('\t')?;
            (stored_key == key && sum == digest(record)).then(|| record.to_string())
        });
        match parsed {
            Some(record) => Lookup::Hit(record),
            None => {
                let _ = fs::remove_file(&path);
                Lookup::Evicted
            }
        }
    }

    /// Writes an entry. Failures are reported on stderr and otherwise
    /// ignored.
    pub fn store(&self, key: &str, record: &str) {
        let Some(path) = self.path_for(key) else {
            return;
        };
        if let Err(e) = self.write(&path, key, record) {
            eprintln!("warning: cache write to {} failed ({e}); continuing uncached", path.display());
        }
    }

    fn write(&self, path: &Path, key: &str, record: &str) -> std::io::Result<()> {
        let dir = path.parent().expect("cache entry has a parent");
        fs::create_dir_all(dir)?;
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            write!(f, "{}\t{}\n{}", digest(record), key, record)?;
        }
        fs::rename(&tmp, path)
    }

    pub fn evict(&self, key: &str) -> bool {
        self.path_for(key).is_some_and(|p| fs::remove_file(p).is_ok())
    }

    /// Keys of every readable entry.
    pub fn list(&self) -> Vec<String> {
        let Some(dir) = &self.dir else {
            return Vec::new();
        };
        let Ok(entries) = fs::read_dir(dir) else {
            return Vec::new();
        };
        let mut keys: Vec<String> = entries
            .filter_map(|e| e.ok())
            .filter(|e| e.path().extension().is_some_and(|x| x == "json"))
            .filter_map(|e| {
                let text = fs::read_to_string(e.path()).ok()?;
                let header = text.lines().next()?;
                Some(header.split_once('\t')?.1.to_string())
            })
            .collect();
        keys.sort();
        keys
    }

    /// Removes every entry; returns how many were removed.
    pub fn clear(&self) -> usize {
        let Some(dir) = &self.dir else {
            return 0;
        };
        let Ok(entries) = fs::read_dir(dir) else {
            return 0;
        };
        entries
            .filter_map(|e| e.ok())
            .filter(|e| e.path().extension().is_some_and(|x| x == "json"))
            .filter(|e| fs::remove_file(e.path()).is_ok())
            .count()
    }

    /// Returns the stored record for `key` if it passes `valid`, otherwise
    /// computes, stores and returns a fresh one.
    pub fn get_or_compute<E>(
        &self,
        key: &str,
        valid: impl Fn(&str) -> bool,
        compute: impl FnOnce() -> Result<String, E>,
    ) -> Result<(String, bool), E> {
        match self.load(key) {
            Lookup::Hit(record) if valid(&record) => return Ok((record, true)),
            Lookup::Hit(_) => {
                self.evict(key);
                eprintln!("warning: cache entry for {key} did not parse; recomputing");
            }
            Lookup::Evicted => eprintln!("warning: corrupt cache entry for {key} evicted; recomputing"),
            Lookup::Miss => {}
        }
        let record = compute()?;
        self.store(key, &record);
        Ok((record, false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path().to_path_buf());
        let key = cache_key(1, "latin-census", &[("n", "4".into())]);
        let record = "{\"a\":1,\n \"b\":\"x\ty\"}";
        assert_eq!(cache.load(&key), Lookup::Miss);
        cache.store(&key, record);
        assert_eq!(cache.load(&key), Lookup::Hit(record.to_string()));
        assert_eq!(cache.list(), vec![key.clone()]);
        assert_eq!(cache.clear(), 1);
        assert_eq!(cache.load(&key), Lookup::Miss);
    }

    #[test]
    fn version_is_part_of_the_key() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path().to_path_buf());
        let old = cache_key(1, "op", &[("n", "2".into())]);
        let new = cache_key(2, "op", &[("n", "2".into())]);
        cache.store(&old, "{}");
        assert_eq!(cache.load(&new), Lookup::Miss);
    }

    #[test]
    fn tampered_entries_are_evicted() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path().to_path_buf());
        let key = cache_key(1, "op", &[]);
        cache.store(&key, "{\"v\":1}");
        let path = cache.path_for(&key).unwrap();
        let text = fs::read_to_string(&path).unwrap().replace("\"v\":1", "\"v\":2");
        fs::write(&path, text).unwrap();
        assert_eq!(cache.load(&key), Lookup::Evicted);
        assert!(!path.exists());
        let (rec, hit) = cache
            .get_or_compute::<()>(&key, |_| true, || Ok("{\"v\":1}".to_string()))
            .unwrap();
        assert_eq!((rec.as_str(), hit), ("{\"v\":1}", false));
        let (_, hit) = cache.get_or_compute::<()>(&key, |_| true, || unreachable!()).unwrap();
        assert!(hit);
    }

    #[test]
    fn disabled_cache_never_hits() {
        let cache = Cache::disabled();
        cache.store("k", "{}");
        assert_eq!(cache.load("k"), Lookup::Miss);
    }
}
