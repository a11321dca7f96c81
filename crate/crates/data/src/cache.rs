//! On-disk cache: `<root>/<kind>/<key>.json` entries holding a raw payload with a
//! SHA-256 checksum, plus the Hurwitz class number table.
//!
//! Writes go to a temporary file in the same directory and are renamed into place,
//! so a concurrent reader sees either the old entry or the new one. Entries whose
//! checksum does not match are moved aside to `<key>.json.corrupt` and reported as
//! missing, which makes the caller recompute them.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use stpair_trace::hurwitz::{HurwitzCache, HurwitzTable};

use crate::error::{io_err, Error, Result};

/// Environment variable naming the cache root.
pub const CACHE_DIR_ENV: &str = "STPAIR_CACHE_DIR";

/// Entry format version.
pub const ENTRY_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Entry {
    version: u32,
    sha256: String,
    payload: String,
}

/// What a lookup found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CacheStatus {
    Hit(String),
    Miss,
    /// The entry failed validation and was moved to the given path.
    Quarantined(PathBuf),
}

#[derive(Debug, Clone)]
pub struct CacheDir {
    root: PathBuf,
}

fn checksum(payload: &str) -> String {
    hex::encode(Sha256::digest(payload.as_bytes()))
}

fn valid_component(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_'))
        && !s.starts_with('.')
}

/// Unique temporary name next to `target`.
fn temp_path(target: &Path) -> PathBuf {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    let name = target.file_name().and_then(|s| s.to_str()).unwrap_or("entry");
    target.with_file_name(format!(".{name}.{}.{n}.tmp", std::process::id()))
}

/// Writes `bytes` to `path` through a temporary file and an atomic rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let tmp = temp_path(path);
    {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

impl CacheDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        CacheDir { root: root.into() }
    }

    /// `$STPAIR_CACHE_DIR`, or `./cache`.
    pub fn from_env() -> Self {
        Self::new(std::env::var_os(CACHE_DIR_ENV).map_or_else(|| PathBuf::from("cache"), PathBuf::from))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn entry_path(&self, kind: &str, key: &str) -> Result<PathBuf> {
        for (name, v) in [("kind", kind), ("key", key)] {
            if !valid_component(v) {
                return Err(Error::InvalidParameter {
                    name: if name == "kind" { "cache kind" } else { "cache key" },
                    reason: format!("{v:?} must be non-empty [A-Za-z0-9._-] not starting with '.'"),
                });
            }
        }
        Ok(self.root.join(kind).join(format!("{key}.json")))
    }

    pub fn store(&self, kind: &str, key: &str, payload: &str) -> Result<PathBuf> {
        let path = self.entry_path(kind, key)?;
        let entry = Entry {
            version: ENTRY_VERSION,
            sha256: checksum(payload),
            payload: payload.to_string(),
        };
        let bytes = serde_json::to_vec_pretty(&entry).expect("entry serializes");
        write_atomic(&path, &bytes)?;
        Ok(path)
    }

    pub fn load(&self, kind: &str, key: &str) -> Result<CacheStatus> {
        let path = self.entry_path(kind, key)?;
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(CacheStatus::Miss),
            Err(e) => return Err(io_err(&path)(e)),
        };
        match Self::validate(&bytes) {
            Ok(payload) => Ok(CacheStatus::Hit(payload)),
            Err(reason) => {
                let aside = path.with_extension("json.corrupt");
                fs::rename(&path, &aside).map_err(io_err(&path))?;
                log::warn!(
                    "{}",
                    Error::CacheCorrupt {
                        path: path.clone(),
                        reason
                    }
                );
                Ok(CacheStatus::Quarantined(aside))
            }
        }
    }

    fn validate(bytes: &[u8]) -> std::result::Result<String, String> {
        let entry: Entry = serde_json::from_slice(bytes).map_err(|e| format!("unreadable envelope: {e}"))?;
        if entry.version != ENTRY_VERSION {
            return Err(format!("version {} (expected {ENTRY_VERSION})", entry.version));
        }
        if checksum(&entry.payload) != entry.sha256 {
            return Err("checksum mismatch".into());
        }
        Ok(entry.payload)
    }

    pub fn hurwitz_path(&self) -> PathBuf {
        self.root.join("hurwitz").join("hurwitz12.txt")
    }

    /// Loads the Hurwitz table if present and valid; otherwise builds one covering
    /// `max_n` and writes it. The table is then installed into the global cache.
    pub fn warm_hurwitz(&self, max_n: u64) -> Result<u64> {
        let path = self.hurwitz_path();
        let loaded = match fs::File::open(&path) {
            Ok(f) => match HurwitzTable::read_from(BufReader::new(f)) {
                Ok(t) => Some(t),
                Err(e) => {
                    log::warn!("{}: {e}; rebuilding", path.display());
                    let aside = path.with_extension("txt.corrupt");
                    fs::rename(&path, &aside).map_err(io_err(&path))?;
                    None
                }
            },
            Err(_) => None,
        };
        let table = match loaded {
            Some(t) if t.max_n() >= max_n => t,
            _ => {
                let t = HurwitzTable::build(max_n);
                let mut buf = BufWriter::new(Vec::new());
                t.write_to(&mut buf).map_err(io_err(&path))?;
                write_atomic(&path, &buf.into_inner().expect("in-memory buffer"))?;
                t
            }
        };
        let n = table.max_n();
        HurwitzCache::global().install(table);
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_miss() {
        let dir = tempfile::tempdir().unwrap();
        let c = CacheDir::new(dir.path());
        assert_eq!(c.load("lmfdb", "11.2.a.a-100").unwrap(), CacheStatus::Miss);
        let path = c.store("lmfdb", "11.2.a.a-100", "{\"data\": [1, 2]}").unwrap();
        assert!(path.ends_with("lmfdb/11.2.a.a-100.json"));
        assert_eq!(
            c.load("lmfdb", "11.2.a.a-100").unwrap(),
            CacheStatus::Hit("{\"data\": [1, 2]}".into())
        );
    }

    #[test]
    fn flipped_byte_is_quarantined() {
        let dir = tempfile::tempdir().unwrap();
        let c = CacheDir::new(dir.path());
        let path = c.store("k", "key", "payload-0123456789").unwrap();
        let mut bytes = fs::read(&path).unwrap();
        let i = bytes.windows(4).position(|w| w == b"0123").unwrap();
        bytes[i] = b'9';
        fs::write(&path, bytes).unwrap();
        match c.load("k", "key").unwrap() {
            CacheStatus::Quarantined(aside) => assert!(aside.exists()),
            other => panic!("{other:?}"),
        }
        assert!(!path.exists());
        assert_eq!(c.load("k", "key").unwrap(), CacheStatus::Miss);
    }

    #[test]
    fn rejects_path_escapes() {
        let c = CacheDir::new("/tmp/unused");
        assert!(c.entry_path("../x", "k").is_err());
        assert!(c.entry_path("k", "a/b").is_err());
        assert!(c.entry_path("k", ".hidden").is_err());
    }

    #[test]
    fn hurwitz_table_is_written_then_reused() {
        let dir = tempfile::tempdir().unwrap();
        let c = CacheDir::new(dir.path());
        assert_eq!(c.warm_hurwitz(3000).unwrap(), 3000);
        let modified = fs::metadata(c.hurwitz_path()).unwrap().modified().unwrap();
        assert_eq!(c.warm_hurwitz(2000).unwrap(), 3000);
        assert_eq!(fs::metadata(c.hurwitz_path()).unwrap().modified().unwrap(), modified);
        fs::write(c.hurwitz_path(), "# hurwitz12 v1\n0\t5\n").unwrap();
        assert_eq!(c.warm_hurwitz(1000).unwrap(), 1000);
    }
}
