//! Record caches keyed by external user key.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use parking_lot::{Mutex, RwLock};

use super::{FetchError, UserRecord};

/// Keyed store of fetched records, safe for concurrent use.
pub trait CacheStore: Send + Sync {
    fn get(&self, key: &str) -> Option<UserRecord>;
    fn put(&self, record: &UserRecord) -> Result<(), FetchError>;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Default)]
pub struct MemoryCache {
    records: RwLock<HashMap<String, UserRecord>>,
}

impl MemoryCache {
    pub fn new() -> Self {
        Self::default()
    }
}

impl CacheStore for MemoryCache {
    fn get(&self, key: &str) -> Option<UserRecord> {
        self.records.read().get(key).cloned()
    }

    fn put(&self, record: &UserRecord) -> Result<(), FetchError> {
        self.records
            .write()
            .insert(record.external_key.clone(), record.clone());
        Ok(())
    }

    fn len(&self) -> usize {
        self.records.read().len()
    }
}

/// Append-only JSON-lines file, one [`UserRecord`] per line. On open the
/// file is replayed and the last line for a key wins.
#[derive(Debug)]
pub struct JsonlCache {
    path: PathBuf,
    records: RwLock<HashMap<String, UserRecord>>,
    file: Mutex<File>,
}

impl JsonlCache {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, FetchError> {
        let path = path.as_ref().to_path_buf();
        let mut records = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: UserRecord =
                    serde_json::from_str(&line).map_err(|source| FetchError::CacheFormat {
                        line: i + 1,
                        source,
                    })?;
                records.insert(rec.external_key.clone(), rec);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(JsonlCache {
            path,
            records: RwLock::new(records),
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl CacheStore for JsonlCache {
    fn get(&self, key: &str) -> Option<UserRecord> {
        self.records.read().get(key).cloned()
    }

    fn put(&self, record: &UserRecord) -> Result<(), FetchError> {
        let mut line = serde_json::to_string(record).expect("record serializes");
        line.push('\n');
        {
            let mut f = self.file.lock();
            f.write_all(line.as_bytes())?;
            f.flush()?;
        }
        self.records
            .write()
            .insert(record.external_key.clone(), record.clone());
        Ok(())
    }

    fn len(&self) -> usize {
        self.records.read().len()
    }
}
