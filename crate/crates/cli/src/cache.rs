//! JSON result cache keyed by `(n, m, mode)`.
//!
//! The file holds the record list plus a SHA-256 checksum of its canonical
//! serialization. Writes merge with whatever is on disk and replace the file
//! through a temporary sibling and a rename.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const DEFAULT_CACHE_PATH: &str = "ringpoints-cache.json";
pub const CACHE_ENV: &str = "RINGPOINTS_CACHE";
const FORMAT: u32 = 1;

/// One computed value, as cached and as printed by `--json`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub n: u32,
    pub m: usize,
    /// `I`, `semi-general` or `general`.
    pub mode: String,
    pub value: u64,
    pub exact: bool,
    /// Point coordinates, one inner list per point.
    pub witness: Option<Vec<Vec<u32>>>,
    pub elapsed_ms: u64,
    pub variant: String,
    pub version: String,
}

impl ResultRecord {
    pub fn key(&self) -> CacheKey {
        CacheKey { n: self.n, m: self.m, mode: self.mode.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CacheKey {
    pub n: u32,
    pub m: usize,
    pub mode: String,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    format: u32,
    checksum: String,
    records: Vec<ResultRecord>,
}

pub fn checksum(records: &[ResultRecord]) -> String {
    let body = serde_json::to_vec(records).expect("records serialize");
    Sha256::digest(&body).iter().map(|b| format!("{b:02x}")).collect()
}

/// Path from the flag, else the environment, else the working directory.
pub fn resolve_path(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    match std::env::var_os(CACHE_ENV) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => PathBuf::from(DEFAULT_CACHE_PATH),
    }
}

#[derive(Debug)]
pub struct Cache {
    path: PathBuf,
    records: BTreeMap<CacheKey, ResultRecord>,
}

impl Cache {
    /// Reads the cache; a missing file is an empty cache.
    pub fn open(path: impl Into<PathBuf>) -> CliResult<Self> {
        let path = path.into();
        let records = read_records(&path)?;
        Ok(Cache { path, records })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, n: u32, m: usize, mode: &str) -> Option<&ResultRecord> {
        self.records.get(&CacheKey { n, m, mode: mode.to_string() })
    }

    pub fn records(&self) -> impl Iterator<Item = &ResultRecord> {
        self.records.values()
    }

    /// Adds a record. Exact entries are never replaced; a lower bound is
    /// replaced by an exact value or by a larger bound. Returns whether the
    /// cache changed.
    pub fn insert(&mut self, rec: ResultRecord) -> bool {
        merge_into(&mut self.records, rec)
    }

    /// Merges with the file's current content and writes atomically.
    pub fn save(&mut self) -> CliResult<()> {
        let on_disk = read_records(&self.path)?;
        for rec in on_disk.into_values() {
            merge_into(&mut self.records, rec);
        }
        let records: Vec<ResultRecord> = self.records.values().cloned().collect();
        let file = CacheFile { format: FORMAT, checksum: checksum(&records), records };
        let text = serde_json::to_string_pretty(&file).map_err(|e| CliError::Cache(e.to_string()))?;
        let tmp = tmp_path(&self.path);
        let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", tmp.display()));
        {
            let mut f = fs::File::create(&tmp).map_err(io)?;
            f.write_all(text.as_bytes()).map_err(io)?;
            f.write_all(b"\n").map_err(io)?;
            f.sync_all().map_err(io)?;
        }
        fs::rename(&tmp, &self.path).map_err(|e| CliError::Io(format!("{}: {e}", self.path.display())))
    }
}

fn merge_into(map: &mut BTreeMap<CacheKey, ResultRecord>, rec: ResultRecord) -> bool {
    match map.get(&rec.key()) {
        Some(old) if old.exact => false,
        Some(old) if !rec.exact && rec.value <= old.value => false,
        _ => {
            map.insert(rec.key(), rec);
            true
        }
    }
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(format!(".tmp{}", std::process::id()));
    path.with_file_name(name)
}

fn read_records(path: &Path) -> CliResult<BTreeMap<CacheKey, ResultRecord>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(BTreeMap::new()),
        Err(e) => return Err(CliError::Io(format!("{}: {e}", path.display()))),
    };
    let file: CacheFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Cache(format!("{}: unreadable cache: {e}", path.display())))?;
    if file.format != FORMAT {
        return Err(CliError::Cache(format!("{}: unknown cache format {}", path.display(), file.format)));
    }
    if checksum(&file.records) != file.checksum {
        return Err(CliError::Cache(format!("{}: checksum mismatch, cache is corrupt", path.display())));
    }
    Ok(file.records.into_iter().map(|r| (r.key(), r)).collect())
}
