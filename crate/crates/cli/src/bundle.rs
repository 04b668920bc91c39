//! In-memory report bundles: named JSON/CSV files with sha256 provenance.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the canonical JSON form of a value.
pub fn content_hash<S: Serialize>(value: &S) -> Result<String, CliError> {
    Ok(sha256_hex(&serde_json::to_vec(value)?))
}

/// Files of one report, keyed by name. `BTreeMap` keeps the order fixed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Bundle {
    pub files: BTreeMap<String, Vec<u8>>,
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    file: &'a str,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    case_hash: &'a str,
    files: Vec<ManifestEntry<'a>>,
}

impl Bundle {
    pub fn json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.files.insert(name.to_string(), bytes);
        Ok(())
    }

    pub fn csv<S: Serialize>(&mut self, name: &str, rows: &[S]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        self.files.insert(name.to_string(), bytes);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.get(name).map(|v| v.as_slice())
    }

    /// Adds `manifest.json` with the hash of every other file.
    pub fn seal(&mut self, case_hash: &str) -> Result<(), CliError> {
        self.files.remove("manifest.json");
        let files = self.files.iter().map(|(k, v)| ManifestEntry { file: k, bytes: v.len(), sha256: sha256_hex(v) }).collect();
        let manifest = Manifest { tool: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION"), case_hash, files };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        self.files.insert("manifest.json".into(), bytes);
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            std::fs::write(dir.join(name), bytes)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lists_every_file_with_its_hash() {
        let mut b = Bundle::default();
        b.json("report.json", &serde_json::json!({ "a": 1.5 })).unwrap();
        b.csv("rows.csv", &[(1, 2.0), (2, 3.0)]).unwrap();
        b.seal("abc").unwrap();
        let m: serde_json::Value = serde_json::from_slice(b.get("manifest.json").unwrap()).unwrap();
        assert_eq!(m["case_hash"], "abc");
        assert_eq!(m["files"].as_array().unwrap().len(), 2);
        assert_eq!(m["files"][1]["sha256"], sha256_hex(b.get("rows.csv").unwrap()));
        assert_eq!(std::str::from_utf8(b.get("rows.csv").unwrap()).unwrap(), "1,2.0\n2,3.0\n");
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
