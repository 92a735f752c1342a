use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use oncosim::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written into every output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub seed: Option<u64>,
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

impl RunManifest {
    /// Starts a manifest and digests the inputs before any processing.
    pub fn begin(subcommand: &str, seed: Option<u64>, inputs: &[&Path]) -> Result<Self> {
        let inputs = inputs
            .iter()
            .map(|p| {
                Ok(FileDigest {
                    path: p.display().to_string(),
                    sha256: sha256_file(p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RunManifest {
            tool: "oncosim".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            seed,
            config: BTreeMap::new(),
            inputs,
            outputs: Vec::new(),
        })
    }

    /// Records digests of `files` (relative to `dir`) and writes the manifest.
    pub fn finish(mut self, dir: &Path, config: BTreeMap<String, String>, files: &[String]) -> Result<()> {
        self.config = config;
        self.outputs = files
            .iter()
            .map(|f| {
                Ok(FileDigest {
                    path: f.clone(),
                    sha256: sha256_file(&dir.join(f))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(&self)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| io_err(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Fails unless `file` is listed among the outputs with a matching digest.
    pub fn verify_output(&self, dir: &Path, file: &str) -> Result<()> {
        let entry = self
            .outputs
            .iter()
            .find(|d| d.path == file)
            .ok_or_else(|| Error::Config(format!("{} does not list {file}", dir.join(MANIFEST_FILE).display())))?;
        let actual = sha256_file(&dir.join(file))?;
        if actual != entry.sha256 {
            return Err(Error::Config(format!(
                "{} does not match its manifest digest; refusing a modified run",
                dir.join(file).display()
            )));
        }
        Ok(())
    }
}

/// An output directory whose files may only be replaced with `--force`.
pub struct OutputDir {
    pub path: PathBuf,
}

impl OutputDir {
    /// Creates the directory and checks up front that none of `files`
    /// (or the manifest) exists unless `force` is set.
    pub fn prepare(path: &Path, files: &[&str], force: bool) -> Result<Self> {
        if !force {
            for f in files.iter().chain(std::iter::once(&MANIFEST_FILE)) {
                let p = path.join(f);
                if p.exists() {
                    return Err(Error::Config(format!(
                        "{} already exists; pass --force to overwrite",
                        p.display()
                    )));
                }
            }
        }
        fs::create_dir_all(path).map_err(|e| io_err(path, e))?;
        Ok(OutputDir {
            path: path.to_path_buf(),
        })
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let p = self.file(name);
        fs::write(&p, bytes).map_err(|e| io_err(&p, e))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }
}
