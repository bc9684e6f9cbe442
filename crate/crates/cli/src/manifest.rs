// SPDX-License-Identifier: Apache-2.0

//! Run manifest: digests of every stage's inputs and outputs.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const FILE_NAME: &str = "manifest.json";

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub sha256: String,
    pub rows: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    /// Flags that determine the stage's outputs.
    pub config: BTreeMap<String, String>,
    pub config_digest: String,
    /// Input path (external) or artifact name (workdir) → digest.
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, Artifact>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub stages: BTreeMap<String, StageRecord>,
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_bytes(&bytes))
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub struct Workdir {
    root: PathBuf,
    manifest: RunManifest,
}

impl Workdir {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).with_context(|| format!("creating {}", root.display()))?;
        let path = root.join(FILE_NAME);
        let manifest = if path.exists() {
            let text = fs::read_to_string(&path)?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        } else {
            RunManifest::default()
        };
        Ok(Workdir { root, manifest })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Reads a workdir artifact after checking it against the digest its
    /// producing stage recorded. Returns the contents and the digest.
    pub fn read_checked(&self, name: &str) -> Result<(String, String)> {
        let producer = self
            .manifest
            .stages
            .iter()
            .find(|(_, rec)| rec.outputs.contains_key(name));
        let Some((stage, record)) = producer else {
            bail!("missing upstream artifact {name}: no stage in {FILE_NAME} produced it");
        };
        let path = self.path(name);
        let bytes = fs::read(&path)
            .with_context(|| format!("missing upstream artifact {name} (from stage {stage})"))?;
        let found = sha256_bytes(&bytes);
        let recorded = &record.outputs[name].sha256;
        if &found != recorded {
            bail!(
                "stale upstream artifact {name}: digest mismatch (recorded by stage {stage}: {recorded}, found: {found})"
            );
        }
        let text = String::from_utf8(bytes).with_context(|| format!("{name} is not UTF-8"))?;
        Ok((text, found))
    }

    /// Output names recorded by a stage.
    pub fn outputs_of(&self, stage: &str) -> Vec<String> {
        self.manifest
            .stages
            .get(stage)
            .map(|r| r.outputs.keys().cloned().collect())
            .unwrap_or_default()
    }

    pub fn config_of(&self, stage: &str) -> Option<&BTreeMap<String, String>> {
        self.manifest.stages.get(stage).map(|r| &r.config)
    }

    /// Writes a stage's outputs atomically and records them with its config
    /// and input digests.
    pub fn commit(
        &mut self,
        stage: &str,
        config: BTreeMap<String, String>,
        inputs: BTreeMap<String, String>,
        outputs: Vec<(String, String)>,
    ) -> Result<()> {
        let mut recorded = BTreeMap::new();
        for (name, contents) in &outputs {
            write_atomic(&self.path(name), contents.as_bytes())?;
            recorded.insert(
                name.clone(),
                Artifact {
                    sha256: sha256_bytes(contents.as_bytes()),
                    rows: contents.lines().count(),
                },
            );
        }
        let config_digest = sha256_bytes(serde_json::to_string(&config)?.as_bytes());
        self.manifest.tool_version = env!("CARGO_PKG_VERSION").to_string();
        self.manifest.stages.insert(
            stage.to_string(),
            StageRecord {
                config,
                config_digest,
                inputs,
                outputs: recorded,
            },
        );
        let mut json = serde_json::to_string_pretty(&self.manifest)?;
        json.push('\n');
        write_atomic(&self.path(FILE_NAME), json.as_bytes())
    }
}
