use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::EmotionLabel;
use crate::synth::SynthSpec;
use crate::types::TrialKey;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub participant: u32,
    pub session: u8,
    pub trial: u8,
    pub label: EmotionLabel,
    /// Paths are relative to the manifest's directory.
    pub raw_path: String,
    pub eye_path: String,
}

impl ManifestEntry {
    pub fn key(&self) -> Result<TrialKey> {
        TrialKey::new(self.participant, self.session, self.trial)
    }
}

/// Index of a corpus directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub entries: Vec<ManifestEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    /// Directory the manifest was loaded from or saved to.
    #[serde(skip)]
    pub root: PathBuf,
}

impl Manifest {
    pub fn new(entries: Vec<ManifestEntry>, synth: Option<SynthSpec>) -> Result<Self> {
        let m = Manifest {
            format_version: MANIFEST_VERSION,
            entries,
            synth,
            provenance: None,
            root: PathBuf::new(),
        };
        m.check_keys()?;
        Ok(m)
    }

    fn check_keys(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            let key = e.key()?;
            if !seen.insert(key) {
                return Err(Error::InvalidConfig(format!("trial {} listed twice", key.stem())));
            }
        }
        Ok(())
    }

    pub fn save(&mut self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))?;
        self.root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(())
    }

    /// Loads `path` (a manifest file or a directory containing one) and checks
    /// version, key uniqueness and that every listed file exists.
    pub fn load(path: &Path) -> Result<Self> {
        let m = Self::read(path)?;
        for e in &m.entries {
            for p in [m.raw_path(e), m.eye_path(e)] {
                if !p.is_file() {
                    return Err(missing(&p));
                }
            }
        }
        Ok(m)
    }

    /// Like [`Manifest::load`] but leaves file existence to the caller.
    pub fn read(path: &Path) -> Result<Self> {
        let file = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
        let text = std::fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
        let mut m: Manifest =
            serde_json::from_str(&text).map_err(|e| Error::format(&file, e.to_string()))?;
        if m.format_version != MANIFEST_VERSION {
            return Err(Error::format(
                &file,
                format!("manifest version {} (expected {MANIFEST_VERSION})", m.format_version),
            ));
        }
        m.root = file.parent().map(Path::to_path_buf).unwrap_or_default();
        m.check_keys()?;
        Ok(m)
    }

    pub fn raw_path(&self, e: &ManifestEntry) -> PathBuf {
        self.root.join(&e.raw_path)
    }

    pub fn eye_path(&self, e: &ManifestEntry) -> PathBuf {
        self.root.join(&e.eye_path)
    }
}

pub fn missing(path: &Path) -> Error {
    Error::io(
        path,
        std::io::Error::new(std::io::ErrorKind::NotFound, "listed in manifest but missing"),
    )
}
