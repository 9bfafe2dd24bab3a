//! On-disk ensembles: `manifest.json` plus one CSV file per path under
//! `paths/`.

use std::fs;
use std::path::{Path, PathBuf};

use csbp::{CadlagPath, Path as SamplePath};
use serde::{Deserialize, Serialize};

use crate::error::{io, CliError};

pub const MANIFEST: &str = "manifest.json";
const PATH_DIR: &str = "paths";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub experiment_id: String,
    pub config_digest: String,
    pub seed: u64,
    /// Process kind, wrapped in `L(..)` / `Linv(..)` by transforms.
    pub process: String,
    pub n_paths: usize,
    pub paths: Vec<PathEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathEntry {
    pub file: String,
    pub start: f64,
    pub stream_id: u64,
}

pub struct StoredEnsemble {
    pub manifest: Manifest,
    pub paths: Vec<SamplePath>,
}

pub fn path_file(index: usize) -> String {
    format!("{PATH_DIR}/path_{index:06}.csv")
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| io(path, e))
}

impl StoredEnsemble {
    /// Write into `dir`, replacing any `paths/` directory already there.
    pub fn save(&self, dir: &Path) -> Result<(), CliError> {
        let path_dir = dir.join(PATH_DIR);
        if path_dir.exists() {
            fs::remove_dir_all(&path_dir).map_err(|e| io(&path_dir, e))?;
        }
        fs::create_dir_all(&path_dir).map_err(|e| io(&path_dir, e))?;
        for (entry, path) in self.manifest.paths.iter().zip(&self.paths) {
            write_file(&dir.join(&entry.file), &path.to_csv())?;
        }
        let json = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        write_file(&dir.join(MANIFEST), &(json + "\n"))
    }

    /// Read from a directory holding a manifest, or from the manifest itself.
    pub fn load(input: &Path) -> Result<Self, CliError> {
        let (dir, manifest_path): (PathBuf, PathBuf) = if input.is_dir() {
            (input.to_path_buf(), input.join(MANIFEST))
        } else {
            let dir = input.parent().unwrap_or(Path::new(".")).to_path_buf();
            (dir, input.to_path_buf())
        };
        let text = fs::read_to_string(&manifest_path).map_err(|e| io(&manifest_path, e))?;
        let manifest: Manifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Io(format!("{}: {e}", manifest_path.display())))?;
        if manifest.paths.len() != manifest.n_paths {
            return Err(CliError::Io(format!(
                "{}: n_paths does not match the path list",
                manifest_path.display()
            )));
        }
        let paths = manifest
            .paths
            .iter()
            .map(|entry| {
                let file = dir.join(&entry.file);
                let csv = fs::read_to_string(&file).map_err(|e| io(&file, e))?;
                CadlagPath::from_csv(&csv)
                    .map_err(|e| CliError::Io(format!("{}: {e}", file.display())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(StoredEnsemble { manifest, paths })
    }
}
