use std::fs;
use std::path::{Path, PathBuf};

use amyloid_core::fsutil::write_atomic;
use serde_json::{Map, Value};

use crate::config::{stamp, Provenance, Settings};
use crate::error::CliResult;

/// Output directory of one run. Every file written through it carries the
/// run's provenance: JSON documents embed it, other files get a
/// `<name>.prov.json` sidecar.
pub struct Outputs {
    dir: PathBuf,
    header: Value,
    provenance: Provenance,
}

impl Outputs {
    pub fn create(settings: &Settings) -> CliResult<Self> {
        fs::create_dir_all(&settings.out_dir)?;
        Ok(Self { dir: settings.out_dir.clone(), header: stamp(settings), provenance: Provenance::new(settings) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn header(&self) -> &Value {
        &self.header
    }

    /// Writes `{provenance, config, ..payload}`; `payload` must be an object.
    pub fn write_json(&self, name: &str, payload: Value) -> CliResult<PathBuf> {
        let mut doc: Map<String, Value> = self.header.as_object().cloned().unwrap_or_default();
        if let Value::Object(fields) = payload {
            doc.extend(fields);
        }
        let path = self.path(name);
        write_json_file(&path, &Value::Object(doc))?;
        Ok(path)
    }

    pub fn write_text(&self, name: &str, content: &str) -> CliResult<PathBuf> {
        let path = self.path(name);
        write_atomic(&path, content.as_bytes())?;
        self.write_sidecar(&path)?;
        Ok(path)
    }

    /// Provenance sidecar for a file written by other means.
    pub fn write_sidecar(&self, file: &Path) -> CliResult<()> {
        let mut name = file.file_name().unwrap_or_default().to_os_string();
        name.push(".prov.json");
        write_json_file(&file.with_file_name(name), &self.header)
    }
}

pub fn write_json_file(path: &Path, value: &Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    write_atomic(path, text.as_bytes())?;
    Ok(())
}
