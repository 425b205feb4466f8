//! Output directory handling and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

#[derive(Serialize)]
pub struct RunManifest<'a> {
    pub subcommand: &'a str,
    pub params: Value,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub outputs: Vec<String>,
    pub results: Value,
    pub wall_time_secs: f64,
    pub finished_unix: u64,
}

/// Files written during one run. Dropping an unfinished set removes them.
pub struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
    started: Instant,
    done: bool,
}

impl Outputs {
    pub fn new(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Outputs { dir: dir.to_path_buf(), written: Vec::new(), started: Instant::now(), done: false })
    }

    /// Write through a temporary file and rename into place.
    pub fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> std::io::Result<()> {
        let path = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, &path)?;
        log::info!("wrote {}", path.display());
        self.track(path);
        Ok(())
    }

    /// Record a file written by someone else.
    pub fn track(&mut self, path: PathBuf) {
        if !self.written.contains(&path) {
            self.written.push(path);
        }
    }

    pub fn finish(mut self, subcommand: &str, params: Value, seed: Option<u64>, results: Value) -> std::io::Result<()> {
        let outputs: Vec<String> = self
            .written
            .iter()
            .map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default())
            .chain(std::iter::once("manifest.json".to_string()))
            .collect();
        let manifest = RunManifest {
            subcommand,
            params,
            seed,
            version: env!("CARGO_PKG_VERSION"),
            outputs,
            results,
            wall_time_secs: self.started.elapsed().as_secs_f64(),
            finished_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        };
        let json = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
        self.write("manifest.json", json + "\n")?;
        self.done = true;
        Ok(())
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if !self.done {
            for p in &self.written {
                let _ = fs::remove_file(p);
            }
        }
    }
}
