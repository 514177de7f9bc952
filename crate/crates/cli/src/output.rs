use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliResult;

/// Output directory that records every artifact it hands out.
pub struct OutDir {
    root: PathBuf,
    artifacts: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    seed: u64,
    artifacts: &'a [String],
    config: &'a RunConfig,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    pub fn file(&mut self, name: &str) -> CliResult<BufWriter<File>> {
        self.artifacts.push(name.to_string());
        Ok(BufWriter::new(File::create(self.root.join(name))?))
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.artifacts.push(name.to_string());
        fs::write(self.root.join(name), text)?;
        Ok(())
    }

    /// Writes `manifest.json` listing the artifacts in creation order.
    pub fn finish(self, command: &str, config: &RunConfig) -> CliResult<()> {
        let manifest = Manifest {
            command,
            seed: config.seed(),
            artifacts: &self.artifacts,
            config,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(self.root.join("manifest.json"), text)?;
        Ok(())
    }
}
