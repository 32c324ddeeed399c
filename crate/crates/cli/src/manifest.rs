//! Output directory handling and the replayable run manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use crate::config::{Config, RunMeta};
use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.toml";

/// One invocation: the resolved config and where its files go.
pub struct Run {
    pub cfg: Config,
    pub subcommand: &'static str,
    pub config_path: Option<PathBuf>,
    pub out: PathBuf,
}

impl Run {
    pub fn new(mut cfg: Config, subcommand: &'static str, config_path: Option<PathBuf>) -> Result<Self, CliError> {
        let out = cfg.out_dir();
        std::fs::create_dir_all(&out).map_err(|e| CliError::Io(format!("cannot create {}: {e}", out.display())))?;
        cfg.out = Some(out.clone());
        Ok(Self { cfg, subcommand, config_path, out })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn create(&self, name: &str) -> Result<BufWriter<File>, CliError> {
        let p = self.path(name);
        let f = File::create(&p).map_err(|e| CliError::Io(format!("cannot create {}: {e}", p.display())))?;
        Ok(BufWriter::new(f))
    }

    /// Write `name` through `body`, flushing at the end.
    pub fn write(&self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), CliError> {
        let mut w = self.create(name)?;
        body(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// The resolved config plus a `[run]` table. Passing this file back via
    /// `--config` repeats the run.
    pub fn manifest(&self) -> Config {
        let mut m = self.cfg.clone();
        m.run = Some(RunMeta {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: self.subcommand.to_string(),
            config_path: self.config_path.clone(),
            seed: self.cfg.seed,
            out: self.out.clone(),
            cache: self.cfg.cache_dir(),
        });
        m
    }

    pub fn write_manifest(&self) -> Result<PathBuf, CliError> {
        let text = toml::to_string(&self.manifest()).map_err(|e| CliError::Io(format!("manifest: {e}")))?;
        let p = self.path(MANIFEST_FILE);
        std::fs::write(&p, format!("# ergodic run manifest; replay with --config\n{text}"))?;
        Ok(p)
    }
}
