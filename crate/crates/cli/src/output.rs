//! Output-file helpers. Runs are append-only: an existing file is never
//! overwritten unless `--force` is passed.

use anyhow::Context;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

pub struct OutputDir {
    dir: PathBuf,
    force: bool,
}

impl OutputDir {
    pub fn new(dir: &Path, force: bool) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            force,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn create(&self, name: &str) -> anyhow::Result<File> {
        let path = self.path(name);
        if path.exists() && !self.force {
            anyhow::bail!(
                "refusing to overwrite existing output {} (pass --force to allow)",
                path.display()
            );
        }
        File::create(&path).with_context(|| format!("cannot create {}", path.display()))
    }

    pub fn write_json<T: serde::Serialize>(&self, name: &str, value: &T) -> anyhow::Result<()> {
        let mut f = self.create(name)?;
        serde_json::to_writer_pretty(&mut f, value)?;
        f.write_all(b"\n")?;
        Ok(())
    }
}
