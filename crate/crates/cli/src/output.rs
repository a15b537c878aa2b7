//! Output directory bookkeeping. Files written through [`Outputs`] are removed
//! again unless the run commits.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use shadowqpt::acquire::{write_records, MeasurementRecord};

pub struct Outputs {
    dir: PathBuf,
    created_dir: bool,
    files: Vec<PathBuf>,
    committed: bool,
}

impl Outputs {
    pub fn new(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        let created_dir = !dir.exists();
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir, created_dir, files: Vec::new(), committed: false })
    }

    fn register(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        if !self.files.contains(&p) {
            self.files.push(p.clone());
        }
        p
    }

    /// File names written so far, in order.
    pub fn names(&self) -> Vec<String> {
        self.files.iter().filter_map(|p| p.file_name()).map(|s| s.to_string_lossy().into_owned()).collect()
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let p = self.register(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
    }

    pub fn write_csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let p = self.register(name);
        let mut w = csv::Writer::from_path(&p).with_context(|| format!("writing {}", p.display()))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_records(&mut self, name: &str, recs: &[MeasurementRecord]) -> Result<()> {
        let p = self.register(name);
        write_records(recs, &p).with_context(|| format!("writing {}", p.display()))
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.register(name);
        let mut f = fs::File::create(&p).with_context(|| format!("writing {}", p.display()))?;
        f.write_all(text.as_bytes())?;
        Ok(())
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for p in &self.files {
            let _ = fs::remove_file(p);
        }
        if self.created_dir {
            // only succeeds when nothing else landed there
            let _ = fs::remove_dir(&self.dir);
        }
    }
}
