//! CSV emission with a metadata comment block.

use anyhow::Result;
use std::fmt::Write as _;
use std::path::Path;

/// FNV-1a 64-bit hash of the raw config text; stable across runs and builds.
pub fn config_hash(text: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

pub struct CsvWriter {
    buf: String,
}

impl CsvWriter {
    pub fn new(command: &str, config_hash: &str, seed: u64, extra: &[(&str, String)]) -> Self {
        let mut buf = String::new();
        let _ = writeln!(buf, "# tool: kwc {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(buf, "# command: {command}");
        let _ = writeln!(buf, "# config_hash: {config_hash}");
        let _ = writeln!(buf, "# seed: {seed}");
        for (k, v) in extra {
            let _ = writeln!(buf, "# {k}: {v}");
        }
        CsvWriter { buf }
    }

    pub fn header(&mut self, columns: &str) {
        let _ = writeln!(self.buf, "{columns}");
    }

    pub fn row(&mut self, row: &str) {
        let _ = writeln!(self.buf, "{row}");
    }

    pub fn comment(&mut self, note: &str) {
        let _ = writeln!(self.buf, "# {note}");
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, &self.buf)?;
        Ok(())
    }
}
