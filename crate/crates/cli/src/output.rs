//! Output plumbing: fixed-format floats and atomic file writes.

use std::io::Write;
use std::path::Path;

use crate::CliError;

/// Serializes a float with 17 significant digits, enough to reconstruct
/// the exact f64 on read-back.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table with a fixed header and row order.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        Self { text: format!("{header}\n") }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn into_text(self) -> String {
        self.text
    }
}

/// Writes the full payload to `path`, or stdout when no path is given.
/// File writes go through a temp file in the destination directory and a
/// rename, so a failed run never leaves partial output behind.
pub fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        None => {
            print!("{text}");
            std::io::stdout()
                .flush()
                .map_err(|e| CliError::Config(format!("writing stdout: {e}")))
        }
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| {
                CliError::Config(format!("creating temp file in {}: {e}", dir.display()))
            })?;
            tmp.write_all(text.as_bytes())
                .map_err(|e| CliError::Config(format!("writing {}: {e}", p.display())))?;
            tmp.persist(p)
                .map_err(|e| CliError::Config(format!("renaming into {}: {e}", p.display())))?;
            Ok(())
        }
    }
}
