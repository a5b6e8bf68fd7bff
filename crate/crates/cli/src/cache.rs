//! Append-only JSON-lines cache of upper/lower counts.
//!
//! Line 1 is a schema header; every later line is one `OmegaRecord`. Existing
//! lines are never rewritten, and a record whose `(n, method)` is already
//! present is not appended again.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use kellner_core::kellner::{OmegaMethod, OmegaRecord};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA: &str = "kellner-omega-cache";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct Header {
    schema: String,
    version: u32,
}

#[derive(Debug)]
pub struct Cache {
    path: PathBuf,
    seen: BTreeSet<(u64, OmegaMethod)>,
    needs_header: bool,
}

impl Cache {
    pub fn open(path: &Path) -> Result<Self, CliError> {
        let mut seen = BTreeSet::new();
        let mut needs_header = true;
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if i == 0 {
                    let h: Header = serde_json::from_str(&line).map_err(|e| {
                        CliError::Usage(format!("{}: bad cache header: {e}", path.display()))
                    })?;
                    if h.schema != SCHEMA || h.version != SCHEMA_VERSION {
                        return Err(CliError::Usage(format!(
                            "{}: cache schema {} v{} is not {SCHEMA} v{SCHEMA_VERSION}",
                            path.display(),
                            h.schema,
                            h.version
                        )));
                    }
                    needs_header = false;
                    continue;
                }
                if line.trim().is_empty() {
                    continue;
                }
                let r: OmegaRecord = serde_json::from_str(&line)
                    .map_err(|e| CliError::Usage(format!("{}:{}: {e}", path.display(), i + 1)))?;
                seen.insert((r.n, r.method));
            }
        }
        Ok(Self {
            path: path.to_path_buf(),
            seen,
            needs_header,
        })
    }

    pub fn contains(&self, n: u64, method: OmegaMethod) -> bool {
        self.seen.contains(&(n, method))
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }

    /// Appends the records not yet present; returns how many were written.
    pub fn append(&mut self, records: &[OmegaRecord]) -> Result<usize, CliError> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        let mut w = BufWriter::new(file);
        if self.needs_header {
            let h = Header {
                schema: SCHEMA.into(),
                version: SCHEMA_VERSION,
            };
            serde_json::to_writer(&mut w, &h)?;
            writeln!(w)?;
            self.needs_header = false;
        }
        let mut written = 0;
        for r in records {
            if self.seen.insert((r.n, r.method)) {
                serde_json::to_writer(&mut w, r)?;
                writeln!(w)?;
                written += 1;
            }
        }
        w.flush()?;
        Ok(written)
    }
}
