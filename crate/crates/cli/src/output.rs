//! CSV and JSON writers with embedded provenance.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct RunProvenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_sha256: Option<String>,
    pub seed: Option<u64>,
    pub orders: Vec<usize>,
    pub truncation: Option<serde_json::Value>,
    pub warnings: Vec<String>,
}

impl RunProvenance {
    pub fn new(command: &str, config_sha256: Option<String>) -> Self {
        RunProvenance {
            tool: "landau",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config_sha256,
            seed: None,
            orders: Vec::new(),
            truncation: None,
            warnings: Vec::new(),
        }
    }

    /// `# key=value` lines placed above the CSV header.
    fn comment_lines(&self) -> String {
        let mut s = format!("# tool={} version={} command={}\n", self.tool, self.version, self.command);
        if let Some(h) = &self.config_sha256 {
            s += &format!("# config_sha256={h}\n");
        }
        if let Some(seed) = self.seed {
            s += &format!("# seed={seed}\n");
        }
        if !self.orders.is_empty() {
            let o: Vec<String> = self.orders.iter().map(|o| o.to_string()).collect();
            s += &format!("# orders={}\n", o.join(";"));
        }
        if let Some(t) = &self.truncation {
            s += &format!("# truncation={t}\n");
        }
        for w in &self.warnings {
            s += &format!("# warning={}\n", w.replace('\n', " "));
        }
        s
    }
}

/// 17 significant digits, enough to round-trip a double.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub struct Outputs {
    dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn csv(
        &mut self,
        name: &str,
        prov: &RunProvenance,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<PathBuf, CliError> {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.write_record(&r).map_err(io)?;
        }
        let body = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        let mut bytes = prov.comment_lines().into_bytes();
        bytes.extend(body);
        self.write(name, &bytes)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, prov: &RunProvenance, body: &T) -> Result<PathBuf, CliError> {
        #[derive(Serialize)]
        struct Doc<'a, T> {
            provenance: &'a RunProvenance,
            #[serde(flatten)]
            body: &'a T,
        }
        let mut text = serde_json::to_string_pretty(&Doc { provenance: prov, body }).map_err(io)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(path.clone());
        Ok(path)
    }
}

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}
