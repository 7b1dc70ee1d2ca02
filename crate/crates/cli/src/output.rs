use std::io;
use std::path::PathBuf;

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub path: String,
    pub description: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a, C: Serialize> {
    command: &'a str,
    version: &'a str,
    config_hash: &'a str,
    seed: u64,
    config: &'a C,
    artifacts: &'a [Artifact],
}

/// Files written under `--out`, recorded for `manifest.json`. Without an
/// output directory nothing is written.
pub struct Outputs {
    dir: Option<PathBuf>,
    svg: bool,
    artifacts: Vec<Artifact>,
}

impl Outputs {
    pub fn new(dir: Option<PathBuf>, svg: bool) -> io::Result<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(Outputs {
            dir,
            svg,
            artifacts: Vec::new(),
        })
    }

    pub fn enabled(&self) -> bool {
        self.dir.is_some()
    }

    pub fn write(&mut self, name: &str, description: &str, content: &[u8]) -> io::Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        std::fs::write(dir.join(name), content)?;
        self.artifacts.push(Artifact {
            path: name.into(),
            description: description.into(),
        });
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, description: &str, value: &T) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        text.push('\n');
        self.write(name, description, text.as_bytes())
    }

    pub fn csv(&mut self, name: &str, description: &str, header: &[&str], rows: &[Vec<f64>]) -> io::Result<()> {
        if !self.enabled() {
            return Ok(());
        }
        self.write(name, description, &csv_bytes(header, rows)?)
    }

    /// Write an SVG plotting the data of an already written CSV.
    pub fn svg(&mut self, name: &str, description: &str, svg: &str, data_csv: &str) -> io::Result<()> {
        if !self.svg {
            return Ok(());
        }
        self.write(name, &format!("{description} (data in {data_csv})"), svg.as_bytes())
    }

    pub fn finish<C: Serialize>(self, command: &str, config_hash: &str, seed: u64, config: &C) -> io::Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let manifest = Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config_hash,
            seed,
            config,
            artifacts: &self.artifacts,
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
        text.push('\n');
        std::fs::write(dir.join("manifest.json"), text)
    }
}

pub fn csv_bytes(header: &[&str], rows: &[Vec<f64>]) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:.17e}")))?;
    }
    w.into_inner().map_err(|e| io::Error::other(e.to_string()))
}
