//! Output files, run manifests and the sample CSV formats.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use secants::sampler::{FrequencyTable, SampleRecord, SampleStatus};
use secants::TripleCount;

/// Written next to every output file as `<out>.manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub tool_version: &'static str,
    pub seed: u64,
    pub config: Value,
    pub outputs: Vec<String>,
    pub started: String,
    pub finished: String,
}

pub fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn new(subcommand: &str, seed: u64, config: Value, started: String) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            tool_version: env!("CARGO_PKG_VERSION"),
            seed,
            config,
            outputs: Vec::new(),
            started,
            finished: String::new(),
        }
    }

    pub fn manifest_path(out: &Path) -> PathBuf {
        let mut name = out.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    /// Writes the manifest beside each recorded output.
    pub fn finish(mut self) -> Result<()> {
        self.finished = now();
        let text = serde_json::to_string_pretty(&self)?;
        for out in &self.outputs {
            let path = Self::manifest_path(Path::new(out));
            fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes to `path`, or prints to stdout when there is none.
pub fn emit_json(path: Option<&Path>, value: &impl Serialize) -> Result<()> {
    match path {
        Some(p) => write_json(p, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value)?);
            Ok(())
        }
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Seventeen significant digits.
pub fn number(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RecordRow {
    pub index: u64,
    pub n_t: Option<u8>,
    pub n_p: Option<u8>,
    pub n_m: Option<u8>,
    #[serde(rename = "n_R")]
    pub n_r: Option<u8>,
    pub status: String,
    pub certified: bool,
}

impl RecordRow {
    pub fn from_record(r: &SampleRecord) -> Self {
        Self {
            index: r.index,
            n_t: r.triple.map(|t| t.n_t),
            n_p: r.triple.map(|t| t.n_p),
            n_m: r.triple.map(|t| t.n_m),
            n_r: r.triple.map(|t| t.n_r()),
            status: r.status.to_string(),
            certified: r.certified,
        }
    }

    /// Validates the row and turns it back into a record.
    pub fn to_record(&self) -> Result<SampleRecord> {
        let triple = match (self.n_t, self.n_p, self.n_m) {
            (Some(a), Some(b), Some(c)) => {
                let t = TripleCount::new(a, b, c);
                if self.n_r != Some(t.n_r()) {
                    bail!("row {}: n_R {:?} does not equal n_t + n_p + n_m = {}", self.index, self.n_r, t.n_r());
                }
                if !t.is_admissible() {
                    bail!("row {}: n_R = {} violates parity", self.index, t.n_r());
                }
                Some(t)
            }
            (None, None, None) => None,
            _ => bail!("row {}: incomplete triple", self.index),
        };
        let status = match self.status.as_str() {
            "ok" => SampleStatus::Ok,
            "sampling-failed" => SampleStatus::SamplingFailed,
            "non-generic" => SampleStatus::NonGeneric,
            "classification-failed" => SampleStatus::ClassificationFailed,
            other => bail!("row {}: unknown status {other:?}", self.index),
        };
        if (status == SampleStatus::Ok) != triple.is_some() {
            bail!("row {}: status {} does not fit the triple", self.index, self.status);
        }
        Ok(SampleRecord {
            index: self.index,
            matrix: None,
            triple,
            status,
            message: None,
            certified: self.certified,
        })
    }
}

pub fn write_records(path: &Path, records: &[SampleRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in records {
        w.serialize(RecordRow::from_record(r))?;
    }
    if records.is_empty() {
        w.write_record(["index", "n_t", "n_p", "n_m", "n_R", "status", "certified"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<SampleRecord>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    r.deserialize::<RecordRow>()
        .enumerate()
        .map(|(line, row)| {
            row.with_context(|| format!("{}: record {}", path.display(), line + 1))?
                .to_record()
        })
        .collect()
}

pub fn write_frequencies(path: &Path, table: &FrequencyTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["n_t", "n_p", "n_m", "count"])?;
    for (t, c) in &table.by_triple {
        w.write_record([t.n_t.to_string(), t.n_p.to_string(), t.n_m.to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `n_R,count,fraction` for every even n_R, ready for plotting.
pub fn write_histogram(path: &Path, table: &FrequencyTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["n_R", "count", "fraction"])?;
    for n in (0..=10).step_by(2) {
        let count = table.by_nr.get(&n).copied().unwrap_or(0);
        w.write_record([n.to_string(), count.to_string(), number(table.nr_fraction(n))])?;
    }
    w.flush()?;
    Ok(())
}
