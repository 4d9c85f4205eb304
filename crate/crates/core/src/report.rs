//! CSV and JSON emission. Floats are written in shortest round-trip form, so
//! fixed inputs give byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::Scenario;
use crate::error::{Error, Result};
use crate::experiment::{Aggregate, ExperimentResult, TrialRow};
use crate::model::{CircuitModel, PowerSchedule, VectorSchedule};
use crate::online::SimTrace;

pub const SCHEMA_VERSION: u32 = 1;
pub const ROWS_HEADER: [&str; 5] = ["sweep_value", "seed", "policy", "throughput_bits", "runtime_ms"];

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(out)
}

pub fn write_rows<W: Write>(rows: &[TrialRow], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(ROWS_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.sweep_value.to_string(),
            r.seed.to_string(),
            r.policy.name().to_string(),
            r.throughput_bits.to_string(),
            r.runtime_ms.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Machine-readable companion to the per-trial CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub base_seed: u64,
    pub rows: usize,
    pub aggregates: Vec<Aggregate>,
}

impl Summary {
    pub fn of(result: &ExperimentResult) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: result.scenario,
            base_seed: result.base_seed,
            rows: result.rows.len(),
            aggregates: result.aggregates.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Summary = serde_json::from_str(text).map_err(|e| Error::Io(e.to_string()))?;
        if s.schema_version != SCHEMA_VERSION {
            return Err(Error::Io(format!("unsupported summary schema {}", s.schema_version)));
        }
        Ok(s)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

/// Writes `results.csv` and `summary.json` under `dir`.
pub fn emit(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join("results.csv");
    write_rows(&result.rows, fs::File::create(&csv_path)?)?;
    let json_path = dir.join("summary.json");
    fs::write(&json_path, to_json(&Summary::of(result)))?;
    Ok(vec![csv_path, json_path])
}

pub fn write_schedule<W: Write>(schedule: &PowerSchedule, circuit: &CircuitModel, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["start_s", "end_s", "power_W", "total_power_W"]).map_err(csv_err)?;
    for s in schedule.segments() {
        w.write_record([s.start.to_string(), s.end.to_string(), s.power.to_string(), circuit.total_power(s.power).to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per segment; per-channel powers follow the total.
pub fn write_vector_schedule<W: Write>(schedule: &VectorSchedule, circuit: &CircuitModel, out: W) -> Result<()> {
    let mut w = writer(out);
    let mut header = vec!["start_s".to_string(), "end_s".into(), "power_W".into(), "total_power_W".into()];
    header.extend((0..schedule.channels()).map(|k| format!("power_{k}_W")));
    w.write_record(&header).map_err(csv_err)?;
    for s in schedule.segments() {
        let total = s.total();
        let mut record = vec![s.start.to_string(), s.end.to_string(), total.to_string(), circuit.total_power(total).to_string()];
        record.extend(s.powers.iter().map(|p| p.to_string()));
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace<W: Write>(trace: &SimTrace, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["time_s", "E_s_J", "power_W", "on_fraction", "bits"]).map_err(csv_err)?;
    for r in &trace.records {
        w.write_record([
            r.time.to_string(),
            r.stored_energy.to_string(),
            r.power.to_string(),
            r.on_fraction.to_string(),
            r.bits.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
