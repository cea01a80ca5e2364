//! CSV and JSON output. Floats are written with 17 significant digits so that parsing
//! recovers them exactly; missing values are empty fields (CSV) or `null` (JSON).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::simulate::StatesTable;
use crate::sweep::{CellError, ReservoirSeeds, SweepKind, SweepResult};
use crate::timetrace::TracePoint;
use crate::HarnessError;

pub const STMC_HEADER: [&str; 6] = ["reservoir", "gamma", "degree", "total_capacity", "threshold", "tau_max"];
pub const ABSORPTION_HEADER: [&str; 4] = ["reservoir", "gamma", "s", "alpha0"];
pub const TIMETRACE_HEADER: [&str; 6] = ["gamma", "step", "substep", "time", "input", "sigma_z"];
/// `s` value marking the row that holds the signal-averaged `ᾱ_γ`.
pub const MEAN_MARKER: &str = "mean";
pub const SCHEMA_VERSION: u32 = 1;

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |e| HarnessError::Io(path.to_path_buf(), e)
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> HarnessError + '_ {
    move |e| HarnessError::Csv(path.to_path_buf(), e.to_string())
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_stmc_csv(result: &SweepResult, path: &Path) -> Result<(), HarnessError> {
    let mut rows = Vec::new();
    for (r, cells) in result.stmc.iter().enumerate() {
        for (g, cell) in cells.iter().enumerate() {
            for &degree in &result.config.degrees {
                let d = cell.as_ref().and_then(|c| c.degree(degree));
                rows.push(vec![
                    r.to_string(),
                    float(result.gammas[g]),
                    degree.to_string(),
                    opt_float(d.map(|d| d.total)),
                    opt_float(d.map(|d| d.threshold)),
                    d.map(|d| d.tau_max.to_string()).unwrap_or_default(),
                ]);
            }
        }
    }
    write_csv(path, &STMC_HEADER, rows)
}

pub fn write_absorption_csv(result: &SweepResult, path: &Path) -> Result<(), HarnessError> {
    let mut rows = Vec::new();
    for (r, cells) in result.absorption.iter().enumerate() {
        for (g, cell) in cells.iter().enumerate() {
            let gamma = float(result.gammas[g]);
            for (i, &s) in result.config.s_grid.iter().enumerate() {
                let a = cell.as_ref().map(|c| c.alpha0[i]);
                rows.push(vec![r.to_string(), gamma.clone(), float(s), opt_float(a)]);
            }
            rows.push(vec![r.to_string(), gamma, MEAN_MARKER.into(), opt_float(cell.as_ref().map(|c| c.mean))]);
        }
    }
    write_csv(path, &ABSORPTION_HEADER, rows)
}

pub fn write_timetrace_csv(points: &[TracePoint], path: &Path) -> Result<(), HarnessError> {
    let rows = points.iter().map(|p| {
        vec![float(p.gamma), p.step.to_string(), p.substep.to_string(), float(p.time), float(p.input), float(p.sigma_z)]
    });
    write_csv(path, &TIMETRACE_HEADER, rows)
}

pub fn write_states_csv(table: &StatesTable, path: &Path) -> Result<(), HarnessError> {
    let header: Vec<&str> = table.header.iter().map(String::as_str).collect();
    let rows = table.rows.iter().map(|row| row.iter().map(|&x| float(x)).collect());
    write_csv(path, &header, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub root_seed: u64,
    pub reservoirs: Vec<ReservoirSeeds>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMeans {
    /// Keyed by degree.
    pub capacity: BTreeMap<String, Vec<Option<f64>>>,
    pub alpha_mean: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub code_version: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seeds: Seeds,
    pub gammas: Vec<f64>,
    pub ensemble_mean: EnsembleMeans,
    /// Spearman correlation of mean capacity against `ᾱ_γ`, keyed by degree. Empty unless
    /// both sweeps ran; `null` where it is undefined.
    pub spearman: BTreeMap<String, Option<f64>>,
    pub errors: Vec<CellError>,
    /// Seconds since the Unix epoch. The only field that differs between identical runs.
    pub generated_at_unix: Option<u64>,
}

impl Summary {
    pub fn new(result: &SweepResult, kind: SweepKind, timestamp: Option<u64>) -> Self {
        let degrees = &result.config.degrees;
        let capacity = if result.stmc.is_empty() {
            BTreeMap::new()
        } else {
            degrees.iter().map(|&d| (d.to_string(), result.mean_capacity(d))).collect()
        };
        let alpha_mean = if result.absorption.is_empty() { Vec::new() } else { result.mean_absorption() };
        let spearman = if kind == SweepKind::Full {
            degrees.iter().map(|&d| (d.to_string(), result.correlate(d).ok())).collect()
        } else {
            BTreeMap::new()
        };
        Summary {
            schema_version: SCHEMA_VERSION,
            code_version: env!("CARGO_PKG_VERSION").into(),
            command: match kind {
                SweepKind::Stmc => "stmc-sweep",
                SweepKind::Absorption => "absorption-sweep",
                SweepKind::Full => "full-sweep",
            }
            .into(),
            config: result.config.clone(),
            config_hash: result.config.hash(),
            seeds: Seeds { root_seed: result.config.root_seed, reservoirs: result.seeds.clone() },
            gammas: result.gammas.clone(),
            ensemble_mean: EnsembleMeans { capacity, alpha_mean },
            spearman,
            errors: result.errors.clone(),
            generated_at_unix: timestamp,
        }
    }
}

pub fn write_summary(summary: &Summary, path: &Path) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// Writes the files belonging to `kind` into `dir` and returns their paths.
pub fn emit(result: &SweepResult, kind: SweepKind, dir: &Path, timestamp: Option<u64>) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    if matches!(kind, SweepKind::Stmc | SweepKind::Full) {
        let p = dir.join("stmc.csv");
        write_stmc_csv(result, &p)?;
        written.push(p);
    }
    if matches!(kind, SweepKind::Absorption | SweepKind::Full) {
        let p = dir.join("absorption.csv");
        write_absorption_csv(result, &p)?;
        written.push(p);
    }
    let p = dir.join("summary.json");
    write_summary(&Summary::new(result, kind, timestamp), &p)?;
    written.push(p);
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct StmcRow {
    pub reservoir: usize,
    pub gamma: f64,
    pub degree: usize,
    pub total_capacity: Option<f64>,
    pub threshold: Option<f64>,
    pub tau_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionRow {
    pub reservoir: usize,
    pub gamma: f64,
    /// `None` on the signal-averaged row.
    pub s: Option<f64>,
    pub alpha0: Option<f64>,
}

#[derive(Deserialize)]
struct RawAbsorptionRow {
    reservoir: usize,
    gamma: f64,
    s: String,
    alpha0: Option<f64>,
}

pub fn read_stmc_csv(path: &Path) -> Result<Vec<StmcRow>, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<Result<_, _>>().map_err(csv_err(path))
}

pub fn read_absorption_csv(path: &Path) -> Result<Vec<AbsorptionRow>, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let raw: Vec<RawAbsorptionRow> = r.deserialize().collect::<Result<_, _>>().map_err(csv_err(path))?;
    raw.into_iter()
        .map(|row| {
            let s = if row.s == MEAN_MARKER {
                None
            } else {
                Some(row.s.parse::<f64>().map_err(|e| HarnessError::Csv(path.to_path_buf(), e.to_string()))?)
            };
            Ok(AbsorptionRow { reservoir: row.reservoir, gamma: row.gamma, s, alpha0: row.alpha0 })
        })
        .collect()
}
