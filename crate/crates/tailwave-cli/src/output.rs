//! Artifact emission: observer CSVs, fit/metadata JSON, output directories.
//!
//! Float formatting uses Rust's shortest round-trip representation, so two
//! runs of the same configuration emit byte-identical files (the wall-time
//! field in the metadata is the one exception).

use crate::config::RunConfig;
use serde::Serialize;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use tailwave::analysis::{BoundCheck, DecayFit};
use tailwave::evolution::{ObserverSeries, RunMetadata};

/// Root for emitted artifacts: `$TAILWAVE_OUT` or `./out`.
pub fn output_root() -> PathBuf {
    std::env::var_os("TAILWAVE_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Create a fresh timestamped directory under the root.
pub fn timestamped_dir(root: &Path, label: &str) -> std::io::Result<PathBuf> {
    let stamp = chrono::Utc::now().format("%Y%m%d-%H%M%S%.3f");
    let mut dir = root.join(format!("{stamp}-{label}"));
    let mut k = 0;
    while dir.exists() {
        k += 1;
        dir = root.join(format!("{stamp}-{label}-{k}"));
    }
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

pub fn write_observer_csv(path: &Path, series: &ObserverSeries) -> std::io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "t,phi,dt_phi,S_phi")?;
    for s in &series.samples {
        writeln!(w, "{},{},{},{}", s.t, s.phi, s.dt_phi, s.s_phi)?;
    }
    w.flush()
}

pub fn observer_file_name(rstar: f64) -> String {
    format!("observer_{rstar}.csv")
}

/// Fit record for one observer and window; failed fits carry the error text
/// instead of numbers.
#[derive(Debug, Serialize)]
pub struct FitRecord {
    pub rstar: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fits: Vec<DecayFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundCheck>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")
}

/// The metadata block of a run.
#[derive(Debug, Serialize)]
pub struct Meta<'a> {
    pub config: &'a RunConfig,
    pub sup_phi: f64,
    pub wall_seconds: f64,
    pub grid: GridMeta,
    pub min_psi: f64,
    pub max_psi: f64,
    pub one_sided_rows: usize,
}

#[derive(Debug, Serialize)]
pub struct GridMeta {
    pub n_u: usize,
    pub n_v: usize,
    pub du: f64,
}

impl<'a> Meta<'a> {
    pub fn new(config: &'a RunConfig, meta: &RunMetadata) -> Self {
        Self {
            config,
            sup_phi: meta.sup_phi,
            wall_seconds: meta.wall_seconds,
            grid: GridMeta {
                n_u: meta.n_u,
                n_v: meta.n_v,
                du: config.grid.du,
            },
            min_psi: meta.min_psi,
            max_psi: meta.max_psi,
            one_sided_rows: meta.one_sided_rows,
        }
    }
}
