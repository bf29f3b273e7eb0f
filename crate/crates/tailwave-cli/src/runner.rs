//! Single-run execution and parameter sweeps.

use crate::config::{ConfigError, RunConfig};
use crate::output::{observer_file_name, write_json, write_observer_csv, FitRecord, Meta};
use rayon::prelude::*;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use tailwave::analysis::{bound_verification, fit_local_index, fit_loglog, AnalysisError};
use tailwave::evolution::{evolve, EvolveError, EvolveOutput};

/// Exit statuses mirrored by the process exit code.
#[derive(Debug)]
pub enum RunFailure {
    Config(ConfigError),
    Blowup(EvolveError),
    Other(String),
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunFailure::Config(e) => write!(f, "{e}"),
            RunFailure::Blowup(e) => write!(f, "{e}"),
            RunFailure::Other(e) => write!(f, "{e}"),
        }
    }
}

impl RunFailure {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunFailure::Config(_) => 2,
            RunFailure::Blowup(_) => 3,
            RunFailure::Other(_) => 1,
        }
    }
}

fn io_err(e: std::io::Error) -> RunFailure {
    RunFailure::Other(format!("io error: {e}"))
}

/// Summary of one finished run, used by sweeps and tests.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RunSummary {
    pub exponent: Option<f64>,
    pub c_star: Option<f64>,
    pub bounded: Option<bool>,
    pub sup_phi: f64,
}

/// Execute a config: evolve, analyse, emit artifacts into `dir`.
pub fn run_config(cfg: &RunConfig, dir: &Path) -> Result<RunSummary, RunFailure> {
    cfg.validate().map_err(RunFailure::Config)?;
    let spec = cfg.to_spec().map_err(RunFailure::Config)?;

    let output = match evolve(&spec) {
        Ok(out) => out,
        Err(e @ EvolveError::Blowup { .. }) => {
            if let EvolveError::Blowup {
                ref last_good_row,
                i_u,
                u,
                ..
            } = e
            {
                let dump = dir.join("blowup_row.csv");
                if let Ok(mut w) = fs::File::create(&dump) {
                    let _ = writeln!(w, "# last good row before blowup: i_u={i_u} u={u}");
                    for v in last_good_row {
                        let _ = writeln!(w, "{v}");
                    }
                }
            }
            return Err(RunFailure::Blowup(e));
        }
        Err(e @ (EvolveError::InvalidSpec(_) | EvolveError::Resolution { .. })) => {
            return Err(RunFailure::Config(ConfigError(e.to_string())));
        }
        Err(e) => return Err(RunFailure::Other(e.to_string())),
    };

    emit_artifacts(cfg, &output, dir).map_err(io_err)?;
    Ok(summarize(cfg, &output))
}

fn summarize(cfg: &RunConfig, output: &EvolveOutput) -> RunSummary {
    let mut exponent = None;
    let mut c_star = None;
    let mut bounded = None;
    if let Some(series) = output.series.first() {
        if let Some(&window) = cfg.analysis.windows.first() {
            if let Ok(fit) = fit_loglog(series, window, cfg.floor_abs()) {
                exponent = Some(fit.exponent);
            }
            if let Ok(check) = bound_verification(series, cfg.kappa(), window) {
                c_star = Some(check.c_star);
                bounded = Some(check.bounded);
            }
        }
    }
    RunSummary {
        exponent,
        c_star,
        bounded,
        sup_phi: output.meta.sup_phi,
    }
}

fn emit_artifacts(cfg: &RunConfig, output: &EvolveOutput, dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut records = Vec::new();
    for series in &output.series {
        write_observer_csv(&dir.join(observer_file_name(series.rstar_obs)), series)?;

        let mut fits = Vec::new();
        let mut errors = Vec::new();
        for &window in &cfg.analysis.windows {
            match fit_loglog(series, window, cfg.floor_abs()) {
                Ok(f) => fits.push(f),
                Err(e @ AnalysisError::Floor { .. }) => errors.push(format!("FloorError: {e}")),
                Err(e) => errors.push(e.to_string()),
            }
            match fit_local_index(series, window, cfg.floor_abs()) {
                Ok(f) => fits.push(f),
                Err(e @ AnalysisError::Floor { .. }) => errors.push(format!("FloorError: {e}")),
                Err(e) => errors.push(e.to_string()),
            }
        }
        let bound = cfg
            .analysis
            .windows
            .first()
            .and_then(|&w| bound_verification(series, cfg.kappa(), w).ok());
        records.push(FitRecord {
            rstar: series.rstar_obs,
            fits,
            bound,
            errors,
        });
    }
    write_json(&dir.join("fits.json"), &records)?;
    write_json(&dir.join("meta.json"), &Meta::new(cfg, &output.meta))?;
    Ok(())
}

/// Sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Delta,
    Epsilon,
    Du,
}

impl std::str::FromStr for SweepAxis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "delta" => Ok(SweepAxis::Delta),
            "epsilon" => Ok(SweepAxis::Epsilon),
            "du" => Ok(SweepAxis::Du),
            other => Err(format!(
                "unknown axis '{other}' (expected delta, epsilon or du)"
            )),
        }
    }
}

#[derive(Debug, serde::Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub summary: Option<RunSummary>,
    pub error: Option<String>,
    pub dir: PathBuf,
}

/// Run the base config across `values` of one axis, rows in parallel.
/// Writes `summary.csv` plus one artifact directory per row.
pub fn sweep(
    base: &RunConfig,
    axis: SweepAxis,
    values: &[f64],
    jobs: Option<usize>,
    dir: &Path,
) -> Result<Vec<SweepRow>, RunFailure> {
    if values.is_empty() {
        return Err(RunFailure::Config(ConfigError("empty sweep values".into())));
    }
    base.validate().map_err(RunFailure::Config)?;
    fs::create_dir_all(dir).map_err(io_err)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| RunFailure::Other(e.to_string()))?;

    let rows: Vec<SweepRow> = pool.install(|| {
        values
            .par_iter()
            .map(|&value| {
                let mut cfg = base.clone();
                match axis {
                    SweepAxis::Delta => cfg.profile.delta = value,
                    SweepAxis::Epsilon => cfg.data.epsilon = value,
                    SweepAxis::Du => cfg.grid.du = value,
                }
                let row_dir = dir.join(format!("row-{value}"));
                match run_config(&cfg, &row_dir) {
                    Ok(summary) => SweepRow {
                        value,
                        summary: Some(summary),
                        error: None,
                        dir: row_dir,
                    },
                    Err(e) => SweepRow {
                        value,
                        summary: None,
                        error: Some(e.to_string()),
                        dir: row_dir,
                    },
                }
            })
            .collect()
    });

    // Richardson column for resolution sweeps: ratio of successive solution
    // changes across consecutive rows, computed from the emitted series.
    let conv = if axis == SweepAxis::Du && rows.iter().all(|r| r.error.is_none()) && rows.len() >= 3
    {
        convergence_ratios(base, &rows)
    } else {
        vec![None; rows.len()]
    };

    let mut w = std::io::BufWriter::new(fs::File::create(dir.join("summary.csv")).map_err(io_err)?);
    writeln!(w, "value,exponent,C_star,bounded_flag,conv_ratio").map_err(io_err)?;
    for (row, ratio) in rows.iter().zip(&conv) {
        let (e, c, b) = match (&row.summary, &row.error) {
            (Some(s), _) => (
                s.exponent.map(|x| x.to_string()).unwrap_or_default(),
                s.c_star.map(|x| x.to_string()).unwrap_or_default(),
                s.bounded.map(|x| x.to_string()).unwrap_or_default(),
            ),
            (None, Some(err)) => (format!("error: {err}"), String::new(), String::new()),
            _ => (String::new(), String::new(), String::new()),
        };
        let r = ratio.map(|x| x.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{},{}", row.value, e, c, b, r).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;

    if rows.iter().any(|r| r.error.is_some()) {
        return Err(RunFailure::Other("one or more sweep rows failed".into()));
    }
    Ok(rows)
}

/// Re-run the triple analysis on sorted-by-du rows: conv_ratio on row k is
/// the Richardson ratio for (k-2, k-1, k).
fn convergence_ratios(base: &RunConfig, rows: &[SweepRow]) -> Vec<Option<f64>> {
    use tailwave::analysis::self_convergence_ratio;

    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| rows[b].value.partial_cmp(&rows[a].value).unwrap());

    // Reload the series from the row artifacts; the CSV is the ground truth
    // the consumer sees.
    let series: Vec<Option<tailwave::evolution::ObserverSeries>> = rows
        .iter()
        .map(|r| {
            let first = base.observers.first()?;
            read_series(&r.dir.join(observer_file_name(*first))).ok()
        })
        .collect();

    let window = base
        .analysis
        .windows
        .first()
        .copied()
        .unwrap_or((50.0, 400.0));
    let mut out = vec![None; rows.len()];
    for w in order.windows(3) {
        let (a, b, c) = (w[0], w[1], w[2]);
        if let (Some(sa), Some(sb), Some(sc)) = (&series[a], &series[b], &series[c]) {
            if let Ok(ratio) = self_convergence_ratio(sa, sb, sc, window) {
                out[c] = Some(ratio);
            }
        }
    }
    out
}

/// Minimal observer-CSV reader (inverse of the writer).
pub fn read_series(path: &Path) -> std::io::Result<tailwave::evolution::ObserverSeries> {
    use tailwave::evolution::{ObserverSeries, Sample};
    let text = fs::read_to_string(path)?;
    let mut samples = Vec::new();
    for line in text.lines().skip(1) {
        let mut parts = line.split(',');
        let mut next = || -> Option<f64> { parts.next()?.parse().ok() };
        if let (Some(t), Some(phi), Some(dt_phi), Some(s_phi)) = (next(), next(), next(), next()) {
            samples.push(Sample {
                t,
                phi,
                dt_phi,
                s_phi,
            });
        }
    }
    Ok(ObserverSeries {
        rstar_obs: f64::NAN,
        samples,
    })
}
