//! Command-line front end: run configurations, sweep parameters, drive the
//! verification suite, fit cone exponents and print iteration traces.

use clap::{Parser, Subcommand};
use num_rational::Ratio;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use tailwave::iteration::{run_iteration, OperatorKind};
use tailwave::lightcone::{cone_quadrature, fit_cone_exponents, ConeWeight, SamplePath};
use tailwave_cli::acceptance;
use tailwave_cli::config::{self, RunConfig};
use tailwave_cli::output::{output_root, timestamped_dir, write_json};
use tailwave_cli::runner::{self, RunFailure, SweepAxis};

#[derive(Parser)]
#[command(
    name = "tailwave",
    about = "Late-time wave-tail laboratory on black-hole backgrounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one configuration and emit observer series, fits and metadata.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output root (defaults to $TAILWAVE_OUT or ./out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a base configuration across values of one axis, in parallel.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// One of: delta, epsilon, du.
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        /// Parallel row budget (defaults to the rayon heuristic).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification suite; exit 0 iff every criterion passes.
    Accept {
        /// Symbolic (iteration-engine) criteria only, no PDE runs.
        #[arg(long)]
        fast: bool,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Quadrature-and-fit front end for the cone exponent table.
    ConeFit {
        /// Weights as alpha:beta:eta triples.
        #[arg(long, value_delimiter = ',', default_values_t = [
            "2.5:0:2".to_string(),
            "2.5:0.5:0.5".to_string(),
            "2.9:0:2".to_string(),
            "2.75:0:-0.5".to_string(),
            "2.5:0:0.5".to_string(),
        ])]
        weights: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the decay-exponent iteration and print its trace.
    Iterate {
        /// Decay parameter, as a decimal ("0.5") or a fraction ("1/2").
        #[arg(long)]
        delta: String,
        #[arg(long, value_parser = parse_operator, default_value = "P")]
        operator: OperatorKind,
        #[arg(long, default_value_t = 8)]
        max_passes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_operator(s: &str) -> Result<OperatorKind, String> {
    match s {
        "P" => Ok(OperatorKind::P),
        "Pprime" | "P'" => Ok(OperatorKind::PPrime),
        other => Err(format!("unknown operator '{other}' (expected P or Pprime)")),
    }
}

fn parse_delta(s: &str) -> Result<Ratio<i64>, String> {
    if let Some((num, den)) = s.split_once('/') {
        let n: i64 = num
            .trim()
            .parse()
            .map_err(|e| format!("bad numerator: {e}"))?;
        let d: i64 = den
            .trim()
            .parse()
            .map_err(|e| format!("bad denominator: {e}"))?;
        if d == 0 {
            return Err("zero denominator".into());
        }
        return Ok(Ratio::new(n, d));
    }
    // Exact decimal -> rational conversion.
    let t = s.trim();
    if let Some((whole, frac)) = t.split_once('.') {
        let scale = 10i64
            .checked_pow(frac.len() as u32)
            .ok_or_else(|| "decimal too long".to_string())?;
        let w: i64 = if whole.is_empty() {
            0
        } else {
            whole.parse().map_err(|e| format!("{e}"))?
        };
        let f: i64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|e| format!("{e}"))?
        };
        let sign = if t.starts_with('-') { -1 } else { 1 };
        Ok(Ratio::new(w * scale + sign * f, scale))
    } else {
        let n: i64 = t.parse().map_err(|e| format!("{e}"))?;
        Ok(Ratio::from_integer(n))
    }
}

fn parse_weight(s: &str) -> Result<ConeWeight, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("weight '{s}' is not alpha:beta:eta"));
    }
    let vals: Result<Vec<f64>, _> = parts.iter().map(|p| p.trim().parse::<f64>()).collect();
    let vals = vals.map_err(|e| format!("weight '{s}': {e}"))?;
    ConeWeight::new(vals[0], vals[1], vals[2]).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out } => cmd_run(&config, out),
        Command::Sweep {
            config,
            axis,
            values,
            jobs,
            out,
        } => cmd_sweep(&config, axis, &values, jobs, out),
        Command::Accept { fast, seed } => cmd_accept(fast, seed),
        Command::ConeFit { weights, out } => cmd_cone_fit(&weights, out),
        Command::Iterate {
            delta,
            operator,
            max_passes,
            out,
        } => cmd_iterate(&delta, operator, max_passes, out),
    };
    ExitCode::from(code)
}

fn load_config(path: &PathBuf) -> Result<RunConfig, RunFailure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunFailure::Config(config::ConfigError(format!("{}: {e}", path.display()))))?;
    RunConfig::from_toml(&text).map_err(RunFailure::Config)
}

fn fail(e: &RunFailure) -> u8 {
    eprintln!("{e}");
    e.exit_code() as u8
}

fn cmd_run(path: &PathBuf, out: Option<PathBuf>) -> u8 {
    let cfg = match load_config(path) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let root = out.unwrap_or_else(output_root);
    let dir = match timestamped_dir(&root, "run") {
        Ok(d) => d,
        Err(e) => return fail(&RunFailure::Other(e.to_string())),
    };
    match runner::run_config(&cfg, &dir) {
        Ok(summary) => {
            println!("run complete: {}", dir.display());
            if let Some(e) = summary.exponent {
                println!("fitted exponent {e:.4}");
            }
            if let Some(b) = summary.bounded {
                println!("bounded_flag {b}");
            }
            0
        }
        Err(e) => fail(&e),
    }
}

fn cmd_sweep(
    path: &PathBuf,
    axis: SweepAxis,
    values: &[f64],
    jobs: Option<usize>,
    out: Option<PathBuf>,
) -> u8 {
    let cfg = match load_config(path) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if values.is_empty() {
        return fail(&RunFailure::Config(config::ConfigError(
            "empty sweep values".into(),
        )));
    }
    let root = out.unwrap_or_else(output_root);
    let dir = match timestamped_dir(&root, "sweep") {
        Ok(d) => d,
        Err(e) => return fail(&RunFailure::Other(e.to_string())),
    };
    match runner::sweep(&cfg, axis, values, jobs, &dir) {
        Ok(rows) => {
            println!("sweep complete: {} rows in {}", rows.len(), dir.display());
            0
        }
        Err(e) => fail(&e),
    }
}

fn cmd_accept(fast: bool, seed: u64) -> u8 {
    let criteria = acceptance::run_all(fast, seed);
    acceptance::print_table(&criteria);
    if criteria.iter().all(|c| c.passed) {
        0
    } else {
        1
    }
}

fn cmd_cone_fit(weight_strs: &[String], out: Option<PathBuf>) -> u8 {
    let mut weights = Vec::new();
    for s in weight_strs {
        match parse_weight(s) {
            Ok(w) => weights.push(w),
            Err(e) => return fail(&RunFailure::Config(config::ConfigError(e))),
        }
    }
    let root = out.unwrap_or_else(output_root);
    let dir = match timestamped_dir(&root, "cone-fit") {
        Ok(d) => d,
        Err(e) => return fail(&RunFailure::Other(e.to_string())),
    };

    let csv = dir.join("cone_values.csv");
    let mut w = match std::fs::File::create(&csv) {
        Ok(f) => std::io::BufWriter::new(f),
        Err(e) => return fail(&RunFailure::Other(e.to_string())),
    };
    let _ = writeln!(w, "alpha,beta,eta,t,r,value");

    let mut fits = Vec::new();
    for weight in &weights {
        let path = SamplePath::for_weight(weight);
        for &u in &path.u_values {
            let r = path.fixed_r;
            match cone_quadrature(weight, r + u, r, path.cells_u) {
                Ok(q) => {
                    let _ = writeln!(
                        w,
                        "{},{},{},{},{},{}",
                        weight.alpha, weight.beta, weight.eta, q.t, q.r, q.value
                    );
                }
                Err(e) => return fail(&RunFailure::Other(e.to_string())),
            }
        }
        match fit_cone_exponents(weight, &path) {
            Ok(fit) => {
                println!(
                    "({}, {}, {}): fitted p_u = {:.3}, p_r = {:.3}",
                    weight.alpha, weight.beta, weight.eta, fit.p_u, fit.p_r
                );
                fits.push(fit);
            }
            Err(e) => return fail(&RunFailure::Other(e.to_string())),
        }
    }
    let _ = w.flush();
    if let Err(e) = write_json(&dir.join("cone_fits.json"), &fits) {
        return fail(&RunFailure::Other(e.to_string()));
    }
    println!("cone-fit artifacts in {}", dir.display());
    0
}

fn cmd_iterate(delta: &str, operator: OperatorKind, max_passes: usize, out: Option<PathBuf>) -> u8 {
    let delta = match parse_delta(delta) {
        Ok(d) => d,
        Err(e) => return fail(&RunFailure::Config(config::ConfigError(e))),
    };
    match run_iteration(delta, operator, max_passes) {
        Ok(outcome) => {
            print!("{}", outcome.trace.to_text());
            println!(
                "final bound {} after {} passes (kappa = {})",
                outcome.bound, outcome.passes, outcome.kappa
            );
            if let Some(root) = out {
                if let Ok(dir) = timestamped_dir(&root, "iterate") {
                    let _ = write_json(&dir.join("trace.json"), &outcome.trace);
                    println!("trace written to {}", dir.display());
                }
            }
            0
        }
        Err(e) => {
            eprintln!("{e}");
            1
        }
    }
}
