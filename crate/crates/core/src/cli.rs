//! Command implementations behind the `viscowave` binary.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use toml::Value;

use crate::classifier::Outcome;
use crate::config::{expand_sweep, read_value, Config};
use crate::error::{Error, Result};
use crate::initial::initial_data;
use crate::output::{decimal, write_run};
use crate::run::{run, RunOutput, TimeSettings};
use crate::sobolev::sobolev_constant;

pub const JOBS_ENV: &str = "VISCOWAVE_JOBS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_IO: i32 = 2;

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

pub fn execute(config: &Config) -> Result<RunOutput> {
    let model = config.model()?;
    let initial = initial_data(&model, &config.initial);
    run(&model, &initial, &config.time, &config.overrides)
}

/// Runs one configuration and writes `run.csv`, `thresholds.txt` and `verdict.txt`.
pub fn run_experiment(config: &Config, out_dir: &Path) -> Result<RunOutput> {
    let out = execute(config)?;
    write_run(out_dir, &out)?;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub values: Vec<Value>,
    pub result: std::result::Result<SweepCellSummary, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCellSummary {
    pub regime: &'static str,
    pub consistency: &'static str,
    pub mu_fit: Option<f64>,
    pub t_star: Option<f64>,
    pub max_u_p_norm: f64,
    pub global_existence: bool,
    pub exponential_growth: bool,
    pub finite_time_blowup: bool,
}

impl SweepCellSummary {
    fn from_output(out: &RunOutput) -> Self {
        let v = &out.verdict;
        let (mu_fit, t_star) = match v.outcome {
            Outcome::ExpGrowth { mu, .. } => (Some(mu), None),
            Outcome::Blowup { t_star, .. } => (None, Some(t_star)),
            _ => (None, None),
        };
        Self {
            regime: v.outcome.regime().name(),
            consistency: match v.consistent {
                Some(true) => "consistent",
                Some(false) => "inconsistent",
                None => "inconclusive",
            },
            mu_fit,
            t_star,
            max_u_p_norm: out.norm_log.iter().map(|x| x.1).filter(|x| x.is_finite()).fold(0.0, f64::max),
            global_existence: v.flags.global_existence,
            exponential_growth: v.flags.exponential_growth,
            finite_time_blowup: v.flags.finite_time_blowup,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub keys: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepSummary {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("cell");
        for k in &self.keys {
            write!(s, ",{k}").unwrap();
        }
        s.push_str(
            ",status,regime,consistency,mu_fit,t_star,max_u_p_norm,\
             global_existence,exponential_growth,finite_time_blowup,error\n",
        );
        let opt = |x: Option<f64>| x.map_or_else(String::new, decimal);
        for (i, row) in self.rows.iter().enumerate() {
            write!(s, "{i}").unwrap();
            for v in &row.values {
                write!(s, ",{}", value_text(v)).unwrap();
            }
            match &row.result {
                Ok(c) => writeln!(
                    s,
                    ",ok,{},{},{},{},{},{},{},{},",
                    c.regime,
                    c.consistency,
                    opt(c.mu_fit),
                    opt(c.t_star),
                    decimal(c.max_u_p_norm),
                    c.global_existence,
                    c.exponential_growth,
                    c.finite_time_blowup
                )
                .unwrap(),
                Err(e) => writeln!(s, ",failed,,,,,,,,,\"{}\"", e.replace('"', "'")).unwrap(),
            }
        }
        s
    }
}

fn value_text(v: &Value) -> String {
    match v {
        Value::Float(x) => decimal(*x),
        Value::Integer(i) => i.to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Worker count: `VISCOWAVE_JOBS` wins over the flag, which wins over the core count.
pub fn resolve_jobs(flag: Option<usize>) -> Result<usize> {
    if let Ok(text) = std::env::var(JOBS_ENV) {
        return match text.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Config(format!(
                "{JOBS_ENV} must be a positive integer, got '{text}'"
            ))),
        };
    }
    match flag {
        Some(0) => Err(Error::Config("--jobs must be at least 1".into())),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Runs the Cartesian product of the ranged keys; cell `i` writes to `out_dir/cell_i`.
pub fn sweep(config_path: &Path, out_dir: &Path, jobs: usize) -> Result<SweepSummary> {
    let root = read_value(config_path)?;
    let (keys, cells) = expand_sweep(&root)?;
    fs::create_dir_all(out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, cell)| {
                let dir = out_dir.join(format!("cell_{i:03}"));
                let result = Config::from_value(&cell.table)
                    .and_then(|c| run_experiment(&c, &dir))
                    .map(|out| SweepCellSummary::from_output(&out))
                    .map_err(|e| e.to_string());
                SweepRow {
                    values: cell.assignments.iter().map(|(_, v)| v.clone()).collect(),
                    result,
                }
            })
            .collect()
    });
    let summary = SweepSummary { keys, rows };
    fs::write(out_dir.join("summary.csv"), summary.to_csv())?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineLevel {
    pub dt: f64,
    /// Largest |dissipation residual| over the samples of the run.
    pub max_residual: f64,
    /// Previous level's residual over this one.
    pub ratio: Option<f64>,
}

/// Repeats the run with `dt, dt/2, …, dt/2^{levels-1}` at the configured stride.
pub fn refine(config: &Config, levels: usize) -> Result<Vec<RefineLevel>> {
    if levels < 2 {
        return Err(Error::Config(format!("refine needs at least 2 levels, got {levels}")));
    }
    let mut table: Vec<RefineLevel> = Vec::with_capacity(levels);
    for k in 0..levels {
        let mut c = config.clone();
        c.time = TimeSettings { dt: config.time.dt / 2f64.powi(k as i32), ..config.time.clone() };
        let out = execute(&c)?;
        let max_residual = out
            .reports
            .iter()
            .map(|r| r.dissipation_residual.abs())
            .fold(0.0, f64::max);
        let ratio = table.last().map(|prev| prev.max_residual / max_residual);
        table.push(RefineLevel { dt: c.time.dt, max_residual, ratio });
    }
    Ok(table)
}

pub fn refine_csv(table: &[RefineLevel]) -> String {
    let mut s = String::from("level,dt,max_abs_residual,ratio\n");
    for (k, row) in table.iter().enumerate() {
        writeln!(
            s,
            "{k},{},{},{}",
            decimal(row.dt),
            decimal(row.max_residual),
            row.ratio.map_or_else(String::new, decimal)
        )
        .unwrap();
    }
    s
}

pub fn sobolev(config: &Config) -> Result<f64> {
    let model = config.model()?;
    Ok(sobolev_constant(&model, config.params.p)?.b)
}
