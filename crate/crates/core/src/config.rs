//! TOML run configuration.
//!
//! ```toml
//! [kernel]
//! terms = [[0.25, 1.0]]        # Prony pairs (a_i, b_i); omit for g = 0
//!
//! [model]
//! alpha = 0.1
//! p = 4.0
//! m = 2.5
//!
//! [initial]
//! profile = "sine"
//! amplitude = 0.5
//!
//! [time]
//! t_final = 50.0
//!
//! [experiment]
//! type = "stable"
//! ```
//!
//! Any scalar numeric key may be given as an array instead; such ranged keys
//! are expanded by [`expand_sweep`] and rejected by [`Config::from_value`].

use std::path::Path;

use toml::{Table, Value};

use crate::discretization::{check_gates, DiscreteModel, Experiment, Geometry, Params};
use crate::error::{Error, Result};
use crate::initial::{InitialSpec, Profile};
use crate::kernel::KernelSpec;
use crate::memory::MemoryMode;
use crate::run::{RunOverrides, TimeSettings};
use crate::stepper::Scheme;

pub const MAX_RANGED_KEYS: usize = 2;
pub const DEFAULT_NODES: usize = 101;
pub const DEFAULT_SAMPLING_STRIDE: usize = 10;
pub const DEFAULT_RANDOM_MODES: usize = 8;

const SECTIONS: [&str; 5] = ["kernel", "model", "initial", "time", "experiment"];
const KEYS: [(&str, &[&str]); 5] = [
    ("kernel", &["terms"]),
    (
        "model",
        &[
            "dimension",
            "length",
            "width",
            "nodes",
            "nodes_y",
            "alpha",
            "p",
            "m",
            "damping_coefficient",
            "source",
        ],
    ),
    (
        "initial",
        &[
            "profile",
            "amplitude",
            "velocity_profile",
            "velocity_amplitude",
            "seed",
            "modes",
        ],
    ),
    (
        "time",
        &[
            "dt",
            "t_final",
            "sampling_stride",
            "scheme",
            "corrector_tol",
            "max_iterations",
            "blowup_cap",
            "memory",
            "adaptive",
        ],
    ),
    ("experiment", &["type", "sobolev_constant", "epsilon"]),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub geometry: Geometry,
    pub params: Params,
    pub kernel: KernelSpec,
    pub experiment: Experiment,
    pub initial: InitialSpec,
    pub time: TimeSettings,
    pub overrides: RunOverrides,
}

impl Config {
    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_value(&read_value(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_value(&parse_value(text)?)
    }

    pub fn from_value(root: &Table) -> Result<Self> {
        check_layout(root)?;
        if let Some((key, _)) = ranged_keys(root).first() {
            return Err(Error::Config(format!(
                "{key} is ranged; use the sweep command for arrays of values"
            )));
        }
        let r = Reader { root };

        let kernel = match r.get("kernel", "terms") {
            None => KernelSpec::zero(),
            Some(v) => KernelSpec::new(&prony_pairs(v)?)?,
        };

        let dimension = r.uint_or("model", "dimension", 1)?;
        let length = r.float_or("model", "length", 1.0)?;
        let nodes = r.uint_or("model", "nodes", DEFAULT_NODES)?;
        let geometry = match dimension {
            1 => {
                for key in ["width", "nodes_y"] {
                    if r.get("model", key).is_some() {
                        return Err(Error::Config(format!(
                            "[model] {key} only applies to dimension = 2"
                        )));
                    }
                }
                Geometry::Interval { length, nodes }
            }
            2 => Geometry::Rectangle {
                lx: length,
                ly: r.float_or("model", "width", 1.0)?,
                nx: nodes,
                ny: r.uint_or("model", "nodes_y", nodes)?,
            },
            d => {
                return Err(Error::Config(format!("[model] dimension must be 1 or 2, got {d}")))
            }
        };
        let params = Params {
            alpha: r.float("model", "alpha")?,
            p: r.float("model", "p")?,
            m: r.float("model", "m")?,
            kappa: r.float_or("model", "damping_coefficient", 1.0)?,
            source: r.bool_or("model", "source", true)?,
        };

        let experiment_name = r.str_or("experiment", "type", "run")?;
        let experiment = Experiment::parse(&experiment_name).ok_or_else(|| {
            Error::Config(format!(
                "[experiment] type must be run, stable, growth or blowup, got '{experiment_name}'"
            ))
        })?;
        check_gates(&params, &kernel, experiment)?;

        let seed = r.uint_or("initial", "seed", 0)? as u64;
        let modes = r.uint_or("initial", "modes", DEFAULT_RANDOM_MODES)?;
        let initial = InitialSpec {
            displacement: Profile::parse(&r.str_or("initial", "profile", "sine")?, seed, modes)?,
            amplitude: r.float_or("initial", "amplitude", 1.0)?,
            velocity: Profile::parse(
                &r.str_or("initial", "velocity_profile", "zero")?,
                // a distinct stream so u₀ and u₁ are not proportional
                seed.wrapping_add(1),
                modes,
            )?,
            velocity_amplitude: r.float_or("initial", "velocity_amplitude", 0.0)?,
        };

        let defaults = TimeSettings::default();
        let scheme_name = r.str_or("time", "scheme", defaults.scheme.name())?;
        let memory_name = r.str_or("time", "memory", "recursion")?;
        let time = TimeSettings {
            dt: r.float_or("time", "dt", defaults.dt)?,
            t_final: r.float("time", "t_final")?,
            sampling_stride: r.uint_or("time", "sampling_stride", DEFAULT_SAMPLING_STRIDE)?,
            scheme: Scheme::parse(&scheme_name).ok_or_else(|| {
                Error::Config(format!(
                    "[time] scheme must be midpoint or backward_euler, got '{scheme_name}'"
                ))
            })?,
            corrector_tol: r.float_or("time", "corrector_tol", defaults.corrector_tol)?,
            max_iterations: r.uint_or("time", "max_iterations", defaults.max_iterations)?,
            blowup_cap: r.float_or("time", "blowup_cap", defaults.blowup_cap)?,
            memory_mode: MemoryMode::parse(&memory_name).ok_or_else(|| {
                Error::Config(format!(
                    "[time] memory must be recursion or history, got '{memory_name}'"
                ))
            })?,
            adaptive: r.bool_or("time", "adaptive", true)?,
        };
        time.validate()?;

        let overrides = RunOverrides {
            sobolev_constant: r.float_opt("experiment", "sobolev_constant")?,
            epsilon: r.float_opt("experiment", "epsilon")?,
        };
        let config = Self { geometry, params, kernel, experiment, initial, time, overrides };
        // mesh checks live in the model builder
        config.model()?;
        Ok(config)
    }

    pub fn model(&self) -> Result<DiscreteModel> {
        DiscreteModel::build(self.geometry, self.params, self.kernel.clone(), self.experiment)
    }
}

pub fn read_value(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path)?;
    parse_value(&text)
}

pub fn parse_value(text: &str) -> Result<Table> {
    text.parse::<Table>()
        .map_err(|e| Error::Config(format!("malformed config: {}", e.message())))
}

fn check_layout(root: &Table) -> Result<()> {
    for (section, body) in root {
        let Some((_, keys)) = KEYS.iter().find(|(s, _)| s == section) else {
            return Err(Error::Config(format!(
                "unknown section [{section}] (expected one of {})",
                SECTIONS.join(", ")
            )));
        };
        let Value::Table(body) = body else {
            return Err(Error::Config(format!("[{section}] must be a section")));
        };
        for key in body.keys() {
            if !keys.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown key [{section}] {key}")));
            }
        }
    }
    Ok(())
}

fn prony_pairs(v: &Value) -> Result<Vec<(f64, f64)>> {
    let err = || Error::Config("[kernel] terms must be an array of [a, b] pairs".into());
    let Value::Array(items) = v else { return Err(err()) };
    items
        .iter()
        .map(|item| match item.as_array().map(|a| a.as_slice()) {
            Some([a, b]) => Ok((number(a).ok_or_else(err)?, number(b).ok_or_else(err)?)),
            _ => Err(err()),
        })
        .collect()
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

struct Reader<'a> {
    root: &'a Table,
}

impl Reader<'_> {
    fn get(&self, section: &str, key: &str) -> Option<&Value> {
        self.root.get(section)?.as_table()?.get(key)
    }

    fn float_opt(&self, section: &str, key: &str) -> Result<Option<f64>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => number(v).map(Some).ok_or_else(|| {
                Error::Config(format!("type error: [{section}] {key} must be a number"))
            }),
        }
    }

    fn float(&self, section: &str, key: &str) -> Result<f64> {
        self.float_opt(section, key)?
            .ok_or_else(|| Error::Config(format!("missing key [{section}] {key}")))
    }

    fn float_or(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        Ok(self.float_opt(section, key)?.unwrap_or(default))
    }

    fn uint_or(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        match self.get(section, key) {
            None => Ok(default),
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            Some(_) => Err(Error::Config(format!(
                "type error: [{section}] {key} must be a nonnegative integer"
            ))),
        }
    }

    fn bool_or(&self, section: &str, key: &str, default: bool) -> Result<bool> {
        match self.get(section, key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(*b),
            Some(_) => Err(Error::Config(format!("type error: [{section}] {key} must be true or false"))),
        }
    }

    fn str_or(&self, section: &str, key: &str, default: &str) -> Result<String> {
        match self.get(section, key) {
            None => Ok(default.to_string()),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(Error::Config(format!("type error: [{section}] {key} must be a string"))),
        }
    }
}

/// `(section.key, values)` for every scalar key given as an array.
pub fn ranged_keys(root: &Table) -> Vec<(String, Vec<Value>)> {
    let mut out = Vec::new();
    for (section, body) in root {
        let Some(body) = body.as_table() else { continue };
        for (key, v) in body {
            if section == "kernel" && key == "terms" {
                continue;
            }
            if let Value::Array(values) = v {
                out.push((format!("{section}.{key}"), values.clone()));
            }
        }
    }
    out
}

/// One cell of a sweep: the substituted values and the resulting table.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub assignments: Vec<(String, Value)>,
    pub table: Table,
}

/// Cartesian product over the ranged keys, ordered by `section.key` name with
/// the first key varying slowest.
pub fn expand_sweep(root: &Table) -> Result<(Vec<String>, Vec<SweepCell>)> {
    check_layout(root)?;
    let ranged = ranged_keys(root);
    if ranged.len() > MAX_RANGED_KEYS {
        return Err(Error::Config(format!(
            "at most {MAX_RANGED_KEYS} ranged keys per sweep, got {}: {}",
            ranged.len(),
            ranged.iter().map(|(k, _)| k.as_str()).collect::<Vec<_>>().join(", ")
        )));
    }
    if let Some((key, _)) = ranged.iter().find(|(_, v)| v.is_empty()) {
        return Err(Error::Config(format!("ranged key {key} has no values")));
    }
    let names: Vec<String> = ranged.iter().map(|(k, _)| k.clone()).collect();
    let mut cells = vec![SweepCell { assignments: Vec::new(), table: root.clone() }];
    for (name, values) in &ranged {
        let (section, key) = name.split_once('.').expect("ranged key names are section.key");
        cells = cells
            .into_iter()
            .flat_map(|cell| {
                values.iter().map(move |v| {
                    let mut next = cell.clone();
                    next.assignments.push((name.clone(), v.clone()));
                    next.table
                        .get_mut(section)
                        .and_then(Value::as_table_mut)
                        .expect("section exists")
                        .insert(key.to_string(), v.clone());
                    next
                })
            })
            .collect();
    }
    Ok((names, cells))
}
