//! Initial displacement and velocity fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::discretization::{DiscreteModel, Geometry, State};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Zero,
    /// `sin(πx / 2L)`: the first mode of the clamped-free string.
    Sine,
    /// `sin²(πx / L)`.
    Bump,
    /// `Σ_k c_k sin((k - ½)πx / L)` (times `cos(jπy / L_y)` factors in 2D),
    /// `c_k` uniform in `[-1, 1]` divided by `k²`.
    Random { seed: u64, modes: usize },
}

impl Profile {
    pub fn parse(name: &str, seed: u64, modes: usize) -> Result<Self> {
        match name {
            "zero" => Ok(Self::Zero),
            "sine" => Ok(Self::Sine),
            "bump" => Ok(Self::Bump),
            "random" => Ok(Self::Random { seed, modes }),
            other => Err(Error::Config(format!(
                "unknown initial profile '{other}' (expected zero, sine, bump or random)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Sine => "sine",
            Self::Bump => "bump",
            Self::Random { .. } => "random",
        }
    }

    pub fn sample(&self, model: &DiscreteModel, amplitude: f64) -> Vec<f64> {
        let (lx, ly) = match model.geometry {
            Geometry::Interval { length, .. } => (length, 1.0),
            Geometry::Rectangle { lx, ly, .. } => (lx, ly),
        };
        match *self {
            Profile::Zero => vec![0.0; model.len()],
            Profile::Sine => model.interpolate(|x, _| amplitude * (0.5 * PI * x / lx).sin()),
            Profile::Bump => model.interpolate(|x, _| amplitude * (PI * x / lx).sin().powi(2)),
            Profile::Random { seed, modes } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let two_d = model.dimension() == 2;
                let coeffs: Vec<(f64, f64)> = (1..=modes.max(1))
                    .map(|k| {
                        let k2 = (k * k) as f64;
                        let cx = rng.gen_range(-1.0..=1.0) / k2;
                        let cy = rng.gen_range(-1.0..=1.0) / k2;
                        (cx, cy)
                    })
                    .collect();
                model.interpolate(|x, y| {
                    let mut v = 0.0;
                    for (k, (cx, cy)) in coeffs.iter().enumerate() {
                        let kx = (k as f64 + 0.5) * PI * x / lx;
                        v += cx * kx.sin();
                        if two_d {
                            v += cy * kx.sin() * ((k as f64 + 1.0) * PI * y / ly).cos();
                        }
                    }
                    amplitude * v
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialSpec {
    pub displacement: Profile,
    pub amplitude: f64,
    pub velocity: Profile,
    pub velocity_amplitude: f64,
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self {
            displacement: Profile::Sine,
            amplitude: 1.0,
            velocity: Profile::Zero,
            velocity_amplitude: 0.0,
        }
    }
}

pub fn initial_data(model: &DiscreteModel, spec: &InitialSpec) -> State {
    State {
        t: 0.0,
        u: spec.displacement.sample(model, spec.amplitude),
        v: spec.velocity.sample(model, spec.velocity_amplitude),
    }
}
