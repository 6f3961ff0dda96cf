//! Oracles shared by the integration tests. Nothing here calls into the
//! library's quadrature or recursion code.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use viscowave::stepper::{Forcing, Scheme, Stepper, StepperOptions};
use viscowave::{DiscreteModel, Experiment, Geometry, KernelSpec, MemoryMode, MemoryState, Params, State};

pub fn interval(nodes: usize, kernel: &[(f64, f64)], params: Params) -> DiscreteModel {
    DiscreteModel::build(
        Geometry::Interval { length: 1.0, nodes },
        params,
        KernelSpec::new(kernel).unwrap(),
        Experiment::Run,
    )
    .unwrap()
}

pub fn prony(terms: &[(f64, f64)], s: f64) -> f64 {
    terms.iter().map(|(a, b)| a * (-b * s).exp()).sum()
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// `∫₀^{t_n} g(t_n - s) u(s) ds` by the composite trapezoid rule on the stored samples.
pub fn trapezoid_convolution(terms: &[(f64, f64)], times: &[f64], history: &[Vec<f64>]) -> Vec<f64> {
    let n = times.len() - 1;
    let t = times[n];
    let mut out = vec![0.0; history[0].len()];
    for k in 0..n {
        let dt = times[k + 1] - times[k];
        let w0 = 0.5 * dt * prony(terms, t - times[k]);
        let w1 = 0.5 * dt * prony(terms, t - times[k + 1]);
        for (o, (a, b)) in out.iter_mut().zip(history[k].iter().zip(&history[k + 1])) {
            *o += w0 * a + w1 * b;
        }
    }
    out
}

/// Smooth seeded field `u_j(s) = c_j + d_j sin(ω_j s + φ_j)`, `ω_j <= 5`.
pub struct SmoothTrajectory {
    modes: Vec<(f64, f64, f64, f64)>,
}

impl SmoothTrajectory {
    pub fn new(len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes = (0..len)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.5..5.0),
                    rng.gen_range(0.0..2.0 * PI),
                )
            })
            .collect();
        Self { modes }
    }

    pub fn at(&self, s: f64) -> Vec<f64> {
        self.modes.iter().map(|(c, d, w, ph)| c + d * (w * s + ph).sin()).collect()
    }

    pub fn velocity(&self, s: f64) -> Vec<f64> {
        self.modes.iter().map(|(_, d, w, ph)| d * w * (w * s + ph).cos()).collect()
    }
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Manufactured solution `u* = sin(πx/2) e^{-t}` on `(0, 1)` with the
/// interior and boundary loads that make it exact.
pub struct Manufactured {
    pub terms: Vec<(f64, f64)>,
    pub params: Params,
}

impl Manufactured {
    pub fn exact(&self, x: f64, t: f64) -> f64 {
        (0.5 * PI * x).sin() * (-t).exp()
    }

    pub fn exact_velocity(&self, x: f64, t: f64) -> f64 {
        -self.exact(x, t)
    }
}

impl Forcing for Manufactured {
    fn interior(&self, x: [f64; 2], t: f64) -> f64 {
        let k2 = 0.25 * PI * PI;
        let phi = (0.5 * PI * x[0]).sin();
        let e = (-t).exp();
        // ∫₀ᵗ a e^{-b(t-s)} e^{-s} ds = a (e^{-t} - e^{-bt}) / (b - 1)
        let memory: f64 = self
            .terms
            .iter()
            .map(|(a, b)| a * (e - (-b * t).exp()) / (b - 1.0))
            .sum();
        let u = phi * e;
        let source = if self.params.source {
            u.abs().powf(self.params.p - 2.0) * u
        } else {
            0.0
        };
        phi * (e * (1.0 + k2 - self.params.alpha * k2) - k2 * memory) - source
    }

    fn boundary(&self, _x: [f64; 2], t: f64) -> f64 {
        // u*_x(1, t) = 0, so only the boundary inertia and damping remain
        let ut = -(-t).exp();
        let h = self.params.kappa * ut.abs().powf(self.params.m - 2.0) * ut;
        (-t).exp() + h
    }
}

pub const TERMS: [(f64, f64); 2] = [(0.25, 1.0), (0.5, 2.0)];

/// Largest relative gap between the recursion force and the trapezoid oracle
/// over `steps` steps of size `dt`.
pub fn recursion_gap(steps: usize, dt: f64) -> f64 {
    let model = interval(41, &TERMS, Params::default());
    let traj = SmoothTrajectory::new(model.len(), 11);
    let mut mem = MemoryState::new(&model, &traj.at(0.0), MemoryMode::Recursion).unwrap();
    let mut times = vec![0.0];
    let mut history = vec![traj.at(0.0)];
    let mut worst: f64 = 0.0;
    for n in 1..=steps {
        let t = n as f64 * dt;
        let u = traj.at(t);
        mem.advance(&u, dt, &model).unwrap();
        times.push(t);
        history.push(u);
        let oracle = model.stiffness().apply(&trapezoid_convolution(&TERMS, &times, &history));
        worst = worst.max(rel_diff(&mem.force(&model).unwrap(), &oracle));
    }
    worst
}

/// Max nodal error of `u` at `t_end`, refining mesh and step together.
pub fn mms_error(elements: usize, t_end: f64, scheme: Scheme) -> f64 {
    let params = Params { alpha: 0.1, p: 4.0, m: 3.0, kappa: 1.0, source: true };
    let mms = Manufactured { terms: vec![(0.3, 2.0)], params };
    let model = interval(elements + 1, &mms.terms, params);
    let dt = 0.5 / elements as f64;
    let coords = model.coords().to_vec();
    let mut state = State {
        t: 0.0,
        u: coords.iter().map(|x| mms.exact(x[0], 0.0)).collect(),
        v: coords.iter().map(|x| mms.exact_velocity(x[0], 0.0)).collect(),
    };
    let mut mem = MemoryState::new(&model, &state.u, MemoryMode::Recursion).unwrap();
    let options = StepperOptions { scheme, ..Default::default() };
    let mut stepper = Stepper::new(&model, options).with_forcing(&mms);
    let steps = (t_end / dt).round() as usize;
    for _ in 0..steps {
        state = stepper.step(&state, &mut mem, dt).unwrap();
    }
    coords
        .iter()
        .zip(&state.u)
        .map(|(x, u)| (u - mms.exact(x[0], state.t)).abs())
        .fold(0.0, f64::max)
}

