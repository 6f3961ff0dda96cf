//! Discrete best constant `B = sup ‖u‖_p / ‖∇u‖₂` over fields vanishing on Γ₀.
//!
//! Normalized gradient ascent in the stiffness inner product: the ascent
//! direction of `‖u‖_p^p / p` on the sphere `‖∇u‖₂ = 1` is `K⁻¹ M_Ω |u|^{p-2} u`,
//! and a full step followed by renormalization never decreases the quotient
//! because `‖·‖_p^p` is convex. For `p = 2` this is inverse iteration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discretization::DiscreteModel;
use crate::error::{Error, Result};

pub const DEFAULT_STARTS: usize = 5;
pub const DEFAULT_SEED: u64 = 0x5EED_B0B;
const TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone)]
pub struct SobolevResult {
    pub b: f64,
    /// Maximizing field, normalized to `‖∇u‖₂ = 1`.
    pub maximizer: Vec<f64>,
    pub iterations: usize,
}

/// Ratio `‖u‖_p / ‖∇u‖₂`; scale-free.
/// `‖u‖_p / ‖∇u‖₂`, evaluated on `u / max|u|` so that scaling by a power of
/// two leaves the result bit-for-bit unchanged.
pub fn quotient(model: &DiscreteModel, u: &[f64], p: f64) -> f64 {
    let peak = u.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    let w: Vec<f64> = u.iter().map(|x| x / peak).collect();
    model.lq_pow(&w, p).powf(1.0 / p) / model.grad_sq(&w).sqrt()
}

pub fn sobolev_constant(model: &DiscreteModel, p: f64) -> Result<SobolevResult> {
    sobolev_constant_with(model, p, DEFAULT_STARTS, DEFAULT_SEED)
}

pub fn sobolev_constant_with(
    model: &DiscreteModel,
    p: f64,
    starts: usize,
    seed: u64,
) -> Result<SobolevResult> {
    if !(p >= 2.0) {
        return Err(Error::Domain(format!("Sobolev constant needs p >= 2, got {p}")));
    }
    let chol = model.stiffness().cholesky()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<SobolevResult> = None;
    for _ in 0..starts.max(1) {
        let start = random_start(model, &mut rng);
        let result = ascend(model, &chol, start, p);
        match result {
            Ok(r) => {
                if best.as_ref().map_or(true, |b| r.b > b.b) {
                    best = Some(r);
                }
            }
            Err(Error::SobolevNotConverged { best: b, .. }) => {
                return Err(Error::SobolevNotConverged {
                    iterations: MAX_ITERATIONS,
                    best: best.map_or(b, |r| r.b.max(b)),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(best.expect("at least one start"))
}

fn random_start(model: &DiscreteModel, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let modes = 6;
    let coeffs: Vec<(f64, f64)> = (1..=modes)
        .map(|k| {
            let k = k as f64;
            (rng.gen_range(-1.0..1.0) / (k * k), rng.gen_range(-1.0..1.0) / (k * k))
        })
        .collect();
    let (lx, ly) = match model.geometry {
        crate::Geometry::Interval { length, .. } => (length, 1.0),
        crate::Geometry::Rectangle { lx, ly, .. } => (lx, ly),
    };
    // a positive leading mode keeps every start away from the zero field
    model.interpolate(|x, y| {
        let xs = std::f64::consts::PI * x / lx;
        let ys = std::f64::consts::PI * y / ly;
        let mut v = (0.5 * xs).sin();
        for (k, (cx, cy)) in coeffs.iter().enumerate() {
            let kk = k as f64 + 1.0;
            v += cx * ((kk + 0.5) * xs).sin() + cy * (0.5 * xs).sin() * (kk * ys).cos();
        }
        v
    })
}

fn ascend(
    model: &DiscreteModel,
    chol: &crate::banded::BandCholesky,
    mut u: Vec<f64>,
    p: f64,
) -> Result<SobolevResult> {
    normalize(model, &mut u);
    let mut q = quotient(model, &u, p);
    let weights = model.mass_interior();
    for it in 1..=MAX_ITERATIONS {
        let mut z: Vec<f64> = u
            .iter()
            .zip(weights)
            .map(|(x, w)| w * x.abs().powf(p - 2.0) * x)
            .collect();
        chol.solve_in_place(&mut z);
        normalize(model, &mut z);
        let q_new = quotient(model, &z, p);
        u = z;
        let change = (q_new - q).abs();
        q = q_new;
        if change < TOLERANCE {
            return Ok(SobolevResult { b: q, maximizer: u, iterations: it });
        }
    }
    Err(Error::SobolevNotConverged { iterations: MAX_ITERATIONS, best: q })
}

fn normalize(model: &DiscreteModel, u: &mut [f64]) {
    let g = model.grad_sq(u).sqrt();
    u.iter_mut().for_each(|x| *x /= g);
}
