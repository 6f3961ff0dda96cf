//! The convolution term `∫₀ᵗ g(t-s) Δu(s) ds` and the functional `(g◇u)(t)`.
//!
//! Two interchangeable realizations:
//! * `Recursion`: per Prony term `i` the vector `ψ_i(t) = ∫₀ᵗ a_i e^{-b_i(t-s)} u(s) ds`
//!   is advanced by an integrating-factor update with a midpoint rule for the
//!   smooth factor. For `g◇u` two scalars ride along with it: the second moment
//!   `S_i = ∫ a_i e^{-b_i(t-s)} ‖∇u(s)‖² ds` and the discrete weight sum `W_i`
//!   of the same quadrature, so that
//!   `(g◇u)_i = S_i - 2 (Kψ_i)·u(t) + W_i ‖∇u(t)‖²` is a nonnegative quadrature.
//! * `History`: every accepted snapshot is kept and integrals are trapezoid sums.
//!   Quadratic cost; used as the reference for the recursion.

use crate::discretization::DiscreteModel;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MemoryMode {
    #[default]
    Recursion,
    History,
}

impl MemoryMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "recursion" => Some(Self::Recursion),
            "history" => Some(Self::History),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
struct PronyAccumulator {
    amplitude: f64,
    rate: f64,
    psi: Vec<f64>,
    second_moment: f64,
    weight: f64,
}

#[derive(Debug, Clone)]
pub struct MemoryState {
    mode: MemoryMode,
    kernel: KernelSpec,
    t: f64,
    /// Displacement at the current time.
    u_now: Vec<f64>,
    terms: Vec<PronyAccumulator>,
    history: Vec<(f64, Vec<f64>)>,
}

impl MemoryState {
    /// Empty memory at `t = 0` for initial displacement `u0`.
    pub fn new(model: &DiscreteModel, u0: &[f64], mode: MemoryMode) -> Result<Self> {
        model.check_shape(u0)?;
        let n = u0.len();
        let terms = model
            .kernel
            .terms()
            .iter()
            .map(|t| PronyAccumulator {
                amplitude: t.amplitude,
                rate: t.rate,
                psi: vec![0.0; n],
                second_moment: 0.0,
                weight: 0.0,
            })
            .collect();
        let history = match mode {
            MemoryMode::History => vec![(0.0, u0.to_vec())],
            MemoryMode::Recursion => Vec::new(),
        };
        Ok(Self {
            mode,
            kernel: model.kernel.clone(),
            t: 0.0,
            u_now: u0.to_vec(),
            terms,
            history,
        })
    }

    pub fn mode(&self) -> MemoryMode {
        self.mode
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn len(&self) -> usize {
        self.u_now.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u_now.is_empty()
    }

    /// Advances the memory by `dt` with the displacement `u_new` at the new time.
    pub fn advance(&mut self, u_new: &[f64], dt: f64, model: &DiscreteModel) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::Domain(format!("memory step requires dt > 0, got {dt}")));
        }
        if u_new.len() != self.u_now.len() {
            return Err(Error::Domain(format!(
                "memory holds {} nodes, update has {}",
                self.u_now.len(),
                u_new.len()
            )));
        }
        match self.mode {
            MemoryMode::Recursion => {
                let u_mid: Vec<f64> = self
                    .u_now
                    .iter()
                    .zip(u_new)
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect();
                let grad_mid = model.grad_sq(&u_mid);
                for term in &mut self.terms {
                    let decay = (-term.rate * dt).exp();
                    let w = dt * term.amplitude * (-0.5 * term.rate * dt).exp();
                    for (p, um) in term.psi.iter_mut().zip(&u_mid) {
                        *p = decay * *p + w * um;
                    }
                    term.second_moment = decay * term.second_moment + w * grad_mid;
                    term.weight = decay * term.weight + w;
                }
            }
            MemoryMode::History => {
                self.history.push((self.t + dt, u_new.to_vec()));
            }
        }
        self.t += dt;
        self.u_now.copy_from_slice(u_new);
        Ok(())
    }

    /// `Σ_i ψ_i(t)`, i.e. `∫₀ᵗ g(t-s) u(s) ds` before the stiffness is applied.
    pub fn convolution(&self) -> Vec<f64> {
        match self.mode {
            MemoryMode::Recursion => self.recursion_sum(),
            MemoryMode::History => self.history_convolution(self.t, None),
        }
    }

    /// Convolution at `t + tau` predicted from the current state only, with
    /// `u(t + s) ≈ u_n + s v_n` on the new interval.
    pub fn predicted_convolution(&self, u_n: &[f64], v_n: &[f64], tau: f64) -> Vec<f64> {
        let n = self.u_now.len();
        match self.mode {
            MemoryMode::Recursion => {
                let mut out = vec![0.0; n];
                for term in &self.terms {
                    let decay = (-term.rate * tau).exp();
                    // ∫₀^τ a e^{-b(τ-s)} ds and ∫₀^τ a e^{-b(τ-s)} s ds
                    let w0 = term.amplitude * -(-term.rate * tau).exp_m1() / term.rate;
                    let w1 = term.amplitude
                        * (tau / term.rate - (1.0 - decay) / (term.rate * term.rate));
                    for i in 0..n {
                        out[i] += decay * term.psi[i] + w0 * u_n[i] + w1 * v_n[i];
                    }
                }
                out
            }
            MemoryMode::History => {
                let end: Vec<f64> = u_n.iter().zip(v_n).map(|(u, v)| u + tau * v).collect();
                self.history_convolution(self.t + tau, Some((tau, &end)))
            }
        }
    }

    /// Weak-form memory load `K Σ_i ψ_i`; enters the balance with a minus sign
    /// relative to the stiffness load `K u`.
    pub fn force(&self, model: &DiscreteModel) -> Result<Vec<f64>> {
        model.check_shape(&self.u_now)?;
        Ok(model.stiffness().apply(&self.convolution()))
    }

    /// Per-term `(g◇u)` contributions at the current time for the displacement `u`.
    fn diamond_terms(&self, u: &[f64], model: &DiscreteModel) -> Vec<f64> {
        match self.mode {
            MemoryMode::Recursion => {
                let ku = model.stiffness().apply(u);
                let grad = dot(u, &ku);
                self.terms
                    .iter()
                    .map(|term| {
                        let cross = dot(&term.psi, &ku);
                        (term.second_moment - 2.0 * cross + term.weight * grad).max(0.0)
                    })
                    .collect()
            }
            MemoryMode::History => {
                let diffs: Vec<f64> = self
                    .history
                    .iter()
                    .map(|(_, us)| {
                        let d: Vec<f64> = us.iter().zip(u).map(|(a, b)| a - b).collect();
                        model.grad_sq(&d).max(0.0)
                    })
                    .collect();
                self.kernel
                    .terms()
                    .iter()
                    .map(|term| {
                        trapezoid(&self.history, &diffs, |s| {
                            term.amplitude * (-term.rate * (self.t - s)).exp()
                        })
                    })
                    .collect()
            }
        }
    }

    /// `(g◇u)(t) = ∫₀ᵗ g(t-s) ‖∇u(s) - ∇u(t)‖² ds`, always `>= 0`.
    pub fn g_diamond_u(&self, u_now: &[f64], model: &DiscreteModel) -> f64 {
        self.diamond_terms(u_now, model).iter().sum()
    }

    /// `(g'◇u)(t)`, always `<= 0`.
    pub fn g_prime_diamond_u(&self, u_now: &[f64], model: &DiscreteModel) -> f64 {
        self.diamond_terms(u_now, model)
            .iter()
            .zip(self.kernel.terms())
            .map(|(d, term)| -term.rate * d)
            .sum()
    }

    fn recursion_sum(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.u_now.len()];
        for term in &self.terms {
            for (o, p) in out.iter_mut().zip(&term.psi) {
                *o += p;
            }
        }
        out
    }

    /// Trapezoid sum of `∫ g(t_eval - s) u(s) ds` over the stored history,
    /// optionally extended by a final segment of length `tau` ending at `end`.
    fn history_convolution(&self, t_eval: f64, extension: Option<(f64, &Vec<f64>)>) -> Vec<f64> {
        let n = self.u_now.len();
        let mut out = vec![0.0; n];
        let g = |s: f64| self.kernel.g_unchecked(t_eval - s);
        for pair in self.history.windows(2) {
            let (s0, u0) = &pair[0];
            let (s1, u1) = &pair[1];
            let half = 0.5 * (s1 - s0);
            let (w0, w1) = (half * g(*s0), half * g(*s1));
            for i in 0..n {
                out[i] += w0 * u0[i] + w1 * u1[i];
            }
        }
        if let Some((tau, end)) = extension {
            let (s0, u0) = self.history.last().expect("history starts with u0");
            let half = 0.5 * tau;
            let (w0, w1) = (half * g(*s0), half * g(s0 + tau));
            for i in 0..n {
                out[i] += w0 * u0[i] + w1 * end[i];
            }
        }
        out
    }
}

fn trapezoid(history: &[(f64, Vec<f64>)], values: &[f64], weight: impl Fn(f64) -> f64) -> f64 {
    history
        .windows(2)
        .zip(values.windows(2))
        .map(|(h, v)| 0.5 * (h[1].0 - h[0].0) * (weight(h[0].0) * v[0] + weight(h[1].0) * v[1]))
        .sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
