//! One time step of the semi-discrete system
//!
//! ```text
//! M v' + αK v + K u - K Σψ_i = M_Ω f(u) - M_Γ h(v) + load,   u' = v
//! ```
//!
//! The linear skeleton is advanced by the implicit midpoint rule (or backward
//! Euler); the memory load is predicted at the intermediate time from the
//! current state, and the source and boundary damping are resolved by a
//! fixed-point corrector against the constant matrix `M + θdt αK + θ²dt² K`.

use crate::banded::{BandCholesky, BandedSym};
use crate::discretization::{DiscreteModel, State};
use crate::error::{Error, Result};
use crate::memory::MemoryState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Midpoint,
    BackwardEuler,
}

impl Scheme {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "midpoint" => Some(Self::Midpoint),
            "backward_euler" => Some(Self::BackwardEuler),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Midpoint => "midpoint",
            Self::BackwardEuler => "backward_euler",
        }
    }

    fn theta(&self) -> f64 {
        match self {
            Self::Midpoint => 0.5,
            Self::BackwardEuler => 1.0,
        }
    }
}

pub const DEFAULT_CORRECTOR_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 50;

/// Prescribed external load, as densities in the interior and on Γ₁.
///
/// Not part of the physical problem; used to manufacture exact solutions.
pub trait Forcing: Sync {
    fn interior(&self, x: [f64; 2], t: f64) -> f64;
    fn boundary(&self, x: [f64; 2], t: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperOptions {
    pub scheme: Scheme,
    pub corrector_tol: f64,
    pub max_iterations: usize,
}

impl Default for StepperOptions {
    fn default() -> Self {
        Self {
            scheme: Scheme::Midpoint,
            corrector_tol: DEFAULT_CORRECTOR_TOL,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

/// Time stepper bound to one model; caches the factored step matrix per `dt`.
pub struct Stepper<'a> {
    model: &'a DiscreteModel,
    options: StepperOptions,
    forcing: Option<&'a dyn Forcing>,
    factor: Option<(u64, BandCholesky)>,
    /// Iterations used by the last successful step.
    pub last_iterations: usize,
}

impl<'a> Stepper<'a> {
    pub fn new(model: &'a DiscreteModel, options: StepperOptions) -> Self {
        Self {
            model,
            options,
            forcing: None,
            factor: None,
            last_iterations: 0,
        }
    }

    pub fn with_forcing(mut self, forcing: &'a dyn Forcing) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn options(&self) -> &StepperOptions {
        &self.options
    }

    fn factor(&mut self, dt: f64) -> Result<&BandCholesky> {
        let key = dt.to_bits();
        if self.factor.as_ref().map(|(k, _)| *k) != Some(key) {
            let theta = self.options.scheme.theta();
            let tau = theta * dt;
            let k = self.model.stiffness();
            let m = BandedSym::from_diagonal(self.model.mass());
            let alpha = self.model.params.alpha;
            let a = BandedSym::linear_combination(&[(1.0, &m), (tau * alpha + tau * tau, k)]);
            self.factor = Some((key, a.cholesky()?));
        }
        Ok(&self.factor.as_ref().unwrap().1)
    }

    /// Advances `state` by `dt` and, on success, the memory with it.
    ///
    /// A non-finite result is returned as a state (blow-up signal), not an error;
    /// on any error `mem` is left untouched.
    pub fn step(&mut self, state: &State, mem: &mut MemoryState, dt: f64) -> Result<State> {
        let next = self.propose(state, mem, dt)?;
        if next.is_finite() {
            mem.advance(&next.u, dt, self.model)?;
        }
        Ok(next)
    }

    /// Computes the next state without touching the memory, so a caller can
    /// reject the step and retry with a smaller `dt`.
    pub fn propose(&mut self, state: &State, mem: &MemoryState, dt: f64) -> Result<State> {
        let model = self.model;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Domain(format!("time step must be positive, got {dt}")));
        }
        model.check_shape(&state.u)?;
        model.check_shape(&state.v)?;
        if mem.len() != state.u.len() {
            return Err(Error::Domain("memory and state sizes differ".into()));
        }
        let n = model.len();
        let theta = self.options.scheme.theta();
        let tau = theta * dt;
        let t_eval = state.t + tau;
        let params = model.params;
        let k = model.stiffness();
        let mass = model.mass();
        let m_int = model.mass_interior();
        let m_bnd = model.mass_boundary();

        // base = M v_n + τ (K Σψ(t + τ) - K u_n + load(t + τ))
        let conv = mem.predicted_convolution(&state.u, &state.v, tau);
        let mut elastic = conv;
        for (c, u) in elastic.iter_mut().zip(&state.u) {
            *c -= u;
        }
        let elastic = k.apply(&elastic);
        let mut base: Vec<f64> = (0..n).map(|i| mass[i] * state.v[i] + tau * elastic[i]).collect();
        if let Some(forcing) = self.forcing {
            for (i, x) in model.coords().iter().enumerate() {
                let mut load = m_int[i] * forcing.interior(*x, t_eval);
                if m_bnd[i] > 0.0 {
                    load += m_bnd[i] * forcing.boundary(*x, t_eval);
                }
                base[i] += tau * load;
            }
        }

        let tol = self.options.corrector_tol;
        let max_iterations = self.options.max_iterations;
        let chol = self.factor(dt)?;
        let mut w = state.v.clone();
        let mut rhs = vec![0.0; n];
        let mut residual = f64::INFINITY;
        let mut converged = false;
        let mut iterations = 0;
        for it in 1..=max_iterations {
            iterations = it;
            for i in 0..n {
                let u_eval = state.u[i] + tau * w[i];
                let mut r = m_int[i] * params.source_term(u_eval);
                if m_bnd[i] > 0.0 {
                    r -= m_bnd[i] * params.h(w[i]);
                }
                rhs[i] = base[i] + tau * r;
            }
            chol.solve_in_place(&mut rhs);
            let mut diff = 0.0;
            let mut size = 0.0;
            for i in 0..n {
                let d = rhs[i] - w[i];
                diff += mass[i] * d * d;
                size += mass[i] * rhs[i] * rhs[i];
            }
            std::mem::swap(&mut w, &mut rhs);
            residual = diff.sqrt() / size.sqrt().max(1.0);
            if !residual.is_finite() || w.iter().any(|x| !x.is_finite()) {
                // runaway values: hand back the non-finite state as a blow-up signal
                let mut out = state.clone();
                out.t = state.t + dt;
                out.u.iter_mut().for_each(|x| *x = f64::NAN);
                out.v.iter_mut().for_each(|x| *x = f64::NAN);
                return Ok(out);
            }
            if residual <= tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Corrector { iterations, residual });
        }
        self.last_iterations = iterations;

        let u_new: Vec<f64> = (0..n).map(|i| state.u[i] + dt * w[i]).collect();
        let v_new: Vec<f64> = (0..n)
            .map(|i| state.v[i] + (w[i] - state.v[i]) / theta)
            .collect();
        Ok(State {
            t: state.t + dt,
            u: u_new,
            v: v_new,
        })
    }
}
