//! Energy and Lyapunov functionals, threshold constants and trajectory norms.

use crate::discretization::{DiscreteModel, State};
use crate::error::{Error, Result};
use crate::memory::{dot, MemoryState};

/// Scalar diagnostics of one state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyReport {
    pub t: f64,
    /// Modified energy `E`.
    pub energy: f64,
    /// Nehari-type functional `I`.
    pub i: f64,
    /// Potential energy `J`.
    pub j: f64,
    /// `γ = (1 - ∫₀ᵗ g)‖∇u‖² + g◇u`.
    pub gamma: f64,
    pub g_diamond_u: f64,
    /// `H = E₂ - E`.
    pub h: f64,
    /// Lyapunov functional of the growth argument.
    pub l: f64,
    /// Lyapunov functional of the blow-up argument; `None` when `H <= 0` or no admissible σ exists.
    pub l_hat: Option<f64>,
    pub u_p_norm: f64,
    pub grad_u_norm: f64,
    pub ut_norm: f64,
    pub ut_boundary_norm: f64,
    /// Right-hand side of the energy identity, `dE/dt` predicted from the state.
    pub dissipation_rate: f64,
    /// Backward-difference residual of the energy identity, filled per trajectory.
    pub dissipation_residual: f64,
    /// `‖∇u_t‖²`
    pub grad_ut_sq: f64,
    /// `‖u_t‖_{m,Γ₁}^m`
    pub ut_boundary_lm_pow: f64,
}

fn memory_integral(model: &DiscreteModel, t: f64) -> f64 {
    model.kernel.integral_to(t)
}

/// `γ(t)`; needs the state's time for `∫₀ᵗ g`.
pub fn gamma(state: &State, mem: &MemoryState, model: &DiscreteModel) -> f64 {
    let g = (1.0 - memory_integral(model, state.t)) * model.grad_sq(&state.u);
    g + mem.g_diamond_u(&state.u, model)
}

/// `‖u‖_p^p` when the source is on, 0 otherwise.
fn source_mass(model: &DiscreteModel, u: &[f64]) -> f64 {
    if model.params.source {
        model.lq_pow(u, model.params.p)
    } else {
        0.0
    }
}

pub fn functional_i(state: &State, mem: &MemoryState, model: &DiscreteModel) -> f64 {
    gamma(state, mem, model) - source_mass(model, &state.u)
}

pub fn functional_j(state: &State, mem: &MemoryState, model: &DiscreteModel) -> f64 {
    0.5 * gamma(state, mem, model) - source_mass(model, &state.u) / model.params.p
}

/// Modified energy `E = ½‖u_t‖² + ½‖u_t‖²_{Γ₁} + ½γ - ‖u‖_p^p / p`.
pub fn energy(state: &State, mem: &MemoryState, model: &DiscreteModel) -> f64 {
    0.5 * model.mass_sq(&state.v) + functional_j(state, mem, model)
}

/// `∫_Ω u_t u + ∫_{Γ₁} u_t u`.
fn velocity_displacement(model: &DiscreteModel, state: &State) -> f64 {
    model
        .mass()
        .iter()
        .zip(&state.u)
        .zip(&state.v)
        .map(|((m, u), v)| m * u * v)
        .sum()
}

/// `L = H + ε(∫_Ω u_t u + ∫_{Γ₁} u_t u) + (εα/2)‖∇u‖²` for a given `H`.
pub fn lyapunov_l(state: &State, model: &DiscreteModel, h: f64, eps: f64) -> f64 {
    h + eps * velocity_displacement(model, state)
        + 0.5 * eps * model.params.alpha * model.grad_sq(&state.u)
}

/// `L̂ = H^{1-σ} + ε(∫_Ω u_t u + ∫_{Γ₁} u_t u)`; undefined outside `H > 0`, `0 < σ < 1`.
pub fn lyapunov_l_hat(
    state: &State,
    model: &DiscreteModel,
    h: f64,
    eps: f64,
    sigma: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!(
            "outside the blow-up regime; L̂ undefined for H = {h}"
        )));
    }
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Domain(format!("L̂ needs 0 < σ < 1, got {sigma}")));
    }
    Ok(h.powf(1.0 - sigma) + eps * velocity_displacement(model, state))
}

/// `dE/dt` predicted by the energy identity:
/// `½(g'◇u) - ½g(t)‖∇u‖² - α‖∇u_t‖² - ∫_{Γ₁} h(u_t) u_t`.
pub fn dissipation_rate(state: &State, mem: &MemoryState, model: &DiscreteModel) -> f64 {
    let params = &model.params;
    let g_t = model.kernel.g_unchecked(state.t);
    let boundary: f64 = model
        .boundary_nodes()
        .iter()
        .map(|&i| model.mass_boundary()[i] * params.h(state.v[i]) * state.v[i])
        .sum();
    0.5 * mem.g_prime_diamond_u(&state.u, model) - 0.5 * g_t * model.grad_sq(&state.u)
        - params.alpha * model.grad_sq(&state.v)
        - boundary
}

/// Threshold constants of the potential-well and growth arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub b: f64,
    pub b1: f64,
    pub alpha1: f64,
    /// Defined only for `E(0) <= E₁`.
    pub alpha2: Option<f64>,
    pub e1: f64,
    pub e2: f64,
    /// Stable-set constant; NaN for negative `E(0)`.
    pub beta: f64,
    pub c1: Option<f64>,
    pub sigma_hat: Option<f64>,
    /// Admissible upper bound on σ.
    pub sigma_bound: Option<f64>,
    /// σ used for `L̂` (half the bound).
    pub sigma: Option<f64>,
    /// `d = 1 + 1/H(0)`, for `H(0) > 0`.
    pub d: Option<f64>,
    pub epsilon: f64,
    pub e0: f64,
    pub h0: f64,
}

/// `F(α) = ½α² - (B₁^p / p) α^p`.
pub fn potential_profile(alpha: f64, b1: f64, p: f64) -> f64 {
    0.5 * alpha * alpha - b1.powf(p) / p * alpha.powf(p)
}

/// The root `α₂ >= α₁` of `F(α) = E(0)`, by bisection.
pub fn alpha2(b1: f64, p: f64, e0: f64) -> Result<f64> {
    let alpha1 = b1.powf(-p / (p - 2.0));
    let e1 = (0.5 - 1.0 / p) * alpha1 * alpha1;
    if e0 > e1 || e0.is_nan() {
        return Err(Error::Domain(format!(
            "α₂ undefined above E₁: E(0) = {e0}, E₁ = {e1}"
        )));
    }
    if e0 == e1 {
        return Ok(alpha1);
    }
    let f = |a: f64| potential_profile(a, b1, p);
    let mut lo = alpha1;
    let mut hi = 2.0 * alpha1;
    while f(hi) >= e0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= e0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Midpoint of the open interval of admissible interpolation exponents `s`.
pub fn interpolation_exponent(p: f64, m: f64, dimension: usize) -> Option<f64> {
    let n = dimension as f64;
    let lo = (0.5 * n - (n - 1.0) / m).max(0.0);
    let hi = (2.0 / m).min(2.0 * (p - m) / (m * (p - 2.0)));
    (lo < hi).then(|| 0.5 * (lo + hi))
}

pub fn sigma_hat(p: f64, m: f64, dimension: usize) -> Option<f64> {
    let s = interpolation_exponent(p, m, dimension)?;
    let a = 2.0 - m * s;
    Some(a / (2.0 * (m - 1.0)) * (1.0 - 2.0 * m * (1.0 - s) / (a * p)))
}

impl Thresholds {
    pub fn compute(b: f64, l: f64, p: f64, m: f64, dimension: usize, e0: f64) -> Result<Self> {
        if !(l > 0.0 && l <= 1.0) {
            return Err(Error::Domain(format!("thresholds need l in (0, 1], got {l}")));
        }
        if !(p > 2.0) {
            return Err(Error::Domain(format!("thresholds need p > 2, got {p}")));
        }
        if !(b > 0.0) {
            return Err(Error::Domain(format!("thresholds need B > 0, got {b}")));
        }
        let b1 = b / l;
        let alpha1 = b1.powf(-p / (p - 2.0));
        let e1 = (0.5 - 1.0 / p) * alpha1 * alpha1;
        let e2 = (0.5 * l - 1.0 / p) * alpha1 * alpha1;
        let beta = b.powf(p) / l * (2.0 * p / (l * (p - 2.0)) * e0).powf(0.5 * (p - 2.0));
        let alpha2 = alpha2(b1, p, e0).ok();
        let c1 = alpha2.map(|a2| (l - 2.0 / p) - 2.0 * e2 * (b1 * a2).powf(-p));
        let sigma_hat = sigma_hat(p, m, dimension);
        let sigma_bound = sigma_hat.and_then(|sh| {
            let bound = ((p - m) / (p * (m - 1.0)))
                .min((p - 2.0) / (2.0 * p))
                .min((m - 2.0) / (2.0 * m))
                .min(sh);
            (bound > 0.0).then_some(bound)
        });
        let h0 = e2 - e0;
        Ok(Self {
            b,
            b1,
            alpha1,
            alpha2,
            e1,
            e2,
            beta,
            c1,
            sigma_hat,
            sigma_bound,
            sigma: sigma_bound.map(|s| 0.5 * s),
            d: (h0 > 0.0).then(|| 1.0 + 1.0 / h0),
            epsilon: 0.0,
            e0,
            h0,
        })
    }

    /// Sets ε by the rule `10⁻² min(1, H(0) / (1 + ‖u₀‖² + ‖u₁‖²))` (0 when `H(0) <= 0`).
    pub fn with_default_epsilon(mut self, u0_l2_sq: f64, u1_l2_sq: f64) -> Self {
        self.epsilon = default_epsilon(self.h0, u0_l2_sq, u1_l2_sq);
        self
    }
}

pub fn default_epsilon(h0: f64, u0_l2_sq: f64, u1_l2_sq: f64) -> f64 {
    if h0 > 0.0 {
        1e-2 * (h0 / (1.0 + u0_l2_sq + u1_l2_sq)).min(1.0)
    } else {
        0.0
    }
}

/// Evaluates every functional at one state.
pub fn evaluate(
    state: &State,
    mem: &MemoryState,
    model: &DiscreteModel,
    th: &Thresholds,
) -> EnergyReport {
    let p = model.params.p;
    let m = model.params.m;
    let grad_sq = model.grad_sq(&state.u);
    let mem_int = memory_integral(model, state.t);
    let gd = mem.g_diamond_u(&state.u, model);
    let gamma = (1.0 - mem_int) * grad_sq + gd;
    let up = model.lq_pow(&state.u, p);
    let src = source_mass(model, &state.u);
    let j = 0.5 * gamma - src / p;
    let i = gamma - src;
    let energy = 0.5 * model.mass_sq(&state.v) + j;
    let h = th.e2 - energy;
    let l = lyapunov_l(state, model, h, th.epsilon);
    let l_hat = th
        .sigma
        .and_then(|s| lyapunov_l_hat(state, model, h, th.epsilon, s).ok());
    EnergyReport {
        t: state.t,
        energy,
        i,
        j,
        gamma,
        g_diamond_u: gd,
        h,
        l,
        l_hat,
        u_p_norm: up.powf(1.0 / p),
        grad_u_norm: grad_sq.max(0.0).sqrt(),
        ut_norm: model.l2_sq(&state.v).sqrt(),
        ut_boundary_norm: model.boundary_l2_sq(&state.v).sqrt(),
        dissipation_rate: dissipation_rate(state, mem, model),
        dissipation_residual: 0.0,
        grad_ut_sq: model.grad_sq(&state.v),
        ut_boundary_lm_pow: model.boundary_lq_pow(&state.v, m),
    }
}

/// Residual of the energy identity per sample: backward difference of `E`
/// against the trapezoid average of the predicted rate. The first sample is 0.
pub fn dissipation_residual(reports: &[EnergyReport]) -> Vec<f64> {
    let mut out = Vec::with_capacity(reports.len());
    if reports.is_empty() {
        return out;
    }
    out.push(0.0);
    for w in reports.windows(2) {
        let dt = w[1].t - w[0].t;
        let de = (w[1].energy - w[0].energy) / dt;
        out.push(de - 0.5 * (w[1].dissipation_rate + w[0].dissipation_rate));
    }
    out
}

/// Trajectory norm: `max_t(‖u_t‖² + l‖∇u‖²) + ‖u_t‖²_{L^m((0,T)×Γ₁)} + ∫₀ᵀ ‖∇u_t‖²`,
/// time integrals by the trapezoid rule over the samples.
pub fn yt_norm(reports: &[EnergyReport], l: f64, m: f64) -> f64 {
    let pointwise = reports
        .iter()
        .map(|r| r.ut_norm * r.ut_norm + l * r.grad_u_norm * r.grad_u_norm)
        .fold(0.0, f64::max);
    let mut boundary = 0.0;
    let mut dissipation = 0.0;
    for w in reports.windows(2) {
        let dt = w[1].t - w[0].t;
        boundary += 0.5 * dt * (w[0].ut_boundary_lm_pow + w[1].ut_boundary_lm_pow);
        dissipation += 0.5 * dt * (w[0].grad_ut_sq + w[1].grad_ut_sq);
    }
    pointwise + boundary.powf(2.0 / m) + dissipation
}

/// `∫_Ω ∫₀ᵗ g(t-s) ∇u(s)·∇u_t(t) ds dx` from the memory load.
pub fn memory_power(state: &State, mem: &MemoryState, model: &DiscreteModel) -> Result<f64> {
    Ok(dot(&mem.force(model)?, &state.v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Experiment, Geometry, KernelSpec, MemoryMode, Params};

    fn model(kernel: &[(f64, f64)], params: Params, nodes: usize) -> DiscreteModel {
        DiscreteModel::build(
            Geometry::Interval { length: 1.0, nodes },
            params,
            KernelSpec::new(kernel).unwrap(),
            Experiment::Run,
        )
        .unwrap()
    }

    fn thresholds(model: &DiscreteModel, e0: f64) -> Thresholds {
        Thresholds::compute(0.6, model.l(), model.params.p, model.params.m, 1, e0).unwrap()
    }

    #[test]
    fn zero_state() {
        let m = model(&[(0.25, 1.0)], Params::default(), 21);
        let s = State::zeros(m.len());
        let mem = MemoryState::new(&m, &s.u, MemoryMode::Recursion).unwrap();
        assert_eq!(energy(&s, &mem, &m), 0.0);
        assert_eq!(functional_i(&s, &mem, &m), 0.0);
        assert_eq!(functional_j(&s, &mem, &m), 0.0);
        assert_eq!(gamma(&s, &mem, &m), 0.0);
        let th = thresholds(&m, 0.0);
        let r = evaluate(&s, &mem, &m, &th);
        assert!(th.e2 > 0.0);
        assert_eq!(r.l, th.e2);
        assert_eq!(r.h, th.e2);
    }

    #[test]
    fn identities() {
        let m = model(&[(0.3, 2.0)], Params::default(), 41);
        let mut s = State::zeros(m.len());
        s.u = m.interpolate(|x, _| 0.8 * (2.0 * x).sin());
        s.v = m.interpolate(|x, _| x * x);
        let mut mem = MemoryState::new(&m, &s.u, MemoryMode::Recursion).unwrap();
        for k in 1..=50 {
            let u: Vec<f64> = s.u.iter().map(|x| x * (1.0 + 0.01 * k as f64)).collect();
            mem.advance(&u, 0.01, &m).unwrap();
            s.u = u;
        }
        s.t = mem.time();
        let p = m.params.p;
        let i = functional_i(&s, &mem, &m);
        let j = functional_j(&s, &mem, &m);
        let gam = gamma(&s, &mem, &m);
        let up = m.lq_pow(&s.u, p);
        let tol = 1e-14 * (gam + up);
        assert!((j - (i / p + (p - 2.0) / (2.0 * p) * gam)).abs() < tol);
        assert!((gam - (i + up)).abs() < tol);
        let e = energy(&s, &mem, &m);
        let kinetic = 0.5 * m.l2_sq(&s.v) + 0.5 * m.boundary_l2_sq(&s.v);
        assert!((e - (j + kinetic)).abs() < tol + 1e-14 * kinetic);
        assert!(gam >= m.l() * m.grad_sq(&s.u));
    }

    #[test]
    fn elastic_gamma_is_gradient() {
        let m = model(&[], Params::default(), 21);
        let mut s = State::zeros(m.len());
        s.u = m.interpolate(|x, _| x);
        s.t = 3.0;
        let mem = MemoryState::new(&m, &s.u, MemoryMode::Recursion).unwrap();
        assert!((gamma(&s, &mem, &m) - m.grad_sq(&s.u)).abs() < 1e-15);
    }

    #[test]
    fn small_amplitude_is_in_the_well() {
        let m = model(&[(0.5, 1.0)], Params::default(), 101);
        let mut s = State::zeros(m.len());
        s.u = m.interpolate(|x, _| 1e-3 * (std::f64::consts::FRAC_PI_2 * x).sin());
        let mem = MemoryState::new(&m, &s.u, MemoryMode::Recursion).unwrap();
        assert!(functional_i(&s, &mem, &m) > 0.0);
    }

    #[test]
    fn threshold_examples() {
        // l = 1 gives E₁ = E₂ exactly
        let th = Thresholds::compute(0.7, 1.0, 4.0, 3.0, 1, 0.01).unwrap();
        assert_eq!(th.e1, th.e2);
        // E(0) = E₁ sits at the top of F
        let th = Thresholds::compute(0.7, 0.8, 4.0, 3.0, 1, 0.0).unwrap();
        assert_eq!(alpha2(th.b1, 4.0, th.e1).unwrap(), th.alpha1);
        assert!(alpha2(th.b1, 4.0, th.e1 * 1.01).is_err());
        // E(0) = 0 has the closed-form root
        let closed = (4.0 / (2.0 * th.b1.powf(4.0))).powf(1.0 / 2.0);
        assert!((th.alpha2.unwrap() - closed).abs() < 1e-10);
        assert!(th.e2 < th.e1);
        assert!(th.c1.unwrap() > 0.0);
    }

    #[test]
    fn sigma_hat_range() {
        // 1D: s in (1/2, min(2/m, 2(p-m)/(m(p-2)))) = (0.5, 0.6) for p = 4, m = 2.5
        let s = interpolation_exponent(4.0, 2.5, 1).unwrap();
        assert!((s - 0.55).abs() < 1e-15);
        let sh = sigma_hat(4.0, 2.5, 1).unwrap();
        let hand = (2.0 - 2.5 * 0.55) / 3.0 * (1.0 - 5.0 * 0.45 / ((2.0 - 2.5 * 0.55) * 4.0));
        assert!((sh - hand).abs() < 1e-15);
        assert!(sh > 0.0 && sh < 1.0);
        // the interval is empty for p = 4, m = 3 in 1D, and whenever p <= m
        assert!(interpolation_exponent(4.0, 3.0, 1).is_none());
        assert!(interpolation_exponent(3.0, 3.0, 2).is_none());
        let th = Thresholds::compute(0.6, 0.75, 4.0, 2.5, 1, 0.0).unwrap();
        let bound = th.sigma_bound.unwrap();
        assert!(bound <= sh && bound <= (2.5 - 2.0) / 5.0);
        assert_eq!(th.sigma.unwrap(), 0.5 * bound);
        let th = Thresholds::compute(0.6, 0.75, 4.0, 2.0, 1, 0.0).unwrap();
        assert!(th.sigma.is_none());
    }

    #[test]
    fn lyapunov_examples() {
        let m = model(&[(0.5, 1.0)], Params::default(), 21);
        let mut s = State::zeros(m.len());
        s.u = m.interpolate(|x, _| x);
        s.v = m.interpolate(|x, _| 1.0 - x);
        assert_eq!(lyapunov_l(&s, &m, 0.3, 0.0), 0.3);
        assert!((lyapunov_l_hat(&s, &m, 1.0, 0.0, 0.2).unwrap() - 1.0).abs() < 1e-15);
        assert!(lyapunov_l_hat(&s, &m, -1.0, 0.01, 0.2).is_err());
        let tiny = lyapunov_l_hat(&s, &m, 2.0, 0.01, 1e-12).unwrap();
        let l_no_alpha = lyapunov_l(&s, &m, 2.0, 0.01) - 0.5 * 0.01 * m.params.alpha * m.grad_sq(&s.u);
        assert!((tiny - l_no_alpha).abs() < 1e-10);
    }

    #[test]
    fn yt_norm_cases() {
        assert_eq!(yt_norm(&[], 0.5, 3.0), 0.0);
        let zero = EnergyReport::default();
        assert_eq!(yt_norm(&[zero, EnergyReport { t: 1.0, ..zero }], 0.5, 3.0), 0.0);
        let r0 = EnergyReport { t: 0.0, ut_norm: 1.0, grad_u_norm: 2.0, grad_ut_sq: 3.0, ut_boundary_lm_pow: 8.0, ..zero };
        assert_eq!(yt_norm(&[r0], 0.5, 3.0), 1.0 + 0.5 * 4.0);
        let r1 = EnergyReport { t: 0.5, ut_norm: 2.0, grad_u_norm: 0.0, grad_ut_sq: 1.0, ut_boundary_lm_pow: 0.0, ..zero };
        // max(1 + 2, 4 + 0) + (0.25 * 8)^{2/3} + 0.25 * 4
        let hand = 4.0 + 2f64.powf(2.0 / 3.0) + 1.0;
        assert!((yt_norm(&[r0, r1], 0.5, 3.0) - hand).abs() < 1e-14);
    }

    #[test]
    fn residual_of_zero_trajectory() {
        let reports = vec![EnergyReport::default(), EnergyReport { t: 0.1, ..Default::default() }];
        assert_eq!(dissipation_residual(&reports), vec![0.0, 0.0]);
    }
}
