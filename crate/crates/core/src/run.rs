//! Time-integration driver: adaptive stepping, sampling and classification.

use crate::classifier::{classify, ClassifierInput, RegimeVerdict, Termination};
use crate::discretization::{DiscreteModel, State};
use crate::error::{Error, Result};
use crate::functionals::{self, EnergyReport, Thresholds};
use crate::memory::{MemoryMode, MemoryState};
use crate::sobolev::sobolev_constant;
use crate::stepper::{Scheme, Stepper, StepperOptions, DEFAULT_CORRECTOR_TOL, DEFAULT_MAX_ITERATIONS};

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_BLOWUP_CAP: f64 = 1e6;
pub const MAX_HALVINGS: u32 = 12;
/// A step whose relative change of `‖u‖_p` exceeds this is retried with `dt / 2`.
pub const MAX_RELATIVE_INCREMENT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSettings {
    pub dt: f64,
    pub t_final: f64,
    pub sampling_stride: usize,
    pub scheme: Scheme,
    pub corrector_tol: f64,
    pub max_iterations: usize,
    /// Stop once `‖u‖_p > blowup_cap · max(1, ‖u₀‖_p)`.
    pub blowup_cap: f64,
    pub memory_mode: MemoryMode,
    pub adaptive: bool,
}

impl Default for TimeSettings {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            t_final: 1.0,
            sampling_stride: 1,
            scheme: Scheme::Midpoint,
            corrector_tol: DEFAULT_CORRECTOR_TOL,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            blowup_cap: DEFAULT_BLOWUP_CAP,
            memory_mode: MemoryMode::Recursion,
            adaptive: true,
        }
    }
}

impl TimeSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!("t_final must be positive, got {}", self.t_final)));
        }
        if self.sampling_stride == 0 {
            return Err(Error::Config("sampling_stride must be at least 1".into()));
        }
        if !(self.corrector_tol > 0.0) {
            return Err(Error::Config(format!(
                "corrector_tol must be positive, got {}",
                self.corrector_tol
            )));
        }
        if !(self.blowup_cap > 1.0) {
            return Err(Error::Config(format!(
                "blowup_cap must exceed 1, got {}",
                self.blowup_cap
            )));
        }
        Ok(())
    }

    pub fn dt_min(&self) -> f64 {
        self.dt * 0.5f64.powi(MAX_HALVINGS as i32)
    }
}

/// Overrides for quantities otherwise computed at the start of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOverrides {
    pub sobolev_constant: Option<f64>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub reports: Vec<EnergyReport>,
    /// `(t, ‖u‖_p)` after every accepted step, starting at `t = 0`.
    pub norm_log: Vec<(f64, f64)>,
    pub final_state: State,
    pub termination: Termination,
    pub thresholds: Thresholds,
    pub verdict: RegimeVerdict,
    /// Absolute cap on `‖u‖_p`.
    pub cap: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub smallest_dt: f64,
}

pub fn initial_energy(model: &DiscreteModel, state: &State) -> Result<f64> {
    let mem = MemoryState::new(model, &state.u, MemoryMode::Recursion)?;
    Ok(functionals::energy(state, &mem, model))
}

pub fn thresholds_for(
    model: &DiscreteModel,
    initial: &State,
    overrides: &RunOverrides,
) -> Result<Thresholds> {
    let p = model.params.p;
    let b = match overrides.sobolev_constant {
        Some(b) => b,
        None => sobolev_constant(model, p)?.b,
    };
    let e0 = initial_energy(model, initial)?;
    let th = Thresholds::compute(b, model.l(), p, model.params.m, model.dimension(), e0)?
        .with_default_epsilon(model.l2_sq(&initial.u), model.l2_sq(&initial.v));
    Ok(match overrides.epsilon {
        Some(eps) => Thresholds { epsilon: eps, ..th },
        None => th,
    })
}

pub fn run(
    model: &DiscreteModel,
    initial: &State,
    time: &TimeSettings,
    overrides: &RunOverrides,
) -> Result<RunOutput> {
    time.validate()?;
    model.check_shape(&initial.u)?;
    model.check_shape(&initial.v)?;
    if !initial.is_finite() {
        return Err(Error::Config("initial data must be finite".into()));
    }
    let th = thresholds_for(model, initial, overrides)?;
    let p = model.params.p;
    let lp = |u: &[f64]| model.lq_pow(u, p).powf(1.0 / p);

    let mut mem = MemoryState::new(model, &initial.u, time.memory_mode)?;
    let mut stepper = Stepper::new(
        model,
        StepperOptions {
            scheme: time.scheme,
            corrector_tol: time.corrector_tol,
            max_iterations: time.max_iterations,
        },
    );
    let mut state = State { t: 0.0, ..initial.clone() };
    let mut norm = lp(&state.u);
    let cap = time.blowup_cap * norm.max(1.0);
    let dt_min = time.dt_min();

    let mut reports = vec![functionals::evaluate(&state, &mem, model, &th)];
    let mut norm_log = vec![(0.0, norm)];
    let mut dt = time.dt;
    // times are anchor + k·dt so that long runs do not accumulate rounding
    let mut anchor = 0.0;
    let mut since_anchor = 0usize;
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut termination = Termination::Completed;
    let end = time.t_final;
    let t_eps = 1e-12 * end.max(1.0);

    while state.t < end - t_eps {
        let h = dt.min(end - state.t);
        let can_halve = time.adaptive && dt > dt_min * (1.0 + 1e-9);
        let proposal = stepper.propose(&state, &mem, h);
        let next = match proposal {
            Ok(next) if next.is_finite() => next,
            Ok(_) => {
                if can_halve {
                    dt *= 0.5;
                    (anchor, since_anchor) = (state.t, 0);
                    rejected += 1;
                    continue;
                }
                termination = Termination::NonFinite { t: state.t, dt: h };
                norm_log.push((state.t + h, f64::INFINITY));
                break;
            }
            Err(Error::Corrector { .. }) => {
                if can_halve {
                    dt *= 0.5;
                    (anchor, since_anchor) = (state.t, 0);
                    rejected += 1;
                    continue;
                }
                termination = Termination::ResolvedToDtMin { t: state.t, dt: h };
                norm_log.push((state.t + h, f64::INFINITY));
                break;
            }
            Err(e) => return Err(e),
        };
        let new_norm = lp(&next.u);
        if can_halve && (new_norm - norm).abs() > MAX_RELATIVE_INCREMENT * norm.max(1.0) {
            dt *= 0.5;
            (anchor, since_anchor) = (state.t, 0);
            rejected += 1;
            continue;
        }
        mem.advance(&next.u, h, model)?;
        state = next;
        since_anchor += 1;
        state.t = if h < dt { end } else { anchor + since_anchor as f64 * dt };
        norm = new_norm;
        accepted += 1;
        norm_log.push((state.t, norm));
        let capped = norm > cap;
        let last = capped || state.t >= end - t_eps;
        if accepted % time.sampling_stride == 0 || last {
            reports.push(functionals::evaluate(&state, &mem, model, &th));
        }
        if capped {
            termination = Termination::CapExceeded { t: state.t, dt: h };
            break;
        }
    }

    let residuals = functionals::dissipation_residual(&reports);
    for (r, d) in reports.iter_mut().zip(residuals) {
        r.dissipation_residual = d;
    }
    let verdict = classify(
        &ClassifierInput {
            reports: &reports,
            norm_log: &norm_log,
            termination,
            cap,
        },
        &th,
        model,
    );
    Ok(RunOutput {
        reports,
        norm_log,
        final_state: state,
        termination,
        thresholds: th,
        verdict,
        cap,
        accepted_steps: accepted,
        rejected_steps: rejected,
        smallest_dt: dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Experiment, Geometry, InitialSpec, KernelSpec, Params, Profile, Regime};
    use crate::initial::initial_data;

    fn model(kernel: &[(f64, f64)], params: Params) -> DiscreteModel {
        DiscreteModel::build(
            Geometry::Interval { length: 1.0, nodes: 41 },
            params,
            KernelSpec::new(kernel).unwrap(),
            Experiment::Run,
        )
        .unwrap()
    }

    #[test]
    fn zero_data_stays_zero() {
        let m = model(&[(0.5, 1.0)], Params::default());
        let s0 = State::zeros(m.len());
        let time = TimeSettings { t_final: 0.05, ..Default::default() };
        let out = run(&m, &s0, &time, &RunOverrides::default()).unwrap();
        assert_eq!(out.reports.len(), 51);
        assert!(out.final_state.u.iter().all(|&x| x == 0.0));
        assert!(out.reports.iter().all(|r| r.energy == 0.0));
        assert_eq!(out.termination, Termination::Completed);
    }

    #[test]
    fn stride_and_final_sample() {
        let m = model(&[(0.5, 1.0)], Params::default());
        let spec = InitialSpec { amplitude: 0.1, ..Default::default() };
        let s0 = initial_data(&m, &spec);
        let time = TimeSettings { t_final: 0.0105, sampling_stride: 4, ..Default::default() };
        let out = run(&m, &s0, &time, &RunOverrides::default()).unwrap();
        let ts: Vec<f64> = out.reports.iter().map(|r| r.t).collect();
        assert_eq!(ts.len(), 4);
        assert!((ts[3] - 0.0105).abs() < 1e-14);
        assert!((ts[2] - 0.008).abs() < 1e-14);
    }

    #[test]
    fn large_data_without_damping_hits_the_cap() {
        let params = Params { alpha: 0.0, p: 4.0, m: 2.5, kappa: 1.0, source: true };
        let m = model(&[(0.25, 1.0)], params);
        let spec = InitialSpec { displacement: Profile::Sine, amplitude: 20.0, ..Default::default() };
        let s0 = initial_data(&m, &spec);
        let time = TimeSettings { t_final: 5.0, blowup_cap: 1e3, ..Default::default() };
        let out = run(&m, &s0, &time, &RunOverrides::default()).unwrap();
        assert!(out.termination.is_blowup(), "{:?}", out.termination);
        assert_eq!(out.verdict.outcome.regime(), Regime::Blowup);
        assert!(out.rejected_steps > 0);
    }
}
