//! Regime classification of logged trajectories.

use std::fmt;

use crate::error::{Error, Result};
use crate::functionals::{EnergyReport, Thresholds};
use crate::discretization::DiscreteModel;

pub const MIN_SAMPLES: usize = 10;
pub const R2_THRESHOLD: f64 = 0.99;
pub const RATE_DISAGREEMENT: f64 = 0.2;
pub const BOUNDED_GROWTH_FACTOR: f64 = 1.1;
pub const ENERGY_BOUND_SLACK: f64 = 1.05;

/// Least-squares line through `(t, log y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    pub mu: f64,
    pub log_intercept: f64,
    pub r2: f64,
    pub window: (f64, f64),
    /// Largest |log y - fitted| on the window.
    pub max_log_residual: f64,
}

pub fn fit_growth_rate(series: &[(f64, f64)]) -> Result<GrowthFit> {
    if series.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", series.len())));
    }
    if let Some(&(t, y)) = series.iter().find(|(_, y)| !(*y > 0.0) || !y.is_finite()) {
        return Err(Error::Fit(format!("nonpositive value {y} at t = {t}")));
    }
    let n = series.len() as f64;
    let (st, sy) = series
        .iter()
        .fold((0.0, 0.0), |(a, b), &(t, y)| (a + t, b + y.ln()));
    let (tm, ym) = (st / n, sy / n);
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, y) in series {
        let (dt, dy) = (t - tm, y.ln() - ym);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if stt == 0.0 {
        return Err(Error::Fit("all samples at the same time".into()));
    }
    let mu = sty / stt;
    let intercept = ym - mu * tm;
    let mut ss_res = 0.0;
    let mut max_res: f64 = 0.0;
    for &(t, y) in series {
        let r = y.ln() - (intercept + mu * t);
        ss_res += r * r;
        max_res = max_res.max(r.abs());
    }
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(GrowthFit {
        mu,
        log_intercept: intercept,
        r2,
        window: (series[0].0, series[series.len() - 1].0),
        max_log_residual: max_res,
    })
}

/// Blow-up time estimate from a norm history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupEstimate {
    /// Fitted singular time of `‖u‖_p ≈ c (T* - t)^{-q}` (crossing time when coarse).
    pub t_star: f64,
    /// Log-interpolated time at which the norm first exceeded the cap; a lower bound.
    pub crossing_time: f64,
    pub exponent: Option<f64>,
    /// Too few samples on the last decade for a fit.
    pub coarse: bool,
}

const MIN_FIT_POINTS: usize = 5;

pub fn detect_blowup(series: &[(f64, f64)], cap: f64) -> Result<BlowupEstimate> {
    let cross = series
        .iter()
        .position(|&(_, y)| y > cap || !y.is_finite())
        .ok_or_else(|| Error::NoBlowup(format!("norm never exceeded the cap {cap:e}")))?;
    let crossing_time = if cross == 0 {
        series[0].0
    } else {
        let (t0, y0) = series[cross - 1];
        let (t1, y1) = series[cross];
        if y1.is_finite() && y0 > 0.0 {
            let s = (cap.ln() - y0.ln()) / (y1.ln() - y0.ln());
            t0 + s.clamp(0.0, 1.0) * (t1 - t0)
        } else {
            t1
        }
    };
    let last = if series[cross].1.is_finite() { cross } else { cross.saturating_sub(1) };
    let top = series[last].1;
    let start = series[..=last]
        .iter()
        .rposition(|&(_, y)| y < top / 10.0)
        .map_or(0, |i| i + 1);
    let window: Vec<(f64, f64)> = series[start..=last]
        .iter()
        .copied()
        .filter(|&(_, y)| y > 0.0 && y.is_finite())
        .collect();
    let coarse = BlowupEstimate {
        t_star: crossing_time,
        crossing_time,
        exponent: None,
        coarse: true,
    };
    if window.len() < MIN_FIT_POINTS {
        return Ok(coarse);
    }
    match fit_singular(&window) {
        Some((t_star, q)) if q > 0.0 => Ok(BlowupEstimate {
            t_star: t_star.max(crossing_time),
            crossing_time,
            exponent: Some(q),
            coarse: false,
        }),
        _ => Ok(coarse),
    }
}

/// Linear least squares of `log y` on `log(T* - t)` for fixed `T*`; returns `(ssr, q)`.
fn singular_ssr(window: &[(f64, f64)], t_star: f64) -> (f64, f64) {
    let n = window.len() as f64;
    let xs: Vec<f64> = window.iter().map(|&(t, _)| (t_star - t).ln()).collect();
    let ys: Vec<f64> = window.iter().map(|&(_, y)| y.ln()).collect();
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - xm) * (x - xm);
        sxy += (x - xm) * (y - ym);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let ssr = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (ym + slope * (x - xm));
            r * r
        })
        .sum();
    (ssr, -slope)
}

/// Minimizes the profile residual over `T* > t_last`, parametrized by `log(T* - t_last)`.
fn fit_singular(window: &[(f64, f64)]) -> Option<(f64, f64)> {
    let t_last = window.last()?.0;
    let span = t_last - window[0].0;
    if !(span > 0.0) {
        return None;
    }
    let objective = |s: f64| singular_ssr(window, t_last + s.exp()).0;
    let (lo, hi) = ((span * 1e-9).ln(), (span * 1e3).ln());
    let grid = 400;
    let mut best = (f64::INFINITY, lo);
    for k in 0..=grid {
        let s = lo + (hi - lo) * k as f64 / grid as f64;
        let f = objective(s);
        if f < best.0 {
            best = (f, s);
        }
    }
    let step = (hi - lo) / grid as f64;
    let (mut a, mut b) = (best.1 - step, best.1 + step);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if objective(c) < objective(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let s = 0.5 * (a + b);
    let t_star = t_last + s.exp();
    let (_, q) = singular_ssr(window, t_star);
    Some((t_star, q))
}

/// Which hypothesis sets held for the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HypothesisFlags {
    /// `β < 1` and `I(u₀) > 0`: global and bounded.
    pub global_existence: bool,
    /// `E(0) < E₂`, `‖∇u₀‖₂ >= α₁`, `max(m, 2/l) < p`, `α > 0`: exponential growth.
    pub exponential_growth: bool,
    /// Same data with `α = 0` and `m > 2`: finite-time blow-up.
    pub finite_time_blowup: bool,
}

impl HypothesisFlags {
    pub fn evaluate(initial: &EnergyReport, th: &Thresholds, model: &DiscreteModel) -> Self {
        let params = model.params;
        let l = model.l();
        let global_existence = th.beta < 1.0 && initial.i > 0.0;
        let large_data = th.e0 < th.e2
            && initial.grad_u_norm >= th.alpha1
            && params.m.max(2.0 / l) < params.p
            && params.kappa > 0.0;
        Self {
            global_existence,
            exponential_growth: large_data && params.alpha > 0.0,
            finite_time_blowup: large_data && params.alpha == 0.0 && params.m > 2.0,
        }
    }

    pub fn prediction(&self) -> Option<Regime> {
        if self.global_existence {
            Some(Regime::GlobalBounded)
        } else if self.exponential_growth {
            Some(Regime::ExpGrowth)
        } else if self.finite_time_blowup {
            Some(Regime::Blowup)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    GlobalBounded,
    ExpGrowth,
    Blowup,
    Inconclusive,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Self::GlobalBounded => "GLOBAL_BOUNDED",
            Self::ExpGrowth => "EXP_GROWTH",
            Self::Blowup => "BLOWUP",
            Self::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    GlobalBounded,
    ExpGrowth {
        /// Rate fitted on `log ‖u‖_p^p`.
        mu: f64,
        /// Rate fitted on `log L`, when `L > 0` on the window.
        mu_l: Option<f64>,
        window: (f64, f64),
        r2: f64,
    },
    Blowup {
        t_star: f64,
        crossing_time: f64,
        exponent: Option<f64>,
        coarse: bool,
        dt: f64,
    },
    Inconclusive {
        reason: String,
    },
}

impl Outcome {
    pub fn regime(&self) -> Regime {
        match self {
            Self::GlobalBounded => Regime::GlobalBounded,
            Self::ExpGrowth { .. } => Regime::ExpGrowth,
            Self::Blowup { .. } => Regime::Blowup,
            Self::Inconclusive { .. } => Regime::Inconclusive,
        }
    }
}

/// How a run ended, as seen by the classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Completed,
    /// `‖u‖_p` exceeded the cap.
    CapExceeded { t: f64, dt: f64 },
    /// Non-finite values at the smallest step.
    NonFinite { t: f64, dt: f64 },
    /// The corrector still failed at `dt_min`: blow-up resolved to `dt_min`.
    ResolvedToDtMin { t: f64, dt: f64 },
}

impl Termination {
    pub fn is_blowup(&self) -> bool {
        !matches!(self, Termination::Completed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeVerdict {
    pub flags: HypothesisFlags,
    pub prediction: Option<Regime>,
    pub outcome: Outcome,
    /// `None` when the outcome is inconclusive.
    pub consistent: Option<bool>,
}

impl RegimeVerdict {
    pub fn exit_code(&self) -> i32 {
        match self.consistent {
            Some(true) => 0,
            Some(false) => 3,
            None => 4,
        }
    }
}

/// Inputs the classifier reads beyond the sampled reports.
pub struct ClassifierInput<'a> {
    pub reports: &'a [EnergyReport],
    /// `(t, ‖u‖_p)` after every accepted step.
    pub norm_log: &'a [(f64, f64)],
    pub termination: Termination,
    pub cap: f64,
}

pub fn classify(
    input: &ClassifierInput<'_>,
    th: &Thresholds,
    model: &DiscreteModel,
) -> RegimeVerdict {
    let reports = input.reports;
    let flags = reports
        .first()
        .map(|r0| HypothesisFlags::evaluate(r0, th, model))
        .unwrap_or_default();
    let prediction = flags.prediction();
    let outcome = observe(input, th, model);
    let consistent = match (outcome.regime(), prediction) {
        (Regime::Inconclusive, _) => None,
        (_, None) => Some(true),
        (observed, Some(Regime::ExpGrowth)) => {
            // the growth argument assumes global existence; escape in finite time is faster still
            Some(matches!(observed, Regime::ExpGrowth | Regime::Blowup))
        }
        (observed, Some(predicted)) => Some(observed == predicted),
    };
    RegimeVerdict { flags, prediction, outcome, consistent }
}

fn observe(input: &ClassifierInput<'_>, th: &Thresholds, model: &DiscreteModel) -> Outcome {
    let reports = input.reports;
    if let Termination::CapExceeded { dt, .. }
    | Termination::NonFinite { dt, .. }
    | Termination::ResolvedToDtMin { dt, .. } = input.termination
    {
        let est = detect_blowup(input.norm_log, input.cap).unwrap_or(BlowupEstimate {
            t_star: input.norm_log.last().map_or(0.0, |x| x.0),
            crossing_time: input.norm_log.last().map_or(0.0, |x| x.0),
            exponent: None,
            coarse: true,
        });
        return Outcome::Blowup {
            t_star: est.t_star,
            crossing_time: est.crossing_time,
            exponent: est.exponent,
            coarse: est.coarse,
            dt,
        };
    }
    if reports.len() < MIN_SAMPLES {
        return Outcome::Inconclusive {
            reason: format!("{} samples, need {MIN_SAMPLES}", reports.len()),
        };
    }
    let p = model.params.p;
    let half = reports.len() / 2;
    let tail = &reports[half..];

    let up: Vec<(f64, f64)> = tail.iter().map(|r| (r.t, r.u_p_norm.powf(p))).collect();
    if let Ok(fit) = fit_growth_rate(&up) {
        if fit.mu > 0.0 && fit.r2 >= R2_THRESHOLD {
            let ls: Vec<(f64, f64)> = tail.iter().map(|r| (r.t, r.l)).collect();
            let mu_l = fit_growth_rate(&ls).ok().map(|f| f.mu);
            if let Some(ml) = mu_l {
                if (ml - fit.mu).abs() > RATE_DISAGREEMENT * fit.mu.abs().max(ml.abs()) {
                    return Outcome::Inconclusive {
                        reason: format!(
                            "growth rates disagree: ‖u‖_p^p gives {}, L gives {ml}",
                            fit.mu
                        ),
                    };
                }
            }
            return Outcome::ExpGrowth {
                mu: fit.mu,
                mu_l,
                window: fit.window,
                r2: fit.r2,
            };
        }
    }

    let max_first = reports[..half].iter().map(|r| r.u_p_norm).fold(0.0, f64::max);
    let max_last = tail.iter().map(|r| r.u_p_norm).fold(0.0, f64::max);
    let energy_bound = energy_bound_held(reports, th, p);
    if max_last <= BOUNDED_GROWTH_FACTOR * max_first && energy_bound {
        return Outcome::GlobalBounded;
    }
    Outcome::Inconclusive {
        reason: if energy_bound {
            format!("‖u‖_p rose from {max_first} to {max_last} without a clean exponential fit")
        } else {
            "energy bound ((p-2)/2p)‖∇u‖² + ½‖u_t‖² <= 1.05 E(0) violated".into()
        },
    }
}

/// `((p-2)/2p)‖∇u‖² + ½‖u_t‖² <= 1.05 E(0)` at every sample.
pub fn energy_bound_held(reports: &[EnergyReport], th: &Thresholds, p: f64) -> bool {
    reports.iter().all(|r| {
        let lhs = (p - 2.0) / (2.0 * p) * r.grad_u_norm * r.grad_u_norm + 0.5 * r.ut_norm * r.ut_norm;
        lhs <= ENERGY_BOUND_SLACK * th.e0
    })
}

impl fmt::Display for RegimeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flag = |b: bool| if b { "true" } else { "false" };
        writeln!(f, "[hypotheses]")?;
        writeln!(f, "global_existence = {}", flag(self.flags.global_existence))?;
        writeln!(f, "exponential_growth = {}", flag(self.flags.exponential_growth))?;
        writeln!(f, "finite_time_blowup = {}", flag(self.flags.finite_time_blowup))?;
        writeln!(
            f,
            "prediction = {}",
            self.prediction.map_or("NONE", |r| r.name())
        )?;
        writeln!(f, "[outcome]")?;
        writeln!(f, "regime = {}", self.outcome.regime().name())?;
        match &self.outcome {
            Outcome::GlobalBounded => {}
            Outcome::ExpGrowth { mu, mu_l, window, r2 } => {
                writeln!(f, "mu_fit = {mu}")?;
                match mu_l {
                    Some(m) => writeln!(f, "mu_fit_L = {m}")?,
                    None => writeln!(f, "mu_fit_L = NaN")?,
                }
                writeln!(f, "fit_window = {} {}", window.0, window.1)?;
                writeln!(f, "r_squared = {r2}")?;
            }
            Outcome::Blowup { t_star, crossing_time, exponent, coarse, dt } => {
                writeln!(f, "t_star = {t_star}")?;
                writeln!(f, "cap_crossing_time = {crossing_time}")?;
                match exponent {
                    Some(q) => writeln!(f, "singular_exponent = {q}")?,
                    None => writeln!(f, "singular_exponent = NaN")?,
                }
                writeln!(f, "coarse = {}", flag(*coarse))?;
                writeln!(f, "dt_at_resolution = {dt}")?;
            }
            Outcome::Inconclusive { reason } => writeln!(f, "reason = {reason}")?,
        }
        writeln!(f, "[consistency]")?;
        let c = match self.consistent {
            Some(true) => "consistent",
            Some(false) => "inconsistent",
            None => "inconclusive",
        };
        writeln!(f, "verdict = {c}")?;
        write!(f, "exit_code = {}", self.exit_code())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_exponential() {
        let series: Vec<(f64, f64)> = (0..20)
            .map(|k| {
                let t = 0.1 * k as f64;
                (t, 3.0 * (2.0 * t).exp())
            })
            .collect();
        let fit = fit_growth_rate(&series).unwrap();
        assert!((fit.mu - 2.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!((fit.log_intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn constant_series() {
        let series: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, 5.0)).collect();
        let fit = fit_growth_rate(&series).unwrap();
        assert_eq!(fit.mu, 0.0);
    }

    #[test]
    fn noisy_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let series: Vec<(f64, f64)> = (0..50)
            .map(|k| {
                let t = 0.05 * k as f64;
                let noise = 1.0 + 0.01 * rng.gen_range(-1.0..1.0);
                (t, 0.5 * (1.5 * t).exp() * noise)
            })
            .collect();
        let fit = fit_growth_rate(&series).unwrap();
        assert!((fit.mu - 1.5).abs() < 0.05 * 1.5);
    }

    #[test]
    fn fit_refuses_nonpositive() {
        let series = vec![(0.0, 1.0), (1.0, 0.0), (2.0, 3.0)];
        assert!(matches!(fit_growth_rate(&series), Err(Error::Fit(_))));
    }

    fn singular_series(t_star: f64, q: f64, n: usize) -> Vec<(f64, f64)> {
        // geometric approach to T* like an adaptively refined run
        (0..n)
            .map(|k| {
                let t = t_star - 2f64.powf(-(k as f64) / 4.0);
                (t, (t_star - t).powf(-q))
            })
            .collect()
    }

    #[test]
    fn exact_singular_model() {
        let series = singular_series(2.0, 1.0, 80);
        let est = detect_blowup(&series, 1e5).unwrap();
        assert!(!est.coarse);
        assert!((est.t_star - 2.0).abs() < 0.01 * 2.0, "{est:?}");
        assert!((est.exponent.unwrap() - 1.0).abs() < 1e-3);
        assert!(est.crossing_time <= 2.0);
    }

    #[test]
    fn never_growing_series_is_rejected() {
        let series: Vec<(f64, f64)> = (0..20).map(|k| (k as f64, 1.0)).collect();
        assert!(matches!(detect_blowup(&series, 1e6), Err(Error::NoBlowup(_))));
    }

    #[test]
    fn coarse_when_the_decade_is_thin() {
        let series = vec![(0.0, 1.0), (1.0, 2.0), (2.0, 1e7)];
        let est = detect_blowup(&series, 1e6).unwrap();
        assert!(est.coarse);
        assert!(est.t_star > 1.0 && est.t_star <= 2.0);
    }

    #[test]
    fn raising_the_cap_does_not_lower_the_estimate() {
        let series = singular_series(1.5, 2.0, 120);
        let mut prev = 0.0;
        for cap in [1e2, 1e3, 1e4, 1e5, 1e6] {
            let est = detect_blowup(&series, cap).unwrap();
            assert!(est.t_star >= prev - 1e-12, "cap {cap}: {} < {prev}", est.t_star);
            prev = est.t_star;
        }
    }
}
