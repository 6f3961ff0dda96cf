//! Relaxation kernels given as Prony series `g(s) = Σ a_i exp(-b_i s)`.

use crate::error::{Error, Result};

/// One exponential mode of the relaxation function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PronyTerm {
    pub amplitude: f64,
    pub rate: f64,
}

/// Relaxation function as a finite sum of decaying exponentials.
///
/// The empty series is the elastic case `g ≡ 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KernelSpec {
    terms: Vec<PronyTerm>,
}

impl KernelSpec {
    pub fn new(pairs: &[(f64, f64)]) -> Result<Self> {
        let mut terms = Vec::with_capacity(pairs.len());
        for &(amplitude, rate) in pairs {
            if !amplitude.is_finite() || amplitude < 0.0 {
                return Err(Error::Config(format!(
                    "kernel amplitude must be finite and >= 0, got {amplitude}"
                )));
            }
            if !rate.is_finite() || rate <= 0.0 {
                return Err(Error::Config(format!(
                    "kernel decay rate must be finite and > 0, got {rate}"
                )));
            }
            terms.push(PronyTerm { amplitude, rate });
        }
        Ok(Self { terms })
    }

    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn terms(&self) -> &[PronyTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.amplitude == 0.0)
    }

    pub fn min_rate(&self) -> Option<f64> {
        self.terms.iter().map(|t| t.rate).reduce(f64::min)
    }

    pub fn eval_g(&self, s: f64) -> Result<f64> {
        check_time(s)?;
        Ok(self.g_unchecked(s))
    }

    pub fn eval_g_prime(&self, s: f64) -> Result<f64> {
        check_time(s)?;
        Ok(-self
            .terms
            .iter()
            .map(|t| t.amplitude * t.rate * (-t.rate * s).exp())
            .sum::<f64>())
    }

    pub(crate) fn g_unchecked(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.amplitude * (-t.rate * s).exp())
            .sum()
    }

    /// Total mass `Σ a_i / b_i` of the kernel on `[0, ∞)`.
    pub fn total_mass(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude / t.rate).sum()
    }

    /// `l = 1 - ∫₀^∞ g`, in closed form.
    pub fn l(&self) -> f64 {
        1.0 - self.total_mass()
    }

    /// `∫₀^t g(s) ds = Σ (a_i / b_i)(1 - exp(-b_i t))`.
    pub fn integral_to(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|k| k.amplitude / k.rate * -(-k.rate * t).exp_m1())
            .sum()
    }

    pub fn validate(&self) -> KernelReport {
        // With a_i >= 0 and b_i > 0 the sign conditions hold pointwise; they are
        // checked on the coefficients so the report never depends on sampling.
        let nonnegative = self.terms.iter().all(|t| t.amplitude >= 0.0);
        let nonincreasing = self
            .terms
            .iter()
            .all(|t| t.amplitude * t.rate >= 0.0);
        let l = self.l();
        KernelReport {
            nonnegative,
            nonincreasing,
            positive_l: l > 0.0,
            l,
        }
    }
}

fn check_time(s: f64) -> Result<()> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::Domain(format!(
            "kernel evaluated at negative time s = {s}"
        )));
    }
    Ok(())
}

/// Admissibility of a kernel: `g >= 0`, `g' <= 0`, `l > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelReport {
    pub nonnegative: bool,
    pub nonincreasing: bool,
    pub positive_l: bool,
    pub l: f64,
}

impl KernelReport {
    pub fn admissible(&self) -> bool {
        self.nonnegative && self.nonincreasing && self.positive_l
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.nonnegative {
            out.push("g >= 0");
        }
        if !self.nonincreasing {
            out.push("g' <= 0");
        }
        if !self.positive_l {
            out.push("l = 1 - ∫g > 0");
        }
        out
    }
}
