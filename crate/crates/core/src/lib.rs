//! Simulation and energy diagnostics for the viscoelastic wave equation with
//! strong damping, a memory term, an interior power source and dynamic
//! (boundary-mass) conditions:
//!
//! ```text
//! u_tt - Δu - αΔu_t + ∫₀ᵗ g(t-s) Δu(s) ds = |u|^{p-2} u     in Ω
//! u = 0                                                      on Γ₀
//! u_tt = -[∂_ν u - ∫₀ᵗ g(t-s) ∂_ν u(s) ds + α ∂_ν u_t + h(u_t)]   on Γ₁
//! ```

pub mod banded;
pub mod classifier;
pub mod cli;
pub mod config;
pub mod discretization;
pub mod error;
pub mod functionals;
pub mod initial;
pub mod kernel;
pub mod memory;
pub mod output;
pub mod run;
pub mod sobolev;
pub mod stepper;

pub use classifier::{Outcome, Regime, RegimeVerdict, Termination};
pub use config::Config;
pub use discretization::{DiscreteModel, Experiment, Geometry, Norms, Params, State};
pub use error::{Error, Result};
pub use functionals::{EnergyReport, Thresholds};
pub use initial::{InitialSpec, Profile};
pub use kernel::{KernelReport, KernelSpec, PronyTerm};
pub use memory::{MemoryMode, MemoryState};
pub use run::{run, RunOutput, RunOverrides, TimeSettings};
pub use stepper::{Forcing, Scheme, Stepper, StepperOptions};
