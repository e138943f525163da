//! Real-time derivative estimation from noisy measurements.
//!
//! Two real-time estimators of the first derivative of a measured signal
//! `y = chi0 + delta`, where `delta` is bounded noise:
//!
//! * [`sliding_mode`]: the super-twisting sliding-mode differentiator, its
//!   tuning rule from the Lipschitz constant and its accuracy bound.
//! * [`high_gain`]: the high-gain observer, the peaking constants of its
//!   error dynamics, its ultimate error bounds and the optimal small
//!   parameter.
//!
//! [`signal`] generates analytic test signals with exact derivatives and
//! [`scenario`] runs the differentiators against them, reporting
//! steady-state error against the theoretical bounds.

pub mod error;
pub mod high_gain;
pub mod linalg;
pub mod ode;
pub mod plot;
pub mod quadrature;
pub mod scenario;
pub mod signal;
pub mod sliding_mode;

pub use error::{Error, Result};
pub use high_gain::{
    build_error_system, check_hurwitz, compute_peaking_constants, hg_error_bound_noisefree,
    hg_error_bound_noisy, hg_field, hg_step, optimal_eps_gain, ErrorSystem, HgDiffState, HgParams,
    HighGainDifferentiator, PeakingConstants, StepInput,
};
pub use ode::Method;
pub use scenario::{builtin_scenarios, evaluate, run, RunReport, Scenario, Trace};
pub use signal::{DerivativeOrder, Signal, SignalBounds, SignalSpec, Term};
pub use sliding_mode::{
    st_accuracy_bound, st_field, st_step, tune_super_twisting, StDiffState, StGains,
    SuperTwistingDifferentiator,
};
