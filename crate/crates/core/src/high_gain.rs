//! High-gain observer differentiator.
//!
//! ```text
//! x1' = x2 + (alpha1 / eps) (y - x1)
//! x2' =      (alpha2 / eps^2) (y - x1)
//! ```
//!
//! `x2` estimates the derivative of the base signal. With the scaled error
//! `zeta = [(x1 - x1_hat) / eps, x2 - x2_hat]` the error obeys
//! `zeta' = A zeta / eps - B f`, where `A = [[-alpha1, 1], [-alpha2, 0]]`,
//! `B = [0, 1]^T` and `f` is the second derivative of the base signal. The
//! constants `Upsilon, Phi, P, Q` are L1 norms of the components of
//! `exp(A t) B` and `exp(A t) B_bar` with `B_bar = [-alpha1, -alpha2]^T`, and
//! enter the ultimate bound `eta(eps) = c1 + eps P M + Q noise / eps`.

use crate::error::{require_nonnegative, require_positive, Error, Result};
use crate::linalg::{Eigenstructure, Mat2, MatrixExp2, Vec2};
use crate::ode::{self, Method, Stage};
use crate::quadrature::{sign_changes, AdaptiveSimpson};

pub const DEFAULT_QUAD_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_HORIZON: f64 = 1e6;
/// Above this the "small parameter" assumption is doubtful.
pub const LARGE_EPS_WARNING: f64 = 0.5;

/// True iff both roots of `s^2 + alpha1 s + alpha2` have negative real part.
pub fn check_hurwitz(alpha1: f64, alpha2: f64) -> bool {
    alpha1 > 0.0 && alpha2 > 0.0 && alpha1.is_finite() && alpha2.is_finite()
}

fn require_hurwitz(alpha1: f64, alpha2: f64) -> Result<()> {
    if check_hurwitz(alpha1, alpha2) {
        return Ok(());
    }
    let condition = if !(alpha1.is_finite() && alpha2.is_finite()) {
        "coefficients must be finite"
    } else if alpha1 <= 0.0 && alpha2 <= 0.0 {
        "alpha1 > 0 and alpha2 > 0 both fail"
    } else if alpha1 <= 0.0 {
        "alpha1 > 0 fails"
    } else {
        "alpha2 > 0 fails"
    };
    Err(Error::NotHurwitz {
        alpha1,
        alpha2,
        condition,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HgParams {
    pub alpha1: f64,
    pub alpha2: f64,
    /// The small parameter `eps`; gains scale as `1/eps` and `1/eps^2`.
    pub eps_gain: f64,
    /// Slack added to every bound.
    pub c1: f64,
}

impl HgParams {
    pub fn new(alpha1: f64, alpha2: f64, eps_gain: f64) -> Result<Self> {
        Self::with_slack(alpha1, alpha2, eps_gain, 0.0)
    }

    pub fn with_slack(alpha1: f64, alpha2: f64, eps_gain: f64, c1: f64) -> Result<Self> {
        require_hurwitz(alpha1, alpha2)?;
        require_positive("eps_gain", eps_gain)?;
        require_nonnegative("c1", c1)?;
        Ok(Self {
            alpha1,
            alpha2,
            eps_gain,
            c1,
        })
    }

    pub fn gains(&self) -> (f64, f64) {
        (
            self.alpha1 / self.eps_gain,
            self.alpha2 / (self.eps_gain * self.eps_gain),
        )
    }

    /// Largest step considered safe for the explicit integrators.
    pub fn stability_limit(&self) -> f64 {
        self.eps_gain * self.eps_gain / self.alpha2
    }

    pub fn exceeds_stability_limit(&self, dt: f64) -> bool {
        dt > self.stability_limit()
    }

    pub fn eps_is_large(&self) -> bool {
        self.eps_gain > LARGE_EPS_WARNING
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HgDiffState {
    pub x1_hat: f64,
    pub x2_hat: f64,
}

impl HgDiffState {
    pub fn initial(y0: f64) -> Self {
        Self {
            x1_hat: y0,
            x2_hat: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x1_hat.is_finite() && self.x2_hat.is_finite()
    }

    fn as_array(self) -> [f64; 2] {
        [self.x1_hat, self.x2_hat]
    }

    fn from_array([x1_hat, x2_hat]: [f64; 2]) -> Self {
        Self { x1_hat, x2_hat }
    }
}

/// `(dx1, dx2)` of the observer for measurement `y`.
pub fn hg_field(state: &HgDiffState, params: &HgParams, y: f64) -> (f64, f64) {
    let (g1, g2) = params.gains();
    let innovation = y - state.x1_hat;
    (state.x2_hat + g1 * innovation, g2 * innovation)
}

/// Measurement samples at the start, midpoint and end of one step.
///
/// Euler only reads `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInput {
    pub start: f64,
    pub mid: f64,
    pub end: f64,
}

impl StepInput {
    pub fn constant(y: f64) -> Self {
        Self {
            start: y,
            mid: y,
            end: y,
        }
    }

    pub fn sample(measure: impl Fn(f64) -> f64, t: f64, dt: f64) -> Self {
        Self {
            start: measure(t),
            mid: measure(t + 0.5 * dt),
            end: measure(t + dt),
        }
    }

    fn at(&self, stage: Stage) -> f64 {
        match stage {
            Stage::Start => self.start,
            Stage::Mid => self.mid,
            Stage::End => self.end,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HgStep {
    pub state: HgDiffState,
    /// `dt` exceeded [`HgParams::stability_limit`].
    pub stiff: bool,
}

pub fn hg_step(
    state: &HgDiffState,
    params: &HgParams,
    input: StepInput,
    dt: f64,
    method: Method,
) -> Result<HgStep> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
    }
    let field = |stage: Stage, x: [f64; 2]| {
        let (d1, d2) = hg_field(&HgDiffState::from_array(x), params, input.at(stage));
        [d1, d2]
    };
    let next = ode::step(method, field, state.as_array(), dt);
    Ok(HgStep {
        state: HgDiffState::from_array(next),
        stiff: params.exceeds_stability_limit(dt),
    })
}

/// Stateful wrapper for streaming use.
#[derive(Debug, Clone)]
pub struct HighGainDifferentiator {
    params: HgParams,
    method: Method,
    state: HgDiffState,
}

impl HighGainDifferentiator {
    pub fn new(params: HgParams, method: Method, y0: f64) -> Self {
        Self {
            params,
            method,
            state: HgDiffState::initial(y0),
        }
    }

    pub fn params(&self) -> &HgParams {
        &self.params
    }

    pub fn state(&self) -> &HgDiffState {
        &self.state
    }

    pub fn reset(&mut self, y0: f64) {
        self.state = HgDiffState::initial(y0);
    }

    /// Advances by one step and returns the new derivative estimate.
    pub fn update(&mut self, input: StepInput, dt: f64) -> Result<HgStep> {
        let step = hg_step(&self.state, &self.params, input, dt, self.method)?;
        if !step.state.is_finite() {
            return Err(Error::Divergence { time: f64::NAN });
        }
        self.state = step.state;
        Ok(step)
    }
}

/// Scaled error dynamics `zeta' = A zeta / eps - B f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSystem {
    pub a_zeta: Mat2,
    pub b: Vec2,
    pub b_bar: Vec2,
}

pub fn build_error_system(alpha1: f64, alpha2: f64) -> Result<ErrorSystem> {
    require_hurwitz(alpha1, alpha2)?;
    Ok(ErrorSystem {
        a_zeta: Mat2::new(-alpha1, 1.0, -alpha2, 0.0),
        b: Vec2::new(0.0, 1.0),
        b_bar: Vec2::new(-alpha1, -alpha2),
    })
}

impl ErrorSystem {
    pub fn alphas(&self) -> (f64, f64) {
        (-self.a_zeta.0[0][0], -self.a_zeta.0[1][0])
    }

    pub fn eigenstructure(&self) -> Eigenstructure {
        Eigenstructure::of(&self.a_zeta)
    }
}

/// `Upsilon`, `Phi`, `P`, `Q` with the quadrature that produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakingConstants {
    /// `int |(exp(A t) B)_1| dt`
    pub upsilon: f64,
    /// `int |(exp(A t) B_bar)_1| dt`
    pub phi: f64,
    /// `int |(exp(A t) B)_2| dt`
    pub p_const: f64,
    /// `int |(exp(A t) B_bar)_2| dt`
    pub q_const: f64,
    pub quad_tolerance: f64,
    /// Truncation point of the improper integrals.
    pub horizon: f64,
    /// Largest estimated absolute error over the four integrals, tail included.
    pub achieved_error: f64,
}

impl PeakingConstants {
    /// `key: value` report of the constants, tolerance and horizon.
    pub fn report(&self, sys: &ErrorSystem) -> String {
        let (alpha1, alpha2) = sys.alphas();
        let branch = match sys.eigenstructure() {
            Eigenstructure::RealDistinct { .. } => "real-distinct",
            Eigenstructure::ComplexPair { .. } => "complex-pair",
            Eigenstructure::Repeated { .. } => "repeated",
        };
        format!(
            "alpha1: {alpha1}\n\
             alpha2: {alpha2}\n\
             eigenstructure: {branch}\n\
             upsilon: {:.6}\n\
             phi: {:.6}\n\
             P: {:.6}\n\
             Q: {:.6}\n\
             quad_tolerance: {:e}\n\
             achieved_error: {:e}\n\
             horizon: {}\n",
            self.upsilon,
            self.phi,
            self.p_const,
            self.q_const,
            self.quad_tolerance,
            self.achieved_error,
            self.horizon
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PeakingOptions {
    pub tolerance: f64,
    pub max_horizon: f64,
}

impl Default for PeakingOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_QUAD_TOLERANCE,
            max_horizon: DEFAULT_MAX_HORIZON,
        }
    }
}

pub fn compute_peaking_constants(
    sys: &ErrorSystem,
    quad_tolerance: f64,
) -> Result<PeakingConstants> {
    compute_peaking_constants_with(
        sys,
        PeakingOptions {
            tolerance: quad_tolerance,
            ..Default::default()
        },
    )
}

/// One component `(exp(A t) v)_k = e0(t) v_k + e1(t) (N v)_k` of the
/// integrand family.
struct Component<'a> {
    exp: &'a MatrixExp2,
    direct: f64,
    shifted: f64,
}

impl Component<'_> {
    fn value(&self, t: f64) -> f64 {
        let (c0, c1) = self.exp.weights(t);
        c0 * self.direct + c1 * self.shifted
    }

    /// `int_T^inf e^{r t} (|direct| + |shifted| t) dt` with `r` the spectral
    /// abscissa, which dominates `|value|` on every eigenstructure branch.
    fn tail_bound(&self, rate: f64, horizon: f64) -> f64 {
        let a = -rate;
        let (p, q) = (self.direct.abs(), self.shifted.abs());
        (-a * horizon).exp() * (p / a + q * (horizon / a + 1.0 / (a * a)))
    }
}

pub fn compute_peaking_constants_with(
    sys: &ErrorSystem,
    options: PeakingOptions,
) -> Result<PeakingConstants> {
    let (alpha1, alpha2) = sys.alphas();
    require_hurwitz(alpha1, alpha2)?;
    let tol = require_positive("quad_tolerance", options.tolerance)?;
    require_positive("max_horizon", options.max_horizon)?;

    let exp = MatrixExp2::new(sys.a_zeta);
    let structure = exp.structure();
    let rate = structure.spectral_abscissa();
    debug_assert!(rate < 0.0);
    let shifted = exp.shifted();

    let components: Vec<Component<'_>> = [(sys.b, 0), (sys.b_bar, 0), (sys.b, 1), (sys.b_bar, 1)]
        .into_iter()
        .map(|(v, k)| Component {
            exp: &exp,
            direct: v.component(k),
            shifted: shifted.apply(v).component(k),
        })
        .collect();

    let tail_budget = 0.1 * tol;
    let horizon = components
        .iter()
        .map(|c| truncation_horizon(|t| c.tail_bound(rate, t), tail_budget, -rate))
        .fold(0.0f64, f64::max)
        .min(options.max_horizon);

    // sign changes of the smooth components are at most one apart per
    // half-period in the oscillatory case and unique otherwise
    let bracket_step = match structure {
        Eigenstructure::ComplexPair { omega, .. } => {
            (std::f64::consts::PI / (4.0 * omega)).min(horizon / 64.0)
        }
        _ => horizon / 512.0,
    };

    let solver = AdaptiveSimpson::new(0.9 * tol);
    let mut values = [0.0; 4];
    let mut achieved: f64 = 0.0;
    let mut converged = true;
    for (slot, c) in values.iter_mut().zip(&components) {
        let mut breaks = vec![0.0];
        breaks.extend(sign_changes(|t| c.value(t), 0.0, horizon, bracket_step));
        breaks.push(horizon);
        let q = solver.integrate(|t| c.value(t).abs(), &breaks);
        *slot = q.value;
        converged &= q.converged;
        achieved = achieved.max(q.error_estimate + c.tail_bound(rate, horizon));
    }

    if !converged || achieved > tol || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Quadrature {
            requested: tol,
            achieved,
            horizon,
        });
    }

    let [upsilon, phi, p_const, q_const] = values;
    Ok(PeakingConstants {
        upsilon,
        phi,
        p_const,
        q_const,
        quad_tolerance: tol,
        horizon,
        achieved_error: achieved,
    })
}

/// Smallest `T` (to 1e-6 relative) with `tail(T) <= budget`, for a tail
/// that is decreasing beyond `1 / decay`.
fn truncation_horizon(tail: impl Fn(f64) -> f64, budget: f64, decay: f64) -> f64 {
    let mut hi = 1.0 / decay;
    while tail(hi) > budget {
        hi *= 2.0;
        if !hi.is_finite() || hi > 1e300 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if tail(mid) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Minimizer `sqrt(Q noise / (P M))` of the ultimate bound.
pub fn optimal_eps_gain(p_const: f64, q_const: f64, m: f64, noise_bound: f64) -> Result<f64> {
    require_positive("P", p_const)?;
    require_positive("Q", q_const)?;
    require_positive("M", m)?;
    require_positive("noise_bound", noise_bound)?;
    Ok((q_const * noise_bound / (p_const * m)).sqrt())
}

/// `c1 + eps^2 Upsilon M`.
pub fn hg_error_bound_noisefree(params: &HgParams, upsilon: f64, m: f64) -> Result<f64> {
    require_nonnegative("Upsilon", upsilon)?;
    require_nonnegative("M", m)?;
    Ok(params.c1 + params.eps_gain * params.eps_gain * upsilon * m)
}

/// `c1 + eps P M + Q noise / eps`.
pub fn ultimate_bound(
    c1: f64,
    eps_gain: f64,
    p_const: f64,
    q_const: f64,
    m: f64,
    noise_bound: f64,
) -> Result<f64> {
    require_positive("eps_gain", eps_gain)?;
    require_nonnegative("c1", c1)?;
    require_nonnegative("P", p_const)?;
    require_nonnegative("Q", q_const)?;
    require_nonnegative("M", m)?;
    require_nonnegative("noise_bound", noise_bound)?;
    Ok(c1 + eps_gain * p_const * m + q_const * noise_bound / eps_gain)
}

pub fn hg_error_bound_noisy(
    params: &HgParams,
    consts: &PeakingConstants,
    m: f64,
    noise_bound: f64,
) -> Result<f64> {
    ultimate_bound(
        params.c1,
        params.eps_gain,
        consts.p_const,
        consts.q_const,
        m,
        noise_bound,
    )
}

/// Result of tuning `eps` for a noisy measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HgTuning {
    pub params: HgParams,
    pub constants: PeakingConstants,
    /// Ultimate bound at the optimum, `c1 + 2 sqrt(P Q M noise)`.
    pub bound: f64,
}

pub fn tune_high_gain(
    alpha1: f64,
    alpha2: f64,
    m: f64,
    noise_bound: f64,
    options: PeakingOptions,
) -> Result<HgTuning> {
    let sys = build_error_system(alpha1, alpha2)?;
    let constants = compute_peaking_constants_with(&sys, options)?;
    let eps = optimal_eps_gain(constants.p_const, constants.q_const, m, noise_bound)?;
    let params = HgParams::new(alpha1, alpha2, eps)?;
    let bound = hg_error_bound_noisy(&params, &constants, m, noise_bound)?;
    Ok(HgTuning {
        params,
        constants,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::E;

    #[test]
    fn hurwitz_examples() {
        assert!(check_hurwitz(6.0, 8.0));
        assert!(check_hurwitz(2.0, 1.0));
        assert!(!check_hurwitz(0.0, 1.0));
        assert!(!check_hurwitz(1.0, -1.0));
        assert!(!check_hurwitz(f64::NAN, 1.0));
    }

    #[test]
    fn non_hurwitz_names_condition() {
        match build_error_system(-1.0, 2.0) {
            Err(Error::NotHurwitz { condition, .. }) => assert_eq!(condition, "alpha1 > 0 fails"),
            other => panic!("{other:?}"),
        }
        match HgParams::new(1.0, 0.0, 0.1) {
            Err(Error::NotHurwitz { condition, .. }) => assert_eq!(condition, "alpha2 > 0 fails"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn field_examples() {
        let p = HgParams::new(2.0, 1.0, 0.1).unwrap();
        let fixed = HgDiffState::initial(3.0);
        assert_eq!(hg_field(&fixed, &p, 3.0), (0.0, 0.0));

        let s = HgDiffState::initial(0.0);
        let (d1, d2) = hg_field(&s, &p, 0.1);
        assert_abs_diff_eq!(d1, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d2, 10.0, epsilon = 1e-12);

        let unit = HgParams::new(2.5, 1.5, 1.0).unwrap();
        assert_eq!(unit.gains(), (2.5, 1.5));
    }

    #[test]
    fn euler_step_example() {
        let p = HgParams::new(2.0, 1.0, 1.0).unwrap();
        let step = hg_step(
            &HgDiffState::default(),
            &p,
            StepInput::constant(1.0),
            0.1,
            Method::Euler,
        )
        .unwrap();
        assert_abs_diff_eq!(step.state.x1_hat, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(step.state.x2_hat, 0.1, epsilon = 1e-15);
        assert!(!step.stiff);
    }

    #[test]
    fn step_guards() {
        let p = HgParams::new(2.0, 1.0, 0.1).unwrap();
        let s = HgDiffState::default();
        assert!(hg_step(&s, &p, StepInput::constant(0.0), 0.0, Method::Rk4).is_err());
        let stiff = hg_step(&s, &p, StepInput::constant(0.0), 0.02, Method::Rk4).unwrap();
        assert!(stiff.stiff);
        let fixed = HgDiffState::initial(4.0);
        for method in [Method::Euler, Method::Rk4] {
            let step = hg_step(&fixed, &p, StepInput::constant(4.0), 1e-3, method).unwrap();
            assert_eq!(step.state, fixed);
        }
    }

    #[test]
    fn rk4_step_matches_matrix_exponential() {
        // constant y: e = (y - x1, -x2) obeys e' = [[-g1, 1], [-g2, 0]] e
        let p = HgParams::new(2.0, 1.0, 0.5).unwrap();
        let (g1, g2) = p.gains();
        let a = Mat2::new(-g1, 1.0, -g2, 0.0);
        let x0 = HgDiffState {
            x1_hat: 0.3,
            x2_hat: -0.7,
        };
        let y = 1.0;
        let err = |dt: f64| {
            let step = hg_step(&x0, &p, StepInput::constant(y), dt, Method::Rk4).unwrap();
            let e = MatrixExp2::new(a)
                .at(dt)
                .apply(Vec2::new(y - x0.x1_hat, -x0.x2_hat));
            ((y - step.state.x1_hat - e.0[0]).powi(2) + (-step.state.x2_hat - e.0[1]).powi(2))
                .sqrt()
        };
        // local error is O(dt^5)
        let ratio = err(0.02) / err(0.01);
        assert!((ratio - 32.0).abs() < 2.0, "{ratio}");
    }

    #[test]
    fn error_system_examples() {
        let sys = build_error_system(2.0, 1.0).unwrap();
        assert_eq!(sys.a_zeta, Mat2::new(-2.0, 1.0, -1.0, 0.0));
        assert_eq!(build_error_system(1.0, 1.0).unwrap().b, Vec2::new(0.0, 1.0));
        assert_eq!(
            build_error_system(6.0, 8.0).unwrap().b_bar,
            Vec2::new(-6.0, -8.0)
        );
        assert!(build_error_system(0.0, 1.0).is_err());
    }

    #[test]
    fn double_pole_constants_closed_form() {
        let sys = build_error_system(2.0, 1.0).unwrap();
        let c = compute_peaking_constants(&sys, 1e-8).unwrap();
        assert_abs_diff_eq!(c.p_const, 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(c.q_const, 2.0 / E, epsilon = 1e-8);
        assert_abs_diff_eq!(c.upsilon, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(c.phi, 1.0 + 2.0 / (E * E), epsilon = 1e-8);
        assert!(c.achieved_error <= 1e-8);
        assert!(c.horizon > 10.0);
    }

    #[test]
    fn real_distinct_p_closed_form() {
        // (exp(A t) B)_2 = 2 e^{-2t} - e^{-4t} > 0, so P = 1 - 1/4
        let sys = build_error_system(6.0, 8.0).unwrap();
        let c = compute_peaking_constants(&sys, 1e-9).unwrap();
        assert_abs_diff_eq!(c.p_const, 0.75, epsilon = 1e-9);
        // (exp(A t) B)_1 = (e^{-2t} - e^{-4t}) / 2 > 0
        assert_abs_diff_eq!(c.upsilon, 0.125, epsilon = 1e-9);
    }

    #[test]
    fn horizon_cap_reports_achieved_accuracy() {
        let sys = build_error_system(0.02, 1.0).unwrap();
        let err = compute_peaking_constants_with(
            &sys,
            PeakingOptions {
                tolerance: 1e-8,
                max_horizon: 50.0,
            },
        )
        .unwrap_err();
        match err {
            Error::Quadrature {
                achieved, horizon, ..
            } => {
                assert_eq!(horizon, 50.0);
                assert!(achieved > 1e-8);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn optimal_eps_examples() {
        let eps = optimal_eps_gain(2.0, 2.0 / E, 1.0, 0.04).unwrap();
        assert_abs_diff_eq!(eps, 0.121_306, epsilon = 1e-6);
        assert_eq!(optimal_eps_gain(3.0, 3.0, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(optimal_eps_gain(1.0, 4.0, 1.0, 1.0).unwrap(), 2.0);
        assert!(optimal_eps_gain(1.0, 4.0, 1.0, 0.0).is_err());
        assert!(optimal_eps_gain(0.0, 4.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn bound_examples() {
        let p = HgParams::new(2.0, 1.0, 0.04).unwrap();
        assert_abs_diff_eq!(
            hg_error_bound_noisefree(&p, 1.0, 1.0).unwrap(),
            0.0016,
            epsilon = 1e-15
        );
        assert_eq!(hg_error_bound_noisefree(&p, 1.0, 0.0).unwrap(), 0.0);
        let p = HgParams::with_slack(2.0, 1.0, 0.1, 0.01).unwrap();
        assert_abs_diff_eq!(
            hg_error_bound_noisefree(&p, 2.0, 3.0).unwrap(),
            0.07,
            epsilon = 1e-15
        );

        let eta = ultimate_bound(0.0, 0.1213, 2.0, 0.735759, 1.0, 0.04).unwrap();
        assert_abs_diff_eq!(eta, 0.48523, epsilon = 1e-5);
        assert_abs_diff_eq!(
            ultimate_bound(0.0, 0.3, 2.0, 0.7, 1.5, 0.0).unwrap(),
            0.9,
            epsilon = 1e-15
        );
        assert!(ultimate_bound(0.0, 0.0, 2.0, 0.7, 1.5, 0.0).is_err());

        let (p, q, m, n, c1) = (2.0, 0.7, 1.3, 0.05, 0.01);
        let star = optimal_eps_gain(p, q, m, n).unwrap();
        assert_abs_diff_eq!(
            ultimate_bound(c1, star, p, q, m, n).unwrap(),
            c1 + 2.0 * (p * q * m * n).sqrt(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn tuning_reproduces_optimum() {
        let t = tune_high_gain(2.0, 1.0, 1.0, 0.04, PeakingOptions::default()).unwrap();
        assert_abs_diff_eq!(t.params.eps_gain, 0.1213, epsilon = 1e-4);
        assert_abs_diff_eq!(t.bound, 0.4852, epsilon = 1e-4);
    }
}
