//! Super-twisting sliding-mode differentiator.
//!
//! With `s0 = z0 - y`:
//!
//! ```text
//! v    = -lambda1 |s0|^(1/2) sign(s0) + z1
//! z0'  = v
//! z1'  = -lambda2 sign(s0)
//! ```
//!
//! `v` is the derivative estimate. The field is discontinuous in `s0`, so it
//! is discretized with explicit Euler only.

use crate::error::{require_nonnegative, require_positive, Error, Result};

pub const DEFAULT_MU1: f64 = 1.5;
pub const DEFAULT_MU2: f64 = 1.1;
/// Accuracy constant `b(1.5, 1.1)`; no formula for other multipliers exists.
pub const DEFAULT_ACCURACY_B: f64 = 1.8;
pub const DEFAULT_DT: f64 = 1e-4;

/// `sign` with `sign(0) = 0`, which makes the field odd and the origin an
/// exact equilibrium.
#[inline]
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Multipliers relating the gains to the Lipschitz constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multipliers {
    pub mu1: f64,
    pub mu2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StGains {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Declared Lipschitz constant of the derivative being estimated.
    pub lipschitz: f64,
    /// `None` when the gains were given directly and `L = 0`.
    pub multipliers: Option<Multipliers>,
    /// Accuracy constant `b(mu1, mu2)`, when known.
    pub accuracy_b: Option<f64>,
}

impl StGains {
    /// Gains given directly. Multipliers are back-computed when `L > 0`.
    pub fn explicit(lambda1: f64, lambda2: f64, lipschitz: f64) -> Result<Self> {
        require_positive("lambda1", lambda1)?;
        require_positive("lambda2", lambda2)?;
        require_nonnegative("lipschitz_L", lipschitz)?;
        let multipliers = (lipschitz > 0.0).then(|| Multipliers {
            mu1: lambda1 / lipschitz.sqrt(),
            mu2: lambda2 / lipschitz,
        });
        Ok(Self {
            lambda1,
            lambda2,
            lipschitz,
            multipliers,
            accuracy_b: None,
        })
    }

    pub fn with_accuracy_b(mut self, b: f64) -> Result<Self> {
        self.accuracy_b = Some(require_positive("accuracy_b", b)?);
        Ok(self)
    }

    /// Both gains strictly positive. Tuning with `L = 0` yields zero gains,
    /// which cannot drive a differentiator.
    pub fn validate(&self) -> Result<()> {
        require_positive("lambda1", self.lambda1)?;
        require_positive("lambda2", self.lambda2)?;
        Ok(())
    }

    /// `lambda2 > L`, the noise-free convergence requirement.
    pub fn dominates_lipschitz(&self) -> bool {
        self.lambda2 > self.lipschitz
    }

    /// Accuracy bound `b sqrt(L) sqrt(noise_bound)`, if `b` is known.
    pub fn accuracy_bound(&self, noise_bound: f64) -> Option<Result<f64>> {
        self.accuracy_b
            .map(|b| st_accuracy_bound(b, self.lipschitz, noise_bound))
    }
}

/// `lambda1 = mu1 sqrt(L)`, `lambda2 = mu2 L`.
///
/// `L = 0` is accepted and produces zero gains; callers should warn, since
/// such gains carry no convergence guarantee.
pub fn tune_super_twisting(lipschitz: f64, mu1: f64, mu2: f64) -> Result<StGains> {
    require_nonnegative("lipschitz_L", lipschitz)?;
    require_positive("mu1", mu1)?;
    if !(mu2.is_finite() && mu2 > 1.0) {
        return Err(Error::invalid("mu2", format!("must be > 1, got {mu2}")));
    }
    Ok(StGains {
        lambda1: mu1 * lipschitz.sqrt(),
        lambda2: mu2 * lipschitz,
        lipschitz,
        multipliers: Some(Multipliers { mu1, mu2 }),
        accuracy_b: None,
    })
}

/// `b sqrt(L) sqrt(noise_bound)`.
pub fn st_accuracy_bound(b: f64, lipschitz: f64, noise_bound: f64) -> Result<f64> {
    require_positive("b", b)?;
    require_nonnegative("lipschitz_L", lipschitz)?;
    require_nonnegative("noise_bound", noise_bound)?;
    Ok(b * lipschitz.sqrt() * noise_bound.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StDiffState {
    /// Estimate of the base signal.
    pub z0_hat: f64,
    /// Integral state driving the control.
    pub z1_hat: f64,
    /// Last computed control `v`, the derivative estimate.
    pub v_last: f64,
}

impl StDiffState {
    /// Zero output error at start: `z0 = y(0)`, `z1 = 0`.
    pub fn initial(y0: f64) -> Self {
        Self {
            z0_hat: y0,
            z1_hat: 0.0,
            v_last: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.z0_hat.is_finite() && self.z1_hat.is_finite() && self.v_last.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StField {
    pub dz0: f64,
    pub dz1: f64,
    pub v: f64,
}

pub fn st_field(state: &StDiffState, gains: &StGains, y: f64) -> StField {
    let s0 = state.z0_hat - y;
    let sg = sign(s0);
    let v = -gains.lambda1 * s0.abs().sqrt() * sg + state.z1_hat;
    StField {
        dz0: v,
        dz1: -gains.lambda2 * sg,
        v,
    }
}

/// One explicit Euler step.
pub fn st_step(state: &StDiffState, gains: &StGains, y: f64, dt: f64) -> Result<StDiffState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
    }
    let field = st_field(state, gains, y);
    Ok(StDiffState {
        z0_hat: state.z0_hat + dt * field.dz0,
        z1_hat: state.z1_hat + dt * field.dz1,
        v_last: field.v,
    })
}

/// Stateful wrapper for streaming use.
#[derive(Debug, Clone)]
pub struct SuperTwistingDifferentiator {
    gains: StGains,
    state: StDiffState,
}

impl SuperTwistingDifferentiator {
    pub fn new(gains: StGains, y0: f64) -> Result<Self> {
        gains.validate()?;
        Ok(Self {
            gains,
            state: StDiffState::initial(y0),
        })
    }

    pub fn gains(&self) -> &StGains {
        &self.gains
    }

    pub fn state(&self) -> &StDiffState {
        &self.state
    }

    pub fn reset(&mut self, y0: f64) {
        self.state = StDiffState::initial(y0);
    }

    /// Consumes the sample `y` at the current time, advances by `dt` and
    /// returns the derivative estimate at the sample time.
    pub fn update(&mut self, y: f64, dt: f64) -> Result<f64> {
        let next = st_step(&self.state, &self.gains, y, dt)?;
        if !next.is_finite() {
            return Err(Error::Divergence { time: f64::NAN });
        }
        self.state = next;
        Ok(next.v_last)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn gains(l1: f64, l2: f64) -> StGains {
        StGains::explicit(l1, l2, 1.0).unwrap()
    }

    #[test]
    fn tuning_examples() {
        let g = tune_super_twisting(2.0, 1.5, 1.1).unwrap();
        assert_abs_diff_eq!(g.lambda1, 2.121_320_343_559_642_4, epsilon = 1e-15);
        assert_abs_diff_eq!(g.lambda2, 2.2, epsilon = 1e-15);

        let g = tune_super_twisting(1.0, 1.5, 1.1).unwrap();
        assert_eq!((g.lambda1, g.lambda2), (1.5, 1.1));

        let g = tune_super_twisting(6.0, 1.5, 1.1).unwrap();
        assert_abs_diff_eq!(g.lambda1, 3.674_234_614_174_767, epsilon = 1e-14);
        assert_abs_diff_eq!(g.lambda2, 6.6, epsilon = 1e-14);
    }

    #[test]
    fn tuning_errors() {
        assert!(tune_super_twisting(2.0, 1.5, 1.0).is_err());
        assert!(tune_super_twisting(-1.0, 1.5, 1.1).is_err());
        assert!(tune_super_twisting(2.0, 0.0, 1.1).is_err());
        let zero = tune_super_twisting(0.0, 1.5, 1.1).unwrap();
        assert_eq!((zero.lambda1, zero.lambda2), (0.0, 0.0));
        assert!(zero.validate().is_err());
    }

    #[test]
    fn field_examples() {
        let s = StDiffState {
            z0_hat: 3.0,
            z1_hat: 0.0,
            v_last: 0.0,
        };
        let f = st_field(&s, &gains(2.12, 2.2), 3.0);
        assert_eq!((f.dz0, f.dz1, f.v), (0.0, 0.0, 0.0));

        let s = StDiffState {
            z0_hat: 1.0,
            ..Default::default()
        };
        let f = st_field(&s, &gains(2.12, 2.2), 0.0);
        assert_abs_diff_eq!(f.v, -2.12, epsilon = 1e-15);
        assert_abs_diff_eq!(f.dz1, -2.2, epsilon = 1e-15);

        let s = StDiffState {
            z0_hat: 0.25,
            z1_hat: 1.0,
            v_last: 0.0,
        };
        let f = st_field(&s, &gains(2.0, 2.2), 0.0);
        assert_eq!(f.v, 0.0);
        assert_eq!(f.dz1, -2.2);
    }

    #[test]
    fn euler_step_example() {
        let s = StDiffState {
            z0_hat: 1.0,
            ..Default::default()
        };
        let next = st_step(&s, &gains(1.0, 1.0), 0.0, 0.1).unwrap();
        assert_abs_diff_eq!(next.z0_hat, 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(next.z1_hat, -0.1, epsilon = 1e-15);
        assert_eq!(next.v_last, -1.0);
    }

    #[test]
    fn equilibrium_is_fixed() {
        let s = StDiffState::initial(2.5);
        for dt in [1e-5, 0.1, 3.0] {
            assert_eq!(st_step(&s, &gains(3.0, 4.0), 2.5, dt).unwrap(), s);
        }
    }

    #[test]
    fn nonpositive_dt_rejected() {
        let s = StDiffState::default();
        assert!(st_step(&s, &gains(1.0, 1.0), 0.0, 0.0).is_err());
        assert!(st_step(&s, &gains(1.0, 1.0), 0.0, -1e-3).is_err());
    }

    #[test]
    fn accuracy_bound_examples() {
        assert_abs_diff_eq!(
            st_accuracy_bound(1.8, 2.0, 0.04).unwrap(),
            0.509_116_882_454_314,
            epsilon = 1e-12
        );
        assert_eq!(st_accuracy_bound(1.8, 2.0, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            st_accuracy_bound(1.0, 4.0, 0.25).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert!(st_accuracy_bound(0.0, 4.0, 0.25).is_err());
    }

    #[test]
    fn streaming_wrapper_matches_free_functions() {
        let g = gains(2.0, 3.0);
        let mut d = SuperTwistingDifferentiator::new(g, 0.0).unwrap();
        let mut s = StDiffState::initial(0.0);
        for k in 0..100 {
            let y = (k as f64 * 0.01).sin();
            let v = d.update(y, 0.01).unwrap();
            s = st_step(&s, &g, y, 0.01).unwrap();
            assert_eq!(v, s.v_last);
        }
        assert_eq!(d.state(), &s);
    }

    proptest! {
        #[test]
        fn field_is_odd(s0 in -10.0..10.0f64, z1 in -10.0..10.0f64, l1 in 0.1..10.0f64, l2 in 0.1..10.0f64) {
            let g = gains(l1, l2);
            let pos = st_field(&StDiffState { z0_hat: s0, z1_hat: z1, v_last: 0.0 }, &g, 0.0);
            let neg = st_field(&StDiffState { z0_hat: -s0, z1_hat: -z1, v_last: 0.0 }, &g, 0.0);
            prop_assert_eq!(neg.v, -pos.v);
            prop_assert_eq!(neg.dz1, -pos.dz1);
        }

        #[test]
        fn tuning_algebra(l in 1e-3..1e3f64, mu1 in 1e-2..10.0f64, mu2 in 1.0001..10.0f64) {
            let g = tune_super_twisting(l, mu1, mu2).unwrap();
            prop_assert!((g.lambda1 / l.sqrt() - mu1).abs() <= 4.0 * f64::EPSILON * mu1);
            prop_assert!((g.lambda2 / l - mu2).abs() <= 4.0 * f64::EPSILON * mu2);
        }
    }
}
