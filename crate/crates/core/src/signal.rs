//! Analytic test signals: a base signal `chi0(t)` plus bounded measurement
//! noise `delta(t)`, with exact derivatives of the base for ground truth.
//!
//! The declared regularity bounds (Lipschitz constant of the first
//! derivative, bound on the second derivative, noise bound) are stored as
//! prior knowledge and are never inferred from the terms. Only the noise
//! bound is checked at construction, because the differentiators' error
//! bounds are meaningless if the noise can exceed it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{require_nonnegative, require_positive, Error, Result};

/// One primitive summand of a signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Term {
    /// `slope * t`
    Linear {
        slope: f64,
    },
    Constant {
        value: f64,
    },
    /// `amplitude * sin(omega * t)`
    Sine {
        amplitude: f64,
        omega: f64,
    },
    /// `amplitude * cos(omega * t)`
    Cosine {
        amplitude: f64,
        omega: f64,
    },
}

impl Term {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Term::Linear { slope } => slope * t,
            Term::Constant { value } => value,
            Term::Sine { amplitude, omega } => amplitude * (omega * t).sin(),
            Term::Cosine { amplitude, omega } => amplitude * (omega * t).cos(),
        }
    }

    pub fn derivative(&self, t: f64, order: DerivativeOrder) -> f64 {
        match (*self, order) {
            (Term::Linear { slope }, DerivativeOrder::First) => slope,
            (Term::Linear { .. }, DerivativeOrder::Second) => 0.0,
            (Term::Constant { .. }, _) => 0.0,
            (Term::Sine { amplitude, omega }, DerivativeOrder::First) => {
                amplitude * omega * (omega * t).cos()
            }
            (Term::Sine { amplitude, omega }, DerivativeOrder::Second) => {
                -amplitude * omega * omega * (omega * t).sin()
            }
            (Term::Cosine { amplitude, omega }, DerivativeOrder::First) => {
                -amplitude * omega * (omega * t).sin()
            }
            (Term::Cosine { amplitude, omega }, DerivativeOrder::Second) => {
                -amplitude * omega * omega * (omega * t).cos()
            }
        }
    }

    /// Upper bound on `sup_t |term(t)|`, or `None` for unbounded terms.
    pub fn sup_abs(&self) -> Option<f64> {
        match *self {
            Term::Linear { slope } if slope != 0.0 => None,
            Term::Linear { .. } => Some(0.0),
            Term::Constant { value } => Some(value.abs()),
            Term::Sine { amplitude, .. } | Term::Cosine { amplitude, .. } => Some(amplitude.abs()),
        }
    }

    /// Upper bound on `sup_t |term''(t)|`.
    pub fn second_derivative_sup(&self) -> f64 {
        match *self {
            Term::Linear { .. } | Term::Constant { .. } => 0.0,
            Term::Sine { amplitude, omega } | Term::Cosine { amplitude, omega } => {
                (amplitude * omega * omega).abs()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = match *self {
            Term::Linear { slope } => slope.is_finite(),
            Term::Constant { value } => value.is_finite(),
            Term::Sine { amplitude, omega } | Term::Cosine { amplitude, omega } => {
                amplitude.is_finite() && omega.is_finite()
            }
        };
        if finite {
            Ok(())
        } else {
            Err(Error::invalid(
                "term",
                format!("non-finite coefficient in {self:?}"),
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeOrder {
    First,
    Second,
}

impl TryFrom<u32> for DerivativeOrder {
    type Error = Error;

    fn try_from(order: u32) -> Result<Self> {
        match order {
            1 => Ok(DerivativeOrder::First),
            2 => Ok(DerivativeOrder::Second),
            other => Err(Error::InvalidOrder(other)),
        }
    }
}

/// Seeded, piecewise-constant uniform noise in `[-amplitude, amplitude]`.
///
/// The value on each hold interval `[k*hold, (k+1)*hold)` depends only on
/// `(seed, k)`, so evaluation is pure and can be repeated at any time,
/// including the intermediate stages of a Runge-Kutta step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomNoise {
    pub amplitude: f64,
    pub seed: u64,
    pub hold: f64,
}

impl RandomNoise {
    pub fn new(amplitude: f64, seed: u64, hold: f64) -> Result<Self> {
        require_nonnegative("random_noise.amplitude", amplitude)?;
        require_positive("random_noise.hold", hold)?;
        Ok(Self {
            amplitude,
            seed,
            hold,
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let bucket = (t / self.hold).floor() as i64 as u64;
        // splitmix-style mixing so neighbouring buckets get unrelated streams
        let mut key = self.seed ^ bucket.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        key = (key ^ (key >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        key = (key ^ (key >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        key ^= key >> 31;
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        rng.gen_range(-self.amplitude..=self.amplitude)
    }
}

/// Declared prior knowledge about a signal.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SignalBounds {
    /// Lipschitz constant `L` of the first derivative of the base signal.
    pub lipschitz: f64,
    /// Bound `M` on the second derivative of the base signal.
    pub second_deriv: f64,
    /// Bound on the absolute value of the noise.
    pub noise: f64,
}

/// Evaluable base signal and measurement.
///
/// Implementations must be pure: repeated evaluation at the same `t` returns
/// the same value.
pub trait Signal: Send + Sync {
    fn base(&self, t: f64) -> f64;

    fn base_derivative(&self, t: f64, order: DerivativeOrder) -> f64;

    fn noise(&self, t: f64) -> f64;

    fn measurement(&self, t: f64) -> f64 {
        self.base(t) + self.noise(t)
    }
}

/// A sum of primitive terms for the base signal and the noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    base: Vec<Term>,
    noise: Vec<Term>,
    random_noise: Option<RandomNoise>,
    bounds: SignalBounds,
}

impl SignalSpec {
    pub fn new(base: Vec<Term>, noise: Vec<Term>, bounds: SignalBounds) -> Result<Self> {
        Self::with_random_noise(base, noise, None, bounds)
    }

    pub fn with_random_noise(
        base: Vec<Term>,
        noise: Vec<Term>,
        random_noise: Option<RandomNoise>,
        bounds: SignalBounds,
    ) -> Result<Self> {
        require_nonnegative("lipschitz_L", bounds.lipschitz)?;
        require_nonnegative("second_deriv_M", bounds.second_deriv)?;
        require_nonnegative("noise_bound", bounds.noise)?;
        for term in base.iter().chain(&noise) {
            term.validate()?;
        }

        let mut noise_sup = random_noise.map_or(0.0, |r| r.amplitude);
        for term in &noise {
            noise_sup += term.sup_abs().ok_or_else(|| {
                Error::invalid(
                    "noise",
                    format!("{term:?} is unbounded and cannot be noise"),
                )
            })?;
        }
        if noise_sup > bounds.noise + 1e-12 {
            return Err(Error::invalid(
                "noise_bound",
                format!(
                    "noise terms reach {noise_sup} which exceeds the declared bound {}",
                    bounds.noise
                ),
            ));
        }

        Ok(Self {
            base,
            noise,
            random_noise,
            bounds,
        })
    }

    /// Noise-free signal with all bounds zero except those supplied later.
    pub fn noise_free(base: Vec<Term>, lipschitz: f64, second_deriv: f64) -> Result<Self> {
        Self::new(
            base,
            Vec::new(),
            SignalBounds {
                lipschitz,
                second_deriv,
                noise: 0.0,
            },
        )
    }

    pub fn base_terms(&self) -> &[Term] {
        &self.base
    }

    pub fn noise_terms(&self) -> &[Term] {
        &self.noise
    }

    pub fn random_noise(&self) -> Option<&RandomNoise> {
        self.random_noise.as_ref()
    }

    pub fn bounds(&self) -> SignalBounds {
        self.bounds
    }

    pub fn lipschitz(&self) -> f64 {
        self.bounds.lipschitz
    }

    pub fn second_deriv_bound(&self) -> f64 {
        self.bounds.second_deriv
    }

    pub fn noise_bound(&self) -> f64 {
        self.bounds.noise
    }

    pub fn is_noise_free(&self) -> bool {
        self.noise.is_empty() && self.random_noise.map_or(true, |r| r.amplitude == 0.0)
    }

    /// Triangle-inequality bound on `|chi0''|` from the bounded terms.
    pub fn analytic_second_deriv_sup(&self) -> f64 {
        self.base.iter().map(Term::second_derivative_sup).sum()
    }

    pub fn eval_base(&self, t: f64) -> f64 {
        self.base.iter().map(|term| term.value(t)).sum()
    }

    pub fn eval_base_derivative(&self, t: f64, order: DerivativeOrder) -> f64 {
        self.base.iter().map(|term| term.derivative(t, order)).sum()
    }

    pub fn eval_noise(&self, t: f64) -> f64 {
        let deterministic: f64 = self.noise.iter().map(|term| term.value(t)).sum();
        deterministic + self.random_noise.map_or(0.0, |r| r.value(t))
    }

    pub fn eval_measurement(&self, t: f64) -> f64 {
        self.eval_base(t) + self.eval_noise(t)
    }
}

impl Signal for SignalSpec {
    fn base(&self, t: f64) -> f64 {
        self.eval_base(t)
    }

    fn base_derivative(&self, t: f64, order: DerivativeOrder) -> f64 {
        self.eval_base_derivative(t, order)
    }

    fn noise(&self, t: f64) -> f64 {
        self.eval_noise(t)
    }
}

type ScalarFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Closure-backed signal for bases that are not sums of primitive terms.
pub struct FnSignal {
    base: ScalarFn,
    first: ScalarFn,
    second: ScalarFn,
    noise: Option<ScalarFn>,
}

impl FnSignal {
    pub fn new<B, D1, D2>(base: B, first: D1, second: D2) -> Self
    where
        B: Fn(f64) -> f64 + Send + Sync + 'static,
        D1: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            base: Box::new(base),
            first: Box::new(first),
            second: Box::new(second),
            noise: None,
        }
    }

    pub fn with_noise<N>(mut self, noise: N) -> Self
    where
        N: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.noise = Some(Box::new(noise));
        self
    }
}

impl std::fmt::Debug for FnSignal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnSignal")
            .field("noisy", &self.noise.is_some())
            .finish_non_exhaustive()
    }
}

impl Signal for FnSignal {
    fn base(&self, t: f64) -> f64 {
        (self.base)(t)
    }

    fn base_derivative(&self, t: f64, order: DerivativeOrder) -> f64 {
        match order {
            DerivativeOrder::First => (self.first)(t),
            DerivativeOrder::Second => (self.second)(t),
        }
    }

    fn noise(&self, t: f64) -> f64 {
        self.noise.as_ref().map_or(0.0, |n| n(t))
    }
}
