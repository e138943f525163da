//! TOML scenario files.
//!
//! One scenario per file. Top-level keys `name`, `description`, `dt`,
//! `horizon`, `settle_fraction`; a `[signal]` table with the declared bounds
//! and the `base` / `noise` term lists; a `[differentiator]` table tagged by
//! `kind = "super-twisting" | "high-gain"`. See `scenarios/README.md`.

use std::path::Path;

use serde::Deserialize;

use super::{DifferentiatorConfig, Scenario};
use crate::error::{Error, Result};
use crate::high_gain::{self, HgParams, PeakingOptions, DEFAULT_QUAD_TOLERANCE};
use crate::ode::Method;
use crate::signal::{RandomNoise, SignalBounds, SignalSpec, Term};
use crate::sliding_mode::{self, StGains, DEFAULT_DT, DEFAULT_MU1, DEFAULT_MU2};

pub const DEFAULT_HORIZON: f64 = 20.0;
pub const DEFAULT_SETTLE_FRACTION: f64 = 0.5;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    #[serde(default)]
    description: String,
    dt: Option<f64>,
    horizon: Option<f64>,
    settle_fraction: Option<f64>,
    signal: SignalTable,
    differentiator: DifferentiatorTable,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignalTable {
    #[serde(default)]
    lipschitz: f64,
    #[serde(default)]
    second_deriv_bound: f64,
    #[serde(default)]
    noise_bound: f64,
    #[serde(default)]
    base: Vec<Term>,
    #[serde(default)]
    noise: Vec<Term>,
    random_noise: Option<RandomNoise>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum DifferentiatorTable {
    SuperTwisting {
        lambda1: Option<f64>,
        lambda2: Option<f64>,
        mu1: Option<f64>,
        mu2: Option<f64>,
        accuracy_b: Option<f64>,
    },
    HighGain {
        alpha1: f64,
        alpha2: f64,
        eps_gain: Option<f64>,
        #[serde(default)]
        c1: f64,
        #[serde(default)]
        method: Method,
        quad_tolerance: Option<f64>,
    },
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    file.into_scenario()
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<Scenario> {
        let s = self.signal;
        let random_noise = s
            .random_noise
            .map(|r| RandomNoise::new(r.amplitude, r.seed, r.hold))
            .transpose()?;
        let signal = SignalSpec::with_random_noise(
            s.base,
            s.noise,
            random_noise,
            SignalBounds {
                lipschitz: s.lipschitz,
                second_deriv: s.second_deriv_bound,
                noise: s.noise_bound,
            },
        )?;

        let differentiator = match self.differentiator {
            DifferentiatorTable::SuperTwisting {
                lambda1,
                lambda2,
                mu1,
                mu2,
                accuracy_b,
            } => {
                let gains = match (lambda1, lambda2, mu1, mu2) {
                    (Some(l1), Some(l2), None, None) => {
                        StGains::explicit(l1, l2, signal.lipschitz())?
                    }
                    (None, None, mu1, mu2) => sliding_mode::tune_super_twisting(
                        signal.lipschitz(),
                        mu1.unwrap_or(DEFAULT_MU1),
                        mu2.unwrap_or(DEFAULT_MU2),
                    )?,
                    _ => {
                        return Err(Error::Config(
                            "give either both lambda1 and lambda2, or mu1/mu2, not a mix".into(),
                        ))
                    }
                };
                let gains = match accuracy_b {
                    Some(b) => gains.with_accuracy_b(b)?,
                    None => gains,
                };
                gains.validate()?;
                DifferentiatorConfig::SuperTwisting(gains)
            }
            DifferentiatorTable::HighGain {
                alpha1,
                alpha2,
                eps_gain,
                c1,
                method,
                quad_tolerance,
            } => {
                let quad_tolerance = quad_tolerance.unwrap_or(DEFAULT_QUAD_TOLERANCE);
                let eps_gain = match eps_gain {
                    Some(eps) => eps,
                    None => {
                        high_gain::tune_high_gain(
                            alpha1,
                            alpha2,
                            signal.second_deriv_bound(),
                            signal.noise_bound(),
                            PeakingOptions {
                                tolerance: quad_tolerance,
                                ..Default::default()
                            },
                        )
                        .map_err(|e| match e {
                            Error::InvalidParameter { name, reason } => Error::Config(format!(
                                "eps_gain omitted and cannot be tuned: {name} {reason}"
                            )),
                            other => other,
                        })?
                        .params
                        .eps_gain
                    }
                };
                DifferentiatorConfig::HighGain {
                    params: HgParams::with_slack(alpha1, alpha2, eps_gain, c1)?,
                    method,
                    quad_tolerance,
                }
            }
        };

        let scenario = Scenario {
            name: self.name,
            description: self.description,
            signal,
            differentiator,
            dt: self.dt.unwrap_or(DEFAULT_DT),
            horizon: self.horizon.unwrap_or(DEFAULT_HORIZON),
            settle_fraction: self.settle_fraction.unwrap_or(DEFAULT_SETTLE_FRACTION),
        };
        scenario.validate()?;
        Ok(scenario)
    }
}
