//! Scenario lab: bundled experiments, the simulation engine, steady-state
//! error metrics and bound verdicts.

mod config;
mod trace;

use std::path::Path;

use rayon::prelude::*;

pub use config::{load_scenario, parse_scenario, DEFAULT_HORIZON, DEFAULT_SETTLE_FRACTION};
pub use trace::{RunReport, Trace, TraceRow, CSV_HEADER};

use crate::error::{require_positive, Error, Result};
use crate::high_gain::{
    self, build_error_system, compute_peaking_constants, HgDiffState, HgParams, StepInput,
};
use crate::ode::Method;
use crate::signal::{DerivativeOrder, Signal, SignalSpec};
use crate::sliding_mode::{st_step, StDiffState, StGains};

const BUNDLED: [(&str, &str); 4] = [
    ("slm-1.toml", include_str!("../../scenarios/slm-1.toml")),
    ("slm-2.toml", include_str!("../../scenarios/slm-2.toml")),
    ("hg-1.toml", include_str!("../../scenarios/hg-1.toml")),
    ("hg-2.toml", include_str!("../../scenarios/hg-2.toml")),
];

#[derive(Debug, Clone, PartialEq)]
pub enum DifferentiatorConfig {
    SuperTwisting(StGains),
    HighGain {
        params: HgParams,
        method: Method,
        /// Used to compute `P`, `Q` for the bound verdict.
        quad_tolerance: f64,
    },
}

impl DifferentiatorConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            DifferentiatorConfig::SuperTwisting(_) => "super-twisting",
            DifferentiatorConfig::HighGain { .. } => "high-gain",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub signal: SignalSpec,
    pub differentiator: DifferentiatorConfig,
    pub dt: f64,
    pub horizon: f64,
    /// Fraction of the horizon discarded before steady-state statistics.
    pub settle_fraction: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        require_positive("dt", self.dt)?;
        require_positive("horizon", self.horizon)?;
        if self.horizon <= self.dt {
            return Err(Error::invalid(
                "horizon",
                format!("must exceed dt ({} <= {})", self.horizon, self.dt),
            ));
        }
        if !(self.settle_fraction > 0.0 && self.settle_fraction < 1.0) {
            return Err(Error::invalid(
                "settle_fraction",
                format!("must lie in (0, 1), got {}", self.settle_fraction),
            ));
        }
        if let DifferentiatorConfig::SuperTwisting(g) = &self.differentiator {
            g.validate()?;
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn settle_start(&self) -> f64 {
        self.settle_fraction * self.horizon
    }

    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        self.dt = dt;
        self.validate()?;
        Ok(self)
    }

    pub fn with_horizon(mut self, horizon: f64) -> Result<Self> {
        self.horizon = horizon;
        self.validate()?;
        Ok(self)
    }

    pub fn with_settle_fraction(mut self, settle_fraction: f64) -> Result<Self> {
        self.settle_fraction = settle_fraction;
        self.validate()?;
        Ok(self)
    }

    /// Replaces `eps` of a high-gain scenario.
    pub fn with_eps_gain(mut self, eps_gain: f64) -> Result<Self> {
        match &mut self.differentiator {
            DifferentiatorConfig::HighGain { params, .. } => {
                *params = HgParams::with_slack(params.alpha1, params.alpha2, eps_gain, params.c1)?;
                Ok(self)
            }
            DifferentiatorConfig::SuperTwisting(_) => Err(Error::invalid(
                "scenario",
                format!("{} is not a high-gain scenario", self.name),
            )),
        }
    }

    pub fn high_gain_params(&self) -> Option<&HgParams> {
        match &self.differentiator {
            DifferentiatorConfig::HighGain { params, .. } => Some(params),
            DifferentiatorConfig::SuperTwisting(_) => None,
        }
    }
}

/// The four bundled experiments: SLM-1, SLM-2, HG-1, HG-2.
pub fn builtin_scenarios() -> Vec<Scenario> {
    BUNDLED
        .iter()
        .map(|(file, text)| {
            parse_scenario(text).unwrap_or_else(|e| panic!("bundled scenario {file}: {e}"))
        })
        .collect()
}

pub fn builtin_scenario(name: &str) -> Option<Scenario> {
    builtin_scenarios()
        .into_iter()
        .find(|s| s.name.eq_ignore_ascii_case(name))
}

/// A bundled scenario name, or else a path to a scenario file.
pub fn resolve_scenario(selector: &str) -> Result<Scenario> {
    if let Some(s) = builtin_scenario(selector) {
        return Ok(s);
    }
    let path = Path::new(selector);
    if path.exists() {
        load_scenario(path)
    } else {
        Err(Error::UnknownScenario(selector.to_owned()))
    }
}

/// Runs the scenario's differentiator against its own signal.
pub fn run(scenario: &Scenario) -> Result<Trace> {
    scenario.validate()?;
    run_signal(
        &scenario.signal,
        &scenario.differentiator,
        scenario.dt,
        scenario.steps(),
    )
}

/// Simulates `steps` steps of length `dt`, recording `steps + 1` rows at
/// `t = k dt`. Each row holds the estimates available at that time, before
/// the sample is consumed.
pub fn run_signal(
    signal: &dyn Signal,
    differentiator: &DifferentiatorConfig,
    dt: f64,
    steps: usize,
) -> Result<Trace> {
    require_positive("dt", dt)?;
    let mut rows = Vec::with_capacity(steps + 1);
    let mut stiff = false;
    let truth = |t: f64, y: f64, x1: f64, dx: f64| {
        let dchi0_true = signal.base_derivative(t, DerivativeOrder::First);
        TraceRow {
            t,
            y,
            chi0: signal.base(t),
            dchi0_true,
            estimate_x1: x1,
            estimate_dx: dx,
            error: dx - dchi0_true,
        }
    };

    match differentiator {
        DifferentiatorConfig::SuperTwisting(gains) => {
            gains.validate()?;
            let mut state = StDiffState::initial(signal.measurement(0.0));
            for k in 0..=steps {
                let t = k as f64 * dt;
                let y = signal.measurement(t);
                let next = st_step(&state, gains, y, dt)?;
                if !next.is_finite() {
                    return Err(Error::Divergence { time: t });
                }
                rows.push(truth(t, y, state.z0_hat, next.v_last));
                state = next;
            }
        }
        DifferentiatorConfig::HighGain { params, method, .. } => {
            if params.exceeds_stability_limit(dt) {
                log::warn!(
                    "dt = {dt} exceeds the stability limit eps^2/alpha2 = {}",
                    params.stability_limit()
                );
            }
            let mut state = HgDiffState::initial(signal.measurement(0.0));
            for k in 0..=steps {
                let t = k as f64 * dt;
                let input = StepInput::sample(|s| signal.measurement(s), t, dt);
                rows.push(truth(t, input.start, state.x1_hat, state.x2_hat));
                if k == steps {
                    break;
                }
                let step = high_gain::hg_step(&state, params, input, dt, *method)?;
                if !step.state.is_finite() {
                    return Err(Error::Divergence { time: t + dt });
                }
                stiff |= step.stiff;
                state = step.state;
            }
        }
    }
    Ok(Trace { dt, rows, stiff })
}

/// Theoretical bound on the steady derivative error, when one applies.
///
/// Super-twisting: `b sqrt(L) sqrt(noise)` when `b` is known. High-gain:
/// `c1 + eps P M + Q noise / eps` with `P`, `Q` computed by quadrature.
pub fn theoretical_bound(scenario: &Scenario) -> Result<Option<f64>> {
    let signal = &scenario.signal;
    match &scenario.differentiator {
        DifferentiatorConfig::SuperTwisting(gains) => gains
            .accuracy_b
            .map(|b| {
                crate::sliding_mode::st_accuracy_bound(b, signal.lipschitz(), signal.noise_bound())
            })
            .transpose(),
        DifferentiatorConfig::HighGain {
            params,
            quad_tolerance,
            ..
        } => {
            let sys = build_error_system(params.alpha1, params.alpha2)?;
            let consts = compute_peaking_constants(&sys, *quad_tolerance)?;
            high_gain::hg_error_bound_noisy(
                params,
                &consts,
                signal.second_deriv_bound(),
                signal.noise_bound(),
            )
            .map(Some)
        }
    }
}

/// Steady-state `(sup |error|, rms error, samples)` over `t >= settle_start`.
pub fn steady_statistics(trace: &Trace, settle_start: f64) -> Result<(f64, f64, usize)> {
    // k*dt can land a rounding error below the nominal start time
    let cutoff = settle_start - 1e-9 * trace.dt.max(f64::MIN_POSITIVE);
    let mut sup: f64 = 0.0;
    let mut sq = 0.0;
    let mut n = 0usize;
    for r in trace.rows.iter().filter(|r| r.t >= cutoff) {
        sup = sup.max(r.error.abs());
        sq += r.error * r.error;
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptySettleWindow);
    }
    Ok((sup, (sq / n as f64).sqrt(), n))
}

pub fn evaluate(trace: &Trace, scenario: &Scenario) -> Result<RunReport> {
    if trace.is_empty() {
        return Err(Error::EmptySettleWindow);
    }
    let settle_start = scenario.settle_start();
    let (steady_sup_error, rmse_steady, steady_samples) = steady_statistics(trace, settle_start)?;
    let theoretical_bound = theoretical_bound(scenario)?;
    Ok(RunReport {
        scenario: scenario.name.clone(),
        differentiator: scenario.differentiator.kind(),
        dt: scenario.dt,
        horizon: scenario.horizon,
        settle_start,
        steady_samples,
        steady_sup_error,
        rmse_steady,
        theoretical_bound,
        bound_satisfied: theoretical_bound.map(|b| steady_sup_error <= b),
        stiff: trace.stiff,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub eps_gain: f64,
    pub steady_sup_error: f64,
    /// Ultimate bound `eta(eps)`.
    pub eta_bound: f64,
}

/// One run per `eps`, in parallel; rows sorted by `eps`.
pub fn sweep_eps_gain(scenario: &Scenario, eps_values: &[f64]) -> Result<Vec<SweepRow>> {
    let (params, quad_tolerance) = match &scenario.differentiator {
        DifferentiatorConfig::HighGain {
            params,
            quad_tolerance,
            ..
        } => (*params, *quad_tolerance),
        DifferentiatorConfig::SuperTwisting(_) => {
            return Err(Error::invalid(
                "scenario",
                format!("{} is not a high-gain scenario", scenario.name),
            ))
        }
    };
    for &eps in eps_values {
        require_positive("eps_gain", eps)?;
    }
    let sys = build_error_system(params.alpha1, params.alpha2)?;
    let consts = compute_peaking_constants(&sys, quad_tolerance)?;
    let m = scenario.signal.second_deriv_bound();
    let noise = scenario.signal.noise_bound();

    let mut rows = eps_values
        .par_iter()
        .map(|&eps| {
            let annotate = |e: Error| Error::Sweep {
                eps_gain: eps,
                source: Box::new(e),
            };
            let s = scenario.clone().with_eps_gain(eps).map_err(annotate)?;
            let trace = run(&s).map_err(annotate)?;
            let (sup, _, _) = steady_statistics(&trace, s.settle_start()).map_err(annotate)?;
            let eta =
                high_gain::ultimate_bound(params.c1, eps, consts.p_const, consts.q_const, m, noise)
                    .map_err(annotate)?;
            Ok(SweepRow {
                eps_gain: eps,
                steady_sup_error: sup,
                eta_bound: eta,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.eps_gain.total_cmp(&b.eps_gain));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Term;
    use crate::sliding_mode::tune_super_twisting;

    #[test]
    fn four_bundled_scenarios() {
        let names: Vec<String> = builtin_scenarios().into_iter().map(|s| s.name).collect();
        assert_eq!(names, ["SLM-1", "SLM-2", "HG-1", "HG-2"]);
    }

    #[test]
    fn bundled_parameters() {
        let slm1 = builtin_scenario("slm-1").unwrap();
        match slm1.differentiator {
            DifferentiatorConfig::SuperTwisting(g) => {
                assert_eq!((g.lambda1, g.lambda2, g.lipschitz), (10.0, 8.0, 6.0));
                assert!(g.accuracy_b.is_none());
            }
            _ => panic!(),
        }
        let slm2 = builtin_scenario("SLM-2").unwrap();
        match slm2.differentiator {
            DifferentiatorConfig::SuperTwisting(g) => {
                let tuned = tune_super_twisting(2.0, 1.5, 1.1).unwrap();
                assert_eq!((g.lambda1, g.lambda2), (tuned.lambda1, tuned.lambda2));
                assert_eq!(g.accuracy_b, Some(1.8));
            }
            _ => panic!(),
        }
        let hg1 = builtin_scenario("HG-1").unwrap();
        let p = hg1.high_gain_params().unwrap();
        assert_eq!(
            (p.alpha1, p.alpha2, p.eps_gain, p.c1),
            (6.0, 8.0, 0.04, 0.0)
        );
        let hg2 = builtin_scenario("HG-2").unwrap();
        let p = hg2.high_gain_params().unwrap();
        assert_eq!((p.alpha1, p.alpha2), (2.0, 1.0));
        assert!((p.eps_gain - 0.1213).abs() < 1e-3);
        for s in builtin_scenarios() {
            assert_eq!((s.dt, s.horizon, s.settle_fraction), (1e-4, 20.0, 0.5));
        }
    }

    #[test]
    fn resolve_unknown() {
        assert_eq!(
            resolve_scenario("no-such-scenario"),
            Err(Error::UnknownScenario("no-such-scenario".into()))
        );
    }

    fn zero_scenario(differentiator: DifferentiatorConfig) -> Scenario {
        Scenario {
            name: "zero".into(),
            description: String::new(),
            signal: SignalSpec::noise_free(vec![], 0.0, 0.0).unwrap(),
            differentiator,
            dt: 1e-3,
            horizon: 1.0,
            settle_fraction: 0.5,
        }
    }

    #[test]
    fn zero_signal_gives_zero_estimates() {
        for d in [
            DifferentiatorConfig::SuperTwisting(StGains::explicit(2.0, 3.0, 1.0).unwrap()),
            DifferentiatorConfig::HighGain {
                params: HgParams::new(2.0, 1.0, 0.1).unwrap(),
                method: Method::Rk4,
                quad_tolerance: 1e-8,
            },
        ] {
            let trace = run(&zero_scenario(d)).unwrap();
            assert_eq!(trace.len(), 1001);
            assert!(trace
                .rows
                .iter()
                .all(|r| r.estimate_x1 == 0.0 && r.estimate_dx == 0.0 && r.error == 0.0));
        }
    }

    #[test]
    fn engine_matches_manual_steps() {
        let gains = StGains::explicit(1.0, 1.0, 1.0).unwrap();
        let mut s = zero_scenario(DifferentiatorConfig::SuperTwisting(gains));
        s.signal = SignalSpec::noise_free(vec![Term::Constant { value: 2.0 }], 0.0, 0.0).unwrap();
        s.dt = 0.1;
        s.horizon = 0.2;
        let trace = run(&s).unwrap();

        let st = StDiffState::initial(2.0);
        let a = st_step(&st, &gains, 2.0, 0.1).unwrap();
        let b = st_step(&a, &gains, 2.0, 0.1).unwrap();
        assert_eq!(trace.rows[1].estimate_x1, a.z0_hat);
        assert_eq!(trace.rows[2].estimate_x1, b.z0_hat);
        assert_eq!(
            trace.rows[2].estimate_dx,
            st_step(&b, &gains, 2.0, 0.1).unwrap().v_last
        );
    }

    #[test]
    fn divergence_reported() {
        // eps tiny and dt huge: explicit Euler blows up
        let d = DifferentiatorConfig::HighGain {
            params: HgParams::new(2.0, 1.0, 1e-3).unwrap(),
            method: Method::Euler,
            quad_tolerance: 1e-8,
        };
        let mut s = zero_scenario(d);
        s.signal = SignalSpec::noise_free(
            vec![Term::Sine {
                amplitude: 1.0,
                omega: 3.0,
            }],
            9.0,
            9.0,
        )
        .unwrap();
        s.dt = 0.01;
        s.horizon = 100.0;
        match run(&s) {
            Err(Error::Divergence { time }) => assert!(time > 0.0 && time < 100.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn identical_estimate_gives_zero_statistics() {
        let mut trace = Trace {
            dt: 0.5,
            rows: Vec::new(),
            stiff: false,
        };
        for k in 0..5 {
            trace.rows.push(TraceRow {
                t: k as f64 * 0.5,
                y: 1.0,
                chi0: 1.0,
                dchi0_true: 3.0,
                estimate_x1: 1.0,
                estimate_dx: 3.0,
                error: 0.0,
            });
        }
        assert_eq!(steady_statistics(&trace, 1.0).unwrap(), (0.0, 0.0, 3));
        assert_eq!(
            steady_statistics(&trace, 5.0),
            Err(Error::EmptySettleWindow)
        );
    }

    #[test]
    fn invalid_overrides() {
        let s = builtin_scenario("HG-1").unwrap();
        assert!(s.clone().with_dt(0.0).is_err());
        assert!(s.clone().with_horizon(1e-5).is_err());
        assert!(s.clone().with_settle_fraction(1.0).is_err());
        assert!(s.clone().with_eps_gain(-0.1).is_err());
        assert!(builtin_scenario("SLM-1")
            .unwrap()
            .with_eps_gain(0.1)
            .is_err());
    }
}
