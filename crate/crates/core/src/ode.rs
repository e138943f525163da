//! Fixed-step explicit integrators for two-state systems.
//!
//! The vector field is evaluated per [`Stage`] rather than per absolute
//! time, so a streaming caller can supply the measurement at the start,
//! midpoint and end of a step without the integrator knowing the clock.

use serde::{Deserialize, Serialize};

pub type State2 = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Euler,
    #[default]
    Rk4,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "euler" => Ok(Method::Euler),
            "rk4" => Ok(Method::Rk4),
            other => Err(format!("unknown integration method `{other}` (euler|rk4)")),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Euler => "euler",
            Method::Rk4 => "rk4",
        })
    }
}

/// Position inside one step of length `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Start,
    Mid,
    End,
}

impl Stage {
    pub fn offset(self, dt: f64) -> f64 {
        match self {
            Stage::Start => 0.0,
            Stage::Mid => 0.5 * dt,
            Stage::End => dt,
        }
    }
}

#[inline]
fn axpy(x: State2, h: f64, k: State2) -> State2 {
    [x[0] + h * k[0], x[1] + h * k[1]]
}

pub fn euler_step<F: Fn(Stage, State2) -> State2>(field: F, x: State2, dt: f64) -> State2 {
    axpy(x, dt, field(Stage::Start, x))
}

/// Classical fourth-order Runge-Kutta.
pub fn rk4_step<F: Fn(Stage, State2) -> State2>(field: F, x: State2, dt: f64) -> State2 {
    let k1 = field(Stage::Start, x);
    let k2 = field(Stage::Mid, axpy(x, 0.5 * dt, k1));
    let k3 = field(Stage::Mid, axpy(x, 0.5 * dt, k2));
    let k4 = field(Stage::End, axpy(x, dt, k3));
    [
        x[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        x[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

pub fn step<F: Fn(Stage, State2) -> State2>(
    method: Method,
    field: F,
    x: State2,
    dt: f64,
) -> State2 {
    match method {
        Method::Euler => euler_step(field, x, dt),
        Method::Rk4 => rk4_step(field, x, dt),
    }
}
