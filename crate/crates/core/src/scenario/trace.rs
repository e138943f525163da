use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 7] = [
    "t",
    "y",
    "chi0",
    "dchi0_true",
    "estimate_x1",
    "estimate_dx",
    "error",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    /// Measurement fed to the differentiator.
    pub y: f64,
    pub chi0: f64,
    pub dchi0_true: f64,
    /// Estimate of the base signal (`z0_hat` or `x1_hat`).
    pub estimate_x1: f64,
    /// Derivative estimate (`v` or `x2_hat`).
    pub estimate_dx: f64,
    /// `estimate_dx - dchi0_true`
    pub error: f64,
}

/// Time-indexed record of one scenario run, sampled every `dt`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub dt: f64,
    pub rows: Vec<TraceRow>,
    /// Some step exceeded the explicit-integrator stability limit.
    pub stiff: bool,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Writes the trace as CSV. Floats use the shortest representation that
    /// round-trips, so the file carries full double precision.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        let mut fields: [String; 7] = Default::default();
        for r in &self.rows {
            for (slot, v) in fields.iter_mut().zip([
                r.t,
                r.y,
                r.chi0,
                r.dchi0_true,
                r.estimate_x1,
                r.estimate_dx,
                r.error,
            ]) {
                slot.clear();
                write!(slot, "{v:e}").expect("write to String");
            }
            w.write_record(&fields)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        if header != CSV_HEADER {
            return Err(Error::Io(format!("unexpected trace header {header:?}")));
        }
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record?;
            let mut v = [0.0; 7];
            for (slot, field) in v.iter_mut().zip(record.iter()) {
                *slot = field
                    .parse()
                    .map_err(|e| Error::Io(format!("bad number `{field}`: {e}")))?;
            }
            rows.push(TraceRow {
                t: v[0],
                y: v[1],
                chi0: v[2],
                dchi0_true: v[3],
                estimate_x1: v[4],
                estimate_dx: v[5],
                error: v[6],
            });
        }
        let dt = match rows.as_slice() {
            [a, b, ..] => b.t - a.t,
            _ => 0.0,
        };
        Ok(Self {
            dt,
            rows,
            stiff: false,
        })
    }
}

/// Steady-state error statistics and the theoretical bound verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scenario: String,
    pub differentiator: &'static str,
    pub dt: f64,
    pub horizon: f64,
    pub settle_start: f64,
    pub steady_samples: usize,
    pub steady_sup_error: f64,
    pub rmse_steady: f64,
    pub theoretical_bound: Option<f64>,
    /// `None` when no bound applies.
    pub bound_satisfied: Option<bool>,
    pub stiff: bool,
}

impl RunReport {
    /// `key: value` lines; absent values are written as `n/a`.
    pub fn to_text(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "n/a".to_owned());
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k}: {v}");
        };
        line("scenario", self.scenario.clone());
        line("differentiator", self.differentiator.to_owned());
        line("dt", format!("{}", self.dt));
        line("horizon", format!("{}", self.horizon));
        line("settle_start", format!("{}", self.settle_start));
        line("steady_samples", self.steady_samples.to_string());
        line("steady_sup_error", format!("{}", self.steady_sup_error));
        line("rmse_steady", format!("{}", self.rmse_steady));
        line(
            "theoretical_bound",
            opt(self.theoretical_bound.map(|b| format!("{b}"))),
        );
        line(
            "bound_satisfied",
            opt(self.bound_satisfied.map(|b| b.to_string())),
        );
        line("stability_warning", self.stiff.to_string());
        s
    }

    /// Passing runs are those that satisfy their bound or have none.
    pub fn passed(&self) -> bool {
        self.bound_satisfied.unwrap_or(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn csv_round_trip(values in proptest::collection::vec(proptest::num::f64::NORMAL, 7..70)) {
            let rows: Vec<TraceRow> = values
                .chunks_exact(7)
                .enumerate()
                .map(|(i, c)| TraceRow {
                    t: i as f64 * 0.5,
                    y: c[1],
                    chi0: c[2],
                    dchi0_true: c[3],
                    estimate_x1: c[4],
                    estimate_dx: c[5],
                    error: c[6],
                })
                .collect();
            let trace = Trace { dt: 0.5, rows, stiff: false };
            let mut buf = Vec::new();
            trace.write_csv(&mut buf).unwrap();
            let back = Trace::read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back.rows, trace.rows);
        }
    }

    #[test]
    fn header_line() {
        let mut buf = Vec::new();
        Trace::default().write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "t,y,chi0,dchi0_true,estimate_x1,estimate_dx,error\n"
        );
    }

    #[test]
    fn report_text() {
        let r = RunReport {
            scenario: "X".into(),
            differentiator: "high-gain",
            dt: 1e-4,
            horizon: 20.0,
            settle_start: 10.0,
            steady_samples: 3,
            steady_sup_error: 0.25,
            rmse_steady: 0.125,
            theoretical_bound: None,
            bound_satisfied: None,
            stiff: false,
        };
        let text = r.to_text();
        assert!(text.contains("theoretical_bound: n/a\n"));
        assert!(text.contains("steady_sup_error: 0.25\n"));
        assert!(r.passed());
    }
}
