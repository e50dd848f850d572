//! CSV trace and JSON metrics files.
//!
//! Numbers are written as `{:.16e}` (17 significant digits), which parses back
//! to the identical `f64`. Average-system traces carry an extra `system` column
//! with the value `average`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{OmegaError, TheoryReport};
use crate::error::{Error, Result};
use crate::estimator::GradientEstimate;
use crate::sim::{RunMetrics, SimulationTrace, System, TraceRow};
use crate::trigger::Event;

pub const TRACE_HEADER: &str = "t,x,y,theta,xhat,yhat,thetahat,Q,G1,G2,G3,u1,u2,xi,event";
const NUMERIC_COLUMNS: usize = 14;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_owned(), source }
}

/// Writes the trace as CSV to any writer.
pub fn write_trace<W: Write>(trace: &SimulationTrace, mut w: W) -> std::io::Result<()> {
    let average = trace.system == System::Average;
    if average {
        writeln!(w, "{TRACE_HEADER},system")?;
    } else {
        writeln!(w, "{TRACE_HEADER}")?;
    }
    for r in &trace.rows {
        let vals = [
            r.t, r.x, r.y, r.theta, r.xhat, r.yhat, r.thetahat, r.q, r.g[0], r.g[1], r.g[2], r.u[0], r.u[1], r.xi,
        ];
        for v in vals {
            write!(w, "{v:.16e},")?;
        }
        write!(w, "{}", u8::from(r.event))?;
        if average {
            write!(w, ",average")?;
        }
        writeln!(w)?;
    }
    w.flush()
}

pub fn export_trace(trace: &SimulationTrace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    write_trace(trace, BufWriter::new(file)).map_err(io_err(path))
}

/// Parses a trace written by [`export_trace`].
///
/// The event log is rebuilt from flagged rows; `dt` is the spacing of the first
/// two rows (zero for shorter traces).
pub fn read_trace(path: impl AsRef<Path>) -> Result<SimulationTrace> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    let malformed = |line: usize, reason: String| Error::MalformedTrace {
        path: path.to_owned(),
        reason: format!("line {line}: {reason}"),
    };

    let mut lines = BufReader::new(file).lines();
    let header = lines.next().ok_or_else(|| malformed(1, "empty file".into()))?.map_err(io_err(path))?;
    let system = match header.strip_prefix(TRACE_HEADER) {
        Some("") => System::Full,
        Some(",system") => System::Average,
        _ => return Err(malformed(1, format!("unexpected header {header:?}"))),
    };

    let mut rows = Vec::new();
    let mut events = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line.map_err(io_err(path))?;
        let lineno = idx + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let expected = NUMERIC_COLUMNS + 1 + usize::from(system == System::Average);
        if fields.len() != expected {
            return Err(malformed(lineno, format!("{} fields, expected {expected}", fields.len())));
        }
        let mut v = [0.0; NUMERIC_COLUMNS];
        for (o, f) in v.iter_mut().zip(&fields) {
            *o = f.parse().map_err(|_| malformed(lineno, format!("bad number {f:?}")))?;
        }
        let event = match fields[NUMERIC_COLUMNS] {
            "0" => false,
            "1" => true,
            other => return Err(malformed(lineno, format!("bad event flag {other:?}"))),
        };
        if system == System::Average && fields[NUMERIC_COLUMNS + 1] != "average" {
            return Err(malformed(lineno, "system column must be \"average\"".into()));
        }
        let row = TraceRow {
            t: v[0],
            x: v[1],
            y: v[2],
            theta: v[3],
            xhat: v[4],
            yhat: v[5],
            thetahat: v[6],
            q: v[7],
            g: [v[8], v[9], v[10]],
            u: [v[11], v[12]],
            xi: v[13],
            event,
        };
        if event {
            events.push(Event { time: row.t, latched: GradientEstimate(row.g), control: row.u });
        }
        rows.push(row);
    }
    let dt = if rows.len() >= 2 { rows[1].t - rows[0].t } else { 0.0 };
    Ok(SimulationTrace { system, dt, rows, events })
}

/// Flat metrics record with stable key names; absent values serialize as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub num_steps: usize,
    pub num_events: usize,
    pub min_inter_event: Option<f64>,
    pub mean_inter_event: Option<f64>,
    pub final_error_norm: f64,
    pub final_position_error: f64,
    pub final_heading_error: f64,
    pub tau_star: Option<f64>,
    pub alpha_min: Option<f64>,
    pub hurwitz: Option<bool>,
    pub decay_violations: Option<usize>,
    pub averaging_sup_error: Option<Vec<OmegaError>>,
    pub theory: Option<TheoryReport>,
}

impl From<&RunMetrics> for MetricsRecord {
    fn from(m: &RunMetrics) -> Self {
        let th = m.theory.as_ref();
        MetricsRecord {
            num_steps: m.num_steps,
            num_events: m.num_events,
            min_inter_event: m.min_inter_event,
            mean_inter_event: m.mean_inter_event,
            final_error_norm: m.final_error_norm,
            final_position_error: m.final_position_error,
            final_heading_error: m.final_heading_error,
            tau_star: th.map(|t| t.tau_star),
            alpha_min: th.and_then(|t| t.alpha_min),
            hurwitz: th.map(|t| t.hurwitz),
            decay_violations: th.and_then(|t| t.envelope_violations),
            averaging_sup_error: th.map(|t| t.averaging_sup_error.clone()).filter(|v| !v.is_empty()),
            theory: m.theory.clone(),
        }
    }
}

pub fn metrics_json(m: &RunMetrics) -> String {
    serde_json::to_string_pretty(&MetricsRecord::from(m)).expect("metrics serialize")
}

pub fn export_metrics(m: &RunMetrics, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, metrics_json(m) + "\n").map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64, event: bool) -> TraceRow {
        TraceRow {
            t,
            x: 0.1 + 0.2,
            y: -1.0 / 3.0,
            theta: std::f64::consts::PI,
            xhat: 1e-300,
            yhat: -0.0,
            thetahat: 123456.789,
            q: 7.0,
            g: [f64::MIN_POSITIVE, 2.5, -1e10],
            u: [0.1, -0.7],
            xi: -3.3e-5,
            event,
        }
    }

    fn trace(system: System, rows: Vec<TraceRow>) -> SimulationTrace {
        let events = rows
            .iter()
            .filter(|r| r.event)
            .map(|r| Event { time: r.t, latched: GradientEstimate(r.g), control: r.u })
            .collect();
        SimulationTrace { system, dt: 1e-4, rows, events }
    }

    fn to_string(t: &SimulationTrace) -> String {
        let mut buf = Vec::new();
        write_trace(t, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_trace_is_header_only() {
        assert_eq!(to_string(&trace(System::Full, vec![])), format!("{TRACE_HEADER}\n"));
        assert_eq!(to_string(&trace(System::Average, vec![])), format!("{TRACE_HEADER},system\n"));
    }

    #[test]
    fn one_row() {
        let s = to_string(&trace(System::Full, vec![row(0.0, true)]));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("0.0000000000000000e0,3.0000000000000004e-1,"), "{}", lines[1]);
        assert!(lines[1].ends_with(",1"));
        assert_eq!(lines[1].split(',').count(), 15);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        for system in [System::Full, System::Average] {
            let t = trace(system, vec![row(0.0, true), row(1e-4, false), row(2e-4, true)]);
            let path = dir.path().join("trace.csv");
            export_trace(&t, &path).unwrap();
            let back = read_trace(&path).unwrap();
            assert_eq!(back.system, system);
            assert_eq!(back.rows.len(), 3);
            for (a, b) in t.rows.iter().zip(&back.rows) {
                assert_eq!(a.yhat.to_bits(), b.yhat.to_bits());
                assert_eq!(a, b);
            }
            assert_eq!(back.events, t.events);
        }
    }

    #[test]
    fn malformed_input_reports_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, format!("{TRACE_HEADER}\n1,2,3\n")).unwrap();
        let err = read_trace(&path).unwrap_err();
        assert!(err.to_string().contains("bad.csv") && err.to_string().contains("line 2"), "{err}");
        let err = read_trace(dir.path().join("missing.csv")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        let err = export_trace(&trace(System::Full, vec![]), dir.path().join("no/such/dir.csv")).unwrap_err();
        assert!(err.to_string().contains("no/such/dir.csv"));
    }

    #[test]
    fn metrics_keys_are_stable() {
        let m = RunMetrics {
            num_steps: 10,
            num_events: 3,
            min_inter_event: Some(0.1),
            mean_inter_event: None,
            final_error_norm: 0.5,
            final_position_error: 0.4,
            final_heading_error: 0.3,
            theory: None,
        };
        let v: serde_json::Value = serde_json::from_str(&metrics_json(&m)).unwrap();
        for key in [
            "num_steps",
            "num_events",
            "min_inter_event",
            "mean_inter_event",
            "final_error_norm",
            "tau_star",
            "alpha_min",
            "hurwitz",
            "decay_violations",
            "averaging_sup_error",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!(v["mean_inter_event"].is_null());
        assert!(v["tau_star"].is_null());
        assert_eq!(v["num_events"], 3);
    }
}
