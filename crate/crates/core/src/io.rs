//! Serialization helpers. Floats are written with 17 significant digits so
//! that values round-trip exactly.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

use crate::evolution::Trajectory;
use crate::gate::{SelectivityRow, SweepRow};

/// `1.2345678901234567e-3` style, 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

struct RoundTrip;

impl Formatter for RoundTrip {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON with a trailing newline. Non-finite floats become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, RoundTrip);
    value.serialize(&mut ser).expect("in-memory JSON serialization");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON is UTF-8")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory CSV flush");
    String::from_utf8(bytes).expect("CSV is UTF-8")
}

/// Columns: `t`, `re{k},im{k}` per amplitude, qubit `a` Bloch vector, qubit `b`
/// Bloch vector for two-qubit runs, then the segment label.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let dim = traj.states.first().map_or(0, |s| s.dim());
    let mut header = vec!["t".to_string()];
    for k in 0..dim {
        header.push(format!("re{k}"));
        header.push(format!("im{k}"));
    }
    header.extend(["bxa", "bya", "bza"].map(String::from));
    if traj.bloch_b.is_some() {
        header.extend(["bxb", "byb", "bzb"].map(String::from));
    }
    header.push("label".into());
    w.write_record(&header).unwrap();
    for i in 0..traj.len() {
        let mut row = vec![fmt_f64(traj.times[i])];
        for c in traj.states[i].amplitudes() {
            row.push(fmt_f64(c.re));
            row.push(fmt_f64(c.im));
        }
        row.extend(traj.bloch_a[i].map(fmt_f64));
        if let Some(b) = &traj.bloch_b {
            row.extend(b[i].map(fmt_f64));
        }
        row.push(traj.labels[i].as_str().into());
        w.write_record(&row).unwrap();
    }
    finish(w)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["value", "gamma", "fidelity_cnot", "solid_angle"])
        .unwrap();
    for r in rows {
        w.write_record([
            fmt_f64(r.value),
            fmt_f64(r.gamma),
            fmt_f64(r.fidelity_cnot),
            opt(r.solid_angle),
        ])
        .unwrap();
    }
    finish(w)
}

pub fn selectivity_csv(rows: &[SelectivityRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["separation", "b_disturbance", "fidelity_cnot"])
        .unwrap();
    for r in rows {
        w.write_record([
            fmt_f64(r.separation),
            fmt_f64(r.b_disturbance),
            fmt_f64(r.fidelity_cnot),
        ])
        .unwrap();
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, std::f64::consts::PI, 1e300, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn json_uses_full_precision() {
        let s = to_json(&serde_json::json!({"x": 0.1, "n": 3, "bad": f64::NAN}));
        assert!(s.ends_with('\n'));
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["x"].as_f64().unwrap(), 0.1);
        assert_eq!(v["n"], 3);
        assert!(v["bad"].is_null());
        assert!(s.contains("1.0000000000000001e-1"));
    }

    #[test]
    fn sweep_csv_blank_for_missing_area() {
        let rows = [SweepRow {
            value: 0.5,
            gamma: 1.0,
            fidelity_cnot: 0.25,
            solid_angle: None,
        }];
        let s = sweep_csv(&rows);
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("value,gamma,fidelity_cnot,solid_angle"));
        assert!(lines.next().unwrap().ends_with(','));
    }
}
