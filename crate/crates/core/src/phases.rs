//! Total / dynamic / geometric phase decomposition of cyclic evolutions, and
//! the signed solid angle of closed Bloch paths.
//!
//! Signs follow `U = exp(−iHt)`: the dynamic phase is `−∫⟨H⟩dt` and for a
//! spin-½ the geometric phase equals `−Ω/2 (mod 2π)`, where `Ω` is positive
//! for loops traversed counter-clockwise when seen from outside the sphere.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{StateVector, Trajectory};
use crate::pulses::{Frame, Schedule, Segment};

pub const CYCLIC_TOL: f64 = 1e-9;
const CLOSURE_TOL: f64 = 1e-6;
const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Accounting {
    /// Pulses are frame redefinitions; only free precession is integrated.
    ControlFrame,
    /// Pulses are physical and carry their own dynamic phase.
    Physical,
}

impl Accounting {
    pub fn name(self) -> &'static str {
        match self {
            Accounting::ControlFrame => "control_frame",
            Accounting::Physical => "physical",
        }
    }
}

impl From<Frame> for Accounting {
    fn from(frame: Frame) -> Self {
        match frame {
            Frame::Control => Accounting::ControlFrame,
            Frame::Rotating => Accounting::Physical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub total: f64,
    pub dynamic_free: f64,
    pub dynamic_pulse: f64,
    pub geometric: f64,
    pub solid_angle: f64,
    pub cyclicity_defect: f64,
    pub accounting: Accounting,
}

/// Wraps into `(−π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TWO_PI);
    if r > PI {
        r - TWO_PI
    } else {
        r
    }
}

/// Distance between two phases on the circle.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}

/// `arg⟨ψ0|ψT⟩` for a cyclic pair.
pub fn total_phase(psi0: &StateVector, psi_t: &StateVector) -> Result<f64> {
    let overlap = psi0.inner(psi_t);
    if overlap.norm() < 1.0 - CYCLIC_TOL {
        return Err(Error::NotCyclic {
            overlap: overlap.norm(),
        });
    }
    Ok(wrap_phase(overlap.arg()))
}

/// `−∫⟨ψ|H|ψ⟩dt` by the trapezoid rule, split into free and pulse parts.
/// Instantaneous pulses integrate their generator over the arc parameter.
pub fn dynamic_phase(traj: &Trajectory, s: &Schedule) -> Result<(f64, f64)> {
    let n = traj.samples_per_segment;
    if s.segments.is_empty() {
        return if traj.len() == 1 {
            Ok((0.0, 0.0))
        } else {
            Err(Error::MismatchedTrajectory(
                "empty schedule but multi-sample trajectory".into(),
            ))
        };
    }
    if n < 2 || traj.len() != n * s.segments.len() {
        return Err(Error::MismatchedTrajectory(format!(
            "{} samples for {} segments at {} per segment",
            traj.len(),
            s.segments.len(),
            n
        )));
    }
    let (mut free, mut pulse) = (0.0, 0.0);
    for (k, seg) in s.segments.iter().enumerate() {
        let range = k * n..(k + 1) * n;
        if traj.segment_index[range.clone()].iter().any(|&i| i != Some(k)) {
            return Err(Error::MismatchedTrajectory(format!(
                "samples of segment {k} are out of place"
            )));
        }
        let op = seg.operator();
        if traj.states[range.start].dim() != op.dim() {
            return Err(Error::MismatchedTrajectory(
                "state and operator dimensions differ".into(),
            ));
        }
        let span = match seg {
            Segment::Timed { duration, .. } => *duration,
            Segment::Instant { .. } => 1.0,
        };
        let step = span / (n - 1) as f64;
        let energies: Vec<f64> = traj.states[range]
            .iter()
            .map(|psi| op.expectation(psi.amplitudes()).re)
            .collect();
        let integral = step * (energies.iter().sum::<f64>() - 0.5 * (energies[0] + energies[n - 1]));
        match seg.label() {
            crate::pulses::SegmentLabel::Free => free -= integral,
            crate::pulses::SegmentLabel::Pulse => pulse -= integral,
        }
    }
    Ok((free, pulse))
}

/// Aharonov–Anandan decomposition of a cyclic trajectory.
pub fn aa_phase(traj: &Trajectory, s: &Schedule) -> Result<PhaseReport> {
    let overlap = traj.first_state().inner(traj.last_state()).norm();
    let total = total_phase(traj.first_state(), traj.last_state())?;
    let (dynamic_free, dynamic_pulse) = dynamic_phase(traj, s)?;
    Ok(PhaseReport {
        total,
        dynamic_free,
        dynamic_pulse,
        geometric: wrap_phase(total - dynamic_free - dynamic_pulse),
        solid_angle: solid_angle(&traj.bloch_a)?,
        cyclicity_defect: (1.0 - overlap).max(0.0),
        accounting: s.frame.into(),
    })
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = dot(v, v).sqrt();
    (n > 0.0 && n.is_finite()).then(|| v.map(|x| x / n))
}

/// Signed area of the geodesic triangle `(c, a, b)` (Van Oosterom–Strackee).
fn triangle_area(c: [f64; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
    let num = dot(c, cross(a, b));
    let den = 1.0 + dot(c, a) + dot(a, b) + dot(b, c);
    2.0 * num.atan2(den)
}

/// Fan apex for the triangulation. The normalized mean direction is tried
/// first; a fixed set of axes and diagonals backs it up. The candidate
/// farthest from both the path and its antipodes wins, earlier candidates
/// winning ties. The choice depends only on the point set, so reversing a
/// path exactly negates its area.
fn fan_apex(points: &[[f64; 3]]) -> [f64; 3] {
    let mut candidates: Vec<[f64; 3]> = Vec::with_capacity(16);
    let mean = points
        .iter()
        .fold([0.0; 3], |acc, p| [acc[0] + p[0], acc[1] + p[1], acc[2] + p[2]]);
    let mean = mean.map(|x| x / points.len() as f64);
    if dot(mean, mean).sqrt() >= 1e-6 {
        let m = normalize(mean).unwrap();
        candidates.push(m);
        candidates.push(m.map(|x| -x));
    }
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let mut v = [0.0; 3];
            v[axis] = sign;
            candidates.push(v);
        }
    }
    let d = 1.0 / 3f64.sqrt();
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                candidates.push([sx * d, sy * d, sz * d]);
            }
        }
    }
    let clearance = |c: [f64; 3]| {
        points
            .iter()
            .map(|&p| 1.0 - dot(c, p).abs())
            .fold(f64::INFINITY, f64::min)
    };
    let mut best = candidates[0];
    let mut best_clear = clearance(best);
    for &c in &candidates[1..] {
        let cl = clearance(c);
        if cl > best_clear {
            best = c;
            best_clear = cl;
        }
    }
    best
}

/// Signed solid angle enclosed by a closed path of unit vectors, reported in
/// `[−2π, 2π]` (full-hemisphere loops keep their orientation sign).
pub fn solid_angle(closed_path: &[[f64; 3]]) -> Result<f64> {
    if closed_path.len() < 2 {
        return Ok(0.0);
    }
    let first = closed_path[0];
    let last = closed_path[closed_path.len() - 1];
    let gap = dot(
        [first[0] - last[0], first[1] - last[1], first[2] - last[2]],
        [first[0] - last[0], first[1] - last[1], first[2] - last[2]],
    )
    .sqrt();
    if gap > CLOSURE_TOL {
        return Err(Error::OpenPath { gap });
    }
    let points: Vec<[f64; 3]> = closed_path
        .iter()
        .enumerate()
        .map(|(i, &p)| normalize(p).ok_or(Error::DegenerateStep { index: i }))
        .collect::<Result<_>>()?;
    for (i, w) in points.windows(2).enumerate() {
        if dot(w[0], w[1]) <= 0.0 {
            return Err(Error::DegenerateStep { index: i });
        }
    }
    let apex = fan_apex(&points);
    let mut total: f64 = points.windows(2).map(|w| triangle_area(apex, w[0], w[1])).sum();
    total += triangle_area(apex, points[points.len() - 1], points[0]);

    let four_pi = 4.0 * PI;
    while total > TWO_PI + 1e-9 {
        total -= four_pi;
    }
    while total < -TWO_PI - 1e-9 {
        total += four_pi;
    }
    Ok(total)
}
