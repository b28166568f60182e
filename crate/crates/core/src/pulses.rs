//! Pulse sequences acting on qubit `a` and their realization as
//! piecewise-constant schedules.
//!
//! A rotation `(α)^n` is the unitary `exp(−iα(n·σ)/2)`. Two realizations are
//! offered: the rotating frame, where pulses are physical (instantaneous
//! kicks or finite hard pulses with the conditional field left on), and the
//! control (toggling) frame, where instantaneous pulses are absorbed into
//! the frame and only tilt the free-precession axis.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{expm_pauli, pauli_compose, sigma_dot, Operator, PauliCoeffs};
use crate::system::{conditional_field, ControlState, SpinPairParams};

const AXIS_NORM_TOL: f64 = 1e-12;
const FRAME_CLOSURE_TOL: f64 = 1e-12;

pub const X_AXIS: [f64; 3] = [1.0, 0.0, 0.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseModel {
    Instantaneous,
    /// Constant resonant drive of amplitude `rf_amplitude` (rad/s).
    Hard {
        rf_amplitude: f64,
    },
}

impl PulseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PulseModel::Instantaneous => Ok(()),
            PulseModel::Hard { rf_amplitude } if rf_amplitude > 0.0 && rf_amplitude.is_finite() => Ok(()),
            PulseModel::Hard { rf_amplitude } => Err(Error::InvalidParams(format!(
                "rf amplitude must be positive and finite, got {rf_amplitude}"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PulseModel::Instantaneous => "instantaneous",
            PulseModel::Hard { .. } => "hard",
        }
    }
}

/// Rotations always address qubit `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PulseEvent {
    Rotation {
        axis: [f64; 3],
        angle: f64,
        model: PulseModel,
    },
    Delay {
        duration: f64,
    },
}

impl PulseEvent {
    pub fn x_rotation(angle: f64) -> Self {
        PulseEvent::Rotation {
            axis: X_AXIS,
            angle,
            model: PulseModel::Instantaneous,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PulseEvent::Rotation { axis, angle, model } => {
                let norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
                if !norm.is_finite() || (norm - 1.0).abs() > AXIS_NORM_TOL {
                    return Err(Error::InvalidParams(format!(
                        "rotation axis must be a unit vector, |n| = {norm}"
                    )));
                }
                if !angle.is_finite() {
                    return Err(Error::InvalidParams("rotation angle must be finite".into()));
                }
                model.validate()
            }
            PulseEvent::Delay { duration } => {
                if duration > 0.0 && duration.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParams(format!("delay must be positive, got {duration}")))
                }
            }
        }
    }
}

/// Unitary of the rotation `(angle)^axis`.
pub fn rotation_unitary(axis: [f64; 3], angle: f64) -> Operator {
    let [x, y, z] = axis;
    expm_pauli(PauliCoeffs::new(0.0, 0.5 * x, 0.5 * y, 0.5 * z), angle)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub theta: f64,
    pub tau: f64,
    pub events: Vec<PulseEvent>,
}

impl PulseSequence {
    pub fn validate(&self) -> Result<()> {
        self.events.iter().try_for_each(PulseEvent::validate)
    }

    pub fn rotation_angles(&self) -> Vec<f64> {
        self.events
            .iter()
            .filter_map(|e| match e {
                PulseEvent::Rotation { angle, .. } => Some(*angle),
                PulseEvent::Delay { .. } => None,
            })
            .collect()
    }

    pub fn is_instantaneous(&self) -> bool {
        self.events.iter().all(|e| {
            !matches!(
                e,
                PulseEvent::Rotation {
                    model: PulseModel::Hard { .. },
                    ..
                }
            )
        })
    }

    pub fn total_delay(&self) -> f64 {
        self.events
            .iter()
            .map(|e| match e {
                PulseEvent::Delay { duration } => *duration,
                PulseEvent::Rotation { .. } => 0.0,
            })
            .sum()
    }

    /// Same sequence with every rotation realized by `model`.
    pub fn with_model(mut self, model: PulseModel) -> Self {
        for e in &mut self.events {
            if let PulseEvent::Rotation { model: m, .. } = e {
                *m = model;
            }
        }
        self
    }

    /// Scales every delay by `factor`.
    pub fn with_scaled_delays(mut self, factor: f64) -> Self {
        for e in &mut self.events {
            if let PulseEvent::Delay { duration } = e {
                *duration *= factor;
            }
        }
        self
    }

    /// Adds `offset` to every rotation angle.
    pub fn with_angle_offset(mut self, offset: f64) -> Self {
        for e in &mut self.events {
            if let PulseEvent::Rotation { angle, .. } = e {
                *angle += offset;
            }
        }
        self
    }
}

/// `(−θ)^x → τ → [−(π−2θ)]^x → τ → (π−θ)^x` with `τ = π/(2J)`.
pub fn aa_cnot_sequence(theta: f64, p: &SpinPairParams) -> Result<PulseSequence> {
    p.validate()?;
    if !(0.0..FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidParams(format!("theta must lie in [0, π/2), got {theta}")));
    }
    let tau = p.tau();
    Ok(PulseSequence {
        theta,
        tau,
        events: vec![
            PulseEvent::x_rotation(-theta),
            PulseEvent::Delay { duration: tau },
            PulseEvent::x_rotation(-(PI - 2.0 * theta)),
            PulseEvent::Delay { duration: tau },
            PulseEvent::x_rotation(PI - theta),
        ],
    })
}

/// Signed sum of the rotation angles; all rotations must share one axis.
pub fn net_rotation_angle(seq: &PulseSequence) -> Result<f64> {
    let mut axis: Option<[f64; 3]> = None;
    let mut total = 0.0;
    for e in &seq.events {
        if let PulseEvent::Rotation { axis: n, angle, .. } = e {
            match axis {
                None => axis = Some(*n),
                Some(first) => {
                    let diff = first.iter().zip(n).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    if diff > AXIS_NORM_TOL {
                        return Err(Error::MixedAxes);
                    }
                }
            }
            total += angle;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Rotating,
    Control,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentLabel {
    Free,
    Pulse,
}

impl SegmentLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SegmentLabel::Free => "free",
            SegmentLabel::Pulse => "pulse",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Segment {
    /// Constant Hamiltonian held for `duration`.
    Timed {
        hamiltonian: Operator,
        duration: f64,
        label: SegmentLabel,
    },
    /// Zero-duration pulse with effect `exp(−i·generator)`. The generator is
    /// the pulse Hamiltonian integrated over its (vanishing) duration, so it
    /// still carries the pulse's dynamic phase.
    Instant { generator: Operator },
}

impl Segment {
    pub fn label(&self) -> SegmentLabel {
        match self {
            Segment::Timed { label, .. } => *label,
            Segment::Instant { .. } => SegmentLabel::Pulse,
        }
    }

    pub fn duration(&self) -> f64 {
        match self {
            Segment::Timed { duration, .. } => *duration,
            Segment::Instant { .. } => 0.0,
        }
    }

    pub fn operator(&self) -> &Operator {
        match self {
            Segment::Timed { hamiltonian, .. } => hamiltonian,
            Segment::Instant { generator } => generator,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub segments: Vec<Segment>,
    pub frame: Frame,
}

impl Schedule {
    pub fn new(frame: Frame) -> Self {
        Schedule {
            segments: Vec::new(),
            frame,
        }
    }

    /// Dimension of the segment operators; `None` for an empty schedule.
    pub fn dim(&self) -> Option<usize> {
        self.segments.first().map(|s| s.operator().dim())
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }

    pub fn free_duration(&self) -> f64 {
        self.segments
            .iter()
            .filter(|s| s.label() == SegmentLabel::Free)
            .map(Segment::duration)
            .sum()
    }
}

/// Physical realization in the frame rotating at `ω_a′`.
pub fn realize_rotating(seq: &PulseSequence, p: &SpinPairParams, b: ControlState) -> Result<Schedule> {
    seq.validate()?;
    let field = pauli_compose(conditional_field(p, b)?);
    let mut schedule = Schedule::new(Frame::Rotating);
    for event in &seq.events {
        let segment = match *event {
            PulseEvent::Rotation {
                axis,
                angle,
                model: PulseModel::Instantaneous,
            } => Segment::Instant {
                generator: sigma_dot(axis).scale_re(0.5 * angle),
            },
            PulseEvent::Rotation {
                axis,
                angle,
                model: PulseModel::Hard { rf_amplitude },
            } => {
                let drive = sigma_dot(axis).scale_re(0.5 * rf_amplitude * angle.signum());
                Segment::Timed {
                    hamiltonian: &drive + &field,
                    duration: angle.abs() / rf_amplitude,
                    label: SegmentLabel::Pulse,
                }
            }
            PulseEvent::Delay { duration } => Segment::Timed {
                hamiltonian: field.clone(),
                duration,
                label: SegmentLabel::Free,
            },
        };
        schedule.segments.push(segment);
    }
    Ok(schedule)
}

/// Realization in the toggling frame that follows the pulses. Each delay
/// carries the conditional field conjugated by the inverse of all pulses
/// applied so far, i.e. precession about the tilted axis `ẑ_k`.
pub fn realize_control_frame(seq: &PulseSequence, p: &SpinPairParams, b: ControlState) -> Result<Schedule> {
    seq.validate()?;
    if !seq.is_instantaneous() {
        return Err(Error::IncompatibleAccounting {
            accounting: "control_frame",
            reason: "finite-duration pulses",
        });
    }
    let field = pauli_compose(conditional_field(p, b)?);
    let mut frame = Operator::identity(2);
    let mut schedule = Schedule::new(Frame::Control);
    for event in &seq.events {
        match *event {
            PulseEvent::Rotation { axis, angle, .. } => {
                frame = &rotation_unitary(axis, angle) * &frame;
            }
            PulseEvent::Delay { duration } => {
                let tilted = &(&frame.dagger() * &field) * &frame;
                schedule.segments.push(Segment::Timed {
                    hamiltonian: tilted.hermitian_part(),
                    duration,
                    label: SegmentLabel::Free,
                });
            }
        }
    }
    let defect = frame.max_abs_diff(&Operator::identity(2));
    if defect > FRAME_CLOSURE_TOL {
        return Err(Error::NonClosingFrame { defect });
    }
    Ok(schedule)
}
