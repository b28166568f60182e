//! Integration of schedules into propagators and sampled trajectories.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{nearest_unitary, sigma_x, sigma_y, sigma_z, HermitianEigen, Operator, HERMITIAN_TOL};
use crate::pulses::{Schedule, Segment, SegmentLabel};

pub const DEFAULT_SAMPLES_PER_SEGMENT: usize = 2000;

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != 2 && amplitudes.len() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParams(format!("state norm is {norm}, expected 1")));
        }
        Ok(StateVector { amplitudes })
    }

    /// Normalizes before constructing.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParams(
                "cannot normalize a zero or non-finite state".into(),
            ));
        }
        Self::new(amplitudes.into_iter().map(|z| z / norm).collect())
    }

    pub fn up() -> Self {
        StateVector {
            amplitudes: vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        }
    }

    pub fn down() -> Self {
        StateVector {
            amplitudes: vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        }
    }

    /// `(|↑⟩ + |↓⟩)/√2`, Bloch vector `+x`.
    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector {
            amplitudes: vec![C64::new(h, 0.0), C64::new(h, 0.0)],
        }
    }

    /// `(|↑⟩ − |↓⟩)/√2`, Bloch vector `−x`.
    pub fn minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector {
            amplitudes: vec![C64::new(h, 0.0), C64::new(-h, 0.0)],
        }
    }

    /// `a ⊗ b` with `a` the left factor.
    pub fn product(a: &StateVector, b: &StateVector) -> Result<Self> {
        if a.dim() != 2 || b.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: a.dim().max(b.dim()),
            });
        }
        let amplitudes = a
            .amplitudes
            .iter()
            .flat_map(|x| b.amplitudes.iter().map(move |y| x * y))
            .collect();
        Ok(StateVector { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn evolve(&self, u: &Operator) -> Result<StateVector> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.dim(),
            });
        }
        Ok(StateVector {
            amplitudes: u.apply(&self.amplitudes),
        })
    }

    pub fn scale_phase(&self, phase: f64) -> StateVector {
        let w = C64::from_polar(1.0, phase);
        StateVector {
            amplitudes: self.amplitudes.iter().map(|z| z * w).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Qubit {
    A,
    B,
}

/// Partial trace over the other qubit of a two-qubit pure state.
pub fn reduced_density(psi: &StateVector, which: Qubit) -> Result<Operator> {
    if psi.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: psi.dim(),
        });
    }
    let amp = psi.amplitudes();
    let index = |keep: usize, other: usize| match which {
        Qubit::A => 2 * keep + other,
        Qubit::B => 2 * other + keep,
    };
    let mut rho = Operator::zeros(2);
    for i in 0..2 {
        for j in 0..2 {
            rho[(i, j)] = (0..2).map(|k| amp[index(i, k)] * amp[index(j, k)].conj()).sum();
        }
    }
    Ok(rho)
}

fn bloch_from_density(rho: &Operator) -> [f64; 3] {
    [sigma_x(), sigma_y(), sigma_z()].map(|s| (&s * rho).trace().re)
}

/// Bloch vector of a normalized single-qubit state.
pub fn bloch_of_state(psi: &StateVector) -> Result<[f64; 3]> {
    if psi.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: psi.dim(),
        });
    }
    let [a, b] = [psi.amplitudes[0], psi.amplitudes[1]];
    let ab = a.conj() * b;
    Ok([2.0 * ab.re, 2.0 * ab.im, a.norm_sqr() - b.norm_sqr()])
}

/// Bloch vector of a 2×2 density matrix.
pub fn bloch_of_density(rho: &Operator) -> Result<[f64; 3]> {
    if rho.dim() != 2 {
        return Err(Error::InvalidDensity(format!("dimension {} is not 2", rho.dim())));
    }
    if rho.hermiticity_defect() > HERMITIAN_TOL {
        return Err(Error::InvalidDensity("not hermitian".into()));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-12 {
        return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
    }
    let r = bloch_from_density(rho);
    let len = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    // Eigenvalues are (1 ± |r|)/2.
    if len > 1.0 + 2e-12 {
        return Err(Error::InvalidDensity(format!("negative eigenvalue, |r| = {len}")));
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub bloch_a: Vec<[f64; 3]>,
    /// Present for two-qubit trajectories.
    pub bloch_b: Option<Vec<[f64; 3]>>,
    pub labels: Vec<SegmentLabel>,
    /// Segment each sample belongs to; `None` only for the lone sample of an
    /// empty schedule.
    pub segment_index: Vec<Option<usize>>,
    pub samples_per_segment: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first_state(&self) -> &StateVector {
        &self.states[0]
    }

    pub fn last_state(&self) -> &StateVector {
        self.states.last().expect("trajectories hold at least one sample")
    }

    fn push(&mut self, t: f64, psi: StateVector, label: SegmentLabel, seg: Option<usize>) -> Result<()> {
        if psi.dim() == 2 {
            self.bloch_a.push(bloch_of_state(&psi)?);
        } else {
            let a = bloch_from_density(&reduced_density(&psi, Qubit::A)?);
            let b = bloch_from_density(&reduced_density(&psi, Qubit::B)?);
            self.bloch_a.push(a);
            self.bloch_b.get_or_insert_with(Vec::new).push(b);
        }
        self.times.push(t);
        self.states.push(psi);
        self.labels.push(label);
        self.segment_index.push(seg);
        Ok(())
    }
}

fn segment_eigen(index: usize, segment: &Segment) -> Result<HermitianEigen> {
    let op = segment.operator();
    let defect = op.hermiticity_defect();
    if defect > HERMITIAN_TOL * op.max_norm().max(1.0) {
        return Err(Error::NonHermitianSegment { index, defect });
    }
    HermitianEigen::new(op)
}

/// Exponent time for a segment: `duration` for timed segments, 1 for
/// instantaneous ones (whose generator already includes the duration).
fn segment_time(segment: &Segment) -> f64 {
    match segment {
        Segment::Timed { duration, .. } => *duration,
        Segment::Instant { .. } => 1.0,
    }
}

fn check_dims(s: &Schedule) -> Result<usize> {
    let dim = s.dim().unwrap_or(2);
    for seg in &s.segments {
        if seg.operator().dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: seg.operator().dim(),
            });
        }
    }
    Ok(dim)
}

/// Time-ordered product of the segment propagators, later segments on the
/// left. An empty schedule gives the 2×2 identity.
pub fn total_propagator(s: &Schedule) -> Result<Operator> {
    let dim = check_dims(s)?;
    s.segments
        .iter()
        .enumerate()
        .try_fold(Operator::identity(dim), |acc, (k, seg)| {
            let u = segment_eigen(k, seg)?.exp(segment_time(seg));
            Ok(&u * &acc)
        })
}

/// Samples `samples_per_segment` points per segment, endpoints included, so
/// the boundary state appears at the end of one segment and the start of the
/// next. Instantaneous segments are resolved into an arc at a fixed time.
pub fn propagate(s: &Schedule, psi0: &StateVector, samples_per_segment: usize) -> Result<Trajectory> {
    if samples_per_segment < 2 {
        return Err(Error::InvalidParams("samples_per_segment must be at least 2".into()));
    }
    let dim = check_dims(s)?;
    if !s.segments.is_empty() && psi0.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: psi0.dim(),
        });
    }

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        bloch_a: Vec::new(),
        bloch_b: None,
        labels: Vec::new(),
        segment_index: Vec::new(),
        samples_per_segment,
    };
    if s.segments.is_empty() {
        traj.push(0.0, psi0.clone(), SegmentLabel::Free, None)?;
        return Ok(traj);
    }

    let n = samples_per_segment;
    let mut t0 = 0.0;
    let mut start = psi0.clone();
    for (k, seg) in s.segments.iter().enumerate() {
        let eig = segment_eigen(k, seg)?;
        let span = segment_time(seg);
        let duration = seg.duration();
        for i in 0..n {
            let frac = i as f64 / (n - 1) as f64;
            let psi = StateVector {
                amplitudes: eig.exp_apply(frac * span, start.amplitudes()),
            };
            let t = if i == n - 1 {
                t0 + duration
            } else {
                t0 + frac * duration
            };
            traj.push(t, psi, seg.label(), Some(k))?;
        }
        t0 += duration;
        start = traj.last_state().clone();
    }
    Ok(traj)
}

/// Propagator of a time-dependent Hamiltonian over `[t0, t1]` using the
/// fourth-order two-point Gauss–Magnus step, with `ceil((t1−t0)/max_step)`
/// equal steps, projected onto the nearest unitary at the end.
pub fn integrate_time_dependent<F>(h: F, t0: f64, t1: f64, max_step: f64) -> Result<Operator>
where
    F: Fn(f64) -> Result<Operator>,
{
    if max_step.is_nan() || max_step <= 0.0 || t1.is_nan() || t0.is_nan() || t1 < t0 {
        return Err(Error::InvalidParams("need t1 >= t0 and a positive step".into()));
    }
    let steps = (((t1 - t0) / max_step).ceil() as usize).max(1);
    let dt = (t1 - t0) / steps as f64;
    let offset = 3f64.sqrt() / 6.0;
    let comm_weight = 3f64.sqrt() / 12.0 * dt * dt;
    let mut u: Option<Operator> = None;
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let h1 = h(t + (0.5 - offset) * dt)?;
        let h2 = h(t + (0.5 + offset) * dt)?;
        // Ω = −iK with K = (dt/2)(H1+H2) − i(√3/12)dt²[H2,H1].
        let avg = (&h1 + &h2).scale_re(0.5 * dt);
        let corr = h2.commutator(&h1).scale(C64::new(0.0, -comm_weight));
        let step = HermitianEigen::new(&(&avg + &corr).hermitian_part())?.exp(1.0);
        u = Some(match u {
            None => step,
            Some(acc) => &step * &acc,
        });
    }
    // Neighbouring steps share nearly the same rounding error, which would
    // otherwise build up linearly in the step count.
    Ok(nearest_unitary(&u.expect("at least one step")))
}
