//! The assembled two-qubit gate and the experiments run on it.
//!
//! Qubit `b` is the control and qubit `a` the target; the gate acts on `a`
//! only in the `b = ↑` branch.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{propagate, reduced_density, total_propagator, Qubit, StateVector};
use crate::linalg::{expm_hermitian, gate_fidelity, kron, sigma_x, sigma_y, sigma_z, unitarity_defect, Operator};
use crate::phases::{solid_angle, wrap_phase, Accounting};
use crate::pulses::{
    aa_cnot_sequence, realize_control_frame, realize_rotating, rotation_unitary, PulseEvent, PulseModel, PulseSequence,
};
use crate::system::{assemble_blocks, conditional_blocks_within, lab_hamiltonian, ControlState, SpinPairParams};

/// Tolerance for structural checks on assembled propagators.
pub const GATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equivalence {
    pub global_phase: f64,
    /// Angle of `exp(−iφσz/2)` on the control, applied before the C-NOT.
    pub control_z_pre: f64,
    pub control_z_post: f64,
    /// `β` with `block_up = e^{iβ}σx`.
    pub phase_up: f64,
    /// `α` with `block_down = e^{iα}I`.
    pub phase_down: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateReport {
    pub theta: f64,
    pub accounting: Accounting,
    pub pulse_model: PulseModel,
    pub gamma: Option<f64>,
    pub fidelity_cnot: f64,
    pub equivalence: Option<Equivalence>,
    pub unitarity_defect: f64,
    pub block_up: Operator,
    pub block_down: Operator,
    pub propagator: Operator,
}

/// C-NOT with control `b` (right factor) and target `a`.
pub fn cnot() -> Operator {
    assemble_blocks(&sigma_x(), &Operator::identity(2)).unwrap()
}

/// Per-branch propagator of `seq` on qubit `a`.
pub fn branch_propagator(
    seq: &PulseSequence,
    p: &SpinPairParams,
    b: ControlState,
    accounting: Accounting,
) -> Result<Operator> {
    let schedule = match accounting {
        Accounting::ControlFrame => realize_control_frame(seq, p, b)?,
        Accounting::Physical => realize_rotating(seq, p, b)?,
    };
    total_propagator(&schedule)
}

/// Best C-NOT fidelity reachable by control-qubit phase corrections:
/// `(|Tr(U_↑†σx)| + |Tr(U_↓†)|)/4`, read from the diagonal blocks.
pub fn cnot_fidelity(u: &Operator) -> f64 {
    let up = u.submatrix(ControlState::Up.block_indices());
    let down = u.submatrix(ControlState::Down.block_indices());
    let t_up = (&up.dagger() * &sigma_x()).trace().norm();
    let t_down = down.trace().norm();
    ((t_up + t_down) / 4.0).min(1.0)
}

pub fn gate_from_sequence(seq: &PulseSequence, p: &SpinPairParams, accounting: Accounting) -> Result<GateReport> {
    if accounting == Accounting::ControlFrame && !seq.is_instantaneous() {
        return Err(Error::IncompatibleAccounting {
            accounting: "control_frame",
            reason: "finite-duration pulses",
        });
    }
    let block_up = branch_propagator(seq, p, ControlState::Up, accounting)?;
    let block_down = branch_propagator(seq, p, ControlState::Down, accounting)?;
    let propagator = assemble_blocks(&block_up, &block_down)?;
    let pulse_model = seq
        .events
        .iter()
        .find_map(|e| match e {
            PulseEvent::Rotation { model, .. } => Some(*model),
            PulseEvent::Delay { .. } => None,
        })
        .unwrap_or(PulseModel::Instantaneous);
    Ok(GateReport {
        theta: seq.theta,
        accounting,
        pulse_model,
        gamma: None,
        fidelity_cnot: cnot_fidelity(&propagator),
        equivalence: None,
        unitarity_defect: unitarity_defect(&propagator),
        block_up,
        block_down,
        propagator,
    })
}

/// Builds the scheme at `theta` and assembles the 4×4 gate.
pub fn gate_propagator(
    theta: f64,
    p: &SpinPairParams,
    model: PulseModel,
    accounting: Accounting,
) -> Result<GateReport> {
    model.validate()?;
    let seq = aa_cnot_sequence(theta, p)?.with_model(model);
    gate_from_sequence(&seq, p, accounting)
}

/// `arg⟨+|U|+⟩` without checking that `|+⟩` is an eigenvector.
pub fn plus_phase(block_up: &Operator) -> f64 {
    let plus = StateVector::plus();
    wrap_phase(block_up.expectation(plus.amplitudes()).arg())
}

/// Eigenphase of the `b = ↑` block on `|+⟩`.
pub fn conditional_geometric_phase(report: &GateReport) -> Result<f64> {
    let defect = report.block_up.commutator(&sigma_x()).max_norm();
    if defect > GATE_TOL {
        return Err(Error::NotXDiagonal { defect });
    }
    Ok(plus_phase(&report.block_up))
}

/// Fills `gamma`, `equivalence` and `fidelity_cnot`.
pub fn cnot_equivalence(mut report: GateReport) -> Result<GateReport> {
    report.gamma = conditional_geometric_phase(&report).ok();
    let up = &report.block_up;
    let down = &report.block_down;
    let alpha = down[(0, 0)].arg();
    let beta = up[(0, 1)].arg();
    let down_ok = down.approx_eq(&Operator::identity(2).scale(C64::from_polar(1.0, alpha)), GATE_TOL);
    let up_ok = up.approx_eq(&sigma_x().scale(C64::from_polar(1.0, beta)), GATE_TOL);
    let block_diag = report
        .propagator
        .commutator(&crate::system::control_sigma_z())
        .max_norm()
        <= GATE_TOL;

    if down_ok && up_ok && block_diag {
        let global = 0.5 * (alpha + beta);
        let phi = alpha - beta;
        // U = e^{ig}·(I ⊗ Rz(φ))·CNOT, so undo both before comparing.
        let rz = kron(&Operator::identity(2), &rz(phi))?;
        let corrected = (&rz.dagger() * &report.propagator).scale(C64::from_polar(1.0, -global));
        report.fidelity_cnot = gate_fidelity(&corrected, &cnot())?;
        report.equivalence = Some(Equivalence {
            global_phase: wrap_phase(global),
            control_z_pre: phi,
            control_z_post: 0.0,
            phase_up: beta,
            phase_down: alpha,
        });
    } else {
        report.fidelity_cnot = cnot_fidelity(&report.propagator);
        report.equivalence = None;
    }
    Ok(report)
}

fn rz(phi: f64) -> Operator {
    crate::linalg::expm_pauli(crate::linalg::PauliCoeffs::new(0.0, 0.0, 0.0, 0.5), phi)
}

/// Gate, conditional phase, and C-NOT equivalence in one call.
pub fn analyze_gate(theta: f64, p: &SpinPairParams, model: PulseModel, accounting: Accounting) -> Result<GateReport> {
    cnot_equivalence(gate_propagator(theta, p, model, accounting)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreaRow {
    pub j_coupling: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreaTable {
    pub theta: f64,
    pub rows: Vec<AreaRow>,
    /// `max γ − min γ` over the grid.
    pub spread: f64,
}

/// Rebuilds the scheme for each `J` (so `τ = π/(2J)` tracks it) and reports
/// the conditional phase.
pub fn area_dependence_check(theta: f64, p: &SpinPairParams, j_values: &[f64]) -> Result<AreaTable> {
    if j_values.is_empty() {
        return Err(Error::InvalidParams("empty J grid".into()));
    }
    let rows = j_values
        .iter()
        .map(|&j| {
            if j <= 0.0 || !j.is_finite() {
                return Err(Error::InvalidParams(format!("J must be positive, got {j}")));
            }
            let pj = p.with_coupling(j);
            let report = gate_propagator(theta, &pj, PulseModel::Instantaneous, Accounting::ControlFrame)?;
            Ok(AreaRow {
                j_coupling: j,
                gamma: conditional_geometric_phase(&report)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max = rows.iter().map(|r| r.gamma).fold(f64::NEG_INFINITY, f64::max);
    let min = rows.iter().map(|r| r.gamma).fold(f64::INFINITY, f64::min);
    Ok(AreaTable {
        theta,
        rows,
        spread: max - min,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Theta,
    JCoupling,
    /// Both delays scaled by `1 + ε`.
    TauError,
    /// `ε` added to every pulse angle.
    AngleError,
    /// Hard pulses of the given amplitude (rad/s).
    RfAmplitude,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub grid: Vec<f64>,
    /// Reserved for randomized perturbation modes; the current modes are
    /// deterministic and do not consume it.
    #[serde(default)]
    pub perturbation_seed: u64,
    #[serde(default = "default_samples")]
    pub samples_per_segment: usize,
}

fn default_samples() -> usize {
    crate::evolution::DEFAULT_SAMPLES_PER_SEGMENT
}

impl SweepSpec {
    pub fn new(parameter: SweepParameter, grid: Vec<f64>) -> Self {
        SweepSpec {
            parameter,
            grid,
            perturbation_seed: 0,
            samples_per_segment: default_samples(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidParams("sweep grid is empty".into()));
        }
        if self.grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("sweep grid values must be finite".into()));
        }
        if self.samples_per_segment < 2 {
            return Err(Error::InvalidParams("samples_per_segment must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub gamma: f64,
    pub fidelity_cnot: f64,
    /// Area of the `|+⟩` loop on the `b = ↑` branch; `None` when the
    /// perturbed path no longer closes.
    pub solid_angle: Option<f64>,
}

fn perturbed(
    theta: f64,
    p: &SpinPairParams,
    parameter: SweepParameter,
    value: f64,
) -> Result<(PulseSequence, SpinPairParams)> {
    Ok(match parameter {
        SweepParameter::Theta => (aa_cnot_sequence(value, p)?, *p),
        SweepParameter::JCoupling => {
            let pj = p.with_coupling(value);
            (aa_cnot_sequence(theta, &pj)?, pj)
        }
        SweepParameter::TauError => {
            if value <= -1.0 {
                return Err(Error::InvalidParams(format!(
                    "tau error {value} makes delays non-positive"
                )));
            }
            (aa_cnot_sequence(theta, p)?.with_scaled_delays(1.0 + value), *p)
        }
        SweepParameter::AngleError => (aa_cnot_sequence(theta, p)?.with_angle_offset(value), *p),
        SweepParameter::RfAmplitude => {
            let model = PulseModel::Hard { rf_amplitude: value };
            model.validate()?;
            (aa_cnot_sequence(theta, p)?.with_model(model), *p)
        }
    })
}

/// Area of the `|+⟩` loop: control frame when the sequence allows it,
/// otherwise the physical rotating-frame path.
fn plus_loop_area(seq: &PulseSequence, p: &SpinPairParams, samples: usize) -> Result<Option<f64>> {
    let schedule = match realize_control_frame(seq, p, ControlState::Up) {
        Ok(s) => s,
        Err(Error::NonClosingFrame { .. }) | Err(Error::IncompatibleAccounting { .. }) => {
            realize_rotating(seq, p, ControlState::Up)?
        }
        Err(e) => return Err(e),
    };
    let traj = propagate(&schedule, &StateVector::plus(), samples)?;
    Ok(solid_angle(&traj.bloch_a).ok())
}

/// Perturbation sweep around the scheme. The propagator is always built in
/// the rotating frame so that every perturbation is admissible; `gamma` is
/// `arg⟨+|U_↑|+⟩`. Rows come back in grid order.
pub fn robustness_sweep(theta: f64, p: &SpinPairParams, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    p.validate()?;
    spec.grid
        .par_iter()
        .map(|&value| {
            let (seq, pv) = perturbed(theta, p, spec.parameter, value)?;
            let report = gate_from_sequence(&seq, &pv, Accounting::Physical)?;
            Ok(SweepRow {
                value,
                gamma: plus_phase(&report.block_up),
                fidelity_cnot: report.fidelity_cnot,
                solid_angle: plus_loop_area(&seq, &pv, spec.samples_per_segment)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectivityRow {
    pub separation: f64,
    pub b_disturbance: f64,
    pub fidelity_cnot: f64,
}

/// Largest lab-frame integration step: `(1/200)·2π/max(|ω_a|, |ω_b|, |ω_a′|, Ω_rf)`.
pub fn lab_step_bound(p: &SpinPairParams, rf_amplitude: f64) -> f64 {
    let fastest = [p.omega_a, p.omega_b, p.frame_freq, rf_amplitude, p.j_coupling]
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max);
    2.0 * PI / (200.0 * fastest)
}

fn sum_both(op: &Operator) -> Operator {
    let id = Operator::identity(2);
    &kron(op, &id).unwrap() + &kron(&id, op).unwrap()
}

/// Rotating-frame transverse axis `(nx, ny)` seen in the lab at frame phase `φ`.
fn lab_axis(axis: [f64; 3], phi: f64) -> [f64; 3] {
    let (s, c) = phi.sin_cos();
    [axis[0] * c - axis[1] * s, axis[0] * s + axis[1] * c, axis[2]]
}

/// Lab-frame propagator of `seq` on the full spin pair, with the elapsed time.
/// With `rf_amplitude > 0` every rotation is a hard pulse from a circularly
/// polarized field rotating at `ω_a′` that drives both spins; with
/// `rf_amplitude == 0` rotations are ideal instantaneous kicks on qubit `a`.
pub fn lab_sequence_propagator(seq: &PulseSequence, p: &SpinPairParams, rf_amplitude: f64) -> Result<(Operator, f64)> {
    seq.validate()?;
    let h0 = lab_hamiltonian(p)?;
    let step = lab_step_bound(p, rf_amplitude);
    let sx = sum_both(&sigma_x());
    let sy = sum_both(&sigma_y());
    let mut u = Operator::identity(4);
    let mut t = 0.0;
    for event in &seq.events {
        match *event {
            PulseEvent::Delay { duration } => {
                u = &expm_hermitian(&h0, duration)? * &u;
                t += duration;
            }
            PulseEvent::Rotation { axis, angle, .. } => {
                if axis[2].abs() > 1e-12 {
                    return Err(Error::InvalidParams(
                        "lab-frame pulses must have transverse axes".into(),
                    ));
                }
                if rf_amplitude == 0.0 {
                    let kick = rotation_unitary(lab_axis(axis, p.frame_freq * t), angle);
                    u = &kron(&kick, &Operator::identity(2))? * &u;
                    continue;
                }
                let duration = angle.abs() / rf_amplitude;
                let amp = 0.5 * rf_amplitude * angle.signum();
                let h = |time: f64| {
                    let n = lab_axis(axis, p.frame_freq * time);
                    Ok(&(&h0 + &sx.scale_re(amp * n[0])) + &sy.scale_re(amp * n[1]))
                };
                u = &crate::evolution::integrate_time_dependent(h, t, t + duration, step)? * &u;
                t += duration;
            }
        }
    }
    Ok((u, t))
}

/// Removes qubit `a`'s rotating frame (`ω_a′`) and qubit `b`'s Larmor
/// precession (`ω_b`) from a lab propagator ending at `t`.
pub fn remove_lab_frames(u_lab: &Operator, p: &SpinPairParams, t: f64) -> Result<Operator> {
    let id = Operator::identity(2);
    let generator = &kron(&sigma_z(), &id)?.scale_re(p.frame_freq) + &kron(&id, &sigma_z())?.scale_re(p.omega_b);
    let frame = expm_hermitian(&generator, -0.5 * t)?;
    Ok(&frame * u_lab)
}

/// Worst-case `1 − ⟨b|ρ_b(T)|b⟩` over `b ∈ {↑, ↓}` with qubit `a` starting in `|↑⟩`.
pub fn control_disturbance(u: &Operator) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (b, idx) in [(StateVector::up(), 0), (StateVector::down(), 1)] {
        let psi = StateVector::product(&StateVector::up(), &b)?.evolve(u)?;
        let rho = reduced_density(&psi, Qubit::B)?;
        worst = worst.max(1.0 - rho[(idx, idx)].re);
    }
    Ok(worst.max(0.0))
}

/// Places qubit `b` at `ω_a + Δω` for each separation and runs the scheme at
/// `theta` in the lab frame with a global drive. `b_disturbance` is read at
/// the end of the sequence; contributions of the individual off-resonant
/// pulses interfere, so it oscillates under an `(Ω_rf/Δω)²` envelope rather
/// than falling smoothly.
pub fn selectivity_experiment(
    theta: f64,
    p: &SpinPairParams,
    rf_amplitude: f64,
    separations: &[f64],
) -> Result<Vec<SelectivityRow>> {
    if rf_amplitude < 0.0 || !rf_amplitude.is_finite() {
        return Err(Error::InvalidParams(format!(
            "rf amplitude must be >= 0, got {rf_amplitude}"
        )));
    }
    if separations.is_empty() || separations.iter().any(|d| *d <= 0.0 || !d.is_finite()) {
        return Err(Error::InvalidParams(
            "separations must be a nonempty grid of positive values".into(),
        ));
    }
    separations
        .par_iter()
        .map(|&separation| {
            let mut pd = *p;
            pd.omega_b = p.omega_a + separation;
            pd.validate()?;
            let seq = aa_cnot_sequence(theta, &pd)?;
            let (u_lab, t) = lab_sequence_propagator(&seq, &pd, rf_amplitude)?;
            let u_rot = remove_lab_frames(&u_lab, &pd, t)?;
            Ok(SelectivityRow {
                separation,
                b_disturbance: control_disturbance(&u_lab)?,
                fidelity_cnot: cnot_fidelity(&u_rot),
            })
        })
        .collect()
}

/// Blocks of a propagator that must not flip the control.
pub fn checked_blocks(u: &Operator) -> Result<(Operator, Operator)> {
    conditional_blocks_within(u, GATE_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    fn params() -> SpinPairParams {
        SpinPairParams::new(80.0, 30.0, 1.0)
    }

    /// `R_x(π−θ)·(−iσz)·R_x(2θ−π)·(−iσz)·R_x(−θ)` composed directly.
    fn composed_up_block(theta: f64) -> Operator {
        let rx = |a: f64| rotation_unitary([1.0, 0.0, 0.0], a);
        let free = sigma_z().scale(-I);
        let mut u = rx(-theta);
        for m in [&free, &rx(2.0 * theta - PI), &free, &rx(PI - theta)] {
            u = m * &u;
        }
        u
    }

    #[test]
    fn cnot_point_blocks() {
        let r = gate_propagator(FRAC_PI_4, &params(), PulseModel::Instantaneous, Accounting::Physical).unwrap();
        assert!(r.block_down.approx_eq(&Operator::identity(2), 1e-12));
        assert!(r.block_up[(0, 0)].norm() < 1e-12 && r.block_up[(1, 1)].norm() < 1e-12);
        assert!(r.block_up.approx_eq(&composed_up_block(FRAC_PI_4), 1e-12));
    }

    #[test]
    fn null_scheme_is_identity() {
        for acc in [Accounting::Physical, Accounting::ControlFrame] {
            let r = gate_propagator(0.0, &params(), PulseModel::Instantaneous, acc).unwrap();
            assert!(r.block_up.approx_eq(&Operator::identity(2), 1e-12));
            assert!(r.block_down.approx_eq(&Operator::identity(2), 1e-12));
        }
    }

    #[test]
    fn eighth_pi_has_quarter_pi_phase() {
        let r = gate_propagator(
            FRAC_PI_8,
            &params(),
            PulseModel::Instantaneous,
            Accounting::ControlFrame,
        )
        .unwrap();
        let c = (PI / 4.0).cos();
        assert!((r.block_up[(0, 0)].norm() - c).abs() < 1e-12);
        assert!((r.block_up[(0, 1)].norm() - (PI / 4.0).sin()).abs() < 1e-12);
        assert!(r.block_up.approx_eq(&composed_up_block(FRAC_PI_8), 1e-12));
        // Closed form: R_x(−4θ).
        assert!(r
            .block_up
            .approx_eq(&rotation_unitary([1.0, 0.0, 0.0], -4.0 * FRAC_PI_8), 1e-12));
    }

    #[test]
    fn control_frame_requires_instantaneous() {
        let err = gate_propagator(
            0.3,
            &params(),
            PulseModel::Hard { rf_amplitude: 10.0 },
            Accounting::ControlFrame,
        );
        assert!(matches!(err, Err(Error::IncompatibleAccounting { .. })));
    }

    #[test]
    fn gamma_values() {
        let p = params();
        let gamma = |theta: f64| {
            let r = gate_propagator(theta, &p, PulseModel::Instantaneous, Accounting::ControlFrame).unwrap();
            conditional_geometric_phase(&r).unwrap()
        };
        assert!((gamma(FRAC_PI_4).abs() - PI / 2.0).abs() < 1e-9);
        assert_eq!(gamma(0.0), 0.0);
        for theta in [FRAC_PI_8, PI / 6.0, 3.0 * FRAC_PI_8] {
            assert!((gamma(theta).abs() - 2.0 * theta).abs() < 1e-9);
        }
    }

    #[test]
    fn not_x_diagonal_detected() {
        let mut r = gate_propagator(0.3, &params(), PulseModel::Instantaneous, Accounting::Physical).unwrap();
        r.block_up = sigma_z().scale(-I);
        assert!(matches!(
            conditional_geometric_phase(&r),
            Err(Error::NotXDiagonal { .. })
        ));
    }

    #[test]
    fn equivalence_at_cnot_point() {
        let r = analyze_gate(
            FRAC_PI_4,
            &params(),
            PulseModel::Instantaneous,
            Accounting::ControlFrame,
        )
        .unwrap();
        let eq = r.equivalence.expect("C-NOT equivalent");
        assert!(r.fidelity_cnot >= 1.0 - 1e-9);
        assert!(eq.phase_down.abs() < 1e-12);
        assert!((eq.phase_up.abs() - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn no_equivalence_off_point() {
        let r = analyze_gate(PI / 6.0, &params(), PulseModel::Instantaneous, Accounting::ControlFrame).unwrap();
        assert!(r.equivalence.is_none());
        assert!(r.fidelity_cnot < 1.0 - 1e-3);
    }

    #[test]
    fn equivalence_phase_read_off() {
        let mut r = gate_propagator(FRAC_PI_4, &params(), PulseModel::Instantaneous, Accounting::Physical).unwrap();
        r.block_up = sigma_x().scale(I);
        r.block_down = Operator::identity(2);
        r.propagator = assemble_blocks(&r.block_up, &r.block_down).unwrap();
        let r = cnot_equivalence(r).unwrap();
        let eq = r.equivalence.unwrap();
        assert!((eq.phase_up - PI / 2.0).abs() < 1e-15);
        assert_eq!(eq.phase_down, 0.0);
        assert!((eq.global_phase - PI / 4.0).abs() < 1e-15);
        assert!((eq.control_z_pre + PI / 2.0).abs() < 1e-15);
        assert!((r.fidelity_cnot - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cnot_fidelity_matches_best_phase_search() {
        let r = gate_propagator(PI / 6.0, &params(), PulseModel::Instantaneous, Accounting::Physical).unwrap();
        // brute-force over control phases
        let mut best: f64 = 0.0;
        let n = 720;
        for i in 0..n {
            for k in 0..n {
                let a = 2.0 * PI * i as f64 / n as f64;
                let b = 2.0 * PI * k as f64 / n as f64;
                let target = assemble_blocks(
                    &sigma_x().scale(C64::from_polar(1.0, b)),
                    &Operator::identity(2).scale(C64::from_polar(1.0, a)),
                )
                .unwrap();
                best = best.max(gate_fidelity(&r.propagator, &target).unwrap());
            }
        }
        assert!((cnot_fidelity(&r.propagator) - best).abs() < 1e-4);
        assert!(cnot_fidelity(&r.propagator) >= best - 1e-12);
    }

    #[test]
    fn area_check_trivial_and_invalid() {
        let t = area_dependence_check(0.0, &params(), &[0.5, 2.0, 7.0]).unwrap();
        assert!(t.rows.iter().all(|r| r.gamma == 0.0));
        assert_eq!(t.spread, 0.0);
        assert!(area_dependence_check(0.3, &params(), &[1.0, -1.0]).is_err());
        assert!(area_dependence_check(0.3, &params(), &[]).is_err());
    }

    #[test]
    fn sweep_zero_perturbation_is_baseline() {
        let p = params();
        let baseline = analyze_gate(FRAC_PI_4, &p, PulseModel::Instantaneous, Accounting::Physical).unwrap();
        for parameter in [SweepParameter::AngleError, SweepParameter::TauError] {
            let mut spec = SweepSpec::new(parameter, vec![0.0]);
            spec.samples_per_segment = 200;
            let rows = robustness_sweep(FRAC_PI_4, &p, &spec).unwrap();
            assert!(rows[0].fidelity_cnot >= 1.0 - 1e-9);
            assert!((rows[0].gamma - baseline.gamma.unwrap()).abs() < 1e-12);
            assert!((rows[0].solid_angle.unwrap().abs() - PI).abs() < 1e-9);
        }
    }

    #[test]
    fn sweep_rejects_bad_specs() {
        let p = params();
        assert!(robustness_sweep(0.3, &p, &SweepSpec::new(SweepParameter::Theta, vec![])).is_err());
        assert!(robustness_sweep(0.3, &p, &SweepSpec::new(SweepParameter::Theta, vec![f64::NAN])).is_err());
        assert!(robustness_sweep(0.3, &p, &SweepSpec::new(SweepParameter::RfAmplitude, vec![0.0])).is_err());
        assert!(robustness_sweep(0.3, &p, &SweepSpec::new(SweepParameter::TauError, vec![-1.0])).is_err());
    }

    /// Exact lab propagator built in the frame rotating at ω_a′ for both
    /// spins, where the circularly polarized drive is static.
    fn lab_oracle(seq: &PulseSequence, p: &SpinPairParams, rf: f64) -> (Operator, f64) {
        let h0 = lab_hamiltonian(p).unwrap();
        let zsum = sum_both(&sigma_z());
        let h_frame = &h0 - &zsum.scale_re(0.5 * p.frame_freq);
        let mut u = Operator::identity(4);
        let mut t = 0.0;
        for e in &seq.events {
            match *e {
                PulseEvent::Delay { duration } => {
                    u = &expm_hermitian(&h_frame, duration).unwrap() * &u;
                    t += duration;
                }
                PulseEvent::Rotation { angle, .. } => {
                    let d = angle.abs() / rf;
                    let h = &h_frame + &sum_both(&sigma_x()).scale_re(0.5 * rf * angle.signum());
                    u = &expm_hermitian(&h, d).unwrap() * &u;
                    t += d;
                }
            }
        }
        // back to the lab: exp(−iω′t(σz⊗I + I⊗σz)/2)
        let back = expm_hermitian(&zsum.scale_re(0.5 * p.frame_freq), t).unwrap();
        (&back * &u, t)
    }

    #[test]
    fn lab_integration_matches_rotating_oracle() {
        let p = SpinPairParams {
            omega_a: 40.0,
            omega_b: 140.0,
            j_coupling: 1.0,
            frame_freq: 39.0,
        };
        let rf = 10.0;
        let seq = aa_cnot_sequence(FRAC_PI_4, &p).unwrap();
        let (u, t) = lab_sequence_propagator(&seq, &p, rf).unwrap();
        let (oracle, t_oracle) = lab_oracle(&seq, &p, rf);
        assert!((t - t_oracle).abs() < 1e-12);
        let diff = u.max_abs_diff(&oracle);
        assert!(diff < 1e-8, "lab integration error {diff:e}");
    }

    #[test]
    fn instantaneous_lab_fallback_reproduces_gate() {
        let p = SpinPairParams::new(37.0, 137.0, 1.0);
        let rows = selectivity_experiment(FRAC_PI_4, &p, 0.0, &[100.0]).unwrap();
        assert!(rows[0].b_disturbance < 1e-15);
        assert!(rows[0].fidelity_cnot > 1.0 - 1e-9);
    }
}
