//! The coupled spin pair: lab-frame Hamiltonian, rotating frame, and the
//! conditional field seen by qubit `a`.
//!
//! Basis ordering is `(↑↑, ↑↓, ↓↑, ↓↓)` with qubit `a` as the left factor and
//! `σz|↑⟩ = +|↑⟩`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{expm_hermitian, kron, sigma_z, Operator, PauliCoeffs, HERMITIAN_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinPairParams {
    pub omega_a: f64,
    pub omega_b: f64,
    pub j_coupling: f64,
    /// Rotating-frame frequency for qubit `a`.
    pub frame_freq: f64,
}

impl SpinPairParams {
    /// Parameters with the frame locked to `ω_a − J`, where the down-branch
    /// field vanishes.
    pub fn new(omega_a: f64, omega_b: f64, j_coupling: f64) -> Self {
        SpinPairParams {
            omega_a,
            omega_b,
            j_coupling,
            frame_freq: omega_a - j_coupling,
        }
    }

    pub fn with_frame(mut self, frame_freq: f64) -> Self {
        self.frame_freq = frame_freq;
        self
    }

    pub fn with_coupling(mut self, j_coupling: f64) -> Self {
        let offset = self.omega_a - self.j_coupling - self.frame_freq;
        self.j_coupling = j_coupling;
        self.frame_freq = self.omega_a - j_coupling - offset;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.omega_a, self.omega_b, self.j_coupling, self.frame_freq];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("spin-pair parameters must be finite".into()));
        }
        if self.j_coupling <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "coupling J must be positive, got {}",
                self.j_coupling
            )));
        }
        if self.omega_a == self.omega_b {
            return Err(Error::InvalidParams("omega_a and omega_b must differ".into()));
        }
        Ok(())
    }

    /// Free-evolution delay `π/(2J)`.
    pub fn tau(&self) -> f64 {
        std::f64::consts::PI / (2.0 * self.j_coupling)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlState {
    Up,
    Down,
}

impl ControlState {
    pub const ALL: [ControlState; 2] = [ControlState::Up, ControlState::Down];

    /// `σz` eigenvalue.
    pub fn sign(self) -> f64 {
        match self {
            ControlState::Up => 1.0,
            ControlState::Down => -1.0,
        }
    }

    /// Row/column indices of this branch in the `(↑↑, ↑↓, ↓↑, ↓↓)` basis.
    pub fn block_indices(self) -> [usize; 2] {
        match self {
            ControlState::Up => [0, 2],
            ControlState::Down => [1, 3],
        }
    }
}

/// `I ⊗ σz`, the control-qubit population operator.
pub fn control_sigma_z() -> Operator {
    kron(&Operator::identity(2), &sigma_z()).unwrap()
}

/// `σz ⊗ I`.
pub fn target_sigma_z() -> Operator {
    kron(&sigma_z(), &Operator::identity(2)).unwrap()
}

/// `½(ω_a σz⊗I + ω_b I⊗σz + J σz⊗σz)`.
pub fn lab_hamiltonian(p: &SpinPairParams) -> Result<Operator> {
    p.validate()?;
    let zz = kron(&sigma_z(), &sigma_z())?;
    let h =
        &(&target_sigma_z().scale_re(p.omega_a) + &control_sigma_z().scale_re(p.omega_b)) + &zz.scale_re(p.j_coupling);
    Ok(h.scale_re(0.5))
}

/// Qubit-`a` field in the rotating frame, `½(ω_a − ω_a′ ± J)σz` with the `+`
/// branch for `b = ↑`.
pub fn conditional_field(p: &SpinPairParams, b: ControlState) -> Result<PauliCoeffs> {
    p.validate()?;
    let az = 0.5 * (p.omega_a - p.frame_freq + b.sign() * p.j_coupling);
    Ok(PauliCoeffs::new(0.0, 0.0, 0.0, az))
}

/// `R′ = exp(+i·f·G·t/2)`.
pub fn frame_rotation(generator: &Operator, frame_freq: f64, t: f64) -> Result<Operator> {
    expm_hermitian(generator, -0.5 * frame_freq * t)
}

/// `R′ H R′⁻¹ + i(∂R′/∂t)R′⁻¹` with `R′ = exp(+i·f·G·t/2)`.
///
/// Since `G` commutes with `R′`, the derivative term is `−(f/2)·G` exactly.
pub fn frame_transform(h_lab: &Operator, generator: &Operator, frame_freq: f64, t: f64) -> Result<Operator> {
    for m in [h_lab, generator] {
        let defect = m.hermiticity_defect();
        if defect > HERMITIAN_TOL * m.max_norm().max(1.0) {
            return Err(Error::NonHermitianInput { defect });
        }
    }
    if h_lab.dim() != generator.dim() {
        return Err(Error::DimensionMismatch {
            expected: h_lab.dim(),
            found: generator.dim(),
        });
    }
    let r = frame_rotation(generator, frame_freq, t)?;
    let conj = &(&r * h_lab) * &r.dagger();
    Ok((&conj - &generator.scale_re(0.5 * frame_freq)).hermitian_part())
}

/// Splits an operator commuting with `I⊗σz` into its `(b=↑, b=↓)` blocks.
pub fn conditional_blocks(h: &Operator) -> Result<(Operator, Operator)> {
    conditional_blocks_within(h, HERMITIAN_TOL * h.max_norm().max(1.0))
}

pub(crate) fn conditional_blocks_within(h: &Operator, tol: f64) -> Result<(Operator, Operator)> {
    if h.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: h.dim(),
        });
    }
    let defect = h.commutator(&control_sigma_z()).max_norm();
    if defect > tol {
        return Err(Error::NotBlockDiagonal { defect });
    }
    Ok((
        h.submatrix(ControlState::Up.block_indices()),
        h.submatrix(ControlState::Down.block_indices()),
    ))
}

/// Inverse of [`conditional_blocks`].
pub fn assemble_blocks(up: &Operator, down: &Operator) -> Result<Operator> {
    for m in [up, down] {
        if m.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: m.dim(),
            });
        }
    }
    let mut out = Operator::zeros(4);
    for (block, b) in [(up, ControlState::Up), (down, ControlState::Down)] {
        let idx = b.block_indices();
        for r in 0..2 {
            for c in 0..2 {
                out[(idx[r], idx[c])] = block[(r, c)];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_compose, sigma_x};
    use num_complex::Complex64 as C64;

    fn diag(v: [f64; 4]) -> Operator {
        Operator::diagonal(&v.map(|x| C64::new(x, 0.0))).unwrap()
    }

    #[test]
    fn lab_hamiltonian_coupling_only() {
        // ω_a = ω_b is not a valid spin pair, so strip the Zeeman terms instead.
        let p = SpinPairParams::new(0.0, 1e-3, 2.0);
        let h = &lab_hamiltonian(&p).unwrap() - &control_sigma_z().scale_re(0.5e-3);
        assert!(h.approx_eq(&diag([1.0, -1.0, -1.0, 1.0]), 1e-15));
    }

    #[test]
    fn lab_hamiltonian_hand_sum() {
        // Diagonal entries are ½(s_a ω_a + s_b ω_b + s_a s_b J): (9, 1, −3, −7).
        let p = SpinPairParams::new(10.0, 6.0, 2.0);
        let h = lab_hamiltonian(&p).unwrap();
        let expected = [
            0.5 * (10.0 + 6.0 + 2.0),
            0.5 * (10.0 - 6.0 - 2.0),
            0.5 * (-10.0 + 6.0 - 2.0),
            0.5 * (-10.0 - 6.0 + 2.0),
        ];
        assert!(h.approx_eq(&diag(expected), 1e-15));
        assert!(h.is_hermitian());
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(matches!(
            lab_hamiltonian(&SpinPairParams::new(2.0, 0.0, 0.0)),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            lab_hamiltonian(&SpinPairParams::new(2.0, 0.0, -1.0)),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            lab_hamiltonian(&SpinPairParams::new(3.0, 3.0, 1.0)),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            conditional_field(&SpinPairParams::new(f64::NAN, 3.0, 1.0), ControlState::Up),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn conditional_field_default_frame() {
        let j = 1.3;
        let p = SpinPairParams::new(50.0, 20.0, j);
        let up = conditional_field(&p, ControlState::Up).unwrap();
        assert!((up.az - j).abs() < 1e-13 && up.vector()[..2] == [0.0, 0.0] && up.a0 == 0.0);
        let down = conditional_field(&p, ControlState::Down).unwrap();
        assert!(down.az.abs() < 1e-13);
    }

    #[test]
    fn conditional_field_lab_resonant_frame() {
        let j = 1.3;
        let p = SpinPairParams::new(50.0, 20.0, j).with_frame(50.0);
        let up = conditional_field(&p, ControlState::Up).unwrap();
        assert!((up.az - j / 2.0).abs() < 1e-15);
    }

    #[test]
    fn frame_transform_single_spin() {
        let omega = 7.0;
        let h = sigma_z().scale_re(0.5 * omega);
        for t in [0.0, 0.3, 2.1] {
            let on_res = frame_transform(&h, &sigma_z(), omega, t).unwrap();
            assert!(on_res.approx_eq(&Operator::zeros(2), 1e-14));
            let off = frame_transform(&h, &sigma_z(), 5.5, t).unwrap();
            assert!(off.approx_eq(&sigma_z().scale_re(0.5 * (omega - 5.5)), 1e-14));
        }
    }

    #[test]
    fn frame_transform_zero_frequency_is_identity_map() {
        let h = &lab_hamiltonian(&SpinPairParams::new(3.0, -2.0, 0.5)).unwrap()
            + &kron(&sigma_x(), &Operator::identity(2)).unwrap().scale_re(0.4);
        let out = frame_transform(&h, &target_sigma_z(), 0.0, 1.7).unwrap();
        assert!(out.approx_eq(&h, 1e-14));
    }

    #[test]
    fn frame_transform_blocks_match_conditional_field() {
        let p = SpinPairParams::new(40.0, 13.0, 2.5);
        let h = lab_hamiltonian(&p).unwrap();
        let rot = frame_transform(&h, &target_sigma_z(), p.frame_freq, 0.9).unwrap();
        let (up, down) = conditional_blocks(&rot).unwrap();
        // Each block additionally carries the ±½ω_b identity shift of qubit b.
        for (block, b) in [(up, ControlState::Up), (down, ControlState::Down)] {
            let mut field = conditional_field(&p, b).unwrap();
            field.a0 = 0.5 * b.sign() * p.omega_b;
            assert!(block.approx_eq(&pauli_compose(field), 1e-12), "{b:?}");
        }
    }

    #[test]
    fn blocks_of_zz_and_identity() {
        let j = 0.8;
        let zz = kron(&sigma_z(), &sigma_z()).unwrap().scale_re(0.5 * j);
        let (up, down) = conditional_blocks(&zz).unwrap();
        assert!(up.approx_eq(&sigma_z().scale_re(0.5 * j), 0.0));
        assert!(down.approx_eq(&sigma_z().scale_re(-0.5 * j), 0.0));
        let (up, down) = conditional_blocks(&Operator::identity(4)).unwrap();
        assert_eq!(up, Operator::identity(2));
        assert_eq!(down, Operator::identity(2));
        let xx = kron(&sigma_x(), &sigma_x()).unwrap();
        assert!(matches!(conditional_blocks(&xx), Err(Error::NotBlockDiagonal { .. })));
    }

    #[test]
    fn assemble_inverts_blocks() {
        let p = SpinPairParams::new(4.0, 1.0, 0.7);
        let h = lab_hamiltonian(&p).unwrap();
        let (up, down) = conditional_blocks(&h).unwrap();
        assert_eq!(assemble_blocks(&up, &down).unwrap(), h);
    }

    #[test]
    fn with_coupling_keeps_frame_offset() {
        let p = SpinPairParams::new(10.0, 3.0, 1.0).with_coupling(4.0);
        assert_eq!(p.frame_freq, 6.0);
        let q = SpinPairParams::new(10.0, 3.0, 1.0).with_frame(10.0).with_coupling(4.0);
        // offset from ω_a − J is −1 before and after
        assert_eq!(q.frame_freq, 7.0);
    }
}
