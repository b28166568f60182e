//! Simulation of a C-NOT gate built from a conditional Aharonov–Anandan
//! phase on a weakly coupled pair of spin-½ nuclei.
//!
//! Qubit `b` is the control and qubit `a` the target. Conventions used
//! throughout:
//!
//! | item | convention |
//! |------|------------|
//! | units | `ħ = 1`, frequencies in rad/s |
//! | propagator | `U(t) = exp(−iHt)` |
//! | spin up | `σz|↑⟩ = +|↑⟩` |
//! | two-qubit basis | `↑↑, ↑↓, ↓↑, ↓↓`, qubit `a` is the left factor |
//! | pulse `(α)^n` | `exp(−iα(n·σ)/2)` on qubit `a` |
//! | rotating frame | `ψ′ = exp(+iω′σz t/2)ψ`, default `ω′ = ω_a − J` |
//! | solid angle | positive for counter-clockwise loops seen from outside |
//!
//! In the default frame qubit `a` sees a field `Jσz` when `b = ↑` and no field
//! when `b = ↓`, and the scheme
//! `(θ)^x — τ — (π−2θ)^{−x} — τ — (π−θ)^x` with `τ = π/(2J)` gives the
//! `b = ↑` block `cos2θ·I + i·sin2θ·σx`.

pub mod error;
pub mod evolution;
pub mod gate;
pub mod io;
pub mod linalg;
pub mod phases;
pub mod pulses;
pub mod system;

pub use error::{Error, Result};
pub use evolution::{
    integrate_time_dependent, propagate, reduced_density, total_propagator, Qubit, StateVector, Trajectory,
    DEFAULT_SAMPLES_PER_SEGMENT,
};
pub use gate::{
    analyze_gate, area_dependence_check, cnot, cnot_equivalence, cnot_fidelity, conditional_geometric_phase,
    gate_propagator, robustness_sweep, selectivity_experiment, AreaTable, Equivalence, GateReport, SelectivityRow,
    SweepParameter, SweepRow, SweepSpec,
};
pub use linalg::{expm_hermitian, gate_fidelity, kron, Operator, PauliCoeffs};
pub use phases::{aa_phase, solid_angle, wrap_phase, Accounting, PhaseReport};
pub use pulses::{
    aa_cnot_sequence, realize_control_frame, realize_rotating, Frame, PulseEvent, PulseModel, PulseSequence, Schedule,
    Segment, SegmentLabel,
};
pub use system::{ControlState, SpinPairParams};
