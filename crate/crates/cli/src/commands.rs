use std::io::Write;
use std::path::Path;

use aa_cnot::io::{selectivity_csv, sweep_csv, to_json, trajectory_csv};
use aa_cnot::{
    aa_cnot_sequence, aa_phase, analyze_gate, propagate, realize_control_frame, realize_rotating, robustness_sweep,
    selectivity_experiment, Accounting, ControlState, Error, PhaseReport, Schedule, StateVector, SweepSpec, Trajectory,
};
use serde::Serialize;

use crate::config::{Format, RunConfig, StateArg};

/// Largest unitarity defect tolerated in an emitted propagator.
const EMIT_UNITARITY_TOL: f64 = 1e-12;

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

type Outcome = Result<(), Failure>;

/// Writes to stdout, or to a temp file renamed over `out` on success.
fn emit(text: &str, out: Option<&Path>) -> Outcome {
    let io_err = |e: std::io::Error| Failure::Validation(format!("cannot write output: {e}"));
    match out {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(io_err)?;
            stdout.flush().map_err(io_err)
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
            tmp.write_all(text.as_bytes()).map_err(io_err)?;
            tmp.persist(path).map_err(|e| io_err(e.error))?;
            Ok(())
        }
    }
}

fn json_only(cfg: &RunConfig, what: &str) -> Outcome {
    match cfg.format {
        Some(Format::Csv) => Err(Failure::Validation(format!("{what} output is JSON only"))),
        _ => Ok(()),
    }
}

pub fn gate(cfg: &RunConfig) -> Outcome {
    json_only(cfg, "gate")?;
    let report = analyze_gate(cfg.theta, &cfg.params, cfg.model, cfg.accounting)?;
    if report.unitarity_defect > EMIT_UNITARITY_TOL {
        return Err(Failure::Numerical(format!(
            "propagator unitarity defect {:e} exceeds {EMIT_UNITARITY_TOL:e}",
            report.unitarity_defect
        )));
    }
    emit(&to_json(&report), cfg.out.as_deref())
}

fn initial_state(s: StateArg) -> StateVector {
    match s {
        StateArg::Plus => StateVector::plus(),
        StateArg::Minus => StateVector::minus(),
        StateArg::Up => StateVector::up(),
        StateArg::Down => StateVector::down(),
    }
}

fn state_name(s: StateArg) -> &'static str {
    match s {
        StateArg::Plus => "plus",
        StateArg::Minus => "minus",
        StateArg::Up => "up",
        StateArg::Down => "down",
    }
}

fn branch_schedule(cfg: &RunConfig) -> Result<Schedule, Failure> {
    let seq = aa_cnot_sequence(cfg.theta, &cfg.params)?.with_model(cfg.model);
    Ok(match cfg.accounting {
        Accounting::ControlFrame => realize_control_frame(&seq, &cfg.params, cfg.control)?,
        Accounting::Physical => realize_rotating(&seq, &cfg.params, cfg.control)?,
    })
}

#[derive(Serialize)]
struct PhasesOutput {
    theta: f64,
    state: &'static str,
    control: ControlState,
    #[serde(flatten)]
    report: PhaseReport,
}

pub fn phases(cfg: &RunConfig) -> Outcome {
    json_only(cfg, "phases")?;
    let schedule = branch_schedule(cfg)?;
    let traj = propagate(&schedule, &initial_state(cfg.state), cfg.samples)?;
    let report = aa_phase(&traj, &schedule)?;
    let out = PhasesOutput {
        theta: cfg.theta,
        state: state_name(cfg.state),
        control: cfg.control,
        report,
    };
    emit(&to_json(&out), cfg.out.as_deref())
}

#[derive(Serialize)]
struct TrajectoryJson<'a> {
    times: &'a [f64],
    /// `[re, im]` pairs per sample.
    amplitudes: Vec<Vec<[f64; 2]>>,
    bloch_a: &'a [[f64; 3]],
    #[serde(skip_serializing_if = "Option::is_none")]
    bloch_b: Option<&'a [[f64; 3]]>,
    labels: Vec<&'static str>,
}

impl<'a> TrajectoryJson<'a> {
    fn new(t: &'a Trajectory) -> Self {
        TrajectoryJson {
            times: &t.times,
            amplitudes: t
                .states
                .iter()
                .map(|s| s.amplitudes().iter().map(|c| [c.re, c.im]).collect())
                .collect(),
            bloch_a: &t.bloch_a,
            bloch_b: t.bloch_b.as_deref(),
            labels: t.labels.iter().map(|l| l.as_str()).collect(),
        }
    }
}

pub fn trajectory(cfg: &RunConfig) -> Outcome {
    let schedule = branch_schedule(cfg)?;
    let traj = propagate(&schedule, &initial_state(cfg.state), cfg.samples)?;
    let text = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => trajectory_csv(&traj),
        Format::Json => to_json(&TrajectoryJson::new(&traj)),
    };
    emit(&text, cfg.out.as_deref())
}

pub fn sweep(cfg: &RunConfig) -> Outcome {
    let param = cfg
        .param
        .ok_or_else(|| Failure::Validation("sweep needs --param".into()))?;
    let grid = cfg
        .grid
        .clone()
        .ok_or_else(|| Failure::Validation("sweep needs --grid".into()))?;
    let spec = SweepSpec {
        parameter: param.sweep_parameter(),
        grid,
        perturbation_seed: cfg.seed,
        samples_per_segment: cfg.samples,
    };
    let rows = robustness_sweep(cfg.theta, &cfg.params, &spec)?;
    let text = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => sweep_csv(&rows),
        Format::Json => to_json(&rows),
    };
    emit(&text, cfg.out.as_deref())
}

pub fn selectivity(cfg: &RunConfig) -> Outcome {
    let rf = cfg
        .rf
        .ok_or_else(|| Failure::Validation("selectivity needs --rf".into()))?;
    let seps = cfg
        .separations
        .as_deref()
        .ok_or_else(|| Failure::Validation("selectivity needs --separations".into()))?;
    let rows = selectivity_experiment(cfg.theta, &cfg.params, rf, seps)?;
    let text = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => selectivity_csv(&rows),
        Format::Json => to_json(&rows),
    };
    emit(&text, cfg.out.as_deref())
}
