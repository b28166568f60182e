//! Run configuration: optional JSON file overlaid by command-line flags.

use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use aa_cnot::{Accounting, ControlState, Error, PulseModel, SpinPairParams, SweepParameter};
use clap::{Args, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    Instant,
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccountingArg {
    ControlFrame,
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateArg {
    Plus,
    Minus,
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlArg {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ParamArg {
    Theta,
    J,
    TauError,
    AngleError,
    Rf,
}

impl ParamArg {
    pub fn sweep_parameter(self) -> SweepParameter {
        match self {
            ParamArg::Theta => SweepParameter::Theta,
            ParamArg::J => SweepParameter::JCoupling,
            ParamArg::TauError => SweepParameter::TauError,
            ParamArg::AngleError => SweepParameter::AngleError,
            ParamArg::Rf => SweepParameter::RfAmplitude,
        }
    }

    fn is_angle(self) -> bool {
        matches!(self, ParamArg::Theta | ParamArg::AngleError)
    }
}

/// Flags shared by every subcommand. Every field is optional so that a
/// config file can supply it; keys in the file use the flag names with
/// underscores.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Common {
    /// Scheme angle θ in radians (degrees with --degrees).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Interpret angles on the command line and in the config as degrees.
    #[arg(long, global = true)]
    #[serde(default)]
    pub degrees: bool,
    /// Scalar coupling J (rad/s).
    #[arg(long, global = true)]
    pub j: Option<f64>,
    /// Larmor frequency of the target qubit a (rad/s).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega_a: Option<f64>,
    /// Larmor frequency of the control qubit b (rad/s).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega_b: Option<f64>,
    /// Rotating-frame frequency ω_a′ (default ω_a − J).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub frame: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub pulse_model: Option<ModelArg>,
    /// rf amplitude (rad/s) for hard pulses and the selectivity drive.
    #[arg(long, global = true)]
    pub rf: Option<f64>,
    /// Phase accounting (default control-frame for instant pulses, physical for hard).
    #[arg(long, global = true, value_enum)]
    pub accounting: Option<AccountingArg>,
    /// Samples per trajectory segment.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (default stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub state: Option<StateArg>,
    /// Control branch for trajectories.
    #[arg(long, global = true, value_enum)]
    pub control: Option<ControlArg>,
    #[arg(long, global = true, value_enum)]
    pub param: Option<ParamArg>,
    /// Comma-separated sweep values.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub grid: Option<Vec<f64>>,
    /// Comma-separated frequency separations Δω (rad/s).
    #[arg(long, global = true, value_delimiter = ',')]
    pub separations: Option<Vec<f64>>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl Common {
    /// Values from `self` win over those in `file`.
    fn over(self, mut file: Common) -> Common {
        let top = self;
        overlay!(
            file,
            top,
            theta,
            j,
            omega_a,
            omega_b,
            frame,
            pulse_model,
            rf,
            accounting,
            samples,
            seed,
            out,
            format,
            state,
            control,
            param,
            grid,
            separations
        );
        file.degrees |= top.degrees;
        file
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}

fn load_file(path: &Path) -> Result<Common, Error> {
    let text =
        std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("bad config {}: {e}", path.display())))
}

/// Fully resolved settings with defaults applied.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub theta: f64,
    pub params: SpinPairParams,
    pub model: PulseModel,
    pub rf: Option<f64>,
    pub accounting: Accounting,
    pub samples: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub state: StateArg,
    pub control: ControlState,
    pub param: Option<ParamArg>,
    pub grid: Option<Vec<f64>>,
    pub separations: Option<Vec<f64>>,
}

pub const DEFAULT_OMEGA_A: f64 = 500.0;
pub const DEFAULT_OMEGA_B: f64 = 300.0;
pub const DEFAULT_J: f64 = 1.0;

impl RunConfig {
    pub fn resolve(flags: Common) -> Result<RunConfig, Error> {
        let c = match &flags.config {
            Some(path) => flags.clone().over(load_file(path)?),
            None => flags,
        };
        let to_rad = |x: f64| if c.degrees { x.to_radians() } else { x };
        let omega_a = c.omega_a.unwrap_or(DEFAULT_OMEGA_A);
        let j = c.j.unwrap_or(DEFAULT_J);
        let mut params = SpinPairParams::new(omega_a, c.omega_b.unwrap_or(DEFAULT_OMEGA_B), j);
        if let Some(f) = c.frame {
            params = params.with_frame(f);
        }
        params.validate()?;

        let model = match c.pulse_model.unwrap_or(ModelArg::Instant) {
            ModelArg::Instant => PulseModel::Instantaneous,
            ModelArg::Hard => PulseModel::Hard {
                rf_amplitude: c.rf.ok_or_else(|| invalid("--pulse-model hard needs --rf"))?,
            },
        };
        model.validate()?;
        let accounting = match c.accounting {
            Some(AccountingArg::ControlFrame) => Accounting::ControlFrame,
            Some(AccountingArg::Physical) => Accounting::Physical,
            None if model == PulseModel::Instantaneous => Accounting::ControlFrame,
            None => Accounting::Physical,
        };
        let samples = c.samples.unwrap_or(aa_cnot::DEFAULT_SAMPLES_PER_SEGMENT);
        if samples < 2 {
            return Err(invalid("--samples must be at least 2"));
        }
        let theta = to_rad(c.theta.unwrap_or(if c.degrees { 45.0 } else { FRAC_PI_4 }));
        if !theta.is_finite() {
            return Err(invalid("--theta must be finite"));
        }
        let grid = c.grid.map(|g| {
            if c.param.is_some_and(ParamArg::is_angle) {
                g.into_iter().map(to_rad).collect()
            } else {
                g
            }
        });
        Ok(RunConfig {
            theta,
            params,
            model,
            rf: c.rf,
            accounting,
            samples,
            seed: c.seed.unwrap_or(0),
            out: c.out,
            format: c.format,
            state: c.state.unwrap_or(StateArg::Plus),
            control: match c.control.unwrap_or(ControlArg::Up) {
                ControlArg::Up => ControlState::Up,
                ControlArg::Down => ControlState::Down,
            },
            param: c.param,
            grid,
            separations: c.separations,
        })
    }
}
