//! Experiment harnesses: free induction decay, Zeno sequences, XY-4
//! decoupling, parameter sweeps, and envelope fitting of the traces.

pub mod fit;
mod runner;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::{ChannelError, FlipAxis, FlipNoise, MeasurementSpec, Pulse, Axis, Sign, Spin, SpinSystemParams};
use crate::qmat::{DensityMatrix, QmatError};

pub use fit::{fit_envelope, Envelope, FitError};
pub use runner::Runner;

/// Tolerance on `duration / dt` being an integer.
pub const GRID_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Qmat(#[from] QmatError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{name} = {value} ms is not a multiple of dt = {dt} ms")]
    GridMisaligned { name: String, value: f64, dt: f64 },
    #[error("unsupported in {mode} mode: {what}")]
    Unsupported { mode: &'static str, what: String },
    #[error("invariant violated after step {step}: {detail}")]
    Invariant { step: u64, detail: String },
    #[error("sample time {t} ms does not advance past {previous} ms")]
    NonIncreasingTime { t: f64, previous: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Flip dephasing only, instantaneous ideal measurements, no pulses.
    Theory,
    /// Flips, relaxation, finite pulses and entangler measurements.
    Nmr,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Theory => "theory",
            Mode::Nmr => "nmr",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    /// S in `|+⟩`; E in `|0⟩` (theory) or `σ0/2` (nmr).
    PseudopurePlus,
    /// S in `|0⟩`; E as above.
    PseudopureZero,
    /// Any two-spin state.
    Custom(DensityMatrix),
}

/// x-coordinate attached to each sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeAxis {
    /// Physical time: free steps plus pulse durations.
    Elapsed,
    /// `n·τ_xy` after the n-th acquisition.
    CycleTxy,
    /// `n·(α·τ_M + τ_xy)` with `τ_M = 2·pulse_tau`.
    Fitted,
}

impl TimeAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            TimeAxis::Elapsed => "elapsed",
            TimeAxis::CycleTxy => "cycle",
            TimeAxis::Fitted => "fitted",
        }
    }
}

/// When XY-4 runs record samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Acquisition {
    /// After every complete XY-4 cycle.
    PerBlock,
    /// After every free step and every pulse.
    PerStep,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub params: SpinSystemParams,
    pub noise: FlipNoise,
    pub dt_ms: f64,
    pub tau_xy_ms: f64,
    pub tau_z_ms: f64,
    pub n_reps: usize,
    pub pulse_tau_ms: f64,
    /// Only rescales the `Fitted` time axis.
    pub alpha: f64,
    pub initial: InitialState,
    pub time_axis: TimeAxis,
    /// Check trace, Hermiticity and positivity after every step.
    pub validate: bool,
}

impl ExperimentConfig {
    /// NMR defaults: dt 0.1 ms, τ_xy 0.3 ms, τ_z 0.8 ms, 200 cycles,
    /// 58 μs pulses, α = 0.4.
    pub fn nmr(params: SpinSystemParams) -> Self {
        let noise = FlipNoise::from_params(&params);
        Self {
            mode: Mode::Nmr,
            params,
            noise,
            dt_ms: 0.1,
            tau_xy_ms: 0.3,
            tau_z_ms: 0.8,
            n_reps: 200,
            pulse_tau_ms: 0.058,
            alpha: 0.4,
            initial: InitialState::PseudopurePlus,
            time_axis: TimeAxis::Elapsed,
            validate: false,
        }
    }

    /// Theory defaults: flip rate `p_e` per coupling period, dt = 1/1600,
    /// τ_xy = 1/160, 1600 cycles (ten periods).
    pub fn theory(p_e: f64) -> Result<Self, ExperimentError> {
        Ok(Self {
            mode: Mode::Theory,
            params: SpinSystemParams::theory(p_e)?,
            noise: FlipNoise::fixed_y(p_e),
            dt_ms: 1.0 / 1600.0,
            tau_xy_ms: 1.0 / 160.0,
            tau_z_ms: 0.0,
            n_reps: 1600,
            pulse_tau_ms: 0.0,
            alpha: 0.4,
            initial: InitialState::PseudopurePlus,
            time_axis: TimeAxis::Elapsed,
            validate: false,
        })
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.params.validate()?;
        if !(self.dt_ms > 0.0 && self.dt_ms.is_finite()) {
            return Err(ExperimentError::InvalidConfig(format!(
                "dt_ms must be positive, got {}",
                self.dt_ms
            )));
        }
        for (name, v) in [
            ("tau_xy_ms", self.tau_xy_ms),
            ("tau_z_ms", self.tau_z_ms),
            ("pulse_tau_ms", self.pulse_tau_ms),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ExperimentError::InvalidConfig(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if !self.alpha.is_finite() {
            return Err(ExperimentError::InvalidConfig("alpha must be finite".into()));
        }
        if self.n_reps == 0 {
            return Err(ExperimentError::InvalidConfig("n_reps must be at least 1".into()));
        }
        check_grid("tau_xy_ms", self.tau_xy_ms, self.dt_ms)?;
        check_grid("tau_z_ms", self.tau_z_ms, self.dt_ms)?;
        let expected = self.params.flip_rate();
        if (self.noise.rate - expected).abs() > 1e-12 * expected.max(1.0) {
            return Err(ExperimentError::InvalidConfig(format!(
                "flip rate {} does not match 1/(2·t_d) = {expected}",
                self.noise.rate
            )));
        }
        if self.mode == Mode::Nmr && self.noise.axis() != FlipAxis::FixedY {
            return Err(ExperimentError::InvalidConfig(
                "nmr mode flips E about y only".into(),
            ));
        }
        if let InitialState::Custom(rho) = &self.initial {
            if rho.dim() != 4 {
                return Err(ExperimentError::InvalidConfig(format!(
                    "initial state must be two-spin, got dim {}",
                    rho.dim()
                )));
            }
            rho.validate()?;
        }
        Ok(())
    }

    /// The two-spin starting state.
    pub fn initial_state(&self) -> Result<DensityMatrix, ExperimentError> {
        let env = match self.mode {
            Mode::Theory => DensityMatrix::zero(),
            Mode::Nmr => DensityMatrix::from_bloch(0.0, 0.0, 0.0),
        };
        Ok(match &self.initial {
            InitialState::PseudopurePlus => DensityMatrix::plus().tensor(&env)?,
            InitialState::PseudopureZero => DensityMatrix::zero().tensor(&env)?,
            InitialState::Custom(rho) => rho.clone(),
        })
    }

    pub fn echo(&self, measurement: Option<String>) -> ConfigEcho {
        let finite = |v: f64| v.is_finite().then_some(v);
        ConfigEcho {
            mode: self.mode,
            j_hz: self.params.j_hz,
            t_d_ms: finite(self.params.t_d_ms),
            t1s_ms: finite(self.params.t1s_ms),
            p_e: self.noise.rate,
            dt_ms: self.dt_ms,
            tau_xy_ms: self.tau_xy_ms,
            tau_z_ms: self.tau_z_ms,
            n_reps: self.n_reps,
            pulse_tau_ms: self.pulse_tau_ms,
            alpha: self.alpha,
            time_axis: self.time_axis,
            measurement,
        }
    }
}

/// Rejects durations that are not an integer number of steps.
pub fn check_grid(name: &str, value: f64, dt: f64) -> Result<(), ExperimentError> {
    let ratio = value / dt;
    if (ratio - ratio.round()).abs() > GRID_TOL * ratio.abs().max(1.0) {
        return Err(ExperimentError::GridMisaligned {
            name: name.to_string(),
            value,
            dt,
        });
    }
    Ok(())
}

/// Configuration snapshot stored with every trace. Infinite times are `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub mode: Mode,
    pub j_hz: f64,
    pub t_d_ms: Option<f64>,
    pub t1s_ms: Option<f64>,
    pub p_e: f64,
    pub dt_ms: f64,
    pub tau_xy_ms: f64,
    pub tau_z_ms: f64,
    pub n_reps: usize,
    pub pulse_tau_ms: f64,
    pub alpha: f64,
    pub time_axis: TimeAxis,
    pub measurement: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalPoint {
    pub t_ms: f64,
    pub s_x: f64,
    pub s_y: f64,
    pub magnitude: f64,
    /// Fidelity of the reduced S state to the initial reduced S state.
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalTrace {
    pub experiment: String,
    pub config: ConfigEcho,
    pub points: Vec<SignalPoint>,
}

impl SignalTrace {
    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t_ms).collect()
    }

    /// Sample whose time is within `tol` of `t`.
    pub fn at(&self, t: f64, tol: f64) -> Option<&SignalPoint> {
        self.points.iter().find(|p| (p.t_ms - t).abs() <= tol)
    }

    /// First downward or upward crossing of zero by `s_x`, linearly interpolated.
    pub fn first_zero_sx(&self) -> Option<f64> {
        self.points.windows(2).find_map(|w| {
            let (a, b) = (w[0], w[1]);
            if a.s_x == 0.0 && a.t_ms > 0.0 {
                return Some(a.t_ms);
            }
            (a.s_x * b.s_x < 0.0)
                .then(|| a.t_ms + (b.t_ms - a.t_ms) * a.s_x / (a.s_x - b.s_x))
        })
    }
}

/// Free evolution sampled after each τ_xy block.
pub fn run_fid(config: &ExperimentConfig) -> Result<SignalTrace, ExperimentError> {
    let mut r = Runner::new(config)?;
    for _ in 0..config.n_reps {
        r.free(config.tau_xy_ms)?;
        r.acquire()?;
    }
    Ok(r.finish("fid", None))
}

/// Alternating τ_xy evolution and measurement, sampled after each cycle.
pub fn run_zeno(
    config: &ExperimentConfig,
    spec: &MeasurementSpec,
) -> Result<SignalTrace, ExperimentError> {
    spec.validate()?;
    let mut r = Runner::new(config)?;
    r.check_measurement(spec)?;
    for _ in 0..config.n_reps {
        r.free(config.tau_xy_ms)?;
        r.measure(spec)?;
        r.acquire()?;
    }
    Ok(r.finish("zeno", Some(describe(spec))))
}

pub fn describe(spec: &MeasurementSpec) -> String {
    match spec {
        MeasurementSpec::Ideal { control, .. } => format!("ideal({control:?})"),
        MeasurementSpec::Entangler { sign, tau_z_ms } => {
            format!("entangler({}, tau_z = {tau_z_ms} ms)", sign.as_str())
        }
    }
}

/// The eight XY-4 elements in order: delay, πX, delay, πY, delay, πX, delay, πY.
pub fn xy4_pulses(target: Spin) -> [Pulse; 4] {
    let pi = std::f64::consts::PI;
    [
        Pulse::new(target, Axis::X, pi),
        Pulse::new(target, Axis::Y, pi),
        Pulse::new(target, Axis::X, pi),
        Pulse::new(target, Axis::Y, pi),
    ]
}

/// XY-4 decoupling sampled after each complete cycle.
pub fn run_xy4(
    config: &ExperimentConfig,
    target: Spin,
    interval_ms: f64,
) -> Result<SignalTrace, ExperimentError> {
    run_xy4_sampled(config, target, interval_ms, Acquisition::PerBlock)
}

pub fn run_xy4_sampled(
    config: &ExperimentConfig,
    target: Spin,
    interval_ms: f64,
    acquisition: Acquisition,
) -> Result<SignalTrace, ExperimentError> {
    if !(interval_ms >= config.pulse_tau_ms && interval_ms.is_finite()) {
        return Err(ExperimentError::InvalidConfig(format!(
            "XY-4 interval {interval_ms} ms is shorter than the pulse ({} ms)",
            config.pulse_tau_ms
        )));
    }
    check_grid("interval_ms", interval_ms, config.dt_ms)?;
    let mut r = Runner::new(config)?;
    if config.mode == Mode::Theory {
        return Err(ExperimentError::Unsupported {
            mode: "theory",
            what: "pulses".into(),
        });
    }
    let steps = crate::channels::steps_for(interval_ms, config.dt_ms);
    let per_step = acquisition == Acquisition::PerStep;
    for _ in 0..config.n_reps {
        for pulse in xy4_pulses(target) {
            for _ in 0..steps {
                r.step()?;
                if per_step {
                    r.acquire()?;
                }
            }
            r.pulse(&pulse)?;
            if per_step {
                r.acquire()?;
            }
        }
        if !per_step {
            r.acquire()?;
        }
    }
    let name = match target {
        Spin::S => "xy4-s",
        Spin::E => "xy4-e",
    };
    Ok(r.finish(name, Some(format!("interval = {interval_ms} ms"))))
}

/// Runs `f` over `items` in parallel, one independent run per item.
pub fn sweep<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[derive(Clone, Debug)]
pub struct GridPoint {
    pub tau_xy_ms: f64,
    pub tau_z_ms: f64,
    pub trace: Result<SignalTrace, ExperimentError>,
}

/// Entangler Zeno runs over every `(τ_xy, τ_z)` pair.
pub fn zeno_grid(
    base: &ExperimentConfig,
    sign: Sign,
    tau_xys: &[f64],
    tau_zs: &[f64],
) -> Vec<GridPoint> {
    let pairs: Vec<(f64, f64)> = tau_xys
        .iter()
        .flat_map(|&a| tau_zs.iter().map(move |&b| (a, b)))
        .collect();
    sweep(&pairs, |&(tau_xy, tau_z)| {
        let config = ExperimentConfig {
            tau_xy_ms: tau_xy,
            tau_z_ms: tau_z,
            ..base.clone()
        };
        GridPoint {
            tau_xy_ms: tau_xy,
            tau_z_ms: tau_z,
            trace: run_zeno(&config, &MeasurementSpec::entangler(sign, tau_z)),
        }
    })
}

/// XY-4 runs over a list of intervals.
pub fn xy4_scan(
    base: &ExperimentConfig,
    target: Spin,
    intervals: &[f64],
    acquisition: Acquisition,
) -> Vec<(f64, Result<SignalTrace, ExperimentError>)> {
    sweep(intervals, |&iv| {
        (iv, run_xy4_sampled(base, target, iv, acquisition))
    })
}
