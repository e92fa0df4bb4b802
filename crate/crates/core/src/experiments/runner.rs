use crate::channels::{
    dephasing_step, entangler_opening_pulse, evolve_step, ideal_measurement, pulse_step,
    steps_for, FlipNoise, MeasurementSpec, Pulse,
};
use crate::qmat::{expect, kron, ptrace, sigma_0, sigma_x, sigma_y, DenseMatrix, DensityMatrix};
use crate::qmat::{HERMITICITY_TOL, POSITIVITY_TOL};

use super::{
    check_grid, ExperimentConfig, ExperimentError, Mode, SignalPoint, SignalTrace, TimeAxis,
};

/// Steps between Hermiticity drift checks.
const SYMMETRIZE_EVERY: u64 = 10_000;
const TRACE_CHECK_TOL: f64 = 1e-10;

/// Applies primitive operations to a two-spin state and records samples.
///
/// Both the experiment harnesses and compiled sequences drive this type,
/// so equal operation lists give identical traces.
pub struct Runner<'a> {
    config: &'a ExperimentConfig,
    noise: FlipNoise,
    state: DensityMatrix,
    initial_s: DensityMatrix,
    sx: DenseMatrix,
    sy: DenseMatrix,
    steps: u64,
    free_steps: u64,
    pulses: u64,
    acquisitions: u64,
    points: Vec<SignalPoint>,
}

impl<'a> Runner<'a> {
    /// Validates the config and records the t = 0 sample.
    pub fn new(config: &'a ExperimentConfig) -> Result<Self, ExperimentError> {
        config.validate()?;
        let state = config.initial_state()?;
        let initial_s = ptrace(&state, &[0])?;
        let mut r = Self {
            config,
            noise: config.noise.clone(),
            state,
            initial_s,
            sx: kron(&sigma_x(), &sigma_0())?,
            sy: kron(&sigma_y(), &sigma_0())?,
            steps: 0,
            free_steps: 0,
            pulses: 0,
            acquisitions: 0,
            points: Vec::new(),
        };
        let p = r.sample(0.0)?;
        r.points.push(p);
        Ok(r)
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn points(&self) -> &[SignalPoint] {
        &self.points
    }

    /// Replaces the state; later fidelities are measured against it.
    pub fn reset(&mut self, state: DensityMatrix) -> Result<(), ExperimentError> {
        if state.dim() != 4 {
            return Err(ExperimentError::InvalidConfig(format!(
                "state must be two-spin, got dim {}",
                state.dim()
            )));
        }
        self.initial_s = ptrace(&state, &[0])?;
        self.state = state;
        Ok(())
    }

    /// One free-evolution step of length dt.
    pub fn step(&mut self) -> Result<(), ExperimentError> {
        let c = self.config;
        self.state = match c.mode {
            Mode::Theory => dephasing_step(&self.state, &c.params, &mut self.noise, c.dt_ms)?,
            Mode::Nmr => evolve_step(&self.state, &c.params, &self.noise, c.dt_ms)?,
        };
        self.free_steps += 1;
        self.after_map()
    }

    /// Free evolution for an aligned duration.
    pub fn free(&mut self, duration_ms: f64) -> Result<(), ExperimentError> {
        check_grid("delay", duration_ms, self.config.dt_ms)?;
        for _ in 0..steps_for(duration_ms, self.config.dt_ms) {
            self.step()?;
        }
        Ok(())
    }

    pub fn pulse(&mut self, pulse: &Pulse) -> Result<(), ExperimentError> {
        let c = self.config;
        if c.mode == Mode::Theory {
            return Err(ExperimentError::Unsupported {
                mode: "theory",
                what: "pulses".into(),
            });
        }
        self.state = pulse_step(&self.state, &c.params, &self.noise, pulse, c.pulse_tau_ms)?;
        self.pulses += 1;
        self.after_map()
    }

    /// Rejects measurement kinds the current mode cannot run.
    pub fn check_measurement(&self, spec: &MeasurementSpec) -> Result<(), ExperimentError> {
        match (self.config.mode, spec) {
            (Mode::Theory, MeasurementSpec::Entangler { .. }) => {
                Err(ExperimentError::Unsupported {
                    mode: "theory",
                    what: "entangler measurements".into(),
                })
            }
            (_, MeasurementSpec::Entangler { tau_z_ms, .. }) => {
                check_grid("tau_z", *tau_z_ms, self.config.dt_ms)
            }
            _ => Ok(()),
        }
    }

    /// Ideal measurements act instantly; entanglers expand into
    /// pulse, free evolution for τ_z, inverse pulse.
    pub fn measure(&mut self, spec: &MeasurementSpec) -> Result<(), ExperimentError> {
        self.check_measurement(spec)?;
        match spec {
            MeasurementSpec::Ideal { .. } => {
                self.state = ideal_measurement(&self.state, spec)?;
                self.after_map()
            }
            MeasurementSpec::Entangler { sign, tau_z_ms } => {
                let open = entangler_opening_pulse(*sign);
                let close = Pulse::new(open.target, open.axis, -open.angle);
                self.pulse(&open)?;
                self.free(*tau_z_ms)?;
                self.pulse(&close)
            }
        }
    }

    /// Records a sample at the current time-axis position.
    pub fn acquire(&mut self) -> Result<(), ExperimentError> {
        self.acquisitions += 1;
        let t = self.time();
        let previous = self.points.last().map_or(f64::NEG_INFINITY, |p| p.t_ms);
        if t <= previous {
            return Err(ExperimentError::NonIncreasingTime { t, previous });
        }
        let p = self.sample(t)?;
        self.points.push(p);
        Ok(())
    }

    pub fn finish(self, experiment: &str, measurement: Option<String>) -> SignalTrace {
        SignalTrace {
            experiment: experiment.to_string(),
            config: self.config.echo(measurement),
            points: self.points,
        }
    }

    fn time(&self) -> f64 {
        let c = self.config;
        match c.time_axis {
            TimeAxis::Elapsed => {
                self.free_steps as f64 * c.dt_ms + self.pulses as f64 * c.pulse_tau_ms
            }
            TimeAxis::CycleTxy => self.acquisitions as f64 * c.tau_xy_ms,
            TimeAxis::Fitted => {
                self.acquisitions as f64 * (c.alpha * 2.0 * c.pulse_tau_ms + c.tau_xy_ms)
            }
        }
    }

    fn sample(&self, t_ms: f64) -> Result<SignalPoint, ExperimentError> {
        let s_x = expect(&self.sx, &self.state)?.re;
        let s_y = expect(&self.sy, &self.state)?.re;
        let reduced = ptrace(&self.state, &[0])?;
        Ok(SignalPoint {
            t_ms,
            s_x,
            s_y,
            magnitude: s_x.hypot(s_y),
            fidelity: self.initial_s.fidelity(&reduced)?,
        })
    }

    fn after_map(&mut self) -> Result<(), ExperimentError> {
        self.steps += 1;
        if self.steps.is_multiple_of(SYMMETRIZE_EVERY) && self.state.hermiticity_error() > HERMITICITY_TOL {
            self.state = self.state.symmetrized();
        }
        if self.config.validate {
            self.check_invariants()?;
        }
        Ok(())
    }

    fn check_invariants(&self) -> Result<(), ExperimentError> {
        let fail = |detail: String| {
            Err(ExperimentError::Invariant {
                step: self.steps,
                detail,
            })
        };
        let tr = self.state.trace();
        if (tr - 1.0).abs() > TRACE_CHECK_TOL {
            return fail(format!("trace {tr}"));
        }
        let herm = self.state.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return fail(format!("hermiticity error {herm:e}"));
        }
        let min = self.state.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return fail(format!("minimum eigenvalue {min:e}"));
        }
        Ok(())
    }
}
