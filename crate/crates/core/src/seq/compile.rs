use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

use crate::channels::{steps_for, MeasurementSpec, Pulse, Sign};
use crate::experiments::{
    check_grid, ExperimentConfig, ExperimentError, InitialState, Mode, Runner, SignalTrace,
};

use super::{ErrorKind, SeqError, SequenceProgram, Stmt, StmtKind};

/// Upper bound on unrolled instructions.
pub const MAX_INSTRUCTIONS: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    /// Re-prepare the register; fidelities are then measured against it.
    Init(InitialState),
    /// `steps` free-evolution steps of length dt.
    Free { steps: usize },
    Pulse(Pulse),
    Measure(MeasurementSpec),
    Acquire,
}

/// Straight-line list of operations with repeats unrolled.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChannelProgram {
    pub instructions: Vec<Instruction>,
}

impl ChannelProgram {
    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Total free-evolution steps.
    pub fn free_steps(&self) -> usize {
        self.instructions
            .iter()
            .map(|i| match i {
                Instruction::Free { steps } => *steps,
                _ => 0,
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum CompileError {
    #[error(transparent)]
    Sequence(#[from] SeqError),
    #[error(transparent)]
    Config(#[from] ExperimentError),
}

/// Pulse angle in radians; multiples of 90° map exactly onto multiples of π/2.
pub fn degrees_to_radians(degrees: i64) -> f64 {
    degrees as f64 / 90.0 * FRAC_PI_2
}

/// Default measurement table: `Mplus`/`Mminus` are entanglers with the
/// configured τ_z, `Mideal` is the x-basis ideal measurement.
pub fn default_measurements(config: &ExperimentConfig) -> Vec<(String, MeasurementSpec)> {
    vec![
        (
            "Mplus".into(),
            MeasurementSpec::entangler(Sign::Plus, config.tau_z_ms),
        ),
        (
            "Mminus".into(),
            MeasurementSpec::entangler(Sign::Minus, config.tau_z_ms),
        ),
        ("Mideal".into(), MeasurementSpec::ideal_x()),
    ]
}

pub fn compile_sequence(
    program: &SequenceProgram,
    config: &ExperimentConfig,
) -> Result<ChannelProgram, CompileError> {
    compile_sequence_with(program, config, &default_measurements(config))
}

/// Lowers a program against a config and a measurement-name table.
pub fn compile_sequence_with(
    program: &SequenceProgram,
    config: &ExperimentConfig,
    measurements: &[(String, MeasurementSpec)],
) -> Result<ChannelProgram, CompileError> {
    config.validate()?;
    let mut c = Compiler {
        config,
        measurements,
        out: Vec::new(),
    };
    c.block(&program.statements)?;
    Ok(ChannelProgram {
        instructions: c.out,
    })
}

struct Compiler<'a> {
    config: &'a ExperimentConfig,
    measurements: &'a [(String, MeasurementSpec)],
    out: Vec<Instruction>,
}

impl Compiler<'_> {
    fn push(&mut self, stmt: &Stmt, i: Instruction) -> Result<(), SeqError> {
        if self.out.len() >= MAX_INSTRUCTIONS {
            return Err(SeqError::new(
                ErrorKind::Semantic,
                stmt.span,
                format!("program unrolls to more than {MAX_INSTRUCTIONS} instructions"),
            ));
        }
        self.out.push(i);
        Ok(())
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<(), SeqError> {
        for s in stmts {
            self.stmt(s)?;
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt) -> Result<(), SeqError> {
        let theory = self.config.mode == Mode::Theory;
        match &s.kind {
            StmtKind::Init(name) => {
                let init = match name.as_str() {
                    "plus" => InitialState::PseudopurePlus,
                    "zero" => InitialState::PseudopureZero,
                    other => {
                        return Err(SeqError::new(
                            ErrorKind::Semantic,
                            s.span,
                            format!("unknown initial state '{other}'"),
                        ))
                    }
                };
                self.push(s, Instruction::Init(init))
            }
            StmtKind::Repeat { count, body } => {
                for _ in 0..*count {
                    self.block(body)?;
                }
                Ok(())
            }
            StmtKind::Delay { ms } => {
                self.aligned(s, *ms)?;
                let steps = steps_for(*ms, self.config.dt_ms);
                if steps == 0 {
                    return Ok(());
                }
                self.push(s, Instruction::Free { steps })
            }
            StmtKind::Pulse {
                target,
                axis,
                degrees,
            } => {
                if theory {
                    return Err(SeqError::new(
                        ErrorKind::Unsupported,
                        s.span,
                        "theory mode has no pulses",
                    ));
                }
                let p = Pulse::new(*target, *axis, degrees_to_radians(*degrees));
                self.push(s, Instruction::Pulse(p))
            }
            StmtKind::Measure(name) => {
                let spec = self
                    .measurements
                    .iter()
                    .find(|(n, _)| n == name)
                    .map(|(_, spec)| spec.clone())
                    .ok_or_else(|| {
                        SeqError::new(
                            ErrorKind::Semantic,
                            s.span,
                            format!("measurement '{name}' is not defined"),
                        )
                    })?;
                match &spec {
                    MeasurementSpec::Entangler { .. } if theory => {
                        return Err(SeqError::new(
                            ErrorKind::Unsupported,
                            s.span,
                            format!("theory mode has only ideal measurements, not '{name}'"),
                        ))
                    }
                    MeasurementSpec::Entangler { tau_z_ms, .. } => self.aligned(s, *tau_z_ms)?,
                    MeasurementSpec::Ideal { .. } => {}
                }
                spec.validate().map_err(|e| {
                    SeqError::new(ErrorKind::Semantic, s.span, format!("'{name}': {e}"))
                })?;
                self.push(s, Instruction::Measure(spec))
            }
            StmtKind::Acquire => self.push(s, Instruction::Acquire),
        }
    }

    fn aligned(&self, s: &Stmt, ms: f64) -> Result<(), SeqError> {
        check_grid("duration", ms, self.config.dt_ms).map_err(|_| {
            SeqError::new(
                ErrorKind::Grid,
                s.span,
                format!(
                    "{ms} ms is not a whole number of {} ms steps",
                    self.config.dt_ms
                ),
            )
        })
    }
}

/// Runs a compiled program. The trace starts with the t = 0 sample.
pub fn execute(
    program: &ChannelProgram,
    config: &ExperimentConfig,
) -> Result<SignalTrace, ExperimentError> {
    let mut r = Runner::new(config)?;
    for ins in &program.instructions {
        match ins {
            Instruction::Init(init) => {
                let cfg = ExperimentConfig {
                    initial: init.clone(),
                    ..config.clone()
                };
                r.reset(cfg.initial_state()?)?;
            }
            Instruction::Free { steps } => {
                for _ in 0..*steps {
                    r.step()?;
                }
            }
            Instruction::Pulse(p) => r.pulse(p)?,
            Instruction::Measure(spec) => r.measure(spec)?,
            Instruction::Acquire => r.acquire()?,
        }
    }
    Ok(r.finish("sequence", None))
}
