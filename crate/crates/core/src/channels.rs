//! Affine trace-preserving step maps for the S–E spin pair.
//!
//! Every step is a convex combination of unitary (or Pauli-times-unitary)
//! branches, optionally mixed with the thermal state. Times are in ms in
//! NMR mode; in theory mode the same functions run with one coupling period
//! per unit time (see [`SpinSystemParams::theory`]).

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::qmat::{
    ad, kron, pauli_exp, ptrace, sigma_0, sigma_x, sigma_y, DenseMatrix, DensityMatrix, Pauli,
    PauliString, QmatError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error(transparent)]
    Qmat(#[from] QmatError),
    #[error("rate overflow: rate·dt = {product} > 1 (rate {rate}, dt {dt})")]
    RateOverflow { rate: f64, dt: f64, product: f64 },
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("invalid measurement spec: {0}")]
    InvalidSpec(String),
}

/// Which spin a pulse addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Spin {
    S,
    E,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// Rotation `exp(-i·angle·σ_axis/2)` on one spin. A negative angle is the
/// same rotation about the negative axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pulse {
    pub target: Spin,
    pub axis: Axis,
    pub angle: f64,
}

impl Pulse {
    pub fn new(target: Spin, axis: Axis, angle: f64) -> Self {
        Self {
            target,
            axis,
            angle,
        }
    }

    pub fn degrees(target: Spin, axis: Axis, degrees: f64) -> Self {
        Self::new(target, axis, degrees.to_radians())
    }

    /// Ideal rotation on the two-spin register.
    pub fn rotation(&self) -> DenseMatrix {
        let p = match self.axis {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
        };
        let factors = match self.target {
            Spin::S => vec![p, Pauli::I],
            Spin::E => vec![Pauli::I, p],
        };
        // two factors is always a valid Pauli string
        let ps = PauliString::new(factors).expect("two-qubit Pauli string");
        pauli_exp(&ps, self.angle)
    }
}

fn zz() -> PauliString {
    PauliString::new(vec![Pauli::Z, Pauli::Z]).expect("two-qubit Pauli string")
}

/// Physical parameters of the S–E pair.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinSystemParams {
    /// Scalar coupling J/2π in Hz.
    pub j_hz: f64,
    /// Flip time constant T_d of E in ms; `p_e = 1/(2·T_d)`. Infinite disables flips.
    pub t_d_ms: f64,
    /// `1/p_s` in ms. Infinite disables longitudinal relaxation of S.
    pub t1s_ms: f64,
    /// Fixed point of the relaxation branch.
    pub thermal: DensityMatrix,
}

impl SpinSystemParams {
    pub fn new(j_hz: f64, t_d_ms: f64, t1s_ms: f64) -> Result<Self, ChannelError> {
        let params = Self {
            j_hz,
            t_d_ms,
            t1s_ms,
            thermal: default_thermal(),
        };
        params.validate()?;
        Ok(params)
    }

    /// J/2π = 215 Hz, (T_d, 1/p_s) = (6.5, 300) ms.
    pub fn chloroform() -> Self {
        Self {
            j_hz: 215.0,
            t_d_ms: 6.5,
            t1s_ms: 300.0,
            thermal: default_thermal(),
        }
    }

    /// Theory-mode parameters: the time unit is one coupling period
    /// (J_ang = 2π per unit), flips at rate `p_e` per unit, no relaxation.
    ///
    /// The channel functions take durations in "ms"; theory mode maps one
    /// unit onto one ms, so J/2π is 1000 Hz.
    pub fn theory(p_e: f64) -> Result<Self, ChannelError> {
        if !(p_e >= 0.0 && p_e.is_finite()) {
            return Err(ChannelError::InvalidParameter {
                name: "p_e",
                value: p_e,
                reason: "must be finite and non-negative",
            });
        }
        let t_d = if p_e == 0.0 {
            f64::INFINITY
        } else {
            1.0 / (2.0 * p_e)
        };
        Self::new(1000.0, t_d, f64::INFINITY)
    }

    pub fn with_thermal(mut self, thermal: DensityMatrix) -> Result<Self, ChannelError> {
        if thermal.dim() != 4 {
            return Err(QmatError::DimensionMismatch {
                left: thermal.dim(),
                right: 4,
            }
            .into());
        }
        thermal.validate()?;
        self.thermal = thermal;
        Ok(self)
    }

    /// Same parameters with `T_1s = ∞`.
    pub fn without_relaxation(&self) -> Self {
        Self {
            t1s_ms: f64::INFINITY,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let positive = |name, value: f64| {
            if value > 0.0 && !value.is_nan() {
                Ok(())
            } else {
                Err(ChannelError::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive",
                })
            }
        };
        positive("j_hz", self.j_hz)?;
        if !self.j_hz.is_finite() {
            return Err(ChannelError::InvalidParameter {
                name: "j_hz",
                value: self.j_hz,
                reason: "must be finite",
            });
        }
        positive("t_d_ms", self.t_d_ms)?;
        positive("t1s_ms", self.t1s_ms)?;
        if self.thermal.dim() != 4 {
            return Err(QmatError::DimensionMismatch {
                left: self.thermal.dim(),
                right: 4,
            }
            .into());
        }
        self.thermal.validate()?;
        Ok(())
    }

    /// Angular coupling J in rad/ms.
    pub fn coupling(&self) -> f64 {
        2.0 * PI * self.j_hz / 1000.0
    }

    /// `p_e = 1/(2·T_d)` in 1/ms.
    pub fn flip_rate(&self) -> f64 {
        1.0 / (2.0 * self.t_d_ms)
    }

    /// `p_s = 1/T_1s` in 1/ms.
    pub fn relax_rate(&self) -> f64 {
        1.0 / self.t1s_ms
    }

    /// `exp(-i·H_J·dt)` with `H_J = J σz⊗σz / 4`.
    pub fn coupling_propagator(&self, dt: f64) -> DenseMatrix {
        pauli_exp(&zz(), self.coupling() * dt / 2.0)
    }
}

/// `|0⟩⟨0| ⊗ σ0/2`.
pub fn default_thermal() -> DensityMatrix {
    let mixed = DensityMatrix::from_bloch(0.0, 0.0, 0.0);
    DensityMatrix::zero()
        .tensor(&mixed)
        .expect("two-qubit product")
}

/// Axis of the π flips that E suffers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlipAxis {
    FixedY,
    RandomTheta { seed: u64 },
}

/// Flip noise on E: rate `p_e` and axis convention.
///
/// In `RandomTheta` mode every call to [`dephasing_step`] draws a fresh
/// axis angle from a ChaCha8 stream seeded at construction.
#[derive(Clone, Debug)]
pub struct FlipNoise {
    pub rate: f64,
    axis: FlipAxis,
    rng: Option<ChaCha8Rng>,
}

impl FlipNoise {
    pub fn fixed_y(rate: f64) -> Self {
        Self {
            rate,
            axis: FlipAxis::FixedY,
            rng: None,
        }
    }

    pub fn random_theta(rate: f64, seed: u64) -> Self {
        Self {
            rate,
            axis: FlipAxis::RandomTheta { seed },
            rng: Some(ChaCha8Rng::seed_from_u64(seed)),
        }
    }

    pub fn none() -> Self {
        Self::fixed_y(0.0)
    }

    /// Fixed-y noise at the rate implied by `params.t_d_ms`.
    pub fn from_params(params: &SpinSystemParams) -> Self {
        Self::fixed_y(params.flip_rate())
    }

    pub fn axis(&self) -> FlipAxis {
        self.axis
    }

    /// Flip operator on E: `σ0⊗σy`, or `σ0⊗(σx cosθ + σy sinθ)` with a freshly drawn θ.
    fn draw_flip(&mut self) -> DenseMatrix {
        let e_op = match self.rng.as_mut() {
            None => sigma_y(),
            Some(rng) => {
                let theta = rng.random::<f64>() * 2.0 * PI;
                let (s, c) = theta.sin_cos();
                sigma_x()
                    .scale_real(c)
                    .add(&sigma_y().scale_real(s))
                    .expect("2x2 sum")
            }
        };
        kron(&sigma_0(), &e_op).expect("two-qubit product")
    }
}

/// Lifts a two-spin operator onto a register that may carry a pointer qubit.
fn lift(op: DenseMatrix, dim: usize) -> Result<DenseMatrix, ChannelError> {
    match dim {
        4 => Ok(op),
        8 => Ok(kron(&op, &sigma_0())?),
        other => Err(QmatError::BadDimension(other).into()),
    }
}

fn flip_y() -> DenseMatrix {
    kron(&sigma_0(), &sigma_y()).expect("two-qubit product")
}

fn check_duration(name: &'static str, dt: f64) -> Result<(), ChannelError> {
    if dt >= 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(ChannelError::InvalidParameter {
            name,
            value: dt,
            reason: "duration must be finite and non-negative",
        })
    }
}

fn branch_weight(rate: f64, dt: f64) -> Result<f64, ChannelError> {
    let product = rate * dt;
    if !(0.0..=1.0).contains(&product) {
        return Err(ChannelError::RateOverflow { rate, dt, product });
    }
    Ok(product)
}

fn combine(terms: &[(f64, &DenseMatrix)]) -> Result<DensityMatrix, ChannelError> {
    Ok(DensityMatrix::from_matrix_unchecked(DenseMatrix::weighted_sum(terms)?))
}

/// Flip-noise dephasing over `dt` with the coupling kept in both branches:
/// `(1 - p_e dt)·Ad(U_J, ρ) + p_e dt·Ad(F·U_J, ρ)`.
pub fn dephasing_step(
    rho: &DensityMatrix,
    params: &SpinSystemParams,
    noise: &mut FlipNoise,
    dt: f64,
) -> Result<DensityMatrix, ChannelError> {
    check_duration("dt", dt)?;
    let q = branch_weight(noise.rate, dt)?;
    let dim = rho.dim();
    let u = lift(params.coupling_propagator(dt), dim)?;
    let stay = ad(&u, rho)?;
    if q == 0.0 {
        return Ok(stay);
    }
    let fu = lift(noise.draw_flip(), dim)?.matmul(&u)?;
    let flipped = ad(&fu, rho)?;
    combine(&[(1.0 - q, stay.matrix()), (q, flipped.matrix())])
}

fn thermal_for(rho: &DensityMatrix, params: &SpinSystemParams) -> Result<(), ChannelError> {
    if rho.dim() != params.thermal.dim() {
        return Err(QmatError::DimensionMismatch {
            left: rho.dim(),
            right: params.thermal.dim(),
        }
        .into());
    }
    Ok(())
}

/// Longitudinal relaxation of S toward the thermal state:
/// `(1 - p_s dt)·Ad(U_J, ρ) + p_s dt·ρ_th`.
pub fn relax_step(
    rho: &DensityMatrix,
    params: &SpinSystemParams,
    dt: f64,
) -> Result<DensityMatrix, ChannelError> {
    check_duration("dt", dt)?;
    thermal_for(rho, params)?;
    let q = branch_weight(params.relax_rate(), dt)?;
    let stay = ad(&params.coupling_propagator(dt), rho)?;
    combine(&[(1.0 - q, stay.matrix()), (q, params.thermal.matrix())])
}

/// Free evolution with flips and relaxation:
/// `(1 - (p_s+p_e)dt)·Ad(U_J, ρ) + p_e dt·Ad(σ0⊗σy, ρ) + p_s dt·ρ_th`.
///
/// Unlike [`dephasing_step`], the flip branch carries no coupling
/// propagator; this is accurate while `J·dt ≪ 1`.
pub fn evolve_step(
    rho: &DensityMatrix,
    params: &SpinSystemParams,
    noise: &FlipNoise,
    dt: f64,
) -> Result<DensityMatrix, ChannelError> {
    check_duration("dt", dt)?;
    let u = params.coupling_propagator(dt);
    noisy_unitary_step(rho, params, noise, &u, dt)
}

/// Finite-duration pulse: the unitary branch is
/// `exp(-i(angle·σ_axis/2 + H_J τ))`, approximated by the symmetric split
/// `exp(-iH_J τ/2)·exp(-i·angle·σ_axis/2)·exp(-iH_J τ/2)`; the flip and
/// relaxation branches are those of [`evolve_step`] over `τ`.
pub fn pulse_step(
    rho: &DensityMatrix,
    params: &SpinSystemParams,
    noise: &FlipNoise,
    pulse: &Pulse,
    tau: f64,
) -> Result<DensityMatrix, ChannelError> {
    check_duration("tau", tau)?;
    let half = params.coupling_propagator(tau / 2.0);
    let u = half.matmul(&pulse.rotation())?.matmul(&half)?;
    noisy_unitary_step(rho, params, noise, &u, tau)
}

fn noisy_unitary_step(
    rho: &DensityMatrix,
    params: &SpinSystemParams,
    noise: &FlipNoise,
    u: &DenseMatrix,
    dt: f64,
) -> Result<DensityMatrix, ChannelError> {
    thermal_for(rho, params)?;
    let pe = noise.rate;
    let ps = params.relax_rate();
    let total = branch_weight(pe + ps, dt)?;
    let stay = ad(u, rho)?;
    if total == 0.0 {
        return Ok(stay);
    }
    let flipped = ad(&flip_y(), rho)?;
    combine(&[
        (1.0 - total, stay.matrix()),
        (pe * dt, flipped.matrix()),
        (ps * dt, params.thermal.matrix()),
    ])
}

/// Number of `dt` steps that cover `duration` (ceiling, with 1e-9 slack
/// so that aligned durations are not rounded up).
pub fn steps_for(duration: f64, dt: f64) -> usize {
    if duration <= 0.0 || dt <= 0.0 {
        return 0;
    }
    ((duration / dt) - 1e-9).ceil().max(0.0) as usize
}

/// Which qubit controls the CNOT of the ideal measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ControlRole {
    /// Pointer controls, S is the target. With a `|+⟩` pointer this is an
    /// x-basis non-selective measurement of S.
    PointerControls,
    /// S controls, the pointer is the target (z-basis measurement of S).
    SystemControls,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        }
    }
}

/// One non-selective measurement of S.
#[derive(Clone, Debug, PartialEq)]
pub enum MeasurementSpec {
    /// Instantaneous `½Ad(CNOT) + ½Ad(σy_D·CNOT)` with a freshly prepared pointer.
    Ideal {
        control: ControlRole,
        pointer: DensityMatrix,
    },
    /// `M±(τ_z)`: ±y π/2 pulse on S, free evolution for `τ_z`, ∓y π/2 pulse.
    Entangler { sign: Sign, tau_z_ms: f64 },
}

impl MeasurementSpec {
    /// Pointer-controlled CNOT with pointer `|+⟩`: x-basis measurement of S.
    pub fn ideal_x() -> Self {
        Self::Ideal {
            control: ControlRole::PointerControls,
            pointer: DensityMatrix::plus(),
        }
    }

    /// Pointer in `|0⟩` controlling S, which leaves S untouched.
    pub fn ideal_literal() -> Self {
        Self::Ideal {
            control: ControlRole::PointerControls,
            pointer: DensityMatrix::zero(),
        }
    }

    pub fn entangler(sign: Sign, tau_z_ms: f64) -> Self {
        Self::Entangler { sign, tau_z_ms }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        match self {
            Self::Ideal { pointer, .. } => {
                if pointer.dim() != 2 {
                    return Err(ChannelError::InvalidSpec(format!(
                        "pointer must be a single qubit, got dim {}",
                        pointer.dim()
                    )));
                }
                pointer
                    .validate()
                    .map_err(|e| ChannelError::InvalidSpec(format!("pointer: {e}")))
            }
            Self::Entangler { tau_z_ms, .. } => {
                if *tau_z_ms >= 0.0 && tau_z_ms.is_finite() {
                    Ok(())
                } else {
                    Err(ChannelError::InvalidSpec(format!(
                        "tau_z must be non-negative, got {tau_z_ms}"
                    )))
                }
            }
        }
    }
}

fn projector(bit: usize) -> DenseMatrix {
    if bit == 0 {
        DensityMatrix::zero().into_matrix()
    } else {
        DensityMatrix::one().into_matrix()
    }
}

/// Three-qubit operator acting as `ops[q]` on qubit `q` (identity where `None`).
fn on_three(ops: [Option<DenseMatrix>; 3]) -> DenseMatrix {
    let [a, b, c] = ops.map(|o| o.unwrap_or_else(sigma_0));
    let ab = kron(&a, &b).expect("two-qubit product");
    kron(&ab, &c).expect("three-qubit product")
}

fn cnot3(control: usize, target: usize) -> DenseMatrix {
    let mut idle: [Option<DenseMatrix>; 3] = [None, None, None];
    idle[control] = Some(projector(0));
    let mut flip: [Option<DenseMatrix>; 3] = [None, None, None];
    flip[control] = Some(projector(1));
    flip[target] = Some(sigma_x());
    on_three(idle).add(&on_three(flip)).expect("8x8 sum")
}

/// Ideal non-selective measurement of S with a pointer qubit.
///
/// `rho` is either the S–E register (dim 4) or S–E–pointer (dim 8). The
/// pointer is replaced by the spec's preparation before the map; a dim-4
/// input gets the pointer traced out again afterwards.
pub fn ideal_measurement(
    rho: &DensityMatrix,
    spec: &MeasurementSpec,
) -> Result<DensityMatrix, ChannelError> {
    spec.validate()?;
    let MeasurementSpec::Ideal { control, pointer } = spec else {
        return Err(ChannelError::InvalidSpec(
            "ideal_measurement needs an ideal spec".into(),
        ));
    };
    let base = match rho.dim() {
        4 => rho.clone(),
        8 => ptrace(rho, &[0, 1])?,
        other => return Err(QmatError::BadDimension(other).into()),
    };
    let full = base.tensor(pointer)?;
    let e1 = match control {
        ControlRole::PointerControls => cnot3(2, 0),
        ControlRole::SystemControls => cnot3(0, 2),
    };
    let e2 = on_three([None, None, Some(sigma_y())]).matmul(&e1)?;
    let a = ad(&e1, &full)?;
    let b = ad(&e2, &full)?;
    let out = combine(&[(0.5, a.matrix()), (0.5, b.matrix())])?;
    if rho.dim() == 8 {
        Ok(out)
    } else {
        Ok(ptrace(&out, &[0, 1])?)
    }
}

/// First pulse of `M±`: `exp(±iπσy/4)` on S, i.e. a rotation by ∓π/2.
pub fn entangler_opening_pulse(sign: Sign) -> Pulse {
    let angle = match sign {
        Sign::Plus => -PI / 2.0,
        Sign::Minus => PI / 2.0,
    };
    Pulse::new(Spin::S, Axis::Y, angle)
}

/// `M±(τ_z)` built from pulse and free-evolution steps.
pub fn entangler_measurement(
    rho: &DensityMatrix,
    params: &SpinSystemParams,
    noise: &FlipNoise,
    spec: &MeasurementSpec,
    dt: f64,
    pulse_tau: f64,
) -> Result<DensityMatrix, ChannelError> {
    spec.validate()?;
    let MeasurementSpec::Entangler { sign, tau_z_ms } = spec else {
        return Err(ChannelError::InvalidSpec(
            "entangler_measurement needs an entangler spec".into(),
        ));
    };
    let open = entangler_opening_pulse(*sign);
    let close = Pulse::new(open.target, open.axis, -open.angle);
    let mut state = pulse_step(rho, params, noise, &open, pulse_tau)?;
    for _ in 0..steps_for(*tau_z_ms, dt) {
        state = evolve_step(&state, params, noise, dt)?;
    }
    pulse_step(&state, params, noise, &close, pulse_tau)
}

/// Closed form of the noiseless `M±(τ_z)`: `exp(∓i(J τ_z) σx⊗σz/4)`.
pub fn entangler_closed_form(sign: Sign, params: &SpinSystemParams, tau_z: f64) -> DenseMatrix {
    let xz = PauliString::new(vec![Pauli::X, Pauli::Z]).expect("two-qubit Pauli string");
    let half_angle = params.coupling() * tau_z / 2.0;
    match sign {
        Sign::Plus => pauli_exp(&xz, half_angle),
        Sign::Minus => pauli_exp(&xz, -half_angle),
    }
}
