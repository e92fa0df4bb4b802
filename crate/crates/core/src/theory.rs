//! Closed-form short-time fidelity and Zeno survival for a qubit dephased by
//! a fluctuating field `λ σz A(t)`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("second-order expansion out of range: F = {0} < 0")]
    ExpansionOutOfRange(f64),
    #[error("invalid noise model: {0}")]
    InvalidModel(&'static str),
    #[error("Zeno survival needs a static (slowly fluctuating) environment")]
    NotStatic,
    #[error("number of measurements must be at least 1")]
    NoMeasurements,
}

/// Correlation regime of the environment operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `⟨A(t1)A(t2)⟩ = 2τ_c δ(t1 - t2)`
    DeltaCorrelated,
    /// `⟨A(t1)A(t2)⟩ = 1`
    Static,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    /// Coupling strength λ.
    pub lambda: f64,
    /// Correlation time τ_c; only used by the delta-correlated regime.
    pub tau_c: f64,
    pub regime: Regime,
}

impl NoiseModel {
    pub fn delta_correlated(lambda: f64, tau_c: f64) -> Result<Self, TheoryError> {
        let m = Self {
            lambda,
            tau_c,
            regime: Regime::DeltaCorrelated,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn static_field(lambda: f64) -> Result<Self, TheoryError> {
        let m = Self {
            lambda,
            tau_c: f64::INFINITY,
            regime: Regime::Static,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), TheoryError> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(TheoryError::InvalidModel("lambda must be finite and >= 0"));
        }
        if self.regime == Regime::DeltaCorrelated && !(self.tau_c > 0.0 && self.tau_c.is_finite())
        {
            return Err(TheoryError::InvalidModel(
                "tau_c must be finite and > 0 for delta-correlated noise",
            ));
        }
        Ok(())
    }
}

/// Second-order fidelity `⟨+|ρ_s(t)|+⟩`: `1 - 2λ²τ_c t` (delta-correlated)
/// or `1 - λ²t²` (static).
pub fn fidelity_short_time(model: &NoiseModel, t: f64) -> Result<f64, TheoryError> {
    model.validate()?;
    let l2 = model.lambda * model.lambda;
    let f = match model.regime {
        Regime::DeltaCorrelated => 1.0 - 2.0 * l2 * model.tau_c * t,
        Regime::Static => 1.0 - l2 * t * t,
    };
    if f < 0.0 {
        return Err(TheoryError::ExpansionOutOfRange(f));
    }
    Ok(f)
}

/// Probability of remaining in the initial state after `N` evenly spaced
/// projective measurements over `T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZenoSurvival {
    /// `(1 - λ²(T/N)²)^N`
    pub exact: f64,
    /// `exp(-λ²T²/N)`
    pub approx: f64,
    /// `ln(exact) - ln(approx)`, kept separately so the gap stays accurate
    /// when both values round to nearly the same float.
    log_ratio: f64,
}

impl ZenoSurvival {
    /// `|exact - approx|`
    pub fn gap(&self) -> f64 {
        self.approx * self.log_ratio.exp_m1().abs()
    }
}

/// `ln(1 - u) + u` without cancellation for small `u`.
fn log1m_plus(u: f64) -> f64 {
    if u < 1e-3 {
        // -(u²/2 + u³/3 + ...), truncated well below f64 resolution
        let mut term = u * u;
        let mut sum = 0.0;
        for k in 2..12 {
            sum -= term / k as f64;
            term *= u;
        }
        sum
    } else {
        (-u).ln_1p() + u
    }
}

pub fn zeno_survival(model: &NoiseModel, total: f64, n: u32) -> Result<ZenoSurvival, TheoryError> {
    if model.regime != Regime::Static {
        return Err(TheoryError::NotStatic);
    }
    if n == 0 {
        return Err(TheoryError::NoMeasurements);
    }
    let nf = f64::from(n);
    let per = fidelity_short_time(model, total / nf)?;
    let lt = model.lambda * total;
    let u = 1.0 - per;
    Ok(ZenoSurvival {
        exact: per.powi(n as i32),
        approx: (-lt * lt / nf).exp(),
        log_ratio: nf * log1m_plus(u),
    })
}
