//! Two-qubit parity code: encode `α|++⟩ + β|−−⟩`, apply small x-basis
//! flip errors, and project back onto the even-parity code space.

use thiserror::Error;

use crate::qmat::{
    ad, kron, ptrace, sigma_0, sigma_x, sigma_z, DenseMatrix, DensityMatrix, QmatError, C64,
};

/// Allowed deviation of `|α|² + |β|²` from one.
pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtectError {
    #[error(transparent)]
    Qmat(#[from] QmatError),
    #[error("amplitudes are not normalized: |α|² + |β|² = {0}")]
    NotNormalized(f64),
    #[error("error probability ε = {0} outside [0, 1)")]
    EpsilonOutOfRange(f64),
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("nothing survived the projection")]
    Annihilated,
}

/// How the flip errors are modelled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ErrorModel {
    /// `(1-ε)ρ + (ε/2)Z₁ρZ₁ + (ε/2)Z₂ρZ₂`: independent flips with the ε²
    /// double-flip term dropped.
    #[default]
    FirstOrder,
    /// Each qubit flips independently with probability ε/2, keeping the
    /// `ε²/4` double-flip branch.
    IndependentFlips,
}

fn ket_pp() -> Vec<C64> {
    vec![C64::new(0.5, 0.0); 4]
}

fn ket_mm() -> Vec<C64> {
    [0.5, -0.5, -0.5, 0.5]
        .iter()
        .map(|&v| C64::new(v, 0.0))
        .collect()
}

/// `α|++⟩ + β|−−⟩` as a ket.
pub fn encode_ket(alpha: C64, beta: C64) -> Result<Vec<C64>, ProtectError> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if !((norm - 1.0).abs() <= NORM_TOL) {
        return Err(ProtectError::NotNormalized(norm));
    }
    Ok(ket_pp()
        .into_iter()
        .zip(ket_mm())
        .map(|(p, m)| alpha * p + beta * m)
        .collect())
}

pub fn encode(alpha: C64, beta: C64) -> Result<DensityMatrix, ProtectError> {
    Ok(DensityMatrix::pure(&encode_ket(alpha, beta)?)?)
}

fn z_on(qubit: usize) -> DenseMatrix {
    let (a, b) = if qubit == 0 {
        (sigma_z(), sigma_0())
    } else {
        (sigma_0(), sigma_z())
    };
    kron(&a, &b).expect("two-qubit product")
}

/// One round of x-basis flip errors with total first-order weight ε.
pub fn error_step(
    rho: &DensityMatrix,
    epsilon: f64,
    model: ErrorModel,
) -> Result<DensityMatrix, ProtectError> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(ProtectError::EpsilonOutOfRange(epsilon));
    }
    if rho.dim() != 4 {
        return Err(QmatError::BadDimension(rho.dim()).into());
    }
    let z1 = z_on(0);
    let z2 = z_on(1);
    let f1 = ad(&z1, rho)?;
    let f2 = ad(&z2, rho)?;
    let half = epsilon / 2.0;
    let out = match model {
        ErrorModel::FirstOrder => DenseMatrix::weighted_sum(&[
            (1.0 - epsilon, rho.matrix()),
            (half, f1.matrix()),
            (half, f2.matrix()),
        ])?,
        ErrorModel::IndependentFlips => {
            let both = ad(&z1.matmul(&z2)?, rho)?;
            let keep = 1.0 - half;
            DenseMatrix::weighted_sum(&[
                (keep * keep, rho.matrix()),
                (half * keep, f1.matrix()),
                (half * keep, f2.matrix()),
                (half * half, both.matrix()),
            ])?
        }
    };
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// `|++⟩⟨++| + |−−⟩⟨−−| = (I + X⊗X)/2`.
pub fn even_projector() -> DenseMatrix {
    let xx = kron(&sigma_x(), &sigma_x()).expect("two-qubit product");
    DenseMatrix::identity(4)
        .expect("dim 4")
        .add(&xx)
        .expect("4x4 sum")
        .scale_real(0.5)
}

pub fn odd_projector() -> DenseMatrix {
    DenseMatrix::identity(4)
        .expect("dim 4")
        .sub(&even_projector())
        .expect("4x4 difference")
}

/// Unnormalized even-parity branch and its weight.
#[derive(Clone, Debug, PartialEq)]
pub struct ParityOutcome {
    pub even: DenseMatrix,
    pub survival: f64,
}

impl ParityOutcome {
    pub fn renormalized(&self) -> Result<DensityMatrix, ProtectError> {
        if self.survival <= 0.0 {
            return Err(ProtectError::Annihilated);
        }
        Ok(DensityMatrix::from_matrix_unchecked(
            self.even.scale_real(1.0 / self.survival),
        ))
    }
}

fn sandwich(p: &DenseMatrix, m: &DenseMatrix) -> Result<DenseMatrix, QmatError> {
    p.matmul(m)?.matmul(p)
}

/// Selective projection onto the code space: `P ρ P` and `Tr(P ρ P)`.
pub fn parity_project(rho: &DensityMatrix) -> Result<ParityOutcome, ProtectError> {
    if rho.dim() != 4 {
        return Err(QmatError::BadDimension(rho.dim()).into());
    }
    let even = sandwich(&even_projector(), rho.matrix())?;
    let survival = even.trace().re;
    Ok(ParityOutcome { even, survival })
}

/// Non-selective parity measurement: `P_e ρ P_e + P_o ρ P_o`.
pub fn parity_dephase(rho: &DensityMatrix) -> Result<DensityMatrix, ProtectError> {
    if rho.dim() != 4 {
        return Err(QmatError::BadDimension(rho.dim()).into());
    }
    let even = sandwich(&even_projector(), rho.matrix())?;
    let odd = sandwich(&odd_projector(), rho.matrix())?;
    Ok(DensityMatrix::from_matrix_unchecked(even.add(&odd)?))
}

/// Flip of the ancilla (qubit 2) controlled on qubit `control` being `|−⟩`.
fn x_controlled_flip(control: usize) -> DenseMatrix {
    let plus = DensityMatrix::plus().into_matrix();
    let minus = DensityMatrix::minus().into_matrix();
    let place = |op_c: DenseMatrix, op_a: DenseMatrix| {
        let (q0, q1) = if control == 0 {
            (op_c, sigma_0())
        } else {
            (sigma_0(), op_c)
        };
        let ab = kron(&q0, &q1).expect("two-qubit product");
        kron(&ab, &op_a).expect("three-qubit product")
    };
    place(plus, sigma_0())
        .add(&place(minus, sigma_x()))
        .expect("8x8 sum")
}

/// Parity written onto a fresh `|0⟩` ancilla by two x-basis controlled flips.
fn ancilla_register(rho: &DensityMatrix) -> Result<DensityMatrix, ProtectError> {
    if rho.dim() != 4 {
        return Err(QmatError::BadDimension(rho.dim()).into());
    }
    let full = rho.tensor(&DensityMatrix::zero())?;
    let u = x_controlled_flip(1).matmul(&x_controlled_flip(0))?;
    Ok(ad(&u, &full)?)
}

/// [`parity_project`] realized with an ancilla read out in `|0⟩`.
pub fn parity_project_via_ancilla(rho: &DensityMatrix) -> Result<ParityOutcome, ProtectError> {
    let reg = ancilla_register(rho)?;
    let select = kron(&DenseMatrix::identity(4)?, &DensityMatrix::zero().into_matrix())?;
    let kept = sandwich(&select, reg.matrix())?;
    let even = ptrace(&DensityMatrix::from_matrix_unchecked(kept), &[0, 1])?.into_matrix();
    let survival = even.trace().re;
    Ok(ParityOutcome { even, survival })
}

/// [`parity_dephase`] realized by discarding the ancilla.
pub fn parity_dephase_via_ancilla(rho: &DensityMatrix) -> Result<DensityMatrix, ProtectError> {
    Ok(ptrace(&ancilla_register(rho)?, &[0, 1])?)
}

/// `H⊗H`, then CNOT from qubit 0 to 1, then discard qubit 1.
pub fn decode(rho: &DensityMatrix) -> Result<DensityMatrix, ProtectError> {
    if rho.dim() != 4 {
        return Err(QmatError::BadDimension(rho.dim()).into());
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h = sigma_x().add(&sigma_z())?.scale_real(s);
    let hh = kron(&h, &h)?;
    let p0 = DensityMatrix::zero().into_matrix();
    let p1 = DensityMatrix::one().into_matrix();
    let cnot = kron(&p0, &sigma_0())?.add(&kron(&p1, &sigma_x())?)?;
    let u = cnot.matmul(&hh)?;
    Ok(ptrace(&ad(&u, rho)?, &[0])?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtectParams {
    pub alpha: C64,
    pub beta: C64,
    /// Decay curvature Γ: one interval of length t has error weight `Γ²t²`.
    pub gamma: f64,
    pub total_t: f64,
    pub n_meas: u32,
    pub model: ErrorModel,
}

impl ProtectParams {
    pub fn new(alpha: C64, beta: C64, gamma: f64, total_t: f64, n_meas: u32) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            total_t,
            n_meas,
            model: ErrorModel::FirstOrder,
        }
    }

    pub fn validate(&self) -> Result<(), ProtectError> {
        let norm = self.alpha.norm_sqr() + self.beta.norm_sqr();
        if !((norm - 1.0).abs() <= NORM_TOL) {
            return Err(ProtectError::NotNormalized(norm));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(ProtectError::InvalidParameter {
                name: "gamma",
                value: self.gamma,
            });
        }
        if !(self.total_t >= 0.0 && self.total_t.is_finite()) {
            return Err(ProtectError::InvalidParameter {
                name: "total_t",
                value: self.total_t,
            });
        }
        if self.n_meas == 0 {
            return Err(ProtectError::InvalidParameter {
                name: "n_meas",
                value: 0.0,
            });
        }
        let eps = self.epsilon();
        if eps >= 1.0 {
            return Err(ProtectError::EpsilonOutOfRange(eps));
        }
        Ok(())
    }

    /// `ε = Γ²(T/N)²`
    pub fn epsilon(&self) -> f64 {
        let g = self.gamma * self.total_t / f64::from(self.n_meas);
        g * g
    }

    /// `(1 - ε)^N`
    pub fn predicted_survival(&self) -> f64 {
        (1.0 - self.epsilon()).powi(self.n_meas as i32)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtectOutcome {
    /// Fidelity of the renormalized final state to the encoded state.
    pub final_fidelity: f64,
    /// Product of the per-round survival weights.
    pub survival: f64,
    pub final_state: DensityMatrix,
}

/// N rounds of error then selective parity projection.
pub fn protect_run(params: &ProtectParams) -> Result<ProtectOutcome, ProtectError> {
    params.validate()?;
    let encoded = encode(params.alpha, params.beta)?;
    let eps = params.epsilon();
    let mut rho = encoded.clone();
    let mut survival = 1.0;
    for _ in 0..params.n_meas {
        let noisy = error_step(&rho, eps, params.model)?;
        let out = parity_project(&noisy)?;
        survival *= out.survival;
        rho = out.renormalized()?;
    }
    Ok(ProtectOutcome {
        final_fidelity: encoded.fidelity(&rho)?,
        survival,
        final_state: rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::expect;
    use crate::testutil::random_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn basis(signs: [f64; 2]) -> DensityMatrix {
        let one = |s: f64| {
            if s > 0.0 {
                DensityMatrix::plus()
            } else {
                DensityMatrix::minus()
            }
        };
        one(signs[0]).tensor(&one(signs[1])).unwrap()
    }

    #[test]
    fn encode_examples() {
        let pp = encode(c(1.0), c(0.0)).unwrap();
        assert!(pp.matrix().max_abs_diff(basis([1.0, 1.0]).matrix()).unwrap() < 1e-15);
        let mm = encode(c(0.0), c(1.0)).unwrap();
        assert!(mm.matrix().max_abs_diff(basis([-1.0, -1.0]).matrix()).unwrap() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let sup = encode(c(s), c(s)).unwrap();
        let xx = kron(&sigma_x(), &sigma_x()).unwrap();
        assert!((expect(&xx, &sup).unwrap().re - 1.0).abs() < 1e-12);
        assert!((sup.fidelity(&sup).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn encode_rejects_unnormalized() {
        assert!(matches!(
            encode(c(1.0), c(0.1)),
            Err(ProtectError::NotNormalized(_))
        ));
    }

    #[test]
    fn error_step_examples() {
        let rho = encode(c(1.0), c(0.0)).unwrap();
        let same = error_step(&rho, 0.0, ErrorModel::FirstOrder).unwrap();
        assert_eq!(same, rho);
        let out = error_step(&rho, 0.02, ErrorModel::FirstOrder).unwrap();
        let weight = |signs| expect(basis(signs).matrix(), &out).unwrap().re;
        assert!((weight([-1.0, 1.0]) - 0.01).abs() < 1e-15);
        assert!((weight([1.0, -1.0]) - 0.01).abs() < 1e-15);
        assert!((weight([1.0, 1.0]) - 0.98).abs() < 1e-15);
        assert!(weight([-1.0, -1.0]).abs() < 1e-15);
        assert!(error_step(&rho, 1.5, ErrorModel::FirstOrder).is_err());
        assert!(error_step(&rho, -0.1, ErrorModel::FirstOrder).is_err());
    }

    #[test]
    fn error_models_differ_at_second_order() {
        let rho = encode(c(0.6), c(0.8)).unwrap();
        for eps in [0.0, 0.01, 0.1, 0.5, 1.0] {
            let a = error_step(&rho, eps, ErrorModel::FirstOrder).unwrap();
            let b = error_step(&rho, eps, ErrorModel::IndependentFlips).unwrap();
            assert!((a.trace() - 1.0).abs() < 1e-14 && (b.trace() - 1.0).abs() < 1e-14);
            let diff = a.matrix().max_abs_diff(b.matrix()).unwrap();
            assert!(diff <= eps * eps / 2.0 + 1e-15, "eps = {eps}: {diff}");
            let double = expect(basis([-1.0, -1.0]).matrix(), &b).unwrap().re;
            let first = expect(basis([-1.0, -1.0]).matrix(), &a).unwrap().re;
            // first order: (1-ε)·0.64; independent: (1-ε/2)²·0.64 + (ε²/4)·0.36
            assert!((double - first - eps * eps / 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn projection_examples() {
        let rho = encode(C64::new(0.6, 0.0), C64::new(0.0, 0.8)).unwrap();
        let out = parity_project(&rho).unwrap();
        assert!((out.survival - 1.0).abs() < 1e-14);
        assert!(out.even.max_abs_diff(rho.matrix()).unwrap() < 1e-15);

        let odd = parity_project(&basis([-1.0, 1.0])).unwrap();
        assert!(odd.survival.abs() < 1e-15);
        assert!(odd.even.max_abs_diff(&DenseMatrix::zeros(4).unwrap()).unwrap() < 1e-15);
        assert_eq!(odd.renormalized(), Err(ProtectError::Annihilated));

        let eps = 0.03;
        let noisy = error_step(&rho, eps, ErrorModel::FirstOrder).unwrap();
        let out = parity_project(&noisy).unwrap();
        assert!((out.survival - (1.0 - eps)).abs() < 1e-15);
        let expected = rho.matrix().scale_real(1.0 - eps);
        assert!(out.even.max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn ancilla_circuit_matches_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let rho = random_state(&mut rng, 4);
            let direct = parity_project(&rho).unwrap();
            let circuit = parity_project_via_ancilla(&rho).unwrap();
            assert!(direct.even.max_abs_diff(&circuit.even).unwrap() < 1e-12);
            assert!((direct.survival - circuit.survival).abs() < 1e-12);
            let a = parity_dephase(&rho).unwrap();
            let b = parity_dephase_via_ancilla(&rho).unwrap();
            assert!(a.matrix().max_abs_diff(b.matrix()).unwrap() < 1e-12);
            assert!((a.trace() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn run_examples() {
        let p = ProtectParams::new(c(1.0), c(0.0), 1.0, 1.0, 10);
        let out = protect_run(&p).unwrap();
        assert!((out.survival - 0.99f64.powi(10)).abs() < 1e-12);
        assert!((out.survival - 0.904_38).abs() < 1e-5);
        assert!((out.final_fidelity - 1.0).abs() < 1e-12);

        let many = protect_run(&ProtectParams::new(c(1.0), c(0.0), 1.0, 1.0, 4096)).unwrap();
        assert!(many.survival >= 0.9997);

        for n in [1, 5, 50] {
            let out = protect_run(&ProtectParams::new(c(0.6), c(0.8), 0.0, 3.0, n)).unwrap();
            assert_eq!(out.survival, 1.0);
            assert!((out.final_fidelity - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn survival_matches_product_formula() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for gamma in [0.1, 0.5, 1.0, 2.0] {
            for total in [0.2, 1.0, 1.5] {
                for n in [1u32, 2, 3, 7, 16, 64] {
                    if gamma * total / f64::from(n) >= 0.5 {
                        continue;
                    }
                    let p = ProtectParams::new(c(s), C64::new(0.0, s), gamma, total, n);
                    let out = protect_run(&p).unwrap();
                    assert!((out.survival - p.predicted_survival()).abs() < 1e-12);
                    assert!((out.final_fidelity - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn survival_increases_with_n() {
        let mut prev = 0.0;
        for n in 1..=512 {
            let p = ProtectParams::new(c(1.0), c(0.0), 0.9, 1.0, n);
            let s = protect_run(&p).unwrap().survival;
            assert!(s > prev, "n = {n}");
            prev = s;
        }
    }

    #[test]
    fn independent_flips_survival() {
        let mut p = ProtectParams::new(c(0.6), c(0.8), 1.0, 1.0, 10);
        p.model = ErrorModel::IndependentFlips;
        let out = protect_run(&p).unwrap();
        let eps = 0.01;
        let per = (1.0f64 - eps / 2.0).powi(2) + eps * eps / 4.0;
        assert!((out.survival - per.powi(10)).abs() < 1e-12);
        // the double flip stays inside the code space as a logical bit flip
        // |++⟩ ↔ |−−⟩ with probability p per round
        let p = eps * eps / 4.0 / per;
        let flipped = (1.0 - (1.0 - 2.0 * p).powi(10)) / 2.0;
        let overlap = (2.0f64 * 0.6 * 0.8).powi(2);
        let expected = 1.0 - flipped + flipped * overlap;
        assert!((out.final_fidelity - expected).abs() < 1e-12);
        assert!(out.final_fidelity < 1.0);
    }

    #[test]
    fn decode_recovers_input() {
        for (a, b) in [
            (c(1.0), c(0.0)),
            (c(0.0), c(1.0)),
            (C64::new(0.6, 0.0), C64::new(0.0, -0.8)),
            (C64::new(0.5, 0.5), C64::new(0.5, -0.5)),
        ] {
            let out = protect_run(&ProtectParams::new(a, b, 1.0, 1.0, 20)).unwrap();
            let logical = decode(&out.final_state).unwrap();
            let target = DensityMatrix::pure(&[a, b]).unwrap();
            assert!((logical.fidelity(&target).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn param_validation() {
        let ok = ProtectParams::new(c(1.0), c(0.0), 1.0, 1.0, 2);
        assert!(ok.validate().is_ok());
        let bad = |f: fn(&mut ProtectParams)| {
            let mut p = ok;
            f(&mut p);
            p.validate().is_err()
        };
        assert!(bad(|p| p.gamma = -1.0));
        assert!(bad(|p| p.n_meas = 0));
        assert!(bad(|p| p.beta = c(0.5)));
        assert!(bad(|p| p.gamma = 2.0));
        assert!(bad(|p| p.total_t = f64::NAN));
    }
}
