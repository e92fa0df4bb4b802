//! Dense complex linear algebra for registers of one to three qubits.
//!
//! Qubit 0 is the leftmost tensor factor (most significant bit of a basis
//! index). In the two-spin model qubit 0 is the observed spin S and qubit 1
//! the noise-mediating spin E; a measurement pointer, when present, is
//! qubit 2.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Max elementwise |M - M†| accepted for a density matrix.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Max |Tr ρ - 1| accepted for a normalized density matrix.
pub const TRACE_TOL: f64 = 1e-9;
/// Smallest eigenvalue accepted by the positivity check.
pub const POSITIVITY_TOL: f64 = 1e-9;
/// States with `Tr ρ² ≥ 1 - PURE_TOL` are treated as pure by `fidelity`.
pub const PURE_TOL: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QmatError {
    #[error("unsupported dimension {0}; registers hold 1 to 3 qubits (dim 2, 4 or 8)")]
    BadDimension(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected {expected} entries, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("invalid qubit index set {indices:?} for a {qubits}-qubit register")]
    InvalidQubits { indices: Vec<usize>, qubits: usize },
    #[error("matrix is not Hermitian (max |M - M†| = {0:e})")]
    NotHermitian(f64),
    #[error("trace is {re}{im:+}i, expected 1")]
    BadTrace { re: f64, im: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("invalid Pauli label {0:?}")]
    BadPauli(char),
    #[error("Pauli string must name 1 to 3 qubits, got {0}")]
    BadPauliLength(usize),
    #[error("cannot normalize a state with zero norm or trace")]
    ZeroNorm,
}

fn check_dim(dim: usize) -> Result<(), QmatError> {
    match dim {
        2 | 4 | 8 => Ok(()),
        other => Err(QmatError::BadDimension(other)),
    }
}

fn check_same(a: usize, b: usize) -> Result<(), QmatError> {
    if a == b {
        Ok(())
    } else {
        Err(QmatError::DimensionMismatch { left: a, right: b })
    }
}

/// Square complex matrix, row-major, of dimension 2, 4 or 8.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Result<Self, QmatError> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            data: vec![ZERO; dim * dim],
        })
    }

    pub fn identity(dim: usize) -> Result<Self, QmatError> {
        let mut m = Self::zeros(dim)?;
        for k in 0..dim {
            m.data[k * dim + k] = ONE;
        }
        Ok(m)
    }

    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self, QmatError> {
        check_dim(dim)?;
        if data.len() != dim * dim {
            return Err(QmatError::WrongLength {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn diag(entries: &[C64]) -> Result<Self, QmatError> {
        let mut m = Self::zeros(entries.len())?;
        for (k, &v) in entries.iter().enumerate() {
            m.data[k * m.dim + k] = v;
        }
        Ok(m)
    }

    /// `|ψ⟩⟨ψ|` for an (unnormalized) ket.
    pub fn outer(ket: &[C64]) -> Result<Self, QmatError> {
        let dim = ket.len();
        check_dim(dim)?;
        let mut data = Vec::with_capacity(dim * dim);
        for a in ket {
            for b in ket {
                data.push(a * b.conj());
            }
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|k| self.get(k, k)).collect()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        Self { dim: n, data }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    pub fn scale(&self, k: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * k).collect(),
        }
    }

    pub fn scale_real(&self, k: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * k).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, QmatError> {
        check_same(self.dim, other.dim)?;
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    data[r * n + c] += a * other.data[k * n + c];
                }
            }
        }
        Ok(Self { dim: n, data })
    }

    pub fn add(&self, other: &Self) -> Result<Self, QmatError> {
        check_same(self.dim, other.dim)?;
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, QmatError> {
        check_same(self.dim, other.dim)?;
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// `Σ w_k M_k` over equally sized matrices.
    pub fn weighted_sum(terms: &[(f64, &DenseMatrix)]) -> Result<Self, QmatError> {
        let (_, first) = terms.first().ok_or(QmatError::BadDimension(0))?;
        let mut out = Self::zeros(first.dim)?;
        for (w, m) in terms {
            check_same(out.dim, m.dim)?;
            if *w == 0.0 {
                continue;
            }
            for (o, v) in out.data.iter_mut().zip(&m.data) {
                *o += v * *w;
            }
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, QmatError> {
        check_same(self.dim, other.dim)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Max elementwise |M - M†|.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                data[r * n + c] = (self.get(r, c) + self.get(c, r).conj()) * 0.5;
            }
        }
        Self { dim: n, data }
    }

    /// `M v` for a column vector.
    pub fn apply(&self, ket: &[C64]) -> Result<Vec<C64>, QmatError> {
        check_same(self.dim, ket.len())?;
        Ok((0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.get(r, c) * ket[c]).sum())
            .collect())
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = self.hermitian_part();
        let m = DMatrix::from_row_slice(self.dim, self.dim, &h.data);
        let mut vals: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    /// Principal square root of a Hermitian positive semidefinite matrix;
    /// eigenvalues below zero are clipped.
    fn psd_sqrt(&self) -> Self {
        let h = self.hermitian_part();
        let m = DMatrix::from_row_slice(self.dim, self.dim, &h.data);
        let eig = m.symmetric_eigen();
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            let s = lambda.max(0.0).sqrt();
            if s == 0.0 {
                continue;
            }
            let v = eig.eigenvectors.column(k);
            for r in 0..n {
                for c in 0..n {
                    data[r * n + c] += v[r] * v[c].conj() * s;
                }
            }
        }
        Self { dim: n, data }
    }
}

impl fmt::Display for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let v = self.get(r, c);
                    format!("{:+.6}{:+.6}i", v.re, v.im)
                })
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Single-qubit Pauli label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> DenseMatrix {
        let d = match self {
            Pauli::I => vec![ONE, ZERO, ZERO, ONE],
            Pauli::X => vec![ZERO, ONE, ONE, ZERO],
            Pauli::Y => vec![ZERO, -I, I, ZERO],
            Pauli::Z => vec![ONE, ZERO, ZERO, -ONE],
        };
        DenseMatrix { dim: 2, data: d }
    }

    fn label(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

pub fn sigma_0() -> DenseMatrix {
    Pauli::I.matrix()
}

pub fn sigma_x() -> DenseMatrix {
    Pauli::X.matrix()
}

pub fn sigma_y() -> DenseMatrix {
    Pauli::Y.matrix()
}

pub fn sigma_z() -> DenseMatrix {
    Pauli::Z.matrix()
}

/// Tensor product of single-qubit Paulis, one per qubit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(factors: Vec<Pauli>) -> Result<Self, QmatError> {
        if factors.is_empty() || factors.len() > 3 {
            return Err(QmatError::BadPauliLength(factors.len()));
        }
        Ok(Self(factors))
    }

    pub fn factors(&self) -> &[Pauli] {
        &self.0
    }

    pub fn qubits(&self) -> usize {
        self.0.len()
    }

    pub fn matrix(&self) -> DenseMatrix {
        let mut iter = self.0.iter();
        // PauliString::new guarantees 1..=3 factors, so every product fits in dim 8.
        let mut m = iter.next().map(|p| p.matrix()).unwrap_or_else(sigma_0);
        for p in iter {
            m = kron_unchecked(&m, &p.matrix());
        }
        m
    }
}

impl FromStr for PauliString {
    type Err = QmatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let factors = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(QmatError::BadPauli(c)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(factors)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.label())?;
        }
        Ok(())
    }
}

fn kron_unchecked(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (na, nb) = (a.dim, b.dim);
    let n = na * nb;
    let mut data = vec![ZERO; n * n];
    for ar in 0..na {
        for ac in 0..na {
            let av = a.data[ar * na + ac];
            if av == ZERO {
                continue;
            }
            for br in 0..nb {
                for bc in 0..nb {
                    data[(ar * nb + br) * n + ac * nb + bc] = av * b.data[br * nb + bc];
                }
            }
        }
    }
    DenseMatrix { dim: n, data }
}

/// Kronecker product `a ⊗ b`; the product register may hold at most 3 qubits.
pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix, QmatError> {
    let n = a.dim * b.dim;
    if n > 8 {
        return Err(QmatError::BadDimension(n));
    }
    Ok(kron_unchecked(a, b))
}

/// `exp(-i·angle·P/2) = cos(angle/2)·I - i·sin(angle/2)·P`, exact because P² = I.
pub fn pauli_exp(p: &PauliString, angle: f64) -> DenseMatrix {
    let pm = p.matrix();
    let (s, c) = (angle / 2.0).sin_cos();
    let mut out = pm.scale(C64::new(0.0, -s));
    for k in 0..out.dim {
        out.data[k * out.dim + k] += c;
    }
    out
}

/// `Ad(u, ρ) = u ρ u†`. `u` need not be unitary, so the output trace is
/// whatever the branch weight is.
pub fn ad(u: &DenseMatrix, rho: &DensityMatrix) -> Result<DensityMatrix, QmatError> {
    let m = u.matmul(&rho.0)?.matmul(&u.adjoint())?;
    Ok(DensityMatrix(m))
}

/// `Tr(obs·ρ)`.
pub fn expect(obs: &DenseMatrix, rho: &DensityMatrix) -> Result<C64, QmatError> {
    check_same(obs.dim, rho.0.dim)?;
    let n = obs.dim;
    let mut acc = ZERO;
    for r in 0..n {
        for c in 0..n {
            acc += obs.data[r * n + c] * rho.0.data[c * n + r];
        }
    }
    Ok(acc)
}

/// Bloch vector `(Tr σxρ, Tr σyρ, Tr σzρ)` of a single-qubit state.
pub fn bloch(rho: &DensityMatrix) -> Result<[f64; 3], QmatError> {
    check_same(rho.dim(), 2)?;
    let m = &rho.0;
    let off = m.get(0, 1) + m.get(1, 0);
    let x = off.re;
    // Tr(σy ρ) = i(ρ01 - ρ10)
    let y = (I * (m.get(0, 1) - m.get(1, 0))).re;
    let z = (m.get(0, 0) - m.get(1, 1)).re;
    Ok([x, y, z])
}

/// Reduced state over the qubits in `keep` (taken in ascending order).
pub fn ptrace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix, QmatError> {
    let n = rho.0.qubits();
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let invalid = n < 2
        || kept.is_empty()
        || kept.len() != keep.len()
        || kept.iter().any(|&q| q >= n);
    if invalid {
        return Err(QmatError::InvalidQubits {
            indices: keep.to_vec(),
            qubits: n,
        });
    }
    if kept.len() == n {
        return Ok(rho.clone());
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let bit = |idx: usize, q: usize| (idx >> (n - 1 - q)) & 1;
    let reduce = |idx: usize| {
        kept.iter()
            .fold(0usize, |acc, &q| (acc << 1) | bit(idx, q))
    };
    let k = kept.len();
    let rd = 1usize << k;
    let mut out = DenseMatrix::zeros(rd)?;
    let full = rho.0.dim;
    for i in 0..full {
        for j in 0..full {
            if traced.iter().all(|&q| bit(i, q) == bit(j, q)) {
                out.data[reduce(i) * rd + reduce(j)] += rho.0.data[i * full + j];
            }
        }
    }
    Ok(DensityMatrix(out))
}

/// Density matrix of a 1-3 qubit register.
///
/// [`DensityMatrix::new`] checks Hermiticity and unit trace. Maps that
/// return intermediate branches (e.g. [`ad`] with a Kraus operator) build
/// values whose trace is the branch weight; [`DensityMatrix::validate`]
/// re-checks the full invariant set on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(DenseMatrix);

impl DensityMatrix {
    pub fn new(mat: DenseMatrix) -> Result<Self, QmatError> {
        let herm = mat.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(QmatError::NotHermitian(herm));
        }
        let tr = mat.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(QmatError::BadTrace {
                re: tr.re,
                im: tr.im,
            });
        }
        Ok(Self(mat))
    }

    /// Wraps a matrix without checking invariants.
    pub fn from_matrix_unchecked(mat: DenseMatrix) -> Self {
        Self(mat)
    }

    /// Normalized pure state `|ψ⟩⟨ψ|`.
    pub fn pure(ket: &[C64]) -> Result<Self, QmatError> {
        let norm2: f64 = ket.iter().map(|a| a.norm_sqr()).sum();
        if norm2 <= f64::EPSILON {
            return Err(QmatError::ZeroNorm);
        }
        let m = DenseMatrix::outer(ket)?.scale_real(1.0 / norm2);
        Ok(Self(m))
    }

    /// `(σ0 + xσx + yσy + zσz)/2`.
    pub fn from_bloch(x: f64, y: f64, z: f64) -> Self {
        let data = vec![
            C64::new((1.0 + z) / 2.0, 0.0),
            C64::new(x / 2.0, -y / 2.0),
            C64::new(x / 2.0, y / 2.0),
            C64::new((1.0 - z) / 2.0, 0.0),
        ];
        Self(DenseMatrix { dim: 2, data })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self, QmatError> {
        Ok(Self(DenseMatrix::identity(dim)?.scale_real(1.0 / dim as f64)))
    }

    /// |0⟩⟨0|
    pub fn zero() -> Self {
        Self::from_bloch(0.0, 0.0, 1.0)
    }

    /// |1⟩⟨1|
    pub fn one() -> Self {
        Self::from_bloch(0.0, 0.0, -1.0)
    }

    /// |+⟩⟨+|
    pub fn plus() -> Self {
        Self::from_bloch(1.0, 0.0, 0.0)
    }

    /// |−⟩⟨−|
    pub fn minus() -> Self {
        Self::from_bloch(-1.0, 0.0, 0.0)
    }

    /// Product state `self ⊗ other`.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<Self, QmatError> {
        Ok(Self(kron(&self.0, &other.0)?))
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.0.hermiticity_error()
    }

    /// Replaces the matrix by its Hermitian part.
    pub fn symmetrized(&self) -> Self {
        Self(self.0.hermitian_part())
    }

    /// Divides by the trace.
    pub fn normalized(&self) -> Result<Self, QmatError> {
        let tr = self.trace();
        if tr.abs() <= f64::EPSILON {
            return Err(QmatError::ZeroNorm);
        }
        Ok(Self(self.0.scale_real(1.0 / tr)))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0
            .hermitian_eigenvalues()
            .first()
            .copied()
            .unwrap_or(0.0)
    }

    pub fn check_positive(&self) -> Result<(), QmatError> {
        let min = self.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(QmatError::NotPositive(min));
        }
        Ok(())
    }

    /// Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<(), QmatError> {
        let herm = self.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(QmatError::NotHermitian(herm));
        }
        let tr = self.0.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(QmatError::BadTrace {
                re: tr.re,
                im: tr.im,
            });
        }
        self.check_positive()
    }

    /// `Tr ρ²`
    pub fn purity(&self) -> f64 {
        self.0.data.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
    pub fn fidelity(&self, other: &DensityMatrix) -> Result<f64, QmatError> {
        check_same(self.dim(), other.dim())?;
        if self.dim() == 2 {
            // Qubit closed form: Tr(ρσ) + 2√(det ρ · det σ).
            let overlap = expect(&self.0, other)?.re;
            let det = |m: &DenseMatrix| (m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0)).re;
            let dets = (det(&self.0) * det(&other.0)).max(0.0);
            return Ok(overlap + 2.0 * dets.sqrt());
        }
        if self.purity() >= 1.0 - PURE_TOL || other.purity() >= 1.0 - PURE_TOL {
            // one state is pure, F = ⟨ψ|σ|ψ⟩ = Tr(ρσ); avoids square roots of
            // near-zero eigenvalues
            return Ok(expect(&self.0, other)?.re);
        }
        let root = self.0.psd_sqrt();
        let inner = root.matmul(&other.0)?.matmul(&root)?;
        let s: f64 = inner
            .hermitian_eigenvalues()
            .iter()
            .map(|v| v.max(0.0).sqrt())
            .sum();
        Ok(s * s)
    }
}
