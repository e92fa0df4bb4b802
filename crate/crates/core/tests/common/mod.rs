//! Random inputs shared by the integration tests.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use zenosim::qmat::{DenseMatrix, DensityMatrix, C64};

fn centered(rng: &mut ChaCha8Rng) -> f64 {
    (0..4).map(|_| rng.random::<f64>() - 0.5).sum()
}

/// Mixed state `A A† / Tr(A A†)` from a random complex matrix.
pub fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> DensityMatrix {
    let data: Vec<C64> = (0..dim * dim)
        .map(|_| C64::new(centered(rng), centered(rng)))
        .collect();
    let a = DenseMatrix::from_vec(dim, data).unwrap();
    let m = a.matmul(&a.adjoint()).unwrap();
    let tr = m.trace().re;
    DensityMatrix::from_matrix_unchecked(m.scale_real(1.0 / tr)).symmetrized()
}

pub fn random_pure(rng: &mut ChaCha8Rng, dim: usize) -> DensityMatrix {
    let ket: Vec<C64> = (0..dim)
        .map(|_| C64::new(centered(rng), centered(rng)))
        .collect();
    DensityMatrix::pure(&ket).unwrap()
}

/// Alternates mixed and pure states so rank-deficient inputs are covered.
pub fn random_input(rng: &mut ChaCha8Rng, dim: usize, i: usize) -> DensityMatrix {
    if i.is_multiple_of(2) {
        random_state(rng, dim)
    } else {
        random_pure(rng, dim)
    }
}
