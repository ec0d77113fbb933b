use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{DenseTensor3, Matrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(r: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix {
    Matrix::from_fn(m, n, |_, _| StandardNormal.sample(r))
}

pub fn gaussian_tensor(r: &mut ChaCha8Rng, dims: [usize; 3]) -> DenseTensor3 {
    DenseTensor3::from_fn(dims, |_, _, _| StandardNormal.sample(r))
}

pub fn rank_one(u: &[f64], v: &[f64], w: &[f64]) -> DenseTensor3 {
    DenseTensor3::from_fn([u.len(), v.len(), w.len()], |i, j, k| u[i] * v[j] * w[k])
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * f64::max(1.0, f64::max(a.abs(), b.abs()))
}
