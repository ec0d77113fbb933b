//! Seeded synthetic tensors of prescribed multilinear rank.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tapprox_core::subspace::{expand, random_triple};
use tapprox_core::{DenseTensor3, Error};

use crate::error::CliResult;

/// `core ×1 Q1 ×2 Q2 ×3 Q3 + noise` with a Gaussian core of dims `mlrank`,
/// Haar-like orthonormal `Q_j` and i.i.d. `N(0, noise_sigma²)` noise.
///
/// Draw order from the seeded stream: core, `Q1`, `Q2`, `Q3`, noise. No noise
/// is drawn when `noise_sigma == 0`.
pub fn generate(dims: [usize; 3], mlrank: [usize; 3], noise_sigma: f64, seed: u64) -> CliResult<DenseTensor3> {
    for mode in 0..3 {
        if mlrank[mode] == 0 || mlrank[mode] > dims[mode] {
            return Err(Error::RankBound {
                mode: mode + 1,
                rank: mlrank[mode],
                dim: dims[mode],
            }
            .into());
        }
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::InvalidOption("noise must be a finite non-negative number").into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let core = DenseTensor3::from_fn(mlrank, |_, _, _| StandardNormal.sample(&mut rng));
    let frames = random_triple(&mut rng, dims, mlrank);
    let mut t = expand(&core, &frames)?;
    if noise_sigma > 0.0 {
        let noise = DenseTensor3::from_fn(dims, |_, _, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            noise_sigma * z
        });
        t = t.add(&noise)?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_rank_and_determinism() {
        let t = generate([5, 6, 7], [2, 3, 2], 0.0, 9).unwrap();
        assert_eq!(t.multilinear_rank(), [2, 3, 2]);
        assert_eq!(t, generate([5, 6, 7], [2, 3, 2], 0.0, 9).unwrap());
        assert_ne!(t, generate([5, 6, 7], [2, 3, 2], 0.0, 10).unwrap());
        assert_eq!(
            generate([3, 4, 5], [3, 4, 5], 0.0, 1).unwrap().multilinear_rank(),
            [3, 4, 5]
        );
        assert_eq!(
            generate([4, 4, 4], [1, 1, 1], 0.1, 1).unwrap().multilinear_rank(),
            [4, 4, 4]
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(generate([3, 3, 3], [4, 1, 1], 0.0, 0).is_err());
        assert!(generate([3, 3, 3], [0, 1, 1], 0.0, 0).is_err());
        assert!(generate([3, 3, 3], [1, 1, 1], -1.0, 0).is_err());
    }
}
