//! Subspaces of `R^m` as orthonormal frames, and the projection machinery
//! for tensor product subspaces `X ⊗ Y ⊗ Z`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{gram_schmidt, svd, Svd};
use crate::{DenseTensor3, Error, Matrix, Result};

/// Entry-wise tolerance on `FᵀF - I` for a frame to count as orthonormal.
pub const FRAME_TOL: f64 = 1e-10;

/// A `k`-dimensional subspace of `R^m`, stored as an `m x k` matrix with
/// orthonormal columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    frame: Matrix,
}

impl Subspace {
    /// Orthonormalizes a spanning set. Fails when the columns are
    /// numerically dependent, reporting the numerical rank.
    pub fn from_columns(m: &Matrix) -> Result<Self> {
        let rank = svd(m).rank(Svd::default_tol(m.rows(), m.cols()));
        if rank < m.cols() {
            return Err(Error::RankDeficient { rank, cols: m.cols() });
        }
        let mut frame = gram_schmidt(m);
        if orthonormality_defect(&frame) > FRAME_TOL {
            frame = gram_schmidt(&frame);
        }
        Ok(Self { frame })
    }

    /// Wraps a frame that is already orthonormal, re-orthonormalizing it if
    /// it has drifted beyond [`FRAME_TOL`].
    pub fn from_frame(frame: Matrix) -> Result<Self> {
        if frame.cols() == 0 || frame.cols() > frame.rows() {
            return Err(Error::InvalidShape("frame must have 1..=rows columns"));
        }
        if orthonormality_defect(&frame) <= FRAME_TOL {
            Ok(Self { frame })
        } else {
            Self::from_columns(&frame)
        }
    }

    /// The whole space `R^m` with the identity frame.
    pub fn full(m: usize) -> Self {
        Self {
            frame: Matrix::identity(m),
        }
    }

    /// Span of the first `k` standard basis vectors of `R^m`.
    pub fn axes(m: usize, k: usize) -> Self {
        Self {
            frame: Matrix::from_fn(m, k, |i, j| if i == j { 1.0 } else { 0.0 }),
        }
    }

    /// Orthonormalized standard-normal `m x k` matrix.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, m: usize, k: usize) -> Self {
        loop {
            let g = Matrix::from_fn(m, k, |_, _| rng.sample(StandardNormal));
            // Dependent Gaussian columns have probability zero; redraw anyway.
            if let Ok(s) = Self::from_columns(&g) {
                return s;
            }
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.rows()
    }

    pub fn dim(&self) -> usize {
        self.frame.cols()
    }

    pub fn frame(&self) -> &Matrix {
        &self.frame
    }

    pub fn into_frame(self) -> Matrix {
        self.frame
    }

    /// Same span with the frame rotated by an orthogonal `k x k` matrix.
    pub fn rotated(&self, q: &Matrix) -> Result<Self> {
        Self::from_frame(self.frame.matmul(q)?)
    }
}

fn orthonormality_defect(frame: &Matrix) -> f64 {
    let g = frame.tr_mul(frame).expect("square Gram matrix");
    let mut worst: f64 = 0.0;
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g.get(i, j) - want).abs());
        }
    }
    worst
}

/// A point `X ⊗ Y ⊗ Z` of the product of Grassmannians.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceTriple {
    pub x: Subspace,
    pub y: Subspace,
    pub z: Subspace,
}

impl SubspaceTriple {
    pub fn new(x: Subspace, y: Subspace, z: Subspace) -> Self {
        Self { x, y, z }
    }

    pub fn full(dims: [usize; 3]) -> Self {
        Self::new(
            Subspace::full(dims[0]),
            Subspace::full(dims[1]),
            Subspace::full(dims[2]),
        )
    }

    /// Subspace for 1-based `mode`.
    pub fn get(&self, mode: usize) -> &Subspace {
        match mode {
            1 => &self.x,
            2 => &self.y,
            _ => &self.z,
        }
    }

    pub fn ambient_dims(&self) -> [usize; 3] {
        [self.x.ambient_dim(), self.y.ambient_dim(), self.z.ambient_dim()]
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.x.dim(), self.y.dim(), self.z.dim()]
    }

    pub fn frames(&self) -> [&Matrix; 3] {
        [self.x.frame(), self.y.frame(), self.z.frame()]
    }

    pub(crate) fn check_ambient(&self, t: &DenseTensor3, op: &'static str) -> Result<()> {
        let want = t.dims();
        let have = self.ambient_dims();
        for mode in 0..3 {
            if want[mode] != have[mode] {
                return Err(Error::DimensionMismatch {
                    op,
                    expected: want[mode],
                    found: have[mode],
                });
            }
        }
        Ok(())
    }
}

/// Coordinates of `t` in the product basis of the frames:
/// `c[i][j][k] = <t, x_i ⊗ y_j ⊗ z_k>`, a `p x q x r` tensor.
pub fn coefficient_tensor(t: &DenseTensor3, s: &SubspaceTriple) -> Result<DenseTensor3> {
    s.check_ambient(t, "coefficient_tensor")?;
    t.mode_multiply(s.x.frame(), 1)?
        .mode_multiply(s.y.frame(), 2)?
        .mode_multiply(s.z.frame(), 3)
}

/// Orthogonal projection of `t` onto `X ⊗ Y ⊗ Z`, in ambient coordinates.
pub fn project(t: &DenseTensor3, s: &SubspaceTriple) -> Result<DenseTensor3> {
    let c = coefficient_tensor(t, s)?;
    expand(&c, s)
}

/// Maps a coefficient tensor back through the frames.
pub fn expand(core: &DenseTensor3, s: &SubspaceTriple) -> Result<DenseTensor3> {
    core.mode_multiply(&s.x.frame().transpose(), 1)?
        .mode_multiply(&s.y.frame().transpose(), 2)?
        .mode_multiply(&s.z.frame().transpose(), 3)
}

/// Hilbert-Schmidt distance from `t` to `X ⊗ Y ⊗ Z`.
///
/// Evaluated as `‖t - P(t)‖` rather than `sqrt(‖t‖² - ‖P(t)‖²)`: the
/// difference form keeps full relative accuracy when `t` is close to the
/// subspace.
pub fn distance(t: &DenseTensor3, s: &SubspaceTriple) -> Result<f64> {
    let p = project(t, s)?;
    Ok(t.sub(&p)?.hs_norm())
}

/// Squared norm of the projection, `‖P_{X⊗Y⊗Z}(t)‖²`.
pub fn projected_norm_sq(t: &DenseTensor3, s: &SubspaceTriple) -> Result<f64> {
    Ok(coefficient_tensor(t, s)?.norm_sq())
}

/// Random triple with the given subspace dimensions.
pub fn random_triple<R: Rng + ?Sized>(rng: &mut R, ambient: [usize; 3], dims: [usize; 3]) -> SubspaceTriple {
    let [x, y, z]: [Subspace; 3] = [0, 1, 2].map(|i| Subspace::random(rng, ambient[i], dims[i]));
    SubspaceTriple::new(x, y, z)
}
