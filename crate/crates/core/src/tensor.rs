//! Dense real 3-tensors and the basic multilinear operations on them.
//!
//! Entries are stored lexicographically with the first index slowest and the
//! third index fastest. All mode arguments are 1-based (`1`, `2` or `3`);
//! entry indices are 0-based.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{svd, Svd};
use crate::{Error, Matrix, Result};

/// Dense real tensor of shape `m1 x m2 x m3`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor3 {
    dims: [usize; 3],
    data: Vec<f64>,
}

/// The two modes other than `mode`, in increasing order (1-based).
pub(crate) fn complement(mode: usize) -> (usize, usize) {
    match mode {
        1 => (2, 3),
        2 => (1, 3),
        _ => (1, 2),
    }
}

pub(crate) fn check_mode(mode: usize) -> Result<()> {
    if (1..=3).contains(&mode) {
        Ok(())
    } else {
        Err(Error::InvalidMode(mode))
    }
}

impl DenseTensor3 {
    /// Builds a tensor from lexicographically ordered values (third index
    /// fastest). Dimensions must be positive and every value finite.
    pub fn new(dims: [usize; 3], data: Vec<f64>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidShape("tensor dimensions must be positive"));
        }
        let len = dims[0] * dims[1] * dims[2];
        if data.len() != len {
            return Err(Error::DimensionMismatch {
                op: "DenseTensor3::new",
                expected: len,
                found: data.len(),
            });
        }
        if let Some(at) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(at));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: [usize; 3]) -> Self {
        Self {
            dims,
            data: vec![0.0; dims[0] * dims[1] * dims[2]],
        }
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    data.push(f(i, j, k));
                }
            }
        }
        Self { dims, data }
    }

    #[inline]
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    /// Number of stored entries.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let at = self.offset(i, j, k);
        self.data[at] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Mode-`mode` unfolding: an `m_j x (m_p m_q)` matrix whose column index
    /// runs over the pairs `(i_p, i_q)`, `p < q`, in lexicographic order.
    pub fn unfold(&self, mode: usize) -> Result<Matrix> {
        check_mode(mode)?;
        let [m1, m2, m3] = self.dims;
        let m = match mode {
            1 => Matrix::new(m1, m2 * m3, self.data.clone())?,
            2 => Matrix::from_fn(m2, m1 * m3, |j, col| self.get(col / m3, j, col % m3)),
            _ => Matrix::from_fn(m3, m1 * m2, |k, col| self.get(col / m2, col % m2, k)),
        };
        Ok(m)
    }

    /// Inverse of [`unfold`](Self::unfold): a pure reordering of entries.
    pub fn fold(m: &Matrix, mode: usize, dims: [usize; 3]) -> Result<Self> {
        check_mode(mode)?;
        if dims.contains(&0) {
            return Err(Error::InvalidShape("tensor dimensions must be positive"));
        }
        let (p, q) = complement(mode);
        let (rows, cols) = (dims[mode - 1], dims[p - 1] * dims[q - 1]);
        if m.rows() != rows {
            return Err(Error::DimensionMismatch {
                op: "fold rows",
                expected: rows,
                found: m.rows(),
            });
        }
        if m.cols() != cols {
            return Err(Error::DimensionMismatch {
                op: "fold cols",
                expected: cols,
                found: m.cols(),
            });
        }
        let [_, m2, m3] = dims;
        let t = match mode {
            1 => Self {
                dims,
                data: m.as_slice().to_vec(),
            },
            2 => Self::from_fn(dims, |i, j, k| m.get(j, i * m3 + k)),
            _ => Self::from_fn(dims, |i, j, k| m.get(k, i * m2 + j)),
        };
        Ok(t)
    }

    /// Hilbert-Schmidt inner product `Σ x_ijk y_ijk`.
    pub fn hs_inner(&self, other: &Self) -> Result<f64> {
        self.check_same_dims(other, "hs_inner")?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    /// Hilbert-Schmidt (Frobenius) norm.
    pub fn hs_norm(&self) -> f64 {
        libm::sqrt(self.norm_sq())
    }

    pub(crate) fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Numerical rank of the mode-`mode` unfolding with the default
    /// tolerance `max(rows, cols) * eps`.
    pub fn mode_rank(&self, mode: usize) -> Result<usize> {
        let (r, c) = self.unfold_shape(mode)?;
        self.mode_rank_with_tol(mode, Svd::default_tol(r, c))
    }

    /// Count of singular values of the unfolding strictly above `tol * σ_max`.
    pub fn mode_rank_with_tol(&self, mode: usize, tol: f64) -> Result<usize> {
        Ok(svd(&self.unfold(mode)?).rank(tol))
    }

    pub fn multilinear_rank(&self) -> [usize; 3] {
        [1, 2, 3].map(|mode| self.mode_rank(mode).expect("valid mode"))
    }

    fn unfold_shape(&self, mode: usize) -> Result<(usize, usize)> {
        check_mode(mode)?;
        let (p, q) = complement(mode);
        Ok((self.dims[mode - 1], self.dims[p - 1] * self.dims[q - 1]))
    }

    /// Mode product contracting mode `mode` against the *row* index of `m`:
    /// `out[.., c, ..] = Σ_k self[.., k, ..] * m[k, c]`. The result has
    /// `m.cols()` entries in that mode.
    pub fn mode_multiply(&self, m: &Matrix, mode: usize) -> Result<Self> {
        check_mode(mode)?;
        let d = self.dims[mode - 1];
        if m.rows() != d {
            return Err(Error::DimensionMismatch {
                op: "mode_multiply",
                expected: d,
                found: m.rows(),
            });
        }
        let n = m.cols();
        let outer: usize = self.dims[..mode - 1].iter().product();
        let inner: usize = self.dims[mode..].iter().product();
        let mut dims = self.dims;
        dims[mode - 1] = n;
        let mut out = vec![0.0; outer * n * inner];
        for o in 0..outer {
            for kk in 0..d {
                let src = &self.data[(o * d + kk) * inner..(o * d + kk + 1) * inner];
                for c in 0..n {
                    let w = m.get(kk, c);
                    if w == 0.0 {
                        continue;
                    }
                    let dst = &mut out[(o * n + c) * inner..(o * n + c + 1) * inner];
                    for (x, &y) in dst.iter_mut().zip(src) {
                        *x += w * y;
                    }
                }
            }
        }
        Ok(Self { dims, data: out })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dims(other, "sub")?;
        Ok(Self {
            dims: self.dims,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dims(other, "add")?;
        Ok(Self {
            dims: self.dims,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dims: self.dims,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    fn check_same_dims(&self, other: &Self, op: &'static str) -> Result<()> {
        for mode in 0..3 {
            if self.dims[mode] != other.dims[mode] {
                return Err(Error::DimensionMismatch {
                    op,
                    expected: self.dims[mode],
                    found: other.dims[mode],
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{close, gaussian_matrix, gaussian_tensor, rank_one, rng};
    use proptest::prelude::*;

    #[test]
    fn unfold_single_entry() {
        let mut t = DenseTensor3::zeros([2, 2, 2]);
        t.set(0, 0, 0, 1.0);
        let u = t.unfold(1).unwrap();
        assert_eq!((u.rows(), u.cols()), (2, 4));
        let mut want = Matrix::zeros(2, 4);
        want.set(0, 0, 1.0);
        assert_eq!(u, want);
    }

    #[test]
    fn unfold_lexicographic_column() {
        // t_{1,1,2} = 5 (1-based) sits in column l = (1-1)*3 + 2 = 2, i.e. 0-based (0, 1).
        let mut t = DenseTensor3::zeros([2, 2, 3]);
        t.set(0, 0, 1, 5.0);
        let u = t.unfold(1).unwrap();
        assert_eq!((u.rows(), u.cols()), (2, 6));
        for r in 0..2 {
            for c in 0..6 {
                let want = if (r, c) == (0, 1) { 5.0 } else { 0.0 };
                assert_eq!(u.get(r, c), want);
            }
        }
    }

    #[test]
    fn invalid_mode_is_rejected() {
        let t = DenseTensor3::zeros([2, 2, 2]);
        assert_eq!(t.unfold(0), Err(Error::InvalidMode(0)));
        assert_eq!(t.unfold(4), Err(Error::InvalidMode(4)));
        assert!(t.mode_multiply(&Matrix::identity(2), 5).is_err());
    }

    #[test]
    fn fold_cases() {
        let z = DenseTensor3::fold(&Matrix::zeros(2, 4), 1, [2, 2, 2]).unwrap();
        assert_eq!(z, DenseTensor3::zeros([2, 2, 2]));

        let mut m = Matrix::zeros(2, 6);
        m.set(0, 1, 7.0);
        let t = DenseTensor3::fold(&m, 1, [2, 2, 3]).unwrap();
        assert_eq!(t.get(0, 0, 1), 7.0);
        assert_eq!(t.hs_norm(), 7.0);

        assert!(DenseTensor3::fold(&Matrix::zeros(2, 5), 1, [2, 2, 3]).is_err());
        assert!(DenseTensor3::fold(&Matrix::zeros(3, 6), 1, [2, 2, 3]).is_err());
    }

    #[test]
    fn new_validates() {
        assert!(DenseTensor3::new([2, 2, 2], vec![0.0; 7]).is_err());
        assert!(DenseTensor3::new([0, 2, 2], vec![]).is_err());
        assert_eq!(
            DenseTensor3::new([1, 1, 2], vec![0.0, f64::INFINITY]),
            Err(Error::NonFinite(1))
        );
    }

    #[test]
    fn inner_and_norm() {
        let ones = DenseTensor3::from_fn([2, 2, 2], |_, _, _| 1.0);
        let twos = ones.scale(2.0);
        assert_eq!(ones.hs_inner(&twos).unwrap(), 16.0);
        assert_eq!(ones.hs_norm(), libm::sqrt(8.0));
        assert_eq!(DenseTensor3::zeros([3, 1, 2]).hs_norm(), 0.0);

        let mut a = DenseTensor3::zeros([2, 2, 2]);
        a.set(0, 0, 0, 3.0);
        let mut b = DenseTensor3::zeros([2, 2, 2]);
        b.set(1, 1, 1, 4.0);
        assert_eq!(a.hs_inner(&b).unwrap(), 0.0);
        assert!(a.hs_inner(&DenseTensor3::zeros([2, 2, 3])).is_err());

        let t = gaussian_tensor(&mut rng(1), [3, 4, 5]);
        assert!(close(t.hs_inner(&t).unwrap(), t.hs_norm() * t.hs_norm(), 1e-14));
        for mode in 1..=3 {
            let f = t.unfold(mode).unwrap().frobenius_norm();
            assert!((f - t.hs_norm()).abs() <= 1e-12 * t.hs_norm());
        }
    }

    #[test]
    fn ranks() {
        let t = rank_one(&[1.0, -2.0], &[0.5, 1.0, 3.0], &[2.0, 1.0]);
        assert_eq!(t.multilinear_rank(), [1, 1, 1]);
        assert_eq!(DenseTensor3::zeros([2, 3, 2]).multilinear_rank(), [0, 0, 0]);

        let mut diag = DenseTensor3::zeros([2, 2, 2]);
        diag.set(0, 0, 0, 1.0);
        diag.set(1, 1, 1, 1.0);
        assert_eq!(diag.multilinear_rank(), [2, 2, 2]);

        let g = gaussian_tensor(&mut rng(2), [3, 4, 5]);
        assert_eq!(g.multilinear_rank(), [3, 4, 5]);
        // A huge tolerance drops every singular value except σ_max.
        assert_eq!(g.mode_rank_with_tol(2, 0.999_999).unwrap(), 1);
    }

    #[test]
    fn mode_multiply_cases() {
        let t = gaussian_tensor(&mut rng(4), [2, 3, 2]);
        for mode in 1..=3 {
            let d = t.dims()[mode - 1];
            assert_eq!(t.mode_multiply(&Matrix::identity(d), mode).unwrap(), t);
            let z = t.mode_multiply(&Matrix::zeros(d, 4), mode).unwrap();
            let mut dims = t.dims();
            dims[mode - 1] = 4;
            assert_eq!(z, DenseTensor3::zeros(dims));
        }
        let s = gaussian_tensor(&mut rng(5), [2, 2, 2]);
        let scaled = s.mode_multiply(&Matrix::diag(&[2.0, 3.0]), 1).unwrap();
        for j in 0..2 {
            for k in 0..2 {
                assert_eq!(scaled.get(0, j, k), 2.0 * s.get(0, j, k));
                assert_eq!(scaled.get(1, j, k), 3.0 * s.get(1, j, k));
            }
        }
        assert!(s.mode_multiply(&Matrix::identity(3), 2).is_err());
    }

    #[test]
    fn mode_multiply_commutes_across_modes() {
        let mut r = rng(6);
        let t = gaussian_tensor(&mut r, [3, 4, 5]);
        let a = gaussian_matrix(&mut r, 3, 2);
        let b = gaussian_matrix(&mut r, 4, 6);
        let c = gaussian_matrix(&mut r, 5, 3);
        let ab = t.mode_multiply(&a, 1).unwrap().mode_multiply(&b, 2).unwrap();
        let ba = t.mode_multiply(&b, 2).unwrap().mode_multiply(&a, 1).unwrap();
        assert!(ab.sub(&ba).unwrap().hs_norm() <= 1e-12 * ab.hs_norm());
        let ac = t.mode_multiply(&a, 1).unwrap().mode_multiply(&c, 3).unwrap();
        let ca = t.mode_multiply(&c, 3).unwrap().mode_multiply(&a, 1).unwrap();
        assert!(ac.sub(&ca).unwrap().hs_norm() <= 1e-12 * ac.hs_norm());
    }

    fn tensor_strategy() -> impl Strategy<Value = DenseTensor3> {
        (1usize..5, 1usize..5, 1usize..5).prop_flat_map(|(a, b, c)| {
            proptest::collection::vec(-10.0f64..10.0, a * b * c)
                .prop_map(move |v| DenseTensor3::new([a, b, c], v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn fold_inverts_unfold(t in tensor_strategy()) {
            for mode in 1..=3 {
                let back = DenseTensor3::fold(&t.unfold(mode).unwrap(), mode, t.dims()).unwrap();
                prop_assert_eq!(&back, &t);
            }
        }

        #[test]
        fn unfoldings_preserve_norm_and_bound_rank(t in tensor_strategy()) {
            let n = t.hs_norm();
            for mode in 1..=3 {
                let u = t.unfold(mode).unwrap();
                prop_assert!((u.frobenius_norm() - n).abs() <= 1e-12 * n.max(1.0));
                prop_assert!(t.mode_rank(mode).unwrap() <= u.rows().min(u.cols()));
            }
        }

        #[test]
        fn inner_is_symmetric_and_bilinear(
            seed in 0u64..1000,
            alpha in -3.0f64..3.0,
            beta in -3.0f64..3.0,
        ) {
            let mut r = rng(seed);
            let x = gaussian_tensor(&mut r, [2, 3, 2]);
            let y = gaussian_tensor(&mut r, [2, 3, 2]);
            let z = gaussian_tensor(&mut r, [2, 3, 2]);
            let xy = x.hs_inner(&y).unwrap();
            prop_assert!(close(xy, y.hs_inner(&x).unwrap(), 1e-14));
            let comb = x.scale(alpha).add(&y.scale(beta)).unwrap();
            let lhs = comb.hs_inner(&z).unwrap();
            let rhs = alpha * x.hs_inner(&z).unwrap() + beta * y.hs_inner(&z).unwrap();
            prop_assert!(close(lhs, rhs, 1e-12));
        }
    }
}
