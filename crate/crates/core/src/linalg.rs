//! Dense kernels: a one-sided Jacobi SVD, numerical rank, pseudoinverse,
//! condition numbers and orthonormal frame construction.
//!
//! Jacobi is slow compared to bidiagonalization but every singular value
//! comes out with high relative accuracy, and for the unfoldings handled
//! here (a few hundred entries per side) the cost is irrelevant.

use alloc::vec;
use alloc::vec::Vec;

use crate::Matrix;

const MAX_SWEEPS: usize = 80;

/// Singular values closer than this (relative to the largest) are treated
/// as tied when choosing a leading subspace.
pub const TIE_TOL: f64 = 1e-13;

/// Thin SVD `A = U diag(s) Vᵀ` with `k = min(rows, cols)` columns in `U` and
/// `V` and singular values in descending order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    /// Default relative rank tolerance `max(rows, cols) * eps`.
    pub fn default_tol(rows: usize, cols: usize) -> f64 {
        rows.max(cols) as f64 * f64::EPSILON
    }

    /// Number of singular values strictly above `tol * σ_max`.
    pub fn rank(&self, tol: f64) -> usize {
        let smax = self.s.first().copied().unwrap_or(0.0);
        self.s.iter().filter(|&&s| s > tol * smax).count()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Orthogonalizes the columns of `w` in place by plane rotations,
/// accumulating them in `v` (initially the identity).
fn jacobi_orthogonalize(w: &mut [Vec<f64>], v: &mut [Vec<f64>]) {
    let n = w.len();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                let (lo, hi) = w.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (a, b) = (*x, *y);
                    *x = c * a - s * b;
                    *y = s * a + c * b;
                }
                let (lo, hi) = v.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (a, b) = (*x, *y);
                    *x = c * a - s * b;
                    *y = s * a + c * b;
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

/// Thin SVD of `a`.
pub fn svd(a: &Matrix) -> Svd {
    let (m, n) = (a.rows(), a.cols());
    let tall = m >= n;
    // Work on the orientation with at most as many columns as rows.
    let mut w = if tall { a.columns() } else { a.transpose().columns() };
    let (rows, k) = if tall { (m, n) } else { (n, m) };
    let mut v: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut e = vec![0.0; k];
            e[i] = 1.0;
            e
        })
        .collect();
    jacobi_orthogonalize(&mut w, &mut v);

    let norms: Vec<f64> = w.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..k).collect();
    // Stable, so equal values keep their column order.
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(core::cmp::Ordering::Equal));
    let s: Vec<f64> = order.iter().map(|&i| norms[i]).collect();

    // Normalized columns of w are singular vectors of the worked matrix; the
    // accumulated rotations are the vectors on the other side.
    let smax = s.first().copied().unwrap_or(0.0);
    let cutoff = Svd::default_tol(m, n) * smax;
    let mut normalized: Vec<Vec<f64>> = Vec::with_capacity(k);
    for (rank_pos, &i) in order.iter().enumerate() {
        if s[rank_pos] > cutoff && s[rank_pos] > 0.0 {
            normalized.push(w[i].iter().map(|x| x / norms[i]).collect());
        } else {
            break;
        }
    }
    complete_orthonormal(&mut normalized, rows, k);
    let rotations: Vec<Vec<f64>> = order.iter().map(|&i| v[i].clone()).collect();

    let normalized = Matrix::from_columns(rows, &normalized);
    let rotations = Matrix::from_columns(k, &rotations);
    if tall {
        Svd {
            u: normalized,
            s,
            v: rotations,
        }
    } else {
        Svd {
            u: rotations,
            s,
            v: normalized,
        }
    }
}

/// Extends an orthonormal set in `R^m` to `target` vectors using standard
/// basis directions. At each step the coordinate axis with the largest
/// residual after projection is taken (lowest index on ties).
pub fn complete_orthonormal(frame: &mut Vec<Vec<f64>>, m: usize, target: usize) {
    debug_assert!(target <= m);
    while frame.len() < target {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for axis in 0..m {
            let mut e = vec![0.0; m];
            e[axis] = 1.0;
            orthogonalize_against(&mut e, frame);
            let r = norm(&e);
            if best.as_ref().is_none_or(|(br, _)| r > *br + 1e-12) {
                best = Some((r, e));
            }
        }
        let (r, mut e) = best.expect("m > 0");
        e.iter_mut().for_each(|x| *x /= r);
        orthogonalize_against(&mut e, frame);
        let r = norm(&e);
        e.iter_mut().for_each(|x| *x /= r);
        frame.push(e);
    }
}

/// Two passes of classical Gram-Schmidt against an orthonormal set.
fn orthogonalize_against(x: &mut [f64], frame: &[Vec<f64>]) {
    for _ in 0..2 {
        for f in frame {
            let c = dot(x, f);
            x.iter_mut().zip(f).for_each(|(a, b)| *a -= c * b);
        }
    }
}

/// Orthonormalizes columns that are already known to be independent,
/// preserving the flag of each leading column span.
pub fn gram_schmidt(a: &Matrix) -> Matrix {
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(a.cols());
    for mut c in a.columns() {
        orthogonalize_against(&mut c, &frame);
        let r = norm(&c);
        c.iter_mut().for_each(|x| *x /= r);
        frame.push(c);
    }
    Matrix::from_columns(a.rows(), &frame)
}

/// Orthonormal `m x k` frame for a dominant `k`-dimensional left singular
/// subspace of `a`.
///
/// Singular vectors with numerically zero singular value are discarded and
/// the frame is completed with standard basis directions. When the `k`-th
/// and `(k+1)`-th singular values are tied, the part of the frame taken from
/// the tied cluster is the one closest to `prev` (maximal `‖prevᵀ F‖_F`).
pub fn leading_left_subspace(a: &Matrix, k: usize, prev: Option<&Matrix>) -> Matrix {
    let m = a.rows();
    debug_assert!(k >= 1 && k <= m);
    let dec = svd(a);
    let rank = dec.rank(Svd::default_tol(a.rows(), a.cols()));
    let take = k.min(rank);
    let mut frame: Vec<Vec<f64>> = (0..take).map(|i| dec.u.column(i)).collect();

    if let Some(prev) = prev {
        if take < rank && take > 0 {
            let smax = dec.s[0];
            let pivot = dec.s[take - 1];
            let tied = |i: usize| (dec.s[i] - pivot).abs() <= TIE_TOL * smax;
            if tied(take) {
                let mut lo = take - 1;
                while lo > 0 && tied(lo - 1) {
                    lo -= 1;
                }
                let mut hi = take + 1;
                while hi < rank && tied(hi) {
                    hi += 1;
                }
                let cluster = Matrix::from_columns(m, &(lo..hi).map(|i| dec.u.column(i)).collect::<Vec<_>>());
                let overlap = cluster.tr_mul(prev).expect("prev frame shares ambient dim");
                let rot = leading_left_subspace(&overlap, take - lo, None);
                let chosen = &cluster * &rot;
                frame.truncate(lo);
                frame.extend(chosen.columns());
            }
        }
    }

    complete_orthonormal(&mut frame, m, k);
    Matrix::from_columns(m, &frame)
}

/// Moore-Penrose pseudoinverse, zeroing singular values `<= tol * σ_max`.
pub fn pinv(a: &Matrix, tol: Option<f64>) -> Matrix {
    let tol = tol.unwrap_or_else(|| Svd::default_tol(a.rows(), a.cols()));
    let dec = svd(a);
    let smax = dec.s.first().copied().unwrap_or(0.0);
    let mut out = Matrix::zeros(a.cols(), a.rows());
    for (idx, &s) in dec.s.iter().enumerate() {
        if s <= tol * smax || s == 0.0 {
            continue;
        }
        let inv = 1.0 / s;
        for i in 0..a.cols() {
            let vi = dec.v.get(i, idx) * inv;
            if vi == 0.0 {
                continue;
            }
            for j in 0..a.rows() {
                let cur = out.get(i, j);
                out.set(i, j, cur + vi * dec.u.get(j, idx));
            }
        }
    }
    out
}

/// 2-norm condition number `σ_max / σ_min` over the `min(rows, cols)`
/// singular values; infinite when numerically rank deficient.
pub fn condition_number(a: &Matrix) -> f64 {
    let dec = svd(a);
    let k = dec.s.len();
    if dec.rank(Svd::default_tol(a.rows(), a.cols())) < k {
        return f64::INFINITY;
    }
    dec.s[0] / dec.s[k - 1]
}

/// Chordal distance between the spans of two orthonormal frames of equal
/// size, evaluated as `‖B - A AᵀB‖_F` (equal to `sqrt(k - ‖AᵀB‖_F²)` but
/// without the cancellation near zero).
pub fn chordal_distance(a: &Matrix, b: &Matrix) -> f64 {
    let c = a.tr_mul(b).expect("frames share ambient dimension");
    b.sub(&(a * &c)).expect("same shape").frobenius_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{gaussian_matrix, rng};

    fn reconstruct(d: &Svd) -> Matrix {
        let us = Matrix::from_fn(d.u.rows(), d.s.len(), |i, j| d.u.get(i, j) * d.s[j]);
        &us * &d.v.transpose()
    }

    fn orthonormality_error(f: &Matrix) -> f64 {
        let g = f.tr_mul(f).unwrap();
        g.sub(&Matrix::identity(f.cols())).unwrap().max_abs()
    }

    #[test]
    fn svd_reconstructs_both_orientations() {
        let mut r = rng(3);
        for (m, n) in [(5, 3), (3, 5), (4, 4), (1, 6), (6, 1)] {
            let a = gaussian_matrix(&mut r, m, n);
            let d = svd(&a);
            assert!(reconstruct(&d).sub(&a).unwrap().max_abs() < 1e-13);
            assert!(orthonormality_error(&d.u) < 1e-13);
            assert!(orthonormality_error(&d.v) < 1e-13);
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn svd_of_rank_deficient_keeps_orthonormal_u() {
        // Rank one, tall.
        let a = Matrix::from_fn(4, 2, |i, j| (i as f64 + 1.0) * (j as f64 + 1.0));
        let d = svd(&a);
        assert_eq!(d.rank(Svd::default_tol(4, 2)), 1);
        assert!(orthonormality_error(&d.u) < 1e-14);
        assert!(reconstruct(&d).sub(&a).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let d = svd(&Matrix::zeros(3, 2));
        assert_eq!(d.rank(Svd::default_tol(3, 2)), 0);
        assert_eq!(d.s, vec![0.0, 0.0]);
    }

    #[test]
    fn leading_subspace_completes_with_axes() {
        let a = Matrix::zeros(3, 2);
        let f = leading_left_subspace(&a, 2, None);
        assert_eq!(f, Matrix::from_fn(3, 2, |i, j| if i == j { 1.0 } else { 0.0 }));
    }

    #[test]
    fn tie_break_prefers_previous_frame() {
        // σ = (1, 1): any line in the plane is a maximizer.
        let a = Matrix::identity(2);
        let s = libm::sqrt(0.5);
        let prev = Matrix::new(2, 1, vec![s, -s]).unwrap();
        let f = leading_left_subspace(&a, 1, Some(&prev));
        let overlap = f.tr_mul(&prev).unwrap().get(0, 0).abs();
        assert!((overlap - 1.0).abs() < 1e-14);
        let f0 = leading_left_subspace(&a, 1, None);
        assert_eq!(f0, Matrix::new(2, 1, vec![1.0, 0.0]).unwrap());
    }

    #[test]
    fn condition_number_cases() {
        assert_eq!(condition_number(&Matrix::diag(&[4.0, 2.0])), 2.0);
        assert!(condition_number(&Matrix::diag(&[1.0, 0.0])).is_infinite());
    }

    #[test]
    fn matches_nalgebra() {
        let mut g = rng(77);
        for (rows, cols) in [(1, 1), (5, 3), (3, 5), (7, 7), (9, 2)] {
            let a = gaussian_matrix(&mut g, rows, cols);
            let na = nalgebra::DMatrix::from_row_slice(rows, cols, a.as_slice());
            let mut oracle: std::vec::Vec<f64> = na.singular_values().iter().copied().collect();
            oracle.sort_by(|x, y| y.total_cmp(x));
            let d = svd(&a);
            for (s, o) in d.s.iter().zip(&oracle) {
                assert!((s - o).abs() <= 1e-12 * oracle[0]);
            }
            let p = pinv(&a, None);
            let np = na.pseudo_inverse(1e-12).unwrap();
            for i in 0..cols {
                for j in 0..rows {
                    assert!((p.get(i, j) - np[(i, j)]).abs() <= 1e-10 * np.abs().max().max(1.0));
                }
            }
        }
    }
}
