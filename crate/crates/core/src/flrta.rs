//! Fast low-rank Tucker approximation from sampled sections.
//!
//! Index sets `I ⊂ [ℓ1]`, `J ⊂ [ℓ2]`, `K ⊂ [ℓ3]` of sizes `p`, `q`, `r` pick
//! three sections of the tensor `A`: `C1 = A[:, J, K]`, `C2 = A[I, :, K]`,
//! `C3 = A[I, J, :]`. With `E` the `(ℓ1 ℓ2) x ℓ3` matrix whose rows run over
//! the pairs `(i, j)`, the approximation is the cross
//!
//! ```text
//! E[:, K] · E[L, K]⁺ · E[L, :]        (L = rows for I x J)
//! ```
//!
//! where each column `k ∈ K` of `E[:, K]` (the slice `F_k = A[:, :, k]`) is in
//! turn replaced by its own cross `F_k[:, J] · F_k[I, J]⁺ · F_k[I, :]`. The
//! result is returned in Tucker form `U ×1 C1 ×2 C2 ×3 C3`, where the factor
//! `C_j` is the section `C_j` unfolded with the mode-`j` index along columns.
//!
//! Index sets are 0-based.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, svd, Svd};
use crate::{DenseTensor3, Error, Matrix, Result};

/// Selections whose worst condition number exceeds this are accepted but
/// should be reported to the user.
pub const COND_WARN_THRESHOLD: f64 = 1e8;

/// Default number of random selections tried by [`select_indices`].
pub const DEFAULT_TRIALS: usize = 20;

/// Condition numbers of the matrices inverted by the cross approximation.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    /// `cond(E[L, K])`.
    pub e_cond: f64,
    /// `cond(F_k[I, J])` for each `k ∈ K`, in the order of `K`.
    pub slice_conds: Vec<f64>,
}

impl ConditionReport {
    /// The selection criterion: the largest of all condition numbers.
    pub fn worst(&self) -> f64 {
        self.slice_conds.iter().copied().fold(self.e_cond, f64::max)
    }
}

/// Sampled index sets `I`, `J`, `K` and the derived row set `L` of the mode-3
/// unfolding.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexSelection {
    dims: [usize; 3],
    i_set: Vec<usize>,
    j_set: Vec<usize>,
    k_set: Vec<usize>,
    l_set: Vec<usize>,
    cond_report: Option<ConditionReport>,
}

fn check_set(set: &[usize], len: usize, mode: usize) -> Result<()> {
    if set.is_empty() {
        return Err(Error::InvalidShape("index sets must be non-empty"));
    }
    for (pos, &idx) in set.iter().enumerate() {
        if idx >= len || (pos > 0 && set[pos - 1] >= idx) {
            return Err(Error::InvalidIndex { mode, index: idx, len });
        }
    }
    Ok(())
}

impl IndexSelection {
    /// Validates sorted, distinct, in-range index sets for a tensor of shape
    /// `dims`.
    pub fn new(dims: [usize; 3], i_set: Vec<usize>, j_set: Vec<usize>, k_set: Vec<usize>) -> Result<Self> {
        check_set(&i_set, dims[0], 1)?;
        check_set(&j_set, dims[1], 2)?;
        check_set(&k_set, dims[2], 3)?;
        let l_set = i_set
            .iter()
            .flat_map(|&i| j_set.iter().map(move |&j| i * dims[1] + j))
            .collect();
        Ok(Self {
            dims,
            i_set,
            j_set,
            k_set,
            l_set,
            cond_report: None,
        })
    }

    /// Every index in every mode.
    pub fn full(dims: [usize; 3]) -> Self {
        Self::new(
            dims,
            (0..dims[0]).collect(),
            (0..dims[1]).collect(),
            (0..dims[2]).collect(),
        )
        .expect("full ranges are valid")
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn i_set(&self) -> &[usize] {
        &self.i_set
    }

    pub fn j_set(&self) -> &[usize] {
        &self.j_set
    }

    pub fn k_set(&self) -> &[usize] {
        &self.k_set
    }

    /// Row indices `i * ℓ2 + j` of `E` for `(i, j) ∈ I x J`, lexicographic.
    pub fn l_set(&self) -> &[usize] {
        &self.l_set
    }

    /// Sizes `(p, q, r)`.
    pub fn sizes(&self) -> [usize; 3] {
        [self.i_set.len(), self.j_set.len(), self.k_set.len()]
    }

    pub fn cond_report(&self) -> Option<&ConditionReport> {
        self.cond_report.as_ref()
    }

    /// Computes and stores the condition report for `t`.
    pub fn evaluate(mut self, t: &DenseTensor3) -> Result<Self> {
        self.cond_report = Some(condition_report(t, &self)?);
        Ok(self)
    }

    fn check_tensor(&self, t: &DenseTensor3) -> Result<()> {
        for mode in 0..3 {
            if t.dims()[mode] != self.dims[mode] {
                return Err(Error::DimensionMismatch {
                    op: "index selection",
                    expected: self.dims[mode],
                    found: t.dims()[mode],
                });
            }
        }
        Ok(())
    }

    fn key(&self) -> (&[usize], &[usize], &[usize]) {
        (&self.i_set, &self.j_set, &self.k_set)
    }
}

/// The three sections `A[:, J, K]`, `A[I, :, K]` and `A[I, J, :]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sections {
    pub c1: DenseTensor3,
    pub c2: DenseTensor3,
    pub c3: DenseTensor3,
}

pub fn sections(t: &DenseTensor3, sel: &IndexSelection) -> Result<Sections> {
    sel.check_tensor(t)?;
    let [l1, l2, l3] = t.dims();
    let [p, q, r] = sel.sizes();
    let (i_s, j_s, k_s) = sel.key();
    Ok(Sections {
        c1: DenseTensor3::from_fn([l1, q, r], |i, j, k| t.get(i, j_s[j], k_s[k])),
        c2: DenseTensor3::from_fn([p, l2, r], |i, j, k| t.get(i_s[i], j, k_s[k])),
        c3: DenseTensor3::from_fn([p, q, l3], |i, j, k| t.get(i_s[i], j_s[j], k)),
    })
}

/// Moore-Penrose pseudoinverse; singular values `<= tol * σ_max` are treated
/// as zero (default `tol = max(rows, cols) * eps`).
pub fn pinv(m: &Matrix, tol: Option<f64>) -> Matrix {
    linalg::pinv(m, tol)
}

/// Slice `F_k = A[:, :, k]` as an `ℓ1 x ℓ2` matrix.
fn slice(t: &DenseTensor3, k: usize) -> Matrix {
    let [l1, l2, _] = t.dims();
    Matrix::from_fn(l1, l2, |i, j| t.get(i, j, k))
}

/// `E[L, K]`: rows `(i, j) ∈ I x J`, columns `k ∈ K`.
fn e_cross(t: &DenseTensor3, sel: &IndexSelection) -> Matrix {
    let q = sel.j_set.len();
    Matrix::from_fn(sel.l_set.len(), sel.k_set.len(), |row, col| {
        t.get(sel.i_set[row / q], sel.j_set[row % q], sel.k_set[col])
    })
}

/// `F_k[I, J]`.
fn slice_core(t: &DenseTensor3, sel: &IndexSelection, k: usize) -> Matrix {
    Matrix::from_fn(sel.i_set.len(), sel.j_set.len(), |a, b| {
        t.get(sel.i_set[a], sel.j_set[b], k)
    })
}

/// Condition numbers of `E[L, K]` and of every `F_k[I, J]`, `k ∈ K`.
pub fn condition_report(t: &DenseTensor3, sel: &IndexSelection) -> Result<ConditionReport> {
    sel.check_tensor(t)?;
    Ok(ConditionReport {
        e_cond: linalg::condition_number(&e_cross(t, sel)),
        slice_conds: sel
            .k_set
            .iter()
            .map(|&k| linalg::condition_number(&slice_core(t, sel, k)))
            .collect(),
    })
}

/// Cross approximation `G_k = F_k[:, J] · F_k[I, J]⁺ · F_k[I, :]` of the
/// slice `F_k = A[:, :, k]`. `k` must belong to `K`.
pub fn slice_cross(t: &DenseTensor3, sel: &IndexSelection, k: usize, pinv_tol: Option<f64>) -> Result<Matrix> {
    sel.check_tensor(t)?;
    if !sel.k_set.contains(&k) {
        return Err(Error::InvalidIndex {
            mode: 3,
            index: k,
            len: t.dims()[2],
        });
    }
    let f = slice(t, k);
    let all_rows: Vec<usize> = (0..f.rows()).collect();
    let all_cols: Vec<usize> = (0..f.cols()).collect();
    let cols = f.select(&all_rows, &sel.j_set);
    let rows = f.select(&sel.i_set, &all_cols);
    let core = pinv(&f.select(&sel.i_set, &sel.j_set), pinv_tol);
    Ok(&(&cols * &core) * &rows)
}

/// Tucker representation `U ×1 C1 ×2 C2 ×3 C3` with `C_j` of shape
/// `(core dim j) x ℓ_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct TuckerFactorization {
    pub core: DenseTensor3,
    pub factors: [Matrix; 3],
}

impl TuckerFactorization {
    pub fn new(core: DenseTensor3, factors: [Matrix; 3]) -> Result<Self> {
        for (mode, f) in factors.iter().enumerate() {
            if f.rows() != core.dims()[mode] {
                return Err(Error::DimensionMismatch {
                    op: "TuckerFactorization::new",
                    expected: core.dims()[mode],
                    found: f.rows(),
                });
            }
        }
        Ok(Self { core, factors })
    }

    /// Shape `(ℓ1, ℓ2, ℓ3)` of the represented tensor.
    pub fn dims(&self) -> [usize; 3] {
        [0, 1, 2].map(|m| self.factors[m].cols())
    }

    pub fn reconstruct(&self) -> DenseTensor3 {
        apply_factors(&self.core, &self.factors)
    }

    /// Stored numbers: core entries plus factor entries.
    pub fn storage(&self) -> usize {
        self.core.len() + self.factors.iter().map(|f| f.rows() * f.cols()).sum::<usize>()
    }
}

fn apply_factors(core: &DenseTensor3, factors: &[Matrix; 3]) -> DenseTensor3 {
    core.mode_multiply(&factors[0], 1)
        .and_then(|t| t.mode_multiply(&factors[1], 2))
        .and_then(|t| t.mode_multiply(&factors[2], 3))
        .expect("factor rows match core dims")
}

/// Factor matrices built from the sections: `C1` is `(q r) x ℓ1` with rows
/// `(j, k) ∈ J x K`, `C2` is `(p r) x ℓ2` with rows `(i, k)`, `C3` is
/// `(p q) x ℓ3` with rows `(i, j)`, all lexicographic.
pub fn section_factors(t: &DenseTensor3, sel: &IndexSelection) -> Result<[Matrix; 3]> {
    let s = sections(t, sel)?;
    Ok([
        s.c1.unfold(1)?.transpose(),
        s.c2.unfold(2)?.transpose(),
        s.c3.unfold(3)?.transpose(),
    ])
}

/// Cross approximation of `t` from the sections picked by `sel`, returned in
/// Tucker form with the section factors of [`section_factors`].
pub fn flrta_approx(t: &DenseTensor3, sel: &IndexSelection, pinv_tol: Option<f64>) -> Result<TuckerFactorization> {
    let factors = section_factors(t, sel)?;
    let [p, q, r] = sel.sizes();
    let e_pinv = pinv(&e_cross(t, sel), pinv_tol); // r x pq
    let mut core = DenseTensor3::zeros([q * r, p * r, p * q]);
    for (kk, &k) in sel.k_set.iter().enumerate() {
        let slice_pinv = pinv(&slice_core(t, sel, k), pinv_tol); // q x p
        for jj in 0..q {
            for ii in 0..p {
                let w = slice_pinv.get(jj, ii);
                if w == 0.0 {
                    continue;
                }
                for l in 0..p * q {
                    core.set(jj * r + kk, ii * r + kk, l, w * e_pinv.get(kk, l));
                }
            }
        }
    }
    TuckerFactorization::new(core, factors)
}

/// Tries `trials` random selections of sizes `ranks` and keeps the one with
/// the smallest worst-case condition number (ties: lexicographically smallest
/// `(I, J, K)`).
///
/// Trials are drawn up front from a ChaCha8 stream seeded with `seed`, so the
/// result depends only on the arguments. When every trial is singular the
/// error carries the least bad selection together with its report.
pub fn select_indices(t: &DenseTensor3, ranks: [usize; 3], trials: usize, seed: u64) -> Result<IndexSelection> {
    let dims = t.dims();
    for mode in 0..3 {
        if ranks[mode] == 0 || ranks[mode] > dims[mode] {
            return Err(Error::RankBound {
                mode: mode + 1,
                rank: ranks[mode],
                dim: dims[mode],
            });
        }
    }
    if trials == 0 {
        return Err(Error::InvalidOption("trials must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<[Vec<usize>; 3]> = (0..trials)
        .map(|_| {
            [0, 1, 2].map(|m| {
                let mut v = index::sample(&mut rng, dims[m], ranks[m]).into_vec();
                v.sort_unstable();
                v
            })
        })
        .collect();

    let mut best: Option<(f64, IndexSelection)> = None;
    for [i_set, j_set, k_set] in draws {
        let sel = IndexSelection::new(dims, i_set, j_set, k_set)?.evaluate(t)?;
        let score = sel.cond_report.as_ref().map_or(f64::INFINITY, ConditionReport::worst);
        let better = match &best {
            None => true,
            Some((bs, b)) => score < *bs || (score == *bs && sel.key() < b.key()),
        };
        if better {
            best = Some((score, sel));
        }
    }
    let (score, sel) = best.expect("at least one trial");
    if score.is_finite() {
        Ok(sel)
    } else {
        Err(Error::SingularSelection(Box::new(sel)))
    }
}

/// Least-squares core over the full grid:
/// `argmin_U ‖t - U ×1 C1 ×2 C2 ×3 C3‖`, the minimum-norm solution
/// `t ×1 C1⁺ ×2 C2⁺ ×3 C3⁺` (mode products against the row index).
pub fn fit_core_full(t: &DenseTensor3, factors: &[Matrix; 3]) -> Result<DenseTensor3> {
    check_factors(t, factors)?;
    let mut out = t.clone();
    for (mode, c) in factors.iter().enumerate() {
        out = out.mode_multiply(&pinv(c, None), mode + 1)?;
    }
    Ok(out)
}

/// Core fitted on the sampled entries only.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossCoreFit {
    pub core: DenseTensor3,
    /// Distinct entries in the sample set.
    pub samples: usize,
    /// Numerical rank of the `samples x unknowns` design matrix.
    pub design_rank: usize,
    /// The design is rank deficient and `core` is the minimum-norm solution.
    pub rank_deficient: bool,
}

/// Whether `(i, j, k)` lies in `(ℓ1 x J x K) ∪ (I x ℓ2 x K) ∪ (I x J x ℓ3)`.
pub fn sample_mask(sel: &IndexSelection) -> Vec<bool> {
    let [l1, l2, l3] = sel.dims;
    let member = |set: &[usize], len: usize| {
        let mut m = vec![false; len];
        set.iter().for_each(|&i| m[i] = true);
        m
    };
    let (in_i, in_j, in_k) = (member(&sel.i_set, l1), member(&sel.j_set, l2), member(&sel.k_set, l3));
    let mut mask = Vec::with_capacity(l1 * l2 * l3);
    for &a in &in_i {
        for &b in &in_j {
            for &c in &in_k {
                mask.push((b && c) || (a && c) || (a && b));
            }
        }
    }
    mask
}

/// Least-squares core over the sample set only, each sampled entry counted
/// once. Solved as a dense linear least-squares problem in the
/// `m1 m2 m3` core unknowns via the pseudoinverse of the design matrix.
pub fn fit_core_cross(
    t: &DenseTensor3,
    factors: &[Matrix; 3],
    sel: &IndexSelection,
    pinv_tol: Option<f64>,
) -> Result<CrossCoreFit> {
    check_factors(t, factors)?;
    sel.check_tensor(t)?;
    let [l1, l2, l3] = t.dims();
    let core_dims = [0, 1, 2].map(|m| factors[m].rows());
    let unknowns = core_dims[0] * core_dims[1] * core_dims[2];
    let mask = sample_mask(sel);
    let coords: Vec<(usize, usize, usize)> = (0..l1 * l2 * l3)
        .filter(|&at| mask[at])
        .map(|at| (at / (l2 * l3), (at / l3) % l2, at % l3))
        .collect();

    let [c1, c2, c3] = factors;
    let design = Matrix::from_fn(coords.len(), unknowns, |row, col| {
        let (i, j, k) = coords[row];
        let a = col / (core_dims[1] * core_dims[2]);
        let b = (col / core_dims[2]) % core_dims[1];
        let c = col % core_dims[2];
        c1.get(a, i) * c2.get(b, j) * c3.get(c, k)
    });
    let rhs = Matrix::from_fn(coords.len(), 1, |row, _| {
        let (i, j, k) = coords[row];
        t.get(i, j, k)
    });
    let tol = pinv_tol.unwrap_or_else(|| Svd::default_tol(design.rows(), design.cols()));
    let design_rank = svd(&design).rank(tol);
    let solution = &pinv(&design, Some(tol)) * &rhs;
    Ok(CrossCoreFit {
        core: DenseTensor3::new(core_dims, solution.into_vec())?,
        samples: coords.len(),
        design_rank,
        rank_deficient: design_rank < unknowns,
    })
}

fn check_factors(t: &DenseTensor3, factors: &[Matrix; 3]) -> Result<()> {
    for (mode, f) in factors.iter().enumerate() {
        if f.cols() != t.dims()[mode] {
            return Err(Error::DimensionMismatch {
                op: "core fit factors",
                expected: t.dims()[mode],
                found: f.cols(),
            });
        }
    }
    Ok(())
}

/// `‖t - U ×1 C1 ×2 C2 ×3 C3‖` over the full grid.
pub fn full_residual(t: &DenseTensor3, core: &DenseTensor3, factors: &[Matrix; 3]) -> Result<f64> {
    check_factors(t, factors)?;
    for (mode, f) in factors.iter().enumerate() {
        if f.rows() != core.dims()[mode] {
            return Err(Error::DimensionMismatch {
                op: "full_residual",
                expected: core.dims()[mode],
                found: f.rows(),
            });
        }
    }
    Ok(t.sub(&apply_factors(core, factors))?.hs_norm())
}
