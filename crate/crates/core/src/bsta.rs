//! Best subspace tensor approximation.
//!
//! For target dimensions `(p, q, r)` the solver maximizes
//! `‖P_{X⊗Y⊗Z}(T)‖²` over subspaces `X ⊂ R^m1`, `Y ⊂ R^m2`, `Z ⊂ R^m3` by
//! alternating: with two subspaces fixed, the optimal third one is spanned by
//! the leading left singular vectors of the projected operator for that mode.
//! Each update is an exact maximization in one variable, so the objective
//! never decreases.

use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{chordal_distance, leading_left_subspace, svd};
use crate::subspace::{coefficient_tensor, distance, projected_norm_sq, Subspace, SubspaceTriple};
use crate::tensor::{check_mode, complement};
use crate::{DenseTensor3, Error, Matrix, Result};

/// How the first subspace triple is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Init {
    /// Leading left singular subspaces of the three unfoldings.
    #[default]
    Hosvd,
    /// Orthonormalized seeded Gaussian frames.
    Random,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BstaOptions {
    pub target_ranks: [usize; 3],
    pub max_sweeps: usize,
    /// A full sweep that improves the objective by less than this fraction
    /// counts as stagnation. Iteration stops at the first stagnating sweep
    /// whose iterate also passes the critical-point certificate.
    pub rel_tol: f64,
    pub init: Init,
    /// Only used with [`Init::Random`].
    pub seed: u64,
    /// Tolerance for the critical-point certificate, also part of the
    /// stopping rule.
    pub crit_tol: f64,
}

impl BstaOptions {
    pub const DEFAULT_MAX_SWEEPS: usize = 200;
    pub const DEFAULT_REL_TOL: f64 = 1e-10;
    pub const DEFAULT_CRIT_TOL: f64 = 1e-6;

    pub fn new(target_ranks: [usize; 3]) -> Self {
        Self {
            target_ranks,
            max_sweeps: Self::DEFAULT_MAX_SWEEPS,
            rel_tol: Self::DEFAULT_REL_TOL,
            init: Init::Hosvd,
            seed: 0,
            crit_tol: Self::DEFAULT_CRIT_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BstaResult {
    pub subspaces: SubspaceTriple,
    /// Coefficients of the best approximation in the frames' coordinates,
    /// shape `p x q x r`.
    pub core: DenseTensor3,
    /// `‖P(T)‖²` for the initial triple, then after every single-mode update.
    pub objective_history: Vec<f64>,
    /// `‖T - P(T)‖` at the final triple.
    pub approx_error: f64,
    pub sweeps: usize,
    /// Objective stagnated and the critical-point certificate passed.
    pub converged: bool,
    pub critical_point_residual: f64,
    /// Largest chordal distance between the last two iterates over the three
    /// modes. Diagnostic only.
    pub subspace_gap: f64,
}

impl BstaResult {
    pub fn objective(&self) -> f64 {
        *self
            .objective_history
            .last()
            .expect("history starts with the initial value")
    }
}

fn check_ranks(dims: [usize; 3], ranks: [usize; 3]) -> Result<()> {
    for mode in 0..3 {
        if ranks[mode] == 0 || ranks[mode] > dims[mode] {
            return Err(Error::RankBound {
                mode: mode + 1,
                rank: ranks[mode],
                dim: dims[mode],
            });
        }
    }
    Ok(())
}

/// Projected operator for mode `mode`: `T` contracted with the frames of `a`
/// and `b` in the two other modes (increasing mode order), unfolded so its
/// rows are indexed by mode `mode`. Shape `m_mode x (dim a * dim b)`.
pub fn projected_operator(t: &DenseTensor3, mode: usize, a: &Subspace, b: &Subspace) -> Result<Matrix> {
    check_mode(mode)?;
    let (p, q) = complement(mode);
    let dims = t.dims();
    for (sub, m) in [(a, p), (b, q)] {
        if sub.ambient_dim() != dims[m - 1] {
            return Err(Error::DimensionMismatch {
                op: "projected_operator",
                expected: dims[m - 1],
                found: sub.ambient_dim(),
            });
        }
    }
    t.mode_multiply(a.frame(), p)?.mode_multiply(b.frame(), q)?.unfold(mode)
}

/// Leading singular subspaces of the three unfoldings.
pub fn hosvd_init(t: &DenseTensor3, ranks: [usize; 3]) -> Result<SubspaceTriple> {
    check_ranks(t.dims(), ranks)?;
    let [x, y, z] = [1, 2, 3].map(|mode| {
        let a = t.unfold(mode).expect("valid mode");
        Subspace::from_frame(leading_left_subspace(&a, ranks[mode - 1], None))
            .expect("leading subspace frames are orthonormal")
    });
    Ok(SubspaceTriple::new(x, y, z))
}

fn update(t: &DenseTensor3, mode: usize, a: &Subspace, b: &Subspace, prev: &Subspace) -> Result<Subspace> {
    let op = projected_operator(t, mode, a, b)?;
    Subspace::from_frame(leading_left_subspace(&op, prev.dim(), Some(prev.frame())))
}

/// One relaxation sweep: update `X` from `(Y, Z)`, then `Y` from the new `X`
/// and old `Z`, then `Z` from the new `X` and `Y`. Returns the new triple and
/// the objective after each of the three updates.
pub fn relaxation_sweep(t: &DenseTensor3, s: &SubspaceTriple) -> Result<(SubspaceTriple, [f64; 3])> {
    s.check_ambient(t, "relaxation_sweep")?;
    let x = update(t, 1, &s.y, &s.z, &s.x)?;
    let after_x = SubspaceTriple::new(x, s.y.clone(), s.z.clone());
    let obj_x = projected_norm_sq(t, &after_x)?;

    let y = update(t, 2, &after_x.x, &after_x.z, &s.y)?;
    let after_y = SubspaceTriple::new(after_x.x, y, after_x.z);
    let obj_y = projected_norm_sq(t, &after_y)?;

    let z = update(t, 3, &after_y.x, &after_y.y, &s.z)?;
    let next = SubspaceTriple::new(after_y.x, after_y.y, z);
    let obj_z = projected_norm_sq(t, &next)?;

    Ok((next, [obj_x, obj_y, obj_z]))
}

/// Initial triple selected by `opts.init`.
pub fn initial_triple(t: &DenseTensor3, opts: &BstaOptions) -> Result<SubspaceTriple> {
    check_ranks(t.dims(), opts.target_ranks)?;
    match opts.init {
        Init::Hosvd => hosvd_init(t, opts.target_ranks),
        Init::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            Ok(crate::subspace::random_triple(&mut rng, t.dims(), opts.target_ranks))
        }
    }
}

/// Runs the alternating relaxation from the initialization selected in
/// `opts`.
pub fn bsta_solve(t: &DenseTensor3, opts: &BstaOptions) -> Result<BstaResult> {
    let start = initial_triple(t, opts)?;
    bsta_solve_from(t, start, opts)
}

/// Runs the alternating relaxation from a caller-supplied triple. Ranks are
/// taken from `start`; `opts.target_ranks` and `opts.init` are ignored.
pub fn bsta_solve_from(t: &DenseTensor3, start: SubspaceTriple, opts: &BstaOptions) -> Result<BstaResult> {
    start.check_ambient(t, "bsta_solve")?;
    check_ranks(t.dims(), start.dims())?;
    if opts.max_sweeps == 0 {
        return Err(Error::InvalidOption("max_sweeps must be at least 1"));
    }
    if opts.rel_tol.is_nan() || opts.rel_tol <= 0.0 || opts.crit_tol.is_nan() || opts.crit_tol <= 0.0 {
        return Err(Error::InvalidOption("tolerances must be positive"));
    }

    let mut current = start;
    let mut objective = projected_norm_sq(t, &current)?;
    let mut history = Vec::with_capacity(1 + 3 * opts.max_sweeps.min(64));
    history.push(objective);
    let mut sweeps = 0;
    let mut stagnated = false;
    let mut residual = f64::INFINITY;
    let mut gap = 0.0;

    while sweeps < opts.max_sweeps {
        let (next, objs) = relaxation_sweep(t, &current)?;
        sweeps += 1;
        history.extend_from_slice(&objs);
        gap = (0..3)
            .map(|i| chordal_distance(current.frames()[i], next.frames()[i]))
            .fold(0.0, f64::max);
        let gain = objs[2] - objective;
        objective = objs[2];
        current = next;
        stagnated = gain < opts.rel_tol * f64::max(objective, f64::MIN_POSITIVE);
        if stagnated {
            // A stalled objective can still sit measurably off a critical
            // point; keep sweeping until the certificate agrees.
            residual = verify_critical_point(t, &current, opts.crit_tol)?.0;
            if residual <= opts.crit_tol {
                break;
            }
        }
    }

    if !stagnated {
        residual = verify_critical_point(t, &current, opts.crit_tol)?.0;
    }
    let core = coefficient_tensor(t, &current)?;
    let approx_error = distance(t, &current)?;
    Ok(BstaResult {
        subspaces: current,
        core,
        objective_history: history,
        approx_error,
        sweeps,
        converged: stagnated && residual <= opts.crit_tol,
        critical_point_residual: residual,
        subspace_gap: gap,
    })
}

/// Checks that each subspace of `s` is spanned by left singular vectors of
/// its projected operator `M`, i.e. is invariant under `G = M Mᵀ`.
///
/// Per mode the residual is `‖G F - F (Fᵀ G F)‖_F / ‖G‖_F` for the frame `F`;
/// the returned residual is the maximum over modes, and passes when it is at
/// most `tol`.
pub fn verify_critical_point(t: &DenseTensor3, s: &SubspaceTriple, tol: f64) -> Result<(f64, bool)> {
    s.check_ambient(t, "verify_critical_point")?;
    let mut worst: f64 = 0.0;
    for mode in 1..=3 {
        let (p, q) = complement(mode);
        let m = projected_operator(t, mode, s.get(p), s.get(q))?;
        let g = &m * &m.transpose();
        let f = s.get(mode).frame();
        let gf = &g * f;
        let inner = f.tr_mul(&gf)?;
        let resid = gf.sub(&(f * &inner))?.frobenius_norm();
        worst = worst.max(resid / f64::max(g.frobenius_norm(), f64::MIN_POSITIVE));
    }
    Ok((worst, worst <= tol))
}

/// Best subspace approximation of a matrix viewed as a 2-tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixBsta {
    pub left: Subspace,
    pub right: Subspace,
    /// `sqrt(Σ_{i>k} σ_i²)`.
    pub error: f64,
}

/// Spans of the top-`k` left and right singular vectors of `a` and the
/// resulting truncation error.
pub fn matrix_bsta(a: &Matrix, k: usize) -> Result<MatrixBsta> {
    let bound = a.rows().min(a.cols());
    if k == 0 || k > bound {
        return Err(Error::RankBound {
            mode: 1,
            rank: k,
            dim: bound,
        });
    }
    let s = svd(a).s;
    let tail: f64 = s[k..].iter().map(|v| v * v).sum();
    Ok(MatrixBsta {
        left: Subspace::from_frame(leading_left_subspace(a, k, None))?,
        right: Subspace::from_frame(leading_left_subspace(&a.transpose(), k, None))?,
        error: libm::sqrt(tail),
    })
}

/// Best `i`-dimensional left factor `X` for `dist(A, X ⊗ Y)` with the right
/// factor `Y` fixed: the leading left singular subspace of `A Y`, padded with
/// standard basis directions when `A Y` has rank below `i`.
pub fn matrix_bsta_fixed_factor(a: &Matrix, y: &Subspace, i: usize) -> Result<Subspace> {
    if y.ambient_dim() != a.cols() {
        return Err(Error::DimensionMismatch {
            op: "matrix_bsta_fixed_factor",
            expected: a.cols(),
            found: y.ambient_dim(),
        });
    }
    if i == 0 || i > a.rows() {
        return Err(Error::RankBound {
            mode: 1,
            rank: i,
            dim: a.rows(),
        });
    }
    let restricted = a.matmul(y.frame())?;
    Subspace::from_frame(leading_left_subspace(&restricted, i, None))
}
