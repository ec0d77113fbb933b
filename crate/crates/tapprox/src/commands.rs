//! The subcommands as plain functions: each takes parsed arguments and
//! returns the text for stdout, the files to write and any warnings.

use std::path::{Path, PathBuf};
use std::time::Instant;

use tapprox_core::bsta::{bsta_solve, BstaOptions, Init};
use tapprox_core::flrta::{flrta_approx, select_indices, IndexSelection, COND_WARN_THRESHOLD, DEFAULT_TRIALS};
use tapprox_core::{DenseTensor3, Error};

use crate::error::CliResult;
use crate::gen::generate;
use crate::io::{format_matrix, format_tensor, write_text};
use crate::report::{relative, to_json, to_kv, BstaDetails, Cond, FlrtaDetails, InfoReport, RunReport};

pub const DEFAULT_SEED: u64 = 1;

/// Named output files as `(suffix, contents)`.
pub type Files = Vec<(String, String)>;

#[derive(Clone, Debug, Default)]
pub struct Output {
    pub stdout: String,
    /// `(path suffix, contents)`, appended to the output prefix.
    pub files: Files,
    pub warnings: Vec<String>,
}

impl Output {
    /// Writes `files` next to `prefix` (`<prefix>.<suffix>`).
    pub fn write_files(&self, prefix: &Path) -> CliResult<()> {
        for (suffix, text) in &self.files {
            let mut name = prefix.as_os_str().to_owned();
            name.push(".");
            name.push(suffix);
            write_text(&PathBuf::from(name), text)?;
        }
        Ok(())
    }
}

fn render<T: serde::Serialize>(value: &T, json: bool) -> CliResult<String> {
    if json {
        to_json(value)
    } else {
        to_kv(value)
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn info(t: &DenseTensor3, json: bool) -> CliResult<Output> {
    let report = InfoReport {
        dims: t.dims(),
        entries: t.len(),
        hs_norm: t.hs_norm(),
        multilinear_rank: t.multilinear_rank(),
    };
    Ok(Output {
        stdout: render(&report, json)?,
        ..Output::default()
    })
}

pub fn gen(dims: [usize; 3], mlrank: [usize; 3], noise: f64, seed: u64) -> CliResult<Output> {
    Ok(Output {
        stdout: format_tensor(&generate(dims, mlrank, noise, seed)?),
        ..Output::default()
    })
}

#[derive(Clone, Debug)]
pub struct BstaArgs {
    pub ranks: [usize; 3],
    pub rel_tol: f64,
    pub max_sweeps: usize,
    pub init: Init,
    pub seed: u64,
    pub crit_tol: f64,
    pub timing: bool,
}

impl BstaArgs {
    pub fn new(ranks: [usize; 3]) -> Self {
        Self {
            ranks,
            rel_tol: BstaOptions::DEFAULT_REL_TOL,
            max_sweeps: BstaOptions::DEFAULT_MAX_SWEEPS,
            init: Init::Hosvd,
            seed: DEFAULT_SEED,
            crit_tol: BstaOptions::DEFAULT_CRIT_TOL,
            timing: false,
        }
    }
}

/// Runs the solver and returns the report with the frames and core as files
/// `x.mat`, `y.mat`, `z.mat` and `core.t3`.
pub fn bsta_report(t: &DenseTensor3, args: &BstaArgs) -> CliResult<(RunReport, Files)> {
    let opts = BstaOptions {
        target_ranks: args.ranks,
        max_sweeps: args.max_sweeps,
        rel_tol: args.rel_tol,
        init: args.init,
        seed: args.seed,
        crit_tol: args.crit_tol,
    };
    let start = Instant::now();
    let res = bsta_solve(t, &opts)?;
    let wall = elapsed_ms(start);

    let dims = t.dims();
    let norm = t.hs_norm();
    let report = RunReport {
        method: "bsta",
        dims,
        ranks: args.ranks,
        seed: args.seed,
        norm,
        error: res.approx_error,
        rel_error: relative(res.approx_error, norm),
        storage_dense: t.len(),
        storage_factorized: res.core.len() + (0..3).map(|m| dims[m] * args.ranks[m]).sum::<usize>(),
        bsta: Some(BstaDetails {
            init: match args.init {
                Init::Hosvd => "hosvd",
                Init::Random => "random",
            },
            sweeps: res.sweeps,
            max_sweeps: args.max_sweeps,
            rel_tol: args.rel_tol,
            converged: res.converged,
            critical_point_residual: res.critical_point_residual,
            crit_tol: args.crit_tol,
            subspace_gap: res.subspace_gap,
            objective_history: res.objective_history.clone(),
        }),
        flrta: None,
        wall_time_ms: args.timing.then_some(wall),
    };
    let frames = res.subspaces.frames();
    let files = vec![
        ("x.mat".to_owned(), format_matrix(frames[0])),
        ("y.mat".to_owned(), format_matrix(frames[1])),
        ("z.mat".to_owned(), format_matrix(frames[2])),
        ("core.t3".to_owned(), format_tensor(&res.core)),
    ];
    Ok((report, files))
}

#[derive(Clone, Debug)]
pub struct FlrtaArgs {
    pub ranks: [usize; 3],
    pub trials: usize,
    pub seed: u64,
    pub pinv_tol: Option<f64>,
    pub timing: bool,
}

impl FlrtaArgs {
    pub fn new(ranks: [usize; 3]) -> Self {
        Self {
            ranks,
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            pinv_tol: None,
            timing: false,
        }
    }
}

/// Runs selection and the cross approximation; files are the factors
/// `c1.mat`, `c2.mat`, `c3.mat` and `core.t3`.
///
/// When every trial is singular the least bad selection is still used (the
/// pseudoinverses give the minimum-norm crosses) and a warning is returned.
pub fn flrta_report(t: &DenseTensor3, args: &FlrtaArgs) -> CliResult<(RunReport, Files, Vec<String>)> {
    if let Some(tol) = args.pinv_tol {
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(Error::InvalidOption("pinv tolerance must be a finite non-negative number").into());
        }
    }
    let mut warnings = Vec::new();
    let start = Instant::now();
    let (sel, singular): (IndexSelection, bool) = match select_indices(t, args.ranks, args.trials, args.seed) {
        Ok(sel) => (sel, false),
        Err(Error::SingularSelection(best)) => {
            warnings.push("every trial selection is rank deficient; using the least ill-conditioned one".to_owned());
            (*best, true)
        }
        Err(e) => return Err(e.into()),
    };
    let tucker = flrta_approx(t, &sel, args.pinv_tol)?;
    let approx = tucker.reconstruct();
    let wall = elapsed_ms(start);

    let cond = sel.cond_report().expect("selection was evaluated").clone();
    let worst = cond.worst();
    if !singular && worst > COND_WARN_THRESHOLD {
        warnings.push(format!("selection is ill-conditioned (condition number {worst:e})"));
    }
    let error = approx.sub(t)?.hs_norm();
    let norm = t.hs_norm();
    let report = RunReport {
        method: "flrta",
        dims: t.dims(),
        ranks: args.ranks,
        seed: args.seed,
        norm,
        error,
        rel_error: relative(error, norm),
        storage_dense: t.len(),
        storage_factorized: tucker.storage(),
        bsta: None,
        flrta: Some(FlrtaDetails {
            trials: args.trials,
            pinv_tol: args.pinv_tol,
            i_set: sel.i_set().to_vec(),
            j_set: sel.j_set().to_vec(),
            k_set: sel.k_set().to_vec(),
            e_cond: Cond(cond.e_cond),
            slice_conds: cond.slice_conds.iter().copied().map(Cond).collect(),
            worst_cond: Cond(worst),
            singular_selection: singular,
        }),
        wall_time_ms: args.timing.then_some(wall),
    };
    let [c1, c2, c3] = &tucker.factors;
    let files = vec![
        ("c1.mat".to_owned(), format_matrix(c1)),
        ("c2.mat".to_owned(), format_matrix(c2)),
        ("c3.mat".to_owned(), format_matrix(c3)),
        ("core.t3".to_owned(), format_tensor(&tucker.core)),
    ];
    Ok((report, files, warnings))
}

fn finish(report: &RunReport, mut files: Files, warnings: Vec<String>, json: bool) -> CliResult<Output> {
    files.push(("report.txt".to_owned(), to_kv(report)?));
    if json {
        files.push(("report.json".to_owned(), to_json(report)?));
    }
    Ok(Output {
        stdout: render(report, json)?,
        files,
        warnings,
    })
}

pub fn bsta(t: &DenseTensor3, args: &BstaArgs, json: bool) -> CliResult<Output> {
    let (report, files) = bsta_report(t, args)?;
    finish(&report, files, Vec::new(), json)
}

pub fn flrta(t: &DenseTensor3, args: &FlrtaArgs, json: bool) -> CliResult<Output> {
    let (report, files, warnings) = flrta_report(t, args)?;
    finish(&report, files, warnings, json)
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct BenchRow {
    pub method: &'static str,
    pub ranks: [usize; 3],
    pub rel_error: f64,
    /// Sweeps for BSTA, trials for FLRTA.
    pub iterations: usize,
    pub storage_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

/// Gap allowed when comparing the two methods' errors.
pub const BENCH_SLACK: f64 = 1e-9;

/// Rank triples where FLRTA ended up more accurate than BSTA by more than
/// [`BENCH_SLACK`].
pub fn flrta_wins(rows: &[BenchRow]) -> Vec<[usize; 3]> {
    rows.chunks(2)
        .filter(|pair| pair[0].rel_error > pair[1].rel_error + BENCH_SLACK)
        .map(|pair| pair[0].ranks)
        .collect()
}

pub fn bench_rows(
    t: &DenseTensor3,
    ranks: &[[usize; 3]],
    seed: u64,
    timing: bool,
) -> CliResult<(Vec<BenchRow>, Vec<String>)> {
    let mut rows = Vec::with_capacity(2 * ranks.len());
    let mut warnings = Vec::new();
    let ratio = |stored: usize| stored as f64 / t.len() as f64;
    for &r in ranks {
        let mut b = BstaArgs::new(r);
        b.seed = seed;
        b.timing = timing;
        let (rep, _) = bsta_report(t, &b)?;
        rows.push(BenchRow {
            method: "bsta",
            ranks: r,
            rel_error: rep.rel_error,
            iterations: rep.bsta.as_ref().map_or(0, |d| d.sweeps),
            storage_ratio: ratio(rep.storage_factorized),
            wall_time_ms: rep.wall_time_ms,
        });
        let mut f = FlrtaArgs::new(r);
        f.seed = seed;
        f.timing = timing;
        let (rep, _, warn) = flrta_report(t, &f)?;
        warnings.extend(warn.into_iter().map(|w| format!("ranks {r:?}: {w}")));
        rows.push(BenchRow {
            method: "flrta",
            ranks: r,
            rel_error: rep.rel_error,
            iterations: f.trials,
            storage_ratio: ratio(rep.storage_factorized),
            wall_time_ms: rep.wall_time_ms,
        });
    }
    Ok((rows, warnings))
}

pub fn format_bench(rows: &[BenchRow]) -> String {
    let mut lines = vec![[
        "method".to_owned(),
        "ranks".to_owned(),
        "rel_error".to_owned(),
        "iters".to_owned(),
        "storage".to_owned(),
        "time_ms".to_owned(),
    ]];
    for row in rows {
        lines.push([
            row.method.to_owned(),
            format!("({},{},{})", row.ranks[0], row.ranks[1], row.ranks[2]),
            format!("{:.6e}", row.rel_error),
            row.iterations.to_string(),
            format!("{:.4}", row.storage_ratio),
            row.wall_time_ms.map_or_else(|| "-".to_owned(), |ms| format!("{ms:.3}")),
        ]);
    }
    let widths: Vec<usize> = (0..6)
        .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for line in &lines {
        let cells: Vec<String> = line
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (cell, &w))| {
                if c < 2 {
                    format!("{cell:<w$}")
                } else {
                    format!("{cell:>w$}")
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub fn bench(t: &DenseTensor3, ranks: &[[usize; 3]], seed: u64, timing: bool, json: bool) -> CliResult<Output> {
    if ranks.is_empty() {
        return Err(crate::error::CliError::Usage(
            "bench needs at least one rank triple".to_owned(),
        ));
    }
    let (rows, mut warnings) = bench_rows(t, ranks, seed, timing)?;
    for r in flrta_wins(&rows) {
        warnings.push(format!(
            "ranks {r:?}: flrta error is below bsta (its factors span more than the target ranks)"
        ));
    }
    let stdout = if json { to_json(&rows)? } else { format_bench(&rows) };
    Ok(Output {
        stdout,
        files: Vec::new(),
        warnings,
    })
}
