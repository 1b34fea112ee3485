//! Pairwise partial-correlation inference: one-vs-rest regressions, residual
//! reuse, the modified Wilks-lambda statistic, its weighted chi-squared
//! reference, and graph recovery.

use std::ops::Range;

use ndarray::{s, Array2};
use rayon::prelude::*;

use crate::align::EncodedMatrix;
use crate::dist::{
    chisq_tail, weighted_chisq_tail_with, TailMethod, WeightedChiSq,
};
use crate::error::{Error, Result};
use crate::group_lasso::{
    fit_multivariate_group_lasso, lambda_schedule, FitResult, GroupPenaltySpec,
};
use crate::linalg::{default_ridge, inv_sqrt_sym, sym_eig};
use crate::scalar::Scalar;

/// Options for the pairwise sweep.
#[derive(Debug, Clone)]
pub struct TestOptions<F> {
    /// Compute the weighted chi-squared p-value in addition to p_chisq.
    pub weighted: bool,
    pub tail: TailMethod,
    pub tol: F,
    pub max_iter: usize,
}

impl<F: Scalar> Default for TestOptions<F> {
    fn default() -> Self {
        TestOptions {
            weighted: false,
            tail: TailMethod::Imhof,
            tol: F::from_f64_lossy(1e-6),
            max_iter: 1000,
        }
    }
}

/// One-vs-rest fits for every retained position.
#[derive(Debug, Clone)]
pub struct ResidualCache<F> {
    /// Per-position fit of `X_{G_i}` on `X_{G_i^c}`; `None` if the fit failed.
    pub fits: Vec<Option<FitResult<F>>>,
    /// Predictor-group layout of fit `i`: original group index per predictor
    /// group (all groups except `i`, in order).
    pub predictor_groups: Vec<Vec<usize>>,
    pub warnings: Vec<String>,
}

/// Per-pair test outcome.
#[derive(Debug, Clone)]
pub struct PairResult<F> {
    /// Original alignment positions, `i < j`.
    pub i: usize,
    pub j: usize,
    /// Block sizes after the `d_i <= d_j` swap.
    pub d_i: usize,
    pub d_j: usize,
    /// Squared sample canonical correlations, descending, length `d_i`.
    pub r2: Vec<F>,
    pub t: F,
    pub weights: Option<WeightedChiSq<F>>,
    pub p_weighted: Option<F>,
    pub p_chisq: F,
    /// Whether each side required a pairwise refit (in `(i, j)` order).
    pub refit_flags: (bool, bool),
    pub unstable: bool,
    /// Benjamini-Hochberg adjusted ranking p-value (plumbing column).
    pub bh_adj_p: F,
}

impl<F: Scalar> PairResult<F> {
    /// p-value used for ranking: weighted when available, chi-squared
    /// otherwise.
    pub fn ranking_p(&self) -> F {
        self.p_weighted.unwrap_or(self.p_chisq)
    }
}

/// Columns of the encoded matrix excluding the listed groups, plus the new
/// group layout and the original group index per predictor group.
fn columns_excluding<F: Scalar>(
    enc: &EncodedMatrix<F>,
    exclude: &[usize],
) -> (Array2<F>, Vec<Range<usize>>, Vec<usize>) {
    let kept: Vec<usize> = (0..enc.m()).filter(|g| !exclude.contains(g)).collect();
    let width: usize = kept.iter().map(|&g| enc.groups[g].len()).sum();
    let mut x = Array2::<F>::zeros((enc.n(), width));
    let mut ranges = Vec::with_capacity(kept.len());
    let mut col = 0usize;
    for &g in &kept {
        let range = enc.groups[g].clone();
        let w = range.len();
        x.slice_mut(s![.., col..col + w])
            .assign(&enc.x.slice(s![.., range]));
        ranges.push(col..col + w);
        col += w;
    }
    (x, ranges, kept)
}

/// Step 1 of the pipeline: fit every one-vs-rest regression.
pub fn one_vs_rest_all<F: Scalar>(
    enc: &EncodedMatrix<F>,
    spec: &GroupPenaltySpec<F>,
    opts: &TestOptions<F>,
) -> Result<ResidualCache<F>> {
    let m = enc.m();
    if m < 2 {
        return Err(Error::DegenerateData(format!(
            "need at least 2 retained positions, got {m}"
        )));
    }
    let results: Vec<(Option<FitResult<F>>, Vec<usize>, Option<String>)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let y = enc.x.slice(s![.., enc.groups[i].clone()]).to_owned();
            let (xp, ranges, kept) = columns_excluding(enc, &[i]);
            let d_groups: Vec<usize> = kept.iter().map(|&g| enc.groups[g].len()).collect();
            let lambda = lambda_schedule(&d_groups, enc.d(i), enc.n(), spec);
            match fit_multivariate_group_lasso(
                &y,
                &xp,
                &ranges,
                &lambda,
                opts.tol,
                opts.max_iter,
                None,
            ) {
                Ok(fit) => {
                    let warn = if fit.converged {
                        None
                    } else {
                        Some(format!(
                            "one-vs-rest fit for position {} did not converge",
                            enc.positions[i]
                        ))
                    };
                    (Some(fit), kept, warn)
                }
                Err(e) => (
                    None,
                    kept,
                    Some(format!(
                        "one-vs-rest fit for position {} failed: {e}",
                        enc.positions[i]
                    )),
                ),
            }
        })
        .collect();

    let mut fits = Vec::with_capacity(m);
    let mut predictor_groups = Vec::with_capacity(m);
    let mut warnings = Vec::new();
    for (fit, kept, warn) in results {
        fits.push(fit);
        predictor_groups.push(kept);
        if let Some(w) = warn {
            warnings.push(w);
        }
    }
    Ok(ResidualCache {
        fits,
        predictor_groups,
        warnings,
    })
}

/// Residuals of `X_{G_a}` regressed on everything except groups `a` and `b`.
///
/// When the one-vs-rest coefficient block of `b` is exactly zero the cached
/// residuals are reused; otherwise the pairwise regression is solved,
/// warm-started from the one-vs-rest solution with the `b` block removed.
fn side_residuals<F: Scalar>(
    cache: &ResidualCache<F>,
    enc: &EncodedMatrix<F>,
    spec: &GroupPenaltySpec<F>,
    opts: &TestOptions<F>,
    a: usize,
    b: usize,
) -> Result<(Array2<F>, bool)> {
    let fit = cache.fits[a]
        .as_ref()
        .ok_or_else(|| Error::Numeric(format!("no cached fit for position index {a}")))?;
    let kept = &cache.predictor_groups[a];
    // locate b's block in fit a's predictor layout
    let b_slot = kept
        .iter()
        .position(|&g| g == b)
        .ok_or_else(|| Error::Input(format!("group {b} not among predictors of {a}")))?;
    let mut offset = 0usize;
    for &g in kept.iter().take(b_slot) {
        offset += enc.groups[g].len();
    }
    let b_width = enc.groups[b].len();
    let block = fit.b.slice(s![offset..offset + b_width, ..]);
    let block_zero = block.iter().all(|&v| v == F::zero());
    if block_zero {
        return Ok((fit.residuals.clone(), false));
    }

    // pairwise refit excluding both groups
    let y = enc.x.slice(s![.., enc.groups[a].clone()]).to_owned();
    let (xp, ranges, kept2) = columns_excluding(enc, &[a, b]);
    let d_groups: Vec<usize> = kept2.iter().map(|&g| enc.groups[g].len()).collect();
    let lambda = lambda_schedule(&d_groups, enc.d(a), enc.n(), spec);
    // warm start: one-vs-rest coefficients with the b rows removed
    let d_resp = enc.d(a);
    let mut warm = Array2::<F>::zeros((xp.ncols(), d_resp));
    {
        let top = fit.b.slice(s![..offset, ..]);
        warm.slice_mut(s![..offset, ..]).assign(&top);
        let bottom = fit.b.slice(s![offset + b_width.., ..]);
        warm.slice_mut(s![offset.., ..]).assign(&bottom);
    }
    let refit = fit_multivariate_group_lasso(
        &y,
        &xp,
        &ranges,
        &lambda,
        opts.tol,
        opts.max_iter,
        Some(&warm),
    )?;
    if !refit.converged {
        return Err(Error::NonConvergence {
            iterations: refit.iterations,
            last_change: f64::NAN,
        });
    }
    Ok((refit.residuals, true))
}

/// Residual pair for positions `(i, j)` (retained-position indices), with
/// refit flags.
pub fn pair_residuals<F: Scalar>(
    cache: &ResidualCache<F>,
    enc: &EncodedMatrix<F>,
    spec: &GroupPenaltySpec<F>,
    opts: &TestOptions<F>,
    i: usize,
    j: usize,
) -> Result<(Array2<F>, Array2<F>, bool, bool)> {
    if i == j {
        return Err(Error::Input("pair requires two distinct positions".into()));
    }
    let (ei, refit_i) = side_residuals(cache, enc, spec, opts, i, j)?;
    let (ej, refit_j) = side_residuals(cache, enc, spec, opts, j, i)?;
    Ok((ei, ej, refit_i, refit_j))
}

/// Squared canonical correlations and the modified Wilks-lambda statistic.
#[derive(Debug, Clone)]
pub struct WilksPair<F> {
    pub r2: Vec<F>,
    pub t: F,
    pub s11: Array2<F>,
    pub s22: Array2<F>,
    pub s12: Array2<F>,
    pub s11_inv_sqrt: Array2<F>,
    pub s22_inv_sqrt: Array2<F>,
    pub unstable: bool,
}

/// Computes the CCA spectrum of a residual pair; callers must pass the
/// smaller block first (`d_1 <= d_2`).
pub fn wilks_pair<F: Scalar>(e1: &Array2<F>, e2: &Array2<F>, n: usize) -> Result<WilksPair<F>> {
    let d1 = e1.ncols();
    let d2 = e2.ncols();
    if d1 > d2 {
        return Err(Error::Input(
            "wilks_pair requires the smaller block first".into(),
        ));
    }
    let n_f = F::from_usize_lossy(n);
    let s11 = e1.t().dot(e1) / n_f;
    let s22 = e2.t().dot(e2) / n_f;
    let s12 = e1.t().dot(e2) / n_f;

    let mut unstable = false;
    for s in [&s11, &s22] {
        let spec = sym_eig(s)?;
        let lam_max = spec.eigenvalues.first().copied().unwrap_or(F::zero());
        if let Some(&lam_min) = spec.eigenvalues.last() {
            if lam_min < F::from_f64_lossy(1e-8) * lam_max.max(F::one()) {
                unstable = true;
            }
        }
    }
    let s11_inv_sqrt = inv_sqrt_sym(&s11, default_ridge(&s11))?;
    let s22_inv_sqrt = inv_sqrt_sym(&s22, default_ridge(&s22))?;

    // r^2 are the eigenvalues of A A^T with A = S11^{-1/2} S12 S22^{-1/2}
    let a = s11_inv_sqrt.dot(&s12).dot(&s22_inv_sqrt);
    let gram = a.dot(&a.t());
    let spec = sym_eig(&gram)?;
    let ceiling = F::one() - F::from_f64_lossy(1e-12);
    let mut clamped = false;
    let r2: Vec<F> = spec
        .eigenvalues
        .iter()
        .map(|&v| {
            if v >= F::one() {
                clamped = true;
                ceiling
            } else {
                v.max(F::zero())
            }
        })
        .collect();
    unstable |= clamped;
    // near-unit canonical correlations make log(1 - r^2) ridge-dominated
    unstable |= r2.iter().any(|&r| r > F::one() - F::from_f64_lossy(1e-6));

    let mut log_sum = F::zero();
    for &r in &r2 {
        log_sum = log_sum + (F::one() - r).ln();
    }
    let t = -n_f * log_sum;

    Ok(WilksPair {
        r2,
        t,
        s11,
        s22,
        s12,
        s11_inv_sqrt,
        s22_inv_sqrt,
        unstable,
    })
}

/// Fourth-moment estimator of `Cov(Q)` from whitened residual rows.
///
/// Rows are whitened as `(E1 S11^{-1/2}, E2 S22^{-1/2})`; the output is
/// indexed by stacked `(t1, t2)` with `t2` varying fastest.
pub fn cov_q_hat<F: Scalar>(
    e1: &Array2<F>,
    e2: &Array2<F>,
    s11_inv_sqrt: &Array2<F>,
    s22_inv_sqrt: &Array2<F>,
) -> Result<Array2<F>> {
    let n = e1.nrows();
    if e2.nrows() != n {
        return Err(Error::Input("residual matrices disagree on N".into()));
    }
    let y1 = e1.dot(s11_inv_sqrt);
    let y2 = e2.dot(s22_inv_sqrt);
    let d1 = y1.ncols();
    let d2 = y2.ncols();
    // Z[k, t1*d2 + t2] = Y1[k,t1] * Y2[k,t2]; Cov(Q)-hat = Z^T Z / N
    let mut z = Array2::<F>::zeros((n, d1 * d2));
    for k in 0..n {
        for t1 in 0..d1 {
            let v1 = y1[[k, t1]];
            for t2 in 0..d2 {
                z[[k, t1 * d2 + t2]] = v1 * y2[[k, t2]];
            }
        }
    }
    let n_f = F::from_usize_lossy(n);
    Ok(z.t().dot(&z) / n_f)
}

/// Weighted and central chi-squared p-values for a pair statistic.
pub fn pair_pvalue<F: Scalar>(
    t: F,
    weights: &WeightedChiSq<F>,
    d_i: usize,
    d_j: usize,
    tail: TailMethod,
) -> Result<(F, F)> {
    let p_weighted = weighted_chisq_tail_with(weights, t, tail)?;
    let p_chisq = chisq_tail(d_i * d_j, t)?;
    Ok((p_weighted, p_chisq))
}

/// Full statistic for one pair of retained positions.
pub fn pair_statistic<F: Scalar>(
    enc: &EncodedMatrix<F>,
    cache: &ResidualCache<F>,
    spec: &GroupPenaltySpec<F>,
    opts: &TestOptions<F>,
    i: usize,
    j: usize,
) -> Result<PairResult<F>> {
    let (ei, ej, refit_i, refit_j) = pair_residuals(cache, enc, spec, opts, i, j)?;
    // swap so the smaller block is side 1
    let (e1, e2, swapped) = if ei.ncols() <= ej.ncols() {
        (&ei, &ej, false)
    } else {
        (&ej, &ei, true)
    };
    let n = enc.n();
    let wp = wilks_pair(e1, e2, n).map_err(|e| match e {
        Error::Numeric(detail) => Error::Singular {
            i: enc.positions[i],
            j: enc.positions[j],
            detail,
        },
        other => other,
    })?;
    let d1 = e1.ncols();
    let d2 = e2.ncols();

    let (weights, p_weighted) = if opts.weighted {
        let cov = cov_q_hat(e1, e2, &wp.s11_inv_sqrt, &wp.s22_inv_sqrt)?;
        let spec_cov = sym_eig(&cov)?;
        let w = WeightedChiSq::from_eigenvalues(spec_cov.eigenvalues);
        let (pw, _) = pair_pvalue(wp.t, &w, d1, d2, opts.tail)?;
        (Some(w), Some(pw))
    } else {
        (None, None)
    };
    let p_chisq = chisq_tail(d1 * d2, wp.t)?;

    Ok(PairResult {
        i: enc.positions[i],
        j: enc.positions[j],
        d_i: d1,
        d_j: d2,
        r2: wp.r2,
        t: wp.t,
        weights,
        p_weighted,
        p_chisq,
        refit_flags: if swapped {
            (refit_j, refit_i)
        } else {
            (refit_i, refit_j)
        },
        unstable: wp.unstable,
        bh_adj_p: F::nan(),
    })
}

/// Benjamini-Hochberg adjusted p-values (same order as the input).
pub fn benjamini_hochberg<F: Scalar>(p: &[F]) -> Vec<F> {
    let n = p.len();
    if n == 0 {
        return vec![];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| p[a].partial_cmp(&p[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut adjusted = vec![F::zero(); n];
    let n_f = F::from_usize_lossy(n);
    let mut running_min = F::one();
    for rank in (0..n).rev() {
        let idx = order[rank];
        let scaled = p[idx] * n_f / F::from_usize_lossy(rank + 1);
        running_min = running_min.min(scaled).min(F::one());
        adjusted[idx] = running_min;
    }
    adjusted
}

/// Outcome of the full pair sweep.
#[derive(Debug, Clone)]
pub struct PairSweep<F> {
    /// All testable pairs, sorted by ranking p ascending, ties broken by T
    /// descending then `(i, j)` lexicographic.
    pub results: Vec<PairResult<F>>,
    /// Pairs that failed, with the failure reason.
    pub failures: Vec<(usize, usize, String)>,
    pub warnings: Vec<String>,
}

/// Tests all `m(m-1)/2` position pairs.
pub fn test_all_pairs<F: Scalar>(
    enc: &EncodedMatrix<F>,
    spec: &GroupPenaltySpec<F>,
    opts: &TestOptions<F>,
) -> Result<PairSweep<F>> {
    let cache = one_vs_rest_all(enc, spec, opts)?;
    test_all_pairs_cached(enc, &cache, spec, opts)
}

/// Same as [`test_all_pairs`] but reusing a prepared one-vs-rest cache.
pub fn test_all_pairs_cached<F: Scalar>(
    enc: &EncodedMatrix<F>,
    cache: &ResidualCache<F>,
    spec: &GroupPenaltySpec<F>,
    opts: &TestOptions<F>,
) -> Result<PairSweep<F>> {
    let m = enc.m();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
        .collect();

    let outcomes: Vec<std::result::Result<PairResult<F>, (usize, usize, String)>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            if cache.fits[i].is_none() || cache.fits[j].is_none() {
                return Err((
                    enc.positions[i],
                    enc.positions[j],
                    "one-vs-rest fit unavailable".into(),
                ));
            }
            pair_statistic(enc, cache, spec, opts, i, j)
                .map_err(|e| (enc.positions[i], enc.positions[j], e.to_string()))
        })
        .collect();

    let mut results = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(r) => results.push(r),
            Err(f) => failures.push(f),
        }
    }

    results.sort_by(|a, b| {
        a.ranking_p()
            .partial_cmp(&b.ranking_p())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                b.t.partial_cmp(&a.t)
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
            .then((a.i, a.j).cmp(&(b.i, b.j)))
    });
    let ranking: Vec<F> = results.iter().map(|r| r.ranking_p()).collect();
    let adjusted = benjamini_hochberg(&ranking);
    for (r, adj) in results.iter_mut().zip(adjusted) {
        r.bh_adj_p = adj;
    }

    Ok(PairSweep {
        results,
        failures,
        warnings: cache.warnings.clone(),
    })
}

/// Contact graph recovery: edges with `T >= K log m`.
pub fn recover_graph<F: Scalar>(results: &[PairResult<F>], k: F, m: usize) -> Vec<(usize, usize)> {
    let threshold = k * F::from_usize_lossy(m.max(2)).ln();
    results
        .iter()
        .filter(|r| r.t >= threshold)
        .map(|r| (r.i, r.j))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::{parse_alignment, AlignmentFormat};
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::io::Cursor;

    fn standardized_noise(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Array2<f64> {
        let mut x = Array2::from_shape_fn((n, d), |_| rng.gen_range(-1.0..1.0f64));
        let n_f = n as f64;
        for j in 0..d {
            let mean = x.column(j).sum() / n_f;
            for v in x.column_mut(j).iter_mut() {
                *v -= mean;
            }
        }
        x
    }

    #[test]
    fn wilks_zero_cross_covariance() {
        // orthogonal residual blocks give r^2 = 0 and T = 0
        let n = 8;
        let mut e1 = Array2::<f64>::zeros((n, 1));
        let mut e2 = Array2::<f64>::zeros((n, 1));
        for k in 0..n {
            e1[[k, 0]] = if k % 2 == 0 { 1.0 } else { -1.0 };
            e2[[k, 0]] = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        }
        let wp = wilks_pair(&e1, &e2, n).unwrap();
        assert!(wp.r2[0].abs() < 1e-12);
        assert!(wp.t.abs() < 1e-9);
    }

    #[test]
    fn wilks_self_correlation_clamped() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let e1 = standardized_noise(&mut rng, 50, 2);
        let e2 = e1.clone();
        let wp = wilks_pair(&e1, &e2, 50).unwrap();
        assert!(wp.unstable);
        for &r in &wp.r2 {
            assert!(r > 0.99 && r < 1.0);
        }
        assert!(wp.t > 500.0);
    }

    #[test]
    fn wilks_matches_svd_oracle() {
        // r^2 must equal the squared singular values of
        // S11^{-1/2} S12 S22^{-1/2}; the oracle computes them through an
        // independent eigen route on the other Gram side.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 200;
        let e1 = standardized_noise(&mut rng, n, 2);
        let e2 = standardized_noise(&mut rng, n, 3);
        let wp = wilks_pair(&e1, &e2, n).unwrap();
        let a = wp.s11_inv_sqrt.dot(&wp.s12).dot(&wp.s22_inv_sqrt);
        let gram_other = a.t().dot(&a); // 3x3 side
        let spec = sym_eig(&gram_other).unwrap();
        for (idx, &r2) in wp.r2.iter().enumerate() {
            assert!((r2 - spec.eigenvalues[idx]).abs() < 1e-8);
        }
    }

    #[test]
    fn cov_q_matches_four_index_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 40;
        let e1 = standardized_noise(&mut rng, n, 2);
        let e2 = standardized_noise(&mut rng, n, 3);
        let wp = wilks_pair(&e1, &e2, n).unwrap();
        let cov = cov_q_hat(&e1, &e2, &wp.s11_inv_sqrt, &wp.s22_inv_sqrt).unwrap();

        let y1 = e1.dot(&wp.s11_inv_sqrt);
        let y2 = e2.dot(&wp.s22_inv_sqrt);
        let (d1, d2) = (2, 3);
        for t1 in 0..d1 {
            for t2 in 0..d2 {
                for u1 in 0..d1 {
                    for u2 in 0..d2 {
                        let mut acc = 0.0;
                        for k in 0..n {
                            acc += y1[[k, t1]] * y2[[k, t2]] * y1[[k, u1]] * y2[[k, u2]];
                        }
                        acc /= n as f64;
                        let got = cov[[t1 * d2 + t2, u1 * d2 + u2]];
                        assert!((got - acc).abs() < 1e-12, "mismatch at {t1}{t2}{u1}{u2}");
                    }
                }
            }
        }
    }

    #[test]
    fn pvalue_t_zero_is_one() {
        let w = WeightedChiSq::from_eigenvalues(vec![1.0f64, 1.0]);
        let (pw, pc) = pair_pvalue(0.0, &w, 1, 2, TailMethod::Imhof).unwrap();
        assert_eq!(pw, 1.0);
        assert_eq!(pc, 1.0);
    }

    #[test]
    fn pvalue_unit_weights_match_chisq() {
        let w = WeightedChiSq::from_eigenvalues(vec![1.0f64; 6]);
        for &t in &[1.0, 5.0, 12.0] {
            let (pw, pc) = pair_pvalue(t, &w, 2, 3, TailMethod::Imhof).unwrap();
            assert!((pw - pc).abs() < 1e-4, "{pw} vs {pc}");
        }
    }

    #[test]
    fn m2_pair_uses_marginal_blocks() {
        // m = 2: the pairwise predictor set is empty, residuals are the
        // centered blocks themselves
        let input = "AC\nCA\nAC\nCA\nAA\nCC\nAC\nCA\n";
        let a = parse_alignment(Cursor::new(input), AlignmentFormat::RawRows).unwrap();
        let enc = crate::align::one_hot_encode::<f64>(&a).unwrap();
        assert_eq!(enc.m(), 2);
        let spec = GroupPenaltySpec::default();
        let opts = TestOptions::default();
        let cache = one_vs_rest_all(&enc, &spec, &opts).unwrap();
        let (ei, ej, _, _) = pair_residuals(&cache, &enc, &spec, &opts, 0, 1).unwrap();
        // if both one-vs-rest blocks are zero the residuals are the raw blocks
        let raw_i = enc.x.slice(s![.., enc.groups[0].clone()]).to_owned();
        let raw_j = enc.x.slice(s![.., enc.groups[1].clone()]).to_owned();
        if cache.fits[0].as_ref().unwrap().active_groups.is_empty() {
            assert_eq!(ei, raw_i);
        }
        if cache.fits[1].as_ref().unwrap().active_groups.is_empty() {
            assert_eq!(ej, raw_j);
        }
    }

    #[test]
    fn sweep_counts_and_sorting() {
        let input = "ACD\nCAD\nACE\nCAE\nAAD\nCCE\nACD\nCAE\nAAE\nCCD\n";
        let a = parse_alignment(Cursor::new(input), AlignmentFormat::RawRows).unwrap();
        let enc = crate::align::one_hot_encode::<f64>(&a).unwrap();
        assert_eq!(enc.m(), 3);
        let spec = GroupPenaltySpec::default();
        let opts = TestOptions::default();
        let sweep = test_all_pairs(&enc, &spec, &opts).unwrap();
        assert_eq!(sweep.results.len() + sweep.failures.len(), 3);
        for w in sweep.results.windows(2) {
            assert!(w[0].ranking_p() <= w[1].ranking_p() + 1e-15);
        }
        for r in &sweep.results {
            assert!(r.bh_adj_p >= r.ranking_p() - 1e-12);
            assert!(r.bh_adj_p <= 1.0);
        }
    }

    #[test]
    fn sweep_deterministic_across_thread_counts() {
        let input = "ACDA\nCADC\nACEA\nCAEC\nAADA\nCCEC\nACDA\nCAEA\nAAEC\nCCDA\n";
        let a = parse_alignment(Cursor::new(input), AlignmentFormat::RawRows).unwrap();
        let enc = crate::align::one_hot_encode::<f64>(&a).unwrap();
        let spec = GroupPenaltySpec::default();
        let opts = TestOptions::default();
        let s1 = test_all_pairs(&enc, &spec, &opts).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let s2 = pool.install(|| test_all_pairs(&enc, &spec, &opts).unwrap());
        assert_eq!(s1.results.len(), s2.results.len());
        for (a, b) in s1.results.iter().zip(&s2.results) {
            assert_eq!((a.i, a.j), (b.i, b.j));
            assert_eq!(a.t, b.t);
        }
    }

    #[test]
    fn pair_symmetry_under_swap() {
        let input = "ACD\nCAD\nACE\nCAE\nAAD\nCCE\nACD\nCAE\nAAE\nCCD\nACD\nCAD\n";
        let a = parse_alignment(Cursor::new(input), AlignmentFormat::RawRows).unwrap();
        let enc = crate::align::one_hot_encode::<f64>(&a).unwrap();
        let spec = GroupPenaltySpec::default();
        let opts = TestOptions::default();
        let cache = one_vs_rest_all(&enc, &spec, &opts).unwrap();
        let r_ij = pair_statistic(&enc, &cache, &spec, &opts, 0, 1).unwrap();
        let r_ji = pair_statistic(&enc, &cache, &spec, &opts, 1, 0).unwrap();
        assert!((r_ij.t - r_ji.t).abs() < 1e-10);
        assert!((r_ij.p_chisq - r_ji.p_chisq).abs() < 1e-10);
        assert_eq!(r_ij.d_i, r_ji.d_i);
    }

    #[test]
    fn recover_graph_thresholds() {
        let mk = |i, j, t| PairResult::<f64> {
            i,
            j,
            d_i: 1,
            d_j: 1,
            r2: vec![],
            t,
            weights: None,
            p_weighted: None,
            p_chisq: 0.5,
            refit_flags: (false, false),
            unstable: false,
            bh_adj_p: 0.5,
        };
        let results = vec![mk(0, 1, 0.0), mk(0, 2, 10.0), mk(1, 2, 0.0)];
        assert!(recover_graph(&results, 1e12, 3).is_empty());
        let zeros = vec![mk(0, 1, 0.0), mk(0, 2, 0.0)];
        assert!(recover_graph(&zeros, 0.5, 3).is_empty());
        let edges = recover_graph(&results, 5.0, 3);
        assert_eq!(edges, vec![(0, 2)]);
    }

    #[test]
    fn bh_adjustment_basics() {
        let p = vec![0.01f64, 0.04, 0.03, 0.5];
        let adj = benjamini_hochberg(&p);
        assert_eq!(adj.len(), 4);
        for (&raw, &a) in p.iter().zip(&adj) {
            assert!(a >= raw - 1e-15 && a <= 1.0);
        }
        // all equal p-values stay equal
        let adj2 = benjamini_hochberg(&[0.2f64, 0.2, 0.2]);
        for &a in &adj2 {
            assert!((a - 0.2).abs() < 1e-12);
        }
    }
}
