//! Ranking evaluation: ROC curves, AUC, Type-I error and power at a nominal
//! level, and median aggregation across replicates.

use crate::error::{Error, Result};

/// Whether large scores or small scores indicate a positive call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreDirection {
    HigherPositive,
    LowerPositive,
}

#[derive(Debug, Clone)]
pub struct RocCurve {
    /// Score thresholds, one per sweep point (most stringent first).
    pub thresholds: Vec<f64>,
    pub fpr: Vec<f64>,
    pub tpr: Vec<f64>,
    pub auc: f64,
}

fn trapezoid(fpr: &[f64], tpr: &[f64]) -> f64 {
    let mut auc = 0.0;
    for w in fpr.windows(2).zip(tpr.windows(2)) {
        let (f, t) = w;
        auc += (f[1] - f[0]) * (t[1] + t[0]) / 2.0;
    }
    auc
}

/// Threshold sweep over the unique scores; ties are grouped so the curve is a
/// function of the threshold. Scores must be finite.
pub fn roc_curve(scored: &[(f64, bool)], direction: ScoreDirection) -> Result<RocCurve> {
    let n_pos = scored.iter().filter(|(_, t)| *t).count();
    let n_neg = scored.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Input(
            "AUC undefined: need both positive and negative pairs".into(),
        ));
    }
    if scored.iter().any(|(s, _)| !s.is_finite()) {
        return Err(Error::Input("non-finite score".into()));
    }
    let mut sorted: Vec<(f64, bool)> = scored.to_vec();
    sorted.sort_by(|a, b| match direction {
        ScoreDirection::HigherPositive => b.0.partial_cmp(&a.0).unwrap(),
        ScoreDirection::LowerPositive => a.0.partial_cmp(&b.0).unwrap(),
    });

    let mut thresholds = vec![match direction {
        ScoreDirection::HigherPositive => f64::INFINITY,
        ScoreDirection::LowerPositive => f64::NEG_INFINITY,
    }];
    let mut fpr = vec![0.0];
    let mut tpr = vec![0.0];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut idx = 0;
    while idx < sorted.len() {
        let score = sorted[idx].0;
        while idx < sorted.len() && sorted[idx].0 == score {
            if sorted[idx].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            idx += 1;
        }
        thresholds.push(score);
        fpr.push(fp as f64 / n_neg as f64);
        tpr.push(tp as f64 / n_pos as f64);
    }
    let auc = trapezoid(&fpr, &tpr);
    Ok(RocCurve {
        thresholds,
        fpr,
        tpr,
        auc,
    })
}

/// Fraction of null pairs rejected (Type-I error) and of alternative pairs
/// rejected (power) at level `alpha`, from `(p-value, is_alternative)` pairs.
pub fn rate_at_level(pvals: &[(f64, bool)], alpha: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Parameter("alpha must be in [0, 1]".into()));
    }
    let nulls: Vec<f64> = pvals.iter().filter(|(_, t)| !t).map(|(p, _)| *p).collect();
    let alts: Vec<f64> = pvals.iter().filter(|(_, t)| *t).map(|(p, _)| *p).collect();
    if nulls.is_empty() || alts.is_empty() {
        return Err(Error::Input("need both null and alternative pairs".into()));
    }
    let type1 = nulls.iter().filter(|&&p| p < alpha).count() as f64 / nulls.len() as f64;
    let power = alts.iter().filter(|&&p| p < alpha).count() as f64 / alts.len() as f64;
    Ok((type1, power))
}

/// Median with averaging of the middle two for even counts.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    Ok(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

/// Step-function TPR of a curve at a given FPR: the best TPR achieved at or
/// below that false positive rate.
fn tpr_at_fpr(curve: &RocCurve, fpr: f64) -> f64 {
    let mut best = 0.0f64;
    for (f, t) in curve.fpr.iter().zip(&curve.tpr) {
        if *f <= fpr + 1e-12 {
            best = best.max(*t);
        }
    }
    best
}

/// Median ROC across replicates: curves are read as step functions, TPR
/// medians are taken at the union of all replicate FPR breakpoints, and the
/// AUC is the left-step integral over the merged grid.
pub fn median_roc(curves: &[RocCurve]) -> Result<RocCurve> {
    if curves.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut grid: Vec<f64> = curves.iter().flat_map(|c| c.fpr.iter().copied()).collect();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    let mut tpr = Vec::with_capacity(grid.len());
    for &f in &grid {
        let at: Vec<f64> = curves.iter().map(|c| tpr_at_fpr(c, f)).collect();
        tpr.push(median(&at)?);
    }
    let mut auc = 0.0;
    for k in 0..grid.len().saturating_sub(1) {
        auc += (grid[k + 1] - grid[k]) * tpr[k];
    }
    Ok(RocCurve {
        thresholds: vec![f64::NAN; grid.len()],
        fpr: grid,
        tpr,
        auc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn perfect_separation_auc_one() {
        let scored = vec![(5.0, true), (4.0, true), (2.0, false), (1.0, false)];
        let roc = roc_curve(&scored, ScoreDirection::HigherPositive).unwrap();
        assert_eq!(roc.auc, 1.0);
        assert!(roc.fpr.windows(2).all(|w| w[0] <= w[1]));
        assert!(roc.tpr.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn reversed_separation_auc_zero() {
        let scored = vec![(5.0, false), (1.0, true)];
        let roc = roc_curve(&scored, ScoreDirection::HigherPositive).unwrap();
        assert_eq!(roc.auc, 0.0);
        let roc = roc_curve(&scored, ScoreDirection::LowerPositive).unwrap();
        assert_eq!(roc.auc, 1.0);
    }

    #[test]
    fn random_scores_auc_near_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let scored: Vec<(f64, bool)> = (0..500)
            .map(|_| (rng.gen::<f64>(), rng.gen::<bool>()))
            .collect();
        let roc = roc_curve(&scored, ScoreDirection::HigherPositive).unwrap();
        assert!((roc.auc - 0.5).abs() < 0.05, "auc = {}", roc.auc);
    }

    #[test]
    fn auc_invariant_under_monotone_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let scored: Vec<(f64, bool)> = (0..200)
            .map(|_| (rng.gen_range(0.1..5.0), rng.gen::<bool>()))
            .collect();
        let transformed: Vec<(f64, bool)> =
            scored.iter().map(|&(s, t)| ((s * 3.0).ln(), t)).collect();
        let a = roc_curve(&scored, ScoreDirection::HigherPositive).unwrap();
        let b = roc_curve(&transformed, ScoreDirection::HigherPositive).unwrap();
        assert!((a.auc - b.auc).abs() < 1e-12);
    }

    #[test]
    fn single_class_rejected() {
        let scored = vec![(1.0, true), (2.0, true)];
        assert!(roc_curve(&scored, ScoreDirection::HigherPositive).is_err());
        assert!(rate_at_level(&[(0.01, true)], 0.05).is_err());
    }

    #[test]
    fn rate_at_level_uniform_nulls() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let mut pvals: Vec<(f64, bool)> =
            (0..10000).map(|_| (rng.gen::<f64>(), false)).collect();
        pvals.push((0.001, true));
        let (type1, power) = rate_at_level(&pvals, 0.05).unwrap();
        assert!((type1 - 0.05).abs() < 0.01, "type1 = {type1}");
        assert_eq!(power, 1.0);
    }

    #[test]
    fn median_basics() {
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]).unwrap(), 2.5);
        assert!(median(&[]).is_err());
    }

    #[test]
    fn median_roc_of_identical_curves_is_identity() {
        let scored = vec![
            (5.0, true),
            (4.0, false),
            (3.0, true),
            (2.0, false),
            (1.0, true),
        ];
        let roc = roc_curve(&scored, ScoreDirection::HigherPositive).unwrap();
        let agg = median_roc(&vec![roc.clone(); 50]).unwrap();
        // the aggregate is the step-envelope form of the same curve
        assert_eq!(agg.fpr, vec![0.0, 0.5, 1.0]);
        for (f, t) in agg.fpr.iter().zip(&agg.tpr) {
            assert_eq!(*t, tpr_at_fpr(&roc, *f));
        }
        assert!((agg.auc - roc.auc).abs() < 1e-12);
    }
}
