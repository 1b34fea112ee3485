//! Amino-acid-level inference within a position pair: self-normalized
//! partial correlations, two-sided normal p-values, and grouped coupling
//! strengths.

use ndarray::Array2;

use crate::dist::normal_two_sided;
use crate::error::{Error, Result};
use crate::linalg::spectral_norm;
use crate::scalar::Scalar;

/// Normalized partial correlations and p-values for one position pair.
#[derive(Debug, Clone)]
pub struct AAPairMatrix<F> {
    pub i: usize,
    pub j: usize,
    /// `d_i x d_j` self-normalized statistics; missing entries are NaN.
    pub rho_hat: Array2<F>,
    pub pvals: Array2<F>,
    pub row_labels: Vec<char>,
    pub col_labels: Vec<char>,
    /// Entries with a degenerate (zero) denominator.
    pub missing: Vec<(usize, usize)>,
}

/// Self-normalized partial correlation statistics for a residual pair.
///
/// Entry `(t1, t2)` is `sum_k E1[k,t1] E2[k,t2] / sqrt(sum_k E1[k,t1]^2
/// E2[k,t2]^2)`, referenced to the standard normal.
pub fn normalized_partial_corr<F: Scalar>(
    e1: &Array2<F>,
    e2: &Array2<F>,
    i: usize,
    j: usize,
    row_labels: Vec<char>,
    col_labels: Vec<char>,
) -> Result<AAPairMatrix<F>> {
    let n = e1.nrows();
    if e2.nrows() != n {
        return Err(Error::Input("residual matrices disagree on N".into()));
    }
    let d1 = e1.ncols();
    let d2 = e2.ncols();
    let mut rho_hat = Array2::<F>::zeros((d1, d2));
    let mut pvals = Array2::<F>::zeros((d1, d2));
    let mut missing = Vec::new();
    for t1 in 0..d1 {
        for t2 in 0..d2 {
            let mut num = F::zero();
            let mut denom = F::zero();
            for k in 0..n {
                let a = e1[[k, t1]];
                let b = e2[[k, t2]];
                num = num + a * b;
                denom = denom + a * a * b * b;
            }
            if denom <= F::zero() {
                rho_hat[[t1, t2]] = F::nan();
                pvals[[t1, t2]] = F::nan();
                missing.push((t1, t2));
            } else {
                let z = num / denom.sqrt();
                rho_hat[[t1, t2]] = z;
                pvals[[t1, t2]] = normal_two_sided(z)?;
            }
        }
    }
    Ok(AAPairMatrix {
        i,
        j,
        rho_hat,
        pvals,
        row_labels,
        col_labels,
        missing,
    })
}

/// Partition of the 20 residues into named categories.
#[derive(Debug, Clone)]
pub struct ResidueGrouping {
    pub names: Vec<String>,
    pub members: Vec<Vec<char>>,
}

impl ResidueGrouping {
    /// The 8-category reduced alphabet of Murphy et al. (2000).
    pub fn murphy8() -> ResidueGrouping {
        let groups = ["LVIMC", "AG", "ST", "P", "FYW", "EDNQ", "KR", "H"];
        ResidueGrouping {
            names: groups.iter().map(|s| s.to_string()).collect(),
            members: groups.iter().map(|s| s.chars().collect()).collect(),
        }
    }

    /// Parses one group per line, e.g. `LVIMC`; `#` starts a comment.
    pub fn from_text(text: &str) -> Result<ResidueGrouping> {
        let mut names = Vec::new();
        let mut members = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let chars: Vec<char> = line.chars().map(|c| c.to_ascii_uppercase()).collect();
            for &c in &chars {
                if !crate::align::is_amino_acid(c) {
                    return Err(Error::Format(format!("not an amino acid letter: {c}")));
                }
                if !seen.insert(c) {
                    return Err(Error::Format(format!("residue {c} listed twice")));
                }
            }
            names.push(line.to_string());
            members.push(chars);
        }
        if names.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(ResidueGrouping { names, members })
    }

    fn group_of(&self, residue: char) -> Option<usize> {
        self.members
            .iter()
            .position(|g| g.contains(&residue))
    }
}

/// Spectral-norm coupling strength between residue categories.
#[derive(Debug, Clone)]
pub struct AAGroupStrength<F> {
    pub group_names: Vec<String>,
    /// `n_groups x n_groups` spectral norms of the category submatrices.
    pub strength: Array2<F>,
}

/// Per category pair, the largest singular value of the corresponding
/// submatrix of `rho_hat`. Empty submatrices score 0; missing entries are
/// treated as 0.
pub fn aa_group_strength<F: Scalar>(
    aa: &AAPairMatrix<F>,
    grouping: &ResidueGrouping,
) -> Result<AAGroupStrength<F>> {
    let g = grouping.members.len();
    let mut strength = Array2::<F>::zeros((g, g));
    for gr in 0..g {
        let rows: Vec<usize> = aa
            .row_labels
            .iter()
            .enumerate()
            .filter(|(_, &c)| grouping.group_of(c) == Some(gr))
            .map(|(idx, _)| idx)
            .collect();
        for gc in 0..g {
            let cols: Vec<usize> = aa
                .col_labels
                .iter()
                .enumerate()
                .filter(|(_, &c)| grouping.group_of(c) == Some(gc))
                .map(|(idx, _)| idx)
                .collect();
            if rows.is_empty() || cols.is_empty() {
                continue;
            }
            let mut sub = Array2::<F>::zeros((rows.len(), cols.len()));
            for (ri, &r) in rows.iter().enumerate() {
                for (ci, &c) in cols.iter().enumerate() {
                    let v = aa.rho_hat[[r, c]];
                    sub[[ri, ci]] = if v.is_finite() { v } else { F::zero() };
                }
            }
            strength[[gr, gc]] = spectral_norm(&sub)?;
        }
    }
    Ok(AAGroupStrength {
        group_names: grouping.names.clone(),
        strength,
    })
}

/// One ranked amino-acid combination.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedAAPair<F> {
    pub res_i: char,
    pub res_j: char,
    pub z: F,
    pub p: F,
}

/// Entries with `p < p_cutoff`, sorted by `|z|` descending, truncated to `k`.
pub fn top_aa_pairs<F: Scalar>(
    aa: &AAPairMatrix<F>,
    p_cutoff: F,
    k: usize,
) -> Result<Vec<RankedAAPair<F>>> {
    if p_cutoff <= F::zero() || p_cutoff > F::one() {
        return Err(Error::Parameter("p cutoff must be in (0, 1]".into()));
    }
    let mut out = Vec::new();
    for t1 in 0..aa.rho_hat.nrows() {
        for t2 in 0..aa.rho_hat.ncols() {
            let z = aa.rho_hat[[t1, t2]];
            let p = aa.pvals[[t1, t2]];
            if z.is_finite() && p < p_cutoff {
                out.push(RankedAAPair {
                    res_i: aa.row_labels[t1],
                    res_j: aa.col_labels[t2],
                    z,
                    p,
                });
            }
        }
    }
    out.sort_by(|a, b| {
        b.z.abs()
            .partial_cmp(&a.z.abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then((a.res_i, a.res_j).cmp(&(b.res_i, b.res_j)))
    });
    out.truncate(k);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Array2<f64> {
        Array2::from_shape_fn((n, d), |_| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn identical_columns_give_large_statistic() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let e1 = noise(&mut rng, 500, 1);
        let e2 = e1.clone();
        let aa = normalized_partial_corr(&e1, &e2, 0, 1, vec!['A'], vec!['A']).unwrap();
        // perfect dependence: z = sum e^2 / sqrt(sum e^4), grows like sqrt(N)
        assert!(aa.rho_hat[[0, 0]] > 10.0);
        assert!(aa.pvals[[0, 0]] < 1e-10);
    }

    #[test]
    fn orthogonal_columns_give_zero() {
        let n = 8;
        let mut e1 = Array2::<f64>::zeros((n, 1));
        let mut e2 = Array2::<f64>::zeros((n, 1));
        for k in 0..n {
            e1[[k, 0]] = if k % 2 == 0 { 1.0 } else { -1.0 };
            e2[[k, 0]] = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        }
        let aa = normalized_partial_corr(&e1, &e2, 0, 1, vec!['A'], vec!['C']).unwrap();
        assert!(aa.rho_hat[[0, 0]].abs() < 1e-12);
        assert!((aa.pvals[[0, 0]] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_denominator_flagged_missing() {
        let e1 = Array2::<f64>::zeros((5, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let e2 = noise(&mut rng, 5, 1);
        let aa = normalized_partial_corr(&e1, &e2, 0, 1, vec!['A'], vec!['C']).unwrap();
        assert_eq!(aa.missing, vec![(0, 0)]);
        assert!(aa.rho_hat[[0, 0]].is_nan());
    }

    #[test]
    fn sign_symmetry_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let e1 = noise(&mut rng, 100, 2);
        let e2 = noise(&mut rng, 100, 3);
        let aa = normalized_partial_corr(&e1, &e2, 0, 1, vec!['A', 'C'], vec!['D', 'E', 'F'])
            .unwrap();
        let mut e1_neg = e1.clone();
        for v in e1_neg.column_mut(0).iter_mut() {
            *v = -*v;
        }
        let aa2 =
            normalized_partial_corr(&e1_neg, &e2, 0, 1, vec!['A', 'C'], vec!['D', 'E', 'F'])
                .unwrap();
        for t2 in 0..3 {
            assert_eq!(aa2.rho_hat[[0, t2]], -aa.rho_hat[[0, t2]]);
            assert_eq!(aa2.rho_hat[[1, t2]], aa.rho_hat[[1, t2]]);
        }
    }

    #[test]
    fn group_strength_hand_cases() {
        let aa = AAPairMatrix::<f64> {
            i: 0,
            j: 1,
            rho_hat: array![[3.0, 0.0], [0.0, 4.0]],
            pvals: array![[0.0, 1.0], [1.0, 0.0]],
            row_labels: vec!['L', 'V'],
            col_labels: vec!['L', 'V'],
            missing: vec![],
        };
        let grouping = ResidueGrouping::murphy8();
        let s = aa_group_strength(&aa, &grouping).unwrap();
        // both rows/cols are in the LVIMC category: strength = largest
        // singular value of [[3,0],[0,4]] = 4
        assert!((s.strength[[0, 0]] - 4.0).abs() < 1e-10);
        // empty category pairs score 0
        assert_eq!(s.strength[[1, 1]], 0.0);

        let single = AAPairMatrix::<f64> {
            rho_hat: array![[-2.5]],
            pvals: array![[0.01]],
            row_labels: vec!['A'],
            col_labels: vec!['K'],
            ..aa
        };
        let s = aa_group_strength(&single, &grouping).unwrap();
        assert!((s.strength[[1, 6]] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn submatrix_norm_bounded_by_full() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let m = noise(&mut rng, 6, 6);
        let full = spectral_norm(&m).unwrap();
        let sub = m.slice(ndarray::s![..3, ..4]).to_owned();
        assert!(spectral_norm(&sub).unwrap() <= full + 1e-12);
    }

    #[test]
    fn top_pairs_ranking() {
        let aa = AAPairMatrix::<f64> {
            i: 0,
            j: 1,
            rho_hat: array![[0.5, -3.0], [2.0, 0.1]],
            pvals: array![[0.6, 0.002], [0.04, 0.9]],
            row_labels: vec!['A', 'C'],
            col_labels: vec!['D', 'E'],
            missing: vec![],
        };
        let all = top_aa_pairs(&aa, 1.0, usize::MAX).unwrap();
        assert_eq!(all.len(), 4);
        assert_eq!((all[0].res_i, all[0].res_j), ('A', 'E'));
        assert!(top_aa_pairs(&aa, 1.0, 0).unwrap().is_empty());
        let cut = top_aa_pairs(&aa, 0.05, usize::MAX).unwrap();
        assert_eq!(cut.len(), 2);
    }

    #[test]
    fn murphy8_covers_all_residues_once() {
        let g = ResidueGrouping::murphy8();
        let mut all: Vec<char> = g.members.iter().flatten().copied().collect();
        all.sort();
        assert_eq!(all, crate::align::AMINO_ACIDS.to_vec());
    }

    #[test]
    fn grouping_from_text_roundtrip() {
        let g = ResidueGrouping::from_text("LVIMC\nAG\nST\nP\nFYW\nEDNQ\nKR\nH\n").unwrap();
        assert_eq!(g.members, ResidueGrouping::murphy8().members);
        assert!(ResidueGrouping::from_text("LL\n").is_err());
        assert!(ResidueGrouping::from_text("LZ\n").is_err());
    }
}
