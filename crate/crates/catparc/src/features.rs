//! Coupling-derived features for mutant sequences: per-pair empirical partial
//! covariances, sequence compatibility scores C(a) and M(a), deltas against a
//! wild type, and a Spearman evaluation utility.

use std::collections::HashMap;

use ndarray::Array2;
use rayon::prelude::*;

use crate::align::EncodedMatrix;
use crate::baselines::PrecisionEstimate;
use crate::error::{Error, Result};
use crate::group_lasso::GroupPenaltySpec;
use crate::pairwise::{pair_residuals, ResidualCache, TestOptions};
use crate::scalar::Scalar;

/// Empirical partial covariance matrices for position pairs.
#[derive(Debug, Clone)]
pub struct PartialCovMap<F> {
    /// Retained position count.
    pub m: usize,
    /// Residue labels per position, matching the matrix axes.
    pub labels: Vec<Vec<char>>,
    /// `C_ij` for `i < j`; absent pairs contribute 0 to all sums.
    pub pairs: HashMap<(usize, usize), Array2<F>>,
    /// Pairs whose residual computation failed.
    pub missing: Vec<(usize, usize)>,
}

impl<F: Scalar> PartialCovMap<F> {
    /// Coupling block for `(i, j)` in either order, transposing as needed.
    pub fn block(&self, i: usize, j: usize) -> Option<Array2<F>> {
        if i < j {
            self.pairs.get(&(i, j)).cloned()
        } else {
            self.pairs.get(&(j, i)).map(|c| c.t().to_owned())
        }
    }

    /// `M_i(c) = sum_{j != i} sum_b C_ij(c, b)` for every position and
    /// retained residue.
    pub fn m_table(&self) -> Vec<Vec<F>> {
        let mut table: Vec<Vec<F>> = self
            .labels
            .iter()
            .map(|l| vec![F::zero(); l.len()])
            .collect();
        for (&(i, j), c) in &self.pairs {
            for t1 in 0..c.nrows() {
                for t2 in 0..c.ncols() {
                    table[i][t1] = table[i][t1] + c[[t1, t2]];
                    table[j][t2] = table[j][t2] + c[[t1, t2]];
                }
            }
        }
        table
    }
}

/// Builds `C_ij = (1/N) E_i^T E_j` from pairwise residuals. `pairs` restricts
/// the map (default all `i < j`); failed pairs are recorded as missing.
pub fn partial_cov_map<F: Scalar>(
    cache: &ResidualCache<F>,
    enc: &EncodedMatrix<F>,
    spec: &GroupPenaltySpec<F>,
    opts: &TestOptions<F>,
    pairs: Option<&[(usize, usize)]>,
) -> Result<PartialCovMap<F>> {
    let m = enc.m();
    let wanted: Vec<(usize, usize)> = match pairs {
        Some(p) => {
            for &(i, j) in p {
                if i >= j || j >= m {
                    return Err(Error::Input(format!("bad pair ({i}, {j})")));
                }
            }
            p.to_vec()
        }
        None => (0..m)
            .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
            .collect(),
    };
    let nf = F::from_usize_lossy(enc.n());
    let computed: Vec<((usize, usize), Option<Array2<F>>)> = wanted
        .par_iter()
        .map(|&(i, j)| {
            let c = pair_residuals(cache, enc, spec, opts, i, j)
                .ok()
                .map(|(ei, ej, _, _)| ei.t().dot(&ej) / nf);
            ((i, j), c)
        })
        .collect();
    let mut map = HashMap::new();
    let mut missing = Vec::new();
    for (key, c) in computed {
        match c {
            Some(c) => {
                map.insert(key, c);
            }
            None => missing.push(key),
        }
    }
    missing.sort();
    Ok(PartialCovMap {
        m,
        labels: (0..m).map(|i| enc.residues(i)).collect(),
        pairs: map,
        missing,
    })
}

/// PSICOV-style variant: couplings taken from the precision matrix blocks
/// instead of residual covariances.
pub fn precision_cov_map<F: Scalar>(
    est: &PrecisionEstimate<F>,
    enc: &EncodedMatrix<F>,
) -> Result<PartialCovMap<F>> {
    let m = enc.m();
    if est.omega.nrows() != enc.d_total() {
        return Err(Error::Input(
            "precision dimension does not match encoding".into(),
        ));
    }
    let mut pairs = HashMap::new();
    for i in 0..m {
        for j in (i + 1)..m {
            let gi = enc.groups[i].clone();
            let gj = enc.groups[j].clone();
            let mut c = Array2::<F>::zeros((gi.len(), gj.len()));
            for (a, t1) in gi.clone().enumerate() {
                for (b, t2) in gj.clone().enumerate() {
                    c[[a, b]] = est.omega[[t1, t2]];
                }
            }
            pairs.insert((i, j), c);
        }
    }
    Ok(PartialCovMap {
        m,
        labels: (0..m).map(|i| enc.residues(i)).collect(),
        pairs,
        missing: Vec::new(),
    })
}

/// Sequence scores against a coupling map.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceScores<F> {
    /// `C(a) = sum_{i<j} C_ij(a_i, a_j)`.
    pub c: F,
    /// `M(a) = sum_i M_i(a_i)`.
    pub m: F,
    /// Positions whose residue is absent from the encoding (scored 0).
    pub unseen_count: usize,
}

fn residue_index<F>(map: &PartialCovMap<F>, pos: usize, res: char) -> Option<usize> {
    map.labels[pos].iter().position(|&c| c == res)
}

pub fn sequence_scores<F: Scalar>(seq: &str, map: &PartialCovMap<F>) -> Result<SequenceScores<F>> {
    sequence_scores_with_table(seq, map, &map.m_table())
}

/// Same as [`sequence_scores`] with a precomputed `M_i` table, for scoring
/// many sequences against one map.
pub fn sequence_scores_with_table<F: Scalar>(
    seq: &str,
    map: &PartialCovMap<F>,
    m_table: &[Vec<F>],
) -> Result<SequenceScores<F>> {
    let chars: Vec<char> = seq.chars().map(|c| c.to_ascii_uppercase()).collect();
    if chars.len() != map.m {
        return Err(Error::Input(format!(
            "sequence length {} does not match {} retained positions",
            chars.len(),
            map.m
        )));
    }
    let idx: Vec<Option<usize>> = chars
        .iter()
        .enumerate()
        .map(|(pos, &c)| residue_index(map, pos, c))
        .collect();
    let unseen_count = idx.iter().filter(|t| t.is_none()).count();
    let mut c_score = F::zero();
    for (&(i, j), c) in &map.pairs {
        if let (Some(a), Some(b)) = (idx[i], idx[j]) {
            c_score = c_score + c[[a, b]];
        }
    }
    let mut m_score = F::zero();
    for (pos, t) in idx.iter().enumerate() {
        if let Some(t) = t {
            m_score = m_score + m_table[pos][*t];
        }
    }
    Ok(SequenceScores {
        c: c_score,
        m: m_score,
        unseen_count,
    })
}

/// Per-mutant coupling features relative to a wild type.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow<F> {
    pub id: String,
    pub delta_c: F,
    pub delta_m: F,
    pub n_mutations: usize,
    pub unseen_count: usize,
}

pub fn delta_features<F: Scalar>(
    mutants: &[(String, String)],
    wildtype: &str,
    map: &PartialCovMap<F>,
) -> Result<Vec<FeatureRow<F>>> {
    let m_table = map.m_table();
    let wt = sequence_scores_with_table(wildtype, map, &m_table)?;
    let wt_chars: Vec<char> = wildtype.chars().map(|c| c.to_ascii_uppercase()).collect();
    let mut rows = Vec::with_capacity(mutants.len());
    for (id, seq) in mutants {
        let s = sequence_scores_with_table(seq, map, &m_table)?;
        let n_mutations = seq
            .chars()
            .map(|c| c.to_ascii_uppercase())
            .zip(&wt_chars)
            .filter(|(a, b)| a != *b)
            .count();
        rows.push(FeatureRow {
            id: id.clone(),
            delta_c: s.c - wt.c,
            delta_m: s.m - wt.m,
            n_mutations,
            unseen_count: s.unseen_count,
        });
    }
    Ok(rows)
}

fn average_ranks(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut k = 0;
    while k < n {
        let mut end = k + 1;
        while end < n && x[order[end]] == x[order[k]] {
            end += 1;
        }
        let avg = (k + end - 1) as f64 / 2.0 + 1.0;
        for &t in &order[k..end] {
            ranks[t] = avg;
        }
        k = end;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Input("length mismatch".into()));
    }
    if x.len() < 2 {
        return Err(Error::Input("need at least two observations".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Input("non-finite value".into()));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for k in 0..x.len() {
        let dx = rx[k] - mx;
        let dy = ry[k] - my;
        num += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if vx <= 0.0 || vy <= 0.0 {
        return Err(Error::DegenerateData("constant ranks".into()));
    }
    Ok(num / (vx * vy).sqrt())
}
