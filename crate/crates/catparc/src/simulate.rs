//! Synthetic alignment generators: group-wise row permutation of a real
//! alignment, latent-Gaussian thresholding, and multinomial sampling. In all
//! three, positions form `u` consecutive groups of `h`; within-group pairs
//! are dependent by construction (the positives), cross-group pairs are
//! independent (the negatives).

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::align::Alignment;
use crate::dist::gamma_q;
use crate::error::{Error, Result};
use crate::linalg::sqrt_sym;

/// Pair truth labels for a `u` by `h` group layout: `true` for within-group
/// pairs, `false` for cross-group.
pub fn truth_labels(u: usize, h: usize) -> Vec<((usize, usize), bool)> {
    let m = u * h;
    let mut out = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in (i + 1)..m {
            out.push(((i, j), i / h == j / h));
        }
    }
    out
}

/// Destroys cross-group dependence in a real alignment by shuffling the rows
/// of each position group with an independent permutation. Positions beyond
/// `u * h` are dropped. Per-position marginals and within-group joint
/// distributions are preserved exactly.
pub fn permute_groups(a: &Alignment, u: usize, h: usize, seed: u64) -> Result<Alignment> {
    let m = u * h;
    if u == 0 || h == 0 {
        return Err(Error::Parameter("u and h must be positive".into()));
    }
    if a.m() < m {
        return Err(Error::Input(format!(
            "alignment has {} positions, need at least {m}",
            a.m()
        )));
    }
    if a.n() < 2 {
        return Err(Error::Input("need at least 2 sequences".into()));
    }
    let n = a.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<char>> = vec![vec![' '; m]; n];
    for g in 0..u {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        for k in 0..n {
            for pos in (g * h)..((g + 1) * h) {
                rows[k][pos] = a.symbol(perm[k], pos);
            }
        }
    }
    let ids = (0..n).map(|k| format!("perm{k}")).collect();
    let seqs = rows.into_iter().map(|r| r.into_iter().collect()).collect();
    Alignment::new(ids, seqs)
}

fn normal_cdf(x: f64) -> f64 {
    let half_q = gamma_q(0.5, x * x / 2.0) / 2.0;
    if x >= 0.0 {
        1.0 - half_q
    } else {
        half_q
    }
}

fn normal_quantile(q: f64) -> f64 {
    let (mut lo, mut hi) = (-12.0, 12.0);
    for _ in 0..200 {
        let mid = (lo + hi) / 2.0;
        if normal_cdf(mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / 2.0
}

/// Latent-Gaussian design: exchangeable within-group correlation `r`,
/// independent groups, each coordinate cut into categories at the standard
/// normal quantiles of `cutpoints`.
#[derive(Debug, Clone)]
pub struct LatentGaussianDesign {
    pub u: usize,
    pub h: usize,
    pub n: usize,
    pub r: f64,
    /// Strictly increasing probabilities in (0, 1); `k` cut points give
    /// `k + 1` categories.
    pub cutpoints: Vec<f64>,
    /// Category symbols, one more than `cutpoints`.
    pub categories: Vec<char>,
    pub seed: u64,
}

pub fn latent_gaussian_generator(design: &LatentGaussianDesign) -> Result<Alignment> {
    let LatentGaussianDesign {
        u,
        h,
        n,
        r,
        ref cutpoints,
        ref categories,
        seed,
    } = *design;
    if u == 0 || h == 0 || n == 0 {
        return Err(Error::Parameter("u, h, n must be positive".into()));
    }
    if categories.len() != cutpoints.len() + 1 {
        return Err(Error::Parameter(
            "need one more category than cut points".into(),
        ));
    }
    if cutpoints.is_empty() {
        return Err(Error::Parameter("need at least one cut point".into()));
    }
    if cutpoints
        .windows(2)
        .any(|w| w[0] >= w[1])
        || cutpoints[0] <= 0.0
        || *cutpoints.last().unwrap() >= 1.0
    {
        return Err(Error::Parameter(
            "cut points must be strictly increasing in (0, 1)".into(),
        ));
    }
    // exchangeable h x h block: 1 on the diagonal, r off it
    let mut block = Array2::<f64>::from_elem((h, h), r);
    for t in 0..h {
        block[[t, t]] = 1.0;
    }
    let min_eig = if h > 1 { 1.0 - r } else { 1.0 }.min(1.0 + (h as f64 - 1.0) * r);
    if min_eig < 0.0 {
        return Err(Error::Parameter(format!(
            "block covariance not positive semidefinite (r = {r}, h = {h})"
        )));
    }
    let root = sqrt_sym(&block)?;
    let thresholds: Vec<f64> = cutpoints.iter().map(|&q| normal_quantile(q)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = u * h;
    let mut seqs = Vec::with_capacity(n);
    let mut z = vec![0.0f64; h];
    for _ in 0..n {
        let mut row = String::with_capacity(m);
        for _ in 0..u {
            for zt in z.iter_mut() {
                *zt = rng.sample(StandardNormal);
            }
            for t in 0..h {
                let mut x = 0.0;
                for s in 0..h {
                    x += root[[t, s]] * z[s];
                }
                let cat = thresholds.iter().filter(|&&c| x > c).count();
                row.push(categories[cat]);
            }
        }
        seqs.push(row);
    }
    let ids = (0..n).map(|k| format!("sim{k}")).collect();
    Alignment::new(ids, seqs)
}

/// Joint category table for one group of `h` positions.
#[derive(Debug, Clone)]
pub struct MultinomialTable {
    /// Each outcome is a length-`h` tuple of category symbols.
    pub outcomes: Vec<Vec<char>>,
    /// Nonnegative, summing to 1 (normalized on use).
    pub probs: Vec<f64>,
}

/// Multinomial design: each group's `h` positions are drawn jointly from its
/// table; groups are independent.
#[derive(Debug, Clone)]
pub struct MultinomialDesign {
    pub n: usize,
    /// One table per group; `u` is the table count.
    pub tables: Vec<MultinomialTable>,
    pub seed: u64,
}

pub fn multinomial_generator(design: &MultinomialDesign) -> Result<Alignment> {
    if design.n == 0 || design.tables.is_empty() {
        return Err(Error::Parameter("need n > 0 and at least one table".into()));
    }
    let h = design.tables[0].outcomes.first().map(|o| o.len()).unwrap_or(0);
    if h == 0 {
        return Err(Error::Parameter("empty outcome tuples".into()));
    }
    for table in &design.tables {
        if table.outcomes.len() != table.probs.len() || table.outcomes.is_empty() {
            return Err(Error::Parameter("table outcomes/probs mismatch".into()));
        }
        if table.outcomes.iter().any(|o| o.len() != h) {
            return Err(Error::Parameter("outcome tuples must share a length".into()));
        }
        if table.probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::Parameter("probabilities must be nonnegative".into()));
        }
        if table.probs.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Parameter("probabilities sum to zero".into()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(design.seed);
    let mut seqs = Vec::with_capacity(design.n);
    for _ in 0..design.n {
        let mut row = String::new();
        for table in &design.tables {
            let total: f64 = table.probs.iter().sum();
            let mut draw = rng.gen_range(0.0..total);
            let mut idx = table.probs.len() - 1;
            for (t, &p) in table.probs.iter().enumerate() {
                if draw < p {
                    idx = t;
                    break;
                }
                draw -= p;
            }
            row.extend(&table.outcomes[idx]);
        }
        seqs.push(row);
    }
    let ids = (0..design.n).map(|k| format!("sim{k}")).collect();
    Alignment::new(ids, seqs)
}
