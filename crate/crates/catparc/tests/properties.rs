//! Randomized invariant checks for the statistical building blocks.

use proptest::prelude::*;

use catparc::align::{one_hot_encode, Alignment};
use catparc::baselines::mutual_information;
use catparc::bench::{roc_curve, ScoreDirection};
use catparc::dist::{weighted_chisq_tail, WeightedChiSq};
use catparc::features::spearman;
use catparc::group_lasso::{lambda_schedule, GroupPenaltySpec};
use catparc::pairwise::benjamini_hochberg;
use catparc::simulate::permute_groups;

fn alignment_strategy(max_n: usize, max_m: usize) -> impl Strategy<Value = Alignment> {
    let symbols = prop::sample::select(vec!['A', 'C', 'D', 'E', '-']);
    (3..=max_n, 1..=max_m)
        .prop_flat_map(move |(n, m)| {
            prop::collection::vec(prop::collection::vec(symbols.clone(), m), n)
        })
        .prop_map(|rows| {
            let ids = (0..rows.len()).map(|i| format!("s{i}")).collect();
            let seqs = rows.into_iter().map(|r| r.into_iter().collect()).collect();
            Alignment::new(ids, seqs).unwrap()
        })
}

fn histogram(a: &Alignment, col: usize) -> std::collections::HashMap<char, usize> {
    let mut h = std::collections::HashMap::new();
    for s in &a.sequences {
        *h.entry(s.chars().nth(col).unwrap()).or_insert(0) += 1;
    }
    h
}

proptest! {
    #[test]
    fn bh_adjusted_bounds_and_order(p in prop::collection::vec(0.0f64..=1.0, 1..40)) {
        let adj = benjamini_hochberg(&p);
        prop_assert_eq!(adj.len(), p.len());
        for (a, &raw) in adj.iter().zip(&p) {
            prop_assert!(*a >= raw - 1e-12);
            prop_assert!(*a <= 1.0 + 1e-12);
        }
        // adjustment preserves the ordering of the raw p-values
        let mut idx: Vec<usize> = (0..p.len()).collect();
        idx.sort_by(|&a, &b| p[a].partial_cmp(&p[b]).unwrap());
        for w in idx.windows(2) {
            prop_assert!(adj[w[0]] <= adj[w[1]] + 1e-12);
        }
    }

    #[test]
    fn lambda_schedule_scales_linearly_in_c(
        sizes in prop::collection::vec(1usize..6, 1..8),
        d_resp in 1usize..6,
        n in 10usize..5000,
        c in 0.01f64..2.0,
    ) {
        let base = GroupPenaltySpec { a: 2.0, c: 1.0 };
        let scaled = GroupPenaltySpec { a: 2.0, c };
        let l1 = lambda_schedule(&sizes, d_resp, n, &base);
        let l2 = lambda_schedule(&sizes, d_resp, n, &scaled);
        for (a, b) in l1.iter().zip(&l2) {
            prop_assert!((b - c * a).abs() < 1e-12 * (1.0 + a.abs()));
            prop_assert!(*b > 0.0);
        }
    }

    #[test]
    fn lambda_schedule_monotone_in_group_size(
        d_resp in 1usize..6,
        n in 10usize..5000,
    ) {
        let spec = GroupPenaltySpec::<f64>::default();
        let l = lambda_schedule(&[1, 2, 3, 4, 5], d_resp, n, &spec);
        for w in l.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn mutual_information_nonnegative(a in alignment_strategy(12, 4)) {
        let m = a.m();
        for i in 0..m {
            for j in (i + 1)..m {
                if let Ok(est) = mutual_information(&a, i, j, 0.5) {
                    prop_assert!(est.value >= -1e-12, "MI {} at ({i},{j})", est.value);
                }
            }
        }
    }

    #[test]
    fn auc_invariant_under_monotone_transform(
        scores in prop::collection::vec((0.0f64..100.0, any::<bool>()), 4..50),
    ) {
        let n_pos = scores.iter().filter(|(_, t)| *t).count();
        prop_assume!(n_pos > 0 && n_pos < scores.len());
        let base = roc_curve(&scores, ScoreDirection::HigherPositive).unwrap();
        let mapped: Vec<(f64, bool)> = scores
            .iter()
            .map(|&(s, t)| ((s + 1.0).ln() * 3.0 + 2.0, t))
            .collect();
        let after = roc_curve(&mapped, ScoreDirection::HigherPositive).unwrap();
        prop_assert!((base.auc - after.auc).abs() < 1e-12);
    }

    #[test]
    fn permute_preserves_column_histograms(
        a in alignment_strategy(20, 8),
        u in 1usize..4,
        h in 1usize..3,
        seed in any::<u64>(),
    ) {
        prop_assume!(u * h <= a.m());
        let p = permute_groups(&a, u, h, seed).unwrap();
        prop_assert_eq!(p.m(), u * h);
        prop_assert_eq!(p.n(), a.n());
        for col in 0..p.m() {
            prop_assert_eq!(histogram(&p, col), histogram(&a, col));
        }
    }

    #[test]
    fn spearman_invariant_under_increasing_transform(
        xy in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 3..30),
    ) {
        let x: Vec<f64> = xy.iter().map(|p| p.0).collect();
        let y: Vec<f64> = xy.iter().map(|p| p.1).collect();
        let base = spearman(&x, &y).unwrap();
        let xt: Vec<f64> = x.iter().map(|v| (v / 25.0).exp()).collect();
        let after = spearman(&xt, &y).unwrap();
        prop_assert!((base - after).abs() < 1e-9);
    }

    #[test]
    fn weighted_tail_is_a_tail_probability(
        weights in prop::collection::vec(0.05f64..4.0, 1..6),
        x in 0.0f64..60.0,
    ) {
        let w = WeightedChiSq::from_eigenvalues(weights);
        let p1 = weighted_chisq_tail(&w, x).unwrap();
        let p2 = weighted_chisq_tail(&w, x + 1.0).unwrap();
        prop_assert!((0.0..=1.0).contains(&p1), "p={p1}");
        prop_assert!(p2 <= p1 + 1e-6, "tail not decreasing: {p1} -> {p2}");
    }

    #[test]
    fn one_hot_groups_partition_columns(a in alignment_strategy(20, 6)) {
        match one_hot_encode::<f64>(&a) {
            Ok(enc) => {
                let mut at = 0;
                for g in &enc.groups {
                    prop_assert_eq!(g.start, at);
                    at = g.end;
                }
                prop_assert_eq!(at, enc.d_total());
                // standardized columns are centered with unit scale
                let n = enc.n() as f64;
                for c in 0..enc.d_total() {
                    let mean = enc.x.column(c).sum() / n;
                    let var = enc.x.column(c).iter().map(|v| v * v).sum::<f64>() / n;
                    prop_assert!(mean.abs() < 1e-8);
                    prop_assert!((var - 1.0).abs() < 1e-8);
                }
            }
            // fully constant alignments cannot be encoded
            Err(_) => {}
        }
    }
}
