//! Randomized property tests over the statistical core.

use maxgauss::matrix::{
    correlation_from_covariance, pooled_covariance, psd_factorize, sample_covariance,
    sample_variances, DataMatrix, SymmetricMatrix,
};
use maxgauss::mc::draw_max_norms;
use maxgauss::multiplicity::{benjamini_hochberg, bonferroni};
use maxgauss::rng::RngSpec;
use maxgauss::screening::{lambda_threshold, screening_threshold};
use maxgauss::stats::{max_statistic, one_sample_stats, two_sample_stats};
use proptest::prelude::*;

fn data_matrix(n: usize, p: usize) -> impl Strategy<Value = DataMatrix> {
    proptest::collection::vec(proptest::collection::vec(-50.0..50.0f64, p), n)
        .prop_map(|rows| DataMatrix::from_rows(&rows, None).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn covariance_is_psd_and_matches_variances(data in (2usize..9, 2usize..6).prop_flat_map(|(n, p)| data_matrix(n, p))) {
        let cov = sample_covariance(&data).unwrap();
        let vars = sample_variances(&data);
        for (k, v) in vars.iter().enumerate() {
            prop_assert!((cov.get(k, k) - v).abs() < 1e-8);
        }
        let eig = cov.as_dense().clone().symmetric_eigen();
        for ev in eig.eigenvalues.iter() {
            prop_assert!(*ev > -1e-8, "negative eigenvalue {ev}");
        }
    }

    #[test]
    fn correlation_has_unit_diagonal(data in (4usize..10, 2usize..6).prop_flat_map(|(n, p)| data_matrix(n, p))) {
        let cov = sample_covariance(&data).unwrap();
        if let Ok(r) = correlation_from_covariance(&cov) {
            for k in 0..r.dim() {
                prop_assert!((r.get(k, k) - 1.0).abs() < 1e-12);
                for l in 0..r.dim() {
                    prop_assert!(r.get(k, l).abs() <= 1.0 + 1e-8);
                }
            }
        }
    }

    #[test]
    fn pooled_is_elementwise_between_inputs(
        p in 2usize..6, n in 2usize..40, m in 2usize..40, seed in 0u64..1000
    ) {
        let mut gen = RngSpec::new(seed).rng();
        use rand::Rng;
        let da: Vec<f64> = (0..p).map(|_| 1.0 + gen.gen::<f64>()).collect();
        let db: Vec<f64> = (0..p).map(|_| 1.0 + gen.gen::<f64>()).collect();
        let a = SymmetricMatrix::from_fn(p, |k, l| if k == l { da[k] } else { 0.0 });
        let b = SymmetricMatrix::from_fn(p, |k, l| if k == l { db[k] } else { 0.0 });
        let pooled = pooled_covariance(&a, &b, n, m).unwrap();
        for k in 0..p {
            let lo = a.get(k, k).min(b.get(k, k)) - 1e-12;
            let hi = a.get(k, k).max(b.get(k, k)) + 1e-12;
            prop_assert!(pooled.get(k, k) >= lo && pooled.get(k, k) <= hi);
        }
    }

    #[test]
    fn max_statistic_dominates_masked(data in (4usize..10, 2usize..7).prop_flat_map(|(n, p)| data_matrix(n, p)), mask_bits in 1u32..63) {
        let stats = one_sample_stats(&data, None).unwrap();
        let p = stats.dim();
        let mask: Vec<usize> = (0..p).filter(|k| mask_bits >> (k % 6) & 1 == 1).collect();
        if !mask.is_empty() {
            let full = max_statistic(&stats, false, None).unwrap();
            let masked = max_statistic(&stats, false, Some(&mask)).unwrap();
            prop_assert!(masked <= full + 1e-12);
        }
    }

    #[test]
    fn two_sample_statistic_symmetric_in_groups(
        x in (3usize..8, 2usize..5).prop_flat_map(|(n, p)| data_matrix(n, p)),
        seed in 0u64..500
    ) {
        let mut gen = RngSpec::new(seed).rng();
        use rand::Rng;
        let p = x.n_features();
        let m = 3 + (seed as usize % 5);
        let rows: Vec<Vec<f64>> = (0..m).map(|_| (0..p).map(|_| gen.gen::<f64>() * 20.0 - 10.0).collect()).collect();
        let y = DataMatrix::from_rows(&rows, None).unwrap();
        let a = two_sample_stats(&x, &y).unwrap();
        let b = two_sample_stats(&y, &x).unwrap();
        let ta = max_statistic(&a, false, None).unwrap();
        let tb = max_statistic(&b, false, None).unwrap();
        prop_assert!((ta - tb).abs() < 1e-10);
    }

    #[test]
    fn thresholds_ordered_and_positive(p in 2usize..5000, alpha in 0.001f64..0.999) {
        let s = screening_threshold(p, alpha).unwrap();
        let l = lambda_threshold(p, alpha).unwrap();
        prop_assert!(s > l && l > 0.0);
    }

    #[test]
    fn bh_rejections_superset_of_bonferroni(
        ps in proptest::collection::vec(0.0f64..1.0, 1..20), q in 0.01f64..0.3
    ) {
        let bh = benjamini_hochberg(&ps, q).unwrap();
        let bf = bonferroni(&ps, q).unwrap();
        for (b, f) in bh.rejected.iter().zip(&bf) {
            prop_assert!(*b || !*f);
        }
    }

    #[test]
    fn quantile_monotone_in_alpha(seed in 0u64..200, a1 in 0.01f64..0.5, a2 in 0.01f64..0.5) {
        let m = SymmetricMatrix::from_fn(4, |k, l| 0.3f64.powi(k.abs_diff(l) as i32));
        let factor = psd_factorize(&m, 0.0).unwrap();
        let est = draw_max_norms(&factor, 300, None, RngSpec::new(seed)).unwrap();
        let (lo, hi) = if a1 < a2 { (a1, a2) } else { (a2, a1) };
        // smaller alpha -> higher quantile
        prop_assert!(est.quantile(lo).unwrap() >= est.quantile(hi).unwrap());
    }
}
